//! Near-identity-map frontend: from a map `Psi = 1 + G` build the action
//! functions `I_j = Psi_j Psi_{-j}`, their Hamiltonian fields (scaled so
//! the linear parts are exactly the fundamental family), and the
//! hypothesis report feeding the normalization run.

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::scalar::ScalarFunction;
use crate::vector_field::{Family, VectorField};

/// A map `Psi = 1 + G` with `G` vanishing to second order, stored as one
/// scalar component per variable index. The container is field-shaped but
/// represents a coordinate map, not a dynamical field.
#[derive(Clone, Debug)]
pub struct NearIdentityMap<C: Coeff> {
    g: VectorField<C>,
}

impl<C: Coeff> NearIdentityMap<C> {
    pub fn new(g: VectorField<C>) -> Result<Self> {
        if !g.is_zero() && g.min_degree() < 2 {
            return Err(Error::Invalid(format!(
                "map correction must vanish to second order, found degree {}",
                g.min_degree()
            )));
        }
        Ok(NearIdentityMap { g })
    }

    /// The identity map on `n` variable pairs.
    pub fn identity(n: usize, trunc: u32) -> Self {
        NearIdentityMap {
            g: VectorField::zero(n, trunc),
        }
    }

    /// Time-1 flow of the Hamiltonian field of `s`, truncated at `d`:
    /// the components are `z_k` pulled through the flow, so the map is
    /// canonical by construction and its actions pairwise commute.
    pub fn from_canonical_flow(s: &ScalarFunction<C>, d: u32) -> Result<Self> {
        let u = s.hamiltonian_vf();
        if !u.is_zero() && u.min_degree() < 2 {
            return Err(Error::NonterminatingSeries(u.min_degree()));
        }
        let n = s.n();
        let mut g = VectorField::zero(n, d.min(s.trunc()));
        for k in component_indices(n) {
            let zk = ScalarFunction::var(n, s.trunc(), k);
            let moved = zk.apply_transform(std::slice::from_ref(&u), d)?;
            for (q, c) in moved.sub(&zk)?.iter() {
                g.add_term_raw(q.clone(), k, c.clone());
            }
        }
        NearIdentityMap::new(g)
    }

    pub fn n(&self) -> usize {
        self.g.n()
    }

    pub fn trunc(&self) -> u32 {
        self.g.trunc()
    }

    pub fn correction(&self) -> &VectorField<C> {
        &self.g
    }

    /// Component `G^k` as a scalar polynomial.
    pub fn component(&self, k: i32) -> ScalarFunction<C> {
        self.g.component(k)
    }

    /// The actions `I_j = (z_j + G^j)(z_{-j} + G^{-j})` for `j = 1..n`,
    /// truncated at `trunc + 1`: a map known through degree `trunc`
    /// determines its actions one degree higher, which is exactly what the
    /// Hamiltonian fields at degree `trunc` need.
    pub fn actions(&self) -> Result<Vec<ScalarFunction<C>>> {
        let n = self.n();
        let trunc = self.trunc() + 1;
        (1..=n as i32)
            .map(|j| {
                let plus =
                    ScalarFunction::var(n, trunc, j).add(&self.component(j).with_trunc(trunc))?;
                let minus =
                    ScalarFunction::var(n, trunc, -j).add(&self.component(-j).with_trunc(trunc))?;
                plus.mul(&minus)
            })
            .collect()
    }

    /// The family `i X_{I_l}` assembled termwise from the product rule:
    /// for `k >= 1` the `e_k` component is
    /// `(z_k + G^k) delta_{lk} + (z_l + G^l) dG^{-l}/dz_{-k}
    ///  + (z_{-l} + G^{-l}) dG^l/dz_{-k}`
    /// and the `e_{-k}` component mirrors it with a minus sign and
    /// derivatives in `z_k`. The linear part of member `l` is exactly the
    /// fundamental field.
    pub fn fields(&self) -> Result<Family<C>> {
        let n = self.n();
        let trunc = self.trunc();
        let mut members = Vec::with_capacity(n);
        for l in 1..=n as i32 {
            let mut member = VectorField::zero(n, trunc);
            let psi_plus = ScalarFunction::var(n, trunc, l).add(&self.component(l))?;
            let psi_minus = ScalarFunction::var(n, trunc, -l).add(&self.component(-l))?;
            for k in 1..=n as i32 {
                // e_k component
                let mut comp = psi_plus
                    .mul(&self.component(-l).derivative(-k))?
                    .add(&psi_minus.mul(&self.component(l).derivative(-k))?)?;
                if k == l {
                    comp = comp.add(&psi_plus)?;
                }
                push_component(&mut member, k, &comp);
                // e_{-k} component
                let mut comp_neg = psi_minus
                    .mul(&self.component(l).derivative(k))?
                    .add(&psi_plus.mul(&self.component(-l).derivative(k))?)?;
                if k == l {
                    comp_neg = comp_neg.add(&psi_minus)?;
                }
                push_component(&mut member, -k, &comp_neg.neg());
            }
            members.push(member);
        }
        Family::new(n, trunc, members)
    }

    /// The same family through the generic Hamiltonian formula,
    /// `i X_{I_l}`; an independent code path used to cross-check
    /// [`NearIdentityMap::fields`].
    pub fn fields_via_hamiltonian(&self) -> Result<Family<C>> {
        let n = self.n();
        let trunc = self.trunc();
        let members = self
            .actions()?
            .into_iter()
            .map(|i_l| i_l.hamiltonian_vf().scale(&C::i()).with_trunc(trunc))
            .collect();
        Family::new(n, trunc, members)
    }
}

fn component_indices(n: usize) -> impl Iterator<Item = i32> {
    (1..=n as i32).flat_map(|k| [k, -k])
}

fn push_component<C: Coeff>(field: &mut VectorField<C>, k: i32, comp: &ScalarFunction<C>) {
    for (q, c) in comp.iter() {
        field.add_term_raw(q.clone(), k, c.clone());
    }
}

/// Hypothesis report for the frontend: pairwise commutation of the
/// actions through degree `d`, the second-order zero of the correction,
/// cross-path equality of the two field assemblies, and the operator
/// analyticity condition, which holds trivially at finite dimension.
#[derive(Clone, Debug)]
pub struct KpReport {
    pub min_degree_ok: bool,
    pub kp1_ok: bool,
    /// First failing pair and the lowest degree of the offending bracket.
    pub kp1_first_violation: Option<(usize, usize, u32)>,
    pub cross_path_ok: bool,
    pub kp2_note: &'static str,
    pub checked_degree: u32,
}

impl KpReport {
    pub fn all_ok(&self) -> bool {
        self.min_degree_ok && self.kp1_ok && self.cross_path_ok
    }
}

pub fn kp_hypothesis_check<C: Coeff>(psi: &NearIdentityMap<C>, d: u32) -> Result<KpReport> {
    let actions = psi.actions()?;
    let min_degree_ok = psi.correction().is_zero() || psi.correction().min_degree() >= 2;
    let mut kp1_ok = true;
    let mut kp1_first_violation = None;
    let checked_degree = d.min(psi.trunc());
    'outer: for j in 0..actions.len() {
        for k in (j + 1)..actions.len() {
            let bracket = actions[j].poisson(&actions[k])?;
            let low = bracket.jet(checked_degree.min(bracket.trunc()));
            if !low.is_zero() {
                kp1_ok = false;
                kp1_first_violation = Some((j + 1, k + 1, low.min_degree()));
                break 'outer;
            }
        }
    }
    let a = psi.fields()?;
    let b = psi.fields_via_hamiltonian()?;
    let cross_path_ok = a.iter().zip(b.iter()).all(|(x, y)| x.eq_terms(y));
    Ok(KpReport {
        min_degree_ok,
        kp1_ok,
        kp1_first_violation,
        cross_path_ok,
        kp2_note: "holds trivially (finite dimension)",
        checked_degree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Rat;
    use crate::multi_index::MultiIndex;

    #[test]
    fn identity_map_gives_plain_actions_and_fundamental_fields() {
        let psi = NearIdentityMap::<Rat>::identity(2, 6);
        let actions = psi.actions().unwrap();
        for (j, a) in actions.iter().enumerate() {
            assert!(a.eq_terms(&ScalarFunction::action(2, 6, j + 1)));
        }
        let fields = psi.fields().unwrap();
        let e = Family::<Rat>::fundamental(2, 2, 6);
        for (got, want) in fields.iter().zip(e.iter()) {
            assert!(got.eq_terms(want));
        }
        let rep = kp_hypothesis_check(&psi, 6).unwrap();
        assert!(rep.all_ok());
    }

    #[test]
    fn single_term_correction_action() {
        // G^1 = c z_{-1}^2 gives I_1 = z_1 z_{-1} + c z_{-1}^3
        let c = Rat::from_ratio(3, 7);
        let g = VectorField::monomial(
            1,
            6,
            MultiIndex::from_pairs(&[(-1, 2)]),
            1,
            c.clone(),
        )
        .unwrap();
        let psi = NearIdentityMap::new(g).unwrap();
        let i1 = &psi.actions().unwrap()[0];
        let expected = ScalarFunction::action(1, 6, 1)
            .add(
                &ScalarFunction::monomial(1, 6, MultiIndex::from_pairs(&[(-1, 3)]), c).unwrap(),
            )
            .unwrap();
        assert!(i1.eq_terms(&expected));

        // both assembly paths agree even off the commuting hypothesis
        let fields = psi.fields().unwrap();
        let via_h = psi.fields_via_hamiltonian().unwrap();
        assert!(fields.member(0).eq_terms(via_h.member(0)));
    }

    #[test]
    fn cross_path_equality_on_random_quadratic_corrections() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let n = 2;
            let trunc = 6;
            let mut g = VectorField::zero(n, trunc);
            for k in component_indices(n) {
                for _ in 0..rng.gen_range(0..3) {
                    let q = MultiIndex::from_pairs(&[
                        (1, rng.gen_range(0..2)),
                        (-1, rng.gen_range(0..2)),
                        (2, rng.gen_range(0..2)),
                        (-2, rng.gen_range(0..2)),
                    ]);
                    if q.degree() != 2 {
                        continue;
                    }
                    g.add_term_raw(q, k, Rat::from_ratio(rng.gen_range(-5..5), rng.gen_range(1..4)));
                }
            }
            let psi = NearIdentityMap::new(g).unwrap();
            let a = psi.fields().unwrap();
            let b = psi.fields_via_hamiltonian().unwrap();
            for (x, y) in a.iter().zip(b.iter()) {
                assert!(x.eq_terms(y));
            }
            // linear parts are exactly the fundamental fields
            for (l, x) in a.iter().enumerate() {
                assert!(x
                    .homogeneous_part(1)
                    .eq_terms(&VectorField::fundamental(l + 1, n, trunc)));
            }
        }
    }

    #[test]
    fn flow_generated_map_commutes_and_generic_map_fails() {
        let n = 2;
        let d = 6;
        // canonical flow of a random cubic Hamiltonian
        let s = ScalarFunction::<Rat>::monomial(
            n,
            d,
            MultiIndex::from_pairs(&[(1, 2), (-2, 1)]),
            Rat::from_ratio(1, 3),
        )
        .unwrap()
        .add(
            &ScalarFunction::monomial(
                n,
                d,
                MultiIndex::from_pairs(&[(2, 1), (-1, 1), (1, 1)]),
                Rat::from_ratio(-2, 5),
            )
            .unwrap(),
        )
        .unwrap();
        let psi = NearIdentityMap::from_canonical_flow(&s, d).unwrap();
        assert!(!psi.correction().is_zero());
        let rep = kp_hypothesis_check(&psi, d).unwrap();
        assert!(rep.kp1_ok, "flow-generated actions must commute: {rep:?}");
        assert!(rep.all_ok());

        // a generic one-term correction does not commute
        let g = VectorField::monomial(
            n,
            d,
            MultiIndex::from_pairs(&[(2, 2)]),
            1,
            Rat::one(),
        )
        .unwrap();
        let psi_bad = NearIdentityMap::new(g).unwrap();
        let rep_bad = kp_hypothesis_check(&psi_bad, d).unwrap();
        assert!(!rep_bad.kp1_ok);
        assert!(rep_bad.kp1_first_violation.is_some());
    }

    #[test]
    fn first_order_corrections_are_rejected() {
        let g = VectorField::monomial(1, 4, MultiIndex::var(1), 1, Rat::one()).unwrap();
        assert!(NearIdentityMap::new(g).is_err());
    }
}
