//! The linear and nonlinear cohomological equations.
//!
//! The linear equation `[E^i, U] = F^i` is solved by divisor division on a
//! nonresonant cocycle. The nonlinear equation `J^{2m}([NF^i, U]) = B^i`
//! against a completely integrable normal form is solved twice, by two
//! independent routes that must agree exactly: a degree-by-degree recursion
//! that peels the correction terms, and a blockwise solve over joint
//! eigenspaces that inverts `b_lambda = |lambda| + c_lambda` as a
//! terminating Neumann series and applies the nilpotent transport operator
//! `P_lambda`.

use std::collections::BTreeSet;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use crate::norms::{box_norm, deriv_box_norm, leq_with_slack, Majorant, WeightTable};
use crate::resonance::{divisor, eigen_decompose, Lambda};
use crate::scalar::ScalarFunction;
use crate::vector_field::{Family, Term, VectorField};

/// A family `F^i` with `[E^i, F^j] = [E^j, F^i]` for all pairs, the
/// compatibility that makes simultaneous solvability possible. Verified
/// termwise on construction.
#[derive(Clone, Debug)]
pub struct Cocycle<C: Coeff> {
    family: Family<C>,
}

impl<C: Coeff> Cocycle<C> {
    /// Wrap a family after checking the compatibility relation
    /// `divisor_i(Q,l) F^j_{Q,l} = divisor_j(Q,l) F^i_{Q,l}` on every term.
    pub fn new(family: Family<C>) -> Result<Self> {
        let count = family.len();
        let mut keys: BTreeSet<Term> = BTreeSet::new();
        for member in family.iter() {
            for (t, _) in member.iter() {
                keys.insert(t.clone());
            }
        }
        for t in &keys {
            let coeffs: Vec<C> = (0..count)
                .map(|i| family.member(i).coeff(&t.q, t.j))
                .collect();
            let divisors: Vec<i64> = (1..=count).map(|i| divisor(&t.q, t.j, i)).collect();
            for i in 0..count {
                for j in (i + 1)..count {
                    let lhs = coeffs[j].mul(&C::from_int(divisors[i]));
                    let rhs = coeffs[i].mul(&C::from_int(divisors[j]));
                    if !lhs.sub(&rhs).is_zero() {
                        return Err(Error::NotACocycle {
                            q: t.q.to_string(),
                            l: t.j,
                            i: i + 1,
                            j: j + 1,
                        });
                    }
                }
            }
        }
        Ok(Cocycle { family })
    }

    pub fn family(&self) -> &Family<C> {
        &self.family
    }

    pub fn len(&self) -> usize {
        self.family.len()
    }

    pub fn is_empty(&self) -> bool {
        self.family.is_empty()
    }
}

/// Witness index for divisor division: the `i` maximizing `|divisor|`,
/// ties broken by the smallest index. Errors when every divisor vanishes.
pub fn choose_witness(q: &MultiIndex, l: i32, n_family: usize) -> Result<usize> {
    let mut best: Option<(i64, usize)> = None;
    for i in 1..=n_family {
        let d = divisor(q, l, i).abs();
        if d > 0 && best.map_or(true, |(bd, _)| d > bd) {
            best = Some((d, i));
        }
    }
    best.map(|(_, i)| i).ok_or_else(|| Error::ResonantTerm {
        q: q.to_string(),
        j: l,
    })
}

/// Solve `[E^i, U] = F^i` for the unique normalized `U` on a nonresonant
/// cocycle: `U_{Q,l} = F^{i(Q,l)}_{Q,l} / divisor_{i(Q,l)}(Q,l)`.
pub fn solve_linear<C: Coeff>(cocycle: &Cocycle<C>) -> Result<VectorField<C>> {
    let family = cocycle.family();
    let count = family.len();
    let mut u = VectorField::zero(family.n(), family.trunc());
    let mut keys: BTreeSet<Term> = BTreeSet::new();
    for member in family.iter() {
        for (t, _) in member.iter() {
            keys.insert(t.clone());
        }
    }
    for t in keys {
        let witness = choose_witness(&t.q, t.j, count)?;
        let d = divisor(&t.q, t.j, witness);
        let coeff = family.member(witness - 1).coeff(&t.q, t.j);
        u.add_term_raw(t.q, t.j, coeff.div_int(d));
    }
    Ok(u)
}

/// A completely integrable normal form `NF^i = E^i + sum_j a_{i,j} E^j`
/// with action-polynomial coefficients `a_{i,j}`.
#[derive(Clone, Debug)]
pub struct NormalFormFamily<C: Coeff> {
    n: usize,
    count: usize,
    trunc: u32,
    // a[i][j]: coefficient of E^{j+1} in the correction of member i + 1
    a: Vec<Vec<ScalarFunction<C>>>,
}

impl<C: Coeff> NormalFormFamily<C> {
    /// The uncorrected family (all `a_{i,j} = 0`).
    pub fn trivial(n: usize, count: usize, trunc: u32) -> Self {
        let a = vec![vec![ScalarFunction::zero(n, trunc); n]; count];
        NormalFormFamily { n, count, trunc, a }
    }

    /// Build from an explicit coefficient matrix, validating that every
    /// entry is an action polynomial vanishing to order at least two.
    pub fn new(n: usize, count: usize, trunc: u32, a: Vec<Vec<ScalarFunction<C>>>) -> Result<Self> {
        if a.len() != count || a.iter().any(|row| row.len() != n) {
            return Err(Error::Invalid(format!(
                "coefficient matrix must be {count} x {n}"
            )));
        }
        for (i, row) in a.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                if entry.n() != n {
                    return Err(Error::MismatchedVars(n, entry.n()));
                }
                if !entry.is_action_polynomial() {
                    return Err(Error::NotCompletelyIntegrable(format!(
                        "a[{},{}] contains a non-action monomial",
                        i + 1,
                        j + 1
                    )));
                }
                if !entry.is_zero() && entry.min_degree() < 2 {
                    return Err(Error::NotCompletelyIntegrable(format!(
                        "a[{},{}] has degree below 2 and would disturb the linear part",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(NormalFormFamily { n, count, trunc, a })
    }

    /// Recognize a family of full fields `E^i + N^i` as a normal form,
    /// extracting the action coefficients.
    pub fn from_family(family: &Family<C>) -> Result<Self> {
        let n = family.n();
        let trunc = family.trunc();
        let mut a = Vec::with_capacity(family.len());
        for (idx, member) in family.iter().enumerate() {
            let e = VectorField::fundamental(idx + 1, n, trunc);
            if !member.homogeneous_part(1).eq_terms(&e) {
                return Err(Error::WrongLinearPart(idx + 1));
            }
            let correction = member.sub(&e)?;
            a.push(Self::extract_coefficients(&correction, n)?);
        }
        NormalFormFamily::new(n, family.len(), trunc, a)
    }

    /// Solve `N = sum_j a_j E^j` for the `a_j`: the `e_j` component must be
    /// divisible by `z_j`, the `e_{-j}` component must mirror it with the
    /// opposite sign, and each `a_j` must be a polynomial in the actions.
    /// Failure of any of these is the detection mechanism for normal forms
    /// that are not completely integrable.
    pub fn extract_coefficients(
        correction: &VectorField<C>,
        n: usize,
    ) -> Result<Vec<ScalarFunction<C>>> {
        let trunc = correction.trunc();
        let mut coeffs = Vec::with_capacity(n);
        for j in 1..=n as i32 {
            let comp = correction.component(j);
            let mut a_j = ScalarFunction::zero(n, trunc);
            for (q, c) in comp.iter() {
                let reduced = q.div_var(j).ok_or_else(|| {
                    Error::NotCompletelyIntegrable(format!(
                        "component e_{j} term {q} is not divisible by z_{j}"
                    ))
                })?;
                a_j.insert_raw(reduced, c.clone());
            }
            if !a_j.is_action_polynomial() {
                return Err(Error::NotCompletelyIntegrable(format!(
                    "coefficient on E^{j} is not an action polynomial"
                )));
            }
            coeffs.push(a_j);
        }
        // the mirrored components must reassemble the field exactly
        let mut assembled = VectorField::zero(n, trunc);
        for (j, a_j) in coeffs.iter().enumerate() {
            let e = VectorField::fundamental(j + 1, n, trunc);
            assembled = assembled.add(&e.mul_scalar(a_j)?)?;
        }
        if !assembled.eq_terms(correction) {
            let diff = assembled.sub(correction)?;
            let offending = diff
                .iter()
                .next()
                .map(|(t, _)| format!("{t:?}"))
                .unwrap_or_default();
            return Err(Error::NotCompletelyIntegrable(format!(
                "components do not pair into multiples of the fundamental fields (first mismatch at {offending})"
            )));
        }
        Ok(coeffs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    /// `a_{i,j}` with 1-based indices.
    pub fn a(&self, i: usize, j: usize) -> &ScalarFunction<C> {
        &self.a[i - 1][j - 1]
    }

    /// The correction `N^i = sum_j a_{i,j} E^j` (1-based `i`).
    pub fn correction(&self, i: usize) -> Result<VectorField<C>> {
        let mut out = VectorField::zero(self.n, self.trunc);
        for j in 1..=self.n {
            let a = &self.a[i - 1][j - 1];
            if a.is_zero() {
                continue;
            }
            let e = VectorField::fundamental(j, self.n, self.trunc);
            out = out.add(&e.mul_scalar(a)?)?;
        }
        Ok(out)
    }

    /// The full field `NF^i = E^i + N^i` (1-based `i`).
    pub fn field(&self, i: usize) -> Result<VectorField<C>> {
        VectorField::fundamental(i, self.n, self.trunc).add(&self.correction(i)?)
    }

    pub fn fields(&self) -> Result<Family<C>> {
        let members = (1..=self.count)
            .map(|i| self.field(i))
            .collect::<Result<Vec<_>>>()?;
        Family::new(self.n, self.trunc, members)
    }

    pub fn corrections(&self) -> Result<Family<C>> {
        let members = (1..=self.count)
            .map(|i| self.correction(i))
            .collect::<Result<Vec<_>>>()?;
        Family::new(self.n, self.trunc, members)
    }

    /// Degree-`p` homogeneous part of `NF^i`: `E^i` at `p = 1`, otherwise
    /// the degree-`(p-1)` slices of the coefficients times the fundamentals.
    pub fn homogeneous_field_part(&self, i: usize, p: u32) -> Result<VectorField<C>> {
        if p == 1 {
            return Ok(VectorField::fundamental(i, self.n, self.trunc));
        }
        let mut out = VectorField::zero(self.n, self.trunc);
        for j in 1..=self.n {
            let slice = self.a[i - 1][j - 1].homogeneous_part(p - 1);
            if slice.is_zero() {
                continue;
            }
            let e = VectorField::fundamental(j, self.n, self.trunc);
            out = out.add(&e.mul_scalar(&slice)?)?;
        }
        Ok(out)
    }

    /// True when every coefficient vanishes (the normal form is `E` itself).
    pub fn is_trivial(&self) -> bool {
        self.a.iter().flatten().all(|s| s.is_zero())
    }

    /// Merge additional resonant content `B^i` into the coefficients.
    pub fn absorb(&self, b_res: &Family<C>) -> Result<Self> {
        if b_res.len() != self.count {
            return Err(Error::MismatchedFamily(self.count, b_res.len()));
        }
        let mut a = self.a.clone();
        for (i, member) in b_res.iter().enumerate() {
            let delta = Self::extract_coefficients(member, self.n)?;
            for (j, d) in delta.into_iter().enumerate() {
                a[i][j] = a[i][j].add(&d)?;
            }
        }
        NormalFormFamily::new(self.n, self.count, self.trunc, a)
    }
}

fn validate_nonlinear_input<C: Coeff>(
    nf: &NormalFormFamily<C>,
    b: &Family<C>,
    m: u32,
) -> Result<()> {
    if b.len() != nf.count() {
        return Err(Error::MismatchedFamily(nf.count(), b.len()));
    }
    if b.n() != nf.n() {
        return Err(Error::MismatchedVars(nf.n(), b.n()));
    }
    for member in b.iter() {
        if member.min_degree() < m + 1 {
            return Err(Error::Invalid(format!(
                "right-hand side must vanish to order {} but has degree-{} terms",
                m + 1,
                member.min_degree()
            )));
        }
        if member.max_degree() > 2 * m {
            return Err(Error::Invalid(format!(
                "right-hand side must be truncated at degree {}, found degree {}",
                2 * m,
                member.max_degree()
            )));
        }
    }
    Ok(())
}

/// Degree-by-degree recursion for the nonlinear cohomological equation:
/// for `k = m+1..=2m` solve
/// `[E^i, V_k] = B^i_k + sum_{p=2}^{k-m} [V_{k-p+1}, NF^i_p]`
/// and return `U = sum_k V_k`, the unique normalized solution of
/// `J^{2m}([NF^i, U]) = B^i`.
pub fn solve_nonlinear_recursive<C: Coeff>(
    nf: &NormalFormFamily<C>,
    b: &Family<C>,
    m: u32,
) -> Result<VectorField<C>> {
    validate_nonlinear_input(nf, b, m)?;
    let n = nf.n();
    let trunc = b.trunc();
    let count = nf.count();
    let mut stages: Vec<VectorField<C>> = Vec::new(); // V_{m+1}, ..., V_k
    let mut u = VectorField::zero(n, trunc);
    for k in (m + 1)..=(2 * m) {
        let mut rhs_members = Vec::with_capacity(count);
        for i in 1..=count {
            let mut rhs = b.member(i - 1).homogeneous_part(k);
            for p in 2..=(k - m) {
                let v = &stages[(k - p + 1 - (m + 1)) as usize];
                let nf_p = nf.homogeneous_field_part(i, p)?;
                rhs = rhs.add(&v.bracket(&nf_p)?)?;
            }
            rhs_members.push(rhs);
        }
        let cocycle = Cocycle::new(Family::new(n, trunc, rhs_members)?)?;
        let v_k = solve_linear(&cocycle)?;
        u = u.add(&v_k)?;
        stages.push(v_k);
    }
    Ok(u)
}

/// The nilpotent transport operator of the blockwise solve:
/// `P_lambda(V) = sum_j sum_{i in Supp(lambda)} eps_i V(a_{i,j}) E^j`.
/// Applying it twice gives zero, because the coefficients are first
/// integrals of the fundamental family.
pub fn p_lambda<C: Coeff>(
    nf: &NormalFormFamily<C>,
    lambda: &Lambda,
    v: &VectorField<C>,
) -> Result<VectorField<C>> {
    let n = nf.n();
    let mut out = VectorField::zero(n, v.trunc());
    for j in 1..=n {
        let mut coeff = ScalarFunction::zero(n, v.trunc());
        for i in lambda.support() {
            if i > nf.count() {
                continue;
            }
            let transported = nf.a(i, j).lie_derivative(v)?;
            let signed = if lambda.sign(i) >= 0 {
                transported
            } else {
                transported.neg()
            };
            coeff = coeff.add(&signed)?;
        }
        if coeff.is_zero() {
            continue;
        }
        let e = VectorField::fundamental(j, n, v.trunc());
        out = out.add(&e.mul_scalar(&coeff)?)?;
    }
    Ok(out)
}

/// Blockwise spectral solve of the nonlinear cohomological equation:
/// group the right-hand side by divisor vectors, combine the supported
/// members with their signs, divide by `b_lambda` via a terminating
/// Neumann series, and correct once with `P_lambda`. Produces exactly the
/// same field as the recursion.
pub fn solve_nonlinear_spectral<C: Coeff>(
    nf: &NormalFormFamily<C>,
    b: &Family<C>,
    m: u32,
) -> Result<VectorField<C>> {
    validate_nonlinear_input(nf, b, m)?;
    let n = nf.n();
    let count = nf.count();
    let trunc = b.trunc();

    // blocks[lambda][i] = projection of B^i onto the joint eigenspace
    let mut blocks: std::collections::BTreeMap<Lambda, Vec<VectorField<C>>> =
        std::collections::BTreeMap::new();
    for i in 0..count {
        for (lambda, piece) in eigen_decompose(b.member(i), count) {
            let entry = blocks
                .entry(lambda)
                .or_insert_with(|| vec![VectorField::zero(n, trunc); count]);
            entry[i] = piece;
        }
    }

    let mut u = VectorField::zero(n, trunc);
    for (lambda, members) in &blocks {
        if lambda.is_zero() {
            let t = members
                .iter()
                .find_map(|v| v.iter().next().map(|(t, _)| t.clone()))
                .expect("nonempty block");
            return Err(Error::ResonantTerm {
                q: t.q.to_string(),
                j: t.j,
            });
        }
        let norm1 = lambda.norm1();

        // b_tilde = sum_{i in Supp} eps_i B^i_lambda
        let mut b_tilde = VectorField::zero(n, trunc);
        for i in lambda.support() {
            let signed = if lambda.sign(i) >= 0 {
                members[i - 1].clone()
            } else {
                members[i - 1].neg()
            };
            b_tilde = b_tilde.add(&signed)?;
        }

        // c_lambda = sum_{j,i in Supp} eps_i a_{i,j} lambda_j
        let mut c_lambda = ScalarFunction::zero(n, trunc);
        for j in lambda.support() {
            if j > n {
                continue;
            }
            for i in lambda.support() {
                let contrib = nf.a(i, j).scale_int(lambda.sign(i) * lambda.get(j));
                c_lambda = c_lambda.add(&contrib)?;
            }
        }

        // 1/b_lambda = sum_t (-1)^t c_lambda^t / |lambda|^{t+1}; only the
        // jet of degree <= m - 1 can contribute below the final cut
        let series_cut = m.saturating_sub(1);
        let mut inv_b = ScalarFunction::monomial(n, trunc, MultiIndex::unit(), C::one())?
            .div_int(norm1);
        let mut power = inv_b.clone();
        while !power.is_zero() {
            power = power
                .mul(&c_lambda)?
                .div_int(-norm1)
                .jet(series_cut);
            inv_b = inv_b.add(&power)?;
        }

        // with the bracket orientation fixed by the divisor formula,
        // [a E^j, U] = a [E^j, U] - U(a) E^j, so the blockwise equation is
        // b_lambda U - P_lambda U = b_tilde and the correction enters with
        // a plus sign
        let w = b_tilde.mul_scalar(&inv_b)?;
        let correction = p_lambda(nf, lambda, &w)?.mul_scalar(&inv_b)?;
        u = u.add(&w.add(&correction)?)?;
    }
    Ok(u.jet(2 * m))
}

/// Hypothesis gate and verdict for the solution bound of the nonlinear
/// equation: when the majorant derivative of the correction family is at
/// most 1/2 on the ball, the normalized solution obeys
/// `||underline U||_r <= 4 ||underline B||_r`.
#[derive(Clone, Debug)]
pub struct SolutionBoundReport {
    pub hypothesis_met: bool,
    pub deriv_bound: f64,
    pub eps: f64,
    pub u_norm: f64,
    pub factor: f64,
    pub ok: Option<bool>,
}

pub fn solution_bound_check<C: Coeff>(
    nf: &NormalFormFamily<C>,
    b: &Family<C>,
    u: &VectorField<C>,
    r: f64,
    w: &WeightTable,
) -> Result<SolutionBoundReport> {
    let corrections = nf.corrections()?;
    let deriv_bound = deriv_box_norm(&Majorant::of_family(&corrections), r, w);
    let eps = box_norm(&Majorant::of_family(b), r, w);
    let u_norm = box_norm(&Majorant::of_field(u), r, w);
    let hypothesis_met = deriv_bound <= 0.5;
    let ok = hypothesis_met.then(|| leq_with_slack(u_norm, 4.0 * eps));
    Ok(SolutionBoundReport {
        hypothesis_met,
        deriv_bound,
        eps,
        u_norm,
        factor: if eps > 0.0 { u_norm / eps } else { 0.0 },
        ok,
    })
}
