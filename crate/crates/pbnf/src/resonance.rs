//! Divisors, resonant/nonresonant splitting and joint eigenspace
//! decomposition with respect to the fundamental family.
//!
//! The bracket with `E^i` acts diagonally on monomial fields:
//! `[E^i, z^Q e_j] = (q_i - q_{-i} - mu^i_j) z^Q e_j`. The integer on the
//! right is the divisor; a term is resonant when the divisor vanishes for
//! every member of the family.

use std::collections::BTreeMap;

use crate::coeff::Coeff;
use crate::multi_index::{enumerate, MultiIndex};
use crate::vector_field::VectorField;

/// `mu^i_j = delta^i_j - delta^i_{-j}`: the eigenvalue of `E^i` on `z_j e_j`.
pub fn mu(i: usize, j: i32) -> i64 {
    assert!(i >= 1 && j != 0);
    if j == i as i32 {
        1
    } else if j == -(i as i32) {
        -1
    } else {
        0
    }
}

/// The divisor `(Q, mu^i) - mu^i_j = q_i - q_{-i} - mu^i_j`.
pub fn divisor(q: &MultiIndex, j: i32, i: usize) -> i64 {
    let qi = q.exp(i as i32) as i64;
    let qmi = q.exp(-(i as i32)) as i64;
    qi - qmi - mu(i, j)
}

/// Resonant with respect to the first `n_family` fundamental fields:
/// every divisor vanishes.
pub fn is_resonant(q: &MultiIndex, j: i32, n_family: usize) -> bool {
    assert!(n_family >= 1);
    (1..=n_family).all(|i| divisor(q, j, i) == 0)
}

/// Split a field into its resonant and nonresonant parts; the two pieces
/// sum back to the input exactly.
pub fn split<C: Coeff>(x: &VectorField<C>, n_family: usize) -> (VectorField<C>, VectorField<C>) {
    let mut res = VectorField::zero(x.n(), x.trunc());
    let mut nres = VectorField::zero(x.n(), x.trunc());
    for (t, c) in x.iter() {
        if is_resonant(&t.q, t.j, n_family) {
            res.add_term_raw(t.q.clone(), t.j, c.clone());
        } else {
            nres.add_term_raw(t.q.clone(), t.j, c.clone());
        }
    }
    (res, nres)
}

/// Exhaustively certify the small-divisor constant: the minimum over all
/// nonresonant `(Q, j)` with `|Q| <= d_max` of `max_i |divisor|`.
///
/// Divisors are integers, so the result is always at least 1; the
/// enumeration is over variables and components in `{-n..-1, 1..n}` and
/// family indices `1..=n_family`, degrees ascending.
pub fn small_divisor_audit(n: usize, n_family: usize, d_max: u32) -> i64 {
    assert!(d_max >= 2);
    let mut best: Option<i64> = None;
    for q in enumerate(n, 0, d_max) {
        for abs_j in 1..=n as i32 {
            for j in [abs_j, -abs_j] {
                let max_div = (1..=n_family)
                    .map(|i| divisor(&q, j, i).abs())
                    .max()
                    .unwrap_or(0);
                if max_div > 0 {
                    best = Some(best.map_or(max_div, |b| b.min(max_div)));
                }
            }
        }
    }
    best.expect("every degree range <= d_max contains nonresonant monomials")
}

/// Divisor vector over the family: the generalized eigenvalue of a
/// monomial term. Sparse, sorted by family index.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Lambda {
    entries: Vec<(usize, i64)>,
}

impl Lambda {
    /// Divisor vector of the term `(Q, j)` over `i = 1..=n_family`.
    pub fn of_term(q: &MultiIndex, j: i32, n_family: usize) -> Self {
        let entries = (1..=n_family)
            .filter_map(|i| {
                let d = divisor(q, j, i);
                (d != 0).then_some((i, d))
            })
            .collect();
        Lambda { entries }
    }

    pub fn zero() -> Self {
        Lambda { entries: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// `|lambda| = sum_i |lambda_i|`.
    pub fn norm1(&self) -> i64 {
        self.entries.iter().map(|&(_, v)| v.abs()).sum()
    }

    pub fn get(&self, i: usize) -> i64 {
        self.entries
            .iter()
            .find(|&&(k, _)| k == i)
            .map(|&(_, v)| v)
            .unwrap_or(0)
    }

    /// Support: family indices with a nonzero divisor.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(i, _)| i)
    }

    /// Sign of `lambda_i` for `i` in the support.
    pub fn sign(&self, i: usize) -> i64 {
        self.get(i).signum()
    }
}

/// Group the terms of a field by their divisor vector. Summing the blocks
/// recovers the field exactly, and each block `V` at key `lambda`
/// satisfies `[E^i, V] = lambda_i V` termwise.
pub fn eigen_decompose<C: Coeff>(
    x: &VectorField<C>,
    n_family: usize,
) -> BTreeMap<Lambda, VectorField<C>> {
    let mut blocks: BTreeMap<Lambda, VectorField<C>> = BTreeMap::new();
    for (t, c) in x.iter() {
        let lambda = Lambda::of_term(&t.q, t.j, n_family);
        blocks
            .entry(lambda)
            .or_insert_with(|| VectorField::zero(x.n(), x.trunc()))
            .add_term_raw(t.q.clone(), t.j, c.clone());
    }
    blocks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Rat;
    use crate::vector_field::Family;

    #[test]
    fn mu_values() {
        assert_eq!(mu(1, 1), 1);
        assert_eq!(mu(1, -1), -1);
        assert_eq!(mu(2, 3), 0);
        assert_eq!(mu(2, -2), -1);
    }

    #[test]
    fn divisor_hand_cases() {
        let q = MultiIndex::from_pairs(&[(1, 2), (-1, 1)]);
        assert_eq!(divisor(&q, 1, 1), 0); // 2 - 1 - 1
        let q2 = MultiIndex::from_pairs(&[(1, 2)]);
        assert_eq!(divisor(&q2, 1, 1), 1); // 2 - 0 - 1
        assert_eq!(divisor(&MultiIndex::unit(), 1, 2), 0);
    }

    #[test]
    fn resonance_classification() {
        // z_1 z_{-1} on e_1 is NOT resonant: divisor 1 - 1 - 1 = -1
        let q = MultiIndex::from_pairs(&[(1, 1), (-1, 1)]);
        assert!(!is_resonant(&q, 1, 1));
        // z_1^2 z_{-1} on e_1 is resonant for any family size
        let q = MultiIndex::from_pairs(&[(1, 2), (-1, 1)]);
        assert!(is_resonant(&q, 1, 1));
        assert!(is_resonant(&q, 1, 3));
        // z_2 on e_1 is nonresonant once the family sees index 2
        let q = MultiIndex::var(2);
        assert!(!is_resonant(&q, 1, 2));
    }

    #[test]
    fn split_is_exact_projection_pair() {
        let n = 2;
        let trunc = 6;
        let e1 = VectorField::<Rat>::fundamental(1, n, trunc);
        let (res, nres) = split(&e1, 1);
        assert!(res.eq_terms(&e1));
        assert!(nres.is_zero());

        let mixed = VectorField::from_terms(
            n,
            trunc,
            [
                (
                    MultiIndex::from_pairs(&[(1, 1), (-1, 1), (2, 1)]),
                    2,
                    Rat::one(),
                ),
                (MultiIndex::from_pairs(&[(1, 2)]), 1, Rat::from_int(5)),
            ],
        )
        .unwrap();
        let (res, nres) = split(&mixed, 2);
        assert_eq!(res.len(), 1);
        assert_eq!(nres.len(), 1);
        assert!(res.add(&nres).unwrap().eq_terms(&mixed));
        // projections are idempotent
        assert!(split(&res, 2).0.eq_terms(&res));
        assert!(split(&nres, 2).1.eq_terms(&nres));
    }

    #[test]
    fn audit_certifies_unit_constant() {
        assert_eq!(small_divisor_audit(1, 1, 3), 1);
        assert_eq!(small_divisor_audit(2, 2, 4), 1);
        assert!(small_divisor_audit(3, 2, 4) >= 1);
    }

    #[test]
    fn eigen_blocks_recombine_and_are_eigenvectors() {
        let n = 2;
        let trunc = 6;
        let x = VectorField::from_terms(
            n,
            trunc,
            [
                (MultiIndex::from_pairs(&[(1, 2)]), 1, Rat::from_ratio(1, 2)),
                (MultiIndex::from_pairs(&[(2, 1), (-1, 1)]), -2, Rat::one()),
                (
                    MultiIndex::from_pairs(&[(1, 2), (-1, 1)]),
                    1,
                    Rat::from_int(3),
                ),
            ],
        )
        .unwrap();
        let n_family = 2;
        let blocks = eigen_decompose(&x, n_family);
        let e = Family::<Rat>::fundamental(n, n_family, trunc);
        let mut sum = VectorField::zero(n, trunc);
        for (lambda, block) in &blocks {
            sum = sum.add(block).unwrap();
            for i in 1..=n_family {
                let br = e.member(i - 1).bracket(block).unwrap();
                assert!(br.eq_terms(&block.scale_int(lambda.get(i))));
            }
        }
        assert!(sum.eq_terms(&x));
    }

    #[test]
    fn resonant_monomials_have_action_structure() {
        // with a full family (n_family = n), every resonant (Q, j) is
        // z_j times a product of actions
        for n in 1..=2usize {
            for q in enumerate(n, 0, 5) {
                for abs_j in 1..=n as i32 {
                    for j in [abs_j, -abs_j] {
                        if is_resonant(&q, j, n) {
                            let reduced = q.div_var(j);
                            assert!(
                                reduced.map(|r| r.is_action()).unwrap_or(false),
                                "resonant {q} on e_{j} lacks action structure"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lambda_of_term() {
        let q = MultiIndex::from_pairs(&[(1, 2)]);
        let l = Lambda::of_term(&q, 1, 2);
        assert_eq!(l.get(1), 1);
        assert_eq!(l.get(2), 0);
        assert_eq!(l.norm1(), 1);
        assert_eq!(l.support().collect::<Vec<_>>(), vec![1]);
    }
}
