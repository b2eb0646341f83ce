//! Scalar polynomials (Hamiltonians, action coefficients), their Poisson
//! bracket, and the scalar Lie transform.
//!
//! The symplectic form is `i dz_{-k} ^ dz_k`, giving the Hamiltonian field
//! `(X_H)_k = -i sgn(k) dH/dz_{-k}` and the bracket `{H, K} = dH·X_K`.

use std::collections::BTreeMap;
use std::fmt;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use crate::vector_field::VectorField;

/// Sparse polynomial in the variables `z_{-n}, ..., z_{-1}, z_1, ..., z_n`.
#[derive(Clone, PartialEq)]
pub struct ScalarFunction<C: Coeff> {
    terms: BTreeMap<MultiIndex, C>,
    n: usize,
    trunc: u32,
}

impl<C: Coeff> ScalarFunction<C> {
    pub fn zero(n: usize, trunc: u32) -> Self {
        ScalarFunction {
            terms: BTreeMap::new(),
            n,
            trunc,
        }
    }

    /// Single term `c * z^Q`, validating ranges.
    pub fn monomial(n: usize, trunc: u32, q: MultiIndex, c: C) -> Result<Self> {
        if q.max_abs_index() as usize > n {
            return Err(Error::Invalid(format!(
                "monomial {q} uses a variable out of range for n = {n}"
            )));
        }
        if q.degree() > trunc {
            return Err(Error::Invalid(format!(
                "monomial {q} exceeds truncation degree {trunc}"
            )));
        }
        let mut s = ScalarFunction::zero(n, trunc);
        s.insert_raw(q, c);
        Ok(s)
    }

    /// The coordinate function `z_idx`.
    pub fn var(n: usize, trunc: u32, idx: i32) -> Self {
        assert!(idx != 0 && idx.unsigned_abs() as usize <= n);
        let mut s = ScalarFunction::zero(n, trunc);
        s.insert_raw(MultiIndex::var(idx), C::one());
        s
    }

    /// The action `z_j z_{-j}`.
    pub fn action(n: usize, trunc: u32, j: usize) -> Self {
        assert!(j >= 1 && j <= n);
        let mut s = ScalarFunction::zero(n, trunc);
        s.insert_raw(
            MultiIndex::from_pairs(&[(j as i32, 1), (-(j as i32), 1)]),
            C::one(),
        );
        s
    }

    /// Accumulate a term, validating index ranges and the truncation bound.
    pub fn add_term(&mut self, q: MultiIndex, c: C) -> Result<()> {
        if q.max_abs_index() as usize > self.n {
            return Err(Error::Invalid(format!(
                "monomial {q} uses a variable out of range for n = {}",
                self.n
            )));
        }
        if q.degree() > self.trunc {
            return Err(Error::Invalid(format!(
                "monomial {q} exceeds truncation degree {}",
                self.trunc
            )));
        }
        self.insert_raw(q, c);
        Ok(())
    }

    pub(crate) fn insert_raw(&mut self, q: MultiIndex, c: C) {
        if c.is_zero() || q.degree() > self.trunc {
            return;
        }
        match self.terms.get_mut(&q) {
            Some(existing) => {
                let sum = existing.add(&c);
                if sum.is_zero() {
                    self.terms.remove(&q);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(q, c);
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_degree(&self) -> u32 {
        self.terms
            .keys()
            .next()
            .map(|q| q.degree())
            .unwrap_or(u32::MAX)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, q: &MultiIndex) -> C {
        self.terms.get(q).cloned().unwrap_or_else(C::zero)
    }

    pub fn eq_terms(&self, other: &Self) -> bool {
        self.terms == other.terms
    }

    fn check_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::MismatchedVars(self.n, other.n));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_n(other)?;
        let mut out = ScalarFunction::zero(self.n, self.trunc.min(other.trunc));
        for (q, c) in &self.terms {
            out.insert_raw(q.clone(), c.clone());
        }
        for (q, c) in &other.terms {
            out.insert_raw(q.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| c.neg())
    }

    pub fn scale(&self, f: &C) -> Self {
        if f.is_zero() {
            return ScalarFunction::zero(self.n, self.trunc);
        }
        self.map_coeffs(|c| c.mul(f))
    }

    pub fn scale_int(&self, f: i64) -> Self {
        self.scale(&C::from_int(f))
    }

    pub fn div_int(&self, f: i64) -> Self {
        self.map_coeffs(|c| c.div_int(f))
    }

    fn map_coeffs(&self, f: impl Fn(&C) -> C) -> Self {
        let mut out = ScalarFunction::zero(self.n, self.trunc);
        for (q, c) in &self.terms {
            out.insert_raw(q.clone(), f(c));
        }
        out
    }

    /// Polynomial product, truncated at the smaller degree bound.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_n(other)?;
        let trunc = self.trunc.min(other.trunc);
        let mut out = ScalarFunction::zero(self.n, trunc);
        for (qa, ca) in &self.terms {
            for (qb, cb) in &other.terms {
                if qa.degree() + qb.degree() > trunc {
                    continue;
                }
                out.insert_raw(qa.mul(qb), ca.mul(cb));
            }
        }
        Ok(out)
    }

    pub fn jet(&self, d: u32) -> Self {
        let mut out = ScalarFunction::zero(self.n, self.trunc);
        for (q, c) in &self.terms {
            if q.degree() <= d {
                out.terms.insert(q.clone(), c.clone());
            }
        }
        out
    }

    /// Re-tag the truncation degree, dropping terms above it.
    pub fn with_trunc(&self, trunc: u32) -> Self {
        let mut out = ScalarFunction::zero(self.n, trunc);
        for (q, c) in &self.terms {
            if q.degree() <= trunc {
                out.terms.insert(q.clone(), c.clone());
            }
        }
        out
    }

    pub fn high_part(&self, d: u32) -> Self {
        let mut out = ScalarFunction::zero(self.n, self.trunc);
        for (q, c) in &self.terms {
            if q.degree() > d {
                out.terms.insert(q.clone(), c.clone());
            }
        }
        out
    }

    pub fn homogeneous_part(&self, s: u32) -> Self {
        let mut out = ScalarFunction::zero(self.n, self.trunc);
        for (q, c) in &self.terms {
            if q.degree() == s {
                out.terms.insert(q.clone(), c.clone());
            }
        }
        out
    }

    /// Partial derivative with respect to `z_idx`.
    pub fn derivative(&self, idx: i32) -> Self {
        let mut out = ScalarFunction::zero(self.n, self.trunc);
        for (q, c) in &self.terms {
            let e = q.exp(idx);
            if e > 0 {
                out.insert_raw(
                    q.div_var(idx).expect("positive exponent"),
                    c.mul(&C::from_int(e as i64)),
                );
            }
        }
        out
    }

    /// Lie derivative along a vector field: `V(f) = df · V`.
    pub fn lie_derivative(&self, v: &VectorField<C>) -> Result<Self> {
        if self.n != v.n() {
            return Err(Error::MismatchedVars(self.n, v.n()));
        }
        let trunc = self.trunc.min(v.trunc());
        let mut out = ScalarFunction::zero(self.n, trunc);
        for (t, c) in v.iter() {
            for (q, b) in &self.terms {
                let e = q.exp(t.j);
                if e == 0 {
                    continue;
                }
                if q.degree() - 1 + t.q.degree() > trunc {
                    continue;
                }
                let dq = q.div_var(t.j).expect("positive exponent");
                out.insert_raw(dq.mul(&t.q), b.mul(c).mul(&C::from_int(e as i64)));
            }
        }
        Ok(out)
    }

    /// Hamiltonian vector field: `(X_H)_k = -i sgn(k) dH/dz_{-k}`.
    pub fn hamiltonian_vf(&self) -> VectorField<C> {
        let mut out = VectorField::zero(self.n, self.trunc);
        let minus_i = C::i().neg();
        let plus_i = C::i();
        for (q, c) in &self.terms {
            for (l, ql) in q.iter() {
                // contribution to component k = -l
                let k = -l;
                let sign_factor = if k > 0 { &minus_i } else { &plus_i };
                let dq = q.div_var(l).expect("positive exponent");
                let coeff = c.mul(sign_factor).mul(&C::from_int(ql as i64));
                out.add_term_raw(dq, k, coeff);
            }
        }
        out
    }

    /// Poisson bracket `{H, K} = dH · X_K`.
    pub fn poisson(&self, other: &Self) -> Result<Self> {
        self.check_n(other)?;
        self.lie_derivative(&other.hamiltonian_vf())
    }

    /// True when every monomial is a product of actions `(z_l z_{-l})^k`,
    /// i.e. the polynomial is a first integral of the fundamental family.
    pub fn is_action_polynomial(&self) -> bool {
        self.terms.keys().all(|q| q.is_action())
    }

    /// Pull the function through the composed time-1 flows of the
    /// generators, in generation order: repeated `sum_k U^k(f) / k!`
    /// truncated at degree `d`.
    pub fn apply_transform(&self, generators: &[VectorField<C>], d: u32) -> Result<Self> {
        let mut trunc = self.trunc.min(d);
        for u in generators {
            trunc = trunc.min(u.trunc());
        }
        let mut acc = self.jet(trunc);
        acc.trunc = trunc;
        for u in generators {
            if u.min_degree() < 2 {
                return Err(Error::NonterminatingSeries(u.min_degree()));
            }
            let mut result = acc.clone();
            let mut cur = acc.clone();
            let mut k = 1i64;
            while !cur.is_zero() {
                cur = cur.lie_derivative(u)?.div_int(k).jet(trunc);
                for (q, c) in &cur.terms {
                    result.insert_raw(q.clone(), c.clone());
                }
                k += 1;
            }
            acc = result;
        }
        Ok(acc)
    }
}

impl<C: Coeff> fmt::Debug for ScalarFunction<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (pos, (q, c)) in self.terms.iter().enumerate() {
            if pos > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{:?}*z[{}]", c, q)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Rat;

    fn mono(n: usize, trunc: u32, pairs: &[(i32, u32)], c: Rat) -> ScalarFunction<Rat> {
        ScalarFunction::monomial(n, trunc, MultiIndex::from_pairs(pairs), c).unwrap()
    }

    #[test]
    fn hamiltonian_field_of_the_action() {
        // X_{z_1 z_{-1}} = -i z_1 e_1 + i z_{-1} e_{-1} = -i E^1
        let h = ScalarFunction::action(1, 4, 1);
        let x = h.hamiltonian_vf();
        let e1 = VectorField::<Rat>::fundamental(1, 1, 4);
        assert!(x.eq_terms(&e1.scale(&Rat::i().neg())));
        // and X_{i z_1 z_{-1}} = E^1
        let xi = h.scale(&Rat::i()).hamiltonian_vf();
        assert!(xi.eq_terms(&e1));
    }

    #[test]
    fn hamiltonian_field_of_zero() {
        let zero = ScalarFunction::<Rat>::zero(2, 4);
        assert!(zero.hamiltonian_vf().is_zero());
    }

    #[test]
    fn poisson_antisymmetry_and_disjoint_variables() {
        let h = mono(2, 6, &[(1, 1), (-1, 1)], Rat::one());
        let k = mono(2, 6, &[(2, 1), (-2, 1)], Rat::one());
        assert!(h.poisson(&h).unwrap().is_zero());
        assert!(h.poisson(&k).unwrap().is_zero());
    }

    #[test]
    fn poisson_of_coordinates_is_constant() {
        // {z_1, z_{-1}} = -i with this convention
        let a = ScalarFunction::<Rat>::var(1, 4, 1);
        let b = ScalarFunction::<Rat>::var(1, 4, -1);
        let p = a.poisson(&b).unwrap();
        assert_eq!(p.coeff(&MultiIndex::unit()), Rat::i().neg());
        // antisymmetric
        let q = b.poisson(&a).unwrap();
        assert_eq!(q.coeff(&MultiIndex::unit()), Rat::i());
    }

    #[test]
    fn poisson_derivation_rule() {
        // {H, K*L} = {H,K} L + K {H,L}
        let h = mono(1, 10, &[(1, 2), (-1, 1)], Rat::from_ratio(2, 5));
        let k = mono(1, 10, &[(1, 1)], Rat::one());
        let l = mono(1, 10, &[(-1, 2)], Rat::from_int(3));
        let lhs = h.poisson(&k.mul(&l).unwrap()).unwrap();
        let rhs = h
            .poisson(&k)
            .unwrap()
            .mul(&l)
            .unwrap()
            .add(&k.mul(&h.poisson(&l).unwrap()).unwrap())
            .unwrap();
        assert!(lhs.eq_terms(&rhs));
    }

    #[test]
    fn apply_transform_trivial_cases() {
        let h = mono(1, 6, &[(1, 1), (-1, 1)], Rat::one());
        assert!(h.apply_transform(&[], 6).unwrap().eq_terms(&h));
        assert!(h.apply_transform(&[], 2).unwrap().eq_terms(&h.jet(2)));
        // degree bookkeeping: a cubic generator cannot touch the 2-jet
        let u = VectorField::monomial(1, 6, MultiIndex::from_pairs(&[(1, 3)]), 1, Rat::one()).unwrap();
        let moved = h.apply_transform(&[u], 2).unwrap();
        assert!(moved.eq_terms(&h.jet(2)));
    }

    #[test]
    fn transform_by_resonant_generator_keeps_action_form() {
        // u = z_1 (z_1 z_{-1}) e_1 - z_{-1} (z_1 z_{-1}) e_{-1} is resonant;
        // the transported action must stay a polynomial in z_1 z_{-1}.
        let n = 1;
        let trunc = 8;
        let act = ScalarFunction::<Rat>::action(n, trunc, 1);
        let u = VectorField::from_terms(
            n,
            trunc,
            [
                (MultiIndex::from_pairs(&[(1, 2), (-1, 1)]), 1, Rat::one()),
                (
                    MultiIndex::from_pairs(&[(1, 1), (-1, 2)]),
                    -1,
                    Rat::one().neg(),
                ),
            ],
        )
        .unwrap();
        let moved = act.apply_transform(&[u], trunc).unwrap();
        assert!(moved.is_action_polynomial());
        assert_eq!(moved.jet(2).coeff(&MultiIndex::from_pairs(&[(1, 1), (-1, 1)])), Rat::one());
    }

    #[test]
    fn derivative_basics() {
        let h = mono(1, 6, &[(1, 3), (-1, 1)], Rat::from_int(2));
        let d = h.derivative(1);
        assert!(d.eq_terms(&mono(1, 6, &[(1, 2), (-1, 1)], Rat::from_int(6))));
        assert!(h.derivative(2).is_zero());
    }
}
