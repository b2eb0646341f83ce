//! Sparse polynomial vector fields over conjugate variable pairs, with the
//! Lie-algebraic operations the normalization scheme is built from.
//!
//! A field is a finite term map `(Q, j) -> coefficient` representing
//! `X(z) = sum X_{Q,j} z^Q e_j`, truncated at a declared degree. All
//! operations return canonical sparse maps (no zero coefficients) and
//! truncate results at the minimum of the input truncation degrees; since
//! every field here vanishes at the origin, truncation at that degree loses
//! no exact information.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use crate::scalar::ScalarFunction;

/// Key of one vector-field term: monomial exponent and component index.
///
/// The derived order is (degree, lexicographic monomial, component), the
/// canonical term order used for iteration and serialization.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub q: MultiIndex,
    pub j: i32,
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} ; e_{})", self.q, self.j)
    }
}

/// Sparse formal polynomial vector field truncated at `trunc`.
#[derive(Clone, PartialEq)]
pub struct VectorField<C: Coeff> {
    terms: BTreeMap<Term, C>,
    n: usize,
    trunc: u32,
}

impl<C: Coeff> VectorField<C> {
    pub fn zero(n: usize, trunc: u32) -> Self {
        VectorField {
            terms: BTreeMap::new(),
            n,
            trunc,
        }
    }

    /// Single term `c * z^Q e_j`, validating index ranges and truncation.
    pub fn monomial(n: usize, trunc: u32, q: MultiIndex, j: i32, c: C) -> Result<Self> {
        let mut vf = VectorField::zero(n, trunc);
        vf.insert_checked(q, j, c)?;
        Ok(vf)
    }

    /// The fundamental linear field `E^i = z_i e_i - z_{-i} e_{-i}`.
    pub fn fundamental(i: usize, n: usize, trunc: u32) -> Self {
        assert!(i >= 1 && i <= n, "fundamental index out of range");
        let mut vf = VectorField::zero(n, trunc);
        let i = i as i32;
        vf.insert_raw(MultiIndex::var(i), i, C::one());
        vf.insert_raw(MultiIndex::var(-i), -i, C::one().neg());
        vf
    }

    /// Build from terms, validating every index and degree.
    pub fn from_terms<I>(n: usize, trunc: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, i32, C)>,
    {
        let mut vf = VectorField::zero(n, trunc);
        for (q, j, c) in terms {
            vf.insert_checked(q, j, c)?;
        }
        Ok(vf)
    }

    fn insert_checked(&mut self, q: MultiIndex, j: i32, c: C) -> Result<()> {
        if j == 0 || j.unsigned_abs() as usize > self.n {
            return Err(Error::Invalid(format!(
                "component index {j} out of range for n = {}",
                self.n
            )));
        }
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
        self.insert_raw(q, j, c);
        Ok(())
    }

    /// Accumulate a term, validating index ranges and the truncation bound.
    pub fn add_term(&mut self, q: MultiIndex, j: i32, c: C) -> Result<()> {
        self.insert_checked(q, j, c)
    }

    /// Accumulate a term without range validation (used by in-crate
    /// assemblers that produce indices already known to be valid).
    pub(crate) fn add_term_raw(&mut self, q: MultiIndex, j: i32, c: C) {
        self.insert_raw(q, j, c)
    }

    // Accumulate a coefficient, keeping the map canonical.
    fn insert_raw(&mut self, q: MultiIndex, j: i32, c: C) {
        if c.is_zero() || q.degree() > self.trunc {
            return;
        }
        let key = Term { q, j };
        match self.terms.get_mut(&key) {
            Some(existing) => {
                let sum = existing.add(&c);
                if sum.is_zero() {
                    self.terms.remove(&key);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(key, c);
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

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Order of vanishing at the origin; `u32::MAX` for the zero field.
    pub fn min_degree(&self) -> u32 {
        self.terms
            .keys()
            .next()
            .map(|t| t.q.degree())
            .unwrap_or(u32::MAX)
    }

    /// Largest stored term degree (0 for the zero field).
    pub fn max_degree(&self) -> u32 {
        self.terms
            .keys()
            .next_back()
            .map(|t| t.q.degree())
            .unwrap_or(0)
    }

    /// Terms in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&Term, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, q: &MultiIndex, j: i32) -> C {
        self.terms
            .get(&Term { q: q.clone(), j })
            .cloned()
            .unwrap_or_else(C::zero)
    }

    /// Term-map equality, ignoring the truncation tags.
    pub fn eq_terms(&self, other: &Self) -> bool {
        self.terms == other.terms
    }

    fn check_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::MismatchedVars(self.n, other.n));
        }
        Ok(())
    }

    /// Coefficientwise sum; result truncated at the smaller degree.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_n(other)?;
        let trunc = self.trunc.min(other.trunc);
        let mut out = VectorField::zero(self.n, trunc);
        for (t, c) in &self.terms {
            out.insert_raw(t.q.clone(), t.j, c.clone());
        }
        for (t, c) in &other.terms {
            out.insert_raw(t.q.clone(), t.j, c.clone());
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
            return VectorField::zero(self.n, self.trunc);
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
        let mut out = VectorField::zero(self.n, self.trunc);
        for (t, c) in &self.terms {
            out.insert_raw(t.q.clone(), t.j, f(c));
        }
        out
    }

    /// Re-tag the truncation degree, dropping terms above it.
    pub fn with_trunc(&self, trunc: u32) -> Self {
        let mut out = VectorField::zero(self.n, trunc);
        for (t, c) in &self.terms {
            if t.q.degree() <= trunc {
                out.terms.insert(t.clone(), c.clone());
            }
        }
        out
    }

    /// Jet `J^d`: keep terms of degree <= d. The truncation tag is kept,
    /// since the dropped terms are zeroed by definition, not unknown.
    pub fn jet(&self, d: u32) -> Self {
        let mut out = VectorField::zero(self.n, self.trunc);
        for (t, c) in &self.terms {
            if t.q.degree() <= d {
                out.terms.insert(t.clone(), c.clone());
            }
        }
        out
    }

    /// `(id - J^d)`: keep terms of degree > d.
    pub fn high_part(&self, d: u32) -> Self {
        let mut out = VectorField::zero(self.n, self.trunc);
        for (t, c) in &self.terms {
            if t.q.degree() > d {
                out.terms.insert(t.clone(), c.clone());
            }
        }
        out
    }

    /// Terms of degree exactly `s`.
    pub fn homogeneous_part(&self, s: u32) -> Self {
        let mut out = VectorField::zero(self.n, self.trunc);
        for (t, c) in &self.terms {
            if t.q.degree() == s {
                out.terms.insert(t.clone(), c.clone());
            }
        }
        out
    }

    /// The `e_j` component as a scalar polynomial.
    pub fn component(&self, j: i32) -> ScalarFunction<C> {
        let mut out = ScalarFunction::zero(self.n, self.trunc);
        for (t, c) in &self.terms {
            if t.j == j {
                out.insert_raw(t.q.clone(), c.clone());
            }
        }
        out
    }

    /// Componentwise product with a scalar polynomial.
    pub fn mul_scalar(&self, s: &ScalarFunction<C>) -> Result<Self> {
        if self.n != s.n() {
            return Err(Error::MismatchedVars(self.n, s.n()));
        }
        let trunc = self.trunc.min(s.trunc());
        let mut out = VectorField::zero(self.n, trunc);
        for (t, c) in &self.terms {
            for (p, b) in s.iter() {
                if t.q.degree() + p.degree() > trunc {
                    continue;
                }
                out.insert_raw(t.q.mul(p), t.j, c.mul(b));
            }
        }
        Ok(out)
    }

    /// Lie bracket `[X, Y] = DY·X - DX·Y`.
    ///
    /// With this orientation `[E^i, z^Q e_j] = ((Q, mu^i) - mu^i_j) z^Q e_j`,
    /// the eigenvalue formula the whole resonance analysis rests on.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.check_n(other)?;
        let trunc = self.trunc.min(other.trunc);
        let mut out = VectorField::zero(self.n, trunc);
        directional_derivative(other, self, &C::one(), &mut out); // DY·X
        directional_derivative(self, other, &C::one().neg(), &mut out); // -DX·Y
        Ok(out)
    }

    /// Push the field through the time-1 flow of the generator `u`:
    /// the terminating Lie series `sum_k ad_u^k(X) / k!` truncated at
    /// degree `d`, where `ad_u(X) = [u, X]`.
    ///
    /// Requires `min_degree(u) >= 2` so each bracket raises the degree and
    /// the series terminates at or below `d`.
    pub fn lie_conjugate(&self, u: &Self, d: u32) -> Result<Self> {
        self.check_n(u)?;
        if u.min_degree() < 2 {
            return Err(Error::NonterminatingSeries(u.min_degree()));
        }
        let trunc = self.trunc.min(u.trunc).min(d);
        let mut acc = self.jet(trunc);
        acc.trunc = trunc;
        let mut cur = acc.clone();
        let mut k = 1i64;
        while !cur.is_zero() {
            // cur = ad_u^k(X) / k!, pruned at the working degree
            cur = u.bracket(&cur)?.div_int(k).jet(trunc);
            for (t, c) in &cur.terms {
                acc.insert_raw(t.q.clone(), t.j, c.clone());
            }
            k += 1;
        }
        Ok(acc)
    }
}

// out += sign * (D target)·source, truncated at out.trunc.
fn directional_derivative<C: Coeff>(
    target: &VectorField<C>,
    source: &VectorField<C>,
    sign: &C,
    out: &mut VectorField<C>,
) {
    let mut by_comp: HashMap<i32, Vec<(&MultiIndex, &C)>> = HashMap::new();
    for (t, c) in &source.terms {
        by_comp.entry(t.j).or_default().push((&t.q, c));
    }
    let trunc = out.trunc;
    for (t, c) in &target.terms {
        let deg_t = t.q.degree();
        for (l, ql) in t.q.iter() {
            let Some(src_terms) = by_comp.get(&l) else {
                continue;
            };
            let dq = t.q.div_var(l).expect("exponent is positive");
            let factor = c.mul(sign).mul(&C::from_int(ql as i64));
            for &(qs, cs) in src_terms {
                if deg_t - 1 + qs.degree() > trunc {
                    continue;
                }
                out.insert_raw(dq.mul(qs), t.j, factor.mul(cs));
            }
        }
    }
}

impl<C: Coeff> fmt::Debug for VectorField<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (pos, (t, c)) in self.terms.iter().enumerate() {
            if pos > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{:?}*{:?}", c, t)?;
        }
        Ok(())
    }
}

/// Ordered family of vector fields sharing `n` and the truncation degree.
#[derive(Clone, PartialEq, Debug)]
pub struct Family<C: Coeff> {
    n: usize,
    trunc: u32,
    members: Vec<VectorField<C>>,
}

impl<C: Coeff> Family<C> {
    pub fn new(n: usize, trunc: u32, members: Vec<VectorField<C>>) -> Result<Self> {
        for m in &members {
            if m.n() != n {
                return Err(Error::MismatchedVars(n, m.n()));
            }
            if m.trunc() != trunc {
                return Err(Error::Invalid(format!(
                    "family member truncation {} differs from declared {}",
                    m.trunc(),
                    trunc
                )));
            }
        }
        Ok(Family { n, trunc, members })
    }

    /// The fundamental family `E^1, ..., E^count`.
    pub fn fundamental(n: usize, count: usize, trunc: u32) -> Self {
        let members = (1..=count)
            .map(|i| VectorField::fundamental(i, n, trunc))
            .collect();
        Family { n, trunc, members }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// 0-based access; member `idx` is the field indexed `i = idx + 1` in
    /// formulas.
    pub fn member(&self, idx: usize) -> &VectorField<C> {
        &self.members[idx]
    }

    pub fn members(&self) -> &[VectorField<C>] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = &VectorField<C>> {
        self.members.iter()
    }

    pub fn map(&self, f: impl FnMut(&VectorField<C>) -> Result<VectorField<C>>) -> Result<Self> {
        let mut f = f;
        let members = self
            .members
            .iter()
            .map(&mut f)
            .collect::<Result<Vec<_>>>()?;
        Family::new(self.n, members.first().map(|m| m.trunc()).unwrap_or(self.trunc), members)
    }

    /// First pair `(i, j)` whose bracket is nonzero, if any.
    pub fn first_noncommuting_pair(&self) -> Result<Option<(usize, usize, Term)>> {
        for i in 0..self.members.len() {
            for j in (i + 1)..self.members.len() {
                let br = self.members[i].bracket(&self.members[j])?;
                let first = br.iter().next().map(|(t, _)| t.clone());
                if let Some(t) = first {
                    return Ok(Some((i, j, t)));
                }
            }
        }
        Ok(None)
    }
}
