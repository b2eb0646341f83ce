//! Sparse exponent vectors over nonzero variable indices.
//!
//! Variables come in conjugate pairs `z_j`, `z_{-j}` with `j = 1..n`; a
//! monomial `z^Q` is a finitely supported exponent map. The canonical
//! ordering is (total degree, lexicographic with indices ordered
//! `-n < … < -1 < 1 < … < n`), which makes term maps deterministic.

use std::cmp::Ordering;
use std::fmt;

/// Sparse exponent vector `Q` with cached total degree `|Q|`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    // Sorted by variable index; exponents are strictly positive.
    exps: Vec<(i32, u32)>,
    degree: u32,
}

impl MultiIndex {
    /// The empty multi-index (degree 0).
    pub fn unit() -> Self {
        MultiIndex {
            exps: Vec::new(),
            degree: 0,
        }
    }

    /// Single variable `z_idx`.
    pub fn var(idx: i32) -> Self {
        assert!(idx != 0, "variable index must be nonzero");
        MultiIndex {
            exps: vec![(idx, 1)],
            degree: 1,
        }
    }

    /// Build from (index, exponent) pairs; duplicates are merged and zero
    /// exponents dropped.
    pub fn from_pairs(pairs: &[(i32, u32)]) -> Self {
        let mut v: Vec<(i32, u32)> = Vec::with_capacity(pairs.len());
        for &(idx, e) in pairs {
            assert!(idx != 0, "variable index must be nonzero");
            if e > 0 {
                v.push((idx, e));
            }
        }
        v.sort_by_key(|&(idx, _)| idx);
        let mut merged: Vec<(i32, u32)> = Vec::with_capacity(v.len());
        for (idx, e) in v {
            match merged.last_mut() {
                Some((last, le)) if *last == idx => *le += e,
                _ => merged.push((idx, e)),
            }
        }
        let degree = merged.iter().map(|&(_, e)| e).sum();
        MultiIndex {
            exps: merged,
            degree,
        }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_unit(&self) -> bool {
        self.exps.is_empty()
    }

    /// Exponent of `z_idx` (0 when absent).
    pub fn exp(&self, idx: i32) -> u32 {
        match self.exps.binary_search_by_key(&idx, |&(i, _)| i) {
            Ok(pos) => self.exps[pos].1,
            Err(_) => 0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, u32)> + '_ {
        self.exps.iter().copied()
    }

    /// Largest |index| in the support (0 for the unit).
    pub fn max_abs_index(&self) -> u32 {
        self.exps
            .iter()
            .map(|&(i, _)| i.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// Product of monomials: exponents add.
    pub fn mul(&self, other: &Self) -> Self {
        let mut exps = Vec::with_capacity(self.exps.len() + other.exps.len());
        let (mut a, mut b) = (0usize, 0usize);
        while a < self.exps.len() && b < other.exps.len() {
            let (ia, ea) = self.exps[a];
            let (ib, eb) = other.exps[b];
            match ia.cmp(&ib) {
                Ordering::Less => {
                    exps.push((ia, ea));
                    a += 1;
                }
                Ordering::Greater => {
                    exps.push((ib, eb));
                    b += 1;
                }
                Ordering::Equal => {
                    exps.push((ia, ea + eb));
                    a += 1;
                    b += 1;
                }
            }
        }
        exps.extend_from_slice(&self.exps[a..]);
        exps.extend_from_slice(&other.exps[b..]);
        MultiIndex {
            degree: self.degree + other.degree,
            exps,
        }
    }

    /// Multiply by a single variable.
    pub fn mul_var(&self, idx: i32) -> Self {
        self.mul(&MultiIndex::var(idx))
    }

    /// Divide by `z_idx`, or `None` if the exponent is zero.
    pub fn div_var(&self, idx: i32) -> Option<Self> {
        let pos = self.exps.binary_search_by_key(&idx, |&(i, _)| i).ok()?;
        let mut exps = self.exps.clone();
        if exps[pos].1 == 1 {
            exps.remove(pos);
        } else {
            exps[pos].1 -= 1;
        }
        Some(MultiIndex {
            exps,
            degree: self.degree - 1,
        })
    }

    /// True when the exponents of `z_l` and `z_{-l}` agree for every `l`,
    /// i.e. the monomial is a product of actions `(z_l z_{-l})^{k_l}`.
    pub fn is_action(&self) -> bool {
        self.exps.iter().all(|&(idx, e)| self.exp(-idx) == e)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        // Degree first, then lexicographic over indices in increasing order.
        self.degree.cmp(&other.degree).then_with(|| {
            let (mut a, mut b) = (0usize, 0usize);
            loop {
                match (self.exps.get(a), other.exps.get(b)) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Greater,
                    (None, Some(_)) => return Ordering::Less,
                    (Some(&(ia, ea)), Some(&(ib, eb))) => match ia.cmp(&ib) {
                        Ordering::Less => return Ordering::Greater,
                        Ordering::Greater => return Ordering::Less,
                        Ordering::Equal => {
                            if ea != eb {
                                return ea.cmp(&eb);
                            }
                            a += 1;
                            b += 1;
                        }
                    },
                }
            }
        })
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    /// Canonical file token: comma-joined `idx^exp`, or `-` for the unit.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return write!(f, "-");
        }
        for (pos, (idx, e)) in self.exps.iter().enumerate() {
            if pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{idx}^{e}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q[{self}]")
    }
}

/// All multi-indices over indices `{-n..-1, 1..n}` with total degree in
/// `[min_degree, max_degree]`, in canonical order.
pub fn enumerate(n: usize, min_degree: u32, max_degree: u32) -> Vec<MultiIndex> {
    let mut indices: Vec<i32> = (1..=n as i32).map(|k| -k).collect();
    indices.sort_unstable();
    indices.extend(1..=n as i32);

    let mut out = Vec::new();
    let mut stack: Vec<(i32, u32)> = Vec::new();
    fn rec(
        indices: &[i32],
        pos: usize,
        remaining: u32,
        min_degree: u32,
        stack: &mut Vec<(i32, u32)>,
        out: &mut Vec<MultiIndex>,
    ) {
        if pos == indices.len() {
            let q = MultiIndex::from_pairs(stack);
            if q.degree() >= min_degree {
                out.push(q);
            }
            return;
        }
        for e in 0..=remaining {
            if e > 0 {
                stack.push((indices[pos], e));
            }
            rec(indices, pos + 1, remaining - e, min_degree, stack, out);
            if e > 0 {
                stack.pop();
            }
        }
    }
    rec(&indices, 0, max_degree, min_degree, &mut stack, &mut out);
    out.sort();
    out
}
