//! Majorant fields and weighted norms over balls.
//!
//! The sup of a majorant over the weighted ball is not finitely computable,
//! so the canonical value here is the box upper bound obtained from the
//! per-variable maxima `|z_l| <= r / sqrt(w1_l)`, plus a seeded Monte-Carlo
//! lower estimate for diagnostics. Majorants have nonnegative real
//! coefficients, so suprema are attained at nonnegative real points and the
//! sampler only visits those.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::vector_field::{Family, Term, VectorField};

/// Relative slack, in favor of the inequality, used by every float
/// inequality verdict in the crate.
pub const INEQ_RELATIVE_SLACK: f64 = 1e-9;

/// `lhs <= rhs` up to the global relative slack.
pub fn leq_with_slack(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + INEQ_RELATIVE_SLACK)
}

/// Two positive weight sequences `w2_j >= w1_j > 0`, indexed by `|j|`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable {
    w1: Vec<f64>,
    w2: Vec<f64>,
}

impl WeightTable {
    pub fn new(w1: Vec<f64>, w2: Vec<f64>) -> Result<Self> {
        if w1.len() != w2.len() {
            return Err(Error::Invalid("weight tables differ in length".into()));
        }
        for (a, b) in w1.iter().zip(&w2) {
            if !(*a > 0.0) || !(*b >= *a) {
                return Err(Error::Invalid(format!(
                    "weights must satisfy w2 >= w1 > 0, got w1={a}, w2={b}"
                )));
            }
        }
        Ok(WeightTable { w1, w2 })
    }

    /// Unit weights for `n` variable pairs.
    pub fn unit(n: usize) -> Self {
        WeightTable {
            w1: vec![1.0; n],
            w2: vec![1.0; n],
        }
    }

    /// Geometric weights `w_j = rho^j` on both sequences.
    pub fn geometric(n: usize, rho: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::Invalid("geometric ratio must be positive".into()));
        }
        let w: Vec<f64> = (1..=n).map(|j| rho.powi(j as i32)).collect();
        WeightTable::new(w.clone(), w)
    }

    pub fn n(&self) -> usize {
        self.w1.len()
    }

    /// `w1_{|idx|}` for a variable or component index.
    pub fn w1(&self, idx: i32) -> f64 {
        self.w1[(idx.unsigned_abs() as usize) - 1]
    }

    pub fn w2(&self, idx: i32) -> f64 {
        self.w2[(idx.unsigned_abs() as usize) - 1]
    }

    pub fn w1_slice(&self) -> &[f64] {
        &self.w1
    }

    pub fn w2_slice(&self) -> &[f64] {
        &self.w2
    }
}

/// Majorant of a vector field: nonnegative real coefficients `|X_{Q,j}|`,
/// stored in float for norm evaluation regardless of the source mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Majorant {
    terms: BTreeMap<Term, f64>,
    n: usize,
    trunc: u32,
}

impl Majorant {
    pub fn zero(n: usize, trunc: u32) -> Self {
        Majorant {
            terms: BTreeMap::new(),
            n,
            trunc,
        }
    }

    /// Underline a single field.
    pub fn of_field<C: Coeff>(x: &VectorField<C>) -> Self {
        let mut m = Majorant::zero(x.n(), x.trunc());
        for (t, c) in x.iter() {
            m.accumulate(t.clone(), c.abs_f64());
        }
        m
    }

    /// Underline a family: coefficientwise sum of the member majorants,
    /// which dominates each member.
    pub fn of_family<C: Coeff>(f: &Family<C>) -> Self {
        let mut m = Majorant::zero(f.n(), f.trunc());
        for member in f.iter() {
            for (t, c) in member.iter() {
                m.accumulate(t.clone(), c.abs_f64());
            }
        }
        m
    }

    fn accumulate(&mut self, t: Term, v: f64) {
        if v == 0.0 {
            return;
        }
        *self.terms.entry(t).or_insert(0.0) += v;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_degree(&self) -> u32 {
        self.terms
            .keys()
            .next()
            .map(|t| t.q.degree())
            .unwrap_or(u32::MAX)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &f64)> {
        self.terms.iter()
    }

    /// Componentwise value at a nonnegative point, squared-`w2` norm.
    fn norm_at(&self, z: &dyn Fn(i32) -> f64, w: &WeightTable) -> f64 {
        let mut comp: BTreeMap<i32, f64> = BTreeMap::new();
        for (t, &c) in &self.terms {
            let mut v = c;
            for (l, e) in t.q.iter() {
                v *= z(l).powi(e as i32);
            }
            *comp.entry(t.j).or_insert(0.0) += v;
        }
        comp.iter()
            .map(|(&j, &a)| w.w2(j) * a * a)
            .sum::<f64>()
            .sqrt()
    }
}

/// Rigorous upper bound for the weighted sup-norm of a majorant over the
/// ball of radius `r`: substitute the per-variable maxima
/// `|z_l| <= r / sqrt(w1_l)` and take the `w2` norm of the componentwise
/// totals.
pub fn box_norm(m: &Majorant, r: f64, w: &WeightTable) -> f64 {
    assert!(r > 0.0, "radius must be positive");
    assert!(w.n() >= m.n(), "weight table too short for the field");
    m.norm_at(&|l| r / w.w1(l).sqrt(), w)
}

/// Seeded Monte-Carlo lower estimate of the same sup: the maximum of
/// `||M(z)||_{w2}` over pseudo-random nonnegative `z` with `||z||_{w1} = r`.
/// Always at most the box norm.
pub fn sample_norm(m: &Majorant, r: f64, w: &WeightTable, samples: u32, seed: u64) -> f64 {
    assert!(samples >= 1);
    assert!(w.n() >= m.n());
    if m.is_zero() {
        return 0.0;
    }
    let n = m.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    let mut coords = vec![0.0f64; 2 * n];
    let slot = |l: i32| -> usize {
        if l < 0 {
            (l + n as i32) as usize
        } else {
            (l - 1) as usize + n
        }
    };
    for _ in 0..samples {
        let mut norm_sq = 0.0;
        for (k, c) in coords.iter_mut().enumerate() {
            *c = rng.gen::<f64>();
            let idx = if k < n { (k as i32) - (n as i32) } else { (k as i32) - (n as i32) + 1 };
            norm_sq += w.w1(idx) * *c * *c;
        }
        if norm_sq == 0.0 {
            continue;
        }
        let t = r / norm_sq.sqrt();
        let value = m.norm_at(&|l| coords[slot(l)] * t, w);
        best = best.max(value);
    }
    best
}

/// Box bound on the operator norm of the majorant derivative over the
/// ball: rows are components, columns variables, evaluated at the box
/// point, contracted against the worst admissible unit vector.
pub fn deriv_box_norm(m: &Majorant, r: f64, w: &WeightTable) -> f64 {
    assert!(r > 0.0);
    assert!(w.n() >= m.n());
    // row_sums[j] = sum_l (d M_j / d z_l)(box point) / sqrt(w1_l)
    let mut row_sums: BTreeMap<i32, f64> = BTreeMap::new();
    for (t, &c) in m.iter() {
        for (l, e) in t.q.iter() {
            let mut v = c * e as f64 / w.w1(l).sqrt();
            for (l2, e2) in t.q.iter() {
                let pow = if l2 == l { e2 - 1 } else { e2 };
                v *= (r / w.w1(l2).sqrt()).powi(pow as i32);
            }
            *row_sums.entry(t.j).or_insert(0.0) += v;
        }
    }
    row_sums
        .iter()
        .map(|(&j, &s)| w.w2(j) * s * s)
        .sum::<f64>()
        .sqrt()
}

/// Termwise domination `X ≺ Y`: `|X_{Q,j}| <= |Y_{Q,j}|` for all indices.
pub fn dominates<C: Coeff>(x: &VectorField<C>, y: &VectorField<C>) -> Result<bool> {
    if x.n() != y.n() {
        return Err(Error::MismatchedVars(x.n(), y.n()));
    }
    for (t, c) in x.iter() {
        if c.abs_f64() > y.coeff(&t.q, t.j).abs_f64() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Zero-order scaling law: a majorant vanishing to order `m` satisfies
/// `box_norm(M, alpha r) <= alpha^m box_norm(M, r)` for `0 < alpha <= 1`.
pub fn scaling_check(m: &Majorant, r: f64, alpha: f64, order: u32) -> Result<bool> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Invalid(format!("alpha = {alpha} not in (0, 1]")));
    }
    if m.min_degree() < order {
        return Err(Error::Invalid(format!(
            "field has minimum degree {} < required order {order}",
            m.min_degree()
        )));
    }
    let w = WeightTable::unit(m.n().max(1));
    let lhs = box_norm(m, alpha * r, &w);
    let rhs = alpha.powi(order as i32) * box_norm(m, r, &w);
    Ok(leq_with_slack(lhs, rhs))
}

/// One row of the norm table emitted as CSV.
#[derive(Clone, Debug)]
pub struct NormReport {
    pub field_id: String,
    pub radius: f64,
    pub box_norm: f64,
    pub sample_norm: f64,
    pub mode: String,
}

impl NormReport {
    pub fn csv_header() -> &'static str {
        "field_id,radius,box_norm,sample_norm,mode"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.field_id, self.radius, self.box_norm, self.sample_norm, self.mode
        )
    }
}

/// Verdict report for the flow-remainder inequalities on a nonlinear
/// family: with `eps = ||underline U||_r < delta / 4e`, the first and
/// second Taylor remainders of the conjugated family obey
/// `(4/delta) ||F||_r eps` and `(8e/delta^2) ||F||_r eps^2` at `r - delta`.
#[derive(Clone, Debug)]
pub struct FlowRemainderReport {
    pub hypothesis_met: bool,
    pub eps: f64,
    pub gate: f64,
    pub first_lhs: f64,
    pub first_rhs: f64,
    pub first_ok: bool,
    pub second_lhs: f64,
    pub second_rhs: f64,
    pub second_ok: bool,
}

pub fn flow_remainder_check<C: Coeff>(
    u: &VectorField<C>,
    f: &Family<C>,
    r: f64,
    delta: f64,
    d: u32,
    w: &WeightTable,
) -> Result<FlowRemainderReport> {
    if !(delta > 0.0 && delta < r) {
        return Err(Error::Invalid(format!("need 0 < delta < r, got delta={delta}, r={r}")));
    }
    let eps = box_norm(&Majorant::of_field(u), r, w);
    let gate = delta / (4.0 * std::f64::consts::E);
    let mut report = FlowRemainderReport {
        hypothesis_met: eps < gate,
        eps,
        gate,
        first_lhs: 0.0,
        first_rhs: 0.0,
        first_ok: false,
        second_lhs: 0.0,
        second_rhs: 0.0,
        second_ok: false,
    };
    if !report.hypothesis_met {
        return Ok(report);
    }
    let norm_f = box_norm(&Majorant::of_family(f), r, w);
    let s = f.map(|fi| fi.lie_conjugate(u, d)?.sub(&fi.jet(d)))?;
    let s_tilde = Family::new(
        f.n(),
        s.trunc(),
        s.iter()
            .zip(f.iter())
            .map(|(si, fi)| si.sub(&u.bracket(fi)?.jet(d)))
            .collect::<Result<Vec<_>>>()?,
    )?;
    report.first_lhs = box_norm(&Majorant::of_family(&s), r - delta, w);
    report.first_rhs = 4.0 / delta * norm_f * eps;
    report.first_ok = leq_with_slack(report.first_lhs, report.first_rhs);
    report.second_lhs = box_norm(&Majorant::of_family(&s_tilde), r - delta, w);
    report.second_rhs = 8.0 * std::f64::consts::E / (delta * delta) * norm_f * eps * eps;
    report.second_ok = leq_with_slack(report.second_lhs, report.second_rhs);
    Ok(report)
}

/// Verdict report for the linear-family remainder: with
/// `eps = ||underline U||_r < delta / 8e`, the second-order remainder of
/// the conjugated fundamental family obeys `(8r/e delta)(4e eps/delta) eps`
/// at `r - delta`.
#[derive(Clone, Debug)]
pub struct FlowLinearReport {
    pub hypothesis_met: bool,
    pub eps: f64,
    pub gate: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

pub fn flow_linear_remainder_check<C: Coeff>(
    u: &VectorField<C>,
    r: f64,
    delta: f64,
    d: u32,
    w: &WeightTable,
) -> Result<FlowLinearReport> {
    if !(delta > 0.0 && delta < r) {
        return Err(Error::Invalid(format!("need 0 < delta < r, got delta={delta}, r={r}")));
    }
    let e = std::f64::consts::E;
    let eps = box_norm(&Majorant::of_field(u), r, w);
    let gate = delta / (8.0 * e);
    let mut report = FlowLinearReport {
        hypothesis_met: eps < gate,
        eps,
        gate,
        lhs: 0.0,
        rhs: 0.0,
        ok: false,
    };
    if !report.hypothesis_met {
        return Ok(report);
    }
    let n = u.n();
    let fundamental = Family::<C>::fundamental(n, n, u.trunc());
    let t = fundamental.map(|ei| {
        ei.lie_conjugate(u, d)?
            .sub(&ei.jet(d))?
            .sub(&u.bracket(ei)?.jet(d))
    })?;
    report.lhs = box_norm(&Majorant::of_family(&t), r - delta, w);
    report.rhs = 8.0 * r / (e * delta) * (4.0 * e * eps / delta) * eps;
    report.ok = leq_with_slack(report.lhs, report.rhs);
    Ok(report)
}
