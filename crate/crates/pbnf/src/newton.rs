//! The degree-doubling normalization iteration.
//!
//! One step takes a family normalized to order `m = 2^k`, absorbs the
//! resonant part of the degree `m+1..2m` remainder into the normal form,
//! solves the nonlinear cohomological equation for a generator `U`, and
//! conjugates the family by the time-1 flow of `U`; the new remainder
//! vanishes to order `2m + 1`. The algebra is degree-exact and runs for any
//! constants; the scheme constants and sequence tables are a separate audit
//! layer that checks the convergence inequalities numerically.

use serde::Serialize;

use crate::coeff::Coeff;
use crate::cohomology::{solve_nonlinear_recursive, NormalFormFamily};
use crate::error::{Error, Result};
use crate::norms::{box_norm, deriv_box_norm, leq_with_slack, Majorant, WeightTable};
use crate::resonance::split;
use crate::scalar::ScalarFunction;
use crate::vector_field::{Family, VectorField};

const LN2: f64 = std::f64::consts::LN_2;
const E: f64 = std::f64::consts::E;

/// Constants of the convergence scheme: `b`, `c0`, `c1 = 4^{b+2}/3`, the
/// initial radius `r0`, and the derived `eps0 = c0 r0^2`, `delta0 = r0/2`,
/// `delta = r0/c1`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SchemeConstants {
    pub b: f64,
    pub c0: f64,
    pub c1: f64,
    pub r0: f64,
}

/// One admissibility clause for the initial radius.
#[derive(Clone, Debug, Serialize)]
pub struct RadiusClause {
    pub name: &'static str,
    pub bound: f64,
    pub ok: bool,
}

/// Verdicts for every constraint the constants are supposed to satisfy.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantsReport {
    pub b_bound: f64,
    pub b_ok: bool,
    pub c1_expected: f64,
    pub c1_ok: bool,
    pub clauses: Vec<RadiusClause>,
    pub all_ok: bool,
}

impl SchemeConstants {
    /// Build with `c1` pinned to `4^{b+2}/3`.
    pub fn new(b: f64, c0: f64, r0: f64) -> Result<Self> {
        if !(b > 0.0) || !(c0 > 0.0) || !(r0 > 0.0) {
            return Err(Error::InvalidConstants(format!(
                "b, c0, r0 must be positive (got b={b}, c0={c0}, r0={r0})"
            )));
        }
        Ok(SchemeConstants {
            b,
            c0,
            c1: 4f64.powf(b + 2.0) / 3.0,
            r0,
        })
    }

    pub fn eps0(&self) -> f64 {
        self.c0 * self.r0 * self.r0
    }

    pub fn delta0(&self) -> f64 {
        self.r0 / 2.0
    }

    pub fn delta(&self) -> f64 {
        self.r0 / self.c1
    }

    /// Limit radius `r0 / 4^{b+2}`.
    pub fn r_inf(&self) -> f64 {
        self.r0 / 4f64.powf(self.b + 2.0)
    }

    /// Lower bound the step lemma imposes on `b`.
    pub fn b_lower_bound() -> f64 {
        8.0 + 2.0 * (48f64).ln() / LN2
    }

    /// The admissibility clauses for `r0`, reported one by one.
    pub fn radius_clauses(&self) -> Vec<RadiusClause> {
        let (b, c0, c1, r0) = (self.b, self.c0, self.c1, self.r0);
        let bounds = [
            ("sqrt(3/(8 c0))", (3.0 / (8.0 * c0)).sqrt()),
            ("3/(136 c0)", 3.0 / (136.0 * c0)),
            ("1/(32 e c0 c1)", 1.0 / (32.0 * E * c0 * c1)),
            ("1/(7*2^9 e c0 c1^2)", 1.0 / (7.0 * 512.0 * E * c0 * c1 * c1)),
            (
                "(c1 - 1/4)/(c0 (2^4 c1 + 2^9 c1^2 + 36/7 + 4*2^(b/2) 4^(b+2)))",
                (c1 - 0.25)
                    / (c0
                        * (16.0 * c1
                            + 512.0 * c1 * c1
                            + 4.0 * 9.0 / 7.0
                            + 4.0 * 2f64.powf(b / 2.0) * 4f64.powf(b + 2.0))),
            ),
        ];
        bounds
            .into_iter()
            .map(|(name, bound)| RadiusClause {
                name,
                bound,
                ok: r0 < bound,
            })
            .collect()
    }

    /// The strictest admissible radius for the given `b`, `c0`.
    pub fn max_admissible_r0(b: f64, c0: f64) -> Result<f64> {
        let probe = SchemeConstants::new(b, c0, 1.0)?;
        Ok(probe
            .radius_clauses()
            .into_iter()
            .map(|c| c.bound)
            .fold(f64::INFINITY, f64::min))
    }

    pub fn validate(&self) -> ConstantsReport {
        let b_bound = Self::b_lower_bound();
        let b_ok = self.b >= b_bound;
        let c1_expected = 4f64.powf(self.b + 2.0) / 3.0;
        let c1_ok = (self.c1 - c1_expected).abs() <= 1e-9 * c1_expected;
        let clauses = self.radius_clauses();
        let all_ok = b_ok && c1_ok && clauses.iter().all(|c| c.ok);
        ConstantsReport {
            b_bound,
            b_ok,
            c1_expected,
            c1_ok,
            clauses,
            all_ok,
        }
    }
}

/// One row of the scheme-sequence table.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SeqRow {
    pub k: u32,
    pub m: u32,
    /// `q_m = m^{-b/m}` at `m = 2^k`.
    pub q_m: f64,
    pub eps: f64,
    pub delta: f64,
    pub r: f64,
    /// Running product `d_k = prod_{l<k} q_{2^l}`.
    pub d: f64,
}

/// The sequences `eps_k = eps0/4^k`, `delta_k`, `r_k` and the products
/// `d_k`, tabulated for `k = 0..=K`.
#[derive(Clone, Debug, Serialize)]
pub struct SequenceTable {
    pub rows: Vec<SeqRow>,
    pub r_inf: f64,
}

/// Tabulate the scheme sequences for `k = 0..=K`.
pub fn sequences(k_max: u32, c: &SchemeConstants) -> Result<SequenceTable> {
    if k_max < 1 || k_max > 30 {
        return Err(Error::InvalidConstants(format!(
            "step count K = {k_max} out of the supported range 1..=30"
        )));
    }
    let mut rows: Vec<SeqRow> = Vec::with_capacity(k_max as usize + 1);
    let mut d = 1.0f64;
    for k in 0..=k_max {
        let m = 1u32 << k;
        let q_m = ((m as f64).ln() * (-c.b / m as f64)).exp();
        let eps = c.eps0() / 4f64.powi(k as i32);
        let delta = if k == 0 {
            c.delta0()
        } else {
            c.delta() / 4f64.powi(k as i32)
        };
        let r = if k == 0 {
            c.r0
        } else if k == 1 {
            c.r0 / 8.0
        } else {
            let prev = rows[k as usize - 1];
            prev.q_m * (prev.r - prev.delta)
        };
        rows.push(SeqRow {
            k,
            m,
            q_m,
            eps,
            delta,
            r,
            d,
        });
        d *= q_m;
    }
    Ok(SequenceTable {
        rows,
        r_inf: c.r_inf(),
    })
}

impl SequenceTable {
    pub fn row(&self, k: u32) -> &SeqRow {
        &self.rows[k as usize]
    }

    /// `sum_{l<k} eps_l`.
    pub fn eps_sum(&self, k: u32) -> f64 {
        self.rows[..k as usize].iter().map(|r| r.eps).sum()
    }

    /// `sum_{l<k} eps_l / (r_l - r_{l+1})`.
    pub fn eps_ratio_sum(&self, k: u32) -> f64 {
        (0..k as usize)
            .map(|l| self.rows[l].eps / (self.rows[l].r - self.rows[l + 1].r))
            .sum()
    }
}

/// Numeric verification of the sequence identities and bounds:
/// the closed form of the products `d_k`, the radius floor `r_k >= r_inf`,
/// the geometric bound on the eps sums, the mixed eps/radius sum, and the
/// `sum 1/(k 2^k) = ln 2` partial sums.
#[derive(Clone, Debug, Serialize)]
pub struct SequenceAuditReport {
    pub product_identity_ok: bool,
    pub max_product_rel_err: f64,
    pub radius_floor_ok: bool,
    pub eps_sum_ok: bool,
    pub eps_ratio_sum_ok: bool,
    pub ln2_partial_ok: bool,
    pub all_ok: bool,
}

const AUDIT_REL_TOL: f64 = 1e-12;

pub fn sequence_lemma_audit(k_max: u32, c: &SchemeConstants) -> Result<SequenceAuditReport> {
    if k_max < 2 {
        return Err(Error::InvalidConstants(
            "sequence audit needs K >= 2".into(),
        ));
    }
    let table = sequences(k_max, c)?;

    let mut max_rel = 0.0f64;
    for row in &table.rows {
        let closed = 4f64.powf(-c.b * (1.0 - (row.k as f64 + 1.0) / (1u64 << row.k) as f64));
        let rel = (row.d - closed).abs() / closed;
        max_rel = max_rel.max(rel);
    }
    let product_identity_ok = max_rel <= AUDIT_REL_TOL;

    let radius_floor_ok = table
        .rows
        .iter()
        .all(|row| row.r >= table.r_inf * (1.0 - AUDIT_REL_TOL));

    let eps_cap = 4.0 / 3.0 * c.eps0();
    let eps_sum_ok = (1..=k_max).all(|k| table.eps_sum(k) <= eps_cap * (1.0 + AUDIT_REL_TOL));

    let ratio_cap = 8.0 / 7.0 * c.eps0() / c.r0 + c.eps0() / table.r_inf * 2f64.powf(c.b / 2.0);
    let eps_ratio_sum_ok =
        (1..=k_max).all(|k| table.eps_ratio_sum(k) <= ratio_cap * (1.0 + AUDIT_REL_TOL));

    let partial: f64 = (1..=k_max)
        .map(|k| 1.0 / (k as f64 * (1u64 << k) as f64))
        .sum();
    let tail_bound = 2.0 / ((k_max as f64 + 1.0) * (1u64 << k_max) as f64);
    let ln2_partial_ok = partial < LN2 && LN2 - partial <= tail_bound;

    let all_ok = product_identity_ok
        && radius_floor_ok
        && eps_sum_ok
        && eps_ratio_sum_ok
        && ln2_partial_ok;
    Ok(SequenceAuditReport {
        product_identity_ok,
        max_product_rel_err: max_rel,
        radius_floor_ok,
        eps_sum_ok,
        eps_ratio_sum_ok,
        ln2_partial_ok,
        all_ok,
    })
}

/// One ledger row per iteration state, mirroring the remainder split of
/// the step analysis. The four `r*` norms describe the step that produced
/// the state and are zero for the initial row.
#[derive(Clone, Debug, Serialize)]
pub struct LedgerRow {
    pub k: u32,
    pub m: u32,
    #[serde(rename = "norm_R")]
    pub norm_r: f64,
    #[serde(rename = "norm_N")]
    pub norm_n: f64,
    #[serde(rename = "norm_DN")]
    pub norm_dn: f64,
    pub eps_k: f64,
    pub r_k: f64,
    pub i1_ok: bool,
    pub i2_ok: bool,
    pub i3_ok: bool,
    pub r11_norm: f64,
    pub r12_norm: f64,
    pub r2_norm: f64,
    pub r3_norm: f64,
}

/// State of the iteration after `k` steps: the family is
/// `NF^i_{<=m} + R^i_{>= m+1}` with `m = 2^k`, together with the applied
/// generators and the audit ledger.
#[derive(Clone, Debug)]
pub struct IterationState<C: Coeff> {
    pub k: u32,
    nf: NormalFormFamily<C>,
    remainder: Family<C>,
    generators: Vec<VectorField<C>>,
    ledger: Vec<LedgerRow>,
}

impl<C: Coeff> IterationState<C> {
    pub fn m(&self) -> u32 {
        1u32 << self.k
    }

    pub fn nf(&self) -> &NormalFormFamily<C> {
        &self.nf
    }

    pub fn remainder(&self) -> &Family<C> {
        &self.remainder
    }

    pub fn generators(&self) -> &[VectorField<C>] {
        &self.generators
    }

    pub fn ledger(&self) -> &[LedgerRow] {
        &self.ledger
    }

    /// The current full family `NF^i + R^i`.
    pub fn family(&self) -> Result<Family<C>> {
        let members = (0..self.remainder.len())
            .map(|i| self.nf.field(i + 1)?.add(self.remainder.member(i)))
            .collect::<Result<Vec<_>>>()?;
        Family::new(self.remainder.n(), self.remainder.trunc(), members)
    }
}

fn ledger_row_for_state<C: Coeff>(
    k: u32,
    nf: &NormalFormFamily<C>,
    remainder: &Family<C>,
    table: &SequenceTable,
    w: &WeightTable,
    split_norms: [f64; 4],
) -> Result<LedgerRow> {
    let row = table.row(k);
    let norm_r = box_norm(&Majorant::of_family(remainder), row.r, w);
    let corrections = nf.corrections()?;
    let (norm_n, norm_dn) = if nf.is_trivial() {
        (0.0, 0.0)
    } else {
        (
            box_norm(&Majorant::of_family(&corrections), row.r, w),
            deriv_box_norm(&Majorant::of_family(&corrections), row.r, w),
        )
    };
    Ok(LedgerRow {
        k,
        m: row.m,
        norm_r,
        norm_n,
        norm_dn,
        eps_k: row.eps,
        r_k: row.r,
        i1_ok: leq_with_slack(norm_r, row.eps),
        i2_ok: leq_with_slack(norm_n, table.eps_sum(k)),
        i3_ok: leq_with_slack(norm_dn, table.eps_ratio_sum(k)),
        r11_norm: split_norms[0],
        r12_norm: split_norms[1],
        r2_norm: split_norms[2],
        r3_norm: split_norms[3],
    })
}

/// Recompute the three step inequalities for the current state.
#[derive(Clone, Debug, Serialize)]
pub struct StepAudit {
    pub k: u32,
    pub i1_lhs: f64,
    pub i1_rhs: f64,
    pub i1_ok: bool,
    pub i2_lhs: f64,
    pub i2_rhs: f64,
    pub i2_ok: bool,
    pub i3_lhs: f64,
    pub i3_rhs: f64,
    pub i3_ok: bool,
}

pub fn step_inequality_audit<C: Coeff>(
    state: &IterationState<C>,
    table: &SequenceTable,
    w: &WeightTable,
) -> Result<StepAudit> {
    let k = state.k;
    let row = table.row(k);
    let i1_lhs = box_norm(&Majorant::of_family(state.remainder()), row.r, w);
    let corrections = state.nf().corrections()?;
    let (i2_lhs, i3_lhs) = if state.nf().is_trivial() {
        (0.0, 0.0)
    } else {
        (
            box_norm(&Majorant::of_family(&corrections), row.r, w),
            deriv_box_norm(&Majorant::of_family(&corrections), row.r, w),
        )
    };
    let i2_rhs = table.eps_sum(k);
    let i3_rhs = table.eps_ratio_sum(k);
    Ok(StepAudit {
        k,
        i1_lhs,
        i1_rhs: row.eps,
        i1_ok: leq_with_slack(i1_lhs, row.eps),
        i2_lhs,
        i2_rhs,
        i2_ok: leq_with_slack(i2_lhs, i2_rhs),
        i3_lhs,
        i3_rhs,
        i3_ok: leq_with_slack(i3_lhs, i3_rhs),
    })
}

/// One degree-doubling step, from order `m = 2^k` to `2m`.
pub fn newton_step<C: Coeff>(
    state: &IterationState<C>,
    table: &SequenceTable,
    w: &WeightTable,
) -> Result<IterationState<C>> {
    let m = state.m();
    let trunc = state.remainder.trunc();
    if 2 * m > trunc {
        return Err(Error::DegreeExhausted {
            needed: 2 * m,
            have: trunc,
        });
    }
    let n = state.remainder.n();
    let count = state.remainder.len();

    // split the degree <= 2m jet of the remainder
    let b_jet = state.remainder.map(|r| Ok(r.jet(2 * m)))?;
    let mut res_members = Vec::with_capacity(count);
    let mut nres_members = Vec::with_capacity(count);
    for member in b_jet.iter() {
        let (res, nres) = split(member, count);
        res_members.push(res);
        nres_members.push(nres);
    }
    let b_res = Family::new(n, trunc, res_members)?;
    let b_nres = Family::new(n, trunc, nres_members)?;

    // absorb the resonant part; this is where complete integrability of
    // the evolving normal form is certified, not assumed
    let nf_new = state.nf.absorb(&b_res)?;

    // generator from the nonresonant part, against the order-m normal form
    let u = solve_nonlinear_recursive(&state.nf, &b_nres.map(|f| Ok(f.jet(2 * m)))?, m)?;

    let mut new_remainder = Vec::with_capacity(count);
    let mut split_norms_acc: [Majorant; 4] = [
        Majorant::zero(n, trunc),
        Majorant::zero(n, trunc),
        Majorant::zero(n, trunc),
        Majorant::zero(n, trunc),
    ];
    let mut split_families: [Vec<VectorField<C>>; 4] = [vec![], vec![], vec![], vec![]];
    for i in 0..count {
        let e = VectorField::fundamental(i + 1, n, trunc);
        let nc = state.nf.correction(i + 1)?;
        let r = state.remainder.member(i);

        let ce = e.lie_conjugate(&u, trunc)?;
        let cn = nc.lie_conjugate(&u, trunc)?;
        let cr = r.lie_conjugate(&u, trunc)?;
        let new_x = ce.add(&cn)?.add(&cr)?;
        let nf_field_new = e.add(&nf_new.correction(i + 1)?)?;
        let r_new = new_x.sub(&nf_field_new)?;

        // the degree <= 2m part must cancel exactly
        let low = r_new.jet(2 * m);
        if !low.is_zero() {
            return Err(Error::Invalid(format!(
                "internal: conjugated member {} keeps degree <= {} terms",
                i + 1,
                2 * m
            )));
        }

        // the four-way remainder split, mirrored for the ledger
        let u_e = u.bracket(&e)?;
        let u_n = u.bracket(&nc)?;
        let r11 = ce.sub(&e)?.sub(&u_e)?;
        let r12 = cn.sub(&nc)?.sub(&u_n)?;
        let r2 = cr.sub(r)?;
        let r3 = u_e.add(r)?.add(&u_n)?.high_part(2 * m);
        let reassembled = r11.add(&r12)?.add(&r2)?.add(&r3)?;
        if C::MODE == crate::coeff::Mode::Rational && !reassembled.eq_terms(&r_new) {
            return Err(Error::Invalid(
                "internal: remainder split does not reassemble".into(),
            ));
        }
        split_families[0].push(r11);
        split_families[1].push(r12);
        split_families[2].push(r2);
        split_families[3].push(r3);

        new_remainder.push(r_new);
    }
    let remainder = Family::new(n, trunc, new_remainder)?;

    // norms of the split pieces at the proof radius r_k - delta_k
    let row_k = table.row(state.k);
    let eval_r = row_k.r - row_k.delta;
    let mut split_norms = [0.0f64; 4];
    for (slot, members) in split_families.into_iter().enumerate() {
        let fam = Family::new(n, trunc, members)?;
        split_norms_acc[slot] = Majorant::of_family(&fam);
        split_norms[slot] = box_norm(&split_norms_acc[slot], eval_r, w);
    }

    let mut ledger = state.ledger.clone();
    ledger.push(ledger_row_for_state(
        state.k + 1,
        &nf_new,
        &remainder,
        table,
        w,
        split_norms,
    )?);

    let mut generators = state.generators.clone();
    generators.push(u);

    Ok(IterationState {
        k: state.k + 1,
        nf: nf_new,
        remainder,
        generators,
        ledger,
    })
}

/// Result of a full normalization run.
#[derive(Clone, Debug)]
pub struct NormalizationRun<C: Coeff> {
    pub state: IterationState<C>,
    pub table: SequenceTable,
}

impl<C: Coeff> NormalizationRun<C> {
    pub fn nf(&self) -> &NormalFormFamily<C> {
        self.state.nf()
    }

    pub fn generators(&self) -> &[VectorField<C>] {
        self.state.generators()
    }

    pub fn ledger(&self) -> &[LedgerRow] {
        self.state.ledger()
    }
}

/// Normalize a commuting family `X^i = E^i + F^i` through `K` doubling
/// steps. Requires the truncation degree to reach `2^{K+1}`, the linear
/// parts to be exactly the fundamental fields, a full family (one member
/// per variable pair), and pairwise commutativity at truncation.
pub fn run<C: Coeff>(
    x: &Family<C>,
    c: &SchemeConstants,
    k_steps: u32,
    w: &WeightTable,
) -> Result<NormalizationRun<C>> {
    let n = x.n();
    let trunc = x.trunc();
    if x.len() != n {
        return Err(Error::MismatchedFamily(n, x.len()));
    }
    if k_steps < 1 {
        return Err(Error::Invalid("need at least one step".into()));
    }
    let needed = 1u32 << (k_steps + 1);
    if trunc < needed {
        return Err(Error::DegreeExhausted {
            needed,
            have: trunc,
        });
    }
    if w.n() < n {
        return Err(Error::Invalid("weight table shorter than n".into()));
    }

    let mut perturbations = Vec::with_capacity(n);
    for (i, member) in x.iter().enumerate() {
        let e = VectorField::fundamental(i + 1, n, trunc);
        if !member.homogeneous_part(1).eq_terms(&e) {
            return Err(Error::WrongLinearPart(i + 1));
        }
        let f = member.sub(&e)?;
        if !f.is_zero() && f.min_degree() < 2 {
            return Err(Error::Invalid(format!(
                "perturbation of member {} has degree-{} terms",
                i + 1,
                f.min_degree()
            )));
        }
        perturbations.push(f);
    }
    if let Some((i, j, t)) = x.first_noncommuting_pair()? {
        return Err(Error::NotCommuting {
            i: i + 1,
            j: j + 1,
            detail: format!("{t:?}"),
        });
    }

    let table = sequences(k_steps, c)?;
    let remainder = Family::new(n, trunc, perturbations)?;
    let nf = NormalFormFamily::trivial(n, n, trunc);
    let first_row = ledger_row_for_state(0, &nf, &remainder, &table, w, [0.0; 4])?;
    let mut state = IterationState {
        k: 0,
        nf,
        remainder,
        generators: Vec::new(),
        ledger: vec![first_row],
    };
    for _ in 0..k_steps {
        state = newton_step(&state, &table, w)?;
    }
    Ok(NormalizationRun { state, table })
}

/// Report of the Birkhoff-coordinate check: after pulling a commuting
/// Hamiltonian through the normalizing generators, every monomial
/// `z_+^alpha z_-^beta` with `alpha != beta` must vanish through the
/// checked degree.
#[derive(Clone, Debug)]
pub struct BirkhoffReport<C: Coeff> {
    pub checked_degree: u32,
    pub violations: Vec<(String, String)>,
    pub ok: bool,
    pub transformed: ScalarFunction<C>,
}

/// Check that `h` becomes a function of the actions. `commuting_with` are
/// the Hamiltonians of the normalized family; `{h, h_i} = 0` through the
/// checked degree is a precondition, and its failure is an error rather
/// than a verdict.
pub fn birkhoff_check<C: Coeff>(
    h: &ScalarFunction<C>,
    commuting_with: &[ScalarFunction<C>],
    generators: &[VectorField<C>],
    d: u32,
) -> Result<BirkhoffReport<C>> {
    for (idx, other) in commuting_with.iter().enumerate() {
        let p = h.poisson(other)?;
        let check_deg = d.min(p.trunc());
        if !p.jet(check_deg).is_zero() {
            return Err(Error::Invalid(format!(
                "precondition fails: {{h, h_{}}} is nonzero at degree <= {}",
                idx + 1,
                check_deg
            )));
        }
    }
    let transformed = h.apply_transform(generators, d)?;
    let checked_degree = d.min(transformed.trunc());
    let mut violations = Vec::new();
    for (q, c) in transformed.iter() {
        if q.degree() <= checked_degree && !q.is_action() {
            let (re, im) = c.format_parts();
            violations.push((q.to_string(), format!("{re} + {im} i")));
        }
    }
    Ok(BirkhoffReport {
        checked_degree,
        ok: violations.is_empty(),
        violations,
        transformed,
    })
}
