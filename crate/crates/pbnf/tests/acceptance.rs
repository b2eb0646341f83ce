//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Expected values come from exact-arithmetic oracles: forward-constructed
//! instances whose answers are known by construction, an independent
//! degree-by-degree normalizer for the single oscillator, and exhaustive
//! enumeration for the divisor identities.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pbnf::coeff::{Coeff, Rat};
use pbnf::cohomology::{
    solution_bound_check, solve_nonlinear_recursive, solve_nonlinear_spectral, Cocycle,
    NormalFormFamily,
};
use pbnf::format::{ledger_to_jsonl, serialize_family};
use pbnf::instances;
use pbnf::kp::{kp_hypothesis_check, NearIdentityMap};
use pbnf::multi_index::{enumerate, MultiIndex};
use pbnf::newton::{birkhoff_check, run, sequence_lemma_audit, sequences, SchemeConstants};
use pbnf::norms::{
    box_norm, flow_linear_remainder_check, flow_remainder_check, scaling_check, Majorant,
    WeightTable,
};
use pbnf::resonance::{divisor, split};
use pbnf::scalar::ScalarFunction;
use pbnf::vector_field::{Family, VectorField};

fn pass(n: u32, what: &str) {
    println!("criterion {n:2}: PASS - {what}");
}

/// Per-instance constants: r0 = 1/2 and c0 tight for the given family.
fn instance_constants(x: &Family<Rat>, w: &WeightTable) -> SchemeConstants {
    let r0 = 0.5;
    let mut perturbations = Vec::new();
    for (i, member) in x.iter().enumerate() {
        let e = VectorField::fundamental(i + 1, x.n(), x.trunc());
        perturbations.push(member.sub(&e).unwrap());
    }
    let f_norm = box_norm(
        &Majorant::of_family(&Family::new(x.n(), x.trunc(), perturbations).unwrap()),
        r0,
        w,
    );
    SchemeConstants::new(20.0, if f_norm > 0.0 { f_norm / (r0 * r0) } else { 1.0 }, r0).unwrap()
}

#[test]
fn criterion_01_divisor_eigenvalue_identity() {
    let n = 2;
    let trunc = 6;
    let e = Family::<Rat>::fundamental(n, n, trunc);
    let mut checked = 0u32;
    for q in enumerate(n, 0, 5) {
        for j in [1i32, -1, 2, -2] {
            let monomial =
                VectorField::monomial(n, trunc, q.clone(), j, Rat::one()).unwrap();
            for i in 1..=2usize {
                let br = e.member(i - 1).bracket(&monomial).unwrap();
                let expected = monomial.scale_int(divisor(&q, j, i));
                assert!(
                    br.eq_terms(&expected),
                    "divisor identity fails at Q={q}, j={j}, i={i}"
                );
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 126 * 4 * 2);
    pass(1, "bracket with the fundamental fields acts by the integer divisor (exhaustive, |Q| <= 5)");
}

#[test]
fn criterion_02_linear_cohomological_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..200 {
        let n = rng.gen_range(1..=3usize);
        let trunc = 5;
        let fam = instances::random_cocycle(n, n, trunc, 2, 5, rng.gen_range(1..=4), &mut rng)
            .unwrap();
        let cocycle = Cocycle::new(fam.clone()).unwrap();
        let u = pbnf::cohomology::solve_linear(&cocycle).unwrap();
        for i in 1..=n {
            let e = VectorField::<Rat>::fundamental(i, n, trunc);
            assert!(
                e.bracket(&u).unwrap().eq_terms(fam.member(i - 1)),
                "bracket-back failed on case {case}, member {i}"
            );
        }
        assert!(split(&u, n).0.is_zero(), "solution not normalized on case {case}");
    }
    pass(2, "200 random nonresonant cocycles solved with exact bracket-back and normalized output");
}

fn random_quadratic_action_nf(
    n: usize,
    trunc: u32,
    denom: i64,
    rng: &mut ChaCha8Rng,
) -> NormalFormFamily<Rat> {
    let mut a = Vec::new();
    for _ in 0..n {
        let mut row = Vec::new();
        for j in 0..n {
            let gamma = Rat::from_ratio(rng.gen_range(-4i64..=4), denom);
            row.push(ScalarFunction::action(n, trunc, j + 1).scale(&gamma));
        }
        a.push(row);
    }
    NormalFormFamily::new(n, n, trunc, a).unwrap()
}

#[test]
fn criterion_03_nonlinear_solver_cross_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for case in 0..50 {
        let n = rng.gen_range(1..=2usize);
        let m: u32 = if case % 2 == 0 { 2 } else { 4 };
        let trunc = 2 * m;
        let nf = random_quadratic_action_nf(n, trunc, 5, &mut rng);
        let w = instances::random_nonresonant_field(n, trunc, m + 1, 2 * m, 3, &mut rng);
        let b_members = (1..=n)
            .map(|i| nf.field(i).unwrap().bracket(&w).unwrap().jet(2 * m))
            .collect();
        let b = Family::new(n, trunc, b_members).unwrap();

        let u_rec = solve_nonlinear_recursive(&nf, &b, m).unwrap();
        let u_spec = solve_nonlinear_spectral(&nf, &b, m).unwrap();
        assert!(
            u_rec.eq_terms(&u_spec),
            "solvers disagree on case {case} (n={n}, m={m})"
        );
        assert!(u_rec.eq_terms(&w), "solution is not the seed on case {case}");
    }
    pass(3, "recursive and spectral nonlinear solvers agree exactly on 50 forward-built instances");
}

#[test]
fn criterion_04_solution_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let w = WeightTable::unit(3);
    let mut gated = 0;
    for _ in 0..50 {
        let n = rng.gen_range(1..=2usize);
        let m: u32 = if rng.gen_bool(0.5) { 2 } else { 4 };
        let trunc = 2 * m;
        // small action coefficients keep the derivative gate open
        let nf = random_quadratic_action_nf(n, trunc, 60, &mut rng);
        let seed = instances::random_nonresonant_field(n, trunc, m + 1, 2 * m, 3, &mut rng);
        let b_members = (1..=n)
            .map(|i| nf.field(i).unwrap().bracket(&seed).unwrap().jet(2 * m))
            .collect();
        let b = Family::new(n, trunc, b_members).unwrap();
        let u = solve_nonlinear_recursive(&nf, &b, m).unwrap();
        let report = solution_bound_check(&nf, &b, &u, 0.5, &w).unwrap();
        if report.hypothesis_met {
            gated += 1;
            assert_eq!(
                report.ok,
                Some(true),
                "bound violated: |U| = {} > 4 eps = {}",
                report.u_norm,
                4.0 * report.eps
            );
        }
    }
    assert!(gated >= 40, "too few instances passed the derivative gate: {gated}");
    pass(4, "normalized solutions obey |U| <= 4 |B| whenever the 1/2-derivative gate holds");
}

struct Criterion5Output {
    run: pbnf::newton::NormalizationRun<Rat>,
    instance: instances::CommutingInstance,
    constants: SchemeConstants,
}

fn run_criterion_5_instance(seed: u64) -> Criterion5Output {
    let n = 2;
    let trunc = 16;
    let instance = instances::commuting_instance(n, trunc, seed).unwrap();
    let w = WeightTable::unit(n);
    let constants = instance_constants(&instance.family, &w);
    let run_out = run(&instance.family, &constants, 3, &w).unwrap();
    Criterion5Output {
        run: run_out,
        instance,
        constants,
    }
}

#[test]
fn criterion_05_newton_run_on_forward_family() {
    let out = run_criterion_5_instance(5);
    let n = 2;
    let trunc = 16;

    // (a) the normal form is exactly resonant
    for i in 1..=n {
        let corr = out.run.nf().correction(i).unwrap();
        let (_, nres) = split(&corr, n);
        assert!(nres.is_zero(), "nonresonant content in N^{i}");
    }
    // (b) remainder vanishes to order 2^3 + 1 = 9
    for (i, r) in out.run.state.remainder().iter().enumerate() {
        assert!(
            r.min_degree() >= 9,
            "remainder {} has degree {}",
            i + 1,
            r.min_degree()
        );
    }
    // (c) action-coefficient extraction succeeds on the output fields
    let nf_fields = out.run.nf().fields().unwrap();
    let re_extracted = NormalFormFamily::from_family(&nf_fields).unwrap();
    for i in 1..=n {
        for j in 1..=n {
            assert!(re_extracted.a(i, j).is_action_polynomial());
            assert!(re_extracted.a(i, j).eq_terms(out.run.nf().a(i, j)));
        }
    }
    // (d) conjugating back by the negated generators recovers the input
    for i in 0..n {
        let mut field = out
            .run
            .nf()
            .field(i + 1)
            .unwrap()
            .add(out.run.state.remainder().member(i))
            .unwrap();
        for g in out.run.generators().iter().rev() {
            field = field.lie_conjugate(&g.neg(), trunc).unwrap();
        }
        assert!(
            field.eq_terms(out.instance.family.member(i)),
            "round trip failed on member {}",
            i + 1
        );
    }
    pass(5, "K = 3 run at truncation 16: resonant normal form, order-9 remainder, exact round trip");
}

#[test]
fn criterion_06_single_oscillator_birkhoff_oracle() {
    let n = 1;
    let trunc = 16;
    let c = Rat::from_ratio(1, 10);
    let h = instances::oscillator_quartic(trunc + 1, c.clone()).unwrap();
    let x1 = h.hamiltonian_vf().scale(&Rat::i()).with_trunc(trunc);
    let family = Family::new(n, trunc, vec![x1.clone()]).unwrap();
    let w = WeightTable::unit(n);
    let constants = instance_constants(&family, &w);

    // independent degree-by-degree normalizer, shared-nothing
    let oracle_nf = oscillator_oracle::normalize(&x1, trunc);

    // K = 2: normalized through degree 4; compare what exists
    let out2 = run(&family, &constants, 2, &w).unwrap();
    let n2 = out2.nf().correction(1).unwrap();
    for (t, coeff) in n2.iter() {
        assert!(t.q.degree() <= 4);
        let got = oscillator_oracle::coeff(&oracle_nf, &t.q, t.j);
        assert_eq!(coeff.clone(), got, "K=2 mismatch at {:?}", t);
    }

    // K = 3: normalized through degree 8; exact equality through degree 7
    let out3 = run(&family, &constants, 3, &w).unwrap();
    let n3 = out3.nf().correction(1).unwrap();
    for q in enumerate(n, 0, 7) {
        for j in [1i32, -1] {
            let engine = n3.coeff(&q, j);
            let oracle = oscillator_oracle::coeff(&oracle_nf, &q, j);
            assert_eq!(engine, oracle, "K=3 mismatch at ({q}, e_{j})");
        }
    }
    // the resonant directions are exactly z_j (z_1 z_{-1})^k
    for (t, _) in n3.iter() {
        let reduced = t.q.div_var(t.j).expect("resonant direction");
        assert!(reduced.is_action());
    }
    pass(6, "oscillator normal form matches the independent degree-by-degree normalizer exactly");
}

#[test]
fn criterion_07_birkhoff_check_for_commuting_hamiltonian() {
    let out = run_criterion_5_instance(5);
    let check_deg = (1u32 << 3) + 1; // the family is normalized through degree 8

    // the family's own first Hamiltonian
    let h1 = out.instance.hamiltonians[0].clone();
    let rep = birkhoff_check(
        &h1,
        &out.instance.hamiltonians,
        out.run.generators(),
        check_deg,
    )
    .unwrap();
    assert!(rep.ok, "violations: {:?}", rep.violations);
    assert_eq!(rep.checked_degree, check_deg);

    // a combination of the family Hamiltonians also commutes
    let combo = out.instance.hamiltonians[0]
        .scale_int(2)
        .add(&out.instance.hamiltonians[1].neg())
        .unwrap();
    let rep2 = birkhoff_check(
        &combo,
        &out.instance.hamiltonians,
        out.run.generators(),
        check_deg,
    )
    .unwrap();
    assert!(rep2.ok, "violations: {:?}", rep2.violations);
    pass(7, "commuting Hamiltonians become action functions through the safe degree");
}

#[test]
fn criterion_08_sequence_lemmas() {
    for b in [10.0, 20.0] {
        let r0 = 0.9 * SchemeConstants::max_admissible_r0(b, 1.0).unwrap();
        let c = SchemeConstants::new(b, 1.0, r0).unwrap();
        let audit = sequence_lemma_audit(20, &c).unwrap();
        assert!(
            audit.product_identity_ok,
            "product identity failed at b={b}: rel err {}",
            audit.max_product_rel_err
        );
        assert!(audit.max_product_rel_err <= 1e-12);
        assert!(audit.radius_floor_ok, "radius floor failed at b={b}");
        assert!(audit.eps_sum_ok, "eps sum bound failed at b={b}");
        assert!(audit.eps_ratio_sum_ok, "eps ratio sum bound failed at b={b}");
        assert!(audit.ln2_partial_ok);

        // the closed form and the floor, spot-checked on the table
        let table = sequences(20, &c).unwrap();
        for row in &table.rows {
            assert!(row.r >= c.r0 / 4f64.powf(b + 2.0) * (1.0 - 1e-12));
        }
    }
    pass(8, "sequence products match the closed form to 1e-12 and the partial-sum bounds hold");
}

#[test]
fn criterion_09_scaling_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let r = 1.2;
    for case in 0..200 {
        let m = rng.gen_range(2..=5u32);
        let n = rng.gen_range(1..=2usize);
        let field = instances::random_field(n, 8, m, 7, rng.gen_range(1..=5), &mut rng);
        let maj = Majorant::of_field(&field);
        if maj.is_zero() {
            continue;
        }
        for alpha in [0.1, 0.5, 0.9, 1.0] {
            assert!(
                scaling_check(&maj, r, alpha, m).unwrap(),
                "scaling violated on case {case}, alpha {alpha}"
            );
        }
    }
    // homogeneous case saturates the bound exactly
    let homog = instances::random_field(1, 6, 3, 3, 3, &mut ChaCha8Rng::seed_from_u64(7));
    let maj = Majorant::of_field(&homog);
    let w = WeightTable::unit(1);
    for alpha in [0.1, 0.5, 0.9] {
        let lhs = box_norm(&maj, alpha * r, &w);
        let rhs = alpha.powi(3) * box_norm(&maj, r, &w);
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
    }
    pass(9, "majorant norms scale by at least alpha^m, with equality in the homogeneous case");
}

#[test]
fn criterion_10_flow_remainder_inequalities() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let (r, delta, trunc) = (1.0, 0.5, 8u32);
    let w = WeightTable::unit(3);
    let mut checked = 0;
    while checked < 50 {
        let n = rng.gen_range(1..=2usize);
        // small generator: random field shrunk hard below both gates
        let u = instances::random_field(n, trunc, 2, 5, rng.gen_range(1..=3), &mut rng)
            .scale(&Rat::from_ratio(1, 2000));
        let f_members = (0..n)
            .map(|_| instances::random_field(n, trunc, 1, 5, rng.gen_range(1..=4), &mut rng))
            .collect();
        let f = Family::new(n, trunc, f_members).unwrap();

        let rep = flow_remainder_check(&u, &f, r, delta, trunc, &w).unwrap();
        if !rep.hypothesis_met {
            continue;
        }
        assert!(
            rep.first_ok && rep.second_ok,
            "flow remainder bound failed: {rep:?}"
        );

        let rep_lin = flow_linear_remainder_check(&u, r, delta, trunc, &w).unwrap();
        assert!(rep_lin.hypothesis_met, "linear gate unexpectedly closed");
        assert!(rep_lin.ok, "linear remainder bound failed: {rep_lin:?}");
        checked += 1;
    }
    pass(10, "50 random pairs satisfy both flow-remainder inequalities with the stated constants");
}

#[test]
fn criterion_11_kp_pipeline() {
    let n = 2;
    let d = 8;
    let strunc = d + 2;
    // canonical flow of a random cubic-and-quartic Hamiltonian
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let mut s = ScalarFunction::<Rat>::zero(n, strunc);
    let mut placed = 0;
    while placed < 3 {
        let q = {
            let pairs: Vec<(i32, u32)> = (1..=n as i32)
                .flat_map(|k| {
                    [
                        (k, rng.gen_range(0..3u32)),
                        (-k, rng.gen_range(0..2u32)),
                    ]
                })
                .collect();
            MultiIndex::from_pairs(&pairs)
        };
        if q.degree() < 3 || q.degree() > 4 || q.is_action() {
            continue;
        }
        s.add_term(q, Rat::from_ratio(rng.gen_range(-3i64..=3).max(1), rng.gen_range(2..7)))
            .unwrap();
        placed += 1;
    }
    let psi = NearIdentityMap::from_canonical_flow(&s, d).unwrap();
    assert!(!psi.correction().is_zero());

    // hypotheses hold exactly at truncation
    let report = kp_hypothesis_check(&psi, d).unwrap();
    assert!(report.kp1_ok, "KP1 failed: {report:?}");
    assert!(report.cross_path_ok, "assembly paths disagree");
    assert!(report.min_degree_ok);

    // end to end: normalize the action fields and check Birkhoff form
    let fields = psi.fields().unwrap();
    let w = WeightTable::unit(n);
    let constants = instance_constants(&fields, &w);
    let out = run(&fields, &constants, 2, &w).unwrap();
    let actions = psi.actions().unwrap();
    let check_deg = out.state.m() + 1;
    for (j, action) in actions.iter().enumerate() {
        let rep = birkhoff_check(action, &actions, out.generators(), check_deg).unwrap();
        assert!(rep.ok, "action {} not in Birkhoff form: {:?}", j + 1, rep.violations);
    }
    pass(11, "flow-built map passes the hypotheses and its actions reach Birkhoff form end to end");
}

#[test]
fn criterion_12_determinism() {
    let a = run_criterion_5_instance(5);
    let b = run_criterion_5_instance(5);

    let ledger_a = ledger_to_jsonl(a.run.ledger());
    let ledger_b = ledger_to_jsonl(b.run.ledger());
    assert_eq!(ledger_a, ledger_b, "ledgers differ between identical runs");

    let nf_a = serialize_family(&a.run.nf().fields().unwrap(), None);
    let nf_b = serialize_family(&b.run.nf().fields().unwrap(), None);
    assert_eq!(nf_a, nf_b);

    let gens_a = serialize_family(
        &Family::new(2, 16, a.run.generators().to_vec()).unwrap(),
        None,
    );
    let gens_b = serialize_family(
        &Family::new(2, 16, b.run.generators().to_vec()).unwrap(),
        None,
    );
    assert_eq!(gens_a, gens_b);
    assert_eq!(a.constants.c0, b.constants.c0);
    pass(12, "identical seeds produce byte-identical ledgers and serialized outputs");
}

/// Independent single-oscillator normalizer used as the oracle for
/// criterion 6. Deliberately shares nothing with the engine: dense
/// exponent keys, tuple complex rationals, its own bracket and its own
/// degree-by-degree elimination.
mod oscillator_oracle {
    use num_rational::BigRational;
    use num_traits::Zero;
    use pbnf::coeff::{Coeff, Rat};
    use pbnf::multi_index::MultiIndex;
    use pbnf::vector_field::VectorField;
    use std::collections::HashMap;

    /// Complex rational as a plain pair.
    type C = (BigRational, BigRational);
    /// Key: (exponent of z_1, exponent of z_{-1}, component +1/-1).
    type Key = (u32, u32, i8);
    pub type Field = HashMap<Key, C>;

    fn add_c(a: &C, b: &C) -> C {
        (&a.0 + &b.0, &a.1 + &b.1)
    }

    fn mul_c(a: &C, b: &C) -> C {
        (&a.0 * &b.0 - &a.1 * &b.1, &a.0 * &b.1 + &a.1 * &b.0)
    }

    fn scale_c(a: &C, f: &BigRational) -> C {
        (&a.0 * f, &a.1 * f)
    }

    fn is_zero_c(a: &C) -> bool {
        a.0.is_zero() && a.1.is_zero()
    }

    fn insert(field: &mut Field, key: Key, value: C) {
        let entry = field.entry(key).or_insert_with(|| (BigRational::zero(), BigRational::zero()));
        *entry = add_c(entry, &value);
        if is_zero_c(entry) {
            field.remove(&key);
        }
    }

    /// [X, Y] = DY.X - DX.Y via explicit partial derivatives.
    fn bracket(x: &Field, y: &Field, max_deg: u32) -> Field {
        let mut out = Field::new();
        // DY.X: for y-term with exponents (a, b) on component j, the
        // derivative in z_1 pairs with x-terms on component +1, the
        // derivative in z_{-1} with x-terms on component -1.
        for (&(ya, yb, yj), yc) in y {
            for (&(xa, xb, xj), xc) in x {
                // d/dz_1 of y times x-component +1
                if xj == 1 && ya > 0 {
                    let deg = ya - 1 + yb + xa + xb;
                    if deg <= max_deg {
                        let c = scale_c(&mul_c(yc, xc), &BigRational::from_integer(ya.into()));
                        insert(&mut out, (ya - 1 + xa, yb + xb, yj), c);
                    }
                }
                // d/dz_{-1} of y times x-component -1
                if xj == -1 && yb > 0 {
                    let deg = ya + yb - 1 + xa + xb;
                    if deg <= max_deg {
                        let c = scale_c(&mul_c(yc, xc), &BigRational::from_integer(yb.into()));
                        insert(&mut out, (ya + xa, yb - 1 + xb, yj), c);
                    }
                }
                // minus DX.Y, same shape with roles swapped
                if yj == 1 && xa > 0 {
                    let deg = xa - 1 + xb + ya + yb;
                    if deg <= max_deg {
                        let c = scale_c(&mul_c(xc, yc), &BigRational::from_integer((-(xa as i64)).into()));
                        insert(&mut out, (xa - 1 + ya, xb + yb, xj), c);
                    }
                }
                if yj == -1 && xb > 0 {
                    let deg = xa + xb - 1 + ya + yb;
                    if deg <= max_deg {
                        let c = scale_c(&mul_c(xc, yc), &BigRational::from_integer((-(xb as i64)).into()));
                        insert(&mut out, (xa + ya, xb - 1 + yb, xj), c);
                    }
                }
            }
        }
        out
    }

    /// The eigenvalue of the bracket with E^1 on z_1^a z_{-1}^b e_j.
    fn eigenvalue(a: u32, b: u32, j: i8) -> i64 {
        a as i64 - b as i64 - j as i64
    }

    fn conjugate(x: &Field, u: &Field, max_deg: u32) -> Field {
        let mut acc = x.clone();
        let mut cur = x.clone();
        let mut k = 1i64;
        loop {
            cur = bracket(u, &cur, max_deg);
            let kf = BigRational::from_integer(k.into());
            for c in cur.values_mut() {
                *c = (&c.0 / &kf, &c.1 / &kf);
            }
            if cur.is_empty() {
                break;
            }
            for (key, c) in &cur {
                insert(&mut acc, *key, c.clone());
            }
            k += 1;
        }
        acc
    }

    /// Degree-by-degree normalization of a single field with linear part
    /// E^1: at each degree solve the homological equation for the
    /// nonresonant terms and conjugate.
    pub fn normalize(input: &VectorField<Rat>, max_deg: u32) -> Field {
        // import the engine field into the oracle representation
        let mut x = Field::new();
        for (t, c) in input.iter() {
            let key = (t.q.exp(1), t.q.exp(-1), t.j as i8);
            insert(&mut x, key, (c.re.clone(), c.im.clone()));
        }
        for s in 2..=max_deg {
            let mut u = Field::new();
            for (&(a, b, j), c) in &x {
                if a + b != s {
                    continue;
                }
                let ev = eigenvalue(a, b, j);
                if ev != 0 {
                    let d = BigRational::from_integer(ev.into());
                    u.insert((a, b, j), (&c.0 / &d, &c.1 / &d));
                }
            }
            if u.is_empty() {
                continue;
            }
            x = conjugate(&x, &u, max_deg);
        }
        // return only the nonlinear resonant content
        let mut nf = Field::new();
        for (&(a, b, j), c) in &x {
            if a + b >= 2 {
                assert_eq!(eigenvalue(a, b, j), 0, "normalization left a nonresonant term");
                insert(&mut nf, (a, b, j), c.clone());
            }
        }
        nf
    }

    /// Coefficient lookup in engine terms.
    pub fn coeff(field: &Field, q: &MultiIndex, j: i32) -> Rat {
        let key = (q.exp(1), q.exp(-1), j as i8);
        match field.get(&key) {
            Some((re, im)) => Rat::new(re.clone(), im.clone()),
            None => Rat::zero(),
        }
    }
}
