//! Deterministic instance builders used by the examples, the CLI demo
//! paths and the test suites.
//!
//! Solvable inputs are forward-constructed: pick the answer, conjugate or
//! bracket it into an instance, and the engine has to recover it. All
//! randomness is seeded.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coeff::{Coeff, Rat};
use crate::cohomology::NormalFormFamily;
use crate::error::Result;
use crate::multi_index::MultiIndex;
use crate::resonance::{divisor, is_resonant};
use crate::scalar::ScalarFunction;
use crate::vector_field::{Family, VectorField};

fn random_rational(rng: &mut ChaCha8Rng) -> Rat {
    let num = loop {
        let v = rng.gen_range(-9i64..=9);
        if v != 0 {
            break v;
        }
    };
    Rat::from_ratio(num, rng.gen_range(1i64..=9))
}

fn random_multi_index(rng: &mut ChaCha8Rng, n: usize, max_degree: u32) -> MultiIndex {
    let mut pairs = Vec::new();
    let mut budget = max_degree;
    for k in 1..=n as i32 {
        for idx in [k, -k] {
            if budget == 0 {
                break;
            }
            let e = rng.gen_range(0..=budget.min(3));
            if e > 0 {
                pairs.push((idx, e));
                budget -= e;
            }
        }
    }
    MultiIndex::from_pairs(&pairs)
}

fn random_component(rng: &mut ChaCha8Rng, n: usize) -> i32 {
    let abs = rng.gen_range(1..=n as i32);
    if rng.gen_bool(0.5) {
        abs
    } else {
        -abs
    }
}

/// Random field with every term nonresonant (normalized), degrees in
/// `[min_degree, max_degree]`.
pub fn random_nonresonant_field(
    n: usize,
    trunc: u32,
    min_degree: u32,
    max_degree: u32,
    terms: usize,
    rng: &mut ChaCha8Rng,
) -> VectorField<Rat> {
    let mut out = VectorField::zero(n, trunc);
    let mut placed = 0;
    while placed < terms {
        let q = random_multi_index(rng, n, max_degree);
        if q.degree() < min_degree {
            continue;
        }
        let j = random_component(rng, n);
        if is_resonant(&q, j, n) {
            continue;
        }
        out.add_term_raw(q, j, random_rational(rng));
        placed += 1;
    }
    out
}

/// Random field without resonance constraints.
pub fn random_field(
    n: usize,
    trunc: u32,
    min_degree: u32,
    max_degree: u32,
    terms: usize,
    rng: &mut ChaCha8Rng,
) -> VectorField<Rat> {
    let mut out = VectorField::zero(n, trunc);
    let mut placed = 0;
    while placed < terms {
        let q = random_multi_index(rng, n, max_degree);
        if q.degree() < min_degree {
            continue;
        }
        out.add_term_raw(q, random_component(rng, n), random_rational(rng));
        placed += 1;
    }
    out
}

/// Random polynomial in the actions `z_l z_{-l}`, of action degree
/// (`z`-degree / 2) between `min_k` and `max_k`.
pub fn random_action_polynomial(
    n: usize,
    trunc: u32,
    min_k: u32,
    max_k: u32,
    terms: usize,
    rng: &mut ChaCha8Rng,
) -> ScalarFunction<Rat> {
    let mut out = ScalarFunction::zero(n, trunc);
    for _ in 0..terms {
        let mut pairs = Vec::new();
        let mut budget = rng.gen_range(min_k..=max_k);
        for j in 1..=n as i32 {
            if budget == 0 {
                break;
            }
            let e = if j == n as i32 {
                budget
            } else {
                rng.gen_range(0..=budget)
            };
            if e > 0 {
                pairs.push((j, e));
                pairs.push((-j, e));
                budget -= e;
            }
        }
        let q = MultiIndex::from_pairs(&pairs);
        if q.degree() < 2 * min_k || q.degree() > trunc {
            continue;
        }
        out.insert_raw(q, random_rational(rng));
    }
    out
}

/// A cocycle supported on prescribed nonresonant slots, built from the
/// compatibility relation itself: `F^i_{Q,l} = divisor_i(Q,l) * c_{Q,l}`.
pub fn compat_cocycle(
    n: usize,
    count: usize,
    trunc: u32,
    slots: &[(MultiIndex, i32, Rat)],
) -> Result<Family<Rat>> {
    let mut members = vec![VectorField::zero(n, trunc); count];
    for (q, l, c) in slots {
        for (i, member) in members.iter_mut().enumerate() {
            let d = divisor(q, *l, i + 1);
            if d != 0 {
                member.add_term_raw(q.clone(), *l, c.mul(&Rat::from_int(d)));
            }
        }
    }
    Family::new(n, trunc, members)
}

/// Random nonresonant cocycle with `terms` independent slots of degrees
/// `[min_degree, max_degree]`.
pub fn random_cocycle(
    n: usize,
    count: usize,
    trunc: u32,
    min_degree: u32,
    max_degree: u32,
    terms: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Family<Rat>> {
    let mut slots = Vec::new();
    while slots.len() < terms {
        let q = random_multi_index(rng, n, max_degree);
        if q.degree() < min_degree {
            continue;
        }
        let l = random_component(rng, n);
        if is_resonant(&q, l, count) {
            continue;
        }
        slots.push((q, l, random_rational(rng)));
    }
    compat_cocycle(n, count, trunc, &slots)
}

/// Hamiltonians of a commuting instance: `H^i = z_i z_{-i} + P_i(actions)`
/// transported by the flow of a random Hamiltonian generator, together
/// with the transported fields, the integrable seed and the generator.
#[derive(Clone, Debug)]
pub struct CommutingInstance {
    /// The fields `X^i = i X_{K^i}`, pairwise commuting, linear part `E^i`.
    pub family: Family<Rat>,
    /// `K^i = H^i` pulled through the flow; pairwise Poisson-commuting,
    /// truncated one degree above the fields.
    pub hamiltonians: Vec<ScalarFunction<Rat>>,
    /// The integrable normal form the family was built from.
    pub seed_nf: NormalFormFamily<Rat>,
    /// The conjugating generator (a Hamiltonian field itself).
    pub generator: VectorField<Rat>,
}

/// Forward-construct a commuting family: a completely integrable seed
/// (action Hamiltonians) conjugated by the time-1 flow of a random
/// polynomial Hamiltonian with a third-order zero.
pub fn commuting_instance(n: usize, trunc: u32, seed: u64) -> Result<CommutingInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let strunc = trunc + 1;

    // H^i = z_i z_{-i} + P_i(actions), P_i of z-degree >= 4
    let mut hams = Vec::with_capacity(n);
    for i in 1..=n {
        let mut h = ScalarFunction::<Rat>::action(n, strunc, i);
        let p = random_action_polynomial(n, strunc, 2, 2, 2, &mut rng);
        h = h.add(&p)?;
        hams.push(h);
    }
    let seed_members = hams
        .iter()
        .map(|h| h.hamiltonian_vf().scale(&Rat::i()).with_trunc(trunc))
        .collect::<Vec<_>>();
    let seed_nf = NormalFormFamily::from_family(&Family::new(n, trunc, seed_members)?)?;

    // generator: i X_S for a random S with a third-order zero and no
    // action monomials (so the generator actually moves the family)
    let s = {
        let mut s = ScalarFunction::zero(n, strunc);
        let mut placed = 0;
        while placed < 2 {
            let q = random_multi_index(&mut rng, n, 4);
            if q.degree() < 3 || q.is_action() {
                continue;
            }
            s.insert_raw(q, random_rational(&mut rng));
            placed += 1;
        }
        s
    };
    let gen_scalar = s.hamiltonian_vf().scale(&Rat::i());
    let generator = gen_scalar.with_trunc(trunc);

    let members = (1..=n)
        .map(|i| seed_nf.field(i)?.lie_conjugate(&generator, trunc))
        .collect::<Result<Vec<_>>>()?;
    let family = Family::new(n, trunc, members)?;

    let hamiltonians = hams
        .iter()
        .map(|h| h.apply_transform(std::slice::from_ref(&gen_scalar), strunc))
        .collect::<Result<Vec<_>>>()?;

    Ok(CommutingInstance {
        family,
        hamiltonians,
        seed_nf,
        generator,
    })
}

/// Single-oscillator quartic Hamiltonian `z_1 z_{-1} + c (z_1 + z_{-1})^4`.
pub fn oscillator_quartic(trunc: u32, c: Rat) -> Result<ScalarFunction<Rat>> {
    let sum = ScalarFunction::<Rat>::var(1, trunc, 1).add(&ScalarFunction::var(1, trunc, -1))?;
    let sq = sum.mul(&sum)?;
    let quartic = sq.mul(&sq)?.scale(&c);
    ScalarFunction::action(1, trunc, 1).add(&quartic)
}
