//! Seeded generators for spaces, families and formulas, and a brute-force
//! evaluator that decides truth one sample at a time.
//!
//! The reference evaluator shares no code with the engine beyond the syntax
//! tree: the arithmetic is reimplemented here on `BigUint`, and quantifiers are
//! expanded per sample instead of being folded over events.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rvforce::logic::Func;
use rvforce::{Family, Formula, RandomVariable, SampleSpace, Structure, Term};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random explicit space with `count` distinct points drawn from
/// `0..2^n_bits`, in random order.
pub fn random_space(rng: &mut TestRng, n_bits: u32, count: usize) -> Arc<SampleSpace> {
    assert!(n_bits < 32 && count <= 1 << n_bits, "not enough points");
    let points = rand::seq::index::sample(rng, 1 << n_bits, count)
        .into_iter()
        .map(BigUint::from)
        .collect();
    SampleSpace::explicit(n_bits, points).expect("points fit in n_bits")
}

pub fn random_rv(rng: &mut TestRng, name: &str, space: &Arc<SampleSpace>, max_value: u64) -> RandomVariable {
    let values: Vec<u64> = (0..space.len()).map(|_| rng.random_range(0..=max_value)).collect();
    RandomVariable::from_u64s(name, space, &values).expect("table has one value per sample")
}

/// `size` random members named `r0, r1, ...`; tables may repeat, in which
/// case the family keeps the first.
pub fn random_family(rng: &mut TestRng, space: &Arc<SampleSpace>, size: usize, max_value: u64) -> Family {
    let members = (0..size)
        .map(|i| random_rv(rng, &format!("r{i}"), space, max_value))
        .collect();
    Family::new(space, members).expect("generated names are distinct")
}

/// A structure over a random space and family, with constant names usable in
/// generated formulas.
pub fn random_structure(rng: &mut TestRng, samples: usize, size: usize, max_value: u64) -> Structure {
    let bits = (usize::BITS - samples.leading_zeros()).max(8);
    let space = random_space(rng, bits, samples);
    Structure::new(random_family(rng, &space, size, max_value))
}

const FUNCS: [Func; 6] = [Func::Add, Func::Mul, Func::Pair, Func::Len, Func::Proj1, Func::Proj2];

/// A random term over `vars` and `consts` with nesting at most `depth`.
/// Products and pairs are only applied to leaves so values stay small.
pub fn random_term(rng: &mut TestRng, vars: &[String], consts: &[String], depth: usize) -> Term {
    let leaf = |rng: &mut TestRng| -> Term {
        let pick = rng.random_range(0..4);
        if pick == 0 || (vars.is_empty() && consts.is_empty()) {
            Term::lit(rng.random_range(0..3))
        } else if (pick == 1 || vars.is_empty()) && !consts.is_empty() {
            Term::constant(&consts[rng.random_range(0..consts.len())])
        } else {
            Term::var(&vars[rng.random_range(0..vars.len())])
        }
    };
    if depth == 0 || rng.random_bool(0.4) {
        return leaf(rng);
    }
    let f = FUNCS[rng.random_range(0..FUNCS.len())];
    match f {
        Func::Mul | Func::Pair => Term::binary(f, leaf(rng), leaf(rng)),
        Func::Add => Term::binary(
            f,
            random_term(rng, vars, consts, depth - 1),
            random_term(rng, vars, consts, depth - 1),
        ),
        _ => Term::unary(f, random_term(rng, vars, consts, depth - 1)),
    }
}

pub fn random_atom(rng: &mut TestRng, vars: &[String], consts: &[String]) -> Formula {
    let l = random_term(rng, vars, consts, 2);
    let r = random_term(rng, vars, consts, 2);
    if rng.random_bool(0.5) {
        Formula::eq(l, r)
    } else {
        Formula::le(l, r)
    }
}

/// A quantifier-free formula with connective depth at most `depth`.
pub fn random_open_formula(rng: &mut TestRng, vars: &[String], consts: &[String], depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.3) {
        return random_atom(rng, vars, consts);
    }
    let sub = |rng: &mut TestRng| random_open_formula(rng, vars, consts, depth - 1);
    match rng.random_range(0..4) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        _ => Formula::implies(sub(rng), sub(rng)),
    }
}

/// A formula with at most `quantifiers` nested quantifiers whose free
/// variables are among `free`.
pub fn random_formula(
    rng: &mut TestRng,
    free: &[String],
    consts: &[String],
    quantifiers: usize,
) -> Formula {
    if quantifiers == 0 || rng.random_bool(0.25) {
        return random_open_formula(rng, free, consts, 2);
    }
    let var = format!("q{}", free.len());
    let mut inner_vars = free.to_vec();
    inner_vars.push(var.clone());
    match rng.random_range(0..5) {
        0 | 1 => Formula::exists(&var, random_formula(rng, &inner_vars, consts, quantifiers - 1)),
        2 | 3 => Formula::forall(&var, random_formula(rng, &inner_vars, consts, quantifiers - 1)),
        _ => {
            let body = random_formula(rng, &inner_vars, consts, quantifiers - 1);
            let side = random_open_formula(rng, free, consts, 1);
            let q = if rng.random_bool(0.5) {
                Formula::exists(&var, body)
            } else {
                Formula::forall(&var, body)
            };
            if rng.random_bool(0.5) {
                Formula::and(side, q)
            } else {
                Formula::or(q, side)
            }
        }
    }
}

fn bit_length(v: &BigUint) -> BigUint {
    BigUint::from(v.bits())
}

fn pair(x: &BigUint, y: &BigUint) -> BigUint {
    let s = x + y;
    (&s * (&s + 1u32)) / 2u32 + y
}

/// Inverse of `pair` by searching for the diagonal.
fn unpair(z: &BigUint) -> (BigUint, BigUint) {
    // w is the largest value with w(w+1)/2 <= z.
    let mut w = (z * 2u32).sqrt();
    while &w * (&w + 1u32) / 2u32 > *z {
        w -= 1u32;
    }
    while (&w + 1u32) * (&w + 2u32) / 2u32 <= *z {
        w += 1u32;
    }
    let y = z - &w * (&w + 1u32) / 2u32;
    let x = &w - &y;
    (x, y)
}

/// Pointwise reference semantics.
pub struct BruteForce<'a> {
    range: &'a [RandomVariable],
    constants: &'a BTreeMap<String, RandomVariable>,
}

impl<'a> BruteForce<'a> {
    pub fn new(range: &'a [RandomVariable], constants: &'a BTreeMap<String, RandomVariable>) -> Self {
        BruteForce { range, constants }
    }

    pub fn for_structure(k: &'a Structure) -> Self {
        BruteForce::new(k.range(), k.constants())
    }

    pub fn term(&self, t: &Term, env: &BTreeMap<String, RandomVariable>, w: usize) -> BigUint {
        match t {
            Term::Var(v) => env[v].value_at(w).unwrap().clone(),
            Term::Lit(n) => n.clone(),
            Term::Const(c) => self.constants[c].value_at(w).unwrap().clone(),
            Term::App(f, args) => {
                let a: Vec<BigUint> = args.iter().map(|t| self.term(t, env, w)).collect();
                match f {
                    Func::Add => &a[0] + &a[1],
                    Func::Mul => &a[0] * &a[1],
                    Func::Pair => pair(&a[0], &a[1]),
                    Func::Len => bit_length(&a[0]),
                    Func::Proj1 => unpair(&a[0]).0,
                    Func::Proj2 => unpair(&a[0]).1,
                }
            }
        }
    }

    /// Truth of `f` at sample `w`. A quantifier holds at `w` when some (every)
    /// range member makes the body hold at `w`.
    pub fn holds(&self, f: &Formula, env: &mut BTreeMap<String, RandomVariable>, w: usize) -> bool {
        match f {
            Formula::Eq(l, r) => self.term(l, env, w) == self.term(r, env, w),
            Formula::Le(l, r) => self.term(l, env, w) <= self.term(r, env, w),
            Formula::Not(a) => !self.holds(a, env, w),
            Formula::And(a, b) => self.holds(a, env, w) && self.holds(b, env, w),
            Formula::Or(a, b) => self.holds(a, env, w) || self.holds(b, env, w),
            Formula::Implies(a, b) => !self.holds(a, env, w) || self.holds(b, env, w),
            Formula::Exists(x, body) | Formula::Forall(x, body) => {
                let exists = matches!(f, Formula::Exists(..));
                let saved = env.remove(x);
                let mut result = !exists;
                for m in self.range {
                    env.insert(x.clone(), m.clone());
                    if self.holds(body, env, w) == exists {
                        result = exists;
                        break;
                    }
                }
                env.remove(x);
                if let Some(s) = saved {
                    env.insert(x.clone(), s);
                }
                result
            }
        }
    }

    /// The truth value as one flag per sample.
    pub fn truth(&self, f: &Formula, env: &BTreeMap<String, RandomVariable>, samples: usize) -> Vec<bool> {
        let mut env = env.clone();
        (0..samples).map(|w| self.holds(f, &mut env, w)).collect()
    }
}

/// Flags of an engine event, for comparison with [`BruteForce::truth`].
pub fn event_flags(e: &rvforce::Event) -> Vec<bool> {
    (0..e.universe_len()).map(|i| e.contains(i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_pairing_inverts() {
        for x in 0u32..20 {
            for y in 0u32..20 {
                let z = pair(&BigUint::from(x), &BigUint::from(y));
                assert_eq!(unpair(&z), (BigUint::from(x), BigUint::from(y)));
            }
        }
    }

    #[test]
    fn generators_are_seeded() {
        let a = random_formula(&mut rng(3), &["x".into()], &["r0".into()], 2);
        let b = random_formula(&mut rng(3), &["x".into()], &["r0".into()], 2);
        assert_eq!(a, b);
    }
}
