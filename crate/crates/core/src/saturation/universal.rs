//! A family of short-output functions stratified by output length, and the
//! universal type that its prefixes satisfy but no core member realizes.

use std::collections::BTreeSet;

use num_integer::Roots;
use num_traits::{One, ToPrimitive};

use super::{conjunction_chain, TypeSpec};
use crate::error::{Error, Result};
use crate::eval::{Env, Structure};
use crate::family::{Circuit, Family, RandomVariable, Synthesis, SynthesisMethod};
use crate::logic::{bit_length, Formula, Natural};
use crate::space::{MeasureValue, SampleSpace};

/// Largest exponent accepted by [`length_witness`].
const MAX_LENGTH_WITNESS_BITS: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UniversalFailureParams {
    /// Sample width in bits.
    pub n: u32,
    /// Number of filtration levels; the last is the core.
    pub levels: usize,
    pub samples: usize,
    pub seed: u64,
    /// Prefix horizon `K` for the left side.
    pub horizon: usize,
    /// Depth `D > K` for the right side.
    pub depth: usize,
}

impl Default for UniversalFailureParams {
    fn default() -> Self {
        UniversalFailureParams {
            n: 256,
            levels: 4,
            samples: 1024,
            seed: 7,
            horizon: 3,
            depth: 4,
        }
    }
}

impl UniversalFailureParams {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n < 16 {
            return bad(format!("n must be at least 16, got {}", self.n));
        }
        if self.levels < 2 {
            return bad(format!("levels must be at least 2, got {}", self.levels));
        }
        if self.samples < 64 {
            return bad(format!("samples must be at least 64, got {}", self.samples));
        }
        if self.horizon < 1 {
            return bad("horizon must be at least 1".into());
        }
        if self.depth <= self.horizon {
            return bad(format!(
                "depth ({}) must exceed horizon ({})",
                self.depth, self.horizon
            ));
        }
        Ok(())
    }

    /// `floor(n^(1/level))`.
    pub fn root(&self, level: usize) -> u64 {
        u64::from(self.n).nth_root(level as u32)
    }
}

/// Per-level view of which witness values the formula admits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SqueezeRow {
    pub level: usize,
    /// `e = floor(n^(1/level))`: the largest length `l` with `l^level <= n`.
    pub root: u64,
    /// Output-length budget `2^e` (levels within the filtration only).
    pub budget_bits: Option<Natural>,
    /// `len(v)` for the named value `v = 2^(e-1)`, which is `e`.
    pub named_len: u64,
    pub named_in_core: bool,
    /// Values `x` with `len(x)^level <= n`: `2^e` of them.
    pub feasible_values: Natural,
    /// Feasible values that are a core member's length on every sample.
    pub blocked_values: usize,
    /// Best `mu([[A_1 & ... & A_level (a)]])` over core members `a`.
    pub best_core_measure: MeasureValue,
}

pub struct UniversalFailure {
    pub params: UniversalFailureParams,
    pub structure: Structure,
    /// `A_1, ..., A_T` with `T = max(levels, depth)`.
    pub type_spec: TypeSpec,
    /// `(level, root, member count)` per filtration level.
    pub levels: Vec<(usize, u64, usize)>,
    /// `(K', mu([[exists x (A_1 & ... & A_K')]]))` for `K' <= horizon`.
    pub lhs_rows: Vec<(usize, MeasureValue)>,
    /// Minimum of `lhs_rows`.
    pub lhs: MeasureValue,
    /// `(member, mu([[A_1 & ... & A_depth (member)]]))` over the core.
    pub rhs_rows: Vec<(String, MeasureValue)>,
    pub rhs_max: MeasureValue,
    pub rhs_best: String,
    pub squeeze: Vec<SqueezeRow>,
}

/// `2^a(w) - 1` at every sample: a string of bit-length `a(w)`.
pub fn length_witness(a: &RandomVariable) -> Result<RandomVariable> {
    let values = a
        .table()
        .iter()
        .map(|v| {
            let e = v
                .to_u64()
                .filter(|&e| e <= MAX_LENGTH_WITNESS_BITS)
                .ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "length witness of `{}` needs more than {MAX_LENGTH_WITNESS_BITS} bits",
                        a.name()
                    ))
                })?;
            Ok((Natural::one() << e) - Natural::one())
        })
        .collect::<Result<Vec<_>>>()?;
    RandomVariable::synthesized(
        &format!("lenwit_{}", a.name()),
        a.space(),
        values,
        Synthesis {
            method: SynthesisMethod::LengthWitness,
            sources: vec![a.name().to_string()],
            condition: None,
        },
    )
}

/// `A_k(x) := (len(x)*...*len(x) <= nlen) & (forall y)(len(y) != x)` with
/// `k` factors.
pub fn universal_formula_text(k: usize) -> String {
    let power = vec!["len(x)"; k].join("*");
    format!("({power} <= nlen) & (forall y)(len(y) != x)")
}

fn pow2(e: u64) -> Natural {
    Natural::one() << e
}

fn catalog(p: &UniversalFailureParams, space: &std::sync::Arc<SampleSpace>) -> Result<Vec<RandomVariable>> {
    let n = p.n as usize;
    let top = p.levels.max(p.depth);
    let mut members = vec![RandomVariable::identity("id", space)];
    for j in 1..=4 {
        members.push(RandomVariable::from_circuit(
            &format!("low{j}"),
            space,
            Circuit::low_bits(n, j)?,
        )?);
    }
    members.push(RandomVariable::from_circuit("parity", space, Circuit::parity(n)?)?);
    let small = pow2(p.root(p.levels)).to_u64().unwrap_or(u64::MAX).min(64);
    for v in 0..small {
        members.push(RandomVariable::constant(&format!("c{v}"), space, Natural::from(v)));
    }
    for l in 1..=top {
        let e = p.root(l);
        members.push(RandomVariable::constant(&format!("v{l}"), space, pow2(e - 1)));
    }
    let mut j = 1u64;
    while j <= u64::from(p.n) {
        members.push(RandomVariable::constant(
            &format!("ones{j}"),
            space,
            pow2(j) - Natural::one(),
        ));
        j *= 2;
    }

    // Length-witness closure over small-valued members.
    let limit = pow2(p.root(2));
    let mut fam = Family::new(space, members)?;
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for _ in 0..3 {
        let mut extra = Vec::new();
        for m in fam.members() {
            if seen.contains(m.name()) || m.max_value() > limit {
                continue;
            }
            seen.insert(m.name().to_string());
            extra.push(length_witness(m)?);
        }
        if extra.is_empty() {
            break;
        }
        let fresh: Vec<RandomVariable> =
            extra.into_iter().filter(|w| !fam.contains(w)).collect();
        fam = fam.extended(fresh)?;
    }
    Ok(fam.members().to_vec())
}

/// Builds the stratified family on a sampled space and measures the
/// truncated left side against the deep right side of the saturation
/// inequality for the universal type `A_k`.
pub fn build_universal_failure(p: UniversalFailureParams) -> Result<UniversalFailure> {
    p.validate()?;
    let space = SampleSpace::sampled(p.n, p.samples, p.seed)?;
    let members = catalog(&p, &space)?;

    let mut level_lists = Vec::with_capacity(p.levels);
    for l in 1..=p.levels {
        let e = p.root(l);
        let within = |m: &RandomVariable| e >= 64 || m.output_bits() <= (1u64 << e);
        level_lists.push(members.iter().filter(|m| within(m)).cloned().collect::<Vec<_>>());
    }
    let levels: Vec<(usize, u64, usize)> = level_lists
        .iter()
        .enumerate()
        .map(|(i, l)| (i + 1, p.root(i + 1), l.len()))
        .collect();
    let family = Family::filtered(&space, level_lists)?;
    let nlen = RandomVariable::constant("nlen", &space, Natural::from(p.n));
    let k = Structure::new(family).with_constant(nlen)?;

    let top = p.levels.max(p.depth);
    let formulas: Vec<Formula> = (1..=top)
        .map(|i| k.parse(&universal_formula_text(i)))
        .collect::<Result<_>>()?;
    let type_spec = TypeSpec::new(formulas, "x")?;
    let chain = conjunction_chain(type_spec.formulas())?;

    let mut lhs_rows = Vec::with_capacity(p.horizon);
    for kk in 1..=p.horizon {
        let e = k.sentence_value(&Formula::exists("x", chain[kk - 1].clone()))?;
        lhs_rows.push((kk, e.measure()));
    }
    let lhs = lhs_rows.iter().map(|r| r.1).min().unwrap_or_else(MeasureValue::one);

    let core = k.range().to_vec();
    let measure_at = |a: &RandomVariable, depth: usize| -> Result<MeasureValue> {
        let env = Env::from([("x".to_string(), a.clone())]);
        Ok(k.truth_value(&chain[depth - 1], &env)?.measure())
    };
    let mut rhs_rows = Vec::with_capacity(core.len());
    for a in &core {
        rhs_rows.push((a.name().to_string(), measure_at(a, p.depth)?));
    }
    let (rhs_best, rhs_max) = rhs_rows
        .iter()
        .fold((String::new(), MeasureValue::zero()), |best, (n, m)| {
            if best.0.is_empty() || *m > best.1 {
                (n.clone(), *m)
            } else {
                best
            }
        });

    // Lengths that some core member takes on every sample.
    let mut covered: Option<BTreeSet<u64>> = None;
    for w in 0..space.len() {
        let here: BTreeSet<u64> = core.iter().map(|a| bit_length(&a.table()[w])).collect();
        covered = Some(match covered {
            None => here,
            Some(c) => c.intersection(&here).copied().collect(),
        });
    }
    let covered = covered.unwrap_or_default();

    let mut squeeze = Vec::with_capacity(top);
    for l in 1..=top {
        let e = p.root(l);
        let named = pow2(e - 1);
        let mut best = MeasureValue::zero();
        for a in &core {
            best = best.max(measure_at(a, l)?);
        }
        squeeze.push(SqueezeRow {
            level: l,
            root: e,
            budget_bits: (l <= p.levels).then(|| pow2(e)),
            named_len: e,
            named_in_core: core.iter().any(|a| a.is_constant() && a.table()[0] == named),
            feasible_values: pow2(e),
            blocked_values: covered
                .iter()
                .filter(|&&v| e >= 64 || v < (1u64 << e))
                .count(),
            best_core_measure: best,
        });
    }

    Ok(UniversalFailure {
        params: p,
        structure: k,
        type_spec,
        levels,
        lhs_rows,
        lhs,
        rhs_rows,
        rhs_max,
        rhs_best,
        squeeze,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_text() {
        assert_eq!(
            universal_formula_text(2),
            "(len(x)*len(x) <= nlen) & (forall y)(len(y) != x)"
        );
    }

    #[test]
    fn budgets_for_256() {
        let p = UniversalFailureParams::default();
        let roots: Vec<u64> = (1..=4).map(|l| p.root(l)).collect();
        assert_eq!(roots, vec![256, 16, 6, 4]);
        for l in 1..=4usize {
            let e = p.root(l);
            // len(2^(e-1)) = e and e^l <= n
            assert_eq!(bit_length(&pow2(e - 1)), e);
            assert!(e.pow(l as u32) <= 256);
        }
    }

    #[test]
    fn length_witness_values() {
        let s = SampleSpace::exhaustive(2).unwrap();
        let a = RandomVariable::from_u64s("a", &s, &[0, 1, 3, 5]).unwrap();
        let w = length_witness(&a).unwrap();
        let got: Vec<u64> = w.table().iter().map(|v| v.to_u64().unwrap()).collect();
        assert_eq!(got, vec![0, 1, 7, 31]);
    }

    #[test]
    fn parameter_bounds() {
        let bad = UniversalFailureParams {
            n: 8,
            ..Default::default()
        };
        assert!(build_universal_failure(bad).is_err());
        let bad = UniversalFailureParams {
            depth: 3,
            ..Default::default()
        };
        assert!(build_universal_failure(bad).is_err());
    }

    #[test]
    fn small_demo() {
        let p = UniversalFailureParams {
            n: 16,
            levels: 2,
            samples: 64,
            seed: 1,
            horizon: 1,
            depth: 2,
        };
        let r = build_universal_failure(p).unwrap();
        assert_eq!(r.lhs_rows.len(), 1);
        assert!(r.lhs >= r.rhs_max);
    }
}
