//! Witnesses for quantifiers: definition-by-cases folds for single
//! quantifiers, Skolem chains for alternating prefixes, and the pairing
//! tricks that fold several existential witnesses into one.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::eval::{Env, Structure};
use crate::family::{RandomVariable, Synthesis, SynthesisMethod};
use crate::logic::{cantor_pair, fresh_name, Formula, FormulaClass, Quantifier, Term};
use crate::space::{Event, MeasureValue};

/// Where witnesses may come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WitnessPolicy {
    /// Build witnesses by cases from the members; they may leave the family.
    #[default]
    Synthesize,
    /// Pick the best single member.
    FamilyOnly,
}

impl fmt::Display for WitnessPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WitnessPolicy::Synthesize => "synthesize",
            WitnessPolicy::FamilyOnly => "family-only",
        })
    }
}

impl FromStr for WitnessPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "synthesize" => Ok(WitnessPolicy::Synthesize),
            "family-only" => Ok(WitnessPolicy::FamilyOnly),
            other => Err(Error::InvalidArgument(format!(
                "unknown policy `{other}` (expected synthesize or family-only)"
            ))),
        }
    }
}

/// One step of a merge fold: where `condition` fails on the running
/// witness, take `member`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeStep {
    pub member: String,
    pub condition: String,
}

#[derive(Clone, Debug)]
pub struct WitnessResult {
    pub witness: RandomVariable,
    /// `[[A(witness)]]`.
    pub event: Event,
    /// `[[exists x A]]` or `[[forall y C]]`.
    pub target: Event,
    /// `mu(target Δ event)`.
    pub gap: MeasureValue,
    pub in_family: bool,
    /// Name of the range member with the witness's table, if any.
    pub member: Option<String>,
    pub method: Option<SynthesisMethod>,
    /// Fold order and conditions; empty for a plain member pick.
    pub trace: Vec<MergeStep>,
}

fn require_open(f: &Formula) -> Result<()> {
    if f.is_open() {
        Ok(())
    } else {
        Err(Error::NotOpen(f.to_string()))
    }
}

/// Folds `gamma := case(gamma | member; cond)` over the range, starting from
/// the first member. Afterwards `[[cond(gamma)]]` is the union of
/// `[[cond(member)]]`.
fn fold_by_cases(
    k: &Structure,
    cond: &Formula,
    var: &str,
    env: &Env,
    name: &str,
) -> Result<(RandomVariable, Vec<MergeStep>)> {
    let range = k.range();
    let first = range.first().ok_or(Error::EmptyFamily)?;
    let condition = cond.to_string();
    let mut gamma = first.clone();
    let mut trace = vec![MergeStep {
        member: first.name().to_string(),
        condition: condition.clone(),
    }];
    let mut sources = vec![first.name().to_string()];
    let mut env = env.clone();
    for member in &range[1..] {
        env.insert(var.to_string(), gamma.clone());
        let holds = k.truth_value(cond, &env)?;
        if holds.is_full() {
            break;
        }
        gamma = RandomVariable::select(
            name,
            &holds,
            &gamma,
            member,
            Synthesis {
                method: SynthesisMethod::CaseMerge,
                sources: Vec::new(),
                condition: None,
            },
        )?;
        sources.push(member.name().to_string());
        trace.push(MergeStep {
            member: member.name().to_string(),
            condition: condition.clone(),
        });
    }
    if gamma.is_synthesized() {
        gamma = RandomVariable::synthesized(
            name,
            k.space(),
            gamma.table().to_vec(),
            Synthesis {
                method: SynthesisMethod::CaseMerge,
                sources,
                condition: Some(condition),
            },
        )?;
    }
    Ok((gamma, trace))
}

fn finish(
    k: &Structure,
    witness: RandomVariable,
    event: Event,
    target: Event,
    method: Option<SynthesisMethod>,
    trace: Vec<MergeStep>,
) -> Result<WitnessResult> {
    let gap = event.distance(&target)?;
    let member = k.range_member(&witness).map(|m| m.name().to_string());
    Ok(WitnessResult {
        in_family: member.is_some(),
        member,
        witness,
        event,
        target,
        gap,
        method,
        trace,
    })
}

/// First index with the largest (`max`) or smallest measure.
fn best_index(events: &[Event], max: bool) -> usize {
    let mut best = 0;
    for (i, e) in events.iter().enumerate().skip(1) {
        let (m, b) = (e.measure(), events[best].measure());
        if (max && m > b) || (!max && m < b) {
            best = i;
        }
    }
    best
}

/// A witness `a` for `(exists var) A` with `[[A(a)]]` as large as the policy
/// allows. Under [`WitnessPolicy::Synthesize`] the gap is always zero.
pub fn witness_existential(
    k: &Structure,
    a: &Formula,
    var: &str,
    env: &Env,
    policy: WitnessPolicy,
) -> Result<WitnessResult> {
    require_open(a)?;
    let events = k.member_events(a, var, env)?;
    let target = join_all(k, &events);
    match policy {
        WitnessPolicy::Synthesize => {
            let (w, trace) = fold_by_cases(k, a, var, env, &format!("witness_{var}"))?;
            let mut env = env.clone();
            env.insert(var.to_string(), w.clone());
            let event = k.truth_value(a, &env)?;
            let method = w.is_synthesized().then_some(SynthesisMethod::CaseMerge);
            finish(k, w, event, target, method, trace)
        }
        WitnessPolicy::FamilyOnly => {
            let i = best_index(&events, true);
            let w = k.range()[i].clone();
            finish(k, w, events[i].clone(), target, None, Vec::new())
        }
    }
}

/// A counter-witness `b` for `(forall var) C` with `[[C(b)]]` as small as
/// the policy allows.
pub fn cowitness_universal(
    k: &Structure,
    c: &Formula,
    var: &str,
    env: &Env,
    policy: WitnessPolicy,
) -> Result<WitnessResult> {
    require_open(c)?;
    let events = k.member_events(c, var, env)?;
    let target = meet_all(k, &events);
    match policy {
        WitnessPolicy::Synthesize => {
            let neg = Formula::not(c.clone());
            let (w, trace) = fold_by_cases(k, &neg, var, env, &format!("cowitness_{var}"))?;
            let mut env = env.clone();
            env.insert(var.to_string(), w.clone());
            let event = k.truth_value(c, &env)?;
            let method = w.is_synthesized().then_some(SynthesisMethod::CaseMerge);
            finish(k, w, event, target, method, trace)
        }
        WitnessPolicy::FamilyOnly => {
            let i = best_index(&events, false);
            let w = k.range()[i].clone();
            finish(k, w, events[i].clone(), target, None, Vec::new())
        }
    }
}

fn join_all(k: &Structure, events: &[Event]) -> Event {
    let mut acc = k.space().empty();
    for e in events {
        acc.join_in_place(e);
    }
    acc
}

fn meet_all(k: &Structure, events: &[Event]) -> Event {
    let mut acc = k.space().full();
    for e in events {
        acc.meet_in_place(e);
    }
    acc
}

/// Per-sample merge: at each sample take the first member whose event
/// contains it (`inside`) or misses it (`!inside`); the first member where
/// none does.
fn table_merge(
    k: &Structure,
    events: &[Event],
    inside: bool,
    name: &str,
    condition: &Formula,
) -> Result<RandomVariable> {
    let range = k.range();
    let values = (0..k.space().len())
        .map(|w| {
            let i = events
                .iter()
                .position(|e| e.contains(w) == inside)
                .unwrap_or(0);
            range[i].table()[w].clone()
        })
        .collect();
    RandomVariable::synthesized(
        name,
        k.space(),
        values,
        Synthesis {
            method: SynthesisMethod::TableMerge,
            sources: range.iter().map(|m| m.name().to_string()).collect(),
            condition: Some(condition.to_string()),
        },
    )
}

#[derive(Clone, Debug)]
pub struct SkolemStage {
    pub quantifier: Quantifier,
    pub var: String,
    pub witness: RandomVariable,
    pub in_family: bool,
    pub method: Option<SynthesisMethod>,
    /// The formula left after this stage, with earlier witnesses as
    /// variables bound in the environment.
    pub remainder: Formula,
    /// `[[remainder]]` with this and all earlier witnesses plugged in.
    pub value: Event,
    /// `mu(value Δ [[A]])`.
    pub delta: MeasureValue,
    pub trace: Vec<MergeStep>,
}

#[derive(Clone, Debug)]
pub struct SkolemChain {
    pub formula: Formula,
    pub truth: Event,
    pub stages: Vec<SkolemStage>,
}

/// Picks witnesses for an `exists/forall` prefix left to right: existential
/// stages maximize, universal stages minimize the remaining formula.
pub fn skolem_chain(
    k: &Structure,
    a: &Formula,
    env: &Env,
    policy: WitnessPolicy,
) -> Result<SkolemChain> {
    match a.classify() {
        FormulaClass::Open | FormulaClass::Existential | FormulaClass::ExistsForallPrefix => {}
        _ => return Err(Error::WrongPrefix(a.to_string())),
    }
    let truth = k.truth_value(a, env)?;
    let (prefix, _) = a.prefix();
    let prefix: Vec<(Quantifier, String)> =
        prefix.into_iter().map(|(q, v)| (q, v.to_string())).collect();
    let mut env = env.clone();
    let mut current = a.clone();
    let mut stages = Vec::with_capacity(prefix.len());
    for (q, var) in prefix {
        let body = match &current {
            Formula::Exists(_, b) | Formula::Forall(_, b) => (**b).clone(),
            _ => unreachable!("prefix and formula disagree"),
        };
        let exists = q == Quantifier::Exists;
        let (witness, method, trace) = match policy {
            WitnessPolicy::Synthesize if body.is_open() => {
                let r = if exists {
                    witness_existential(k, &body, &var, &env, policy)?
                } else {
                    cowitness_universal(k, &body, &var, &env, policy)?
                };
                (r.witness, r.method, r.trace)
            }
            WitnessPolicy::Synthesize => {
                let events = k.member_events(&body, &var, &env)?;
                let w = table_merge(k, &events, exists, &format!("skolem_{var}"), &body)?;
                (w, Some(SynthesisMethod::TableMerge), Vec::new())
            }
            WitnessPolicy::FamilyOnly => {
                let events = k.member_events(&body, &var, &env)?;
                let i = best_index(&events, exists);
                (k.range()[i].clone(), None, Vec::new())
            }
        };
        env.insert(var.clone(), witness.clone());
        let value = k.truth_value(&body, &env)?;
        let delta = value.distance(&truth)?;
        stages.push(SkolemStage {
            quantifier: q,
            in_family: k.range_member(&witness).is_some(),
            var,
            witness,
            method,
            remainder: body.clone(),
            value,
            delta,
            trace,
        });
        current = body;
    }
    Ok(SkolemChain {
        formula: a.clone(),
        truth,
        stages,
    })
}

/// Result of [`pairing_reduce`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingReduction {
    /// The fresh variable the reduced formulas are open in.
    pub var: String,
    pub formulas: Vec<Formula>,
    /// Size of the existential block removed from each input formula.
    pub block_sizes: Vec<usize>,
}

/// Turns `A_k(x) = (exists y) B_k(x, y)`, k = 1, 2, ..., into open
/// `C_k(z) = B_k(p1(z), p1(p2^k(z)))`. A block of several existentials is
/// first packed into one value `w` with `y_j = p1(p2^(j-1)(w))`; an open
/// `A_k` becomes `A_k(p1(z))`.
pub fn pairing_reduce(p: &[Formula], x: &str) -> Result<PairingReduction> {
    let mut avoid: BTreeSet<String> = BTreeSet::new();
    for f in p {
        avoid.extend(f.all_variables());
        avoid.extend(f.constants());
    }
    avoid.insert(x.to_string());
    let z = fresh_name("z", &avoid);
    let zt = Term::var(&z);
    let mut formulas = Vec::with_capacity(p.len());
    let mut block_sizes = Vec::with_capacity(p.len());
    for (idx, f) in p.iter().enumerate() {
        let k = idx + 1;
        let (prefix, matrix) = f.prefix();
        if !matrix.is_open() || prefix.iter().any(|(q, _)| *q != Quantifier::Exists) {
            return Err(Error::NotExistential(f.to_string()));
        }
        let mut c = matrix.substitute(x, &Term::p1(zt.clone()));
        let packed = Term::p1(Term::p2_iter(zt.clone(), k));
        match prefix.len() {
            0 => {}
            1 => c = c.substitute(prefix[0].1, &packed),
            _ => {
                for (j, (_, y)) in prefix.iter().enumerate() {
                    c = c.substitute(y, &Term::p1(Term::p2_iter(packed.clone(), j)));
                }
            }
        }
        block_sizes.push(prefix.len());
        formulas.push(c);
    }
    Ok(PairingReduction {
        var: z,
        formulas,
        block_sizes,
    })
}

/// Pointwise `<gamma, <beta_1, <..., <beta_k, gamma>...>>>`; with no betas,
/// `<gamma, gamma>`.
pub fn pack_tuple_witness(gamma: &RandomVariable, betas: &[RandomVariable]) -> Result<RandomVariable> {
    let space = gamma.space();
    if betas.iter().any(|b| b.space().id() != space.id()) {
        return Err(Error::SpaceMismatch);
    }
    let g = gamma.table();
    let values = (0..space.len())
        .map(|w| {
            let tail = betas
                .iter()
                .rev()
                .fold(g[w].clone(), |acc, b| cantor_pair(&b.table()[w], &acc));
            cantor_pair(&g[w], &tail)
        })
        .collect();
    let mut sources = vec![gamma.name().to_string()];
    sources.extend(betas.iter().map(|b| b.name().to_string()));
    let name = format!("pack({})", sources.join(", "));
    RandomVariable::synthesized(
        &name,
        space,
        values,
        Synthesis {
            method: SynthesisMethod::Pack,
            sources,
            condition: None,
        },
    )
}
