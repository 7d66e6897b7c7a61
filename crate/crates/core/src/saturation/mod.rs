//! Types (finite sequences of formulas in one variable), the saturation
//! inequality check, and the realization procedures for open and
//! existential types.

mod universal;

use std::fmt;

pub use universal::{
    build_universal_failure, length_witness, UniversalFailure, UniversalFailureParams,
    SqueezeRow,
};

use crate::error::{Error, ParseError, Result};
use crate::eval::{Env, Structure};
use crate::family::{Family, RandomVariable, SynthesisMethod};
use crate::logic::{parse_formula_with, Formula, FormulaClass, Func, Term};
use crate::space::{check_eps, Event, MeasureValue, Rational};
use crate::witnessing::{
    pack_tuple_witness, pairing_reduce, witness_existential, PairingReduction, WitnessPolicy,
};

/// Default cap on the number of members of a pack-extended family.
pub const DEFAULT_CLOSURE_CAP: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TypeClass {
    Open,
    Existential,
    Universal,
    Mixed,
}

impl fmt::Display for TypeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TypeClass::Open => "open",
            TypeClass::Existential => "existential",
            TypeClass::Universal => "universal",
            TypeClass::Mixed => "mixed",
        })
    }
}

/// A nonempty sequence of formulas, each with exactly one free variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeSpec {
    formulas: Vec<Formula>,
    var: String,
}

impl TypeSpec {
    pub fn new(formulas: Vec<Formula>, var: &str) -> Result<TypeSpec> {
        if formulas.is_empty() {
            return Err(Error::EmptyType);
        }
        for f in &formulas {
            let free = f.free_variables();
            if free.len() != 1 || !free.contains(var) {
                return Err(Error::FreeVariables {
                    formula: f.to_string(),
                    expected: vec![var.to_string()],
                    found: free.into_iter().collect(),
                });
            }
        }
        Ok(TypeSpec {
            formulas,
            var: var.to_string(),
        })
    }

    /// One formula per line; blank lines and `#` comments are skipped. Parse
    /// errors carry the line number within `text`.
    pub fn parse(text: &str, var: &str, declared: impl Fn(&str) -> bool) -> Result<TypeSpec> {
        let mut formulas = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let f = parse_formula_with(line, &declared).map_err(|e| ParseError {
                line: i + 1,
                column: e.column,
                kind: e.kind,
            })?;
            formulas.push(f);
        }
        TypeSpec::new(formulas, var)
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn class(&self) -> TypeClass {
        let classes: Vec<FormulaClass> = self.formulas.iter().map(|f| f.classify()).collect();
        let all = |ok: &[FormulaClass]| classes.iter().all(|c| ok.contains(c));
        if all(&[FormulaClass::Open]) {
            TypeClass::Open
        } else if all(&[FormulaClass::Open, FormulaClass::Existential]) {
            TypeClass::Existential
        } else if all(&[FormulaClass::Open, FormulaClass::Universal]) {
            TypeClass::Universal
        } else {
            TypeClass::Mixed
        }
    }

    /// The type text, one formula per line.
    pub fn to_text(&self) -> String {
        self.formulas.iter().map(|f| format!("{f}\n")).collect()
    }
}

/// `A_k = A'_1 & ... & A'_k` for k = 1..|p|.
pub fn conjunction_chain(p: &[Formula]) -> Result<Vec<Formula>> {
    let mut out: Vec<Formula> = Vec::with_capacity(p.len());
    for f in p {
        let next = match out.last() {
            None => f.clone(),
            Some(prev) => Formula::and(prev.clone(), f.clone()),
        };
        out.push(next);
    }
    if out.is_empty() {
        return Err(Error::EmptyType);
    }
    Ok(out)
}

/// One row of a profile: `k`, `mu([[exists x A_k]])`, `mu([[A_k(witness)]])`,
/// their difference and any flags (empty means `ok`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProfileRow {
    pub k: usize,
    pub lhs: MeasureValue,
    pub rhs: MeasureValue,
    pub gap: MeasureValue,
    pub flags: Vec<String>,
}

impl ProfileRow {
    pub fn flags_text(&self) -> String {
        if self.flags.is_empty() {
            "ok".to_string()
        } else {
            self.flags.join(";")
        }
    }
}

/// Both sides of the saturation inequality for a chain prefix and a
/// candidate witness.
#[derive(Clone, Debug)]
pub struct SaturCheck {
    pub witness: String,
    pub prefix_len: usize,
    /// Meet of `[[exists x A_k]]`.
    pub lhs: Event,
    /// Meet of `[[A_k(u)]]`.
    pub rhs: Event,
    /// `mu(lhs \ rhs)`; equals `mu(lhs) - mu(rhs)` when majorized.
    pub defect: MeasureValue,
    /// `rhs ⊆ lhs`.
    pub majorized: bool,
    pub realized_mod_eps: bool,
    pub profile: Vec<ProfileRow>,
}

fn check_chain(
    k: &Structure,
    chain: &[Formula],
    var: &str,
    u: &RandomVariable,
    eps: Rational,
) -> Result<SaturCheck> {
    if u.space().id() != k.space().id() {
        return Err(Error::SpaceMismatch);
    }
    let env = Env::from([(var.to_string(), u.clone())]);
    let mut lhs = k.space().full();
    let mut rhs = k.space().full();
    let mut profile = Vec::with_capacity(chain.len());
    for (i, a) in chain.iter().enumerate() {
        let ex = k.truth_value(&Formula::exists(var, a.clone()), &Env::new())?;
        let at = k.truth_value(a, &env)?;
        let mut flags = Vec::new();
        if !at.is_subset(&ex)? {
            flags.push("not-majorized".to_string());
        }
        profile.push(ProfileRow {
            k: i + 1,
            lhs: ex.measure(),
            rhs: at.measure(),
            gap: ex.measure().saturating_sub(at.measure()),
            flags,
        });
        lhs.meet_in_place(&ex);
        rhs.meet_in_place(&at);
    }
    let defect = lhs.difference(&rhs)?.measure();
    Ok(SaturCheck {
        witness: u.name().to_string(),
        prefix_len: chain.len(),
        majorized: rhs.is_subset(&lhs)?,
        realized_mod_eps: defect.value() <= eps,
        lhs,
        rhs,
        defect,
        profile,
    })
}

/// Compares `meet_k [[exists x A_k]]` with `meet_k [[A_k(u)]]` over the
/// whole type.
pub fn check_satur(
    k: &Structure,
    p: &TypeSpec,
    u: &RandomVariable,
    eps: Rational,
) -> Result<SaturCheck> {
    let eps = check_eps(eps)?;
    let chain = conjunction_chain(p.formulas())?;
    check_chain(k, &chain, p.var(), u, eps)
}

/// Per-stage checks of the realization procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// `U_k` is inside the running intersection of earlier `U`s, up to eps.
    Nesting,
    /// `mu(U_j) - mu(U_i) < 1/j + eps` for earlier positions `j`.
    Drop,
    /// Every witness so far lies in filtration level `i`.
    Membership,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Nesting => "nesting",
            Condition::Drop => "drop",
            Condition::Membership => "level",
        })
    }
}

#[derive(Clone, Debug)]
pub struct StageRecord {
    pub k: usize,
    pub witness: RandomVariable,
    pub witness_in_family: bool,
    pub witness_gap: MeasureValue,
    /// `[[exists x A_k]]`.
    pub exists: Event,
    /// `U_k = [[A_k(alpha_k)]]`.
    pub u: Event,
    /// Running intersection of the kept `U`s up to this one.
    pub u_hat: Event,
    /// `mu(U_k \ previous u_hat)`.
    pub nesting_violation: MeasureValue,
    /// `mu(U_k) - mu(u_hat)`.
    pub loss: MeasureValue,
    /// Deepest filtration level of the witness, when a filtration exists.
    pub level: Option<usize>,
    pub failures: Vec<Condition>,
    /// False when the thinning pass dropped this index.
    pub kept: bool,
}

#[derive(Clone, Debug)]
pub struct ExistentialLift {
    pub reduction: PairingReduction,
    pub closure_depth: usize,
    pub z_range_size: usize,
    pub z_report: Box<SaturationReport>,
}

#[derive(Clone, Debug)]
pub struct SaturationReport {
    pub var: String,
    pub policy: WitnessPolicy,
    pub eps: Rational,
    pub chain: Vec<Formula>,
    pub stages: Vec<StageRecord>,
    /// Selected stage `s` (1-based).
    pub stage: usize,
    pub witness: RandomVariable,
    /// Saturation check over the first `s` formulas.
    pub check: SaturCheck,
    /// The same witness checked against the whole type.
    pub full: SaturCheck,
    pub profile: Vec<ProfileRow>,
    pub lift: Option<ExistentialLift>,
}

impl SaturationReport {
    pub fn defect(&self) -> MeasureValue {
        self.check.defect
    }
}

/// Filtration level of a witness: its own level when it is a member,
/// otherwise the shallowest level among the members it was built from.
fn witness_level(fam: &Family, w: &RandomVariable) -> Result<Option<usize>> {
    if let Some(l) = fam.filtration_level(w)? {
        return Ok(Some(l));
    }
    let crate::family::Provenance::Synthesized(syn) = w.provenance() else {
        return Ok(None);
    };
    let mut level: Option<usize> = None;
    for name in &syn.sources {
        let Some(src) = fam.get(name) else {
            return Ok(None);
        };
        let Some(l) = fam.filtration_level(src)? else {
            return Ok(None);
        };
        level = Some(level.map_or(l, |cur| cur.min(l)));
    }
    Ok(level)
}

/// Realizes an open type: a witness per chain formula, the sets `U_k`,
/// the per-stage checks and the selected stage. With
/// [`WitnessPolicy::Synthesize`] the defect on the selected prefix is zero.
pub fn realize_open_type(
    k: &Structure,
    p: &TypeSpec,
    eps: Rational,
    policy: WitnessPolicy,
    thin: bool,
) -> Result<SaturationReport> {
    let eps = check_eps(eps)?;
    if let Some(f) = p.formulas().iter().find(|f| !f.is_open()) {
        return Err(Error::NotOpen(f.to_string()));
    }
    if k.range().is_empty() {
        return Err(Error::EmptyFamily);
    }
    let var = p.var();
    let chain = conjunction_chain(p.formulas())?;
    let filtration = k.family().filtration().map(|f| f.depth());

    let mut stages: Vec<StageRecord> = Vec::with_capacity(chain.len());
    for (i, a) in chain.iter().enumerate() {
        let r = witness_existential(k, a, var, &Env::new(), policy)?;
        let level = match filtration {
            Some(_) => witness_level(k.family(), &r.witness)?,
            None => None,
        };
        stages.push(StageRecord {
            k: i + 1,
            witness_in_family: r.in_family,
            witness: r.witness,
            witness_gap: r.gap,
            exists: r.target,
            u_hat: r.event.clone(),
            u: r.event,
            nesting_violation: MeasureValue::zero(),
            loss: MeasureValue::zero(),
            level,
            failures: Vec::new(),
            kept: true,
        });
    }

    // Stage checks over the kept subsequence. Positions are 1-based within it.
    let one = Rational::from_integer(1);
    let mut kept: Vec<usize> = Vec::new();
    let mut prev_hat = k.space().full();
    for idx in 0..stages.len() {
        let u = stages[idx].u.clone();
        let hat = prev_hat.meet(&u)?;
        let violation = u.difference(&prev_hat)?.measure();
        let pos = kept.len() + 1;
        let mut failures = Vec::new();
        if violation.value() > eps {
            failures.push(Condition::Nesting);
        }
        let hat_mu = hat.measure().value();
        let drop_ok = kept.iter().enumerate().all(|(j, &ki)| {
            let earlier = stages[ki].u_hat.measure().value();
            earlier < hat_mu + one / Rational::from_integer(j as u64 + 1) + eps
        });
        if !drop_ok {
            failures.push(Condition::Drop);
        }
        if let Some(depth) = filtration {
            let need = pos.min(depth);
            let ok = kept
                .iter()
                .map(|&ki| stages[ki].level)
                .chain(std::iter::once(stages[idx].level))
                .all(|l| l.is_some_and(|l| l >= need));
            if !ok {
                failures.push(Condition::Membership);
            }
        }
        let st = &mut stages[idx];
        st.nesting_violation = violation;
        st.failures = failures;
        if thin && !drop_ok {
            st.kept = false;
            st.u_hat = prev_hat.clone();
            st.loss = st.u.measure().saturating_sub(prev_hat.measure());
            continue;
        }
        st.loss = u.measure().saturating_sub(hat.measure());
        st.u_hat = hat.clone();
        kept.push(idx);
        prev_hat = hat;
    }

    let mut stage_idx = kept[0];
    for &ki in &kept {
        if !stages[ki].failures.is_empty() {
            break;
        }
        stage_idx = ki;
    }
    let stage = stage_idx + 1;
    let witness = stages[stage_idx].witness.clone();
    let check = check_chain(k, &chain[..stage], var, &witness, eps)?;
    let mut full = check_chain(k, &chain, var, &witness, eps)?;
    for (row, st) in full.profile.iter_mut().zip(&stages) {
        row.flags.extend(st.failures.iter().map(|c| c.to_string()));
        if !st.kept {
            row.flags.push("dropped".to_string());
        }
    }
    Ok(SaturationReport {
        var: var.to_string(),
        policy,
        eps,
        chain,
        stages,
        stage,
        witness,
        profile: full.profile.clone(),
        check,
        full,
        lift: None,
    })
}

/// The range extended by every `pack(g, b_1, ..., b_j)` with `1 <= j <= depth`
/// over range members.
pub fn pack_extension(k: &Structure, depth: usize, cap: usize) -> Result<Family> {
    let range = k.range().to_vec();
    let m = range.len();
    let mut total = m;
    let mut width = m;
    for _ in 0..depth {
        width = width.saturating_mul(m);
        total = total.saturating_add(width);
    }
    if total > cap {
        let partial = range
            .iter()
            .take(10)
            .map(|r| r.name().to_string())
            .chain(std::iter::once(format!("... ({total} needed)")))
            .collect();
        return Err(Error::ResourceLimit { cap, partial });
    }
    let mut members = range.clone();
    for j in 1..=depth {
        // Every (j+1)-tuple over the range, in lexicographic order.
        let mut idx = vec![0usize; j + 1];
        loop {
            let betas: Vec<RandomVariable> = idx[1..].iter().map(|&i| range[i].clone()).collect();
            members.push(pack_tuple_witness(&range[idx[0]], &betas)?);
            let mut pos = j + 1;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < m {
                    break;
                }
                idx[pos] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    Family::new(k.space(), members)
}

/// Realizes an existential type by reducing it to an open type in a fresh
/// variable `z` over the range extended by packed witness tuples, then
/// projecting the `z` witness with `p1`.
pub fn realize_existential_type(
    k: &Structure,
    p: &TypeSpec,
    eps: Rational,
    policy: WitnessPolicy,
    closure_depth: usize,
    cap: usize,
    thin: bool,
) -> Result<SaturationReport> {
    let eps = check_eps(eps)?;
    match p.class() {
        TypeClass::Open => return realize_open_type(k, p, eps, policy, thin),
        TypeClass::Existential => {}
        _ => {
            let bad = p
                .formulas()
                .iter()
                .find(|f| !matches!(f.classify(), FormulaClass::Open | FormulaClass::Existential))
                .expect("a non-existential member exists");
            return Err(Error::NotExistential(bad.to_string()));
        }
    }
    if k.range().is_empty() {
        return Err(Error::EmptyFamily);
    }
    let var = p.var();
    let reduction = pairing_reduce(p.formulas(), var)?;
    let zfam = pack_extension(k, closure_depth, cap)?;
    let z_range_size = zfam.len();
    let zk = k.over_family(zfam)?;
    let z_type = TypeSpec::new(reduction.formulas.clone(), &reduction.var)?;
    let z_report = realize_open_type(&zk, &z_type, eps, policy, thin)?;

    let env = Env::from([(reduction.var.clone(), z_report.witness.clone())]);
    let projected = k.apply_term(&Term::p1(Term::var(&reduction.var)), &env)?;
    let witness = RandomVariable::synthesized(
        &format!("p1({})", z_report.witness.name()),
        k.space(),
        projected.table().to_vec(),
        crate::family::Synthesis {
            method: SynthesisMethod::Term,
            sources: vec![z_report.witness.name().to_string()],
            condition: None,
        },
    )?;
    let chain = conjunction_chain(p.formulas())?;
    let stage = z_report.stage;
    let check = check_chain(k, &chain[..stage], var, &witness, eps)?;
    let mut full = check_chain(k, &chain, var, &witness, eps)?;
    for (row, zrow) in full.profile.iter_mut().zip(&z_report.profile) {
        for f in &zrow.flags {
            if f != "not-majorized" && !row.flags.contains(f) {
                row.flags.push(f.clone());
            }
        }
    }
    Ok(SaturationReport {
        var: var.to_string(),
        policy,
        eps,
        chain,
        stages: Vec::new(),
        stage,
        witness,
        profile: full.profile.clone(),
        check,
        full,
        lift: Some(ExistentialLift {
            reduction,
            closure_depth,
            z_range_size,
            z_report: Box::new(z_report),
        }),
    })
}

/// Terms in `x` of nesting depth at most `depth`, without structural
/// duplicates, shallowest first.
pub fn terms_in(x: &str, depth: usize) -> Vec<Term> {
    let mut all = vec![Term::var(x)];
    let mut frontier_start = 0;
    for _ in 0..depth {
        let prev = all.clone();
        let mut fresh = Vec::new();
        for f in Func::ALL {
            if f.arity() == 1 {
                for t in &prev[frontier_start..] {
                    fresh.push(Term::unary(f, t.clone()));
                }
            } else {
                for (i, s) in prev.iter().enumerate() {
                    for (j, t) in prev.iter().enumerate() {
                        if i >= frontier_start || j >= frontier_start {
                            fresh.push(Term::binary(f, s.clone(), t.clone()));
                        }
                    }
                }
            }
        }
        frontier_start = all.len();
        for t in fresh {
            if !all.contains(&t) {
                all.push(t);
            }
        }
    }
    all
}

/// The open type `{ A(x, t(x)) : t a term in x of depth <= depth }`.
pub fn term_type(a: &Formula, x: &str, y: &str, depth: usize) -> Result<TypeSpec> {
    let free = a.free_variables();
    let expected = [x.to_string(), y.to_string()];
    if free.len() != 2 || !expected.iter().all(|v| free.contains(v)) || !a.is_open() {
        return Err(Error::FreeVariables {
            formula: a.to_string(),
            expected: expected.to_vec(),
            found: free.into_iter().collect(),
        });
    }
    let mut out: Vec<Formula> = Vec::new();
    for t in terms_in(x, depth) {
        let f = a.substitute(y, &t);
        if !out.contains(&f) {
            out.push(f);
        }
    }
    TypeSpec::new(out, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::QuantifierRange;
    use crate::logic::{parse_formula, Natural};
    use crate::space::SampleSpace;
    use std::sync::Arc;

    fn f(text: &str) -> Formula {
        parse_formula(text).unwrap()
    }

    fn two_members() -> (Arc<SampleSpace>, Structure) {
        let s = SampleSpace::exhaustive(2).unwrap();
        let a = RandomVariable::from_u64s("a", &s, &[0, 1, 0, 1]).unwrap();
        let b = RandomVariable::from_u64s("b", &s, &[1, 0, 1, 0]).unwrap();
        let k = Structure::new(Family::new(&s, vec![a, b]).unwrap());
        (s, k)
    }

    #[test]
    fn chain_shapes() {
        let c = conjunction_chain(&[f("x = 0"), f("x <= 1")]).unwrap();
        assert_eq!(c[1].to_string(), "(x = 0) & (x <= 1)");
        assert_eq!(conjunction_chain(&[f("x = 0")]).unwrap().len(), 1);
        assert!(matches!(conjunction_chain(&[]), Err(Error::EmptyType)));
    }

    #[test]
    fn minimal_universal_failure() {
        let (_, k) = two_members();
        let p = TypeSpec::new(vec![f("(forall y)(x <= y)")], "x").unwrap();
        for u in k.range().to_vec() {
            let r = check_satur(&k, &p, &u, Rational::from_integer(0)).unwrap();
            assert_eq!(r.lhs.measure(), MeasureValue::one());
            assert_eq!(r.rhs.measure().to_string(), "1/2");
            assert_eq!(r.defect.to_string(), "1/2");
            assert!(r.majorized);
        }
    }

    #[test]
    fn unsatisfiable_type() {
        let (_, k) = two_members();
        let p = TypeSpec::new(vec![f("x != x"), f("x = 0")], "x").unwrap();
        let r = realize_open_type(&k, &p, 0.into(), WitnessPolicy::Synthesize, false).unwrap();
        assert_eq!(r.stage, 2);
        assert_eq!(r.defect(), MeasureValue::zero());
        assert!(r.check.lhs.is_empty());
    }

    #[test]
    fn open_type_with_identity() {
        let s = SampleSpace::exhaustive(2).unwrap();
        let id = RandomVariable::identity("id", &s);
        let c0 = RandomVariable::constant("c0", &s, Natural::from(0u32));
        let k = Structure::new(Family::new(&s, vec![id, c0]).unwrap());
        let p = TypeSpec::new(vec![f("x <= 2"), f("x = 0")], "x").unwrap();
        let r = realize_open_type(&k, &p, 0.into(), WitnessPolicy::Synthesize, false).unwrap();
        assert_eq!(r.stage, 2);
        assert!(r.stages[1].u.is_full());
        assert_eq!(r.defect(), MeasureValue::zero());
    }

    #[test]
    fn membership_failure_selects_earlier_stage() {
        let s = SampleSpace::exhaustive(2).unwrap();
        let c0 = RandomVariable::constant("c0", &s, Natural::from(0u32));
        let c5 = RandomVariable::constant("c5", &s, Natural::from(5u32));
        let fam = Family::filtered(&s, vec![vec![c0.clone(), c5], vec![c0]]).unwrap();
        let k = Structure::new(fam).with_range(QuantifierRange::Level(1)).unwrap();
        let p = TypeSpec::new(vec![f("x <= 9"), f("x = 5")], "x").unwrap();
        let r = realize_open_type(&k, &p, 0.into(), WitnessPolicy::Synthesize, false).unwrap();
        assert_eq!(r.stages[1].failures, vec![Condition::Membership]);
        assert!(r.stages[0].failures.is_empty());
        assert_eq!(r.stage, 1);
        assert_eq!(r.profile[1].flags_text(), "level");
    }

    #[test]
    fn existential_type_lift() {
        let s = SampleSpace::exhaustive(2).unwrap();
        let members = (0..3u32)
            .map(|v| RandomVariable::constant(&format!("c{v}"), &s, Natural::from(v)))
            .collect();
        let k = Structure::new(Family::new(&s, members).unwrap());
        let p = TypeSpec::new(vec![f("(exists y)(y = x)")], "x").unwrap();
        let r = realize_existential_type(&k, &p, 0.into(), WitnessPolicy::Synthesize, 1, 1000, false)
            .unwrap();
        let lift = r.lift.as_ref().unwrap();
        assert_eq!(lift.reduction.formulas[0].to_string(), "p1(p2(z)) = p1(z)");
        assert_eq!(r.defect(), MeasureValue::zero());
        assert_eq!(lift.z_report.defect(), MeasureValue::zero());

        let open = TypeSpec::new(vec![f("x <= 1")], "x").unwrap();
        let a = realize_existential_type(&k, &open, 0.into(), WitnessPolicy::Synthesize, 1, 1000, false)
            .unwrap();
        let b = realize_open_type(&k, &open, 0.into(), WitnessPolicy::Synthesize, false).unwrap();
        assert!(a.lift.is_none());
        assert!(a.witness.same_values(&b.witness));
    }

    #[test]
    fn closure_depth_matters() {
        let s = SampleSpace::exhaustive(2).unwrap();
        let c1 = RandomVariable::constant("c1", &s, Natural::from(1u32));
        let c3 = RandomVariable::constant("c3", &s, Natural::from(3u32));
        let k = Structure::new(Family::new(&s, vec![c1, c3]).unwrap());
        let p = TypeSpec::new(vec![f("(exists y)(y = x + 2)")], "x").unwrap();
        let shallow =
            realize_existential_type(&k, &p, 0.into(), WitnessPolicy::Synthesize, 0, 1000, false)
                .unwrap();
        assert_eq!(shallow.defect(), MeasureValue::one());
        let deep =
            realize_existential_type(&k, &p, 0.into(), WitnessPolicy::Synthesize, 1, 1000, false)
                .unwrap();
        assert_eq!(deep.defect(), MeasureValue::zero());
        assert!(matches!(
            realize_existential_type(&k, &p, 0.into(), WitnessPolicy::Synthesize, 3, 5, false),
            Err(Error::ResourceLimit { cap: 5, .. })
        ));
    }

    #[test]
    fn term_type_sizes() {
        let a = f("x <= y");
        assert_eq!(term_type(&a, "x", "y", 0).unwrap().formulas(), &[f("x <= x")]);
        let t1 = term_type(&a, "x", "y", 1).unwrap();
        assert_eq!(t1.len(), 7);
        let t2 = term_type(&a, "x", "y", 2).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        assert!(t2.formulas().iter().all(|g| seen.insert(g.clone())));
        assert!(term_type(&f("x <= 1"), "x", "y", 1).is_err());
    }

    #[test]
    fn type_file_parsing() {
        let text = "# comment\nx <= 2\n\nx = 0 # trailing\n";
        let p = TypeSpec::parse(text, "x", |_| false).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.class(), TypeClass::Open);
        let err = TypeSpec::parse("x = 0\nx = \n", "x", |_| false).unwrap_err();
        match err {
            Error::Parse(pe) => assert_eq!(pe.line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            TypeSpec::new(vec![f("y = 0")], "x"),
            Err(Error::FreeVariables { .. })
        ));
    }
}
