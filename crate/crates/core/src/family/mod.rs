//! Random variables, families with optional filtrations, pointwise
//! application of terms, and definition by cases.

mod circuit;
mod rv;

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

pub use circuit::{Circuit, Gate, GateOp, Wire};
pub use rv::{
    Backing, Provenance, RandomVariable, Synthesis, SynthesisMethod, TableKey, ValueTable,
};

use crate::error::{Error, Result};
use crate::eval::{Env, Structure};
use crate::logic::{Formula, Func, Natural, Term};
use crate::space::SampleSpace;

/// Nested member subsets `level 1 ⊇ level 2 ⊇ ... ⊇ level L`; the last level
/// is the core.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Filtration {
    /// Member indices per level, level 1 first.
    levels: Vec<Vec<usize>>,
}

impl Filtration {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Member indices of `level` (1-based). Levels past the last one repeat
    /// the core.
    pub fn level(&self, level: usize) -> &[usize] {
        let k = level.clamp(1, self.levels.len());
        &self.levels[k - 1]
    }

    pub fn contains(&self, level: usize, member: usize) -> bool {
        self.level(level).contains(&member)
    }

    /// Deepest level containing `member`.
    pub fn deepest_level_of(&self, member: usize) -> Option<usize> {
        self.levels
            .iter()
            .rposition(|lvl| lvl.contains(&member))
            .map(|i| i + 1)
    }
}

/// Which members quantifiers range over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QuantifierRange {
    /// The core level when a filtration is present, otherwise every member.
    #[default]
    Core,
    /// A given filtration level (1-based).
    Level(usize),
    /// Every member.
    All,
}

/// An ordered set of random variables on one space, deduplicated by value
/// table.
#[derive(Clone, Debug)]
pub struct Family {
    space: Arc<SampleSpace>,
    members: Vec<RandomVariable>,
    by_table: HashMap<TableKey, usize>,
    /// Every name that was offered, including dropped duplicates.
    by_name: BTreeMap<String, usize>,
    filtration: Option<Filtration>,
}

impl Family {
    /// Builds a family; a member whose table repeats an earlier one is
    /// dropped and its name becomes an alias of the earlier member.
    pub fn new(space: &Arc<SampleSpace>, members: Vec<RandomVariable>) -> Result<Family> {
        let mut fam = Family {
            space: Arc::clone(space),
            members: Vec::new(),
            by_table: HashMap::new(),
            by_name: BTreeMap::new(),
            filtration: None,
        };
        for rv in members {
            fam.insert(rv)?;
        }
        Ok(fam)
    }

    /// Builds a filtered family from level lists, level 1 first. Level 1 lists
    /// the members; each later level must be a subset of the one before.
    pub fn filtered(space: &Arc<SampleSpace>, levels: Vec<Vec<RandomVariable>>) -> Result<Family> {
        let Some(first) = levels.first() else {
            return Err(Error::InvalidArgument("a filtration needs at least one level".into()));
        };
        let mut fam = Family::new(space, first.clone())?;
        let mut idx_levels: Vec<Vec<usize>> = Vec::with_capacity(levels.len());
        for (k, lvl) in levels.iter().enumerate() {
            let mut idx = Vec::new();
            for rv in lvl {
                let i = match fam.index_of(rv) {
                    Some(i) => i,
                    None => {
                        return Err(Error::NestingViolation {
                            level: k + 1,
                            parent: k.max(1),
                            member: rv.name().to_string(),
                        })
                    }
                };
                if let Some(prev) = idx_levels.last() {
                    if !prev.contains(&i) {
                        return Err(Error::NestingViolation {
                            level: k + 1,
                            parent: k,
                            member: rv.name().to_string(),
                        });
                    }
                }
                if !idx.contains(&i) {
                    idx.push(i);
                }
                fam.by_name.entry(rv.name().to_string()).or_insert(i);
            }
            idx.sort_unstable();
            idx_levels.push(idx);
        }
        fam.filtration = Some(Filtration { levels: idx_levels });
        Ok(fam)
    }

    fn insert(&mut self, rv: RandomVariable) -> Result<usize> {
        if rv.space().id() != self.space.id() {
            return Err(Error::SpaceMismatch);
        }
        let key = rv.key();
        let idx = match self.by_table.get(&key) {
            Some(&i) => i,
            None => {
                self.members.push(rv.clone());
                self.by_table.insert(key, self.members.len() - 1);
                self.members.len() - 1
            }
        };
        match self.by_name.get(rv.name()) {
            Some(&j) if j != idx => return Err(Error::DuplicateName(rv.name().to_string())),
            _ => {
                self.by_name.insert(rv.name().to_string(), idx);
            }
        }
        Ok(idx)
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn members(&self) -> &[RandomVariable] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&RandomVariable> {
        self.by_name.get(name).map(|&i| &self.members[i])
    }

    /// All names that resolve to members, with their member index.
    pub fn names(&self) -> impl Iterator<Item = (&str, usize)> {
        self.by_name.iter().map(|(n, &i)| (n.as_str(), i))
    }

    /// Index of the member with the same value table.
    pub fn index_of(&self, rv: &RandomVariable) -> Option<usize> {
        if rv.space().id() != self.space.id() {
            return None;
        }
        self.by_table.get(&rv.key()).copied()
    }

    pub fn contains(&self, rv: &RandomVariable) -> bool {
        self.index_of(rv).is_some()
    }

    pub fn filtration(&self) -> Option<&Filtration> {
        self.filtration.as_ref()
    }

    /// Members of `level` (1-based).
    pub fn level_members(&self, level: usize) -> Result<Vec<RandomVariable>> {
        let f = self.filtration.as_ref().ok_or(Error::NoFiltration)?;
        Ok(f.level(level).iter().map(|&i| self.members[i].clone()).collect())
    }

    /// Deepest filtration level whose subset contains `rv` (by table), or
    /// `None` when `rv` is not a member at all.
    pub fn filtration_level(&self, rv: &RandomVariable) -> Result<Option<usize>> {
        let f = self.filtration.as_ref().ok_or(Error::NoFiltration)?;
        Ok(self.index_of(rv).and_then(|i| f.deepest_level_of(i)))
    }

    pub fn range(&self, range: QuantifierRange) -> Result<Vec<RandomVariable>> {
        match (range, &self.filtration) {
            (QuantifierRange::All, _) | (QuantifierRange::Core, None) => Ok(self.members.clone()),
            (QuantifierRange::Core, Some(f)) => self.level_members(f.depth()),
            (QuantifierRange::Level(k), Some(f)) if k >= 1 && k <= f.depth() => {
                self.level_members(k)
            }
            (QuantifierRange::Level(k), Some(_)) => Err(Error::InvalidArgument(format!(
                "no filtration level {k}"
            ))),
            (QuantifierRange::Level(_), None) => Err(Error::NoFiltration),
        }
    }

    /// This family plus `extra` members (deduplicated), without filtration.
    pub fn extended(&self, extra: Vec<RandomVariable>) -> Result<Family> {
        let mut fam = Family::new(&self.space, self.members.clone())?;
        for rv in extra {
            fam.insert(rv)?;
        }
        Ok(fam)
    }
}

/// A term with its leaves resolved to value tables.
pub(crate) enum Compiled<'a> {
    Table(&'a [Natural]),
    Lit(&'a Natural),
    App(Func, Vec<Compiled<'a>>),
}

impl<'a> Compiled<'a> {
    pub(crate) fn compile(
        term: &'a Term,
        env: &'a Env,
        constants: &'a BTreeMap<String, RandomVariable>,
    ) -> Result<Compiled<'a>> {
        Ok(match term {
            Term::Var(v) => Compiled::Table(
                env.get(v)
                    .ok_or_else(|| Error::UnboundVariable(v.clone()))?
                    .table(),
            ),
            Term::Const(c) => Compiled::Table(
                constants
                    .get(c)
                    .ok_or_else(|| Error::UnresolvedConstant(c.clone()))?
                    .table(),
            ),
            Term::Lit(n) => Compiled::Lit(n),
            Term::App(f, args) => Compiled::App(
                *f,
                args.iter()
                    .map(|a| Compiled::compile(a, env, constants))
                    .collect::<Result<_>>()?,
            ),
        })
    }

    pub(crate) fn eval(&self, index: usize) -> Cow<'a, Natural> {
        match self {
            Compiled::Table(t) => Cow::Borrowed(&t[index]),
            Compiled::Lit(n) => Cow::Borrowed(*n),
            Compiled::App(f, args) => {
                let vals: Vec<Natural> = args.iter().map(|a| a.eval(index).into_owned()).collect();
                Cow::Owned(crate::logic::arith_apply(*f, &vals))
            }
        }
    }
}

/// Pointwise image of `term`: a new table-backed variable whose value at
/// each sample is the term evaluated on the values there.
pub fn apply_term(
    space: &Arc<SampleSpace>,
    term: &Term,
    env: &Env,
    constants: &BTreeMap<String, RandomVariable>,
) -> Result<RandomVariable> {
    for rv in env.values().chain(constants.values()) {
        if rv.space().id() != space.id() {
            return Err(Error::SpaceMismatch);
        }
    }
    let compiled = Compiled::compile(term, env, constants)?;
    let values = (0..space.len()).map(|i| compiled.eval(i).into_owned()).collect();
    let mut sources: Vec<String> = Vec::new();
    let mut vars = std::collections::BTreeSet::new();
    term.variables(&mut vars);
    sources.extend(vars.iter().map(|v| env[v].name().to_string()));
    RandomVariable::synthesized(
        &term_name(term, env),
        space,
        values,
        Synthesis {
            method: SynthesisMethod::Term,
            sources,
            condition: None,
        },
    )
}

/// The term printed with variables replaced by the names of their values.
fn term_name(term: &Term, env: &Env) -> String {
    let mut t = term.clone();
    for (v, rv) in env {
        t = t.substitute(v, &Term::Const(rv.name().to_string()));
    }
    t.to_string()
}

/// Definition by cases: `alpha` where `cond(var := alpha)` holds, `beta`
/// elsewhere. `cond` must be open; other free variables come from `env`.
pub fn case_merge(
    structure: &Structure,
    alpha: &RandomVariable,
    beta: &RandomVariable,
    cond: &Formula,
    var: &str,
    env: &Env,
) -> Result<RandomVariable> {
    if !cond.is_open() {
        return Err(Error::NotOpen(cond.to_string()));
    }
    if alpha.space().id() != beta.space().id() {
        return Err(Error::SpaceMismatch);
    }
    let mut env = env.clone();
    env.insert(var.to_string(), alpha.clone());
    let holds = structure.truth_value(cond, &env)?;
    RandomVariable::select(
        &format!("case({}|{})", alpha.name(), beta.name()),
        &holds,
        alpha,
        beta,
        Synthesis {
            method: SynthesisMethod::CaseMerge,
            sources: vec![alpha.name().to_string(), beta.name().to_string()],
            condition: Some(cond.to_string()),
        },
    )
}

/// Adds the pointwise images of all terms of nesting depth at most `depth`
/// built from `funcs` over the members. Fails once the family would exceed
/// `cap` members.
pub fn term_closure(family: &Family, depth: usize, funcs: &[Func], cap: usize) -> Result<Family> {
    let space = family.space();
    let mut current = Family::new(space, family.members().to_vec())?;
    let empty = BTreeMap::new();
    let x = Term::var("x");
    let y = Term::var("y");
    for _ in 0..depth {
        let snapshot = current.members().to_vec();
        let mut candidates = Vec::new();
        for &f in funcs {
            if f.arity() == 1 {
                for a in &snapshot {
                    let env = Env::from([("x".to_string(), a.clone())]);
                    candidates.push(apply_term(space, &Term::unary(f, x.clone()), &env, &empty)?);
                }
            } else {
                for a in &snapshot {
                    for b in &snapshot {
                        let env =
                            Env::from([("x".to_string(), a.clone()), ("y".to_string(), b.clone())]);
                        let t = Term::binary(f, x.clone(), y.clone());
                        candidates.push(apply_term(space, &t, &env, &empty)?);
                    }
                }
            }
        }
        for c in candidates {
            if current.contains(&c) {
                continue;
            }
            if current.len() >= cap {
                let partial = current
                    .members()
                    .iter()
                    .take(10)
                    .map(|m| m.name().to_string())
                    .chain(std::iter::once(format!("... ({} total)", current.len())))
                    .collect();
                return Err(Error::ResourceLimit { cap, partial });
            }
            current.insert(c)?;
        }
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn space4() -> Arc<SampleSpace> {
        SampleSpace::exhaustive(2).unwrap()
    }

    fn vals(rv: &RandomVariable) -> Vec<u64> {
        rv.table().iter().map(|v| v.try_into().unwrap()).collect()
    }

    fn konst(s: &Arc<SampleSpace>, v: u64) -> RandomVariable {
        RandomVariable::constant(&format!("c{v}"), s, Natural::from(v))
    }

    #[test]
    fn apply_term_examples() {
        let s = space4();
        let a = RandomVariable::from_u64s("a", &s, &[0, 1, 0, 1]).unwrap();
        let b = RandomVariable::from_u64s("b", &s, &[1, 1, 0, 0]).unwrap();
        let env = Env::from([("x".into(), a), ("y".into(), b)]);
        let none = BTreeMap::new();
        let sum = apply_term(&s, &Term::add(Term::var("x"), Term::var("y")), &env, &none).unwrap();
        assert_eq!(vals(&sum), vec![1, 2, 0, 1]);
        assert!(sum.is_synthesized());

        let env = Env::from([("x".into(), konst(&s, 5))]);
        let l = apply_term(&s, &Term::len(Term::var("x")), &env, &none).unwrap();
        assert_eq!(vals(&l), vec![3; 4]);

        let env = Env::from([("x".into(), konst(&s, 1)), ("y".into(), konst(&s, 2))]);
        let p = apply_term(&s, &Term::pair(Term::var("x"), Term::var("y")), &env, &none).unwrap();
        assert_eq!(vals(&p), vec![8; 4]);

        assert!(matches!(
            apply_term(&s, &Term::var("z"), &env, &none),
            Err(Error::UnboundVariable(_))
        ));
        let other = SampleSpace::exhaustive(3).unwrap();
        let env = Env::from([("x".into(), konst(&other, 1))]);
        assert!(matches!(
            apply_term(&s, &Term::var("x"), &env, &none),
            Err(Error::SpaceMismatch)
        ));
    }

    #[test]
    fn case_merge_examples() {
        let s = space4();
        let a = RandomVariable::from_u64s("a", &s, &[0, 1, 0, 1]).unwrap();
        let b = RandomVariable::from_u64s("b", &s, &[2, 2, 2, 2]).unwrap();
        let fam = Family::new(&s, vec![a.clone(), b.clone()]).unwrap();
        let k = Structure::new(fam);
        let env = Env::new();
        let g = case_merge(&k, &a, &b, &parse_formula("x = 0").unwrap(), "x", &env).unwrap();
        assert_eq!(vals(&g), vec![0, 2, 0, 2]);
        let same = case_merge(&k, &a, &a, &parse_formula("x = 0").unwrap(), "x", &env).unwrap();
        assert!(same.same_values(&a));
        let never = case_merge(&k, &a, &b, &parse_formula("x != x").unwrap(), "x", &env).unwrap();
        assert!(never.same_values(&b));
        let quantified = parse_formula("(exists y)(y = x)").unwrap();
        assert!(matches!(
            case_merge(&k, &a, &b, &quantified, "x", &env),
            Err(Error::NotOpen(_))
        ));
        let unresolved = parse_formula_k("x = q", &["q"]);
        assert!(matches!(
            case_merge(&k, &a, &b, &unresolved, "x", &env),
            Err(Error::UnresolvedConstant(_))
        ));
    }

    fn parse_formula_k(text: &str, names: &[&str]) -> Formula {
        crate::logic::parse_formula_with(text, |n| names.contains(&n)).unwrap()
    }

    #[test]
    fn dedup_by_table() {
        let s = space4();
        let a = RandomVariable::from_u64s("a", &s, &[0, 1, 2, 3]).unwrap();
        let id = RandomVariable::identity("id", &s);
        let fam = Family::new(&s, vec![a, id, konst(&s, 1)]).unwrap();
        assert_eq!(fam.len(), 2);
        assert_eq!(fam.get("id").unwrap().name(), "a");
        let clash = RandomVariable::from_u64s("a", &s, &[3, 3, 3, 3]).unwrap();
        assert!(matches!(
            fam.extended(vec![clash]),
            Err(Error::DuplicateName(_))
        ));
    }

    #[test]
    fn term_closure_examples() {
        let s = space4();
        let fam = Family::new(&s, vec![konst(&s, 1)]).unwrap();
        let same = term_closure(&fam, 0, &Func::ALL, 100).unwrap();
        assert_eq!(same.len(), 1);
        // Oracle: the depth-1 terms over {c1} are 1+1, len(1), pair(1,1).
        let expected: Vec<u64> = {
            let mut v = vec![1, 1 + 1, 1, (2 * 3) / 2 + 1];
            v.dedup();
            let mut out = Vec::new();
            for x in v {
                if !out.contains(&x) {
                    out.push(x);
                }
            }
            out
        };
        let closed = term_closure(&fam, 1, &[Func::Add, Func::Len, Func::Pair], 100).unwrap();
        let got: Vec<u64> = closed.members().iter().map(|m| vals(m)[0]).collect();
        let mut g = got.clone();
        g.sort();
        let mut e = expected.clone();
        e.sort();
        assert_eq!(g, e);
        assert_eq!(e, vec![1, 2, 4]);

        let err = term_closure(&fam, 3, &Func::ALL, 10).unwrap_err();
        match err {
            Error::ResourceLimit { cap, partial } => {
                assert_eq!(cap, 10);
                assert!(!partial.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn filtration_levels() {
        let s = space4();
        let (a, b, c) = (konst(&s, 0), konst(&s, 1), konst(&s, 2));
        let fam = Family::filtered(
            &s,
            vec![
                vec![a.clone(), b.clone(), c.clone()],
                vec![a.clone(), b.clone()],
                vec![a.clone()],
            ],
        )
        .unwrap();
        assert_eq!(fam.filtration_level(&a).unwrap(), Some(3));
        assert_eq!(fam.filtration_level(&c).unwrap(), Some(1));
        assert_eq!(fam.filtration_level(&konst(&s, 9)).unwrap(), None);
        assert_eq!(fam.range(QuantifierRange::Core).unwrap().len(), 1);
        assert_eq!(fam.range(QuantifierRange::Level(2)).unwrap().len(), 2);
        assert_eq!(fam.range(QuantifierRange::All).unwrap().len(), 3);

        let bad = Family::filtered(&s, vec![vec![a.clone()], vec![a.clone(), b.clone()]]);
        assert!(matches!(bad, Err(Error::NestingViolation { level: 2, .. })));

        let plain = Family::new(&s, vec![a.clone()]).unwrap();
        assert!(matches!(plain.filtration_level(&a), Err(Error::NoFiltration)));
    }
}
