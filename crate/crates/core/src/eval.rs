//! Truth values: the event on which a formula holds, with quantifiers read
//! as joins and meets over the family.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::family::{Compiled, Family, QuantifierRange, RandomVariable, TableKey};
use crate::logic::{parse_formula_with, Formula, Term};
use crate::par::Execution;
use crate::space::{Event, Rational, SampleSpace};

/// Variable assignment: variable name to random variable.
pub type Env = BTreeMap<String, RandomVariable>;

type Binding = Vec<(String, TableKey)>;

/// Atoms over fewer samples than this are evaluated sequentially.
const PARALLEL_SAMPLE_THRESHOLD: usize = 512;
/// The memo is dropped wholesale once it holds this many events.
const MEMO_CAP: usize = 200_000;

/// The Boolean-valued structure over a family: named constants, the
/// quantifier range, and a memo of quantifier truth values.
pub struct Structure {
    space: Arc<SampleSpace>,
    family: Family,
    /// Declared variables that are not family members.
    extra: BTreeMap<String, RandomVariable>,
    constants: BTreeMap<String, RandomVariable>,
    range_kind: QuantifierRange,
    range: Vec<RandomVariable>,
    exec: Execution,
    memo: RwLock<HashMap<Formula, HashMap<Binding, Event>>>,
    memo_len: std::sync::atomic::AtomicUsize,
}

impl std::fmt::Debug for Structure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Structure")
            .field("points", &self.space.len())
            .field("members", &self.family.len())
            .field("range", &self.range_kind)
            .field("exec", &self.exec)
            .finish()
    }
}

impl Structure {
    pub fn new(family: Family) -> Structure {
        let space = Arc::clone(family.space());
        let range = family
            .range(QuantifierRange::Core)
            .expect("the core range always exists");
        let mut s = Structure {
            space,
            family,
            extra: BTreeMap::new(),
            constants: BTreeMap::new(),
            range_kind: QuantifierRange::Core,
            range,
            exec: Execution::default(),
            memo: RwLock::new(HashMap::new()),
            memo_len: 0.into(),
        };
        s.rebuild_constants();
        s
    }

    fn rebuild_constants(&mut self) {
        let mut constants: BTreeMap<String, RandomVariable> = self
            .family
            .names()
            .map(|(n, i)| (n.to_string(), self.family.members()[i].clone()))
            .collect();
        for (n, rv) in &self.extra {
            constants.entry(n.clone()).or_insert_with(|| rv.clone());
        }
        self.constants = constants;
    }

    /// Declares a named variable usable as a constant but outside the range.
    pub fn with_constant(mut self, rv: RandomVariable) -> Result<Structure> {
        if rv.space().id() != self.space.id() {
            return Err(Error::SpaceMismatch);
        }
        if let Some(old) = self.constants.get(rv.name()) {
            if !old.same_values(&rv) {
                return Err(Error::DuplicateName(rv.name().to_string()));
            }
            return Ok(self);
        }
        self.extra.insert(rv.name().to_string(), rv);
        self.rebuild_constants();
        Ok(self)
    }

    pub fn with_range(mut self, range: QuantifierRange) -> Result<Structure> {
        self.range = self.family.range(range)?;
        self.range_kind = range;
        self.clear_memo();
        Ok(self)
    }

    pub fn with_execution(mut self, exec: Execution) -> Structure {
        self.exec = exec;
        self
    }

    /// A structure over another family on the same space, keeping the extra
    /// constants and execution strategy. Quantifiers range over all of it.
    pub fn over_family(&self, family: Family) -> Result<Structure> {
        if family.space().id() != self.space.id() {
            return Err(Error::SpaceMismatch);
        }
        let mut s = Structure::new(family).with_execution(self.exec);
        for rv in self.extra.values() {
            s = s.with_constant(rv.clone())?;
        }
        s.with_range(QuantifierRange::All)
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn range_kind(&self) -> QuantifierRange {
        self.range_kind
    }

    /// The members quantifiers range over, in declaration order.
    pub fn range(&self) -> &[RandomVariable] {
        &self.range
    }

    pub fn constants(&self) -> &BTreeMap<String, RandomVariable> {
        &self.constants
    }

    pub fn constant(&self, name: &str) -> Option<&RandomVariable> {
        self.constants.get(name)
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.constants.contains_key(name)
    }

    /// The range member with the same table, if any.
    pub fn range_member(&self, rv: &RandomVariable) -> Option<&RandomVariable> {
        self.range.iter().find(|m| m.same_values(rv))
    }

    /// Parses formula text, reading declared names as constants.
    pub fn parse(&self, text: &str) -> Result<Formula> {
        Ok(parse_formula_with(text, |n| self.is_declared(n))?)
    }

    pub fn clear_memo(&self) {
        self.memo.write().expect("memo lock").clear();
        self.memo_len.store(0, std::sync::atomic::Ordering::Relaxed);
    }

    /// Pointwise image of a term under `env` and the declared constants.
    pub fn apply_term(&self, term: &Term, env: &Env) -> Result<RandomVariable> {
        crate::family::apply_term(&self.space, term, env, &self.constants)
    }

    fn check_closed(&self, f: &Formula, env: &Env, skip: Option<&str>) -> Result<()> {
        for v in f.free_variables() {
            if Some(v.as_str()) != skip && !env.contains_key(&v) {
                return Err(Error::UnboundVariable(v));
            }
        }
        for c in f.constants() {
            if !self.constants.contains_key(&c) {
                return Err(Error::UnresolvedConstant(c));
            }
        }
        for rv in env.values() {
            if rv.space().id() != self.space.id() {
                return Err(Error::SpaceMismatch);
            }
        }
        Ok(())
    }

    /// `[[f]]` under `env`.
    pub fn truth_value(&self, f: &Formula, env: &Env) -> Result<Event> {
        self.check_closed(f, env, None)?;
        self.eval(f, env)
    }

    /// `[[f]]` for a sentence.
    pub fn sentence_value(&self, f: &Formula) -> Result<Event> {
        self.truth_value(f, &Env::new())
    }

    /// `mu([[f]]) >= 1 - eps`.
    pub fn is_valid(&self, f: &Formula, env: &Env, eps: Rational) -> Result<bool> {
        let mu = self.truth_value(f, env)?.measure().value();
        Ok(mu + eps >= Rational::from_integer(1))
    }

    /// `[[body(var := a)]]` for every range member `a`, in range order.
    pub fn member_events(&self, body: &Formula, var: &str, env: &Env) -> Result<Vec<Event>> {
        self.check_closed(body, env, Some(var))?;
        if self.range.is_empty() {
            return Err(Error::EmptyFamily);
        }
        self.exec
            .map(self.range.len(), |i| {
                let mut env = env.clone();
                env.insert(var.to_string(), self.range[i].clone());
                self.eval(body, &env)
            })
            .into_iter()
            .collect()
    }

    fn eval(&self, f: &Formula, env: &Env) -> Result<Event> {
        match f {
            Formula::Eq(l, r) => self.atom(l, r, true, env),
            Formula::Le(l, r) => self.atom(l, r, false, env),
            Formula::Not(g) => Ok(self.eval(g, env)?.complement()),
            Formula::And(a, b) => {
                let mut ea = self.eval(a, env)?;
                if !ea.is_empty() {
                    ea.meet_in_place(&self.eval(b, env)?);
                }
                Ok(ea)
            }
            Formula::Or(a, b) => {
                let mut ea = self.eval(a, env)?;
                if !ea.is_full() {
                    ea.join_in_place(&self.eval(b, env)?);
                }
                Ok(ea)
            }
            Formula::Implies(a, b) => {
                let mut ea = self.eval(a, env)?.complement();
                if !ea.is_full() {
                    ea.join_in_place(&self.eval(b, env)?);
                }
                Ok(ea)
            }
            Formula::Exists(v, body) => self.quantifier(f, true, v, body, env),
            Formula::Forall(v, body) => self.quantifier(f, false, v, body, env),
        }
    }

    fn atom(&self, l: &Term, r: &Term, eq: bool, env: &Env) -> Result<Event> {
        let lc = Compiled::compile(l, env, &self.constants)?;
        let rc = Compiled::compile(r, env, &self.constants)?;
        let flags = self
            .exec
            .map_above(self.space.len(), PARALLEL_SAMPLE_THRESHOLD, |i| {
                let (a, b) = (lc.eval(i), rc.eval(i));
                if eq {
                    a == b
                } else {
                    a <= b
                }
            });
        self.space.event_from_bools(&flags)
    }

    fn quantifier(
        &self,
        node: &Formula,
        exists: bool,
        var: &str,
        body: &Formula,
        env: &Env,
    ) -> Result<Event> {
        if self.range.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let binding: Binding = node
            .free_variables()
            .into_iter()
            .map(|v| {
                let key = env[&v].key();
                (v, key)
            })
            .collect();
        if let Some(hit) = self
            .memo
            .read()
            .expect("memo lock")
            .get(node)
            .and_then(|m| m.get(&binding))
        {
            return Ok(hit.clone());
        }

        let instance = |i: usize| {
            let mut env = env.clone();
            env.insert(var.to_string(), self.range[i].clone());
            self.eval(body, &env)
        };
        let mut acc = if exists {
            self.space.empty()
        } else {
            self.space.full()
        };
        match self.exec {
            Execution::Sequential => {
                for i in 0..self.range.len() {
                    let e = instance(i)?;
                    if exists {
                        acc.join_in_place(&e);
                        if acc.is_full() {
                            break;
                        }
                    } else {
                        acc.meet_in_place(&e);
                        if acc.is_empty() {
                            break;
                        }
                    }
                }
            }
            Execution::Parallel => {
                for e in self.exec.map(self.range.len(), instance) {
                    let e = e?;
                    if exists {
                        acc.join_in_place(&e);
                    } else {
                        acc.meet_in_place(&e);
                    }
                }
            }
        }

        use std::sync::atomic::Ordering;
        if self.memo_len.load(Ordering::Relaxed) >= MEMO_CAP {
            self.clear_memo();
        }
        let mut memo = self.memo.write().expect("memo lock");
        let slot = memo.entry(node.clone()).or_default();
        if slot.insert(binding, acc.clone()).is_none() {
            self.memo_len.fetch_add(1, Ordering::Relaxed);
        }
        Ok(acc)
    }
}
