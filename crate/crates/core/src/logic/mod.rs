//! The language: terms and formulas over `0, 1, +, *, pair, p1, p2, len, =, <=`,
//! a text parser and printer, classification by quantifier prefix, and the
//! standard interpretation of the function symbols over the naturals.

mod arith;
mod parser;
mod render;

use std::collections::BTreeSet;
use std::fmt;

pub use arith::{bit_length, cantor_pair, cantor_unpair, eval_function};
pub(crate) use arith::apply as arith_apply;
pub use parser::{parse_formula, parse_formula_with, parse_term_with};
pub use render::render_formula;

use crate::error::{Error, Result};

/// Natural numbers of unbounded size.
pub type Natural = num_bigint::BigUint;

/// Function symbols of the fixed signature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Add,
    Mul,
    Pair,
    Len,
    Proj1,
    Proj2,
}

impl Func {
    pub const ALL: [Func; 6] = [
        Func::Len,
        Func::Proj1,
        Func::Proj2,
        Func::Add,
        Func::Mul,
        Func::Pair,
    ];

    pub fn arity(self) -> usize {
        match self {
            Func::Add | Func::Mul | Func::Pair => 2,
            Func::Len | Func::Proj1 | Func::Proj2 => 1,
        }
    }

    /// Name used in the surface syntax. `+` and `*` are infix.
    pub fn name(self) -> &'static str {
        match self {
            Func::Add => "+",
            Func::Mul => "*",
            Func::Pair => "pair",
            Func::Len => "len",
            Func::Proj1 => "p1",
            Func::Proj2 => "p2",
        }
    }

    /// Resolves a prefix function name (`proj1`/`proj2` are accepted aliases).
    pub fn from_prefix_name(name: &str) -> Option<Func> {
        match name {
            "pair" => Some(Func::Pair),
            "len" => Some(Func::Len),
            "p1" | "proj1" => Some(Func::Proj1),
            "p2" | "proj2" => Some(Func::Proj2),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Lit(Natural),
    /// A named random variable, resolved against the structure at evaluation.
    Const(String),
    App(Func, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(name.to_string())
    }

    pub fn lit(value: u64) -> Term {
        Term::Lit(Natural::from(value))
    }

    pub fn app(func: Func, args: Vec<Term>) -> Result<Term> {
        if args.len() != func.arity() {
            return Err(Error::Arity {
                symbol: func.name(),
                expected: func.arity(),
                found: args.len(),
            });
        }
        Ok(Term::App(func, args))
    }

    pub fn unary(func: Func, arg: Term) -> Term {
        debug_assert_eq!(func.arity(), 1);
        Term::App(func, vec![arg])
    }

    pub fn binary(func: Func, lhs: Term, rhs: Term) -> Term {
        debug_assert_eq!(func.arity(), 2);
        Term::App(func, vec![lhs, rhs])
    }

    pub fn len(arg: Term) -> Term {
        Term::unary(Func::Len, arg)
    }

    pub fn p1(arg: Term) -> Term {
        Term::unary(Func::Proj1, arg)
    }

    pub fn p2(arg: Term) -> Term {
        Term::unary(Func::Proj2, arg)
    }

    pub fn pair(lhs: Term, rhs: Term) -> Term {
        Term::binary(Func::Pair, lhs, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(lhs: Term, rhs: Term) -> Term {
        Term::binary(Func::Add, lhs, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(lhs: Term, rhs: Term) -> Term {
        Term::binary(Func::Mul, lhs, rhs)
    }

    /// `p2` applied `k` times.
    pub fn p2_iter(arg: Term, k: usize) -> Term {
        (0..k).fold(arg, |t, _| Term::p2(t))
    }

    /// Nesting depth of function applications; leaves have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.variables(out)),
            Term::Lit(_) | Term::Const(_) => {}
        }
    }

    pub fn constants(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Const(c) => {
                out.insert(c.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.constants(out)),
            Term::Lit(_) | Term::Var(_) => {}
        }
    }

    pub fn mentions_var(&self, var: &str) -> bool {
        match self {
            Term::Var(v) => v == var,
            Term::App(_, args) => args.iter().any(|a| a.mentions_var(var)),
            Term::Lit(_) | Term::Const(_) => false,
        }
    }

    pub fn substitute(&self, var: &str, replacement: &Term) -> Term {
        match self {
            Term::Var(v) if v == var => replacement.clone(),
            Term::App(f, args) => Term::App(
                *f,
                args.iter().map(|a| a.substitute(var, replacement)).collect(),
            ),
            other => other.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Eq(Term, Term),
    Le(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

/// Quantifier-prefix classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FormulaClass {
    Open,
    Existential,
    Universal,
    ExistsForallPrefix,
    General,
}

impl fmt::Display for FormulaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormulaClass::Open => "open",
            FormulaClass::Existential => "existential",
            FormulaClass::Universal => "universal",
            FormulaClass::ExistsForallPrefix => "exists-forall-prefix",
            FormulaClass::General => "general",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Formula {
    pub fn eq(lhs: Term, rhs: Term) -> Formula {
        Formula::Eq(lhs, rhs)
    }

    pub fn le(lhs: Term, rhs: Term) -> Formula {
        Formula::Le(lhs, rhs)
    }

    pub fn neq(lhs: Term, rhs: Term) -> Formula {
        Formula::not(Formula::Eq(lhs, rhs))
    }

    /// `lhs < rhs`, sugar for `!(rhs <= lhs)`.
    pub fn lt(lhs: Term, rhs: Term) -> Formula {
        Formula::not(Formula::Le(rhs, lhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Formula {
        Formula::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Or(Box::new(lhs), Box::new(rhs))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn iff(lhs: Formula, rhs: Formula) -> Formula {
        Formula::and(
            Formula::implies(lhs.clone(), rhs.clone()),
            Formula::implies(rhs, lhs),
        )
    }

    pub fn exists(var: &str, body: Formula) -> Formula {
        Formula::Exists(var.to_string(), Box::new(body))
    }

    pub fn forall(var: &str, body: Formula) -> Formula {
        Formula::Forall(var.to_string(), Box::new(body))
    }

    pub fn quantified(q: Quantifier, var: &str, body: Formula) -> Formula {
        match q {
            Quantifier::Exists => Formula::exists(var, body),
            Quantifier::Forall => Formula::forall(var, body),
        }
    }

    /// Left-nested conjunction; `None` for an empty list.
    pub fn conjunction<I: IntoIterator<Item = Formula>>(parts: I) -> Option<Formula> {
        parts.into_iter().reduce(Formula::and)
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let term_vars = |t: &Term, bound: &Vec<String>, out: &mut BTreeSet<String>| {
            let mut vs = BTreeSet::new();
            t.variables(&mut vs);
            out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
        };
        match self {
            Formula::Eq(a, b) | Formula::Le(a, b) => {
                term_vars(a, bound, out);
                term_vars(b, bound, out);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn has_free(&self, var: &str) -> bool {
        match self {
            Formula::Eq(a, b) | Formula::Le(a, b) => a.mentions_var(var) || b.mentions_var(var),
            Formula::Not(f) => f.has_free(var),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.has_free(var) || b.has_free(var)
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => v != var && body.has_free(var),
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| t.variables(&mut out));
        self.visit_binders(&mut |v| {
            out.insert(v.to_string());
        });
        out
    }

    pub fn constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| t.constants(&mut out));
        out
    }

    fn visit_terms(&self, f: &mut dyn FnMut(&Term)) {
        match self {
            Formula::Eq(a, b) | Formula::Le(a, b) => {
                f(a);
                f(b);
            }
            Formula::Not(g) => g.visit_terms(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit_terms(f);
                b.visit_terms(f);
            }
            Formula::Exists(_, body) | Formula::Forall(_, body) => body.visit_terms(f),
        }
    }

    fn visit_binders(&self, f: &mut dyn FnMut(&str)) {
        match self {
            Formula::Eq(..) | Formula::Le(..) => {}
            Formula::Not(g) => g.visit_binders(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit_binders(f);
                b.visit_binders(f);
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                f(v);
                body.visit_binders(f);
            }
        }
    }

    pub fn is_open(&self) -> bool {
        match self {
            Formula::Eq(..) | Formula::Le(..) => true,
            Formula::Not(f) => f.is_open(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.is_open() && b.is_open()
            }
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Eq(..) | Formula::Le(..) => 0,
            Formula::Not(f) => f.quantifier_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Formula::Exists(_, body) | Formula::Forall(_, body) => 1 + body.quantifier_depth(),
        }
    }

    /// Splits off the leading quantifier block: `(prefix, matrix)`.
    pub fn prefix(&self) -> (Vec<(Quantifier, &str)>, &Formula) {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Formula::Exists(v, body) => {
                    out.push((Quantifier::Exists, v.as_str()));
                    cur = body;
                }
                Formula::Forall(v, body) => {
                    out.push((Quantifier::Forall, v.as_str()));
                    cur = body;
                }
                _ => return (out, cur),
            }
        }
    }

    /// Prefix class. An alternating prefix must start with `exists`, use one
    /// variable per block and contain at least one `forall`.
    pub fn classify(&self) -> FormulaClass {
        let (prefix, matrix) = self.prefix();
        if !matrix.is_open() {
            return FormulaClass::General;
        }
        if prefix.is_empty() {
            return FormulaClass::Open;
        }
        if prefix.iter().all(|(q, _)| *q == Quantifier::Exists) {
            return FormulaClass::Existential;
        }
        if prefix.iter().all(|(q, _)| *q == Quantifier::Forall) {
            return FormulaClass::Universal;
        }
        let alternating = prefix.iter().enumerate().all(|(i, (q, _))| {
            *q == if i % 2 == 0 {
                Quantifier::Exists
            } else {
                Quantifier::Forall
            }
        });
        if alternating {
            FormulaClass::ExistsForallPrefix
        } else {
            FormulaClass::General
        }
    }

    /// Capture-avoiding substitution of `replacement` for free occurrences of `var`.
    pub fn substitute(&self, var: &str, replacement: &Term) -> Formula {
        let mut rvars = BTreeSet::new();
        replacement.variables(&mut rvars);
        self.subst_inner(var, replacement, &rvars)
    }

    fn subst_inner(&self, var: &str, replacement: &Term, rvars: &BTreeSet<String>) -> Formula {
        match self {
            Formula::Eq(a, b) => {
                Formula::Eq(a.substitute(var, replacement), b.substitute(var, replacement))
            }
            Formula::Le(a, b) => {
                Formula::Le(a.substitute(var, replacement), b.substitute(var, replacement))
            }
            Formula::Not(f) => Formula::not(f.subst_inner(var, replacement, rvars)),
            Formula::And(a, b) => Formula::and(
                a.subst_inner(var, replacement, rvars),
                b.subst_inner(var, replacement, rvars),
            ),
            Formula::Or(a, b) => Formula::or(
                a.subst_inner(var, replacement, rvars),
                b.subst_inner(var, replacement, rvars),
            ),
            Formula::Implies(a, b) => Formula::implies(
                a.subst_inner(var, replacement, rvars),
                b.subst_inner(var, replacement, rvars),
            ),
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let q = if matches!(self, Formula::Exists(..)) {
                    Quantifier::Exists
                } else {
                    Quantifier::Forall
                };
                if v == var || !body.has_free(var) {
                    return self.clone();
                }
                if rvars.contains(v) {
                    let mut avoid = body.all_variables();
                    avoid.extend(rvars.iter().cloned());
                    avoid.insert(var.to_string());
                    let fresh = fresh_name(v, &avoid);
                    let renamed = body.substitute(v, &Term::Var(fresh.clone()));
                    Formula::quantified(q, &fresh, renamed.subst_inner(var, replacement, rvars))
                } else {
                    Formula::quantified(q, v, body.subst_inner(var, replacement, rvars))
                }
            }
        }
    }

    /// Replaces free `var` by the named constant `rv`. `declared` decides
    /// whether `rv` names a known random variable.
    pub fn substitute_const(
        &self,
        var: &str,
        rv: &str,
        declared: impl Fn(&str) -> bool,
    ) -> Result<Substitution> {
        if !declared(rv) {
            return Err(Error::Undeclared(rv.to_string()));
        }
        if !self.has_free(var) {
            return Ok(Substitution {
                formula: self.clone(),
                warning: Some(format!("variable `{var}` is not free; formula unchanged")),
            });
        }
        Ok(Substitution {
            formula: self.substitute(var, &Term::Const(rv.to_string())),
            warning: None,
        })
    }

    /// Prefixes `forall` over every free variable, in name order.
    pub fn universal_closure(&self) -> Formula {
        self.free_variables()
            .into_iter()
            .rev()
            .fold(self.clone(), |body, v| Formula::forall(&v, body))
    }

    /// Renames bound variables so that every binder is distinct and differs
    /// from every free variable and every name in `reserved`.
    pub fn rename_apart(&self, reserved: &BTreeSet<String>) -> Formula {
        let mut used: BTreeSet<String> = reserved.clone();
        used.extend(self.free_variables());
        self.rename_inner(&mut used)
    }

    fn rename_inner(&self, used: &mut BTreeSet<String>) -> Formula {
        match self {
            Formula::Eq(..) | Formula::Le(..) => self.clone(),
            Formula::Not(f) => Formula::not(f.rename_inner(used)),
            Formula::And(a, b) => {
                let a = a.rename_inner(used);
                Formula::and(a, b.rename_inner(used))
            }
            Formula::Or(a, b) => {
                let a = a.rename_inner(used);
                Formula::or(a, b.rename_inner(used))
            }
            Formula::Implies(a, b) => {
                let a = a.rename_inner(used);
                Formula::implies(a, b.rename_inner(used))
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let q = if matches!(self, Formula::Exists(..)) {
                    Quantifier::Exists
                } else {
                    Quantifier::Forall
                };
                let name = if used.contains(v) {
                    let mut avoid = used.clone();
                    avoid.extend(body.all_variables());
                    fresh_name(v, &avoid)
                } else {
                    v.clone()
                };
                used.insert(name.clone());
                let body = if &name == v {
                    (**body).clone()
                } else {
                    body.substitute(v, &Term::Var(name.clone()))
                };
                Formula::quantified(q, &name, body.rename_inner(used))
            }
        }
    }
}

/// Result of [`Formula::substitute_const`]; `warning` is set when the
/// variable was not free and the formula came back unchanged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    pub formula: Formula,
    pub warning: Option<String>,
}

/// `base_1`, `base_2`, ...: the first not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    if !avoid.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|c| !avoid.contains(c))
        .expect("unbounded counter")
}
