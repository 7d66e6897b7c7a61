use std::fmt;

use super::{Formula, Func, Term};

fn term_prec(t: &Term) -> u8 {
    match t {
        Term::App(Func::Add, _) => 1,
        Term::App(Func::Mul, _) => 2,
        _ => 3,
    }
}

fn write_term(t: &Term, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let paren = term_prec(t) < min_prec;
    if paren {
        f.write_str("(")?;
    }
    match t {
        Term::Var(v) | Term::Const(v) => f.write_str(v)?,
        Term::Lit(n) => write!(f, "{n}")?,
        Term::App(Func::Add, args) => {
            write_term(&args[0], 1, f)?;
            f.write_str(" + ")?;
            write_term(&args[1], 2, f)?;
        }
        Term::App(Func::Mul, args) => {
            write_term(&args[0], 2, f)?;
            f.write_str("*")?;
            write_term(&args[1], 3, f)?;
        }
        Term::App(func, args) => {
            write!(f, "{}(", func.name())?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_term(a, 0, f)?;
            }
            f.write_str(")")?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, 0, f)
    }
}

fn is_quantifier(g: &Formula) -> bool {
    matches!(g, Formula::Exists(..) | Formula::Forall(..))
}

fn is_bang(g: &Formula) -> bool {
    matches!(g, Formula::Not(inner) if !matches!(**inner, Formula::Eq(..)))
}

/// Operand of a binary connective: quantifiers and `!` are self-delimiting.
fn write_operand(g: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if is_quantifier(g) || is_bang(g) {
        write!(f, "{g}")
    } else {
        write!(f, "({g})")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Le(a, b) => write!(f, "{a} <= {b}"),
            Formula::Not(inner) => match &**inner {
                Formula::Eq(a, b) => write!(f, "{a} != {b}"),
                g if is_quantifier(g) => write!(f, "!{g}"),
                g => write!(f, "!({g})"),
            },
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                let op = match self {
                    Formula::And(..) => " & ",
                    Formula::Or(..) => " | ",
                    _ => " -> ",
                };
                write_operand(a, f)?;
                f.write_str(op)?;
                write_operand(b, f)
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let q = if matches!(self, Formula::Exists(..)) {
                    "exists"
                } else {
                    "forall"
                };
                write!(f, "({q} {v})")?;
                if is_quantifier(body) {
                    write!(f, "{body}")
                } else {
                    write!(f, "({body})")
                }
            }
        }
    }
}

/// Canonical text of a formula; parses back to the same tree.
pub fn render_formula(f: &Formula) -> String {
    f.to_string()
}
