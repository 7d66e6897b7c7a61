//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! formula := or ("->" formula)?
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "!" unary | "(exists" var ")" unary | "(forall" var ")" unary
//!          | "(" formula ")" | term cmp term
//! cmp     := "=" | "!=" | "<=" | "<"
//! term    := prod ("+" prod)*
//! prod    := atom ("*" atom)*
//! atom    := number | ident | ident "(" term ("," term)* ")" | "(" term ")"
//! ```

use std::collections::BTreeSet;

use super::{Formula, Func, Natural, Term};
use crate::error::{ParseError, ParseErrorKind};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(Natural),
    LParen,
    RParen,
    Comma,
    Plus,
    Star,
    Eq,
    Neq,
    Le,
    Lt,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Eof,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Number(n) => format!("`{n}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Plus => "`+`".into(),
        Tok::Star => "`*`".into(),
        Tok::Eq => "`=`".into(),
        Tok::Neq => "`!=`".into(),
        Tok::Le => "`<=`".into(),
        Tok::Lt => "`<`".into(),
        Tok::Bang => "`!`".into(),
        Tok::Amp => "`&`".into(),
        Tok::Pipe => "`|`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::Eof => "end of input".into(),
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut push = |tok: Tok, width: usize, i: &mut usize, col: &mut usize| {
            out.push(Spanned {
                tok,
                line: l0,
                column: c0,
            });
            *i += width;
            *col += width;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '+' => push(Tok::Plus, 1, &mut i, &mut col),
            '*' => push(Tok::Star, 1, &mut i, &mut col),
            '=' => push(Tok::Eq, 1, &mut i, &mut col),
            '&' => push(Tok::Amp, 1, &mut i, &mut col),
            '|' => push(Tok::Pipe, 1, &mut i, &mut col),
            '!' if chars.get(i + 1) == Some(&'=') => push(Tok::Neq, 2, &mut i, &mut col),
            '!' => push(Tok::Bang, 1, &mut i, &mut col),
            '<' if chars.get(i + 1) == Some(&'=') => push(Tok::Le, 2, &mut i, &mut col),
            '<' => push(Tok::Lt, 1, &mut i, &mut col),
            '-' if chars.get(i + 1) == Some(&'>') => push(Tok::Arrow, 2, &mut i, &mut col),
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                let value = digits.parse::<Natural>().expect("ascii digits");
                out.push(Spanned {
                    tok: Tok::Number(value),
                    line: l0,
                    column: c0,
                });
                col += i - start;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line: l0,
                    column: c0,
                });
                col += i - start;
            }
            other => {
                return Err(ParseError {
                    line,
                    column: col,
                    kind: ParseErrorKind::Syntax(format!("unexpected character `{other}`")),
                })
            }
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    bound: Vec<String>,
    declared: &'a dyn Fn(&str) -> bool,
    /// Furthest error seen, reported when every alternative fails.
    furthest: Option<(usize, ParseError)>,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&mut self, kind: ParseErrorKind) -> ParseError {
        let sp = &self.toks[self.pos];
        let err = ParseError {
            line: sp.line,
            column: sp.column,
            kind,
        };
        match &self.furthest {
            Some((p, _)) if *p > self.pos => {}
            _ => self.furthest = Some((self.pos, err.clone())),
        }
        err
    }

    fn expected(&mut self, what: &str) -> ParseError {
        let found = describe(self.peek());
        self.error_here(ParseErrorKind::Syntax(format!(
            "expected {what}, found {found}"
        )))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.expected(what))
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<Formula> {
        let mut acc = self.and()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            acc = Formula::or(acc, self.and()?);
        }
        Ok(acc)
    }

    fn and(&mut self) -> PResult<Formula> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            acc = Formula::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                if let Tok::Ident(kw) = self.peek_at(1) {
                    if kw == "exists" || kw == "forall" {
                        return self.quantifier();
                    }
                }
                // Either a parenthesised formula or an atom whose left term
                // starts with a parenthesis; try the formula reading first.
                let save = self.pos;
                let attempt: PResult<Formula> = (|| {
                    self.bump();
                    let f = self.formula()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(f)
                })();
                match attempt {
                    Ok(f)
                        if !matches!(
                            self.peek(),
                            Tok::Plus | Tok::Star | Tok::Eq | Tok::Neq | Tok::Le | Tok::Lt
                        ) =>
                    {
                        Ok(f)
                    }
                    _ => {
                        self.pos = save;
                        self.atom_formula()
                    }
                }
            }
            _ => self.atom_formula(),
        }
    }

    fn quantifier(&mut self) -> PResult<Formula> {
        self.expect(Tok::LParen, "`(`")?;
        let exists = matches!(self.bump(), Tok::Ident(ref k) if k == "exists");
        let var = match self.peek().clone() {
            Tok::Ident(v) if !is_reserved(&v) => {
                self.bump();
                v
            }
            _ => return Err(self.expected("a variable name")),
        };
        self.expect(Tok::RParen, "`)`")?;
        self.bound.push(var.clone());
        let body = self.unary();
        self.bound.pop();
        let body = body?;
        Ok(if exists {
            Formula::exists(&var, body)
        } else {
            Formula::forall(&var, body)
        })
    }

    fn atom_formula(&mut self) -> PResult<Formula> {
        let lhs = self.term()?;
        let op = self.peek().clone();
        match op {
            Tok::Eq | Tok::Neq | Tok::Le | Tok::Lt => {
                self.bump();
            }
            _ => return Err(self.expected("a comparison (`=`, `!=`, `<=`, `<`)")),
        }
        let rhs = self.term()?;
        Ok(match op {
            Tok::Eq => Formula::eq(lhs, rhs),
            Tok::Neq => Formula::neq(lhs, rhs),
            Tok::Le => Formula::le(lhs, rhs),
            _ => Formula::lt(lhs, rhs),
        })
    }

    fn term(&mut self) -> PResult<Term> {
        let mut acc = self.product()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            acc = Term::add(acc, self.product()?);
        }
        Ok(acc)
    }

    fn product(&mut self) -> PResult<Term> {
        let mut acc = self.term_atom()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = Term::mul(acc, self.term_atom()?);
        }
        Ok(acc)
    }

    fn term_atom(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Number(n) => {
                self.bump();
                Ok(Term::Lit(n))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Ident(name) => {
                if *self.peek_at(1) == Tok::LParen {
                    let Some(func) = Func::from_prefix_name(&name) else {
                        return Err(self.error_here(ParseErrorKind::UnknownSymbol(name)));
                    };
                    let (line, column) = (self.toks[self.pos].line, self.toks[self.pos].column);
                    self.bump();
                    self.bump();
                    let mut args = vec![self.term()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen, "`,` or `)`")?;
                    if args.len() != func.arity() {
                        return Err(ParseError {
                            line,
                            column,
                            kind: ParseErrorKind::Arity {
                                symbol: name,
                                expected: func.arity(),
                                found: args.len(),
                            },
                        });
                    }
                    return Ok(Term::App(func, args));
                }
                if is_reserved(&name) {
                    return Err(self.error_here(ParseErrorKind::Syntax(format!(
                        "`{name}` cannot be used as a variable"
                    ))));
                }
                self.bump();
                if self.bound.contains(&name) || !(self.declared)(&name) {
                    Ok(Term::Var(name))
                } else {
                    Ok(Term::Const(name))
                }
            }
            _ => Err(self.expected("a term")),
        }
    }
}

fn is_reserved(name: &str) -> bool {
    matches!(name, "exists" | "forall") || Func::from_prefix_name(name).is_some()
}

fn run<T>(
    text: &str,
    declared: &dyn Fn(&str) -> bool,
    entry: impl FnOnce(&mut Parser) -> PResult<T>,
) -> PResult<T> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        bound: Vec::new(),
        declared,
        furthest: None,
    };
    let result = entry(&mut p).and_then(|v| {
        if *p.peek() == Tok::Eof {
            Ok(v)
        } else {
            Err(p.expected("end of input"))
        }
    });
    result.map_err(|e| match p.furthest.take() {
        // Prefer the deepest failure: it points at the real problem after
        // backtracking over the formula/term ambiguity.
        Some((_, far)) if matches!(e.kind, ParseErrorKind::Syntax(_)) => far,
        _ => e,
    })
}

/// Parses a formula in which every identifier not bound by a quantifier is
/// a free variable.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parse_formula_with(text, |_| false)
}

/// Parses a formula; identifiers accepted by `declared` (and not bound by an
/// enclosing quantifier) become named constants. Bound variables are renamed
/// apart from each other, from free variables and from declared names.
pub fn parse_formula_with(
    text: &str,
    declared: impl Fn(&str) -> bool,
) -> Result<Formula, ParseError> {
    let f = run(text, &declared, |p| p.formula())?;
    // A binder that reuses a declared name would print the same as the
    // constant, so those are reserved too.
    let mut reserved: BTreeSet<String> = f.constants();
    f.visit_binders(&mut |v| {
        if declared(v) {
            reserved.insert(v.to_string());
        }
    });
    Ok(f.rename_apart(&reserved))
}

pub fn parse_term_with(text: &str, declared: impl Fn(&str) -> bool) -> Result<Term, ParseError> {
    run(text, &declared, |p| p.term())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Term {
        Term::var("x")
    }

    #[test]
    fn parses_examples() {
        assert_eq!(
            parse_formula("(exists x)(x = 0)").unwrap(),
            Formula::exists("x", Formula::eq(x(), Term::lit(0)))
        );
        assert_eq!(
            parse_formula("(forall y)(len(y) != x)").unwrap(),
            Formula::forall("y", Formula::neq(Term::len(Term::var("y")), x()))
        );
    }

    #[test]
    fn truncated_input_fails_at_end() {
        let err = parse_formula("(exists x)(x = ").unwrap_err();
        assert_eq!((err.line, err.column), (1, 16));
        match err.kind {
            ParseErrorKind::Syntax(msg) => assert!(msg.contains("end of input"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reports_unknown_symbol_and_arity() {
        let err = parse_formula("foo(x) = 1").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownSymbol("foo".into()));
        let err = parse_formula("x = 1 &\n len(x, x) = 2").unwrap_err();
        assert_eq!((err.line, err.column), (2, 2));
        assert!(matches!(
            err.kind,
            ParseErrorKind::Arity {
                expected: 1,
                found: 2,
                ..
            }
        ));
    }

    #[test]
    fn precedence() {
        let f = parse_formula("!x = 0 & y = 1 | z = 2 -> x = y").unwrap();
        let expected = Formula::implies(
            Formula::or(
                Formula::and(
                    Formula::not(Formula::eq(x(), Term::lit(0))),
                    Formula::eq(Term::var("y"), Term::lit(1)),
                ),
                Formula::eq(Term::var("z"), Term::lit(2)),
            ),
            Formula::eq(x(), Term::var("y")),
        );
        assert_eq!(f, expected);
        let t = parse_term_with("1 + x * 2 + pair(x, 3)", |_| false).unwrap();
        assert_eq!(
            t,
            Term::add(
                Term::add(Term::lit(1), Term::mul(x(), Term::lit(2))),
                Term::pair(x(), Term::lit(3))
            )
        );
    }

    #[test]
    fn parenthesised_terms_and_formulas() {
        let f = parse_formula("(x + 1) * 2 = y").unwrap();
        assert_eq!(
            f,
            Formula::eq(
                Term::mul(Term::add(x(), Term::lit(1)), Term::lit(2)),
                Term::var("y")
            )
        );
        let g = parse_formula("((x = 1)) & (x) <= 3").unwrap();
        assert_eq!(
            g,
            Formula::and(Formula::eq(x(), Term::lit(1)), Formula::le(x(), Term::lit(3)))
        );
    }

    #[test]
    fn strict_less_is_sugar() {
        assert_eq!(
            parse_formula("x < 3").unwrap(),
            Formula::not(Formula::le(Term::lit(3), x()))
        );
    }

    #[test]
    fn declared_names_become_constants() {
        let f = parse_formula_with("(forall y)(y <= alpha + x)", |n| n == "alpha").unwrap();
        assert_eq!(
            f,
            Formula::forall(
                "y",
                Formula::le(Term::var("y"), Term::add(Term::constant("alpha"), x()))
            )
        );
        // A quantifier may shadow a declared name; the binder is renamed.
        let g = parse_formula_with("(exists alpha)(alpha = 0) & alpha = 1", |n| n == "alpha")
            .unwrap();
        match &g {
            Formula::And(a, b) => {
                assert!(matches!(&**a, Formula::Exists(v, _) if v != "alpha"));
                assert_eq!(**b, Formula::eq(Term::constant("alpha"), Term::lit(1)));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn repeated_binders_are_renamed_apart() {
        let f = parse_formula("(exists x)(x = 0) & (exists x)(x = 1) & x = 2").unwrap();
        let mut names = Vec::new();
        f.visit_binders(&mut |v| names.push(v.to_string()));
        assert_eq!(names.len(), 2);
        assert!(names.iter().all(|n| n != "x"));
        assert_ne!(names[0], names[1]);
    }

    #[test]
    fn quantifier_body_may_be_a_quantifier() {
        let f = parse_formula("(exists x)(forall y)(x <= y)").unwrap();
        assert_eq!(
            f,
            Formula::exists("x", Formula::forall("y", Formula::le(x(), Term::var("y"))))
        );
    }

    #[test]
    fn large_literals() {
        let f = parse_formula("x = 340282366920938463463374607431768211456").unwrap();
        match f {
            Formula::Eq(_, Term::Lit(v)) => assert_eq!(v.bits(), 129),
            _ => panic!(),
        }
    }
}
