//! Line-oriented scenario files.
//!
//! ```text
//! # comment
//! space n_bits=2 exhaustive
//! eps 1/10
//! rv id builtin identity
//! rv a table 0 1 0 1
//! rv x circuit xor.circ
//! rv c5 const 5
//! family: id a c5
//! formula small := "(exists x)(x <= c5)"
//! ```
//!
//! `space` also accepts `samples=<M> seed=<s>` or `points: <hex> <hex> ...`,
//! and an optional `size=<N>` that must agree with the point count.
//! `family level <k>: <names>` lines (k = 1, 2, ...) declare a filtration
//! instead of a plain family; `range core|all|level <k>` picks the
//! quantifier range. Circuit paths are relative to the scenario file.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::eval::Structure;
use crate::family::{Backing, Circuit, Family, QuantifierRange, RandomVariable};
use crate::logic::{parse_formula_with, Formula, Natural};
use crate::space::{parse_rational, Rational, SampleSpace, SpaceMode};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyDecl {
    /// No `family` line: every declared variable, in order.
    Implicit,
    Plain(Vec<String>),
    Levels(Vec<Vec<String>>),
}

pub struct Scenario {
    origin: String,
    space: Arc<SampleSpace>,
    rvs: Vec<RandomVariable>,
    family: FamilyDecl,
    eps: Rational,
    range: QuantifierRange,
    formulas: Vec<(String, Formula)>,
    structure: Structure,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario")
            .field("origin", &self.origin)
            .field("points", &self.space.len())
            .field("rvs", &self.rvs.len())
            .finish()
    }
}

struct Ctx<'a> {
    origin: &'a str,
}

impl Ctx<'_> {
    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Scenario {
            path: self.origin.to_string(),
            line,
            message: message.into(),
        }
    }

    /// Attaches the line to errors that do not carry a location yet.
    fn at(&self, line: usize, e: Error) -> Error {
        match e {
            Error::Scenario { .. } => e,
            other => self.err(line, format!("{}: {other}", other.kind())),
        }
    }
}

fn parse_hex(text: &str) -> Option<Natural> {
    let t = text.trim_start_matches("0x");
    Natural::parse_bytes(t.as_bytes(), 16)
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Scenario {
            path: path.display().to_string(),
            line: 0,
            message: format!("cannot read: {e}"),
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Scenario::parse(&text, &base, &path.display().to_string())
    }

    /// Parses scenario text; `base` resolves circuit paths and `origin`
    /// names the source in errors.
    pub fn parse(text: &str, base: &Path, origin: &str) -> Result<Scenario> {
        let cx = Ctx { origin };
        let mut space: Option<Arc<SampleSpace>> = None;
        let mut rvs: Vec<RandomVariable> = Vec::new();
        let mut names: BTreeSet<String> = BTreeSet::new();
        let mut family = FamilyDecl::Implicit;
        let mut family_line = 0;
        let mut eps = Rational::from_integer(0);
        let mut range = QuantifierRange::Core;
        let mut range_line = 0;
        let mut raw_formulas: Vec<(usize, String, String)> = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            match head {
                "space" => {
                    if space.is_some() {
                        return Err(cx.err(line_no, "space declared twice"));
                    }
                    space = Some(parse_space(rest).map_err(|e| cx.at(line_no, e))?);
                }
                "eps" => {
                    eps = parse_rational(rest)
                        .and_then(crate::space::check_eps)
                        .map_err(|e| cx.at(line_no, e))?;
                }
                "rv" => {
                    let space = space
                        .as_ref()
                        .ok_or_else(|| cx.err(line_no, "rv before space"))?;
                    let rv = parse_rv(rest, space, base).map_err(|e| cx.at(line_no, e))?;
                    if !names.insert(rv.name().to_string()) {
                        return Err(cx.at(line_no, Error::DuplicateName(rv.name().to_string())));
                    }
                    rvs.push(rv);
                }
                "family" | "family:" => {
                    let spec = if head == "family:" {
                        format!(":{rest}")
                    } else {
                        rest.to_string()
                    };
                    family_line = line_no;
                    family = add_family_line(family, &spec, &names)
                        .map_err(|e| cx.at(line_no, e))?;
                }
                "range" => {
                    range_line = line_no;
                    range = parse_range(rest).map_err(|e| cx.at(line_no, e))?;
                }
                "formula" => {
                    let (name, body) = rest
                        .split_once(":=")
                        .ok_or_else(|| cx.err(line_no, "expected `formula <name> := \"<text>\"`"))?;
                    let body = body.trim();
                    let text = body
                        .strip_prefix('"')
                        .and_then(|b| b.strip_suffix('"'))
                        .ok_or_else(|| cx.err(line_no, "formula text must be in double quotes"))?;
                    raw_formulas.push((line_no, name.trim().to_string(), text.to_string()));
                }
                other => return Err(cx.err(line_no, format!("unknown directive `{other}`"))),
            }
        }

        let space = space.ok_or_else(|| cx.err(0, "no space declared"))?;
        let lookup = |n: &str| rvs.iter().find(|r| r.name() == n).cloned();
        let fam = match &family {
            FamilyDecl::Implicit => Family::new(&space, rvs.clone()),
            FamilyDecl::Plain(list) => {
                Family::new(&space, list.iter().filter_map(|n| lookup(n)).collect())
            }
            FamilyDecl::Levels(levels) => Family::filtered(
                &space,
                levels
                    .iter()
                    .map(|l| l.iter().filter_map(|n| lookup(n)).collect())
                    .collect(),
            ),
        }
        .map_err(|e| cx.at(family_line, e))?;
        let mut structure = Structure::new(fam);
        for rv in &rvs {
            structure = structure
                .with_constant(rv.clone())
                .map_err(|e| cx.at(family_line, e))?;
        }
        let structure = structure
            .with_range(range)
            .map_err(|e| cx.at(range_line, e))?;

        let mut formulas: Vec<(String, Formula)> = Vec::new();
        for (line_no, name, text) in raw_formulas {
            if formulas.iter().any(|(n, _)| *n == name) {
                return Err(cx.at(line_no, Error::DuplicateName(name)));
            }
            let f = parse_formula_with(&text, |n| names.contains(n))
                .map_err(|e| cx.at(line_no, e.into()))?;
            formulas.push((name, f));
        }

        Ok(Scenario {
            origin: origin.to_string(),
            space,
            rvs,
            family,
            eps,
            range,
            formulas,
            structure,
        })
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    /// Replaces the structure, e.g. to change the execution strategy.
    pub fn map_structure(mut self, f: impl FnOnce(Structure) -> Structure) -> Scenario {
        self.structure = f(self.structure);
        self
    }

    pub fn rvs(&self) -> &[RandomVariable] {
        &self.rvs
    }

    pub fn rv(&self, name: &str) -> Option<&RandomVariable> {
        self.rvs.iter().find(|r| r.name() == name)
    }

    pub fn family_decl(&self) -> &FamilyDecl {
        &self.family
    }

    pub fn eps(&self) -> Rational {
        self.eps
    }

    pub fn range(&self) -> QuantifierRange {
        self.range
    }

    pub fn formulas(&self) -> &[(String, Formula)] {
        &self.formulas
    }

    pub fn formula(&self, name: &str) -> Option<&Formula> {
        self.formulas.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }

    /// Self-contained text form: exhaustive spaces stay exhaustive, other
    /// spaces list their points, and circuit-backed variables become tables.
    pub fn to_text(&self) -> String {
        scenario_text(
            &self.space,
            &self.rvs,
            &self.family,
            self.eps,
            self.range,
            &self.formulas,
        )
    }
}

/// Serializes the parts of a scenario. Used both for loaded scenarios and
/// for scenarios built in code.
pub fn scenario_text(
    space: &SampleSpace,
    rvs: &[RandomVariable],
    family: &FamilyDecl,
    eps: Rational,
    range: QuantifierRange,
    formulas: &[(String, Formula)],
) -> String {
    let mut s = String::new();
    match space.mode() {
        SpaceMode::Exhaustive => {
            let _ = writeln!(s, "space n_bits={} exhaustive", space.n_bits());
        }
        _ => {
            let _ = write!(s, "space n_bits={} points:", space.n_bits());
            for p in space.points() {
                let _ = write!(s, " {p:x}");
            }
            s.push('\n');
        }
    }
    let _ = writeln!(s, "eps {eps}");
    for rv in rvs {
        match rv.backing() {
            Backing::Identity => {
                let _ = writeln!(s, "rv {} builtin identity", rv.name());
            }
            Backing::Const(v) => {
                let _ = writeln!(s, "rv {} const {v}", rv.name());
            }
            Backing::Table | Backing::Circuit(_) => {
                let _ = write!(s, "rv {} table", rv.name());
                for v in rv.table().iter() {
                    let _ = write!(s, " {v}");
                }
                s.push('\n');
            }
        }
    }
    match family {
        FamilyDecl::Implicit => {}
        FamilyDecl::Plain(list) => {
            let _ = writeln!(s, "family: {}", list.join(" "));
        }
        FamilyDecl::Levels(levels) => {
            for (i, l) in levels.iter().enumerate() {
                let _ = writeln!(s, "family level {}: {}", i + 1, l.join(" "));
            }
        }
    }
    match range {
        QuantifierRange::Core => {}
        QuantifierRange::All => s.push_str("range all\n"),
        QuantifierRange::Level(k) => {
            let _ = writeln!(s, "range level {k}");
        }
    }
    for (name, f) in formulas {
        let _ = writeln!(s, "formula {name} := \"{f}\"");
    }
    s
}

fn strip_comment(line: &str) -> &str {
    // `#` inside a quoted formula is not a comment.
    let mut in_quotes = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

fn parse_space(rest: &str) -> Result<Arc<SampleSpace>> {
    let bad = |m: String| Error::InvalidArgument(m);
    let (settings, points) = match rest.split_once("points:") {
        Some((a, b)) => (a, Some(b)),
        None => (rest, None),
    };
    let mut n_bits: Option<u32> = None;
    let mut samples: Option<usize> = None;
    let mut seed: Option<u64> = None;
    let mut size: Option<usize> = None;
    let mut exhaustive = false;
    for word in settings.split_whitespace() {
        match word.split_once('=') {
            Some(("n_bits", v)) => {
                n_bits = Some(v.parse().map_err(|_| bad(format!("bad n_bits `{v}`")))?)
            }
            Some(("samples", v)) | Some(("count", v)) => {
                samples = Some(v.parse().map_err(|_| bad(format!("bad samples `{v}`")))?)
            }
            Some(("seed", v)) => seed = Some(v.parse().map_err(|_| bad(format!("bad seed `{v}`")))?),
            Some(("size", v)) => size = Some(v.parse().map_err(|_| bad(format!("bad size `{v}`")))?),
            None if word == "exhaustive" => exhaustive = true,
            _ => return Err(bad(format!("unexpected `{word}` in space line"))),
        }
    }
    let n_bits = n_bits.ok_or_else(|| bad("space needs n_bits=<n>".into()))?;
    let space = match (exhaustive, samples, points) {
        (true, None, None) => SampleSpace::exhaustive(n_bits)?,
        (false, Some(m), None) => {
            let seed = seed.ok_or_else(|| bad("sampled space needs seed=<s>".into()))?;
            SampleSpace::sampled(n_bits, m, seed)?
        }
        (false, None, Some(list)) => {
            let pts = list
                .split_whitespace()
                .map(|h| parse_hex(h).ok_or_else(|| bad(format!("bad hex point `{h}`"))))
                .collect::<Result<Vec<_>>>()?;
            SampleSpace::explicit(n_bits, pts)?
        }
        _ => {
            return Err(bad(
                "space needs exactly one of `exhaustive`, `samples=<M> seed=<s>`, `points: ...`"
                    .into(),
            ))
        }
    };
    if let Some(sz) = size {
        if sz != space.len() {
            return Err(bad(format!("size={sz} but the space has {} points", space.len())));
        }
    }
    Ok(space)
}

fn parse_rv(rest: &str, space: &Arc<SampleSpace>, base: &Path) -> Result<RandomVariable> {
    let bad = |m: String| Error::InvalidArgument(m);
    let words: Vec<&str> = rest.split_whitespace().collect();
    let (name, kind, args) = match words.as_slice() {
        [name, kind, args @ ..] => (*name, *kind, args),
        _ => return Err(bad("expected `rv <name> <kind> ...`".into())),
    };
    if !is_ident(name) {
        return Err(bad(format!("bad rv name `{name}`")));
    }
    match (kind, args) {
        ("builtin", ["identity"]) => Ok(RandomVariable::identity(name, space)),
        ("table", values) => {
            let vals = values
                .iter()
                .map(|v| {
                    Natural::parse_bytes(v.as_bytes(), 10)
                        .ok_or_else(|| bad(format!("bad table value `{v}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            RandomVariable::from_table(name, space, vals)
        }
        ("circuit", [path]) => {
            let full: PathBuf = base.join(path);
            let text = std::fs::read_to_string(&full)
                .map_err(|e| bad(format!("cannot read circuit {}: {e}", full.display())))?;
            RandomVariable::from_circuit(name, space, Circuit::parse(&text)?)
        }
        ("const", [v]) => {
            let v = Natural::parse_bytes(v.as_bytes(), 10)
                .ok_or_else(|| bad(format!("bad constant `{v}`")))?;
            Ok(RandomVariable::constant(name, space, v))
        }
        _ => Err(bad(format!(
            "unknown rv backing `{kind}` (expected builtin identity, table, circuit or const)"
        ))),
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn add_family_line(current: FamilyDecl, spec: &str, names: &BTreeSet<String>) -> Result<FamilyDecl> {
    let bad = |m: String| Error::InvalidArgument(m);
    let (head, list) = spec
        .split_once(':')
        .ok_or_else(|| bad("expected `family: <names>` or `family level <k>: <names>`".into()))?;
    let members: Vec<String> = list.split_whitespace().map(str::to_string).collect();
    for m in &members {
        if !names.contains(m) {
            return Err(Error::Undeclared(m.clone()));
        }
    }
    let head = head.trim();
    if head.is_empty() {
        return match current {
            FamilyDecl::Implicit => Ok(FamilyDecl::Plain(members)),
            _ => Err(bad("family declared twice".into())),
        };
    }
    let level: usize = head
        .strip_prefix("level")
        .map(str::trim)
        .and_then(|k| k.parse().ok())
        .ok_or_else(|| bad(format!("bad family header `{head}`")))?;
    match current {
        FamilyDecl::Implicit if level == 1 => Ok(FamilyDecl::Levels(vec![members])),
        FamilyDecl::Levels(mut levels) if level == levels.len() + 1 => {
            levels.push(members);
            Ok(FamilyDecl::Levels(levels))
        }
        FamilyDecl::Plain(_) => Err(bad("cannot mix `family:` and `family level` lines".into())),
        _ => Err(bad(format!("family levels must be numbered 1, 2, ...; got {level}"))),
    }
}

/// Serializes a structure built in code, so that it can be reloaded as a
/// scenario. Members are written as tables.
pub fn structure_scenario_text(k: &Structure, eps: Rational, formulas: &[(String, Formula)]) -> String {
    let fam = k.family();
    let mut rvs: Vec<RandomVariable> = fam.members().to_vec();
    rvs.extend(
        k.constants()
            .values()
            .filter(|c| fam.get(c.name()).is_none())
            .cloned(),
    );
    let names = |idx: &[usize]| idx.iter().map(|&i| fam.members()[i].name().to_string()).collect();
    let decl = match fam.filtration() {
        Some(f) => FamilyDecl::Levels((1..=f.depth()).map(|l| names(f.level(l))).collect()),
        None => FamilyDecl::Plain(fam.members().iter().map(|m| m.name().to_string()).collect()),
    };
    scenario_text(k.space(), &rvs, &decl, eps, k.range_kind(), formulas)
}

fn parse_range(rest: &str) -> Result<QuantifierRange> {
    let words: Vec<&str> = rest.split_whitespace().collect();
    match words.as_slice() {
        ["core"] => Ok(QuantifierRange::Core),
        ["all"] => Ok(QuantifierRange::All),
        ["level", k] => k
            .parse()
            .map(QuantifierRange::Level)
            .map_err(|_| Error::InvalidArgument(format!("bad level `{k}`"))),
        _ => Err(Error::InvalidArgument(format!("bad range `{rest}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Scenario> {
        Scenario::parse(text, Path::new("."), "test")
    }

    #[test]
    fn minimal() {
        let s = parse("space size=4 exhaustive n_bits=2\nrv id builtin identity\nfamily: id\n")
            .unwrap();
        assert_eq!(s.space().len(), 4);
        assert_eq!(s.structure().range().len(), 1);
    }

    #[test]
    fn nesting_violation_reported() {
        let text = "space n_bits=2 exhaustive\nrv a const 1\nrv b const 2\n\
                    family level 1: a\nfamily level 2: a b\n";
        match parse(text).unwrap_err() {
            Error::Scenario { line, message, .. } => {
                assert_eq!(line, 5);
                assert!(message.starts_with("nesting-violation"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sampled_is_deterministic() {
        let text = "space n_bits=256 samples=1024 seed=7\n";
        let a = parse(text).unwrap();
        let b = parse(text).unwrap();
        assert_eq!(a.space().points(), b.space().points());
        assert_eq!(a.space().len(), 1024);
    }

    #[test]
    fn errors_have_lines() {
        let cases = [
            ("space n_bits=2 exhaustive\nrv a const 1\nrv a const 2\n", 3, "duplicate-name"),
            ("space n_bits=2 exhaustive\nfamily: a\n", 2, "undeclared"),
            ("space n_bits=2 exhaustive\nformula f := \"x = \"\n", 2, "parse"),
            ("space n_bits=2 exhaustive\nrv a table 1 2\n", 2, "table-length"),
            ("rv a const 1\n", 1, "rv before space"),
        ];
        for (text, want_line, want) in cases {
            match parse(text).unwrap_err() {
                Error::Scenario { line, message, .. } => {
                    assert_eq!(line, want_line, "{text}");
                    assert!(message.contains(want), "{message}");
                }
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn round_trip() {
        let text = "space n_bits=3 points: 1 5 7 2\neps 1/4\nrv id builtin identity\n\
                    rv t table 3 0 9 1\nrv k const 12\nfamily level 1: id t k\nfamily level 2: t\n\
                    range level 1\nformula f := \"(exists x)(x <= k)\" # comment\n";
        let a = parse(text).unwrap();
        let b = parse(&a.to_text()).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert_eq!(a.space().points(), b.space().points());
        for (x, y) in a.rvs().iter().zip(b.rvs()) {
            assert!(x.same_values(y));
        }
        let f = a.formula("f").unwrap();
        assert_eq!(
            a.structure().sentence_value(f).unwrap(),
            b.structure().sentence_value(b.formula("f").unwrap()).unwrap()
        );
        assert_eq!(b.range(), QuantifierRange::Level(1));
    }
}
