//! Report rendering as text, JSON or CSV. Field order is fixed and nothing
//! run-dependent (timings, addresses, thread counts) is included, so equal
//! inputs give byte-identical output.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::eval::Structure;
use crate::family::{Provenance, RandomVariable};
use crate::logic::Formula;
use crate::saturation::{ProfileRow, SaturCheck, SaturationReport, UniversalFailure};
use crate::space::{Event, MeasureValue, Rational};
use crate::witnessing::{MergeStep, SkolemChain, WitnessPolicy, WitnessResult};

/// Witness tables longer than this are left out of reports.
const MAX_LISTED_VALUES: usize = 64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReportFormat {
    #[default]
    Text,
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::InvalidArgument(format!(
                "unknown report format `{other}` (expected text, json or csv)"
            ))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Text => "text",
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        })
    }
}

/// Something that can be emitted in all three formats.
pub trait Report {
    fn text(&self) -> String;
    fn json(&self) -> Result<String>;
    fn csv_header(&self) -> Vec<&'static str>;
    fn csv_rows(&self) -> Vec<Vec<String>>;
}

pub fn emit_report(report: &dyn Report, format: ReportFormat, sink: &mut dyn Write) -> Result<()> {
    match format {
        ReportFormat::Text => sink.write_all(report.text().as_bytes())?,
        ReportFormat::Json => {
            sink.write_all(report.json()?.as_bytes())?;
            sink.write_all(b"\n")?;
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
            w.write_record(report.csv_header()).map_err(io)?;
            for row in report.csv_rows() {
                w.write_record(&row).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
            sink.write_all(&bytes)?;
        }
    }
    sink.flush()?;
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Io(std::io::Error::other(e)))
}

#[derive(Serialize)]
pub struct MeasureDto {
    pub num: u64,
    pub den: u64,
    pub approx: Box<RawValue>,
}

impl From<MeasureValue> for MeasureDto {
    fn from(m: MeasureValue) -> Self {
        MeasureDto {
            num: m.numer(),
            den: m.denom(),
            approx: RawValue::from_string(m.approx()).expect("a decimal is valid JSON"),
        }
    }
}

fn rational_dto(r: Rational) -> MeasureDto {
    MeasureDto {
        num: *r.numer(),
        den: *r.denom(),
        approx: RawValue::from_string(format!("{:.6}", *r.numer() as f64 / *r.denom() as f64))
            .expect("a decimal is valid JSON"),
    }
}

#[derive(Serialize)]
pub struct EventDto {
    pub cardinality: usize,
    pub points: usize,
    pub measure: MeasureDto,
    pub bits: String,
}

impl From<&Event> for EventDto {
    fn from(e: &Event) -> Self {
        EventDto {
            cardinality: e.cardinality(),
            points: e.universe_len(),
            measure: e.measure().into(),
            bits: e.to_hex(),
        }
    }
}

#[derive(Serialize)]
pub struct RvDto {
    pub name: String,
    pub in_family: bool,
    pub origin: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sources: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<String>>,
}

impl RvDto {
    pub fn new(rv: &RandomVariable, in_family: bool) -> RvDto {
        let (origin, sources, condition) = match rv.provenance() {
            Provenance::Declared => ("declared".to_string(), Vec::new(), None),
            Provenance::Synthesized(s) => {
                (s.method.to_string(), s.sources.clone(), s.condition.clone())
            }
        };
        let t = rv.table();
        RvDto {
            name: rv.name().to_string(),
            in_family,
            origin,
            sources,
            condition,
            values: (t.len() <= MAX_LISTED_VALUES).then(|| t.iter().map(|v| v.to_string()).collect()),
        }
    }

    fn text(&self) -> String {
        let mut s = format!(
            "{} ({}, {})",
            self.name,
            self.origin,
            if self.in_family { "in family" } else { "not in family" }
        );
        if let Some(v) = &self.values {
            s.push_str(&format!(" = [{}]", v.join(", ")));
        }
        s
    }
}

#[derive(Serialize)]
pub struct TraceDto {
    pub member: String,
    pub condition: String,
}

fn trace_dto(trace: &[MergeStep]) -> Vec<TraceDto> {
    trace
        .iter()
        .map(|s| TraceDto {
            member: s.member.clone(),
            condition: s.condition.clone(),
        })
        .collect()
}

fn trace_text(trace: &[TraceDto], out: &mut String) {
    if trace.is_empty() {
        return;
    }
    out.push_str("merge trace:\n");
    for (i, s) in trace.iter().enumerate() {
        out.push_str(&format!("  {}. take {} where the running witness fails [{}]\n", i + 1, s.member, s.condition));
    }
}

#[derive(Serialize)]
pub struct EvalReport {
    pub formula: String,
    pub class: String,
    pub eps: MeasureDto,
    pub valid: bool,
    pub event: EventDto,
}

impl EvalReport {
    pub fn new(formula: &Formula, event: &Event, eps: Rational) -> EvalReport {
        let valid = event.measure().value() + eps >= Rational::from_integer(1);
        EvalReport {
            formula: formula.to_string(),
            class: formula.classify().to_string(),
            eps: rational_dto(eps),
            valid,
            event: event.into(),
        }
    }
}

fn measure_line(m: &MeasureDto) -> String {
    format!("{}/{} ({})", m.num, m.den, m.approx.get())
}

impl Report for EvalReport {
    fn text(&self) -> String {
        format!(
            "formula: {}\nclass: {}\nmeasure: {}\ncardinality: {}/{}\nbits: {}\nvalid (eps {}): {}\n",
            self.formula,
            self.class,
            measure_line(&self.event.measure),
            self.event.cardinality,
            self.event.points,
            self.event.bits,
            measure_line(&self.eps),
            self.valid
        )
    }

    fn json(&self) -> Result<String> {
        to_json(self)
    }

    fn csv_header(&self) -> Vec<&'static str> {
        vec!["formula", "cardinality", "measure", "approx", "valid", "bits"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.formula.clone(),
            self.event.cardinality.to_string(),
            format!("{}/{}", self.event.measure.num, self.event.measure.den),
            self.event.measure.approx.get().to_string(),
            self.valid.to_string(),
            self.event.bits.clone(),
        ]]
    }
}

#[derive(Serialize)]
pub struct WitnessReport {
    pub formula: String,
    pub var: String,
    pub quantifier: String,
    pub policy: String,
    pub witness: RvDto,
    pub event: EventDto,
    pub target: EventDto,
    pub gap: MeasureDto,
    pub trace: Vec<TraceDto>,
}

impl WitnessReport {
    /// `universal` selects the counter-witness wording.
    pub fn new(
        formula: &Formula,
        var: &str,
        universal: bool,
        policy: WitnessPolicy,
        r: &WitnessResult,
    ) -> WitnessReport {
        WitnessReport {
            formula: formula.to_string(),
            var: var.to_string(),
            quantifier: if universal { "forall" } else { "exists" }.to_string(),
            policy: policy.to_string(),
            witness: RvDto::new(&r.witness, r.in_family),
            event: (&r.event).into(),
            target: (&r.target).into(),
            gap: r.gap.into(),
            trace: trace_dto(&r.trace),
        }
    }
}

impl Report for WitnessReport {
    fn text(&self) -> String {
        let mut s = format!(
            "formula: {}\nquantifier: ({} {})\npolicy: {}\nwitness: {}\nevent:  {}\ntarget: {}\ngap: {}\n",
            self.formula,
            self.quantifier,
            self.var,
            self.policy,
            self.witness.text(),
            event_line(&self.event),
            event_line(&self.target),
            measure_line(&self.gap)
        );
        trace_text(&self.trace, &mut s);
        s
    }

    fn json(&self) -> Result<String> {
        to_json(self)
    }

    fn csv_header(&self) -> Vec<&'static str> {
        vec!["var", "witness", "in_family", "event_measure", "target_measure", "gap"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.var.clone(),
            self.witness.name.clone(),
            self.witness.in_family.to_string(),
            frac(&self.event.measure),
            frac(&self.target.measure),
            frac(&self.gap),
        ]]
    }
}

fn frac(m: &MeasureDto) -> String {
    format!("{}/{}", m.num, m.den)
}

fn event_line(e: &EventDto) -> String {
    format!(
        "{}, {}/{} samples, bits {}",
        measure_line(&e.measure),
        e.cardinality,
        e.points,
        e.bits
    )
}

#[derive(Serialize)]
pub struct SkolemStageDto {
    pub stage: usize,
    pub quantifier: String,
    pub var: String,
    pub witness: RvDto,
    pub remainder: String,
    pub value: EventDto,
    pub delta: MeasureDto,
    pub trace: Vec<TraceDto>,
}

#[derive(Serialize)]
pub struct SkolemReport {
    pub formula: String,
    pub policy: String,
    pub truth: EventDto,
    pub stages: Vec<SkolemStageDto>,
}

impl SkolemReport {
    pub fn new(chain: &SkolemChain, policy: WitnessPolicy) -> SkolemReport {
        SkolemReport {
            formula: chain.formula.to_string(),
            policy: policy.to_string(),
            truth: (&chain.truth).into(),
            stages: chain
                .stages
                .iter()
                .enumerate()
                .map(|(i, st)| SkolemStageDto {
                    stage: i + 1,
                    quantifier: match st.quantifier {
                        crate::logic::Quantifier::Exists => "exists",
                        crate::logic::Quantifier::Forall => "forall",
                    }
                    .to_string(),
                    var: st.var.clone(),
                    witness: RvDto::new(&st.witness, st.in_family),
                    remainder: st.remainder.to_string(),
                    value: (&st.value).into(),
                    delta: st.delta.into(),
                    trace: trace_dto(&st.trace),
                })
                .collect(),
        }
    }
}

impl Report for SkolemReport {
    fn text(&self) -> String {
        let mut s = format!(
            "formula: {}\npolicy: {}\ntruth value: {}\n",
            self.formula,
            self.policy,
            event_line(&self.truth)
        );
        if self.stages.is_empty() {
            s.push_str("no quantifiers: empty chain\n");
        }
        for st in &self.stages {
            s.push_str(&format!(
                "stage {} ({} {}): {}\n  remainder: {}\n  value: {}\n  delta: {}\n",
                st.stage,
                st.quantifier,
                st.var,
                st.witness.text(),
                st.remainder,
                event_line(&st.value),
                measure_line(&st.delta)
            ));
            trace_text(&st.trace, &mut s);
        }
        s
    }

    fn json(&self) -> Result<String> {
        to_json(self)
    }

    fn csv_header(&self) -> Vec<&'static str> {
        vec!["stage", "quantifier", "var", "witness", "in_family", "value_measure", "delta"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.stages
            .iter()
            .map(|st| {
                vec![
                    st.stage.to_string(),
                    st.quantifier.clone(),
                    st.var.clone(),
                    st.witness.name.clone(),
                    st.witness.in_family.to_string(),
                    frac(&st.value.measure),
                    frac(&st.delta),
                ]
            })
            .collect()
    }
}

#[derive(Serialize)]
pub struct ProfileDto {
    pub k: usize,
    pub lhs: MeasureDto,
    pub rhs: MeasureDto,
    pub gap: MeasureDto,
    pub flags: String,
}

fn profile_dto(rows: &[ProfileRow]) -> Vec<ProfileDto> {
    rows.iter()
        .map(|r| ProfileDto {
            k: r.k,
            lhs: r.lhs.into(),
            rhs: r.rhs.into(),
            gap: r.gap.into(),
            flags: r.flags_text(),
        })
        .collect()
}

fn profile_csv(rows: &[ProfileDto]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.k.to_string(),
                frac(&r.lhs),
                frac(&r.rhs),
                frac(&r.gap),
                r.flags.clone(),
            ]
        })
        .collect()
}

fn profile_text(rows: &[ProfileDto], out: &mut String) {
    out.push_str("profile (k: mu[exists x A_k] | mu[A_k(witness)] | gap | flags):\n");
    for r in rows {
        out.push_str(&format!(
            "  {}: {} | {} | {} | {}\n",
            r.k,
            frac(&r.lhs),
            frac(&r.rhs),
            frac(&r.gap),
            r.flags
        ));
    }
}

const PROFILE_HEADER: [&str; 5] = ["k", "lhs_measure", "rhs_measure", "gap", "stage_flags"];

#[derive(Serialize)]
pub struct CheckReport {
    pub var: String,
    pub formulas: Vec<String>,
    pub witness: RvDto,
    pub lhs: EventDto,
    pub rhs: EventDto,
    pub defect: MeasureDto,
    pub majorized: bool,
    pub realized_mod_eps: bool,
    pub profile: Vec<ProfileDto>,
}

impl CheckReport {
    pub fn new(k: &Structure, var: &str, formulas: &[Formula], u: &RandomVariable, c: &SaturCheck) -> CheckReport {
        CheckReport {
            var: var.to_string(),
            formulas: formulas.iter().map(|f| f.to_string()).collect(),
            witness: RvDto::new(u, k.range_member(u).is_some()),
            lhs: (&c.lhs).into(),
            rhs: (&c.rhs).into(),
            defect: c.defect.into(),
            majorized: c.majorized,
            realized_mod_eps: c.realized_mod_eps,
            profile: profile_dto(&c.profile),
        }
    }
}

impl Report for CheckReport {
    fn text(&self) -> String {
        let mut s = format!("type in {}:\n", self.var);
        for (i, f) in self.formulas.iter().enumerate() {
            s.push_str(&format!("  {}. {}\n", i + 1, f));
        }
        s.push_str(&format!(
            "witness: {}\nlhs: {}\nrhs: {}\ndefect: {}\nmajorized: {}\nrealized mod eps: {}\n",
            self.witness.text(),
            event_line(&self.lhs),
            event_line(&self.rhs),
            measure_line(&self.defect),
            self.majorized,
            self.realized_mod_eps
        ));
        profile_text(&self.profile, &mut s);
        s
    }

    fn json(&self) -> Result<String> {
        to_json(self)
    }

    fn csv_header(&self) -> Vec<&'static str> {
        PROFILE_HEADER.to_vec()
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        profile_csv(&self.profile)
    }
}

#[derive(Serialize)]
pub struct StageDto {
    pub k: usize,
    pub formula: String,
    pub witness: RvDto,
    pub witness_gap: MeasureDto,
    pub exists: EventDto,
    pub u: EventDto,
    pub u_hat: EventDto,
    pub nesting_violation: MeasureDto,
    pub loss: MeasureDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    pub failures: Vec<String>,
    pub kept: bool,
}

#[derive(Serialize)]
pub struct LiftDto {
    pub var: String,
    pub reduced: Vec<String>,
    pub block_sizes: Vec<usize>,
    pub closure_depth: usize,
    pub z_range_size: usize,
    pub z_report: Box<RealizeReport>,
}

#[derive(Serialize)]
pub struct RealizeReport {
    pub var: String,
    pub policy: String,
    pub eps: MeasureDto,
    pub chain: Vec<String>,
    pub stage: usize,
    pub witness: RvDto,
    pub lhs: EventDto,
    pub rhs: EventDto,
    pub defect: MeasureDto,
    pub majorized: bool,
    pub realized_mod_eps: bool,
    pub full_defect: MeasureDto,
    pub stages: Vec<StageDto>,
    pub profile: Vec<ProfileDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lift: Option<LiftDto>,
}

impl RealizeReport {
    pub fn new(k: &Structure, r: &SaturationReport) -> RealizeReport {
        RealizeReport::build(r, k.range_member(&r.witness).is_some())
    }

    fn build(r: &SaturationReport, witness_in_family: bool) -> RealizeReport {
        RealizeReport {
            var: r.var.clone(),
            policy: r.policy.to_string(),
            eps: rational_dto(r.eps),
            chain: r.chain.iter().map(|f| f.to_string()).collect(),
            stage: r.stage,
            witness: RvDto::new(&r.witness, witness_in_family),
            lhs: (&r.check.lhs).into(),
            rhs: (&r.check.rhs).into(),
            defect: r.check.defect.into(),
            majorized: r.check.majorized,
            realized_mod_eps: r.check.realized_mod_eps,
            full_defect: r.full.defect.into(),
            stages: r
                .stages
                .iter()
                .map(|st| StageDto {
                    k: st.k,
                    formula: r.chain[st.k - 1].to_string(),
                    witness: RvDto::new(&st.witness, st.witness_in_family),
                    witness_gap: st.witness_gap.into(),
                    exists: (&st.exists).into(),
                    u: (&st.u).into(),
                    u_hat: (&st.u_hat).into(),
                    nesting_violation: st.nesting_violation.into(),
                    loss: st.loss.into(),
                    level: st.level,
                    failures: st.failures.iter().map(|c| c.to_string()).collect(),
                    kept: st.kept,
                })
                .collect(),
            profile: profile_dto(&r.profile),
            lift: r.lift.as_ref().map(|l| {
                let z = &l.z_report;
                // The selected witness is the stage witness of the z run.
                let z_in = z.stages.get(z.stage - 1).is_some_and(|s| s.witness_in_family);
                LiftDto {
                    var: l.reduction.var.clone(),
                    reduced: l.reduction.formulas.iter().map(|f| f.to_string()).collect(),
                    block_sizes: l.reduction.block_sizes.clone(),
                    closure_depth: l.closure_depth,
                    z_range_size: l.z_range_size,
                    z_report: Box::new(RealizeReport::build(z, z_in)),
                }
            }),
        }
    }

    fn write_text(&self, s: &mut String, indent: &str) {
        let line = |s: &mut String, t: String| {
            s.push_str(indent);
            s.push_str(&t);
            s.push('\n');
        };
        line(s, format!("type in {} ({} formulas), policy {}, eps {}", self.var, self.chain.len(), self.policy, measure_line(&self.eps)));
        for (i, f) in self.chain.iter().enumerate() {
            line(s, format!("  A_{} = {}", i + 1, f));
        }
        for st in &self.stages {
            line(
                s,
                format!(
                    "stage {}: witness {}; U {}; U-hat {}; nesting violation {}; loss {}{}; {}{}",
                    st.k,
                    st.witness.text(),
                    frac(&st.u.measure),
                    frac(&st.u_hat.measure),
                    frac(&st.nesting_violation),
                    frac(&st.loss),
                    st.level.map(|l| format!("; level {l}")).unwrap_or_default(),
                    if st.failures.is_empty() {
                        "checks ok".to_string()
                    } else {
                        format!("failed: {}", st.failures.join(", "))
                    },
                    if st.kept { "" } else { " (dropped)" }
                ),
            );
        }
        line(s, format!("selected stage: {}", self.stage));
        line(s, format!("witness: {}", self.witness.text()));
        line(s, format!("lhs: {}", event_line(&self.lhs)));
        line(s, format!("rhs: {}", event_line(&self.rhs)));
        line(s, format!("defect: {}", measure_line(&self.defect)));
        line(s, format!("majorized: {}", self.majorized));
        line(s, format!("realized mod eps: {}", self.realized_mod_eps));
        line(s, format!("defect over the whole type: {}", measure_line(&self.full_defect)));
        let mut prof = String::new();
        profile_text(&self.profile, &mut prof);
        for l in prof.lines() {
            line(s, l.to_string());
        }
        if let Some(lift) = &self.lift {
            line(s, format!("reduced to an open type in {} (pack depth {}, {} range members):", lift.var, lift.closure_depth, lift.z_range_size));
            for (i, f) in lift.reduced.iter().enumerate() {
                line(s, format!("  C_{} = {}", i + 1, f));
            }
            let inner = format!("{indent}  ");
            lift.z_report.write_text(s, &inner);
        }
    }
}

impl Report for RealizeReport {
    fn text(&self) -> String {
        let mut s = String::new();
        self.write_text(&mut s, "");
        s
    }

    fn json(&self) -> Result<String> {
        to_json(self)
    }

    fn csv_header(&self) -> Vec<&'static str> {
        PROFILE_HEADER.to_vec()
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        profile_csv(&self.profile)
    }
}

#[derive(Serialize)]
pub struct LevelDto {
    pub level: usize,
    pub root: u64,
    pub budget_bits: String,
    pub members: usize,
}

#[derive(Serialize)]
pub struct PrefixDto {
    pub k: usize,
    pub measure: MeasureDto,
}

#[derive(Serialize)]
pub struct MemberMeasureDto {
    pub member: String,
    pub measure: MeasureDto,
}

#[derive(Serialize)]
pub struct SqueezeDto {
    pub level: usize,
    pub root: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget_bits: Option<String>,
    pub named_value: String,
    pub named_len: u64,
    pub named_in_core: bool,
    pub feasible_values: String,
    pub blocked_values: usize,
    pub best_core_measure: MeasureDto,
}

#[derive(Serialize)]
pub struct DemoReport {
    pub n: u32,
    pub levels: usize,
    pub samples: usize,
    pub seed: u64,
    pub horizon: usize,
    pub depth: usize,
    pub formulas: Vec<String>,
    pub filtration: Vec<LevelDto>,
    pub lhs_prefixes: Vec<PrefixDto>,
    pub lhs: MeasureDto,
    pub rhs_members: Vec<MemberMeasureDto>,
    pub rhs_max: MeasureDto,
    pub rhs_best: String,
    pub squeeze: Vec<SqueezeDto>,
}

fn pow2_text(e: u64) -> String {
    format!("2^{e}")
}

impl DemoReport {
    pub fn new(u: &UniversalFailure) -> DemoReport {
        let p = u.params;
        DemoReport {
            n: p.n,
            levels: p.levels,
            samples: p.samples,
            seed: p.seed,
            horizon: p.horizon,
            depth: p.depth,
            formulas: u.type_spec.formulas().iter().map(|f| f.to_string()).collect(),
            filtration: u
                .levels
                .iter()
                .map(|&(level, root, members)| LevelDto {
                    level,
                    root,
                    budget_bits: pow2_text(root),
                    members,
                })
                .collect(),
            lhs_prefixes: u
                .lhs_rows
                .iter()
                .map(|&(k, m)| PrefixDto {
                    k,
                    measure: m.into(),
                })
                .collect(),
            lhs: u.lhs.into(),
            rhs_members: u
                .rhs_rows
                .iter()
                .map(|(n, m)| MemberMeasureDto {
                    member: n.clone(),
                    measure: (*m).into(),
                })
                .collect(),
            rhs_max: u.rhs_max.into(),
            rhs_best: u.rhs_best.clone(),
            squeeze: u
                .squeeze
                .iter()
                .map(|r| SqueezeDto {
                    level: r.level,
                    root: r.root,
                    budget_bits: r.budget_bits.as_ref().map(|_| pow2_text(r.root)),
                    named_value: pow2_text(r.root - 1),
                    named_len: r.named_len,
                    named_in_core: r.named_in_core,
                    feasible_values: pow2_text(r.root),
                    blocked_values: r.blocked_values,
                    best_core_measure: r.best_core_measure.into(),
                })
                .collect(),
        }
    }
}

impl Report for DemoReport {
    fn text(&self) -> String {
        let mut s = format!(
            "universal type failure: n={} levels={} samples={} seed={} horizon={} depth={}\n",
            self.n, self.levels, self.samples, self.seed, self.horizon, self.depth
        );
        s.push_str("type:\n");
        for (i, f) in self.formulas.iter().enumerate() {
            s.push_str(&format!("  A_{} = {}\n", i + 1, f));
        }
        s.push_str("filtration (level: root, output budget, members):\n");
        for l in &self.filtration {
            s.push_str(&format!(
                "  {}: {}, {} bits, {}\n",
                l.level, l.root, l.budget_bits, l.members
            ));
        }
        s.push_str("truncated left side:\n");
        for r in &self.lhs_prefixes {
            s.push_str(&format!(
                "  mu[exists x (A_1 & ... & A_{})] = {}\n",
                r.k,
                measure_line(&r.measure)
            ));
        }
        s.push_str(&format!("LHS_{} = {}\n", self.horizon, measure_line(&self.lhs)));
        s.push_str(&format!(
            "deep right side (A_1 & ... & A_{} at each core member):\n",
            self.depth
        ));
        for r in &self.rhs_members {
            s.push_str(&format!("  {}: {}\n", r.member, frac(&r.measure)));
        }
        s.push_str(&format!(
            "max over core = {} at {}\n",
            measure_line(&self.rhs_max),
            self.rhs_best
        ));
        s.push_str("witness squeeze (level: root, named value, in core, feasible, blocked, best core measure):\n");
        for r in &self.squeeze {
            s.push_str(&format!(
                "  {}: {}, {}, {}, {}, {}, {}\n",
                r.level,
                r.root,
                r.named_value,
                r.named_in_core,
                r.feasible_values,
                r.blocked_values,
                frac(&r.best_core_measure)
            ));
        }
        s
    }

    fn json(&self) -> Result<String> {
        to_json(self)
    }

    fn csv_header(&self) -> Vec<&'static str> {
        vec![
            "level",
            "root",
            "named_value",
            "named_in_core",
            "feasible_values",
            "blocked_values",
            "best_core_measure",
            "lhs_prefix_measure",
        ]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.squeeze
            .iter()
            .map(|r| {
                let lhs = self
                    .lhs_prefixes
                    .iter()
                    .find(|p| p.k == r.level)
                    .map(|p| frac(&p.measure))
                    .unwrap_or_default();
                vec![
                    r.level.to_string(),
                    r.root.to_string(),
                    r.named_value.clone(),
                    r.named_in_core.to_string(),
                    r.feasible_values.clone(),
                    r.blocked_values.to_string(),
                    frac(&r.best_core_measure),
                    lhs,
                ]
            })
            .collect()
    }
}
