//! Scenario files and report output.

pub mod report;
pub mod scenario;

pub use report::{
    emit_report, CheckReport, DemoReport, EvalReport, RealizeReport, Report, ReportFormat,
    SkolemReport, WitnessReport,
};
pub use scenario::{scenario_text, structure_scenario_text, FamilyDecl, Scenario};
