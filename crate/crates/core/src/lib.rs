//! Boolean-valued structures built from families of random variables over a
//! finite sample space.
//!
//! A [`family::Family`] of [`family::RandomVariable`]s on a
//! [`space::SampleSpace`] gives a structure ([`eval::Structure`]) in which
//! every first-order formula of the arithmetic language in [`logic`] has a
//! truth value: the event of samples where it holds. On top of that sit
//! witness synthesis ([`witnessing`]), type realization and the saturation
//! checks ([`saturation`]), and the scenario/report plumbing ([`harness`]).

pub mod error;
pub mod eval;
pub mod family;
pub mod harness;
pub mod logic;
pub mod par;
pub mod saturation;
pub mod space;
pub mod witnessing;

pub use error::{Error, Result};
pub use eval::{Env, Structure};
pub use family::{Family, QuantifierRange, RandomVariable};
pub use logic::{Formula, Func, Natural, Term};
pub use par::Execution;
pub use space::{Event, MeasureValue, Rational, SampleSpace};
