//! Configuration, sampling, verification suites and reports for the
//! `weylforge` command line.

pub mod config;
pub mod report;
pub mod sampling;
pub mod suites;

pub use config::{Check, Family, Mode, PairForm, RunConfig};
pub use report::{Format, Report, Status};
pub use suites::run;
