//! One module per subcommand; each exposes an `Args` struct and a `run`.

pub mod audit_dups;
pub mod audit_overlap;
pub mod cv_plan;
pub mod evaluate;
pub mod experiment;
pub mod probe;
pub mod report;
pub mod scan;
pub mod split;
pub mod synth;
