//! `splitgate`: audit and generate dataset splits for sliced volumetric imaging.
//!
//! Every subcommand emits a canonical JSON envelope on success. Domain
//! failures print a structured error to standard error and exit 1; usage
//! errors exit 2 via clap.
//!
//! `SPLITGATE_THREADS` caps the rayon worker pool; unset or invalid values
//! leave the default.

mod args;
mod commands;
mod envelope;
mod error;
mod presets;
mod sides;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "splitgate",
    version,
    about = "Dataset split auditing and generation for sliced volumetric imaging"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scan an image tree into a manifest of labeled records
    Scan(commands::scan::ScanArgs),
    /// Measure group overlap between the train and test sides of a split
    AuditOverlap(commands::audit_overlap::AuditOverlapArgs),
    /// Find exact and near-duplicate images across a split boundary
    AuditDups(commands::audit_dups::AuditDupsArgs),
    /// Draw a leakage-safe train/test split from a manifest
    Split(commands::split::SplitArgs),
    /// Build a stratified cross-validation plan
    CvPlan(commands::cv_plan::CvPlanArgs),
    /// Compute the metric suite from a prediction file
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Sample the random-label null distribution of the MCC
    NullTest(commands::null_test::NullTestArgs),
    /// Test an observed MCC against the random-label null
    Probe(commands::probe::ProbeArgs),
    /// Generate a synthetic sliced-volume corpus
    Synth(commands::synth::SynthArgs),
    /// Run the split-strategy inflation experiment end to end
    Experiment(commands::experiment::ExperimentArgs),
    /// Render a JSON report as human-readable text
    Report(commands::report::ReportArgs),
}

fn configure_threads() {
    let Ok(raw) = std::env::var("SPLITGATE_THREADS") else {
        return;
    };
    let Ok(threads) = raw.trim().parse::<usize>() else {
        return;
    };
    if threads == 0 {
        return;
    }
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
}

fn dispatch(command: &Command) -> Result<(), error::CliError> {
    match command {
        Command::Scan(args) => commands::scan::run(args),
        Command::AuditOverlap(args) => commands::audit_overlap::run(args),
        Command::AuditDups(args) => commands::audit_dups::run(args),
        Command::Split(args) => commands::split::run(args),
        Command::CvPlan(args) => commands::cv_plan::run(args),
        Command::Evaluate(args) => commands::evaluate::run(args),
        Command::NullTest(args) => commands::null_test::run(args),
        Command::Probe(args) => commands::probe::run(args),
        Command::Synth(args) => commands::synth::run(args),
        Command::Experiment(args) => commands::experiment::run(args),
        Command::Report(args) => commands::report::run(args),
    }
}

fn main() {
    let cli = Cli::parse();
    configure_threads();
    if let Err(err) = dispatch(&cli.command) {
        eprintln!("{}", envelope::to_canonical_json(&err.to_json()).trim_end());
        std::process::exit(1);
    }
}
