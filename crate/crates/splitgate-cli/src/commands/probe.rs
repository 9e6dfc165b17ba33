//! `probe`: test an observed MCC against the random-label null.

use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::{json, Value};
use splitgate_core::leakstats::{
    leakage_probe, leakage_probe_folds, sample_null_mcc, NullDistribution,
};

use crate::args::ProbeModeArg;
use crate::envelope::{envelope, flags_object, write_document};
use crate::error::CliError;

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// Observed MCC of the model under test
    #[arg(long, conflicts_with = "fold_mccs")]
    pub observed: Option<f64>,
    /// Comma-separated per-fold MCCs, tested against the null median
    #[arg(long)]
    pub fold_mccs: Option<String>,
    /// Null distribution JSON from `null-test`; sampled inline when absent
    #[arg(long)]
    pub null: Option<PathBuf>,
    /// Simulated test-set size, when sampling inline
    #[arg(long, requires = "seed")]
    pub n_test: Option<usize>,
    /// Class count, when sampling inline
    #[arg(long)]
    pub classes: Option<usize>,
    /// Monte-Carlo iterations, when sampling inline
    #[arg(long, default_value_t = 10000)]
    pub iters: usize,
    /// Sampling seed, when sampling inline
    #[arg(long)]
    pub seed: Option<u64>,
    /// Significance level
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Which labels the probe run randomized
    #[arg(long, value_enum, default_value = "train-only")]
    pub mode: ProbeModeArg,
    /// Report path; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Accept the `null-test` envelope or a bare NullDistribution document.
fn load_null(path: &Path) -> Result<NullDistribution, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new("io", format!("reading {} failed: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)?;
    let body = if value.get("samples").is_some() {
        &value
    } else {
        value.get("result").unwrap_or(&value)
    };
    serde_json::from_value(body.clone()).map_err(|e| {
        CliError::new(
            "bad_null",
            format!("{} is not a null distribution: {e}", path.display()),
        )
    })
}

fn parse_fold_mccs(raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>().map_err(|_| {
                CliError::new("bad_flag", format!("--fold-mccs entry {s:?} is not a number"))
            })
        })
        .collect()
}

pub fn run(args: &ProbeArgs) -> Result<(), CliError> {
    let dist = match (&args.null, args.n_test, args.classes) {
        (Some(path), _, _) => load_null(path)?,
        (None, Some(n_test), Some(classes)) => {
            let seed = args.seed.ok_or_else(|| {
                CliError::new("bad_flag", "sampling a null inline requires --seed")
            })?;
            sample_null_mcc(n_test, classes, args.iters, seed)?
        }
        _ => {
            return Err(CliError::new(
                "bad_flag",
                "give --null, or --n-test with --classes and --seed to sample inline",
            ))
        }
    };

    let folds = args.fold_mccs.as_deref().map(parse_fold_mccs).transpose()?;
    let report = match (&folds, args.observed) {
        (Some(folds), None) => {
            leakage_probe_folds(folds, &dist, args.alpha, args.mode.to_core())?
        }
        (None, Some(observed)) => leakage_probe(observed, &dist, args.alpha, args.mode.to_core())?,
        _ => {
            return Err(CliError::new(
                "bad_flag",
                "exactly one of --observed and --fold-mccs is required",
            ))
        }
    };

    let flags = flags_object(vec![
        ("observed", json!(args.observed)),
        ("fold_mccs", json!(folds)),
        (
            "null",
            json!(args.null.as_ref().map(|p| p.display().to_string())),
        ),
        ("n_test", json!(dist.n_test)),
        ("classes", json!(dist.class_counts.len())),
        ("iters", json!(dist.iters)),
        ("seed", json!(dist.seed)),
        ("alpha", json!(args.alpha)),
        ("mode", json!(args.mode.as_str())),
        (
            "out",
            json!(args.out.as_ref().map(|p| p.display().to_string())),
        ),
    ]);
    let result = json!({
        "probe": report,
        "null": {
            "iters": dist.iters,
            "n_test": dist.n_test,
            "classes": dist.class_counts.len(),
            "seed": dist.seed,
        },
    });
    write_document(args.out.as_deref(), &envelope("probe", flags, result))
}
