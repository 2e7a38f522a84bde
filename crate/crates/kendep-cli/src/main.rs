use clap::{Args, Parser, Subcommand};
use kendep::distributions::{
    sample_archimedean, sample_bivariate_family, sample_equicorrelated_normal, sample_fgm,
    sample_general_normal, ArchimedeanFamily, BivariateFamily, CopulaSpec, EquicorrelatedSpec,
    FgmVariant,
};
use kendep_cli::cache::CalibrationCache;
use kendep_cli::commands::{
    cmd_calibrate, cmd_index, cmd_kplot, cmd_simulate, cmd_test, dataset_inputs, CalibrateOptions,
    PhiPolicy, TestOptions,
};
use kendep_cli::csvio::{ingest_csv, write_text, Dataset};
use kendep_cli::error::{CliError, Result};
use kendep_cli::report::ReportEnvelope;
use kendep_cli::reproduce::reproduce_table;
use serde_json::json;
use std::path::{Path, PathBuf};

/// Kendall-curve dependence indices and the AUK test of total independence.
#[derive(Parser)]
#[command(name = "kendep", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// CSV input path, or `biomarkers` for the bundled fixture
    #[arg(long)]
    input: String,
    /// Comma-separated column names (or 1-based indices) to keep
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<String>>,
}

impl InputArgs {
    fn load(&self) -> Result<Dataset> {
        let base = if self.input == "biomarkers" {
            kendep_cli::fixtures::biomarkers()
        } else {
            ingest_csv(Path::new(&self.input), None)?
        };
        match &self.columns {
            Some(cols) => kendep_cli::csvio::select_columns(&base, cols),
            None => Ok(base),
        }
    }
}

#[derive(Args)]
struct CacheArgs {
    /// Calibration cache path (default: $KENDEP_CACHE or ./kendep_cache.json)
    #[arg(long)]
    cache: Option<PathBuf>,
}

impl CacheArgs {
    fn load(&self) -> Result<(CalibrationCache, PathBuf)> {
        let path = CalibrationCache::resolve_path(self.cache.as_deref());
        Ok((CalibrationCache::load(&path)?, path))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Dependence indices I and I* (optionally for all 2-/3-subvectors)
    Index {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        cache: CacheArgs,
        /// Also analyze every 2- and 3-column subvector
        #[arg(long)]
        subvectors: bool,
        /// Fail instead of calibrating a missing standardizer
        #[arg(long)]
        no_calibrate: bool,
        /// Seed for any fresh calibration
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON report here instead of stdout
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Test total independence of the columns
    Test {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        cache: CacheArgs,
        /// Significance level (0.10, 0.05 or 0.01 for calibrated decisions)
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Always use the asymptotic normal critical value
        #[arg(long)]
        asymptotic: bool,
        /// Fail instead of calibrating missing percentiles
        #[arg(long)]
        no_calibrate: bool,
        /// Replicates for on-the-fly percentile calibration
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Calibrate sigma, the standardizer and optional percentiles for a dimension
    Calibrate {
        #[command(flatten)]
        cache: CacheArgs,
        /// Dimension to calibrate
        #[arg(long)]
        dim: usize,
        /// Also calibrate |z| percentiles for this sample size
        #[arg(short = 'n', long)]
        n: Option<usize>,
        /// Replicates for the percentile simulation
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Draw a seeded sample from a named family and write it as CSV
    Simulate {
        /// Family: normal | clayton | frank | gumbel | joe | fgm-c |
        /// fgm-ctilde | circle | biexp | morgenstern | plackett | alihaq |
        /// gumbel-exp | t5 | inverse-square-noise | ratio-noise
        #[arg(long)]
        family: String,
        /// Dimension (families with a free dimension)
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Copula / correlation parameter
        #[arg(long, allow_negative_numbers = true)]
        theta: Option<f64>,
        /// Equicorrelation for the normal family
        #[arg(long, allow_negative_numbers = true)]
        rho: Option<f64>,
        /// Upper-triangle correlations r12,r13,...,r(d-1)d for the normal family
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        rho_pairs: Option<Vec<f64>>,
        /// Rates l1,l2,l12 for the biexp family
        #[arg(long, value_delimiter = ',')]
        lambda: Option<Vec<f64>>,
        /// Parameters a,p for the alihaq family
        #[arg(long, value_delimiter = ',')]
        ap: Option<Vec<f64>>,
        #[arg(short = 'n', long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Kendall curves for every rotation plus the class-membership check
    Kplot {
        #[command(flatten)]
        input: InputArgs,
        /// Curve grid size
        #[arg(long, default_value_t = 512)]
        grid: usize,
        /// Tolerance band (default: the 95% DKW band)
        #[arg(long)]
        tolerance: Option<f64>,
        /// Output CSV path for the curves
        #[arg(long)]
        out: PathBuf,
        /// Write the decision JSON here instead of stdout
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Re-run a reference table and compare every cell
    Reproduce {
        #[command(flatten)]
        cache: CacheArgs,
        /// Table id: T1, T2, T3a-T3j, T4a-T4h, T5a-T5h, T6, T7, T8, TS
        table: String,
        /// Fraction of the original replication count (default per table)
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for the table CSV and the comparison summary
        #[arg(long, default_value = "reproduce-out")]
        out: PathBuf,
    },
}

fn emit(json: &Option<PathBuf>, text: &str) -> Result<()> {
    match json {
        Some(path) => write_text(path, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Index {
            input,
            cache,
            subvectors,
            no_calibrate,
            seed,
            json,
        } => {
            let dataset = input.load()?;
            let (mut cal, path) = cache.load()?;
            let policy = PhiPolicy {
                no_calibration: no_calibrate,
                seed,
                ..Default::default()
            };
            let results = cmd_index(&dataset, subvectors, &mut cal, &policy)?;
            cal.save(&path)?;
            let envelope = ReportEnvelope::new(
                "index",
                dataset_inputs(&dataset),
                json!({ "seed": seed, "cache": path.display().to_string() }),
                results,
            );
            emit(&json, &envelope.to_json()?)
        }
        Command::Test {
            input,
            cache,
            alpha,
            asymptotic,
            no_calibrate,
            reps,
            seed,
            json,
        } => {
            let dataset = input.load()?;
            let (mut cal, path) = cache.load()?;
            let options = TestOptions {
                alpha,
                asymptotic,
                allow_calibration: !no_calibrate,
                reps,
                seed,
            };
            let report = cmd_test(&dataset, &options, &mut cal)?;
            cal.save(&path)?;
            let envelope = ReportEnvelope::new(
                "test",
                dataset_inputs(&dataset),
                json!({ "seed": seed, "reps": reps, "cache": path.display().to_string() }),
                report,
            );
            emit(&json, &envelope.to_json()?)
        }
        Command::Calibrate {
            cache,
            dim,
            n,
            reps,
            seed,
            json,
        } => {
            let (mut cal, path) = cache.load()?;
            let mut options = CalibrateOptions::new(dim);
            options.n = n;
            options.reps = reps;
            options.seed = seed;
            let results = cmd_calibrate(&options, &mut cal)?;
            cal.save(&path)?;
            let envelope = ReportEnvelope::new(
                "calibrate",
                json!({ "dim": dim, "n": n, "reps": reps }),
                json!({ "seed": seed, "cache": path.display().to_string() }),
                results,
            );
            emit(&json, &envelope.to_json()?)
        }
        Command::Simulate {
            family,
            dim,
            theta,
            rho,
            rho_pairs,
            lambda,
            ap,
            n,
            seed,
            out,
        } => {
            let sample = simulate_family(
                &family,
                dim,
                theta,
                rho,
                rho_pairs.as_deref(),
                lambda.as_deref(),
                ap.as_deref(),
                n,
                seed,
            )?;
            write_text(&out, &cmd_simulate(&sample))?;
            eprintln!(
                "wrote {} rows x {} columns to {}",
                sample.n(),
                sample.d(),
                out.display()
            );
            Ok(())
        }
        Command::Kplot {
            input,
            grid,
            tolerance,
            out,
            json,
        } => {
            let dataset = input.load()?;
            let (csv, results) = cmd_kplot(&dataset, grid, tolerance)?;
            write_text(&out, &csv)?;
            let envelope = ReportEnvelope::new(
                "kplot",
                dataset_inputs(&dataset),
                json!({ "grid": grid }),
                results,
            );
            emit(&json, &envelope.to_json()?)
        }
        Command::Reproduce {
            cache,
            table,
            scale,
            seed,
            out,
        } => {
            let (mut cal, path) = cache.load()?;
            let run = reproduce_table(&table, scale, seed, &mut cal)?;
            cal.save(&path)?;
            write_text(&out.join(format!("{}.csv", run.id)), &run.csv)?;
            write_text(
                &out.join(format!("{}_summary.csv", run.id)),
                &run.summary_csv(),
            )?;
            for c in &run.comparisons {
                println!(
                    "{} {}: expected {} observed {} (tol {}) -> {}",
                    run.id,
                    c.cell,
                    c.expected,
                    c.observed,
                    c.tolerance,
                    if c.pass { "ok" } else { "MISS" }
                );
            }
            println!(
                "{}: {}/{} cells within tolerance (outputs in {})",
                run.id,
                run.cells_passed,
                run.cells_total,
                out.display()
            );
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate_family(
    family: &str,
    dim: usize,
    theta: Option<f64>,
    rho: Option<f64>,
    rho_pairs: Option<&[f64]>,
    lambda: Option<&[f64]>,
    ap: Option<&[f64]>,
    n: usize,
    seed: u64,
) -> Result<kendep::Sample> {
    let need_theta =
        || theta.ok_or_else(|| CliError::Config(format!("family {family:?} needs --theta")));
    let arch = |fam: ArchimedeanFamily| -> Result<kendep::Sample> {
        let spec = CopulaSpec::new(fam, need_theta()?, dim)?;
        Ok(sample_archimedean(&spec, n, seed)?)
    };
    match family {
        "normal" => {
            if let Some(pairs) = rho_pairs {
                let expect = dim * (dim - 1) / 2;
                if pairs.len() != expect {
                    return Err(CliError::Config(format!(
                        "--rho-pairs needs {expect} values for d = {dim}"
                    )));
                }
                let mut sigma = vec![vec![0.0; dim]; dim];
                let mut pair = pairs.iter();
                // fills the upper and the mirrored lower triangle at once
                #[allow(clippy::needless_range_loop)]
                for i in 0..dim {
                    sigma[i][i] = 1.0;
                    for j in (i + 1)..dim {
                        let r = *pair.next().expect("length checked");
                        sigma[i][j] = r;
                        sigma[j][i] = r;
                    }
                }
                Ok(sample_general_normal(&sigma, n, seed)?)
            } else {
                let rho = rho
                    .ok_or_else(|| CliError::Config("normal needs --rho or --rho-pairs".into()))?;
                let spec = EquicorrelatedSpec::new(dim, rho)?;
                Ok(sample_equicorrelated_normal(&spec, n, seed)?)
            }
        }
        "clayton" => arch(ArchimedeanFamily::Clayton),
        "frank" => arch(ArchimedeanFamily::Frank),
        "gumbel" => arch(ArchimedeanFamily::Gumbel),
        "joe" => arch(ArchimedeanFamily::Joe),
        "fgm-c" => Ok(sample_fgm(FgmVariant::Pair, need_theta()?, n, seed)?),
        "fgm-ctilde" => Ok(sample_fgm(FgmVariant::Triple, need_theta()?, n, seed)?),
        "circle" => Ok(sample_bivariate_family(
            BivariateFamily::CircleUniform,
            n,
            seed,
        )?),
        "biexp" => {
            let l = lambda
                .filter(|l| l.len() == 3)
                .ok_or_else(|| CliError::Config("biexp needs --lambda l1,l2,l12".into()))?;
            Ok(sample_bivariate_family(
                BivariateFamily::Exponential {
                    lambda1: l[0],
                    lambda2: l[1],
                    lambda12: l[2],
                },
                n,
                seed,
            )?)
        }
        "morgenstern" => Ok(sample_bivariate_family(
            BivariateFamily::Morgenstern {
                alpha: need_theta()?,
            },
            n,
            seed,
        )?),
        "plackett" => Ok(sample_bivariate_family(
            BivariateFamily::Plackett { s: need_theta()? },
            n,
            seed,
        )?),
        "alihaq" => {
            let ap = ap
                .filter(|v| v.len() == 2)
                .ok_or_else(|| CliError::Config("alihaq needs --ap a,p".into()))?;
            Ok(sample_bivariate_family(
                BivariateFamily::AliHaq { a: ap[0], p: ap[1] },
                n,
                seed,
            )?)
        }
        "gumbel-exp" => Ok(sample_bivariate_family(
            BivariateFamily::GumbelExponential { e: need_theta()? },
            n,
            seed,
        )?),
        "t5" => Ok(sample_bivariate_family(
            BivariateFamily::StudentT5,
            n,
            seed,
        )?),
        "inverse-square-noise" => Ok(sample_bivariate_family(
            BivariateFamily::InverseSquareNoise,
            n,
            seed,
        )?),
        "ratio-noise" => Ok(sample_bivariate_family(
            BivariateFamily::RatioNoise,
            n,
            seed,
        )?),
        other => Err(CliError::Config(format!(
            "unknown family {other:?}; see `kendep simulate --help`"
        ))),
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        let mut source = std::error::Error::source(&e);
        while let Some(s) = source {
            eprintln!("  caused by: {s}");
            source = s.source();
        }
        std::process::exit(1);
    }
}
