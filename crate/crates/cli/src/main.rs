//! `fhjlab` command-line interface.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 compute error,
//! 3 suite failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fhjlab::config::parse_config;
use fhjlab::runner::run_scenario;
use fhjlab::suite::{run_suite, SuiteName};
use fhjlab_core::convolution::{
    inf_convolution, lipschitz_seminorm, semiconvexity_modulus, sup_convolution, ConvolutionParam,
};
use fhjlab_core::nonlocal::{
    extremal_minus, extremal_plus, frac_laplacian_quadrature, frac_laplacian_spectral,
};
use fhjlab_core::{
    read_field, write_csv, write_field, EllipticityBounds, FieldData, FractionalOrder,
    QuadratureScheme, ScalarField,
};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_COMPUTE: u8 = 2;
const EXIT_SUITE_FAIL: u8 = 3;

#[derive(Parser)]
#[command(name = "fhjlab", version, about = "Numerical laboratory for critical Hamilton-Jacobi equations with fractional diffusion")]
struct Cli {
    /// Scenario configuration file (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master random seed (overrides the config seed)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; all artifacts are written below it
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker thread count (defaults to the number of cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum OperatorKind {
    /// Fractional Laplacian via the Fourier symbol
    FraclapSpectral,
    /// Fractional Laplacian via validated singular-integral quadrature
    FraclapQuadrature,
    /// Extremal operator M+
    ExtremalPlus,
    /// Extremal operator M-
    ExtremalMinus,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnvelopeMode {
    Sup,
    Inf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Apply a nonlocal operator to a stored field
    Operator {
        /// Input field file (a space-time input uses its last frame)
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        op: OperatorKind,
        /// Fractional order for the fractional Laplacian operators
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        /// Lower ellipticity bound for the extremal operators
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Upper ellipticity bound for the extremal operators
        #[arg(long, default_value_t = 1.0)]
        big_lambda: f64,
    },
    /// Sup- or inf-convolve a stored field
    Convolve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: EnvelopeMode,
        #[arg(long)]
        epsilon: f64,
    },
    /// Report the semiconvexity and Lipschitz diagnostics of a field and of
    /// its sup-envelope
    DiagnoseConvexity {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
    },
    /// Solve the configured scenario and write all artifacts
    Solve,
    /// Print summary metrics of a stored field
    Diagnose {
        #[arg(long)]
        input: PathBuf,
    },
    /// Run one named experiment, writing its tables (never fails on a
    /// negative scientific outcome)
    Experiment {
        #[arg(long)]
        name: SuiteNameArg,
    },
    /// Run one named suite; a failed check exits with code 3
    Suite {
        #[arg(long)]
        name: SuiteNameArg,
    },
    /// Parse and validate the configuration, reporting every error
    Validate,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteNameArg {
    PointEstimate,
    DiminishOsc,
    HolderFit,
    Bootstrap,
    Shock,
    Principles,
}

impl From<SuiteNameArg> for SuiteName {
    fn from(v: SuiteNameArg) -> SuiteName {
        match v {
            SuiteNameArg::PointEstimate => SuiteName::PointEstimate,
            SuiteNameArg::DiminishOsc => SuiteName::DiminishOsc,
            SuiteNameArg::HolderFit => SuiteName::HolderFit,
            SuiteNameArg::Bootstrap => SuiteName::Bootstrap,
            SuiteNameArg::Shock => SuiteName::Shock,
            SuiteNameArg::Principles => SuiteName::Principles,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        // ignore the error if a pool already exists (tests, repeated init)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    ExitCode::from(dispatch(&cli))
}

fn load_scalar(path: &PathBuf) -> Result<ScalarField, String> {
    match read_field(path).map_err(|e| format!("reading {}: {e}", path.display()))? {
        FieldData::Scalar(f) => Ok(f),
        FieldData::SpaceTime(f) => Ok(f.frames().last().unwrap().clone()),
    }
}

fn write_scalar_outputs(
    out_dir: &PathBuf,
    stem: &str,
    field: &ScalarField,
) -> Result<(), String> {
    fs::create_dir_all(out_dir).map_err(|e| format!("creating {}: {e}", out_dir.display()))?;
    let data = FieldData::Scalar(field.clone());
    let fpath = out_dir.join(format!("{stem}.field"));
    write_field(&fpath, &data).map_err(|e| format!("writing {}: {e}", fpath.display()))?;
    let cpath = out_dir.join(format!("{stem}.csv"));
    let mut buf = Vec::new();
    write_csv(&mut buf, &data).map_err(|e| e.to_string())?;
    fs::write(&cpath, buf).map_err(|e| format!("writing {}: {e}", cpath.display()))?;
    println!("{}", fpath.display());
    println!("{}", cpath.display());
    Ok(())
}

fn compute_err(msg: String) -> u8 {
    eprintln!("error: {msg}");
    EXIT_COMPUTE
}

fn dispatch(cli: &Cli) -> u8 {
    match &cli.cmd {
        Cmd::Operator {
            input,
            op,
            s,
            lambda,
            big_lambda,
        } => {
            let field = match load_scalar(input) {
                Ok(f) => f,
                Err(e) => return compute_err(e),
            };
            let scheme = QuadratureScheme::default_for(&field.grid());
            let result = match op {
                OperatorKind::FraclapSpectral => FractionalOrder::new(*s)
                    .and_then(|s| frac_laplacian_spectral(&field, s)),
                OperatorKind::FraclapQuadrature => FractionalOrder::new(*s)
                    .and_then(|s| frac_laplacian_quadrature(&field, s, &scheme)),
                OperatorKind::ExtremalPlus => EllipticityBounds::new(*lambda, *big_lambda)
                    .and_then(|b| extremal_plus(&field, b, &scheme)),
                OperatorKind::ExtremalMinus => EllipticityBounds::new(*lambda, *big_lambda)
                    .and_then(|b| extremal_minus(&field, b, &scheme)),
            };
            match result {
                Ok(out) => match write_scalar_outputs(&cli.out, "operator", &out) {
                    Ok(()) => EXIT_OK,
                    Err(e) => compute_err(e),
                },
                Err(e) => compute_err(e.to_string()),
            }
        }
        Cmd::Convolve {
            input,
            mode,
            epsilon,
        } => {
            let field = match load_scalar(input) {
                Ok(f) => f,
                Err(e) => return compute_err(e),
            };
            let param = match ConvolutionParam::new(*epsilon) {
                Ok(p) => p,
                Err(e) => return compute_err(e.to_string()),
            };
            let out = match mode {
                EnvelopeMode::Sup => sup_convolution(&field, param),
                EnvelopeMode::Inf => inf_convolution(&field, param),
            };
            match write_scalar_outputs(&cli.out, "convolved", &out) {
                Ok(()) => EXIT_OK,
                Err(e) => compute_err(e),
            }
        }
        Cmd::DiagnoseConvexity { input, epsilon } => {
            let field = match load_scalar(input) {
                Ok(f) => f,
                Err(e) => return compute_err(e),
            };
            let param = match ConvolutionParam::new(*epsilon) {
                Ok(p) => p,
                Err(e) => return compute_err(e.to_string()),
            };
            let sup = sup_convolution(&field, param);
            let report = serde_json::json!({
                "epsilon": epsilon,
                "semiconvexity_modulus": semiconvexity_modulus(&field),
                "sup_envelope_semiconvexity_modulus": semiconvexity_modulus(&sup),
                "semiconvexity_bound": 2.0 / epsilon,
                "lipschitz_seminorm": lipschitz_seminorm(&field),
                "sup_envelope_lipschitz_seminorm": lipschitz_seminorm(&sup),
                "lipschitz_bound": 2.0 * (field.max_abs() / epsilon).sqrt(),
            });
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            EXIT_OK
        }
        Cmd::Solve => {
            let Some(config_path) = &cli.config else {
                eprintln!("error: solve requires --config PATH");
                return EXIT_USAGE;
            };
            let text = match fs::read_to_string(config_path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: reading {}: {e}", config_path.display());
                    return EXIT_USAGE;
                }
            };
            let mut cfg = match parse_config(&text) {
                Ok(c) => c,
                Err(errs) => {
                    for e in errs {
                        eprintln!("config error: {e}");
                    }
                    return EXIT_USAGE;
                }
            };
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            match run_scenario(&cfg, &text, &cli.out) {
                Ok(m) => {
                    println!("wrote {} artifacts to {}", m.outputs.len(), cli.out.display());
                    EXIT_OK
                }
                Err(e) => compute_err(format!("{e:#}")),
            }
        }
        Cmd::Diagnose { input } => {
            let field = match load_scalar(input) {
                Ok(f) => f,
                Err(e) => return compute_err(e),
            };
            let g = field.grid();
            let report = serde_json::json!({
                "dim": g.dim(),
                "n_points": g.n_points(),
                "period": g.period(),
                "max": field.max(),
                "min": field.min(),
                "max_abs": field.max_abs(),
                "lipschitz_seminorm": lipschitz_seminorm(&field),
                "semiconvexity_modulus": semiconvexity_modulus(&field),
            });
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            EXIT_OK
        }
        Cmd::Experiment { name } => match run_suite((*name).into(), cli.seed.unwrap_or(0), &cli.out)
        {
            Ok(outcome) => {
                for line in &outcome.lines {
                    println!("{line}");
                }
                EXIT_OK
            }
            Err(e) => compute_err(format!("{e:#}")),
        },
        Cmd::Suite { name } => match run_suite((*name).into(), cli.seed.unwrap_or(0), &cli.out) {
            Ok(outcome) => {
                for line in &outcome.lines {
                    println!("{line}");
                }
                if outcome.passed {
                    println!("suite {}: PASS", outcome.name);
                    EXIT_OK
                } else {
                    println!("suite {}: FAIL", outcome.name);
                    EXIT_SUITE_FAIL
                }
            }
            Err(e) => compute_err(format!("{e:#}")),
        },
        Cmd::Validate => {
            let Some(config_path) = &cli.config else {
                eprintln!("error: validate requires --config PATH");
                return EXIT_USAGE;
            };
            let text = match fs::read_to_string(config_path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: reading {}: {e}", config_path.display());
                    return EXIT_USAGE;
                }
            };
            match parse_config(&text) {
                Ok(cfg) => {
                    println!("ok: {} scenario on a {}^{} grid", cfg.equation.as_str(), cfg.grid_n_points, cfg.grid_dim);
                    EXIT_OK
                }
                Err(errs) => {
                    for e in &errs {
                        eprintln!("config error: {e}");
                    }
                    eprintln!("{} error(s)", errs.len());
                    EXIT_USAGE
                }
            }
        }
    }
}
