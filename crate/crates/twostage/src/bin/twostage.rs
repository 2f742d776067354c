//! Command-line front end: reproduce the comparison table, generate the
//! experiment datasets, and train/evaluate individual models.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 training failure,
//! 3 golden-check failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use twostage::dataset::{
    generate_conditioned_inhibition, load_dataset, save_dataset, Dataset, Variant,
};
use twostage::harness::{
    golden_checks, render_report, run_table_experiment, ReportFormat, Rounding,
};
use twostage::linear::{train, ModelKind, TrainingConfig};
use twostage::model_file::ModelFile;
use twostage::svr::{svr_fit, SvrParams};
use twostage::two_stage::train_two_stage;

#[derive(Parser)]
#[command(
    name = "twostage",
    about = "Conditioned-inhibition benchmark: LMS and epsilon-SVR value-function \
             approximators versus the two-stage rectified architecture"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Markdown,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoundArg {
    Tenths,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Full,
    Partial,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Lms,
    Rlms,
    Svr,
    TwoStage,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    #[value(name = "RV", alias = "rv")]
    Rv,
    #[value(name = "P", alias = "p")]
    P,
    #[value(name = "N", alias = "n")]
    N,
}

#[derive(Subcommand)]
enum Command {
    /// Train all six models and print the comparison table.
    RunTable {
        /// Noise scale sigma for the gradient-trained models.
        #[arg(long, default_value_t = 1e-4)]
        sigma: f64,
        #[arg(long, default_value_t = 10.0)]
        svr_cost: f64,
        #[arg(long, default_value_t = 1e-5)]
        svr_epsilon: f64,
        /// RBF kernel width; defaults to 1 / feature count.
        #[arg(long, default_value_t = 0.25)]
        svr_gamma: f64,
        #[arg(long, value_enum, default_value_t = FormatArg::Markdown)]
        format: FormatArg,
        #[arg(long, value_enum, default_value_t = RoundArg::Tenths)]
        round: RoundArg,
        /// Verify the rendered table against the published values.
        #[arg(long)]
        check: bool,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the full or partial experiment dataset as CSV.
    GenData {
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a single model on a dataset file and save it.
    Train {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        data: PathBuf,
        /// Prediction target column (ignored by two-stage, which always
        /// trains one channel per reinforcer column).
        #[arg(long, value_enum, default_value_t = TargetArg::Rv)]
        target: TargetArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1e-4)]
        sigma: f64,
    },
    /// Evaluate a saved model on every row of a dataset file.
    Predict {
        #[arg(long)]
        model_file: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
}

enum CliError {
    Input(String),
    Training(String),
    CheckFailed,
}

impl From<CliError> for ExitCode {
    fn from(e: CliError) -> ExitCode {
        match e {
            CliError::Input(_) => ExitCode::from(1),
            CliError::Training(_) => ExitCode::from(2),
            CliError::CheckFailed => ExitCode::from(3),
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
    }
}

fn targets(data: &Dataset, target: TargetArg) -> Result<Vec<f64>, CliError> {
    match target {
        TargetArg::Rv => Ok(data.reward_targets()),
        TargetArg::P => data
            .reinforcer_targets("P")
            .ok_or_else(|| CliError::Input("dataset has no P column".into())),
        TargetArg::N => data
            .reinforcer_targets("N")
            .ok_or_else(|| CliError::Input("dataset has no N column".into())),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::RunTable {
            sigma,
            svr_cost,
            svr_epsilon,
            svr_gamma,
            format,
            round,
            check,
            out,
        } => {
            let config = TrainingConfig {
                sigma,
                ..TrainingConfig::default()
            };
            let svr_params = SvrParams {
                cost: svr_cost,
                epsilon_tube: svr_epsilon,
                kernel: twostage::svr::Kernel::Rbf { gamma: svr_gamma },
                ..SvrParams::for_features(4)
            };
            let report = run_table_experiment(&config, &svr_params)
                .map_err(|e| CliError::Training(e.to_string()))?;
            let format = match format {
                FormatArg::Csv => ReportFormat::Csv,
                FormatArg::Markdown => ReportFormat::Markdown,
                FormatArg::Json => ReportFormat::Json,
            };
            let rounding = match round {
                RoundArg::Tenths => Rounding::Tenths,
                RoundArg::Raw => Rounding::Raw,
            };
            emit(&out, &render_report(&report, format, rounding))?;
            if check {
                let results = golden_checks(&report);
                let mut all_passed = true;
                for r in &results {
                    let status = if r.passed { "PASS" } else { "FAIL" };
                    eprintln!("[{status}] {} ({})", r.name, r.detail);
                    all_passed &= r.passed;
                }
                if !all_passed {
                    return Err(CliError::CheckFailed);
                }
            }
            Ok(())
        }
        Command::GenData { variant, out } => {
            let variant = match variant {
                VariantArg::Full => Variant::Full,
                VariantArg::Partial => Variant::Partial,
            };
            let ds = generate_conditioned_inhibition(variant);
            save_dataset(&ds, &out).map_err(|e| CliError::Input(e.to_string()))
        }
        Command::Train {
            model,
            data,
            target,
            out,
            sigma,
        } => {
            let ds = load_dataset(&data).map_err(|e| CliError::Input(e.to_string()))?;
            let config = TrainingConfig {
                sigma,
                ..TrainingConfig::default()
            };
            let file = match model {
                ModelArg::Lms | ModelArg::Rlms => {
                    let kind = match model {
                        ModelArg::Lms => ModelKind::Lms,
                        _ => ModelKind::RectifiedLms,
                    };
                    let ys = targets(&ds, target)?;
                    let (weights, _) = train(kind, &ds.inputs(), &ys, &config)
                        .map_err(|e| CliError::Training(e.to_string()))?;
                    match kind {
                        ModelKind::Lms => ModelFile::Lms { weights, config },
                        ModelKind::RectifiedLms => ModelFile::RectifiedLms { weights, config },
                    }
                }
                ModelArg::Svr => {
                    let ys = targets(&ds, target)?;
                    let params = SvrParams::for_features(ds.feature_dim());
                    let svr = svr_fit(&ds.inputs(), &ys, &params)
                        .map_err(|e| CliError::Training(e.to_string()))?;
                    ModelFile::Svr(svr)
                }
                ModelArg::TwoStage => {
                    let two = train_two_stage(&ds, &config, true)
                        .map_err(|e| CliError::Training(e.to_string()))?;
                    ModelFile::TwoStage(two)
                }
            };
            file.save(&out).map_err(|e| CliError::Input(e.to_string()))
        }
        Command::Predict { model_file, data } => {
            let model =
                ModelFile::load(&model_file).map_err(|e| CliError::Input(e.to_string()))?;
            let ds = load_dataset(&data).map_err(|e| CliError::Input(e.to_string()))?;
            for x in ds.inputs() {
                let p = model
                    .predict(&x)
                    .map_err(|e| CliError::Input(e.to_string()))?;
                println!("{p}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful exits
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Input(msg) | CliError::Training(msg) => eprintln!("error: {msg}"),
                CliError::CheckFailed => eprintln!("error: golden checks failed"),
            }
            e.into()
        }
    }
}
