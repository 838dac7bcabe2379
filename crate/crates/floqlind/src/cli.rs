//! Command-line front end for the labeling, dataset, training, evaluation,
//! and diagram pipeline.
//!
//! Exit codes: 0 for success (and a yes verdict), 2 for usage, validation,
//! or file errors, 3 for a no verdict, 4 when the requested point is flagged
//! as unlabelable or its output is marked unreliable.

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::dataset::{
    self, read_csv, write_csv, GridSpec, LabeledRow, SkipRecord, Sweep,
};
use crate::diagram::{self, PartitionGrid};
use crate::error::{Error, Result};
use crate::features::{feature_vector, Scheme};
use crate::floquet::floquet_map;
use crate::lindblad::{ModelSpec, Problem};
use crate::markov::decide_markovianity;
use crate::ml::{
    self, default_grid, evaluate, grid_search, load_model, save_model, train, ClassifierSpec,
    MetricsReport, TrainedModel,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NO: u8 = 3;
pub const EXIT_FLAGGED: u8 = 4;

#[derive(Parser)]
#[command(name = "floqlind", version, about = "Floquet-Lindbladian analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether one driven point admits a time-independent generator.
    Label(LabelArgs),
    /// Sweep a parameter grid into a labeled, featurized CSV dataset.
    ///
    /// Labels and distances are per (problem, E, omega): the one-period
    /// maps at different drive offsets are similar matrices describing one
    /// periodic process, so every phase shares the zero-offset verdict
    /// while features encode the Choi matrix at the row's own phase.
    Dataset(DatasetArgs),
    /// Print the feature vector of a single point.
    Features(FeaturesArgs),
    /// Fit a classifier on a dataset CSV and serialize it.
    Train(TrainArgs),
    /// Score a serialized model against labeled CSV files.
    Eval(EvalArgs),
    /// Emit the yes/no partition of the (E, omega) plane as CSV and SVG.
    Diagram(DiagramArgs),
}

#[derive(Args)]
struct PointArgs {
    /// Driving model: I or II.
    #[arg(long, default_value = "I")]
    problem: String,
    /// Driving amplitude.
    #[arg(long = "E")]
    e: f64,
    /// Driving frequency; the period is 2*pi over this.
    #[arg(long)]
    omega: f64,
    /// Driving phase offset.
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
}

impl PointArgs {
    fn model(&self) -> Result<ModelSpec> {
        let problem: Problem = self.problem.parse()?;
        let build = match problem {
            Problem::I => ModelSpec::problem_i,
            Problem::II => ModelSpec::problem_ii,
            Problem::Custom => {
                return Err(Error::UnsupportedModel(
                    "the command line drives the named problems only".into(),
                ))
            }
        };
        let model = build(self.e, self.omega, self.phi);
        model.validate()?;
        Ok(model)
    }
}

#[derive(Args)]
struct LabelArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Print the full report as JSON instead of prose.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GridArgs {
    /// Problems to sweep; repeat for both (I, II).
    #[arg(long = "problem", default_value = "I")]
    problems: Vec<String>,
    /// Phases: "train", "test", or comma-separated values.
    #[arg(long, default_value = "train")]
    phases: String,
    /// Amplitude axis maximum (the minimum is 0).
    #[arg(long, default_value_t = std::f64::consts::PI)]
    e_max: f64,
    /// Amplitude axis step.
    #[arg(long, default_value_t = std::f64::consts::PI / 25.0)]
    e_step: f64,
    /// Frequency axis minimum; must stay positive.
    #[arg(long, default_value_t = std::f64::consts::PI / 25.0)]
    omega_min: f64,
    /// Frequency axis maximum.
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
    omega_max: f64,
    /// Frequency axis step.
    #[arg(long, default_value_t = std::f64::consts::PI / 25.0)]
    omega_step: f64,
}

impl GridArgs {
    fn grid(&self, phases: Vec<f64>) -> Result<GridSpec> {
        let problems = self
            .problems
            .iter()
            .map(|p| p.parse::<Problem>())
            .collect::<Result<Vec<_>>>()?;
        let grid = GridSpec {
            e_min: 0.0,
            e_max: self.e_max,
            e_step: self.e_step,
            omega_min: self.omega_min,
            omega_max: self.omega_max,
            omega_step: self.omega_step,
            phases,
            problems,
        };
        grid.validate()?;
        Ok(grid)
    }
}

#[derive(Args)]
struct DatasetArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Feature encoding scheme.
    #[arg(long, default_value = "eigensystem_normalized")]
    scheme: String,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Skip-report CSV path; defaults to the output with a .skips.csv suffix.
    #[arg(long)]
    skips: Option<PathBuf>,
}

#[derive(Args)]
struct FeaturesArgs {
    #[command(flatten)]
    point: PointArgs,
    #[arg(long, default_value = "eigensystem_normalized")]
    scheme: String,
}

#[derive(Args)]
struct TrainArgs {
    /// Training dataset CSV.
    #[arg(long)]
    data: PathBuf,
    /// Validation dataset CSV; when absent, --split carves one off.
    #[arg(long)]
    val: Option<PathBuf>,
    /// Training fraction of --data when no validation file is given.
    #[arg(long, default_value_t = 0.9)]
    split: f64,
    /// Shuffle and training seed.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Algorithm: knn, decision_tree, random_forest, adaboost, mlp,
    /// gaussian_nb, lda, qda, or "grid" for a full hyperparameter search.
    #[arg(long)]
    algorithm: String,
    /// Neighbors for knn.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Depth cap for decision_tree and random_forest.
    #[arg(long, default_value_t = 9)]
    depth: usize,
    /// Tree count for random_forest.
    #[arg(long, default_value_t = 300)]
    trees: usize,
    /// Stage count for adaboost.
    #[arg(long, default_value_t = 300)]
    stages: usize,
    /// Weak-learner depth for adaboost.
    #[arg(long, default_value_t = 2)]
    stump_depth: usize,
    /// Hidden layer sizes for mlp, comma separated.
    #[arg(long, default_value = "128")]
    hidden: String,
    /// Training epochs for mlp.
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    /// Learning rate for mlp.
    #[arg(long, default_value_t = 0.05)]
    rate: f64,
    /// Mini-batch size for mlp.
    #[arg(long, default_value_t = 32)]
    batch: usize,
    /// Output model path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Serialized model to score.
    #[arg(long)]
    model: PathBuf,
    /// Labeled CSV files to evaluate, e.g. train, validation, and test.
    #[arg(long = "data", required = true)]
    data: Vec<PathBuf>,
}

#[derive(Args)]
struct DiagramArgs {
    /// Problem the panel describes.
    #[arg(long, default_value = "I")]
    problem: String,
    /// Phase the panel describes.
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    /// Take rows from this dataset CSV instead of sweeping.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Feature scheme used when sweeping fresh rows.
    #[arg(long, default_value = "eigensystem_normalized")]
    scheme: String,
    /// Model adding prediction and disagreement panels.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    csv: PathBuf,
    /// Optional output SVG path.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Amplitude axis maximum when sweeping.
    #[arg(long, default_value_t = std::f64::consts::PI)]
    e_max: f64,
    /// Amplitude axis step when sweeping.
    #[arg(long, default_value_t = std::f64::consts::PI / 25.0)]
    e_step: f64,
    /// Frequency axis minimum when sweeping.
    #[arg(long, default_value_t = std::f64::consts::PI / 25.0)]
    omega_min: f64,
    /// Frequency axis maximum when sweeping.
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
    omega_max: f64,
    /// Frequency axis step when sweeping.
    #[arg(long, default_value_t = std::f64::consts::PI / 25.0)]
    omega_step: f64,
}

/// Parses arguments from the process environment and runs one command,
/// returning the exit code.
pub fn run() -> u8 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_point_flag() {
                EXIT_FLAGGED
            } else {
                EXIT_USAGE
            }
        }
    }
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Label(args) => cmd_label(args),
        Command::Dataset(args) => cmd_dataset(args),
        Command::Features(args) => cmd_features(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Diagram(args) => cmd_diagram(args),
    }
}

fn parse_phases(text: &str) -> Result<Vec<f64>> {
    match text {
        "train" => Ok(dataset::training_phases()),
        "test" => Ok(dataset::test_phases()),
        list => list
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("phase {p:?} is not a number")))
            })
            .collect(),
    }
}

fn cmd_label(args: LabelArgs) -> Result<u8> {
    let model = args.point.model()?;
    let map = floquet_map(&model)?;
    let report = decide_markovianity(&map)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("answer: {}", if report.answer { "yes" } else { "no" });
        match &report.witness_x {
            Some(x) => println!("witness branch: {x:?}"),
            None => println!("witness branch: none"),
        }
        println!("mu_min: {:.6e}", report.mu_min);
        println!("best branch eigenvalue: {:.6e}", report.best_min_eig);
        println!("branches searched: {}", report.branches_searched);
        if report.diagnostics.merged_degenerate_log {
            println!("note: degenerate map eigenvalues shared a merged log projector");
        }
        if report.diagnostics.tolerance_boundary {
            println!("note: verdict sits within tolerance of the boundary");
        }
    }
    if report.diagnostics.tolerance_boundary {
        return Ok(EXIT_FLAGGED);
    }
    Ok(if report.answer { EXIT_OK } else { EXIT_NO })
}

fn skip_report(path: &Path, skips: &[SkipRecord]) -> Result<()> {
    let mut text = String::from("problem,E,omega,phi,reason\n");
    for s in skips {
        let reason = s.reason.replace(',', ";");
        text.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{}\n",
            s.problem, s.e, s.omega, s.phi, reason
        ));
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Splits a sweep into writable rows and the skip records accounting for
/// every excluded point, boundary-labeled rows included.
fn partition_sweep(sweep: Sweep) -> (Vec<LabeledRow>, Vec<SkipRecord>) {
    let mut skips = sweep.skips;
    let mut rows = Vec::with_capacity(sweep.rows.len());
    for row in sweep.rows {
        if row.tolerance_boundary {
            skips.push(SkipRecord {
                problem: row.problem,
                e: row.e,
                omega: row.omega,
                phi: row.phi,
                reason: "verdict within tolerance of the boundary".into(),
            });
        } else {
            rows.push(row);
        }
    }
    (rows, skips)
}

fn cmd_dataset(args: DatasetArgs) -> Result<u8> {
    let scheme: Scheme = args.scheme.parse()?;
    let phases = parse_phases(&args.grid.phases)?;
    let grid = args.grid.grid(phases)?;
    let sweep = dataset::sweep(&grid, scheme)?;
    let (rows, skips) = partition_sweep(sweep);
    write_csv(&args.out, scheme, &rows)?;
    let skip_path = args
        .skips
        .unwrap_or_else(|| args.out.with_extension("skips.csv"));
    skip_report(&skip_path, &skips)?;
    println!(
        "wrote {} rows to {} ({} skipped, see {})",
        rows.len(),
        args.out.display(),
        skips.len(),
        skip_path.display()
    );
    Ok(EXIT_OK)
}

fn cmd_features(args: FeaturesArgs) -> Result<u8> {
    let scheme: Scheme = args.scheme.parse()?;
    let model = args.point.model()?;
    let map = floquet_map(&model)?;
    let (vector, degenerate) = feature_vector(&map, scheme)?;
    let rendered: Vec<String> = vector.values.iter().map(|v| format!("{v:.16e}")).collect();
    println!("{}", rendered.join(","));
    if degenerate {
        eprintln!("note: near-degenerate spectrum makes eigenvector features unreliable");
        return Ok(EXIT_FLAGGED);
    }
    Ok(EXIT_OK)
}

fn parse_spec(args: &TrainArgs) -> Result<Option<ClassifierSpec>> {
    let spec = match args.algorithm.as_str() {
        "grid" => return Ok(None),
        "knn" => ClassifierSpec::Knn { k: args.k },
        "decision_tree" => ClassifierSpec::DecisionTree { max_depth: args.depth },
        "random_forest" => ClassifierSpec::RandomForest { n_trees: args.trees, max_depth: args.depth },
        "adaboost" => ClassifierSpec::AdaBoost { n_stumps: args.stages, stump_depth: args.stump_depth },
        "mlp" => {
            let hidden = args
                .hidden
                .split(',')
                .map(|h| {
                    h.trim().parse::<usize>().map_err(|_| {
                        Error::InvalidParameter(format!("hidden size {h:?} is not an integer"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            ClassifierSpec::Mlp {
                hidden,
                epochs: args.epochs,
                learning_rate: args.rate,
                batch: args.batch,
            }
        }
        "gaussian_nb" => ClassifierSpec::GaussianNb,
        "lda" => ClassifierSpec::Lda,
        "qda" => ClassifierSpec::Qda,
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown algorithm {other:?}; see --help for the roster"
            )))
        }
    };
    Ok(Some(spec))
}

fn print_metrics(name: &str, report: &MetricsReport) {
    let auc = report
        .auc
        .map(|a| format!("{a:.4}"))
        .unwrap_or_else(|| "undefined (single class)".into());
    println!(
        "{name}: accuracy {:.4}, f1 {:.4}, auc {auc}, confusion [[{}, {}], [{}, {}]]",
        report.accuracy,
        report.f1,
        report.confusion[0][0],
        report.confusion[0][1],
        report.confusion[1][0],
        report.confusion[1][1],
    );
}

fn design(rows: &[LabeledRow]) -> (Vec<Vec<f64>>, Vec<u8>) {
    let refs: Vec<&LabeledRow> = rows.iter().collect();
    dataset::design_matrix(&refs)
}

fn cmd_train(args: TrainArgs) -> Result<u8> {
    let (rows, scheme) = read_csv(&args.data)?;
    let (train_rows, val_rows) = match &args.val {
        Some(path) => {
            let val_rows = dataset::read_csv_expect(path, scheme)?;
            (rows, val_rows)
        }
        None => dataset::split(&rows, args.split, args.seed)?,
    };
    let (train_x, train_y) = design(&train_rows);
    let (val_x, val_y) = design(&val_rows);

    let model: TrainedModel = match parse_spec(&args)? {
        Some(spec) => train(&spec, &train_x, &train_y, args.seed)?,
        None => {
            let outcome = grid_search(&default_grid(), &train_x, &train_y, &val_x, &val_y, args.seed)?;
            println!("grid search over {} candidates:", outcome.ranking.len());
            for (spec, accuracy) in &outcome.ranking {
                println!("  {spec}: validation accuracy {accuracy:.4}");
            }
            outcome.best
        }
    };
    println!("trained {} on {} rows ({} features, {scheme} scheme)", model.spec, train_x.len(), model.feature_width);
    print_metrics("training", &evaluate(&model, &train_x, &train_y)?);
    print_metrics("validation", &evaluate(&model, &val_x, &val_y)?);
    save_model(&args.out, scheme, &model)?;
    println!("saved model to {}", args.out.display());
    Ok(EXIT_OK)
}

fn cmd_eval(args: EvalArgs) -> Result<u8> {
    let (model, scheme) = load_model(&args.model)?;
    println!(
        "model: {} over {scheme} features (roster covers 8 families; support-vector variants are not implemented)",
        model.spec
    );
    for path in &args.data {
        let rows = dataset::read_csv_expect(path, scheme)?;
        let (x, y) = design(&rows);
        let report = evaluate(&model, &x, &y)?;
        print_metrics(&path.display().to_string(), &report);
    }
    Ok(EXIT_OK)
}

fn cmd_diagram(args: DiagramArgs) -> Result<u8> {
    let problem: Problem = args.problem.parse()?;
    let model_file = args.model.as_ref().map(|p| load_model(p)).transpose()?;
    let scheme: Scheme = match &model_file {
        Some((_, scheme)) => *scheme,
        None => args.scheme.parse()?,
    };
    let rows: Vec<LabeledRow> = match &args.data {
        Some(path) => {
            let rows = dataset::read_csv_expect(path, scheme)?;
            rows.into_iter()
                .filter(|r| r.problem == problem && (r.phi - args.phi).abs() < 1e-12)
                .collect()
        }
        None => {
            let grid = GridSpec {
                e_min: 0.0,
                e_max: args.e_max,
                e_step: args.e_step,
                omega_min: args.omega_min,
                omega_max: args.omega_max,
                omega_step: args.omega_step,
                phases: vec![args.phi],
                problems: vec![problem],
            };
            grid.validate()?;
            dataset::sweep(&grid, scheme)?.rows
        }
    };
    let mut grid = PartitionGrid::from_rows(&rows)?;
    if let Some((model, _)) = &model_file {
        // Predictions are placed by cell, not by row order, so holes left by
        // skipped points stay unlabeled on both panels.
        let mut predictions = vec![diagram::UNLABELED; grid.truth.len()];
        for row in &rows {
            let at = grid.cell_index(row.e, row.omega).expect("rows defined this lattice");
            predictions[at] = ml::predict_label(model, &row.features.values)?;
        }
        grid = grid.with_prediction(predictions)?;
    }
    grid.to_csv(&args.csv)?;
    println!(
        "wrote {} ({} cells, {} unlabeled, yes fraction {:.3})",
        args.csv.display(),
        grid.truth.len(),
        grid.unlabeled_cells(),
        grid.yes_fraction()
    );
    if let Some(svg) = &args.svg {
        grid.to_svg(svg)?;
        println!("wrote {}", svg.display());
    }
    Ok(EXIT_OK)
}
