//! Command-line front end: data generation, scoring, training, evaluation,
//! cross-validation, and the score ablation grid.
//!
//! Every command takes `--out DIR`, writes its artifacts there with fixed
//! names, and echoes the fully resolved configuration alongside them so a
//! run can be reproduced from its output directory alone.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dockselect::config::RunConfig;
use dockselect::data::synth::{generate_synthetic, SynthRegime, SynthSpec};
use dockselect::data::{
    load_features, save_features, save_ground_truth, save_label_matrix, save_performance, Dataset,
};
use dockselect::error::{Error, Result};
use dockselect::evaluation::report::attach_baseline;
use dockselect::evaluation::{
    ablation_grid, cross_validate, fixed_split, gated_success, load_report, refine_portfolio,
    render_report, save_report, selection_frequencies, AblationGrid, EvalData, GatedMetricSpec,
    Selections,
};
use dockselect::features::Scaler;
use dockselect::model::checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
use dockselect::model::train::train;
use dockselect::model::DecoderVariant;
use dockselect::scoring::{build_label_matrix, ScoreMode, LN_11};

#[derive(Parser)]
#[command(
    name = "dockselect",
    version,
    about = "Per-instance docking algorithm selection: scoring, training, and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a performance table into a composite label matrix CSV.
    Score(ScoreArgs),
    /// Generate a synthetic benchmark with planted ground truth.
    Synth(SynthArgs),
    /// Train a decoder on the full dataset and write a checkpoint.
    Train(TrainArgs),
    /// Run a saved checkpoint over a dataset and report gated metrics.
    Evaluate(EvaluateArgs),
    /// k-fold cross-validation with SBS/VBS baselines and significance.
    Crossval(CrossvalArgs),
    /// Score ablation grid over tolerance M and mixing weight alpha.
    Ablate(AblateArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML run configuration; flags override individual values.
    #[arg(long, env = "DOCKSELECT_CONFIG", value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for independent jobs (folds, ablation cells).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// alpha * s_rmsd + (1 - alpha) * s_pb
    Add,
    /// s_rmsd * s_pb
    Mul,
}

impl From<ModeArg> for ScoreMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Add => ScoreMode::Additive,
            ModeArg::Mul => ScoreMode::Multiplicative,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Residual,
    Mlp,
}

impl From<VariantArg> for DecoderVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Residual => DecoderVariant::Residual,
            VariantArg::Mlp => DecoderVariant::PlainMlp,
        }
    }
}

/// Loss presets mirroring the ablation naming: plain BCE or BCE plus
/// ranking terms.
#[derive(Clone, Copy, ValueEnum)]
enum LossPreset {
    Bce,
    Ndcg,
    Pl,
    Both,
}

impl LossPreset {
    fn weights(self) -> (f64, f64, f64) {
        match self {
            LossPreset::Bce => (1.0, 0.0, 0.0),
            LossPreset::Ndcg => (1.0, 0.0, 1.0),
            LossPreset::Pl => (1.0, 1.0, 0.0),
            LossPreset::Both => (1.0, 1.0, 1.0),
        }
    }
}

#[derive(Args)]
struct ModelOverrides {
    /// Decoder variant override.
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Training epochs override.
    #[arg(long)]
    epochs: Option<usize>,
    /// Loss preset override (bce, ndcg, pl, both).
    #[arg(long, value_enum)]
    loss: Option<LossPreset>,
}

impl ModelOverrides {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = self.variant {
            cfg.model.variant = v.into();
        }
        if let Some(e) = self.epochs {
            cfg.train.epochs = e;
        }
        if let Some(preset) = self.loss {
            let (bce, pl, ndcg) = preset.weights();
            cfg.loss.weight_bce = bce;
            cfg.loss.weight_pl = pl;
            cfg.loss.weight_ndcg = ndcg;
        }
    }
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Performance CSV (instance_id,algorithm,rmsd_angstrom,pb_valid).
    #[arg(long, value_name = "FILE")]
    performance: PathBuf,
    /// Optional feature CSV; when given, the instance sets must agree.
    #[arg(long, value_name = "FILE")]
    features: Option<PathBuf>,
    /// Combination mode override.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// RMSD tolerance M override, in angstroms.
    #[arg(long = "M", visible_alias = "tolerance-m")]
    tolerance_m: Option<f64>,
    /// Mixing weight alpha override (additive mode).
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Data regime: planted, dominant, or complementary.
    #[arg(long)]
    regime: String,
    /// Number of instances.
    #[arg(long)]
    n: usize,
    /// Feature dimensionality.
    #[arg(long)]
    d: usize,
    /// Portfolio size.
    #[arg(long)]
    m: usize,
    /// Noise level (regime-specific spread).
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Per-algorithm PoseBusters failure rates, comma separated.
    #[arg(long, value_delimiter = ',')]
    pb_fail_rate: Vec<f64>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_name = "FILE")]
    features: PathBuf,
    #[arg(long, value_name = "FILE")]
    performance: PathBuf,
    #[command(flatten)]
    overrides: ModelOverrides,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Checkpoint produced by `train`.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    #[arg(long, value_name = "FILE")]
    features: PathBuf,
    #[arg(long, value_name = "FILE")]
    performance: PathBuf,
}

#[derive(Args)]
struct CrossvalArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_name = "FILE")]
    features: PathBuf,
    #[arg(long, value_name = "FILE")]
    performance: PathBuf,
    /// Fold count override.
    #[arg(long)]
    k: Option<usize>,
    /// Refine the portfolio to its top-K algorithms by mean composite score
    /// (one fixed refined portfolio for the whole run) before
    /// cross-validating.
    #[arg(long, value_name = "K")]
    top_k: Option<usize>,
    #[command(flatten)]
    overrides: ModelOverrides,
    /// Earlier report.json to test this run against (fills p_vs_baseline).
    #[arg(long, value_name = "FILE")]
    baseline_report: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_name = "FILE")]
    features: PathBuf,
    #[arg(long, value_name = "FILE")]
    performance: PathBuf,
    /// Tolerance grid, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, LN_11, 3.0, 5.0])]
    m_values: Vec<f64>,
    /// Alpha grid, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.3, 0.5, 0.7, 0.9])]
    alpha_values: Vec<f64>,
    /// Drop the multiplicative column.
    #[arg(long)]
    no_multiplicative: bool,
    /// Held-out fraction override for the fixed split.
    #[arg(long)]
    test_fraction: Option<f64>,
    #[command(flatten)]
    overrides: ModelOverrides,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_class(&e))
        }
    }
}

/// Exit classes: 2 usage (clap), 3 validation, 4 i/o, 5 internal.
fn exit_class(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_)
        | Error::InvalidConfig(_)
        | Error::ShapeMismatch(_)
        | Error::Schema(_)
        | Error::Parse { .. }
        | Error::Version { .. } => 3,
        Error::Io(_) => 4,
        Error::Internal(_) => 5,
    }
}

fn run(cli: Cli) -> Result<()> {
    let jobs = match &cli.command {
        Command::Score(a) => a.common.jobs,
        Command::Synth(a) => a.common.jobs,
        Command::Train(a) => a.common.jobs,
        Command::Evaluate(a) => a.common.jobs,
        Command::Crossval(a) => a.common.jobs,
        Command::Ablate(a) => a.common.jobs,
    };
    if jobs == 0 {
        return Err(Error::InvalidConfig("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Score(args) => cmd_score(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Train(args) => cmd_train(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Crossval(args) => cmd_crossval(args),
        Command::Ablate(args) => cmd_ablate(args),
    })
}

fn load_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn prepare_out_dir(common: &CommonArgs, cfg: &RunConfig) -> Result<PathBuf> {
    fs::create_dir_all(&common.out)?;
    let resolved = common.out.join("resolved_config.toml");
    fs::write(&resolved, cfg.to_toml_string()?)?;
    Ok(common.out.clone())
}

fn announce(path: &Path) {
    println!("wrote {}", path.display());
}

fn cmd_score(args: ScoreArgs) -> Result<()> {
    let mut cfg = load_config(&args.common)?;
    if let Some(mode) = args.mode {
        cfg.score.mode = mode.into();
    }
    if let Some(m) = args.tolerance_m {
        cfg.score.tolerance_m = m;
    }
    if let Some(alpha) = args.alpha {
        cfg.score.alpha = alpha;
    }
    cfg.validate()?;

    let table = dockselect::data::load_performance(&args.performance)?;
    let portfolio = table.algorithm_ids();
    if let Some(features_path) = &args.features {
        // Join check only; scoring itself never reads the features.
        let (features, ids) = load_features(features_path)?;
        Dataset::new(
            features,
            ids,
            table.clone(),
            portfolio.clone(),
            String::new(),
        )?;
    }
    let labels = build_label_matrix(table.records(), &portfolio, &cfg.score)?;

    let out = prepare_out_dir(&args.common, &cfg)?;
    let path = out.join("labels.csv");
    save_label_matrix(&path, &labels)?;
    announce(&path);
    println!(
        "scored {} instances x {} algorithms",
        labels.n(),
        labels.m()
    );
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let cfg = load_config(&args.common)?;
    let spec = SynthSpec {
        n_instances: args.n,
        d: args.d,
        m: args.m,
        regime: args.regime.parse::<SynthRegime>()?,
        noise_level: args.noise,
        pb_fail_rate: args.pb_fail_rate.clone(),
        seed: cfg.seed,
    };
    let synth = generate_synthetic(&spec)?;
    let out = prepare_out_dir(&args.common, &cfg)?;

    let spec_path = out.join("synth_spec.toml");
    fs::write(
        &spec_path,
        toml::to_string_pretty(&spec)
            .map_err(|e| Error::Internal(format!("spec serialization: {e}")))?,
    )?;

    let features_path = out.join("features.csv");
    save_features(
        &features_path,
        &synth.dataset.instance_ids,
        &synth.dataset.features,
    )?;
    let performance_path = out.join("performance.csv");
    save_performance(&performance_path, &synth.dataset.table)?;
    let truth_path = out.join("ground_truth.csv");
    save_ground_truth(&truth_path, &synth.ground_truth)?;

    for p in [&spec_path, &features_path, &performance_path, &truth_path] {
        announce(p);
    }
    Ok(())
}

/// Gated rates plus selection counts for one set of selections, shared by
/// `train` and `evaluate` outputs.
#[derive(Serialize)]
struct EvaluationMetrics {
    n_instances: usize,
    metrics: Vec<MetricRate>,
    selection_frequencies: Vec<AlgorithmCount>,
}

#[derive(Serialize)]
struct MetricRate {
    label: String,
    rmsd_threshold: f64,
    require_pb_valid: bool,
    success_rate: f64,
}

#[derive(Serialize)]
struct AlgorithmCount {
    algorithm: String,
    count: u64,
}

fn evaluation_metrics(
    selections: &Selections,
    dataset: &Dataset,
    portfolio: &[String],
    specs: &[GatedMetricSpec],
) -> EvaluationMetrics {
    let metrics = specs
        .iter()
        .map(|spec| MetricRate {
            label: spec.label(),
            rmsd_threshold: spec.rmsd_threshold,
            require_pb_valid: spec.require_pb_valid,
            success_rate: gated_success(selections, &dataset.table, spec),
        })
        .collect();
    let counts = selection_frequencies(selections, portfolio);
    EvaluationMetrics {
        n_instances: selections.len(),
        metrics,
        selection_frequencies: portfolio
            .iter()
            .zip(counts)
            .map(|(algorithm, count)| AlgorithmCount {
                algorithm: algorithm.clone(),
                count,
            })
            .collect(),
    }
}

fn write_metrics(path: &Path, metrics: &EvaluationMetrics) -> Result<()> {
    let mut json = serde_json::to_string_pretty(metrics)
        .map_err(|e| Error::Internal(format!("metrics serialization: {e}")))?;
    json.push('\n');
    fs::write(path, json)?;
    Ok(())
}

fn write_selections(path: &Path, selections: &Selections) -> Result<()> {
    let mut out = String::from("instance_id,selected_algorithm\n");
    for (instance, algorithm) in selections {
        writeln!(out, "{instance},{algorithm}").unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

fn checkpoint_selections(ckpt: &Checkpoint, dataset: &Dataset) -> Result<Selections> {
    let mut selections = Selections::new();
    for (id, row) in dataset.instance_ids.iter().zip(&dataset.features) {
        let j = ckpt.select(row)?;
        selections.insert(id.clone(), ckpt.portfolio[j].clone());
    }
    Ok(selections)
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let mut cfg = load_config(&args.common)?;
    args.overrides.apply(&mut cfg);
    cfg.validate()?;

    let dataset = Dataset::load(&args.features, &args.performance)?;
    let labels = dataset.label_matrix(&cfg.score)?;
    let scaler = Scaler::fit_all(&dataset.features)?;
    let rows: Vec<usize> = (0..dataset.n_instances()).collect();
    let scaled = scaler.transform_rows(&dataset.features, &rows)?;

    let arch = cfg.arch_spec(dataset.feature_dim(), dataset.portfolio.len());
    let train_cfg = cfg.train_config();
    let (params, history) = train(&scaled, &labels, &arch, &train_cfg)?;
    let ckpt = Checkpoint::new(params, dataset.portfolio.clone(), Some(scaler))?;

    let out = prepare_out_dir(&args.common, &cfg)?;
    let model_path = out.join("model.ckpt");
    save_checkpoint(&model_path, &ckpt)?;
    announce(&model_path);

    let mut history_csv = String::from("epoch,mean_loss\n");
    for (epoch, loss) in history.epoch_mean_loss.iter().enumerate() {
        writeln!(history_csv, "{epoch},{loss}").unwrap();
    }
    let history_path = out.join("history.csv");
    fs::write(&history_path, history_csv)?;
    announce(&history_path);

    // Train-end metrics on the training data itself.
    let selections = checkpoint_selections(&ckpt, &dataset)?;
    let metrics = evaluation_metrics(
        &selections,
        &dataset,
        &dataset.portfolio,
        &cfg.metric_specs(),
    );
    let metrics_path = out.join("metrics.json");
    write_metrics(&metrics_path, &metrics)?;
    announce(&metrics_path);
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let cfg = load_config(&args.common)?;
    cfg.validate()?;
    let ckpt = load_checkpoint(&args.model)?;
    let dataset = Dataset::load(&args.features, &args.performance)?;
    if dataset.feature_dim() != ckpt.params.arch().input_dim {
        return Err(Error::ShapeMismatch(format!(
            "dataset features have {} dims, checkpoint expects {}",
            dataset.feature_dim(),
            ckpt.params.arch().input_dim
        )));
    }

    let selections = checkpoint_selections(&ckpt, &dataset)?;
    let metrics = evaluation_metrics(&selections, &dataset, &ckpt.portfolio, &cfg.metric_specs());

    let out = prepare_out_dir(&args.common, &cfg)?;
    let metrics_path = out.join("metrics.json");
    write_metrics(&metrics_path, &metrics)?;
    let selections_path = out.join("selections.csv");
    write_selections(&selections_path, &selections)?;
    announce(&metrics_path);
    announce(&selections_path);
    Ok(())
}

fn cmd_crossval(args: CrossvalArgs) -> Result<()> {
    let mut cfg = load_config(&args.common)?;
    args.overrides.apply(&mut cfg);
    if let Some(k) = args.k {
        cfg.eval.k = k;
    }
    cfg.validate()?;

    let mut dataset = Dataset::load(&args.features, &args.performance)?;
    if let Some(top_k) = args.top_k {
        let labels = dataset.label_matrix(&cfg.score)?;
        let refined = refine_portfolio(&labels, top_k)?;
        println!("refined portfolio: {}", refined.join(", "));
        let table = dataset.table.retain_algorithms(&refined);
        dataset = Dataset::new(
            dataset.features,
            dataset.instance_ids,
            table,
            refined,
            dataset.provenance,
        )?;
    }
    let data = EvalData {
        features: &dataset.features,
        instance_ids: &dataset.instance_ids,
        table: &dataset.table,
        portfolio: &dataset.portfolio,
    };
    let arch = cfg.arch_spec(dataset.feature_dim(), dataset.portfolio.len());
    let mut report = cross_validate(
        &data,
        &cfg.score,
        &arch,
        &cfg.train_config(),
        &cfg.metric_specs(),
        cfg.eval.k,
        cfg.seed,
    )?;
    if let Some(baseline_path) = &args.baseline_report {
        let baseline = load_report(baseline_path)?;
        attach_baseline(&mut report, &baseline)?;
    }

    let out = prepare_out_dir(&args.common, &cfg)?;
    let report_path = out.join("report.json");
    save_report(&report_path, &report)?;
    let table = render_report(&report);
    let table_path = out.join("table.txt");
    fs::write(&table_path, &table)?;
    announce(&report_path);
    announce(&table_path);
    print!("{table}");
    Ok(())
}

fn grid_csv(grid: &AblationGrid, metric_index: usize) -> String {
    let mut out = String::from("M");
    for label in grid.column_labels() {
        write!(out, ",{label}").unwrap();
    }
    out.push('\n');
    for (row, m) in grid.m_values.iter().enumerate() {
        write!(out, "{m}").unwrap();
        for cell in &grid.cells[metric_index][row] {
            write!(out, ",{cell}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn cmd_ablate(args: AblateArgs) -> Result<()> {
    let mut cfg = load_config(&args.common)?;
    args.overrides.apply(&mut cfg);
    if let Some(fraction) = args.test_fraction {
        cfg.eval.test_fraction = fraction;
    }
    cfg.validate()?;
    if args.m_values.is_empty() {
        return Err(Error::InvalidConfig("--m-values must not be empty".into()));
    }

    let dataset = Dataset::load(&args.features, &args.performance)?;
    let data = EvalData {
        features: &dataset.features,
        instance_ids: &dataset.instance_ids,
        table: &dataset.table,
        portfolio: &dataset.portfolio,
    };
    let split = fixed_split(&dataset.instance_ids, cfg.eval.test_fraction, cfg.seed)?;
    let arch = cfg.arch_spec(dataset.feature_dim(), dataset.portfolio.len());
    let metrics = cfg.metric_specs();
    let grid = ablation_grid(
        &data,
        &arch,
        &cfg.train_config(),
        &args.m_values,
        &args.alpha_values,
        !args.no_multiplicative,
        &split,
        &metrics,
    )?;

    let out = prepare_out_dir(&args.common, &cfg)?;
    for (mi, spec) in metrics.iter().enumerate() {
        let path = out.join(format!("ablation_rmsd{}.csv", spec.rmsd_threshold));
        fs::write(&path, grid_csv(&grid, mi))?;
        announce(&path);
    }
    Ok(())
}
