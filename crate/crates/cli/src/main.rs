//! `lapmo`: command-line harness for the Laplacian motion toolkit.
//!
//! Subcommands cover the debugging and experiment surfaces: differential
//! coordinates of a motion file, gradient checks, metric evaluation,
//! synthetic corpus generation, single training runs, the ablation runner,
//! and report regeneration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lapmo_core::check::{
    gradcheck_loss, gradcheck_network, LossKind as CoreLossKind, GRAD_TOLERANCE,
};
use lapmo_core::graph::{build_graph, build_laplacian, diff_coords, LaplacianVariant};
use lapmo_core::harness::{
    action_label_from_stem, make_pairs, render_ablation_csv, render_ablation_markdown,
    render_eval_csv, render_eval_markdown, run_ablation, train_model, AblationConfig,
    AblationResult,
};
use lapmo_core::losses::LossMode;
use lapmo_core::metrics::evaluate_batch;
use lapmo_core::motion::{load_motion, MotionSequence};
use lapmo_core::synth::{write_corpus, ProjectionMode, ProjectionParams, SynthConfig};
use lapmo_core::tcn::{save_checkpoint, TrainConfig};

#[derive(Parser)]
#[command(name = "lapmo", version, about = "Spatio-temporal Laplacian motion toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute differential coordinates (L * P) of a motion file.
    Laplacian(LaplacianArgs),
    /// Check analytic loss gradients against finite differences.
    Gradcheck(GradcheckArgs),
    /// Evaluate estimate files against ground truth files.
    Eval(EvalArgs),
    /// Generate a synthetic motion corpus.
    Synth(SynthArgs),
    /// Train a single model on a corpus and write a checkpoint.
    Train(TrainArgs),
    /// Run the full loss-function ablation from a JSON config.
    Ablate(AblateArgs),
    /// Re-render report files from a finished ablation directory.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    /// Combinatorial Laplacian (degree minus adjacency).
    Comb,
    /// Random-walk Laplacian (row normalized).
    Rw,
}

impl From<VariantArg> for LaplacianVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Comb => LaplacianVariant::Combinatorial,
            VariantArg::Rw => LaplacianVariant::RandomWalk,
        }
    }
}

#[derive(Args)]
struct LaplacianArgs {
    /// Motion-JSON file.
    #[arg(long)]
    motion: PathBuf,
    #[arg(long, value_enum, default_value = "comb")]
    variant: VariantArg,
    /// Output JSON file (an N x 3 array).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Pos,
    Lap,
    Motion,
    Combined,
}

#[derive(Args)]
struct GradcheckArgs {
    #[arg(long, value_enum)]
    loss: LossArg,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also check the network parameter gradients.
    #[arg(long, default_value_t = false)]
    network: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Ground-truth Motion-JSON file or directory.
    #[arg(long)]
    gt: PathBuf,
    /// Estimate Motion-JSON file or directory (file names must match).
    #[arg(long)]
    est: PathBuf,
    /// Output report; the extension picks the format (.md or .csv).
    #[arg(long)]
    out: PathBuf,
    /// Row label in the report (defaults to the estimate path stem).
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    /// JSON corpus config; missing fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    count: usize,
    /// Size of the train split (default: 80%, rounded down).
    #[arg(long)]
    train: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Position loss only.
    P,
    /// Position plus motion loss.
    Pm,
    /// Position plus Laplacian loss.
    Plap,
}

impl From<ModeArg> for LossMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::P => LossMode::PositionOnly,
            ModeArg::Pm => LossMode::PositionPlusMotion,
            ModeArg::Plap => LossMode::PositionPlusLaplacian,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Corpus directory written by `lapmo synth`.
    #[arg(long)]
    corpus: PathBuf,
    /// Checkpoint output path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long, default_value_t = 16)]
    batch_size: usize,
}

#[derive(Args)]
struct AblateArgs {
    /// Ablation JSON config (see AblationConfig).
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Ablation output directory containing result.json.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output file; the extension picks the format (.md or .csv).
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Laplacian(args) => {
            let seq = load_motion(&args.motion)
                .with_context(|| format!("loading {}", args.motion.display()))?;
            let graph = build_graph(seq.skeleton(), seq.frames());
            let laplacian = build_laplacian(&graph, args.variant.into());
            let delta = diff_coords(&laplacian, &seq)?;
            std::fs::write(&args.out, serde_json::to_string(&delta.to_rows())?)?;
            println!(
                "wrote {} rows of differential coordinates to {}",
                delta.n(),
                args.out.display()
            );
            Ok(0)
        }
        Command::Gradcheck(args) => {
            let kind = match args.loss {
                LossArg::Pos => CoreLossKind::Position,
                LossArg::Lap => CoreLossKind::Laplacian,
                LossArg::Motion => CoreLossKind::Motion,
                LossArg::Combined => CoreLossKind::Combined,
            };
            let summary = gradcheck_loss(kind, args.trials, args.seed);
            println!(
                "loss gradcheck: {} trials, max relative error {:.3e} (threshold {:.0e}): {}",
                summary.trials,
                summary.max_rel_error,
                GRAD_TOLERANCE,
                if summary.passed() { "PASS" } else { "FAIL" }
            );
            let mut ok = summary.passed();
            if args.network {
                let net = gradcheck_network(args.trials.min(50), args.seed ^ 0x5EED);
                println!(
                    "network gradcheck: {} trials, max relative error {:.3e} (threshold {:.0e}): {}",
                    net.trials,
                    net.max_rel_error,
                    GRAD_TOLERANCE,
                    if net.passed() { "PASS" } else { "FAIL" }
                );
                ok &= net.passed();
            }
            Ok(if ok { 0 } else { 1 })
        }
        Command::Eval(args) => {
            let pairs = collect_eval_pairs(&args.gt, &args.est)?;
            let loaded: Vec<(MotionSequence, MotionSequence, String)> = pairs
                .into_iter()
                .map(|(gt_path, est_path, action)| {
                    Ok((
                        load_motion(&gt_path)
                            .with_context(|| format!("loading {}", gt_path.display()))?,
                        load_motion(&est_path)
                            .with_context(|| format!("loading {}", est_path.display()))?,
                        action,
                    ))
                })
                .collect::<Result<_>>()?;
            let report = evaluate_batch(
                loaded
                    .iter()
                    .map(|(gt, est, action)| (est as _, gt as _, action.as_str())),
            )?;
            let name = args.name.unwrap_or_else(|| {
                args.est
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "estimate".into())
            });
            write_by_extension(
                &args.out,
                || render_eval_markdown(&name, &report).map_err(Into::into),
                || Ok(render_eval_csv(&name, &report)),
            )?;
            println!(
                "evaluated {} pair(s); avg MPJPE {:.3} mm",
                loaded.len(),
                report.mpjpe
            );
            Ok(0)
        }
        Command::Synth(args) => {
            let config: SynthConfig = match &args.config {
                Some(path) => serde_json::from_str(
                    &std::fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))?,
                )?,
                None => SynthConfig::default(),
            };
            let train = args.train.unwrap_or(args.count * 8 / 10);
            let manifest = write_corpus(&config, args.count, train, &args.out)?;
            println!(
                "wrote {} sequences ({} train / {} test) to {} (config hash {})",
                args.count,
                manifest.train.len(),
                manifest.test.len(),
                args.out.display(),
                manifest.config_hash
            );
            Ok(0)
        }
        Command::Train(args) => {
            let corpus = lapmo_core::synth::load_corpus(&args.corpus)
                .with_context(|| format!("loading corpus {}", args.corpus.display()))?;
            let pairs = make_pairs(
                &corpus.train,
                ProjectionMode::OrthoXy,
                &ProjectionParams::default(),
            )?;
            let spec =
                lapmo_core::tcn::NetworkSpec::desk_default(corpus.train[0].joints());
            let (state, final_loss) = train_model(
                &spec,
                args.seed,
                &pairs,
                args.mode.into(),
                args.epochs,
                args.batch_size,
                &TrainConfig::default(),
                true,
            )?;
            save_checkpoint(&state, &args.out)?;
            println!(
                "trained {} epochs (final epoch mean loss {:.4}); checkpoint at {}",
                args.epochs,
                final_loss,
                args.out.display()
            );
            Ok(0)
        }
        Command::Ablate(args) => {
            let config: AblationConfig = serde_json::from_str(
                &std::fs::read_to_string(&args.config)
                    .with_context(|| format!("reading {}", args.config.display()))?,
            )?;
            let result = run_ablation(&config)?;
            for summary in &result.summaries {
                println!(
                    "{}: {} cells ({} diverged), median MPJPE {}, MPJVE {}, MPJAccE {}",
                    summary.mode.label(),
                    summary.cells,
                    summary.diverged,
                    fmt_opt(summary.median_mpjpe),
                    fmt_opt(summary.median_mpjve),
                    fmt_opt(summary.median_mpjacce),
                );
            }
            println!("reports written to {}", config.output_dir.display());
            Ok(if result.all_finite() { 0 } else { 1 })
        }
        Command::Report(args) => {
            let result: AblationResult = serde_json::from_str(
                &std::fs::read_to_string(args.input.join("result.json")).with_context(|| {
                    format!("reading {}/result.json", args.input.display())
                })?,
            )?;
            write_by_extension(
                &args.out,
                || render_ablation_markdown(&result).map_err(Into::into),
                || Ok(render_ablation_csv(&result)),
            )?;
            println!("report written to {}", args.out.display());
            Ok(0)
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.4}"))
}

fn write_by_extension(
    out: &Path,
    markdown: impl FnOnce() -> Result<String>,
    csv: impl FnOnce() -> Result<String>,
) -> Result<()> {
    let content = match out.extension().and_then(|e| e.to_str()) {
        Some("md") => markdown()?,
        Some("csv") => csv()?,
        other => bail!(
            "unsupported report extension {:?} (use .md or .csv)",
            other.unwrap_or("")
        ),
    };
    std::fs::write(out, content)?;
    Ok(())
}

/// Resolves (gt, est, action) path triples: either two files or two
/// directories whose Motion-JSON file names line up.
fn collect_eval_pairs(gt: &Path, est: &Path) -> Result<Vec<(PathBuf, PathBuf, String)>> {
    if gt.is_file() {
        let action = action_label_from_stem(
            &gt.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
        );
        return Ok(vec![(gt.to_path_buf(), est.to_path_buf(), action)]);
    }
    let mut names: Vec<String> = std::fs::read_dir(gt)
        .with_context(|| format!("reading directory {}", gt.display()))?
        .filter_map(|entry| {
            let name = entry.ok()?.file_name().to_string_lossy().into_owned();
            (name.ends_with(".json") && name != "manifest.json").then_some(name)
        })
        .collect();
    names.sort();
    if names.is_empty() {
        bail!("no Motion-JSON files found in {}", gt.display());
    }
    names
        .into_iter()
        .map(|name| {
            let est_path = est.join(&name);
            if !est_path.is_file() {
                bail!("estimate file {} is missing", est_path.display());
            }
            let stem = name.trim_end_matches(".json");
            Ok((gt.join(&name), est_path, action_label_from_stem(stem)))
        })
        .collect()
}
