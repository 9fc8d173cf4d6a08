//! Command-line surface for the toolkit: train models, evaluate perplexity,
//! break reports down by hit-length and compound status, compare reports by
//! probability margin, and inspect model files.
//!
//! Every command is a pure function of its inputs and the seed: re-running
//! with identical arguments produces byte-identical outputs. Exit codes:
//! 0 success, 2 usage or configuration, 3 i/o, 4 data format.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pylm::corpus::{read_sentences, Corpus, Vocabulary};
use pylm::error::{Error, Result};
use pylm::eval::{
    breakdown, evaluate, margin_ranking, write_breakdown_tsv, write_margin_tsv, EvalReport,
    ReportFile,
};
use pylm::hpylm::{HpylmModel, TrainConfig, TrainStats, DEFAULT_BURN_IN};
use pylm::hpylmc::CompoundModel;
use pylm::mkn::MknModel;
use pylm::model::{LanguageModel, Model, Renormalized};
use pylm::seeded_rng;
use pylm::segmentation::{Direction, LinkerScheme, SegmentationDictionary};

#[derive(Parser)]
#[command(
    name = "pylm",
    version,
    about = "Bayesian n-gram language modeling toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Mkn,
    Hpylm,
    Hpylmc,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Ling,
    Inv,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Direction {
        match d {
            DirectionArg::Ling => Direction::Ling,
            DirectionArg::Inv => Direction::Inv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    MergeLeft,
    MergeRight,
    Delete,
}

impl From<SchemeArg> for LinkerScheme {
    fn from(s: SchemeArg) -> LinkerScheme {
        match s {
            SchemeArg::MergeLeft => LinkerScheme::MergeLeft,
            SchemeArg::MergeRight => LinkerScheme::MergeRight,
            SchemeArg::Delete => LinkerScheme::Delete,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write it with a JSON run manifest.
    Train(TrainArgs),
    /// Evaluate a model on a test corpus and write a per-token report.
    Perplexity(PerplexityArgs),
    /// Tabulate a report by hit-length and compound status.
    Breakdown(BreakdownArgs),
    /// Rank events of two aligned reports by probability margin.
    Compare(CompareArgs),
    /// Print a summary of a model file.
    Inspect(InspectArgs),
    /// Build a vocabulary from a corpus and dump token/id/count lines.
    Vocab(VocabArgs),
    /// Export a Kneser-Ney model in ARPA-style text form.
    ExportArpa(ExportArpaArgs),
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    #[arg(long)]
    corpus: PathBuf,
    /// Output model file; the manifest lands next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 4)]
    order: usize,
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    burn_in: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Types below this corpus frequency map to the unknown symbol.
    #[arg(long, default_value_t = 1)]
    min_count: u64,
    /// Segmentation dictionary (required for hpylmc).
    #[arg(long)]
    seg: Option<PathBuf>,
    /// Component generation order for hpylmc.
    #[arg(long, value_enum, default_value = "ling")]
    direction: DirectionArg,
    /// Linking-element handling; defaults to the side matching the
    /// direction (merge-left for ling, merge-right for inv).
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Posterior samples kept for prediction (averaging when > 1).
    #[arg(long, default_value_t = 1)]
    samples: usize,
    #[arg(long, default_value_t = 5)]
    sample_lag: usize,
    /// Freeze hyperparameters instead of slice-sampling them each sweep.
    #[arg(long)]
    no_hyper_sampling: bool,
    /// Suppress per-sweep progress on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct PerplexityArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Per-token report file (TSV); omit to print only the summary.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Renormalize over the finite vocabulary (hpylmc only).
    #[arg(long)]
    renormalize: bool,
    /// Worker threads for evaluation; default from PYLM_THREADS or 1.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct BreakdownArgs {
    #[arg(long)]
    report: PathBuf,
    /// Baseline report over the identical test set, for relative deltas.
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Re-derive compound flags from a segmentation dictionary.
    #[arg(long)]
    seg: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ling")]
    direction: DirectionArg,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Output TSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    report_a: PathBuf,
    #[arg(long)]
    report_b: PathBuf,
    /// Keep only events flagged as compounds in report A.
    #[arg(long)]
    compounds_only: bool,
    /// Keep only the highest-margin entries.
    #[arg(long)]
    top: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args)]
struct VocabArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 1)]
    min_count: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArpaArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Perplexity(args) => cmd_perplexity(args),
        Command::Breakdown(args) => cmd_breakdown(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Inspect(args) => cmd_inspect(args),
        Command::Vocab(args) => cmd_vocab(args),
        Command::ExportArpa(args) => cmd_export_arpa(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn params_json(p: pylm::crp::PypParams) -> serde_json::Value {
    json!({ "discount": p.discount, "strength": p.strength })
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    if args.model == ModelKind::Hpylmc && args.seg.is_none() {
        return Err(Error::Config(
            "--model hpylmc requires --seg <segmentation dictionary>".into(),
        ));
    }
    if args.model != ModelKind::Hpylmc && args.seg.is_some() {
        eprintln!("warning: --seg is ignored for this model kind");
    }
    if args.order < 1 {
        return Err(Error::Config("--order must be at least 1".into()));
    }

    let direction: Direction = args.direction.into();
    let scheme: LinkerScheme = match args.scheme {
        Some(s) => s.into(),
        None => match direction {
            Direction::Ling => LinkerScheme::MergeLeft,
            Direction::Inv => LinkerScheme::MergeRight,
        },
    };

    let sentences = read_sentences(&args.corpus)?;
    let vocab = Vocabulary::build(&sentences, args.min_count);
    let corpus = Corpus::encode(&vocab, &sentences);
    let cfg = TrainConfig {
        order: args.order,
        burn_in: args.burn_in,
        samples: args.samples.max(1),
        sample_lag: args.sample_lag.max(1),
        resample_hyperparameters: !args.no_hyper_sampling,
    };
    let mut rng = seeded_rng(args.seed);
    let quiet = args.quiet;
    let progress = |sweep: usize, ll: f64| {
        if !quiet {
            eprintln!("sweep {sweep}: joint log-likelihood {ll:.3}");
        }
    };

    let mut manifest = json!({
        "command": "train",
        "model": match args.model {
            ModelKind::Mkn => "mkn",
            ModelKind::Hpylm => "hpylm",
            ModelKind::Hpylmc => "hpylmc",
        },
        "corpus": args.corpus.display().to_string(),
        "order": args.order,
        "seed": args.seed,
        "min_count": args.min_count,
        "vocab_size": vocab.len(),
        "sentence_count": corpus.sentence_count(),
        "token_count": corpus.token_count(),
        "event_count": corpus.event_count(),
        "model_path": args.out.display().to_string(),
    });
    let extend = |manifest: &mut serde_json::Value, stats: &TrainStats| {
        manifest["burn_in"] = json!(args.burn_in);
        manifest["samples"] = json!(args.samples.max(1));
        manifest["sample_lag"] = json!(args.sample_lag.max(1));
        manifest["hyperparameter_sampling"] = json!(!args.no_hyper_sampling);
        manifest["initial_log_likelihood"] = json!(stats.initial_log_likelihood);
        manifest["final_log_likelihood"] = json!(stats.final_log_likelihood);
    };

    let model = match args.model {
        ModelKind::Mkn => {
            let m = MknModel::estimate(&vocab, &corpus, args.order);
            manifest["discounts"] = json!((1..=args.order)
                .map(|k| m.discounts(k).to_vec())
                .collect::<Vec<_>>());
            Model::Mkn(m)
        }
        ModelKind::Hpylm => {
            let (m, stats) = HpylmModel::train(&vocab, &corpus, &cfg, &mut rng, progress);
            extend(&mut manifest, &stats);
            manifest["hyperparameters"] = json!({
                "g": (0..args.order)
                    .map(|d| params_json(m.tree().params(d)))
                    .collect::<Vec<_>>(),
            });
            Model::Hpylm(m)
        }
        ModelKind::Hpylmc => {
            let seg_path = args.seg.as_ref().unwrap();
            let seg = SegmentationDictionary::load(seg_path, scheme, direction)?;
            let (m, stats) = CompoundModel::train(&vocab, &corpus, &seg, &cfg, &mut rng, progress);
            extend(&mut manifest, &stats);
            let (g, f, h) = m.hyperparameters();
            manifest["seg"] = json!(seg_path.display().to_string());
            manifest["direction"] = json!(direction.as_str());
            manifest["scheme"] = json!(scheme.as_str());
            manifest["component_vocab_size"] = json!(m.decompositions().components.len());
            manifest["hyperparameters"] = json!({
                "g": g.into_iter().map(params_json).collect::<Vec<_>>(),
                "f": f.into_iter().map(params_json).collect::<Vec<_>>(),
                "h": params_json(h),
            });
            Model::Hpylmc(m)
        }
    };

    model.save(&args.out)?;
    let bytes = std::fs::metadata(&args.out)
        .map_err(|e| Error::io(&args.out, e))?
        .len();
    manifest["model_bytes"] = json!(bytes);
    write_json(&manifest_path(&args.out), &manifest)?;
    println!(
        "trained {} model: order={} vocab={} events={} -> {}",
        model.kind_name(),
        args.order,
        vocab.len(),
        corpus.event_count(),
        args.out.display()
    );
    Ok(())
}

fn threads_from(args_threads: Option<usize>) -> usize {
    args_threads
        .or_else(|| {
            std::env::var("PYLM_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(1)
        .max(1)
}

fn cmd_perplexity(args: PerplexityArgs) -> Result<()> {
    let model = Model::load(&args.model)?;
    if args.renormalize && !matches!(model, Model::Hpylmc(_)) {
        return Err(Error::Config(
            "--renormalize is only valid for hpylmc models".into(),
        ));
    }
    let sentences = read_sentences(&args.test)?;
    let threads = threads_from(args.threads);
    let report: EvalReport = match (&model, args.renormalize) {
        (Model::Hpylmc(m), true) => evaluate(&Renormalized::new(m), &sentences, threads)?,
        _ => evaluate(&model, &sentences, threads)?,
    };

    if let Some(report_path) = &args.report {
        let file = std::fs::File::create(report_path).map_err(|e| Error::io(report_path, e))?;
        let mut out = std::io::BufWriter::new(file);
        report
            .write_tsv(model.vocab(), &mut out)
            .map_err(|e| Error::io(report_path, e))?;
        out.flush().map_err(|e| Error::io(report_path, e))?;
        let manifest = json!({
            "command": "perplexity",
            "model": args.model.display().to_string(),
            "model_kind": model.kind_name(),
            "test": args.test.display().to_string(),
            "renormalize": args.renormalize,
            "tokens": report.token_count(),
            "oov": report.oov_count,
            "cross_entropy": report.cross_entropy,
            "perplexity": report.perplexity,
            "report_path": report_path.display().to_string(),
        });
        write_json(&manifest_path(report_path), &manifest)?;
    }
    println!(
        "ppl={} xent={} tokens={} oov={}",
        report.perplexity,
        report.cross_entropy,
        report.token_count(),
        report.oov_count
    );
    Ok(())
}

fn out_or_stdout(path: Option<&Path>, body: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|e| Error::io(p, e)),
        None => std::io::stdout()
            .write_all(body)
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn cmd_breakdown(args: BreakdownArgs) -> Result<()> {
    let mut report = ReportFile::read(&args.report)?;
    let mut base = match &args.baseline {
        Some(p) => Some(ReportFile::read(p)?),
        None => None,
    };
    if let Some(seg_path) = &args.seg {
        let direction: Direction = args.direction.into();
        let scheme = match args.scheme {
            Some(s) => s.into(),
            None => match direction {
                Direction::Ling => LinkerScheme::MergeLeft,
                Direction::Inv => LinkerScheme::MergeRight,
            },
        };
        let seg = SegmentationDictionary::load(seg_path, scheme, direction)?;
        report.apply_segmentation(&seg);
        if let Some(b) = &mut base {
            b.apply_segmentation(&seg);
        }
    }
    let order = report.order;
    let rows = breakdown(&report, base.as_ref(), order)?;
    let mut buf = Vec::new();
    write_breakdown_tsv(&rows, &mut buf).expect("in-memory write");
    out_or_stdout(args.out.as_deref(), &buf)
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let a = ReportFile::read(&args.report_a)?;
    let b = ReportFile::read(&args.report_b)?;
    let mut entries = margin_ranking(&a, &b, args.compounds_only)?;
    if let Some(top) = args.top {
        entries.truncate(top);
    }
    let mut buf = Vec::new();
    write_margin_tsv(&entries, &mut buf).expect("in-memory write");
    out_or_stdout(args.out.as_deref(), &buf)
}

fn cmd_inspect(args: InspectArgs) -> Result<()> {
    let model = Model::load(&args.model)?;
    println!("kind: {}", model.kind_name());
    println!("order: {}", model.order());
    println!("vocab_size: {}", model.vocab().len());
    match &model {
        Model::Mkn(m) => {
            for k in 1..=m.order() {
                let d = m.discounts(k);
                println!("discounts[{k}]: D1={} D2={} D3+={}", d[0], d[1], d[2]);
            }
        }
        Model::Hpylm(m) => {
            println!("samples: {}", m.sample_count());
            for d in 0..m.order() {
                let p = m.tree().params(d);
                println!("depth {d}: discount={} strength={}", p.discount, p.strength);
            }
            println!("contexts: {}", m.tree().node_count());
        }
        Model::Hpylmc(m) => {
            println!("samples: {}", m.sample_count());
            println!("direction: {}", m.seg.direction.as_str());
            println!("scheme: {}", m.seg.scheme.as_str());
            println!(
                "component_vocab_size: {}",
                m.decompositions().components.len()
            );
            let (g, f, h) = m.hyperparameters();
            for (d, p) in g.iter().enumerate() {
                println!(
                    "g depth {d}: discount={} strength={}",
                    p.discount, p.strength
                );
            }
            for (d, p) in f.iter().enumerate() {
                println!(
                    "f depth {d}: discount={} strength={}",
                    p.discount, p.strength
                );
            }
            println!("h: discount={} strength={}", h.discount, h.strength);
        }
    }
    Ok(())
}

fn cmd_vocab(args: VocabArgs) -> Result<()> {
    let sentences = read_sentences(&args.corpus)?;
    let vocab = Vocabulary::build(&sentences, args.min_count);
    let mut buf = Vec::new();
    vocab.dump(&mut buf).expect("in-memory write");
    out_or_stdout(args.out.as_deref(), &buf)
}

fn cmd_export_arpa(args: ExportArpaArgs) -> Result<()> {
    let model = Model::load(&args.model)?;
    let mkn = match &model {
        Model::Mkn(m) => m,
        _ => {
            return Err(Error::Config(
                "ARPA export is only available for mkn models".into(),
            ))
        }
    };
    let file = std::fs::File::create(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let mut out = std::io::BufWriter::new(file);
    mkn.write_arpa(&mut out)
        .map_err(|e| Error::io(&args.out, e))?;
    out.flush().map_err(|e| Error::io(&args.out, e))?;
    println!("wrote ARPA export to {}", args.out.display());
    Ok(())
}
