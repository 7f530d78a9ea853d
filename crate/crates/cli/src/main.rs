use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use viramkit::backends::{EndpointConfig, HttpBackend};
use viramkit::corpus::{
    corpus_stats, load_benchmark, make_variant, read_parallel, write_parallel, BenchmarkFormat, PunctuationInventory,
    VariantKind,
};
use viramkit::metrics::{build_report, MetricConfig, ReportBackends};
use viramkit::prompts::{reference_shots, select_and_exclude_shots, Strategy, TemplateSet};
use viramkit::restorer::{derive_labels, evaluate_restorer, restore, train, LabelSet, RestorerModel, TrainConfig};
use viramkit::runner::{load_report, render_report, run_experiment, ExperimentConfig, ReportFormat, REPORT_FILE};

#[derive(Parser)]
#[command(name = "viramkit", version, about = "Punctuation robustness toolkit for English-to-Marathi MT")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Benchmark statistics and fine-tuning corpus variants
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Train, apply and evaluate the punctuation restorer
    #[command(subcommand)]
    Restore(RestoreCmd),
    /// Score hypotheses against references
    #[command(subcommand)]
    Metrics(MetricsCmd),
    /// Render LLM prompts
    #[command(subcommand)]
    Prompts(PromptsCmd),
    /// Run experiments and print their reports
    #[command(subcommand)]
    Bench(BenchCmd),
}

#[derive(Subcommand)]
enum CorpusCmd {
    /// Write one data variant of a parallel corpus
    MakeVariants {
        /// Source and target files, one sentence per line
        #[arg(long = "in", num_args = 2, value_names = ["SRC", "TGT"], required = true)]
        input: Vec<PathBuf>,
        /// with, without, combined2x or alternate
        #[arg(long)]
        kind: VariantKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Count benchmark instances per punctuation type
    Stats {
        #[arg(long)]
        benchmark: PathBuf,
    },
}

#[derive(Subcommand)]
enum RestoreCmd {
    Train {
        /// Punctuated sentences, one per line
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    Apply {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    Eval {
        #[arg(long)]
        model: PathBuf,
        /// Punctuated sentences, one per line
        #[arg(long)]
        gold: PathBuf,
    },
}

#[derive(Subcommand)]
enum MetricsCmd {
    Score(ScoreArgs),
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    hyp: PathBuf,
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Source sentences, needed with --score-url
    #[arg(long)]
    src: Option<PathBuf>,
    #[arg(long)]
    embed_url: Option<String>,
    #[arg(long)]
    score_url: Option<String>,
    #[arg(long, default_value = "system")]
    name: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum PromptsCmd {
    Render {
        /// zero_restore, zero_direct, three_restore, three_direct or oracle_direct
        #[arg(long)]
        strategy: Strategy,
        #[arg(long)]
        sentence: String,
        /// Comma-separated benchmark ids; requires --benchmark
        #[arg(long, value_delimiter = ',')]
        shots: Vec<String>,
        #[arg(long)]
        benchmark: Option<PathBuf>,
        #[arg(long)]
        templates: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BenchCmd {
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    Report {
        #[arg(long)]
        dir: PathBuf,
        /// markdown, csv or json
        #[arg(long, default_value = "markdown")]
        format: ReportFormat,
        /// Write to this file instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::to_string).collect())
}

fn non_blank(lines: Vec<String>) -> Vec<String> {
    lines.into_iter().filter(|l| !l.trim().is_empty()).collect()
}

fn corpus(cmd: CorpusCmd) -> Result<()> {
    match cmd {
        CorpusCmd::MakeVariants { input, kind, out } => {
            let base = read_parallel(&input[0], &input[1])?;
            let variant = make_variant(&base, kind, &PunctuationInventory::default())?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let written = write_parallel(&variant, Some(&base.name), &out)?;
            println!("{} pairs -> {}", variant.len(), written[0].display());
        }
        CorpusCmd::Stats { benchmark } => {
            let b = load_benchmark(&benchmark, BenchmarkFormat::from_path(&benchmark))?;
            println!("instances\t{}", b.len());
            for (ty, n) in corpus_stats(&b) {
                println!("{ty}\t{n}");
            }
        }
    }
    Ok(())
}

fn restore_cmd(cmd: RestoreCmd) -> Result<()> {
    let inv = PunctuationInventory::default();
    let labels = LabelSet::default();
    let derive_all = |path: &Path| -> Result<_> {
        non_blank(read_lines(path)?)
            .iter()
            .map(|l| derive_labels(l, &inv, &labels).map_err(anyhow::Error::from))
            .collect::<Result<Vec<_>>>()
    };
    match cmd {
        RestoreCmd::Train { corpus, epochs, seed, out } => {
            let data = derive_all(&corpus)?;
            let model = train(&data, &TrainConfig { epochs, seed, label_set: labels.clone() })?;
            model.save(&out)?;
            println!("trained on {} sentences -> {}", data.len(), out.display());
        }
        RestoreCmd::Apply { model, input, out } => {
            let model = RestorerModel::load(&model)?;
            let mut f = fs::File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            for line in read_lines(&input)? {
                let restored = if line.trim().is_empty() { String::new() } else { restore(&model, &line, &inv)? };
                writeln!(f, "{restored}")?;
            }
        }
        RestoreCmd::Eval { model, gold } => {
            let model = RestorerModel::load(&model)?;
            let eval = evaluate_restorer(&model, &derive_all(&gold)?)?;
            println!("{}", serde_json::to_string_pretty(&eval)?);
        }
    }
    Ok(())
}

fn metrics_cmd(cmd: MetricsCmd) -> Result<()> {
    let MetricsCmd::Score(a) = cmd;
    let hyps = read_lines(&a.hyp)?;
    let refs = read_lines(&a.reference)?;
    let srcs = a.src.as_deref().map(read_lines).transpose()?;
    let embedder = a.embed_url.map(|u| HttpBackend::new(EndpointConfig::new(u))).transpose()?;
    let scorer = a.score_url.map(|u| HttpBackend::new(EndpointConfig::new(u))).transpose()?;
    if scorer.is_some() && srcs.is_none() {
        bail!("--score-url needs --src");
    }
    let backends = ReportBackends {
        embedder: embedder.as_ref().map(|b| b as _),
        scorer: scorer.as_ref().map(|b| b as _),
    };
    let report = build_report(&a.name, srcs.as_deref(), &hyps, &refs, backends, &MetricConfig::default())?;
    fs::write(&a.out, serde_json::to_string_pretty(&report)? + "\n")
        .with_context(|| format!("writing {}", a.out.display()))?;
    println!("BLEU {:.2}  chrF++ {:.2}  chrF2++ {:.2}  N {}", report.bleu, report.chrf_pp, report.chrf2_pp, report.n_instances);
    Ok(())
}

fn prompts_cmd(cmd: PromptsCmd) -> Result<()> {
    let PromptsCmd::Render { strategy, sentence, shots, benchmark, templates } = cmd;
    let templates = match templates {
        Some(d) => TemplateSet::from_dir(&d)?,
        None => TemplateSet::embedded(),
    };
    let shots = if strategy.shot_count() == 0 {
        if !shots.is_empty() {
            bail!("{strategy} takes no shots");
        }
        Vec::new()
    } else if shots.is_empty() {
        reference_shots()
    } else {
        let Some(path) = benchmark else { bail!("--shots needs --benchmark") };
        let b = load_benchmark(&path, BenchmarkFormat::from_path(&path))?;
        select_and_exclude_shots(&b, &shots)?.0
    };
    let text = templates.render(strategy, &sentence, &shots)?;
    writeln!(std::io::stdout().lock(), "{text}")?;
    Ok(())
}

fn bench_cmd(cmd: BenchCmd) -> Result<()> {
    match cmd {
        BenchCmd::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = run_experiment(&cfg)?;
            print!("{}", render_report(&out.table, ReportFormat::Markdown)?);
            eprintln!("artifacts in {}", out.output_dir.display());
        }
        BenchCmd::Report { dir, format, out } => {
            let table = load_report(&dir.join(REPORT_FILE))?;
            let text = render_report(&table, format)?;
            match out {
                Some(p) => fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => std::io::stdout().lock().write_all(text.as_bytes())?,
            }
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Corpus(c) => corpus(c),
        Command::Restore(c) => restore_cmd(c),
        Command::Metrics(c) => metrics_cmd(c),
        Command::Prompts(c) => prompts_cmd(c),
        Command::Bench(c) => bench_cmd(c),
    }
}
