//! `compoeval` command-line driver.

mod backend;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use compoeval::bridge::{translate_batch, BridgeError, TranslationRecord};
use compoeval::corpus::ParallelCorpus;
use compoeval::eval::{evaluate_overgen, evaluate_pairs, EvalResult, TranslationTable};
use compoeval::report::pipeline::{
    build_suites, read_jsonl, report_axes, run_pipeline, sources_of, write_jsonl, write_reports, Inputs,
    PipelineConfig, PipelineError,
};
use compoeval::report::{aggregate, emit, GroupKey, Weighting};
use compoeval::suites::{OvergenItem, TestPair};
use compoeval::templates::{BoundSentence, Role, SentenceSource};
use compoeval::text::derive_seed;

use backend::BackendArgs;

#[derive(Parser)]
#[command(name = "compoeval", version, about = "Compositionality test suites for machine translation")]
struct Cli {
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML file with pipeline settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for evaluation.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample template instances as JSON lines.
    Generate(GenerateArgs),
    /// Swap the subject or object noun of generated sentences.
    Perturb(PerturbArgs),
    /// Build every configured test suite.
    Suite(SuiteArgs),
    /// Translate the sources of a suite with one or more backends.
    Translate(TranslateArgs),
    /// Score translations.
    Evaluate(EvaluateArgs),
    /// Render tables and plots from results.
    Report(ReportArgs),
    /// Suite, translate, evaluate and report in one run directory.
    Pipeline(PipelineArgs),
    /// Exact phrase search over a parallel corpus.
    Corpus(CorpusArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Grammar {
    Synthetic,
    SemiNatural,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "synthetic")]
    data: Grammar,
    /// Template id; all templates when omitted.
    #[arg(long)]
    template: Option<u32>,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    #[value(alias = "np")]
    Subject,
    #[value(alias = "vp")]
    Object,
}

#[derive(Args)]
struct PerturbArgs {
    /// JSON lines written by `generate`.
    input: PathBuf,
    #[arg(long, value_enum, default_value = "synthetic")]
    data: Grammar,
    #[arg(long, value_enum, default_value = "subject")]
    role: Target,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    /// Directory for pairs.jsonl and overgen.jsonl.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct TranslateArgs {
    /// Suite directory holding pairs.jsonl and overgen.jsonl.
    #[arg(long)]
    suite: PathBuf,
    #[command(flatten)]
    backends: BackendArgs,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    suite: PathBuf,
    #[arg(long)]
    translations: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    results: PathBuf,
    /// Directory for tables and plots.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Print one aggregate table grouped by these keys instead.
    #[arg(long, value_delimiter = ',')]
    group_by: Vec<String>,
    /// Keys kept after averaging the remaining ones with equal weight.
    #[arg(long, value_delimiter = ',')]
    keep: Vec<String>,
    #[arg(long, default_value = "tsv")]
    format: String,
    /// Training-size columns in order.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<String>,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    backends: BackendArgs,
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    phrase: String,
    #[arg(long)]
    limit: Option<usize>,
}

/// Exit status for an error anywhere in the chain.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<BridgeError>() {
            return 2;
        }
        if let Some(p) = cause.downcast_ref::<PipelineError>() {
            return p.exit_code() as u8;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<PipelineConfig> {
    let mut config = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let mut c: PipelineConfig =
                toml::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", p.display())))?;
            let base = p.parent().unwrap_or(Path::new(""));
            for f in [
                &mut c.lexicon,
                &mut c.synthetic_templates,
                &mut c.seminatural_templates,
                &mut c.fillers,
                &mut c.synonyms,
                &mut c.idioms,
                &mut c.corpus_source,
                &mut c.corpus_target,
            ] {
                if let Some(rel) = f.as_mut().filter(|r| r.is_relative()) {
                    *rel = base.join(&*rel);
                }
            }
            c
        }
        None => PipelineConfig::default(),
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            bail!(PipelineError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let config = load_config(cli.config.as_deref(), cli.seed)?;
    match cli.command {
        Command::Generate(a) => generate(&config, a),
        Command::Perturb(a) => perturb(&config, a),
        Command::Suite(a) => suite(&config, a),
        Command::Translate(a) => translate(a),
        Command::Evaluate(a) => evaluate(&config, a),
        Command::Report(a) => report(&config, a),
        Command::Pipeline(a) => pipeline(&config, a),
        Command::Corpus(a) => corpus(a),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_lines<T: Serialize>(path: Option<&Path>, rows: &[T]) -> Result<()> {
    let mut w = output(path)?;
    for r in rows {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn grammar(inputs: &Inputs, g: Grammar) -> &dyn SentenceSource {
    match g {
        Grammar::Synthetic => &inputs.synthetic,
        Grammar::SemiNatural => &inputs.seminatural,
    }
}

fn generate(config: &PipelineConfig, a: GenerateArgs) -> Result<()> {
    let inputs = Inputs::load(config)?;
    let source = grammar(&inputs, a.data);
    let ids = match a.template {
        Some(t) => vec![t],
        None => source.template_ids(),
    };
    let mut rows = Vec::new();
    for t in ids {
        let seed = derive_seed(config.seed, &format!("generate/{t}"));
        rows.extend(source.instantiate(t, a.count, seed).map_err(PipelineError::from)?);
    }
    write_lines(a.out.as_deref(), &rows)
}

#[derive(Serialize)]
struct PerturbedPair {
    template_id: u32,
    base: String,
    variant: String,
}

fn perturb(config: &PipelineConfig, a: PerturbArgs) -> Result<()> {
    let inputs = Inputs::load(config)?;
    let source = grammar(&inputs, a.data);
    let role = match a.role {
        Target::Subject => Role::Subject,
        Target::Object => Role::Object,
    };
    let sentences: Vec<BoundSentence> = read_jsonl(&a.input)?;
    let mut rows = Vec::with_capacity(sentences.len());
    for (i, s) in sentences.iter().enumerate() {
        let seed = derive_seed(config.seed, &format!("perturb/{i}"));
        let v = source.perturb(s, role, seed).map_err(PipelineError::from)?;
        rows.push(PerturbedPair {
            template_id: s.template_id,
            base: s.text.clone(),
            variant: v.text,
        });
    }
    write_lines(a.out.as_deref(), &rows)
}

fn suite(config: &PipelineConfig, a: SuiteArgs) -> Result<()> {
    let inputs = Inputs::load(config)?;
    let mut seeds = BTreeMap::from([("master".to_string(), config.seed)]);
    let mut warnings = Vec::new();
    let (pairs, items) = build_suites(config, &inputs, &mut seeds, &mut warnings)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_jsonl(&a.out.join("pairs.jsonl"), &pairs)?;
    write_jsonl(&a.out.join("overgen.jsonl"), &items)?;
    fs::write(a.out.join("seeds.json"), serde_json::to_string_pretty(&seeds)? + "\n")?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    eprintln!("{} pairs, {} overgeneralisation items", pairs.len(), items.len());
    Ok(())
}

fn read_suite(dir: &Path) -> Result<(Vec<TestPair>, Vec<OvergenItem>)> {
    let pairs = dir.join("pairs.jsonl");
    let items = dir.join("overgen.jsonl");
    if !pairs.exists() && !items.exists() {
        bail!(PipelineError::Config(format!("{} holds no suite files", dir.display())));
    }
    let load_pairs = if pairs.exists() { read_jsonl(&pairs)? } else { Vec::new() };
    let load_items = if items.exists() { read_jsonl(&items)? } else { Vec::new() };
    Ok((load_pairs, load_items))
}

fn translate(a: TranslateArgs) -> Result<()> {
    let specs = a.backends.specs()?;
    let (pairs, items) = read_suite(&a.suite)?;
    let sources = sources_of(&pairs, &items);
    let mut records: Vec<TranslationRecord> = Vec::new();
    for b in &specs {
        b.validate()?;
        records.extend(translate_batch(&sources, b)?);
    }
    write_jsonl(&a.out, &records)?;
    eprintln!("{} translations of {} sources", records.len(), sources.len());
    Ok(())
}

fn evaluate(config: &PipelineConfig, a: EvaluateArgs) -> Result<()> {
    let inputs = Inputs::load(config)?;
    let (pairs, items) = read_suite(&a.suite)?;
    let records: Vec<TranslationRecord> = read_jsonl(&a.translations)?;
    let table = TranslationTable::from_records(&records);
    let mut results = evaluate_pairs(&pairs, &table, &inputs.synonyms).map_err(PipelineError::from)?;
    results.extend(evaluate_overgen(&items, &table, &inputs.idioms).map_err(PipelineError::from)?);
    write_jsonl(&a.out, &results)?;
    eprintln!("{} results", results.len());
    Ok(())
}

fn parse_keys(keys: &[String]) -> Result<Vec<GroupKey>> {
    keys.iter().map(|k| Ok(k.parse::<GroupKey>().map_err(PipelineError::from)?)).collect()
}

fn report(config: &PipelineConfig, a: ReportArgs) -> Result<()> {
    let results: Vec<EvalResult> = read_jsonl(&a.results)?;
    if !a.group_by.is_empty() {
        let by = parse_keys(&a.group_by)?;
        let mut table = aggregate(&results, &by).map_err(PipelineError::from)?;
        if !a.keep.is_empty() {
            table = table.rollup(&parse_keys(&a.keep)?, Weighting::Equal).map_err(PipelineError::from)?;
        }
        print!("{}", emit(&table, &a.format).map_err(PipelineError::from)?);
        return Ok(());
    }
    let Some(out) = a.out else {
        bail!(PipelineError::Config("report needs --out or --group-by".into()));
    };
    let inputs = Inputs::load(config)?;
    let sizes = if a.sizes.is_empty() { config.sizes.clone() } else { a.sizes };
    let (sizes, checkpoints, templates) = report_axes(&results, &sizes);
    let synonyms: Vec<String> = inputs.synonyms.iter().map(|s| s.british.clone()).collect();
    for p in write_reports(&out, &results, &sizes, &checkpoints, &synonyms, &templates)? {
        println!("{}", out.join(p).display());
    }
    Ok(())
}

fn pipeline(config: &PipelineConfig, a: PipelineArgs) -> Result<()> {
    let specs = a.backends.specs()?;
    let run = run_pipeline(config, &specs, &a.out)?;
    for w in &run.manifest.warnings {
        eprintln!("warning: {w}");
    }
    let counts: Vec<String> = run.manifest.counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("{}: {}", run.dir.display(), counts.join(" "));
    Ok(())
}

fn corpus(a: CorpusArgs) -> Result<()> {
    let c = ParallelCorpus::ingest(&a.source, &a.target).map_err(PipelineError::from)?;
    let hits = c.find_exact(&a.phrase).map_err(PipelineError::from)?;
    let mut out = std::io::stdout().lock();
    for id in hits.into_iter().take(a.limit.unwrap_or(usize::MAX)) {
        writeln!(out, "{id}\t{}\t{}", c.source(id).unwrap_or(""), c.target(id).unwrap_or(""))?;
    }
    Ok(())
}

