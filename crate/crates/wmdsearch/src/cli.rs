//! Command-line surface.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use wmdsearch_core::pv::{train_pv, PvConfig, PvMode};
use wmdsearch_core::retrieval::RankedResult;

use crate::config::{required, BackendEntry, OutputFormat, RunConfig, DEFAULT_EMBEDDING};
use crate::formats::{
    load_embeddings, read_vocab_file, save_embeddings, write_text_vectors, EmbeddingFormat,
};
use crate::inputs::{load_corpus, load_stoplist};
use crate::persist::{save_pv, IndexFile};
use crate::pipeline::{build_index, index_file, open_index, run_eval};

#[derive(Debug, Parser)]
#[command(
    name = "wmdsearch",
    version,
    about = "Statement retrieval with word mover's distance, LSA and paragraph vectors"
)]
pub struct Cli {
    /// Flat key = value config file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output format for reports and result lists.
    #[arg(long, global = true, value_parser = ["table", "csv"])]
    pub format: Option<String>,
    /// Worker threads for evaluation.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Stop-word file, one word per line [default: $WMDSEARCH_STOPLIST, else the shipped list].
    #[arg(long, global = true, value_name = "FILE")]
    pub stoplist: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an index for one backend and save it.
    Index(IndexArgs),
    /// Rank statements of a saved index for a query.
    Search(SearchArgs),
    /// Score backends on a trial file and write hits@k reports.
    Eval(EvalArgs),
    /// Train paragraph vectors on a corpus and save the model.
    TrainPv(TrainPvArgs),
    /// Inspect or restrict word-vector files.
    #[command(subcommand)]
    Embeddings(EmbeddingsCommand),
}

/// Settings shared by the commands that build models.
#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    /// Plain-text corpus file.
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<PathBuf>,
    /// Paragraph boundaries: any newline, or blank lines only.
    #[arg(long, value_parser = ["newline", "blank"])]
    pub paragraphs: Option<String>,
    /// Word-vector file for the embedding backends.
    #[arg(long, value_name = "FILE")]
    pub embedding: Option<PathBuf>,
    /// Word-vector file format (default: from the extension).
    #[arg(long, value_parser = ["word2vec", "text", "glove", "vec"])]
    pub embedding_format: Option<String>,
    /// Character n-gram vectors for out-of-vocabulary words.
    #[arg(long, value_name = "FILE")]
    pub ngrams: Option<PathBuf>,
    /// Ground metric for the transport backends.
    #[arg(long, value_parser = ["cosine", "euclidean"])]
    pub metric: Option<String>,
    /// Exact solves before pruning starts (wmd_pruned).
    #[arg(long)]
    pub prefetch: Option<usize>,
    /// LSA latent dimension.
    #[arg(long)]
    pub lsa_k: Option<usize>,
    #[arg(long)]
    pub pv_dim: Option<usize>,
    #[arg(long)]
    pub pv_window: Option<usize>,
    #[arg(long)]
    pub pv_negative: Option<usize>,
    #[arg(long)]
    pub pv_epochs: Option<usize>,
    #[arg(long)]
    pub pv_lr_start: Option<f64>,
    #[arg(long)]
    pub pv_lr_end: Option<f64>,
    #[arg(long)]
    pub pv_min_count: Option<usize>,
    /// Paragraph-vector query mapping.
    #[arg(long, value_parser = ["inference", "centroid"])]
    pub query_repr: Option<String>,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Backend kind, optionally `kind@name` for a named embedding in the config.
    #[arg(long)]
    pub backend: String,
    /// Where to write the index.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Saved index file.
    #[arg(long, value_name = "FILE")]
    pub index: PathBuf,
    /// Number of results.
    #[arg(short, long)]
    pub k: Option<usize>,
    /// Word-vector file to use instead of the one recorded in the index.
    #[arg(long, value_name = "FILE")]
    pub embedding: Option<PathBuf>,
    /// Query text; several words may be given unquoted.
    #[arg(required = true, num_args = 1..)]
    pub query: Vec<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Trial file.
    #[arg(long, value_name = "FILE")]
    pub trials: Option<PathBuf>,
    /// Comma list of backends, `kind` or `kind@name`.
    #[arg(long)]
    pub backends: Option<String>,
    /// Directory for report.csv, report.txt and ranks.csv.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainPvArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Which paragraph-vector model to train.
    #[arg(long, default_value = "pv_dm", value_parser = ["pv_dm", "pv_dbow", "pv_dm_plus_dbow"])]
    pub mode: String,
    /// Where to write the model.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum EmbeddingsCommand {
    /// Print entry count, dimension and the first tokens.
    Inspect {
        path: PathBuf,
        /// How many tokens to list.
        #[arg(long, default_value_t = 10)]
        first: usize,
        /// File format (default: from the extension).
        #[arg(long = "input-format", value_parser = ["word2vec", "text", "glove", "vec"])]
        input_format: Option<String>,
    },
    /// Keep only the tokens listed in a vocabulary file. The output layout
    /// follows the `--out` extension; standard output gets text.
    Filter {
        path: PathBuf,
        /// One token per line.
        #[arg(long, value_name = "FILE")]
        vocab: PathBuf,
        /// Output file (default: standard output).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Write a `<count> <dim>` header line.
        #[arg(long)]
        header: bool,
        /// File format (default: from the extension).
        #[arg(long = "input-format", value_parser = ["word2vec", "text", "glove", "vec"])]
        input_format: Option<String>,
    },
}

fn overrides_of(model: &ModelArgs) -> Vec<(&'static str, String)> {
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.to_string_lossy().into_owned());
    let num = |v: Option<usize>| v.map(|v| v.to_string());
    let real = |v: Option<f64>| v.map(|v| v.to_string());
    [
        ("corpus", path(&model.corpus)),
        ("paragraphs", model.paragraphs.clone()),
        ("embedding", path(&model.embedding)),
        ("embedding_format", model.embedding_format.clone()),
        ("ngrams", path(&model.ngrams)),
        ("metric", model.metric.clone()),
        ("prefetch", num(model.prefetch)),
        ("lsa_k", num(model.lsa_k)),
        ("pv_dim", num(model.pv_dim)),
        ("pv_window", num(model.pv_window)),
        ("pv_negative", num(model.pv_negative)),
        ("pv_epochs", num(model.pv_epochs)),
        ("pv_lr_start", real(model.pv_lr_start)),
        ("pv_lr_end", real(model.pv_lr_end)),
        ("pv_min_count", num(model.pv_min_count)),
        ("query_repr", model.query_repr.clone()),
    ]
    .into_iter()
    .filter_map(|(k, v)| v.map(|v| (k, v)))
    .collect()
}

impl Cli {
    /// Config file values, then global flags, then `extra` flag values.
    fn config(&self, extra: Vec<(&'static str, String)>) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let mut flags = extra;
        flags.extend(self.seed.map(|s| ("seed", s.to_string())));
        flags.extend(self.format.clone().map(|f| ("format", f)));
        flags.extend(self.jobs.map(|j| ("jobs", j.to_string())));
        flags.extend(
            self.stoplist
                .as_ref()
                .map(|p| ("stoplist", p.to_string_lossy().into_owned())),
        );
        for (key, value) in flags {
            cfg.set(key, &value, Path::new(""))
                .with_context(|| format!("--{}", key.replace('_', "-")))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs one parsed command, writing normal output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    match &cli.command {
        Command::Index(args) => cmd_index(cli, args, out),
        Command::Search(args) => cmd_search(cli, args, out),
        Command::Eval(args) => cmd_eval(cli, args, out),
        Command::TrainPv(args) => cmd_train_pv(cli, args, out),
        Command::Embeddings(cmd) => cmd_embeddings(cmd, out),
    }
}

fn cmd_index(cli: &Cli, args: &IndexArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let cfg = cli.config(overrides_of(&args.model))?;
    let entry: BackendEntry = args.backend.parse()?;
    let stops = load_stoplist(cfg.stoplist.as_deref())?;
    let corpus = load_corpus(required("corpus", &cfg.corpus)?, &stops, cfg.paragraphs)?;
    let source = entry
        .embedding_name()
        .map(|n| cfg.embedding(n))
        .transpose()?;
    let spec = cfg.spec(&entry);
    let index = build_index(&corpus, &spec, &stops, source.as_ref(), None)?;
    let file = index_file(&index, &corpus, source.as_ref());
    file.save(&args.out)?;
    let rankable = index.statement_ids().len();
    writeln!(
        out,
        "{}: {} statements ({} rankable), saved to {}",
        entry.label(),
        corpus.len(),
        rankable,
        args.out.display()
    )?;
    Ok(())
}

fn csv_line(fields: &[String]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(fields).expect("in-memory csv");
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("fields are UTF-8")
}

fn print_results(
    result: &RankedResult,
    texts: &[(usize, &str)],
    format: OutputFormat,
    out: &mut dyn Write,
) -> anyhow::Result<()> {
    let text = |id: usize| texts.iter().find(|(i, _)| *i == id).map_or("", |(_, t)| t);
    match format {
        OutputFormat::Csv => {
            write!(
                out,
                "{}",
                csv_line(&["rank".into(), "id".into(), "score".into(), "text".into()])
            )?;
            for (r, (id, score)) in result.results.iter().enumerate() {
                let row = [
                    (r + 1).to_string(),
                    id.to_string(),
                    format!("{score:.6}"),
                    text(*id).to_string(),
                ];
                write!(out, "{}", csv_line(&row))?;
            }
        }
        OutputFormat::Table => {
            writeln!(out, "{:>4}  {:>6}  {:>10}  text", "rank", "id", "score")?;
            for (r, (id, score)) in result.results.iter().enumerate() {
                writeln!(
                    out,
                    "{:>4}  {:>6}  {:>10.6}  {}",
                    r + 1,
                    id,
                    score,
                    text(*id)
                )?;
            }
        }
    }
    Ok(())
}

fn cmd_search(cli: &Cli, args: &SearchArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let mut extra = Vec::new();
    extra.extend(args.k.map(|k| ("k", k.to_string())));
    extra.extend(
        args.embedding
            .as_ref()
            .map(|p| ("embedding", p.to_string_lossy().into_owned())),
    );
    let cfg = cli.config(extra)?;
    let file = IndexFile::load(&args.index)?;
    let query = args.query.join(" ");
    let source = match (&args.embedding, &file.source) {
        (Some(_), recorded) => {
            let mut s = cfg.embedding(DEFAULT_EMBEDDING)?;
            if let Some(r) = recorded {
                s.format = s.format.or(r.format);
                s.ngrams = s.ngrams.or_else(|| r.ngrams.clone());
            }
            Some(s)
        }
        (None, _) => None,
    };
    let index = open_index(&file, source.as_ref(), &[&query])?;
    let result = index.rank(&query, cfg.k)?;
    if result.dropped > 0 {
        log::warn!(
            "{} query tokens have no representation in this index",
            result.dropped
        );
    }
    let texts: Vec<(usize, &str)> = file
        .statements
        .iter()
        .map(|s| (s.id, s.raw.as_str()))
        .collect();
    print_results(&result, &texts, cfg.format, out)
}

fn cmd_eval(cli: &Cli, args: &EvalArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let mut extra = overrides_of(&args.model);
    extra.extend(
        args.trials
            .as_ref()
            .map(|p| ("trials", p.to_string_lossy().into_owned())),
    );
    extra.extend(args.backends.clone().map(|b| ("backends", b)));
    extra.extend(
        args.out
            .as_ref()
            .map(|p| ("out", p.to_string_lossy().into_owned())),
    );
    let cfg = cli.config(extra)?;
    let report = run_eval(&cfg)?;
    if let Some(dir) = &cfg.out {
        report.write(dir)?;
    }
    write!(out, "{}", report.render(cfg.format))?;
    if cfg.format == OutputFormat::Table {
        writeln!(out, "trials: {}", report.trials)?;
    }
    if report.reports.iter().all(|r| r.error.is_some()) {
        bail!("every backend failed");
    }
    Ok(())
}

fn cmd_train_pv(cli: &Cli, args: &TrainPvArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let cfg = cli.config(overrides_of(&args.model))?;
    let mode: PvMode = args.mode.parse()?;
    let stops = load_stoplist(cfg.stoplist.as_deref())?;
    let corpus = load_corpus(required("corpus", &cfg.corpus)?, &stops, cfg.paragraphs)?;
    let config = PvConfig {
        mode,
        seed: cfg.seed,
        ..cfg.pv
    };
    let model = train_pv(&corpus, &config)?;
    save_pv(&model, &args.out)?;
    writeln!(
        out,
        "{}: {} statements, vocabulary {}, vector size {}, saved to {}",
        mode.name(),
        model.doc_ids().len(),
        model.vocab().len(),
        model.repr_dim(),
        args.out.display()
    )?;
    Ok(())
}

fn input_format(name: &Option<String>) -> anyhow::Result<Option<EmbeddingFormat>> {
    Ok(name.as_deref().map(str::parse).transpose()?)
}

fn cmd_embeddings(cmd: &EmbeddingsCommand, out: &mut dyn Write) -> anyhow::Result<()> {
    match cmd {
        EmbeddingsCommand::Inspect {
            path,
            first,
            input_format: fmt,
        } => {
            let format = input_format(fmt)?.unwrap_or_else(|| EmbeddingFormat::from_path(path));
            let (table, report) = load_embeddings(path, Some(format), None)?;
            writeln!(out, "format: {}", format.name())?;
            writeln!(out, "count: {}", table.len())?;
            writeln!(out, "dim: {}", table.dim())?;
            if report.duplicates > 0 {
                writeln!(out, "duplicates: {}", report.duplicates)?;
            }
            let shown: Vec<&str> = table
                .tokens()
                .iter()
                .take(*first)
                .map(String::as_str)
                .collect();
            writeln!(out, "first: {}", shown.join(" "))?;
        }
        EmbeddingsCommand::Filter {
            path,
            vocab,
            out: target,
            header,
            input_format: fmt,
        } => {
            let keep = read_vocab_file(vocab)?;
            let (table, _) = load_embeddings(path, input_format(fmt)?, Some(&keep))?;
            match target {
                Some(p) => match EmbeddingFormat::from_path(p) {
                    EmbeddingFormat::Text { header: by_ext } if *header || by_ext != Some(true) => {
                        let file =
                            std::fs::File::create(p).with_context(|| p.display().to_string())?;
                        write_text_vectors(&table, std::io::BufWriter::new(file), *header)
                            .with_context(|| p.display().to_string())?;
                    }
                    _ => save_embeddings(&table, p)?,
                },
                None => write_text_vectors(&table, &mut *out, *header)?,
            }
        }
    }
    Ok(())
}
