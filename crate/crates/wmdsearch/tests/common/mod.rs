//! Synthetic corpus, embedding, trial and config files on disk.

#![allow(dead_code)]

#[path = "../../../core/tests/support/mod.rs"]
pub mod support;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::Rng;
use tempfile::TempDir;
use wmdsearch::formats::write_text_vectors;
use wmdsearch_core::text::Statement;

pub const BIN: &str = env!("CARGO_BIN_EXE_wmdsearch");

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub struct EvalFixture {
    pub dir: TempDir,
    pub corpus: Vec<Statement>,
    pub trials: usize,
    pub queries_per_trial: usize,
}

impl EvalFixture {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn config(&self) -> PathBuf {
        self.path("run.cfg")
    }
}

/// `statements` distinct random statements over `vocab` words, one per line;
/// `trials` trials whose targets are evenly spaced statements. Query 1 is the
/// target verbatim, query 2 its first half, query 3 its words shuffled plus a
/// random word, query 4 random words.
pub fn eval_fixture(seed: u64, statements: usize, trials: usize, backends: &str) -> EvalFixture {
    let mut r = support::rng(seed);
    let vocab = 80;
    let embeddings = support::random_embeddings(&mut r, vocab, 8);
    let mut seen = BTreeSet::new();
    let mut corpus = Vec::with_capacity(statements);
    while corpus.len() < statements {
        let mut s = support::random_corpus(&mut r, 1, vocab, 10).remove(0);
        if seen.insert(s.raw.clone()) {
            s.id = corpus.len();
            corpus.push(s);
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let text: String = corpus.iter().map(|s| format!("{}\n", s.raw)).collect();
    std::fs::write(dir.path().join("corpus.txt"), text).unwrap();
    let file = std::fs::File::create(dir.path().join("emb.txt")).unwrap();
    write_text_vectors(embeddings.table(), file, false).unwrap();

    let mut trial_text = String::new();
    for t in 0..trials {
        let target = &corpus[t * statements / trials];
        let words = &target.tokens;
        let half = words[..words.len().div_ceil(2)].join(" ");
        let mut shuffled = words.clone();
        shuffled.shuffle(&mut r);
        shuffled.push(format!("w{}", r.random_range(0..vocab)));
        let noise: Vec<String> = (0..3)
            .map(|_| format!("w{}", r.random_range(0..vocab)))
            .collect();
        writeln!(trial_text, "trial t{t}\ntarget {}", target.raw).unwrap();
        for q in [
            target.raw.clone(),
            half,
            shuffled.join(" "),
            noise.join(" "),
        ] {
            writeln!(trial_text, "query {q}").unwrap();
        }
    }
    std::fs::write(dir.path().join("trials.txt"), trial_text).unwrap();
    let config = format!(
        "# synthetic evaluation\ncorpus = corpus.txt\ntrials = trials.txt\nembedding = emb.txt\n\
         backends = {backends}\nlsa_k = 10\npv_dim = 16\npv_epochs = 10\npv_window = 3\n"
    );
    std::fs::write(dir.path().join("run.cfg"), config).unwrap();
    EvalFixture {
        dir,
        corpus,
        trials,
        queries_per_trial: 4,
    }
}

/// Runs the binary with `args`, with no stoplist override in the environment.
pub fn run(args: &[&str]) -> Output {
    run_with_stoplist_env(args, None)
}

/// Runs the binary with `args` and the stoplist variable set to `stoplist`.
pub fn run_with_stoplist_env(args: &[&str], stoplist: Option<&Path>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("WMDSEARCH_STOPLIST");
    if let Some(p) = stoplist {
        cmd.env("WMDSEARCH_STOPLIST", p);
    }
    cmd.output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}
