//! Paragraph vectors trained with negative sampling.
//!
//! * PV-DM predicts each word from the average of its paragraph vector and
//!   the surrounding window of input word vectors.
//! * PV-DBOW predicts each word from the paragraph vector alone.
//! * The combined mode trains both independently and concatenates the
//!   paragraph vectors.
//!
//! Training is single threaded and fully determined by the seed.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{cosine, DenseMatrix};
use crate::text::Statement;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum PvMode {
    #[default]
    Dm,
    Dbow,
    DmPlusDbow,
}

impl PvMode {
    pub fn name(self) -> &'static str {
        match self {
            PvMode::Dm => "pv_dm",
            PvMode::Dbow => "pv_dbow",
            PvMode::DmPlusDbow => "pv_dm_plus_dbow",
        }
    }

    /// The single-network modes trained for this mode, in concatenation order.
    pub fn parts(self) -> &'static [PvMode] {
        match self {
            PvMode::Dm => &[PvMode::Dm],
            PvMode::Dbow => &[PvMode::Dbow],
            PvMode::DmPlusDbow => &[PvMode::Dm, PvMode::Dbow],
        }
    }
}

impl core::str::FromStr for PvMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pv_dm" | "dm" => Ok(PvMode::Dm),
            "pv_dbow" | "dbow" => Ok(PvMode::Dbow),
            "pv_dm_plus_dbow" | "dm_plus_dbow" => Ok(PvMode::DmPlusDbow),
            other => Err(Error::InvalidArgument(alloc::format!(
                "unknown paragraph vector mode {other:?}"
            ))),
        }
    }
}

/// How a query is mapped into paragraph-vector space.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum QueryRepr {
    /// Fit a fresh paragraph vector with the word weights frozen.
    #[default]
    Inference,
    /// Average of the query's word vectors: input vectors for PV-DM, output
    /// vectors for PV-DBOW.
    WordCentroid,
}

impl QueryRepr {
    pub fn name(self) -> &'static str {
        match self {
            QueryRepr::Inference => "inference",
            QueryRepr::WordCentroid => "centroid",
        }
    }
}

impl core::str::FromStr for QueryRepr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inference" | "infer" => Ok(QueryRepr::Inference),
            "centroid" | "word_centroid" => Ok(QueryRepr::WordCentroid),
            other => Err(Error::InvalidArgument(alloc::format!(
                "unknown query representation {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvConfig {
    pub mode: PvMode,
    pub dim: usize,
    /// Context words on each side of the predicted word (PV-DM).
    pub window: usize,
    pub negative: usize,
    pub epochs: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub min_count: usize,
    pub seed: u64,
}

impl Default for PvConfig {
    fn default() -> Self {
        Self {
            mode: PvMode::Dm,
            dim: 100,
            window: 5,
            negative: 5,
            epochs: 40,
            lr_start: 0.025,
            lr_end: 0.0001,
            min_count: 1,
            seed: 0,
        }
    }
}

impl PvConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| {
            Err(Error::InvalidArgument(alloc::format!(
                "paragraph vector {what}"
            )))
        };
        if self.dim == 0 {
            return bad("dim must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.negative == 0 {
            return bad("negative must be at least 1");
        }
        if self.window == 0 {
            return bad("window must be positive");
        }
        if !(self.lr_start > 0.0 && self.lr_end >= 0.0 && self.lr_end <= self.lr_start) {
            return bad("learning rates must satisfy 0 <= end <= start, start > 0");
        }
        Ok(())
    }
}

/// Retained words, most frequent first, with their corpus counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: BTreeMap<String, usize>,
}

impl Vocabulary {
    pub fn build(corpus: &[Statement], min_count: usize) -> Self {
        let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
        for s in corpus {
            for t in &s.tokens {
                *freq.entry(t.as_str()).or_insert(0) += 1;
            }
        }
        let mut kept: Vec<(&str, u64)> = freq
            .into_iter()
            .filter(|(_, c)| *c >= min_count.max(1) as u64)
            .collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        Self::from_parts(
            kept.iter().map(|(w, _)| String::from(*w)).collect(),
            kept.iter().map(|(_, c)| *c).collect(),
        )
        .expect("words are unique")
    }

    pub fn from_parts(words: Vec<String>, counts: Vec<u64>) -> Result<Self> {
        if words.len() != counts.len() {
            return Err(Error::DimensionMismatch {
                expected: words.len(),
                found: counts.len(),
            });
        }
        let mut index = BTreeMap::new();
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::InvalidArgument(alloc::format!(
                    "duplicate vocabulary word {w:?}"
                )));
            }
        }
        Ok(Self {
            words,
            counts,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// In-vocabulary token ids, in order; unknown tokens are skipped.
    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().filter_map(|t| self.id(t)).collect()
    }
}

/// Cumulative unigram^0.75 distribution for drawing noise words.
#[derive(Debug, Clone, PartialEq)]
struct NoiseTable {
    cumulative: Vec<f64>,
}

impl NoiseTable {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += libm::pow(c as f64, 0.75);
                acc
            })
            .collect();
        Self { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let x = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= x)
            .min(self.cumulative.len() - 1)
    }

    /// `n` draws, dropping any that hit the target word.
    fn negatives(&self, rng: &mut ChaCha8Rng, n: usize, target: usize) -> Vec<usize> {
        (0..n)
            .map(|_| self.sample(rng))
            .filter(|&w| w != target)
            .collect()
    }
}

/// Weights of one single-mode network.
#[derive(Debug, Clone, PartialEq)]
pub struct PvNet {
    /// One paragraph vector per row.
    pub docs: DenseMatrix,
    /// Input word vectors; PV-DBOW has none.
    pub words: Option<DenseMatrix>,
    /// Output (context) word vectors used by the sampled softmax.
    pub outputs: DenseMatrix,
}

/// One negative-sampling prediction: the average of the paragraph vector
/// and the `inputs` word vectors scores `target` against `negatives`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NsExample {
    pub doc: usize,
    pub inputs: Vec<usize>,
    pub target: usize,
    pub negatives: Vec<usize>,
}

fn log_sigmoid_neg(x: f64) -> f64 {
    // -ln σ(x), computed without overflow
    if x > 0.0 {
        libm::log1p(libm::exp(-x))
    } else {
        -x + libm::log1p(libm::exp(x))
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn hidden(net: &PvNet, doc: &[f64], inputs: &[usize]) -> Vec<f64> {
    let mut h = doc.to_vec();
    if let (Some(words), false) = (&net.words, inputs.is_empty()) {
        for &w in inputs {
            for (x, y) in h.iter_mut().zip(words.row(w)) {
                *x += y;
            }
        }
        let n = (1 + inputs.len()) as f64;
        h.iter_mut().for_each(|x| *x /= n);
    }
    h
}

fn uses_inputs(net: &PvNet, ex: &NsExample) -> bool {
    net.words.is_some() && !ex.inputs.is_empty()
}

fn loss_with_doc(net: &PvNet, doc: &[f64], ex: &NsExample) -> f64 {
    let h = hidden(net, doc, &ex.inputs);
    let mut loss = log_sigmoid_neg(dot(net.outputs.row(ex.target), &h));
    for &n in &ex.negatives {
        loss += log_sigmoid_neg(-dot(net.outputs.row(n), &h));
    }
    loss
}

/// Negative-sampling loss `−ln σ(o_t·h) − Σ ln σ(−o_n·h)` of one example.
pub fn example_loss(net: &PvNet, ex: &NsExample) -> f64 {
    loss_with_doc(net, net.docs.row(ex.doc), ex)
}

/// Gradient of one example in sparse form.
struct SparseGrad {
    /// With respect to the hidden vector, already divided by the averaging count.
    input: Vec<f64>,
    outputs: Vec<(usize, Vec<f64>)>,
}

fn backprop(net: &PvNet, doc: &[f64], ex: &NsExample) -> SparseGrad {
    let h = hidden(net, doc, &ex.inputs);
    let mut eh = vec![0.0; h.len()];
    let mut outputs = Vec::with_capacity(1 + ex.negatives.len());
    let mut visit = |word: usize, label: f64| {
        let o = net.outputs.row(word);
        let g = sigmoid(dot(o, &h)) - label;
        for (e, x) in eh.iter_mut().zip(o) {
            *e += g * x;
        }
        outputs.push((word, h.iter().map(|x| g * x).collect()));
    };
    visit(ex.target, 1.0);
    for &n in &ex.negatives {
        visit(n, 0.0);
    }
    if uses_inputs(net, ex) {
        let n = (1 + ex.inputs.len()) as f64;
        eh.iter_mut().for_each(|x| *x /= n);
    }
    SparseGrad { input: eh, outputs }
}

/// Dense gradient of [`example_loss`] with respect to every weight, shaped
/// like the network.
pub fn example_gradient(net: &PvNet, ex: &NsExample) -> PvNet {
    let g = backprop(net, net.docs.row(ex.doc), ex);
    let mut out = PvNet {
        docs: DenseMatrix::zeros(net.docs.rows(), net.docs.cols()),
        words: net
            .words
            .as_ref()
            .map(|w| DenseMatrix::zeros(w.rows(), w.cols())),
        outputs: DenseMatrix::zeros(net.outputs.rows(), net.outputs.cols()),
    };
    add_into(out.docs.row_mut(ex.doc), &g.input, 1.0);
    if uses_inputs(net, ex) {
        let words = out.words.as_mut().expect("checked");
        for &w in &ex.inputs {
            add_into(words.row_mut(w), &g.input, 1.0);
        }
    }
    for (w, v) in &g.outputs {
        add_into(out.outputs.row_mut(*w), v, 1.0);
    }
    out
}

fn add_into(dst: &mut [f64], src: &[f64], scale: f64) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += scale * s;
    }
}

fn sgd_step(net: &mut PvNet, ex: &NsExample, lr: f64) {
    let g = backprop(net, net.docs.row(ex.doc), ex);
    add_into(net.docs.row_mut(ex.doc), &g.input, -lr);
    if uses_inputs(net, ex) {
        let words = net.words.as_mut().expect("checked");
        for &w in &ex.inputs {
            add_into(words.row_mut(w), &g.input, -lr);
        }
    }
    for (w, v) in &g.outputs {
        add_into(net.outputs.row_mut(*w), v, -lr);
    }
}

/// `(inputs, target)` pairs of one encoded statement.
fn contexts(mode: PvMode, seq: &[usize], window: usize) -> Vec<(Vec<usize>, usize)> {
    (0..seq.len())
        .map(|p| {
            let inputs = if mode == PvMode::Dm {
                let lo = p.saturating_sub(window);
                let hi = (p + window + 1).min(seq.len());
                (lo..hi).filter(|&q| q != p).map(|q| seq[q]).collect()
            } else {
                Vec::new()
            };
            (inputs, seq[p])
        })
        .collect()
}

/// Linear decay from the start to the end rate as `progress` goes 0 → 1.
fn learning_rate(c: &PvConfig, progress: f64) -> f64 {
    (c.lr_start - (c.lr_start - c.lr_end) * progress).max(c.lr_end)
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, dim: usize) -> DenseMatrix {
    let data = (0..rows * dim)
        .map(|_| (rng.random::<f64>() - 0.5) / dim as f64)
        .collect();
    DenseMatrix::from_vec(rows, dim, data)
}

/// A trained model: vocabulary, one network per part of the mode, and the
/// ids of the statements that received paragraph vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PvModel {
    config: PvConfig,
    vocab: Vocabulary,
    doc_ids: Vec<usize>,
    nets: Vec<PvNet>,
}

impl PvModel {
    /// Reassembles a model, e.g. after loading from disk.
    pub fn from_parts(
        config: PvConfig,
        vocab: Vocabulary,
        doc_ids: Vec<usize>,
        nets: Vec<PvNet>,
    ) -> Result<Self> {
        config.validate()?;
        let parts = config.mode.parts();
        let bad = || {
            Err(Error::InvalidArgument(
                "inconsistent paragraph vector model".into(),
            ))
        };
        if nets.len() != parts.len() || doc_ids.windows(2).any(|w| w[0] >= w[1]) {
            return bad();
        }
        for (net, mode) in nets.iter().zip(parts) {
            let dims_ok = net.docs.rows() == doc_ids.len()
                && net.docs.cols() == config.dim
                && net.outputs.rows() == vocab.len()
                && net.outputs.cols() == config.dim;
            let words_ok = match (&net.words, mode) {
                (Some(w), PvMode::Dm) => w.rows() == vocab.len() && w.cols() == config.dim,
                (None, PvMode::Dbow) => true,
                _ => false,
            };
            if !(dims_ok && words_ok) {
                return bad();
            }
        }
        Ok(Self {
            config,
            vocab,
            doc_ids,
            nets,
        })
    }

    pub fn config(&self) -> &PvConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn doc_ids(&self) -> &[usize] {
        &self.doc_ids
    }

    pub fn nets(&self) -> &[PvNet] {
        &self.nets
    }

    /// Length of the stored statement representations.
    pub fn repr_dim(&self) -> usize {
        self.config.dim * self.nets.len()
    }

    /// Stored representation of a statement (concatenated in the combined mode).
    pub fn doc_vector(&self, doc_id: usize) -> Option<Vec<f64>> {
        let row = self.doc_ids.binary_search(&doc_id).ok()?;
        Some(self.row_vector(row))
    }

    fn row_vector(&self, row: usize) -> Vec<f64> {
        self.nets
            .iter()
            .flat_map(|n| n.docs.row(row).iter().copied())
            .collect()
    }

    fn encode_query(&self, tokens: &[String]) -> Result<Vec<usize>> {
        let seq = self.vocab.encode(tokens);
        if seq.is_empty() {
            Err(Error::EmptyQuery)
        } else {
            Ok(seq)
        }
    }

    /// Representation of a query under the chosen strategy.
    pub fn query_vector(&self, tokens: &[String], repr: QueryRepr) -> Result<Vec<f64>> {
        match repr {
            QueryRepr::Inference => infer_vector(self, tokens, self.config.epochs),
            QueryRepr::WordCentroid => {
                let seq = self.encode_query(tokens)?;
                let mut out = Vec::with_capacity(self.repr_dim());
                for net in &self.nets {
                    let table = net.words.as_ref().unwrap_or(&net.outputs);
                    let mut c = vec![0.0; self.config.dim];
                    for &w in &seq {
                        add_into(&mut c, table.row(w), 1.0 / seq.len() as f64);
                    }
                    out.extend(c);
                }
                Ok(out)
            }
        }
    }

    /// Statements by descending cosine to the query, ties by id.
    pub fn rank(&self, tokens: &[String], k: usize, repr: QueryRepr) -> Result<Vec<(usize, f64)>> {
        let q = self.query_vector(tokens, repr)?;
        let scored = self
            .doc_ids
            .iter()
            .enumerate()
            .map(|(row, id)| (*id, cosine(&q, &self.row_vector(row))))
            .collect();
        Ok(crate::top_k_descending(scored, k))
    }
}

/// Incremental trainer; [`train_pv`] runs it for the configured epochs.
#[derive(Debug, Clone)]
pub struct Trainer {
    config: PvConfig,
    vocab: Vocabulary,
    noise: NoiseTable,
    doc_ids: Vec<usize>,
    /// Training row of each statement; identical token sequences share one.
    doc_rows: Vec<usize>,
    seqs: Vec<Vec<usize>>,
    nets: Vec<PvNet>,
    rng: ChaCha8Rng,
    epoch: usize,
}

impl Trainer {
    pub fn new(corpus: &[Statement], config: &PvConfig) -> Result<Self> {
        config.validate()?;
        if corpus.iter().all(Statement::is_empty) {
            return Err(Error::EmptyCorpus);
        }
        let vocab = Vocabulary::build(corpus, config.min_count);
        if vocab.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let mut docs: Vec<(usize, Vec<usize>)> = corpus
            .iter()
            .map(|s| (s.id, vocab.encode(&s.tokens)))
            .filter(|(_, seq)| !seq.is_empty())
            .collect();
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        docs.sort_by_key(|(id, _)| *id);
        if docs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument("duplicate statement id".into()));
        }
        let mut rows: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut seqs = Vec::new();
        let mut doc_ids = Vec::with_capacity(docs.len());
        let mut doc_rows = Vec::with_capacity(docs.len());
        for (id, seq) in docs {
            let row = *rows.entry(seq.clone()).or_insert_with(|| {
                seqs.push(seq);
                seqs.len() - 1
            });
            doc_ids.push(id);
            doc_rows.push(row);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let nets = config
            .mode
            .parts()
            .iter()
            .map(|part| PvNet {
                docs: random_matrix(&mut rng, seqs.len(), config.dim),
                words: (*part == PvMode::Dm)
                    .then(|| random_matrix(&mut rng, vocab.len(), config.dim)),
                outputs: DenseMatrix::zeros(vocab.len(), config.dim),
            })
            .collect();
        Ok(Self {
            config: *config,
            noise: NoiseTable::new(vocab.counts()),
            vocab,
            doc_ids,
            doc_rows,
            seqs,
            nets,
            rng,
            epoch: 0,
        })
    }

    pub fn epochs_done(&self) -> usize {
        self.epoch
    }

    pub fn nets(&self) -> &[PvNet] {
        &self.nets
    }

    fn examples_with(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<NsExample>> {
        self.config
            .mode
            .parts()
            .iter()
            .map(|part| {
                let mut out = Vec::new();
                for (doc, seq) in self.seqs.iter().enumerate() {
                    for (inputs, target) in contexts(*part, seq, self.config.window) {
                        out.push(NsExample {
                            doc,
                            inputs,
                            target,
                            negatives: self.noise.negatives(rng, self.config.negative, target),
                        });
                    }
                }
                out
            })
            .collect()
    }

    /// Draws the next epoch's examples, one list per network, advancing
    /// the training generator.
    pub fn draw_epoch(&mut self) -> Vec<Vec<NsExample>> {
        let mut rng = self.rng.clone();
        let out = self.examples_with(&mut rng);
        self.rng = rng;
        out
    }

    /// Mean loss of the given examples under the current weights.
    pub fn loss_on(&self, examples: &[Vec<NsExample>]) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for (net, list) in self.nets.iter().zip(examples) {
            for ex in list {
                sum += example_loss(net, ex);
                count += 1;
            }
        }
        sum / count.max(1) as f64
    }

    /// One SGD pass over drawn examples with the decaying learning rate.
    pub fn apply_epoch(&mut self, examples: &[Vec<NsExample>]) {
        let span = self.config.epochs.max(self.epoch + 1) as f64;
        for (net, list) in self.nets.iter_mut().zip(examples) {
            let per = list.len().max(1) as f64;
            for (i, ex) in list.iter().enumerate() {
                let progress = (self.epoch as f64 + i as f64 / per) / span;
                sgd_step(net, ex, learning_rate(&self.config, progress));
            }
        }
        self.epoch += 1;
    }

    /// One pass over every statement for every network; returns the mean
    /// loss of the pass measured before the updates.
    pub fn run_epoch(&mut self) -> f64 {
        let examples = self.draw_epoch();
        let before = self.loss_on(&examples);
        self.apply_epoch(&examples);
        before
    }

    /// Mean loss over every example with noise words drawn from a generator
    /// seeded by `seed`, so repeated calls are comparable.
    pub fn objective(&self, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.loss_on(&self.examples_with(&mut rng))
    }

    /// The trained model with one paragraph vector per retained statement.
    pub fn finish(self) -> PvModel {
        let rows = &self.doc_rows;
        let nets = self
            .nets
            .into_iter()
            .map(|net| {
                let mut docs = DenseMatrix::zeros(rows.len(), net.docs.cols());
                for (i, &r) in rows.iter().enumerate() {
                    docs.row_mut(i).copy_from_slice(net.docs.row(r));
                }
                PvNet { docs, ..net }
            })
            .collect();
        PvModel {
            config: self.config,
            vocab: self.vocab,
            doc_ids: self.doc_ids,
            nets,
        }
    }
}

pub fn train_pv(corpus: &[Statement], config: &PvConfig) -> Result<PvModel> {
    let mut trainer = Trainer::new(corpus, config)?;
    for _ in 0..config.epochs {
        trainer.run_epoch();
    }
    Ok(trainer.finish())
}

fn fnv1a(tokens: &[usize]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for t in tokens {
        for b in (*t as u64).to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Fits a paragraph vector for an unseen token sequence with all word
/// weights frozen. The starting point is seeded from the model seed and the
/// query, so the result does not depend on evaluation order. Zero steps
/// return that starting point.
pub fn infer_vector(model: &PvModel, tokens: &[String], steps: usize) -> Result<Vec<f64>> {
    let seq = model.encode_query(tokens)?;
    let c = &model.config;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed ^ fnv1a(&seq));
    let noise = NoiseTable::new(model.vocab.counts());
    let mut out = Vec::with_capacity(model.repr_dim());
    for (net, part) in model.nets.iter().zip(c.mode.parts()) {
        let mut doc: Vec<f64> = (0..c.dim)
            .map(|_| (rng.random::<f64>() - 0.5) / c.dim as f64)
            .collect();
        let examples = contexts(*part, &seq, c.window);
        let span = (steps * examples.len()).max(1) as f64;
        let mut done = 0usize;
        for _ in 0..steps {
            for (inputs, target) in &examples {
                let ex = NsExample {
                    doc: 0,
                    inputs: inputs.clone(),
                    target: *target,
                    negatives: noise.negatives(&mut rng, c.negative, *target),
                };
                let g = backprop(net, &doc, &ex);
                add_into(&mut doc, &g.input, -learning_rate(c, done as f64 / span));
                done += 1;
            }
        }
        out.extend(doc);
    }
    Ok(out)
}

/// Statements by descending cosine to the inferred query vector.
pub fn pv_rank(model: &PvModel, tokens: &[String], k: usize) -> Result<Vec<(usize, f64)>> {
    model.rank(tokens, k, QueryRepr::Inference)
}
