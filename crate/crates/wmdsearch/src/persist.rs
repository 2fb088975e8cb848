//! Versioned flat binary files for indexes and paragraph-vector models.
//!
//! All integers are little-endian `u64` and all reals little-endian `f64`,
//! so a saved file reloads to bit-identical models. Strings are a length
//! followed by UTF-8 bytes; matrices are `rows`, `cols` and row-major data.
//!
//! Index file:
//! `"WMDSIDX\0"`, version, backend spec, embedding source, stoplist,
//! statements, then one model block: none (embedding backends rebuild
//! their per-statement data from the statements and the embedding file),
//! LSA (terms, idf, statement ids, U, S, V) or paragraph vectors.
//!
//! Paragraph-vector model file: `"WMDSPV\0\0"`, version, then the model
//! block (config, vocabulary with counts, statement ids, networks).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use wmdsearch_core::linalg::DenseMatrix;
use wmdsearch_core::lsa::{LsaConfig, LsaModel};
use wmdsearch_core::pv::{PvConfig, PvModel, PvNet, Vocabulary};
use wmdsearch_core::retrieval::{Backend, BackendSpec, Index};
use wmdsearch_core::svd::SvdOptions;
use wmdsearch_core::text::{Statement, StopwordSet};

use crate::error::{Error, Result};
use crate::formats::EmbeddingFormat;

pub const INDEX_MAGIC: &[u8; 8] = b"WMDSIDX\0";
pub const PV_MAGIC: &[u8; 8] = b"WMDSPV\0\0";
pub const FORMAT_VERSION: u64 = 1;

/// Character n-gram vectors for out-of-vocabulary synthesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramSource {
    pub path: PathBuf,
    pub nmin: usize,
    pub nmax: usize,
}

/// Where an embedding backend's word vectors live.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingSource {
    pub path: PathBuf,
    pub format: Option<EmbeddingFormat>,
    pub ngrams: Option<NgramSource>,
}

/// A learned model stored inside an index file.
#[derive(Debug, Clone, PartialEq)]
pub enum StoredModel {
    /// Embedding backends: rebuilt from statements and embeddings on load.
    None,
    Lsa(LsaModel),
    Pv(PvModel),
}

impl StoredModel {
    pub fn of(index: &Index) -> Self {
        match index.backend() {
            Backend::Lsa(m) => StoredModel::Lsa(m.clone()),
            Backend::Pv(m) => StoredModel::Pv(m.clone()),
            Backend::Wcd(_) | Backend::Wmd(_) | Backend::WmdPruned(_) => StoredModel::None,
        }
    }
}

/// Everything needed to reopen an index.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexFile {
    pub spec: BackendSpec,
    pub source: Option<EmbeddingSource>,
    pub stops: StopwordSet,
    pub statements: Vec<Statement>,
    pub model: StoredModel,
}

struct Enc<W: Write>(W);

impl<W: Write> Enc<W> {
    fn u64(&mut self, v: u64) -> std::io::Result<()> {
        self.0.write_u64::<LittleEndian>(v)
    }

    fn usize(&mut self, v: usize) -> std::io::Result<()> {
        self.u64(v as u64)
    }

    fn f64(&mut self, v: f64) -> std::io::Result<()> {
        self.0.write_f64::<LittleEndian>(v)
    }

    fn bool(&mut self, v: bool) -> std::io::Result<()> {
        self.0.write_u8(v as u8)
    }

    fn str(&mut self, s: &str) -> std::io::Result<()> {
        self.usize(s.len())?;
        self.0.write_all(s.as_bytes())
    }

    fn opt_str(&mut self, s: Option<&str>) -> std::io::Result<()> {
        self.bool(s.is_some())?;
        s.map_or(Ok(()), |s| self.str(s))
    }

    fn strs<S: AsRef<str>>(&mut self, items: &[S]) -> std::io::Result<()> {
        self.usize(items.len())?;
        items.iter().try_for_each(|s| self.str(s.as_ref()))
    }

    fn usizes(&mut self, items: &[usize]) -> std::io::Result<()> {
        self.usize(items.len())?;
        items.iter().try_for_each(|v| self.usize(*v))
    }

    fn f64s(&mut self, items: &[f64]) -> std::io::Result<()> {
        self.usize(items.len())?;
        items.iter().try_for_each(|v| self.f64(*v))
    }

    fn matrix(&mut self, m: &DenseMatrix) -> std::io::Result<()> {
        self.usize(m.rows())?;
        self.usize(m.cols())?;
        m.as_slice().iter().try_for_each(|v| self.f64(*v))
    }
}

struct Dec<'a, R: Read> {
    r: R,
    path: &'a Path,
}

/// Upper bound on any length field, to fail fast on corrupt files.
const MAX_LEN: u64 = 1 << 40;

impl<R: Read> Dec<'_, R> {
    fn bad(&self, what: impl Into<String>) -> Error {
        Error::format(self.path, 0, what)
    }

    fn io(&self, e: std::io::Error) -> Error {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            self.bad("file is truncated")
        } else {
            Error::io(self.path, e)
        }
    }

    fn u64(&mut self) -> Result<u64> {
        self.r.read_u64::<LittleEndian>().map_err(|e| self.io(e))
    }

    fn usize(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| self.bad(format!("value {v} out of range")))
    }

    fn len(&mut self) -> Result<usize> {
        let v = self.u64()?;
        if v > MAX_LEN {
            return Err(self.bad(format!("implausible length {v}")));
        }
        Ok(v as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        self.r.read_f64::<LittleEndian>().map_err(|e| self.io(e))
    }

    fn bool(&mut self) -> Result<bool> {
        match self.r.read_u8().map_err(|e| self.io(e))? {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(self.bad(format!("bad flag byte {b}"))),
        }
    }

    fn str(&mut self) -> Result<String> {
        let n = self.len()?;
        let mut buf = vec![0u8; n];
        self.r.read_exact(&mut buf).map_err(|e| self.io(e))?;
        String::from_utf8(buf).map_err(|_| self.bad("string is not UTF-8"))
    }

    fn opt_str(&mut self) -> Result<Option<String>> {
        if self.bool()? {
            self.str().map(Some)
        } else {
            Ok(None)
        }
    }

    fn strs(&mut self) -> Result<Vec<String>> {
        let n = self.len()?;
        (0..n).map(|_| self.str()).collect()
    }

    fn usizes(&mut self) -> Result<Vec<usize>> {
        let n = self.len()?;
        (0..n).map(|_| self.usize()).collect()
    }

    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.len()?;
        (0..n).map(|_| self.f64()).collect()
    }

    fn matrix(&mut self) -> Result<DenseMatrix> {
        let rows = self.len()?;
        let cols = self.len()?;
        let n = rows
            .checked_mul(cols)
            .filter(|n| *n as u64 <= MAX_LEN)
            .ok_or_else(|| self.bad("implausible matrix shape"))?;
        let data = (0..n).map(|_| self.f64()).collect::<Result<Vec<_>>>()?;
        Ok(DenseMatrix::from_vec(rows, cols, data))
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let s = self.str()?;
        s.parse()
            .map_err(|_| self.bad(format!("unknown {what} {s:?}")))
    }

    fn header(&mut self, magic: &[u8; 8]) -> Result<()> {
        let mut found = [0u8; 8];
        self.r.read_exact(&mut found).map_err(|e| self.io(e))?;
        if &found != magic {
            return Err(self.bad("not a wmdsearch file of the expected kind"));
        }
        let version = self.u64()?;
        if version != FORMAT_VERSION {
            return Err(self.bad(format!(
                "unsupported version {version} (expected {FORMAT_VERSION})"
            )));
        }
        Ok(())
    }

    fn end(&mut self) -> Result<()> {
        let mut probe = [0u8; 1];
        match self.r.read(&mut probe).map_err(|e| self.io(e))? {
            0 => Ok(()),
            _ => Err(self.bad("trailing bytes after the last block")),
        }
    }
}

fn write_pv_config<W: Write>(e: &mut Enc<W>, c: &PvConfig) -> std::io::Result<()> {
    e.str(c.mode.name())?;
    for v in [c.dim, c.window, c.negative, c.epochs] {
        e.usize(v)?;
    }
    e.f64(c.lr_start)?;
    e.f64(c.lr_end)?;
    e.usize(c.min_count)?;
    e.u64(c.seed)
}

fn read_pv_config<R: Read>(d: &mut Dec<'_, R>) -> Result<PvConfig> {
    Ok(PvConfig {
        mode: d.parse("paragraph vector mode")?,
        dim: d.usize()?,
        window: d.usize()?,
        negative: d.usize()?,
        epochs: d.usize()?,
        lr_start: d.f64()?,
        lr_end: d.f64()?,
        min_count: d.usize()?,
        seed: d.u64()?,
    })
}

fn write_pv_model<W: Write>(e: &mut Enc<W>, m: &PvModel) -> std::io::Result<()> {
    write_pv_config(e, m.config())?;
    e.strs(m.vocab().words())?;
    e.usize(m.vocab().counts().len())?;
    m.vocab().counts().iter().try_for_each(|c| e.u64(*c))?;
    e.usizes(m.doc_ids())?;
    e.usize(m.nets().len())?;
    for net in m.nets() {
        e.matrix(&net.docs)?;
        e.bool(net.words.is_some())?;
        if let Some(w) = &net.words {
            e.matrix(w)?;
        }
        e.matrix(&net.outputs)?;
    }
    Ok(())
}

fn read_pv_model<R: Read>(d: &mut Dec<'_, R>) -> Result<PvModel> {
    let config = read_pv_config(d)?;
    let words = d.strs()?;
    let n = d.len()?;
    let counts = (0..n).map(|_| d.u64()).collect::<Result<Vec<_>>>()?;
    let vocab = Vocabulary::from_parts(words, counts)?;
    let doc_ids = d.usizes()?;
    let nets_len = d.len()?;
    let mut nets = Vec::with_capacity(nets_len.min(2));
    for _ in 0..nets_len {
        let docs = d.matrix()?;
        let words = if d.bool()? { Some(d.matrix()?) } else { None };
        let outputs = d.matrix()?;
        nets.push(PvNet {
            docs,
            words,
            outputs,
        });
    }
    Ok(PvModel::from_parts(config, vocab, doc_ids, nets)?)
}

fn write_lsa_model<W: Write>(e: &mut Enc<W>, m: &LsaModel) -> std::io::Result<()> {
    e.strs(m.terms())?;
    e.f64s(m.idf())?;
    e.usizes(m.doc_ids())?;
    e.matrix(m.u())?;
    e.f64s(m.singular_values())?;
    e.matrix(m.v())
}

fn read_lsa_model<R: Read>(d: &mut Dec<'_, R>) -> Result<LsaModel> {
    let terms = d.strs()?;
    let idf = d.f64s()?;
    let doc_ids = d.usizes()?;
    let u = d.matrix()?;
    let s = d.f64s()?;
    let v = d.matrix()?;
    Ok(LsaModel::from_parts(terms, idf, doc_ids, u, s, v)?)
}

fn write_spec<W: Write>(e: &mut Enc<W>, spec: &BackendSpec) -> std::io::Result<()> {
    e.str(spec.kind.name())?;
    e.str(spec.metric.name())?;
    e.opt_str(spec.embedding.as_deref())?;
    e.usize(spec.lsa.k)?;
    e.f64(spec.lsa.svd.tol)?;
    e.usize(spec.lsa.svd.max_iter)?;
    e.usize(spec.lsa.svd.oversample)?;
    e.u64(spec.lsa.svd.seed)?;
    write_pv_config(e, &spec.pv)?;
    e.str(spec.query_repr.name())?;
    e.usize(spec.prefetch)
}

fn read_spec<R: Read>(d: &mut Dec<'_, R>) -> Result<BackendSpec> {
    let kind = d.parse("backend")?;
    let metric = d.parse("metric")?;
    let embedding = d.opt_str()?;
    let lsa = LsaConfig {
        k: d.usize()?,
        svd: SvdOptions {
            tol: d.f64()?,
            max_iter: d.usize()?,
            oversample: d.usize()?,
            seed: d.u64()?,
        },
    };
    let pv = read_pv_config(d)?;
    let query_repr = d.parse("query representation")?;
    let prefetch = d.usize()?;
    Ok(BackendSpec {
        kind,
        metric,
        embedding,
        lsa,
        pv,
        query_repr,
        prefetch,
    })
}

fn write_source<W: Write>(e: &mut Enc<W>, source: Option<&EmbeddingSource>) -> std::io::Result<()> {
    e.bool(source.is_some())?;
    let Some(s) = source else { return Ok(()) };
    e.str(&s.path.to_string_lossy())?;
    e.opt_str(s.format.map(EmbeddingFormat::name))?;
    e.bool(s.ngrams.is_some())?;
    if let Some(n) = &s.ngrams {
        e.str(&n.path.to_string_lossy())?;
        e.usize(n.nmin)?;
        e.usize(n.nmax)?;
    }
    Ok(())
}

fn read_source<R: Read>(d: &mut Dec<'_, R>) -> Result<Option<EmbeddingSource>> {
    if !d.bool()? {
        return Ok(None);
    }
    let path = PathBuf::from(d.str()?);
    let format = match d.opt_str()? {
        Some(f) => Some(
            f.parse()
                .map_err(|_| d.bad(format!("unknown embedding format {f:?}")))?,
        ),
        None => None,
    };
    let ngrams = if d.bool()? {
        Some(NgramSource {
            path: PathBuf::from(d.str()?),
            nmin: d.usize()?,
            nmax: d.usize()?,
        })
    } else {
        None
    };
    Ok(Some(EmbeddingSource {
        path,
        format,
        ngrams,
    }))
}

const MODEL_NONE: u64 = 0;
const MODEL_LSA: u64 = 1;
const MODEL_PV: u64 = 2;

impl IndexFile {
    pub fn write_to<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut e = Enc(out);
        e.0.write_all(INDEX_MAGIC)?;
        e.u64(FORMAT_VERSION)?;
        write_spec(&mut e, &self.spec)?;
        write_source(&mut e, self.source.as_ref())?;
        let stops: Vec<&str> = self.stops.iter().collect();
        e.strs(&stops)?;
        e.usize(self.statements.len())?;
        for s in &self.statements {
            e.usize(s.id)?;
            e.str(&s.raw)?;
            e.strs(&s.tokens)?;
        }
        match &self.model {
            StoredModel::None => e.u64(MODEL_NONE)?,
            StoredModel::Lsa(m) => {
                e.u64(MODEL_LSA)?;
                write_lsa_model(&mut e, m)?;
            }
            StoredModel::Pv(m) => {
                e.u64(MODEL_PV)?;
                write_pv_model(&mut e, m)?;
            }
        }
        e.0.flush()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)
            .expect("writing to memory cannot fail");
        buf
    }

    /// Decodes an index file; `path` only labels errors.
    pub fn read_from<R: Read>(r: R, path: &Path) -> Result<Self> {
        let mut d = Dec { r, path };
        d.header(INDEX_MAGIC)?;
        let spec = read_spec(&mut d)?;
        let source = read_source(&mut d)?;
        let stops = StopwordSet::new(d.strs()?);
        let n = d.len()?;
        let mut statements = Vec::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            statements.push(Statement {
                id: d.usize()?,
                raw: d.str()?,
                tokens: d.strs()?,
            });
        }
        let model = match d.u64()? {
            MODEL_NONE => StoredModel::None,
            MODEL_LSA => StoredModel::Lsa(read_lsa_model(&mut d)?),
            MODEL_PV => StoredModel::Pv(read_pv_model(&mut d)?),
            tag => return Err(d.bad(format!("unknown model block {tag}"))),
        };
        d.end()?;
        Ok(Self {
            spec,
            source,
            stops,
            statements,
            model,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file), path)
    }
}

pub fn write_pv<W: Write>(model: &PvModel, out: W) -> std::io::Result<()> {
    let mut e = Enc(out);
    e.0.write_all(PV_MAGIC)?;
    e.u64(FORMAT_VERSION)?;
    write_pv_model(&mut e, model)?;
    e.0.flush()
}

pub fn read_pv<R: Read>(r: R, path: &Path) -> Result<PvModel> {
    let mut d = Dec { r, path };
    d.header(PV_MAGIC)?;
    let model = read_pv_model(&mut d)?;
    d.end()?;
    Ok(model)
}

pub fn save_pv(model: &PvModel, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_pv(model, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn load_pv(path: &Path) -> Result<PvModel> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_pv(BufReader::new(file), path)
}
