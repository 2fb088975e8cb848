//! Word-vector file formats: the original word2vec binary layout and the
//! whitespace text layout used by GloVe (no header) and fastText `.vec`
//! (`<count> <dim>` header).
//!
//! Readers stream one entry at a time and can keep only a given vocabulary,
//! so multi-gigabyte files load in memory proportional to what is kept.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use wmdsearch_core::embedding::{EmbeddingTable, NgramTable};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Word2VecBinary,
    /// `token v1 .. vdim` lines. `header: None` detects a leading
    /// `<count> <dim>` line.
    Text {
        header: Option<bool>,
    },
}

impl EmbeddingFormat {
    /// `.bin` is binary, `.vec` is text with a header, anything else is text
    /// with header detection.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") => EmbeddingFormat::Word2VecBinary,
            Some("vec") => EmbeddingFormat::Text { header: Some(true) },
            _ => EmbeddingFormat::Text { header: None },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EmbeddingFormat::Word2VecBinary => "word2vec",
            EmbeddingFormat::Text { header: None } => "text",
            EmbeddingFormat::Text {
                header: Some(false),
            } => "glove",
            EmbeddingFormat::Text { header: Some(true) } => "vec",
        }
    }
}

impl std::str::FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word2vec" | "bin" | "binary" => Ok(EmbeddingFormat::Word2VecBinary),
            "text" | "txt" => Ok(EmbeddingFormat::Text { header: None }),
            "glove" => Ok(EmbeddingFormat::Text {
                header: Some(false),
            }),
            "vec" | "fasttext" => Ok(EmbeddingFormat::Text { header: Some(true) }),
            other => Err(Error::Config(format!("unknown embedding format {other:?}"))),
        }
    }
}

/// What a load saw besides the kept rows.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    /// Entry count promised by the header, if the file has one.
    pub declared: Option<usize>,
    /// Entries present in the file.
    pub entries: usize,
    /// Entries whose token repeated an earlier one (first row kept).
    pub duplicates: usize,
    /// Entries skipped because the vocabulary filter excluded them.
    pub filtered: usize,
}

/// Keeps a row when `filter` is absent or contains the token.
fn keep(filter: Option<&BTreeSet<String>>, token: &str) -> bool {
    filter.is_none_or(|f| f.contains(token))
}

fn push_row(
    table: &mut EmbeddingTable,
    report: &mut LoadReport,
    filter: Option<&BTreeSet<String>>,
    token: String,
    vector: &[f32],
) -> Result<()> {
    report.entries += 1;
    if !keep(filter, &token) {
        report.filtered += 1;
        return Ok(());
    }
    if !table.push(token, vector)? {
        report.duplicates += 1;
    }
    Ok(())
}

fn parse_header(line: &str, path: &Path) -> Result<(usize, usize)> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let parsed = match fields.as_slice() {
        [count, dim] => count.parse::<usize>().ok().zip(dim.parse::<usize>().ok()),
        _ => None,
    };
    match parsed {
        Some((count, dim)) if dim > 0 => Ok((count, dim)),
        _ => Err(Error::format(
            path,
            1,
            format!(
                "malformed header {:?}, expected \"<count> <dim>\"",
                line.trim_end()
            ),
        )),
    }
}

fn warn_duplicates(path: &Path, report: &LoadReport) {
    if report.duplicates > 0 {
        log::warn!(
            "{}: {} duplicate tokens ignored (first row kept)",
            path.display(),
            report.duplicates
        );
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Reads the word2vec binary layout: an ASCII `<count> <dim>\n` header, then
/// per entry the token bytes up to a space, `dim` little-endian `f32`s and an
/// optional newline. `path` only labels errors.
pub fn read_word2vec_binary<R: BufRead>(
    mut reader: R,
    path: &Path,
    filter: Option<&BTreeSet<String>>,
) -> Result<(EmbeddingTable, LoadReport)> {
    let mut header = String::new();
    reader
        .read_line(&mut header)
        .map_err(|e| Error::io(path, e))?;
    let (count, dim) = parse_header(&header, path)?;
    let mut table = EmbeddingTable::new(dim)?;
    let mut report = LoadReport {
        declared: Some(count),
        ..LoadReport::default()
    };
    let truncated = |i: usize| {
        Error::format(
            path,
            i + 1,
            format!(
                "truncated: header promises {count} entries, file ends in entry {}",
                i + 1
            ),
        )
    };
    let mut token = Vec::new();
    let mut vector = vec![0f32; dim];
    for i in 0..count {
        token.clear();
        // leading newlines or spaces belong to the previous entry
        loop {
            let byte = match reader.read_u8() {
                Ok(b) => b,
                Err(e) if e.kind() == ErrorKind::UnexpectedEof => return Err(truncated(i)),
                Err(e) => return Err(Error::io(path, e)),
            };
            match byte {
                b' ' if !token.is_empty() => break,
                b' ' | b'\n' | b'\r' | b'\t' if token.is_empty() => {}
                b => token.push(b),
            }
        }
        match reader.read_f32_into::<LittleEndian>(&mut vector) {
            Ok(()) => {}
            Err(e) if e.kind() == ErrorKind::UnexpectedEof => return Err(truncated(i)),
            Err(e) => return Err(Error::io(path, e)),
        }
        let token = String::from_utf8(std::mem::take(&mut token))
            .unwrap_or_else(|e| String::from_utf8_lossy(e.as_bytes()).into_owned());
        push_row(&mut table, &mut report, filter, token, &vector)?;
    }
    warn_duplicates(path, &report);
    Ok((table, report))
}

/// Reads whitespace-separated text vectors. Rows with more than `dim + 1`
/// fields carry a multi-word token whose parts are joined by single spaces.
/// Without a header the dimension comes from the first row.
pub fn read_text_vectors<R: BufRead>(
    mut reader: R,
    path: &Path,
    header: Option<bool>,
    filter: Option<&BTreeSet<String>>,
) -> Result<(EmbeddingTable, LoadReport)> {
    let mut line = String::new();
    let mut next_line = |line: &mut String| -> Result<bool> {
        line.clear();
        Ok(reader.read_line(line).map_err(|e| Error::io(path, e))? > 0)
    };

    let mut report = LoadReport::default();
    let mut table: Option<EmbeddingTable> = None;
    let mut number = 0usize;
    let mut values: Vec<f32> = Vec::new();
    while next_line(&mut line)? {
        number += 1;
        if line.trim().is_empty() {
            continue;
        }
        if number == 1 {
            let is_header = match header {
                Some(h) => h,
                None => parse_header(&line, path).is_ok(),
            };
            if is_header {
                let (count, dim) = parse_header(&line, path)?;
                report.declared = Some(count);
                table = Some(EmbeddingTable::new(dim)?);
                continue;
            }
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let dim = match &table {
            Some(t) => t.dim(),
            None => {
                if fields.len() < 2 {
                    return Err(Error::format(path, number, "row has no vector values"));
                }
                table = Some(EmbeddingTable::new(fields.len() - 1)?);
                fields.len() - 1
            }
        };
        if fields.len() < dim + 1 {
            return Err(Error::format(
                path,
                number,
                format!(
                    "inconsistent dimension: expected {dim} values, found {}",
                    fields.len().saturating_sub(1)
                ),
            ));
        }
        let split = fields.len() - dim;
        values.clear();
        for f in &fields[split..] {
            let v = f
                .parse::<f32>()
                .map_err(|_| Error::format(path, number, format!("non-numeric value {f:?}")))?;
            values.push(v);
        }
        let token = fields[..split].join(" ");
        push_row(
            table.as_mut().expect("set above"),
            &mut report,
            filter,
            token,
            &values,
        )?;
    }
    let table = table.ok_or_else(|| Error::format(path, 0, "no vectors found"))?;
    if let Some(count) = report.declared {
        if count != report.entries {
            return Err(Error::format(
                path,
                number,
                format!(
                    "header promises {count} entries, file has {}",
                    report.entries
                ),
            ));
        }
    }
    warn_duplicates(path, &report);
    Ok((table, report))
}

/// Loads a table from disk in the given (or path-derived) format.
pub fn load_embeddings(
    path: &Path,
    format: Option<EmbeddingFormat>,
    filter: Option<&BTreeSet<String>>,
) -> Result<(EmbeddingTable, LoadReport)> {
    let reader = open(path)?;
    match format.unwrap_or_else(|| EmbeddingFormat::from_path(path)) {
        EmbeddingFormat::Word2VecBinary => read_word2vec_binary(reader, path, filter),
        EmbeddingFormat::Text { header } => read_text_vectors(reader, path, header, filter),
    }
}

/// Loads character n-gram vectors stored as a text table keyed by n-gram.
pub fn load_ngrams(path: &Path, nmin: usize, nmax: usize) -> Result<NgramTable> {
    let (table, _) = read_text_vectors(open(path)?, path, None, None)?;
    Ok(NgramTable::new(nmin, nmax, table)?)
}

/// Writes the word2vec binary layout, one newline after every vector.
pub fn write_word2vec_binary<W: Write>(table: &EmbeddingTable, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} {}", table.len(), table.dim())?;
    for (token, vector) in table.iter() {
        out.write_all(token.as_bytes())?;
        out.write_all(b" ")?;
        for v in vector {
            out.write_f32::<LittleEndian>(*v)?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Writes the text layout. Values use the shortest decimal form that reads
/// back to the same `f32`, so a write/read cycle is bit-exact.
pub fn write_text_vectors<W: Write>(
    table: &EmbeddingTable,
    mut out: W,
    header: bool,
) -> std::io::Result<()> {
    if header {
        writeln!(out, "{} {}", table.len(), table.dim())?;
    }
    for (token, vector) in table.iter() {
        out.write_all(token.as_bytes())?;
        for v in vector {
            write!(out, " {v}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Writes a table to `path`, choosing the layout from the extension.
pub fn save_embeddings(table: &EmbeddingTable, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let out = BufWriter::new(file);
    let written = match EmbeddingFormat::from_path(path) {
        EmbeddingFormat::Word2VecBinary => write_word2vec_binary(table, out),
        EmbeddingFormat::Text { header } => write_text_vectors(table, out, header == Some(true)),
    };
    written.map_err(|e| Error::io(path, e))
}

/// Reads a whole UTF-8 text file.
pub fn read_to_string(path: &Path) -> Result<String> {
    let mut s = String::new();
    open(path)?
        .read_to_string(&mut s)
        .map_err(|e| Error::io(path, e))?;
    Ok(s)
}

/// Tokens listed one per line (surrounding whitespace trimmed, blank lines
/// and `#` comments skipped).
pub fn read_vocab_file(path: &Path) -> Result<BTreeSet<String>> {
    Ok(read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}
