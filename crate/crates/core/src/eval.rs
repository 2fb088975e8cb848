//! Query-variation trials and hits@k reporting.
//!
//! Trial files are line oriented:
//!
//! ```text
//! # comment
//! trial 1
//! target Michael Brown is the Chief Executive Officer.
//! query Michael Brown is the Chief Executive Officer.
//! query Who runs the company?
//! trial 2
//! target #17
//! query ...
//! ```
//!
//! `target` is either the raw text of a statement or `#` followed by its id.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use crate::error::{Error, Result};
use crate::retrieval::{Index, DEFAULT_K};
use crate::text::Statement;

/// Rank cut-offs reported for every backend.
pub const REPORT_KS: [usize; 4] = [1, 2, 3, 20];

/// How a trial names its target before resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetRef {
    Text(String),
    Id(usize),
}

/// A trial as written in the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialSpec {
    pub id: String,
    pub target: Option<TargetRef>,
    pub queries: Vec<String>,
    /// 1-based line of the `trial` record.
    pub line: usize,
}

/// A trial with its target resolved to a statement id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trial {
    pub id: String,
    pub target: usize,
    /// Query texts; the first is conventionally the target verbatim.
    pub queries: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrialSet {
    pub trials: Vec<Trial>,
}

impl TrialSet {
    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn total_queries(&self) -> usize {
        self.trials.iter().map(|t| t.queries.len()).sum()
    }
}

fn syntax(line: usize, msg: &str) -> Error {
    Error::InvalidArgument(alloc::format!("trial file line {line}: {msg}"))
}

/// Parses the trial file format without touching a corpus.
pub fn parse_trials(contents: &str) -> Result<Vec<TrialSpec>> {
    let mut out: Vec<TrialSpec> = Vec::new();
    for (n, raw) in contents.lines().enumerate() {
        let line = n + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let (key, rest) = match text.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (text, ""),
        };
        match key {
            "trial" => {
                if rest.is_empty() {
                    return Err(syntax(line, "trial needs an id"));
                }
                if out.iter().any(|t| t.id == rest) {
                    return Err(syntax(line, "duplicate trial id"));
                }
                out.push(TrialSpec {
                    id: rest.to_string(),
                    target: None,
                    queries: Vec::new(),
                    line,
                });
            }
            "target" | "query" => {
                let current = out
                    .last_mut()
                    .ok_or_else(|| syntax(line, "record before any trial"))?;
                if rest.is_empty() {
                    return Err(syntax(line, "empty record"));
                }
                if key == "query" {
                    current.queries.push(rest.to_string());
                } else if current.target.is_some() {
                    return Err(syntax(line, "trial already has a target"));
                } else {
                    current.target = Some(match rest.strip_prefix('#') {
                        Some(id) => TargetRef::Id(
                            id.trim()
                                .parse()
                                .map_err(|_| syntax(line, "bad target id"))?,
                        ),
                        None => TargetRef::Text(rest.to_string()),
                    });
                }
            }
            other => return Err(syntax(line, &alloc::format!("unknown record {other:?}"))),
        }
    }
    Ok(out)
}

/// Resolves targets against a corpus. Text targets match the trimmed raw
/// statement text exactly; the lowest matching id wins.
pub fn resolve_trials(specs: Vec<TrialSpec>, corpus: &[Statement]) -> Result<TrialSet> {
    let mut trials = Vec::with_capacity(specs.len());
    for spec in specs {
        if spec.queries.is_empty() {
            return Err(Error::EmptyTrial { trial: spec.id });
        }
        let unresolved = || Error::UnresolvedTarget {
            trial: spec.id.clone(),
        };
        let target = match &spec.target {
            None => return Err(unresolved()),
            Some(TargetRef::Id(id)) => corpus.iter().find(|s| s.id == *id).map(|s| s.id),
            Some(TargetRef::Text(t)) => corpus
                .iter()
                .filter(|s| s.raw.trim() == t.trim())
                .map(|s| s.id)
                .min(),
        }
        .ok_or_else(unresolved)?;
        trials.push(Trial {
            id: spec.id,
            target,
            queries: spec.queries,
        });
    }
    Ok(TrialSet { trials })
}

/// A percentage stored in hundredths, rounded half up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Percent(pub u64);

impl Percent {
    pub fn of(count: usize, total: usize) -> Result<Self> {
        if total == 0 {
            return Err(Error::NoQueries);
        }
        let (c, t) = (count as u128, total as u128);
        // 100·100·c/t rounded half up, in integers
        Ok(Percent(((20_000 * c + t) / (2 * t)) as u64))
    }

    pub fn hundredths(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

/// Queries whose 1-based target rank is at most `k`, and their share.
pub fn hits_at(ranks: &[Option<usize>], k: usize) -> Result<(usize, Percent)> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let count = ranks.iter().filter(|r| r.is_some_and(|r| r <= k)).count();
    Ok((count, Percent::of(count, ranks.len())?))
}

/// What happened to one query.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryOutcome {
    pub trial: String,
    /// 1-based position within the trial.
    pub query: usize,
    /// 1-based rank of the target within the top 20, `None` for a miss.
    pub rank: Option<usize>,
    pub error: Option<String>,
}

/// hits@k table row for one backend.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingReport {
    pub backend: String,
    pub total: usize,
    /// Counts at each cut-off of [`REPORT_KS`].
    pub counts: [usize; 4],
    pub outcomes: Vec<QueryOutcome>,
    /// Set when the backend could not be built at all.
    pub error: Option<String>,
}

impl RankingReport {
    pub fn from_outcomes(backend: impl Into<String>, outcomes: Vec<QueryOutcome>) -> Self {
        let ranks: Vec<Option<usize>> = outcomes.iter().map(|o| o.rank).collect();
        let counts = REPORT_KS.map(|k| ranks.iter().filter(|r| r.is_some_and(|r| r <= k)).count());
        Self {
            backend: backend.into(),
            total: ranks.len(),
            counts,
            outcomes,
            error: None,
        }
    }

    pub fn failed(backend: impl Into<String>, error: impl Into<String>) -> Self {
        Self {
            backend: backend.into(),
            total: 0,
            counts: [0; 4],
            outcomes: Vec::new(),
            error: Some(error.into()),
        }
    }

    pub fn percent(&self, column: usize) -> Result<Percent> {
        Percent::of(self.counts[column], self.total)
    }

    /// `count (pct%)` for one column, or the failure marker.
    pub fn cell(&self, column: usize) -> String {
        match (&self.error, self.percent(column)) {
            (None, Ok(p)) => alloc::format!("{} ({}%)", self.counts[column], p),
            _ => "error".into(),
        }
    }
}

/// 1-based rank of `target` in the top [`DEFAULT_K`] results of one query.
pub fn target_rank(index: &Index, query: &str, target: usize) -> Result<Option<usize>> {
    let ranked = index.rank(query, DEFAULT_K)?;
    Ok(ranked
        .results
        .iter()
        .position(|(id, _)| *id == target)
        .map(|p| p + 1))
}

/// Scores a single query; failures become misses with the error recorded.
pub fn query_outcome(index: &Index, trial: &Trial, query: usize) -> QueryOutcome {
    let (rank, error) = match target_rank(index, &trial.queries[query], trial.target) {
        Ok(rank) => (rank, None),
        Err(e) => (None, Some(e.to_string())),
    };
    QueryOutcome {
        trial: trial.id.clone(),
        query: query + 1,
        rank,
        error,
    }
}

/// Every query of every trial against one index, in trial order.
pub fn evaluate(label: &str, index: &Index, trials: &TrialSet) -> RankingReport {
    let outcomes = trials
        .trials
        .iter()
        .flat_map(|t| (0..t.queries.len()).map(move |q| query_outcome(index, t, q)))
        .collect();
    RankingReport::from_outcomes(label, outcomes)
}

const HEADER: [&str; 5] = ["backend", "hits@1", "hits@2", "hits@3", "hits@20"];

fn rows(reports: &[RankingReport]) -> Vec<[String; 5]> {
    reports
        .iter()
        .map(|r| {
            [
                r.backend.clone(),
                r.cell(0),
                r.cell(1),
                r.cell(2),
                r.cell(3),
            ]
        })
        .collect()
}

/// Comma-separated hits table.
pub fn render_csv(reports: &[RankingReport]) -> String {
    let mut out = HEADER.join(",");
    out.push('\n');
    for row in rows(reports) {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Aligned plain-text hits table.
pub fn render_table(reports: &[RankingReport]) -> String {
    let body = rows(reports);
    let mut widths = HEADER.map(|h| h.chars().count());
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: [&str; 5]| {
        let mut text = String::new();
        for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
            if i == 0 {
                let _ = write!(text, "{cell:<w$}");
            } else {
                let _ = write!(text, "  {cell:>w$}");
            }
        }
        out.push_str(text.trim_end());
        out.push('\n');
    };
    line(HEADER);
    for row in &body {
        line([&row[0], &row[1], &row[2], &row[3], &row[4]]);
    }
    if let Some(total) = reports.iter().find(|r| r.error.is_none()).map(|r| r.total) {
        let _ = writeln!(out, "queries: {total}");
    }
    for r in reports {
        if let Some(e) = &r.error {
            let _ = writeln!(out, "{}: {e}", r.backend);
        }
    }
    out
}

/// Per-query ranks of every backend as comma-separated rows.
pub fn render_ranks_csv(reports: &[RankingReport]) -> String {
    let mut out = String::from("backend,trial,query,rank,error\n");
    for r in reports {
        for o in &r.outcomes {
            let rank = o.rank.map_or_else(|| "miss".to_string(), |r| r.to_string());
            let error = o.error.as_deref().unwrap_or("").replace([',', '\n'], " ");
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.backend, o.trial, o.query, rank, error
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn reported_percentages() {
        let p = |c, t| Percent::of(c, t).unwrap().to_string();
        assert_eq!(p(53, 59), "89.83");
        assert_eq!(p(40, 59), "67.80");
        assert_eq!(p(58, 59), "98.31");
        assert_eq!(p(5, 59), "8.47");
        assert_eq!(p(0, 7), "0.00");
        assert_eq!(p(7, 7), "100.00");
        // exact halves round up
        assert_eq!(p(1, 8), "12.50");
        assert_eq!(Percent::of(1, 16).unwrap().0, 625);
        assert_eq!(Percent::of(1, 32000).unwrap().0, 0);
        assert_eq!(Percent::of(1, 40000).unwrap().0, 0);
        assert_eq!(Percent::of(1, 20000).unwrap().0, 1);
        assert_eq!(Percent::of(0, 0), Err(Error::NoQueries));
    }

    #[test]
    fn hits_from_hand_scripted_ranks() {
        let ranks = [
            Some(1),
            Some(2),
            None,
            Some(3),
            Some(20),
            Some(21).filter(|r| *r <= 20),
            Some(1),
        ];
        assert_eq!(hits_at(&ranks, 1).unwrap().0, 2);
        assert_eq!(hits_at(&ranks, 2).unwrap().0, 3);
        assert_eq!(hits_at(&ranks, 3).unwrap().0, 4);
        let (c, p) = hits_at(&ranks, 20).unwrap();
        assert_eq!((c, p.to_string()), (5, "71.43".to_string()));
        assert!(hits_at(&[], 1).is_err());
        assert!(hits_at(&ranks, 0).is_err());
    }

    #[test]
    fn parses_the_documented_format() {
        let text = "# header\ntrial 1\ntarget Michael Brown is the Chief Executive Officer.\n\
            query Michael Brown is the Chief Executive Officer.\nquery Who is the CEO?\n\n\
            trial two\ntarget #1\nquery revenue\n";
        let specs = parse_trials(text).unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[0].queries.len(), 2);
        assert_eq!(specs[1].target, Some(TargetRef::Id(1)));
        let corpus = vec![
            Statement {
                id: 0,
                raw: "Michael Brown is the Chief Executive Officer.".into(),
                tokens: vec![],
            },
            Statement {
                id: 1,
                raw: "Revenue rose.".into(),
                tokens: vec![],
            },
        ];
        let set = resolve_trials(specs, &corpus).unwrap();
        assert_eq!((set.trials[0].target, set.trials[1].target), (0, 1));
        assert_eq!(set.total_queries(), 3);
    }

    #[test]
    fn malformed_and_unresolvable_trials() {
        assert!(parse_trials("query orphan\n").is_err());
        assert!(parse_trials("trial 1\nbogus x\n").is_err());
        assert!(parse_trials("trial 1\ntrial 1\n").is_err());
        assert!(parse_trials("trial 1\ntarget a\ntarget b\n").is_err());
        let corpus = vec![Statement {
            id: 0,
            raw: "a".into(),
            tokens: vec![],
        }];
        let missing = parse_trials("trial t9\ntarget nothing like it\nquery x\n").unwrap();
        assert_eq!(
            resolve_trials(missing, &corpus),
            Err(Error::UnresolvedTarget { trial: "t9".into() })
        );
        let empty = parse_trials("trial t3\ntarget a\n").unwrap();
        assert_eq!(
            resolve_trials(empty, &corpus),
            Err(Error::EmptyTrial { trial: "t3".into() })
        );
    }

    #[test]
    fn tables_render_counts_and_percentages() {
        let outcome = |rank| QueryOutcome {
            trial: "1".into(),
            query: 1,
            rank,
            error: None,
        };
        let r = RankingReport::from_outcomes(
            "wmd",
            vec![outcome(Some(1)), outcome(Some(3)), outcome(None)],
        );
        assert_eq!(r.counts, [1, 1, 2, 2]);
        let csv = render_csv(&[r.clone(), RankingReport::failed("lsa", "boom")]);
        assert_eq!(
            csv,
            "backend,hits@1,hits@2,hits@3,hits@20\nwmd,1 (33.33%),1 (33.33%),2 (66.67%),2 (66.67%)\nlsa,error,error,error,error\n"
        );
        let table = render_table(&[r]);
        let mut lines = table.lines();
        assert_eq!(
            lines.next(),
            Some("backend      hits@1      hits@2      hits@3     hits@20")
        );
        assert_eq!(
            lines.next(),
            Some("wmd      1 (33.33%)  1 (33.33%)  2 (66.67%)  2 (66.67%)")
        );
        assert!(table.contains("queries: 3"));
    }
}
