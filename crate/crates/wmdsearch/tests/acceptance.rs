//! Acceptance suite: one PASS or FAIL line per criterion.
//!
//! The process exits nonzero if any criterion fails, with one exception:
//! the `wcd <= rwmd` link of AC2 is false in general (the centroid distance
//! bounds the exact distance, not the relaxed one). That clause is reported
//! as FAIL with its violation count but does not fail the run on its own.

mod common;

use std::io::Cursor;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::support::{
    brute_force_transport, dbow_examples, dense_singular_values, dm_examples, frobenius_diff,
    gradient_gap, micro_net, random_corpus, random_doc, random_embeddings, random_matrix, rng,
    toy_config, toy_corpus,
};
use common::{eval_fixture, fixture_path, run, stderr};
use rand::Rng;
use wmdsearch::config::RunConfig;
use wmdsearch::formats::{load_embeddings, read_text_vectors, write_text_vectors};
use wmdsearch::pipeline::run_eval;
use wmdsearch_core::embedding::EmbeddingTable;
use wmdsearch_core::eval::{hits_at, RankingReport};
use wmdsearch_core::linalg::{dot, CsrMatrix};
use wmdsearch_core::pv::{PvMode, Trainer};
use wmdsearch_core::search::{DocIndex, IndexedDoc};
use wmdsearch_core::svd::{truncated_svd, SvdOptions};
use wmdsearch_core::transport::{nbow_cost_matrix, rwmd, wcd, wmd, GroundMetric};

const ALL_BACKENDS: &str = "lsa,wcd,wmd,wmd_pruned,pv_dm,pv_dbow,pv_dm_plus_dbow";

enum Verdict {
    Pass(String),
    Fail(String),
    /// Fails a clause that is documented as unattainable.
    KnownFail(String),
}

type Check = Result<String, String>;

/// Id, title and check.
type Criterion = (&'static str, &'static str, fn() -> Verdict);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        // bound first so a NaN comparison counts as a failure
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn ok(check: Check) -> Verdict {
    match check {
        Ok(detail) => Verdict::Pass(detail),
        Err(detail) => Verdict::Fail(detail),
    }
}

fn ac1() -> Verdict {
    ok((|| {
        let start = Instant::now();
        let mut r = rng(101);
        let mut worst = 0.0f64;
        let mut n = 0;
        for metric in [GroundMetric::Euclidean, GroundMetric::CosineDistance] {
            for _ in 0..200 {
                let e = random_embeddings(&mut r, 10, 8);
                let a = random_doc(&mut r, 10, 4);
                let b = random_doc(&mut r, 10, 4);
                let c = nbow_cost_matrix(&e, &a, &b, metric).map_err(|e| e.to_string())?;
                let (d, _) = wmd(&a, &b, &c).map_err(|e| e.to_string())?;
                worst =
                    worst.max((d - brute_force_transport(&a.weights(), &b.weights(), &c.c)).abs());
                n += 1;
            }
        }
        let elapsed = start.elapsed();
        ensure!(
            worst <= 1e-6,
            "max |wmd - oracle| = {worst:.2e} over {n} instances"
        );
        ensure!(elapsed < Duration::from_secs(10), "took {elapsed:.2?}");
        Ok(format!(
            "{n} instances, max |wmd - oracle| = {worst:.1e}, {elapsed:.2?}"
        ))
    })())
}

fn ac2() -> Verdict {
    const TOL: f64 = 1e-9;
    let metric = GroundMetric::Euclidean;
    let proven = (|| {
        let mut r = rng(2);
        let mut centroid_over_relaxed = 0;
        for _ in 0..500 {
            let e = random_embeddings(&mut r, 12, 8);
            let a = random_doc(&mut r, 12, 6);
            let b = random_doc(&mut r, 12, 6);
            let cab = nbow_cost_matrix(&e, &a, &b, metric).unwrap();
            let lower = wcd(&e, &a, &b, metric).unwrap();
            let relaxed = rwmd(&a, &b, &cab).unwrap();
            let exact = wmd(&a, &b, &cab).unwrap().0;
            ensure!(relaxed <= exact + TOL, "rwmd {relaxed} > wmd {exact}");
            ensure!(lower <= exact + TOL, "wcd {lower} > wmd {exact}");
            let back = wmd(&b, &a, &nbow_cost_matrix(&e, &b, &a, metric).unwrap())
                .unwrap()
                .0;
            ensure!((exact - back).abs() <= TOL, "asymmetric: {exact} vs {back}");
            let own = wmd(&a, &a, &nbow_cost_matrix(&e, &a, &a, metric).unwrap())
                .unwrap()
                .0;
            ensure!(own == 0.0, "wmd(a, a) = {own}");
            if lower > relaxed + TOL {
                centroid_over_relaxed += 1;
            }
        }
        let mut r = rng(3);
        for _ in 0..200 {
            let e = random_embeddings(&mut r, 10, 8);
            let docs: Vec<_> = (0..3).map(|_| random_doc(&mut r, 10, 4)).collect();
            let d = |x: usize, y: usize| {
                wmd(
                    &docs[x],
                    &docs[y],
                    &nbow_cost_matrix(&e, &docs[x], &docs[y], metric).unwrap(),
                )
                .unwrap()
                .0
            };
            ensure!(
                d(0, 2) <= d(0, 1) + d(1, 2) + TOL,
                "triangle inequality violated"
            );
        }
        Ok(centroid_over_relaxed)
    })();
    let holds = "rwmd <= wmd, wcd <= wmd, symmetry and identity on 500 instances, triangle on 200 triples hold";
    match proven {
        Err(e) => Verdict::Fail(e),
        Ok(0) => Verdict::Pass(format!("wcd <= rwmd <= wmd and {holds}")),
        Ok(v) => Verdict::KnownFail(format!(
            "wcd <= rwmd violated on {v} of 500 instances (not a valid bound); {holds}"
        )),
    }
}

fn ac3() -> Verdict {
    ok((|| {
        let mut r = rng(11);
        let e = random_embeddings(&mut r, 60, 8);
        let corpus = random_corpus(&mut r, 200, 60, 8);
        let queries = random_corpus(&mut r, 10, 60, 6);
        let mut comparisons = 0;
        for metric in [GroundMetric::Euclidean, GroundMetric::CosineDistance] {
            let (index, _) = DocIndex::build(&corpus, &e, metric).map_err(|e| e.to_string())?;
            ensure!(
                index.len() == 200,
                "only {} statements indexed",
                index.len()
            );
            for q in &queries {
                let (query, _) =
                    IndexedDoc::new(usize::MAX, &q.tokens, &e).map_err(|e| e.to_string())?;
                for k in [1, 5, 20] {
                    let ids =
                        |v: Vec<(usize, f64)>| v.into_iter().map(|(id, _)| id).collect::<Vec<_>>();
                    let exact = ids(index
                        .exhaustive_topk(&query, k)
                        .map_err(|e| e.to_string())?);
                    for m in [k, 2 * k] {
                        let pruned =
                            ids(index.prune_topk(&query, k, m).map_err(|e| e.to_string())?.0);
                        ensure!(
                            pruned == exact,
                            "{metric:?} k={k} m={m}: {pruned:?} != {exact:?}"
                        );
                        comparisons += 1;
                    }
                }
            }
        }
        Ok(format!(
            "{comparisons} pruned top-k lists identical to exhaustive on 200 statements"
        ))
    })())
}

fn ac4() -> Verdict {
    ok((|| {
        let mut r = rng(41);
        for (rows, cols) in [(6, 5), (20, 10)] {
            let m = random_matrix(&mut r, rows, cols);
            let oracle = dense_singular_values(&m);
            let sparse = CsrMatrix::from_dense(&m);
            let mut errors = Vec::new();
            for k in 1..=rows.min(cols) {
                let svd =
                    truncated_svd(&sparse, k, &SvdOptions::default()).map_err(|e| e.to_string())?;
                for (i, (got, want)) in svd.s.iter().zip(&oracle).enumerate() {
                    ensure!(
                        (got - want).abs() <= 1e-6,
                        "{rows}x{cols} k={k} sigma{i}: {got} vs {want}"
                    );
                }
                for a in 0..k {
                    for b in 0..k {
                        let want = if a == b { 1.0 } else { 0.0 };
                        let got = dot(&svd.u.column(a), &svd.u.column(b));
                        ensure!(
                            (got - want).abs() <= 1e-6,
                            "{rows}x{cols} k={k}: U'U[{a},{b}] = {got}"
                        );
                    }
                }
                errors.push(frobenius_diff(&m, &svd.reconstruct()));
            }
            ensure!(
                errors.windows(2).all(|w| w[1] <= w[0] + 1e-12),
                "{rows}x{cols}: errors {errors:?}"
            );
        }
        Ok("6x5 and 20x10 spectra, U orthonormality and Frobenius error within tolerance".into())
    })())
}

fn ac5() -> Verdict {
    ok((|| {
        let mut worst = 0.0f64;
        for mode in [PvMode::Dm, PvMode::Dbow, PvMode::DmPlusDbow] {
            for part in mode.parts() {
                let (net, examples) = match part {
                    PvMode::Dm => (micro_net(1, true), dm_examples()),
                    _ => (micro_net(2, false), dbow_examples()),
                };
                worst = worst.max(gradient_gap(&net, &examples));
            }
        }
        ensure!(worst <= 1e-4, "gradient gap {worst:.2e}");
        let corpus = toy_corpus();
        for mode in [PvMode::Dm, PvMode::Dbow, PvMode::DmPlusDbow] {
            let mut t = Trainer::new(&corpus, &toy_config(mode)).map_err(|e| e.to_string())?;
            let mut losses = vec![t.objective(1234)];
            for _ in 0..5 {
                let examples = t.draw_epoch();
                t.apply_epoch(&examples);
                losses.push(t.objective(1234));
            }
            ensure!(
                losses.windows(2).all(|w| w[1] < w[0]),
                "{mode:?} loss {losses:?}"
            );
        }
        Ok(format!("max relative gradient gap {worst:.1e}; loss strictly decreasing over 5 epochs in all modes"))
    })())
}

fn monotone(report: &RankingReport) -> bool {
    report.counts.windows(2).all(|w| w[0] <= w[1])
}

fn ac6() -> Verdict {
    ok((|| {
        for (hits, want) in [(53, "89.83"), (40, "67.80"), (58, "98.31"), (5, "8.47")] {
            let ranks: Vec<Option<usize>> = (0..59).map(|i| (i < hits).then_some(1)).collect();
            let (count, pct) = hits_at(&ranks, 1).map_err(|e| e.to_string())?;
            ensure!(
                count == hits && pct.to_string() == want,
                "{hits}/59 -> {pct}, expected {want}"
            );
        }
        let mut r = rng(61);
        for _ in 0..1000 {
            let n = r.random_range(1..80);
            let ranks: Vec<Option<usize>> = (0..n)
                .map(|_| r.random_bool(0.8).then(|| r.random_range(1..=20)))
                .collect();
            let at = |k| hits_at(&ranks, k).unwrap();
            ensure!(
                at(1) <= at(2) && at(2) <= at(3) && at(3) <= at(20),
                "non-monotone on {ranks:?}"
            );
        }
        let f = eval_fixture(62, 50, 10, ALL_BACKENDS);
        let out = run_eval(&RunConfig::from_file(&f.config()).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        for report in &out.reports {
            ensure!(
                report.error.is_none(),
                "{}: {:?}",
                report.backend,
                report.error
            );
            ensure!(
                monotone(report),
                "{}: counts {:?}",
                report.backend,
                report.counts
            );
        }
        Ok(format!(
            "four reference ratios exact; monotone on 1000 random rank lists and {} backend runs",
            out.reports.len()
        ))
    })())
}

fn ac7() -> Verdict {
    ok((|| {
        let start = Instant::now();
        let f = eval_fixture(71, 50, 10, "wmd");
        let out = run_eval(&RunConfig::from_file(&f.config()).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        let report = &out.reports[0];
        ensure!(report.error.is_none(), "wmd failed: {:?}", report.error);
        let verbatim: Vec<_> = report.outcomes.iter().filter(|o| o.query == 1).collect();
        let ranks: Vec<Option<usize>> = verbatim.iter().map(|o| o.rank).collect();
        let (hits, pct) = hits_at(&ranks, 1).map_err(|e| e.to_string())?;
        ensure!(verbatim.len() == 10, "{} verbatim queries", verbatim.len());
        ensure!(
            hits == 10,
            "verbatim hits@1 = {hits}/10 ({pct}%): {ranks:?}"
        );
        ensure!(monotone(report), "counts {:?}", report.counts);
        ensure!(elapsed < Duration::from_secs(30), "took {elapsed:.2?}");
        Ok(format!(
            "verbatim hits@1 = {hits}/10 ({pct}%), full run {elapsed:.2?}"
        ))
    })())
}

fn ac8() -> Verdict {
    ok((|| {
        for name in ["vectors.bin", "vectors.txt", "vectors.vec"] {
            let (t, _) =
                load_embeddings(&fixture_path(name), None, None).map_err(|e| e.to_string())?;
            ensure!(
                (t.len(), t.dim()) == (3, 4),
                "{name}: {} entries of dim {}",
                t.len(),
                t.dim()
            );
            ensure!(
                t.get("café") == Some(&[1.0, 0.0, -0.5, 2.5][..]),
                "{name}: wrong café row"
            );
        }
        let mut r = rng(81);
        let specials = [
            0.0f32,
            -0.0,
            f32::MIN_POSITIVE,
            1e-45,
            f32::MAX,
            f32::MIN,
            0.1,
            -1.0 / 3.0,
        ];
        for case in 0..200 {
            let dim = r.random_range(1..8);
            let rows: Vec<(String, Vec<f32>)> = (0..r.random_range(1..20))
                .map(|i| {
                    let v = (0..dim)
                        .map(|_| match r.random_range(0..4) {
                            0 => specials[r.random_range(0..specials.len())],
                            _ => f32::from_bits(r.random::<u32>()),
                        })
                        .map(|x| if x.is_finite() { x } else { 1.5 })
                        .collect();
                    (format!("t{i}é"), v)
                })
                .collect();
            let table = EmbeddingTable::from_rows(dim, rows).map_err(|e| e.to_string())?;
            let header = case % 2 == 0;
            let mut buf = Vec::new();
            write_text_vectors(&table, &mut buf, header).map_err(|e| e.to_string())?;
            let (back, _) =
                read_text_vectors(Cursor::new(buf), Path::new("mem"), Some(header), None)
                    .map_err(|e| e.to_string())?;
            let bits = |t: &EmbeddingTable| -> Vec<(String, Vec<u32>)> {
                t.iter()
                    .map(|(w, v)| (w.to_string(), v.iter().map(|x| x.to_bits()).collect()))
                    .collect()
            };
            ensure!(
                bits(&back) == bits(&table),
                "case {case}: round trip changed bits"
            );
        }
        Ok("3 fixtures load as 3 x 4; 200 random tables round-trip bit-identically".into())
    })())
}

fn ac9() -> Verdict {
    ok((|| {
        let f = eval_fixture(91, 40, 6, ALL_BACKENDS);
        let cfg = f.config();
        let mut runs = Vec::new();
        for n in 0..2 {
            let dir = f.path(&format!("run{n}"));
            let o = run(&[
                "--config",
                cfg.to_str().unwrap(),
                "--jobs",
                "1",
                "eval",
                "--out",
                dir.to_str().unwrap(),
            ]);
            ensure!(o.status.success(), "eval failed: {}", stderr(&o));
            let files: Vec<Vec<u8>> = ["report.csv", "report.txt", "ranks.csv"]
                .iter()
                .map(|name| std::fs::read(dir.join(name)).unwrap_or_default())
                .collect();
            ensure!(files.iter().all(|b| !b.is_empty()), "missing report files");
            runs.push((o.stdout, files));
        }
        ensure!(runs[0] == runs[1], "the two runs differ");
        let backends = ALL_BACKENDS.split(',').count();
        Ok(format!(
            "two runs over {backends} backends gave byte-identical stdout and report files"
        ))
    })())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("AC1", "exact transport matches brute-force oracle", ac1),
        ("AC2", "distance bound chain and metric properties", ac2),
        ("AC3", "pruned search equals exhaustive search", ac3),
        ("AC4", "truncated SVD matches dense oracle", ac4),
        ("AC5", "paragraph vector gradients and training loss", ac5),
        ("AC6", "hits@k arithmetic and monotonicity", ac6),
        ("AC7", "end-to-end verbatim recall", ac7),
        ("AC8", "embedding format round trips", ac8),
        ("AC9", "deterministic evaluation reports", ac9),
    ];
    let mut failed = 0;
    for (id, title, check) in criteria {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Verdict::Fail(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Verdict::Pass(d) => println!("{id} PASS {title}: {d} [{secs:.2}s]"),
            Verdict::Fail(d) => {
                failed += 1;
                println!("{id} FAIL {title}: {d} [{secs:.2}s]");
            }
            Verdict::KnownFail(d) => {
                println!("{id} FAIL {title}: {d} [{secs:.2}s] (documented, not counted)")
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
