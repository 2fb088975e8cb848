//! Independent oracles and fixtures shared by integration and acceptance tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wmdsearch_core::embedding::{EmbeddingTable, Embeddings};
use wmdsearch_core::linalg::DenseMatrix;
use wmdsearch_core::pv::{example_gradient, example_loss, NsExample, PvConfig, PvMode, PvNet};
use wmdsearch_core::text::Statement;
use wmdsearch_core::weighting::NbowVector;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `v` random words `w0..` with uniform entries in [-1, 1).
pub fn random_embeddings(rng: &mut ChaCha8Rng, words: usize, dim: usize) -> Embeddings {
    let rows: Vec<(String, Vec<f32>)> = (0..words)
        .map(|i| {
            (
                format!("w{i}"),
                (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect(),
            )
        })
        .collect();
    EmbeddingTable::from_rows(dim, rows).unwrap().into()
}

/// A document over `1..=max_unique` distinct words of a `vocab`-word table
/// with small integer counts, so weights are rational.
pub fn random_doc(rng: &mut ChaCha8Rng, vocab: usize, max_unique: usize) -> NbowVector {
    let unique = rng.random_range(1..=max_unique.min(vocab));
    let mut words: Vec<usize> = (0..vocab).collect();
    for i in 0..unique {
        let j = rng.random_range(i..vocab);
        words.swap(i, j);
    }
    let counts: Vec<(String, f64)> = words[..unique]
        .iter()
        .map(|w| (format!("w{w}"), rng.random_range(1..=5) as f64))
        .collect();
    NbowVector::from_weights(counts).unwrap()
}

/// Random statements over `w0..w{vocab}` with 1..=max_len tokens.
pub fn random_corpus(
    rng: &mut ChaCha8Rng,
    n: usize,
    vocab: usize,
    max_len: usize,
) -> Vec<Statement> {
    (0..n)
        .map(|id| {
            let len = rng.random_range(1..=max_len);
            let tokens: Vec<String> = (0..len)
                .map(|_| format!("w{}", rng.random_range(0..vocab)))
                .collect();
            Statement {
                id,
                raw: tokens.join(" "),
                tokens,
            }
        })
        .collect()
}

fn gaussian_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                let (upper, lower) = a.split_at_mut(row);
                for (x, y) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                    *x -= f * y;
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    r
}

/// Minimum transport cost by enumerating every vertex of the transport
/// polytope: each choice of `m + n − 1` cells forming a spanning tree of
/// the bipartite supply/demand graph is solved with dense Gaussian
/// elimination and kept if feasible.
pub fn brute_force_transport(a: &[f64], b: &[f64], cost: &DenseMatrix) -> f64 {
    let (m, n) = (a.len(), b.len());
    let basis = m + n - 1;
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let mut best = f64::INFINITY;
    let mut chosen = Vec::with_capacity(basis);

    fn visit(
        start: usize,
        cells: &[(usize, usize)],
        chosen: &mut Vec<usize>,
        basis: usize,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if chosen.len() == basis {
            f(chosen);
            return;
        }
        for c in start..cells.len() {
            if cells.len() - c < basis - chosen.len() {
                break;
            }
            chosen.push(c);
            visit(c + 1, cells, chosen, basis, f);
            chosen.pop();
        }
    }

    visit(0, &cells, &mut chosen, basis, &mut |subset: &[usize]| {
        let mut parent: Vec<usize> = (0..m + n).collect();
        for &c in subset {
            let (i, j) = cells[c];
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, m + j));
            if ri == rj {
                return;
            }
            parent[ri] = rj;
        }
        // row sums for all rows, column sums for all but the last column
        let mut mat = vec![vec![0.0; basis]; basis];
        let mut rhs = vec![0.0; basis];
        for (k, &c) in subset.iter().enumerate() {
            let (i, j) = cells[c];
            mat[i][k] = 1.0;
            if j < n - 1 {
                mat[m + j][k] = 1.0;
            }
        }
        rhs[..m].copy_from_slice(a);
        rhs[m..].copy_from_slice(&b[..n - 1]);
        let Some(x) = gaussian_solve(mat, rhs) else {
            return;
        };
        if x.iter().any(|v| *v < -1e-12) {
            return;
        }
        let total: f64 = subset
            .iter()
            .zip(&x)
            .map(|(&c, v)| v * cost.get(cells[c].0, cells[c].1))
            .sum();
        best = best.min(total);
    });
    best
}

/// Singular values of a dense matrix, descending, from nalgebra.
pub fn dense_singular_values(m: &DenseMatrix) -> Vec<f64> {
    let d = nalgebra::DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice());
    let mut s: Vec<f64> = d.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Frobenius norm of `a − b`.
pub fn frobenius_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Central finite difference of `f` at `x` along coordinate `i`.
pub fn central_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut plus = x.to_vec();
    let mut minus = x.to_vec();
    plus[i] += h;
    minus[i] -= h;
    (f(&plus) - f(&minus)) / (2.0 * h)
}

pub fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_vec(
        rows,
        cols,
        (0..rows * cols)
            .map(|_| r.random_range(-0.8..0.8))
            .collect(),
    )
}

pub fn flatten(net: &PvNet) -> Vec<f64> {
    let mut out = net.docs.as_slice().to_vec();
    if let Some(w) = &net.words {
        out.extend_from_slice(w.as_slice());
    }
    out.extend_from_slice(net.outputs.as_slice());
    out
}

pub fn unflatten(template: &PvNet, x: &[f64]) -> PvNet {
    let take = |m: &DenseMatrix, at: &mut usize| {
        let n = m.rows() * m.cols();
        let out = DenseMatrix::from_vec(m.rows(), m.cols(), x[*at..*at + n].to_vec());
        *at += n;
        out
    };
    let mut at = 0;
    let docs = take(&template.docs, &mut at);
    let words = template.words.as_ref().map(|w| take(w, &mut at));
    let outputs = take(&template.outputs, &mut at);
    PvNet {
        docs,
        words,
        outputs,
    }
}

/// Largest relative gap between analytic and central-difference gradients.
/// Components where both are below 1e-6 in magnitude are compared absolutely.
pub fn gradient_gap(net: &PvNet, examples: &[NsExample]) -> f64 {
    let x = flatten(net);
    let loss = |p: &[f64]| {
        let n = unflatten(net, p);
        examples.iter().map(|e| example_loss(&n, e)).sum::<f64>()
    };
    let mut analytic = vec![0.0; x.len()];
    for e in examples {
        for (a, g) in analytic.iter_mut().zip(flatten(&example_gradient(net, e))) {
            *a += g;
        }
    }
    (0..x.len())
        .map(|i| {
            let numeric = central_difference(&loss, &x, i, 1e-5);
            let scale = analytic[i].abs().max(numeric.abs());
            if scale < 1e-6 {
                (analytic[i] - numeric).abs()
            } else {
                (analytic[i] - numeric).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

pub fn micro_net(seed: u64, with_words: bool) -> PvNet {
    let mut r = rng(seed);
    PvNet {
        docs: random_matrix(&mut r, 2, 4),
        words: with_words.then(|| random_matrix(&mut r, 5, 4)),
        outputs: random_matrix(&mut r, 5, 4),
    }
}

pub fn dm_examples() -> Vec<NsExample> {
    vec![
        NsExample {
            doc: 0,
            inputs: vec![1, 2, 2],
            target: 0,
            negatives: vec![3, 4, 3],
        },
        NsExample {
            doc: 1,
            inputs: vec![0],
            target: 4,
            negatives: vec![1, 2],
        },
        NsExample {
            doc: 1,
            inputs: vec![],
            target: 2,
            negatives: vec![0],
        },
    ]
}

pub fn dbow_examples() -> Vec<NsExample> {
    vec![
        NsExample {
            doc: 0,
            inputs: vec![],
            target: 1,
            negatives: vec![0, 3, 4],
        },
        NsExample {
            doc: 1,
            inputs: vec![],
            target: 3,
            negatives: vec![2, 2, 0],
        },
    ]
}

pub fn toy_corpus() -> Vec<Statement> {
    [
        "revenue grew strongly this year",
        "group revenue rose across london",
        "chief executive officer leads the group",
        "michael brown chief executive officer",
        "lettings income rose strongly",
        "sales income fell in london",
        "board of directors approved dividend",
        "dividend paid to shareholders",
        "shareholders approved the board",
        "property market in london grew",
    ]
    .iter()
    .enumerate()
    .map(|(id, t)| Statement {
        id,
        raw: t.to_string(),
        tokens: t.split_whitespace().map(String::from).collect(),
    })
    .collect()
}

pub fn toy_config(mode: PvMode) -> PvConfig {
    PvConfig {
        mode,
        dim: 32,
        window: 3,
        negative: 5,
        epochs: 5,
        seed: 7,
        ..PvConfig::default()
    }
}
