//! Exact solver for the balanced transportation problem
//!
//! ```text
//! minimize   Σᵢⱼ Tᵢⱼ·cᵢⱼ
//! subject to Σⱼ Tᵢⱼ = aᵢ,  Σᵢ Tᵢⱼ = bⱼ,  T ≥ 0
//! ```
//!
//! Transportation simplex: a northwest-corner starting tree, node
//! potentials, Dantzig pricing and cycle pivots along the basis tree.
//! Long runs of degenerate pivots switch pricing to Bland's rule so the
//! method cannot cycle.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

const DEGENERATE_RUN_LIMIT: usize = 50;

/// Optimal flow matrix for supplies `a` (rows) and demands `b` (columns).
///
/// Demands are rescaled to the supply total, so inputs that each sum to one
/// up to rounding are accepted.
pub fn solve_transport(a: &[f64], b: &[f64], cost: &DenseMatrix) -> Result<DenseMatrix> {
    let (m, n) = (a.len(), b.len());
    if m == 0 || n == 0 {
        return Err(Error::EmptyDocument);
    }
    if cost.rows() != m || cost.cols() != n {
        return Err(Error::SolverFailure(alloc::format!(
            "cost matrix is {}x{}, marginals are {m}x{n}",
            cost.rows(),
            cost.cols()
        )));
    }
    if a.iter().chain(b).any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::SolverFailure(
            "marginals must be finite and non-negative".into(),
        ));
    }
    if cost.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::SolverFailure("costs must be finite".into()));
    }
    let supply: f64 = a.iter().sum();
    let demand: f64 = b.iter().sum();
    if supply <= 0.0 || demand <= 0.0 {
        return Err(Error::SolverFailure("marginals carry no mass".into()));
    }
    if libm::fabs(supply - demand) > 1e-9 * supply.max(demand) {
        return Err(Error::SolverFailure(alloc::format!(
            "unbalanced problem: supply {supply} vs demand {demand}"
        )));
    }
    let scale = supply / demand;
    let b: Vec<f64> = b.iter().map(|x| x * scale).collect();

    let mut solver = Simplex::new(a, &b, cost);
    solver.run()?;
    Ok(solver.flow_matrix())
}

struct Simplex<'a> {
    m: usize,
    n: usize,
    cost: &'a DenseMatrix,
    /// Basic cells as `(row, col)`; always `m + n - 1` of them.
    cells: Vec<(usize, usize)>,
    flow: Vec<f64>,
    is_basic: Vec<bool>,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl<'a> Simplex<'a> {
    fn new(a: &[f64], b: &[f64], cost: &'a DenseMatrix) -> Self {
        let (m, n) = (a.len(), b.len());
        let mut cells = Vec::with_capacity(m + n - 1);
        let mut flow = Vec::with_capacity(m + n - 1);
        let mut is_basic = vec![false; m * n];
        let mut supply = a.to_vec();
        let mut demand = b.to_vec();
        let (mut i, mut j) = (0, 0);
        loop {
            let x = supply[i].min(demand[j]);
            cells.push((i, j));
            flow.push(x);
            is_basic[i * n + j] = true;
            supply[i] -= x;
            demand[j] -= x;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if j == n - 1 || (i < m - 1 && supply[i] <= demand[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self {
            m,
            n,
            cost,
            cells,
            flow,
            is_basic,
            u: vec![0.0; m],
            v: vec![0.0; n],
        }
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for (e, &(i, j)) in self.cells.iter().enumerate() {
            adj[i].push(e);
            adj[self.m + j].push(e);
        }
        adj
    }

    fn potentials(&mut self, adj: &[Vec<usize>]) {
        let mut known = vec![false; self.m + self.n];
        let mut queue = VecDeque::new();
        self.u[0] = 0.0;
        known[0] = true;
        queue.push_back(0);
        while let Some(node) = queue.pop_front() {
            for &e in &adj[node] {
                let (i, j) = self.cells[e];
                let c = self.cost.get(i, j);
                let (row, col) = (i, self.m + j);
                if !known[col] {
                    self.v[j] = c - self.u[i];
                    known[col] = true;
                    queue.push_back(col);
                } else if !known[row] {
                    self.u[i] = c - self.v[j];
                    known[row] = true;
                    queue.push_back(row);
                }
            }
        }
    }

    /// Most negative reduced cost, or the first negative one under Bland's rule.
    fn entering(&self, tol: f64, bland: bool) -> Option<(usize, usize)> {
        let mut best: Option<((usize, usize), f64)> = None;
        for i in 0..self.m {
            for j in 0..self.n {
                if self.is_basic[i * self.n + j] {
                    continue;
                }
                let r = self.cost.get(i, j) - self.u[i] - self.v[j];
                if r < -tol {
                    if bland {
                        return Some((i, j));
                    }
                    if best.is_none_or(|(_, b)| r < b) {
                        best = Some(((i, j), r));
                    }
                }
            }
        }
        best.map(|(cell, _)| cell)
    }

    /// Basic cells on the tree path from column `j` to row `i`, in order.
    fn tree_path(&self, adj: &[Vec<usize>], i: usize, j: usize) -> Result<Vec<usize>> {
        let start = self.m + j;
        let goal = i;
        let mut parent_edge = vec![usize::MAX; self.m + self.n];
        let mut seen = vec![false; self.m + self.n];
        let mut queue = VecDeque::new();
        seen[start] = true;
        queue.push_back(start);
        while let Some(node) = queue.pop_front() {
            if node == goal {
                break;
            }
            for &e in &adj[node] {
                let (r, c) = self.cells[e];
                let other = if node == r { self.m + c } else { r };
                if !seen[other] {
                    seen[other] = true;
                    parent_edge[other] = e;
                    queue.push_back(other);
                }
            }
        }
        if !seen[goal] {
            return Err(Error::SolverFailure("basis is not a spanning tree".into()));
        }
        let mut path = Vec::new();
        let mut node = goal;
        while node != start {
            let e = parent_edge[node];
            path.push(e);
            let (r, c) = self.cells[e];
            node = if node == r { self.m + c } else { r };
        }
        path.reverse();
        Ok(path)
    }

    fn run(&mut self) -> Result<()> {
        let cmax = self
            .cost
            .as_slice()
            .iter()
            .fold(0.0f64, |acc, x| acc.max(libm::fabs(*x)));
        let tol = 1e-12 * cmax.max(1.0);
        let max_pivots = 100_000 + 50 * self.m * self.n;
        let mut degenerate_run = 0usize;

        for _ in 0..max_pivots {
            let adj = self.adjacency();
            self.potentials(&adj);
            let bland = degenerate_run > DEGENERATE_RUN_LIMIT;
            let Some((ei, ej)) = self.entering(tol, bland) else {
                return Ok(());
            };

            // cycle: entering cell (+), then alternating signs along the path,
            // starting with (-) on the cell touching column ej
            let path = self.tree_path(&adj, ei, ej)?;
            let mut leave_pos = None;
            let mut theta = f64::INFINITY;
            for (k, &e) in path.iter().enumerate().step_by(2) {
                let f = self.flow[e];
                let better = match leave_pos {
                    None => true,
                    Some(p) => {
                        let cur: usize = path[p];
                        f < theta || (bland && f == theta && self.cells[e] < self.cells[cur])
                    }
                };
                if better {
                    theta = f;
                    leave_pos = Some(k);
                }
            }
            let leave_pos =
                leave_pos.ok_or_else(|| Error::SolverFailure("empty pivot cycle".into()))?;

            for (k, &e) in path.iter().enumerate() {
                if k % 2 == 0 {
                    self.flow[e] -= theta;
                } else {
                    self.flow[e] += theta;
                }
            }
            let leave = path[leave_pos];
            let (li, lj) = self.cells[leave];
            self.is_basic[li * self.n + lj] = false;
            self.is_basic[ei * self.n + ej] = true;
            self.cells[leave] = (ei, ej);
            self.flow[leave] = theta;

            degenerate_run = if theta > 0.0 { 0 } else { degenerate_run + 1 };
        }
        Err(Error::SolverFailure(alloc::format!(
            "no optimum after {max_pivots} pivots"
        )))
    }

    fn flow_matrix(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.m, self.n);
        for (&(i, j), &f) in self.cells.iter().zip(&self.flow) {
            t.set(i, j, t.get(i, j) + f.max(0.0));
        }
        t
    }
}
