//! Brute-force solvers for the discrete Monge–Kantorovich linear program.
//!
//! Neither solver knows anything about quantiles or sorting; they exist to
//! check the monotone construction from the outside.

use crate::cost::CostFunction;
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::numeric::CompensatedSum;

/// Largest `rows * cols` accepted by [`lp_oracle_cost`].
pub const LP_ORACLE_MAX_CELLS: usize = 10_000;

/// Instances with both sides at most this size are solved by vertex
/// enumeration.
pub const ENUMERATION_MAX_SIDE: usize = 4;

const FLOW_TOL: f64 = 1e-14;

/// Optimal transport cost between two discrete measures, computed as a
/// linear program over all couplings.
pub fn lp_oracle_cost(g: &CostFunction, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    let (m, n) = (mu.len(), nu.len());
    if m * n > LP_ORACLE_MAX_CELLS {
        return Err(Error::SizeLimit {
            rows: m,
            cols: n,
            limit: LP_ORACLE_MAX_CELLS,
        });
    }
    let cost: Vec<f64> = mu
        .atoms()
        .iter()
        .flat_map(|&x| nu.atoms().iter().map(move |&y| g.eval(x - y)))
        .collect();
    let problem = Problem {
        supply: mu.weights(),
        demand: nu.weights(),
        cost: &cost,
    };
    if m <= ENUMERATION_MAX_SIDE && n <= ENUMERATION_MAX_SIDE {
        Ok(problem.enumerate_vertices())
    } else {
        Ok(problem.transportation_simplex())
    }
}

/// Vertex enumeration only; exposed so tests can cross-check the simplex.
pub fn lp_vertex_enumeration(g: &CostFunction, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    let (m, n) = (mu.len(), nu.len());
    if m > ENUMERATION_MAX_SIDE || n > ENUMERATION_MAX_SIDE {
        return Err(Error::SizeLimit { rows: m, cols: n, limit: ENUMERATION_MAX_SIDE * ENUMERATION_MAX_SIDE });
    }
    let cost = cost_matrix(g, mu, nu);
    Ok(Problem { supply: mu.weights(), demand: nu.weights(), cost: &cost }.enumerate_vertices())
}

/// Transportation simplex only.
pub fn lp_simplex(g: &CostFunction, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    let (m, n) = (mu.len(), nu.len());
    if m * n > LP_ORACLE_MAX_CELLS {
        return Err(Error::SizeLimit { rows: m, cols: n, limit: LP_ORACLE_MAX_CELLS });
    }
    let cost = cost_matrix(g, mu, nu);
    Ok(Problem { supply: mu.weights(), demand: nu.weights(), cost: &cost }.transportation_simplex())
}

fn cost_matrix(g: &CostFunction, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Vec<f64> {
    mu.atoms()
        .iter()
        .flat_map(|&x| nu.atoms().iter().map(move |&y| g.eval(x - y)))
        .collect()
}

struct Problem<'a> {
    supply: &'a [f64],
    demand: &'a [f64],
    /// Row-major `supply.len() x demand.len()`.
    cost: &'a [f64],
}

impl Problem<'_> {
    fn rows(&self) -> usize {
        self.supply.len()
    }

    fn cols(&self) -> usize {
        self.demand.len()
    }

    /// Every vertex of the transportation polytope is the unique solution
    /// supported on a spanning tree of the complete bipartite graph. Try all
    /// `(m + n - 1)`-subsets of cells, keep the trees whose flows are
    /// nonnegative, and take the cheapest.
    fn enumerate_vertices(&self) -> f64 {
        let (m, n) = (self.rows(), self.cols());
        let cells = m * n;
        let k = m + n - 1;
        let mut best = f64::INFINITY;
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            if let Some(flows) = self.tree_flows(&subset) {
                if flows.iter().all(|&f| f >= -FLOW_TOL) {
                    let c = subset
                        .iter()
                        .zip(&flows)
                        .map(|(&cell, &f)| f.max(0.0) * self.cost[cell])
                        .collect::<CompensatedSum>()
                        .value();
                    best = best.min(c);
                }
            }
            // Next k-combination of 0..cells in lexicographic order.
            let Some(i) = (0..k).rev().find(|&i| subset[i] < cells - k + i) else {
                return best;
            };
            subset[i] += 1;
            for t in i + 1..k {
                subset[t] = subset[t - 1] + 1;
            }
        }
    }

    /// Flows on a candidate basis, or `None` if the cells do not form a
    /// spanning tree. Nodes `0..m` are rows, `m..m+n` columns.
    fn tree_flows(&self, cells: &[usize]) -> Option<Vec<f64>> {
        let (m, n) = (self.rows(), self.cols());
        let mut parent: Vec<usize> = (0..m + n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &cell in cells {
            let (r, c) = (cell / n, m + cell % n);
            let (a, b) = (find(&mut parent, r), find(&mut parent, c));
            if a == b {
                return None;
            }
            parent[a] = b;
        }
        // Leaf peeling: a node of degree one fixes the flow on its only edge.
        let mut remaining: Vec<f64> = self.supply.iter().chain(self.demand).copied().collect();
        let mut degree = vec![0usize; m + n];
        for &cell in cells {
            degree[cell / n] += 1;
            degree[m + cell % n] += 1;
        }
        let mut flows = vec![f64::NAN; cells.len()];
        let mut open: Vec<bool> = vec![true; cells.len()];
        for _ in 0..cells.len() {
            let (e, leaf) = cells
                .iter()
                .enumerate()
                .filter(|(e, _)| open[*e])
                .find_map(|(e, &cell)| {
                    let (r, c) = (cell / n, m + cell % n);
                    if degree[r] == 1 {
                        Some((e, r))
                    } else if degree[c] == 1 {
                        Some((e, c))
                    } else {
                        None
                    }
                })?;
            let cell = cells[e];
            let (r, c) = (cell / n, m + cell % n);
            let other = if leaf == r { c } else { r };
            let f = remaining[leaf];
            flows[e] = f;
            remaining[leaf] = 0.0;
            remaining[other] -= f;
            degree[r] -= 1;
            degree[c] -= 1;
            open[e] = false;
        }
        Some(flows)
    }

    /// Primal transportation simplex (u–v method) on spanning-tree bases.
    ///
    /// The start is the north-west-corner solution with the demand side in
    /// reverse order, i.e. the anti-monotone coupling for sorted inputs.
    fn transportation_simplex(&self) -> f64 {
        let (m, n) = (self.rows(), self.cols());
        let scale = self.cost.iter().fold(1.0_f64, |a, &c| a.max(c.abs()));
        let tol = 1e-12 * scale;

        let mut basis: Vec<(usize, usize, f64)> = Vec::with_capacity(m + n - 1);
        {
            let mut s = self.supply.to_vec();
            let mut d: Vec<f64> = self.demand.to_vec();
            let (mut i, mut jj) = (0usize, 0usize);
            loop {
                let j = n - 1 - jj;
                let f = s[i].min(d[j]).max(0.0);
                basis.push((i, j, f));
                s[i] -= f;
                d[j] -= f;
                if i == m - 1 && jj == n - 1 {
                    break;
                }
                if i == m - 1 {
                    jj += 1;
                } else if jj == n - 1 || s[i] <= d[j] {
                    i += 1;
                } else {
                    jj += 1;
                }
            }
        }

        let max_iter = 50 * (m * n).max(100);
        for iter in 0..max_iter {
            let (u, v) = potentials(&basis, m, n, self.cost);
            let mut in_basis = vec![false; m * n];
            for &(i, j, _) in &basis {
                in_basis[i * n + j] = true;
            }
            // Dantzig's rule, switching to Bland's rule late to rule out cycling.
            let bland = iter > max_iter / 2;
            let mut entering: Option<(usize, usize, f64)> = None;
            for i in 0..m {
                for j in 0..n {
                    if in_basis[i * n + j] {
                        continue;
                    }
                    let r = self.cost[i * n + j] - u[i] - v[j];
                    if r < -tol && entering.is_none_or(|e| !bland && r < e.2) {
                        entering = Some((i, j, r));
                    }
                }
            }
            let Some((ei, ej, _)) = entering else { break };

            // Tree path from column ej back to row ei closes the cycle.
            let path = tree_path(&basis, m, n, m + ej, ei);
            let mut theta = f64::INFINITY;
            let mut leaving = usize::MAX;
            for (k, &e) in path.iter().enumerate() {
                if k % 2 == 0 && basis[e].2 < theta {
                    theta = basis[e].2;
                    leaving = e;
                }
            }
            for (k, &e) in path.iter().enumerate() {
                if k % 2 == 0 {
                    basis[e].2 -= theta;
                } else {
                    basis[e].2 += theta;
                }
            }
            basis[leaving] = (ei, ej, theta);
        }

        basis
            .iter()
            .map(|&(i, j, f)| f.max(0.0) * self.cost[i * n + j])
            .collect::<CompensatedSum>()
            .value()
    }
}

fn adjacency(basis: &[(usize, usize, f64)], m: usize, n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); m + n];
    for (e, &(i, j, _)) in basis.iter().enumerate() {
        adj[i].push((m + j, e));
        adj[m + j].push((i, e));
    }
    adj
}

/// Duals with `u_i + v_j = c_ij` on every basic cell and `u_0 = 0`.
fn potentials(basis: &[(usize, usize, f64)], m: usize, n: usize, cost: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let adj = adjacency(basis, m, n);
    let mut pot = vec![f64::NAN; m + n];
    pot[0] = 0.0;
    let mut stack = vec![0usize];
    while let Some(node) = stack.pop() {
        for &(next, e) in &adj[node] {
            if pot[next].is_nan() {
                let (i, j, _) = basis[e];
                pot[next] = cost[i * n + j] - pot[node];
                stack.push(next);
            }
        }
    }
    let v = pot.split_off(m);
    (pot, v)
}

/// Basis indices along the tree path from `from` to `to`.
fn tree_path(basis: &[(usize, usize, f64)], m: usize, n: usize, from: usize, to: usize) -> Vec<usize> {
    let adj = adjacency(basis, m, n);
    let mut via: Vec<Option<(usize, usize)>> = vec![None; m + n];
    let mut seen = vec![false; m + n];
    seen[from] = true;
    let mut stack = vec![from];
    while let Some(node) = stack.pop() {
        if node == to {
            break;
        }
        for &(next, e) in &adj[node] {
            if !seen[next] {
                seen[next] = true;
                via[next] = Some((node, e));
                stack.push(next);
            }
        }
    }
    let mut path = Vec::new();
    let mut node = to;
    while node != from {
        let (prev, e) = via[node].expect("basis is a spanning tree");
        path.push(e);
        node = prev;
    }
    path.reverse();
    path
}
