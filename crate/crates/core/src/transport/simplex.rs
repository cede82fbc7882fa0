//! Transportation simplex on the admissible-edge subgraph.
//!
//! Maximizes `sum pi_ij c_ij` over couplings with prescribed marginals, where
//! forbidden pairs are structurally absent (no Big-M costs). The admissible
//! subgraph may be disconnected; each component then carries its own spanning
//! tree and potential root. Pivoting uses lowest-index (Bland) selection for
//! both the entering and the leaving edge, so runs are deterministic and
//! cycling-free.

use crate::error::{Error, Result};

const SUPPORT_EPS: f64 = 1e-14;

pub(crate) struct SimplexSolution {
    pub flow: Vec<Vec<f64>>,
    pub value: f64,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

/// `initial_flow` must satisfy the marginals and be supported on admissible
/// edges (costs > -inf); callers obtain it from the feasibility max-flow.
pub(crate) fn maximize(
    a: &[f64],
    b: &[f64],
    cost: &[Vec<f64>],
    initial_flow: Vec<Vec<f64>>,
) -> Result<SimplexSolution> {
    let n = a.len();
    let m = b.len();
    let mut admissible: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in 0..m {
            if cost[i][j] > f64::NEG_INFINITY {
                admissible.push((i, j));
            }
        }
    }
    let scale = admissible
        .iter()
        .map(|&(i, j)| cost[i][j].abs())
        .fold(1.0f64, f64::max);
    let enter_tol = 1e-11 * scale;

    let mut flow = initial_flow;
    let mut basis = support_forest(&mut flow, n, m);
    extend_to_spanning_forest(&mut basis, &admissible, n, m)?;

    let node = |i: usize, j: usize| (i, n + j);
    let max_iters = 1000 + 40 * (n + m) * (n + m);
    let mut phi = vec![0.0; n];
    let mut psi = vec![0.0; m];

    for _ in 0..max_iters {
        compute_potentials(&basis, cost, n, m, &mut phi, &mut psi)?;

        // Bland entering rule: first admissible edge with positive reduced profit.
        let mut entering = None;
        for &(i, j) in &admissible {
            if basis_contains(&basis, i, j) {
                continue;
            }
            if cost[i][j] - (psi[j] - phi[i]) > enter_tol {
                entering = Some((i, j));
                break;
            }
        }
        let Some((ei, ej)) = entering else {
            let value = plan_value(&flow, cost);
            return Ok(SimplexSolution { flow, value, phi, psi });
        };

        // Tree path from the entering edge's column node back to its row node.
        let path = tree_path(&basis, n, m, node(ei, ej).1, node(ei, ej).0)
            .ok_or_else(|| Error::SolverFailure("entering edge spans two components".into()))?;

        // Cycle = entering edge (+) then the path; signs alternate per step.
        let mut minus_edges: Vec<(usize, usize)> = Vec::new();
        let mut cycle_edges: Vec<(usize, usize, bool)> = Vec::new(); // (i, j, gains)
        for (step, pair) in path.windows(2).enumerate() {
            let (u, v) = (pair[0], pair[1]);
            let (i, j) = if u < n { (u, v - n) } else { (v, u - n) };
            let gains = step % 2 == 1; // step 0 follows the entering edge, so it loses
            cycle_edges.push((i, j, gains));
            if !gains {
                minus_edges.push((i, j));
            }
        }
        let delta = minus_edges
            .iter()
            .map(|&(i, j)| flow[i][j])
            .fold(f64::INFINITY, f64::min);
        let leaving = *minus_edges
            .iter()
            .filter(|&&(i, j)| flow[i][j] <= delta)
            .min()
            .expect("cycle has at least one losing edge");

        flow[ei][ej] += delta;
        for &(i, j, gains) in &cycle_edges {
            if gains {
                flow[i][j] += delta;
            } else {
                flow[i][j] -= delta;
            }
        }
        flow[leaving.0][leaving.1] = 0.0;
        basis_remove(&mut basis, leaving.0, leaving.1);
        basis_insert(&mut basis, ei, ej);
    }
    Err(Error::SolverFailure("transportation simplex did not converge".into()))
}

fn plan_value(flow: &[Vec<f64>], cost: &[Vec<f64>]) -> f64 {
    let mut v = 0.0;
    for (i, row) in flow.iter().enumerate() {
        for (j, &f) in row.iter().enumerate() {
            if f > 0.0 {
                v += f * cost[i][j];
            }
        }
    }
    v
}

fn basis_contains(basis: &[Vec<bool>], i: usize, j: usize) -> bool {
    basis[i][j]
}

fn basis_insert(basis: &mut [Vec<bool>], i: usize, j: usize) {
    basis[i][j] = true;
}

fn basis_remove(basis: &mut [Vec<bool>], i: usize, j: usize) {
    basis[i][j] = false;
}

/// Cancels cycles in the support of `flow` until it is a forest, then returns
/// the forest as a basis matrix.
fn support_forest(flow: &mut Vec<Vec<f64>>, n: usize, m: usize) -> Vec<Vec<bool>> {
    loop {
        let support: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .filter(|&(i, j)| flow[i][j] > SUPPORT_EPS)
            .collect();
        match find_cycle(&support, n, m) {
            None => break,
            Some(cycle_nodes) => {
                // even node cycle: edges alternate +/-; shrink the minus side
                let mut minus: Vec<(usize, usize)> = Vec::new();
                let mut signed: Vec<(usize, usize, bool)> = Vec::new();
                for (step, pair) in cycle_nodes.windows(2).enumerate() {
                    let (u, v) = (pair[0], pair[1]);
                    let (i, j) = if u < n { (u, v - n) } else { (v, u - n) };
                    let gains = step % 2 == 0;
                    signed.push((i, j, gains));
                    if !gains {
                        minus.push((i, j));
                    }
                }
                let delta = minus.iter().map(|&(i, j)| flow[i][j]).fold(f64::INFINITY, f64::min);
                let zeroed = *minus.iter().filter(|&&(i, j)| flow[i][j] <= delta).min().unwrap();
                for (i, j, gains) in signed {
                    if gains {
                        flow[i][j] += delta;
                    } else {
                        flow[i][j] -= delta;
                    }
                }
                flow[zeroed.0][zeroed.1] = 0.0;
            }
        }
    }
    let mut basis = vec![vec![false; m]; n];
    for i in 0..n {
        for j in 0..m {
            if flow[i][j] > SUPPORT_EPS {
                basis[i][j] = true;
            }
        }
    }
    basis
}

/// Finds a cycle in the undirected bipartite graph given by `edges`,
/// returned as a closed node walk (first == last). Nodes: rows 0..n,
/// columns n..n+m.
fn find_cycle(edges: &[(usize, usize)], n: usize, m: usize) -> Option<Vec<usize>> {
    let total = n + m;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    for &(i, j) in edges {
        adj[i].push(n + j);
        adj[n + j].push(i);
    }
    let mut visited = vec![false; total];
    let mut parent = vec![usize::MAX; total];
    for start in 0..total {
        if visited[start] || adj[start].is_empty() {
            continue;
        }
        let mut stack = vec![(start, usize::MAX)];
        visited[start] = true;
        while let Some((u, from)) = stack.pop() {
            for &v in &adj[u] {
                if v == from {
                    continue;
                }
                if visited[v] {
                    // walk both endpoints up to their common ancestor
                    let mut path_u = vec![u];
                    let mut cur = u;
                    while cur != usize::MAX {
                        cur = parent[cur];
                        if cur != usize::MAX {
                            path_u.push(cur);
                        }
                    }
                    let mut path_v = vec![v];
                    let mut cur = v;
                    while cur != usize::MAX {
                        cur = parent[cur];
                        if cur != usize::MAX {
                            path_v.push(cur);
                        }
                    }
                    let set_u: std::collections::HashSet<usize> = path_u.iter().copied().collect();
                    let lca = *path_v.iter().find(|x| set_u.contains(x))?;
                    let mut cycle: Vec<usize> =
                        path_u.iter().take_while(|&&x| x != lca).copied().collect();
                    cycle.push(lca);
                    let tail: Vec<usize> =
                        path_v.iter().take_while(|&&x| x != lca).copied().collect();
                    cycle.extend(tail.iter().rev());
                    cycle.push(u);
                    return Some(cycle);
                }
                visited[v] = true;
                parent[v] = u;
                stack.push((v, u));
            }
        }
        for p in parent.iter_mut() {
            *p = usize::MAX;
        }
    }
    None
}

/// Adds degenerate (zero-flow) basic edges until the basis spans every
/// connected component of the admissible graph with a single tree.
fn extend_to_spanning_forest(
    basis: &mut [Vec<bool>],
    admissible: &[(usize, usize)],
    n: usize,
    m: usize,
) -> Result<()> {
    let mut dsu_adm = Dsu::new(n + m);
    for &(i, j) in admissible {
        dsu_adm.union(i, n + j);
    }
    let mut dsu_basis = Dsu::new(n + m);
    for i in 0..n {
        for j in 0..m {
            if basis[i][j] {
                dsu_basis.union(i, n + j);
            }
        }
    }
    for &(i, j) in admissible {
        if dsu_basis.find(i) != dsu_basis.find(n + j) {
            basis[i][j] = true;
            dsu_basis.union(i, n + j);
        }
    }
    // every admissible-connected pair must now be basis-connected
    for &(i, j) in admissible {
        if dsu_basis.find(i) != dsu_basis.find(n + j) {
            return Err(Error::SolverFailure("failed to build a spanning basis".into()));
        }
    }
    let _ = dsu_adm;
    Ok(())
}

/// Tree potentials: psi_j - phi_i = c_ij on basic edges, root of each
/// component pinned to zero.
fn compute_potentials(
    basis: &[Vec<bool>],
    cost: &[Vec<f64>],
    n: usize,
    m: usize,
    phi: &mut [f64],
    psi: &mut [f64],
) -> Result<()> {
    let total = n + m;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    for i in 0..n {
        for j in 0..m {
            if basis[i][j] {
                adj[i].push(n + j);
                adj[n + j].push(i);
            }
        }
    }
    let mut assigned = vec![false; total];
    for root in 0..total {
        if assigned[root] {
            continue;
        }
        assigned[root] = true;
        if root < n {
            phi[root] = 0.0;
        } else {
            psi[root - n] = 0.0;
        }
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if assigned[v] {
                    continue;
                }
                assigned[v] = true;
                if u < n {
                    // v is a column
                    psi[v - n] = phi[u] + cost[u][v - n];
                } else {
                    phi[v] = psi[u - n] - cost[v][u - n];
                }
                stack.push(v);
            }
        }
    }
    Ok(())
}

/// Node path between `from` and `to` in the basis forest, inclusive.
fn tree_path(basis: &[Vec<bool>], n: usize, m: usize, from: usize, to: usize) -> Option<Vec<usize>> {
    let total = n + m;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    for i in 0..n {
        for j in 0..m {
            if basis[i][j] {
                adj[i].push(n + j);
                adj[n + j].push(i);
            }
        }
    }
    let mut parent = vec![usize::MAX; total];
    let mut seen = vec![false; total];
    seen[from] = true;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(from);
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    None
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}
