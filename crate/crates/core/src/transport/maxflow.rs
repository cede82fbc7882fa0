//! Bipartite max-flow used for causal-coupling feasibility.
//!
//! Edmonds-Karp with real-valued capacities. Node layout: source, the n row
//! atoms, the m column atoms, sink. Middle arcs get capacity 2.0, which never
//! binds since total mass is 1; bottlenecks sit on the source and sink arcs.

const RESIDUAL_EPS: f64 = 1e-15;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    cap: f64,
    flow: f64,
    rev: usize,
}

struct Network {
    adj: Vec<Vec<Edge>>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Self { adj: vec![Vec::new(); nodes] }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: f64) {
        let rev_from = self.adj[to].len();
        let rev_to = self.adj[from].len();
        self.adj[from].push(Edge { to, cap, flow: 0.0, rev: rev_from });
        self.adj[to].push(Edge { to: from, cap: 0.0, flow: 0.0, rev: rev_to });
    }

    fn residual(&self, from: usize, idx: usize) -> f64 {
        let e = &self.adj[from][idx];
        e.cap - e.flow
    }

    /// BFS for a shortest augmenting path; returns parent (node, edge index).
    fn bfs(&self, source: usize, sink: usize) -> Option<Vec<(usize, usize)>> {
        let mut parent = vec![(usize::MAX, usize::MAX); self.adj.len()];
        let mut queue = std::collections::VecDeque::new();
        parent[source] = (source, usize::MAX);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for (idx, e) in self.adj[u].iter().enumerate() {
                if parent[e.to].0 == usize::MAX && self.residual(u, idx) > RESIDUAL_EPS {
                    parent[e.to] = (u, idx);
                    if e.to == sink {
                        return Some(parent);
                    }
                    queue.push_back(e.to);
                }
            }
        }
        None
    }

    fn max_flow(&mut self, source: usize, sink: usize) -> f64 {
        let mut total = 0.0;
        while let Some(parent) = self.bfs(source, sink) {
            let mut bottleneck = f64::INFINITY;
            let mut v = sink;
            while v != source {
                let (u, idx) = parent[v];
                bottleneck = bottleneck.min(self.residual(u, idx));
                v = u;
            }
            let mut v = sink;
            while v != source {
                let (u, idx) = parent[v];
                let rev = self.adj[u][idx].rev;
                self.adj[u][idx].flow += bottleneck;
                self.adj[v][rev].flow -= bottleneck;
                v = u;
            }
            total += bottleneck;
        }
        total
    }

    fn reachable(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        let mut queue = std::collections::VecDeque::new();
        seen[source] = true;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for (idx, e) in self.adj[u].iter().enumerate() {
                if !seen[e.to] && self.residual(u, idx) > RESIDUAL_EPS {
                    seen[e.to] = true;
                    queue.push_back(e.to);
                }
            }
        }
        seen
    }
}

pub(crate) struct FlowOutcome {
    pub flow: Vec<Vec<f64>>,
    pub value: f64,
    /// Row atoms on the source side of the min cut. When `value < 1` this is
    /// a Hall violator: the admissible targets of these rows carry less mass
    /// than the rows supply.
    pub cut_rows: Vec<usize>,
}

pub(crate) fn bipartite_max_flow(a: &[f64], b: &[f64], admissible: &[Vec<bool>]) -> FlowOutcome {
    let n = a.len();
    let m = b.len();
    let source = 0;
    let sink = n + m + 1;
    let mut net = Network::new(n + m + 2);
    for (i, &w) in a.iter().enumerate() {
        net.add_edge(source, 1 + i, w);
    }
    for (j, &w) in b.iter().enumerate() {
        net.add_edge(1 + n + j, sink, w);
    }
    for i in 0..n {
        for j in 0..m {
            if admissible[i][j] {
                net.add_edge(1 + i, 1 + n + j, 2.0);
            }
        }
    }
    let value = net.max_flow(source, sink);
    let mut flow = vec![vec![0.0; m]; n];
    for i in 0..n {
        for e in &net.adj[1 + i] {
            if e.to >= 1 + n && e.to < 1 + n + m && e.flow > 0.0 {
                flow[i][e.to - 1 - n] = e.flow;
            }
        }
    }
    let seen = net.reachable(source);
    let cut_rows = (0..n).filter(|&i| seen[1 + i]).collect();
    FlowOutcome { flow, value, cut_rows }
}
