//! Tanner graphs and their construction by progressive edge growth.

use rand::seq::SliceRandom;
use rand::Rng;

use super::degree::{realize, DegreeDistributions, DegreeSequence};
use crate::error::{Error, Result};
use crate::rng::SeedStream;

/// Bipartite graph between `n_vars` code bits and `n_checks` parity checks.
///
/// Edges are numbered check-major: the edges of check `c` are
/// `check_start[c]..check_start[c + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    n_vars: usize,
    n_checks: usize,
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    var_start: Vec<usize>,
    /// Edge ids grouped by variable.
    var_edges: Vec<usize>,
}

impl TannerGraph {
    /// Builds the graph from check adjacency lists.
    pub fn from_check_lists(n_vars: usize, checks: &[Vec<usize>]) -> Result<Self> {
        let mut check_start = Vec::with_capacity(checks.len() + 1);
        let mut edge_var = Vec::new();
        let mut var_deg = vec![0usize; n_vars];
        check_start.push(0);
        for (c, list) in checks.iter().enumerate() {
            let mut sorted = list.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Domain(format!("parallel edge at check {c}")));
            }
            for &v in &sorted {
                if v >= n_vars {
                    return Err(Error::Domain(format!("check {c} names variable {v} of {n_vars}")));
                }
                var_deg[v] += 1;
            }
            edge_var.extend(sorted);
            check_start.push(edge_var.len());
        }
        let mut var_start = vec![0usize; n_vars + 1];
        for v in 0..n_vars {
            var_start[v + 1] = var_start[v] + var_deg[v];
        }
        let mut fill = var_start.clone();
        let mut var_edges = vec![0usize; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v]] = e;
            fill[v] += 1;
        }
        Ok(TannerGraph {
            n_vars,
            n_checks: checks.len(),
            check_start,
            edge_var,
            var_start,
            var_edges,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    pub fn n_edges(&self) -> usize {
        self.edge_var.len()
    }

    /// Variables in check `c`.
    pub fn check(&self, c: usize) -> &[usize] {
        &self.edge_var[self.check_start[c]..self.check_start[c + 1]]
    }

    pub fn check_edges(&self, c: usize) -> std::ops::Range<usize> {
        self.check_start[c]..self.check_start[c + 1]
    }

    /// Edge ids of variable `v`.
    pub fn var_edges(&self, v: usize) -> &[usize] {
        &self.var_edges[self.var_start[v]..self.var_start[v + 1]]
    }

    pub fn edge_var(&self, e: usize) -> usize {
        self.edge_var[e]
    }

    /// Checks touching variable `v`.
    pub fn var_checks(&self, v: usize) -> Vec<usize> {
        self.var_edges(v).iter().map(|&e| self.check_of_edge(e)).collect()
    }

    fn check_of_edge(&self, e: usize) -> usize {
        self.check_start.partition_point(|&s| s <= e) - 1
    }

    pub fn var_degrees(&self) -> Vec<usize> {
        (0..self.n_vars).map(|v| self.var_start[v + 1] - self.var_start[v]).collect()
    }

    pub fn check_degrees(&self) -> Vec<usize> {
        (0..self.n_checks).map(|c| self.check_start[c + 1] - self.check_start[c]).collect()
    }

    pub fn check_lists(&self) -> Vec<Vec<usize>> {
        (0..self.n_checks).map(|c| self.check(c).to_vec()).collect()
    }

    /// Whether every check has even parity on `bits`.
    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        self.unsatisfied(bits) == 0
    }

    /// Number of checks with odd parity on `bits`.
    pub fn unsatisfied(&self, bits: &[u8]) -> usize {
        (0..self.n_checks)
            .filter(|&c| self.check(c).iter().fold(0u8, |a, &v| a ^ (bits[v] & 1)) == 1)
            .count()
    }

    /// Length of the shortest cycle, `None` if the graph is a forest.
    pub fn girth(&self) -> Option<usize> {
        let checks_of: Vec<Vec<usize>> = (0..self.n_vars).map(|v| self.var_checks(v)).collect();
        let total = self.n_vars + self.n_checks;
        let mut best: Option<usize> = None;
        let mut dist = vec![usize::MAX; total];
        let mut parent = vec![usize::MAX; total];
        for root in 0..self.n_vars {
            dist.fill(usize::MAX);
            parent.fill(usize::MAX);
            dist[root] = 0;
            let mut queue = std::collections::VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                if best.is_some_and(|b| 2 * dist[u] + 2 > b) {
                    break;
                }
                let nbrs: Vec<usize> = if u < self.n_vars {
                    checks_of[u].iter().map(|&c| self.n_vars + c).collect()
                } else {
                    self.check(u - self.n_vars).to_vec()
                };
                for w in nbrs {
                    if w == parent[u] {
                        continue;
                    }
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        parent[w] = u;
                        queue.push_back(w);
                    } else {
                        let len = dist[u] + dist[w] + 1;
                        best = Some(best.map_or(len, |b| b.min(len)));
                    }
                }
            }
        }
        best
    }

    /// Number of connected components, isolated nodes included.
    pub fn components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.n_vars + self.n_checks).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for c in 0..self.n_checks {
            for &v in self.check(c) {
                let (a, b) = (find(&mut parent, v), find(&mut parent, self.n_vars + c));
                parent[a] = b;
            }
        }
        (0..parent.len()).filter(|&x| find(&mut parent, x) == x).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Construction {
    /// Progressive edge growth.
    #[default]
    Peg,
    /// Uniform socket matching, re-drawn on parallel edges.
    Random,
}

/// Graph with the given degree sequence.
pub fn build_graph(seq: &DegreeSequence, seed: SeedStream, method: Construction) -> Result<TannerGraph> {
    match method {
        Construction::Peg => peg(seq, seed),
        Construction::Random => random_graph(seq, seed),
    }
}

pub fn build_graph_from_distributions(n: usize, dd: &DegreeDistributions, seed: SeedStream, method: Construction) -> Result<TannerGraph> {
    build_graph(&realize(dd, n)?, seed, method)
}

fn peg(seq: &DegreeSequence, seed: SeedStream) -> Result<TannerGraph> {
    let n = seq.var_degrees.len();
    let m = seq.check_degrees.len();
    let mut rng = seed.rng();
    let mut var_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut check_adj: Vec<Vec<usize>> = vec![Vec::new(); m];
    let target = &seq.check_degrees;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| seq.var_degrees[v]);

    let mut check_seen = vec![0u32; m];
    let mut var_seen = vec![0u32; n];
    let mut epoch = 0u32;
    let mut open = target.iter().filter(|&&d| d > 0).count();
    for &v in &order {
        for _ in 0..seq.var_degrees[v] {
            epoch += 1;
            let has_slot = |c: usize, adj: &[Vec<usize>]| adj[c].len() < target[c];
            for &c in &var_adj[v] {
                check_seen[c] = epoch;
            }
            let eligible = open - var_adj[v].iter().filter(|&&c| has_slot(c, &check_adj)).count();
            if eligible == 0 {
                return Err(Error::Unrealizable(format!("no check left for variable {v}")));
            }
            var_seen[v] = epoch;
            // breadth-first expansion from v, one check level at a time
            let mut level = var_adj[v].clone();
            let mut reached = 0usize;
            let cands: Vec<usize> = loop {
                let mut vars = Vec::new();
                for &c in &level {
                    for &u in &check_adj[c] {
                        if var_seen[u] != epoch {
                            var_seen[u] = epoch;
                            vars.push(u);
                        }
                    }
                }
                let mut fresh = Vec::new();
                for &u in &vars {
                    for &c in &var_adj[u] {
                        if check_seen[c] != epoch {
                            check_seen[c] = epoch;
                            fresh.push(c);
                            if has_slot(c, &check_adj) {
                                reached += 1;
                            }
                        }
                    }
                }
                if fresh.is_empty() {
                    break (0..m).filter(|&c| check_seen[c] != epoch && has_slot(c, &check_adj)).collect();
                }
                if reached == eligible {
                    break fresh.into_iter().filter(|&c| has_slot(c, &check_adj)).collect();
                }
                level = fresh;
            };
            let best = cands.iter().map(|&c| target[c] - check_adj[c].len()).max().unwrap_or(0);
            let ties: Vec<usize> = cands.into_iter().filter(|&c| target[c] - check_adj[c].len() == best).collect();
            if ties.is_empty() {
                return Err(Error::Unrealizable(format!("no candidate check for variable {v}")));
            }
            let c = ties[rng.random_range(0..ties.len())];
            var_adj[v].push(c);
            check_adj[c].push(v);
            if check_adj[c].len() == target[c] {
                open -= 1;
            }
        }
    }
    // the last few edges may be forced into 4-cycles by the degree targets
    break_four_cycles(&mut var_adj, &mut check_adj, &mut rng);
    TannerGraph::from_check_lists(n, &check_adj)
}

/// Whether some other variable shares two checks with `v`.
fn in_four_cycle(v: usize, var_adj: &[Vec<usize>], check_adj: &[Vec<usize>]) -> bool {
    let mut seen: Vec<usize> = Vec::new();
    for &c in &var_adj[v] {
        for &u in &check_adj[c] {
            if u != v {
                if seen.contains(&u) {
                    return true;
                }
                seen.push(u);
            }
        }
    }
    false
}

/// Degree-preserving edge swaps until no variable lies on a 4-cycle, or
/// the attempt budget runs out.
fn break_four_cycles<R: Rng>(var_adj: &mut [Vec<usize>], check_adj: &mut [Vec<usize>], rng: &mut R) {
    let n = var_adj.len();
    let mut bad: Vec<usize> = (0..n).filter(|&v| in_four_cycle(v, var_adj, check_adj)).collect();
    let mut budget = 100_000;
    while let Some(&v) = bad.last() {
        if budget == 0 {
            return;
        }
        if !in_four_cycle(v, var_adj, check_adj) {
            bad.pop();
            continue;
        }
        budget -= 1;
        let c = var_adj[v][rng.random_range(0..var_adj[v].len())];
        let u = rng.random_range(0..n);
        if u == v || var_adj[u].is_empty() {
            continue;
        }
        let d = var_adj[u][rng.random_range(0..var_adj[u].len())];
        if d == c || var_adj[v].contains(&d) || var_adj[u].contains(&c) {
            continue;
        }
        let swap = |va: &mut [Vec<usize>], ca: &mut [Vec<usize>], (v, c, u, d): (usize, usize, usize, usize)| {
            for x in va[v].iter_mut() {
                if *x == c {
                    *x = d;
                }
            }
            for x in va[u].iter_mut() {
                if *x == d {
                    *x = c;
                }
            }
            for x in ca[c].iter_mut() {
                if *x == v {
                    *x = u;
                }
            }
            for x in ca[d].iter_mut() {
                if *x == u {
                    *x = v;
                }
            }
        };
        swap(var_adj, check_adj, (v, c, u, d));
        let touched: Vec<usize> = [c, d].iter().flat_map(|&k| check_adj[k].clone()).collect();
        if in_four_cycle(v, var_adj, check_adj) || touched.iter().any(|&w| in_four_cycle(w, var_adj, check_adj)) {
            swap(var_adj, check_adj, (v, d, u, c));
        }
    }
}

fn random_graph(seq: &DegreeSequence, seed: SeedStream) -> Result<TannerGraph> {
    let mut rng = seed.rng();
    let n = seq.var_degrees.len();
    if seq.edges() != seq.check_degrees.iter().sum::<usize>() {
        return Err(Error::Unrealizable(format!(
            "{} variable sockets vs {} check sockets",
            seq.edges(),
            seq.check_degrees.iter().sum::<usize>()
        )));
    }
    let mut sockets: Vec<usize> = seq
        .var_degrees
        .iter()
        .enumerate()
        .flat_map(|(v, &d)| std::iter::repeat_n(v, d))
        .collect();
    'attempt: for _ in 0..100 {
        sockets.shuffle(&mut rng);
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); seq.check_degrees.len()];
        for &v in &sockets {
            let open: Vec<usize> = (0..lists.len())
                .filter(|&c| lists[c].len() < seq.check_degrees[c] && !lists[c].contains(&v))
                .collect();
            if open.is_empty() {
                continue 'attempt;
            }
            lists[open[rng.random_range(0..open.len())]].push(v);
        }
        return TannerGraph::from_check_lists(n, &lists);
    }
    Err(Error::Unrealizable("random matching kept producing parallel edges".into()))
}
