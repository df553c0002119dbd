//! Dense undirected graphs, the half-integral vertex cover LP and greedy
//! clique peeling.

use std::collections::VecDeque;

/// Simple undirected graph on `0..n` stored as bitset rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairGraph {
    n: usize,
    rows: Vec<Vec<u64>>,
}

impl PairGraph {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        PairGraph {
            n,
            rows: vec![vec![0; words]; n],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = PairGraph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn complete(n: usize) -> Self {
        complement_graph(&PairGraph::new(n))
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Adds `{u, v}`; loops are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u < self.n && v < self.n, "vertex out of range");
        if u == v {
            return;
        }
        self.rows[u][v / 64] |= 1 << (v % 64);
        self.rows[v][u / 64] |= 1 << (u % 64);
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.rows[u][v / 64] >> (v % 64) & 1 == 1
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rows[v].iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[v].iter().enumerate().flat_map(|(wi, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|u| self.neighbors(u).filter(move |&v| v > u).map(move |v| (u, v)))
            .collect()
    }

    /// Subgraph induced by `vertices`; vertex `k` of the result is
    /// `vertices[k]`.
    pub fn induced(&self, vertices: &[usize]) -> PairGraph {
        let mut g = PairGraph::new(vertices.len());
        for (a, &u) in vertices.iter().enumerate() {
            for (b, &v) in vertices.iter().enumerate().skip(a + 1) {
                if self.has_edge(u, v) {
                    g.add_edge(a, b);
                }
            }
        }
        g
    }

    /// True iff every two distinct vertices of `set` are adjacent.
    pub fn is_clique(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(a, &u)| set[a + 1..].iter().all(|&v| self.has_edge(u, v)))
    }

    pub fn is_vertex_cover(&self, cover: &[usize]) -> bool {
        let mut inside = vec![false; self.n];
        for &v in cover {
            inside[v] = true;
        }
        self.edges().iter().all(|&(u, v)| inside[u] || inside[v])
    }
}

/// Same vertices, exactly the missing edges.
pub fn complement_graph(g: &PairGraph) -> PairGraph {
    let mut out = g.clone();
    for (u, row) in out.rows.iter_mut().enumerate() {
        for w in row.iter_mut() {
            *w = !*w;
        }
        if !g.n.is_multiple_of(64) {
            if let Some(last) = row.last_mut() {
                *last &= (1u64 << (g.n % 64)) - 1;
            }
        }
        row[u / 64] &= !(1 << (u % 64));
    }
    out
}

/// Maximum matching in a bipartite graph (Hopcroft-Karp). `adj[u]` lists
/// the right vertices of left vertex `u`. Returns the partner of every left
/// and right vertex.
fn hopcroft_karp(adj: &[Vec<usize>], n_right: usize) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    let n_left = adj.len();
    let mut match_l = vec![None; n_left];
    let mut match_r: Vec<Option<usize>> = vec![None; n_right];
    let mut dist = vec![usize::MAX; n_left];
    loop {
        let mut queue = VecDeque::new();
        for u in 0..n_left {
            if match_l[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match match_r[v] {
                    None => found = true,
                    Some(w) if dist[w] == usize::MAX => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        // Iterative DFS along the layered graph.
        let mut next = vec![0usize; n_left];
        for root in 0..n_left {
            if match_l[root].is_some() {
                continue;
            }
            let mut stack = vec![root];
            while let Some(&u) = stack.last() {
                if next[u] == adj[u].len() {
                    dist[u] = usize::MAX;
                    stack.pop();
                    continue;
                }
                let v = adj[u][next[u]];
                next[u] += 1;
                match match_r[v] {
                    None => {
                        // Augment along the stack.
                        let mut v = v;
                        for &w in stack.iter().rev() {
                            let prev = match_l[w];
                            match_l[w] = Some(v);
                            match_r[v] = Some(w);
                            match prev {
                                Some(p) => v = p,
                                None => break,
                            }
                        }
                        stack.clear();
                    }
                    Some(w) if dist[w] == dist[u] + 1 => stack.push(w),
                    _ => {}
                }
            }
        }
    }
    (match_l, match_r)
}

/// Optimal LP values (each 0, 1/2 or 1) from a minimum vertex cover of the
/// bipartite double cover, found with Konig's construction.
fn half_integral_lp(g: &PairGraph) -> Vec<f64> {
    let n = g.vertex_count();
    let adj: Vec<Vec<usize>> = (0..n).map(|u| g.neighbors(u).collect()).collect();
    let (match_l, match_r) = hopcroft_karp(&adj, n);
    // Alternating reachability from free left vertices.
    let mut seen_l = vec![false; n];
    let mut seen_r = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&u| match_l[u].is_none()).collect();
    for &u in &queue {
        seen_l[u] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if seen_r[v] || match_l[u] == Some(v) {
                continue;
            }
            seen_r[v] = true;
            if let Some(w) = match_r[v] {
                if !seen_l[w] {
                    seen_l[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    (0..n)
        .map(|v| (u8::from(!seen_l[v]) + u8::from(seen_r[v])) as f64 / 2.0)
        .collect()
}

/// Result of the relaxed vertex cover on a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexCover {
    /// Vertices with LP value `>= 0.5`, ascending.
    pub cover: Vec<usize>,
    /// An optimal LP solution, every entry in `{0, 0.5, 1}`.
    pub lp_values: Vec<f64>,
    /// LP optimum, a lower bound on the minimum cover size.
    pub lp_objective: f64,
}

/// Solves the vertex cover LP exactly and rounds at 0.5.
///
/// Among optimal LP solutions, ones with fewer half values are preferred:
/// a half vertex `v` is fixed to 0 (its half neighbours to 1) whenever that
/// keeps the objective optimal, and the rest is re-solved.
pub fn min_vertex_cover_lp(g: &PairGraph) -> VertexCover {
    let n = g.vertex_count();
    let mut x = half_integral_lp(g);
    let lp_objective = x.iter().sum();

    let mut blocked = vec![false; n];
    loop {
        let halves: Vec<usize> = (0..n).filter(|&v| x[v] == 0.5).collect();
        if halves.is_empty() {
            break;
        }
        let h = g.induced(&halves);
        let mut order: Vec<usize> = (0..halves.len()).filter(|&a| !blocked[halves[a]]).collect();
        order.sort_by_key(|&a| (h.degree(a), a));
        let mut improved = false;
        for a in order {
            let nbrs: Vec<usize> = h.neighbors(a).collect();
            if nbrs.is_empty() || 2 * nbrs.len() > halves.len() {
                blocked[halves[a]] = true;
                continue;
            }
            let mut removed = vec![false; halves.len()];
            removed[a] = true;
            for &b in &nbrs {
                removed[b] = true;
            }
            let rest: Vec<usize> = (0..halves.len()).filter(|&b| !removed[b]).collect();
            let sub = h.induced(&rest);
            let sub_x = half_integral_lp(&sub);
            let sub_twice: f64 = sub_x.iter().sum::<f64>() * 2.0;
            if (2 * nbrs.len()) as f64 + sub_twice == halves.len() as f64 {
                x[halves[a]] = 0.0;
                for &b in &nbrs {
                    x[halves[b]] = 1.0;
                }
                for (k, &b) in rest.iter().enumerate() {
                    x[halves[b]] = sub_x[k];
                }
                improved = true;
                break;
            }
            blocked[halves[a]] = true;
        }
        if !improved {
            break;
        }
    }

    let cover = (0..n).filter(|&v| x[v] >= 0.5).collect();
    VertexCover {
        cover,
        lp_values: x,
        lp_objective,
    }
}

/// Grows a clique from the highest-degree vertex, always adding the
/// candidate with the most neighbours among the remaining candidates.
fn greedy_clique(g: &PairGraph) -> Vec<usize> {
    match (0..g.vertex_count()).max_by_key(|&v| (g.degree(v), std::cmp::Reverse(v))) {
        Some(start) => greedy_clique_from(g, start),
        None => Vec::new(),
    }
}

/// Greedy maximal clique containing `start`, ascending.
pub fn greedy_clique_from(g: &PairGraph, start: usize) -> Vec<usize> {
    let mut clique = vec![start];
    let mut candidates: Vec<usize> = g.neighbors(start).collect();
    while !candidates.is_empty() {
        let best = *candidates
            .iter()
            .max_by_key(|&&c| {
                let inner = candidates.iter().filter(|&&d| g.has_edge(c, d)).count();
                (inner, std::cmp::Reverse(c))
            })
            .expect("non-empty");
        clique.push(best);
        candidates.retain(|&c| c != best && g.has_edge(best, c));
    }
    clique.sort_unstable();
    clique
}

/// Size of the largest greedy clique grown from the `tries` highest-degree
/// vertices; a lower bound on the clique number.
pub fn clique_lower_bound(g: &PairGraph, tries: usize) -> usize {
    let mut by_degree: Vec<usize> = (0..g.vertex_count()).collect();
    by_degree.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    by_degree
        .into_iter()
        .take(tries)
        .map(|v| greedy_clique_from(g, v).len())
        .max()
        .unwrap_or(0)
}

/// Drops the lowest-degree vertex with a missing edge until `set` is a
/// clique of `g`.
fn prune_to_clique(g: &PairGraph, mut set: Vec<usize>) -> Vec<usize> {
    loop {
        let violating = set
            .iter()
            .copied()
            .filter(|&u| set.iter().any(|&v| v != u && !g.has_edge(u, v)))
            .min_by_key(|&u| (g.degree(u), std::cmp::Reverse(u)));
        match violating {
            Some(u) => set.retain(|&v| v != u),
            None => return set,
        }
    }
}

/// Peels up to `k` cliques off `g`: each round takes the independent set
/// left by the rounded cover of the complement, then deletes it.
///
/// When rounding leaves nothing outside the cover, the round falls back
/// to a greedy clique so progress is always made. Returned vertex sets are
/// disjoint, ascending, and cliques of `g`.
/// Vertices of the `k`-core: what remains after repeatedly deleting
/// vertices of degree below `k`. Ascending.
pub fn k_core(g: &PairGraph, k: usize) -> Vec<usize> {
    let n = g.vertex_count();
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&v| deg[v] < k).collect();
    for &v in &stack {
        removed[v] = true;
    }
    while let Some(v) = stack.pop() {
        for u in g.neighbors(v) {
            if !removed[u] {
                deg[u] -= 1;
                if deg[u] < k {
                    removed[u] = true;
                    stack.push(u);
                }
            }
        }
    }
    (0..n).filter(|&v| !removed[v]).collect()
}

pub fn extract_cliques(g: &PairGraph, k: usize) -> Vec<Vec<usize>> {
    let mut alive: Vec<usize> = (0..g.vertex_count()).collect();
    let mut out = Vec::new();
    for _ in 0..k {
        if alive.is_empty() {
            break;
        }
        let sub = g.induced(&alive);
        let cover = min_vertex_cover_lp(&complement_graph(&sub));
        let mut in_cover = vec![false; alive.len()];
        for &v in &cover.cover {
            in_cover[v] = true;
        }
        let mut independent: Vec<usize> = (0..alive.len()).filter(|&v| !in_cover[v]).collect();
        if independent.is_empty() {
            independent = greedy_clique(&sub);
        }
        let clique = prune_to_clique(&sub, independent);
        debug_assert!(sub.is_clique(&clique));
        let members: Vec<usize> = clique.iter().map(|&v| alive[v]).collect();
        let mut taken = vec![false; alive.len()];
        for &v in &clique {
            taken[v] = true;
        }
        alive = alive
            .iter()
            .enumerate()
            .filter(|&(a, _)| !taken[a])
            .map(|(_, &v)| v)
            .collect();
        out.push(members);
    }
    out
}
