//! The percolation process `G(t)` on the n-cycle.
//!
//! Events arrive at rate 1. Each event draws an unordered pair from
//! [`DistanceDistribution::sample_pair`] and opens that edge, so an edge at
//! distance `l < n/2` is open at time `t` with probability
//! `1 - exp(-t p_l / n)` and the mean degree at `t = cn/2` is `c`. Repeated
//! draws of an open edge only increment the event counter.

use std::collections::{BTreeMap, HashSet, VecDeque};

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::distribution::{cyclic_distance, DistanceDistribution};
use crate::error::{Error, Result};
use crate::replicas::rng_from_seed;
use crate::unionfind::UnionFind;

/// Edge set, degrees and component partition of `G(t)`.
#[derive(Debug, Clone)]
pub struct GraphState {
    n: usize,
    uf: UnionFind,
    adjacency: Vec<Vec<u32>>,
    edges: HashSet<(u32, u32)>,
    events: u64,
}

impl GraphState {
    pub fn new(n: usize) -> Self {
        GraphState {
            n,
            uf: UnionFind::new(n),
            adjacency: vec![Vec::new(); n],
            edges: HashSet::new(),
            events: 0,
        }
    }

    /// Builds a graph from an explicit edge list (counts one event per edge).
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = GraphState::new(n);
        for &(a, b) in edges {
            g.open_edge(a, b);
        }
        g
    }

    /// Records one edge-draw event. Returns `true` if the edge was not open
    /// before.
    pub fn open_edge(&mut self, a: usize, b: usize) -> bool {
        assert!(a != b && a < self.n && b < self.n, "invalid edge ({a}, {b})");
        self.events += 1;
        let key = (a.min(b) as u32, a.max(b) as u32);
        if !self.edges.insert(key) {
            return false;
        }
        self.adjacency[a].push(b as u32);
        self.adjacency[b].push(a as u32);
        self.uf.union(a, b);
        true
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edge-draw events, repeats included.
    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b) as u32, a.max(b) as u32))
    }

    /// Number of connected components `K`.
    pub fn components(&self) -> usize {
        self.uf.sets()
    }

    /// Size of the largest component.
    pub fn largest(&self) -> usize {
        self.uf.largest()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Neighbours in the order their edges were opened.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v].iter().map(|&w| w as usize)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(a, b)| (a as usize, b as usize))
    }

    pub fn component_root(&mut self, v: usize) -> usize {
        self.uf.find(v)
    }

    pub fn connected(&mut self, a: usize, b: usize) -> bool {
        self.uf.find(a) == self.uf.find(b)
    }

    /// Component size of `v`.
    pub fn component_size(&mut self, v: usize) -> usize {
        let r = self.uf.find(v);
        self.uf.root_size(r)
    }

    /// Sizes of all components, in no particular order.
    pub fn component_sizes(&self) -> Vec<usize> {
        (0..self.uf.len())
            .filter(|&v| self.uf.is_root(v))
            .map(|v| self.uf.root_size(v))
            .collect()
    }

    /// Summary at time `t`; counts empty patches of length `empty_patch_len`.
    pub fn stats(&self, t: f64, empty_patch_len: usize) -> GraphStats {
        let mut size_histogram = BTreeMap::new();
        let (mut lambda1, mut lambda2) = (0, 0);
        for s in self.component_sizes() {
            *size_histogram.entry(s).or_insert(0) += 1;
            if s > lambda1 {
                lambda2 = lambda1;
                lambda1 = s;
            } else if s > lambda2 {
                lambda2 = s;
            }
        }
        debug_assert_eq!(lambda1, self.largest());
        GraphStats {
            t,
            components: self.components(),
            lambda1,
            lambda2,
            size_histogram,
            empty_patches: count_empty_patches(self, empty_patch_len.clamp(1, self.n / 2))
                .unwrap_or(0),
            events: self.events,
            edges: self.edges.len(),
        }
    }
}

/// Snapshot of `G(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphStats {
    pub t: f64,
    /// `K`, the number of components.
    pub components: usize,
    /// Largest component size.
    pub lambda1: usize,
    /// Second-largest component size.
    pub lambda2: usize,
    /// Component size -> number of components of that size.
    pub size_histogram: BTreeMap<usize, usize>,
    pub empty_patches: usize,
    pub events: u64,
    pub edges: usize,
}

/// Rate-1 Poisson event times on `[0, end]`.
#[derive(Debug)]
pub(crate) struct PoissonClock {
    now: f64,
    end: f64,
}

impl PoissonClock {
    pub(crate) fn new(end: f64) -> Self {
        PoissonClock { now: 0.0, end }
    }

    pub(crate) fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<f64> {
        let gap: f64 = Exp1.sample(rng);
        self.now += gap;
        (self.now <= self.end).then_some(self.now)
    }
}

pub(crate) fn validate_times(t: f64, snapshot_times: &[f64]) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::validation(format!("time horizon must be finite and >= 0, got {t}")));
    }
    if snapshot_times.iter().any(|&s| !(s >= 0.0) || s > t) {
        return Err(Error::validation("snapshot times must lie in [0, t]"));
    }
    if snapshot_times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::validation("snapshot times must be sorted"));
    }
    Ok(())
}

/// Runs `G(t)` with an explicit generator; returns the final state and one
/// [`GraphStats`] per snapshot time (events at times `<= s` are included in
/// the snapshot at `s`).
pub fn run_graph<R: Rng + ?Sized>(
    dist: &DistanceDistribution,
    t: f64,
    snapshot_times: &[f64],
    empty_patch_len: usize,
    rng: &mut R,
) -> Result<(GraphState, Vec<GraphStats>)> {
    validate_times(t, snapshot_times)?;
    let mut g = GraphState::new(dist.n());
    let mut out = Vec::with_capacity(snapshot_times.len());
    let mut next_snap = 0;
    let mut clock = PoissonClock::new(t);
    while let Some(s) = clock.next(rng) {
        while next_snap < snapshot_times.len() && snapshot_times[next_snap] < s {
            out.push(g.stats(snapshot_times[next_snap], empty_patch_len));
            next_snap += 1;
        }
        let (a, b) = dist.sample_pair(rng);
        g.open_edge(a, b);
    }
    for &s in &snapshot_times[next_snap..] {
        out.push(g.stats(s, empty_patch_len));
    }
    Ok((g, out))
}

/// Seeded simulation of `G(t)`; empty patches are counted at the distribution's
/// largest distance.
pub fn simulate_graph(
    dist: &DistanceDistribution,
    t: f64,
    seed: u64,
    snapshot_times: &[f64],
) -> Result<Vec<GraphStats>> {
    let mut rng = rng_from_seed(seed);
    run_graph(dist, t, snapshot_times, dist.max_distance(), &mut rng).map(|(_, s)| s)
}

/// Number of start positions `v` such that every vertex of the cyclic
/// interval `[v, v + len - 1]` has degree zero.
pub fn count_empty_patches(state: &GraphState, len: usize) -> Result<usize> {
    let n = state.n();
    if len == 0 || len > n / 2 {
        return Err(Error::validation(format!(
            "patch length {len} must lie in [1, {}]",
            n / 2
        )));
    }
    let isolated = |v: usize| usize::from(state.degree(v % n) == 0);
    let mut in_window: usize = (0..len).map(isolated).sum();
    let mut count = 0;
    for v in 0..n {
        if in_window == len {
            count += 1;
        }
        in_window = in_window + isolated(v + len) - isolated(v);
    }
    Ok(count)
}

/// Settings of the truncated breadth-first exploration.
#[derive(Debug, Clone)]
pub struct ExploreParams {
    /// Range `L` of the distance law; sets `N_v = [v - L, v + L]`.
    pub range_l: usize,
    /// Vertices farther than `window_k * L` from the start are dropped.
    pub window_k: usize,
    /// At most this many neighbours are taken from each active vertex.
    pub degree_cap: usize,
    /// A vertex is dropped unless one of its last `lambda_generations`
    /// ancestors (itself included) lies in `N_v`.
    pub lambda_generations: usize,
    /// Probability of reserving one child per sibling class.
    pub reserve_prob: f64,
    /// Stop once this many vertices are explored.
    pub stop_size: usize,
    pub forbidden: HashSet<usize>,
}

impl ExploreParams {
    fn validate(&self) -> Result<()> {
        if self.range_l == 0
            || self.window_k == 0
            || self.degree_cap == 0
            || self.lambda_generations == 0
            || self.stop_size == 0
        {
            return Err(Error::validation("exploration parameters must be positive"));
        }
        if !(0.0..=1.0).contains(&self.reserve_prob) {
            return Err(Error::validation("reserve probability must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    /// The explored set reached the requested size.
    Size,
    /// No active vertices were left.
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExploreOutcome {
    /// Explored vertices in the order they were explored.
    pub explored: Vec<usize>,
    /// Active-set size at the start of each round.
    pub active_history: Vec<usize>,
    pub reserved: Vec<usize>,
    pub stop: StopReason,
}

#[derive(Clone, Copy)]
struct Active {
    vertex: usize,
    parent: Option<usize>,
    /// Generations since the last ancestor in `N_v`.
    since_near: usize,
}

/// Truncated breadth-first exploration of the component of `v`.
///
/// Each round: stop if enough vertices are explored; collect up to
/// `degree_cap` neighbours (parent excluded) of every active vertex, the first
/// claimant becoming the parent; mark the active set explored; drop explored,
/// reserved and forbidden vertices and stop if nothing is left; drop vertices
/// outside the window or too long away from `N_v`; finally, when
/// `reserve_prob > 0`, pick one uniform child per parent and reserve it with
/// that probability. The graph is not modified.
pub fn explore_component<R: Rng + ?Sized>(
    state: &GraphState,
    v: usize,
    params: &ExploreParams,
    rng: &mut R,
) -> Result<ExploreOutcome> {
    params.validate()?;
    let n = state.n();
    if v >= n {
        return Err(Error::validation(format!("start vertex {v} outside [0, {n})")));
    }
    if params.forbidden.contains(&v) {
        return Err(Error::validation("start vertex is forbidden"));
    }
    let window = params.window_k.saturating_mul(params.range_l);

    let mut explored_set: HashSet<usize> = HashSet::new();
    let mut explored = Vec::new();
    let mut reserved_set: HashSet<usize> = HashSet::new();
    let mut reserved = Vec::new();
    let mut active = vec![Active {
        vertex: v,
        parent: None,
        since_near: 0,
    }];
    let mut active_history = Vec::new();

    loop {
        if explored.len() >= params.stop_size {
            return Ok(ExploreOutcome {
                explored,
                active_history,
                reserved,
                stop: StopReason::Size,
            });
        }
        active_history.push(active.len());

        let mut next: Vec<Active> = Vec::new();
        let mut in_next: HashSet<usize> = HashSet::new();
        for a in &active {
            let children = state
                .neighbors(a.vertex)
                .filter(|&w| Some(w) != a.parent)
                .take(params.degree_cap);
            for w in children {
                if in_next.insert(w) {
                    let since_near = if cyclic_distance(v, w, n) <= params.range_l {
                        0
                    } else {
                        a.since_near + 1
                    };
                    next.push(Active {
                        vertex: w,
                        parent: Some(a.vertex),
                        since_near,
                    });
                }
            }
        }

        for a in &active {
            if explored_set.insert(a.vertex) {
                explored.push(a.vertex);
            }
        }

        next.retain(|a| {
            !explored_set.contains(&a.vertex)
                && !reserved_set.contains(&a.vertex)
                && !params.forbidden.contains(&a.vertex)
        });
        if next.is_empty() {
            return Ok(ExploreOutcome {
                explored,
                active_history,
                reserved,
                stop: StopReason::Exhausted,
            });
        }

        next.retain(|a| {
            cyclic_distance(v, a.vertex, n) <= window && a.since_near < params.lambda_generations
        });

        if params.reserve_prob > 0.0 && !next.is_empty() {
            let mut keep = vec![true; next.len()];
            let mut start = 0;
            // Children of one parent are contiguous in `next`.
            while start < next.len() {
                let parent = next[start].parent;
                let mut end = start + 1;
                while end < next.len() && next[end].parent == parent {
                    end += 1;
                }
                let pick = rng.random_range(start..end);
                if rng.random_bool(params.reserve_prob) {
                    keep[pick] = false;
                    reserved_set.insert(next[pick].vertex);
                    reserved.push(next[pick].vertex);
                }
                start = end;
            }
            let mut it = keep.into_iter();
            next.retain(|_| it.next().unwrap());
        }
        active = next;
    }
}

/// Labels vertices by component with a fresh breadth-first search over the
/// edge list. Independent of the union-find used by [`GraphState`].
pub fn bfs_component_labels(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for (a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        queue.push_back(s);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if label[y] == usize::MAX {
                    label[y] = next;
                    queue.push_back(y);
                }
            }
        }
        next += 1;
    }
    label
}
