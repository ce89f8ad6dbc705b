//! Random transpositions of positions on the n-cycle.
//!
//! `PermutationState` keeps the position -> particle map, its inverse and the
//! live cycle count. A transposition whose endpoints lie in one cycle splits
//! it (fragmentation); otherwise it merges two cycles (coagulation). Hence the
//! distance `delta = n - |sigma|` always equals `N - 2F`, with `N` the number
//! of transpositions applied and `F` the number of fragmentations.

use rand::Rng;
use serde::Serialize;

use crate::distribution::DistanceDistribution;
use crate::error::{Error, Result};
use crate::graph::{validate_times, GraphState, PoissonClock};
use crate::replicas::{rng_from_seed, splitmix64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Move {
    Coagulation,
    Fragmentation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationState {
    perm: Vec<u32>,
    inv: Vec<u32>,
    cycles: usize,
    events: u64,
    fragmentations: u64,
    /// `delta` when the counters were last zero.
    initial_delta: usize,
}

impl PermutationState {
    pub fn identity(n: usize) -> Self {
        let id: Vec<u32> = (0..n as u32).collect();
        PermutationState {
            perm: id.clone(),
            inv: id,
            cycles: n,
            events: 0,
            fragmentations: 0,
            initial_delta: 0,
        }
    }

    /// Wraps an explicit position -> particle map; counters start at zero, so
    /// `delta = delta_0 + N - 2F` with `delta_0` the distance of `perm`.
    pub fn from_perm(perm: Vec<u32>) -> Result<Self> {
        let n = perm.len();
        let mut inv = vec![u32::MAX; n];
        for (pos, &p) in perm.iter().enumerate() {
            if p as usize >= n || inv[p as usize] != u32::MAX {
                return Err(Error::validation("not a permutation of 0..n"));
            }
            inv[p as usize] = pos as u32;
        }
        let cycles = count_cycles(&perm);
        Ok(PermutationState {
            initial_delta: n - cycles,
            perm,
            inv,
            cycles,
            events: 0,
            fragmentations: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    /// Position -> particle.
    pub fn perm(&self) -> &[u32] {
        &self.perm
    }

    /// Particle -> position.
    pub fn inverse(&self) -> &[u32] {
        &self.inv
    }

    pub fn cycles(&self) -> usize {
        self.cycles
    }

    /// `N`, transpositions applied so far.
    pub fn events(&self) -> u64 {
        self.events
    }

    /// `F`, fragmentations so far.
    pub fn fragmentations(&self) -> u64 {
        self.fragmentations
    }

    /// `delta = n - |sigma|`.
    pub fn delta(&self) -> usize {
        self.n() - self.cycles
    }

    /// Whether positions `i` and `j` lie in one cycle. Walks the two cycles
    /// in lockstep, so the cost is at most twice the shorter cycle.
    pub fn same_cycle(&self, i: usize, j: usize) -> bool {
        if i == j {
            return true;
        }
        let (i32_, j32) = (i as u32, j as u32);
        let (mut a, mut b) = (self.perm[i], self.perm[j]);
        loop {
            if a == j32 || b == i32_ {
                return true;
            }
            if a == i32_ || b == j32 {
                return false;
            }
            a = self.perm[a as usize];
            b = self.perm[b as usize];
        }
    }

    /// Swaps the particles at positions `i` and `j`.
    pub fn apply_transposition(&mut self, i: usize, j: usize) -> Result<Move> {
        let n = self.n();
        if i == j || i >= n || j >= n {
            return Err(Error::validation(format!(
                "transposition ({i}, {j}) needs two distinct positions in [0, {n})"
            )));
        }
        let mv = if self.same_cycle(i, j) {
            self.cycles += 1;
            self.fragmentations += 1;
            Move::Fragmentation
        } else {
            self.cycles -= 1;
            Move::Coagulation
        };
        self.perm.swap(i, j);
        self.inv[self.perm[i] as usize] = i as u32;
        self.inv[self.perm[j] as usize] = j as u32;
        self.events += 1;
        debug_assert_eq!(self.delta() as i64, self.bookkept_delta());
        Ok(mv)
    }

    /// Cycle label of every position (labels are `0..cycles` in order of
    /// first appearance).
    pub fn cycle_labels(&self) -> Vec<u32> {
        let n = self.n();
        let mut label = vec![u32::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if label[s] != u32::MAX {
                continue;
            }
            let mut x = s;
            while label[x] == u32::MAX {
                label[x] = next;
                x = self.perm[x] as usize;
            }
            next += 1;
        }
        label
    }

    /// `delta_0 + N - 2F`.
    fn bookkept_delta(&self) -> i64 {
        self.initial_delta as i64 + self.events as i64 - 2 * self.fragmentations as i64
    }

    /// Recounts cycles and checks `perm`/`inv` against each other.
    pub fn verify(&self) -> Result<()> {
        for (pos, &p) in self.perm.iter().enumerate() {
            if self.inv[p as usize] as usize != pos {
                return Err(Error::Invariant(format!("inverse mismatch at position {pos}")));
            }
        }
        let recount = count_cycles(&self.perm);
        if recount != self.cycles {
            return Err(Error::Invariant(format!(
                "tracked {} cycles, recount gives {recount}",
                self.cycles
            )));
        }
        if self.delta() as i64 != self.bookkept_delta() {
            return Err(Error::Invariant("delta != N - 2F".into()));
        }
        Ok(())
    }
}

fn count_cycles(perm: &[u32]) -> usize {
    let mut seen = vec![false; perm.len()];
    let mut cycles = 0;
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        cycles += 1;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = perm[x] as usize;
        }
    }
    cycles
}

/// How the fragmentation rate is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RateMode {
    Exact,
    MonteCarlo { samples: usize },
    /// Exact when `n * |support| <= 5e7`, else Monte Carlo with `1e5` samples.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    pub value: f64,
    /// Zero for the exact computation.
    pub stderr: f64,
    pub mode: RateMode,
}

const EXACT_RATE_BUDGET: usize = 50_000_000;
const AUTO_RATE_SAMPLES: usize = 100_000;

/// Probability `g` that the next transposition fragments a cycle: the
/// average over a uniform position, a distance from `dist` and a uniform side
/// of the indicator that both endpoints share a cycle.
pub fn fragmentation_rate<R: Rng + ?Sized>(
    state: &PermutationState,
    dist: &DistanceDistribution,
    mode: RateMode,
    rng: &mut R,
) -> Result<RateEstimate> {
    let n = state.n();
    if dist.n() != n {
        return Err(Error::validation("distribution and permutation sizes differ"));
    }
    let support = dist.support().count();
    let mode = match mode {
        RateMode::Auto if n.saturating_mul(support) <= EXACT_RATE_BUDGET => RateMode::Exact,
        RateMode::Auto => RateMode::MonteCarlo {
            samples: AUTO_RATE_SAMPLES,
        },
        m => m,
    };
    let labels = state.cycle_labels();
    match mode {
        RateMode::Exact => {
            let mut total = 0.0;
            for (l, p) in dist.support() {
                let mut hits = 0usize;
                for i in 0..n {
                    let fwd = labels[i] == labels[(i + l) % n];
                    let bwd = labels[i] == labels[(i + n - l) % n];
                    hits += usize::from(fwd) + usize::from(bwd);
                }
                total += p * hits as f64 / (2 * n) as f64;
            }
            Ok(RateEstimate {
                value: total,
                stderr: 0.0,
                mode,
            })
        }
        RateMode::MonteCarlo { samples } => {
            if samples == 0 {
                return Err(Error::validation("Monte Carlo rate needs at least one sample"));
            }
            let hits = (0..samples)
                .filter(|_| {
                    let (i, j) = dist.sample_pair(rng);
                    labels[i] == labels[j]
                })
                .count();
            let p = hits as f64 / samples as f64;
            Ok(RateEstimate {
                value: p,
                stderr: (p * (1.0 - p) / samples as f64).sqrt(),
                mode,
            })
        }
        RateMode::Auto => unreachable!(),
    }
}

/// One row of a transposition trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranspositionSnapshot {
    pub time: f64,
    pub events: u64,
    pub fragmentations: u64,
    pub delta: usize,
    pub g_hat: Option<f64>,
}

/// Runs the walk, calling `on_event` after every transposition.
///
/// `rate` controls `g_hat` at snapshots (`None` skips it). Monte Carlo rate
/// estimates draw from a side stream so the trajectory itself does not depend
/// on `rate`.
pub fn run_transpositions_with<F>(
    dist: &DistanceDistribution,
    t: f64,
    seed: u64,
    snapshot_times: &[f64],
    rate: Option<RateMode>,
    mut on_event: F,
) -> Result<(PermutationState, Vec<TranspositionSnapshot>)>
where
    F: FnMut(&PermutationState, Move) -> Result<()>,
{
    validate_times(t, snapshot_times)?;
    let mut rng = rng_from_seed(seed);
    let mut side_rng = rng_from_seed(splitmix64(seed ^ 0x005E_ED0F_6A7E));
    let mut state = PermutationState::identity(dist.n());
    let mut out = Vec::with_capacity(snapshot_times.len());
    let mut snap = |state: &PermutationState, time: f64| -> Result<TranspositionSnapshot> {
        let g_hat = match rate {
            Some(mode) => Some(fragmentation_rate(state, dist, mode, &mut side_rng)?.value),
            None => None,
        };
        Ok(TranspositionSnapshot {
            time,
            events: state.events(),
            fragmentations: state.fragmentations(),
            delta: state.delta(),
            g_hat,
        })
    };
    let mut next_snap = 0;
    let mut clock = PoissonClock::new(t);
    while let Some(s) = clock.next(&mut rng) {
        while next_snap < snapshot_times.len() && snapshot_times[next_snap] < s {
            out.push(snap(&state, snapshot_times[next_snap])?);
            next_snap += 1;
        }
        let (i, j) = dist.sample_pair(&mut rng);
        let mv = state.apply_transposition(i, j)?;
        on_event(&state, mv)?;
    }
    for &s in &snapshot_times[next_snap..] {
        out.push(snap(&state, s)?);
    }
    Ok((state, out))
}

/// Seeded transposition trajectory with `g_hat` at every snapshot.
pub fn run_transpositions(
    dist: &DistanceDistribution,
    t: f64,
    seed: u64,
    snapshot_times: &[f64],
) -> Result<Vec<TranspositionSnapshot>> {
    run_transpositions_with(dist, t, seed, snapshot_times, Some(RateMode::Auto), |_, _| Ok(()))
        .map(|(_, s)| s)
}

/// A failed refinement check in a coupled run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingViolation {
    /// Events applied when the check ran.
    pub event: u64,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct CoupledRun {
    pub sigma: PermutationState,
    pub graph: GraphState,
    pub checks: usize,
    pub violations: Vec<CouplingViolation>,
    /// `(events, |sigma|, K)` at every check.
    pub checkpoints: Vec<(u64, usize, usize)>,
}

/// Checks that every cycle of `sigma` sits inside one component of `graph`
/// and that `K <= |sigma|`.
pub fn check_refinement(sigma: &PermutationState, graph: &mut GraphState) -> Option<String> {
    let labels = sigma.cycle_labels();
    let mut root_of_cycle = vec![usize::MAX; sigma.cycles()];
    for (pos, &lab) in labels.iter().enumerate() {
        let root = graph.component_root(pos);
        let slot = &mut root_of_cycle[lab as usize];
        if *slot == usize::MAX {
            *slot = root;
        } else if *slot != root {
            return Some(format!("cycle {lab} spans two components (position {pos})"));
        }
    }
    if graph.components() > sigma.cycles() {
        return Some(format!(
            "K = {} exceeds cycle count {}",
            graph.components(),
            sigma.cycles()
        ));
    }
    None
}

/// Drives the transposition walk and `G(t)` from one event stream: every
/// sampled pair is both transposed and opened as an edge.
pub fn run_coupled(
    dist: &DistanceDistribution,
    t: f64,
    seed: u64,
    check_every: u64,
) -> Result<CoupledRun> {
    if check_every == 0 {
        return Err(Error::validation("check_every must be at least 1"));
    }
    validate_times(t, &[])?;
    let n = dist.n();
    let mut rng = rng_from_seed(seed);
    let mut sigma = PermutationState::identity(n);
    let mut graph = GraphState::new(n);
    let mut run_checks = Vec::new();
    let mut violations = Vec::new();
    let mut check = |sigma: &PermutationState, graph: &mut GraphState| {
        if let Some(detail) = check_refinement(sigma, graph) {
            violations.push(CouplingViolation {
                event: sigma.events(),
                detail,
            });
        }
        run_checks.push((sigma.events(), sigma.cycles(), graph.components()));
    };
    check(&sigma, &mut graph);
    let mut clock = PoissonClock::new(t);
    while clock.next(&mut rng).is_some() {
        let (i, j) = dist.sample_pair(&mut rng);
        sigma.apply_transposition(i, j)?;
        graph.open_edge(i, j);
        if sigma.events().is_multiple_of(check_every) {
            check(&sigma, &mut graph);
        }
    }
    if !sigma.events().is_multiple_of(check_every) {
        check(&sigma, &mut graph);
    }
    Ok(CoupledRun {
        checks: run_checks.len(),
        sigma,
        graph,
        violations,
        checkpoints: run_checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingaleReport {
    /// Compensator `A` at each snapshot.
    pub compensator: Vec<f64>,
    /// `M = F - A` at each snapshot.
    pub martingale: Vec<f64>,
    /// `max |M| / n` over the trajectory.
    pub max_abs_over_n: f64,
}

/// Builds `M_t = F_t - A_t`, with `A_t` the left-point quadrature of
/// `g_hat` over the snapshot grid. The trajectory must start at time zero
/// and carry `g_hat` at every snapshot.
pub fn martingale_check(trajectory: &[TranspositionSnapshot], n: usize) -> Result<MartingaleReport> {
    let first = trajectory
        .first()
        .ok_or_else(|| Error::validation("empty trajectory"))?;
    if first.time != 0.0 {
        return Err(Error::validation("trajectory must start at time 0"));
    }
    let mut a = 0.0;
    let mut compensator = Vec::with_capacity(trajectory.len());
    let mut martingale = Vec::with_capacity(trajectory.len());
    let mut max_abs = 0.0f64;
    for (k, snap) in trajectory.iter().enumerate() {
        if k > 0 {
            let prev = &trajectory[k - 1];
            let g = prev
                .g_hat
                .ok_or_else(|| Error::validation(format!("missing g_hat at snapshot {}", k - 1)))?;
            a += g * (snap.time - prev.time);
        }
        let m = snap.fragmentations as f64 - a;
        max_abs = max_abs.max(m.abs());
        compensator.push(a);
        martingale.push(m);
    }
    Ok(MartingaleReport {
        compensator,
        martingale,
        max_abs_over_n: max_abs / n as f64,
    })
}
