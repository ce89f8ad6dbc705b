//! Branching random walks on the integer line.
//!
//! Every individual has Poisson(`c`) children, each displaced from its parent
//! by a step uniform on `{-L..-1, 1..L}`. In [`BrwMode::Plain`] siblings land
//! on distinct sites, as the neighbours of a vertex in the graph do; in
//! [`BrwMode::WithReplacement`] every displacement is an independent draw.
//!
//! Two prunings model the exploration of a component:
//!
//! * a kill window removes individuals outside `[start - KL, start + KL]`;
//! * erasure removes an individual landing on a site that an earlier
//!   individual already occupied (in any generation), or on a forbidden site,
//!   together with its whole descendance.
//!
//! Individuals are discovered generation by generation, within a generation in
//! parent order, and among siblings in draw order.

use std::collections::{BTreeSet, HashSet};

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::replicas::{rng_from_seed, run_replicas, SimRng};
use crate::stats::proportion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BrwMode {
    Plain,
    WithReplacement,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrwConfig {
    pub offspring_mean: f64,
    pub step_l: u32,
    pub mode: BrwMode,
    pub kill_window_k: Option<u32>,
    pub erased: bool,
    pub forbidden: BTreeSet<i64>,
    pub max_generations: usize,
    /// Total number of individuals (all generations) after which the walk is
    /// declared surviving.
    pub population_cap: usize,
}

impl BrwConfig {
    pub fn new(offspring_mean: f64, step_l: u32) -> Self {
        BrwConfig {
            offspring_mean,
            step_l,
            mode: BrwMode::Plain,
            kill_window_k: None,
            erased: false,
            forbidden: BTreeSet::new(),
            max_generations: 200,
            population_cap: 1_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.offspring_mean > 0.0 && self.offspring_mean.is_finite()) {
            return Err(Error::validation("offspring mean must be positive"));
        }
        if self.step_l == 0 {
            return Err(Error::validation("step range L must be at least 1"));
        }
        if self.kill_window_k == Some(0) {
            return Err(Error::validation("kill window K must be at least 1"));
        }
        if self.max_generations == 0 || self.population_cap == 0 {
            return Err(Error::validation(
                "max_generations and population_cap must be positive",
            ));
        }
        Ok(())
    }

    /// Message when an erased walk has more forbidden sites than `L / ln L`,
    /// outside the regime where erasure is a small perturbation.
    pub fn regime_warning(&self) -> Option<String> {
        if !self.erased || self.forbidden.is_empty() {
            return None;
        }
        let l = self.step_l as f64;
        let limit = if l > 1.0 { l / l.ln() } else { 0.0 };
        (self.forbidden.len() as f64 > limit).then(|| {
            format!(
                "{} forbidden sites exceed L/ln L = {limit:.1}",
                self.forbidden.len()
            )
        })
    }

    fn window(&self, start: i64) -> Option<(i64, i64)> {
        self.kill_window_k.map(|k| {
            let half = k as i64 * self.step_l as i64;
            (start - half, start + half)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrwOutcome {
    pub survived: bool,
    pub extinct_at: Option<usize>,
    pub generation_sizes: Vec<usize>,
    pub final_positions: Vec<i64>,
    /// First generation containing an individual born on a previously
    /// occupied site.
    pub first_self_intersection: Option<usize>,
    pub hit_cap: bool,
}

impl BrwOutcome {
    pub fn max_generation_size(&self) -> usize {
        self.generation_sizes.iter().copied().max().unwrap_or(0)
    }
}

/// One step, uniform on `{-L..-1, 1..L}`.
pub fn sample_step<R: Rng + ?Sized>(l: u32, rng: &mut R) -> i64 {
    let x = rng.random_range(0..2 * l as i64);
    if x < l as i64 {
        x - l as i64
    } else {
        x - l as i64 + 1
    }
}

fn step_from_index(l: u32, x: usize) -> i64 {
    let x = x as i64;
    if x < l as i64 {
        x - l as i64
    } else {
        x - l as i64 + 1
    }
}

struct Sampler {
    poisson: Poisson<f64>,
    l: u32,
    mode: BrwMode,
}

impl Sampler {
    fn new(config: &BrwConfig) -> Result<Self> {
        let poisson = Poisson::new(config.offspring_mean)
            .map_err(|e| Error::validation(format!("offspring law: {e}")))?;
        Ok(Sampler {
            poisson,
            l: config.step_l,
            mode: config.mode,
        })
    }

    /// Displacements of one individual's children, in draw order. Plain mode
    /// caps the litter at the `2L` available sites.
    fn children(&self, rng: &mut SimRng, out: &mut Vec<i64>) {
        out.clear();
        let k = self.poisson.sample(rng) as usize;
        match self.mode {
            BrwMode::WithReplacement => out.extend((0..k).map(|_| sample_step(self.l, rng))),
            BrwMode::Plain => {
                let sites = 2 * self.l as usize;
                let k = k.min(sites);
                out.extend(
                    sample(rng, sites, k)
                        .into_iter()
                        .map(|x| step_from_index(self.l, x)),
                );
            }
        }
    }
}

/// Simulates one walk started from a single individual at `start`.
pub fn simulate_brw(config: &BrwConfig, start: i64, seed: u64) -> Result<BrwOutcome> {
    config.validate()?;
    let sampler = Sampler::new(config)?;
    let mut rng = rng_from_seed(seed);
    let window = config.window(start);
    let mut occupied: HashSet<i64> = HashSet::new();
    occupied.insert(start);
    let mut track_sites = true;
    let mut current = vec![start];
    let mut sizes = vec![1usize];
    let mut total = 1usize;
    let mut tau = None;
    let mut litter = Vec::new();
    let mut next = Vec::new();

    for g in 1..=config.max_generations {
        next.clear();
        for &parent in &current {
            sampler.children(&mut rng, &mut litter);
            for &d in &litter {
                let x = parent + d;
                if let Some((lo, hi)) = window {
                    if x < lo || x > hi {
                        continue;
                    }
                }
                if config.erased && config.forbidden.contains(&x) {
                    continue;
                }
                if track_sites && !occupied.insert(x) {
                    tau.get_or_insert(g);
                    if config.erased {
                        continue;
                    }
                    track_sites = false;
                }
                next.push(x);
            }
        }
        std::mem::swap(&mut current, &mut next);
        sizes.push(current.len());
        total += current.len();
        if current.is_empty() {
            return Ok(BrwOutcome {
                survived: false,
                extinct_at: Some(g),
                generation_sizes: sizes,
                final_positions: current,
                first_self_intersection: tau,
                hit_cap: false,
            });
        }
        if total >= config.population_cap {
            return Ok(BrwOutcome {
                survived: true,
                extinct_at: None,
                generation_sizes: sizes,
                final_positions: current,
                first_self_intersection: tau,
                hit_cap: true,
            });
        }
    }
    Ok(BrwOutcome {
        survived: true,
        extinct_at: None,
        generation_sizes: sizes,
        final_positions: current,
        first_self_intersection: tau,
        hit_cap: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub replicas: usize,
}

/// Binomial estimate of the survival probability from `replicas` independent
/// walks started at 0.
pub fn estimate_survival(config: &BrwConfig, replicas: usize, seed: u64) -> Result<SurvivalEstimate> {
    let outcomes = simulate_replicas(config, replicas, seed)?;
    Ok(summarize(&outcomes))
}

pub fn simulate_replicas(config: &BrwConfig, replicas: usize, seed: u64) -> Result<Vec<BrwOutcome>> {
    if replicas < 100 {
        return Err(Error::validation(format!(
            "survival estimation needs at least 100 replicas, got {replicas}"
        )));
    }
    config.validate()?;
    run_replicas(seed, replicas, |_, s| simulate_brw(config, 0, s))
        .into_iter()
        .collect()
}

pub fn summarize(outcomes: &[BrwOutcome]) -> SurvivalEstimate {
    let alive = outcomes.iter().filter(|o| o.survived).count();
    let (p_hat, stderr) = proportion(alive, outcomes.len());
    SurvivalEstimate {
        p_hat,
        stderr,
        replicas: outcomes.len(),
    }
}

/// The full walk of a config with erasure switched off, each individual
/// tagged with whether it survives erasure. Both walks use the same draws, so
/// the erased population is a subset of the full one generation by
/// generation.
#[derive(Debug, Clone, PartialEq)]
pub struct ErasureCoupling {
    /// `(position, parent index in the previous generation, kept)`.
    pub generations: Vec<Vec<(i64, usize, bool)>>,
}

impl ErasureCoupling {
    pub fn full_sizes(&self) -> Vec<usize> {
        self.generations.iter().map(Vec::len).collect()
    }

    pub fn erased_sizes(&self) -> Vec<usize> {
        self.generations
            .iter()
            .map(|g| g.iter().filter(|x| x.2).count())
            .collect()
    }

    /// Alive at the last simulated generation, which is either the maximum
    /// generation or the one where the cap was reached.
    pub fn full_survived(&self) -> bool {
        self.generations.last().is_some_and(|g| !g.is_empty())
    }

    pub fn erased_survived(&self) -> bool {
        self.generations.last().is_some_and(|g| g.iter().any(|x| x.2))
    }
}

/// Simulates the coupled pair for `config.max_generations` generations, or
/// until the full walk dies out or its total size reaches the cap.
pub fn couple_erasure(config: &BrwConfig, start: i64, seed: u64) -> Result<ErasureCoupling> {
    config.validate()?;
    let sampler = Sampler::new(config)?;
    let mut rng = rng_from_seed(seed);
    let window = config.window(start);
    let mut occupied: HashSet<i64> = HashSet::new();
    occupied.insert(start);
    let start_kept = !config.forbidden.contains(&start) || !config.erased;
    let mut generations = vec![vec![(start, 0usize, start_kept)]];
    let mut total = 1;
    let mut litter = Vec::new();
    for _ in 1..=config.max_generations {
        let prev = generations.last().unwrap();
        let mut next = Vec::new();
        for (pi, &(parent, _, parent_kept)) in prev.iter().enumerate() {
            sampler.children(&mut rng, &mut litter);
            for &d in &litter {
                let x = parent + d;
                if let Some((lo, hi)) = window {
                    if x < lo || x > hi {
                        continue;
                    }
                }
                let mut kept = parent_kept;
                if kept && config.erased {
                    kept = !config.forbidden.contains(&x) && occupied.insert(x);
                }
                next.push((x, pi, kept));
            }
        }
        total += next.len();
        let done = next.is_empty() || total >= config.population_cap;
        generations.push(next);
        if done {
            break;
        }
    }
    Ok(ErasureCoupling { generations })
}
