//! Edge/jump length laws on the n-cycle.

use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// How to build a [`DistanceDistribution`].
#[derive(Debug, Clone, PartialEq)]
pub enum DistanceSpec {
    /// `p_l = 1/L` for `l = 1..=L`.
    Uniform(usize),
    /// Unnormalised `(l, weight)` pairs; unlisted lengths get weight zero.
    Explicit(Vec<(usize, f64)>),
}

/// Law of the cyclic distance between the endpoints of an edge (or of a
/// transposition), supported on `1..=floor(n/2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceDistribution {
    n: usize,
    /// `weights[l - 1] = p_l`, up to the largest length with positive weight.
    weights: Vec<f64>,
    epsilon: f64,
    #[serde(skip)]
    cumulative: Vec<f64>,
    #[serde(skip)]
    uniform: bool,
}

impl DistanceDistribution {
    pub fn new(spec: &DistanceSpec, n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::validation(format!("cycle size must be at least 4, got {n}")));
        }
        let half = n / 2;
        match spec {
            DistanceSpec::Uniform(l) => {
                let l = *l;
                if l == 0 || l > half {
                    return Err(Error::validation(format!(
                        "uniform range L = {l} must lie in [1, {half}] for n = {n}"
                    )));
                }
                let p = 1.0 / l as f64;
                let weights = vec![p; l];
                let cumulative = (1..=l).map(|i| i as f64 / l as f64).collect();
                Ok(DistanceDistribution {
                    n,
                    weights,
                    epsilon: p,
                    cumulative,
                    uniform: true,
                })
            }
            DistanceSpec::Explicit(pairs) => {
                let mut support = 0;
                for &(l, w) in pairs {
                    if l == 0 || l > half {
                        return Err(Error::validation(format!(
                            "distance {l} outside [1, {half}] for n = {n}"
                        )));
                    }
                    if !(w >= 0.0) || !w.is_finite() {
                        return Err(Error::validation(format!(
                            "weight for distance {l} must be a nonnegative number, got {w}"
                        )));
                    }
                    if w > 0.0 {
                        support = support.max(l);
                    }
                }
                if support == 0 {
                    return Err(Error::validation("distance weights are empty or all zero"));
                }
                let mut weights = vec![0.0; support];
                for &(l, w) in pairs {
                    if l <= support {
                        weights[l - 1] += w;
                    }
                }
                let total: f64 = weights.iter().sum();
                weights.iter_mut().for_each(|w| *w /= total);
                let mut acc = 0.0;
                let mut cumulative: Vec<f64> = weights
                    .iter()
                    .map(|w| {
                        acc += w;
                        acc
                    })
                    .collect();
                *cumulative.last_mut().unwrap() = 1.0;
                let epsilon = weights.iter().cloned().fold(0.0, f64::max);
                Ok(DistanceDistribution {
                    n,
                    weights,
                    epsilon,
                    cumulative,
                    uniform: false,
                })
            }
        }
    }

    pub fn uniform(l: usize, n: usize) -> Result<Self> {
        Self::new(&DistanceSpec::Uniform(l), n)
    }

    /// Reads a weight table: one `l weight` pair per line, `#` starts a comment.
    pub fn parse_weight_table(text: &str, n: usize) -> Result<Self> {
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse_err = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            let l: usize = it
                .next()
                .unwrap()
                .parse()
                .map_err(|_| parse_err(format!("expected a distance, got {line:?}")))?;
            let w: f64 = it
                .next()
                .ok_or_else(|| parse_err("missing weight".into()))?
                .parse()
                .map_err(|_| parse_err(format!("expected a weight, got {line:?}")))?;
            if it.next().is_some() {
                return Err(parse_err("expected exactly two columns".into()));
            }
            pairs.push((l, w));
        }
        Self::new(&DistanceSpec::Explicit(pairs), n)
    }

    pub fn from_weight_file(path: &Path, n: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::validation(format!("cannot read weight file {}: {e}", path.display()))
        })?;
        Self::parse_weight_table(&text, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `max_l p_l`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Largest distance with positive weight.
    pub fn max_distance(&self) -> usize {
        self.weights.len()
    }

    /// `p_l`; zero outside the support.
    pub fn weight(&self, l: usize) -> f64 {
        if l == 0 {
            0.0
        } else {
            self.weights.get(l - 1).copied().unwrap_or(0.0)
        }
    }

    /// Iterates over `(l, p_l)` with `p_l > 0`.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, w)| (i + 1, *w))
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn sample_distance<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.uniform {
            return rng.random_range(1..=self.weights.len());
        }
        let u: f64 = rng.random();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.weights.len() - 1) + 1
    }

    /// Samples an unordered pair of distinct vertices: a uniform position, a
    /// distance from the law and a uniform side. Each unordered pair at
    /// distance `l < n/2` has probability `p_l / n`; antipodal pairs
    /// (`l = n/2`, even `n`) have `2 p_l / n`, one per pair.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let n = self.n;
        let i = rng.random_range(0..n);
        let l = self.sample_distance(rng);
        let j = if 2 * l == n || rng.random::<bool>() {
            (i + l) % n
        } else {
            (i + n - l) % n
        };
        (i, j)
    }
}

impl fmt::Display for DistanceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.uniform {
            write!(f, "uniform(1..={}) on C_{}", self.weights.len(), self.n)
        } else {
            write!(
                f,
                "table with support 1..={} on C_{} (eps = {:.4})",
                self.weights.len(),
                self.n,
                self.epsilon
            )
        }
    }
}

/// Cyclic distance `min(|i - j|, n - |i - j|)`.
pub fn cyclic_distance(i: usize, j: usize, n: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(n - d)
}
