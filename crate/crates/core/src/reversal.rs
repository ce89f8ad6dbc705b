//! Random `L`-reversals of a signed gene order.
//!
//! An `L`-reversal picks a segment length uniformly in `1..=L` and a start
//! uniformly among the `n - length + 1` positions where the segment fits
//! (segments do not wrap), then reverses the segment and flips every sign in
//! it. Length-one reversals are pure sign flips.

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::breakpoint::delta_hat;
use crate::error::{Error, Result};
use crate::graph::{validate_times, PoissonClock};
use crate::replicas::{rng_from_seed, run_replicas};
use crate::stats::mean_stderr;
use crate::theory::{u_of_c, SeriesParams};

/// Gene order with orientations: `|entries|` is a permutation of `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SignedPermutation {
    entries: Vec<i32>,
}

impl SignedPermutation {
    pub fn new(entries: Vec<i32>) -> Result<Self> {
        let n = entries.len();
        let mut seen = vec![false; n + 1];
        for &x in &entries {
            let a = x.unsigned_abs() as usize;
            if x == 0 || a > n {
                return Err(Error::validation(format!("entry {x} outside +-[1, {n}]")));
            }
            if std::mem::replace(&mut seen[a], true) {
                return Err(Error::validation(format!("label {a} appears twice")));
            }
        }
        Ok(SignedPermutation { entries })
    }

    pub fn identity(n: usize) -> Self {
        SignedPermutation {
            entries: (1..=n as i32).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[i32] {
        &self.entries
    }

    pub fn is_identity(&self) -> bool {
        self.entries.iter().enumerate().all(|(i, &x)| x == i as i32 + 1)
    }

    /// Reverses `entries[start..start + length]` and flips its signs.
    pub fn reverse_segment(&mut self, start: usize, length: usize) -> Result<()> {
        let n = self.n();
        if length == 0 || start + length > n {
            return Err(Error::validation(format!(
                "segment [{start}, {start}+{length}) does not fit in n = {n}"
            )));
        }
        let seg = &mut self.entries[start..start + length];
        seg.reverse();
        seg.iter_mut().for_each(|x| *x = -*x);
        Ok(())
    }

    /// Copy with one reversal applied.
    pub fn reversed(&self, start: usize, length: usize) -> Result<Self> {
        let mut out = self.clone();
        out.reverse_segment(start, length)?;
        Ok(out)
    }

    /// Composes with the inverse of `target`, so that the breakpoint distance
    /// of the result to the identity equals the distance of `self` to
    /// `target`.
    pub fn relabel_against(&self, target: &SignedPermutation) -> Result<Self> {
        let n = self.n();
        if target.n() != n {
            return Err(Error::validation("permutations of different sizes"));
        }
        // slot[g] = signed 1-based position of gene g in the target.
        let mut slot = vec![0i32; n + 1];
        for (pos, &x) in target.entries.iter().enumerate() {
            slot[x.unsigned_abs() as usize] = x.signum() * (pos as i32 + 1);
        }
        let entries = self
            .entries
            .iter()
            .map(|&x| x.signum() * slot[x.unsigned_abs() as usize])
            .collect();
        Ok(SignedPermutation { entries })
    }
}

impl fmt::Display for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|x| format!("{x:+}")).collect();
        write!(f, "({})", parts.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReversalEvent {
    pub start: usize,
    pub length: usize,
}

impl ReversalEvent {
    /// Length uniform in `1..=max_len`, start uniform where the segment fits.
    pub fn sample<R: Rng + ?Sized>(n: usize, max_len: usize, rng: &mut R) -> Self {
        let length = rng.random_range(1..=max_len);
        let start = rng.random_range(0..=n - length);
        ReversalEvent { start, length }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReversalSnapshot {
    pub time: f64,
    pub events: u64,
    pub delta_hat: usize,
}

fn validate_reversal_args(n: usize, max_len: usize) -> Result<()> {
    if n == 0 || max_len == 0 || max_len > n {
        return Err(Error::validation(format!(
            "need 1 <= L <= n, got n = {n}, L = {max_len}"
        )));
    }
    Ok(())
}

/// Runs Poisson(t) random `L`-reversals from the identity, calling
/// `on_event` after each one.
pub fn run_reversals_with<F>(
    n: usize,
    max_len: usize,
    t: f64,
    seed: u64,
    snapshot_times: &[f64],
    mut on_event: F,
) -> Result<(SignedPermutation, Vec<ReversalSnapshot>)>
where
    F: FnMut(&SignedPermutation, ReversalEvent),
{
    validate_reversal_args(n, max_len)?;
    validate_times(t, snapshot_times)?;
    let mut rng = rng_from_seed(seed);
    let mut sp = SignedPermutation::identity(n);
    let mut events = 0u64;
    let mut out = Vec::with_capacity(snapshot_times.len());
    let mut next_snap = 0;
    let mut clock = PoissonClock::new(t);
    while let Some(s) = clock.next(&mut rng) {
        while next_snap < snapshot_times.len() && snapshot_times[next_snap] < s {
            out.push(ReversalSnapshot {
                time: snapshot_times[next_snap],
                events,
                delta_hat: delta_hat(&sp),
            });
            next_snap += 1;
        }
        let ev = ReversalEvent::sample(n, max_len, &mut rng);
        sp.reverse_segment(ev.start, ev.length)?;
        events += 1;
        on_event(&sp, ev);
    }
    for &s in &snapshot_times[next_snap..] {
        out.push(ReversalSnapshot {
            time: s,
            events,
            delta_hat: delta_hat(&sp),
        });
    }
    Ok((sp, out))
}

pub fn run_reversals(
    n: usize,
    max_len: usize,
    t: f64,
    seed: u64,
    snapshot_times: &[f64],
) -> Result<Vec<ReversalSnapshot>> {
    run_reversals_with(n, max_len, t, seed, snapshot_times, |_, _| {}).map(|(_, s)| s)
}

/// One point of a normalised-distance curve against `u(c)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub c: f64,
    pub mean: f64,
    pub stderr: f64,
    pub u_of_c: f64,
}

/// Mean `delta_hat(cn/2) / n` over replicas at each `c` of an increasing
/// grid. Each replica is one trajectory observed at every grid time.
pub fn reversal_curve(
    n: usize,
    max_len: usize,
    c_grid: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    validate_reversal_args(n, max_len)?;
    if replicas == 0 {
        return Err(Error::validation("need at least one replica"));
    }
    let times: Vec<f64> = c_grid.iter().map(|c| c * n as f64 / 2.0).collect();
    let t_end = times.last().copied().unwrap_or(0.0);
    validate_times(t_end, &times)?;
    let runs = run_replicas(seed, replicas, |_, s| run_reversals(n, max_len, t_end, s, &times));
    let runs: Vec<Vec<ReversalSnapshot>> = runs.into_iter().collect::<Result<_>>()?;
    c_grid
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let xs: Vec<f64> = runs
                .iter()
                .map(|r| r[k].delta_hat as f64 / n as f64)
                .collect();
            let (mean, stderr) = mean_stderr(&xs);
            let u = if c > 0.0 {
                u_of_c(c, SeriesParams::default())?.value
            } else {
                0.0
            };
            Ok(CurvePoint {
                c,
                mean,
                stderr,
                u_of_c: u,
            })
        })
        .collect()
}
