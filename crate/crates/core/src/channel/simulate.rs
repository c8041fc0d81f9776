use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::exact::weight_at_most;
use super::{DistortionDistribution, Provenance, ValueSource};
use crate::codegen::{CodeTable, TailConstraint};
use crate::error::{param, Result, VdbError};

/// Trials per shard. Shard `s` draws from its own ChaCha20 stream, so the
/// result does not depend on how shards are scheduled.
pub const SHARD_TRIALS: u64 = 4096;

/// Generator identifier recorded in simulation output.
pub const RNG_ID: &str = "chacha20(seed_from_u64,stream=shard,shard=4096)";

/// Below this acceptance probability the weight-capped mode gives up
/// instead of redrawing.
const MIN_CAP_ACCEPTANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationOptions {
    pub trials: u64,
    pub seed: u64,
    /// Reject flip patterns heavier than the table's `k` and redraw.
    pub cap_weight: bool,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: 0,
            cap_weight: false,
        }
    }
}

/// Comparison of the empirical distribution at one `m` against the
/// constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct MassCheck {
    pub m: u64,
    pub empirical: f64,
    pub bound: f64,
    /// `3 sqrt(bound (1 - bound) / trials)`.
    pub slack: f64,
    /// Empirical `Pr(M > m)`.
    pub empirical_tail: f64,
    /// `min(1, sum_{j > m} bound(j))`.
    pub implied_tail: f64,
    pub tail_slack: f64,
    pub mass_ok: bool,
    pub tail_ok: bool,
    /// Diagnostic only: empirical tail against `bound(m)` itself.
    pub strict_tail_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub distribution: DistortionDistribution,
    pub checks: Vec<MassCheck>,
    pub pass: bool,
}

impl SimulationReport {
    pub fn failures(&self) -> impl Iterator<Item = &MassCheck> {
        self.checks.iter().filter(|c| !(c.mass_ok && c.tail_ok))
    }

    /// `m,empirical,bound,slack,empirical_tail,implied_tail,tail_slack,mass_ok,tail_ok,strict_tail_ok`
    pub fn checks_csv(&self) -> String {
        let mut out = String::from(
            "m,empirical,bound,slack,empirical_tail,implied_tail,tail_slack,mass_ok,tail_ok,strict_tail_ok\n",
        );
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                c.m,
                c.empirical,
                c.bound,
                c.slack,
                c.empirical_tail,
                c.implied_tail,
                c.tail_slack,
                c.mass_ok,
                c.tail_ok,
                c.strict_tail_ok
            ));
        }
        out
    }
}

enum Sampler {
    Uniform(u32),
    Weighted(Vec<u32>, WeightedIndex<f64>),
}

impl Sampler {
    fn draw(&self, rng: &mut ChaCha20Rng) -> u32 {
        match self {
            Sampler::Uniform(size) => rng.gen_range(0..*size),
            Sampler::Weighted(values, index) => values[index.sample(rng)],
        }
    }
}

fn flip_pattern(p: &[f64], rng: &mut ChaCha20Rng) -> u32 {
    p.iter()
        .enumerate()
        .filter(|(_, &pi)| rng.gen::<f64>() < pi)
        .fold(0, |e, (i, _)| e | (1 << i))
}

/// Monte Carlo distortion distribution of `table` under the independent
/// flip channel, checked against `c`.
pub fn simulate(
    table: &CodeTable,
    c: &TailConstraint,
    opts: &SimulationOptions,
    source: &ValueSource,
) -> Result<SimulationReport> {
    let l = table.word_length();
    let k = table.max_errors();
    if c.word_length() != l || c.max_errors() != k {
        return Err(VdbError::DimensionMismatch(format!(
            "table is (L={l}, k={k}), constraint is (L={}, k={})",
            c.word_length(),
            c.max_errors()
        )));
    }
    if opts.trials == 0 {
        return param("trials must be at least 1");
    }
    let p = table.probabilities();
    if opts.cap_weight && weight_at_most(p, k) < MIN_CAP_ACCEPTANCE {
        return Err(VdbError::Infeasible(format!(
            "flip patterns of weight <= {k} are too rare to sample by rejection"
        )));
    }
    let sampler = match source {
        ValueSource::Uniform => Sampler::Uniform(1u32 << l),
        ValueSource::Empirical(_) => {
            let (values, weights): (Vec<u32>, Vec<f64>) = source.pmf(l)?.iter().unzip();
            let index = WeightedIndex::new(weights)
                .map_err(|e| VdbError::Parameter(format!("value PMF unusable: {e}")))?;
            Sampler::Weighted(values, index)
        }
    };

    let shards = opts.trials.div_ceil(SHARD_TRIALS);
    let histograms: Vec<BTreeMap<u64, u64>> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
            rng.set_stream(shard);
            let n = SHARD_TRIALS.min(opts.trials - shard * SHARD_TRIALS);
            let mut hist = BTreeMap::new();
            for _ in 0..n {
                let x = sampler.draw(&mut rng);
                let mut e = flip_pattern(p, &mut rng);
                while opts.cap_weight && e.count_ones() > k {
                    e = flip_pattern(p, &mut rng);
                }
                *hist.entry(u64::from(x.abs_diff(x ^ e))).or_insert(0) += 1;
            }
            hist
        })
        .collect();

    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for h in histograms {
        for (m, n) in h {
            *counts.entry(m).or_insert(0) += n;
        }
    }
    let top = counts
        .keys()
        .next_back()
        .copied()
        .unwrap_or(0)
        .max(c.m_max());
    let n = opts.trials as f64;
    let mut mass = vec![0.0f64; top as usize + 1];
    for (&m, &count) in &counts {
        mass[m as usize] = count as f64 / n;
    }
    let mut distribution = DistortionDistribution::new(mass, Provenance::MonteCarlo);
    distribution.trials = Some(opts.trials);
    distribution.seed = Some(opts.seed);
    distribution.rng = Some(RNG_ID);

    let checks = mass_checks(&distribution, c, opts.trials);
    let pass = checks.iter().all(|c| c.mass_ok && c.tail_ok);
    Ok(SimulationReport {
        distribution,
        checks,
        pass,
    })
}

fn three_sigma(f: f64, trials: u64) -> f64 {
    let f = f.clamp(0.0, 1.0);
    3.0 * (f * (1.0 - f) / trials as f64).sqrt()
}

fn mass_checks(d: &DistortionDistribution, c: &TailConstraint, trials: u64) -> Vec<MassCheck> {
    let top = d.mass.len() as u64 - 1;
    let tail = d.tail();
    // suffix sums of the bounds over the simulated range
    let mut implied = vec![0.0f64; d.mass.len()];
    let mut acc = 0.0f64;
    for m in (1..=top).rev() {
        implied[m as usize] = acc.min(1.0);
        acc += c.bound(m);
    }
    (1..=top)
        .map(|m| {
            let empirical = d.mass[m as usize];
            let bound = c.bound(m);
            let slack = three_sigma(bound, trials);
            let empirical_tail = tail[m as usize];
            let implied_tail = implied[m as usize];
            let tail_slack = three_sigma(implied_tail, trials);
            MassCheck {
                m,
                empirical,
                bound,
                slack,
                empirical_tail,
                implied_tail,
                tail_slack,
                mass_ok: empirical <= bound + slack,
                tail_ok: empirical_tail <= implied_tail + tail_slack,
                strict_tail_ok: empirical_tail <= bound + slack,
            }
        })
        .collect()
}
