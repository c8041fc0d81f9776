use rayon::prelude::*;

use super::{
    check_length, DistortionDistribution, Provenance, UpsetModel, ValueSource,
    MAX_EXACT_WORD_LENGTH,
};
use crate::codegen::{placement_probability, CodeTable};
use crate::error::{param, Result, VdbError};

/// Values handled per parallel work item. Fixed so floating-point sums do
/// not depend on the worker count.
const VALUE_CHUNK: usize = 256;

/// A channel acting on one transmitted word.
#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    /// Bit `i` inverts independently with probability `p_i`. With
    /// `cap_weight = Some(k)` error patterns of weight above `k` are
    /// rejected and the remaining ones renormalized.
    Flip {
        probabilities: Vec<f64>,
        cap_weight: Option<u32>,
    },
    /// Independent per-bit upsets that overwrite a bit with a forced value;
    /// an upset forcing a bit to the value it already holds is masked.
    Forced(UpsetModel),
    /// At most one upset per word: the events "bit `i` forced to `b`" are
    /// mutually exclusive with probabilities `f_t<i>(b)`.
    SingleUpset(UpsetModel),
}

impl Channel {
    pub fn flip(table: &CodeTable) -> Self {
        Channel::Flip {
            probabilities: table.probabilities().to_vec(),
            cap_weight: None,
        }
    }

    pub fn flip_capped(table: &CodeTable) -> Self {
        Channel::Flip {
            probabilities: table.probabilities().to_vec(),
            cap_weight: Some(table.max_errors()),
        }
    }

    pub fn word_length(&self) -> u32 {
        match self {
            Channel::Flip { probabilities, .. } => probabilities.len() as u32,
            Channel::Forced(u) | Channel::SingleUpset(u) => u.word_length(),
        }
    }
}

/// Probability that an independent flip pattern has weight at most `k`.
pub(crate) fn weight_at_most(probabilities: &[f64], k: u32) -> f64 {
    let mut dist = vec![0.0f64; probabilities.len() + 1];
    dist[0] = 1.0;
    for (n, &p) in probabilities.iter().enumerate() {
        for w in (0..=n + 1).rev() {
            let stay = dist[w] * (1.0 - p);
            let from = if w > 0 { dist[w - 1] * p } else { 0.0 };
            dist[w] = stay + from;
        }
    }
    dist.iter().take(k as usize + 1).sum()
}

/// Adds `weight * Pr(x -> x')` into `acc[|x - x'|]` for every outcome of
/// independent per-bit flips with probabilities `q`.
fn spread_flips(x: u32, q: &[f64], cap: Option<u32>, weight: f64, acc: &mut [f64]) {
    struct Walk<'a> {
        x: u32,
        q: &'a [f64],
        cap: u32,
        acc: &'a mut [f64],
    }

    impl Walk<'_> {
        fn step(&mut self, bit: usize, received: u32, prob: f64, flips: u32) {
            if bit == self.q.len() {
                self.acc[self.x.abs_diff(received) as usize] += prob;
                return;
            }
            let p = self.q[bit];
            if p < 1.0 {
                self.step(bit + 1, received, prob * (1.0 - p), flips);
            }
            if p > 0.0 && flips < self.cap {
                self.step(bit + 1, received ^ (1 << bit), prob * p, flips + 1);
            }
        }
    }

    Walk {
        x,
        q,
        cap: cap.unwrap_or(u32::MAX),
        acc,
    }
    .step(0, x, weight, 0);
}

fn check_model_length(word_length: u32) -> Result<()> {
    check_length(word_length)?;
    if word_length > MAX_EXACT_WORD_LENGTH {
        return param(format!(
            "exhaustive enumeration limited to L <= {MAX_EXACT_WORD_LENGTH}, got {word_length}"
        ));
    }
    Ok(())
}

/// Exact `f_M` by summing over every transmitted value and every channel
/// outcome.
pub fn exact_distortion(channel: &Channel, source: &ValueSource) -> Result<DistortionDistribution> {
    let l = channel.word_length();
    check_model_length(l)?;
    let pmf = source.pmf(l)?;
    let values: Vec<(u32, f64)> = pmf.iter().collect();
    let size = 1usize << l;

    let normalizer = match channel {
        Channel::Flip {
            probabilities,
            cap_weight: Some(k),
        } => {
            let z = weight_at_most(probabilities, *k);
            if z <= 0.0 {
                return Err(VdbError::Infeasible(format!(
                    "no error pattern of weight <= {k} has positive probability"
                )));
            }
            z
        }
        _ => 1.0,
    };
    if let Channel::SingleUpset(u) = channel {
        if u.total_upset_probability() > 1.0 + 1e-12 {
            return param("single-upset probabilities sum above 1");
        }
    }

    let partials: Vec<Vec<f64>> = values
        .par_chunks(VALUE_CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0f64; size];
            for &(x, fx) in chunk {
                match channel {
                    Channel::Flip {
                        probabilities,
                        cap_weight,
                    } => spread_flips(x, probabilities, *cap_weight, fx, &mut acc),
                    Channel::Forced(u) => {
                        let q = u.flip_probabilities(x);
                        spread_flips(x, &q, None, fx, &mut acc);
                    }
                    Channel::SingleUpset(u) => {
                        // masked upsets and the no-upset outcome both leave
                        // the word unchanged
                        let q = u.flip_probabilities(x);
                        for (i, qi) in q.iter().enumerate() {
                            acc[1 << i] += fx * qi;
                        }
                        acc[0] += fx * (1.0 - q.iter().sum::<f64>());
                    }
                }
            }
            acc
        })
        .collect();

    let mut mass = vec![0.0f64; size];
    for part in partials {
        mass.iter_mut().zip(part).for_each(|(a, b)| *a += b);
    }
    if normalizer != 1.0 {
        mass.iter_mut().for_each(|f| *f /= normalizer);
    }
    Ok(DistortionDistribution::new(
        mass,
        Provenance::ExactEnumeration,
    ))
}

/// For each `m`, the probability that the independent flip pattern is one
/// of weight at most `k` that produces distortion `m` on at least one
/// carrier word. Reachability is decided by trying every carrier, so the
/// result is independent of the placement-set constructions; it equals the
/// constraint left-hand side at every `m`. Index 0 is unused.
pub fn placement_mass(probabilities: &[f64], k: u32) -> Result<Vec<f64>> {
    let l = probabilities.len() as u32;
    check_model_length(l)?;
    if k < 1 || k > l {
        return param(format!("k = {k} outside 1..={l}"));
    }
    let size = 1usize << l;
    let mut mass = vec![0.0f64; size];
    let mut reached = vec![false; size];
    for e in 1..size as u32 {
        if e.count_ones() > k {
            continue;
        }
        reached.iter_mut().for_each(|r| *r = false);
        for x in 0..size as u32 {
            reached[x.abs_diff(x ^ e) as usize] = true;
        }
        let pe = placement_probability(e, probabilities);
        for (m, _) in reached.iter().enumerate().filter(|(_, &r)| r) {
            mass[m] += pe;
        }
    }
    Ok(mass)
}
