//! Distortion distributions: Monte Carlo channel simulation, exhaustive
//! enumeration, the single-upset analytic form for value-dependent masking,
//! and ingestion of sensor traces into value distributions.

mod exact;
mod masking;
mod simulate;
mod trace;

use std::collections::BTreeMap;
use std::fmt::Write as _;

pub use exact::{exact_distortion, placement_mass, Channel};
pub use masking::{
    analytic_single_error, SingleErrorAnalysis, UpsetModel, AGREEMENT_TOL, UPSETS_FORMAT,
};
pub use simulate::{
    simulate, MassCheck, SimulationOptions, SimulationReport, RNG_ID, SHARD_TRIALS,
};
pub use trace::{ingest_trace, TraceOptions};

use crate::error::{param, Result, VdbError};
use crate::word::MAX_WORD_LENGTH;

/// Largest word length accepted by the exhaustive routines.
pub const MAX_EXACT_WORD_LENGTH: u32 = 16;

/// A probability mass function over transmitted `L`-bit values.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPmf {
    word_length: u32,
    mass: BTreeMap<u32, f64>,
    sample_count: u64,
}

impl EmpiricalPmf {
    /// Normalizes a histogram of observed values.
    pub fn from_counts(word_length: u32, counts: &BTreeMap<u32, u64>) -> Result<Self> {
        check_length(word_length)?;
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(VdbError::NoSamples);
        }
        let limit = 1u64 << word_length;
        let mut mass = BTreeMap::new();
        for (&v, &c) in counts {
            if u64::from(v) >= limit {
                return param(format!("value {v} does not fit in {word_length} bits"));
            }
            if c > 0 {
                mass.insert(v, c as f64 / total as f64);
            }
        }
        Ok(Self {
            word_length,
            mass,
            sample_count: total,
        })
    }

    /// Masses must be nonnegative and sum to 1 within `1e-9`.
    pub fn from_masses(word_length: u32, masses: BTreeMap<u32, f64>) -> Result<Self> {
        check_length(word_length)?;
        let limit = 1u64 << word_length;
        let mut total = 0.0;
        for (&v, &f) in &masses {
            if u64::from(v) >= limit {
                return param(format!("value {v} does not fit in {word_length} bits"));
            }
            if !(0.0..=1.0).contains(&f) {
                return param(format!("mass {f} at value {v} outside [0, 1]"));
            }
            total += f;
        }
        if (total - 1.0).abs() > 1e-9 {
            return param(format!("masses sum to {total}, not 1"));
        }
        Ok(Self {
            word_length,
            mass: masses.into_iter().filter(|&(_, f)| f > 0.0).collect(),
            sample_count: 0,
        })
    }

    pub fn uniform(word_length: u32) -> Result<Self> {
        check_length(word_length)?;
        let n = 1u32 << word_length;
        let f = 1.0 / f64::from(n);
        Ok(Self {
            word_length,
            mass: (0..n).map(|v| (v, f)).collect(),
            sample_count: 0,
        })
    }

    pub fn point(word_length: u32, value: u32) -> Result<Self> {
        Self::from_masses(word_length, BTreeMap::from([(value, 1.0)]))
    }

    pub fn word_length(&self) -> u32 {
        self.word_length
    }

    pub fn sample_count(&self) -> u64 {
        self.sample_count
    }

    pub fn mass(&self, value: u32) -> f64 {
        self.mass.get(&value).copied().unwrap_or(0.0)
    }

    /// `(value, mass)` for values with positive mass, ascending.
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.mass.iter().map(|(&v, &f)| (v, f))
    }

    /// Most probable value; ties go to the smallest value.
    pub fn mode(&self) -> Option<u32> {
        self.mass
            .iter()
            .fold(None, |best: Option<(u32, f64)>, (&v, &f)| match best {
                Some((_, bf)) if bf >= f => best,
                _ => Some((v, f)),
            })
            .map(|(v, _)| v)
    }

    /// `value,mass` CSV with `# L=` and `# samples=` metadata lines.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# L={}\n# samples={}\nvalue,mass\n",
            self.word_length, self.sample_count
        );
        for (v, f) in self.iter() {
            let _ = writeln!(out, "{v},{f}");
        }
        out
    }

    /// Reads the CSV written by [`EmpiricalPmf::to_csv`]. `word_length`
    /// overrides or supplies the `# L=` line.
    pub fn parse_csv(text: &str, word_length: Option<u32>) -> Result<Self> {
        let mut declared = None;
        let mut samples = 0;
        let mut masses = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line == "value,mass" {
                continue;
            }
            let bad = |message: String| VdbError::Parse {
                line: line_no,
                message,
            };
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.trim().split_once('=') {
                    match k.trim() {
                        "L" => {
                            declared = Some(
                                v.trim()
                                    .parse()
                                    .map_err(|_| bad(format!("invalid L `{v}`")))?,
                            )
                        }
                        "samples" => {
                            samples = v
                                .trim()
                                .parse()
                                .map_err(|_| bad(format!("invalid sample count `{v}`")))?
                        }
                        _ => {}
                    }
                }
                continue;
            }
            let (v, f) = line
                .split_once(',')
                .ok_or_else(|| bad(format!("expected `value,mass`, found `{line}`")))?;
            let v: u32 = v
                .trim()
                .parse()
                .map_err(|_| bad(format!("invalid value `{v}`")))?;
            let f: f64 = f
                .trim()
                .parse()
                .map_err(|_| bad(format!("invalid mass `{f}`")))?;
            if masses.insert(v, f).is_some() {
                return Err(bad(format!("duplicate value {v}")));
            }
        }
        let l = match (word_length, declared) {
            (Some(a), Some(b)) if a != b => {
                return Err(VdbError::DimensionMismatch(format!(
                    "PMF declares L={b}, expected L={a}"
                )))
            }
            (Some(a), _) => a,
            (None, Some(b)) => b,
            (None, None) => {
                return param("PMF word length unknown; add `# L=` or pass it explicitly")
            }
        };
        let mut pmf = Self::from_masses(l, masses)?;
        pmf.sample_count = samples;
        Ok(pmf)
    }
}

fn check_length(word_length: u32) -> Result<()> {
    if !(1..=MAX_WORD_LENGTH).contains(&word_length) {
        return param(format!(
            "word length {word_length} outside 1..={MAX_WORD_LENGTH}"
        ));
    }
    Ok(())
}

/// Where transmitted values come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueSource {
    Uniform,
    Empirical(EmpiricalPmf),
}

impl ValueSource {
    pub(crate) fn pmf(&self, word_length: u32) -> Result<EmpiricalPmf> {
        match self {
            ValueSource::Uniform => EmpiricalPmf::uniform(word_length),
            ValueSource::Empirical(p) if p.word_length() == word_length => Ok(p.clone()),
            ValueSource::Empirical(p) => Err(VdbError::DimensionMismatch(format!(
                "value PMF has L={}, channel has L={word_length}",
                p.word_length()
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    MonteCarlo,
    ExactEnumeration,
    AnalyticSingleError,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Provenance::MonteCarlo => "monte_carlo",
            Provenance::ExactEnumeration => "exact_enumeration",
            Provenance::AnalyticSingleError => "analytic_single_error",
        })
    }
}

/// PMF of the integer distortion `M`, indexed by `m` (including `m = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionDistribution {
    pub mass: Vec<f64>,
    pub provenance: Provenance,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub rng: Option<&'static str>,
}

impl DistortionDistribution {
    pub(crate) fn new(mass: Vec<f64>, provenance: Provenance) -> Self {
        Self {
            mass,
            provenance,
            trials: None,
            seed: None,
            rng: None,
        }
    }

    pub fn mass_at(&self, m: u64) -> f64 {
        self.mass.get(m as usize).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn tail(&self) -> Vec<f64> {
        tail_of(self)
    }

    /// `m,mass,tail` CSV preceded by metadata comment lines.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# provenance={}\n", self.provenance);
        if let Some(t) = self.trials {
            let _ = writeln!(out, "# trials={t}");
        }
        if let Some(s) = self.seed {
            let _ = writeln!(out, "# seed={s}");
        }
        if let Some(r) = self.rng {
            let _ = writeln!(out, "# rng={r}");
        }
        out.push_str("m,mass,tail\n");
        for (m, (f, t)) in self.mass.iter().zip(self.tail()).enumerate() {
            let _ = writeln!(out, "{m},{f},{t}");
        }
        out
    }
}

/// `Pr(M > m)` for every `m` in the distribution's support, from suffix
/// sums. The last entry is 0.
pub fn tail_of(d: &DistortionDistribution) -> Vec<f64> {
    let mut tail = vec![0.0; d.mass.len()];
    let mut acc = 0.0;
    for m in (0..d.mass.len()).rev() {
        tail[m] = acc;
        acc += d.mass[m];
    }
    tail
}
