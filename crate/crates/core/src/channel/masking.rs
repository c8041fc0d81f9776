//! Value-dependent masking: upsets that force a bit to a value, so an upset
//! that writes the bit's current value has no effect.

use super::{
    exact_distortion, Channel, DistortionDistribution, EmpiricalPmf, Provenance, ValueSource,
};
use crate::error::{param, Result, VdbError};

/// Largest per-point difference at which the analytic form and the
/// enumeration oracle are reported as agreeing.
pub const AGREEMENT_TOL: f64 = 1e-9;

pub const UPSETS_FORMAT: &str = "vdb-upsets-v1";

/// Per-bit upset probabilities `f_t<i>(b)`: the probability that bit `i` is
/// forced to `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpsetModel {
    force_zero: Vec<f64>,
    force_one: Vec<f64>,
}

impl UpsetModel {
    pub fn new(force_zero: Vec<f64>, force_one: Vec<f64>) -> Result<Self> {
        if force_zero.len() != force_one.len() || force_zero.is_empty() {
            return Err(VdbError::DimensionMismatch(format!(
                "{} force-to-zero against {} force-to-one probabilities",
                force_zero.len(),
                force_one.len()
            )));
        }
        for (i, (&a, &b)) in force_zero.iter().zip(&force_one).enumerate() {
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a + b > 1.0 + 1e-12 {
                return param(format!("bit {i}: upset probabilities ({a}, {b}) invalid"));
            }
        }
        Ok(Self {
            force_zero,
            force_one,
        })
    }

    /// No upsets at any position.
    pub fn quiet(word_length: u32) -> Self {
        Self {
            force_zero: vec![0.0; word_length as usize],
            force_one: vec![0.0; word_length as usize],
        }
    }

    pub fn word_length(&self) -> u32 {
        self.force_zero.len() as u32
    }

    /// `f_t<i>(b)`.
    pub fn force_probability(&self, bit: usize, value: bool) -> f64 {
        if value {
            self.force_one[bit]
        } else {
            self.force_zero[bit]
        }
    }

    pub fn total_upset_probability(&self) -> f64 {
        self.force_zero.iter().chain(&self.force_one).sum()
    }

    /// Probability that each bit of `x` actually changes: an upset forcing
    /// the opposite value.
    pub fn flip_probabilities(&self, x: u32) -> Vec<f64> {
        (0..self.force_zero.len())
            .map(|i| {
                if (x >> i) & 1 == 1 {
                    self.force_zero[i]
                } else {
                    self.force_one[i]
                }
            })
            .collect()
    }

    /// Text form: `format=vdb-upsets-v1`, `L=<int>`, then rows
    /// `i,<force_zero>,<force_one>`; omitted bits are quiet.
    pub fn parse(text: &str) -> Result<Self> {
        let mut format_ok = false;
        let mut word_length: Option<u32> = None;
        let mut rows = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| VdbError::Parse {
                line: line_no,
                message,
            };
            if let Some((k, v)) = line.split_once('=') {
                match k.trim() {
                    "format" if v.trim() == UPSETS_FORMAT => format_ok = true,
                    "format" => return Err(bad(format!("unexpected format `{}`", v.trim()))),
                    "L" => {
                        word_length = Some(
                            v.trim()
                                .parse()
                                .map_err(|_| bad(format!("invalid L `{v}`")))?,
                        )
                    }
                    other => return Err(bad(format!("unknown header key `{other}`"))),
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(bad(format!(
                    "expected `i,<force_zero>,<force_one>`, found `{line}`"
                )));
            }
            let i: usize = fields[0]
                .parse()
                .map_err(|_| bad(format!("invalid bit `{}`", fields[0])))?;
            let f0: f64 = fields[1]
                .parse()
                .map_err(|_| bad(format!("invalid probability `{}`", fields[1])))?;
            let f1: f64 = fields[2]
                .parse()
                .map_err(|_| bad(format!("invalid probability `{}`", fields[2])))?;
            rows.push((line_no, i, f0, f1));
        }
        if !format_ok {
            return Err(VdbError::Parse {
                line: 1,
                message: format!("missing format={UPSETS_FORMAT} header"),
            });
        }
        let l = word_length.ok_or_else(|| VdbError::Parse {
            line: 1,
            message: "missing L header".into(),
        })?;
        if l == 0 || l > crate::word::MAX_WORD_LENGTH {
            return param(format!("word length {l} unsupported"));
        }
        let mut f0 = vec![0.0; l as usize];
        let mut f1 = vec![0.0; l as usize];
        for (line, i, a, b) in rows {
            if i >= l as usize {
                return Err(VdbError::Parse {
                    line,
                    message: format!("bit {i} outside 0..{l}"),
                });
            }
            f0[i] = a;
            f1[i] = b;
        }
        Self::new(f0, f1)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("format={UPSETS_FORMAT}\nL={}\n", self.word_length());
        for (i, (a, b)) in self.force_zero.iter().zip(&self.force_one).enumerate() {
            out.push_str(&format!("{i},{a},{b}\n"));
        }
        out
    }
}

/// The analytic single-upset distribution next to the enumeration oracle
/// for the same channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleErrorAnalysis {
    pub analytic: DistortionDistribution,
    pub oracle: DistortionDistribution,
    /// `(m, analytic - oracle)` for every `m`.
    pub divergence: Vec<(u64, f64)>,
    pub max_divergence: f64,
    pub agrees: bool,
}

/// The single-upset analytic form for `f_M`.
///
/// The received-value mass is assembled from its three sources: a word one
/// bit above forced down, a word one bit below forced up, and a word left
/// unchanged (masked upset or no upset at all). Distortion mass is then
/// `sum_a g(a) (f_V(a - m) + f_V(a + m))`, which treats the transmitted and
/// received values as independent. That factorization is exact only when
/// `f_V` is a point mass; the result is always returned together with the
/// single-upset enumeration oracle and their per-point divergence.
pub fn analytic_single_error(f_v: &EmpiricalPmf, f_t: &UpsetModel) -> Result<SingleErrorAnalysis> {
    let l = f_v.word_length();
    if f_t.word_length() != l {
        return Err(VdbError::DimensionMismatch(format!(
            "value PMF has L={l}, upset model has L={}",
            f_t.word_length()
        )));
    }
    if l > super::MAX_EXACT_WORD_LENGTH {
        return param(format!(
            "analytic form limited to L <= {}",
            super::MAX_EXACT_WORD_LENGTH
        ));
    }
    let total = f_t.total_upset_probability();
    if total > 1.0 + 1e-12 {
        return param("single-upset probabilities sum above 1");
    }
    let size = 1usize << l;
    let fv = |v: i64| -> f64 {
        if (0..size as i64).contains(&v) {
            f_v.mass(v as u32)
        } else {
            0.0
        }
    };

    let received: Vec<f64> = (0..size as i64)
        .map(|a| {
            let mut g = (1.0 - total) * fv(a);
            for i in 0..l as usize {
                let step = 1i64 << i;
                if (a >> i) & 1 == 0 {
                    g += fv(a + step) * f_t.force_probability(i, false);
                } else {
                    g += fv(a - step) * f_t.force_probability(i, true);
                }
                g += f_t.force_probability(i, (a >> i) & 1 == 1) * fv(a);
            }
            g
        })
        .collect();

    let mut mass = vec![0.0f64; size];
    for (m, slot) in mass.iter_mut().enumerate() {
        let m = m as i64;
        let mut acc = 0.0;
        for (a, &g) in received.iter().enumerate() {
            let a = a as i64;
            acc += g * fv(a - m);
            if m > 0 {
                acc += g * fv(a + m);
            }
        }
        *slot = acc;
    }
    let analytic = DistortionDistribution::new(mass, Provenance::AnalyticSingleError);
    let oracle = exact_distortion(
        &Channel::SingleUpset(f_t.clone()),
        &ValueSource::Empirical(f_v.clone()),
    )?;
    let divergence: Vec<(u64, f64)> = analytic
        .mass
        .iter()
        .zip(&oracle.mass)
        .enumerate()
        .map(|(m, (a, o))| (m as u64, a - o))
        .collect();
    let max_divergence = divergence.iter().map(|(_, d)| d.abs()).fold(0.0, f64::max);
    Ok(SingleErrorAnalysis {
        analytic,
        oracle,
        divergence,
        max_divergence,
        agrees: max_divergence <= AGREEMENT_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_single_site() {
        let q = 0.3;
        let f_v = EmpiricalPmf::point(3, 0).unwrap();
        let f_t = UpsetModel::new(vec![0.0; 3], vec![q, 0.0, 0.0]).unwrap();
        let r = analytic_single_error(&f_v, &f_t).unwrap();
        assert!((r.analytic.mass[1] - q).abs() < 1e-15);
        assert!((r.analytic.mass[0] - (1.0 - q)).abs() < 1e-15);
        assert!(r.agrees);
    }

    #[test]
    fn quiet_channel() {
        let f_v = EmpiricalPmf::point(3, 5).unwrap();
        let r = analytic_single_error(&f_v, &UpsetModel::quiet(3)).unwrap();
        assert_eq!(r.analytic.mass[0], 1.0);
        assert!(r.agrees);
        assert_eq!(r.oracle.mass[0], 1.0);
    }

    #[test]
    fn uniform_values_diverge() {
        // independence of sent and received values is wrong for spread PMFs
        let f_v = EmpiricalPmf::uniform(3).unwrap();
        let f_t = UpsetModel::new(vec![0.0, 0.1, 0.0], vec![0.0, 0.1, 0.0]).unwrap();
        let r = analytic_single_error(&f_v, &f_t).unwrap();
        assert!(!r.agrees);
        assert!((r.oracle.mass[2] - 0.1).abs() < 1e-15);
        assert!((r.analytic.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn model_validation_and_text() {
        assert!(UpsetModel::new(vec![0.6], vec![0.6]).is_err());
        assert!(UpsetModel::new(vec![0.1, 0.1], vec![0.1]).is_err());
        let u = UpsetModel::new(vec![0.1, 0.0], vec![0.0, 0.25]).unwrap();
        assert_eq!(UpsetModel::parse(&u.to_text()).unwrap(), u);
        assert_eq!(u.flip_probabilities(0b01), vec![0.1, 0.25]);
        assert!(UpsetModel::parse("format=vdb-upsets-v1\nL=2\n5,0,0\n").is_err());
    }
}
