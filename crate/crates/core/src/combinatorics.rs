//! Exact placement and pair counts, and the closed-form bounds on the pair
//! count.
//!
//! `Z(L, k, m)` counts ordered word pairs at Hamming distance exactly `k` and
//! integer distance exactly `m`; `Y*(k, L, m)` counts error placements of
//! weight at most `k` that can produce distortion `m` on some carrier word.
//! Both are computed by exhaustive enumeration, which is the reference the
//! bounds are checked against.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{param, Result};
use crate::word::{distortion_range, WordSpec};

/// Per-distortion counts over `[m_min, m_max]` for fixed `(L, k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    word_length: u32,
    max_errors: u32,
    m_min: u64,
    counts: Vec<u64>,
}

impl CountTable {
    pub fn word_length(&self) -> u32 {
        self.word_length
    }

    pub fn max_errors(&self) -> u32 {
        self.max_errors
    }

    pub fn m_min(&self) -> u64 {
        self.m_min
    }

    pub fn m_max(&self) -> u64 {
        self.m_min + self.counts.len() as u64 - 1
    }

    /// Count at distortion `m`, or `None` outside the table's range.
    pub fn get(&self, m: u64) -> Option<u64> {
        if m < self.m_min {
            return None;
        }
        self.counts.get((m - self.m_min) as usize).copied()
    }

    /// `(m, count)` pairs in ascending `m`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.m_min + i as u64, c))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// All `L`-bit masks with exactly `weight` set bits, ascending.
pub fn masks_of_weight(word_length: u32, weight: u32) -> impl Iterator<Item = u32> {
    let limit = 1u64 << word_length;
    let first = if weight > word_length {
        limit
    } else {
        (1u64 << weight) - 1
    };
    // Gosper's hack
    std::iter::successors(Some(first), move |&v| {
        if v == 0 {
            return None;
        }
        let c = v & v.wrapping_neg();
        let r = v + c;
        Some((((r ^ v) >> 2) / c) | r)
    })
    .take_while(move |&v| v < limit)
    .map(|v| v as u32)
}

fn check_params(word_length: u32, k: u32) -> Result<(WordSpec, u64)> {
    let spec = WordSpec::symmetric(word_length)?;
    let (_, m_max) = distortion_range(spec, k)?;
    Ok((spec, m_max))
}

fn check_m(m: u64, m_max: u64) -> Result<()> {
    if m < 1 || m > m_max {
        return param(format!("m = {m} outside 1..={m_max}"));
    }
    Ok(())
}

/// `Z(L, k, m)` for every `m` in the symmetric distortion range, by
/// enumerating every word and every placement of exactly `k` errors.
pub fn z_exact_table(word_length: u32, k: u32) -> Result<CountTable> {
    let (spec, m_max) = check_params(word_length, k)?;
    let masks: Vec<u32> = masks_of_weight(word_length, k).collect();
    let len = m_max as usize + 1;
    let hist = (0..=spec.full_mask())
        .into_par_iter()
        .fold(
            || vec![0u64; len],
            |mut acc, x| {
                for &e in &masks {
                    let m = u64::from(x).abs_diff(u64::from(x ^ e));
                    acc[m as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; len],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(CountTable {
        word_length,
        max_errors: k,
        m_min: 1,
        counts: hist[1..].to_vec(),
    })
}

pub fn z_exact(word_length: u32, k: u32, m: u64) -> Result<u64> {
    let (_, m_max) = check_params(word_length, k)?;
    check_m(m, m_max)?;
    Ok(z_exact_table(word_length, k)?.get(m).unwrap_or(0))
}

/// `2^(L+1) - 2m`, saturating at zero.
pub fn z_bound_loose(word_length: u32, m: u64) -> u64 {
    (1u64 << (word_length + 1)).saturating_sub(2 * m)
}

/// The loose bound rounded down to a multiple of `2^(L-k+1)`.
pub fn z_bound_tight(word_length: u32, k: u32, m: u64) -> u64 {
    let loose = z_bound_loose(word_length, m);
    let step = 1u64 << (word_length - k.min(word_length) + 1);
    loose - loose % step
}

/// `Y*(k, L, m)` for every `m`: each placement of weight at most `k` is
/// tried with every sign assignment of its flipped bits.
pub fn y_star_table(word_length: u32, k: u32) -> Result<CountTable> {
    let (_, m_max) = check_params(word_length, k)?;
    let mut counts = vec![0u64; m_max as usize];
    let mut reached = vec![false; m_max as usize + 1];
    for weight in 1..=k {
        for mask in masks_of_weight(word_length, weight) {
            reached.iter_mut().for_each(|r| *r = false);
            // Every subset of the mask is a choice of falling bits.
            let mut falling = mask;
            loop {
                let rising = mask & !falling;
                let m = u64::from(rising).abs_diff(u64::from(falling));
                reached[m as usize] = true;
                if falling == 0 {
                    break;
                }
                falling = (falling - 1) & mask;
            }
            for (m, hit) in reached.iter().enumerate().skip(1) {
                if *hit {
                    counts[m - 1] += 1;
                }
            }
        }
    }
    Ok(CountTable {
        word_length,
        max_errors: k,
        m_min: 1,
        counts,
    })
}

pub fn y_star(word_length: u32, k: u32, m: u64) -> Result<u64> {
    let (_, m_max) = check_params(word_length, k)?;
    check_m(m, m_max)?;
    Ok(y_star_table(word_length, k)?.get(m).unwrap_or(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivisibilityClass {
    Zero,
    One,
    /// A positive multiple of `2^(L-k+1)`.
    Multiple,
    Violation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivisibilityEntry {
    pub m: u64,
    pub count: u64,
    pub class: DivisibilityClass,
}

/// Classifies every `Z(L, k, m)` as zero, one, a multiple of `2^(L-k+1)`, or
/// a violation of that pattern.
pub fn divisibility_report(word_length: u32, k: u32) -> Result<Vec<DivisibilityEntry>> {
    let table = z_exact_table(word_length, k)?;
    let step = 1u64 << (word_length - k + 1);
    Ok(table
        .iter()
        .map(|(m, count)| {
            let class = match count {
                0 => DivisibilityClass::Zero,
                1 => DivisibilityClass::One,
                c if c % step == 0 => DivisibilityClass::Multiple,
                _ => DivisibilityClass::Violation,
            };
            DivisibilityEntry { m, count, class }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundsRow {
    pub m: u64,
    pub z_exact: u64,
    pub z_tight: u64,
    pub z_loose: u64,
}

impl BoundsRow {
    pub fn is_ordered(&self) -> bool {
        self.z_exact <= self.z_tight && self.z_tight <= self.z_loose
    }
}

/// One row per `m` in `1..=m_max` comparing the exact count to both bounds.
pub fn bounds_dataset(word_length: u32, k: u32) -> Result<Vec<BoundsRow>> {
    let table = z_exact_table(word_length, k)?;
    Ok(table
        .iter()
        .map(|(m, z_exact)| BoundsRow {
            m,
            z_exact,
            z_tight: z_bound_tight(word_length, k, m),
            z_loose: z_bound_loose(word_length, m),
        })
        .collect())
}

/// Writes `m,z_exact,z_tight,z_loose` CSV.
pub fn write_bounds_csv<W: Write>(rows: &[BoundsRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "m,z_exact,z_tight,z_loose")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.m, r.z_exact, r.z_tight, r.z_loose)?;
    }
    Ok(())
}

/// Sum of binomial coefficients `C(L, 0) + ... + C(L, k)`.
pub fn placements_up_to(word_length: u32, k: u32) -> u64 {
    (0..=k.min(word_length))
        .map(|j| binomial(word_length, j))
        .sum()
}

pub fn binomial(n: u32, r: u32) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u64, |acc, i| acc * u64::from(n - i) / u64::from(i + 1))
}
