//! Construction of the placement sets `S_m`: for each distortion `m`, the
//! error masks of weight at most `k` that can produce a deviation of exactly
//! `m` on some transmitted word.
//!
//! Two constructions are provided. [`sets_bruteforce`] walks every word and
//! every placement. [`sets_fast`] enumerates the signed-binary expansions of
//! `m` (digits in `{-1, 0, +1}`) with at most `k` nonzero digits; the support
//! of each expansion is a placement, and every such expansion is realizable
//! by choosing the carrier bits opposite to the digit signs.

use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;

use crate::combinatorics::masks_of_weight;
use crate::error::{param, Result};
use crate::word::{distortion_range, ErrorPlacement, SignedFlips, Word, WordSpec};

pub const SETS_FORMAT: &str = "vdb-sets-v1";

/// The family `S_m` for `m = 1..=m_max`. Masks in each set are ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementSets {
    word_length: u32,
    max_errors: u32,
    sets: Vec<Vec<u32>>,
}

impl PlacementSets {
    pub fn word_length(&self) -> u32 {
        self.word_length
    }

    pub fn max_errors(&self) -> u32 {
        self.max_errors
    }

    pub fn m_max(&self) -> u64 {
        self.sets.len() as u64
    }

    /// Masks producing distortion `m`; empty outside `1..=m_max`.
    pub fn masks(&self, m: u64) -> &[u32] {
        if m == 0 {
            return &[];
        }
        self.sets
            .get((m - 1) as usize)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn placements(&self, m: u64) -> impl Iterator<Item = ErrorPlacement> + '_ {
        self.masks(m).iter().map(|&e| ErrorPlacement::from_mask(e))
    }

    /// `(m, masks)` in ascending `m`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, &[u32])> + '_ {
        self.sets
            .iter()
            .enumerate()
            .map(|(i, s)| (i as u64 + 1, s.as_slice()))
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.sets.iter().map(Vec::len).collect()
    }

    /// Writes the `vdb-sets-v1` text form, rows sorted by `(m, mask)`.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "format={SETS_FORMAT}")?;
        writeln!(out, "L={}", self.word_length)?;
        writeln!(out, "k={}", self.max_errors)?;
        for (m, masks) in self.iter() {
            for &e in masks {
                writeln!(
                    out,
                    "{m},{}",
                    ErrorPlacement::from_mask(e).to_bit_string(self.word_length)
                )?;
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("ascii output")
    }
}

fn check_params(word_length: u32, k: u32) -> Result<u64> {
    let spec = WordSpec::symmetric(word_length)?;
    Ok(distortion_range(spec, k)?.1)
}

/// Builds `S_m` by walking every word `x` and every placement of at most `k`
/// errors, filing the placement under `|u(x) - u(x ^ e)|`.
pub fn sets_bruteforce(word_length: u32, k: u32) -> Result<PlacementSets> {
    let m_max = check_params(word_length, k)?;
    let masks: Vec<u32> = (1..=k)
        .flat_map(|w| masks_of_weight(word_length, w))
        .collect();
    let full = crate::word::word_mask(word_length);
    let mut found: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); m_max as usize];
    for x in 0..=full {
        for &e in &masks {
            let m = u64::from(x).abs_diff(u64::from(x ^ e));
            found[(m - 1) as usize].insert(e);
        }
    }
    Ok(PlacementSets {
        word_length,
        max_errors: k,
        sets: found.into_iter().map(|s| s.into_iter().collect()).collect(),
    })
}

/// A signed-binary digit vector, least significant digit first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignedDigitVector {
    digits: Vec<i8>,
}

impl SignedDigitVector {
    pub fn new(digits: Vec<i8>) -> Result<Self> {
        if digits.len() > 63 {
            return param("too many digits");
        }
        if let Some(d) = digits.iter().find(|d| !(-1..=1).contains(*d)) {
            return param(format!("digit {d} not in {{-1, 0, 1}}"));
        }
        Ok(Self { digits })
    }

    pub fn digits(&self) -> &[i8] {
        &self.digits
    }

    /// `sum(d_i * 2^i)`.
    pub fn value(&self) -> i64 {
        self.digits
            .iter()
            .enumerate()
            .map(|(i, &d)| i64::from(d) << i)
            .sum()
    }

    pub fn weight(&self) -> u32 {
        self.digits.iter().filter(|&&d| d != 0).count() as u32
    }

    pub fn support(&self) -> u32 {
        self.digits
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != 0)
            .fold(0, |acc, (i, _)| acc | (1 << i))
    }

    /// The sign-mirrored expansion, whose value is `-self.value()`.
    pub fn mirrored(&self) -> Self {
        Self {
            digits: self.digits.iter().map(|d| -d).collect(),
        }
    }

    /// Positive digits rise, negative digits fall.
    pub fn to_flips(&self) -> SignedFlips {
        let mut rising = 0;
        let mut falling = 0;
        for (i, &d) in self.digits.iter().enumerate() {
            match d {
                1 => rising |= 1 << i,
                -1 => falling |= 1 << i,
                _ => {}
            }
        }
        SignedFlips::new(rising, falling).expect("digits are single-valued")
    }

    /// A carrier word on which these flips are legal: set where a digit
    /// falls, clear elsewhere.
    pub fn carrier(&self) -> Word {
        Word::from_bits(self.to_flips().falling())
    }
}

/// All length-`L` expansions of `+m` over digits `{-1, 0, +1}` with at most
/// `max_weight` nonzero digits. The expansions of `-m` are the
/// [`SignedDigitVector::mirrored`] images of these and share their supports.
///
/// Digits are chosen from the least significant end. While the remaining
/// value is even the digit is forced to zero; at each odd remainder the
/// expansion branches into a `+1` and a `-1` digit.
pub fn signed_digit_reps(
    m: u64,
    word_length: u32,
    max_weight: u32,
) -> Result<Vec<SignedDigitVector>> {
    if word_length == 0 || word_length > 62 {
        return param(format!("word length {word_length} unsupported"));
    }
    let limit = (1u64 << word_length) - 1;
    if m < 1 || m > limit {
        return param(format!("m = {m} outside 1..={limit}"));
    }
    let mut out = Vec::new();
    let mut digits = vec![0i8; word_length as usize];
    branch(m as i64, 0, 0, max_weight, &mut digits, &mut out);
    Ok(out)
}

fn branch(
    remainder: i64,
    position: usize,
    weight: u32,
    max_weight: u32,
    digits: &mut [i8],
    out: &mut Vec<SignedDigitVector>,
) {
    let len = digits.len();
    if remainder == 0 {
        // Remaining digits are all zero.
        digits[position..].iter_mut().for_each(|d| *d = 0);
        out.push(SignedDigitVector {
            digits: digits.to_vec(),
        });
        return;
    }
    if position == len {
        return;
    }
    // Positions i..L can contribute at most 2^(L-i) - 1 in magnitude.
    let reach = (1i64 << (len - position)) - 1;
    if remainder.abs() > reach {
        return;
    }
    if remainder % 2 == 0 {
        digits[position] = 0;
        branch(remainder / 2, position + 1, weight, max_weight, digits, out);
        return;
    }
    if weight == max_weight {
        return;
    }
    for d in [1i8, -1] {
        digits[position] = d;
        branch(
            (remainder - i64::from(d)) / 2,
            position + 1,
            weight + 1,
            max_weight,
            digits,
            out,
        );
    }
    digits[position] = 0;
}

/// Builds `S_m` from the supports of the signed-binary expansions of each
/// `m`. Must agree exactly with [`sets_bruteforce`].
pub fn sets_fast(word_length: u32, k: u32) -> Result<PlacementSets> {
    let m_max = check_params(word_length, k)?;
    let sets = (1..=m_max)
        .into_par_iter()
        .map(|m| {
            let mut supports: Vec<u32> = signed_digit_reps(m, word_length, k)
                .expect("m within range")
                .iter()
                .map(SignedDigitVector::support)
                .collect();
            supports.sort_unstable();
            supports.dedup();
            supports
        })
        .collect();
    Ok(PlacementSets {
        word_length,
        max_errors: k,
        sets,
    })
}

/// The `L`-bit words at integer distance exactly `m` from `s`.
pub fn values_at_distance(s: Word, m: u64, word_length: u32) -> Vec<Word> {
    let v = u64::from(s.bits());
    let limit = 1u64 << word_length;
    let mut out = Vec::with_capacity(2);
    if m > 0 && v >= m {
        out.push(Word::from_bits((v - m) as u32));
    }
    if v + m < limit && (m > 0 || out.is_empty()) {
        out.push(Word::from_bits((v + m) as u32));
    }
    out
}
