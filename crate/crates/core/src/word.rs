//! Words, error placements and the two distances everything else is
//! defined on.
//!
//! A word is an `L`-bit unsigned integer; bit `i` carries weight `2^i`.
//! Channel errors on the symmetric channel are stored as a placement mask
//! plus per-position flip polarity, so the integer distortion of a placement
//! can be computed without reference to a carrier word.

use std::fmt;

use crate::error::{param, Result, VdbError};

/// Largest supported word length. Exhaustive enumeration of `2^L` words has
/// to stay tractable.
pub const MAX_WORD_LENGTH: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Polarity {
    /// Bits may flip in either direction.
    #[default]
    Symmetric,
    /// Bits only fall (1 -> 0).
    Asymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WordSpec {
    word_length: u32,
    polarity: Polarity,
}

impl WordSpec {
    pub fn new(word_length: u32, polarity: Polarity) -> Result<Self> {
        if !(1..=MAX_WORD_LENGTH).contains(&word_length) {
            return param(format!(
                "word length {word_length} outside 1..={MAX_WORD_LENGTH}"
            ));
        }
        Ok(Self {
            word_length,
            polarity,
        })
    }

    pub fn symmetric(word_length: u32) -> Result<Self> {
        Self::new(word_length, Polarity::Symmetric)
    }

    pub fn word_length(&self) -> u32 {
        self.word_length
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    /// Number of distinct words, `2^L`.
    pub fn word_count(&self) -> u64 {
        1u64 << self.word_length
    }

    /// Mask with the low `L` bits set.
    pub fn full_mask(&self) -> u32 {
        word_mask(self.word_length)
    }

    pub fn word(&self, bits: u32) -> Result<Word> {
        if bits & !self.full_mask() != 0 {
            return param(format!(
                "word {bits:#b} does not fit in {} bits",
                self.word_length
            ));
        }
        Ok(Word(bits))
    }

    pub fn placement(&self, mask: u32) -> Result<ErrorPlacement> {
        if mask & !self.full_mask() != 0 {
            return param(format!(
                "placement {mask:#b} does not fit in {} bits",
                self.word_length
            ));
        }
        Ok(ErrorPlacement(mask))
    }

    /// Iterates over every word of this length in ascending order.
    pub fn words(&self) -> impl Iterator<Item = Word> {
        (0..=self.full_mask()).map(Word)
    }
}

pub(crate) fn word_mask(word_length: u32) -> u32 {
    if word_length >= 32 {
        u32::MAX
    } else {
        (1u32 << word_length) - 1
    }
}

/// An `L`-bit channel word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(u32);

impl Word {
    /// Wraps raw bits without checking them against a word length.
    pub fn from_bits(bits: u32) -> Self {
        Word(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn bit(self, i: u32) -> bool {
        (self.0 >> i) & 1 == 1
    }
}

/// Bit positions hit by a channel error; a set bit marks an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ErrorPlacement(u32);

impl ErrorPlacement {
    /// Wraps a raw mask without checking it against a word length.
    pub fn from_mask(mask: u32) -> Self {
        ErrorPlacement(mask)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }

    /// Renders the mask as an `L`-character binary string, MSB first.
    pub fn to_bit_string(self, word_length: u32) -> String {
        (0..word_length)
            .rev()
            .map(|i| if (self.0 >> i) & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Binary for ErrorPlacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Binary::fmt(&self.0, f)
    }
}

/// Direction of each flipped bit. `rising` bits go 0 -> 1, `falling` bits
/// go 1 -> 0. The two masks are disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SignedFlips {
    rising: u32,
    falling: u32,
}

impl SignedFlips {
    pub fn new(rising: u32, falling: u32) -> Result<Self> {
        if rising & falling != 0 {
            return param(format!(
                "bit positions {:#b} are both rising and falling",
                rising & falling
            ));
        }
        Ok(Self { rising, falling })
    }

    pub fn rising(&self) -> u32 {
        self.rising
    }

    pub fn falling(&self) -> u32 {
        self.falling
    }

    pub fn support(&self) -> u32 {
        self.rising | self.falling
    }

    /// Signed value change `sum(sign_i * 2^i)`.
    pub fn value(&self) -> i64 {
        i64::from(self.rising) - i64::from(self.falling)
    }

    /// The flips a placement undergoes when applied to `x`: set bits fall,
    /// clear bits rise.
    pub fn induced(x: Word, placement: ErrorPlacement) -> Self {
        Self {
            rising: placement.0 & !x.0,
            falling: placement.0 & x.0,
        }
    }
}

/// Unsigned integer value `sum(x_i * 2^i)`.
pub fn to_integer(w: Word) -> u64 {
    u64::from(w.0)
}

pub fn hamming_distance(x: Word, y: Word) -> u32 {
    (x.0 ^ y.0).count_ones()
}

/// `|u(x) - u(y)|`.
pub fn integer_distance(x: Word, y: Word) -> u64 {
    to_integer(x).abs_diff(to_integer(y))
}

/// Minimum and maximum integer distortion reachable with at most `k` bit
/// errors.
pub fn distortion_range(spec: WordSpec, k: u32) -> Result<(u64, u64)> {
    let l = spec.word_length();
    if k < 1 || k > l {
        return param(format!("k = {k} outside 1..={l}"));
    }
    let m_max = (1u64 << (l - k)) * ((1u64 << k) - 1);
    let m_min = match spec.polarity() {
        Polarity::Symmetric => 1,
        Polarity::Asymmetric => (1u64 << k) - 1,
    };
    Ok((m_min, m_max))
}

/// Inverts the bits of `x` marked by `placement`. `signs` must cover exactly
/// the placement and agree with the current bit values of `x`.
pub fn apply_flip_errors(x: Word, placement: ErrorPlacement, signs: SignedFlips) -> Result<Word> {
    if signs.support() != placement.mask() {
        return Err(VdbError::PlacementInfeasible(format!(
            "sign support {:#b} differs from placement {:#b}",
            signs.support(),
            placement.mask()
        )));
    }
    if signs.rising & x.0 != 0 {
        return Err(VdbError::PlacementInfeasible(format!(
            "rising flip on set bits {:#b}",
            signs.rising & x.0
        )));
    }
    if signs.falling & !x.0 != 0 {
        return Err(VdbError::PlacementInfeasible(format!(
            "falling flip on clear bits {:#b}",
            signs.falling & !x.0
        )));
    }
    Ok(Word(x.0 ^ placement.0))
}
