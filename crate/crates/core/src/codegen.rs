//! Code-table generation: the per-distortion constraint polynomials and the
//! searches that maximize the channel error probabilities under them.
//!
//! For each distortion `m` the constraint is
//!
//! ```text
//! sum over e in S_m of prod_i p_i^e_i (1 - p_i)^(1 - e_i)  <=  F(m)
//! ```
//!
//! The left-hand side is not monotone in the probabilities (terms such as
//! `p^2 (1 - p)` rise and fall), so the feasible set can be a union of
//! intervals. Both solvers return the upper end of the feasible component
//! that contains their starting point: a grid scan finds the first
//! infeasible point, and bisection narrows the bracket to `tol`.

use std::fmt;
use std::str::FromStr;

use crate::error::{param, Result, VdbError};
use crate::setgen::PlacementSets;
use crate::word::{distortion_range, WordSpec};

pub const CONSTRAINT_FORMAT: &str = "vdb-constraint-v1";
pub const TABLE_FORMAT: &str = "vdb-table-v1";

/// Margins at or above this count as satisfied when verifying a table.
pub const VERIFY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintSource {
    /// Explicit per-`m` values.
    Table,
    /// `F(m) = 1 / (m + 1)`.
    Reciprocal,
}

/// Upper bounds `F(m)` on the probability of each distortion `m`, for every
/// `m` in the symmetric distortion range of `(L, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailConstraint {
    word_length: u32,
    max_errors: u32,
    bounds: Vec<f64>,
    source: ConstraintSource,
}

impl TailConstraint {
    /// `bounds[j]` is the bound for `m = j + 1`. With `require_nonincreasing`
    /// the bounds must not increase with `m`.
    pub fn new(
        word_length: u32,
        max_errors: u32,
        bounds: Vec<f64>,
        require_nonincreasing: bool,
    ) -> Result<Self> {
        let m_max = range_max(word_length, max_errors)?;
        if bounds.len() as u64 != m_max {
            return Err(VdbError::DimensionMismatch(format!(
                "{} bounds for m = 1..={m_max}",
                bounds.len()
            )));
        }
        for (j, &b) in bounds.iter().enumerate() {
            if !(0.0..=1.0).contains(&b) {
                return param(format!("bound {b} for m = {} outside [0, 1]", j + 1));
            }
            if require_nonincreasing && j > 0 && b > bounds[j - 1] {
                return param(format!(
                    "bound for m = {} increases from {} to {b}",
                    j + 1,
                    bounds[j - 1]
                ));
            }
        }
        Ok(Self {
            word_length,
            max_errors,
            bounds,
            source: ConstraintSource::Table,
        })
    }

    pub fn reciprocal(word_length: u32, max_errors: u32) -> Result<Self> {
        let m_max = range_max(word_length, max_errors)?;
        Ok(Self {
            word_length,
            max_errors,
            bounds: (1..=m_max).map(|m| 1.0 / (m as f64 + 1.0)).collect(),
            source: ConstraintSource::Reciprocal,
        })
    }

    pub fn word_length(&self) -> u32 {
        self.word_length
    }

    pub fn max_errors(&self) -> u32 {
        self.max_errors
    }

    pub fn source(&self) -> ConstraintSource {
        self.source
    }

    pub fn m_max(&self) -> u64 {
        self.bounds.len() as u64
    }

    /// `F(m)`. `m = 0` is unconstrained; distortions beyond the range take
    /// the last bound.
    pub fn bound(&self, m: u64) -> f64 {
        match m {
            0 => 1.0,
            m if m > self.m_max() => *self.bounds.last().expect("non-empty range"),
            m => self.bounds[(m - 1) as usize],
        }
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    /// Parses the `vdb-constraint-v1` text form.
    pub fn parse(text: &str, require_nonincreasing: bool) -> Result<Self> {
        let mut header = Header::default();
        let mut rows: Vec<(usize, u64, f64)> = Vec::new();
        let mut form: Option<(usize, String)> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((key, value)) = line.split_once('=') {
                match key.trim() {
                    "form" => form = Some((line_no, value.trim().to_string())),
                    _ => header.accept(line_no, key.trim(), value.trim())?,
                }
                continue;
            }
            let (m, bound) = line.split_once(',').ok_or_else(|| VdbError::Parse {
                line: line_no,
                message: format!("expected `m,<bound>`, found `{line}`"),
            })?;
            let m: u64 = m.trim().parse().map_err(|_| VdbError::Parse {
                line: line_no,
                message: format!("invalid distortion `{}`", m.trim()),
            })?;
            let bound = parse_probability(bound.trim()).map_err(|message| VdbError::Parse {
                line: line_no,
                message,
            })?;
            rows.push((line_no, m, bound));
        }

        let (word_length, max_errors) = header.finish(CONSTRAINT_FORMAT)?;
        let m_max = range_max(word_length, max_errors).map_err(|e| VdbError::Parse {
            line: header.k_line,
            message: e.to_string(),
        })?;

        if let Some((line, name)) = form {
            if name != "reciprocal" {
                return Err(VdbError::Parse {
                    line,
                    message: format!("unknown closed form `{name}`"),
                });
            }
            if let Some(&(line, _, _)) = rows.first() {
                return Err(VdbError::Parse {
                    line,
                    message: "explicit rows are not allowed with a closed form".into(),
                });
            }
            return Self::reciprocal(word_length, max_errors);
        }

        let mut specified: Vec<Option<(usize, f64)>> = vec![None; m_max as usize];
        for &(line, m, bound) in &rows {
            if m < 1 || m > m_max {
                return Err(VdbError::Parse {
                    line,
                    message: format!("m = {m} outside 1..={m_max}"),
                });
            }
            let slot = &mut specified[(m - 1) as usize];
            if slot.is_some() {
                return Err(VdbError::Parse {
                    line,
                    message: format!("duplicate bound for m = {m}"),
                });
            }
            if !(0.0..=1.0).contains(&bound) {
                return Err(VdbError::Parse {
                    line,
                    message: format!("bound {bound} outside [0, 1]"),
                });
            }
            *slot = Some((line, bound));
        }

        // Gaps inherit the previous specified bound; the leading gap is 1.
        let mut bounds = Vec::with_capacity(m_max as usize);
        let mut current = 1.0;
        let mut prev: Option<(usize, f64)> = None;
        for slot in &specified {
            if let Some((line, b)) = *slot {
                if require_nonincreasing {
                    if let Some((_, pb)) = prev {
                        if b > pb {
                            return Err(VdbError::Parse {
                                line,
                                message: format!("bound {b} increases over previous {pb}"),
                            });
                        }
                    }
                }
                prev = Some((line, b));
                current = b;
            }
            bounds.push(current);
        }
        Self::new(word_length, max_errors, bounds, require_nonincreasing)
    }

    /// The `vdb-constraint-v1` text form, one row per `m`.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "format={CONSTRAINT_FORMAT}\nL={}\nk={}\n",
            self.word_length, self.max_errors
        );
        if self.source == ConstraintSource::Reciprocal {
            out.push_str("form=reciprocal\n");
            return out;
        }
        for (j, b) in self.bounds.iter().enumerate() {
            out.push_str(&format!("{},{}\n", j + 1, b));
        }
        out
    }
}

fn range_max(word_length: u32, max_errors: u32) -> Result<u64> {
    let spec = WordSpec::symmetric(word_length)?;
    Ok(distortion_range(spec, max_errors)?.1)
}

/// Accepts a decimal or a rational `a/b`.
fn parse_probability(s: &str) -> std::result::Result<f64, String> {
    let value = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a
                .trim()
                .parse()
                .map_err(|_| format!("invalid numerator in `{s}`"))?;
            let b: f64 = b
                .trim()
                .parse()
                .map_err(|_| format!("invalid denominator in `{s}`"))?;
            if b == 0.0 {
                return Err(format!("zero denominator in `{s}`"));
            }
            a / b
        }
        None => s.parse().map_err(|_| format!("invalid number `{s}`"))?,
    };
    if !value.is_finite() {
        return Err(format!("non-finite value `{s}`"));
    }
    Ok(value)
}

#[derive(Default)]
struct Header {
    format: Option<String>,
    word_length: Option<u32>,
    max_errors: Option<u32>,
    k_line: usize,
    mode: Option<(usize, String)>,
}

impl Header {
    fn accept(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        let bad = |message: String| VdbError::Parse { line, message };
        match key {
            "format" => self.format = Some(value.to_string()),
            "L" => {
                self.word_length = Some(
                    value
                        .parse()
                        .map_err(|_| bad(format!("invalid L `{value}`")))?,
                )
            }
            "k" => {
                self.k_line = line;
                self.max_errors = Some(
                    value
                        .parse()
                        .map_err(|_| bad(format!("invalid k `{value}`")))?,
                )
            }
            "mode" => self.mode = Some((line, value.to_string())),
            _ => return Err(bad(format!("unknown header key `{key}`"))),
        }
        Ok(())
    }

    fn finish(&self, expected: &str) -> Result<(u32, u32)> {
        match self.format.as_deref() {
            Some(f) if f == expected => {}
            Some(f) => {
                return Err(VdbError::Parse {
                    line: 1,
                    message: format!("expected format={expected}, found format={f}"),
                })
            }
            None => {
                return Err(VdbError::Parse {
                    line: 1,
                    message: format!("missing format={expected} header"),
                })
            }
        }
        let word_length = self.word_length.ok_or_else(|| VdbError::Parse {
            line: 1,
            message: "missing L header".into(),
        })?;
        let max_errors = self.max_errors.ok_or_else(|| VdbError::Parse {
            line: 1,
            message: "missing k header".into(),
        })?;
        Ok((word_length, max_errors))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMode {
    Iid,
    PerBit,
}

impl fmt::Display for TableMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableMode::Iid => "iid",
            TableMode::PerBit => "perbit",
        })
    }
}

impl FromStr for TableMode {
    type Err = VdbError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid" => Ok(TableMode::Iid),
            "perbit" => Ok(TableMode::PerBit),
            _ => param(format!("unknown table mode `{s}`")),
        }
    }
}

/// How a table was produced and how much slack it has.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverMetadata {
    pub grid: f64,
    pub tol: f64,
    /// `F(m) - lhs(m)` for `m = 1..=m_max`.
    pub margins: Vec<f64>,
    /// Every probability is either 1 or infeasible when raised by `4 * tol`.
    pub locally_maximal: bool,
    pub sweeps: usize,
}

/// Channel error probabilities, indexed by bit significance.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeTable {
    mode: TableMode,
    word_length: u32,
    max_errors: u32,
    probabilities: Vec<f64>,
    metadata: Option<SolverMetadata>,
}

impl CodeTable {
    pub fn iid(word_length: u32, max_errors: u32, p: f64) -> Result<Self> {
        range_max(word_length, max_errors)?;
        check_probability(p)?;
        Ok(Self {
            mode: TableMode::Iid,
            word_length,
            max_errors,
            probabilities: vec![p; word_length as usize],
            metadata: None,
        })
    }

    pub fn per_bit(word_length: u32, max_errors: u32, probabilities: Vec<f64>) -> Result<Self> {
        range_max(word_length, max_errors)?;
        if probabilities.len() != word_length as usize {
            return Err(VdbError::DimensionMismatch(format!(
                "{} probabilities for L = {word_length}",
                probabilities.len()
            )));
        }
        for &p in &probabilities {
            check_probability(p)?;
        }
        Ok(Self {
            mode: TableMode::PerBit,
            word_length,
            max_errors,
            probabilities,
            metadata: None,
        })
    }

    pub fn mode(&self) -> TableMode {
        self.mode
    }

    pub fn word_length(&self) -> u32 {
        self.word_length
    }

    pub fn max_errors(&self) -> u32 {
        self.max_errors
    }

    /// The shared probability of an i.i.d. table.
    pub fn p(&self) -> Option<f64> {
        match self.mode {
            TableMode::Iid => self.probabilities.first().copied(),
            TableMode::PerBit => None,
        }
    }

    /// Per-bit probabilities `p_0..p_{L-1}`; equal entries for i.i.d. tables.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn metadata(&self) -> Option<&SolverMetadata> {
        self.metadata.as_ref()
    }

    pub fn with_metadata(mut self, metadata: SolverMetadata) -> Self {
        self.metadata = Some(metadata);
        self
    }

    /// The `vdb-table-v1` text form.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "format={TABLE_FORMAT}\nL={}\nk={}\nmode={}\n",
            self.word_length, self.max_errors, self.mode
        );
        match self.mode {
            TableMode::Iid => out.push_str(&format!("p={}\n", self.probabilities[0])),
            TableMode::PerBit => {
                for (i, p) in self.probabilities.iter().enumerate() {
                    out.push_str(&format!("p_{i}={p}\n"));
                }
            }
        }
        if let Some(meta) = &self.metadata {
            out.push_str(&format!("# grid={}\n# tol={}\n", meta.grid, meta.tol));
            out.push_str(&format!("# locally_maximal={}\n", meta.locally_maximal));
            out.push_str(&format!("# sweeps={}\n", meta.sweeps));
            for (j, margin) in meta.margins.iter().enumerate() {
                out.push_str(&format!("# margin m={}: {margin}\n", j + 1));
            }
        }
        out
    }

    /// Parses the `vdb-table-v1` text form. Comment lines are ignored, so
    /// solver metadata is not restored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut header = Header::default();
        let mut p: Option<(usize, f64)> = None;
        let mut per_bit: Vec<(usize, usize, f64)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| VdbError::Parse {
                line: line_no,
                message: format!("expected `key=value`, found `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let prob = || {
                parse_probability(value).map_err(|message| VdbError::Parse {
                    line: line_no,
                    message,
                })
            };
            if key == "p" {
                p = Some((line_no, prob()?));
            } else if let Some(idx) = key.strip_prefix("p_") {
                let i: usize = idx.parse().map_err(|_| VdbError::Parse {
                    line: line_no,
                    message: format!("invalid bit index `{idx}`"),
                })?;
                per_bit.push((line_no, i, prob()?));
            } else {
                header.accept(line_no, key, value)?;
            }
        }
        let (word_length, max_errors) = header.finish(TABLE_FORMAT)?;
        let (mode_line, mode) = header.mode.clone().ok_or_else(|| VdbError::Parse {
            line: 1,
            message: "missing mode header".into(),
        })?;
        let mode: TableMode = mode.parse().map_err(|e: VdbError| VdbError::Parse {
            line: mode_line,
            message: e.to_string(),
        })?;
        let at = |line: usize| {
            move |e: VdbError| VdbError::Parse {
                line,
                message: e.to_string(),
            }
        };
        match mode {
            TableMode::Iid => {
                if let Some(&(line, _, _)) = per_bit.first() {
                    return Err(VdbError::Parse {
                        line,
                        message: "per-bit entry in an iid table".into(),
                    });
                }
                let (line, p) = p.ok_or_else(|| VdbError::Parse {
                    line: mode_line,
                    message: "missing p".into(),
                })?;
                Self::iid(word_length, max_errors, p).map_err(at(line))
            }
            TableMode::PerBit => {
                if let Some((line, _)) = p {
                    return Err(VdbError::Parse {
                        line,
                        message: "shared p in a perbit table".into(),
                    });
                }
                let mut probs = vec![None; word_length as usize];
                for &(line, i, value) in &per_bit {
                    let slot = probs.get_mut(i).ok_or_else(|| VdbError::Parse {
                        line,
                        message: format!("bit index {i} outside 0..{word_length}"),
                    })?;
                    if slot.is_some() {
                        return Err(VdbError::Parse {
                            line,
                            message: format!("duplicate p_{i}"),
                        });
                    }
                    *slot = Some(value);
                }
                let probs = probs
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| {
                        v.ok_or_else(|| VdbError::Parse {
                            line: mode_line,
                            message: format!("missing p_{i}"),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::per_bit(word_length, max_errors, probs).map_err(at(mode_line))
            }
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return param(format!("probability {p} outside [0, 1]"));
    }
    Ok(())
}

/// Probability that the error pattern is exactly `mask` when bit `i` errs
/// independently with probability `p[i]`.
pub fn placement_probability(mask: u32, p: &[f64]) -> f64 {
    p.iter()
        .enumerate()
        .map(|(i, &pi)| if (mask >> i) & 1 == 1 { pi } else { 1.0 - pi })
        .product()
}

/// `sum over e in masks of prod_i p_i^e_i (1 - p_i)^(1 - e_i)`, with
/// compensated summation.
pub fn constraint_lhs(masks: &[u32], p: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &e in masks {
        let term = placement_probability(e, p);
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Final bracket width.
    pub tol: f64,
    /// Scan step used to find the first infeasible point.
    pub grid: f64,
    pub max_sweeps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            grid: 1e-3,
            max_sweeps: 10_000,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return param(format!("tolerance {} outside (0, 1)", self.tol));
        }
        if !(self.grid > 0.0 && self.grid <= 1.0) {
            return param(format!("grid step {} outside (0, 1]", self.grid));
        }
        Ok(())
    }
}

fn check_compatible(sets: &PlacementSets, c: &TailConstraint) -> Result<()> {
    if sets.word_length() != c.word_length() || sets.max_errors() != c.max_errors() {
        return Err(VdbError::DimensionMismatch(format!(
            "sets for L={}, k={} against constraint for L={}, k={}",
            sets.word_length(),
            sets.max_errors(),
            c.word_length(),
            c.max_errors()
        )));
    }
    Ok(())
}

fn margins(sets: &PlacementSets, c: &TailConstraint, p: &[f64]) -> Vec<f64> {
    sets.iter()
        .map(|(m, masks)| c.bound(m) - constraint_lhs(masks, p))
        .collect()
}

fn feasible(sets: &PlacementSets, c: &TailConstraint, p: &[f64]) -> bool {
    sets.iter()
        .all(|(m, masks)| constraint_lhs(masks, p) <= c.bound(m))
}

/// Largest value `v >= start` reachable by raising `set(v)` from `start`
/// without leaving the feasible region, to within `opts.tol`.
fn ascend(start: f64, opts: &SolveOptions, mut is_feasible: impl FnMut(f64) -> bool) -> f64 {
    let mut lo = start;
    let mut hi = None;
    let mut step = 1u64;
    loop {
        let v = (start + step as f64 * opts.grid).min(1.0);
        if v <= lo {
            break;
        }
        if is_feasible(v) {
            lo = v;
            if v >= 1.0 {
                break;
            }
            step += 1;
        } else {
            hi = Some(v);
            break;
        }
    }
    let Some(mut hi) = hi else {
        return lo;
    };
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        if is_feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn is_blocked(v: f64, tol: f64, is_feasible: impl Fn(f64) -> bool) -> bool {
    let probe = v + 4.0 * tol;
    probe > 1.0 || !is_feasible(probe)
}

/// Largest shared error probability `p` for which every constraint holds,
/// taken on the feasible interval that starts at `p = 0`.
pub fn solve_iid(
    sets: &PlacementSets,
    c: &TailConstraint,
    opts: &SolveOptions,
) -> Result<CodeTable> {
    check_compatible(sets, c)?;
    opts.validate()?;
    let l = sets.word_length() as usize;
    let check = |p: f64| feasible(sets, c, &vec![p; l]);
    if !check(0.0) {
        return Err(VdbError::Infeasible(
            "constraints fail at zero error probability".into(),
        ));
    }
    let p = ascend(0.0, opts, check);
    let probs = vec![p; l];
    let margins = margins(sets, c, &probs);
    if margins.iter().any(|&mg| mg < 0.0) {
        return Err(VdbError::Infeasible(format!(
            "solution p = {p} fails re-verification"
        )));
    }
    let locally_maximal = p >= 1.0 || is_blocked(p, opts.tol, check);
    Ok(
        CodeTable::iid(sets.word_length(), sets.max_errors(), p)?.with_metadata(SolverMetadata {
            grid: opts.grid,
            tol: opts.tol,
            margins,
            locally_maximal,
            sweeps: 1,
        }),
    )
}

/// A coordinate-wise locally maximal vector of per-bit error probabilities.
///
/// Starts from the i.i.d. solution and repeatedly raises each `p_i` (from
/// the most significant bit down) as far as it goes with the others held
/// fixed, until a full sweep raises no coordinate by more than `tol`.
pub fn solve_perbit(
    sets: &PlacementSets,
    c: &TailConstraint,
    opts: &SolveOptions,
) -> Result<CodeTable> {
    let start = solve_iid(sets, c, opts)?;
    let l = sets.word_length() as usize;
    let mut p = start.probabilities().to_vec();
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut largest_step = 0.0f64;
        for i in (0..l).rev() {
            let current = p[i];
            let mut trial = p.clone();
            let raised = ascend(current, opts, |v| {
                trial[i] = v;
                feasible(sets, c, &trial)
            });
            largest_step = largest_step.max(raised - current);
            p[i] = raised;
        }
        if largest_step <= opts.tol || sweeps >= opts.max_sweeps {
            break;
        }
    }
    let margins = margins(sets, c, &p);
    if margins.iter().any(|&mg| mg < 0.0) {
        return Err(VdbError::Infeasible(
            "per-bit solution fails re-verification".into(),
        ));
    }
    let locally_maximal = (0..l).all(|i| {
        p[i] >= 1.0
            || is_blocked(p[i], opts.tol, |v| {
                let mut trial = p.clone();
                trial[i] = v;
                feasible(sets, c, &trial)
            })
    });
    Ok(
        CodeTable::per_bit(sets.word_length(), sets.max_errors(), p)?.with_metadata(
            SolverMetadata {
                grid: opts.grid,
                tol: opts.tol,
                margins,
                locally_maximal,
                sweeps,
            },
        ),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// `(m, F(m) - lhs(m))` in ascending `m`.
    pub margins: Vec<(u64, f64)>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn worst(&self) -> Option<(u64, f64)> {
        self.margins
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Per-`m` slack of `table` against `c`. Passes when no margin is below
/// `-VERIFY_SLACK`.
pub fn verify_table(
    sets: &PlacementSets,
    c: &TailConstraint,
    table: &CodeTable,
) -> Result<VerifyReport> {
    check_compatible(sets, c)?;
    if table.word_length() != c.word_length() || table.max_errors() != c.max_errors() {
        return Err(VdbError::DimensionMismatch(format!(
            "table for L={}, k={} against constraint for L={}, k={}",
            table.word_length(),
            table.max_errors(),
            c.word_length(),
            c.max_errors()
        )));
    }
    let margins: Vec<(u64, f64)> = sets
        .iter()
        .map(|(m, masks)| (m, c.bound(m) - constraint_lhs(masks, table.probabilities())))
        .collect();
    let pass = margins.iter().all(|&(_, mg)| mg >= -VERIFY_SLACK);
    Ok(VerifyReport { margins, pass })
}
