//! Elementary (radius-1, two-state) cellular automata on a finite line.
//!
//! Cells outside the line are permanently white, so a configuration of
//! width `n` is just an `n`-bit integer. Cell 1 is the leftmost cell and the
//! most significant bit of that integer, which keeps printed bitstrings in
//! the same order as the rows of a space-time diagram.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

/// Widest line a [`Configuration`] can hold.
pub const MAX_WIDTH: u32 = 64;

/// Widest line [`preimages`] will enumerate exhaustively.
pub const MAX_ENUMERATION_WIDTH: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EcaError {
    #[error("rule number {0} is outside 0..=255")]
    RuleOutOfRange(u32),
    #[error("width {0} is outside 1..={MAX_WIDTH}")]
    WidthOutOfRange(u32),
    #[error("index {index} does not fit in {width} cells")]
    IndexOutOfRange { index: u64, width: u32 },
    #[error("invalid cell {found:?} at position {position} (expected '0' or '1')")]
    InvalidCell { position: usize, found: char },
    #[error("width mismatch: expected {expected} cells, got {found}")]
    WidthMismatch { expected: u32, found: u32 },
    #[error("exhaustive enumeration of 2^{width} configurations exceeds the limit of 2^{limit}")]
    EnumerationTooLarge { width: u32, limit: u32 },
}

/// Output bit for each of the eight `(left, center, right)` neighborhoods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RuleTable {
    number: u8,
    outputs: [u8; 8],
}

impl RuleTable {
    /// Decodes a Wolfram rule number: the output for neighborhood
    /// `(l, c, r)` is bit `4l + 2c + r` of `number`.
    pub fn from_number(number: u32) -> Result<Self, EcaError> {
        let byte = u8::try_from(number).map_err(|_| EcaError::RuleOutOfRange(number))?;
        let mut outputs = [0u8; 8];
        for (nb, out) in outputs.iter_mut().enumerate() {
            *out = (byte >> nb) & 1;
        }
        Ok(Self {
            number: byte,
            outputs,
        })
    }

    pub fn number(&self) -> u8 {
        self.number
    }

    /// Output for a single neighborhood; each argument must be 0 or 1.
    pub fn output(&self, left: u8, center: u8, right: u8) -> u8 {
        debug_assert!(left <= 1 && center <= 1 && right <= 1);
        self.outputs[usize::from(4 * left + 2 * center + right)]
    }

    /// The eight outputs indexed by `4l + 2c + r`.
    pub fn outputs(&self) -> &[u8; 8] {
        &self.outputs
    }

    /// Re-packs the output bits into a rule number.
    pub fn to_number(&self) -> u8 {
        self.outputs
            .iter()
            .enumerate()
            .fold(0u8, |acc, (nb, &bit)| acc | (bit << nb))
    }
}

/// Same as [`RuleTable::from_number`].
pub fn rule_table(rule_number: u32) -> Result<RuleTable, EcaError> {
    RuleTable::from_number(rule_number)
}

/// A line of `width` black (1) or white (0) cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    // Field order gives Ord by (width, encoding).
    width: u32,
    bits: u64,
}

impl Configuration {
    /// All-white line.
    pub fn zeros(width: u32) -> Result<Self, EcaError> {
        check_width(width)?;
        Ok(Self { width, bits: 0 })
    }

    /// Builds a configuration from its integer encoding.
    pub fn decode(index: u64, width: u32) -> Result<Self, EcaError> {
        check_width(width)?;
        if index > width_mask(width) {
            return Err(EcaError::IndexOutOfRange { index, width });
        }
        Ok(Self { width, bits: index })
    }

    /// Builds a configuration from cell values, leftmost first.
    pub fn from_cells(cells: &[bool]) -> Result<Self, EcaError> {
        let width = u32::try_from(cells.len()).map_err(|_| EcaError::WidthOutOfRange(u32::MAX))?;
        check_width(width)?;
        let bits = cells
            .iter()
            .fold(0u64, |acc, &black| (acc << 1) | u64::from(black));
        Ok(Self { width, bits })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Integer encoding with cell 1 as the most significant bit.
    pub fn encode(&self) -> u64 {
        self.bits
    }

    /// Value of cell `position` (1-based, leftmost is 1).
    pub fn cell(&self, position: u32) -> Option<bool> {
        if position == 0 || position > self.width {
            return None;
        }
        Some((self.bits >> (self.width - position)) & 1 == 1)
    }

    /// Cells from left to right.
    pub fn cells(&self) -> impl Iterator<Item = bool> + '_ {
        (1..=self.width).map(move |p| (self.bits >> (self.width - p)) & 1 == 1)
    }

    pub fn count_black(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Space-time diagram row: `#` for black, `.` for white.
    pub fn render(&self) -> String {
        self.cells().map(|b| if b { '#' } else { '.' }).collect()
    }

    /// Parses a `0`/`1` string and checks it against an expected width.
    pub fn parse_with_width(text: &str, width: u32) -> Result<Self, EcaError> {
        let config: Self = text.parse()?;
        if config.width != width {
            return Err(EcaError::WidthMismatch {
                expected: width,
                found: config.width,
            });
        }
        Ok(config)
    }
}

/// Same as [`Configuration::encode`].
pub fn encode(config: &Configuration) -> u64 {
    config.encode()
}

/// Same as [`Configuration::decode`].
pub fn decode(index: u64, width: u32) -> Result<Configuration, EcaError> {
    Configuration::decode(index, width)
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for black in self.cells() {
            f.write_str(if black { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Configuration {
    type Err = EcaError;

    /// Positions in [`EcaError::InvalidCell`] are 1-based character positions.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = 0u64;
        let mut width = 0u32;
        for (i, ch) in s.chars().enumerate() {
            let bit = match ch {
                '0' => 0,
                '1' => 1,
                other => {
                    return Err(EcaError::InvalidCell {
                        position: i + 1,
                        found: other,
                    })
                }
            };
            width += 1;
            if width > MAX_WIDTH {
                return Err(EcaError::WidthOutOfRange(s.chars().count() as u32));
            }
            bits = (bits << 1) | bit;
        }
        check_width(width)?;
        Ok(Self { width, bits })
    }
}

fn check_width(width: u32) -> Result<(), EcaError> {
    if width == 0 || width > MAX_WIDTH {
        return Err(EcaError::WidthOutOfRange(width));
    }
    Ok(())
}

fn width_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// One synchronous update with white cells beyond both ends.
pub fn step(config: &Configuration, rule: &RuleTable) -> Configuration {
    Configuration {
        width: config.width,
        bits: step_bits(config.bits, config.width, rule),
    }
}

/// Bit-parallel update of an encoded line.
///
/// At bit position `p` (counted from the least significant end), the left
/// neighbor is bit `p + 1` and the right neighbor is bit `p - 1`.
pub(crate) fn step_bits(bits: u64, width: u32, rule: &RuleTable) -> u64 {
    let mask = width_mask(width);
    let center = bits;
    let left = bits >> 1;
    let right = (bits << 1) & mask;
    let mut next = 0u64;
    for (nb, &out) in rule.outputs.iter().enumerate() {
        if out == 0 {
            continue;
        }
        let l = if nb & 4 != 0 { left } else { !left };
        let c = if nb & 2 != 0 { center } else { !center };
        let r = if nb & 1 != 0 { right } else { !right };
        next |= l & c & r;
    }
    next & mask
}

/// Applies [`step`] `steps` times.
pub fn evolve(config: &Configuration, rule: &RuleTable, steps: u32) -> Configuration {
    Configuration {
        width: config.width,
        bits: evolve_bits(config.bits, config.width, rule, steps),
    }
}

pub(crate) fn evolve_bits(mut bits: u64, width: u32, rule: &RuleTable, steps: u32) -> u64 {
    for _ in 0..steps {
        bits = step_bits(bits, width, rule);
    }
    bits
}

/// The initial row followed by each of the `steps` evolved rows.
pub fn history(config: &Configuration, rule: &RuleTable, steps: u32) -> Vec<Configuration> {
    let mut rows = Vec::with_capacity(steps as usize + 1);
    let mut current = *config;
    rows.push(current);
    for _ in 0..steps {
        current = step(&current, rule);
        rows.push(current);
    }
    rows
}

/// Every configuration that evolves to `target` after `steps` updates,
/// sorted by encoding. Plain exhaustive search over all `2^width` lines.
pub fn preimages(
    target: &Configuration,
    rule: &RuleTable,
    steps: u32,
) -> Result<Vec<Configuration>, EcaError> {
    let width = target.width;
    if width > MAX_ENUMERATION_WIDTH {
        return Err(EcaError::EnumerationTooLarge {
            width,
            limit: MAX_ENUMERATION_WIDTH,
        });
    }
    let goal = target.bits;
    Ok((0..(1u64 << width))
        .filter(|&candidate| evolve_bits(candidate, width, rule, steps) == goal)
        .map(|bits| Configuration { width, bits })
        .collect())
}
