//! Fixed-width bit words and the six Verilog-style unary reduction operators.
//!
//! Everything is plain value math on a `u64` payload. Bit 0 is always the
//! least significant bit; widths are fixed at construction and capped at 64
//! so every signal fits one machine word.

use std::fmt;

use crate::Error;

/// Widest word the simulator handles.
pub const MAX_WIDTH: u8 = 64;

fn mask(width: u8) -> u64 {
    debug_assert!((1..=MAX_WIDTH).contains(&width));
    if width == MAX_WIDTH {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// A fixed-width bit word. Bits at positions `>= width` are always zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitVec {
    bits: u64,
    width: u8,
}

impl BitVec {
    /// Word of `width` bits taken from the low bits of `bits`; anything
    /// above the width is masked off.
    ///
    /// Panics if `width` is 0 or above [`MAX_WIDTH`].
    pub fn new(width: u8, bits: u64) -> Self {
        assert!(
            (1..=MAX_WIDTH).contains(&width),
            "bit width {width} outside 1..=64"
        );
        Self {
            bits: bits & mask(width),
            width,
        }
    }

    pub fn zero(width: u8) -> Self {
        Self::new(width, 0)
    }

    pub fn width(self) -> u8 {
        self.width
    }

    pub fn value(self) -> u64 {
        self.bits
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    pub fn is_all_ones(self) -> bool {
        self.bits == mask(self.width)
    }

    pub fn popcount(self) -> u32 {
        self.bits.count_ones()
    }

    /// Bit at `index`, 0 = LSB. Panics when the index is outside the width.
    pub fn bit(self, index: u8) -> bool {
        assert!(
            index < self.width,
            "bit index {index} outside width {}",
            self.width
        );
        (self.bits >> index) & 1 == 1
    }

    pub fn with_bit(self, index: u8, value: bool) -> Self {
        assert!(index < self.width);
        let bit = 1u64 << index;
        Self {
            bits: if value {
                self.bits | bit
            } else {
                self.bits & !bit
            },
            width: self.width,
        }
    }

    /// Bitwise XOR; both operands must have the same width.
    pub fn xor(self, other: Self) -> Self {
        assert_eq!(self.width, other.width, "xor width mismatch");
        Self {
            bits: self.bits ^ other.bits,
            width: self.width,
        }
    }

    /// Collapse to a single bit with the given reduction operator.
    pub fn reduce(self, op: ReductionOp) -> bool {
        op.apply(self)
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = usize::from(self.width).div_ceil(4);
        write!(f, "{}'h{:0digits$x}", self.width, self.bits)
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// The six unary reduction operators: `&v`, `|v`, `^v` and their complements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReductionOp {
    And,
    Or,
    Xor,
    Nand,
    Nor,
    Xnor,
}

impl ReductionOp {
    pub const ALL: [Self; 6] = [
        Self::And,
        Self::Or,
        Self::Xor,
        Self::Nand,
        Self::Nor,
        Self::Xnor,
    ];

    /// Reduce `v` to one bit.
    pub fn apply(self, v: BitVec) -> bool {
        match self {
            Self::And => v.is_all_ones(),
            Self::Or => !v.is_zero(),
            Self::Xor => v.popcount() % 2 == 1,
            Self::Nand | Self::Nor | Self::Xnor => !self.complement().apply(v),
        }
    }

    /// The operator computing the negation of `self` on every input.
    pub fn complement(self) -> Self {
        match self {
            Self::And => Self::Nand,
            Self::Or => Self::Nor,
            Self::Xor => Self::Xnor,
            Self::Nand => Self::And,
            Self::Nor => Self::Or,
            Self::Xnor => Self::Xor,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::And => "and",
            Self::Or => "or",
            Self::Xor => "xor",
            Self::Nand => "nand",
            Self::Nor => "nor",
            Self::Xnor => "xnor",
        }
    }

    /// Verilog operator spelling: `&`, `|`, `^`, `~&`, `~|`, `~^`.
    pub fn symbol(self) -> &'static str {
        match self {
            Self::And => "&",
            Self::Or => "|",
            Self::Xor => "^",
            Self::Nand => "~&",
            Self::Nor => "~|",
            Self::Xnor => "~^",
        }
    }

    /// Accepts either the lowercase name or the Verilog symbol.
    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|op| op.name() == s || op.symbol() == s)
    }
}

impl fmt::Display for ReductionOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How a single trigger bit widens to a full word when XOR-injected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtendMode {
    /// Copy the bit into every position; a set trigger complements the
    /// whole word it is XORed into.
    Replicate,
    /// Put the bit at position 0 and zeros elsewhere; a set trigger flips
    /// at most the LSB.
    ZeroExtend,
}

/// Widen one bit to `width` bits.
pub fn extend(bit: bool, width: u8, mode: ExtendMode) -> Result<BitVec, Error> {
    if !(1..=MAX_WIDTH).contains(&width) {
        return Err(Error::WidthOutOfRange(width));
    }
    let bits = match (mode, bit) {
        (_, false) => 0,
        (ExtendMode::Replicate, true) => mask(width),
        (ExtendMode::ZeroExtend, true) => 1,
    };
    Ok(BitVec { bits, width })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stimulus::SplitMix64;
    use proptest::prelude::*;

    /// Independent per-bit loop oracle for all six reductions.
    fn reduce_naive(op: ReductionOp, v: BitVec) -> bool {
        let mut acc_and = true;
        let mut acc_or = false;
        let mut acc_xor = false;
        for i in 0..v.width() {
            let b = v.bit(i);
            acc_and &= b;
            acc_or |= b;
            acc_xor ^= b;
        }
        match op {
            ReductionOp::And => acc_and,
            ReductionOp::Or => acc_or,
            ReductionOp::Xor => acc_xor,
            ReductionOp::Nand => !acc_and,
            ReductionOp::Nor => !acc_or,
            ReductionOp::Xnor => !acc_xor,
        }
    }

    #[test]
    fn reduce_identities() {
        assert!(BitVec::new(8, 0xFF).reduce(ReductionOp::And));
        assert!(!BitVec::new(8, 0x00).reduce(ReductionOp::Or));
        // popcount(0b1011_0010) = 4, even parity
        assert!(!BitVec::new(8, 0b1011_0010).reduce(ReductionOp::Xor));
        assert!(BitVec::new(8, 0xFE).reduce(ReductionOp::Nand));
    }

    #[test]
    fn extend_modes() {
        assert_eq!(
            extend(true, 8, ExtendMode::Replicate).unwrap().value(),
            0xFF
        );
        assert_eq!(
            extend(true, 8, ExtendMode::ZeroExtend).unwrap().value(),
            0x01
        );
        assert_eq!(
            extend(false, 8, ExtendMode::Replicate).unwrap().value(),
            0x00
        );
    }

    #[test]
    fn extend_rejects_bad_width() {
        assert!(matches!(
            extend(true, 0, ExtendMode::Replicate),
            Err(Error::WidthOutOfRange(0))
        ));
        assert!(matches!(
            extend(true, 65, ExtendMode::ZeroExtend),
            Err(Error::WidthOutOfRange(65))
        ));
    }

    #[test]
    fn complement_laws_exhaustive_width8() {
        for value in 0..=0xFFu64 {
            let v = BitVec::new(8, value);
            for op in [ReductionOp::And, ReductionOp::Or, ReductionOp::Xor] {
                assert_eq!(op.complement().apply(v), !op.apply(v), "{op} on {v}");
            }
        }
    }

    #[test]
    fn even_width_complement_preserves_parity() {
        let flip = extend(true, 8, ExtendMode::Replicate).unwrap();
        for value in 0..=0xFFu64 {
            let v = BitVec::new(8, value);
            assert_eq!(
                v.xor(flip).reduce(ReductionOp::Xor),
                v.reduce(ReductionOp::Xor)
            );
        }
    }

    #[test]
    fn reduce_matches_naive_loop_width8_exhaustive() {
        for value in 0..=0xFFu64 {
            let v = BitVec::new(8, value);
            for op in ReductionOp::ALL {
                assert_eq!(op.apply(v), reduce_naive(op, v), "{op} on {v}");
            }
        }
    }

    #[test]
    fn reduce_matches_naive_loop_random_width32() {
        let mut rng = SplitMix64::new(0xB17C0DE);
        for _ in 0..100_000 {
            let v = BitVec::new(32, rng.next_u64());
            for op in ReductionOp::ALL {
                assert_eq!(op.apply(v), reduce_naive(op, v), "{op} on {v}");
            }
        }
    }

    #[test]
    fn op_names_round_trip() {
        for op in ReductionOp::ALL {
            assert_eq!(ReductionOp::parse(op.name()), Some(op));
            assert_eq!(ReductionOp::parse(op.symbol()), Some(op));
        }
        assert_eq!(ReductionOp::parse("nope"), None);
    }

    proptest! {
        #[test]
        fn complement_laws_any_width(width in 1u8..=64, bits: u64) {
            let v = BitVec::new(width, bits);
            for op in ReductionOp::ALL {
                prop_assert_eq!(op.complement().apply(v), !op.apply(v));
            }
        }

        #[test]
        fn masked_above_width(width in 1u8..=63, bits: u64) {
            let v = BitVec::new(width, bits);
            prop_assert_eq!(v.value() >> width, 0);
        }
    }
}
