//! Trigger and payload descriptions shared by every trojaned design.
//!
//! A trigger watches one word of design state and decides when the payload
//! fires; the payload says what the firing corrupts. The counter threshold
//! turns any trigger into a time bomb: raw activations are counted and the
//! payload is delivered exactly once, on the N-th occurrence. At the
//! default threshold of 1 the trigger is purely combinational and fires on
//! every raw activation.

use crate::bits::{BitVec, ExtendMode, ReductionOp};
use crate::Error;

/// What the trigger looks at to decide a raw activation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriggerKind {
    /// Raw activation when the reduction of the observed word is 1.
    Reduction(ReductionOp),
    /// Raw activation when the given 1-based bit of the observed word is 1.
    ResetBit(u8),
}

/// Trigger condition plus the activation threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TriggerSpec {
    pub kind: TriggerKind,
    pub threshold: u32,
}

impl TriggerSpec {
    pub fn reduction(op: ReductionOp) -> Self {
        Self {
            kind: TriggerKind::Reduction(op),
            threshold: 1,
        }
    }

    pub fn reset_bit(index: u8) -> Self {
        Self {
            kind: TriggerKind::ResetBit(index),
            threshold: 1,
        }
    }

    /// Delay delivery until the n-th raw activation.
    pub fn after(mut self, n: u32) -> Self {
        self.threshold = n;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.threshold == 0 {
            return Err(Error::field("threshold", "must be at least 1"));
        }
        if let TriggerKind::ResetBit(0) = self.kind {
            return Err(Error::field("trigger_bit", "bit positions are 1-based"));
        }
        Ok(())
    }

    /// Advance the occurrence counter for one observation and report whether
    /// the payload fires on this step.
    ///
    /// With threshold 1 the result is the raw trigger value itself; with a
    /// larger threshold the payload fires only on the exact N-th raw
    /// occurrence and never again.
    pub fn step(&self, state: &mut TriggerState, observed: BitVec) -> Result<bool, Error> {
        let raw = match self.kind {
            TriggerKind::Reduction(op) => observed.reduce(op),
            TriggerKind::ResetBit(index) => {
                if index == 0 || index > observed.width() {
                    return Err(Error::TriggerIndexOutOfRange {
                        index,
                        width: observed.width(),
                    });
                }
                observed.bit(index - 1)
            }
        };
        if raw {
            state.occurrences += 1;
        }
        Ok(raw && (self.threshold <= 1 || state.occurrences == u64::from(self.threshold)))
    }
}

/// Running occurrence count for one trigger instance.
///
/// Monotonically non-decreasing within a run; functional design resets do
/// not touch it (the counter is the trojan's hidden state).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TriggerState {
    occurrences: u64,
}

impl TriggerState {
    pub fn occurrences(&self) -> u64 {
        self.occurrences
    }
}

/// What a firing trojan does to its host design.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PayloadSpec {
    /// XOR the widened trigger bit into the registered output word.
    ComplementOutput { mode: ExtendMode },
    /// Load the all-zero state instead of the seed on reset.
    ForceAllZeroOnReset,
    /// Exchange two bits of one emitted packet byte.
    SwapPacketBits {
        byte_index: u8,
        bit_i: u8,
        bit_j: u8,
    },
    /// Jump to an absorbing state that ignores all further input.
    TrapState,
    /// Re-shift the previous register bit in place of incoming data bits.
    DuplicateDataBit { data_index: u8, repeat_count: u8 },
}

impl PayloadSpec {
    pub fn validate(&self) -> Result<(), Error> {
        match *self {
            PayloadSpec::ComplementOutput { .. }
            | PayloadSpec::ForceAllZeroOnReset
            | PayloadSpec::TrapState => Ok(()),
            PayloadSpec::SwapPacketBits {
                byte_index,
                bit_i,
                bit_j,
            } => {
                if byte_index >= 3 {
                    return Err(Error::field("byte_index", "packet has bytes 0..=2"));
                }
                if bit_i >= 8 || bit_j >= 8 {
                    return Err(Error::field("swap bits", "bit positions are 0..=7"));
                }
                Ok(())
            }
            PayloadSpec::DuplicateDataBit {
                data_index,
                repeat_count,
            } => {
                if !(1..=8).contains(&data_index) {
                    return Err(Error::field("dup_bit", "data bit positions are 1..=8"));
                }
                if repeat_count == 0 {
                    return Err(Error::field("dup_repeat", "must be at least 1"));
                }
                if u32::from(data_index) + u32::from(repeat_count) - 1 > 8 {
                    return Err(Error::field(
                        "dup_repeat",
                        "duplication would run past data bit 8",
                    ));
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stimulus::SplitMix64;
    use proptest::prelude::*;

    fn xor_spec(n: u32) -> TriggerSpec {
        TriggerSpec::reduction(ReductionOp::Xor).after(n)
    }

    #[test]
    fn fires_immediately_at_threshold_one() {
        let spec = TriggerSpec::reduction(ReductionOp::Xor);
        let mut st = TriggerState::default();
        assert!(spec.step(&mut st, BitVec::new(8, 0x01)).unwrap());
        assert_eq!(st.occurrences(), 1);
    }

    #[test]
    fn quiet_when_raw_is_zero() {
        let spec = TriggerSpec::reduction(ReductionOp::And);
        let mut st = TriggerState::default();
        assert!(!spec.step(&mut st, BitVec::new(8, 0xFE)).unwrap());
        assert_eq!(st.occurrences(), 0);
    }

    #[test]
    fn counter_gated_fires_exactly_on_nth() {
        let spec = TriggerSpec::reduction(ReductionOp::Or).after(3);
        let mut st = TriggerState::default();
        // two prior raw occurrences
        assert!(!spec.step(&mut st, BitVec::new(8, 0x10)).unwrap());
        assert!(!spec.step(&mut st, BitVec::new(8, 0x10)).unwrap());
        // third fires
        assert!(spec.step(&mut st, BitVec::new(8, 0x10)).unwrap());
        assert_eq!(st.occurrences(), 3);
        // fourth raw occurrence does not re-fire
        assert!(!spec.step(&mut st, BitVec::new(8, 0x10)).unwrap());
        assert_eq!(st.occurrences(), 4);
    }

    #[test]
    fn reset_bit_is_one_based() {
        let spec = TriggerSpec::reset_bit(10);
        let mut st = TriggerState::default();
        let armed = BitVec::new(32, 1 << 9);
        assert!(spec.step(&mut st, armed).unwrap());
        let idle = BitVec::new(32, !(1u64 << 9) & 0xFFFF_FFFF);
        assert!(!spec.step(&mut st, idle).unwrap());
    }

    #[test]
    fn reset_bit_out_of_range_is_rejected() {
        let spec = TriggerSpec::reset_bit(33);
        let mut st = TriggerState::default();
        assert!(matches!(
            spec.step(&mut st, BitVec::new(32, 0)),
            Err(Error::TriggerIndexOutOfRange {
                index: 33,
                width: 32
            })
        ));
    }

    #[test]
    fn payload_bounds() {
        assert!(PayloadSpec::SwapPacketBits {
            byte_index: 0,
            bit_i: 0,
            bit_j: 1
        }
        .validate()
        .is_ok());
        assert!(PayloadSpec::SwapPacketBits {
            byte_index: 3,
            bit_i: 0,
            bit_j: 1
        }
        .validate()
        .is_err());
        assert!(PayloadSpec::DuplicateDataBit {
            data_index: 8,
            repeat_count: 1
        }
        .validate()
        .is_ok());
        assert!(PayloadSpec::DuplicateDataBit {
            data_index: 8,
            repeat_count: 2
        }
        .validate()
        .is_err());
        assert!(PayloadSpec::DuplicateDataBit {
            data_index: 0,
            repeat_count: 1
        }
        .validate()
        .is_err());
    }

    proptest! {
        /// At threshold 1 the fire output equals the raw trigger for every input.
        #[test]
        fn threshold_one_is_identity(values in proptest::collection::vec(any::<u64>(), 1..200)) {
            for op in ReductionOp::ALL {
                let spec = TriggerSpec::reduction(op);
                let mut st = TriggerState::default();
                for &v in &values {
                    let w = BitVec::new(32, v);
                    prop_assert_eq!(spec.step(&mut st, w).unwrap(), w.reduce(op));
                }
            }
        }

        /// With a threshold above 1 the trigger fires at most once per run.
        #[test]
        fn one_shot_above_threshold_one(seed: u64, n in 2u32..6) {
            let spec = xor_spec(n);
            let mut st = TriggerState::default();
            let mut rng = SplitMix64::new(seed);
            let mut fires = 0;
            for _ in 0..500 {
                if spec.step(&mut st, BitVec::new(8, rng.next_u64())).unwrap() {
                    fires += 1;
                }
            }
            prop_assert!(fires <= 1);
        }

        /// The occurrence count always equals an independent recount of raw
        /// trigger values.
        #[test]
        fn occurrences_match_recount(seed: u64) {
            let spec = xor_spec(4);
            let mut st = TriggerState::default();
            let mut rng = SplitMix64::new(seed);
            let mut recount = 0u64;
            for _ in 0..300 {
                let w = BitVec::new(8, rng.next_u64());
                spec.step(&mut st, w).unwrap();
                if w.reduce(ReductionOp::Xor) {
                    recount += 1;
                }
                prop_assert_eq!(st.occurrences(), recount);
            }
        }
    }
}
