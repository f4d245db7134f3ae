//! Galois linear feedback shift register with an optional reset-time
//! all-zero injection trojan.
//!
//! Update convention: feedback is the lowest bit; the word shifts right by
//! one; feedback re-enters at the top position and is XORed into every
//! lower tap. Taps are 1-based positions whose maximum equals the register
//! width, so `{1, 2, 22, 32}` realizes x^32 + x^22 + x^2 + x + 1.
//!
//! The all-zero word is a fixed point of the update, which is exactly what
//! the trojan exploits: on a reset that finds a chosen register bit high it
//! loads zero instead of the seed, and the register never escapes. A
//! trapped register also rides through later resets; the corrupting load is
//! wired into the reset path itself, so once taken it keeps winning.

use crate::bits::BitVec;
use crate::trojan::{TriggerKind, TriggerSpec, TriggerState};
use crate::Error;

/// Register width, tap set and reset seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LfsrParams {
    pub width: u8,
    /// 1-based tap positions; must include the width itself.
    pub taps: Vec<u8>,
    pub seed: u64,
}

impl Default for LfsrParams {
    fn default() -> Self {
        Self {
            width: 32,
            taps: vec![1, 2, 22, 32],
            seed: 1,
        }
    }
}

impl LfsrParams {
    pub fn new(width: u8, taps: Vec<u8>, seed: u64) -> Self {
        Self { width, taps, seed }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(2..=64).contains(&self.width) {
            return Err(Error::field("width", "register width must be in 2..=64"));
        }
        if self.taps.is_empty() {
            return Err(Error::field("taps", "at least one tap is required"));
        }
        let mut seen = 0u64;
        for &t in &self.taps {
            if t == 0 || t > self.width {
                return Err(Error::field(
                    "taps",
                    format!("tap {t} outside 1..={}", self.width),
                ));
            }
            if seen >> (t - 1) & 1 == 1 {
                return Err(Error::field("taps", format!("tap {t} repeated")));
            }
            seen |= 1 << (t - 1);
        }
        if self.taps.iter().max() != Some(&self.width) {
            return Err(Error::field(
                "taps",
                "the highest tap must equal the register width",
            ));
        }
        if self.masked_seed() == 0 {
            return Err(Error::field("seed", "seed must be nonzero"));
        }
        Ok(())
    }

    fn word_mask(&self) -> u64 {
        if self.width == 64 {
            u64::MAX
        } else {
            (1u64 << self.width) - 1
        }
    }

    fn masked_seed(&self) -> u64 {
        self.seed & self.word_mask()
    }

    /// XOR mask for the taps below the top position.
    fn low_tap_mask(&self) -> u64 {
        self.taps
            .iter()
            .filter(|&&t| t < self.width)
            .fold(0u64, |m, &t| m | 1 << (t - 1))
    }

    /// One Galois update of a raw register value.
    pub fn step_value(&self, value: u64) -> u64 {
        let feedback = value & 1;
        let mut next = value >> 1;
        if feedback == 1 {
            next |= 1 << (self.width - 1);
            next ^= self.low_tap_mask();
        }
        next
    }
}

#[derive(Clone, Debug)]
struct LfsrTrojan {
    trigger: TriggerSpec,
    counter: TriggerState,
}

/// Golden or trojaned LFSR instance.
#[derive(Clone, Debug)]
pub struct Lfsr {
    params: LfsrParams,
    bits: BitVec,
    trojan: Option<LfsrTrojan>,
}

impl Lfsr {
    pub fn golden(params: LfsrParams) -> Result<Self, Error> {
        params.validate()?;
        let bits = BitVec::new(params.width, params.masked_seed());
        Ok(Self {
            params,
            bits,
            trojan: None,
        })
    }

    /// Trojaned instance; the trigger observes the pre-reset register.
    pub fn with_trojan(params: LfsrParams, trigger: TriggerSpec) -> Result<Self, Error> {
        params.validate()?;
        trigger.validate()?;
        if let TriggerKind::ResetBit(index) = trigger.kind {
            if index > params.width {
                return Err(Error::TriggerIndexOutOfRange {
                    index,
                    width: params.width,
                });
            }
        }
        let bits = BitVec::new(params.width, params.masked_seed());
        Ok(Self {
            params,
            bits,
            trojan: Some(LfsrTrojan {
                trigger,
                counter: TriggerState::default(),
            }),
        })
    }

    pub fn params(&self) -> &LfsrParams {
        &self.params
    }

    pub fn state(&self) -> BitVec {
        self.bits
    }

    /// Overwrite the register value; used to drive tests from a known point.
    pub fn set_state(&mut self, value: u64) {
        self.bits = BitVec::new(self.params.width, value);
    }

    /// One shift step. All-zero stays all-zero.
    pub fn step(&mut self) {
        self.bits = BitVec::new(self.params.width, self.params.step_value(self.bits.value()));
    }

    /// Synchronous reset. The golden path reloads the seed. The trojaned
    /// path loads all-zero instead when the trigger fires on the pre-reset
    /// register, and an already-trapped register stays trapped.
    ///
    /// Returns whether the corrupting load fired on this reset.
    pub fn reset(&mut self) -> bool {
        let Some(t) = self.trojan.as_mut() else {
            self.bits = BitVec::new(self.params.width, self.params.masked_seed());
            return false;
        };
        if self.bits.is_zero() {
            return false;
        }
        let fired = t
            .trigger
            .step(&mut t.counter, self.bits)
            .expect("trigger index validated at construction");
        self.bits = if fired {
            BitVec::zero(self.params.width)
        } else {
            BitVec::new(self.params.width, self.params.masked_seed())
        };
        fired
    }
}

/// Brute-force period of the state sequence starting at the seed.
///
/// Only practical for small registers; widths above 24 are rejected.
pub fn enumerate_period(params: &LfsrParams) -> Result<u64, Error> {
    params.validate()?;
    if params.width > 24 {
        return Err(Error::field(
            "width",
            "period enumeration is limited to widths up to 24",
        ));
    }
    let start = params.masked_seed();
    let limit = 1u64 << params.width;
    let mut value = params.step_value(start);
    let mut period = 1u64;
    while value != start {
        value = params.step_value(value);
        period += 1;
        if period > limit {
            return Err(Error::field(
                "seed",
                "state sequence never returned to seed",
            ));
        }
    }
    Ok(period)
}
