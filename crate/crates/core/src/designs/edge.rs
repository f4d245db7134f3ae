//! 8-bit dual edge detector with an optional reduction-triggered
//! output-complement trojan.
//!
//! The golden update is `out' = q ^ in; q' = in`, so each output bit marks
//! an input bit that changed between consecutive samples. The trojan reads
//! the registered output combinationally (the value before the clock edge),
//! runs a reduction over it, and XORs the widened trigger bit into the new
//! output.

use crate::bits::{extend, BitVec, ExtendMode};
use crate::trojan::{TriggerSpec, TriggerState};

pub const WIDTH: u8 = 8;

/// Register file: previous input sample and the registered output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeState {
    pub q: BitVec,
    pub out: BitVec,
}

impl Default for EdgeState {
    fn default() -> Self {
        Self {
            q: BitVec::zero(WIDTH),
            out: BitVec::zero(WIDTH),
        }
    }
}

#[derive(Clone, Debug)]
struct EdgeTrojan {
    trigger: TriggerSpec,
    mode: ExtendMode,
    counter: TriggerState,
}

/// Outputs of one clock step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeStep {
    pub out: BitVec,
    pub fired: bool,
}

/// Golden or trojaned dual edge detector.
#[derive(Clone, Debug)]
pub struct EdgeDetector {
    state: EdgeState,
    trojan: Option<EdgeTrojan>,
}

impl EdgeDetector {
    pub fn golden() -> Self {
        Self {
            state: EdgeState::default(),
            trojan: None,
        }
    }

    pub fn with_trojan(trigger: TriggerSpec, mode: ExtendMode) -> Self {
        Self {
            state: EdgeState::default(),
            trojan: Some(EdgeTrojan {
                trigger,
                mode,
                counter: TriggerState::default(),
            }),
        }
    }

    /// Overwrite the register file; used to drive the model from a known
    /// starting point.
    pub fn set_state(&mut self, state: EdgeState) {
        self.state = state;
    }

    pub fn state(&self) -> EdgeState {
        self.state
    }

    /// Sample one 8-bit input on the clock edge.
    pub fn step(&mut self, input: u8) -> EdgeStep {
        let input = BitVec::new(WIDTH, u64::from(input));
        let mut next_out = self.state.q.xor(input);
        let mut fired = false;
        if let Some(t) = self.trojan.as_mut() {
            fired = t
                .trigger
                .step(&mut t.counter, self.state.out)
                .expect("reduction trigger is total");
            let inject = extend(fired, WIDTH, t.mode).expect("width 8 is in range");
            next_out = next_out.xor(inject);
        }
        self.state = EdgeState {
            q: input,
            out: next_out,
        };
        EdgeStep {
            out: next_out,
            fired,
        }
    }
}
