//! Serial receiver (start bit, 8 data bits, odd parity, stop bit) with an
//! optional data-duplication trojan.
//!
//! Data arrives LSB first and assembles in an 8-bit shift register: each
//! accepted bit enters at bit 7 and the first data bit ends up at bit 0
//! after eight shifts. The duplication trojan arms itself when the machine
//! reaches a configured data position; if its trigger fires, that position
//! and the following `repeat - 1` positions re-shift the previously shifted
//! bit while the line bits are consumed and discarded, so frame alignment
//! never changes.

use crate::bits::BitVec;
use crate::trojan::{TriggerSpec, TriggerState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UartFsm {
    Idle,
    /// Waiting for data bit `index` (1-based).
    Data {
        index: u8,
    },
    /// Duplicating into position `index`; `remaining` positions left.
    Dup {
        index: u8,
        remaining: u8,
    },
    Parity,
    Stop,
    Done,
    WaitIdle,
}

/// Which word the duplication trigger inspects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UartTriggerSource {
    /// The output shift register as filled so far in this frame.
    ShiftRegister,
    /// The previous frame's fault flags (parity fault, stop-bit miss).
    PrevFrameFault,
}

/// Fault flags latched at the end of each frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FrameFaults {
    pub parity_fault: bool,
    pub stop_miss: bool,
}

impl FrameFaults {
    /// Two-bit word: bit 0 = parity fault, bit 1 = stop miss.
    pub fn word2(&self) -> BitVec {
        BitVec::new(
            2,
            u64::from(self.parity_fault) | u64::from(self.stop_miss) << 1,
        )
    }
}

#[derive(Clone, Debug)]
struct UartTrojan {
    trigger: TriggerSpec,
    source: UartTriggerSource,
    data_index: u8,
    repeat: u8,
    counter: TriggerState,
}

/// Outputs of one bit-consuming step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UartStep {
    pub done: bool,
    pub byte: Option<u8>,
    pub valid: bool,
    pub fired: bool,
}

/// Golden or trojaned serial receiver.
#[derive(Clone, Debug)]
pub struct UartReceiver {
    fsm: UartFsm,
    shift: u8,
    parity_ok: bool,
    last_in: bool,
    prev_fault: FrameFaults,
    trojan: Option<UartTrojan>,
}

impl UartReceiver {
    pub fn golden() -> Self {
        Self {
            fsm: UartFsm::Idle,
            shift: 0,
            parity_ok: true,
            last_in: false,
            prev_fault: FrameFaults::default(),
            trojan: None,
        }
    }

    /// Duplication trojan at 1-based `data_index`, repeating for `repeat`
    /// consecutive positions.
    pub fn with_trojan(
        trigger: TriggerSpec,
        source: UartTriggerSource,
        data_index: u8,
        repeat: u8,
    ) -> Self {
        debug_assert!((1..=8).contains(&data_index));
        debug_assert!(repeat >= 1 && data_index + repeat - 1 <= 8);
        Self {
            fsm: UartFsm::Idle,
            shift: 0,
            parity_ok: true,
            last_in: false,
            prev_fault: FrameFaults::default(),
            trojan: Some(UartTrojan {
                trigger,
                source,
                data_index,
                repeat,
                counter: TriggerState::default(),
            }),
        }
    }

    pub fn fsm(&self) -> UartFsm {
        self.fsm
    }

    pub fn shift_register(&self) -> u8 {
        self.shift
    }

    /// Functional reset: idle, cleared registers and fault flags. The
    /// trojan's occurrence counter survives.
    pub fn reset(&mut self) {
        self.fsm = UartFsm::Idle;
        self.shift = 0;
        self.parity_ok = true;
        self.last_in = false;
        self.prev_fault = FrameFaults::default();
    }

    fn shift_in(&mut self, bit: bool) {
        self.shift = (self.shift >> 1) | (u8::from(bit) << 7);
        self.last_in = bit;
    }

    fn after_data(index: u8) -> UartFsm {
        if index >= 8 {
            UartFsm::Parity
        } else {
            UartFsm::Data { index: index + 1 }
        }
    }

    /// Consume one line bit.
    pub fn step(&mut self, line: bool) -> UartStep {
        let mut out = UartStep {
            done: false,
            byte: None,
            valid: false,
            fired: false,
        };
        match self.fsm {
            // The bit arriving while in the done state is handled exactly
            // like an idle-line bit, so back-to-back frames work.
            UartFsm::Idle | UartFsm::Done => {
                if line {
                    self.fsm = UartFsm::Idle;
                } else {
                    self.shift = 0;
                    self.fsm = UartFsm::Data { index: 1 };
                }
            }
            UartFsm::Data { index } => {
                let mut dup_run = 0u8;
                if let Some(t) = self.trojan.as_mut() {
                    if index == t.data_index {
                        let observed = match t.source {
                            UartTriggerSource::ShiftRegister => {
                                BitVec::new(8, u64::from(self.shift))
                            }
                            UartTriggerSource::PrevFrameFault => self.prev_fault.word2(),
                        };
                        if t.trigger
                            .step(&mut t.counter, observed)
                            .expect("reduction trigger is total")
                        {
                            out.fired = true;
                            dup_run = t.repeat;
                        }
                    }
                }
                if dup_run > 0 {
                    // line bit consumed and discarded
                    let held = self.last_in;
                    self.shift_in(held);
                    self.fsm = if dup_run > 1 {
                        UartFsm::Dup {
                            index: index + 1,
                            remaining: dup_run - 1,
                        }
                    } else {
                        Self::after_data(index)
                    };
                } else {
                    self.shift_in(line);
                    self.fsm = Self::after_data(index);
                }
            }
            UartFsm::Dup { index, remaining } => {
                let held = self.last_in;
                self.shift_in(held);
                let remaining = remaining - 1;
                self.fsm = if remaining == 0 {
                    Self::after_data(index)
                } else {
                    UartFsm::Dup {
                        index: index + 1,
                        remaining,
                    }
                };
            }
            UartFsm::Parity => {
                // odd parity: data bits plus parity bit must have odd weight
                self.parity_ok = (self.shift.count_ones() + u32::from(line)) % 2 == 1;
                self.fsm = UartFsm::Stop;
            }
            UartFsm::Stop => {
                if line {
                    out.done = true;
                    out.byte = Some(self.shift);
                    out.valid = self.parity_ok;
                    self.prev_fault = FrameFaults {
                        parity_fault: !self.parity_ok,
                        stop_miss: false,
                    };
                    self.fsm = UartFsm::Done;
                } else {
                    self.prev_fault = FrameFaults {
                        parity_fault: !self.parity_ok,
                        stop_miss: true,
                    };
                    self.fsm = UartFsm::WaitIdle;
                }
            }
            UartFsm::WaitIdle => {
                if line {
                    self.fsm = UartFsm::Idle;
                }
            }
        }
        out
    }
}

/// Bits of a well-formed frame for `payload`: start, data LSB first, odd
/// parity, stop.
pub fn encode_frame(payload: u8) -> Vec<bool> {
    let mut bits = Vec::with_capacity(11);
    bits.push(false);
    for k in 0..8 {
        bits.push((payload >> k) & 1 == 1);
    }
    bits.push(payload.count_ones().is_multiple_of(2));
    bits.push(true);
    bits
}
