//! PS/2 mouse packet decoder with two optional trojans.
//!
//! Packets are three bytes; byte 0 carries the button flags and an
//! always-one bit at position 3, which is the only framing check the
//! protocol performs. The swap trojan exchanges two bits of an emitted
//! packet byte when its reduction over the whole packet fires; the trap
//! trojan, armed on leaving the done state, drops the machine into an
//! absorbing state that ignores everything until reset.

use crate::bits::BitVec;
use crate::trojan::{TriggerSpec, TriggerState};

/// The always-one framing bit in byte 0.
pub const START_BIT: u8 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MouseFsm {
    Byte1,
    Byte2,
    Byte3,
    Done,
    TrojanGround,
}

/// One decoded three-byte packet: flags, X movement, Y movement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MousePacket {
    pub bytes: [u8; 3],
}

impl MousePacket {
    pub fn flags(&self) -> u8 {
        self.bytes[0]
    }

    /// The packet as one 24-bit word, byte 2 in the high bits.
    pub fn word24(&self) -> BitVec {
        BitVec::new(
            24,
            u64::from(self.bytes[0])
                | u64::from(self.bytes[1]) << 8
                | u64::from(self.bytes[2]) << 16,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum MouseTrojanKind {
    Swap {
        byte_index: u8,
        bit_i: u8,
        bit_j: u8,
    },
    Trap,
}

#[derive(Clone, Debug)]
struct MouseTrojan {
    trigger: TriggerSpec,
    kind: MouseTrojanKind,
    counter: TriggerState,
}

/// Outputs of one byte-consuming step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MouseStep {
    pub done: bool,
    pub packet: Option<MousePacket>,
    pub fired: bool,
}

/// Golden or trojaned packet decoder.
#[derive(Clone, Debug)]
pub struct MouseDecoder {
    fsm: MouseFsm,
    latch: [u8; 3],
    trojan: Option<MouseTrojan>,
}

fn swap_bits(byte: u8, i: u8, j: u8) -> u8 {
    if (byte >> i) & 1 == (byte >> j) & 1 {
        byte
    } else {
        byte ^ ((1 << i) | (1 << j))
    }
}

impl MouseDecoder {
    pub fn golden() -> Self {
        Self {
            fsm: MouseFsm::Byte1,
            latch: [0; 3],
            trojan: None,
        }
    }

    /// Button-swap trojan; the classic variant exchanges byte 0 bits 0
    /// and 1 (left and right buttons).
    pub fn with_swap_trojan(trigger: TriggerSpec, byte_index: u8, bit_i: u8, bit_j: u8) -> Self {
        Self {
            fsm: MouseFsm::Byte1,
            latch: [0; 3],
            trojan: Some(MouseTrojan {
                trigger,
                kind: MouseTrojanKind::Swap {
                    byte_index,
                    bit_i,
                    bit_j,
                },
                counter: TriggerState::default(),
            }),
        }
    }

    pub fn with_trap_trojan(trigger: TriggerSpec) -> Self {
        Self {
            fsm: MouseFsm::Byte1,
            latch: [0; 3],
            trojan: Some(MouseTrojan {
                trigger,
                kind: MouseTrojanKind::Trap,
                counter: TriggerState::default(),
            }),
        }
    }

    pub fn fsm(&self) -> MouseFsm {
        self.fsm
    }

    /// Functional reset: back to the first-byte state with cleared latches.
    /// Escapes the trap state. The trojan's occurrence counter survives.
    pub fn reset(&mut self) {
        self.fsm = MouseFsm::Byte1;
        self.latch = [0; 3];
    }

    fn accept_first_byte(&mut self, byte: u8) {
        if (byte >> START_BIT) & 1 == 1 {
            self.latch[0] = byte;
            self.fsm = MouseFsm::Byte2;
        } else {
            self.fsm = MouseFsm::Byte1;
        }
    }

    /// Consume one byte from the stream.
    pub fn step(&mut self, byte: u8) -> MouseStep {
        let mut out = MouseStep {
            done: false,
            packet: None,
            fired: false,
        };
        match self.fsm {
            MouseFsm::TrojanGround => {}
            MouseFsm::Done => {
                // Leaving done: the trap trojan re-inspects the packet that
                // was just emitted and swallows this byte when it fires.
                if let Some(t) = self.trojan.as_mut() {
                    if t.kind == MouseTrojanKind::Trap {
                        let emitted = MousePacket { bytes: self.latch };
                        let fired = t
                            .trigger
                            .step(&mut t.counter, emitted.word24())
                            .expect("reduction trigger is total");
                        if fired {
                            out.fired = true;
                            self.fsm = MouseFsm::TrojanGround;
                            return out;
                        }
                    }
                }
                // Otherwise this byte is the first byte of the next packet.
                self.accept_first_byte(byte);
            }
            MouseFsm::Byte1 => self.accept_first_byte(byte),
            MouseFsm::Byte2 => {
                self.latch[1] = byte;
                self.fsm = MouseFsm::Byte3;
            }
            MouseFsm::Byte3 => {
                self.latch[2] = byte;
                self.fsm = MouseFsm::Done;
                let mut packet = MousePacket { bytes: self.latch };
                if let Some(t) = self.trojan.as_mut() {
                    if let MouseTrojanKind::Swap {
                        byte_index,
                        bit_i,
                        bit_j,
                    } = t.kind
                    {
                        let fired = t
                            .trigger
                            .step(&mut t.counter, packet.word24())
                            .expect("reduction trigger is total");
                        if fired {
                            out.fired = true;
                            let idx = usize::from(byte_index);
                            packet.bytes[idx] = swap_bits(packet.bytes[idx], bit_i, bit_j);
                        }
                    }
                }
                out.done = true;
                out.packet = Some(packet);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::ReductionOp;
    use crate::stimulus::SplitMix64;

    fn feed(decoder: &mut MouseDecoder, bytes: &[u8]) -> Vec<MouseStep> {
        bytes.iter().map(|&b| decoder.step(b)).collect()
    }

    #[test]
    fn start_bit_clear_is_rejected() {
        let mut d = MouseDecoder::golden();
        let s = d.step(0xF7); // bit 3 clear
        assert_eq!(d.fsm(), MouseFsm::Byte1);
        assert!(!s.done);
    }

    #[test]
    fn start_bit_set_advances() {
        let mut d = MouseDecoder::golden();
        d.step(0x08);
        assert_eq!(d.fsm(), MouseFsm::Byte2);
    }

    #[test]
    fn packet_emitted_on_third_byte() {
        let mut d = MouseDecoder::golden();
        let steps = feed(&mut d, &[0x09, 0x22, 0x33]);
        assert!(!steps[0].done && !steps[1].done && steps[2].done);
        assert_eq!(steps[2].packet.unwrap().bytes, [0x09, 0x22, 0x33]);
        assert_eq!(d.fsm(), MouseFsm::Done);
    }

    #[test]
    fn swap_exchanges_left_and_right_buttons() {
        // OR trigger fires on any valid packet (start bit is always 1).
        let mut d =
            MouseDecoder::with_swap_trojan(TriggerSpec::reduction(ReductionOp::Or), 0, 0, 1);
        let steps = feed(&mut d, &[0b0000_1001, 0x00, 0x00]);
        let packet = steps[2].packet.unwrap();
        assert!(steps[2].fired);
        assert_eq!(packet.flags(), 0b0000_1010);
    }

    #[test]
    fn swap_of_equal_bits_changes_nothing() {
        let mut d =
            MouseDecoder::with_swap_trojan(TriggerSpec::reduction(ReductionOp::Or), 0, 0, 1);
        let steps = feed(&mut d, &[0b0000_1011, 0x55, 0xAA]);
        assert!(steps[2].fired);
        assert_eq!(steps[2].packet.unwrap().bytes, [0b0000_1011, 0x55, 0xAA]);
    }

    #[test]
    fn nor_trigger_never_fires_on_valid_packets() {
        let mut d = MouseDecoder::with_trap_trojan(TriggerSpec::reduction(ReductionOp::Nor));
        let mut rng = SplitMix64::new(3);
        for _ in 0..1_000 {
            let b0 = rng.next_byte() | 1 << START_BIT;
            for byte in [b0, rng.next_byte(), rng.next_byte()] {
                let s = d.step(byte);
                assert!(!s.fired);
            }
            assert_ne!(d.fsm(), MouseFsm::TrojanGround);
        }
    }

    #[test]
    fn trap_state_is_absorbing_until_reset() {
        let mut d = MouseDecoder::with_trap_trojan(TriggerSpec::reduction(ReductionOp::Or));
        feed(&mut d, &[0x08, 0x00, 0x00]);
        assert_eq!(d.fsm(), MouseFsm::Done);
        let s = d.step(0x08); // leaving done; OR over the packet fires
        assert!(s.fired);
        assert_eq!(d.fsm(), MouseFsm::TrojanGround);
        for byte in [0x08, 0xFF, 0x00, 0x08] {
            let s = d.step(byte);
            assert!(!s.done);
            assert_eq!(d.fsm(), MouseFsm::TrojanGround);
        }
        d.reset();
        assert_eq!(d.fsm(), MouseFsm::Byte1);
    }

    #[test]
    fn reset_is_idempotent_and_dominant() {
        let mut d = MouseDecoder::golden();
        d.step(0x08);
        assert_eq!(d.fsm(), MouseFsm::Byte2);
        d.reset();
        assert_eq!(d.fsm(), MouseFsm::Byte1);
        d.reset();
        assert_eq!(d.fsm(), MouseFsm::Byte1);
    }

    /// One done flag per three accepted bytes, and every emitted packet has
    /// the start bit set.
    #[test]
    fn done_cadence_and_start_bit_invariant() {
        let mut d = MouseDecoder::golden();
        let mut rng = SplitMix64::new(77);
        let mut accepted = 0u32;
        let mut dones = 0u32;
        let mut expecting_first = true;
        let mut in_packet = 0u8;
        for _ in 0..30_000 {
            let byte = rng.next_byte(); // bit 3 random: mixed noise and packets
            let s = d.step(byte);
            // independent recount of accepted bytes
            if expecting_first {
                if (byte >> START_BIT) & 1 == 1 {
                    expecting_first = false;
                    in_packet = 1;
                }
            } else {
                in_packet += 1;
                if in_packet == 3 {
                    accepted += 3;
                    expecting_first = true;
                    in_packet = 0;
                }
            }
            if s.done {
                dones += 1;
                assert_eq!(s.packet.unwrap().flags() >> START_BIT & 1, 1);
            }
        }
        assert_eq!(dones, accepted / 3);
    }

    /// The swap trojan never disturbs framing: done flags match the golden
    /// run cycle for cycle, only packet values may differ.
    #[test]
    fn swap_preserves_done_timing() {
        let mut golden = MouseDecoder::golden();
        let mut trojaned =
            MouseDecoder::with_swap_trojan(TriggerSpec::reduction(ReductionOp::Xor), 0, 0, 1);
        let mut rng = SplitMix64::new(5);
        for _ in 0..30_000 {
            let byte = rng.next_byte();
            let g = golden.step(byte);
            let t = trojaned.step(byte);
            assert_eq!(g.done, t.done);
        }
    }
}
