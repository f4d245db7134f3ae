//! Deterministic stimulus generation and the line-oriented trace format.
//!
//! Traces are the replay contract: a generated or hand-written trace feeds
//! the lockstep harness one entry per cycle. Generation is a pure function
//! of the generator spec, backed by a splitmix-style 64-bit mixer so the
//! same spec yields bit-identical traces on every platform.

use std::fmt::Write as _;

use crate::config::DesignId;
use crate::Error;

/// Splitmix-style 64-bit PRNG with a fixed, dependency-free mixing function.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn next_byte(&mut self) -> u8 {
        self.next_u64() as u8
    }

    /// Uniform in [0, 1) from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Stimulus shape, one kind per design.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorKind {
    /// One uniform random byte per cycle (edge detector).
    UniformRandom,
    /// Periodic reset pulses: asserted for `reset_hold` cycles at the top
    /// of every `reset_period` cycles (LFSR).
    LfsrResetSchedule { reset_period: u32, reset_hold: u32 },
    /// Valid three-byte packets, optionally interleaved with start-bit-clear
    /// filler bytes at the given probability (mouse).
    MouseStream { noise_probability: f64 },
    /// Well-formed serial frames with random payloads; parity and stop bits
    /// corrupted independently at the given probabilities, frames separated
    /// by `gap_bits` idle-high bits (UART).
    UartFrames {
        fault_parity_prob: f64,
        fault_stop_prob: f64,
        gap_bits: u32,
    },
}

impl GeneratorKind {
    pub fn design(&self) -> DesignId {
        match self {
            GeneratorKind::UniformRandom => DesignId::Edge8,
            GeneratorKind::LfsrResetSchedule { .. } => DesignId::Lfsr32,
            GeneratorKind::MouseStream { .. } => DesignId::MousePs2,
            GeneratorKind::UartFrames { .. } => DesignId::UartRx,
        }
    }

    /// The plain generator for a design, with a reset schedule sized to put
    /// a few resets into `cycles` for the LFSR.
    pub fn default_for(design: DesignId, cycles: u32) -> Self {
        match design {
            DesignId::Edge8 => GeneratorKind::UniformRandom,
            DesignId::Lfsr32 => GeneratorKind::LfsrResetSchedule {
                reset_period: (cycles / 4).max(1),
                reset_hold: 1,
            },
            DesignId::MousePs2 => GeneratorKind::MouseStream {
                noise_probability: 0.0,
            },
            DesignId::UartRx => GeneratorKind::UartFrames {
                fault_parity_prob: 0.0,
                fault_stop_prob: 0.0,
                gap_bits: 0,
            },
        }
    }
}

/// Everything needed to reproduce one stimulus trace.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub seed: u64,
    pub cycles: u32,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, seed: u64, cycles: u32) -> Self {
        Self { kind, seed, cycles }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.cycles == 0 {
            return Err(Error::field("cycles", "must be at least 1"));
        }
        match self.kind {
            GeneratorKind::UniformRandom => {}
            GeneratorKind::LfsrResetSchedule {
                reset_period,
                reset_hold,
            } => {
                if reset_period == 0 {
                    return Err(Error::field("reset_period", "must be at least 1"));
                }
                if reset_hold > reset_period {
                    return Err(Error::field("reset_hold", "cannot exceed the reset period"));
                }
            }
            GeneratorKind::MouseStream { noise_probability } => {
                if !(0.0..=1.0).contains(&noise_probability) {
                    return Err(Error::field("noise_probability", "must be within 0..=1"));
                }
            }
            GeneratorKind::UartFrames {
                fault_parity_prob,
                fault_stop_prob,
                ..
            } => {
                if !(0.0..=1.0).contains(&fault_parity_prob) {
                    return Err(Error::field("fault_parity_prob", "must be within 0..=1"));
                }
                if !(0.0..=1.0).contains(&fault_stop_prob) {
                    return Err(Error::field("fault_stop_prob", "must be within 0..=1"));
                }
            }
        }
        Ok(())
    }
}

/// One mouse-stream cycle: a byte on the wire plus an optional reset pulse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MouseEntry {
    pub byte: u8,
    pub reset: bool,
}

/// Per-design entry sequences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceData {
    Edge(Vec<u8>),
    Lfsr(Vec<bool>),
    Mouse(Vec<MouseEntry>),
    Uart(Vec<bool>),
}

/// A replayable input sequence for one design.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StimulusTrace {
    pub data: TraceData,
}

impl StimulusTrace {
    pub fn design(&self) -> DesignId {
        match self.data {
            TraceData::Edge(_) => DesignId::Edge8,
            TraceData::Lfsr(_) => DesignId::Lfsr32,
            TraceData::Mouse(_) => DesignId::MousePs2,
            TraceData::Uart(_) => DesignId::UartRx,
        }
    }

    pub fn cycles(&self) -> usize {
        match &self.data {
            TraceData::Edge(v) => v.len(),
            TraceData::Lfsr(v) => v.len(),
            TraceData::Mouse(v) => v.len(),
            TraceData::Uart(v) => v.len(),
        }
    }

    /// Line-oriented text form: a `#design <id> cycles <n>` header, then one
    /// entry per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "#design {} cycles {}", self.design(), self.cycles());
        match &self.data {
            TraceData::Edge(bytes) => {
                for b in bytes {
                    let _ = writeln!(out, "{b:02x}");
                }
            }
            TraceData::Lfsr(resets) => {
                for r in resets {
                    let _ = writeln!(out, "r{}", u8::from(*r));
                }
            }
            TraceData::Mouse(entries) => {
                for e in entries {
                    let _ = writeln!(out, "{:02x} r{}", e.byte, u8::from(e.reset));
                }
            }
            TraceData::Uart(bits) => {
                for b in bits {
                    let _ = writeln!(out, "{}", u8::from(*b));
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, Error> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(Error::TraceParse {
            line: 1,
            reason: "missing header".into(),
        })?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        let (design, declared) = match tokens.as_slice() {
            ["#design", id, "cycles", n] => {
                let design = DesignId::parse(id)?;
                let declared: usize = n.parse().map_err(|_| Error::TraceParse {
                    line: 1,
                    reason: format!("bad cycle count `{n}`"),
                })?;
                (design, declared)
            }
            _ => {
                return Err(Error::TraceParse {
                    line: 1,
                    reason: "expected `#design <id> cycles <n>`".into(),
                })
            }
        };

        fn parse_hex_byte(token: &str, line: usize) -> Result<u8, Error> {
            u8::from_str_radix(token, 16).map_err(|_| Error::TraceParse {
                line,
                reason: format!("bad hex byte `{token}`"),
            })
        }
        fn parse_flag(token: &str, prefix: &str, line: usize) -> Result<bool, Error> {
            match token.strip_prefix(prefix) {
                Some("0") => Ok(false),
                Some("1") => Ok(true),
                _ => Err(Error::TraceParse {
                    line,
                    reason: format!("expected `{prefix}0` or `{prefix}1`, got `{token}`"),
                }),
            }
        }

        let mut data = match design {
            DesignId::Edge8 => TraceData::Edge(Vec::with_capacity(declared)),
            DesignId::Lfsr32 => TraceData::Lfsr(Vec::with_capacity(declared)),
            DesignId::MousePs2 => TraceData::Mouse(Vec::with_capacity(declared)),
            DesignId::UartRx => TraceData::Uart(Vec::with_capacity(declared)),
        };
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            match &mut data {
                TraceData::Edge(v) => v.push(parse_hex_byte(line, lineno)?),
                TraceData::Lfsr(v) => v.push(parse_flag(line, "r", lineno)?),
                TraceData::Mouse(v) => {
                    let mut parts = line.split_whitespace();
                    let byte = parts.next().ok_or(Error::TraceParse {
                        line: lineno,
                        reason: "missing byte".into(),
                    })?;
                    let flag = parts.next().ok_or(Error::TraceParse {
                        line: lineno,
                        reason: "missing reset flag".into(),
                    })?;
                    if parts.next().is_some() {
                        return Err(Error::TraceParse {
                            line: lineno,
                            reason: "trailing tokens".into(),
                        });
                    }
                    v.push(MouseEntry {
                        byte: parse_hex_byte(byte, lineno)?,
                        reset: parse_flag(flag, "r", lineno)?,
                    });
                }
                TraceData::Uart(v) => v.push(parse_flag(line, "", lineno)?),
            }
        }
        let trace = StimulusTrace { data };
        if trace.cycles() != declared {
            return Err(Error::TraceParse {
                line: 1,
                reason: format!(
                    "header declares {declared} cycles but {} entries follow",
                    trace.cycles()
                ),
            });
        }
        Ok(trace)
    }
}

/// Produce the trace described by `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<StimulusTrace, Error> {
    spec.validate()?;
    let cycles = spec.cycles as usize;
    let mut rng = SplitMix64::new(spec.seed);
    let data = match spec.kind {
        GeneratorKind::UniformRandom => {
            TraceData::Edge((0..cycles).map(|_| rng.next_byte()).collect())
        }
        GeneratorKind::LfsrResetSchedule {
            reset_period,
            reset_hold,
        } => TraceData::Lfsr(
            (0..spec.cycles)
                .map(|i| i % reset_period < reset_hold)
                .collect(),
        ),
        GeneratorKind::MouseStream { noise_probability } => {
            let mut entries = Vec::with_capacity(cycles);
            while entries.len() < cycles {
                if noise_probability > 0.0 && rng.next_f64() < noise_probability {
                    entries.push(MouseEntry {
                        byte: rng.next_byte() & !(1 << crate::designs::mouse::START_BIT),
                        reset: false,
                    });
                    continue;
                }
                let packet = [
                    rng.next_byte() | 1 << crate::designs::mouse::START_BIT,
                    rng.next_byte(),
                    rng.next_byte(),
                ];
                for byte in packet {
                    if entries.len() < cycles {
                        entries.push(MouseEntry { byte, reset: false });
                    }
                }
            }
            TraceData::Mouse(entries)
        }
        GeneratorKind::UartFrames {
            fault_parity_prob,
            fault_stop_prob,
            gap_bits,
        } => {
            let mut bits = Vec::with_capacity(cycles);
            while bits.len() < cycles {
                let payload = rng.next_byte();
                let mut parity = payload.count_ones().is_multiple_of(2);
                if fault_parity_prob > 0.0 && rng.next_f64() < fault_parity_prob {
                    parity = !parity;
                }
                let mut stop = true;
                if fault_stop_prob > 0.0 && rng.next_f64() < fault_stop_prob {
                    stop = false;
                }
                let mut frame = Vec::with_capacity(11 + gap_bits as usize);
                frame.push(false);
                for k in 0..8 {
                    frame.push((payload >> k) & 1 == 1);
                }
                frame.push(parity);
                frame.push(stop);
                frame.extend(std::iter::repeat_n(true, gap_bits as usize));
                for b in frame {
                    if bits.len() < cycles {
                        bits.push(b);
                    }
                }
            }
            TraceData::Uart(bits)
        }
    };
    Ok(StimulusTrace { data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::uart::UartReceiver;
    use proptest::prelude::*;

    fn spec(kind: GeneratorKind, seed: u64, cycles: u32) -> GeneratorSpec {
        GeneratorSpec::new(kind, seed, cycles)
    }

    #[test]
    fn generation_is_deterministic() {
        let s = spec(GeneratorKind::UniformRandom, 7, 227);
        let a = generate(&s).unwrap();
        let b = generate(&s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cycles(), 227);
    }

    #[test]
    fn uart_frames_round_trip_through_golden_receiver() {
        let s = spec(
            GeneratorKind::UartFrames {
                fault_parity_prob: 0.0,
                fault_stop_prob: 0.0,
                gap_bits: 2,
            },
            11,
            13 * 40,
        );
        let trace = generate(&s).unwrap();
        let TraceData::Uart(bits) = &trace.data else {
            panic!("wrong variant");
        };
        let mut rx = UartReceiver::golden();
        let mut frames = 0;
        for &b in bits {
            let s = rx.step(b);
            if s.done {
                frames += 1;
                assert!(s.valid);
            }
        }
        assert_eq!(frames, 13 * 40 / 13); // 11 frame bits + 2 gap bits
    }

    #[test]
    fn mouse_stream_without_noise_is_all_packets() {
        let s = spec(
            GeneratorKind::MouseStream {
                noise_probability: 0.0,
            },
            5,
            300,
        );
        let trace = generate(&s).unwrap();
        let TraceData::Mouse(entries) = &trace.data else {
            panic!("wrong variant");
        };
        let mut decoder = crate::designs::mouse::MouseDecoder::golden();
        let dones = entries.iter().filter(|e| decoder.step(e.byte).done).count();
        assert_eq!(dones, 100);
    }

    #[test]
    fn reset_schedule_is_periodic() {
        let s = spec(
            GeneratorKind::LfsrResetSchedule {
                reset_period: 10,
                reset_hold: 2,
            },
            0,
            25,
        );
        let trace = generate(&s).unwrap();
        let TraceData::Lfsr(resets) = &trace.data else {
            panic!("wrong variant");
        };
        for (i, r) in resets.iter().enumerate() {
            assert_eq!(*r, i % 10 < 2, "cycle {i}");
        }
    }

    #[test]
    fn spec_validation_names_fields() {
        let bad = spec(
            GeneratorKind::MouseStream {
                noise_probability: 1.5,
            },
            0,
            10,
        );
        let err = generate(&bad).unwrap_err().to_string();
        assert!(err.contains("noise_probability"));
        let bad = spec(GeneratorKind::UniformRandom, 0, 0);
        assert!(bad.validate().unwrap_err().to_string().contains("cycles"));
    }

    #[test]
    fn text_parse_reports_line_numbers() {
        let err = StimulusTrace::from_text("#design edge8 cycles 2\nzz\n00\n").unwrap_err();
        assert!(matches!(err, Error::TraceParse { line: 2, .. }));
        let err = StimulusTrace::from_text("#design edge8 cycles 3\n00\n").unwrap_err();
        assert!(matches!(err, Error::TraceParse { line: 1, .. }));
    }

    proptest! {
        /// Saving and re-loading any generated trace is the identity.
        #[test]
        fn text_round_trip(seed: u64, cycles in 1u32..400, pick in 0usize..4) {
            let kind = match pick {
                0 => GeneratorKind::UniformRandom,
                1 => GeneratorKind::LfsrResetSchedule { reset_period: 7, reset_hold: 1 },
                2 => GeneratorKind::MouseStream { noise_probability: 0.3 },
                _ => GeneratorKind::UartFrames {
                    fault_parity_prob: 0.2,
                    fault_stop_prob: 0.2,
                    gap_bits: 1,
                },
            };
            let trace = generate(&spec(kind, seed, cycles)).unwrap();
            let reloaded = StimulusTrace::from_text(&trace.to_text()).unwrap();
            prop_assert_eq!(trace, reloaded);
        }

        /// Identical specs always produce identical traces.
        #[test]
        fn determinism_across_kinds(seed: u64, cycles in 1u32..200) {
            for kind in [
                GeneratorKind::UniformRandom,
                GeneratorKind::MouseStream { noise_probability: 0.5 },
                GeneratorKind::UartFrames { fault_parity_prob: 0.5, fault_stop_prob: 0.5, gap_bits: 0 },
            ] {
                let s = spec(kind, seed, cycles);
                prop_assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
            }
        }
    }
}
