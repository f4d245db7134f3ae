//! Run configuration: design identifiers, trojan descriptors with their
//! compact text syntax, and the assembled per-run configuration.
//!
//! Descriptor syntax, one flag value covering all five trojans:
//!
//! ```text
//! reduce:<op>[:n=<N>][:mode=<replicate|zext>]   edge detector complement
//! resetbit:<k>[:n=<N>]                          LFSR all-zero on reset
//! swap:<op>[:n=<N>]                             mouse button swap
//! ground:<op>[:n=<N>]                           mouse trap state
//! dup:<k>[:r=<R>][:op=<op>][:src=<shift_xor|prev_fault>][:n=<N>]
//! ```
//!
//! `<op>` is one of and, or, xor, nand, nor, xnor.

use std::fmt;

use serde::Serialize;

use crate::bits::{ExtendMode, ReductionOp};
use crate::designs::lfsr::LfsrParams;
use crate::designs::uart::UartTriggerSource;
use crate::stimulus::{GeneratorSpec, StimulusTrace};
use crate::trojan::{PayloadSpec, TriggerKind, TriggerSpec};
use crate::Error;

/// The four simulated designs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignId {
    Edge8,
    Lfsr32,
    MousePs2,
    UartRx,
}

impl DesignId {
    pub const ALL: [Self; 4] = [Self::Edge8, Self::Lfsr32, Self::MousePs2, Self::UartRx];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Edge8 => "edge8",
            Self::Lfsr32 => "lfsr32",
            Self::MousePs2 => "mouse_ps2",
            Self::UartRx => "uart_rx",
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        Self::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| Error::UnknownDesign(s.to_string()))
    }
}

impl fmt::Display for DesignId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Design selection plus per-design parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum DesignSpec {
    Edge8,
    Lfsr32(LfsrParams),
    MousePs2,
    UartRx,
}

impl DesignSpec {
    pub fn id(&self) -> DesignId {
        match self {
            Self::Edge8 => DesignId::Edge8,
            Self::Lfsr32(_) => DesignId::Lfsr32,
            Self::MousePs2 => DesignId::MousePs2,
            Self::UartRx => DesignId::UartRx,
        }
    }

    pub fn default_for(id: DesignId) -> Self {
        match id {
            DesignId::Edge8 => Self::Edge8,
            DesignId::Lfsr32 => Self::Lfsr32(LfsrParams::default()),
            DesignId::MousePs2 => Self::MousePs2,
            DesignId::UartRx => Self::UartRx,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        match self {
            Self::Lfsr32(params) => params.validate(),
            _ => Ok(()),
        }
    }
}

/// A parsed trojan description: trigger, payload, and (for the serial
/// receiver) which word the trigger observes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrojanDescriptor {
    pub trigger: TriggerSpec,
    pub payload: PayloadSpec,
    /// Only meaningful for the duplication payload.
    pub uart_source: UartTriggerSource,
}

impl TrojanDescriptor {
    pub fn reduce(op: ReductionOp) -> Self {
        Self {
            trigger: TriggerSpec::reduction(op),
            payload: PayloadSpec::ComplementOutput {
                mode: ExtendMode::Replicate,
            },
            uart_source: UartTriggerSource::ShiftRegister,
        }
    }

    pub fn reset_bit(index: u8) -> Self {
        Self {
            trigger: TriggerSpec::reset_bit(index),
            payload: PayloadSpec::ForceAllZeroOnReset,
            uart_source: UartTriggerSource::ShiftRegister,
        }
    }

    pub fn swap(op: ReductionOp) -> Self {
        Self {
            trigger: TriggerSpec::reduction(op),
            payload: PayloadSpec::SwapPacketBits {
                byte_index: 0,
                bit_i: 0,
                bit_j: 1,
            },
            uart_source: UartTriggerSource::ShiftRegister,
        }
    }

    pub fn ground(op: ReductionOp) -> Self {
        Self {
            trigger: TriggerSpec::reduction(op),
            payload: PayloadSpec::TrapState,
            uart_source: UartTriggerSource::ShiftRegister,
        }
    }

    pub fn dup(data_index: u8) -> Self {
        Self {
            trigger: TriggerSpec::reduction(ReductionOp::Xor),
            payload: PayloadSpec::DuplicateDataBit {
                data_index,
                repeat_count: 1,
            },
            uart_source: UartTriggerSource::ShiftRegister,
        }
    }

    /// Parse the compact descriptor syntax.
    pub fn parse(s: &str) -> Result<Self, Error> {
        let bad = |reason: String| Error::Descriptor {
            descriptor: s.to_string(),
            reason,
        };
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or_default();
        let mut arg = |name: &str| {
            parts
                .next()
                .map(str::to_string)
                .ok_or_else(|| bad(format!("missing {name}")))
        };

        let parse_op = |tok: &str| {
            ReductionOp::parse(tok).ok_or_else(|| bad(format!("unknown reduction op `{tok}`")))
        };

        let mut descriptor = match head {
            "reduce" => Self::reduce(parse_op(&arg("reduction op")?)?),
            "resetbit" => {
                let tok = arg("bit index")?;
                let index: u8 = tok
                    .parse()
                    .map_err(|_| bad(format!("bad bit index `{tok}`")))?;
                Self::reset_bit(index)
            }
            "swap" => Self::swap(parse_op(&arg("reduction op")?)?),
            "ground" => Self::ground(parse_op(&arg("reduction op")?)?),
            "dup" => {
                let tok = arg("data bit index")?;
                let index: u8 = tok
                    .parse()
                    .map_err(|_| bad(format!("bad data bit index `{tok}`")))?;
                Self::dup(index)
            }
            other => return Err(bad(format!("unknown trojan kind `{other}`"))),
        };

        let mut explicit_op = false;
        for part in parts {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got `{part}`")))?;
            match (head, key) {
                (_, "n") => {
                    let n: u32 = value
                        .parse()
                        .map_err(|_| bad(format!("bad threshold `{value}`")))?;
                    descriptor.trigger = descriptor.trigger.after(n);
                }
                ("reduce", "mode") => {
                    let mode = match value {
                        "replicate" => ExtendMode::Replicate,
                        "zext" | "zero-extend" => ExtendMode::ZeroExtend,
                        _ => return Err(bad(format!("unknown extend mode `{value}`"))),
                    };
                    descriptor.payload = PayloadSpec::ComplementOutput { mode };
                }
                ("dup", "r") => {
                    let repeat: u8 = value
                        .parse()
                        .map_err(|_| bad(format!("bad repeat count `{value}`")))?;
                    if let PayloadSpec::DuplicateDataBit { data_index, .. } = descriptor.payload {
                        descriptor.payload = PayloadSpec::DuplicateDataBit {
                            data_index,
                            repeat_count: repeat,
                        };
                    }
                }
                ("dup", "op") => {
                    descriptor.trigger = TriggerSpec {
                        kind: TriggerKind::Reduction(parse_op(value)?),
                        threshold: descriptor.trigger.threshold,
                    };
                    explicit_op = true;
                }
                ("dup", "src") => {
                    descriptor.uart_source = match value {
                        "shift_xor" => UartTriggerSource::ShiftRegister,
                        "prev_fault" => UartTriggerSource::PrevFrameFault,
                        _ => return Err(bad(format!("unknown trigger source `{value}`"))),
                    };
                }
                _ => return Err(bad(format!("key `{key}` not valid for `{head}`"))),
            }
        }
        // The fault-flag source checks for two simultaneous faults, so its
        // natural default reduction is AND rather than XOR.
        if head == "dup"
            && descriptor.uart_source == UartTriggerSource::PrevFrameFault
            && !explicit_op
        {
            descriptor.trigger = TriggerSpec {
                kind: TriggerKind::Reduction(ReductionOp::And),
                threshold: descriptor.trigger.threshold,
            };
        }
        descriptor
            .trigger
            .validate()
            .map_err(|e| bad(e.to_string()))?;
        descriptor
            .payload
            .validate()
            .map_err(|e| bad(e.to_string()))?;
        Ok(descriptor)
    }

    /// Check trigger and payload shape against a concrete design.
    pub fn validate_for(&self, design: &DesignSpec) -> Result<(), Error> {
        self.trigger.validate()?;
        self.payload.validate()?;
        let mismatch =
            |expected: &str| Error::field("trojan", format!("{} expects {expected}", design.id()));
        match design {
            DesignSpec::Edge8 => match (self.payload, self.trigger.kind) {
                (PayloadSpec::ComplementOutput { .. }, TriggerKind::Reduction(_)) => Ok(()),
                _ => Err(mismatch("reduce:<op>")),
            },
            DesignSpec::Lfsr32(params) => match (self.payload, self.trigger.kind) {
                (PayloadSpec::ForceAllZeroOnReset, TriggerKind::ResetBit(index)) => {
                    if index == 0 || index > params.width {
                        Err(Error::TriggerIndexOutOfRange {
                            index,
                            width: params.width,
                        })
                    } else {
                        Ok(())
                    }
                }
                _ => Err(mismatch("resetbit:<k>")),
            },
            DesignSpec::MousePs2 => match (self.payload, self.trigger.kind) {
                (PayloadSpec::SwapPacketBits { .. }, TriggerKind::Reduction(_))
                | (PayloadSpec::TrapState, TriggerKind::Reduction(_)) => Ok(()),
                _ => Err(mismatch("swap:<op> or ground:<op>")),
            },
            DesignSpec::UartRx => match (self.payload, self.trigger.kind) {
                (PayloadSpec::DuplicateDataBit { .. }, TriggerKind::Reduction(_)) => Ok(()),
                _ => Err(mismatch("dup:<k>")),
            },
        }
    }

    fn trigger_op(&self) -> Option<ReductionOp> {
        match self.trigger.kind {
            TriggerKind::Reduction(op) => Some(op),
            TriggerKind::ResetBit(_) => None,
        }
    }
}

impl fmt::Display for TrojanDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.payload {
            PayloadSpec::ComplementOutput { mode } => {
                write!(
                    f,
                    "reduce:{}",
                    self.trigger_op().unwrap_or(ReductionOp::Xor)
                )?;
                if self.trigger.threshold > 1 {
                    write!(f, ":n={}", self.trigger.threshold)?;
                }
                if mode == ExtendMode::ZeroExtend {
                    write!(f, ":mode=zext")?;
                }
            }
            PayloadSpec::ForceAllZeroOnReset => {
                let index = match self.trigger.kind {
                    TriggerKind::ResetBit(k) => k,
                    TriggerKind::Reduction(_) => 0,
                };
                write!(f, "resetbit:{index}")?;
                if self.trigger.threshold > 1 {
                    write!(f, ":n={}", self.trigger.threshold)?;
                }
            }
            PayloadSpec::SwapPacketBits { .. } => {
                write!(f, "swap:{}", self.trigger_op().unwrap_or(ReductionOp::Xor))?;
                if self.trigger.threshold > 1 {
                    write!(f, ":n={}", self.trigger.threshold)?;
                }
            }
            PayloadSpec::TrapState => {
                write!(
                    f,
                    "ground:{}",
                    self.trigger_op().unwrap_or(ReductionOp::Xor)
                )?;
                if self.trigger.threshold > 1 {
                    write!(f, ":n={}", self.trigger.threshold)?;
                }
            }
            PayloadSpec::DuplicateDataBit {
                data_index,
                repeat_count,
            } => {
                write!(f, "dup:{data_index}")?;
                if repeat_count > 1 {
                    write!(f, ":r={repeat_count}")?;
                }
                let default_op = match self.uart_source {
                    UartTriggerSource::ShiftRegister => ReductionOp::Xor,
                    UartTriggerSource::PrevFrameFault => ReductionOp::And,
                };
                if let Some(op) = self.trigger_op() {
                    if op != default_op {
                        write!(f, ":op={op}")?;
                    }
                }
                if self.uart_source == UartTriggerSource::PrevFrameFault {
                    write!(f, ":src=prev_fault")?;
                }
                if self.trigger.threshold > 1 {
                    write!(f, ":n={}", self.trigger.threshold)?;
                }
            }
        }
        Ok(())
    }
}

/// Where the stimulus for a run comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum StimulusSource {
    Generate(GeneratorSpec),
    Trace(StimulusTrace),
}

/// One fully described differential run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub design: DesignSpec,
    pub trojan: Option<TrojanDescriptor>,
    pub stimulus: StimulusSource,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Error> {
        self.design.validate()?;
        if let Some(trojan) = &self.trojan {
            trojan.validate_for(&self.design)?;
        }
        match &self.stimulus {
            StimulusSource::Generate(spec) => {
                spec.validate()?;
                if spec.kind.design() != self.design.id() {
                    return Err(Error::field(
                        "generator",
                        format!(
                            "kind generates {} stimulus but the run targets {}",
                            spec.kind.design(),
                            self.design.id()
                        ),
                    ));
                }
                Ok(())
            }
            StimulusSource::Trace(trace) => {
                if trace.design() != self.design.id() {
                    return Err(Error::DesignMismatch {
                        trace: trace.design().to_string(),
                        run: self.design.id().to_string(),
                    });
                }
                Ok(())
            }
        }
    }
}
