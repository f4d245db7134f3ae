//! Built-in experiment grids.
//!
//! Each preset expands to a plain sweep grid, so its output is identical to
//! running the equivalent grid file cell by cell:
//!
//! * `table1`: the six reduction triggers on the edge detector.
//! * `table2`: LFSR all-zero injection at trigger bits 5, 10, 18 and 28.
//! * `table4`: mouse button-swap and trap trojans, each under all six ops.
//! * `table5`: serial-receiver duplication at data bits 1 through 6.
//!
//! Default cycle counts put the packet designs at 1419 packets and 1315
//! frames respectively; pass an explicit cycle count to scale them.

use crate::bits::ReductionOp;
use crate::config::{DesignId, DesignSpec, RunConfig, StimulusSource, TrojanDescriptor};
use crate::stimulus::{GeneratorKind, GeneratorSpec};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TablePreset {
    Table1,
    Table2,
    Table4,
    Table5,
}

impl TablePreset {
    pub const ALL: [Self; 4] = [Self::Table1, Self::Table2, Self::Table4, Self::Table5];

    pub fn name(self) -> &'static str {
        match self {
            Self::Table1 => "table1",
            Self::Table2 => "table2",
            Self::Table4 => "table4",
            Self::Table5 => "table5",
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }

    /// Stimulus length used when the caller does not override it.
    pub fn default_cycles(self) -> u32 {
        match self {
            // 227 input samples, 400411 cycles, 1419 packets, 1315 frames
            Self::Table1 => 227,
            Self::Table2 => 400_411,
            Self::Table4 => 1419 * 3,
            Self::Table5 => 1315 * 11,
        }
    }

    /// Expand to the sweep grid this preset stands for.
    pub fn grid(self, seed: u64, cycles: Option<u32>) -> Vec<RunConfig> {
        let cycles = cycles.unwrap_or_else(|| self.default_cycles());
        match self {
            Self::Table1 => ReductionOp::ALL
                .into_iter()
                .map(|op| RunConfig {
                    design: DesignSpec::Edge8,
                    trojan: Some(TrojanDescriptor::reduce(op)),
                    stimulus: StimulusSource::Generate(GeneratorSpec::new(
                        GeneratorKind::UniformRandom,
                        seed,
                        cycles,
                    )),
                })
                .collect(),
            Self::Table2 => [5u8, 10, 18, 28]
                .into_iter()
                .map(|bit| RunConfig {
                    design: DesignSpec::default_for(DesignId::Lfsr32),
                    trojan: Some(TrojanDescriptor::reset_bit(bit)),
                    stimulus: StimulusSource::Generate(GeneratorSpec::new(
                        GeneratorKind::default_for(DesignId::Lfsr32, cycles),
                        seed,
                        cycles,
                    )),
                })
                .collect(),
            Self::Table4 => {
                let mut grid = Vec::with_capacity(12);
                for make in [TrojanDescriptor::swap, TrojanDescriptor::ground] {
                    for op in ReductionOp::ALL {
                        grid.push(RunConfig {
                            design: DesignSpec::MousePs2,
                            trojan: Some(make(op)),
                            stimulus: StimulusSource::Generate(GeneratorSpec::new(
                                GeneratorKind::MouseStream {
                                    noise_probability: 0.0,
                                },
                                seed,
                                cycles,
                            )),
                        });
                    }
                }
                grid
            }
            Self::Table5 => (1u8..=6)
                .map(|bit| RunConfig {
                    design: DesignSpec::UartRx,
                    trojan: Some(TrojanDescriptor::dup(bit)),
                    stimulus: StimulusSource::Generate(GeneratorSpec::new(
                        GeneratorKind::UartFrames {
                            fault_parity_prob: 0.0,
                            fault_stop_prob: 0.0,
                            gap_bits: 0,
                        },
                        seed,
                        cycles,
                    )),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness;

    #[test]
    fn preset_names_round_trip() {
        for p in TablePreset::ALL {
            assert_eq!(TablePreset::parse(p.name()).unwrap(), p);
        }
        assert!(matches!(
            TablePreset::parse("table3"),
            Err(Error::UnknownPreset(_))
        ));
    }

    #[test]
    fn grids_have_the_expected_shape() {
        assert_eq!(TablePreset::Table1.grid(7, None).len(), 6);
        assert_eq!(TablePreset::Table2.grid(7, None).len(), 4);
        assert_eq!(TablePreset::Table4.grid(7, None).len(), 12);
        assert_eq!(TablePreset::Table5.grid(7, None).len(), 6);
    }

    #[test]
    fn every_preset_cell_validates_and_runs() {
        for p in TablePreset::ALL {
            let grid = p.grid(1, Some(600));
            let reports = harness::sweep(&grid).unwrap();
            assert_eq!(reports.len(), grid.len());
        }
    }
}
