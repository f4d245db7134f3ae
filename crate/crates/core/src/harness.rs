//! Lockstep golden-versus-trojan execution, error accounting, and sweeps.
//!
//! Both model instances start from identical initial state and consume the
//! same trace entry each cycle. What counts as an error depends on the
//! design: the edge detector and the LFSR compare registered state every
//! cycle, while the packet designs compare emitted events (packet or byte
//! values as value mismatches, framing and validity disagreements as
//! validation errors). Error rates divide by cycle count for the former
//! and by the golden run's emitted-event count for the latter.

use serde::Serialize;

use crate::config::{DesignId, DesignSpec, RunConfig, StimulusSource, TrojanDescriptor};
use crate::designs::edge::EdgeDetector;
use crate::designs::lfsr::{Lfsr, LfsrParams};
use crate::designs::mouse::MouseDecoder;
use crate::designs::uart::UartReceiver;
use crate::stimulus::{generate, MouseEntry, StimulusTrace, TraceData};
use crate::trojan::PayloadSpec;
use crate::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Mismatch and validation-error tallies from one lockstep run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiffReport {
    pub design: DesignId,
    /// Canonical trojan descriptor, or `none` for a golden-vs-golden run.
    pub trojan: String,
    pub cycles: u64,
    pub value_mismatches: u64,
    pub validation_errors: u64,
    /// Cycle index (0-based) of the first trigger firing, if it ever fired.
    #[serde(rename = "first_trigger")]
    pub first_trigger_cycle: Option<u64>,
    /// (mismatches + validation errors) / denominator, rounded to 6 places.
    #[serde(rename = "rate")]
    pub error_rate: f64,
}

/// One cycle of a recorded lockstep run, for inspection and visualization.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CycleRecord {
    pub cycle: u64,
    /// Golden output word this cycle (state, packet, or byte).
    pub golden: u64,
    /// Trojaned output word this cycle.
    pub trojan: u64,
    pub golden_event: bool,
    pub trojan_event: bool,
    pub mismatch: bool,
    pub fired: bool,
}

#[derive(Default)]
struct Tally {
    value_mismatches: u64,
    validation_errors: u64,
    first_trigger: Option<u64>,
    golden_events: u64,
}

impl Tally {
    fn fired(&mut self, cycle: u64, fired: bool) {
        if fired && self.first_trigger.is_none() {
            self.first_trigger = Some(cycle);
        }
    }

    fn report(
        self,
        design: DesignId,
        trojan: Option<&TrojanDescriptor>,
        cycles: u64,
        per_cycle: bool,
    ) -> DiffReport {
        let denominator = if per_cycle {
            cycles
        } else {
            self.golden_events
        };
        let errors = self.value_mismatches + self.validation_errors;
        let rate = if denominator == 0 {
            0.0
        } else {
            round6(errors as f64 / denominator as f64)
        };
        DiffReport {
            design,
            trojan: trojan.map_or_else(|| "none".to_string(), |t| t.to_string()),
            cycles,
            value_mismatches: self.value_mismatches,
            validation_errors: self.validation_errors,
            first_trigger_cycle: self.first_trigger,
            error_rate: rate,
        }
    }
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Run golden and trojaned instances in lockstep over a trace.
pub fn run_differential(
    design: &DesignSpec,
    trojan: Option<&TrojanDescriptor>,
    trace: &StimulusTrace,
) -> Result<DiffReport, Error> {
    run_lockstep(design, trojan, trace, &mut |_| {})
}

/// Like [`run_differential`] but also returns every per-cycle record.
pub fn run_recorded(
    design: &DesignSpec,
    trojan: Option<&TrojanDescriptor>,
    trace: &StimulusTrace,
) -> Result<(DiffReport, Vec<CycleRecord>), Error> {
    let mut records = Vec::with_capacity(trace.cycles());
    let report = run_lockstep(design, trojan, trace, &mut |r| records.push(r))?;
    Ok((report, records))
}

/// Resolve a run configuration (generating stimulus if needed) and run it.
pub fn run_config(config: &RunConfig) -> Result<DiffReport, Error> {
    config.validate()?;
    match &config.stimulus {
        StimulusSource::Generate(spec) => {
            let trace = generate(spec)?;
            run_differential(&config.design, config.trojan.as_ref(), &trace)
        }
        StimulusSource::Trace(trace) => {
            run_differential(&config.design, config.trojan.as_ref(), trace)
        }
    }
}

/// Run every cell of a grid in order. Any invalid cell aborts the sweep
/// with its index.
pub fn sweep(cells: &[RunConfig]) -> Result<Vec<DiffReport>, Error> {
    if cells.is_empty() {
        return Err(Error::EmptyGrid);
    }
    cells
        .iter()
        .enumerate()
        .map(|(index, cell)| {
            run_config(cell).map_err(|e| Error::GridCell {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Parallel sweep; output order still matches input order.
#[cfg(feature = "parallel")]
pub fn sweep_parallel(cells: &[RunConfig]) -> Result<Vec<DiffReport>, Error> {
    if cells.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let results: Vec<Result<DiffReport, Error>> = cells
        .par_iter()
        .enumerate()
        .map(|(index, cell)| {
            run_config(cell).map_err(|e| Error::GridCell {
                index,
                source: Box::new(e),
            })
        })
        .collect();
    results.into_iter().collect()
}

/// Sweep with a parallelism switch; falls back to serial execution when the
/// `parallel` feature is disabled.
pub fn run_sweep(cells: &[RunConfig], parallel: bool) -> Result<Vec<DiffReport>, Error> {
    #[cfg(feature = "parallel")]
    if parallel {
        return sweep_parallel(cells);
    }
    let _ = parallel;
    sweep(cells)
}

fn run_lockstep(
    design: &DesignSpec,
    trojan: Option<&TrojanDescriptor>,
    trace: &StimulusTrace,
    observe: &mut dyn FnMut(CycleRecord),
) -> Result<DiffReport, Error> {
    if trace.design() != design.id() {
        return Err(Error::DesignMismatch {
            trace: trace.design().to_string(),
            run: design.id().to_string(),
        });
    }
    design.validate()?;
    if let Some(t) = trojan {
        t.validate_for(design)?;
    }
    match (design, &trace.data) {
        (DesignSpec::Edge8, TraceData::Edge(entries)) => run_edge(trojan, entries, observe),
        (DesignSpec::Lfsr32(params), TraceData::Lfsr(entries)) => {
            run_lfsr(params, trojan, entries, observe)
        }
        (DesignSpec::MousePs2, TraceData::Mouse(entries)) => run_mouse(trojan, entries, observe),
        (DesignSpec::UartRx, TraceData::Uart(entries)) => run_uart(trojan, entries, observe),
        _ => unreachable!("design id equality implies matching trace data"),
    }
}

fn run_edge(
    trojan: Option<&TrojanDescriptor>,
    entries: &[u8],
    observe: &mut dyn FnMut(CycleRecord),
) -> Result<DiffReport, Error> {
    let mut golden = EdgeDetector::golden();
    let mut trojaned = match trojan {
        None => EdgeDetector::golden(),
        Some(d) => {
            let PayloadSpec::ComplementOutput { mode } = d.payload else {
                return Err(Error::field("trojan", "edge8 expects reduce:<op>"));
            };
            EdgeDetector::with_trojan(d.trigger, mode)
        }
    };
    let mut tally = Tally::default();
    for (i, &byte) in entries.iter().enumerate() {
        let cycle = i as u64;
        let g = golden.step(byte);
        let t = trojaned.step(byte);
        let mismatch = g.out != t.out;
        if mismatch {
            tally.value_mismatches += 1;
        }
        tally.fired(cycle, t.fired);
        observe(CycleRecord {
            cycle,
            golden: g.out.value(),
            trojan: t.out.value(),
            golden_event: true,
            trojan_event: true,
            mismatch,
            fired: t.fired,
        });
    }
    Ok(tally.report(DesignId::Edge8, trojan, entries.len() as u64, true))
}

fn run_lfsr(
    params: &LfsrParams,
    trojan: Option<&TrojanDescriptor>,
    entries: &[bool],
    observe: &mut dyn FnMut(CycleRecord),
) -> Result<DiffReport, Error> {
    let mut golden = Lfsr::golden(params.clone())?;
    let mut trojaned = match trojan {
        None => Lfsr::golden(params.clone())?,
        Some(d) => Lfsr::with_trojan(params.clone(), d.trigger)?,
    };
    let mut tally = Tally::default();
    for (i, &reset) in entries.iter().enumerate() {
        let cycle = i as u64;
        let fired = if reset {
            golden.reset();
            trojaned.reset()
        } else {
            golden.step();
            trojaned.step();
            false
        };
        let mismatch = golden.state() != trojaned.state();
        if mismatch {
            tally.value_mismatches += 1;
        }
        tally.fired(cycle, fired);
        observe(CycleRecord {
            cycle,
            golden: golden.state().value(),
            trojan: trojaned.state().value(),
            golden_event: true,
            trojan_event: true,
            mismatch,
            fired,
        });
    }
    Ok(tally.report(DesignId::Lfsr32, trojan, entries.len() as u64, true))
}

fn run_mouse(
    trojan: Option<&TrojanDescriptor>,
    entries: &[MouseEntry],
    observe: &mut dyn FnMut(CycleRecord),
) -> Result<DiffReport, Error> {
    let mut golden = MouseDecoder::golden();
    let mut trojaned = match trojan {
        None => MouseDecoder::golden(),
        Some(d) => match d.payload {
            PayloadSpec::SwapPacketBits {
                byte_index,
                bit_i,
                bit_j,
            } => MouseDecoder::with_swap_trojan(d.trigger, byte_index, bit_i, bit_j),
            PayloadSpec::TrapState => MouseDecoder::with_trap_trojan(d.trigger),
            _ => {
                return Err(Error::field(
                    "trojan",
                    "mouse_ps2 expects swap:<op> or ground:<op>",
                ))
            }
        },
    };
    let mut tally = Tally::default();
    for (i, entry) in entries.iter().enumerate() {
        let cycle = i as u64;
        if entry.reset {
            golden.reset();
            trojaned.reset();
            observe(CycleRecord {
                cycle,
                golden: 0,
                trojan: 0,
                golden_event: false,
                trojan_event: false,
                mismatch: false,
                fired: false,
            });
            continue;
        }
        let g = golden.step(entry.byte);
        let t = trojaned.step(entry.byte);
        if g.done {
            tally.golden_events += 1;
        }
        let mismatch = match (g.packet, t.packet) {
            (Some(gp), Some(tp)) => gp != tp,
            (Some(_), None) | (None, Some(_)) => {
                tally.validation_errors += 1;
                false
            }
            (None, None) => false,
        };
        if mismatch {
            tally.value_mismatches += 1;
        }
        tally.fired(cycle, t.fired);
        observe(CycleRecord {
            cycle,
            golden: g.packet.map_or(0, |p| p.word24().value()),
            trojan: t.packet.map_or(0, |p| p.word24().value()),
            golden_event: g.done,
            trojan_event: t.done,
            mismatch,
            fired: t.fired,
        });
    }
    Ok(tally.report(DesignId::MousePs2, trojan, entries.len() as u64, false))
}

fn run_uart(
    trojan: Option<&TrojanDescriptor>,
    entries: &[bool],
    observe: &mut dyn FnMut(CycleRecord),
) -> Result<DiffReport, Error> {
    let mut golden = UartReceiver::golden();
    let mut trojaned = match trojan {
        None => UartReceiver::golden(),
        Some(d) => {
            let PayloadSpec::DuplicateDataBit {
                data_index,
                repeat_count,
            } = d.payload
            else {
                return Err(Error::field("trojan", "uart_rx expects dup:<k>"));
            };
            UartReceiver::with_trojan(d.trigger, d.uart_source, data_index, repeat_count)
        }
    };
    let mut tally = Tally::default();
    for (i, &line) in entries.iter().enumerate() {
        let cycle = i as u64;
        let g = golden.step(line);
        let t = trojaned.step(line);
        if g.done {
            tally.golden_events += 1;
        }
        let mut mismatch = false;
        match (g.done, t.done) {
            (true, true) => {
                if g.byte != t.byte {
                    tally.value_mismatches += 1;
                    mismatch = true;
                }
                if g.valid != t.valid {
                    tally.validation_errors += 1;
                }
            }
            (true, false) | (false, true) => tally.validation_errors += 1,
            (false, false) => {}
        }
        tally.fired(cycle, t.fired);
        observe(CycleRecord {
            cycle,
            golden: g.byte.map_or(0, u64::from),
            trojan: t.byte.map_or(0, u64::from),
            golden_event: g.done,
            trojan_event: t.done,
            mismatch,
            fired: t.fired,
        });
    }
    Ok(tally.report(DesignId::UartRx, trojan, entries.len() as u64, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{DesignSpec, StimulusSource};
    use crate::stimulus::{GeneratorKind, GeneratorSpec, SplitMix64};

    fn edge_config(trojan: Option<&str>, seed: u64, cycles: u32) -> RunConfig {
        RunConfig {
            design: DesignSpec::Edge8,
            trojan: trojan.map(|t| TrojanDescriptor::parse(t).unwrap()),
            stimulus: StimulusSource::Generate(GeneratorSpec::new(
                GeneratorKind::UniformRandom,
                seed,
                cycles,
            )),
        }
    }

    #[test]
    fn golden_vs_golden_reports_zero_errors() {
        for design in [
            DesignId::Edge8,
            DesignId::Lfsr32,
            DesignId::MousePs2,
            DesignId::UartRx,
        ] {
            let cfg = RunConfig {
                design: DesignSpec::default_for(design),
                trojan: None,
                stimulus: StimulusSource::Generate(GeneratorSpec::new(
                    GeneratorKind::default_for(design, 500),
                    3,
                    500,
                )),
            };
            let report = run_config(&cfg).unwrap();
            assert_eq!(report.value_mismatches, 0, "{design}");
            assert_eq!(report.validation_errors, 0, "{design}");
            assert_eq!(report.first_trigger_cycle, None);
            assert_eq!(report.error_rate, 0.0);
            assert_eq!(report.trojan, "none");
        }
    }

    #[test]
    fn lfsr_mismatches_cover_every_cycle_after_the_trigger() {
        let design = DesignSpec::default_for(DesignId::Lfsr32);
        let trojan = TrojanDescriptor::parse("resetbit:10").unwrap();
        let trace = generate(&GeneratorSpec::new(
            GeneratorKind::LfsrResetSchedule {
                reset_period: 1000,
                reset_hold: 1,
            },
            0,
            10_000,
        ))
        .unwrap();
        let report = run_differential(&design, Some(&trojan), &trace).unwrap();
        if let Some(t) = report.first_trigger_cycle {
            assert_eq!(report.value_mismatches, report.cycles - t);
        } else {
            assert_eq!(report.value_mismatches, 0);
        }
    }

    /// Cross-check the edge tally against an independent single-model
    /// replay: recompute both output streams directly from the trace.
    #[test]
    fn edge_tally_matches_replay_oracle() {
        let cfg = edge_config(Some("reduce:and"), 7, 227);
        let report = run_config(&cfg).unwrap();

        let StimulusSource::Generate(spec) = &cfg.stimulus else {
            unreachable!()
        };
        let trace = generate(spec).unwrap();
        let TraceData::Edge(bytes) = &trace.data else {
            unreachable!()
        };
        let mut q = 0u8;
        let mut trojan_out = 0u8;
        let mut mismatches = 0u64;
        for &b in bytes {
            let fire = trojan_out == 0xFF;
            let golden_out = q ^ b;
            trojan_out = q ^ b ^ if fire { 0xFF } else { 0x00 };
            q = b;
            if golden_out != trojan_out {
                mismatches += 1;
            }
        }
        assert_eq!(report.value_mismatches, mismatches);
    }

    #[test]
    fn sweep_preserves_order_and_rejects_empty_grids() {
        assert!(matches!(sweep(&[]), Err(Error::EmptyGrid)));
        let cells: Vec<RunConfig> = (0..4)
            .map(|s| edge_config(Some("reduce:xor"), s, 100))
            .collect();
        let reports = sweep(&cells).unwrap();
        assert_eq!(reports.len(), 4);
        // deterministic, order-preserving: rerun must agree cell by cell
        let again = sweep(&cells).unwrap();
        assert_eq!(reports, again);
    }

    #[test]
    fn sweep_reports_the_failing_cell_index() {
        let mut cells = vec![edge_config(Some("reduce:xor"), 0, 100)];
        cells.push(edge_config(Some("reduce:xor"), 0, 100));
        // cell 1 pairs a mouse trojan with the edge design
        cells[1].trojan = Some(TrojanDescriptor::parse("swap:or").unwrap());
        let err = sweep(&cells).unwrap_err();
        assert!(matches!(err, Error::GridCell { index: 1, .. }));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_and_serial_sweeps_agree() {
        let cells: Vec<RunConfig> = (0..8)
            .map(|s| edge_config(Some("reduce:or"), s, 200))
            .collect();
        assert_eq!(sweep(&cells).unwrap(), sweep_parallel(&cells).unwrap());
    }

    #[test]
    fn mouse_swap_never_costs_validation_errors() {
        let design = DesignSpec::MousePs2;
        let trojan = TrojanDescriptor::parse("swap:xor").unwrap();
        let trace = generate(&GeneratorSpec::new(
            GeneratorKind::MouseStream {
                noise_probability: 0.2,
            },
            21,
            3000,
        ))
        .unwrap();
        let report = run_differential(&design, Some(&trojan), &trace).unwrap();
        assert_eq!(report.validation_errors, 0);
    }

    #[test]
    fn uart_done_events_stay_aligned() {
        let design = DesignSpec::UartRx;
        let trojan = TrojanDescriptor::parse("dup:4:r=2").unwrap();
        let trace = generate(&GeneratorSpec::new(
            GeneratorKind::UartFrames {
                fault_parity_prob: 0.1,
                fault_stop_prob: 0.1,
                gap_bits: 1,
            },
            33,
            4000,
        ))
        .unwrap();
        let (report, records) = run_recorded(&design, Some(&trojan), &trace).unwrap();
        for r in &records {
            assert_eq!(r.golden_event, r.trojan_event, "cycle {}", r.cycle);
        }
        // with aligned framing, every validation error is a valid-flag flip
        assert!(
            report.validation_errors <= records.iter().filter(|r| r.golden_event).count() as u64
        );
    }

    #[test]
    fn recorded_run_matches_plain_run() {
        let design = DesignSpec::Edge8;
        let trojan = TrojanDescriptor::parse("reduce:xor").unwrap();
        let trace = generate(&GeneratorSpec::new(GeneratorKind::UniformRandom, 5, 500)).unwrap();
        let plain = run_differential(&design, Some(&trojan), &trace).unwrap();
        let (recorded, records) = run_recorded(&design, Some(&trojan), &trace).unwrap();
        assert_eq!(plain, recorded);
        assert_eq!(records.len(), 500);
        assert_eq!(
            records.iter().filter(|r| r.mismatch).count() as u64,
            plain.value_mismatches
        );
    }

    #[test]
    fn trace_design_mismatch_is_rejected() {
        let trace = generate(&GeneratorSpec::new(GeneratorKind::UniformRandom, 1, 10)).unwrap();
        let err = run_differential(&DesignSpec::UartRx, None, &trace).unwrap_err();
        assert!(matches!(err, Error::DesignMismatch { .. }));
    }

    /// Error rates against a hand-tallied random stream.
    #[test]
    fn rate_uses_event_denominator_for_packet_designs() {
        let design = DesignSpec::MousePs2;
        let trojan = TrojanDescriptor::parse("ground:or").unwrap();
        let trace = generate(&GeneratorSpec::new(
            GeneratorKind::MouseStream {
                noise_probability: 0.0,
            },
            2,
            300,
        ))
        .unwrap();
        let report = run_differential(&design, Some(&trojan), &trace).unwrap();
        // 100 golden packets; OR fires on the first packet's exit, so the
        // trojaned run misses every later packet
        assert_eq!(report.validation_errors, 99);
        assert_eq!(report.error_rate, 0.99);
    }

    #[test]
    fn round6_is_stable() {
        let mut rng = SplitMix64::new(4);
        for _ in 0..1000 {
            let x = rng.next_f64();
            let r = round6(x);
            assert_eq!(r, round6(r));
        }
    }
}
