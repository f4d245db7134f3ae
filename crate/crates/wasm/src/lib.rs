//! Browser bindings for the differential trojan simulator.
//!
//! Three operations back the static demo page in `www/`: a single
//! parameterized differential run, the built-in table-shaped sweeps, and a
//! per-cycle mismatch timeline for the waveform strip. All results cross
//! the boundary as JSON strings; the page does the rendering.
//!
//! Build with `wasm-pack build --target web` (see the README).

use wasm_bindgen::prelude::*;

use trojanforge::config::{DesignId, DesignSpec, RunConfig, StimulusSource, TrojanDescriptor};
use trojanforge::harness;
use trojanforge::presets::TablePreset;
use trojanforge::report;
use trojanforge::stimulus::{generate, GeneratorKind, GeneratorSpec};

/// Timeline requests are capped so a misclick cannot lock up the tab.
const TIMELINE_CYCLE_CAP: u32 = 4096;

fn build_config(
    design: &str,
    trojan: &str,
    seed: u64,
    cycles: u32,
) -> trojanforge::Result<RunConfig> {
    let design_id = DesignId::parse(design)?;
    let trojan = match trojan {
        "" | "none" => None,
        other => Some(TrojanDescriptor::parse(other)?),
    };
    let config = RunConfig {
        design: DesignSpec::default_for(design_id),
        trojan,
        stimulus: StimulusSource::Generate(GeneratorSpec::new(
            GeneratorKind::default_for(design_id, cycles),
            seed,
            cycles,
        )),
    };
    config.validate()?;
    Ok(config)
}

fn err(e: trojanforge::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// The four design ids and the trojan descriptors the page offers for each,
/// as JSON. Keeps the page's dropdowns in sync with the simulator.
#[wasm_bindgen]
pub fn design_catalog() -> String {
    let catalog: Vec<serde_json::Value> = DesignId::ALL
        .iter()
        .map(|d| {
            let trojans: Vec<String> = match d {
                DesignId::Edge8 => ["and", "or", "xor", "nand", "nor", "xnor"]
                    .iter()
                    .map(|op| format!("reduce:{op}"))
                    .collect(),
                DesignId::Lfsr32 => [5, 10, 18, 28]
                    .iter()
                    .map(|k| format!("resetbit:{k}"))
                    .collect(),
                DesignId::MousePs2 => ["and", "or", "xor", "nand", "nor", "xnor"]
                    .iter()
                    .flat_map(|op| [format!("swap:{op}"), format!("ground:{op}")])
                    .collect(),
                DesignId::UartRx => (1..=6).map(|k| format!("dup:{k}")).collect(),
            };
            serde_json::json!({ "design": d.as_str(), "trojans": trojans })
        })
        .collect();
    serde_json::to_string(&catalog).expect("catalog serializes")
}

/// One differential run with generated stimulus; returns a one-element JSON
/// report array.
#[wasm_bindgen]
pub fn run_single(design: &str, trojan: &str, seed: u32, cycles: u32) -> Result<String, JsError> {
    run_single_impl(design, trojan, seed, cycles).map_err(err)
}

fn run_single_impl(
    design: &str,
    trojan: &str,
    seed: u32,
    cycles: u32,
) -> trojanforge::Result<String> {
    let config = build_config(design, trojan, u64::from(seed), cycles)?;
    let report = harness::run_config(&config)?;
    Ok(report::to_json(&[report]))
}

/// Run a built-in table preset; `cycles = 0` keeps the preset default.
#[wasm_bindgen]
pub fn run_table(preset: &str, seed: u32, cycles: u32) -> Result<String, JsError> {
    run_table_impl(preset, seed, cycles).map_err(err)
}

fn run_table_impl(preset: &str, seed: u32, cycles: u32) -> trojanforge::Result<String> {
    let preset = TablePreset::parse(preset)?;
    let cycles = if cycles == 0 { None } else { Some(cycles) };
    let grid = preset.grid(u64::from(seed), cycles);
    let reports = harness::run_sweep(&grid, false)?;
    Ok(report::to_json(&reports))
}

/// Per-cycle lockstep records for the waveform strip, as a JSON object with
/// the summary report and the cycle array.
#[wasm_bindgen]
pub fn mismatch_timeline(
    design: &str,
    trojan: &str,
    seed: u32,
    cycles: u32,
) -> Result<String, JsError> {
    mismatch_timeline_impl(design, trojan, seed, cycles).map_err(err)
}

fn mismatch_timeline_impl(
    design: &str,
    trojan: &str,
    seed: u32,
    cycles: u32,
) -> trojanforge::Result<String> {
    let cycles = cycles.min(TIMELINE_CYCLE_CAP);
    let config = build_config(design, trojan, u64::from(seed), cycles)?;
    let trace = match &config.stimulus {
        StimulusSource::Generate(spec) => generate(spec)?,
        StimulusSource::Trace(trace) => trace.clone(),
    };
    let (report, records) = harness::run_recorded(&config.design, config.trojan.as_ref(), &trace)?;
    let payload = serde_json::json!({ "report": report, "cycles": records });
    Ok(payload.to_string())
}
