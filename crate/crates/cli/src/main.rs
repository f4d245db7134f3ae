//! Command-line front end: generate stimulus traces, run single
//! differential experiments, sweep grid files, and reproduce the built-in
//! table-shaped experiment grids.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use trojanforge::config::{DesignId, DesignSpec, RunConfig, StimulusSource, TrojanDescriptor};
use trojanforge::designs::lfsr::LfsrParams;
use trojanforge::harness::{self, DiffReport};
use trojanforge::presets::TablePreset;
use trojanforge::report;
use trojanforge::stimulus::{generate, GeneratorKind, GeneratorSpec, StimulusTrace};

#[derive(Parser)]
#[command(
    name = "trojanforge",
    version,
    about = "Differential simulator for hardware-trojaned digital designs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a deterministic stimulus trace file
    Gen(GenArgs),
    /// One differential run, printing a single report
    Run(RunArgs),
    /// Run every configuration in a grid file
    Sweep(SweepArgs),
    /// Built-in experiment grids: table1, table2, table4, table5
    Tables(TablesArgs),
}

#[derive(Args, Clone)]
struct StimulusOpts {
    /// Design id: edge8, lfsr32, mouse_ps2, uart_rx
    #[arg(long)]
    design: String,

    /// Stimulus length in cycles (bytes, reset flags, or line bits)
    #[arg(long)]
    cycles: Option<u32>,

    /// Stimulus seed
    #[arg(long, env = "TROJANFORGE_SEED")]
    seed: Option<u64>,

    /// mouse_ps2: probability of a start-bit-clear filler byte between packets
    #[arg(long)]
    noise: Option<f64>,

    /// lfsr32: cycles between reset pulses (default: cycles / 4)
    #[arg(long)]
    reset_period: Option<u32>,

    /// lfsr32: cycles the reset stays asserted (default: 1)
    #[arg(long)]
    reset_hold: Option<u32>,

    /// lfsr32: register width (default: 32)
    #[arg(long)]
    width: Option<u8>,

    /// lfsr32: comma-separated 1-based tap positions (default: 1,2,22,32)
    #[arg(long)]
    taps: Option<String>,

    /// uart_rx: probability of a corrupted parity bit per frame
    #[arg(long)]
    parity_fault_prob: Option<f64>,

    /// uart_rx: probability of a missing stop bit per frame
    #[arg(long)]
    stop_fault_prob: Option<f64>,

    /// uart_rx: idle-high bits between frames (default: 0)
    #[arg(long)]
    gap_bits: Option<u32>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    stimulus: StimulusOpts,

    /// Output trace file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct CellOpts {
    #[command(flatten)]
    stimulus: StimulusOpts,

    /// Trojan descriptor, e.g. reduce:xor, resetbit:28, swap:or, ground:xor, dup:5
    #[arg(long)]
    trojan: Option<String>,

    /// Replay a trace file instead of generating stimulus
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    cell: CellOpts,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Grid file: one run per line in the same flag syntax as `run`
    #[arg(long)]
    grid: PathBuf,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[arg(long)]
    out: Option<PathBuf>,

    /// Run cells one at a time instead of in parallel
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct TablesArgs {
    /// Preset name: table1, table2, table4 or table5
    preset: String,

    #[arg(long, env = "TROJANFORGE_SEED")]
    seed: Option<u64>,

    /// Override the preset's stimulus length
    #[arg(long)]
    cycles: Option<u32>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long)]
    serial: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// One grid-file line, parsed with the same flags as `run`.
#[derive(Parser)]
#[command(name = "cell", no_binary_name = true)]
struct GridLine {
    #[command(flatten)]
    cell: CellOpts,
}

const DEFAULT_SEED: u64 = 1;

fn parse_taps(raw: &str) -> Result<Vec<u8>> {
    raw.split(',')
        .map(|t| {
            t.trim()
                .parse::<u8>()
                .with_context(|| format!("invalid taps: bad tap `{t}`"))
        })
        .collect()
}

/// Reject generator knobs that do not belong to the selected design.
fn check_knobs(opts: &StimulusOpts, design: DesignId) -> Result<()> {
    let mut stray = Vec::new();
    if opts.noise.is_some() && design != DesignId::MousePs2 {
        stray.push("noise");
    }
    if design != DesignId::Lfsr32 {
        if opts.reset_period.is_some() {
            stray.push("reset_period");
        }
        if opts.reset_hold.is_some() {
            stray.push("reset_hold");
        }
        if opts.width.is_some() {
            stray.push("width");
        }
        if opts.taps.is_some() {
            stray.push("taps");
        }
    }
    if design != DesignId::UartRx {
        if opts.parity_fault_prob.is_some() {
            stray.push("parity_fault_prob");
        }
        if opts.stop_fault_prob.is_some() {
            stray.push("stop_fault_prob");
        }
        if opts.gap_bits.is_some() {
            stray.push("gap_bits");
        }
    }
    if let Some(field) = stray.first() {
        bail!("invalid {field}: not applicable to design {design}");
    }
    Ok(())
}

fn design_spec(opts: &StimulusOpts, design: DesignId) -> Result<DesignSpec> {
    if design != DesignId::Lfsr32 {
        return Ok(DesignSpec::default_for(design));
    }
    let mut params = LfsrParams::default();
    if let Some(width) = opts.width {
        params.width = width;
        // keep the top tap consistent when only the width is overridden
        if opts.taps.is_none() {
            bail!("invalid taps: a custom width requires an explicit tap set");
        }
    }
    if let Some(raw) = &opts.taps {
        params.taps = parse_taps(raw)?;
    }
    Ok(DesignSpec::Lfsr32(params))
}

fn generator_spec(opts: &StimulusOpts, design: DesignId) -> Result<GeneratorSpec> {
    let cycles = opts
        .cycles
        .context("invalid cycles: required unless --trace is given")?;
    let seed = opts.seed.unwrap_or(DEFAULT_SEED);
    let kind = match design {
        DesignId::Edge8 => GeneratorKind::UniformRandom,
        DesignId::Lfsr32 => GeneratorKind::LfsrResetSchedule {
            reset_period: opts.reset_period.unwrap_or((cycles / 4).max(1)),
            reset_hold: opts.reset_hold.unwrap_or(1),
        },
        DesignId::MousePs2 => GeneratorKind::MouseStream {
            noise_probability: opts.noise.unwrap_or(0.0),
        },
        DesignId::UartRx => GeneratorKind::UartFrames {
            fault_parity_prob: opts.parity_fault_prob.unwrap_or(0.0),
            fault_stop_prob: opts.stop_fault_prob.unwrap_or(0.0),
            gap_bits: opts.gap_bits.unwrap_or(0),
        },
    };
    Ok(GeneratorSpec::new(kind, seed, cycles))
}

fn build_run_config(cell: &CellOpts) -> Result<RunConfig> {
    let design_id = DesignId::parse(&cell.stimulus.design)?;
    check_knobs(&cell.stimulus, design_id)?;
    let design = design_spec(&cell.stimulus, design_id)?;
    let trojan = cell
        .trojan
        .as_deref()
        .map(TrojanDescriptor::parse)
        .transpose()?;

    let stimulus = if let Some(path) = &cell.trace {
        if cell.stimulus.cycles.is_some() {
            bail!("invalid cycles: not allowed together with --trace");
        }
        if cell.stimulus.seed.is_some() {
            bail!("invalid seed: not allowed together with --trace");
        }
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading trace `{}`", path.display()))?;
        StimulusSource::Trace(StimulusTrace::from_text(&text)?)
    } else {
        StimulusSource::Generate(generator_spec(&cell.stimulus, design_id)?)
    };

    let config = RunConfig {
        design,
        trojan,
        stimulus,
    };
    config.validate()?;
    Ok(config)
}

fn render(reports: &[DiffReport], format: Format) -> String {
    match format {
        Format::Csv => report::to_csv(reports),
        Format::Json => {
            let mut s = report::to_json(reports);
            s.push('\n');
            s
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing `{}`", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_gen(args: &GenArgs) -> Result<()> {
    let design = DesignId::parse(&args.stimulus.design)?;
    check_knobs(&args.stimulus, design)?;
    let spec = generator_spec(&args.stimulus, design)?;
    let trace = generate(&spec)?;
    fs::write(&args.out, trace.to_text())
        .with_context(|| format!("writing `{}`", args.out.display()))?;
    eprintln!(
        "wrote {} cycles of {} stimulus to {}",
        trace.cycles(),
        design,
        args.out.display()
    );
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let config = build_run_config(&args.cell)?;
    let report = harness::run_config(&config)?;
    emit(&render(&[report], args.format), args.out.as_deref())
}

fn parse_grid(text: &str) -> Result<Vec<RunConfig>> {
    let mut cells = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed = GridLine::try_parse_from(line.split_whitespace())
            .with_context(|| format!("grid line {}", lineno + 1))?;
        let config =
            build_run_config(&parsed.cell).with_context(|| format!("grid cell {}", cells.len()))?;
        cells.push(config);
    }
    Ok(cells)
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let text = fs::read_to_string(&args.grid)
        .with_context(|| format!("reading grid `{}`", args.grid.display()))?;
    let cells = parse_grid(&text)?;
    let reports = harness::run_sweep(&cells, !args.serial)?;
    emit(&render(&reports, args.format), args.out.as_deref())
}

fn cmd_tables(args: &TablesArgs) -> Result<()> {
    let preset = TablePreset::parse(&args.preset)?;
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let grid = preset.grid(seed, args.cycles);
    let reports = harness::run_sweep(&grid, !args.serial)?;
    emit(&render(&reports, args.format), args.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Tables(args) => cmd_tables(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
