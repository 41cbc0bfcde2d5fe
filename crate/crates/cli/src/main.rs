use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rps_core::io::{
    format_snapshot_line, parse_snapshot, BatchReader, Batching, Format, SnapshotDocument, Timestamps,
};
use rps_core::{
    featurize_entries, BaseMeasure, Catalog, DampingSpec, MaxNorm, MeasureSpec, RealisationMode,
    Sampler, SamplerConfig,
};

mod bench;

#[derive(Parser)]
#[command(name = "rps", version, about = "Reservoir-based pattern sampling over instance streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream instances through the sampler and write the reservoir.
    Sample(SampleArgs),
    /// Turn instances into binary containment features against a snapshot.
    Featurize(FeaturizeArgs),
    /// Time the sampler per batch over repeated runs.
    Bench(bench::BenchArgs),
}

/// Input and measure options shared by every subcommand.
#[derive(Args, Clone)]
pub struct InputArgs {
    /// Input file, or `-` for stdin.
    #[arg(long, default_value = "-")]
    pub input: String,
    #[arg(long, value_parser = parse_format)]
    pub format: Format,
    /// `ordinal` numbers batches 1, 2, ...; `explicit` reads `<t>\t` line prefixes.
    #[arg(long, default_value = "ordinal", value_parser = parse_timestamps)]
    pub timestamps: Timestamps,
    /// freq | area | decay:<alpha> | util | avgutil. Defaults to util for wtx, freq otherwise.
    #[arg(long, value_parser = parse_measure)]
    pub measure: Option<BaseMeasure>,
    #[arg(long, default_value_t = 1)]
    pub min_norm: usize,
    /// Unbounded when omitted.
    #[arg(long)]
    pub max_norm: Option<usize>,
    #[arg(long, env = "RPS_SEED", default_value_t = 0)]
    pub seed: u64,
    /// binomial | survival | conditioned
    #[arg(long, default_value = "binomial", value_parser = parse_mode)]
    pub realisation: RealisationMode,
}

impl InputArgs {
    pub fn measure_spec(&self) -> Result<MeasureSpec> {
        let base = self.measure.unwrap_or(match self.format {
            Format::Wtx => BaseMeasure::Util,
            Format::SeqSpmf | Format::Tx => BaseMeasure::Freq,
        });
        let max = self.max_norm.map_or(MaxNorm::Unbounded, MaxNorm::Bounded);
        let spec = MeasureSpec::new(base, self.min_norm, max)?;
        spec.check_kind(self.format.kind())?;
        Ok(spec)
    }

    pub fn reader(&self) -> Result<Box<dyn BufRead>> {
        open_input(&self.input)
    }
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Instances per batch, or `markers` to close batches at blank lines.
    #[arg(long, default_value = "1000", value_parser = parse_batching)]
    batch_size: Batching,
    #[arg(long, short = 'k', default_value_t = 100)]
    reservoir_size: usize,
    /// Damping rate gamma in [0, 1]; 0 is the landmark window.
    #[arg(long, default_value_t = 0.0)]
    damping: f64,
    /// Also write a snapshot block after every N batches.
    #[arg(long)]
    snapshot_every: Option<u64>,
    /// Snapshot text destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write the final state as JSON to this path.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct FeaturizeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Snapshot text written by `rps sample`; the last block is used.
    #[arg(long)]
    reservoir: PathBuf,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    Format::from_str(s).map_err(|e| e.to_string())
}

fn parse_measure(s: &str) -> Result<BaseMeasure, String> {
    BaseMeasure::from_str(s).map_err(|e| e.to_string())
}

fn parse_mode(s: &str) -> Result<RealisationMode, String> {
    RealisationMode::from_str(s).map_err(|e| e.to_string())
}

fn parse_timestamps(s: &str) -> Result<Timestamps, String> {
    match s {
        "ordinal" => Ok(Timestamps::Ordinal),
        "explicit" => Ok(Timestamps::Explicit),
        _ => Err(format!("unknown timestamp mode `{s}` (ordinal, explicit)")),
    }
}

pub fn parse_batching(s: &str) -> Result<Batching, String> {
    if s == "markers" {
        return Ok(Batching::Markers);
    }
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(Batching::Size(n)),
        _ => Err(format!("batch size must be a positive integer or `markers`, got `{s}`")),
    }
}

fn open_input(path: &str) -> Result<Box<dyn BufRead>> {
    if path == "-" {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let file = File::open(path).with_context(|| format!("cannot open {path}"))?;
    Ok(Box::new(BufReader::new(file)))
}

pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_block(out: &mut dyn Write, sampler: &Sampler, format: Format, catalog: &Catalog) -> Result<()> {
    for entry in sampler.reservoir().entries() {
        writeln!(out, "{}", format_snapshot_line(entry, format.language(), catalog))?;
    }
    Ok(())
}

fn sample(args: SampleArgs) -> Result<()> {
    let spec = args.input.measure_spec()?;
    let damping = DampingSpec::new(args.damping)?;
    if args.snapshot_every == Some(0) {
        bail!("--snapshot-every must be positive");
    }
    let config = SamplerConfig::new(spec, args.reservoir_size, args.input.seed)
        .with_damping(damping)
        .with_mode(args.input.realisation);
    let mut sampler = Sampler::new(config)?;
    let format = args.input.format;
    let mut reader = BatchReader::new(args.input.reader()?, format, args.batch_size, args.input.timestamps)?;
    let mut out = open_output(args.output.as_deref())?;

    let mut processed = 0u64;
    let mut blocks = 0u64;
    while let Some(batch) = reader.next() {
        let batch = batch?;
        sampler.process_batch(&batch)?;
        processed += 1;
        if args.snapshot_every.is_some_and(|n| processed % n == 0) {
            writeln!(out, "# after batch {processed}, t = {}", batch.timestamp)?;
            write_block(&mut out, &sampler, format, reader.catalog())?;
            blocks += 1;
        }
    }
    let catalog = reader.into_catalog();
    let last_block_current = args.snapshot_every.is_some_and(|n| processed % n == 0) && processed > 0;
    if !last_block_current {
        if blocks > 0 {
            writeln!(out, "# final, after batch {processed}")?;
        }
        write_block(&mut out, &sampler, format, &catalog)?;
    }
    out.flush()?;

    if let Some(path) = &args.json {
        let doc = SnapshotDocument::new(&sampler, format, &catalog);
        let mut w = open_output(Some(path))?;
        serde_json::to_writer_pretty(&mut w, &doc)?;
        writeln!(w)?;
        w.flush()?;
    }
    Ok(())
}

fn featurize(args: FeaturizeArgs) -> Result<()> {
    let mut text = String::new();
    File::open(&args.reservoir)
        .and_then(|mut f| f.read_to_string(&mut text))
        .with_context(|| format!("cannot read {}", args.reservoir.display()))?;
    let mut catalog = Catalog::new();
    let entries = parse_snapshot(&text, &mut catalog)
        .with_context(|| format!("bad snapshot {}", args.reservoir.display()))?;
    if entries.is_empty() {
        bail!("snapshot {} holds no patterns", args.reservoir.display());
    }
    let k = entries.len();

    let reader = BatchReader::with_catalog(
        args.input.reader()?,
        args.input.format,
        Batching::Size(1024),
        args.input.timestamps,
        catalog,
    )?;
    let mut csv = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(open_output(args.output.as_deref())?);
    let mut unlabeled = 0usize;
    for batch in reader {
        let batch = batch?;
        for (z, label) in batch.instances.iter().zip(&batch.labels) {
            let features = featurize_entries(&entries, k, z, label.as_deref())?;
            unlabeled += features.label.is_none() as usize;
            let mut row: Vec<&str> = Vec::with_capacity(k + 1);
            row.extend(features.bits.iter().map(|&b| if b { "1" } else { "0" }));
            row.push(features.label.as_deref().unwrap_or(""));
            csv.write_record(&row)?;
        }
    }
    csv.flush()?;
    if unlabeled > 0 {
        eprintln!("warning: {unlabeled} instance(s) without a label; label column left empty");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(args) => sample(args),
        Command::Featurize(args) => featurize(args),
        Command::Bench(args) => bench::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
