//! `rps bench`: per-batch timing of the sampler over repeated runs.
//!
//! The input is parsed once per batch size; only `process_batch` is timed.
//! Repeat `r` uses seed `seed + r`. Comma-separated `--batch-size`,
//! `--reservoir-size` and `--damping` values give one row per combination.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::Args;
use rps_core::io::{BatchReader, Batching};
use rps_core::{Batch, DampingSpec, Sampler, SamplerConfig};
use serde::Serialize;

use crate::{open_output, parse_batching, InputArgs};

#[derive(Args)]
pub struct BenchArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "1000", value_delimiter = ',', value_parser = parse_batching)]
    batch_size: Vec<Batching>,
    #[arg(long, short = 'k', default_value = "100", value_delimiter = ',')]
    reservoir_size: Vec<usize>,
    #[arg(long, default_value = "0", value_delimiter = ',')]
    damping: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Text table destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the rows as JSON to this path.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Row {
    batch_size: String,
    reservoir_size: usize,
    damping: f64,
    batches: usize,
    repeats: usize,
    /// Mean over repeats of the per-batch mean time, in microseconds.
    mean_batch_us: f64,
    /// Sample standard deviation of the per-run means; zero for one repeat.
    stddev_batch_us: f64,
    mean_insertions: f64,
    mean_accepted_batches: f64,
}

#[derive(Serialize)]
struct Report {
    format: String,
    measure: String,
    rows: Vec<Row>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn batching_label(b: Batching) -> String {
    match b {
        Batching::Size(n) => n.to_string(),
        Batching::Markers => "markers".into(),
    }
}

pub fn run(args: BenchArgs) -> Result<()> {
    if args.repeats == 0 {
        bail!("--repeats must be positive");
    }
    let spec = args.input.measure_spec()?;
    let mut text = String::new();
    args.input.reader()?.read_to_string(&mut text)?;

    let mut rows = Vec::new();
    for &batching in &args.batch_size {
        let batches: Vec<Batch> =
            BatchReader::new(text.as_bytes(), args.input.format, batching, args.input.timestamps)?
                .collect::<rps_core::Result<_>>()?;
        for &k in &args.reservoir_size {
            for &gamma in &args.damping {
                let damping = DampingSpec::new(gamma)?;
                let mut per_batch = Vec::with_capacity(args.repeats);
                let mut insertions = 0u64;
                let mut accepted = 0u64;
                for r in 0..args.repeats {
                    let config = SamplerConfig::new(spec, k, args.input.seed.wrapping_add(r as u64))
                        .with_damping(damping)
                        .with_mode(args.input.realisation);
                    let mut sampler = Sampler::new(config)?;
                    let start = Instant::now();
                    for b in &batches {
                        sampler.process_batch(b)?;
                    }
                    let elapsed = start.elapsed().as_secs_f64() * 1e6;
                    per_batch.push(elapsed / batches.len().max(1) as f64);
                    let c = sampler.counters();
                    insertions += c.insertions;
                    accepted += c.batches_accepted;
                }
                let (mean, std) = mean_std(&per_batch);
                rows.push(Row {
                    batch_size: batching_label(batching),
                    reservoir_size: k,
                    damping: gamma,
                    batches: batches.len(),
                    repeats: args.repeats,
                    mean_batch_us: mean,
                    stddev_batch_us: std,
                    mean_insertions: insertions as f64 / args.repeats as f64,
                    mean_accepted_batches: accepted as f64 / args.repeats as f64,
                });
            }
        }
    }

    let mut out = open_output(args.output.as_deref())?;
    writeln!(
        out,
        "{:>10} {:>6} {:>8} {:>8} {:>22} {:>12} {:>10}",
        "batch", "k", "damping", "batches", "us/batch (mean+-sd)", "insertions", "accepted"
    )?;
    for r in &rows {
        writeln!(
            out,
            "{:>10} {:>6} {:>8} {:>8} {:>22} {:>12.1} {:>10.1}",
            r.batch_size,
            r.reservoir_size,
            r.damping,
            r.batches,
            format!("{:.2} +- {:.2}", r.mean_batch_us, r.stddev_batch_us),
            r.mean_insertions,
            r.mean_accepted_batches
        )?;
    }
    out.flush()?;

    if let Some(path) = &args.json {
        let report = Report {
            format: args.input.format.to_string(),
            measure: spec.base().to_string(),
            rows,
        };
        let mut w = open_output(Some(path))?;
        serde_json::to_writer_pretty(&mut w, &report)?;
        writeln!(w)?;
        w.flush()?;
    }
    Ok(())
}
