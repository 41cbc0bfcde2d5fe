//! Text formats: instance lines, pattern strings, reservoir snapshots, and a
//! streaming batch reader.
//!
//! Instance line formats:
//!
//! * `seq-spmf`: `[label|]1 2 -1 3 -1 -2`; `-1` closes an itemset, `-2` the sequence.
//! * `tx`: `a b c[|label]`.
//! * `wtx`: `a b c:TU:u_a u_b u_c[|label]`, with `TU` the sum of the utilities.
//!
//! With explicit timestamps every line is prefixed by `<t>\t`. Lines starting
//! with `#`, `%` or `@` are ignored.

use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::{Counters, Sampler};
use crate::error::{Error, Result};
use crate::measure::MaxNorm;
use crate::model::{Batch, Catalog, Instance, InstanceKind, Itemset, Pattern, ReservoirEntry, WeightedItemset};

const UTILITY_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Format {
    #[serde(rename = "seq-spmf")]
    SeqSpmf,
    #[serde(rename = "tx")]
    Tx,
    #[serde(rename = "wtx")]
    Wtx,
}

impl Format {
    pub fn kind(self) -> InstanceKind {
        match self {
            Format::SeqSpmf => InstanceKind::Sequence,
            Format::Tx => InstanceKind::PlainItemset,
            Format::Wtx => InstanceKind::WeightedItemset,
        }
    }

    pub fn language(self) -> PatternLanguage {
        match self {
            Format::SeqSpmf => PatternLanguage::Sequence,
            Format::Tx | Format::Wtx => PatternLanguage::Itemset,
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::SeqSpmf => "seq-spmf",
            Format::Tx => "tx",
            Format::Wtx => "wtx",
        })
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seq-spmf" => Ok(Format::SeqSpmf),
            "tx" => Ok(Format::Tx),
            "wtx" => Ok(Format::Wtx),
            _ => Err(Error::Config(format!(
                "unknown format `{s}` (seq-spmf, tx, wtx)"
            ))),
        }
    }
}

/// How patterns are written: `{a,b}` or `<{a}{b,c}>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatternLanguage {
    Itemset,
    Sequence,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedLine {
    pub instance: Instance,
    pub label: Option<String>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn nonempty_label(label: &str) -> Option<String> {
    let label = label.trim();
    (!label.is_empty()).then(|| label.to_owned())
}

/// Parses one instance line; `line_no` only feeds error messages.
pub fn parse_instance(
    line: &str,
    format: Format,
    catalog: &mut Catalog,
    line_no: usize,
) -> Result<ParsedLine> {
    match format {
        Format::SeqSpmf => parse_sequence(line, catalog, line_no),
        Format::Tx => {
            let (body, label) = match line.rsplit_once('|') {
                Some((body, label)) => (body, nonempty_label(label)),
                None => (line, None),
            };
            let items: Vec<_> = body.split_whitespace().map(|t| catalog.intern(t)).collect();
            let instance = Instance::plain(items).map_err(|_| parse_err(line_no, "empty transaction"))?;
            Ok(ParsedLine { instance, label })
        }
        Format::Wtx => parse_weighted(line, catalog, line_no),
    }
}

fn parse_sequence(line: &str, catalog: &mut Catalog, line_no: usize) -> Result<ParsedLine> {
    let (label, body) = match line.split_once('|') {
        Some((label, body)) => (nonempty_label(label), body),
        None => (None, line),
    };
    let mut itemsets = Vec::new();
    let mut current = Vec::new();
    let mut closed = false;
    for token in body.split_whitespace() {
        if closed {
            return Err(parse_err(line_no, format!("token `{token}` after -2")));
        }
        match token {
            "-1" => {
                if current.is_empty() {
                    return Err(parse_err(line_no, "empty itemset"));
                }
                itemsets.push(Itemset::new(current.drain(..)));
            }
            "-2" => {
                if !current.is_empty() {
                    itemsets.push(Itemset::new(current.drain(..)));
                }
                closed = true;
            }
            item => {
                if item.parse::<u64>().is_err() {
                    return Err(parse_err(line_no, format!("item `{item}` is not a non-negative integer")));
                }
                current.push(catalog.intern(item));
            }
        }
    }
    if !current.is_empty() {
        itemsets.push(Itemset::new(current));
    }
    let instance = Instance::sequence(itemsets).map_err(|_| parse_err(line_no, "empty sequence"))?;
    Ok(ParsedLine { instance, label })
}

fn parse_weighted(line: &str, catalog: &mut Catalog, line_no: usize) -> Result<ParsedLine> {
    let (body, label) = match line.rsplit_once('|') {
        Some((body, label)) => (body, nonempty_label(label)),
        None => (line, None),
    };
    let parts: Vec<&str> = body.split(':').collect();
    let [items, tu, utilities] = parts[..] else {
        return Err(parse_err(line_no, "expected `items:TU:utilities`"));
    };
    let tu: f64 = tu
        .trim()
        .parse()
        .map_err(|_| parse_err(line_no, format!("transaction utility `{}` is not a number", tu.trim())))?;
    let items: Vec<&str> = items.split_whitespace().collect();
    let utilities = utilities
        .split_whitespace()
        .map(|u| {
            u.parse::<f64>()
                .map_err(|_| parse_err(line_no, format!("utility `{u}` is not a number")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if items.len() != utilities.len() {
        return Err(parse_err(
            line_no,
            format!("{} items but {} utilities", items.len(), utilities.len()),
        ));
    }
    let computed: f64 = utilities.iter().sum();
    if (computed - tu).abs() > UTILITY_TOLERANCE * tu.abs().max(1.0) {
        return Err(Error::UtilityMismatch {
            line: line_no,
            declared: tu,
            computed,
        });
    }
    let pairs: Vec<_> = items
        .iter()
        .zip(&utilities)
        .map(|(t, &u)| (catalog.intern(t), u))
        .collect();
    let weighted = WeightedItemset::new(pairs).map_err(|e| parse_err(line_no, e.to_string()))?;
    Ok(ParsedLine {
        instance: Instance::Weighted(weighted),
        label,
    })
}

fn token(catalog: &Catalog, id: crate::model::ItemId) -> String {
    catalog
        .token(id)
        .map(str::to_owned)
        .unwrap_or_else(|| id.to_string())
}

fn join_items(set: &Itemset, catalog: &Catalog, sep: &str) -> String {
    set.items()
        .iter()
        .map(|&i| token(catalog, i))
        .collect::<Vec<_>>()
        .join(sep)
}

/// Canonical line of an instance in `format`.
pub fn serialize_instance(
    instance: &Instance,
    label: Option<&str>,
    format: Format,
    catalog: &Catalog,
) -> Result<String> {
    if instance.kind() != format.kind() {
        return Err(Error::Config(format!(
            "cannot write a {} in {format} format",
            instance.kind()
        )));
    }
    Ok(match (format, instance) {
        (Format::SeqSpmf, Instance::Sequence(seq)) => {
            let mut out = String::new();
            if let Some(label) = label {
                out.push_str(label);
                out.push('|');
            }
            for set in seq {
                out.push_str(&join_items(set, catalog, " "));
                out.push_str(" -1 ");
            }
            out.push_str("-2");
            out
        }
        (Format::Tx, Instance::Plain(set)) => {
            let mut out = join_items(set, catalog, " ");
            if let Some(label) = label {
                out.push('|');
                out.push_str(label);
            }
            out
        }
        (Format::Wtx, Instance::Weighted(w)) => {
            let weights: Vec<String> = w.weights().iter().map(|u| u.to_string()).collect();
            let mut out = format!(
                "{}:{}:{}",
                join_items(w.itemset(), catalog, " "),
                w.total_weight(),
                weights.join(" ")
            );
            if let Some(label) = label {
                out.push('|');
                out.push_str(label);
            }
            out
        }
        _ => unreachable!("kind checked above"),
    })
}

/// `{a,b}` for itemset patterns, `<{a}{b,c}>` for sequence patterns.
pub fn format_pattern(pattern: &Pattern, language: PatternLanguage, catalog: &Catalog) -> String {
    let body: String = pattern
        .elements()
        .iter()
        .map(|e| format!("{{{}}}", join_items(e, catalog, ",")))
        .collect();
    match language {
        PatternLanguage::Itemset if pattern.elements().len() == 1 => body,
        _ => format!("<{body}>"),
    }
}

pub fn parse_pattern(text: &str, catalog: &mut Catalog) -> Result<Pattern> {
    let text = text.trim();
    let inner = match text.strip_prefix('<') {
        Some(rest) => rest
            .strip_suffix('>')
            .ok_or_else(|| Error::InvalidArgument(format!("unterminated pattern `{text}`")))?,
        None => text,
    };
    let mut elements = Vec::new();
    let mut rest = inner;
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('{')
            .ok_or_else(|| Error::InvalidArgument(format!("expected `{{` in pattern `{text}`")))?;
        let (body, tail) = open
            .split_once('}')
            .ok_or_else(|| Error::InvalidArgument(format!("unterminated itemset in `{text}`")))?;
        let items: Vec<_> = body
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| catalog.intern(t))
            .collect();
        elements.push(Itemset::new(items));
        rest = tail.trim_start();
    }
    Pattern::new(elements)
}

/// One snapshot line: `<norm>\t<pattern>\t<insertion timestamp>`.
pub fn format_snapshot_line(entry: &ReservoirEntry, language: PatternLanguage, catalog: &Catalog) -> String {
    format!(
        "{}\t{}\t{}",
        entry.pattern.norm(),
        format_pattern(&entry.pattern, language, catalog),
        entry.timestamp
    )
}

/// Reads the last snapshot block of a text snapshot; `#` lines separate blocks.
pub fn parse_snapshot(text: &str, catalog: &mut Catalog) -> Result<Vec<ReservoirEntry>> {
    let mut blocks: Vec<Vec<(usize, &str)>> = vec![Vec::new()];
    for (no, line) in text.lines().enumerate() {
        if line.starts_with('#') {
            blocks.push(Vec::new());
        } else if !line.trim().is_empty() {
            blocks.last_mut().expect("non-empty").push((no + 1, line));
        }
    }
    let block = blocks.into_iter().rev().find(|b| !b.is_empty()).unwrap_or_default();
    block
        .into_iter()
        .map(|(no, line)| {
            let fields: Vec<&str> = line.split('\t').collect();
            let [norm, pattern, timestamp] = fields[..] else {
                return Err(parse_err(no, "expected `norm<TAB>pattern<TAB>timestamp`"));
            };
            let pattern = parse_pattern(pattern, catalog).map_err(|e| parse_err(no, e.to_string()))?;
            let norm: usize = norm.parse().map_err(|_| parse_err(no, "bad norm"))?;
            if norm != pattern.norm() {
                return Err(parse_err(no, format!("norm {norm} does not match pattern")));
            }
            let timestamp = timestamp.parse().map_err(|_| parse_err(no, "bad timestamp"))?;
            Ok(ReservoirEntry { timestamp, pattern })
        })
        .collect()
}

/// JSON form of a sampler state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDocument {
    pub format: Format,
    pub measure: String,
    pub min_norm: usize,
    /// `null` when unbounded.
    pub max_norm: Option<usize>,
    pub damping: f64,
    pub capacity: usize,
    pub seed: u64,
    pub realisation_mode: String,
    pub t_last: Option<f64>,
    pub norm_scaled: f64,
    pub batches_seen: u64,
    pub batches_accepted: u64,
    pub insertions: u64,
    pub entries: Vec<SnapshotEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub slot: usize,
    pub norm: usize,
    pub pattern: String,
    pub timestamp: f64,
}

impl SnapshotDocument {
    pub fn new(sampler: &Sampler, format: Format, catalog: &Catalog) -> Self {
        let cfg = sampler.config();
        let Counters {
            batches_seen,
            batches_accepted,
            insertions,
        } = sampler.counters();
        Self {
            format,
            measure: cfg.measure.base().to_string(),
            min_norm: cfg.measure.min_norm(),
            max_norm: match cfg.measure.max_norm() {
                MaxNorm::Bounded(m) => Some(m),
                MaxNorm::Unbounded => None,
            },
            damping: cfg.damping.gamma(),
            capacity: cfg.capacity,
            seed: cfg.seed,
            realisation_mode: cfg.mode.to_string(),
            t_last: sampler.t_last(),
            norm_scaled: sampler.norm_scaled(),
            batches_seen,
            batches_accepted,
            insertions,
            entries: sampler
                .reservoir()
                .entries()
                .iter()
                .enumerate()
                .map(|(slot, e)| SnapshotEntry {
                    slot,
                    norm: e.pattern.norm(),
                    pattern: format_pattern(&e.pattern, format.language(), catalog),
                    timestamp: e.timestamp,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Batching {
    /// Fixed number of instances per batch.
    Size(usize),
    /// A blank line closes a batch.
    Markers,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Timestamps {
    /// Batch `i` (1-based) gets timestamp `i`.
    Ordinal,
    /// Each line starts with `<t>\t`; consecutive lines sharing `t` form a batch.
    Explicit,
}

/// Groups parsed lines into batches while reading line by line.
pub struct BatchReader<R> {
    input: R,
    format: Format,
    batching: Batching,
    timestamps: Timestamps,
    catalog: Catalog,
    line_no: usize,
    ordinal: u64,
    pending: Option<(f64, ParsedLine)>,
    done: bool,
    buf: String,
}

impl<R: BufRead> BatchReader<R> {
    pub fn new(input: R, format: Format, batching: Batching, timestamps: Timestamps) -> Result<Self> {
        Self::with_catalog(input, format, batching, timestamps, Catalog::new())
    }

    pub fn with_catalog(
        input: R,
        format: Format,
        batching: Batching,
        timestamps: Timestamps,
        catalog: Catalog,
    ) -> Result<Self> {
        if batching == Batching::Size(0) {
            return Err(Error::Config("batch size must be positive".into()));
        }
        Ok(Self {
            input,
            format,
            batching,
            timestamps,
            catalog,
            line_no: 0,
            ordinal: 0,
            pending: None,
            done: false,
            buf: String::new(),
        })
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn into_catalog(self) -> Catalog {
        self.catalog
    }

    /// Next content line: `Some(None)` for a blank line, `None` at end of input.
    fn next_line(&mut self) -> Result<Option<Option<(Option<f64>, ParsedLine)>>> {
        loop {
            self.buf.clear();
            let read = self
                .input
                .read_line(&mut self.buf)
                .map_err(|e| Error::InvalidArgument(format!("read error: {e}")))?;
            if read == 0 {
                return Ok(None);
            }
            self.line_no += 1;
            let line = self.buf.trim_end_matches(['\n', '\r']);
            if line.trim().is_empty() {
                return Ok(Some(None));
            }
            if line.starts_with(['#', '%', '@']) {
                continue;
            }
            let (t, body) = match self.timestamps {
                Timestamps::Ordinal => (None, line),
                Timestamps::Explicit => {
                    let (t, body) = line
                        .split_once('\t')
                        .ok_or_else(|| parse_err(self.line_no, "missing `<timestamp>\\t` prefix"))?;
                    let t: f64 = t
                        .trim()
                        .parse()
                        .map_err(|_| parse_err(self.line_no, format!("bad timestamp `{t}`")))?;
                    (Some(t), body)
                }
            };
            let body = body.to_owned();
            let parsed = parse_instance(&body, self.format, &mut self.catalog, self.line_no)?;
            return Ok(Some(Some((t, parsed))));
        }
    }

    fn finish(&mut self, t: f64, lines: Vec<ParsedLine>) -> Result<Batch> {
        let (instances, labels) = lines.into_iter().map(|p| (p.instance, p.label)).unzip();
        Batch::with_labels(t, instances, labels)
    }

    fn next_batch(&mut self) -> Result<Option<Batch>> {
        if self.done {
            return Ok(None);
        }
        match self.timestamps {
            Timestamps::Explicit => {
                let mut lines = Vec::new();
                let mut t = None;
                if let Some((pt, line)) = self.pending.take() {
                    t = Some(pt);
                    lines.push(line);
                }
                loop {
                    match self.next_line()? {
                        None => {
                            self.done = true;
                            break;
                        }
                        Some(None) => continue,
                        Some(Some((Some(lt), line))) => match t {
                            Some(cur) if cur != lt => {
                                self.pending = Some((lt, line));
                                break;
                            }
                            _ => {
                                t = Some(lt);
                                lines.push(line);
                            }
                        },
                        Some(Some((None, _))) => unreachable!("explicit mode yields timestamps"),
                    }
                }
                match t {
                    Some(t) => self.finish(t, lines).map(Some),
                    None => Ok(None),
                }
            }
            Timestamps::Ordinal => {
                let mut lines = Vec::new();
                loop {
                    match self.next_line()? {
                        None => {
                            self.done = true;
                            break;
                        }
                        Some(None) => {
                            if self.batching == Batching::Markers && !lines.is_empty() {
                                break;
                            }
                        }
                        Some(Some((_, line))) => {
                            lines.push(line);
                            if let Batching::Size(n) = self.batching {
                                if lines.len() == n {
                                    break;
                                }
                            }
                        }
                    }
                }
                if lines.is_empty() {
                    return Ok(None);
                }
                self.ordinal += 1;
                let t = self.ordinal as f64;
                self.finish(t, lines).map(Some)
            }
        }
    }
}

impl<R: BufRead> Iterator for BatchReader<R> {
    type Item = Result<Batch>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.next_batch() {
            Ok(Some(b)) => Some(Ok(b)),
            Ok(None) => None,
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn tokens(instance: &Instance, catalog: &Catalog) -> Vec<Vec<String>> {
        instance
            .itemsets()
            .iter()
            .map(|s| s.items().iter().map(|&i| catalog.token(i).unwrap().to_owned()).collect())
            .collect()
    }

    #[test]
    fn sequence_line() {
        let mut c = Catalog::new();
        let p = parse_instance("1 2 -1 3 -1 -2", Format::SeqSpmf, &mut c, 1).unwrap();
        assert_eq!(tokens(&p.instance, &c), vec![vec!["1", "2"], vec!["3"]]);
        assert_eq!(p.label, None);
        let p = parse_instance("sports|4 -1 -2", Format::SeqSpmf, &mut c, 1).unwrap();
        assert_eq!(p.label.as_deref(), Some("sports"));
        assert!(parse_instance("1 -1 -1 -2", Format::SeqSpmf, &mut c, 3).is_err());
        assert!(parse_instance("1 -1 -2 2", Format::SeqSpmf, &mut c, 3).is_err());
        assert!(parse_instance("a -1 -2", Format::SeqSpmf, &mut c, 3).is_err());
        assert!(matches!(
            parse_instance("-2", Format::SeqSpmf, &mut c, 9),
            Err(Error::Parse { line: 9, .. })
        ));
    }

    #[test]
    fn weighted_line() {
        let mut c = Catalog::new();
        let p = parse_instance("2 3 5:10:2 3 5", Format::Wtx, &mut c, 1).unwrap();
        let Instance::Weighted(w) = &p.instance else { panic!() };
        assert_eq!(w.weights(), &[2.0, 3.0, 5.0]);
        assert_eq!(w.total_weight(), 10.0);
        assert!(matches!(
            parse_instance("2 3:6:2 3", Format::Wtx, &mut c, 4),
            Err(Error::UtilityMismatch { line: 4, .. })
        ));
        assert!(parse_instance("2 3:5:2", Format::Wtx, &mut c, 1).is_err());
        assert!(parse_instance("2 3:5", Format::Wtx, &mut c, 1).is_err());
        assert!(parse_instance("2 2:4:2 2", Format::Wtx, &mut c, 1).is_err());
        assert!(parse_instance("2:0:0", Format::Wtx, &mut c, 1).is_err());
    }

    #[test]
    fn transaction_line() {
        let mut c = Catalog::new();
        let p = parse_instance("a b c|sports", Format::Tx, &mut c, 1).unwrap();
        assert_eq!(tokens(&p.instance, &c), vec![vec!["a", "b", "c"]]);
        assert_eq!(p.label.as_deref(), Some("sports"));
        assert!(parse_instance("   |x", Format::Tx, &mut c, 1).is_err());
    }

    #[test]
    fn serialization() {
        let mut c = Catalog::new();
        for (line, format) in [
            ("1 2 -1 3 -1 -2", Format::SeqSpmf),
            ("lbl|7 -1 -2", Format::SeqSpmf),
            ("a b c|sports", Format::Tx),
            ("2 3 5:10:2 3 5", Format::Wtx),
            ("x y:3.5:1.5 2|pos", Format::Wtx),
        ] {
            let p = parse_instance(line, format, &mut c, 1).unwrap();
            assert_eq!(serialize_instance(&p.instance, p.label.as_deref(), format, &c).unwrap(), line);
        }
    }

    #[test]
    fn patterns() {
        let mut c = Catalog::new();
        let seq = parse_pattern("<{a}{b,c}>", &mut c).unwrap();
        assert_eq!(seq.norm(), 3);
        assert_eq!(format_pattern(&seq, PatternLanguage::Sequence, &c), "<{a}{b,c}>");
        let set = parse_pattern("{a,b}", &mut c).unwrap();
        assert_eq!(format_pattern(&set, PatternLanguage::Itemset, &c), "{a,b}");
        assert_eq!(format_pattern(&set, PatternLanguage::Sequence, &c), "<{a,b}>");
        assert!(parse_pattern("<{a}", &mut c).is_err());
        assert!(parse_pattern("{}", &mut c).is_err());
    }

    #[test]
    fn snapshot_text_round_trip() {
        let mut c = Catalog::new();
        let text = "# batch 1\n1\t{a}\t1\n# final\n2\t<{a}{b}>\t3\n1\t<{b}>\t2.5\n";
        let entries = parse_snapshot(text, &mut c).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[1].timestamp, 2.5);
        let lines: Vec<_> = entries
            .iter()
            .map(|e| format_snapshot_line(e, PatternLanguage::Sequence, &c))
            .collect();
        assert_eq!(lines, vec!["2\t<{a}{b}>\t3", "1\t<{b}>\t2.5"]);
        assert!(parse_snapshot("3\t{a}\t1\n", &mut c).is_err());
        assert!(parse_snapshot("", &mut c).unwrap().is_empty());
    }

    #[test]
    fn batching_by_size() {
        let input = "a\nb\n\nc\n# comment\nd\ne\n";
        let reader = BatchReader::new(Cursor::new(input), Format::Tx, Batching::Size(2), Timestamps::Ordinal).unwrap();
        let batches: Vec<Batch> = reader.collect::<Result<_>>().unwrap();
        assert_eq!(batches.iter().map(Batch::len).collect::<Vec<_>>(), vec![2, 2, 1]);
        assert_eq!(batches.iter().map(|b| b.timestamp).collect::<Vec<_>>(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn batching_by_markers() {
        let input = "a\nb\n\n\nc\n\nd|x\n";
        let reader = BatchReader::new(Cursor::new(input), Format::Tx, Batching::Markers, Timestamps::Ordinal).unwrap();
        let batches: Vec<Batch> = reader.collect::<Result<_>>().unwrap();
        assert_eq!(batches.iter().map(Batch::len).collect::<Vec<_>>(), vec![2, 1, 1]);
        assert_eq!(batches[2].labels, vec![Some("x".to_owned())]);
    }

    #[test]
    fn explicit_timestamps() {
        let input = "0.5\ta\n0.5\tb\n2\tc\n7\td\n7\te\n";
        let reader = BatchReader::new(Cursor::new(input), Format::Tx, Batching::Size(1), Timestamps::Explicit).unwrap();
        let batches: Vec<Batch> = reader.collect::<Result<_>>().unwrap();
        assert_eq!(
            batches.iter().map(|b| (b.timestamp, b.len())).collect::<Vec<_>>(),
            vec![(0.5, 2), (2.0, 1), (7.0, 2)]
        );
        let bad = BatchReader::new(Cursor::new("a\n"), Format::Tx, Batching::Markers, Timestamps::Explicit).unwrap();
        assert!(bad.collect::<Result<Vec<_>>>().is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let input = "1 -1 -2\n\n1 -1 -1 -2\n";
        let reader = BatchReader::new(Cursor::new(input), Format::SeqSpmf, Batching::Size(10), Timestamps::Ordinal).unwrap();
        let err = reader.collect::<Result<Vec<_>>>().unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
    }
}
