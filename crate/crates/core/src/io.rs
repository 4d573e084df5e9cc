//! File formats: observation data, model configuration, persisted batches,
//! weighted samples, and JSON rendering with 17 significant digits.
//!
//! Observation data comes in three shapes:
//!
//! * labels CSV with header `row_id,label`, one observation per line; rows
//!   are ordered by first appearance of their id;
//! * JSON `{"rows": [[label, ...], ...]}`;
//! * counts CSV with header `row_id,count_0,...,count_{L-1}`.
//!
//! Labels and counts are non-negative base-10 integers. Fields are trimmed
//! of surrounding ASCII whitespace; nothing else is locale dependent.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::dirichlet::{CountVector, SimplexVector};
use crate::error::{NdpError, Result};
use crate::gamer::GamerParams;
use crate::imputation::{SimulationBatch, WeightedSimulation};
use crate::model::{ModelConfig, ObservationArray};
use crate::posterior::WeightedSampleLaw;

pub const BATCH_FORMAT: &str = "ndp-batch";
pub const BATCH_VERSION: u32 = 1;

/// Renders a float with 17 significant digits, e.g. `6.3300000000000001e-1`.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    format!("{x:.16e}")
}

/// Pretty JSON with every float written by [`format_f64`].
struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

fn parse_uint(field: &str, what: &str, line: u64) -> Result<u64> {
    let t = field.trim();
    if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
        return Err(NdpError::Parse(format!("line {line}: {what} `{field}` is not a non-negative integer")));
    }
    t.parse::<u64>().map_err(|_| NdpError::Parse(format!("line {line}: {what} `{field}` is out of range")))
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r)
}

/// Observation data with the identifiers of its rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedData {
    pub row_ids: Vec<String>,
    pub data: ObservationArray,
}

pub fn read_labels_csv<R: Read>(reader: R, num_states: usize) -> Result<LoadedData> {
    let mut rdr = csv_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != ["row_id", "label"] {
        return Err(NdpError::Parse(format!("expected header `row_id,label`, found `{}`", header.join(","))));
    }
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut row_ids = Vec::new();
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 2 {
            return Err(NdpError::Parse(format!("line {line}: expected 2 fields, found {}", rec.len())));
        }
        let id = rec[0].to_owned();
        if id.is_empty() {
            return Err(NdpError::Parse(format!("line {line}: empty row_id")));
        }
        let label = parse_uint(&rec[1], "label", line)?;
        let m = *index.entry(id.clone()).or_insert_with(|| {
            row_ids.push(id);
            rows.push(Vec::new());
            rows.len() - 1
        });
        rows[m].push(usize::try_from(label).map_err(|_| NdpError::Parse(format!("line {line}: label too large")))?);
    }
    let data = ObservationArray::validate_and_count(rows, num_states)?;
    Ok(LoadedData { row_ids, data })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RowsJson {
    rows: Vec<Vec<usize>>,
}

pub fn read_rows_json<R: Read>(reader: R, num_states: usize) -> Result<LoadedData> {
    let parsed: RowsJson = serde_json::from_reader(reader)?;
    let row_ids = (1..=parsed.rows.len()).map(|m| m.to_string()).collect();
    let data = ObservationArray::validate_and_count(parsed.rows, num_states)?;
    Ok(LoadedData { row_ids, data })
}

/// The number of states is the number of `count_` columns.
pub fn read_counts_csv<R: Read>(reader: R) -> Result<LoadedData> {
    let mut rdr = csv_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let ok = header.len() >= 3
        && header[0] == "row_id"
        && header[1..].iter().enumerate().all(|(l, h)| *h == format!("count_{l}"));
    if !ok {
        return Err(NdpError::Parse(format!(
            "expected header `row_id,count_0,...,count_{{L-1}}` with L >= 2, found `{}`",
            header.join(",")
        )));
    }
    let num_states = header.len() - 1;
    let mut row_ids = Vec::new();
    let mut counts = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(NdpError::Parse(format!("line {line}: expected {} fields, found {}", header.len(), rec.len())));
        }
        if row_ids.iter().any(|id: &String| id == &rec[0]) {
            return Err(NdpError::Parse(format!("line {line}: duplicate row_id `{}`", &rec[0])));
        }
        row_ids.push(rec[0].to_owned());
        let c = (1..rec.len()).map(|i| parse_uint(&rec[i], "count", line)).collect::<Result<Vec<_>>>()?;
        counts.push(CountVector::new(c));
    }
    let data = ObservationArray::from_counts(counts, num_states)?;
    Ok(LoadedData { row_ids, data })
}

pub fn write_counts_csv<W: Write>(writer: W, row_ids: &[String], data: &ObservationArray) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["row_id".to_owned()];
    header.extend((0..data.num_states()).map(|l| format!("count_{l}")));
    w.write_record(&header)?;
    for (id, c) in row_ids.iter().zip(data.counts()) {
        let mut rec = vec![id.clone()];
        rec.extend(c.as_slice().iter().map(u64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_labels_csv<W: Write>(writer: W, row_ids: &[String], rows: &[Vec<usize>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["row_id", "label"])?;
    for (id, row) in row_ids.iter().zip(rows) {
        for label in row {
            w.write_record([id.as_str(), &label.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads data by extension: `.json` rows, or a CSV whose header decides
/// between labels and counts. Labels formats need `num_states`.
pub fn load_data(path: &Path, num_states: Option<usize>) -> Result<LoadedData> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    let need_l =
        || num_states.ok_or_else(|| NdpError::validation("the number of states must come from the configuration"));
    let loaded = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        read_rows_json(text.as_bytes(), need_l()?)?
    } else {
        let first = text.lines().next().unwrap_or("").trim();
        if first.starts_with("row_id,count_") || first.replace(' ', "").starts_with("row_id,count_") {
            read_counts_csv(text.as_bytes())?
        } else {
            read_labels_csv(text.as_bytes(), need_l()?)?
        }
    };
    if let Some(l) = num_states {
        if loaded.data.num_states() != l {
            return Err(NdpError::Shape { expected: l, actual: loaded.data.num_states() });
        }
    }
    Ok(loaded)
}

#[derive(Debug, Clone, Copy, PartialEq, SerializeDerive, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GamerBase {
    pub r: f64,
    pub c: f64,
    pub alpha: f64,
    #[serde(rename = "L")]
    pub num_states: usize,
}

/// Configuration file: `{"kappa", "eps", "base": [...]}` or
/// `{"kappa", "eps", "gamer": {"r", "c", "alpha", "L"}}`.
#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub kappa: f64,
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamer: Option<GamerBase>,
}

impl ConfigFile {
    pub fn to_config(&self) -> Result<ModelConfig> {
        let base = match (&self.base, &self.gamer) {
            (Some(b), None) => SimplexVector::new(b.clone())?,
            (None, Some(g)) => GamerParams::new(g.r, g.c, g.alpha)?.discretize(g.num_states)?,
            _ => return Err(NdpError::validation("config needs exactly one of `base` or `gamer`")),
        };
        ModelConfig::new(self.kappa, self.eps, base)
    }
}

impl From<&ModelConfig> for ConfigFile {
    fn from(c: &ModelConfig) -> Self {
        ConfigFile { kappa: c.kappa(), eps: c.eps(), base: Some(c.base().as_slice().to_vec()), gamer: None }
    }
}

pub fn read_config<R: Read>(reader: R) -> Result<ModelConfig> {
    let file: ConfigFile = serde_json::from_reader(reader)?;
    file.to_config()
}

pub fn load_config(path: &Path) -> Result<ModelConfig> {
    read_config(BufReader::new(File::open(path)?))
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
struct SimulationRecord {
    id: u64,
    log_weight: f64,
    /// 0-based root row of each row's cluster.
    cluster_of: Vec<usize>,
    /// One vector per cluster, in order of root rows.
    thetas: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
struct BatchRecord {
    format: String,
    version: u32,
    seed: u64,
    config: ConfigFile,
    log_scale_factor: f64,
    trimmed: usize,
    num_rows: usize,
    simulations: Vec<SimulationRecord>,
}

pub fn batch_to_json(batch: &SimulationBatch) -> Result<String> {
    let record = BatchRecord {
        format: BATCH_FORMAT.into(),
        version: BATCH_VERSION,
        seed: batch.seed(),
        config: batch.config().into(),
        log_scale_factor: batch.log_scale_factor(),
        trimmed: batch.trimmed(),
        num_rows: batch.num_rows(),
        simulations: batch
            .sims()
            .iter()
            .zip(batch.ids())
            .map(|(s, &id)| SimulationRecord {
                id,
                log_weight: s.log_weight(),
                cluster_of: s.cluster_map(),
                thetas: s.clusters().map(|(_, t)| t.to_vec()).collect(),
            })
            .collect(),
    };
    to_json_string(&record)
}

pub fn batch_from_json(text: &str) -> Result<SimulationBatch> {
    let record: BatchRecord = serde_json::from_str(text)?;
    if record.format != BATCH_FORMAT {
        return Err(NdpError::Parse(format!("not a batch file (format `{}`)", record.format)));
    }
    if record.version != BATCH_VERSION {
        return Err(NdpError::Parse(format!("unsupported batch version {}", record.version)));
    }
    let config = record.config.to_config()?;
    let mut ids = Vec::with_capacity(record.simulations.len());
    let mut sims = Vec::with_capacity(record.simulations.len());
    for s in record.simulations {
        if s.cluster_of.len() != record.num_rows {
            return Err(NdpError::Shape { expected: record.num_rows, actual: s.cluster_of.len() });
        }
        let thetas = s
            .thetas
            .into_iter()
            .map(|t| {
                if t.len() != config.num_states() {
                    return Err(NdpError::Shape { expected: config.num_states(), actual: t.len() });
                }
                SimplexVector::new(t)
            })
            .collect::<Result<Vec<_>>>()?;
        sims.push(WeightedSimulation::from_parts(&s.cluster_of, thetas, s.log_weight)?);
        ids.push(s.id);
    }
    SimulationBatch::from_simulations(sims, ids, config, record.seed, record.log_scale_factor, record.trimmed)
}

pub fn save_batch(path: &Path, batch: &SimulationBatch) -> Result<()> {
    std::fs::write(path, batch_to_json(batch)?)?;
    Ok(())
}

pub fn load_batch(path: &Path) -> Result<SimulationBatch> {
    batch_from_json(&std::fs::read_to_string(path)?)
}

/// `atom,weight` lines; prior atoms carry their share of the prior mass.
pub fn write_weighted_sample<W: Write>(writer: W, law: &WeightedSampleLaw) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "atom,weight")?;
    for (a, wt) in law.weighted_atoms() {
        writeln!(w, "{},{}", format_f64(a), format_f64(wt))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_weighted_sample<R: Read>(reader: R) -> Result<WeightedSampleLaw> {
    let mut rdr = csv_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != ["atom", "weight"] {
        return Err(NdpError::Parse(format!("expected header `atom,weight`, found `{}`", header.join(","))));
    }
    let (mut atoms, mut weights) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| NdpError::Parse(format!("line {line}: `{s}` is not a finite number")))
        };
        if rec.len() != 2 {
            return Err(NdpError::Parse(format!("line {line}: expected 2 fields, found {}", rec.len())));
        }
        let w = num(&rec[1])?;
        if w < 0.0 {
            return Err(NdpError::Parse(format!("line {line}: negative weight")));
        }
        atoms.push(num(&rec[0])?);
        weights.push(w);
    }
    WeightedSampleLaw::new(atoms, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imputation::{run_batch, EngineOptions};

    #[test]
    fn seventeen_digits_round_trip() {
        for &x in &[0.633, 1.0 / 3.0, -2.5e-300, 1e300, 6067.0] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let digits = s.split('e').next().unwrap().chars().filter(char::is_ascii_digit).count();
            assert_eq!(digits, 17);
        }
        let json = to_json_string(&serde_json::json!({"a": [0.1, 2], "b": f64::NAN})).unwrap();
        assert!(json.contains("1.0000000000000001e-1"));
        assert!(json.contains("\"b\": null"));
        let back: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(back["a"][0].as_f64(), Some(0.1));
    }

    #[test]
    fn labels_csv_groups_by_first_appearance() {
        let text = "row_id,label\nb,1\na,0\nb, 0\na,1\na,1\n";
        let d = read_labels_csv(text.as_bytes(), 2).unwrap();
        assert_eq!(d.row_ids, vec!["b", "a"]);
        assert_eq!(d.data.row_counts(0).as_slice(), &[1, 1]);
        assert_eq!(d.data.row_counts(1).as_slice(), &[1, 2]);
    }

    #[test]
    fn labels_csv_errors() {
        assert!(matches!(read_labels_csv("id,label\n".as_bytes(), 2), Err(NdpError::Parse(_))));
        assert!(matches!(read_labels_csv("row_id,label\na,-1\n".as_bytes(), 2), Err(NdpError::Parse(_))));
        assert!(matches!(read_labels_csv("row_id,label\na,1.5\n".as_bytes(), 2), Err(NdpError::Parse(_))));
        let err = read_labels_csv("row_id,label\na,0\na,2\n".as_bytes(), 2).unwrap_err();
        assert!(err.to_string().contains("row 1 position 2"), "{err}");
        assert!(read_labels_csv("row_id,label\n".as_bytes(), 2).is_err());
    }

    #[test]
    fn json_rows() {
        let d = read_rows_json(r#"{"rows": [[0, 1, 1], [2]]}"#.as_bytes(), 3).unwrap();
        assert_eq!(d.data.num_rows(), 2);
        assert_eq!(d.data.row_counts(0).as_slice(), &[1, 2, 0]);
        assert!(read_rows_json(r#"{"rows": [[0, 3]]}"#.as_bytes(), 3).is_err());
        assert!(read_rows_json(r#"{"rows": [[0]], "x": 1}"#.as_bytes(), 3).is_err());
    }

    #[test]
    fn counts_csv_round_trip() {
        let text = "row_id,count_0,count_1,count_2\nx,1,0,2\ny,0,0,4\n";
        let d = read_counts_csv(text.as_bytes()).unwrap();
        assert_eq!(d.data.num_states(), 3);
        let mut out = Vec::new();
        write_counts_csv(&mut out, &d.row_ids, &d.data).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
        assert!(read_counts_csv("row_id,count_1,count_0\na,1,1\n".as_bytes()).is_err());
        assert!(read_counts_csv("row_id,count_0,count_1\na,1\n".as_bytes()).is_err());
        assert!(read_counts_csv("row_id,count_0,count_1\na,1,1\na,0,1\n".as_bytes()).is_err());
    }

    #[test]
    fn config_variants() {
        let c = read_config(r#"{"kappa": 1, "eps": 2, "base": [0.5, 0.5]}"#.as_bytes()).unwrap();
        assert_eq!(c.num_states(), 2);
        let g = read_config(r#"{"kappa": 1, "eps": 1, "gamer": {"r": 2.5, "c": 3, "alpha": 2, "L": 20}}"#.as_bytes())
            .unwrap();
        assert_eq!(g.num_states(), 20);
        assert!(read_config(r#"{"kappa": 1, "eps": 1}"#.as_bytes()).is_err());
        assert!(read_config(r#"{"kappa": 1, "eps": 1, "base": [0.5, 0.6]}"#.as_bytes()).is_err());
        assert!(read_config(r#"{"kappa": 0, "eps": 1, "base": [0.5, 0.5]}"#.as_bytes()).is_err());
    }

    #[test]
    fn batch_round_trip_is_exact() {
        let data = ObservationArray::validate_and_count(vec![vec![0, 1, 1], vec![1, 1], vec![0]], 2).unwrap();
        let config = ModelConfig::new(1.5, 2.0, SimplexVector::new(vec![0.3, 0.7]).unwrap()).unwrap();
        let batch = run_batch(&data, &config, &EngineOptions::new(50, 3).with_log_scale_factor(1.25)).unwrap();
        let text = batch_to_json(&batch).unwrap();
        let back = batch_from_json(&text).unwrap();
        assert_eq!(back, batch);
        assert_eq!(batch_to_json(&back).unwrap(), text);
        let bad = text.replace("\"version\": 1", "\"version\": 9");
        assert!(batch_from_json(&bad).is_err());
    }

    #[test]
    fn weighted_sample_round_trip() {
        let law = WeightedSampleLaw::new(vec![0.1, 0.7], vec![0.25, 0.75]).unwrap();
        let mut out = Vec::new();
        write_weighted_sample(&mut out, &law).unwrap();
        let back = read_weighted_sample(out.as_slice()).unwrap();
        assert_eq!(back, law);
        assert!(read_weighted_sample("atom,weight\n0.1,-1\n".as_bytes()).is_err());
    }
}
