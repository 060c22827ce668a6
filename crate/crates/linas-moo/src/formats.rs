//! On-disk formats: space definitions, tabular data, measurement stores
//! and CSV reports.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use linas_core::metrics::HypervolumeTrace;
use linas_core::objective::{Measurement, ObjectiveSpec};
use linas_core::{DependencyRule, DesignVariable, Genotype, SearchSpace};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Field order is alphabetical so serialized keys come out sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    pub name: String,
    #[serde(default)]
    pub rules: Vec<RuleFile>,
    pub variables: Vec<VariableFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleFile {
    /// Option index (as a string key) to the dependents it activates.
    pub activation: BTreeMap<String, Vec<usize>>,
    pub controller: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableFile {
    #[serde(default)]
    pub group: String,
    pub name: String,
    pub options: Vec<i64>,
}

impl SpaceFile {
    pub fn from_space(space: &SearchSpace) -> Self {
        SpaceFile {
            name: space.name().to_string(),
            rules: space
                .rules()
                .iter()
                .map(|r| RuleFile {
                    activation: r.activation.iter().enumerate().map(|(k, deps)| (k.to_string(), deps.clone())).collect(),
                    controller: r.controller,
                })
                .collect(),
            variables: space
                .variables()
                .iter()
                .map(|v| VariableFile { group: v.group.clone(), name: v.name.clone(), options: v.options.clone() })
                .collect(),
        }
    }

    pub fn into_space(self) -> Result<SearchSpace> {
        let variables: Vec<DesignVariable> =
            self.variables.into_iter().map(|v| DesignVariable::new(v.name, v.options, v.group)).collect();
        let mut rules = Vec::with_capacity(self.rules.len());
        for r in self.rules {
            let arity = variables.get(r.controller).map(DesignVariable::arity).ok_or_else(|| {
                CliError::Config(format!("rule controller {} is not a variable index", r.controller))
            })?;
            let mut activation = vec![Vec::new(); arity];
            for (key, deps) in r.activation {
                let k: usize = key
                    .parse()
                    .ok()
                    .filter(|&k| k < arity)
                    .ok_or_else(|| CliError::Config(format!("activation key `{key}` is not an option index")))?;
                activation[k] = deps;
            }
            rules.push(DependencyRule { controller: r.controller, activation });
        }
        Ok(SearchSpace::new(self.name, variables, rules)?)
    }
}

/// Compact, key-sorted JSON; identical spaces give identical bytes.
pub fn space_to_json(space: &SearchSpace) -> String {
    serde_json::to_string(&SpaceFile::from_space(space)).expect("space files always serialize")
}

pub fn read_space_file(path: &Path) -> Result<SearchSpace> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let file: SpaceFile = serde_path_to_error::deserialize(de)
        .map_err(|e| CliError::Config(format!("{}: {} at `{}`", path.display(), e.inner(), e.path())))?;
    file.into_space()
}

/// Rows of a `genotype,obj_1,...,obj_m` CSV file.
pub fn read_tabular_csv(path: &Path) -> Result<Vec<(Genotype, Vec<f64>)>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, 1, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, 1, e))?.clone();
    if headers.get(0) != Some("genotype") || headers.len() < 2 {
        return Err(CliError::Parse {
            path: path.into(),
            line: 1,
            message: "header must be `genotype,obj_1,...`".into(),
        });
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| csv_error(path, line, e))?;
        let parse_err = |message: String| CliError::Parse { path: path.into(), line, message };
        let genotype: Genotype = record[0].parse().map_err(|e: linas_core::Error| parse_err(e.to_string()))?;
        let values = record
            .iter()
            .skip(1)
            .map(|v| v.trim().parse::<f64>().map_err(|e| parse_err(format!("`{v}`: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push((genotype, values));
    }
    Ok(rows)
}

fn csv_error(path: &Path, line: usize, e: csv::Error) -> CliError {
    let line = e.position().map_or(line, |p| p.line() as usize);
    CliError::Parse { path: path.into(), line, message: e.to_string() }
}

/// One JSONL line of a measurement store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreLine {
    pub eval_index: usize,
    pub genotype: String,
    pub iteration: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_normalized: Option<f64>,
    pub source: String,
    pub values: Vec<f64>,
}

impl StoreLine {
    pub fn genotype(&self) -> std::result::Result<Genotype, linas_core::Error> {
        self.genotype.parse()
    }
}

/// Run-level `(l_min, l_max)` of the objective named `latency`, if any.
fn latency_bounds(objectives: &[ObjectiveSpec], records: &[Measurement]) -> Option<(usize, f64, f64)> {
    let k = objectives.iter().position(|o| o.name == "latency")?;
    let lo = records.iter().map(|r| r.values[k]).fold(f64::INFINITY, f64::min);
    let hi = records.iter().map(|r| r.values[k]).fold(f64::NEG_INFINITY, f64::max);
    (hi > 0.0).then_some((k, lo, hi))
}

pub fn store_lines(objectives: &[ObjectiveSpec], records: &[Measurement]) -> Vec<StoreLine> {
    let bounds = latency_bounds(objectives, records);
    records
        .iter()
        .map(|r| StoreLine {
            eval_index: r.eval_index,
            genotype: r.genotype.to_string(),
            iteration: r.iteration,
            latency_normalized: bounds
                .and_then(|(k, lo, hi)| linas_core::normalize_latency(r.values[k], lo, hi).ok()),
            source: r.source.clone(),
            values: r.values.clone(),
        })
        .collect()
}

pub fn write_store_jsonl(path: &Path, objectives: &[ObjectiveSpec], records: &[Measurement]) -> Result<()> {
    let mut out = String::new();
    for line in store_lines(objectives, records) {
        out.push_str(&serde_json::to_string(&line).expect("store lines always serialize"));
        out.push('\n');
    }
    fs::write(path, out).map_err(CliError::io(path))
}

pub fn read_store_jsonl(path: &Path) -> Result<Vec<StoreLine>> {
    let file = fs::File::open(path).map_err(CliError::io(path))?;
    let mut lines = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(CliError::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: StoreLine = serde_json::from_str(&line)
            .map_err(|e| CliError::Parse { path: path.into(), line: i + 1, message: e.to_string() })?;
        lines.push(parsed);
    }
    if let Some(m) = lines.first().map(|l| l.values.len()) {
        if let Some((i, l)) = lines.iter().enumerate().find(|(_, l)| l.values.len() != m) {
            return Err(CliError::Parse {
                path: path.into(),
                line: i + 1,
                message: format!("expected {m} values, found {}", l.values.len()),
            });
        }
    }
    Ok(lines)
}

/// CSV mirror of the store: `eval_index,genotype,<objective names>,source,iteration`.
pub fn write_store_csv(path: &Path, objectives: &[ObjectiveSpec], records: &[Measurement]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["eval_index".to_string(), "genotype".to_string()];
    header.extend(objectives.iter().map(|o| o.name.clone()));
    header.extend(["source".to_string(), "iteration".to_string()]);
    w.write_record(&header).map_err(|e| csv_write_error(path, e))?;
    for r in records {
        let mut row = vec![r.eval_index.to_string(), r.genotype.to_string()];
        row.extend(r.values.iter().map(f64::to_string));
        row.extend([r.source.clone(), r.iteration.to_string()]);
        w.write_record(&row).map_err(|e| csv_write_error(path, e))?;
    }
    w.flush().map_err(CliError::io(path))
}

pub fn write_trace_csv(path: &Path, trace: &HypervolumeTrace) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["eval_count", "hypervolume"]).map_err(|e| csv_write_error(path, e))?;
    for (count, hv) in &trace.points {
        w.write_record([count.to_string(), hv.to_string()]).map_err(|e| csv_write_error(path, e))?;
    }
    w.flush().map_err(CliError::io(path))
}

pub fn trace_csv_string(trace: &HypervolumeTrace) -> String {
    let mut out = String::from("eval_count,hypervolume\n");
    for (count, hv) in &trace.points {
        out.push_str(&format!("{count},{hv}\n"));
    }
    out
}

/// Non-dominated store lines: `eval_index,genotype,obj_1..obj_m,source,iteration`.
pub fn write_front_csv(path: &Path, front: &[&StoreLine]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let m = front.first().map_or(0, |l| l.values.len());
    let mut header = vec!["eval_index".to_string(), "genotype".to_string()];
    header.extend((1..=m).map(|k| format!("obj_{k}")));
    header.extend(["source".to_string(), "iteration".to_string()]);
    w.write_record(&header).map_err(|e| csv_write_error(path, e))?;
    for l in front {
        let mut row = vec![l.eval_index.to_string(), l.genotype.clone()];
        row.extend(l.values.iter().map(f64::to_string));
        row.extend([l.source.clone(), l.iteration.to_string()]);
        w.write_record(&row).map_err(|e| csv_write_error(path, e))?;
    }
    w.flush().map_err(CliError::io(path))
}

pub(crate) fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_write_error(path, e))
}

pub(crate) fn csv_write_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io { path: path.into(), source },
        other => CliError::Io { path: path.into(), source: std::io::Error::other(format!("{other:?}")) },
    }
}

pub(crate) fn write_json_lines<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(CliError::io(path))?;
    for item in items {
        let line = serde_json::to_string(item).expect("log lines always serialize");
        writeln!(file, "{line}").map_err(CliError::io(path))?;
    }
    Ok(())
}
