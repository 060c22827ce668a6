//! The `pareto`, `hypervolume` and `spaces` commands.

use std::path::Path;

use linas_core::metrics::{trace_of_points, HypervolumeTrace};
use linas_core::objective::to_minimization;
use linas_core::space::order_of_magnitude;
use linas_core::{pareto_front, BuiltinSpace, Direction, ObjectiveSpec, SearchSpace};

use crate::error::{CliError, Result};
use crate::formats::{read_space_file, read_store_jsonl, space_to_json, write_front_csv, StoreLine};

/// Parses `max,min`-style direction lists.
pub fn parse_directions(text: &str) -> Result<Vec<ObjectiveSpec>> {
    text.split(',')
        .enumerate()
        .map(|(k, d)| {
            let dir = match d.trim() {
                "max" | "maximize" => Direction::Maximize,
                "min" | "minimize" => Direction::Minimize,
                other => return Err(CliError::Config(format!("`--directions`: unknown direction `{other}`"))),
            };
            Ok(ObjectiveSpec::new(format!("obj_{}", k + 1), dir))
        })
        .collect()
}

/// Parses a comma-separated list of numbers.
pub fn parse_point(text: &str, field: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| CliError::Config(format!("`{field}`: bad number `{v}`"))))
        .collect()
}

fn check_width(lines: &[StoreLine], objectives: &[ObjectiveSpec], path: &Path) -> Result<()> {
    match lines.first() {
        Some(l) if l.values.len() != objectives.len() => Err(CliError::Config(format!(
            "`--directions`: {} given but {} has {} objectives",
            objectives.len(),
            path.display(),
            l.values.len()
        ))),
        _ => Ok(()),
    }
}

/// Non-dominated records of a store, in store order.
pub fn front_of(lines: &[StoreLine], objectives: &[ObjectiveSpec]) -> Result<Vec<usize>> {
    let pts: Vec<Vec<f64>> = lines.iter().map(|l| to_minimization(objectives, &l.values)).collect();
    Ok(pareto_front(&pts)?)
}

pub fn cmd_pareto(input: &Path, output: &Path, objectives: &[ObjectiveSpec]) -> Result<usize> {
    let lines = read_store_jsonl(input)?;
    check_width(&lines, objectives, input)?;
    let idx = front_of(&lines, objectives)?;
    let front: Vec<&StoreLine> = idx.iter().map(|&i| &lines[i]).collect();
    write_front_csv(output, &front)?;
    Ok(front.len())
}

/// Hypervolume trace of a store. `reference` is in raw objective units;
/// without one, the worst measured value per objective pushed out by 1% of
/// its range is used. With `normalized`, objectives are min-max scaled over
/// the store and the reference is `(1, 1)`.
pub fn cmd_hypervolume(
    input: &Path,
    objectives: &[ObjectiveSpec],
    reference: Option<&[f64]>,
    normalized: bool,
    stride: usize,
) -> Result<HypervolumeTrace> {
    if stride == 0 {
        return Err(CliError::Config("`--stride`: must be at least 1".into()));
    }
    if objectives.len() != 2 {
        return Err(CliError::Config("`--directions`: hypervolume needs exactly two objectives".into()));
    }
    let lines = read_store_jsonl(input)?;
    check_width(&lines, objectives, input)?;
    if lines.is_empty() {
        return Ok(HypervolumeTrace::default());
    }
    let mut pts: Vec<Vec<f64>> = lines.iter().map(|l| to_minimization(objectives, &l.values)).collect();
    let lo: Vec<f64> = (0..2).map(|j| pts.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..2).map(|j| pts.iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max)).collect();
    if let Some(r) = reference {
        if r.len() != 2 {
            return Err(CliError::Config(format!("`--ref`: expected 2 values, got {}", r.len())));
        }
    }
    let raw_ref = reference.map(|r| to_minimization(objectives, r));
    if !normalized {
        let r = raw_ref.unwrap_or_else(|| (0..2).map(|j| hi[j] + 0.01 * (hi[j] - lo[j])).collect());
        return Ok(trace_of_points(&pts, &r, stride)?);
    }
    if let Some(j) = (0..2).find(|&j| hi[j] <= lo[j] || hi[j].is_nan()) {
        return Err(CliError::Config(format!("objective {} has zero range; cannot normalize", j + 1)));
    }
    let scale = |p: &[f64]| -> Vec<f64> { (0..2).map(|j| (p[j] - lo[j]) / (hi[j] - lo[j])).collect() };
    for p in &mut pts {
        *p = scale(p);
    }
    let r = raw_ref.map_or_else(|| vec![1.0, 1.0], |r| scale(&r));
    Ok(trace_of_points(&pts, &r, stride)?)
}

/// Loads a built-in space by name, or a space file.
pub fn load_space(kind: &str) -> Result<SearchSpace> {
    match kind.parse::<BuiltinSpace>() {
        Ok(b) => Ok(SearchSpace::builtin(b)),
        Err(e) => {
            let path = Path::new(kind);
            if path.is_file() {
                read_space_file(path)
            } else {
                Err(CliError::Config(format!("{e}")))
            }
        }
    }
}

/// Compact space JSON on the first line, then the exact cardinality and
/// its order of magnitude.
pub fn cmd_spaces(kind: &str) -> Result<String> {
    let space = load_space(kind)?;
    let n = space.cardinality();
    Ok(format!(
        "{}\ncardinality {}\norder_of_magnitude {}\n",
        space_to_json(&space),
        n,
        order_of_magnitude(&n)
    ))
}
