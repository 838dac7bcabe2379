//! Parameter-grid sweeps, labeled rows, dataset splits, and CSV persistence.
//!
//! A sweep walks the (problem, phase, E, ω) lattice in deterministic order
//! in two passes. The decision pass runs once per (problem, E, ω): the
//! one-period maps at different drive offsets φ are mutually similar (they
//! are monodromy matrices of the same periodic process read from shifted
//! time origins), so the existence verdict and distance describe the
//! process and are assigned from its zero-offset representative. The
//! feature pass then encodes, for every requested φ, the Choi matrix of the
//! map actually started at that offset — similar maps have equal spectra
//! but different Choi matrices, so each phase contributes a genuinely
//! distinct feature view of the same labeled process.
//!
//! Points whose spectra cannot be labeled become skip records instead of
//! silently vanishing; because verdicts are per-(E, ω), a skipped point is
//! skipped at every phase for the same reason. Rows labeled at the
//! tolerance boundary stay in the sweep output but are excluded by
//! [`Sweep::usable`], which the benchmark protocol trains on.

use std::f64::consts::PI;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{choi_eigensystem, feature_vector, FeatureVector, Scheme};
use crate::floquet::floquet_map;
use crate::lindblad::{ModelSpec, Problem};
use crate::markov::{decide_markovianity_with, DecisionOptions};

/// Rectangular sweep lattice. Both endpoint values are included when the
/// step lands on them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub e_min: f64,
    pub e_max: f64,
    pub e_step: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_step: f64,
    pub phases: Vec<f64>,
    pub problems: Vec<Problem>,
}

/// Phases the benchmark classifiers are trained on.
pub fn training_phases() -> Vec<f64> {
    vec![0.0, PI / 4.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0, 3.0 * PI / 4.0]
}

/// Held-out phases used only for evaluation.
pub fn test_phases() -> Vec<f64> {
    vec![PI / 8.0, 5.0 * PI / 8.0]
}

impl GridSpec {
    /// The benchmark lattice: E from 0 to π and ω from π/25 to 2π, both in
    /// steps of π/25. ω = 0 is excluded since the period diverges there.
    pub fn benchmark(problems: Vec<Problem>, phases: Vec<f64>) -> Self {
        GridSpec {
            e_min: 0.0,
            e_max: PI,
            e_step: PI / 25.0,
            omega_min: PI / 25.0,
            omega_max: 2.0 * PI,
            omega_step: PI / 25.0,
            phases,
            problems,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, step) in [("e_step", self.e_step), ("omega_step", self.omega_step)] {
            if !(step > 0.0) || !step.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {step}")));
            }
        }
        if !(self.omega_min > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega_min must be positive, got {}",
                self.omega_min
            )));
        }
        if self.e_min < 0.0 || self.e_max < self.e_min || self.omega_max < self.omega_min {
            return Err(Error::InvalidParameter("grid ranges are inverted".into()));
        }
        if self.phases.is_empty() || self.problems.is_empty() {
            return Err(Error::InvalidParameter("grid needs at least one phase and one problem".into()));
        }
        if self.problems.contains(&Problem::Custom) {
            return Err(Error::UnsupportedModel("grids sweep the named problems only".into()));
        }
        Ok(())
    }

    pub fn e_values(&self) -> Vec<f64> {
        lattice_axis(self.e_min, self.e_max, self.e_step)
    }

    pub fn omega_values(&self) -> Vec<f64> {
        lattice_axis(self.omega_min, self.omega_max, self.omega_step)
    }

    /// Lattice points in sweep order: problem, then phase, then E, then ω.
    pub fn points(&self) -> Vec<ModelSpec> {
        let es = self.e_values();
        let omegas = self.omega_values();
        let mut out = Vec::with_capacity(self.problems.len() * self.phases.len() * es.len() * omegas.len());
        for &problem in &self.problems {
            for &phi in &self.phases {
                for &e in &es {
                    for &omega in &omegas {
                        let build = match problem {
                            Problem::I => ModelSpec::problem_i,
                            Problem::II => ModelSpec::problem_ii,
                            Problem::Custom => unreachable!("validated above"),
                        };
                        out.push(build(e, omega, phi));
                    }
                }
            }
        }
        out
    }
}

fn lattice_axis(min: f64, max: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut i = 0usize;
    loop {
        let v = min + i as f64 * step;
        if v > max + step * 1e-9 {
            return out;
        }
        out.push(v);
        i += 1;
    }
}

/// One labeled, featurized lattice point. The three booleans are in-memory
/// marks; they are not persisted by the CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRow {
    pub problem: Problem,
    pub e: f64,
    pub omega: f64,
    pub phi: f64,
    /// 1 when the process at (problem, E, ω) admits a Floquet–Lindbladian,
    /// judged at the zero-offset representative of its drive-phase orbit;
    /// 0 otherwise. Features, by contrast, encode the map at `phi`.
    pub label: u8,
    pub mu_min: f64,
    pub features: FeatureVector,
    /// Choi spectrum degeneracy made eigenvector features unreliable.
    pub degenerate_features: bool,
    /// Non-Markovian verdict within `mu_tol` of the boundary.
    pub tolerance_boundary: bool,
    /// Degenerate map eigenvalues shared a merged log projector.
    pub merged_log: bool,
}

/// A lattice point that could not be labeled, with the failure rendered as
/// text for reporting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkipRecord {
    pub problem: Problem,
    pub e: f64,
    pub omega: f64,
    pub phi: f64,
    pub reason: String,
}

/// Outcome of sweeping one grid under one scheme.
#[derive(Debug, Clone, Default)]
pub struct Sweep {
    pub rows: Vec<LabeledRow>,
    pub skips: Vec<SkipRecord>,
}

impl Sweep {
    /// Rows trustworthy enough to train on: tolerance-boundary labels are
    /// excluded, degeneracy-marked rows stay.
    pub fn usable(&self) -> Vec<&LabeledRow> {
        self.rows.iter().filter(|r| !r.tolerance_boundary).collect()
    }
}

/// Labels and featurizes every lattice point under one scheme.
pub fn sweep(grid: &GridSpec, scheme: Scheme) -> Result<Sweep> {
    sweep_with(grid, scheme, &DecisionOptions::default())
}

/// [`sweep`] at explicit decision options.
pub fn sweep_with(grid: &GridSpec, scheme: Scheme, opts: &DecisionOptions) -> Result<Sweep> {
    Ok(sweep_schemes(grid, &[scheme], opts)?.pop().expect("one sweep per scheme"))
}

/// Phase-independent outcome of the decision pass at one (problem, E, ω).
#[derive(Debug, Clone)]
struct Verdict {
    label: u8,
    mu_min: f64,
    tolerance_boundary: bool,
    merged_log: bool,
}

/// Sweeps several schemes in two passes. The decision pass labels each
/// distinct (problem, E, ω) from its zero-offset map; the feature pass
/// integrates the map at every requested phase and encodes it under every
/// scheme. Both passes run points in parallel; outputs keep lattice order.
pub fn sweep_schemes(
    grid: &GridSpec,
    schemes: &[Scheme],
    opts: &DecisionOptions,
) -> Result<Vec<Sweep>> {
    grid.validate()?;
    opts.validate()?;
    let es = grid.e_values();
    let omegas = grid.omega_values();

    let mut decision_points = Vec::with_capacity(grid.problems.len() * es.len() * omegas.len());
    for &problem in &grid.problems {
        for &e in &es {
            for &omega in &omegas {
                decision_points.push(build_model(problem, e, omega, 0.0));
            }
        }
    }
    let verdicts: Vec<Result<Verdict, String>> = decision_points
        .into_par_iter()
        .map(|model| decide_point(&model, opts).map_err(|e| e.to_string()))
        .collect();
    let verdict_of = |model: &ModelSpec| -> &Result<Verdict, String> {
        let pi = grid.problems.iter().position(|&p| p == model.problem).expect("sweep problem");
        let ei = es.iter().position(|&e| e == model.amplitude).expect("sweep amplitude");
        let oi = omegas.iter().position(|&o| o == model.omega).expect("sweep frequency");
        &verdicts[(pi * es.len() + ei) * omegas.len() + oi]
    };

    let points = grid.points();
    let outcomes: Vec<(ModelSpec, Result<Vec<LabeledRow>, String>)> = points
        .into_par_iter()
        .map(|model| {
            let outcome = match verdict_of(&model) {
                Ok(verdict) => {
                    featurize_point(&model, verdict, schemes).map_err(|e| e.to_string())
                }
                Err(reason) => Err(reason.clone()),
            };
            (model, outcome)
        })
        .collect();
    let mut sweeps: Vec<Sweep> = schemes.iter().map(|_| Sweep::default()).collect();
    for (model, outcome) in outcomes {
        match outcome {
            Ok(rows) => {
                for (sweep, row) in sweeps.iter_mut().zip(rows) {
                    sweep.rows.push(row);
                }
            }
            Err(reason) => {
                let record = SkipRecord {
                    problem: model.problem,
                    e: model.amplitude,
                    omega: model.omega,
                    phi: model.phase,
                    reason,
                };
                for sweep in &mut sweeps {
                    sweep.skips.push(record.clone());
                }
            }
        }
    }
    Ok(sweeps)
}

fn build_model(problem: Problem, e: f64, omega: f64, phi: f64) -> ModelSpec {
    match problem {
        Problem::I => ModelSpec::problem_i(e, omega, phi),
        Problem::II => ModelSpec::problem_ii(e, omega, phi),
        Problem::Custom => unreachable!("grids are validated to the named problems"),
    }
}

/// Decision pass at one lattice point; `model.phase` is expected to be the
/// zero-offset representative.
fn decide_point(model: &ModelSpec, opts: &DecisionOptions) -> Result<Verdict> {
    let map = floquet_map(model)?;
    let report = decide_markovianity_with(&map, opts)?;
    Ok(Verdict {
        label: report.answer as u8,
        mu_min: report.mu_min,
        tolerance_boundary: report.diagnostics.tolerance_boundary,
        merged_log: report.diagnostics.merged_degenerate_log,
    })
}

/// Feature pass: integrates the map at the row's own phase and encodes it
/// under every scheme, attaching the phase-independent verdict.
fn featurize_point(model: &ModelSpec, verdict: &Verdict, schemes: &[Scheme]) -> Result<Vec<LabeledRow>> {
    let map = floquet_map(model)?;
    let es = choi_eigensystem(&map)?;
    let spectrum_degenerate = es.degenerate();
    schemes
        .iter()
        .map(|&scheme| {
            let (features, degenerate) = feature_vector(&map, scheme)?;
            debug_assert_eq!(degenerate, spectrum_degenerate && matches!(scheme, Scheme::Eigensystem | Scheme::EigensystemNormalized));
            Ok(LabeledRow {
                problem: model.problem,
                e: model.amplitude,
                omega: model.omega,
                phi: model.phase,
                label: verdict.label,
                mu_min: verdict.mu_min,
                features,
                degenerate_features: degenerate,
                tolerance_boundary: verdict.tolerance_boundary,
                merged_log: verdict.merged_log,
            })
        })
        .collect()
}

/// Deterministic shuffled split into ⌈ratio·n⌉ training rows and the rest.
pub fn split(rows: &[LabeledRow], ratio: f64, seed: u64) -> Result<(Vec<LabeledRow>, Vec<LabeledRow>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter(format!("split ratio must be in (0, 1), got {ratio}")));
    }
    let n = rows.len();
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let take = ceil_with_snap(ratio * n as f64, n);
    let train = indices[..take].iter().map(|&i| rows[i].clone()).collect();
    let rest = indices[take..].iter().map(|&i| rows[i].clone()).collect();
    Ok((train, rest))
}

/// Ceiling that first snaps products like 0.9·n back onto the integer they
/// mathematically equal, so roundoff cannot steal or add a row.
fn ceil_with_snap(x: f64, n: usize) -> usize {
    let snapped = if (x - x.round()).abs() < 1e-9 * (n.max(1) as f64) { x.round() } else { x };
    snapped.ceil() as usize
}

/// Feature matrix and label vector in row order.
pub fn design_matrix(rows: &[&LabeledRow]) -> (Vec<Vec<f64>>, Vec<u8>) {
    let x = rows.iter().map(|r| r.features.values.clone()).collect();
    let y = rows.iter().map(|r| r.label).collect();
    (x, y)
}

const FIXED_COLUMNS: [&str; 6] = ["problem", "E", "omega", "phi", "label", "mu_min"];

/// Writes rows as CSV with the header
/// `problem,E,omega,phi,label,mu_min,{scheme}.f0,…`; feature column names
/// carry the scheme so files are self-describing. The file appears
/// atomically via a temporary sibling. All rows must match `scheme`.
pub fn write_csv(path: &Path, scheme: Scheme, rows: &[LabeledRow]) -> Result<()> {
    let width = rows
        .first()
        .map(|r| r.features.values.len())
        .unwrap_or_else(|| scheme.width(2));
    let mut text = String::new();
    text.push_str(&FIXED_COLUMNS.join(","));
    for i in 0..width {
        text.push_str(&format!(",{scheme}.f{i}"));
    }
    text.push('\n');
    for row in rows {
        if row.features.scheme != scheme {
            return Err(Error::SchemaMismatch(format!(
                "row encoded as {} cannot enter a {} file",
                row.features.scheme, scheme
            )));
        }
        if row.features.values.len() != width {
            return Err(Error::FeatureWidth { got: row.features.values.len(), expected: width });
        }
        text.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{},{:.16e}",
            row.problem, row.e, row.omega, row.phi, row.label, row.mu_min
        ));
        for v in &row.features.values {
            text.push_str(&format!(",{v:.16e}"));
        }
        text.push('\n');
    }
    let tmp = path.with_extension("csv.tmp");
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(text.as_bytes())?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads a CSV written by [`write_csv`], inferring the scheme from the
/// feature column names.
pub fn read_csv(path: &Path) -> Result<(Vec<LabeledRow>, Scheme)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::SchemaMismatch("empty file has no header".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < FIXED_COLUMNS.len() + 1 {
        return Err(Error::SchemaMismatch(format!(
            "header has {} columns, expected at least {}",
            columns.len(),
            FIXED_COLUMNS.len() + 1
        )));
    }
    for (got, want) in columns.iter().zip(FIXED_COLUMNS.iter()) {
        if got != want {
            return Err(Error::SchemaMismatch(format!("column {got:?} where {want:?} belongs")));
        }
    }
    let mut scheme: Option<Scheme> = None;
    for (i, column) in columns[FIXED_COLUMNS.len()..].iter().enumerate() {
        let (prefix, index) = column
            .rsplit_once(".f")
            .ok_or_else(|| Error::SchemaMismatch(format!("feature column {column:?} lacks a scheme prefix")))?;
        let parsed: Scheme = prefix.parse()?;
        if *scheme.get_or_insert(parsed) != parsed {
            return Err(Error::SchemaMismatch("mixed scheme prefixes in one file".into()));
        }
        if index.parse::<usize>().ok() != Some(i) {
            return Err(Error::SchemaMismatch(format!(
                "feature columns out of order at {column:?}"
            )));
        }
    }
    let scheme = scheme.expect("at least one feature column checked above");
    let width = columns.len() - FIXED_COLUMNS.len();

    let mut rows = Vec::new();
    for (lineno, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("{} fields where {} columns were declared", fields.len(), columns.len()),
            });
        }
        let parse_f64 = |field: &str, name: &str| -> Result<f64> {
            field.parse::<f64>().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("{name} is not a number: {field:?}"),
            })
        };
        let problem: Problem = fields[0].parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            message: format!("unknown problem {:?}", fields[0]),
        })?;
        let label: u8 = match fields[4] {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("label must be 0 or 1, got {other:?}"),
                })
            }
        };
        let mut values = Vec::with_capacity(width);
        for (field, column) in fields[6..].iter().zip(&columns[6..]) {
            values.push(parse_f64(field, column)?);
        }
        rows.push(LabeledRow {
            problem,
            e: parse_f64(fields[1], "E")?,
            omega: parse_f64(fields[2], "omega")?,
            phi: parse_f64(fields[3], "phi")?,
            label,
            mu_min: parse_f64(fields[5], "mu_min")?,
            features: FeatureVector { scheme, values },
            degenerate_features: false,
            tolerance_boundary: false,
            merged_log: false,
        });
    }
    Ok((rows, scheme))
}

/// [`read_csv`] that additionally requires the file's scheme to match.
pub fn read_csv_expect(path: &Path, scheme: Scheme) -> Result<Vec<LabeledRow>> {
    let (rows, found) = read_csv(path)?;
    if found != scheme {
        return Err(Error::SchemaMismatch(format!(
            "file holds {found} features where {scheme} was requested"
        )));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn tiny_grid() -> GridSpec {
        GridSpec {
            e_min: 0.5,
            e_max: 1.5,
            e_step: 1.0,
            omega_min: 0.8,
            omega_max: 1.6,
            omega_step: 0.4,
            phases: vec![0.3],
            problems: vec![Problem::I],
        }
    }

    fn synthetic_rows(n: usize, scheme: Scheme) -> Vec<LabeledRow> {
        (0..n)
            .map(|i| LabeledRow {
                problem: if i % 2 == 0 { Problem::I } else { Problem::II },
                e: i as f64 * 0.25,
                omega: 1.0 + (i as f64) / 7.0,
                phi: (i as f64) * 0.01,
                label: (i % 3 == 0) as u8,
                mu_min: (i as f64) * 1e-3,
                features: FeatureVector {
                    scheme,
                    values: (0..scheme.width(2)).map(|j| (i * 31 + j) as f64 / 17.0).collect(),
                },
                degenerate_features: false,
                tolerance_boundary: false,
                merged_log: false,
            })
            .collect()
    }

    #[test]
    fn benchmark_axes_have_the_documented_counts() {
        let grid = GridSpec::benchmark(vec![Problem::I], vec![0.0]);
        let es = grid.e_values();
        let omegas = grid.omega_values();
        assert_eq!(es.len(), 26);
        assert_eq!(omegas.len(), 50);
        assert_eq!(es[0], 0.0);
        assert!((es[25] - PI).abs() < 1e-12);
        assert!((omegas[0] - PI / 25.0).abs() < 1e-12);
        assert!((omegas[49] - 2.0 * PI).abs() < 1e-12);
        assert_eq!(grid.points().len(), 1300);

        let two = GridSpec::benchmark(vec![Problem::I, Problem::II], vec![0.0, 0.5]);
        assert_eq!(two.points().len(), 5200);
    }

    #[test]
    fn grid_validation_rejects_bad_shapes() {
        let mut grid = tiny_grid();
        grid.omega_min = 0.0;
        assert!(grid.validate().is_err());
        let mut grid = tiny_grid();
        grid.e_step = -1.0;
        assert!(grid.validate().is_err());
        let mut grid = tiny_grid();
        grid.phases.clear();
        assert!(grid.validate().is_err());
        let mut grid = tiny_grid();
        grid.problems = vec![Problem::Custom];
        assert!(grid.validate().is_err());
    }

    #[test]
    fn protocol_phases_are_disjoint() {
        let train = training_phases();
        let test = test_phases();
        assert_eq!(train.len(), 6);
        assert_eq!(test.len(), 2);
        for t in &test {
            assert!(train.iter().all(|p| (p - t).abs() > 1e-12));
        }
    }

    #[test]
    fn sweep_covers_the_lattice_in_order() {
        let grid = tiny_grid();
        let schemes = [Scheme::Eigvals, Scheme::Eigensystem];
        let sweeps = sweep_schemes(&grid, &schemes, &DecisionOptions::default()).unwrap();
        assert_eq!(sweeps.len(), 2);
        for (sweep, scheme) in sweeps.iter().zip(schemes) {
            assert_eq!(sweep.rows.len() + sweep.skips.len(), 6);
            assert!(sweep.skips.is_empty(), "{:?}", sweep.skips);
            for row in &sweep.rows {
                assert_eq!(row.features.scheme, scheme);
                assert!(row.label <= 1);
                assert!(row.mu_min >= 0.0);
            }
            let keys: Vec<(u64, u64)> = sweep
                .rows
                .iter()
                .map(|r| (r.e.to_bits(), r.omega.to_bits()))
                .collect();
            let mut sorted = keys.clone();
            sorted.sort();
            assert_eq!(keys, sorted, "rows left lattice order");
        }
        // Labeling once per point: feature payloads agree across runs.
        let again = sweep_schemes(&grid, &schemes, &DecisionOptions::default()).unwrap();
        for (a, b) in sweeps[1].rows.iter().zip(&again[1].rows) {
            assert_eq!(a.features.values, b.features.values);
            assert_eq!(a.label, b.label);
        }
    }

    #[test]
    fn labels_are_shared_across_drive_phases() {
        // The maps at different drive offsets are similar (same process read
        // from shifted time origins), so rows share the zero-offset verdict
        // while their features encode genuinely different Choi matrices.
        let grid = GridSpec {
            e_min: 0.879645943005142,
            e_max: 0.879645943005142,
            e_step: 1.0,
            omega_min: 1.382300767579509,
            omega_max: 1.382300767579509,
            omega_step: 1.0,
            phases: vec![0.0, PI / 2.0],
            problems: vec![Problem::I],
        };
        let sweep = sweep(&grid, Scheme::Eigvals).unwrap();
        assert!(sweep.skips.is_empty(), "{:?}", sweep.skips);
        assert_eq!(sweep.rows.len(), 2);
        let (zero, shifted) = (&sweep.rows[0], &sweep.rows[1]);
        assert_eq!(zero.phi, 0.0);
        assert_eq!(shifted.phi, PI / 2.0);
        assert_eq!(zero.label, shifted.label);
        assert_eq!(zero.mu_min.to_bits(), shifted.mu_min.to_bits());
        assert_ne!(zero.features.values, shifted.features.values);

        // At this lattice point the shifted map taken in isolation reaches
        // the opposite verdict: the Markovianity question is origin
        // dependent, which is exactly why rows pin the canonical origin.
        let map = floquet_map(&ModelSpec::problem_i(zero.e, zero.omega, PI / 2.0)).unwrap();
        let isolated = crate::markov::decide_markovianity(&map).unwrap();
        assert_ne!(isolated.answer as u8, zero.label);
    }

    #[test]
    fn undriven_column_is_fully_markovian() {
        // ω = 2/(2m+1) puts the undriven phases ΔT on the log branch cut;
        // the axis below stays clear of those resonances.
        let grid = GridSpec {
            e_min: 0.0,
            e_max: 0.0,
            e_step: 1.0,
            omega_min: 0.45,
            omega_max: 2.45,
            omega_step: 0.5,
            phases: vec![0.0],
            problems: vec![Problem::I, Problem::II],
        };
        let sweep = sweep(&grid, Scheme::Eigvals).unwrap();
        assert!(sweep.skips.is_empty(), "{:?}", sweep.skips);
        assert_eq!(sweep.rows.len(), 10);
        for row in &sweep.rows {
            assert_eq!(row.label, 1, "E=0 point labeled no at omega {}", row.omega);
            assert_eq!(row.mu_min, 0.0);
        }
    }

    #[test]
    fn split_sizes_and_determinism() {
        let rows = synthetic_rows(1300, Scheme::Eigvals);
        let (train, rest) = split(&rows, 0.9, 7).unwrap();
        assert_eq!(train.len(), 1170);
        assert_eq!(rest.len(), 130);

        let (again_train, again_rest) = split(&rows, 0.9, 7).unwrap();
        assert_eq!(train, again_train);
        assert_eq!(rest, again_rest);

        let (other_train, _) = split(&rows, 0.9, 8).unwrap();
        assert_ne!(train, other_train);

        // Multiset union equals the input.
        let mut all: Vec<u64> = train.iter().chain(&rest).map(|r| r.e.to_bits()).collect();
        all.sort();
        let mut want: Vec<u64> = rows.iter().map(|r| r.e.to_bits()).collect();
        want.sort();
        assert_eq!(all, want);

        assert!(split(&rows, 1.0, 0).is_err());
        assert!(split(&rows, 0.0, 0).is_err());
    }

    #[test]
    fn csv_round_trip_is_bitwise() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let rows = synthetic_rows(17, Scheme::EigvalsRoots);
        write_csv(&path, Scheme::EigvalsRoots, &rows).unwrap();
        let (back, scheme) = read_csv(&path).unwrap();
        assert_eq!(scheme, Scheme::EigvalsRoots);
        assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.problem, b.problem);
            assert_eq!(a.label, b.label);
            assert_eq!(a.e.to_bits(), b.e.to_bits());
            assert_eq!(a.omega.to_bits(), b.omega.to_bits());
            assert_eq!(a.phi.to_bits(), b.phi.to_bits());
            assert_eq!(a.mu_min.to_bits(), b.mu_min.to_bits());
            for (x, y) in a.features.values.iter().zip(&b.features.values) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        let header = fs::read_to_string(&path).unwrap();
        assert!(header.starts_with("problem,E,omega,phi,label,mu_min,eigvals_roots.f0,"));
    }

    #[test]
    fn csv_schema_is_enforced() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let rows = synthetic_rows(3, Scheme::Eigvals);
        write_csv(&path, Scheme::Eigvals, &rows).unwrap();
        assert!(read_csv_expect(&path, Scheme::Eigvals).is_ok());
        assert!(matches!(
            read_csv_expect(&path, Scheme::Elements),
            Err(Error::SchemaMismatch(_))
        ));
        assert!(matches!(
            write_csv(&path, Scheme::Elements, &rows),
            Err(Error::SchemaMismatch(_))
        ));

        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.replace("omega", "Omega")).unwrap();
        assert!(matches!(read_csv(&path), Err(Error::SchemaMismatch(_))));

        let truncated = "problem,E,omega,phi,label,mu_min,eigvals.f0\nI,0.0,1.0,0.0,1\n";
        fs::write(&path, truncated).unwrap();
        assert!(matches!(read_csv(&path), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn empty_row_lists_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        write_csv(&path, Scheme::Eigensystem, &[]).unwrap();
        let (rows, scheme) = read_csv(&path).unwrap();
        assert!(rows.is_empty());
        assert_eq!(scheme, Scheme::Eigensystem);
    }

    #[test]
    fn usable_rows_drop_boundary_labels() {
        let mut rows = synthetic_rows(4, Scheme::Eigvals);
        rows[2].tolerance_boundary = true;
        rows[3].degenerate_features = true;
        let sweep = Sweep { rows, skips: Vec::new() };
        let usable = sweep.usable();
        assert_eq!(usable.len(), 3);
        assert!(usable.iter().all(|r| !r.tolerance_boundary));
        let (x, y) = design_matrix(&usable);
        assert_eq!(x.len(), 3);
        assert_eq!(y.len(), 3);
        assert_eq!(x[0].len(), Scheme::Eigvals.width(2));
    }
}
