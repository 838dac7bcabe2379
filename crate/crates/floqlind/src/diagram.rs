//! Yes/no partition of the (E, ω) plane as CSV tables and static SVG heat
//! grids, with optional prediction and disagreement panels.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::dataset::LabeledRow;
use crate::error::{Error, Result};

/// Cell value marking a lattice point no row labeled, as happens when
/// flagged points were skipped out of a sweep.
pub const UNLABELED: u8 = 2;

/// Labels arranged on a rectangular (E, ω) lattice, E-major like sweep
/// output. Cells hold 0, 1, or [`UNLABELED`]. `prediction` aligns with
/// `truth` when present.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionGrid {
    pub e_values: Vec<f64>,
    pub omega_values: Vec<f64>,
    pub truth: Vec<u8>,
    pub prediction: Option<Vec<u8>>,
}

impl PartitionGrid {
    /// Assembles the lattice from sweep rows of a single problem and phase.
    /// Axis values are the distinct E and ω seen; cells no row covers stay
    /// [`UNLABELED`]. A cell covered twice is an error.
    pub fn from_rows(rows: &[LabeledRow]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("a partition grid needs at least one row".into()));
        }
        let mut e_values: Vec<f64> = rows.iter().map(|r| r.e).collect();
        e_values.sort_by(|a, b| a.partial_cmp(b).expect("finite grid values"));
        e_values.dedup();
        let mut omega_values: Vec<f64> = rows.iter().map(|r| r.omega).collect();
        omega_values.sort_by(|a, b| a.partial_cmp(b).expect("finite grid values"));
        omega_values.dedup();

        let mut truth = vec![UNLABELED; e_values.len() * omega_values.len()];
        let mut seen = vec![false; truth.len()];
        for row in rows {
            let ie = e_values.iter().position(|&v| v == row.e).expect("collected above");
            let io = omega_values.iter().position(|&v| v == row.omega).expect("collected above");
            let at = ie * omega_values.len() + io;
            if seen[at] {
                return Err(Error::InvalidParameter(format!(
                    "duplicate cell at E={}, omega={}",
                    row.e, row.omega
                )));
            }
            seen[at] = true;
            truth[at] = row.label;
        }
        Ok(PartitionGrid { e_values, omega_values, truth, prediction: None })
    }

    /// Attaches a prediction panel aligned with the truth cells.
    pub fn with_prediction(mut self, prediction: Vec<u8>) -> Result<Self> {
        if prediction.len() != self.truth.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} predictions against {} cells",
                prediction.len(),
                self.truth.len()
            )));
        }
        self.prediction = Some(prediction);
        Ok(self)
    }

    /// Flat index of the cell at exactly these axis values, if both lie on
    /// the lattice.
    pub fn cell_index(&self, e: f64, omega: f64) -> Option<usize> {
        let ie = self.e_values.iter().position(|&v| v == e)?;
        let io = self.omega_values.iter().position(|&v| v == omega)?;
        Some(ie * self.omega_values.len() + io)
    }

    /// Fraction of labeled cells carrying a yes. Unlabeled cells count in
    /// neither numerator nor denominator.
    pub fn yes_fraction(&self) -> f64 {
        let labeled = self.truth.iter().filter(|&&v| v != UNLABELED).count();
        self.truth.iter().filter(|&&v| v == 1).count() as f64 / labeled as f64
    }

    pub fn unlabeled_cells(&self) -> usize {
        self.truth.iter().filter(|&&v| v == UNLABELED).count()
    }

    /// Cells where prediction and truth differ, when a prediction exists.
    /// An unlabeled cell cannot disagree.
    pub fn disagreement(&self) -> Option<Vec<u8>> {
        self.prediction.as_ref().map(|p| {
            p.iter()
                .zip(&self.truth)
                .map(|(&a, &b)| (b != UNLABELED && a != UNLABELED && a != b) as u8)
                .collect()
        })
    }

    /// Writes one line per cell: `E,omega,truth[,prediction,disagreement]`.
    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let disagreement = self.disagreement();
        let mut text = String::from("E,omega,truth");
        if self.prediction.is_some() {
            text.push_str(",prediction,disagreement");
        }
        text.push('\n');
        for (ie, &e) in self.e_values.iter().enumerate() {
            for (io, &omega) in self.omega_values.iter().enumerate() {
                let at = ie * self.omega_values.len() + io;
                text.push_str(&format!("{e:.16e},{omega:.16e},{}", self.truth[at]));
                if let (Some(p), Some(d)) = (&self.prediction, &disagreement) {
                    text.push_str(&format!(",{},{}", p[at], d[at]));
                }
                text.push('\n');
            }
        }
        write_atomic(path, text.as_bytes())
    }

    /// Renders panels of colored cells: truth alone, or truth, prediction,
    /// and disagreement side by side. One `<rect>` per cell per panel.
    pub fn to_svg(&self, path: &Path) -> Result<()> {
        let svg = self.render_svg();
        write_atomic(path, svg.as_bytes())
    }

    fn render_svg(&self) -> String {
        const CELL: f64 = 10.0;
        const GAP: f64 = 34.0;
        const MARGIN: f64 = 16.0;
        let n_omega = self.omega_values.len();
        let n_e = self.e_values.len();
        let panel_w = n_omega as f64 * CELL;
        let panel_h = n_e as f64 * CELL;
        let disagreement = self.disagreement();
        let mut panels: Vec<(&str, Vec<(usize, &str)>)> = Vec::new();
        let yes_no = |cells: &[u8]| -> Vec<(usize, &str)> {
            cells
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let color = match v {
                        1 => "#2a9d8f",
                        0 => "#e9c46a",
                        _ => "#b9b9b9",
                    };
                    (i, color)
                })
                .collect()
        };
        panels.push(("truth", yes_no(&self.truth)));
        if let Some(p) = &self.prediction {
            panels.push(("prediction", yes_no(p)));
            let marks = disagreement
                .as_ref()
                .expect("prediction implies a disagreement panel")
                .iter()
                .enumerate()
                .map(|(i, &v)| (i, if v == 1 { "#d62828" } else { "#f1f1f1" }))
                .collect();
            panels.push(("disagreement", marks));
        }

        let width = MARGIN * 2.0 + panels.len() as f64 * panel_w + (panels.len() - 1) as f64 * GAP;
        let height = MARGIN * 2.0 + panel_h + 18.0;
        let mut svg = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
             viewBox=\"0 0 {width} {height}\">\n"
        );
        for (panel_idx, (title, cells)) in panels.iter().enumerate() {
            let x0 = MARGIN + panel_idx as f64 * (panel_w + GAP);
            svg.push_str(&format!(
                "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{title}</text>\n",
                x0,
                MARGIN - 4.0
            ));
            svg.push_str(&format!("  <g transform=\"translate({x0} {MARGIN})\">\n"));
            for (at, color) in cells {
                let ie = at / n_omega;
                let io = at % n_omega;
                // E grows upward, so its index counts from the bottom edge.
                let x = io as f64 * CELL;
                let y = (n_e - 1 - ie) as f64 * CELL;
                svg.push_str(&format!(
                    "    <rect x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{color}\"/>\n"
                ));
            }
            svg.push_str("  </g>\n");
        }
        svg.push_str(&format!(
            "  <text x=\"{MARGIN}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">omega right, E up</text>\n",
            height - 6.0
        ));
        svg.push_str("</svg>\n");
        svg
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let extension = path
        .extension()
        .map(|e| format!("{}.tmp", e.to_string_lossy()))
        .unwrap_or_else(|| "tmp".into());
    let tmp = path.with_extension(extension);
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureVector, Scheme};
    use crate::lindblad::Problem;
    use tempfile::tempdir;

    fn lattice_rows(n_e: usize, n_omega: usize) -> Vec<LabeledRow> {
        let mut rows = Vec::new();
        for ie in 0..n_e {
            for io in 0..n_omega {
                rows.push(LabeledRow {
                    problem: Problem::I,
                    e: ie as f64 * 0.5,
                    omega: 0.3 + io as f64 * 0.2,
                    phi: 0.0,
                    label: ((ie + io) % 2) as u8,
                    mu_min: 0.0,
                    features: FeatureVector { scheme: Scheme::Eigvals, values: vec![0.0; 4] },
                    degenerate_features: false,
                    tolerance_boundary: false,
                    merged_log: false,
                });
            }
        }
        rows
    }

    /// Minimal XML well-formedness scan: every opened tag closes in order,
    /// self-closing tags stand alone, and exactly one root element exists.
    fn assert_tag_balance(text: &str) {
        let mut stack: Vec<String> = Vec::new();
        let mut roots = 0;
        let mut rest = text;
        while let Some(open) = rest.find('<') {
            let close = rest[open..].find('>').expect("unterminated tag") + open;
            let body = &rest[open + 1..close];
            rest = &rest[close + 1..];
            if let Some(name) = body.strip_prefix('/') {
                let top = stack.pop().unwrap_or_else(|| panic!("stray closer </{name}>"));
                assert_eq!(top, name, "mismatched closer");
                if stack.is_empty() {
                    roots += 1;
                }
            } else if !body.ends_with('/') {
                let name = body.split_whitespace().next().expect("named tag");
                stack.push(name.to_string());
            } else if stack.is_empty() {
                roots += 1;
            }
        }
        assert!(stack.is_empty(), "unclosed tags: {stack:?}");
        assert_eq!(roots, 1, "expected exactly one root element");
    }

    #[test]
    fn rows_assemble_into_a_lattice() {
        let rows = lattice_rows(3, 4);
        let grid = PartitionGrid::from_rows(&rows).unwrap();
        assert_eq!(grid.e_values.len(), 3);
        assert_eq!(grid.omega_values.len(), 4);
        assert_eq!(grid.truth.len(), 12);
        assert_eq!(grid.truth[0], 0);
        assert_eq!(grid.truth[1], 1);
        assert!((grid.yes_fraction() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn missing_cells_stay_unlabeled_and_duplicates_are_rejected() {
        let mut rows = lattice_rows(3, 4);
        rows.pop();
        let grid = PartitionGrid::from_rows(&rows).unwrap();
        assert_eq!(grid.truth.len(), 12);
        assert_eq!(grid.unlabeled_cells(), 1);
        assert_eq!(grid.truth[11], UNLABELED);
        // 5 of the 11 labeled cells carry a yes.
        assert!((grid.yes_fraction() - 5.0 / 11.0).abs() < 1e-12);

        let mut rows = lattice_rows(3, 4);
        let imposter = rows[0].clone();
        rows[11] = imposter;
        assert!(PartitionGrid::from_rows(&rows).is_err());
        assert!(PartitionGrid::from_rows(&[]).is_err());
    }

    #[test]
    fn disagreement_is_the_cellwise_mismatch() {
        let rows = lattice_rows(2, 2);
        let grid = PartitionGrid::from_rows(&rows).unwrap();
        let truth = grid.truth.clone();
        let mut flipped = truth.clone();
        flipped[2] ^= 1;
        let grid = grid.with_prediction(flipped).unwrap();
        assert_eq!(grid.disagreement().unwrap(), vec![0, 0, 1, 0]);
        let bad = PartitionGrid::from_rows(&rows).unwrap().with_prediction(vec![1]);
        assert!(bad.is_err());

        // A hole in the truth never disagrees, whatever the prediction says.
        let mut short = lattice_rows(2, 2);
        short.pop();
        let holed = PartitionGrid::from_rows(&short).unwrap().with_prediction(vec![1; 4]).unwrap();
        assert_eq!(holed.disagreement().unwrap()[3], 0);
    }

    #[test]
    fn csv_has_one_line_per_cell() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        let rows = lattice_rows(3, 4);
        let grid = PartitionGrid::from_rows(&rows).unwrap();
        grid.to_csv(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "E,omega,truth");
        assert_eq!(lines.len(), 13);

        let with_pred = PartitionGrid::from_rows(&rows)
            .unwrap()
            .with_prediction(vec![1; 12])
            .unwrap();
        with_pred.to_csv(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("E,omega,truth,prediction,disagreement\n"));
    }

    #[test]
    fn svg_is_balanced_with_one_rect_per_cell() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("grid.svg");
        let rows = lattice_rows(3, 4);
        let grid = PartitionGrid::from_rows(&rows).unwrap();
        grid.to_svg(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_tag_balance(&text);
        assert_eq!(text.matches("<rect ").count(), 12);

        let full = PartitionGrid::from_rows(&rows)
            .unwrap()
            .with_prediction(grid.truth.clone())
            .unwrap();
        full.to_svg(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_tag_balance(&text);
        assert_eq!(text.matches("<rect ").count(), 36);
        assert!(text.contains("disagreement"));
        // A perfect prediction leaves no disagreement marks.
        assert!(!text.contains("#d62828"));
    }
}
