//! CSV readers and writers for point clouds, cost matrices and result
//! tables. Headers are mandatory, the decimal separator is always `.`, and
//! floats are printed with Rust's shortest round-trip formatting so repeated
//! runs of the same seed produce byte-identical files.

use wricci_core::manifold::{ModelManifold, Point};
use wricci_core::measure::WeightedPointCloud;
use wricci_core::ot::CostMatrix;
use wricci_core::rgg::ConvergenceRow;

#[derive(Debug)]
pub enum CsvError {
    Io(String),
    Format(String),
}

impl std::fmt::Display for CsvError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CsvError::Io(m) => write!(f, "csv io error: {m}"),
            CsvError::Format(m) => write!(f, "csv format error: {m}"),
        }
    }
}

/// One row per atom: weight, then embedding coordinates (`w,x1,...,xk`).
pub fn cloud_to_csv(cloud: &WeightedPointCloud) -> String {
    let dim = cloud.atoms()[0].coords().len();
    let mut out = String::from("w");
    for i in 1..=dim {
        out.push_str(&format!(",x{i}"));
    }
    out.push('\n');
    for (atom, w) in cloud.atoms().iter().zip(cloud.weights()) {
        out.push_str(&format!("{w}"));
        for c in atom.coords() {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
    }
    out
}

pub fn write_cloud(path: &str, cloud: &WeightedPointCloud) -> Result<(), CsvError> {
    std::fs::write(path, cloud_to_csv(cloud)).map_err(|e| CsvError::Io(format!("{path}: {e}")))
}

/// Parse a cloud CSV; atoms are interpreted as raw coordinate tuples.
///
/// The manifold is optional: with one supplied, coordinates are validated
/// against its embedding; without, the atoms only feed cost assembly.
pub fn parse_cloud(
    text: &str,
    manifold: Option<&ModelManifold>,
) -> Result<(Vec<Vec<f64>>, Vec<f64>), CsvError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| CsvError::Format("empty file".into()))?;
    if !header.trim_start().starts_with('w') {
        return Err(CsvError::Format("header line `w,x1,...` required".into()));
    }
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let w: f64 = fields
            .next()
            .unwrap()
            .trim()
            .parse()
            .map_err(|e| CsvError::Format(format!("line {}: bad weight: {e}", ln + 2)))?;
        let xs: Result<Vec<f64>, _> = fields.map(|f| f.trim().parse::<f64>()).collect();
        let xs = xs.map_err(|e| CsvError::Format(format!("line {}: bad coordinate: {e}", ln + 2)))?;
        if let Some(m) = manifold {
            m.point(&xs)
                .map_err(|e| CsvError::Format(format!("line {}: {e}", ln + 2)))?;
        }
        weights.push(w);
        coords.push(xs);
    }
    if coords.is_empty() {
        return Err(CsvError::Format("no atoms".into()));
    }
    let d = coords[0].len();
    if coords.iter().any(|c| c.len() != d) {
        return Err(CsvError::Format("inconsistent coordinate count".into()));
    }
    Ok((coords, weights))
}

pub fn read_cloud(path: &str) -> Result<(Vec<Vec<f64>>, Vec<f64>), CsvError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CsvError::Io(format!("{path}: {e}")))?;
    parse_cloud(&text, None)
}

/// Headerless numeric matrix, rows = source atoms, cols = target atoms.
pub fn read_cost_matrix(path: &str, rows: usize, cols: usize) -> Result<CostMatrix, CsvError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CsvError::Io(format!("{path}: {e}")))?;
    let mut entries = Vec::with_capacity(rows * cols);
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|e| CsvError::Format(format!("line {}: {e}", ln + 1)))?;
            entries.push(v);
        }
    }
    if entries.len() != rows * cols {
        return Err(CsvError::Format(format!(
            "cost matrix must have {rows}x{cols} entries, found {}",
            entries.len()
        )));
    }
    CostMatrix::new(rows, cols, entries).map_err(|e| CsvError::Format(e.to_string()))
}

/// The curvature-estimate result table (single data row).
pub struct CurvatureRecord {
    pub manifold: String,
    pub dim: usize,
    pub potential: String,
    pub delta: f64,
    pub epsilon: f64,
    pub cloud_size: usize,
    pub repeats: u32,
    pub seed: u64,
    pub w1_mean: f64,
    pub w1_std: f64,
    pub upper: f64,
    pub lower: f64,
    pub kappa: f64,
    pub scaled_kappa: f64,
    pub oracle: f64,
}

pub fn curvature_csv(rec: &CurvatureRecord) -> String {
    let mut out = String::from(
        "manifold,dim,potential,delta,epsilon,cloud_size,repeats,seed,w1_mean,w1_std,upper,lower,kappa,scaled_kappa,oracle\n",
    );
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        rec.manifold,
        rec.dim,
        rec.potential,
        rec.delta,
        rec.epsilon,
        rec.cloud_size,
        rec.repeats,
        rec.seed,
        rec.w1_mean,
        rec.w1_std,
        rec.upper,
        rec.lower,
        rec.kappa,
        rec.scaled_kappa,
        rec.oracle
    ));
    out
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from(
        "n,repeat,delta_n,epsilon_n,num_points,connected,kappa,scaled_kappa,oracle,abs_error,seed\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.repeat,
            r.delta_n,
            r.epsilon_n,
            r.num_points,
            r.connected,
            r.kappa,
            r.scaled_kappa,
            r.oracle,
            r.abs_error,
            r.seed
        ));
    }
    out
}

/// Rebuild manifold points from raw coordinates.
pub fn coords_to_points(
    m: &ModelManifold,
    coords: &[Vec<f64>],
) -> Result<Vec<Point>, CsvError> {
    coords
        .iter()
        .map(|c| m.point(c).map_err(|e| CsvError::Format(e.to_string())))
        .collect()
}
