//! The output-space cell model: with resolution `epsilon` and `p`
//! performance scores, results can only land in `ceil((1/epsilon)^p)`
//! distinct cells, so any larger number of tunings must contain redundant
//! ones.

use serde::{Deserialize, Serialize};

use dodge_core::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellReport {
    pub epsilon: f64,
    /// number of performance scores per point
    pub p: usize,
    pub occupied_cells: usize,
    pub max_cells: usize,
}

/// Map each score vector to its cell (coordinate-wise `floor(c/epsilon)`,
/// with 1.0 clamped into the top cell) and count the distinct cells hit.
pub fn cell_occupancy(points: &[Vec<f64>], epsilon: f64) -> Result<CellReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParam(format!("epsilon must be in (0,1), got {epsilon}")));
    }
    let Some(first) = points.first() else {
        return Err(Error::InvalidData("cell occupancy needs at least one point".into()));
    };
    let p = first.len();
    if p == 0 {
        return Err(Error::InvalidData("points must have at least one coordinate".into()));
    }
    let per_axis = (1.0 / epsilon).ceil() as usize;
    let max_cells = ((1.0 / epsilon).powi(p as i32)).ceil() as usize;

    let mut cells = std::collections::HashSet::new();
    for (i, point) in points.iter().enumerate() {
        if point.len() != p {
            return Err(Error::InvalidData(format!(
                "point {i} has {} coordinates, expected {p}",
                point.len()
            )));
        }
        let mut key = Vec::with_capacity(p);
        for &c in point {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::InvalidData(format!(
                    "point {i} has out-of-range coordinate {c}"
                )));
            }
            key.push(((c / epsilon).floor() as usize).min(per_axis - 1));
        }
        cells.insert(key);
    }
    Ok(CellReport { epsilon, p, occupied_cells: cells.len(), max_cells })
}
