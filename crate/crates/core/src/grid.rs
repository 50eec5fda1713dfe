use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform nodes `xi_j = j * dxi`, `j = 0..=cells`, on `[0, length]`. Node 0 is
/// the inflow boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub length: f64,
    pub cells: usize,
    pub dxi: f64,
}

impl Grid {
    pub fn new(length: f64, cells: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::domain(format!("domain length must be positive, got {length}")));
        }
        if cells < 4 {
            return Err(Error::domain(format!("need at least 4 cells, got {cells}")));
        }
        Ok(Self {
            length,
            cells,
            dxi: length / cells as f64,
        })
    }

    pub fn len(&self) -> usize {
        self.cells + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.dxi
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.cells).map(move |j| self.node(j))
    }
}
