//! Uniform 1D grids and the discrete cell-average state.

use crate::{invalid_input, Result};

/// Boundary treatment for ghost cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// Wrap-around: cell `j` outside the domain maps to `j mod n`.
    Periodic,
    /// Constant extension with the given value on both sides.
    Constant(f64),
}

/// Uniform grid of `n_cells` cells covering `[x0, x0 + n_cells * h]`.
///
/// Cell `j` (zero-based) is `I_j = [x0 + j h, x0 + (j+1) h]` with center
/// `x0 + (j + 1/2) h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x0: f64,
    pub h: f64,
    pub n_cells: usize,
    pub boundary: Boundary,
}

impl Grid {
    /// Grid on `[x0, x1]` with `n_cells` equal cells.
    pub fn new(x0: f64, x1: f64, n_cells: usize, boundary: Boundary) -> Result<Self> {
        if !(x1 > x0) || n_cells == 0 {
            return Err(invalid_input!(
                "grid needs x1 > x0 and at least one cell, got [{x0}, {x1}] with {n_cells}"
            ));
        }
        Ok(Grid {
            x0,
            h: (x1 - x0) / n_cells as f64,
            n_cells,
            boundary,
        })
    }

    /// Grid on `[x0, x1]` with prescribed spacing `h`; `h` must divide the
    /// domain length an integer number of times (to 1e-9 relative).
    pub fn with_spacing(x0: f64, x1: f64, h: f64, boundary: Boundary) -> Result<Self> {
        if !(h > 0.0) || !(x1 > x0) {
            return Err(invalid_input!("grid needs x1 > x0 and h > 0"));
        }
        let ratio = (x1 - x0) / h;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
            return Err(invalid_input!(
                "h = {h} does not divide the domain [{x0}, {x1}] evenly"
            ));
        }
        Grid::new(x0, x1, n as usize, boundary)
    }

    pub fn x1(&self) -> f64 {
        self.x0 + self.h * self.n_cells as f64
    }

    pub fn length(&self) -> f64 {
        self.h * self.n_cells as f64
    }

    /// Center of cell `j`.
    pub fn cell_center(&self, j: usize) -> f64 {
        self.x0 + (j as f64 + 0.5) * self.h
    }

    /// Left edge `x_{j-1/2}` of cell `j`.
    pub fn left_edge(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.h
    }
}

/// Cell averages `ρ̄_j` at a fixed time, one value per real cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellAverages {
    pub values: Vec<f64>,
    pub time: f64,
}

impl CellAverages {
    pub fn new(values: Vec<f64>, time: f64) -> Self {
        CellAverages { values, time }
    }

    pub fn constant(n_cells: usize, value: f64) -> Self {
        CellAverages {
            values: vec![value; n_cells],
            time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Cell averages extended by `ghost` cells on each side.
///
/// Real cells keep their indices `0..n`; ghost cells are addressed with
/// signed indices `-ghost..0` and `n..n+ghost`.
#[derive(Debug, Clone)]
pub struct GhostedAverages {
    values: Vec<f64>,
    ghost: usize,
}

impl GhostedAverages {
    pub(crate) fn from_parts(values: Vec<f64>, ghost: usize) -> Self {
        debug_assert!(values.len() >= 2 * ghost);
        GhostedAverages { values, ghost }
    }

    pub fn ghost_width(&self) -> usize {
        self.ghost
    }

    pub fn n_real(&self) -> usize {
        self.values.len() - 2 * self.ghost
    }

    /// Value of cell `j`, where ghost cells use signed indices.
    pub fn get(&self, j: isize) -> f64 {
        let idx = j + self.ghost as isize;
        assert!(
            idx >= 0 && (idx as usize) < self.values.len(),
            "cell index {j} outside ghosted range"
        );
        self.values[idx as usize]
    }

    /// Slice covering cells `j-half ..= j+half` (used for stencil gathers).
    pub fn window(&self, j: isize, half: usize) -> &[f64] {
        let lo = j - half as isize + self.ghost as isize;
        assert!(lo >= 0, "stencil starting at cell {} underflows", j - half as isize);
        let lo = lo as usize;
        &self.values[lo..lo + 2 * half + 1]
    }
}
