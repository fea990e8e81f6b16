use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// How the domain mask was described.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaskKind {
    Square,
    Disk { center: Vec<f64>, radius: f64 },
    Explicit,
}

/// Cell-centered values on a uniform grid. Cells outside the mask carry 0,
/// which is the extension of the function outside Ω.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    lower: Vec<f64>,
    h: f64,
    shape: Vec<usize>,
    mask: Vec<bool>,
    values: Vec<f64>,
    mask_kind: MaskKind,
}

impl GridFunction {
    /// Grid of `shape` cells of side `h` with lower corner `lower`.
    pub fn explicit(lower: Vec<f64>, h: f64, shape: Vec<usize>, mask: Vec<bool>) -> Result<Self> {
        let d = shape.len();
        if !(2..=3).contains(&d) || lower.len() != d {
            return Err(invalid("grid functions are two- or three-dimensional"));
        }
        if !(h > 0.0 && h.is_finite()) || shape.iter().any(|n| *n == 0) {
            return Err(invalid("grid needs a positive spacing and nonempty shape"));
        }
        let total: usize = shape.iter().product();
        if mask.len() != total {
            return Err(invalid("mask size does not match the grid"));
        }
        if !mask.iter().any(|m| *m) {
            return Err(invalid("domain mask is empty"));
        }
        Ok(Self { lower, h, shape, mask, values: vec![0.0; total], mask_kind: MaskKind::Explicit })
    }

    /// The cube `lower + [0, side]^N` split into `n` cells per axis.
    pub fn square(dim: usize, lower: Vec<f64>, side: f64, n: usize) -> Result<Self> {
        let total = n.pow(dim as u32);
        let mut g = Self::explicit(lower, side / n as f64, vec![n; dim], vec![true; total])?;
        g.mask_kind = MaskKind::Square;
        Ok(g)
    }

    /// Ball of `radius` around `center`; the bounding cube is split into `n`
    /// cells per axis and a cell belongs to Ω when its center does.
    pub fn disk(dim: usize, center: Vec<f64>, radius: f64, n: usize) -> Result<Self> {
        if center.len() != dim || !(radius > 0.0) {
            return Err(invalid("disk needs a center of the grid dimension and a positive radius"));
        }
        let lower: Vec<f64> = center.iter().map(|c| c - radius).collect();
        let total = n.pow(dim as u32);
        let mut g = Self::explicit(lower, 2.0 * radius / n as f64, vec![n; dim], vec![true; total])?;
        let mut x = vec![0.0; dim];
        for k in 0..total {
            g.center(k, &mut x);
            let r2: f64 = x.iter().zip(&center).map(|(a, c)| (a - c) * (a - c)).sum();
            g.mask[k] = r2 < radius * radius;
        }
        if !g.mask.iter().any(|m| *m) {
            return Err(invalid("disk mask is empty at this resolution"));
        }
        g.mask_kind = MaskKind::Disk { center, radius };
        Ok(g)
    }

    /// Copy with `f` sampled at the masked cell centers and 0 elsewhere.
    pub fn with_values(mut self, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut x = vec![0.0; self.dim()];
        for k in 0..self.len() {
            self.values[k] = if self.mask[k] {
                self.center(k, &mut x);
                f(&x)
            } else {
                0.0
            };
        }
        self
    }

    pub fn set_values(&mut self, values: Vec<f64>) -> Result<()> {
        if values.len() != self.len() {
            return Err(invalid("value count does not match the grid"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("grid values must be finite"));
        }
        self.values = values;
        for (v, m) in self.values.iter_mut().zip(&self.mask) {
            if !m {
                *v = 0.0;
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn mask_kind(&self) -> &MaskKind {
        &self.mask_kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cell_measure(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    /// `|Ω|`.
    pub fn measure(&self) -> f64 {
        self.masked_count() as f64 * self.cell_measure()
    }

    pub fn masked_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().zip(&self.mask).filter(|(_, m)| **m).map(|(v, _)| *v)
    }

    /// Row-major strides (last axis fastest).
    pub fn strides(&self) -> Vec<usize> {
        let d = self.dim();
        let mut st = vec![1; d];
        for i in (0..d - 1).rev() {
            st[i] = st[i + 1] * self.shape[i + 1];
        }
        st
    }

    pub fn multi_index(&self, mut flat: usize, out: &mut [usize]) {
        for i in (0..self.dim()).rev() {
            out[i] = flat % self.shape[i];
            flat /= self.shape[i];
        }
    }

    pub fn center(&self, flat: usize, out: &mut [f64]) {
        let mut rem = flat;
        for i in (0..self.dim()).rev() {
            let k = rem % self.shape[i];
            rem /= self.shape[i];
            out[i] = self.lower[i] + (k as f64 + 0.5) * self.h;
        }
    }

    /// Flat index of the cell containing `x`, if any.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let mut flat = 0;
        for i in 0..self.dim() {
            let k = ((x[i] - self.lower[i]) / self.h).floor();
            if k < 0.0 || k >= self.shape[i] as f64 {
                return None;
            }
            flat = flat * self.shape[i] + k as usize;
        }
        Some(flat)
    }

    /// `sup |u|` over Ω.
    pub fn sup_abs(&self) -> f64 {
        self.masked_values().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_measure_converges() {
        let g = GridFunction::disk(2, vec![0.0, 0.0], 0.5, 400).unwrap();
        assert!((g.measure() - std::f64::consts::PI / 4.0).abs() < 2e-3);
    }

    #[test]
    fn locate_inverts_center() {
        let g = GridFunction::square(3, vec![-0.5; 3], 1.0, 7).unwrap();
        let mut x = vec![0.0; 3];
        for k in 0..g.len() {
            g.center(k, &mut x);
            assert_eq!(g.locate(&x), Some(k));
        }
    }

    #[test]
    fn values_outside_mask_are_zero() {
        let g = GridFunction::disk(2, vec![0.0, 0.0], 1.0, 20).unwrap().with_values(|_| 1.0);
        assert!(g.values().iter().zip(g.mask()).all(|(v, m)| *m || *v == 0.0));
    }
}
