//! Complex fields sampled on regular grids, with CSV export.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{ClosedFormField, Point, C64};
use crate::geometry::Domain;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    /// Samples per axis; the second entry is 1 in 1D.
    pub shape: [usize; 2],
    pub lower: [f64; 2],
    pub spacing: [f64; 2],
    pub dim: usize,
    /// Row-major with `x` varying fastest.
    pub values: Vec<C64>,
}

impl FieldGrid {
    /// Samples `u` at `n` equispaced points per axis including the boundary.
    pub fn sample(u: &dyn ClosedFormField, domain: &Domain, n: usize) -> Self {
        let n = n.max(2);
        let dim = domain.dim().min(2);
        let b = domain.bounds();
        let mut shape = [n, 1];
        let mut lower = [b[0].0, 0.0];
        let mut spacing = [domain.extent(0) / (n - 1) as f64, 0.0];
        if dim == 2 {
            shape[1] = n;
            lower[1] = b[1].0;
            spacing[1] = domain.extent(1) / (n - 1) as f64;
        }
        let mut g = Self {
            shape,
            lower,
            spacing,
            dim,
            values: Vec::with_capacity(shape[0] * shape[1]),
        };
        for j in 0..shape[1] {
            for i in 0..shape[0] {
                let x = g.point(i, j);
                g.values.push(u.jet(&x).value);
            }
        }
        g
    }

    pub fn point(&self, i: usize, j: usize) -> Point {
        // pin the last sample to the upper bound exactly
        let coord = |a: usize, idx: usize| {
            if idx + 1 == self.shape[a] {
                self.lower[a] + self.spacing[a] * (self.shape[a] - 1) as f64
            } else {
                self.lower[a] + self.spacing[a] * idx as f64
            }
        };
        [coord(0, i), if self.dim == 2 { coord(1, j) } else { 0.0 }, 0.0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.values[i + j * self.shape[0]]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        if self.dim == 2 {
            writeln!(w, "x,y,re_u,im_u")?;
        } else {
            writeln!(w, "x,re_u,im_u")?;
        }
        for j in 0..self.shape[1] {
            for i in 0..self.shape[0] {
                let p = self.point(i, j);
                let v = self.get(i, j);
                if self.dim == 2 {
                    writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", p[0], p[1], v.re, v.im)?;
                } else {
                    writeln!(w, "{:.16e},{:.16e},{:.16e}", p[0], v.re, v.im)?;
                }
            }
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Constant, PlaneWave};

    #[test]
    fn csv_layout() {
        let g = FieldGrid::sample(&Constant(C64::new(1.0, -2.0)), &Domain::unit_square(), 3);
        assert_eq!(g.len(), 9);
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "x,y,re_u,im_u");
        assert_eq!(lines.len(), 10);
        assert!(lines[2].starts_with("5.0000000000000000e-1,0.0000000000000000e0"));
        let g = FieldGrid::sample(&PlaneWave::new(1.0, [1.0, 0.0, 0.0]), &Domain::unit_interval(), 5);
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("x,re_u,im_u\n"));
    }
}
