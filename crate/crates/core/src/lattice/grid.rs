//! Periodic grids and centered-difference stencils.

use std::collections::BTreeMap;

use super::LatticeError;

/// A periodic cubic grid. Dimension 0 is a single site.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeGrid {
    pub dim: usize,
    pub n: usize,
    pub h: f64,
}

impl LatticeGrid {
    pub fn new(dim: usize, n: usize, h: f64) -> Result<Self, LatticeError> {
        if dim > 3 {
            return Err(LatticeError::Grid(format!("dimension {dim} exceeds 3")));
        }
        if dim > 0 && n < 4 {
            return Err(LatticeError::Grid(format!("{n} sites per axis, need at least 4")));
        }
        if h.is_nan() || h <= 0.0 {
            return Err(LatticeError::Grid(format!("spacing {h} must be positive")));
        }
        Ok(LatticeGrid { dim, n, h })
    }

    pub fn point() -> Self {
        LatticeGrid { dim: 0, n: 1, h: 1.0 }
    }

    pub fn sites(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Volume weight of one site.
    pub fn weight(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut c = Vec::with_capacity(self.dim);
        let mut s = site;
        for _ in 0..self.dim {
            c.push(s % self.n);
            s /= self.n;
        }
        c
    }

    pub fn site(&self, coords: &[usize]) -> usize {
        coords.iter().rev().fold(0, |acc, &c| acc * self.n + c)
    }

    /// Site displaced by `offset` with periodic wrap.
    pub fn shift(&self, site: usize, offset: &[i64]) -> usize {
        let n = self.n as i64;
        let c: Vec<usize> = self
            .coords(site)
            .iter()
            .zip(offset)
            .map(|(&x, &o)| (x as i64 + o).rem_euclid(n) as usize)
            .collect();
        self.site(&c)
    }

    /// Weights of the composed centered differences along `axes`.
    pub fn stencil(&self, axes: &[usize]) -> Vec<(Vec<i64>, f64)> {
        let mut cur: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        cur.insert(vec![0; self.dim], 1.0);
        for &a in axes {
            let mut next = BTreeMap::new();
            for (off, w) in cur {
                for (step, sign) in [(1, 1.0), (-1, -1.0)] {
                    let mut o = off.clone();
                    o[a] += step;
                    *next.entry(o).or_insert(0.0) += sign * w / (2.0 * self.h);
                }
            }
            cur = next;
        }
        cur.into_iter().filter(|(_, w)| *w != 0.0).collect()
    }

    /// Centered difference of a site array along `axis`.
    pub fn diff(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let mut plus = vec![0; self.dim];
        plus[axis] = 1;
        let minus: Vec<i64> = plus.iter().map(|x| -x).collect();
        (0..self.sites())
            .map(|s| (f[self.shift(s, &plus)] - f[self.shift(s, &minus)]) / (2.0 * self.h))
            .collect()
    }

    pub fn diff_many(&self, f: &[f64], axes: &[usize]) -> Vec<f64> {
        axes.iter().fold(f.to_vec(), |acc, &a| self.diff(&acc, a))
    }

    /// Physical position of a site.
    pub fn position(&self, site: usize) -> Vec<f64> {
        self.coords(site).iter().map(|&c| c as f64 * self.h).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trip() {
        let g = LatticeGrid::new(3, 5, 0.1).unwrap();
        for s in 0..g.sites() {
            assert_eq!(g.site(&g.coords(s)), s);
        }
        assert_eq!(g.shift(0, &[-1, 0, 0]), g.site(&[4, 0, 0]));
    }

    #[test]
    fn difference_is_antisymmetric() {
        let g = LatticeGrid::new(1, 8, 0.5).unwrap();
        let f: Vec<f64> = (0..8).map(|i| (i * i) as f64).collect();
        let u: Vec<f64> = (0..8).map(|i| (3 * i % 5) as f64).collect();
        let df = g.diff(&f, 0);
        let du = g.diff(&u, 0);
        let a: f64 = df.iter().zip(&u).map(|(x, y)| x * y).sum();
        let b: f64 = f.iter().zip(&du).map(|(x, y)| x * y).sum();
        assert!((a + b).abs() < 1e-12);
    }

    #[test]
    fn stencil_matches_diff() {
        let g = LatticeGrid::new(2, 6, 0.3).unwrap();
        let f: Vec<f64> = (0..g.sites()).map(|i| ((i * 7) % 11) as f64).collect();
        let d = g.diff_many(&f, &[0, 1]);
        let st = g.stencil(&[0, 1]);
        for s in 0..g.sites() {
            let v: f64 = st.iter().map(|(o, w)| w * f[g.shift(s, o)]).sum();
            assert!((v - d[s]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(LatticeGrid::new(1, 3, 1.0).is_err());
        assert!(LatticeGrid::new(2, 8, 0.0).is_err());
    }
}
