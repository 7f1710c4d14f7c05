//! Exact Gaussian elimination over the rationals.

use num::{Signed, Zero};

use crate::expr::Rational;

#[derive(Clone, Debug, PartialEq)]
pub struct RatMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rational>,
}

/// Reduced row echelon form and its pivot columns.
pub struct Echelon {
    pub matrix: RatMatrix,
    pub pivots: Vec<usize>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::from_integer(1.into());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Rational>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = RatMatrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, x) in r.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    /// Builds a matrix column by column.
    pub fn from_columns(rows: usize, cols: &[Vec<Rational>]) -> Self {
        let mut m = RatMatrix::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, x) in c.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = Rational::zero();
                for (j, xj) in x.iter().enumerate() {
                    let a = &self[(i, j)];
                    if !a.is_zero() && !xj.is_zero() {
                        acc += a * xj;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn echelon(&self) -> Echelon {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = m[(row, col)].recip();
            for j in col..m.cols {
                let v = &m[(row, j)] * &inv;
                m[(row, j)] = v;
            }
            for r in 0..m.rows {
                if r == row || m[(r, col)].is_zero() {
                    continue;
                }
                let f = m[(r, col)].clone();
                for j in col..m.cols {
                    if m[(row, j)].is_zero() {
                        continue;
                    }
                    let v = &m[(r, j)] - &(&f * &m[(row, j)]);
                    m[(r, j)] = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        Echelon { matrix: m, pivots }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.echelon().pivots.len()
    }

    /// Exact kernel basis, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        let e = self.echelon();
        let free: Vec<usize> = (0..self.cols).filter(|c| !e.pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::from_integer(1.into());
                for (r, &p) in e.pivots.iter().enumerate() {
                    v[p] = -e.matrix[(r, f)].clone();
                }
                v
            })
            .collect()
    }

    /// A particular solution of `self · x = b` with free variables set to
    /// zero, or `None` when the system is inconsistent.
    pub fn solve(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = RatMatrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let e = aug.echelon();
        if e.pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (r, &p) in e.pivots.iter().enumerate() {
            x[p] = e.matrix[(r, self.cols)].clone();
        }
        Some(x)
    }

    pub fn determinant(&self) -> Rational {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let mut det = Rational::from_integer(1.into());
        for col in 0..m.cols {
            let Some(p) = (col..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                return Rational::zero();
            };
            if p != col {
                m.swap_rows(p, col);
                det = -det;
            }
            let piv = m[(col, col)].clone();
            det *= &piv;
            for r in col + 1..m.rows {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let f = &m[(r, col)] / &piv;
                for j in col..m.cols {
                    let v = &m[(r, j)] - &(&f * &m[(col, j)]);
                    m[(r, j)] = v;
                }
            }
        }
        det
    }

    /// Sylvester's criterion on a symmetric matrix.
    pub fn is_positive_definite(&self) -> bool {
        (1..=self.rows).all(|k| {
            let mut sub = RatMatrix::zeros(k, k);
            for i in 0..k {
                for j in 0..k {
                    sub[(i, j)] = self[(i, j)].clone();
                }
            }
            sub.determinant().is_positive()
        })
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn identity_and_zero_kernels() {
        assert!(RatMatrix::identity(4).kernel().is_empty());
        assert_eq!(RatMatrix::zeros(2, 5).kernel().len(), 5);
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let m = RatMatrix::from_rows(&[
            vec![r(1), r(2), r(3), r(4)],
            vec![r(2), r(4), r(6), r(8)],
            vec![r(0), r(1), r(1), r(0)],
        ]);
        let k = m.kernel();
        assert_eq!(k.len(), 2);
        for v in k {
            assert!(m.mul_vec(&v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn solve_detects_inconsistency() {
        let m = RatMatrix::from_rows(&[vec![r(1), r(1)], vec![r(2), r(2)]]);
        assert!(m.solve(&[r(1), r(3)]).is_none());
        let x = m.solve(&[r(1), r(2)]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![r(1), r(2)]);
    }

    #[test]
    fn determinant_and_definiteness() {
        let m = RatMatrix::from_rows(&[vec![r(2), r(1)], vec![r(1), r(2)]]);
        assert_eq!(m.determinant(), r(3));
        assert!(m.is_positive_definite());
        let n = RatMatrix::from_rows(&[vec![r(1), r(2)], vec![r(2), r(1)]]);
        assert!(!n.is_positive_definite());
    }
}
