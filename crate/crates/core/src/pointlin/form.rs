//! Forms antisymmetric in a group of spatial slots and a group of internal
//! slots, stored on strictly increasing multi-indices.

use super::scalar::Scalar;
use super::PointError;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// All strictly increasing `k`-tuples from `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Lexicographic rank of an increasing tuple among `combinations(n, k)`.
pub fn combination_rank(n: usize, idx: &[usize]) -> usize {
    let k = idx.len();
    let mut rank = 0;
    let mut prev = 0;
    for (t, &i) in idx.iter().enumerate() {
        for j in prev..i {
            rank += binomial(n - 1 - j, k - 1 - t);
        }
        prev = i + 1;
    }
    rank
}

/// Sorts `idx` in place; returns the permutation sign, or `None` on a repeat.
pub fn sort_with_sign(idx: &mut [usize]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// Sign of the shuffle taking `a ++ b` to sorted order, or `None` when the
/// two increasing tuples overlap.
fn merge_sign(a: &[usize], b: &[usize], out: &mut Vec<usize>) -> Option<bool> {
    out.clear();
    let mut odd = false;
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            // b[j] jumps over the remaining entries of a
            if (a.len() - i) % 2 == 1 {
                odd = !odd;
            }
            out.push(b[j]);
            j += 1;
        } else {
            return None;
        }
    }
    Some(odd)
}

/// Base dimension, internal dimension, spatial degree and internal degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub l: usize,
}

impl Shape {
    /// A form type over the 3-dimensional boundary with 4-dimensional `V`.
    pub const fn boundary(k: usize, l: usize) -> Shape {
        Shape { n: 3, d: 4, k, l }
    }

    pub fn dim(&self) -> usize {
        binomial(self.n, self.k) * binomial(self.d, self.l)
    }

    fn internal_count(&self) -> usize {
        binomial(self.d, self.l)
    }

    /// Flat storage position of increasing index tuples.
    pub fn position(&self, spatial: &[usize], internal: &[usize]) -> usize {
        combination_rank(self.n, spatial) * self.internal_count()
            + combination_rank(self.d, internal)
    }

    /// Inverse of `position`.
    pub fn indices(&self, pos: usize) -> (Vec<usize>, Vec<usize>) {
        let ic = self.internal_count();
        let sp = combinations(self.n, self.k).swap_remove(pos / ic);
        let int = combinations(self.d, self.l).swap_remove(pos % ic);
        (sp, int)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PForm<S> {
    shape: Shape,
    coeffs: Vec<S>,
}

impl<S: Scalar> PForm<S> {
    pub fn zero(shape: Shape) -> Self {
        PForm {
            shape,
            coeffs: vec![S::zero(); shape.dim()],
        }
    }

    pub fn from_vec(shape: Shape, coeffs: Vec<S>) -> Result<Self, PointError> {
        if coeffs.len() != shape.dim() {
            return Err(PointError::ShapeMismatch(format!(
                "{} coefficients for a form of dimension {}",
                coeffs.len(),
                shape.dim()
            )));
        }
        Ok(PForm { shape, coeffs })
    }

    /// The `pos`-th standard basis element.
    pub fn basis(shape: Shape, pos: usize) -> Self {
        let mut f = PForm::zero(shape);
        f.coeffs[pos] = S::one();
        f
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Component at arbitrary (possibly unsorted) indices, with the
    /// antisymmetry sign applied.
    pub fn get(&self, spatial: &[usize], internal: &[usize]) -> S {
        let mut sp = spatial.to_vec();
        let mut int = internal.to_vec();
        match (sort_with_sign(&mut sp), sort_with_sign(&mut int)) {
            (Some(a), Some(b)) => {
                let c = self.coeffs[self.shape.position(&sp, &int)].clone();
                if a * b < 0 {
                    -c
                } else {
                    c
                }
            }
            _ => S::zero(),
        }
    }

    /// Sets the component at the given indices; the antisymmetric partners
    /// follow automatically. Indices with a repeat are ignored.
    pub fn set(&mut self, spatial: &[usize], internal: &[usize], value: S) {
        let mut sp = spatial.to_vec();
        let mut int = internal.to_vec();
        if let (Some(a), Some(b)) = (sort_with_sign(&mut sp), sort_with_sign(&mut int)) {
            let pos = self.shape.position(&sp, &int);
            self.coeffs[pos] = if a * b < 0 { -value } else { value };
        }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> PForm<T> {
        PForm {
            shape: self.shape,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    pub fn add(&self, o: &PForm<S>) -> PForm<S> {
        assert_eq!(self.shape, o.shape, "shape mismatch in addition");
        PForm {
            shape: self.shape,
            coeffs: self
                .coeffs
                .iter()
                .zip(&o.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, o: &PForm<S>) -> PForm<S> {
        self.add(&o.scale(&-S::one()))
    }

    pub fn scale(&self, s: &S) -> PForm<S> {
        self.map(|c| c.clone() * s.clone())
    }

    pub fn wedge(&self, o: &PForm<S>) -> Result<PForm<S>, PointError> {
        let (a, b) = (self.shape, o.shape);
        if a.n != b.n || a.d != b.d {
            return Err(PointError::ShapeMismatch(format!("{a:?} against {b:?}")));
        }
        let shape = Shape {
            n: a.n,
            d: a.d,
            k: a.k + b.k,
            l: a.l + b.l,
        };
        if shape.k > shape.n || shape.l > shape.d {
            return Err(PointError::DegreeOverflow { k: shape.k, l: shape.l });
        }
        let mut out = PForm::zero(shape);
        let (sa, ia) = (combinations(a.n, a.k), combinations(a.d, a.l));
        let (sb, ib) = (combinations(b.n, b.k), combinations(b.d, b.l));
        let (mut sp, mut int) = (Vec::new(), Vec::new());
        for (pa, ca) in self.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            let (xa, ya) = (&sa[pa / ia.len()], &ia[pa % ia.len()]);
            for (pb, cb) in o.coeffs.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                let (xb, yb) = (&sb[pb / ib.len()], &ib[pb % ib.len()]);
                let Some(s1) = merge_sign(xa, xb, &mut sp) else { continue };
                let Some(s2) = merge_sign(ya, yb, &mut int) else { continue };
                let prod = ca.clone() * cb.clone();
                let pos = shape.position(&sp, &int);
                let cur = std::mem::replace(&mut out.coeffs[pos], S::zero());
                out.coeffs[pos] = if s1 != s2 { cur - prod } else { cur + prod };
            }
        }
        Ok(out)
    }
}

pub fn wedge<S: Scalar>(a: &PForm<S>, b: &PForm<S>) -> Result<PForm<S>, PointError> {
    a.wedge(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Rational;

    #[test]
    fn dimension_formulas() {
        assert_eq!(Shape::boundary(1, 2).dim(), 18);
        assert_eq!(Shape::boundary(2, 3).dim(), 12);
        assert_eq!(Shape::boundary(2, 2).dim(), 18);
        assert_eq!(Shape::boundary(1, 1).dim(), 12);
        for k in 0..=3 {
            for l in 0..=4 {
                assert_eq!(Shape::boundary(k, l).dim(), binomial(3, k) * binomial(4, l));
            }
        }
    }

    #[test]
    fn rank_matches_enumeration() {
        for n in 0..6 {
            for k in 0..=n {
                for (i, c) in combinations(n, k).iter().enumerate() {
                    assert_eq!(combination_rank(n, c), i);
                }
            }
        }
        let s = Shape::boundary(2, 2);
        for p in 0..s.dim() {
            let (a, b) = s.indices(p);
            assert_eq!(s.position(&a, &b), p);
        }
    }

    #[test]
    fn antisymmetric_access() {
        let mut f = PForm::<Rational>::zero(Shape::boundary(2, 1));
        f.set(&[2, 0], &[3], Rational::from_i64(5));
        assert_eq!(f.get(&[0, 2], &[3]), Rational::from_i64(-5));
        assert_eq!(f.get(&[1, 1], &[3]), Rational::from_i64(0));
    }

    #[test]
    fn wedge_with_zero() {
        let a = PForm::<Rational>::basis(Shape::boundary(1, 1), 3);
        let z = PForm::zero(Shape::boundary(1, 2));
        assert!(a.wedge(&z).unwrap().is_zero());
        assert!(matches!(
            PForm::<Rational>::zero(Shape::boundary(2, 3)).wedge(&PForm::zero(Shape::boundary(2, 1))),
            Err(PointError::DegreeOverflow { .. })
        ));
    }
}
