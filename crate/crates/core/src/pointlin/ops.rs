//! Linear operators built from a coframe and the structural-constraint solver.

use num::{Signed, Zero};

use crate::expr::Rational;

use super::form::{sort_with_sign, PForm, Shape};
use super::linalg::RatMatrix;
use super::scalar::Scalar;
use super::PointError;

/// Internal vector space with metric `diag(-1, 1, ..., 1)` and
/// `ε_{01...} = +1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InternalSpace {
    pub d: usize,
    pub eta: Vec<i64>,
}

impl Default for InternalSpace {
    fn default() -> Self {
        InternalSpace::minkowski(4)
    }
}

impl InternalSpace {
    pub fn minkowski(d: usize) -> Self {
        let mut eta = vec![1; d];
        if d > 0 {
            eta[0] = -1;
        }
        InternalSpace { d, eta }
    }

    /// Totally antisymmetric symbol with lower indices.
    pub fn levi_civita(&self, idx: &[usize]) -> i64 {
        debug_assert_eq!(idx.len(), self.d);
        let mut v = idx.to_vec();
        sort_with_sign(&mut v).unwrap_or(0)
    }

    pub fn inner<S: Scalar>(&self, a: &[S], b: &[S]) -> S {
        let mut acc = S::zero();
        for i in 0..self.d {
            acc = acc + S::from_i64(self.eta[i]) * a[i].clone() * b[i].clone();
        }
        acc
    }
}

/// `(v•e)^a_{ij} = ½ η_{bc} (v^{ab}_i e^c_j - v^{ab}_j e^c_i)`.
pub fn internal_act<S: Scalar>(v: &PForm<S>, e: &PForm<S>) -> Result<PForm<S>, PointError> {
    let (sv, se) = (v.shape(), e.shape());
    if sv.k != 1 || sv.l != 2 || se.k != 1 || se.l != 1 || sv.n != se.n || sv.d != se.d {
        return Err(PointError::ShapeMismatch(format!("internal_act on {sv:?} and {se:?}")));
    }
    let space = InternalSpace::minkowski(sv.d);
    let half = S::from_ratio(1, 2);
    let mut out = PForm::zero(Shape { k: 2, l: 1, ..sv });
    for i in 0..sv.n {
        for j in i + 1..sv.n {
            for a in 0..sv.d {
                let mut acc = S::zero();
                for b in 0..sv.d {
                    let w = S::from_i64(space.eta[b]);
                    let t = v.get(&[i], &[a, b]) * e.get(&[j], &[b]) - v.get(&[j], &[a, b]) * e.get(&[i], &[b]);
                    acc = acc + w * t;
                }
                out.set(&[i, j], &[a], half.clone() * acc);
            }
        }
    }
    Ok(out)
}

/// Exact linear map between two form types, as a matrix on the flat
/// coefficient storage.
#[derive(Clone, Debug, PartialEq)]
pub struct LinMap {
    pub domain: Shape,
    pub codomain: Shape,
    pub matrix: RatMatrix,
}

impl LinMap {
    pub fn from_fn<F>(domain: Shape, codomain: Shape, f: F) -> Result<LinMap, PointError>
    where
        F: Fn(&PForm<Rational>) -> Result<PForm<Rational>, PointError>,
    {
        let mut cols = Vec::with_capacity(domain.dim());
        for p in 0..domain.dim() {
            let img = f(&PForm::basis(domain, p))?;
            if img.shape() != codomain {
                return Err(PointError::ShapeMismatch(format!(
                    "image {:?}, expected {codomain:?}",
                    img.shape()
                )));
            }
            cols.push(img.into_coeffs());
        }
        Ok(LinMap {
            domain,
            codomain,
            matrix: RatMatrix::from_columns(codomain.dim(), &cols),
        })
    }

    pub fn apply(&self, x: &PForm<Rational>) -> PForm<Rational> {
        assert_eq!(x.shape(), self.domain);
        PForm::from_vec(self.codomain, self.matrix.mul_vec(x.coeffs())).expect("consistent shape")
    }

    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }
}

pub fn linmap_kernel(m: &LinMap) -> Vec<PForm<Rational>> {
    m.matrix
        .kernel()
        .into_iter()
        .map(|v| PForm::from_vec(m.domain, v).expect("kernel vector length"))
        .collect()
}

/// `x ↦ e ∧ x` on forms of type `domain`.
pub fn wedge_map(e: &PForm<Rational>, domain: Shape) -> Result<LinMap, PointError> {
    let s = e.shape();
    let codomain = Shape {
        n: s.n,
        d: s.d,
        k: s.k + domain.k,
        l: s.l + domain.l,
    };
    if codomain.k > codomain.n || codomain.l > codomain.d {
        return Err(PointError::DegreeOverflow { k: codomain.k, l: codomain.l });
    }
    LinMap::from_fn(domain, codomain, |x| e.wedge(x))
}

/// The legs `e_i ∈ V` of a (1,1)-form as rows.
pub fn legs(e: &PForm<Rational>) -> Vec<Vec<Rational>> {
    let s = e.shape();
    (0..s.n).map(|i| (0..s.d).map(|a| e.get(&[i], &[a])).collect()).collect()
}

fn check_coframe(e: &PForm<Rational>) -> Result<(), PointError> {
    let s = e.shape();
    if s.k != 1 || s.l != 1 {
        return Err(PointError::ShapeMismatch(format!("coframe must be a (1,1)-form, got {s:?}")));
    }
    Ok(())
}

/// Spatial legs linearly independent in `V`.
pub fn is_boundary_nondegenerate(e: &PForm<Rational>) -> bool {
    RatMatrix::from_rows(&legs(e)).rank() == e.shape().n
}

/// Induced metric `g_ij = η(e_i, e_j)`.
pub fn boundary_metric(e: &PForm<Rational>) -> RatMatrix {
    let space = InternalSpace::minkowski(e.shape().d);
    let l = legs(e);
    let rows: Vec<Vec<Rational>> = l
        .iter()
        .map(|a| l.iter().map(|b| space.inner(a, b)).collect())
        .collect();
    RatMatrix::from_rows(&rows)
}

pub fn is_metric_nondegenerate(e: &PForm<Rational>) -> bool {
    !boundary_metric(e).determinant().is_zero()
}

/// Dimension of the kernel of `v ↦ e ∧ v` on (1,2)-forms.
pub fn coframe_kernel_dim(e: &PForm<Rational>) -> Result<usize, PointError> {
    check_coframe(e)?;
    if !is_boundary_nondegenerate(e) {
        return Err(PointError::Degenerate("spatial legs of the coframe are linearly dependent".into()));
    }
    let s = e.shape();
    let m = wedge_map(e, Shape { k: 1, l: 2, ..s })?;
    Ok(s.dim_of(1, 2) - m.rank())
}

impl Shape {
    fn dim_of(&self, k: usize, l: usize) -> usize {
        Shape { k, l, ..*self }.dim()
    }
}

/// Extends a boundary coframe to a coframe on the bulk, with bulk
/// coordinate 0 transversal and the first standard basis vector of `V`
/// outside the span of the legs as its transversal leg.
pub fn complete_coframe(e: &PForm<Rational>) -> Result<PForm<Rational>, PointError> {
    check_coframe(e)?;
    let s = e.shape();
    let rows = legs(e);
    let base_rank = RatMatrix::from_rows(&rows).rank();
    let mut extra = vec![Rational::zero(); s.d];
    for a in 0..s.d {
        let mut unit = vec![Rational::zero(); s.d];
        unit[a] = Rational::from_i64(1);
        let mut trial = rows.clone();
        trial.push(unit.clone());
        if RatMatrix::from_rows(&trial).rank() > base_rank {
            extra = unit;
            break;
        }
    }
    let bulk = Shape { n: s.n + 1, ..s };
    let mut out = PForm::zero(bulk);
    for a in 0..s.d {
        out.set(&[0], &[a], extra[a].clone());
        for i in 0..s.n {
            out.set(&[i + 1], &[a], rows[i][a].clone());
        }
    }
    Ok(out)
}

/// Kernel of `x ↦ ẽ ∧ x` on bulk (2,1)-forms, `ẽ` the completed coframe.
pub fn w21_kernel(e: &PForm<Rational>) -> Result<Vec<PForm<Rational>>, PointError> {
    let bulk = complete_coframe(e)?;
    let m = wedge_map(&bulk, Shape { k: 2, l: 1, ..bulk.shape() })?;
    Ok(linmap_kernel(&m))
}

/// Whether `e ∧ (·)` is injective on (2,1)-forms. On a 3-dimensional
/// boundary the target is smaller than the source, so the test is made on
/// the bulk after completing the coframe.
pub fn injective_w21(e: &PForm<Rational>) -> bool {
    w21_kernel(e).map(|k| k.is_empty()).unwrap_or(false)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructuralFix {
    pub v: PForm<Rational>,
    pub sigma: PForm<Rational>,
    /// Dimension of the solution freedom in `σ`; `v` has none.
    pub sigma_freedom: usize,
}

/// Solves `e ∧ v = 0` and `eps ∧ (T + v•e) = e ∧ σ` for `(v, σ)`.
pub fn structural_fix(
    e: &PForm<Rational>,
    eps: &PForm<Rational>,
    t: &PForm<Rational>,
) -> Result<StructuralFix, PointError> {
    check_coframe(e)?;
    let s = e.shape();
    if eps.shape() != (Shape { k: 0, l: 1, ..s }) || t.shape() != (Shape { k: 2, l: 1, ..s }) {
        return Err(PointError::ShapeMismatch(format!(
            "eps {:?} and T {:?} against coframe {s:?}",
            eps.shape(),
            t.shape()
        )));
    }
    if !is_metric_nondegenerate(e) {
        return Err(PointError::Precondition("coframe is not metric nondegenerate".into()));
    }
    let space = InternalSpace::minkowski(s.d);
    let ev: Vec<Rational> = eps.coeffs().to_vec();
    if !space.inner(&ev, &ev).is_negative() {
        return Err(PointError::Precondition("eps is not time-like".into()));
    }
    let mut basis = legs(e);
    basis.push(ev);
    if RatMatrix::from_rows(&basis).rank() != s.d {
        return Err(PointError::Precondition("eps and the coframe legs do not span V".into()));
    }

    let sv = Shape { k: 1, l: 2, ..s };
    let ss = Shape { k: 1, l: 1, ..s };
    let (nv, ns) = (sv.dim(), ss.dim());
    let ev_map = wedge_map(e, sv)?;
    let act = LinMap::from_fn(sv, Shape { k: 2, l: 2, ..s }, |v| eps.wedge(&internal_act(v, e)?))?;
    let es_map = wedge_map(e, ss)?;
    let (r1, r2) = (ev_map.codomain.dim(), act.codomain.dim());
    let mut m = RatMatrix::zeros(r1 + r2, nv + ns);
    for c in 0..nv {
        for r in 0..r1 {
            m[(r, c)] = ev_map.matrix[(r, c)].clone();
        }
        for r in 0..r2 {
            m[(r1 + r, c)] = act.matrix[(r, c)].clone();
        }
    }
    for c in 0..ns {
        for r in 0..r2 {
            m[(r1 + r, nv + c)] = -es_map.matrix[(r, c)].clone();
        }
    }
    let et = eps.wedge(t)?;
    let mut rhs = vec![Rational::zero(); r1];
    rhs.extend(et.coeffs().iter().map(|x| -x.clone()));

    let kernel = m.kernel();
    if kernel.iter().any(|k| k[..nv].iter().any(|x| !x.is_zero())) {
        return Err(PointError::Precondition("v is not determined uniquely".into()));
    }
    let Some(x) = m.solve(&rhs) else {
        return Err(PointError::InternalLogic("structural system is inconsistent".into()));
    };
    Ok(StructuralFix {
        v: PForm::from_vec(sv, x[..nv].to_vec())?,
        sigma: PForm::from_vec(ss, x[nv..].to_vec())?,
        sigma_freedom: kernel.len(),
    })
}

/// Both defining identities evaluated; zero forms when they hold.
pub fn structural_residuals(
    e: &PForm<Rational>,
    eps: &PForm<Rational>,
    t: &PForm<Rational>,
    fix: &StructuralFix,
) -> Result<(PForm<Rational>, PForm<Rational>), PointError> {
    let first = e.wedge(&fix.v)?;
    let lhs = eps.wedge(&t.add(&internal_act(&fix.v, e)?))?;
    Ok((first, lhs.sub(&e.wedge(&fix.sigma)?)))
}

/// The coframe with `e_i = basis vector i` of `V` for `i = 1..n`.
pub fn canonical_coframe(n: usize, d: usize) -> PForm<Rational> {
    let mut e = PForm::zero(Shape { n, d, k: 1, l: 1 });
    for i in 0..n {
        e.set(&[i], &[i + 1], Rational::from_i64(1));
    }
    e
}

/// The time-like basis vector as a (0,1)-form.
pub fn time_vector(n: usize, d: usize) -> PForm<Rational> {
    let mut eps = PForm::zero(Shape { n, d, k: 0, l: 1 });
    eps.set(&[], &[0], Rational::from_i64(1));
    eps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn canonical_kernel_is_six() {
        let e = canonical_coframe(3, 4);
        assert_eq!(coframe_kernel_dim(&e).unwrap(), 6);
        let m = wedge_map(&e, Shape::boundary(1, 2)).unwrap();
        let k = linmap_kernel(&m);
        assert_eq!(k.len(), 6);
        for v in &k {
            assert!(e.wedge(v).unwrap().is_zero());
        }
    }

    #[test]
    fn degenerate_coframe() {
        let mut e = canonical_coframe(3, 4);
        for a in 0..4 {
            let x = e.get(&[0], &[a]);
            e.set(&[1], &[a], x);
        }
        assert!(matches!(coframe_kernel_dim(&e), Err(PointError::Degenerate(_))));
        assert!(!injective_w21(&e));
        let k = w21_kernel(&e).unwrap();
        assert!(!k.is_empty());
        let bulk = complete_coframe(&e).unwrap();
        assert!(bulk.wedge(&k[0]).unwrap().is_zero());
    }

    #[test]
    fn injectivity_is_scale_invariant() {
        let e = canonical_coframe(3, 4);
        assert!(injective_w21(&e));
        assert!(injective_w21(&e.scale(&r(2))));
    }

    #[test]
    fn triple_wedge_of_canonical_coframe() {
        let e = canonical_coframe(3, 4);
        let eee = e.wedge(&e).unwrap().wedge(&e).unwrap();
        // each of the 3! orderings of the legs contributes +1
        let mut expected = PForm::zero(Shape::boundary(3, 3));
        expected.set(&[0, 1, 2], &[1, 2, 3], r(6));
        assert_eq!(eee, expected);
    }

    #[test]
    fn rank_one_action() {
        let e = canonical_coframe(3, 4);
        let mut v = PForm::zero(Shape::boundary(1, 2));
        v.set(&[0], &[0, 2], r(1));
        let out = internal_act(&v, &e).unwrap();
        // only e_1 = basis vector 2 pairs with the internal slot b = 2
        let mut expected = PForm::zero(Shape::boundary(2, 1));
        expected.set(&[0, 1], &[0], Rational::new(1.into(), 2.into()));
        assert_eq!(out, expected);
        assert!(internal_act(&PForm::zero(Shape::boundary(1, 2)), &e).unwrap().is_zero());
    }

    #[test]
    fn fix_is_zero_when_constraint_holds() {
        let e = canonical_coframe(3, 4);
        let eps = time_vector(3, 4);
        let mut f = PForm::zero(Shape::boundary(2, 0));
        f.set(&[0, 1], &[], r(2));
        f.set(&[1, 2], &[], r(-5));
        // eps ∧ T = 0 = e ∧ 0
        let t = f.wedge(&eps).unwrap();
        let fix = structural_fix(&e, &eps, &t).unwrap();
        assert!(fix.v.is_zero());
        let (a, b) = structural_residuals(&e, &eps, &t, &fix).unwrap();
        assert!(a.is_zero() && b.is_zero());
    }
}
