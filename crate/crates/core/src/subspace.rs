//! Linear subspaces of R^n stored as orthonormal frames.
//!
//! A [`Subspace`] of dimension `0 < i < n` represents an element of the
//! Grassmannian `G_i(R^n)`. Everything computed from it (projectors, cosines,
//! complements) is independent of the particular frame.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

pub type Vector = DVector<f64>;

/// Pivot tolerance for the rank test in Gram-Schmidt.
pub const RANK_TOL: f64 = 1e-10;
/// Orthonormality tolerance of stored frames.
pub const ORTHO_TOL: f64 = 1e-12;
/// Tolerance for geometric comparisons between subspaces.
pub const GEOM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    frame: DMatrix<f64>,
}

/// Gram-Schmidt with re-orthogonalization. Returns the orthonormal columns and
/// the smallest pivot residual relative to the input norm.
fn gram_schmidt(vectors: &[Vector]) -> (Vec<Vector>, f64) {
    let mut basis: Vec<Vector> = Vec::with_capacity(vectors.len());
    let mut min_pivot = f64::INFINITY;
    for v in vectors {
        let scale = v.norm().max(1.0);
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&w);
                w.axpy(-c, b, 1.0);
            }
        }
        let norm = w.norm();
        min_pivot = min_pivot.min(norm / scale);
        if norm <= RANK_TOL * scale {
            basis.push(w);
            continue;
        }
        basis.push(w / norm);
    }
    (basis, min_pivot)
}

/// Orthonormal basis of the span of `vectors`, skipping dependent ones.
/// Vectors are picked greedily by largest residual.
pub(crate) fn span_basis(vectors: &[Vector], n: usize, tol: f64) -> Vec<Vector> {
    let mut residuals: Vec<Vector> = vectors.to_vec();
    let mut basis: Vec<Vector> = Vec::new();
    while basis.len() < n {
        let best = residuals
            .iter()
            .enumerate()
            .map(|(k, r)| (k, r.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1));
        let Some((k, norm)) = best else { break };
        if norm <= tol {
            break;
        }
        let mut b = residuals[k].clone() / norm;
        for q in &basis {
            let c = q.dot(&b);
            b.axpy(-c, q, 1.0);
        }
        let bn = b.norm();
        if bn <= 1e-14 {
            break;
        }
        b /= bn;
        for r in residuals.iter_mut() {
            let c = b.dot(r);
            r.axpy(-c, &b, 1.0);
        }
        basis.push(b);
    }
    basis
}

/// Orthonormal basis of the orthogonal complement of `basis` in R^n.
pub(crate) fn complement_basis(basis: &[Vector], n: usize) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::with_capacity(n - basis.len());
    let mut residuals: Vec<Vector> = (0..n)
        .map(|k| {
            let mut e = Vector::zeros(n);
            e[k] = 1.0;
            for _ in 0..2 {
                for b in basis {
                    let c = b.dot(&e);
                    e.axpy(-c, b, 1.0);
                }
            }
            e
        })
        .collect();
    while out.len() + basis.len() < n {
        let (k, norm) = residuals
            .iter()
            .enumerate()
            .map(|(k, r)| (k, r.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("complement of a proper subspace is nonempty");
        let mut b = residuals[k].clone() / norm;
        for q in basis.iter().chain(out.iter()) {
            let c = q.dot(&b);
            b.axpy(-c, q, 1.0);
        }
        b /= b.norm();
        for r in residuals.iter_mut() {
            let c = b.dot(r);
            r.axpy(-c, &b, 1.0);
        }
        out.push(b);
    }
    out
}

pub fn orthonormalize(vectors: &[Vector]) -> Result<Subspace> {
    let Some(first) = vectors.first() else {
        return Err(Error::BadDimension("no vectors given".into()));
    };
    let n = first.len();
    if let Some(v) = vectors.iter().find(|v| v.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    let i = vectors.len();
    if i == 0 || i >= n {
        return Err(Error::BadDimension(format!(
            "subspace dimension {i} must satisfy 0 < i < {n}"
        )));
    }
    let (basis, min_pivot) = gram_schmidt(vectors);
    if min_pivot <= RANK_TOL {
        return Err(Error::RankDeficient { residual: min_pivot });
    }
    Ok(Subspace {
        frame: DMatrix::from_columns(&basis),
    })
}

impl Subspace {
    /// Wraps a frame whose columns are already orthonormal (checked).
    pub fn from_frame(frame: DMatrix<f64>) -> Result<Self> {
        let (n, i) = frame.shape();
        if i == 0 || i >= n {
            return Err(Error::BadDimension(format!(
                "subspace dimension {i} must satisfy 0 < i < {n}"
            )));
        }
        let gram = frame.transpose() * &frame;
        let dev = (gram - DMatrix::identity(i, i)).abs().max();
        if dev > ORTHO_TOL * 10.0 {
            let cols: Vec<Vector> = frame.column_iter().map(|c| c.into_owned()).collect();
            return orthonormalize(&cols);
        }
        Ok(Self { frame })
    }

    /// Span of the coordinate axes `axes` in R^n.
    pub fn coordinate(n: usize, axes: &[usize]) -> Result<Self> {
        let cols: Vec<Vector> = axes
            .iter()
            .map(|&a| {
                let mut e = Vector::zeros(n);
                if a < n {
                    e[a] = 1.0;
                }
                e
            })
            .collect();
        orthonormalize(&cols)
    }

    pub fn line(u: &Vector) -> Result<Self> {
        orthonormalize(std::slice::from_ref(u))
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn basis(&self) -> Vec<Vector> {
        self.frame.column_iter().map(|c| c.into_owned()).collect()
    }

    pub fn projector(&self) -> DMatrix<f64> {
        &self.frame * self.frame.transpose()
    }

    /// Frobenius distance between orthogonal projectors.
    pub fn projector_distance(&self, other: &Subspace) -> f64 {
        (self.projector() - other.projector()).norm()
    }

    pub fn same_as(&self, other: &Subspace) -> bool {
        self.ambient_dim() == other.ambient_dim()
            && self.dim() == other.dim()
            && self.projector_distance(other) < GEOM_TOL
    }

    /// Coordinates of `x` in this frame (orthogonal projection onto the subspace).
    pub fn coords(&self, x: &Vector) -> Vector {
        self.frame.transpose() * x
    }

    /// Distance of `x` from the subspace.
    pub fn residual(&self, x: &Vector) -> f64 {
        (x - &self.frame * self.coords(x)).norm()
    }

    /// `cos(E, F) = |det(U^T V)|`, the factor by which orthogonal projection
    /// from one subspace to the other scales i-volume.
    pub fn cos_angle(&self, other: &Subspace) -> Result<f64> {
        if self.ambient_dim() != other.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: other.ambient_dim(),
            });
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let m = self.frame.transpose() * &other.frame;
        // Averaging both orders makes the result exactly symmetric.
        let det = 0.5 * (m.determinant().abs() + m.transpose().determinant().abs());
        Ok(det.min(1.0))
    }

    pub fn perp(&self) -> Subspace {
        let basis = complement_basis(&self.basis(), self.ambient_dim());
        Subspace {
            frame: DMatrix::from_columns(&basis),
        }
    }

    /// Image under an orthogonal map of R^n.
    pub fn rotated(&self, rotation: &DMatrix<f64>) -> Subspace {
        Subspace {
            frame: rotation * &self.frame,
        }
    }

    /// Same subspace with a different orthonormal frame: `U Q` for orthogonal `Q`.
    pub fn reframed(&self, q: &DMatrix<f64>) -> Result<Subspace> {
        Subspace::from_frame(&self.frame * q)
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        other
            .basis()
            .iter()
            .all(|b| self.residual(b) < GEOM_TOL)
    }
}

/// Uniform random orthogonal matrix (Haar measure on O(n)).
pub fn random_rotation(n: usize, rng: &mut RandomStream) -> DMatrix<f64> {
    loop {
        let cols: Vec<Vector> = (0..n).map(|_| rng.gaussian_vector(n)).collect();
        let (basis, min_pivot) = gram_schmidt(&cols);
        if min_pivot > RANK_TOL {
            return DMatrix::from_columns(&basis);
        }
    }
}

/// Rotation-invariant random element of `G_i(R^n)`.
pub fn sample_uniform(n: usize, i: usize, rng: &mut RandomStream) -> Result<Subspace> {
    if i == 0 || i >= n {
        return Err(Error::BadDimension(format!(
            "subspace dimension {i} must satisfy 0 < i < {n}"
        )));
    }
    loop {
        let cols: Vec<Vector> = (0..i).map(|_| rng.gaussian_vector(n)).collect();
        if let Ok(s) = orthonormalize(&cols) {
            return Ok(s);
        }
    }
}

/// Random element of `G_i^F`: uniform among i-subspaces inside `F` when
/// `i < dim F`, uniform among those containing `F` when `i > dim F`, and `F`
/// itself when the dimensions agree.
pub fn sample_incident(f: &Subspace, i: usize, rng: &mut RandomStream) -> Result<Subspace> {
    let n = f.ambient_dim();
    let j = f.dim();
    if i == 0 || i >= n {
        return Err(Error::BadDimension(format!(
            "subspace dimension {i} must satisfy 0 < i < {n}"
        )));
    }
    if i == j {
        return Ok(f.clone());
    }
    if i < j {
        loop {
            let cols: Vec<Vector> = (0..i)
                .map(|_| f.frame() * rng.gaussian_vector(j))
                .collect();
            if let Ok(s) = orthonormalize(&cols) {
                return Ok(s);
            }
        }
    }
    let complement = f.perp();
    let extra = complement.dim();
    loop {
        let mut cols = f.basis();
        for _ in 0..(i - j) {
            cols.push(complement.frame() * rng.gaussian_vector(extra));
        }
        if let Ok(s) = orthonormalize(&cols) {
            return Ok(s);
        }
    }
}

/// JSON form: `{"n": int, "dim": int, "frame": [[...], ...]}` with one unit
/// vector per row.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SubspaceJson {
    pub n: usize,
    pub dim: usize,
    pub frame: Vec<Vec<f64>>,
}

impl From<&Subspace> for SubspaceJson {
    fn from(s: &Subspace) -> Self {
        SubspaceJson {
            n: s.ambient_dim(),
            dim: s.dim(),
            frame: s
                .frame
                .column_iter()
                .map(|c| c.iter().copied().collect())
                .collect(),
        }
    }
}

impl TryFrom<SubspaceJson> for Subspace {
    type Error = Error;

    fn try_from(j: SubspaceJson) -> Result<Self> {
        if j.frame.len() != j.dim {
            return Err(Error::DimensionMismatch {
                expected: j.dim,
                got: j.frame.len(),
            });
        }
        let mut cols = Vec::with_capacity(j.dim);
        for row in &j.frame {
            if row.len() != j.n {
                return Err(Error::DimensionMismatch {
                    expected: j.n,
                    got: row.len(),
                });
            }
            cols.push(Vector::from_column_slice(row));
        }
        let s = orthonormalize(&cols)?;
        if j.dim > 0 {
            // A frame that is already orthonormal is kept bit for bit.
            let frame = DMatrix::from_columns(&cols);
            let gram = frame.transpose() * &frame - DMatrix::identity(j.dim, j.dim);
            if gram.amax() < 1e-14 {
                return Ok(Subspace { frame });
            }
        }
        Ok(s)
    }
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubspaceJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = SubspaceJson::deserialize(d)?;
        Subspace::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn orthonormalize_keeps_orthonormal_input() {
        let s = orthonormalize(&[v(&[1., 0., 0.]), v(&[0., 1., 0.])]).unwrap();
        assert!((s.frame() - DMatrix::from_columns(&[v(&[1., 0., 0.]), v(&[0., 1., 0.])])).norm() < 1e-15);
    }

    #[test]
    fn orthonormalize_spans_xy_plane() {
        let s = orthonormalize(&[v(&[1., 1., 0.]), v(&[1., 0., 0.])]).unwrap();
        let xy = Subspace::coordinate(3, &[0, 1]).unwrap();
        assert!(s.projector_distance(&xy) < 1e-12);
    }

    #[test]
    fn orthonormalize_rejects_dependent() {
        let err = orthonormalize(&[v(&[1., 1., 0.]), v(&[2., 2., 0.])]).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { .. }));
    }

    #[test]
    fn orthonormalize_rejects_mixed_lengths() {
        let err = orthonormalize(&[v(&[1., 1., 0.]), v(&[2., 2.])]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn cos_angle_examples() {
        let e = Subspace::coordinate(3, &[0, 1]).unwrap();
        assert!((e.cos_angle(&e).unwrap() - 1.0).abs() < 1e-15);
        let l1 = Subspace::coordinate(2, &[0]).unwrap();
        let l2 = Subspace::line(&v(&[1., 1.])).unwrap();
        assert!((l1.cos_angle(&l2).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let a = Subspace::coordinate(4, &[0, 1]).unwrap();
        let b = Subspace::coordinate(4, &[2, 3]).unwrap();
        assert!(a.cos_angle(&b).unwrap().abs() < 1e-15);
        assert!(matches!(a.cos_angle(&l1), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn perp_of_axis() {
        let l = Subspace::coordinate(3, &[0]).unwrap();
        let p = l.perp();
        assert!(p.projector_distance(&Subspace::coordinate(3, &[1, 2]).unwrap()) < 1e-12);
    }

    #[test]
    fn incident_sampling_respects_containment() {
        let mut rng = RandomStream::new(3);
        let f = Subspace::coordinate(3, &[0]).unwrap();
        let e = sample_incident(&f, 2, &mut rng).unwrap();
        assert!(e.residual(&v(&[1., 0., 0.])) < 1e-12);
        let plane = Subspace::coordinate(3, &[0, 1]).unwrap();
        let l = sample_incident(&plane, 1, &mut rng).unwrap();
        assert!(plane.contains(&l));
        assert_eq!(sample_incident(&plane, 2, &mut rng).unwrap(), plane);
    }

    #[test]
    fn json_round_trip() {
        let s = Subspace::line(&v(&[1., 2., 2.])).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: Subspace = serde_json::from_str(&text).unwrap();
        assert!(s.same_as(&back));
    }
}
