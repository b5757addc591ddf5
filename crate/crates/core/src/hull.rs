//! Dimension-generic convex hulls.
//!
//! Points are first reduced to coordinates in their affine hull. Full
//! dimensional point sets are triangulated with quickhull (a point is
//! processed only if it lies more than `eps` beyond some facet). Coplanar
//! simplices are merged into true facets, and each facet's vertices are found
//! by recursing into the facet's own affine hull, so points lying inside a
//! face are never reported as vertices.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::subspace::{span_basis, Vector};

/// Affine hull of a point set: `x = origin + basis * y`.
#[derive(Clone, Debug)]
pub(crate) struct AffineFrame {
    pub origin: Vector,
    /// Orthonormal columns, n x d.
    pub basis: DMatrix<f64>,
}

impl AffineFrame {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn to_local(&self, x: &Vector) -> Vec<f64> {
        let y = self.basis.transpose() * (x - &self.origin);
        y.iter().copied().collect()
    }

    pub fn to_ambient_dir(&self, y: &[f64]) -> Vector {
        &self.basis * DVector::from_column_slice(y)
    }
}

/// One facet of a hull, in the coordinates the hull was computed in.
#[derive(Clone, Debug)]
pub(crate) struct Facet {
    /// Indices into the input point list, sorted.
    pub vertices: Vec<usize>,
    /// Outer unit normal (local coordinates).
    pub normal: Vec<f64>,
}

#[derive(Clone, Debug)]
pub(crate) struct Hull {
    pub frame: AffineFrame,
    /// Indices of the extreme points, sorted.
    pub vertices: Vec<usize>,
    pub facets: Vec<Facet>,
    /// Volume in the affine hull's dimension (1 for a point).
    pub volume: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn tolerance_for(points: &[Vector]) -> f64 {
    let n = points[0].len();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for p in points {
        for k in 0..n {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let diam = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt();
    1e-9 * diam.max(1e-300)
}

pub(crate) fn affine_frame(points: &[Vector], eps: f64) -> AffineFrame {
    let n = points[0].len();
    let origin = points[0].clone();
    let diffs: Vec<Vector> = points.iter().map(|p| p - &origin).collect();
    let basis = span_basis(&diffs, n, eps);
    let basis = if basis.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&basis)
    };
    AffineFrame { origin, basis }
}

/// Hull of points given in R^n; works in the affine hull.
pub(crate) fn hull(points: &[Vector], eps: f64) -> Hull {
    assert!(!points.is_empty());
    let frame = affine_frame(points, eps);
    let local: Vec<Vec<f64>> = points.iter().map(|p| frame.to_local(p)).collect();
    let (vertices, facets, volume) = local_hull(&local, frame.dim(), eps);
    Hull {
        frame,
        vertices,
        facets,
        volume,
    }
}

/// Hull of full-dimensional points in R^d. Returns sorted vertex indices,
/// facets and the d-volume.
fn local_hull(points: &[Vec<f64>], d: usize, eps: f64) -> (Vec<usize>, Vec<Facet>, f64) {
    match d {
        0 => {
            return (vec![0], Vec::new(), 1.0);
        }
        1 => {
            let mut lo = 0;
            let mut hi = 0;
            for (k, p) in points.iter().enumerate() {
                if p[0] < points[lo][0] {
                    lo = k;
                }
                if p[0] > points[hi][0] {
                    hi = k;
                }
            }
            let mut vs = vec![lo, hi];
            vs.sort_unstable();
            let facets = vec![
                Facet {
                    vertices: vec![lo],
                    normal: vec![-1.0],
                },
                Facet {
                    vertices: vec![hi],
                    normal: vec![1.0],
                },
            ];
            return (vs, facets, points[hi][0] - points[lo][0]);
        }
        _ => {}
    }

    let tri = quickhull(points, d, eps);
    let volume = tri.volume;

    // Merge coplanar simplices into facets.
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for s in &tri.simplices {
        let exists = planes.iter().any(|(nrm, off)| {
            dot(nrm, &s.normal) > 0.0
                && s.vertices
                    .iter()
                    .all(|&v| (dot(nrm, &points[v]) - off).abs() <= eps)
        });
        if !exists {
            planes.push((s.normal.clone(), s.offset));
        }
    }

    let mut facets = Vec::with_capacity(planes.len());
    let mut all_vertices: Vec<usize> = Vec::new();
    for (normal, offset) in planes {
        let on_plane: Vec<usize> = (0..points.len())
            .filter(|&k| (dot(&normal, &points[k]) - offset).abs() <= eps)
            .collect();
        let sub_points: Vec<Vector> = on_plane
            .iter()
            .map(|&k| Vector::from_column_slice(&points[k]))
            .collect();
        let sub = hull(&sub_points, eps);
        let mut verts: Vec<usize> = sub.vertices.iter().map(|&k| on_plane[k]).collect();
        verts.sort_unstable();
        all_vertices.extend_from_slice(&verts);
        facets.push(Facet {
            vertices: verts,
            normal,
        });
    }
    all_vertices.sort_unstable();
    all_vertices.dedup();
    facets.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    (all_vertices, facets, volume)
}

struct Simplex {
    vertices: Vec<usize>,
    normal: Vec<f64>,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

struct Triangulation {
    simplices: Vec<Simplex>,
    volume: f64,
}

/// Hyperplane through `pts` (d points in R^d) with the normal pointing away from `interior`.
fn plane_through(points: &[Vec<f64>], ids: &[usize], interior: &[f64]) -> (Vec<f64>, f64) {
    let p0 = &points[ids[0]];
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(ids.len() - 1);
    for &k in &ids[1..] {
        let mut w = sub(&points[k], p0);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = dot(&w, &w).sqrt();
        if norm > 0.0 {
            w.iter_mut().for_each(|x| *x /= norm);
        }
        basis.push(w);
    }
    let mut w = sub(interior, p0);
    for _ in 0..2 {
        for b in &basis {
            let c = dot(b, &w);
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    let norm = dot(&w, &w).sqrt();
    let normal: Vec<f64> = w.iter().map(|x| -x / norm).collect();
    let offset = dot(&normal, p0);
    (normal, offset)
}

fn simplex_volume(points: &[Vec<f64>], ids: &[usize], apex: &[f64], d: usize) -> f64 {
    let m = DMatrix::from_fn(d, d, |r, c| points[ids[c]][r] - apex[r]);
    let fact: f64 = (1..=d).map(|k| k as f64).product();
    m.determinant().abs() / fact
}

fn quickhull(points: &[Vec<f64>], d: usize, eps: f64) -> Triangulation {
    // Initial simplex: greedy farthest points from the growing affine span.
    let mut chosen: Vec<usize> = Vec::with_capacity(d + 1);
    let first = (0..points.len())
        .min_by(|&a, &b| points[a].partial_cmp(&points[b]).unwrap())
        .unwrap();
    chosen.push(first);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while chosen.len() < d + 1 {
        let p0 = &points[chosen[0]];
        let mut best = (usize::MAX, -1.0);
        for (k, p) in points.iter().enumerate() {
            let mut w = sub(p, p0);
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            let r = dot(&w, &w).sqrt();
            if r > best.1 {
                best = (k, r);
            }
        }
        let (k, _) = best;
        let mut w = sub(&points[k], p0);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let r = dot(&w, &w).sqrt();
        w.iter_mut().for_each(|x| *x /= r);
        basis.push(w);
        chosen.push(k);
    }
    let mut interior = vec![0.0; d];
    for &k in &chosen {
        for r in 0..d {
            interior[r] += points[k][r] / (d + 1) as f64;
        }
    }

    let mut simplices: Vec<Simplex> = Vec::new();
    for skip in 0..=d {
        let mut ids: Vec<usize> = chosen
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != skip)
            .map(|(_, &k)| k)
            .collect();
        ids.sort_unstable();
        let (normal, offset) = plane_through(points, &ids, &interior);
        simplices.push(Simplex {
            vertices: ids,
            normal,
            offset,
            outside: Vec::new(),
            alive: true,
        });
    }
    let mut in_simplex = vec![false; points.len()];
    for &k in &chosen {
        in_simplex[k] = true;
    }
    for k in 0..points.len() {
        if in_simplex[k] {
            continue;
        }
        for s in simplices.iter_mut() {
            if dot(&s.normal, &points[k]) - s.offset > eps {
                s.outside.push(k);
                break;
            }
        }
    }

    loop {
        let Some(si) = simplices
            .iter()
            .position(|s| s.alive && !s.outside.is_empty())
        else {
            break;
        };
        let s = &simplices[si];
        let apex = *s
            .outside
            .iter()
            .max_by(|&&a, &&b| {
                let da = dot(&s.normal, &points[a]);
                let db = dot(&s.normal, &points[b]);
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .unwrap();
        let p = &points[apex];

        let visible: Vec<usize> = simplices
            .iter()
            .enumerate()
            .filter(|(_, s)| s.alive && dot(&s.normal, p) - s.offset > eps)
            .map(|(k, _)| k)
            .collect();

        let mut ridge_count: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut ridge_order: Vec<Vec<usize>> = Vec::new();
        for &vi in &visible {
            let verts = &simplices[vi].vertices;
            for skip in 0..verts.len() {
                let ridge: Vec<usize> = verts
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != skip)
                    .map(|(_, &k)| k)
                    .collect();
                let c = ridge_count.entry(ridge.clone()).or_insert(0);
                if *c == 0 {
                    ridge_order.push(ridge);
                }
                *c += 1;
            }
        }

        let mut orphans: Vec<usize> = Vec::new();
        for &vi in &visible {
            simplices[vi].alive = false;
            orphans.append(&mut simplices[vi].outside);
        }
        let first_new = simplices.len();
        for ridge in ridge_order {
            if ridge_count[&ridge] != 1 {
                continue;
            }
            let mut ids = ridge;
            ids.push(apex);
            ids.sort_unstable();
            let (normal, offset) = plane_through(points, &ids, &interior);
            simplices.push(Simplex {
                vertices: ids,
                normal,
                offset,
                outside: Vec::new(),
                alive: true,
            });
        }
        for k in orphans {
            if k == apex {
                continue;
            }
            for s in simplices[first_new..].iter_mut() {
                if dot(&s.normal, &points[k]) - s.offset > eps {
                    s.outside.push(k);
                    break;
                }
            }
        }
    }

    let simplices: Vec<Simplex> = simplices.into_iter().filter(|s| s.alive).collect();
    let volume = simplices
        .iter()
        .map(|s| simplex_volume(points, &s.vertices, &interior, d))
        .sum();
    Triangulation { simplices, volume }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(raw: &[&[f64]]) -> Vec<Vector> {
        raw.iter().map(|p| Vector::from_column_slice(p)).collect()
    }

    #[test]
    fn cube_with_interior_and_face_centers() {
        let mut raw: Vec<Vec<f64>> = Vec::new();
        for m in 0..8 {
            raw.push((0..3).map(|k| ((m >> k) & 1) as f64).collect());
        }
        raw.push(vec![0.5, 0.5, 0.5]);
        raw.push(vec![0.5, 0.5, 1.0]);
        raw.push(vec![0.5, 0.0, 0.5]);
        raw.push(vec![1.0, 0.5, 0.0]);
        let points: Vec<Vector> = raw.iter().map(|p| Vector::from_column_slice(p)).collect();
        let h = hull(&points, 1e-9);
        assert_eq!(h.vertices, (0..8).collect::<Vec<_>>());
        assert_eq!(h.facets.len(), 6);
        assert!(h.facets.iter().all(|f| f.vertices.len() == 4));
        assert!((h.volume - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_points_give_segment() {
        let h = hull(&pts(&[&[0., 0., 0.], &[1., 0., 0.], &[2., 0., 0.]]), 1e-9);
        assert_eq!(h.frame.dim(), 1);
        assert_eq!(h.vertices, vec![0, 2]);
        assert!((h.volume - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_point() {
        let h = hull(&pts(&[&[1., 2.], &[1., 2.]]), 1e-9);
        assert_eq!(h.frame.dim(), 0);
        assert_eq!(h.vertices.len(), 1);
    }
}
