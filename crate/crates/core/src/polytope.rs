//! Convex polytopes given by their vertices.
//!
//! A [`Polytope`] stores its extreme points, its affine hull and its facets.
//! Lower-dimensional polytopes are handled inside their affine hull. The face
//! lattice and exterior angles are computed once on first use.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::{self, AffineFrame};
use crate::rng::RandomStream;
use crate::subspace::{complement_basis, span_basis, Subspace, Vector};

/// Samples used for exterior angles of codimension four and higher.
pub const ANGLE_MC_SAMPLES: usize = 1_000_000;

#[derive(Clone, Debug)]
pub struct Facet {
    pub vertex_ids: Vec<usize>,
    /// Outer unit normal, lying in the direction space of the affine hull.
    pub normal: Vector,
    pub offset: f64,
}

#[derive(Clone, Debug)]
pub struct Face {
    pub dim: usize,
    /// Sorted indices into the parent's vertex list.
    pub vertex_ids: Vec<usize>,
    /// Orthonormal frame (n x dim) of the face's direction space.
    pub basis: DMatrix<f64>,
    /// `dim`-dimensional volume; 1 for vertices.
    pub volume: f64,
}

impl Face {
    /// Direction space as a [`Subspace`], when `0 < dim < n`.
    pub fn direction(&self) -> Result<Subspace> {
        Subspace::from_frame(self.basis.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaceId {
    pub dim: usize,
    pub index: usize,
}

#[derive(Clone, Debug)]
pub struct FaceLattice {
    faces: Vec<Vec<Face>>,
    covers: Vec<Vec<Vec<usize>>>,
}

impl FaceLattice {
    /// Faces of dimension `k` (including the polytope itself at `k = dim P`),
    /// ordered lexicographically by vertex ids.
    pub fn faces(&self, k: usize) -> &[Face] {
        self.faces.get(k).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn face(&self, id: FaceId) -> &Face {
        &self.faces[id.dim][id.index]
    }

    /// Indices (in dimension `k + 1`) of the faces covering face `(k, index)`.
    pub fn covering(&self, id: FaceId) -> &[usize] {
        &self.covers[id.dim][id.index]
    }

    pub fn counts(&self) -> Vec<usize> {
        self.faces.iter().map(Vec::len).collect()
    }

    pub fn top_dim(&self) -> usize {
        self.faces.len() - 1
    }
}

/// A polyhedral cone with apex at the origin: nonnegative combinations of
/// `generators` plus the linear span of `lineality`.
#[derive(Clone, Debug)]
pub struct Cone {
    pub generators: Vec<Vector>,
    pub lineality: Vec<Vector>,
}

impl Cone {
    pub fn dim(&self) -> usize {
        let n = self
            .generators
            .first()
            .or(self.lineality.first())
            .map_or(0, |v| v.len());
        let all: Vec<Vector> = self
            .generators
            .iter()
            .chain(self.lineality.iter())
            .cloned()
            .collect();
        span_basis(&all, n, 1e-9).len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleEstimate {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug)]
pub struct Polytope {
    n: usize,
    vertices: Vec<Vector>,
    frame: AffineFrame,
    facets: Vec<Facet>,
    volume_rel: f64,
    eps: f64,
    lattice: OnceLock<FaceLattice>,
    angles: Vec<OnceLock<Vec<AngleEstimate>>>,
    diameter: OnceLock<f64>,
}

fn lex_cmp(a: &Vector, b: &Vector) -> std::cmp::Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

impl Polytope {
    pub fn convex_hull(points: &[Vector]) -> Result<Polytope> {
        let Some(first) = points.first() else {
            return Err(Error::EmptyInput);
        };
        let n = first.len();
        if n == 0 {
            return Err(Error::BadDimension("ambient dimension 0".into()));
        }
        if let Some(p) = points.iter().find(|p| p.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: p.len() });
        }
        let eps = hull::tolerance_for(points);
        let h = hull::hull(points, eps);

        let mut order: Vec<usize> = h.vertices.clone();
        order.sort_by(|&a, &b| lex_cmp(&points[a], &points[b]));
        let mut remap: HashMap<usize, usize> = HashMap::new();
        for (new, &old) in order.iter().enumerate() {
            remap.insert(old, new);
        }
        let vertices: Vec<Vector> = order.iter().map(|&k| points[k].clone()).collect();
        let frame = hull::affine_frame(&vertices, eps);
        // Facet normals are local to the hull frame; re-express in R^n.
        let mut facets: Vec<Facet> = h
            .facets
            .iter()
            .map(|f| {
                let normal = h.frame.to_ambient_dir(&f.normal);
                let mut ids: Vec<usize> = f.vertices.iter().map(|k| remap[k]).collect();
                ids.sort_unstable();
                let offset = normal.dot(&vertices[ids[0]]);
                Facet {
                    vertex_ids: ids,
                    normal,
                    offset,
                }
            })
            .collect();
        facets.sort_by(|a, b| a.vertex_ids.cmp(&b.vertex_ids));
        let d = frame.dim();
        Ok(Polytope {
            n,
            vertices,
            frame,
            facets,
            volume_rel: h.volume,
            eps,
            lattice: OnceLock::new(),
            angles: (0..=d).map(|_| OnceLock::new()).collect(),
            diameter: OnceLock::new(),
        })
    }

    pub fn from_vertex_lists(points: &[Vec<f64>]) -> Result<Polytope> {
        let pts: Vec<Vector> = points.iter().map(|p| Vector::from_column_slice(p)).collect();
        Polytope::convex_hull(&pts)
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    /// Dimension of the affine hull.
    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    /// Facets inside the affine hull (for a point: none; for a segment: its endpoints).
    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn tolerance(&self) -> f64 {
        self.eps
    }

    /// Orthonormal basis (n x dim) of the affine hull's direction space.
    pub fn affine_basis(&self) -> &DMatrix<f64> {
        &self.frame.basis
    }

    pub fn affine_origin(&self) -> &Vector {
        &self.frame.origin
    }

    /// Volume in the dimension of the affine hull (1 for a point).
    pub fn relative_volume(&self) -> f64 {
        self.volume_rel
    }

    /// n-dimensional volume; zero for lower-dimensional bodies.
    pub fn volume(&self) -> f64 {
        if self.dim() == self.n {
            self.volume_rel
        } else {
            0.0
        }
    }

    pub fn centroid(&self) -> Vector {
        let mut c = Vector::zeros(self.n);
        for v in &self.vertices {
            c += v;
        }
        c / self.vertices.len() as f64
    }

    pub fn support(&self, x: &Vector) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.dot(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        *self.diameter.get_or_init(|| {
            let mut d: f64 = 0.0;
            for a in &self.vertices {
                for b in &self.vertices {
                    d = d.max((a - b).norm());
                }
            }
            d
        })
    }

    pub fn scaled(&self, t: f64) -> Polytope {
        let pts: Vec<Vector> = self.vertices.iter().map(|v| v * t).collect();
        Polytope::convex_hull(&pts).expect("scaling preserves validity")
    }

    pub fn translated(&self, shift: &Vector) -> Polytope {
        let pts: Vec<Vector> = self.vertices.iter().map(|v| v + shift).collect();
        Polytope::convex_hull(&pts).expect("translation preserves validity")
    }

    pub fn transformed(&self, map: &DMatrix<f64>) -> Polytope {
        let pts: Vec<Vector> = self.vertices.iter().map(|v| map * v).collect();
        Polytope::convex_hull(&pts).expect("linear image of a polytope")
    }

    pub fn reflected(&self) -> Polytope {
        self.scaled(-1.0)
    }

    /// Same point set as `other` (vertex lists agree within tolerance).
    pub fn same_as(&self, other: &Polytope) -> bool {
        self.n == other.n
            && self.vertices.len() == other.vertices.len()
            && self
                .vertices
                .iter()
                .zip(&other.vertices)
                .all(|(a, b)| (a - b).norm() <= self.eps.max(other.eps) * 10.0)
    }

    pub fn minkowski_sum(&self, other: &Polytope) -> Result<Polytope> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut pts = Vec::with_capacity(self.vertices.len() * other.vertices.len());
        for a in &self.vertices {
            for b in &other.vertices {
                pts.push(a + b);
            }
        }
        Polytope::convex_hull(&pts)
    }

    /// Orthogonal projection onto `e`, in the frame coordinates of `e`.
    pub fn project(&self, e: &Subspace) -> Result<Polytope> {
        if e.ambient_dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: e.ambient_dim() });
        }
        let pts: Vec<Vector> = self.vertices.iter().map(|v| e.coords(v)).collect();
        Polytope::convex_hull(&pts)
    }

    pub fn is_centrally_symmetric(&self) -> bool {
        is_centrally_symmetric_points(&self.vertices, self.eps.max(1e-9))
    }

    pub fn face_lattice(&self) -> &FaceLattice {
        self.lattice.get_or_init(|| build_lattice(self))
    }

    pub fn face_vertices(&self, face: &Face) -> Vec<Vector> {
        face.vertex_ids.iter().map(|&k| self.vertices[k].clone()).collect()
    }

    /// Facets of P (in its affine hull) containing the face.
    fn facets_containing(&self, face: &Face) -> Vec<&Facet> {
        self.facets
            .iter()
            .filter(|f| is_subset(&face.vertex_ids, &f.vertex_ids))
            .collect()
    }

    /// Normal cone `N(F, P)`: outer normals of facets containing `F`, plus the
    /// orthogonal complement of the affine hull when `P` is lower-dimensional.
    pub fn normal_cone(&self, face: &Face) -> Cone {
        let generators = if face.dim == self.dim() {
            Vec::new()
        } else {
            self.facets_containing(face)
                .into_iter()
                .map(|f| f.normal.clone())
                .collect()
        };
        let aff: Vec<Vector> = self.frame.basis.column_iter().map(|c| c.into_owned()).collect();
        let lineality = complement_basis(&aff, self.n);
        Cone { generators, lineality }
    }

    /// Whether `x` is an outer normal of `P` at `face`.
    pub fn normal_cone_contains(&self, face: &Face, x: &Vector) -> bool {
        let scale = x.norm() * self.diameter().max(1e-300);
        let tol = 1e-9 * scale.max(1e-300);
        let along = face.basis.transpose() * x;
        if along.norm() > 1e-9 * x.norm() {
            return false;
        }
        let v0 = &self.vertices[face.vertex_ids[0]];
        let h0 = v0.dot(x);
        self.vertices.iter().all(|w| w.dot(x) - h0 <= tol)
    }

    /// Orthonormal basis (n x (n - dim F)) of the linear span of `N(F, P)`.
    pub fn normal_span(&self, face: &Face) -> DMatrix<f64> {
        let basis: Vec<Vector> = face.basis.column_iter().map(|c| c.into_owned()).collect();
        let comp = complement_basis(&basis, self.n);
        if comp.is_empty() {
            DMatrix::zeros(self.n, 0)
        } else {
            DMatrix::from_columns(&comp)
        }
    }

    /// Normalized exterior angle `gamma(F, P)`.
    pub fn exterior_angle(&self, id: FaceId) -> Result<f64> {
        Ok(self.exterior_angle_estimate(id)?.value)
    }

    pub fn exterior_angle_estimate(&self, id: FaceId) -> Result<AngleEstimate> {
        if id.dim >= self.dim() {
            return Err(Error::DegenerateFace);
        }
        Ok(self.angles_of_dim(id.dim)[id.index])
    }

    /// Exterior angles of all k-faces; the polytope itself gets 1.
    pub(crate) fn angles_of_dim(&self, k: usize) -> &[AngleEstimate] {
        if k > self.dim() {
            return &[];
        }
        self.angles[k].get_or_init(|| {
            let lattice = self.face_lattice();
            lattice
                .faces(k)
                .iter()
                .map(|f| self.compute_angle(f))
                .collect()
        })
    }

    fn compute_angle(&self, face: &Face) -> AngleEstimate {
        let d = self.dim();
        if face.dim == d {
            return AngleEstimate { value: 1.0, stderr: 0.0 };
        }
        let gens: Vec<Vector> = self
            .facets_containing(face)
            .into_iter()
            .map(|f| f.normal.clone())
            .collect();
        let codim = d - face.dim;
        match codim {
            1 => AngleEstimate { value: 0.5, stderr: 0.0 },
            2 => {
                let basis = span_basis(&gens, self.n, 1e-12);
                let ang: Vec<(f64, f64)> = gens
                    .iter()
                    .map(|g| (basis[0].dot(g), basis[1].dot(g)))
                    .collect();
                let mut theta: f64 = 0.0;
                for a in &ang {
                    for b in &ang {
                        let c = (a.0 * b.0 + a.1 * b.1).clamp(-1.0, 1.0);
                        theta = theta.max(c.acos());
                    }
                }
                AngleEstimate { value: theta / (2.0 * PI), stderr: 0.0 }
            }
            3 => AngleEstimate {
                value: spherical_polygon_area(&gens, self.n) / (4.0 * PI),
                stderr: 0.0,
            },
            _ => self.monte_carlo_angle(face, &gens, codim),
        }
    }

    fn monte_carlo_angle(&self, face: &Face, gens: &[Vector], codim: usize) -> AngleEstimate {
        let basis = span_basis(gens, self.n, 1e-12);
        let span = DMatrix::from_columns(&basis);
        let seed = face
            .vertex_ids
            .iter()
            .fold(0x5151_u64, |h, &k| h.wrapping_mul(1_000_003).wrapping_add(k as u64));
        let mut rng = RandomStream::with_counter(seed, codim as u64);
        // Membership of x = span y: y . span^T (w - v0) <= tol |y| for every vertex w.
        let v0 = &self.vertices[face.vertex_ids[0]];
        let k = basis.len();
        let rows: Vec<f64> = self
            .vertices
            .iter()
            .flat_map(|w| (span.transpose() * (w - v0)).iter().copied().collect::<Vec<_>>())
            .collect();
        let tol = 1e-9 * self.diameter().max(1e-300);
        let mut y = vec![0.0; k];
        let mut hits = 0usize;
        for _ in 0..ANGLE_MC_SAMPLES {
            y.iter_mut().for_each(|c| *c = rng.gaussian());
            let norm = y.iter().map(|c| c * c).sum::<f64>().sqrt();
            if rows.chunks_exact(k).all(|a| a.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>() <= tol * norm) {
                hits += 1;
            }
        }
        let p = hits as f64 / ANGLE_MC_SAMPLES as f64;
        AngleEstimate {
            value: p,
            stderr: (p * (1.0 - p) / ANGLE_MC_SAMPLES as f64).sqrt(),
        }
    }

    /// Face ids of k-faces that are not centrally symmetric.
    pub fn asymmetric_faces(&self, k: usize) -> Vec<usize> {
        let lattice = self.face_lattice();
        lattice
            .faces(k)
            .iter()
            .enumerate()
            .filter(|(_, f)| !is_centrally_symmetric_points(&self.face_vertices(f), self.eps.max(1e-9)))
            .map(|(j, _)| j)
            .collect()
    }

    /// `(all k-faces symmetric, ids of violating k-faces)`.
    pub fn has_centrally_symmetric_k_faces(&self, k: usize) -> (bool, Vec<usize>) {
        let bad = self.asymmetric_faces(k);
        (bad.is_empty(), bad)
    }

    /// Hausdorff distance, from exact point-to-polytope distances at the vertices.
    pub fn hausdorff_distance(&self, other: &Polytope) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let a = self
            .vertices
            .iter()
            .map(|v| other.distance_to_point(v))
            .fold(0.0, f64::max);
        let b = other
            .vertices
            .iter()
            .map(|v| self.distance_to_point(v))
            .fold(0.0, f64::max);
        Ok(a.max(b))
    }

    pub fn distance_to_point(&self, x: &Vector) -> f64 {
        let shifted: Vec<Vector> = self.vertices.iter().map(|v| v - x).collect();
        min_norm_point(&shifted).norm()
    }
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    let mut j = 0;
    for &s in small {
        while j < big.len() && big[j] < s {
            j += 1;
        }
        if j == big.len() || big[j] != s {
            return false;
        }
    }
    true
}

/// Whether the point set equals its reflection through its centroid.
pub fn is_centrally_symmetric_points(points: &[Vector], tol: f64) -> bool {
    if points.is_empty() {
        return true;
    }
    let n = points[0].len();
    let mut c = Vector::zeros(n);
    for p in points {
        c += p;
    }
    c /= points.len() as f64;
    let tol = tol.max(1e-9);
    points.iter().all(|p| {
        let q = &c * 2.0 - p;
        points.iter().any(|r| (r - &q).norm() <= tol)
    })
}

/// Area of the spherical polygon cut out by the pointed 3-dimensional cone
/// spanned by `gens` (all extreme rays).
fn spherical_polygon_area(gens: &[Vector], n: usize) -> f64 {
    let basis = span_basis(gens, n, 1e-12);
    let unit: Vec<[f64; 3]> = gens
        .iter()
        .map(|g| {
            let v = [basis[0].dot(g), basis[1].dot(g), basis[2].dot(g)];
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            [v[0] / r, v[1] / r, v[2] / r]
        })
        .collect();
    let mut c = [0.0; 3];
    for u in &unit {
        for k in 0..3 {
            c[k] += u[k];
        }
    }
    let cn = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    let c = [c[0] / cn, c[1] / cn, c[2] / cn];
    // Tangent frame at c.
    let helper = if c[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let t1 = normalize3(cross(helper, c));
    let t2 = cross(c, t1);
    let mut ordered: Vec<(f64, [f64; 3])> = unit
        .iter()
        .map(|u| (dot3(*u, t2).atan2(dot3(*u, t1)), *u))
        .collect();
    ordered.sort_by(|a, b| a.0.total_cmp(&b.0));
    let m = ordered.len();
    let mut area = 0.0;
    for j in 0..m {
        let a = ordered[j].1;
        let b = ordered[(j + 1) % m].1;
        area += triangle_solid_angle(c, a, b);
    }
    area
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize3(a: [f64; 3]) -> [f64; 3] {
    let r = dot3(a, a).sqrt();
    [a[0] / r, a[1] / r, a[2] / r]
}

/// Solid angle of the spherical triangle with unit vertices a, b, c.
fn triangle_solid_angle(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let num = dot3(a, cross(b, c)).abs();
    let den = 1.0 + dot3(a, b) + dot3(b, c) + dot3(c, a);
    2.0 * num.atan2(den)
}

/// Minimum-norm point of the convex hull of `points` (Wolfe's algorithm).
pub(crate) fn min_norm_point(points: &[Vector]) -> Vector {
    let n = points[0].len();
    let scale = points.iter().map(|p| p.norm_squared()).fold(0.0, f64::max).max(1e-300);
    let tol = 1e-14 * scale;
    let start = (0..points.len())
        .min_by(|&a, &b| points[a].norm_squared().total_cmp(&points[b].norm_squared()))
        .unwrap();
    let mut active: Vec<usize> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let mut x = points[start].clone();
    for _ in 0..(50 * points.len() + 100) {
        let (j, best) = (0..points.len())
            .map(|k| (k, points[k].dot(&x)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if x.norm_squared() - best <= tol || active.contains(&j) {
            return x;
        }
        active.push(j);
        weights.push(0.0);
        loop {
            let Some(mu) = affine_min_norm(points, &active) else {
                return x;
            };
            if mu.iter().all(|&m| m > 1e-14) {
                weights = mu;
                x = combine(points, &active, &weights, n);
                break;
            }
            let mut theta: f64 = 1.0;
            for (w, m) in weights.iter().zip(&mu) {
                if *m <= 1e-14 && w - m > 0.0 {
                    theta = theta.min(w / (w - m));
                }
            }
            for (w, m) in weights.iter_mut().zip(&mu) {
                *w += theta * (m - *w);
            }
            let mut k = 0;
            while k < active.len() {
                if weights[k] <= 1e-14 {
                    active.remove(k);
                    weights.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            x = combine(points, &active, &weights, n);
            if active.len() == 1 {
                break;
            }
        }
    }
    x
}

fn combine(points: &[Vector], active: &[usize], weights: &[f64], n: usize) -> Vector {
    let mut x = Vector::zeros(n);
    for (&k, &w) in active.iter().zip(weights) {
        x.axpy(w, &points[k], 1.0);
    }
    x
}

/// Weights of the min-norm point of the affine hull of the active points.
fn affine_min_norm(points: &[Vector], active: &[usize]) -> Option<Vec<f64>> {
    let m = active.len();
    let mut a = DMatrix::zeros(m + 1, m + 1);
    for r in 0..m {
        for c in 0..m {
            a[(r, c)] = points[active[r]].dot(&points[active[c]]);
        }
        a[(r, m)] = 1.0;
        a[(m, r)] = 1.0;
    }
    let mut b = DVector::zeros(m + 1);
    b[m] = 1.0;
    let sol = a.clone().lu().solve(&b).or_else(|| {
        a.svd(true, true).solve(&b, 1e-14).ok()
    })?;
    Some(sol.iter().take(m).copied().collect())
}

fn build_lattice(p: &Polytope) -> FaceLattice {
    let d = p.dim();
    let n = p.n;
    let mut faces: Vec<Vec<Face>> = vec![Vec::new(); d + 1];
    let mut index: Vec<HashMap<Vec<usize>, usize>> = vec![HashMap::new(); d + 1];
    let mut covers: Vec<Vec<Vec<usize>>> = vec![Vec::new(); d + 1];

    let all_ids: Vec<usize> = (0..p.vertices.len()).collect();
    faces[d].push(Face {
        dim: d,
        vertex_ids: all_ids.clone(),
        basis: p.frame.basis.clone(),
        volume: p.volume_rel,
    });
    index[d].insert(all_ids, 0);
    covers[d].push(Vec::new());

    for k in (1..=d).rev() {
        let mut j = 0;
        while j < faces[k].len() {
            let parent = faces[k][j].clone();
            let children: Vec<(Vec<usize>, Option<hull::Hull>)> = if k == d {
                p.facets
                    .iter()
                    .map(|f| (f.vertex_ids.clone(), None))
                    .collect()
            } else if k == 1 {
                parent
                    .vertex_ids
                    .iter()
                    .map(|&v| (vec![v], None))
                    .collect()
            } else {
                let pts = p.face_vertices(&parent);
                let h = hull::hull(&pts, p.eps);
                h.facets
                    .iter()
                    .map(|f| {
                        let mut ids: Vec<usize> =
                            f.vertices.iter().map(|&l| parent.vertex_ids[l]).collect();
                        ids.sort_unstable();
                        (ids, None)
                    })
                    .collect()
            };
            for (ids, _) in children {
                let child = match index[k - 1].get(&ids) {
                    Some(&c) => c,
                    None => {
                        let face = make_face(p, &ids, k - 1, n);
                        faces[k - 1].push(face);
                        covers[k - 1].push(Vec::new());
                        let c = faces[k - 1].len() - 1;
                        index[k - 1].insert(ids, c);
                        c
                    }
                };
                if !covers[k - 1][child].contains(&j) {
                    covers[k - 1][child].push(j);
                }
            }
            j += 1;
        }
    }

    // Reorder every level lexicographically by vertex ids and remap covers.
    let mut perms: Vec<Vec<usize>> = Vec::with_capacity(d + 1);
    for level in &faces {
        let mut order: Vec<usize> = (0..level.len()).collect();
        order.sort_by(|&a, &b| level[a].vertex_ids.cmp(&level[b].vertex_ids));
        let mut inv = vec![0; level.len()];
        for (new, &old) in order.iter().enumerate() {
            inv[old] = new;
        }
        perms.push(inv);
    }
    let mut sorted_faces: Vec<Vec<Face>> = Vec::with_capacity(d + 1);
    let mut sorted_covers: Vec<Vec<Vec<usize>>> = Vec::with_capacity(d + 1);
    for k in 0..=d {
        let mut fs: Vec<Option<Face>> = faces[k].drain(..).map(Some).collect();
        let mut cs: Vec<Option<Vec<usize>>> = covers[k].drain(..).map(Some).collect();
        let m = fs.len();
        let mut out_f: Vec<Option<Face>> = vec![None; m];
        let mut out_c: Vec<Vec<usize>> = vec![Vec::new(); m];
        for old in 0..m {
            let new = perms[k][old];
            out_f[new] = fs[old].take();
            let mut c: Vec<usize> = cs[old]
                .take()
                .unwrap()
                .into_iter()
                .map(|up| perms[k + 1][up])
                .collect();
            c.sort_unstable();
            out_c[new] = c;
        }
        sorted_faces.push(out_f.into_iter().map(Option::unwrap).collect());
        sorted_covers.push(out_c);
    }
    FaceLattice {
        faces: sorted_faces,
        covers: sorted_covers,
    }
}

fn make_face(p: &Polytope, ids: &[usize], dim: usize, n: usize) -> Face {
    match dim {
        0 => Face {
            dim,
            vertex_ids: ids.to_vec(),
            basis: DMatrix::zeros(n, 0),
            volume: 1.0,
        },
        1 => {
            let dir = &p.vertices[ids[1]] - &p.vertices[ids[0]];
            let len = dir.norm();
            Face {
                dim,
                vertex_ids: ids.to_vec(),
                basis: DMatrix::from_columns(&[dir / len]),
                volume: len,
            }
        }
        _ => {
            let pts: Vec<Vector> = ids.iter().map(|&k| p.vertices[k].clone()).collect();
            let h = hull::hull(&pts, p.eps);
            Face {
                dim,
                vertex_ids: ids.to_vec(),
                basis: h.frame.basis.clone(),
                volume: h.volume,
            }
        }
    }
}

/// JSON form of a polytope: either `{"n", "vertices"}` or a zonotope
/// `{"n", "generators", "center"?}`. Without a center the zonotope is
/// `sum_j [0, g_j]`; with one it is that body moved to be symmetric about `center`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum PolytopeJson {
    Vertices {
        n: usize,
        vertices: Vec<Vec<f64>>,
    },
    Zonotope {
        n: usize,
        generators: Vec<Vec<f64>>,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
}

impl PolytopeJson {
    pub fn into_polytope(self) -> Result<Polytope> {
        match self {
            PolytopeJson::Vertices { n, vertices } => {
                if let Some(v) = vertices.iter().find(|v| v.len() != n) {
                    return Err(Error::DimensionMismatch { expected: n, got: v.len() });
                }
                Polytope::from_vertex_lists(&vertices)
            }
            PolytopeJson::Zonotope { n, generators, center } => {
                let gens: Vec<Vector> = generators
                    .iter()
                    .map(|g| {
                        if g.len() != n {
                            Err(Error::DimensionMismatch { expected: n, got: g.len() })
                        } else {
                            Ok(Vector::from_column_slice(g))
                        }
                    })
                    .collect::<Result<_>>()?;
                let z = crate::shapes::zonotope(n, &gens)?;
                match center {
                    Some(c) => {
                        let half: Vector = gens.iter().fold(Vector::zeros(n), |acc, g| acc + g) / 2.0;
                        Ok(z.translated(&(Vector::from_column_slice(&c) - half)))
                    }
                    None => Ok(z),
                }
            }
        }
    }
}

impl From<&Polytope> for PolytopeJson {
    fn from(p: &Polytope) -> Self {
        PolytopeJson::Vertices {
            n: p.n,
            vertices: p.vertices.iter().map(|v| v.iter().copied().collect()).collect(),
        }
    }
}

impl Serialize for Polytope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolytopeJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polytope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        PolytopeJson::deserialize(d)?
            .into_polytope()
            .map_err(serde::de::Error::custom)
    }
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.vertices == other.vertices
    }
}
