//! Volumes, mixed volumes, intrinsic volumes and area measures.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::estimate::Estimate;
use crate::polytope::{Cone, FaceId, Polytope};
use crate::rng::RandomStream;
use crate::subspace::{Subspace, Vector};

/// Volume of the unit ball in R^n.
pub fn omega(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * omega(n - 2),
    }
}

/// Surface area of the unit sphere S^{m-1} in R^m.
pub fn sphere_area(m: usize) -> f64 {
    m as f64 * omega(m)
}

pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Rising-index enumeration of exponent vectors `beta` with `|beta| = total`.
fn compositions(parts: usize, total: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(parts - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |a, j| a * j as f64)
}

/// `vol_n(sum_j lambda_j K_j)` for nonnegative `lambda`.
pub fn minkowski_combination_volume(bodies: &[&Polytope], lambda: &[f64]) -> Result<f64> {
    let mut acc = bodies[0].scaled(lambda[0]);
    for (b, &l) in bodies.iter().zip(lambda).skip(1) {
        acc = acc.minkowski_sum(&b.scaled(l))?;
    }
    Ok(acc.volume())
}

/// The homogeneous polynomial `lambda -> vol_n(sum_j lambda_j K_j)`,
/// recovered from volumes on the grid `{1..n}^m`.
#[derive(Clone, Debug)]
pub struct VolumePolynomial {
    pub exponents: Vec<Vec<usize>>,
    pub coefficients: Vec<f64>,
    /// Relative least-squares residual of the interpolation.
    pub residual: f64,
    /// Condition number of the column-scaled Vandermonde matrix.
    pub condition: f64,
}

impl VolumePolynomial {
    pub fn eval(&self, lambda: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(&self.coefficients)
            .map(|(beta, c)| c * beta.iter().zip(lambda).map(|(&b, &l)| l.powi(b as i32)).product::<f64>())
            .sum()
    }

    /// The mixed volume `V(K_1[beta_1], ..., K_m[beta_m])`.
    pub fn mixed(&self, beta: &[usize]) -> f64 {
        let n: usize = beta.iter().sum();
        let k = self.exponents.iter().position(|e| e == beta).expect("exponent present");
        let multinomial = factorial(n) / beta.iter().map(|&b| factorial(b)).product::<f64>();
        self.coefficients[k] / multinomial
    }
}

pub fn volume_polynomial(bodies: &[&Polytope]) -> Result<VolumePolynomial> {
    let m = bodies.len();
    if m == 0 {
        return Err(Error::EmptyInput);
    }
    let n = bodies[0].ambient_dim();
    if let Some(b) = bodies.iter().find(|b| b.ambient_dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: b.ambient_dim() });
    }
    let exponents = compositions(m, n);
    let mut grid: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..m {
        grid = grid
            .into_iter()
            .flat_map(|g| {
                (1..=n).map(move |v| {
                    let mut h = g.clone();
                    h.push(v as f64);
                    h
                })
            })
            .collect();
    }
    let rows = grid.len();
    let cols = exponents.len();
    let mut a = DMatrix::zeros(rows, cols);
    let mut b = DVector::zeros(rows);
    for (r, lambda) in grid.iter().enumerate() {
        b[r] = minkowski_combination_volume(bodies, lambda)?;
        for (c, beta) in exponents.iter().enumerate() {
            a[(r, c)] = beta.iter().zip(lambda).map(|(&e, &l)| l.powi(e as i32)).product();
        }
    }
    let scales: Vec<f64> = (0..cols).map(|c| a.column(c).norm()).collect();
    for (c, s) in scales.iter().enumerate() {
        a.column_mut(c).scale_mut(1.0 / s);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin: f64 = svd.singular_values.min();
    let condition = smax / smin.max(1e-300);
    let y = svd
        .solve(&b, 1e-15 * smax)
        .map_err(|_| Error::IllConditioned { residual: f64::INFINITY, condition })?;
    let fit = &a * &y;
    let residual = (fit - &b).norm() / b.norm().max(1e-300);
    let coefficients: Vec<f64> = y.iter().zip(&scales).map(|(v, s)| v / s).collect();
    let poly = VolumePolynomial {
        exponents,
        coefficients,
        residual,
        condition,
    };
    if residual > 1e-6 {
        return Err(Error::IllConditioned { residual, condition });
    }
    Ok(poly)
}

/// Mixed volume `V(K_1[m_1], ..., K_r[m_r])` with `sum m_j = n`.
pub fn mixed_volume_grouped(groups: &[(&Polytope, usize)]) -> Result<f64> {
    let groups: Vec<(&Polytope, usize)> = groups.iter().copied().filter(|g| g.1 > 0).collect();
    let Some(first) = groups.first() else {
        return Err(Error::EmptyInput);
    };
    let n = first.0.ambient_dim();
    if let Some(g) = groups.iter().find(|g| g.0.ambient_dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: g.0.ambient_dim() });
    }
    let total: usize = groups.iter().map(|g| g.1).sum();
    if total != n {
        return Err(Error::BadDimension(format!("mixed volume in R^{n} needs {n} bodies, got {total}")));
    }
    if groups.len() == 1 {
        return Ok(first.0.volume());
    }
    let bodies: Vec<&Polytope> = groups.iter().map(|g| g.0).collect();
    let beta: Vec<usize> = groups.iter().map(|g| g.1).collect();
    Ok(volume_polynomial(&bodies)?.mixed(&beta))
}

/// Mixed volume `V(K_1, ..., K_n)`; repeated bodies are detected and grouped.
pub fn mixed_volume(bodies: &[Polytope]) -> Result<f64> {
    let mut groups: Vec<(&Polytope, usize)> = Vec::new();
    for b in bodies {
        match groups.iter_mut().find(|g| g.0.same_as(b)) {
            Some(g) => g.1 += 1,
            None => groups.push((b, 1)),
        }
    }
    mixed_volume_grouped(&groups)
}

pub fn volume(p: &Polytope) -> f64 {
    p.volume()
}

/// Intrinsic volume `V_i(P) = sum_{F in F_i(P)} gamma(F,P) vol_i(F)`.
pub fn intrinsic_volume(p: &Polytope, i: usize) -> f64 {
    let d = p.dim();
    if i == 0 {
        return 1.0;
    }
    if i > d {
        return 0.0;
    }
    if i == d {
        return p.relative_volume();
    }
    let angles = p.angles_of_dim(i);
    p.face_lattice()
        .faces(i)
        .iter()
        .zip(angles)
        .map(|(f, g)| g.value * f.volume)
        .sum()
}

/// `vol_i(P|E)` computed directly from the projected hull.
pub fn projection_volume(p: &Polytope, e: &Subspace) -> Result<f64> {
    let q = p.project(e)?;
    Ok(if q.dim() == e.dim() { q.relative_volume() } else { 0.0 })
}

/// The unit cube spanned by an orthonormal frame of `e`, centered at the origin.
pub fn frame_cube(e: &Subspace) -> Polytope {
    let n = e.ambient_dim();
    let k = e.dim();
    let frame = e.frame();
    let pts: Vec<Vector> = (0..1usize << k)
        .map(|mask| {
            let mut v = Vector::zeros(n);
            for j in 0..k {
                let s = if mask >> j & 1 == 1 { 0.5 } else { -0.5 };
                v.axpy(s, &frame.column(j).into_owned(), 1.0);
            }
            v
        })
        .collect();
    Polytope::convex_hull(&pts).expect("frame cube")
}

/// `vol_i(P|E)` as the mixed volume `binom(n,i) V(P[i], L[n-i])` with `L` a
/// unit cube in the orthogonal complement of `E`.
pub fn projection_volume_mixed(p: &Polytope, e: &Subspace) -> Result<f64> {
    let n = p.ambient_dim();
    let i = e.dim();
    let cube = frame_cube(&e.perp());
    Ok(binom(n, i) * mixed_volume_grouped(&[(p, i), (&cube, n - i)])?)
}

/// One face's contribution to the area measure `S_i(P, .)`.
#[derive(Clone, Debug)]
pub struct FaceMeasurePiece {
    pub face: FaceId,
    /// `binom(n,i)^{-1} n/(n-i) vol_i(F)`.
    pub density: f64,
    pub region: Cone,
    /// `density * H^{n-1-i}(N(F,P) ∩ S^{n-1})`.
    pub mass: f64,
    pub mass_stderr: f64,
}

/// The pieces of `S_i(P, .)`, one per i-face (including `P` itself when
/// `dim P = i < n`).
pub fn area_measure(p: &Polytope, i: usize) -> Result<Vec<FaceMeasurePiece>> {
    let n = p.ambient_dim();
    if i >= n {
        return Err(Error::BadDimension(format!("area measure index {i} must be below {n}")));
    }
    if i > p.dim() {
        return Ok(Vec::new());
    }
    let coeff = n as f64 / ((n - i) as f64 * binom(n, i));
    let sphere = sphere_area(n - i);
    let angles = p.angles_of_dim(i);
    Ok(p
        .face_lattice()
        .faces(i)
        .iter()
        .zip(angles)
        .enumerate()
        .map(|(index, (face, gamma))| {
            let density = coeff * face.volume;
            FaceMeasurePiece {
                face: FaceId { dim: i, index },
                density,
                region: p.normal_cone(face),
                mass: density * gamma.value * sphere,
                mass_stderr: density * gamma.stderr * sphere,
            }
        })
        .collect())
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    for k in 0..order {
        let mut x = (PI * (k as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=order {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 0 { 1.0 } else { p1 };
            dp = order as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[k] = x;
        weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Integral of `f` over the arc `{cos t a + sin t b : t in [t0, t1]}`.
fn integrate_arc(f: &dyn Fn(&Vector) -> f64, a: &Vector, b: &Vector, t0: f64, t1: f64) -> f64 {
    let (nodes, weights) = gauss_legendre(16);
    let panels = ((t1 - t0) / (PI / 16.0)).ceil().max(1.0) as usize;
    let h = (t1 - t0) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = t0 + k as f64 * h;
        for (x, w) in nodes.iter().zip(&weights) {
            let t = lo + h * (x + 1.0) / 2.0;
            let u = a * t.cos() + b * t.sin();
            total += w * h / 2.0 * f(&u);
        }
    }
    total
}

/// `int f dS_i(P, .)`. Exact (quadrature) when normal-cone regions are points
/// or arcs; Monte Carlo with `samples` draws per piece otherwise.
pub fn integrate_against_area_measure(
    p: &Polytope,
    i: usize,
    f: &dyn Fn(&Vector) -> f64,
    samples: usize,
    rng: &mut RandomStream,
) -> Result<Estimate> {
    let n = p.ambient_dim();
    let pieces = area_measure(p, i)?;
    let lattice = p.face_lattice();
    let k = n - i;
    let mut value = 0.0;
    let mut var = 0.0;
    let mut used = 0;
    for piece in &pieces {
        let face = lattice.face(piece.face);
        let span = p.normal_span(face);
        let dirs: Vec<Vector> = span.column_iter().map(|c| c.into_owned()).collect();
        let contains = |x: &Vector| p.normal_cone_contains(face, x);
        match k {
            1 => {
                let u = &dirs[0];
                let mut s = 0.0;
                if contains(u) {
                    s += f(u);
                }
                let v = -u;
                if contains(&v) {
                    s += f(&v);
                }
                value += piece.density * s;
            }
            2 => {
                let (a, b) = (&dirs[0], &dirs[1]);
                let angle = |g: &Vector| b.dot(g).atan2(a.dot(g));
                let mut angles: Vec<f64> = piece.region.generators.iter().map(angle).collect();
                for l in &piece.region.lineality {
                    angles.push(angle(l));
                    angles.push(angle(l) + PI);
                }
                for t in angles.iter_mut() {
                    *t = t.rem_euclid(2.0 * PI);
                }
                angles.sort_by(f64::total_cmp);
                angles.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
                if angles.is_empty() {
                    angles.push(0.0);
                }
                let m = angles.len();
                for j in 0..m {
                    let t0 = angles[j];
                    let t1 = if j + 1 < m { angles[j + 1] } else { angles[0] + 2.0 * PI };
                    if t1 - t0 < 1e-14 {
                        continue;
                    }
                    let mid = (t0 + t1) / 2.0;
                    if contains(&(a * mid.cos() + b * mid.sin())) {
                        value += piece.density * integrate_arc(f, a, b, t0, t1);
                    }
                }
            }
            _ => {
                let frame = DMatrix::from_columns(&dirs);
                let area = sphere_area(k);
                let (mut s1, mut s2) = (0.0, 0.0);
                for _ in 0..samples {
                    let u = &frame * rng.unit_vector(k);
                    let y = if contains(&u) { f(&u) } else { 0.0 };
                    s1 += y;
                    s2 += y * y;
                }
                let mean = s1 / samples as f64;
                let v = (s2 / samples as f64 - mean * mean).max(0.0) / samples as f64;
                value += piece.density * area * mean;
                var += (piece.density * area).powi(2) * v;
                used += samples;
            }
        }
    }
    Ok(Estimate {
        value,
        stderr: var.sqrt(),
        samples: used,
    })
}
