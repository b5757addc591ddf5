//! Circumradius, inradius and successive radii.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull;
use crate::lp::{LinearProgram, Relation};
use crate::meb::min_enclosing_ball;
use crate::polytope::Polytope;
use crate::rng::RandomStream;
use crate::subspace::{random_rotation, Vector};

/// Smallest enclosing ball of a point set, computed in its affine hull.
pub fn circumradius_points(points: &[Vector]) -> (f64, Vector) {
    let eps = hull::tolerance_for(points);
    let frame = hull::affine_frame(points, eps);
    if frame.dim() == 0 {
        return (0.0, points[0].clone());
    }
    let local: Vec<Vector> = points
        .iter()
        .map(|p| Vector::from_vec(frame.to_local(p)))
        .collect();
    let ball = min_enclosing_ball(&local);
    let center = &frame.origin + &frame.basis * &ball.center;
    (ball.radius, center)
}

pub fn circumradius(p: &Polytope) -> (f64, Vector) {
    circumradius_points(p.vertices())
}

/// Largest `r` with a ball `z + r B` (in the coordinates of `a`) satisfying
/// `a_k . z <= b_k`. Returns `(r, z)`; requires `b > 0`, i.e. `z = 0` strictly feasible.
fn chebyshev(a: &[Vector], b: &[f64], d: usize) -> Result<(f64, Vector)> {
    let w: Vec<f64> = a.iter().map(|ak| ak.norm()).collect();
    chebyshev_weighted(a, &w, b, d)
}

/// Largest `r` with `a_k . z + r w_k <= b_k` for all `k`.
fn chebyshev_weighted(a: &[Vector], w: &[f64], b: &[f64], d: usize) -> Result<(f64, Vector)> {
    if d == 0 {
        return Ok((0.0, Vector::zeros(0)));
    }
    // Variables z+ (d), z- (d), r.
    let mut objective = vec![0.0; 2 * d + 1];
    objective[2 * d] = -1.0;
    let mut lp = LinearProgram::new(objective);
    for ((ak, &wk), &bk) in a.iter().zip(w).zip(b) {
        if ak.norm() < 1e-12 && wk < 1e-12 {
            continue;
        }
        let mut row: Vec<f64> = ak.iter().copied().collect();
        row.extend(ak.iter().map(|x| -x));
        row.push(wk);
        lp.add(row, Relation::Le, bk);
    }
    let sol = lp.solve()?;
    let z = Vector::from_fn(d, |k, _| sol.x[k] - sol.x[d + k]);
    Ok((sol.x[2 * d], z))
}

/// Facet inequalities `a.y <= b` of `p` in local affine coordinates around `origin`.
fn local_facets(p: &Polytope, origin: &Vector) -> Vec<(Vector, f64)> {
    let basis = p.affine_basis();
    p.facets()
        .iter()
        .map(|f| {
            let a = basis.transpose() * &f.normal;
            (a, f.offset - f.normal.dot(origin))
        })
        .collect()
}

/// Inradius inside the affine hull, via the Chebyshev-center LP.
pub fn inradius(p: &Polytope) -> Result<(f64, Vector)> {
    let d = p.dim();
    let c = p.centroid();
    if d == 0 {
        return Ok((0.0, c));
    }
    let facets = local_facets(p, &c);
    let a: Vec<Vector> = facets.iter().map(|f| f.0.clone()).collect();
    let b: Vec<f64> = facets.iter().map(|f| f.1).collect();
    let (r, z) = chebyshev(&a, &b, d)?;
    Ok((r, c + p.affine_basis() * z))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RadiiReport {
    pub i: usize,
    /// Upper bound on `R_i`.
    pub r_upper: f64,
    /// Lower bound on `r_i`.
    pub r_lower: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct RadiiOptions {
    pub samples: usize,
    /// Coordinate-descent sweeps applied to the best sample.
    pub refine_sweeps: usize,
}

impl Default for RadiiOptions {
    fn default() -> Self {
        RadiiOptions {
            samples: 10_000,
            refine_sweeps: 50,
        }
    }
}

/// The body about its centroid: ambient vertices and facet inequalities in affine-hull coordinates.
struct LocalBody {
    d: usize,
    /// Centered vertices in ambient coordinates.
    ambient: Vec<Vector>,
    facets: Vec<(Vector, f64)>,
}

impl LocalBody {
    fn new(p: &Polytope) -> Self {
        let c = p.centroid();
        LocalBody {
            d: p.dim(),
            ambient: p.vertices().iter().map(|v| v - &c).collect(),
            facets: local_facets(p, &c),
        }
    }

    /// Circumradius of the projection onto the span of the first `i` columns of `q` (n x n).
    fn projection_radius(&self, q: &DMatrix<f64>, i: usize) -> f64 {
        let w = q.columns(0, i);
        let pts: Vec<Vector> = self.ambient.iter().map(|v| w.transpose() * v).collect();
        circumradius_points(&pts).0
    }

    /// Largest inradius among sections parallel to the first `i` columns of `q`.
    fn section_radius(&self, q: &DMatrix<f64>, i: usize) -> f64 {
        let w = q.columns(0, i);
        let a: Vec<Vector> = self.facets.iter().map(|f| f.0.clone()).collect();
        let weights: Vec<f64> = self.facets.iter().map(|f| (w.transpose() * &f.0).norm()).collect();
        let b: Vec<f64> = self.facets.iter().map(|f| f.1).collect();
        chebyshev_weighted(&a, &weights, &b, self.d).map(|r| r.0).unwrap_or(0.0)
    }
}

fn givens(d: usize, a: usize, b: usize, t: f64) -> DMatrix<f64> {
    let mut g = DMatrix::identity(d, d);
    let (s, c) = t.sin_cos();
    g[(a, a)] = c;
    g[(b, b)] = c;
    g[(a, b)] = -s;
    g[(b, a)] = s;
    g
}

/// Minimize `objective(q)` over rotations by coordinate descent on Givens
/// angles in planes mixing the first `i` columns with the rest.
fn refine_frame(
    q: DMatrix<f64>,
    i: usize,
    sweeps: usize,
    step: &mut f64,
    mut objective: impl FnMut(&DMatrix<f64>) -> f64,
) -> (DMatrix<f64>, f64) {
    let d = q.nrows();
    let mut best_q = q;
    let mut best = objective(&best_q);
    for _ in 0..sweeps {
        if *step < 1e-9 {
            break;
        }
        let mut improved = false;
        for a in 0..i {
            for b in i..d {
                for sign in [1.0, -1.0] {
                    let cand = &best_q * givens(d, a, b, sign * *step);
                    let v = objective(&cand);
                    if v < best {
                        best = v;
                        best_q = cand;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            *step /= 2.0;
        }
    }
    (best_q, best)
}

/// Sampled bounds on the successive outer radius `R_i` and inner radius `r_i`.
pub fn successive_radii(p: &Polytope, i: usize, opts: RadiiOptions, rng: &RandomStream) -> Result<RadiiReport> {
    let n = p.ambient_dim();
    if i == 0 || i > n {
        return Err(Error::BadDimension(format!("radius index must satisfy 1 <= i <= {n}, got {i}")));
    }
    let body = LocalBody::new(p);
    let d = body.d;
    let report = |r_upper: f64, r_lower: f64| RadiiReport {
        i,
        r_upper,
        r_lower,
        samples: opts.samples,
        seed: rng.seed(),
    };
    if d == 0 {
        return Ok(report(0.0, 0.0));
    }
    let (big_r, _) = circumradius(p);
    let (small_r, _) = inradius(p)?;
    let upper = if i >= n { big_r } else { sampled_projection(&body, n, i, opts, rng, big_r) };
    // Sections of dimension at least dim P are measured inside aff P.
    let lower = if i >= d { small_r } else { sampled_section(&body, i, opts, rng) };
    Ok(report(upper, lower))
}

fn sampled_projection(body: &LocalBody, d: usize, i: usize, opts: RadiiOptions, rng: &RandomStream, cap: f64) -> f64 {
    let mut stream = rng.derive(0);
    let mut best = cap;
    let mut best_q: Option<DMatrix<f64>> = None;
    for _ in 0..opts.samples {
        let q = random_rotation(d, &mut stream);
        let v = body.projection_radius(&q, i);
        if v < best {
            best = v;
            best_q = Some(q);
        }
    }
    if let (Some(q), true) = (best_q, opts.refine_sweeps > 0) {
        let (_, v) = refine_frame(q, i, opts.refine_sweeps, &mut 0.2, |q| body.projection_radius(q, i));
        best = best.min(v);
    }
    best
}

fn sampled_section(body: &LocalBody, i: usize, opts: RadiiOptions, rng: &RandomStream) -> f64 {
    let mut stream = rng.derive(1);
    let mut best = 0.0;
    let mut best_q: Option<DMatrix<f64>> = None;
    for _ in 0..opts.samples {
        let q = random_rotation(body.d, &mut stream);
        let v = body.section_radius(&q, i);
        if v > best {
            best = v;
            best_q = Some(q);
        }
    }
    if let (Some(q), true) = (best_q, opts.refine_sweeps > 0) {
        let (_, v) = refine_frame(q, i, opts.refine_sweeps, &mut 0.2, |q| -body.section_radius(q, i));
        best = best.max(-v);
    }
    best
}

/// Reports for `i = 1..n` with the chains `R_1 <= ... <= R_n` and
/// `r_1 >= ... >= r_n` enforced on the bounds.
pub fn radii_chain(p: &Polytope, opts: RadiiOptions, rng: &RandomStream) -> Result<Vec<RadiiReport>> {
    let n = p.ambient_dim();
    let mut reports = (1..=n)
        .map(|i| successive_radii(p, i, opts, &rng.derive(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    for k in (0..n - 1).rev() {
        reports[k].r_upper = reports[k].r_upper.min(reports[k + 1].r_upper);
        reports[k].r_lower = reports[k].r_lower.max(reports[k + 1].r_lower);
    }
    Ok(reports)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerelmanVerdict {
    Pass,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct PerelmanCheck {
    pub i: usize,
    pub ratio: f64,
    pub bound: f64,
    pub verdict: PerelmanVerdict,
}

/// `R_{n-i+1} / r_i <= i + 1` from an upper bound on `R_{n-i+1}` and a lower bound on `r_i`.
pub fn perelman_check(n: usize, i: usize, outer: &RadiiReport, inner: &RadiiReport) -> Result<PerelmanCheck> {
    if outer.i != n + 1 - i || inner.i != i {
        return Err(Error::BadDimension(format!(
            "expected reports for indices {} and {i}, got {} and {}",
            n + 1 - i,
            outer.i,
            inner.i
        )));
    }
    let ratio = if inner.r_lower > 0.0 { outer.r_upper / inner.r_lower } else { f64::INFINITY };
    let bound = (i + 1) as f64;
    Ok(PerelmanCheck {
        i,
        ratio,
        bound,
        verdict: if ratio <= bound { PerelmanVerdict::Pass } else { PerelmanVerdict::Inconclusive },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn cube_radii() {
        let c = shapes::cube(3);
        let (r, center) = circumradius(&c);
        assert!((r - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((center - Vector::from_element(3, 0.5)).norm() < 1e-12);
        assert!((inradius(&c).unwrap().0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn octahedron_inradius() {
        assert!((inradius(&shapes::octahedron()).unwrap().0 - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn segment_radii_inside_line() {
        let s = shapes::segment(&Vector::from_vec(vec![-1.0, 0.0, 0.0]), &Vector::from_vec(vec![1.0, 0.0, 0.0]));
        assert!((circumradius(&s).0 - 1.0).abs() < 1e-12);
        assert!((inradius(&s).unwrap().0 - 1.0).abs() < 1e-12);
    }
}
