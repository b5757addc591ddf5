//! Membership of centrally symmetric polytopes in the classes `G(i)`, and
//! linear-programming witnesses against zonoid membership.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::polytope::{FaceId, Polytope};
use crate::rng::RandomStream;
use crate::shapes;
use crate::subspace::{sample_uniform, Subspace, Vector};
use crate::transforms::{cosine_transform_measure, AtomicGrassMeasure};
use crate::valuation::{Term, ValuationSpec};
use crate::volumes::{intrinsic_volume, projection_volume};

/// Seed used for the residual report attached to certificates.
const CERTIFICATE_SEED: u64 = 0x6365_7274;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Member,
    NonMember,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct IntegralRepReport {
    pub trials: usize,
    /// `max_E |vol_i(P|E) - sum_k w_k cos(E, E_k)|`.
    pub max_residual: f64,
    /// `max |phi(P) - sum_k w_k Klain_phi(E_k)|` over random mixed-volume valuations.
    pub klain_residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MembershipCertificate {
    pub i: usize,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub violating_faces: Option<Vec<FaceId>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub measure: Option<AtomicGrassMeasure>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residuals: Option<IntegralRepReport>,
}

fn check_index(p: &Polytope, i: usize) -> Result<()> {
    let n = p.ambient_dim();
    if i == 0 || i >= n {
        return Err(Error::BadDimension(format!("membership index must satisfy 0 < i < {n}, got {i}")));
    }
    Ok(())
}

/// Decide whether a centrally symmetric polytope lies in `G(i)` (equivalently `K(i)`).
pub fn decide_g(p: &Polytope, i: usize) -> Result<MembershipCertificate> {
    check_index(p, i)?;
    if !p.is_centrally_symmetric() {
        return Err(Error::NotCentrallySymmetric);
    }
    let n = p.ambient_dim();
    if i + 1 < n {
        let (ok, bad) = p.has_centrally_symmetric_k_faces(i + 1);
        if !ok {
            return Ok(MembershipCertificate {
                i,
                verdict: Verdict::NonMember,
                violating_faces: Some(bad.into_iter().map(|index| FaceId { dim: i + 1, index }).collect()),
                measure: None,
                residuals: None,
            });
        }
    }
    let measure = representing_measure(p, i)?;
    let mut rng = RandomStream::new(CERTIFICATE_SEED);
    let residuals = verify_integral_rep(p, i, &measure, 100, 0, &mut rng)?;
    Ok(MembershipCertificate {
        i,
        verdict: Verdict::Member,
        violating_faces: None,
        measure: Some(measure),
        residuals: Some(residuals),
    })
}

/// The atomic measure `sum_j alpha_j delta_{F_j}` over parallel classes of i-faces.
pub fn representing_measure(p: &Polytope, i: usize) -> Result<AtomicGrassMeasure> {
    check_index(p, i)?;
    let n = p.ambient_dim();
    if p.dim() < n {
        return Err(Error::BadDimension("representing measure needs a full-dimensional polytope".into()));
    }
    let lattice = p.face_lattice();
    let faces = lattice.faces(i);
    let angles = p.angles_of_dim(i);
    // (direction, volume, angle sum, angle variance)
    let mut classes: Vec<(Subspace, f64, f64, f64)> = Vec::new();
    for (face, gamma) in faces.iter().zip(angles) {
        let dir = face.direction()?;
        match classes.iter_mut().find(|c| c.0.projector_distance(&dir) < 1e-9) {
            Some(c) => {
                if (c.1 - face.volume).abs() > 1e-9 * c.1.max(1.0) {
                    return Err(Error::ClassVolumeMismatch { dim: i, a: c.1, b: face.volume });
                }
                c.2 += gamma.value;
                c.3 += gamma.stderr * gamma.stderr;
            }
            None => classes.push((dir, face.volume, gamma.value, gamma.stderr * gamma.stderr)),
        }
    }
    for c in &classes {
        if (c.2 - 1.0).abs() > 3.0 * c.3.sqrt() + 1e-9 {
            return Err(Error::TilingFailure { covered: c.2 });
        }
    }
    AtomicGrassMeasure::new(n, i, classes.into_iter().map(|c| (c.0, c.1)).collect())
}

fn random_simplex(n: usize, rng: &mut RandomStream) -> Polytope {
    let pts: Vec<Vector> = (0..=n).map(|_| rng.ball_point(n)).collect();
    Polytope::convex_hull(&pts).expect("random simplex")
}

/// Residuals of `vol_i(P|E) = int cos(E, F) dmu(F)` at `trials` random `E`,
/// and of `phi(P) = int Klain_phi dmu` for `specs` random mixed-volume valuations.
pub fn verify_integral_rep(
    p: &Polytope,
    i: usize,
    mu: &AtomicGrassMeasure,
    trials: usize,
    specs: usize,
    rng: &mut RandomStream,
) -> Result<IntegralRepReport> {
    let n = p.ambient_dim();
    if mu.n != n || (mu.dim != i && !mu.atoms.is_empty()) {
        return Err(Error::DimensionMismatch { expected: i, got: mu.dim });
    }
    let mut max_residual: f64 = 0.0;
    for _ in 0..trials {
        let e = sample_uniform(n, i, rng)?;
        let lhs = projection_volume(p, &e)?;
        let rhs = cosine_transform_measure(mu, &e)?;
        max_residual = max_residual.max((lhs - rhs).abs());
    }
    let klain_residual = if specs == 0 {
        None
    } else {
        let mut worst: f64 = 0.0;
        for _ in 0..specs {
            let bodies: Vec<Polytope> = (0..n - i).map(|_| random_simplex(n, rng)).collect();
            let phi = ValuationSpec::new(vec![Term::Mixed { coeff: 1.0, bodies }]);
            let lhs = phi.evaluate(p)?;
            let mut rhs = 0.0;
            for (e, w) in &mu.atoms {
                rhs += w * phi.klain(e)?;
            }
            worst = worst.max((lhs - rhs).abs());
        }
        Some(worst)
    };
    Ok(IntegralRepReport {
        trials,
        max_residual,
        klain_residual,
    })
}

// ---------------------------------------------------------------------------
// Zonoid witnesses

/// `m` directions, one from each antipodal pair of a near-uniform spherical grid.
pub fn hemisphere_grid(n: usize, m: usize) -> Vec<Vector> {
    match n {
        2 => (0..m)
            .map(|k| {
                let t = PI * (k as f64 + 0.5) / m as f64;
                Vector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect(),
        3 => shapes::fibonacci_hemisphere(m),
        _ => {
            let mut rng = RandomStream::new(0x6772_6964 ^ n as u64);
            (0..m)
                .map(|_| {
                    let u = rng.unit_vector(n);
                    let lead = u.iter().find(|x| x.abs() > 1e-12).copied().unwrap_or(1.0);
                    if lead < 0.0 { -u } else { u }
                })
                .collect()
        }
    }
}

fn edge_directions(k: &Polytope) -> Vec<Vector> {
    let mut dirs: Vec<Vector> = Vec::new();
    for e in k.face_lattice().faces(1) {
        let d = &k.vertices()[e.vertex_ids[1]] - &k.vertices()[e.vertex_ids[0]];
        let d = d.normalize();
        if !dirs.iter().any(|v| (v - &d).norm() < 1e-9 || (v + &d).norm() < 1e-9) {
            dirs.push(d);
        }
    }
    dirs
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ZonoidWitness {
    pub n: usize,
    /// Even atoms `(v, rho)`; each `v` appears together with `-v`.
    pub atoms: Vec<(Vec<f64>, f64)>,
    /// Minimum of `u -> (1/2) sum rho |u.v|` over the constraint directions.
    pub min_cosine: f64,
    /// `sum rho h_K(v)`.
    pub objective: f64,
    pub grid_size: usize,
    pub lp_iterations: usize,
}

impl ZonoidWitness {
    pub fn spec(&self) -> ValuationSpec {
        ValuationSpec::new(vec![Term::HIntegral {
            atoms: self
                .atoms
                .iter()
                .map(|(u, w)| (Vector::from_column_slice(u), *w))
                .collect(),
        }])
    }

    /// `(1/2) sum rho |u.v|`, the Klain function at `span u`.
    pub fn klain_at(&self, u: &Vector) -> f64 {
        0.5 * self
            .atoms
            .iter()
            .map(|(v, w)| w * Vector::from_column_slice(v).dot(u).abs())
            .sum::<f64>()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum WitnessOutcome {
    Found(ZonoidWitness),
    NoneFound { objective: f64, grid_size: usize },
}

/// Search for an even signed measure `rho` on the sphere with nonnegative
/// cosine transform on the grid and `int h_K drho < 0`.
pub fn zonoid_witness(k: &Polytope, grid_size: usize) -> Result<WitnessOutcome> {
    let n = k.ambient_dim();
    if n < 3 {
        return Err(Error::BadDimension("witness search needs n >= 3".into()));
    }
    if !k.is_centrally_symmetric() {
        return Err(Error::NotCentrallySymmetric);
    }
    let m = (grid_size / 2).max(1);
    let dirs = hemisphere_grid(n, m);
    let mut tests = dirs.clone();
    tests.extend(edge_directions(k));
    let widths: Vec<f64> = dirs.iter().map(|v| k.support(v) + k.support(&-v)).collect();
    // Variables p_1..p_m, q_1..q_m with rho_k = p_k - q_k on the pair ±v_k.
    let mut objective = widths.clone();
    objective.extend(widths.iter().map(|w| -w));
    let mut lp = LinearProgram::new(objective);
    for u in &tests {
        let c: Vec<f64> = dirs.iter().map(|v| u.dot(v).abs()).collect();
        let mut row = c.clone();
        row.extend(c.iter().map(|x| -x));
        lp.add(row, Relation::Ge, 0.0);
    }
    lp.add(vec![2.0; 2 * m], Relation::Eq, 1.0);
    let sol = lp.solve()?;
    if sol.objective >= -1e-6 {
        return Ok(WitnessOutcome::NoneFound {
            objective: sol.objective,
            grid_size,
        });
    }
    let mut atoms = Vec::new();
    for (j, v) in dirs.iter().enumerate() {
        let rho = sol.x[j] - sol.x[m + j];
        if rho.abs() > 1e-14 {
            atoms.push((v.iter().copied().collect::<Vec<f64>>(), rho));
            atoms.push((v.iter().map(|x| -x).collect(), rho));
        }
    }
    let mut witness = ZonoidWitness {
        n,
        atoms,
        min_cosine: 0.0,
        objective: sol.objective,
        grid_size,
        lp_iterations: sol.iterations,
    };
    witness.min_cosine = tests.iter().map(|u| witness.klain_at(u)).fold(f64::INFINITY, f64::min);
    Ok(WitnessOutcome::Found(witness))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ShiftedWitness {
    pub spec: ValuationSpec,
    pub t: f64,
    pub audit_size: usize,
    pub audit_min_before: f64,
    pub audit_min_after: f64,
    pub value_before: f64,
    pub value_after: f64,
}

/// Audit directions: a grid ten times finer than the witness grid.
pub fn audit_grid(n: usize, grid_size: usize) -> Vec<Vector> {
    hemisphere_grid(n, 10 * grid_size / 2)
}

/// `phi + t V_1` with `t` large enough to make the Klain function positive on
/// the audit grid while keeping `phi(K) + t V_1(K) < 0`.
pub fn shift_to_strict(witness: &ZonoidWitness, k: &Polytope) -> Result<ShiftedWitness> {
    let n = witness.n;
    let phi = witness.spec();
    let value = phi.evaluate(k)?;
    let audit = audit_grid(n, witness.grid_size);
    let audit_min = audit.iter().map(|u| witness.klain_at(u)).fold(f64::INFINITY, f64::min);
    let t = if audit_min > 0.0 {
        0.0
    } else {
        let negativity = -audit_min;
        let admissible = value.abs() / (2.0 * intrinsic_volume(k, 1));
        if value >= 0.0 || admissible <= negativity {
            return Err(Error::ShiftImpossible { negativity, admissible });
        }
        admissible
    };
    let spec = if t > 0.0 {
        phi.with(Term::Intrinsic { i: 1, coeff: t })
    } else {
        phi
    };
    Ok(ShiftedWitness {
        value_after: spec.evaluate(k)?,
        spec,
        t,
        audit_size: audit.len(),
        audit_min_before: audit_min,
        audit_min_after: audit_min + t,
        value_before: value,
    })
}
