//! Declarative translation-invariant valuations and their Klain functions.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::{Polytope, PolytopeJson};
use crate::rng::RandomStream;
use crate::shapes;
use crate::subspace::{Subspace, Vector};
use crate::estimate::{mean_estimate, TwoRouteCheck};
use crate::volumes::{binom, intrinsic_volume, mixed_volume_grouped, omega};

#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    /// `coeff * V(K[i], L_1, ..., L_{n-i})`.
    Mixed { coeff: f64, bodies: Vec<Polytope> },
    /// `sum_k w_k h(K, u_k)` over an even atom list.
    HIntegral { atoms: Vec<(Vector, f64)> },
    /// `coeff * V_i(K)`.
    Intrinsic { i: usize, coeff: f64 },
    Constant { value: f64 },
}

impl Term {
    /// Degree of homogeneity; `n` is the ambient dimension.
    pub fn degree(&self, n: usize) -> usize {
        match self {
            Term::Mixed { bodies, .. } => n - bodies.len(),
            Term::HIntegral { .. } => 1,
            Term::Intrinsic { i, .. } => *i,
            Term::Constant { .. } => 0,
        }
    }

    /// Even h-integral term with atoms `±dirs[k]`, each carrying `weights[k] / 2`.
    pub fn h_integral_even(dirs: &[Vector], weights: &[f64]) -> Term {
        let atoms = dirs
            .iter()
            .zip(weights)
            .flat_map(|(u, &w)| [(u.clone(), w / 2.0), (-u, w / 2.0)])
            .collect();
        Term::HIntegral { atoms }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValuationSpec {
    pub terms: Vec<Term>,
}

fn merge_bodies<'a>(k: &'a Polytope, i: usize, bodies: &'a [Polytope]) -> Vec<(&'a Polytope, usize)> {
    let mut groups: Vec<(&Polytope, usize)> = vec![(k, i)];
    for b in bodies {
        match groups.iter_mut().find(|g| g.0.same_as(b)) {
            Some(g) => g.1 += 1,
            None => groups.push((b, 1)),
        }
    }
    groups
}

impl ValuationSpec {
    pub fn new(terms: Vec<Term>) -> Self {
        ValuationSpec { terms }
    }

    pub fn intrinsic(i: usize) -> Self {
        ValuationSpec::new(vec![Term::Intrinsic { i, coeff: 1.0 }])
    }

    pub fn with(mut self, term: Term) -> Self {
        self.terms.push(term);
        self
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &ValuationSpec, b: f64) -> ValuationSpec {
        let scale = |t: &Term, s: f64| match t {
            Term::Mixed { coeff, bodies } => Term::Mixed { coeff: coeff * s, bodies: bodies.clone() },
            Term::HIntegral { atoms } => Term::HIntegral {
                atoms: atoms.iter().map(|(u, w)| (u.clone(), w * s)).collect(),
            },
            Term::Intrinsic { i, coeff } => Term::Intrinsic { i: *i, coeff: coeff * s },
            Term::Constant { value } => Term::Constant { value: value * s },
        };
        ValuationSpec {
            terms: self
                .terms
                .iter()
                .map(|t| scale(t, a))
                .chain(other.terms.iter().map(|t| scale(t, b)))
                .collect(),
        }
    }

    /// Ambient dimension fixed by the spec's bodies or atoms, if any.
    pub fn ambient_dim(&self) -> Option<usize> {
        self.terms.iter().find_map(|t| match t {
            Term::Mixed { bodies, .. } => bodies.first().map(Polytope::ambient_dim),
            Term::HIntegral { atoms } => atoms.first().map(|a| a.0.len()),
            _ => None,
        })
    }

    pub fn degrees(&self, n: usize) -> Vec<usize> {
        let mut d: Vec<usize> = self.terms.iter().map(|t| t.degree(n)).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        for t in &self.terms {
            match t {
                Term::Mixed { bodies, .. } => {
                    if bodies.len() > n {
                        return Err(Error::InvalidSpec(format!("{} bodies in R^{n}", bodies.len())));
                    }
                    if let Some(b) = bodies.iter().find(|b| b.ambient_dim() != n) {
                        return Err(Error::DimensionMismatch { expected: n, got: b.ambient_dim() });
                    }
                }
                Term::HIntegral { atoms } => {
                    if let Some(a) = atoms.iter().find(|a| a.0.len() != n) {
                        return Err(Error::DimensionMismatch { expected: n, got: a.0.len() });
                    }
                    if !is_even(atoms) {
                        return Err(Error::InvalidSpec("h-integral atoms are not even".into()));
                    }
                }
                Term::Intrinsic { i, .. } => {
                    if *i > n {
                        return Err(Error::InvalidSpec(format!("intrinsic volume V_{i} in R^{n}")));
                    }
                }
                Term::Constant { .. } => {}
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, k: &Polytope) -> Result<f64> {
        let n = k.ambient_dim();
        self.validate(n)?;
        let mut total = 0.0;
        for t in &self.terms {
            total += match t {
                Term::Mixed { coeff, bodies } => {
                    let i = n - bodies.len();
                    coeff * mixed_volume_grouped(&merge_bodies(k, i, bodies))?
                }
                Term::HIntegral { atoms } => atoms.iter().map(|(u, w)| w * k.support(u)).sum(),
                Term::Intrinsic { i, coeff } => coeff * intrinsic_volume(k, *i),
                Term::Constant { value } => *value,
            };
        }
        Ok(total)
    }

    /// `Klain(E)`: the value on i-bodies in `E` per unit i-volume.
    pub fn klain(&self, e: &Subspace) -> Result<f64> {
        let n = e.ambient_dim();
        let i = e.dim();
        self.validate(n)?;
        let degrees = self.degrees(n);
        if degrees.iter().any(|&d| d != i) {
            return Err(Error::MixedDegrees(degrees));
        }
        let perp = e.perp();
        let mut total = 0.0;
        for t in &self.terms {
            total += match t {
                Term::Mixed { coeff, bodies } => {
                    let projected: Vec<Polytope> = bodies
                        .iter()
                        .map(|b| b.project(&perp))
                        .collect::<Result<_>>()?;
                    let mut groups: Vec<(&Polytope, usize)> = Vec::new();
                    for b in &projected {
                        match groups.iter_mut().find(|g| g.0.same_as(b)) {
                            Some(g) => g.1 += 1,
                            None => groups.push((b, 1)),
                        }
                    }
                    coeff / binom(n, i) * mixed_volume_grouped(&groups)?
                }
                Term::HIntegral { atoms } => {
                    let u0 = e.frame().column(0).into_owned();
                    0.5 * atoms.iter().map(|(u, w)| w * u.dot(&u0).abs()).sum::<f64>()
                }
                Term::Intrinsic { coeff, .. } => *coeff,
                Term::Constant { .. } => unreachable!("degree-0 terms rejected above"),
            };
        }
        Ok(total)
    }

    /// Upper bound on `sup_{K in B^n} |phi(K)|`, term by term.
    pub fn norm_upper_bound(&self, n: usize) -> Result<f64> {
        let mut total = 0.0;
        for t in &self.terms {
            total += match t {
                Term::Mixed { coeff, bodies } => {
                    // Mixed volumes are monotone; each L_j sits in a ball of its circumradius.
                    let radii: f64 = bodies
                        .iter()
                        .map(|b| crate::radii::circumradius(b).0)
                        .product();
                    coeff.abs() * omega(n) * radii
                }
                Term::HIntegral { atoms } => atoms.iter().map(|(_, w)| w.abs()).sum(),
                Term::Intrinsic { i, coeff } => coeff.abs() * binom(n, *i) * omega(n) / omega(n - i),
                Term::Constant { value } => value.abs(),
            };
        }
        Ok(total)
    }
}

fn is_even(atoms: &[(Vector, f64)]) -> bool {
    let scale = atoms.iter().map(|a| a.1.abs()).fold(0.0, f64::max).max(1e-300);
    atoms.iter().all(|(u, _)| {
        let neg = -u;
        let mirror: f64 = atoms
            .iter()
            .filter(|(v, _)| (v - &neg).norm() < 1e-9)
            .map(|a| a.1)
            .sum();
        let same: f64 = atoms.iter().filter(|(v, _)| (v - u).norm() < 1e-9).map(|a| a.1).sum();
        (mirror - same).abs() <= 1e-9 * scale
    })
}

/// Homogeneous components of a valuation at `K`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Components {
    pub values: Vec<f64>,
    pub residual: f64,
}

/// `(phi_0(K), ..., phi_n(K))` from `phi(tK)` at `t = 0..n`.
pub fn homogeneous_components(
    phi: &dyn Fn(&Polytope) -> Result<f64>,
    k: &Polytope,
) -> Result<Components> {
    let n = k.ambient_dim();
    let m = n + 1;
    let mut a = DMatrix::zeros(m, m);
    let mut b = DVector::zeros(m);
    for t in 0..m {
        b[t] = phi(&k.scaled(t as f64))?;
        for j in 0..m {
            a[(t, j)] = (t as f64).powi(j as i32);
        }
    }
    let svd = a.clone().svd(true, true);
    let condition = svd.singular_values.max() / svd.singular_values.min();
    let x = a
        .clone()
        .lu()
        .solve(&b)
        .ok_or(Error::IllConditioned { residual: f64::INFINITY, condition })?;
    let residual = (&a * &x - &b).norm();
    let scale = b.amax().max(1.0);
    if residual > 1e-8 * scale {
        return Err(Error::IllConditioned { residual, condition });
    }
    Ok(Components {
        values: x.iter().copied().collect(),
        residual,
    })
}

/// `sum_{F in F_i(P)} g(F) gamma(F,P) vol_i(F)`.
pub fn angular_evaluate(g: &dyn Fn(&Subspace) -> f64, p: &Polytope, i: usize) -> Result<f64> {
    let n = p.ambient_dim();
    if i == 0 || i >= n {
        return Err(Error::BadDimension(format!("angular evaluation needs 0 < i < {n}, got {i}")));
    }
    if i > p.dim() {
        return Ok(0.0);
    }
    let angles = p.angles_of_dim(i);
    let mut total = 0.0;
    for (face, gamma) in p.face_lattice().faces(i).iter().zip(angles) {
        total += g(&face.direction()?) * gamma.value * face.volume;
    }
    Ok(total)
}

/// `Tf(P) = (1/2) int f(u^perp) dS_{n-1}(P, u)`.
pub fn inverse_klain_top(f: &dyn Fn(&Subspace) -> f64, p: &Polytope) -> Result<f64> {
    let n = p.ambient_dim();
    if n < 2 {
        return Err(Error::BadDimension("inverse Klain map needs n >= 2".into()));
    }
    let d = p.dim();
    if d < n - 1 {
        return Ok(0.0);
    }
    let faces = p.face_lattice().faces(n - 1);
    // A facet contributes one atom; an (n-1)-dimensional P contributes two.
    let weight = if d == n { 0.5 } else { 1.0 };
    let mut total = 0.0;
    for face in faces {
        total += weight * f(&face.direction()?) * face.volume;
    }
    Ok(total)
}

/// `V(K|E, B^i[i-1])` in `E` against `omega_i` times the mean of `h_K` over
/// lines in `E`.
pub fn mean_width_check(
    k: &Polytope,
    e: &Subspace,
    samples: usize,
    rng: &mut RandomStream,
) -> Result<TwoRouteCheck> {
    let tol = k.tolerance().max(1e-9);
    if !k.is_centrally_symmetric() || k.centroid().norm() > tol * 10.0 {
        return Err(Error::NotCentrallySymmetric);
    }
    let i = e.dim();
    let proj = k.project(e)?;
    let lhs = if i == 1 {
        proj.volume()
    } else {
        let ball = shapes::ball_approximant(i)?;
        mixed_volume_grouped(&[(&proj, 1), (&ball, i - 1)])?
    };
    let frame = e.frame();
    let mean = mean_estimate((0..samples).map(|_| k.support(&(frame * rng.unit_vector(i)))));
    Ok(TwoRouteCheck::new(lhs, 0.0, omega(i) * mean.value, omega(i) * mean.stderr, samples))
}

/// `Klain` of the spec as a closure, for use with transforms and angular evaluation.
pub fn klain_function(spec: &ValuationSpec) -> impl Fn(&Subspace) -> f64 + '_ {
    move |e| spec.klain(e).expect("klain of a validated spec")
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BodyRef {
    Inline(PolytopeJson),
    Path(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TermJson {
    Mixed {
        #[serde(default = "one")]
        coeff: f64,
        bodies: Vec<BodyRef>,
    },
    HIntegral {
        atoms: Vec<(Vec<f64>, f64)>,
    },
    Intrinsic {
        i: usize,
        #[serde(default = "one")]
        coeff: f64,
    },
    Const {
        value: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValuationSpecJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    pub terms: Vec<TermJson>,
}

impl ValuationSpecJson {
    /// Resolve into a spec; body paths are read relative to `base`.
    pub fn resolve(self, base: Option<&Path>) -> Result<ValuationSpec> {
        let load = |r: BodyRef| -> Result<Polytope> {
            match r {
                BodyRef::Inline(p) => p.into_polytope(),
                BodyRef::Path(s) => {
                    let path = match base {
                        Some(b) => b.join(&s),
                        None => Path::new(&s).to_path_buf(),
                    };
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?;
                    let pj: PolytopeJson = serde_json::from_str(&text)
                        .map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?;
                    pj.into_polytope()
                }
            }
        };
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in self.terms {
            terms.push(match t {
                TermJson::Mixed { coeff, bodies } => Term::Mixed {
                    coeff,
                    bodies: bodies.into_iter().map(load).collect::<Result<_>>()?,
                },
                TermJson::HIntegral { atoms } => Term::HIntegral {
                    atoms: atoms
                        .into_iter()
                        .map(|(u, w)| (Vector::from_vec(u), w))
                        .collect(),
                },
                TermJson::Intrinsic { i, coeff } => Term::Intrinsic { i, coeff },
                TermJson::Const { value } => Term::Constant { value },
            });
        }
        let spec = ValuationSpec { terms };
        if let Some(n) = self.n.or(spec.ambient_dim()) {
            spec.validate(n)?;
            if let Some(deg) = self.degree {
                let d = spec.degrees(n);
                if d.iter().any(|&x| x != deg) {
                    return Err(Error::MixedDegrees(d));
                }
            }
        }
        Ok(spec)
    }
}

impl From<&ValuationSpec> for ValuationSpecJson {
    fn from(spec: &ValuationSpec) -> Self {
        let n = spec.ambient_dim();
        let degree = n.and_then(|n| match spec.degrees(n).as_slice() {
            [d] => Some(*d),
            _ => None,
        });
        ValuationSpecJson {
            n,
            degree,
            terms: spec
                .terms
                .iter()
                .map(|t| match t {
                    Term::Mixed { coeff, bodies } => TermJson::Mixed {
                        coeff: *coeff,
                        bodies: bodies.iter().map(|b| BodyRef::Inline(PolytopeJson::from(b))).collect(),
                    },
                    Term::HIntegral { atoms } => TermJson::HIntegral {
                        atoms: atoms.iter().map(|(u, w)| (u.iter().copied().collect(), *w)).collect(),
                    },
                    Term::Intrinsic { i, coeff } => TermJson::Intrinsic { i: *i, coeff: *coeff },
                    Term::Constant { value } => TermJson::Const { value: *value },
                })
                .collect(),
        }
    }
}

impl Serialize for ValuationSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ValuationSpecJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ValuationSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        ValuationSpecJson::deserialize(d)?
            .resolve(None)
            .map_err(serde::de::Error::custom)
    }
}
