//! Radon and cosine transforms on Grassmannians, by sampling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{mean_estimate, Estimate, TwoRouteCheck};
use crate::rng::RandomStream;
use crate::subspace::{sample_incident, sample_uniform, Subspace, SubspaceJson};

/// A function on `G_i(R^n)`.
pub struct GrassFunction<'a> {
    pub n: usize,
    pub degree: usize,
    f: Box<dyn Fn(&Subspace) -> f64 + 'a>,
}

impl<'a> GrassFunction<'a> {
    pub fn new(n: usize, degree: usize, f: impl Fn(&Subspace) -> f64 + 'a) -> Self {
        GrassFunction { n, degree, f: Box::new(f) }
    }

    pub fn constant(n: usize, degree: usize, c: f64) -> Self {
        GrassFunction::new(n, degree, move |_| c)
    }

    pub fn eval(&self, e: &Subspace) -> f64 {
        (self.f)(e)
    }

    /// `E -> f(E^perp)`, a function on `G_{n-i}`.
    pub fn compose_perp(&'a self) -> GrassFunction<'a> {
        GrassFunction::new(self.n, self.n - self.degree, move |e: &Subspace| self.eval(&e.perp()))
    }
}

/// A finite signed measure `sum_k w_k delta_{E_k}` on `G_i(R^n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicGrassMeasure {
    pub n: usize,
    pub dim: usize,
    pub atoms: Vec<(Subspace, f64)>,
}

impl AtomicGrassMeasure {
    pub fn new(n: usize, dim: usize, atoms: Vec<(Subspace, f64)>) -> Result<Self> {
        for (e, _) in &atoms {
            if e.ambient_dim() != n {
                return Err(Error::DimensionMismatch { expected: n, got: e.ambient_dim() });
            }
            if e.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: e.dim() });
            }
        }
        Ok(AtomicGrassMeasure { n, dim, atoms })
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        AtomicGrassMeasure {
            n: self.n,
            dim: self.dim,
            atoms: self.atoms.iter().map(|(e, w)| (e.clone(), w * s)).collect(),
        }
    }

    pub fn integrate(&self, f: &dyn Fn(&Subspace) -> f64) -> f64 {
        self.atoms.iter().map(|(e, w)| w * f(e)).sum()
    }
}

#[derive(Serialize, Deserialize)]
struct AtomJson {
    frame: Vec<Vec<f64>>,
    w: f64,
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    n: usize,
    dim: usize,
    atoms: Vec<AtomJson>,
}

impl Serialize for AtomicGrassMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureJson {
            n: self.n,
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|(e, w)| AtomJson {
                    frame: SubspaceJson::from(e).frame,
                    w: *w,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AtomicGrassMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = MeasureJson::deserialize(d)?;
        let atoms = m
            .atoms
            .into_iter()
            .map(|a| {
                let e = Subspace::try_from(SubspaceJson {
                    n: m.n,
                    dim: m.dim,
                    frame: a.frame,
                })?;
                Ok((e, a.w))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        AtomicGrassMeasure::new(m.n, m.dim, atoms).map_err(serde::de::Error::custom)
    }
}

/// `(R_{ji} f)(F)`: the mean of `f` over `G_i^F`, `i = f.degree`, `j = dim F`.
pub fn radon(f: &GrassFunction, big_f: &Subspace, samples: usize, rng: &mut RandomStream) -> Result<Estimate> {
    if big_f.ambient_dim() != f.n {
        return Err(Error::DimensionMismatch { expected: f.n, got: big_f.ambient_dim() });
    }
    if f.degree == big_f.dim() {
        return Ok(Estimate::exact(f.eval(big_f)));
    }
    if f.degree == 0 || f.degree >= f.n {
        return Err(Error::BadDimension(format!("function degree {} in R^{}", f.degree, f.n)));
    }
    let mut draws = Vec::with_capacity(samples);
    for _ in 0..samples {
        draws.push(f.eval(&sample_incident(big_f, f.degree, rng)?));
    }
    Ok(mean_estimate(draws.into_iter()))
}

/// The push-forward `R_{ji} mu` of an atomic measure on `G_i` to `G_j`.
pub struct RadonMeasure<'a> {
    pub mu: &'a AtomicGrassMeasure,
    pub j: usize,
}

pub fn radon_measure(mu: &AtomicGrassMeasure, j: usize) -> RadonMeasure<'_> {
    RadonMeasure { mu, j }
}

impl RadonMeasure<'_> {
    /// `int g d(R_{ji} mu) = sum_k w_k (R_{ij} g)(E_k)`.
    pub fn integrate(&self, g: &GrassFunction, samples: usize, rng: &mut RandomStream) -> Result<Estimate> {
        if g.degree != self.j {
            return Err(Error::DimensionMismatch { expected: self.j, got: g.degree });
        }
        let (mut value, mut var, mut used) = (0.0, 0.0, 0);
        for (e, w) in &self.mu.atoms {
            let r = radon(g, e, samples, rng)?;
            value += w * r.value;
            var += (w * r.stderr).powi(2);
            used += r.samples;
        }
        Ok(Estimate {
            value,
            stderr: var.sqrt(),
            samples: used,
        })
    }
}

/// `(C_i f)(E) = int cos(E,F) f(F) dF` over the invariant probability on `G_i`.
pub fn cosine_transform(f: &GrassFunction, e: &Subspace, samples: usize, rng: &mut RandomStream) -> Result<Estimate> {
    if e.dim() != f.degree || e.ambient_dim() != f.n {
        return Err(Error::DimensionMismatch { expected: f.degree, got: e.dim() });
    }
    let mut draws = Vec::with_capacity(samples);
    for _ in 0..samples {
        let g = sample_uniform(f.n, f.degree, rng)?;
        draws.push(e.cos_angle(&g)? * f.eval(&g));
    }
    Ok(mean_estimate(draws.into_iter()))
}

/// `(C_i mu)(E) = sum_k w_k cos(E, E_k)`, exact.
pub fn cosine_transform_measure(mu: &AtomicGrassMeasure, e: &Subspace) -> Result<f64> {
    let mut total = 0.0;
    for (ek, w) in &mu.atoms {
        total += w * e.cos_angle(ek)?;
    }
    Ok(total)
}

/// Two routes to `int_{G_i x G_j} f(E) g(F)` over incident pairs:
/// `E_F[(R_{ji} f)(F) g(F)]` against `E_E[f(E) (R_{ij} g)(E)]`.
pub fn check_adjoint(
    f: &GrassFunction,
    g: &GrassFunction,
    samples: usize,
    rng: &mut RandomStream,
) -> Result<TwoRouteCheck> {
    if f.n != g.n {
        return Err(Error::DimensionMismatch { expected: f.n, got: g.n });
    }
    let (n, i, j) = (f.n, f.degree, g.degree);
    let mut left_rng = rng.derive(0);
    let mut right_rng = rng.derive(1);
    let mut lhs = Vec::with_capacity(samples);
    let mut rhs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let big_f = sample_uniform(n, j, &mut left_rng)?;
        let e = sample_incident(&big_f, i, &mut left_rng)?;
        lhs.push(f.eval(&e) * g.eval(&big_f));
        let e = sample_uniform(n, i, &mut right_rng)?;
        let big_f = sample_incident(&e, j, &mut right_rng)?;
        rhs.push(f.eval(&e) * g.eval(&big_f));
    }
    let l = mean_estimate(lhs.into_iter());
    let r = mean_estimate(rhs.into_iter());
    Ok(TwoRouteCheck::new(l.value, l.stderr, r.value, r.stderr, samples))
}

/// `(C_i f)(E)` against `(C_{n-i}(f o perp))(E^perp)`.
pub fn check_cos_perp_duality(
    f: &GrassFunction,
    e: &Subspace,
    samples: usize,
    rng: &mut RandomStream,
) -> Result<TwoRouteCheck> {
    let lhs = cosine_transform(f, e, samples, &mut rng.derive(0))?;
    let fp = f.compose_perp();
    let rhs = cosine_transform(&fp, &e.perp(), samples, &mut rng.derive(1))?;
    Ok(TwoRouteCheck::new(lhs.value, lhs.stderr, rhs.value, rhs.stderr, samples))
}

/// `(C_i f, g)` against `(f, C_i g)`, both over independent uniform pairs.
pub fn check_cosine_self_adjoint(
    f: &GrassFunction,
    g: &GrassFunction,
    samples: usize,
    rng: &mut RandomStream,
) -> Result<TwoRouteCheck> {
    let (n, i) = (f.n, f.degree);
    let route = |k: u64, swap: bool| -> Result<Estimate> {
        let mut r = rng.derive(k);
        let mut draws = Vec::with_capacity(samples);
        for _ in 0..samples {
            let a = sample_uniform(n, i, &mut r)?;
            let b = sample_uniform(n, i, &mut r)?;
            let c = a.cos_angle(&b)?;
            draws.push(if swap { c * f.eval(&a) * g.eval(&b) } else { c * f.eval(&b) * g.eval(&a) });
        }
        Ok(mean_estimate(draws.into_iter()))
    };
    let l = route(0, false)?;
    let r = route(1, true)?;
    Ok(TwoRouteCheck::new(l.value, l.stderr, r.value, r.stderr, samples))
}
