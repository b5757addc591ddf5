//! A positive valuation whose homogeneous components are not all positive.
//!
//! The construction starts from an even degree-1 valuation `phi` that is
//! negative on the cross-polytope but has a positive Klain function, and adds
//! a constant and a multiple of `V_2` large enough to make the sum positive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::membership::{audit_grid, shift_to_strict, zonoid_witness, ShiftedWitness, WitnessOutcome};
use crate::polytope::Polytope;
use crate::rng::RandomStream;
use crate::shapes;
use crate::subspace::{Subspace, Vector};
use crate::valuation::{homogeneous_components, Term, ValuationSpec};
use crate::volumes::omega;

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct PositivityParams {
    /// Random bodies in the unit ball for the sampled norm.
    pub norm_samples: usize,
    /// Unit segments for the minimum on segments.
    pub segment_samples: usize,
    /// Perturbed pairs per level of the continuity sweep.
    pub pair_samples: usize,
    /// Directions of the Klain audit grid.
    pub audit_size: usize,
}

impl Default for PositivityParams {
    fn default() -> Self {
        PositivityParams {
            norm_samples: 10_000,
            segment_samples: 10_000,
            pair_samples: 10_000,
            audit_size: 1200,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PositivityConstants {
    pub c0: f64,
    pub c1: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub norm_upper: f64,
    pub norm_sampled: f64,
    /// `epsilon / (6 L)` for a term-wise Lipschitz constant `L`, when available.
    pub eta_lipschitz: Option<f64>,
    pub klain_min: f64,
    /// Levels tried in the continuity sweep, as `(eta, max |phi(K) - phi(L)|)`.
    pub sweep: Vec<(f64, f64)>,
}

/// A random polytope in `radius * B^n`.
fn random_body(n: usize, radius: f64, rng: &mut RandomStream) -> Polytope {
    let count = n + 1 + rng.index(2 * n + 2);
    let pts: Vec<Vector> = (0..count).map(|_| rng.ball_point(n) * radius).collect();
    Polytope::convex_hull(&pts).expect("random body")
}

fn lipschitz_bound(spec: &ValuationSpec, n: usize) -> Option<f64> {
    let mut total = 0.0;
    for t in &spec.terms {
        total += match t {
            Term::HIntegral { atoms } => atoms.iter().map(|a| a.1.abs()).sum(),
            // V_1 is a multiple of the mean width; its Lipschitz constant is V_1(B^n).
            Term::Intrinsic { i: 1, coeff } => coeff.abs() * n as f64 * omega(n) / omega(n - 1),
            Term::Constant { .. } => 0.0,
            _ => return None,
        };
    }
    Some(total)
}

/// Constants `c_0 = |phi|` and `c_1 = |phi| / (pi eta^2)` for a degree-1 `phi`
/// with positive Klain function, with `|phi|` replaced by a term-wise upper bound
/// and `eta` by a sampled continuity modulus.
pub fn positivity_constants(
    phi: &ValuationSpec,
    n: usize,
    params: PositivityParams,
    rng: &RandomStream,
) -> Result<PositivityConstants> {
    phi.validate(n)?;
    let grid = crate::membership::hemisphere_grid(n, params.audit_size);
    let mut klain_min = f64::INFINITY;
    for u in &grid {
        klain_min = klain_min.min(phi.klain(&Subspace::line(u)?)?);
    }
    if !(klain_min > 0.0) {
        return Err(Error::KlainNotPositive { min: klain_min });
    }
    let norm_upper = phi.norm_upper_bound(n)?;
    let mut stream = rng.derive(0);
    let mut norm_sampled: f64 = 0.0;
    for _ in 0..params.norm_samples {
        let k = random_body(n, 1.0, &mut stream);
        norm_sampled = norm_sampled.max(phi.evaluate(&k)?.abs());
    }
    let mut stream = rng.derive(1);
    let mut epsilon = f64::INFINITY;
    let origin = Vector::zeros(n);
    for _ in 0..params.segment_samples {
        let u = stream.unit_vector(n);
        let seg = shapes::segment(&origin, &u);
        epsilon = epsilon.min(phi.evaluate(&seg)?);
    }
    if !(epsilon > 0.0) {
        return Err(Error::EpsilonZero { min: epsilon });
    }
    let mut sweep = Vec::new();
    let mut eta = None;
    for k in 4..40 {
        let level = 2f64.powi(-k);
        let mut stream = rng.derive(100 + k as u64);
        let mut worst: f64 = 0.0;
        for _ in 0..params.pair_samples {
            let body = random_body(n, (1.0 - 6.0 * level).max(0.5), &mut stream);
            let moved: Vec<Vector> = body
                .vertices()
                .iter()
                .map(|v| v + stream.ball_point(n) * (6.0 * level))
                .collect();
            let other = Polytope::convex_hull(&moved)?;
            worst = worst.max((phi.evaluate(&body)? - phi.evaluate(&other)?).abs());
        }
        sweep.push((level, worst));
        if worst < epsilon {
            eta = Some(level);
            break;
        }
    }
    let eta = eta.ok_or(Error::EpsilonZero { min: epsilon })?;
    Ok(PositivityConstants {
        c0: norm_upper,
        c1: norm_upper / (std::f64::consts::PI * eta * eta),
        epsilon,
        eta,
        norm_upper,
        norm_sampled,
        eta_lipschitz: lipschitz_bound(phi, n).map(|l| epsilon / (6.0 * l)),
        klain_min,
        sweep,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StressReport {
    pub trials: usize,
    pub min_value: f64,
    pub seed: u64,
    pub counter: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CounterexampleReport {
    pub n: usize,
    pub grid_size: usize,
    pub seed: u64,
    pub psi: ValuationSpec,
    pub phi: ValuationSpec,
    pub witness_body: Polytope,
    pub witness_objective: f64,
    pub shift: f64,
    pub constants: PositivityConstants,
    /// `psi_0(K*), ..., psi_n(K*)`.
    pub components: Vec<f64>,
    pub psi_at_witness: f64,
    pub phi_at_witness: f64,
    pub component_sum_residual: f64,
    pub positivity: StressReport,
    pub klain_audit_min: f64,
    pub klain_audit_size: usize,
    pub reverification: StressReport,
    /// Positivity of `psi` is established by sampling only.
    pub positivity_kind: String,
}

/// Bodies of mixed shape and size: segments, needles, flat polygons,
/// cross-polytopes, zonotopes and random polytopes, scaled by `{1/4, ..., 8}`.
pub fn stress_body(n: usize, rng: &mut RandomStream) -> Polytope {
    const SCALES: [f64; 6] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
    let scale = SCALES[rng.index(SCALES.len())];
    let shift = rng.gaussian_vector(n);
    let body = match rng.index(6) {
        0 => {
            let u = rng.unit_vector(n);
            shapes::segment(&Vector::zeros(n), &(u * rng.uniform_range(0.01, 2.0)))
        }
        1 => {
            // A thin needle: long segment plus a tiny random polytope.
            let u = rng.unit_vector(n) * 2.0;
            let mut pts: Vec<Vector> = (0..n + 1).map(|_| rng.ball_point(n) * 0.01).collect();
            pts.push(u.clone());
            pts.push(-u);
            Polytope::convex_hull(&pts).expect("needle")
        }
        2 => {
            // A flat polygon in a random 2-plane.
            let q = crate::subspace::random_rotation(n, rng);
            let m = 3 + rng.index(6);
            let pts: Vec<Vector> = (0..m)
                .map(|_| {
                    let a = rng.gaussian();
                    let b = rng.gaussian();
                    q.column(0) * a + q.column(1) * b
                })
                .collect();
            Polytope::convex_hull(&pts).expect("flat polygon")
        }
        3 => {
            let q = crate::subspace::random_rotation(n, rng);
            shapes::cross_polytope(n).transformed(&q)
        }
        4 => {
            let m = 2 + rng.index(5);
            let gens: Vec<Vector> = (0..m).map(|_| rng.gaussian_vector(n) * 0.5).collect();
            shapes::zonotope(n, &gens).expect("zonotope")
        }
        _ => random_body(n, 1.0, rng),
    };
    body.scaled(scale).translated(&shift)
}

fn stress(psi: &ValuationSpec, n: usize, trials: usize, rng: RandomStream) -> Result<StressReport> {
    let (seed, counter) = (rng.seed(), rng.counter());
    let mut rng = rng;
    let mut min_value = f64::INFINITY;
    for _ in 0..trials {
        let k = stress_body(n, &mut rng);
        min_value = min_value.min(psi.evaluate(&k)?);
    }
    Ok(StressReport {
        trials,
        min_value,
        seed,
        counter,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct CounterexampleParams {
    pub grid_size: usize,
    pub stress_trials: usize,
    pub reverify_trials: usize,
    pub sampling: PositivityParams,
}

impl Default for CounterexampleParams {
    fn default() -> Self {
        CounterexampleParams {
            grid_size: 240,
            stress_trials: 10_000,
            reverify_trials: 2_000,
            sampling: PositivityParams::default(),
        }
    }
}

/// Assemble `psi = c_0 + phi + c_1 V_2` with `phi` the shifted zonoid witness
/// for the cross-polytope `K*`.
pub fn build_counterexample(n: usize, params: CounterexampleParams, seed: u64) -> Result<CounterexampleReport> {
    if n < 3 {
        return Err(Error::BadDimension("the construction needs n >= 3".into()));
    }
    let rng = RandomStream::new(seed);
    let body = shapes::cross_polytope(n);
    let witness = match zonoid_witness(&body, params.grid_size).map_err(Error::at_stage("witness"))? {
        WitnessOutcome::Found(w) => w,
        WitnessOutcome::NoneFound { objective, .. } => {
            return Err(Error::at_stage("witness")(Error::NoWitness { objective }));
        }
    };
    let ShiftedWitness { spec: phi, t, .. } = shift_to_strict(&witness, &body).map_err(Error::at_stage("shift"))?;
    let sampling = PositivityParams {
        audit_size: 10 * params.grid_size / 2,
        ..params.sampling
    };
    let constants = positivity_constants(&phi, n, sampling, &rng.derive(1)).map_err(Error::at_stage("constants"))?;
    let psi = ValuationSpec::new(vec![Term::Constant { value: constants.c0 }])
        .combine(1.0, &phi, 1.0)
        .with(Term::Intrinsic { i: 2, coeff: constants.c1 });
    let components = homogeneous_components(&|k| psi.evaluate(k), &body).map_err(Error::at_stage("components"))?;
    let psi_at_witness = psi.evaluate(&body)?;
    let phi_at_witness = phi.evaluate(&body)?;
    let component_sum_residual = (components.values.iter().sum::<f64>() - psi_at_witness).abs();
    let positivity = stress(&psi, n, params.stress_trials, rng.derive(2)).map_err(Error::at_stage("stress"))?;
    let audit = audit_grid(n, params.grid_size);
    let mut klain_audit_min = f64::INFINITY;
    for u in &audit {
        klain_audit_min = klain_audit_min.min(phi.klain(&Subspace::line(u)?)?);
    }
    // Independent pass on a stream not used above.
    let reverification = stress(&psi, n, params.reverify_trials, RandomStream::with_counter(seed ^ 0x5eed, 99))
        .map_err(Error::at_stage("reverify"))?;
    Ok(CounterexampleReport {
        n,
        grid_size: params.grid_size,
        seed,
        psi,
        phi,
        witness_body: body,
        witness_objective: witness.objective,
        shift: t,
        constants,
        components: components.values,
        psi_at_witness,
        phi_at_witness,
        component_sum_residual,
        positivity,
        klain_audit_min,
        klain_audit_size: audit.len(),
        reverification,
        positivity_kind: "sampled".into(),
    })
}

impl CounterexampleReport {
    /// Component of degree one at the witness body.
    pub fn component1(&self) -> f64 {
        self.components[1]
    }

    pub fn holds(&self) -> bool {
        self.component1() < 0.0
            && self.positivity.min_value >= 0.0
            && self.reverification.min_value >= 0.0
            && self.klain_audit_min > 0.0
    }
}

/// Whether `x -> c|x|` fails subadditivity at `e_1, e_2`: `c sqrt 2 > 2c`.
pub fn minkowski_nondecomposition_check(c: f64) -> bool {
    c * 2f64.sqrt() > 2.0 * c
}
