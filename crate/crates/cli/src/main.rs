use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use convex_valuations::counterexample::{build_counterexample, minkowski_nondecomposition_check, CounterexampleParams};
use convex_valuations::io::{read_json, read_measure, read_polytope, read_spec, read_subspace, to_json, Cell, Table};
use convex_valuations::membership::{decide_g, shift_to_strict, zonoid_witness, Verdict, WitnessOutcome};
use convex_valuations::radii::{perelman_check, radii_chain, successive_radii, PerelmanVerdict, RadiiOptions};
use convex_valuations::transforms::{check_adjoint, cosine_transform, cosine_transform_measure, radon};
use convex_valuations::valuation::{homogeneous_components, klain_function};
use convex_valuations::volumes::{area_measure, intrinsic_volume, mixed_volume, projection_volume};
use convex_valuations::{Error, GrassFunction, Polytope, RandomStream, Result, Subspace, ValuationSpec};

/// Valuations, mixed volumes and Grassmannian transforms on convex polytopes.
#[derive(Parser)]
#[command(name = "klain", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Face lattice: counts per dimension and the faces with their volumes.
    Faces(Opts),
    /// Volume of the orthogonal projection onto a subspace.
    Project(Opts),
    /// Volume in the affine hull.
    Volume(Opts),
    /// Mixed volume of n bodies.
    Mixed(Opts),
    /// Intrinsic volumes, all or one index.
    Intrinsic(Opts),
    /// Face pieces of the area measure S_i.
    Areameasure(Opts),
    /// Klain function of a valuation at a subspace.
    Klain(Opts),
    /// Homogeneous components of a valuation at a body.
    Decompose(Opts),
    /// Radon transform of a spec's Klain function at a subspace.
    Radon(Opts),
    /// Cosine transform of a measure (exact) or of a spec's Klain function (sampled).
    Cosine(Opts),
    /// Two-route adjointness check of the Radon transform.
    Adjointcheck(Opts),
    /// Decide membership in the class G(i).
    Membership(Opts),
    /// Zonoid-separation witness and its shift to a strictly positive Klain function.
    Witness(Opts),
    /// Sampled successive radii and the Perelman bound.
    Radii(Opts),
    /// Positive valuation with a negative homogeneous component.
    Counterexample(Opts),
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct Opts {
    /// Polytope JSON file; repeat for several bodies.
    #[arg(long)]
    body: Vec<PathBuf>,
    /// Valuation spec JSON file; repeat for two functions.
    #[arg(long)]
    spec: Vec<PathBuf>,
    /// Subspace JSON file.
    #[arg(long)]
    subspace: Option<PathBuf>,
    /// Atomic Grassmannian measure JSON file.
    #[arg(long)]
    measure: Option<PathBuf>,
    #[arg(long)]
    i: Option<usize>,
    /// Ambient dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Required by every sampled computation.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Witness grid size.
    #[arg(long, default_value_t = 240)]
    grid: usize,
    /// Relative slack added to the 3-sigma agreement test.
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

/// A command's result: structured output, a table, and whether the verdict was positive.
struct Report {
    json: Value,
    table: Table,
    positive: bool,
}

impl Report {
    fn new(json: Value, table: Table) -> Self {
        Report { json, table, positive: true }
    }
}

fn usage(msg: &str) -> Error {
    Error::Io(msg.to_string())
}

impl Opts {
    fn body(&self) -> Result<Polytope> {
        match self.body.as_slice() {
            [path] => read_polytope(path),
            [] => Err(usage("--body is required")),
            _ => Err(usage("expected a single --body")),
        }
    }

    fn spec(&self) -> Result<ValuationSpec> {
        match self.spec.as_slice() {
            [path] => read_spec(path),
            [] => Err(usage("--spec is required")),
            _ => Err(usage("expected a single --spec")),
        }
    }

    fn subspace(&self) -> Result<Subspace> {
        read_subspace(self.subspace.as_deref().ok_or_else(|| usage("--subspace is required"))?)
    }

    fn i(&self) -> Result<usize> {
        self.i.ok_or_else(|| usage("--i is required"))
    }

    fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| usage("--seed is required for sampled computations"))
    }

    fn samples(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }
}

fn sampled_json(value: f64, stderr: f64, samples: usize, seed: u64) -> Value {
    json!({ "value": value, "stderr": stderr, "samples": samples, "seed": seed })
}

fn estimate_table(value: f64, stderr: f64, samples: usize, seed: Option<u64>) -> Table {
    let mut t = Table::new(&["value", "stderr", "samples", "seed"]);
    let seed = seed.map_or(Cell::Text(String::new()), Cell::from);
    t.push(vec![value.into(), stderr.into(), samples.into(), seed]);
    t
}

/// The `n` field of a spec file, if present.
fn declared_dim(path: &Path) -> Result<Option<usize>> {
    let raw: Value = read_json(path)?;
    Ok(raw.get("n").and_then(Value::as_u64).map(|n| n as usize))
}

/// The spec's Klain function as a function on `G_i(R^n)`, with `i` the spec's degree.
fn klain_grass<'a>(spec: &'a ValuationSpec, n: usize) -> Result<GrassFunction<'a>> {
    spec.validate(n)?;
    let degrees = spec.degrees(n);
    match degrees.as_slice() {
        [i] if *i > 0 && *i < n => Ok(GrassFunction::new(n, *i, klain_function(spec))),
        [i] => Err(Error::BadDimension(format!("spec degree {i} has no Grassmannian in R^{n}"))),
        _ => Err(Error::MixedDegrees(degrees)),
    }
}

fn faces(o: &Opts) -> Result<Report> {
    let p = o.body()?;
    let lattice = p.face_lattice();
    let counts = lattice.counts();
    let mut all = Vec::new();
    let mut table = Table::new(&["dim", "count"]);
    for (k, c) in counts.iter().enumerate() {
        table.push(vec![k.into(), (*c).into()]);
        for (index, f) in lattice.faces(k).iter().enumerate() {
            all.push(json!({ "dim": k, "index": index, "vertex_ids": f.vertex_ids, "volume": f.volume }));
        }
    }
    let json = json!({ "n": p.ambient_dim(), "dim": p.dim(), "counts": counts, "faces": all });
    Ok(Report::new(json, table))
}

fn project(o: &Opts) -> Result<Report> {
    let p = o.body()?;
    let e = o.subspace()?;
    let image = p.project(&e)?;
    let vol = projection_volume(&p, &e)?;
    let mut table = Table::new(&["dim", "volume"]);
    table.push(vec![e.dim().into(), vol.into()]);
    let json = json!({ "dim": e.dim(), "volume": vol, "projection": image });
    Ok(Report::new(json, table))
}

fn volume(o: &Opts) -> Result<Report> {
    let p = o.body()?;
    let mut table = Table::new(&["dim", "volume"]);
    table.push(vec![p.dim().into(), p.relative_volume().into()]);
    let json = json!({ "n": p.ambient_dim(), "dim": p.dim(), "volume": p.volume(), "relative_volume": p.relative_volume() });
    Ok(Report::new(json, table))
}

fn mixed(o: &Opts) -> Result<Report> {
    let bodies = o.body.iter().map(|b| read_polytope(b)).collect::<Result<Vec<_>>>()?;
    let v = mixed_volume(&bodies)?;
    let mut table = Table::new(&["mixed_volume"]);
    table.push(vec![v.into()]);
    Ok(Report::new(json!({ "bodies": bodies.len(), "mixed_volume": v }), table))
}

fn intrinsic(o: &Opts) -> Result<Report> {
    let p = o.body()?;
    let n = p.ambient_dim();
    let indices: Vec<usize> = match o.i {
        Some(i) if i <= n => vec![i],
        Some(i) => return Err(Error::BadDimension(format!("index {i} exceeds {n}"))),
        None => (0..=n).collect(),
    };
    let mut table = Table::new(&["i", "value"]);
    let mut values = Vec::new();
    for i in indices {
        let v = intrinsic_volume(&p, i);
        table.push(vec![i.into(), v.into()]);
        values.push(json!({ "i": i, "value": v }));
    }
    Ok(Report::new(json!({ "n": n, "intrinsic_volumes": values }), table))
}

fn areameasure(o: &Opts) -> Result<Report> {
    let p = o.body()?;
    let i = o.i()?;
    let pieces = area_measure(&p, i)?;
    let mut table = Table::new(&["dim", "index", "density", "mass", "mass_stderr"]);
    let mut list = Vec::new();
    for piece in &pieces {
        table.push(vec![
            piece.face.dim.into(),
            piece.face.index.into(),
            piece.density.into(),
            piece.mass.into(),
            piece.mass_stderr.into(),
        ]);
        list.push(json!({
            "face": piece.face,
            "density": piece.density,
            "mass": piece.mass,
            "mass_stderr": piece.mass_stderr,
        }));
    }
    let total: f64 = pieces.iter().map(|p| p.mass).sum();
    Ok(Report::new(json!({ "i": i, "total_mass": total, "pieces": list }), table))
}

fn klain(o: &Opts) -> Result<Report> {
    let spec = o.spec()?;
    let e = o.subspace()?;
    spec.validate(e.ambient_dim())?;
    let v = spec.klain(&e)?;
    let mut table = Table::new(&["dim", "value"]);
    table.push(vec![e.dim().into(), v.into()]);
    Ok(Report::new(json!({ "dim": e.dim(), "value": v }), table))
}

fn decompose(o: &Opts) -> Result<Report> {
    let spec = o.spec()?;
    let p = o.body()?;
    spec.validate(p.ambient_dim())?;
    let comps = homogeneous_components(&|k| spec.evaluate(k), &p)?;
    let mut table = Table::new(&["degree", "value"]);
    for (d, v) in comps.values.iter().enumerate() {
        table.push(vec![d.into(), (*v).into()]);
    }
    let json = json!({
        "value": spec.evaluate(&p)?,
        "components": comps.values,
        "residual": comps.residual,
    });
    Ok(Report::new(json, table))
}

fn radon_cmd(o: &Opts) -> Result<Report> {
    let spec = o.spec()?;
    let big_f = o.subspace()?;
    let seed = o.seed()?;
    let samples = o.samples(10_000);
    let f = klain_grass(&spec, big_f.ambient_dim())?;
    let est = radon(&f, &big_f, samples, &mut RandomStream::new(seed))?;
    let json = json!({ "i": f.degree, "j": big_f.dim(), "estimate": sampled_json(est.value, est.stderr, samples, seed) });
    Ok(Report::new(json, estimate_table(est.value, est.stderr, samples, Some(seed))))
}

fn cosine(o: &Opts) -> Result<Report> {
    let e = o.subspace()?;
    if let Some(path) = &o.measure {
        let mu = read_measure(path)?;
        let v = cosine_transform_measure(&mu, &e)?;
        let json = json!({ "i": mu.dim, "value": v, "exact": true });
        return Ok(Report::new(json, estimate_table(v, 0.0, 0, None)));
    }
    let spec = o.spec()?;
    let seed = o.seed()?;
    let samples = o.samples(10_000);
    let f = klain_grass(&spec, e.ambient_dim())?;
    let est = cosine_transform(&f, &e, samples, &mut RandomStream::new(seed))?;
    let json = json!({ "i": f.degree, "exact": false, "estimate": sampled_json(est.value, est.stderr, samples, seed) });
    Ok(Report::new(json, estimate_table(est.value, est.stderr, samples, Some(seed))))
}

fn adjointcheck(o: &Opts) -> Result<Report> {
    let seed = o.seed()?;
    let samples = o.samples(10_000);
    let specs = o.spec.iter().map(|p| read_spec(p)).collect::<Result<Vec<_>>>()?;
    let declared = o.spec.iter().map(|p| declared_dim(p)).collect::<Result<Vec<_>>>()?;
    let n = o
        .n
        .or_else(|| specs.iter().find_map(ValuationSpec::ambient_dim))
        .or_else(|| declared.into_iter().flatten().next())
        .ok_or_else(|| usage("--n is required when the specs do not fix the dimension"))?;
    let (f, g) = match specs.as_slice() {
        [a] => {
            let f = klain_grass(a, n)?;
            let j = o.i()?;
            (f, GrassFunction::constant(n, j, 1.0))
        }
        [a, b] => (klain_grass(a, n)?, klain_grass(b, n)?),
        _ => return Err(usage("adjointcheck takes one or two --spec files")),
    };
    if f.degree >= g.degree {
        return Err(Error::BadDimension(format!("need i < j, got {} and {}", f.degree, g.degree)));
    }
    let chk = check_adjoint(&f, &g, samples, &mut RandomStream::new(seed))?;
    let agrees = chk.agrees(3.0, o.tol);
    let mut table = Table::new(&["lhs", "lhs_stderr", "rhs", "rhs_stderr", "diff", "samples", "seed", "agrees"]);
    table.push(vec![
        chk.lhs.into(),
        chk.lhs_stderr.into(),
        chk.rhs.into(),
        chk.rhs_stderr.into(),
        chk.diff.into(),
        samples.into(),
        seed.into(),
        Cell::Text(agrees.to_string()),
    ]);
    let json = json!({ "i": f.degree, "j": g.degree, "seed": seed, "check": chk, "agrees": agrees });
    Ok(Report { json, table, positive: agrees })
}

fn membership(o: &Opts) -> Result<Report> {
    let p = o.body()?;
    let cert = decide_g(&p, o.i()?)?;
    let member = cert.verdict == Verdict::Member;
    let mut table = Table::new(&["i", "verdict", "violating_faces", "max_residual"]);
    table.push(vec![
        cert.i.into(),
        Cell::Text(if member { "member" } else { "non-member" }.into()),
        cert.violating_faces.as_ref().map_or(0, Vec::len).into(),
        cert.residuals.as_ref().map_or(Cell::Text(String::new()), |r| r.max_residual.into()),
    ]);
    Ok(Report { json: serde_json::to_value(&cert).expect("certificate"), table, positive: member })
}

fn witness(o: &Opts) -> Result<Report> {
    let p = o.body()?;
    let mut table = Table::new(&["found", "objective", "shift", "audit_min", "value_after"]);
    match zonoid_witness(&p, o.grid)? {
        WitnessOutcome::Found(w) => {
            let shifted = shift_to_strict(&w, &p)?;
            table.push(vec![
                Cell::Text("true".into()),
                w.objective.into(),
                shifted.t.into(),
                shifted.audit_min_after.into(),
                shifted.value_after.into(),
            ]);
            let json = json!({ "outcome": "found", "witness": w, "shifted": shifted });
            Ok(Report::new(json, table))
        }
        none @ WitnessOutcome::NoneFound { objective, .. } => {
            let empty = || Cell::Text(String::new());
            table.push(vec![Cell::Text("false".into()), objective.into(), empty(), empty(), empty()]);
            Ok(Report { json: serde_json::to_value(&none).expect("outcome"), table, positive: false })
        }
    }
}

fn radii(o: &Opts) -> Result<Report> {
    let p = o.body()?;
    let seed = o.seed()?;
    let opts = RadiiOptions { samples: o.samples(10_000), ..RadiiOptions::default() };
    let rng = RandomStream::new(seed);
    let n = p.ambient_dim();
    let reports = match o.i {
        Some(i) => vec![successive_radii(&p, i, opts, &rng)?],
        None => radii_chain(&p, opts, &rng)?,
    };
    let mut table = Table::new(&["i", "R_upper", "r_lower", "samples", "seed"]);
    for r in &reports {
        table.push(vec![r.i.into(), r.r_upper.into(), r.r_lower.into(), r.samples.into(), r.seed.into()]);
    }
    let checks = if reports.len() == n {
        (1..=n)
            .map(|i| perelman_check(n, i, &reports[n - i], &reports[i - 1]))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let pass = checks.iter().all(|c| c.verdict == PerelmanVerdict::Pass);
    let json = json!({ "n": n, "seed": seed, "radii": reports, "perelman": checks });
    Ok(Report { json, table, positive: pass })
}

fn counterexample(o: &Opts) -> Result<Report> {
    let n = o.n.unwrap_or(3);
    let seed = o.seed()?;
    let defaults = CounterexampleParams::default();
    let params = CounterexampleParams {
        grid_size: o.grid,
        stress_trials: o.samples(defaults.stress_trials),
        ..defaults
    };
    let rep = build_counterexample(n, params, seed)?;
    let minkowski = minkowski_nondecomposition_check(rep.component1());
    let mut table = Table::new(&["degree", "value"]);
    for (d, v) in rep.components.iter().enumerate() {
        table.push(vec![d.into(), (*v).into()]);
    }
    let holds = rep.holds() && minkowski;
    let mut json = serde_json::to_value(&rep).expect("report");
    json["minkowski_nondecomposition"] = json!(minkowski);
    json["holds"] = json!(holds);
    Ok(Report { json, table, positive: holds })
}

fn write_output(report: &Report, o: &Opts, command: &str) -> Result<()> {
    let text = match o.format {
        Format::Json => {
            let mut json = report.json.clone();
            if let Value::Object(map) = &mut json {
                map.insert("command".into(), json!(command));
            }
            to_json(&json)?
        }
        Format::Csv => report.table.to_csv()?,
    };
    match &o.out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

type Handler = fn(&Opts) -> Result<Report>;

fn run(cli: Cli) -> Result<bool> {
    let (name, opts, f): (&str, &Opts, Handler) = match &cli.command {
        Command::Faces(o) => ("faces", o, faces),
        Command::Project(o) => ("project", o, project),
        Command::Volume(o) => ("volume", o, volume),
        Command::Mixed(o) => ("mixed", o, mixed),
        Command::Intrinsic(o) => ("intrinsic", o, intrinsic),
        Command::Areameasure(o) => ("areameasure", o, areameasure),
        Command::Klain(o) => ("klain", o, klain),
        Command::Decompose(o) => ("decompose", o, decompose),
        Command::Radon(o) => ("radon", o, radon_cmd),
        Command::Cosine(o) => ("cosine", o, cosine),
        Command::Adjointcheck(o) => ("adjointcheck", o, adjointcheck),
        Command::Membership(o) => ("membership", o, membership),
        Command::Witness(o) => ("witness", o, witness),
        Command::Radii(o) => ("radii", o, radii),
        Command::Counterexample(o) => ("counterexample", o, counterexample),
    };
    let report = f(opts)?;
    write_output(&report, opts, name)?;
    Ok(report.positive)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
