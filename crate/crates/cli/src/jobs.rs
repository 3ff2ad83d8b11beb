//! One function per subcommand, each producing a [`Report`].

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};
use slewind::closed_forms::{h1_closed, pde_residual_h1, schramm_probability, simmons_cardy_two_point};
use slewind::coulomb_gas::{h1_cg, HnOptions};
use slewind::green::{green1, green1_target, green2, green_n_spec, GreenMethod, GreenNSpec, GreenOptions};
use slewind::sle_mc::{estimate_near_passage, pattern_frequency, simulate_side, McConfig, TimeStep};
use slewind::winding::{left_passage, passage_between, pattern_probability, SubsetCorrelators, WindingPattern};
use slewind::{BoundaryFrame, HalfPlanePoint, Kappa};

use crate::error::CliError;
use crate::output::{Provenance, Report, Table};

fn provenance(command: &str, points: &[HalfPlanePoint], frame: BoundaryFrame, kappa: Kappa) -> Provenance {
    Provenance {
        version: slewind::VERSION,
        command: command.into(),
        points: points.iter().map(|p| format_complex(p.z())).collect(),
        frame: frame.to_string(),
        kappa: kappa.value(),
        ..Provenance::default()
    }
}

pub fn format_complex(z: Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn pattern_label(pattern: WindingPattern) -> String {
    (0..pattern.points()).map(|i| if pattern.is_separated(i) { '1' } else { '0' }).collect()
}

fn hn_options(order: usize) -> HnOptions {
    HnOptions::with_order(order)
}

fn require_saw(kappa: Kappa, what: &str) -> Result<(), CliError> {
    if kappa.is_saw() {
        Ok(())
    } else {
        Err(CliError::Input(format!("{what} is defined for κ = 8/3 only, got {kappa}")))
    }
}

pub struct ProbJob {
    pub points: Vec<HalfPlanePoint>,
    pub frame: BoundaryFrame,
    pub kappa: Kappa,
    pub order: usize,
    pub between: bool,
}

/// Pattern probabilities and the all-separated probability, or with
/// `between` the probability of passing between consecutive pairs.
pub fn prob(job: &ProbJob) -> Result<Report, CliError> {
    require_saw(job.kappa, "the winding probability")?;
    let mut prov = provenance("prob", &job.points, job.frame, job.kappa);
    prov.order = Some(job.order);
    let opts = hn_options(job.order);
    let mut table = Table::new(&["quantity", "pattern", "value", "error"]);
    if job.between {
        if job.points.len() % 2 != 0 {
            return Err(CliError::Input("--between needs an even number of points".into()));
        }
        let pairs: Vec<_> = job.points.chunks(2).map(|c| (c[0], c[1])).collect();
        let p = passage_between(&pairs, job.frame, &opts)?;
        table.push(vec![json!("p_between"), Value::Null, json!(p.probability.value()), json!(p.error_estimate)]);
    } else {
        let sc = SubsetCorrelators::compute(&job.points, job.frame, job.kappa, &opts)?;
        let wv = sc.weights()?;
        let err = sc.probability_error();
        let n = job.points.len();
        let all = WindingPattern::all_separated(n)?;
        table.push(vec![
            json!("p_separated"),
            json!(pattern_label(all)),
            json!(pattern_probability(&wv, all)?.value()),
            json!(err),
        ]);
        for pattern in WindingPattern::all(n)? {
            let p = pattern_probability(&wv, pattern)?;
            table.push(vec![json!("pattern"), json!(pattern_label(pattern)), json!(p.value()), json!(err)]);
        }
    }
    Ok(Report { provenance: prov, status: "ok", table })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MethodArg {
    /// Direct block for one point, extrapolation for two.
    Auto,
    Extrapolation,
    Direct,
}

pub struct GreenJob {
    pub points: Vec<HalfPlanePoint>,
    pub frame: BoundaryFrame,
    pub method: MethodArg,
    pub order: usize,
    pub direction: Complex64,
}

pub fn green(job: &GreenJob) -> Result<Report, CliError> {
    let mut prov = provenance("green", &job.points, job.frame, Kappa::SAW);
    prov.order = Some(job.order);
    let mut table = Table::new(&["quantity", "value", "error"]);
    let spec = green_n_spec(&job.points)?;
    let method = match (job.method, &spec) {
        (MethodArg::Direct, _) | (MethodArg::Auto, GreenNSpec::One(_)) => GreenMethod::DirectBlock,
        _ => GreenMethod::Extrapolation,
    };
    prov.method = Some(format!("{method:?}").to_lowercase());
    let opts = GreenOptions {
        hn: HnOptions { error_probe: false, ..hn_options(job.order) },
        direction: job.direction,
        ..GreenOptions::default()
    };
    let estimate = match spec {
        GreenNSpec::One(z) => green1(z, job.frame, method, &opts)?,
        GreenNSpec::Two(z, w) => green2(z, w, job.frame, method, &opts)?,
        GreenNSpec::NotImplemented { points, formula } => {
            prov.extra.insert("formula".into(), json!(formula));
            let report = Report { provenance: prov, status: "not_implemented", table };
            return Err(CliError::NotImplemented { points, report: Box::new(report) });
        }
    };
    prov.c31_squared = estimate.calibration;
    table.push(vec![json!("green"), json!(estimate.value), json!(estimate.error_estimate)]);
    Ok(Report { provenance: prov, status: "ok", table })
}

pub struct McJob {
    pub points: Vec<HalfPlanePoint>,
    pub kappa: Kappa,
    pub config: McConfig,
    pub eps: Vec<f64>,
}

pub fn mc(job: &McJob) -> Result<Report, CliError> {
    let frame = BoundaryFrame::CANONICAL;
    let mut prov = provenance("mc", &job.points, frame, job.kappa);
    prov.seed = Some(job.config.seed);
    prov.samples = Some(job.config.n_samples);
    prov.extra.insert("dt".into(), serde_json::to_value(job.config.dt).map_err(|e| CliError::Encode(e.to_string()))?);
    prov.extra.insert("swallow_tol".into(), json!(job.config.swallow_tol));
    let mut table = Table::new(&["quantity", "pattern", "eps", "value", "error"]);
    if !job.eps.is_empty() {
        let [z] = job.points.as_slice() else {
            return Err(CliError::Input("near-passage estimates take exactly one point".into()));
        };
        for (eps, e) in job.eps.iter().zip(estimate_near_passage(*z, &job.eps, &job.config)?) {
            table.push(vec![json!("near_passage"), Value::Null, json!(eps), json!(e.mean), json!(e.std_err)]);
        }
    } else {
        let samples = simulate_side(&job.points, &job.config)?;
        for pattern in WindingPattern::all(job.points.len())? {
            let e = pattern_frequency(&samples, pattern, job.config.seed)?;
            table.push(vec![json!("pattern"), json!(pattern_label(pattern)), Value::Null, json!(e.mean), json!(e.std_err)]);
        }
        table.push(vec![json!("exclusion_rate"), Value::Null, Value::Null, json!(samples.exclusion_rate()), json!(0.0)]);
    }
    Ok(Report { provenance: prov, status: "ok", table })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    /// Closed forms against the Coulomb-gas pipeline.
    Closedform,
    /// Closed forms against Monte Carlo.
    Mc,
    All,
}

struct Check {
    name: String,
    value: f64,
    reference: f64,
    tolerance: f64,
    /// Standard error for Monte Carlo checks, where the tolerance is in σ.
    std_err: Option<f64>,
}

impl Check {
    fn passed(&self) -> bool {
        let dev = (self.value - self.reference).abs();
        match self.std_err {
            Some(s) => dev <= self.tolerance * s,
            None => dev <= self.tolerance,
        }
    }
}

fn hp(x: f64, y: f64) -> Result<HalfPlanePoint, CliError> {
    Ok(HalfPlanePoint::from_xy(x, y)?)
}

fn closedform_checks(order: usize) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let z = hp(1.0, 1.0)?;
    out.push(Check {
        name: "schramm(1+i) at κ=8/3".into(),
        value: schramm_probability(z, Kappa::SAW)?.value(),
        reference: 0.5 + 0.5f64.sqrt() / 2.0,
        tolerance: 1e-10,
        std_err: None,
    });
    let opts = hn_options(order);
    let p = left_passage(&[z], BoundaryFrame::CANONICAL, &opts)?;
    out.push(Check {
        name: "left passage(1+i) via H1 integral".into(),
        value: p.probability.value(),
        reference: 0.5 + 0.5f64.sqrt() / 2.0,
        tolerance: 1e-8,
        std_err: None,
    });
    for (kv, x, y, frame) in [
        (8.0 / 3.0, 0.4, 0.9, BoundaryFrame::CANONICAL),
        (3.0, 1.0, 2.0, BoundaryFrame::finite(0.0, 3.0)?),
        (10.0 / 3.0, -0.5, 0.7, BoundaryFrame::finite(-2.0, 1.0)?),
    ] {
        let k = Kappa::new(kv)?;
        let z = hp(x, y)?;
        let a = h1_cg(z, frame, k, 64)?.value;
        let b = h1_closed(z, frame, k)?.value;
        out.push(Check {
            name: format!("H1 integral vs closed form, κ={kv:.4}, z={x}+{y}i, frame {frame} (relative)"),
            value: (a - b).norm() / b.norm(),
            reference: 0.0,
            tolerance: 1e-8,
            std_err: None,
        });
    }
    for ((zx, zy), (wx, wy)) in [((0.0, 1.0), (0.0, 2.0)), ((-0.8, 0.6), (1.1, 1.4))] {
        let (z, w) = (hp(zx, zy)?, hp(wx, wy)?);
        out.push(Check {
            name: format!("two-point left passage vs Simmons–Cardy, {zx}+{zy}i, {wx}+{wy}i"),
            value: left_passage(&[z, w], BoundaryFrame::CANONICAL, &opts)?.probability.value(),
            reference: simmons_cardy_two_point(z, w)?.value(),
            tolerance: 1e-6,
            std_err: None,
        });
    }
    let z = hp(1.0, 2.0)?;
    out.push(Check {
        name: "null-vector residual of H1, z=1+2i, frame (0,3)".into(),
        value: pde_residual_h1(z, BoundaryFrame::finite(0.0, 3.0)?, Kappa::SAW, 1e-3)?,
        reference: 0.0,
        tolerance: 1e-5,
        std_err: None,
    });
    let opts = GreenOptions::default();
    for (x, y) in [(0.0, 1.0), (1.0, 1.0), (-1.2, 0.6)] {
        let z = hp(x, y)?;
        out.push(Check {
            name: format!("one-point Green's block at {x}+{y}i"),
            value: green1(z, BoundaryFrame::CANONICAL, GreenMethod::DirectBlock, &opts)?.value,
            reference: green1_target(z, BoundaryFrame::CANONICAL)?,
            tolerance: 1e-6,
            std_err: None,
        });
    }
    Ok(out)
}

fn mc_checks(seed: u64, samples: usize) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let separated = WindingPattern::new(1, 1)?;
    for (kv, x, y) in [(8.0 / 3.0, 1.0, 1.0), (2.9, 1.0, 1.0), (8.0 / 3.0, -0.5, 0.4)] {
        let k = Kappa::new(kv)?;
        let z = hp(x, y)?;
        let cfg = McConfig { kappa: k, n_samples: samples, seed, ..McConfig::default() };
        let e = pattern_frequency(&simulate_side(&[z], &cfg)?, separated, seed)?;
        out.push(Check {
            name: format!("Monte Carlo vs Schramm, κ={kv:.4}, z={x}+{y}i (3σ)"),
            value: e.mean,
            reference: schramm_probability(z, k)?.value(),
            tolerance: 3.0,
            std_err: Some(e.std_err),
        });
    }
    let (z, w) = (hp(0.0, 1.0)?, hp(0.0, 2.0)?);
    let cfg = McConfig { n_samples: samples, seed: seed.wrapping_add(1), ..McConfig::default() };
    let e = pattern_frequency(&simulate_side(&[z, w], &cfg)?, WindingPattern::new(2, 3)?, seed)?;
    out.push(Check {
        name: "Monte Carlo vs Simmons–Cardy, i and 2i (3σ)".into(),
        value: e.mean,
        reference: simmons_cardy_two_point(z, w)?.value(),
        tolerance: 3.0,
        std_err: Some(e.std_err),
    });
    Ok(out)
}

pub fn verify(suite: Suite, seed: u64, samples: usize, order: usize) -> Result<Report, CliError> {
    let mut prov = provenance("verify", &[], BoundaryFrame::CANONICAL, Kappa::SAW);
    prov.seed = Some(seed);
    prov.samples = Some(samples);
    prov.order = Some(order);
    prov.extra.insert("suite".into(), json!(format!("{suite:?}").to_lowercase()));
    let mut checks = Vec::new();
    if matches!(suite, Suite::Closedform | Suite::All) {
        checks.extend(closedform_checks(order)?);
    }
    if matches!(suite, Suite::Mc | Suite::All) {
        checks.extend(mc_checks(seed, samples)?);
    }
    let mut table = Table::new(&["check", "value", "reference", "tolerance", "std_err", "pass"]);
    let mut failed = 0;
    for c in &checks {
        let pass = c.passed();
        failed += usize::from(!pass);
        table.push(vec![
            json!(c.name),
            json!(c.value),
            json!(c.reference),
            json!(c.tolerance),
            c.std_err.map_or(Value::Null, |s| json!(s)),
            json!(pass),
        ]);
    }
    let status = if failed == 0 { "ok" } else { "failed" };
    Ok(Report { provenance: prov, status, table })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GridQuantity {
    /// One-point Green's function.
    Green,
    /// Probability that the point is separated.
    Prob,
}

pub struct GridJob {
    pub quantity: GridQuantity,
    pub frame: BoundaryFrame,
    pub x: (f64, f64, usize),
    pub y: (f64, f64, usize),
    pub method: MethodArg,
    pub order: usize,
}

fn axis((lo, hi, n): (f64, f64, usize)) -> Result<Vec<f64>, CliError> {
    if n == 0 || !(lo <= hi) || (n == 1 && lo != hi) {
        return Err(CliError::Input(format!("bad grid axis [{lo}, {hi}] with {n} nodes")));
    }
    Ok((0..n).map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect())
}

pub fn grid(job: &GridJob) -> Result<Report, CliError> {
    let xs = axis(job.x)?;
    let ys = axis(job.y)?;
    if ys[0] <= 0.0 {
        return Err(CliError::Input("grid must lie in the upper half-plane (ymin > 0)".into()));
    }
    let method = match job.method {
        MethodArg::Extrapolation => GreenMethod::Extrapolation,
        _ => GreenMethod::DirectBlock,
    };
    let mut prov = provenance("grid", &[], job.frame, Kappa::SAW);
    prov.order = Some(job.order);
    prov.extra.insert("quantity".into(), json!(format!("{:?}", job.quantity).to_lowercase()));
    if job.quantity == GridQuantity::Green {
        prov.method = Some(format!("{method:?}").to_lowercase());
    }
    let green_opts = GreenOptions { hn: HnOptions { error_probe: false, ..hn_options(job.order) }, ..GreenOptions::default() };
    let green_opts = if method == GreenMethod::Extrapolation {
        let cal = slewind::green::calibrate_c31(BoundaryFrame::CANONICAL, &green_opts)?;
        prov.c31_squared = Some(cal.c31_squared);
        GreenOptions { calibration: Some(cal), ..green_opts }
    } else {
        green_opts
    };
    let cells: Vec<(f64, f64)> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).collect();
    let values = cells
        .par_iter()
        .map(|&(x, y)| {
            let z = hp(x, y)?;
            Ok(match job.quantity {
                GridQuantity::Green => {
                    let g = green1(z, job.frame, method, &green_opts)?;
                    (g.value, g.error_estimate)
                }
                GridQuantity::Prob => {
                    let p = left_passage(&[z], job.frame, &hn_options(job.order))?;
                    (p.probability.value(), p.error_estimate)
                }
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut table = Table::new(&["x", "y", "value", "error"]);
    for (&(x, y), (v, e)) in cells.iter().zip(values) {
        table.push(vec![json!(x), json!(y), json!(v), json!(e)]);
    }
    Ok(Report { provenance: prov, status: "ok", table })
}

pub fn time_step(dt: Option<f64>, dt_scale: Option<f64>) -> Result<TimeStep, CliError> {
    match (dt, dt_scale) {
        (Some(_), Some(_)) => Err(CliError::Input("--dt and --dt-scale are exclusive".into())),
        (Some(d), None) => Ok(TimeStep::Fixed(d)),
        (None, Some(s)) => match TimeStep::default() {
            TimeStep::Adaptive { min, max, .. } => Ok(TimeStep::Adaptive { scale: s, min, max }),
            fixed => Ok(fixed),
        },
        (None, None) => Ok(TimeStep::default()),
    }
}
