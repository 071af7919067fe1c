use std::fmt::Write as _;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use sle_lab_core::lattice::{excursion_kernel, fomin_determinant, halfplane_excursion_kernel, HittingMatrix, LatticeDomain, LatticePoint};
use sle_lab_core::lerw::{
    enumerate_saes, default_len_cap, fomin_n2_exact_budgeted, fomin_n2_mc, lerw_weight_exact, loop_erase,
    ExcursionSampler, SelfAvoidingExcursion,
};
use sle_lab_core::loewner::{
    avoidance_mc, estimate_hstar, martingale_check, martingale_check_complex, sample_brownian_excursion, sle_driving,
    sle_kappa_rho, trace_from_driving, two_path_simultaneous, AvoidanceConfig, EstimatorRecord, ExcursionConfig,
    HstarConfig, KappaRhoTarget,
};
use sle_lab_core::loops::{
    attach_loops, concatenated_loop_law, log_theta, loop_measure_series, loop_measure_total, m_star, sample_loop_soup,
    LoopCatalog,
};
use sle_lab_core::partition::{cardy, phi, phi_jet, phi_ode_residual, scalefomin_rhs, table_rows};
use sle_lab_core::saw::{critical_r_scan, length_profile, saw_weight, SawParams};
use sle_lab_core::stats::{replica_rng, rng_from_seed, RunningStats};

use crate::config::{point, DomainParam, RunSpec};
use crate::error::{CliError, Context};
use crate::record::{Quantity, ResultRecord, Tolerance};
use crate::RunOutput;

pub fn dispatch(spec: &RunSpec) -> Result<RunOutput, CliError> {
    match spec.experiment.as_str() {
        "fomin-exact" => fomin_exact(spec),
        "fomin-mc" => fomin_mc(spec),
        "partition-eval" => partition_eval(spec),
        "scalefomin" => scalefomin(spec),
        "sle-avoid" => sle_avoid(spec),
        "hstar" => hstar(spec),
        "martingale-check" => martingale(spec),
        "loop-lemma" => loop_lemma(spec),
        "loop-soup" => loop_soup(spec),
        "theta-identity" => theta_identity(spec),
        "lambda-saw" => lambda_saw(spec),
        "lattice-asymptotics" => lattice_asymptotics(spec),
        "sle-trace" => sle_trace(spec),
        "brownian-excursion" => brownian_excursion(spec),
        "kappa-rho" => kappa_rho(spec),
        "two-path" => two_path(spec),
        other => Err(CliError::Config(format!("unknown experiment {other:?}"))),
    }
}

fn echo<P: Serialize>(p: &P) -> serde_json::Value {
    serde_json::to_value(p).unwrap_or(serde_json::Value::Null)
}

fn output(record: ResultRecord, artifacts: Vec<(&str, String)>) -> Result<RunOutput, CliError> {
    Ok(RunOutput {
        record,
        artifacts: artifacts.into_iter().map(|(n, b)| (n.to_string(), b)).collect(),
    })
}

fn check_positive(what: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{what} must be positive, got {v}")))
    }
}

fn bbox(d: &LatticeDomain) -> (i64, i64, i64, i64) {
    let pts = d.interior();
    let x0 = pts.iter().map(|p| p.x).min().unwrap();
    let x1 = pts.iter().map(|p| p.x).max().unwrap();
    let y0 = pts.iter().map(|p| p.y).min().unwrap();
    let y1 = pts.iter().map(|p| p.y).max().unwrap();
    (x0, x1, y0, y1)
}

/// `x1, x2, y2, y1` beside the four corners of the bounding box, counterclockwise.
fn corner_points(d: &LatticeDomain) -> [LatticePoint; 4] {
    let (x0, x1, y0, y1) = bbox(d);
    [
        LatticePoint::new(x0 - 1, y1),
        LatticePoint::new(x0 - 1, y0),
        LatticePoint::new(x1 + 1, y0),
        LatticePoint::new(x1 + 1, y1),
    ]
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FominParams {
    domain: DomainParam,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<[[i64; 2]; 4]>,
}

impl Default for FominParams {
    fn default() -> Self {
        Self {
            domain: DomainParam::Rectangle([0, 4, 0, 4]),
            points: None,
        }
    }
}

impl FominParams {
    fn resolve(&self, spec: &RunSpec) -> Result<(LatticeDomain, [LatticePoint; 4]), CliError> {
        let d = spec.domain(&self.domain)?;
        let pts = match self.points {
            Some(ps) => ps.map(point),
            None => corner_points(&d),
        };
        Ok((d, pts))
    }
}

fn fomin_exact(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let p: FominParams = spec.params()?;
    let (d, [x1, x2, y2, y1]) = p.resolve(spec)?;
    let lhs: f64 = fomin_n2_exact_budgeted(&d, [x1, x2, y2, y1], spec.budget).context("fomin sum")?;
    let hm = HittingMatrix::<f64>::new(&d, &[x1, x2], &[y1, y2]).context("hitting matrix")?;
    let det = hm.determinant();
    let mut rec = ResultRecord::new(echo(&p));
    rec.insert("lhs", Quantity::exact(lhs).against(det, Tolerance::Relative { value: 1e-9 }))
        .insert("determinant", Quantity::exact(det))
        .insert("relative_error", Quantity::exact((lhs / det - 1.0).abs()));
    rec.judge();
    output(rec, vec![("hitting_matrix.csv", hm.to_csv())])
}

fn fomin_mc(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let p: FominParams = spec.params()?;
    let (d, pts) = p.resolve(spec)?;
    let n = spec.replicas_or(20_000);
    let det: f64 = fomin_determinant(&d, &[pts[0], pts[1]], &[pts[3], pts[2]]).context("hitting matrix")?;
    let mc = fomin_n2_mc(&d, pts, n, &mut rng_from_seed(spec.seed)).context("fomin sampler")?;
    let mut rec = ResultRecord::new(echo(&p));
    rec.insert(
        "mass",
        Quantity::stochastic(mc.mass()).against(det, Tolerance::StdErrors { k: 3.0, relative_floor: 0.0 }),
    )
    .insert("probability", Quantity::stochastic(mc.probability))
    .insert("determinant", Quantity::exact(det));
    rec.n_samples = Some(n);
    rec.judge();
    output(rec, vec![])
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PartitionParams {
    b: Vec<f64>,
    points: usize,
}

impl Default for PartitionParams {
    fn default() -> Self {
        Self {
            b: vec![0.0, 0.25, 1.0, 1.75, 2.5],
            points: 99,
        }
    }
}

fn partition_eval(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let p: PartitionParams = spec.params()?;
    if p.points == 0 || p.b.is_empty() {
        return Err(CliError::Config("need at least one b and one grid point".into()));
    }
    let rows = table_rows();
    let mut csv = String::from("b,u,phi,dphi,closed_form,ode_residual\n");
    let (mut ode, mut table, mut boundary) = (0.0f64, 0.0f64, 0.0f64);
    for &b in &p.b {
        let closed = rows.iter().find(|r| r.b == b).map(|r| r.closed_form);
        for k in 1..=p.points {
            let u = k as f64 / (p.points + 1) as f64;
            let jet = phi_jet(b, u).context("phi")?;
            let res = phi_ode_residual(b, u).context("phi")?;
            ode = ode.max(res.abs());
            let c = closed.map(|f| f(u));
            if let Some(c) = c {
                table = table.max((jet.value - c).abs());
            }
            let c = c.map(|c| format!("{c:.17e}")).unwrap_or_default();
            let _ = writeln!(csv, "{b},{u},{:.17e},{:.17e},{c},{res:.3e}", jet.value, jet.first);
        }
        boundary = boundary.max((phi(b, 1.0).context("phi")? - 1.0).abs());
    }
    let mut rec = ResultRecord::new(echo(&p));
    rec.insert("max_ode_residual", Quantity::exact(ode).against(0.0, Tolerance::Absolute { value: 1e-8 }))
        .insert("max_table_error", Quantity::exact(table).against(0.0, Tolerance::Absolute { value: 1e-10 }))
        .insert("max_boundary_error", Quantity::exact(boundary).against(0.0, Tolerance::Absolute { value: 1e-10 }));
    if p.b.contains(&0.0) {
        let half = cardy(0.5).context("cardy")?;
        let mut sym = 0.0f64;
        for k in 1..=p.points {
            let u = k as f64 / (p.points + 1) as f64;
            sym = sym.max((cardy(u).context("cardy")? + cardy(1.0 - u).context("cardy")? - 1.0).abs());
        }
        rec.insert("cardy_half", Quantity::exact(half).against(0.5, Tolerance::Absolute { value: 1e-10 }))
            .insert("cardy_symmetry", Quantity::exact(sym).against(0.0, Tolerance::Absolute { value: 1e-10 }));
    }
    rec.judge();
    output(rec, vec![("phi.csv", csv)])
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ScaleParams {
    points: usize,
    y: f64,
}

impl Default for ScaleParams {
    fn default() -> Self {
        Self { points: 100, y: 1.0 }
    }
}

fn scalefomin(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let p: ScaleParams = spec.params()?;
    check_positive("y", p.y)?;
    let mut csv = String::from("x,y,ratio,closed_form\n");
    let mut worst = 0.0f64;
    for k in 1..=p.points {
        let x = p.y * k as f64 / (p.points + 1) as f64;
        let v = scalefomin_rhs(x, p.y).context("scalefomin")?;
        let u = x / p.y;
        let c = u * (2.0 - u);
        worst = worst.max((v - c).abs());
        let _ = writeln!(csv, "{x},{},{v:.17e},{c:.17e}", p.y);
    }
    let spot = scalefomin_rhs(0.5 * p.y, p.y).context("scalefomin")?;
    let mut rec = ResultRecord::new(echo(&p));
    rec.insert("max_error", Quantity::exact(worst).against(0.0, Tolerance::Absolute { value: 1e-12 }))
        .insert("ratio_at_half", Quantity::exact(spot).against(0.75, Tolerance::Absolute { value: 1e-12 }));
    rec.judge();
    output(rec, vec![("scalefomin.csv", csv)])
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct AvoidParams {
    x: f64,
    y: f64,
    geometric: usize,
    dt: f64,
    t_ref: f64,
    horizon: f64,
    trace_horizon: f64,
    eps_factor: f64,
    excursion_dt: f64,
}

impl Default for AvoidParams {
    fn default() -> Self {
        let c = AvoidanceConfig::default();
        Self {
            x: 0.5,
            y: 1.0,
            geometric: 0,
            dt: c.functional.dt,
            t_ref: c.functional.t_ref,
            horizon: c.functional.horizon,
            trace_horizon: c.trace.horizon,
            eps_factor: c.eps_factor,
            excursion_dt: c.excursion_dt,
        }
    }
}

fn sle_avoid(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let p: AvoidParams = spec.params()?;
    let n = spec.replicas_or(100_000);
    let base = AvoidanceConfig::default();
    let config = AvoidanceConfig {
        functional: HstarConfig {
            dt: p.dt,
            t_ref: p.t_ref,
            horizon: p.horizon,
        },
        trace: HstarConfig {
            horizon: p.trace_horizon,
            ..base.trace
        },
        excursion_dt: p.excursion_dt,
        eps_factor: p.eps_factor,
    };
    let est = avoidance_mc(p.x, p.y, n, p.geometric, &config, spec.seed).context("avoidance")?;
    let mut rec = ResultRecord::new(echo(&p));
    rec.insert(
        "functional",
        Quantity::stochastic(est.functional.estimate).against(est.exact, Tolerance::StdErrors { k: 3.0, relative_floor: 0.01 }),
    )
    .insert("exact", Quantity::exact(est.exact))
    .insert("horizon_gap", Quantity::exact(est.functional.horizon_gap))
    .insert("horizon_drift", Quantity::exact(est.functional.horizon_drift));
    rec.estimators.push(est.functional.record("avoidance_functional"));
    let mut artifacts = Vec::new();
    if let Some(g) = &est.geometric {
        rec.insert(
            "geometric",
            Quantity::stochastic(g.estimate).against(est.exact, Tolerance::Absolute { value: 0.03 }),
        )
        .insert("geometric_half_eps", Quantity::stochastic(g.half_eps))
        .insert("geometric_double_eps", Quantity::stochastic(g.double_eps))
        .insert("eps", Quantity::exact(g.eps))
        .insert("incomplete_excursions", Quantity::exact(g.incomplete_excursions as f64));
        rec.estimators.push(EstimatorRecord {
            estimator: "avoidance_geometric".into(),
            n: g.estimate.n,
            dt: config.trace.dt,
            t: config.trace.horizon * p.y * p.y,
            value: g.estimate.value,
            std_error: g.estimate.std_error,
            swallowed_fraction: 0.0,
            seed: spec.seed ^ 0x6765_6f6d,
        });
        let mut rng = rng_from_seed(spec.seed ^ 0x7361_6d70);
        let y2 = p.y * p.y;
        let driving = sle_driving(2.0, p.trace_horizon.min(4.0) * y2, config.trace.dt * y2, &mut rng).context("trace")?;
        let trace = trace_from_driving(&driving).context("trace")?;
        let exc = sample_brownian_excursion(p.x, p.y, p.excursion_dt, &ExcursionConfig::default(), &mut rng)
            .context("excursion")?;
        artifacts.push(("sample_trace.csv", trace.to_csv()));
        artifacts.push(("sample_excursion.csv", exc.to_csv()));
    }
    rec.n_samples = Some(n);
    rec.judge();
    output(rec, artifacts)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct HstarParams {
    b: f64,
    x: f64,
    y: f64,
    dt: f64,
    t_ref: f64,
    horizon: f64,
}

impl Default for HstarParams {
    fn default() -> Self {
        let c = HstarConfig::default();
        Self {
            b: 1.0,
            x: 0.5,
            y: 1.0,
            dt: c.dt,
            t_ref: c.t_ref,
            horizon: c.horizon,
        }
    }
}

fn hstar(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let p: HstarParams = spec.params()?;
    let n = spec.replicas_or(100_000);
    let config = HstarConfig {
        dt: p.dt,
        t_ref: p.t_ref,
        horizon: p.horizon,
    };
    let est = estimate_hstar(p.b, p.x, p.y, &config, n, spec.seed).context("hstar")?;
    let exact = phi(p.b, p.x / p.y).context("phi")?;
    let mut rec = ResultRecord::new(echo(&p));
    rec.insert(
        "normalised_hstar",
        Quantity::stochastic(est.estimate).against(exact, Tolerance::StdErrors { k: 3.0, relative_floor: 0.01 }),
    )
    .insert("horizon_gap", Quantity::exact(est.horizon_gap))
    .insert("horizon_drift", Quantity::exact(est.horizon_drift))
    .insert("swallowed_fraction", Quantity::exact(est.swallowed_fraction));
    rec.estimators.push(est.record("hstar"));
    rec.n_samples = Some(n);
    rec.judge();
    output(rec, vec![])
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct MartingaleParams {
    kappa: f64,
    x: f64,
    t: f64,
    dt: f64,
    z: [f64; 2],
}

impl Default for MartingaleParams {
    fn default() -> Self {
        Self {
            kappa: 2.0,
            x: 1.0,
            t: 1.0,
            dt: 1e-3,
            z: [1.0, 1.5],
        }
    }
}

fn martingale(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let p: MartingaleParams = spec.params()?;
    let n = spec.replicas_or(10_000);
    let real = martingale_check(p.kappa, p.x, p.t, p.dt, n, spec.seed).context("martingale")?;
    let z = Complex::new(p.z[0], p.z[1]);
    let cplx = martingale_check_complex(p.kappa, z, p.t, p.dt, n, spec.seed).context("martingale")?;
    let tol = if p.kappa == 2.0 {
        Tolerance::StdErrors { k: 3.0, relative_floor: 0.0 }
    } else {
        Tolerance::Below { k: 3.0 }
    };
    let mut rec = ResultRecord::new(echo(&p));
    rec.insert("mean_derivative", Quantity::stochastic(real.estimate).against(1.0, tol))
        .insert("swallowed_fraction", Quantity::exact(real.swallowed_fraction))
        .insert("flow_re", Quantity::stochastic(cplx.re))
        .insert("flow_im", Quantity::stochastic(cplx.im))
        .insert("flow_initial_re", Quantity::exact(cplx.initial.re))
        .insert("flow_initial_im", Quantity::exact(cplx.initial.im))
        .insert("flow_max_z_score", Quantity::exact(cplx.max_z_score()));
    rec.notes.push(
        "mean_derivative is E[g_T'(x)] at real x; flow_* is E[a/(g_T(z) - U_T)] at complex z against a/z".into(),
    );
    rec.estimators.push(real.record());
    rec.n_samples = Some(n);
    rec.judge();
    output(rec, vec![])
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct LoopLemmaParams {
    domain: DomainParam,
    #[serde(skip_serializing_if = "Option::is_none")]
    root: Option<[i64; 2]>,
    l_max: usize,
}

impl Default for LoopLemmaParams {
    fn default() -> Self {
        Self {
            domain: DomainParam::Points(vec![[0, 0], [1, 0]]),
            root: None,
            l_max: 16,
        }
    }
}

fn loop_lemma(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let p: LoopLemmaParams = spec.params()?;
    let d = spec.domain(&p.domain)?;
    let root = p.root.map(point).unwrap_or(d.interior()[0]);
    let n = spec.replicas_or(1_000_000);
    let law = concatenated_loop_law(&d, root, n, p.l_max, &mut rng_from_seed(spec.seed)).context("loop law")?;
    let total: f64 = loop_measure_total(&d).context("loop measure")?;
    let series = loop_measure_series::<f64>(&d, p.l_max).context("loop series")?;
    let mut rec = ResultRecord::new(echo(&p));
    rec.insert(
        "total_variation",
        Quantity::exact(law.total_variation()).against(0.0, Tolerance::Absolute { value: 0.01 }),
    )
    .insert("tail_bound", Quantity::exact(law.tail_bound).against(0.0, Tolerance::Absolute { value: 1e-6 }))
    .insert(
        "log_det_total",
        Quantity::exact(total).against(series.partial_sum, Tolerance::Absolute { value: series.tail_bound }),
    )
    .insert("series_total", Quantity::exact(series.partial_sum))
    .insert("escape_probability", Quantity::exact(law.escape_probability));
    rec.n_samples = Some(n);
    rec.judge();
    output(rec, vec![("loop_law.csv", law.to_csv())])
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SoupParams {
    domain: DomainParam,
    intensity: f64,
    l_max: usize,
}

impl Default for SoupParams {
    fn default() -> Self {
        Self {
            domain: DomainParam::Rectangle([0, 2, 0, 2]),
            intensity: 1.0,
            l_max: 12,
        }
    }
}

fn loop_soup(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let p: SoupParams = spec.params()?;
    let d = spec.domain(&p.domain)?;
    let soup = sample_loop_soup(&d, p.intensity, p.l_max, &mut rng_from_seed(spec.seed)).context("loop soup")?;
    let mut rec = ResultRecord::new(echo(&p));
    rec.insert("loops", Quantity::exact(soup.len() as f64))
        .insert("tail_mass", Quantity::exact(soup.tail_mass));
    output(rec, vec![("soup.jsonl", soup.to_json_lines())])
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ThetaParams {
    domain: DomainParam,
    #[serde(skip_serializing_if = "Option::is_none")]
    z: Option<[i64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w: Option<[i64; 2]>,
}

impl Default for ThetaParams {
    fn default() -> Self {
        Self {
            domain: DomainParam::Rectangle([0, 2, 0, 2]),
            z: None,
            w: None,
        }
    }
}

fn theta_identity(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let p: ThetaParams = spec.params()?;
    let d = spec.domain(&p.domain)?;
    let b = d.boundary();
    let z = p.z.map(point).unwrap_or(b[0]);
    let w = p.w.map(point).unwrap_or(b[b.len() - 1]);
    let saes = enumerate_saes(&d, z, w, default_len_cap(&d), spec.budget).context("enumeration")?;
    let mut csv = String::from("path,length,log_theta,m_star,rel_error\n");
    let mut worst = 0.0f64;
    for eta in &saes {
        let lt: f64 = log_theta(&d, eta).context("theta")?;
        let m: f64 = m_star(&d, eta.inner()).context("m_star")?;
        let err = ((lt - m).exp() - 1.0).abs();
        worst = worst.max(err);
        let _ = writeln!(csv, "{},{},{lt:.17e},{m:.17e},{err:.3e}", eta.walk().key(), eta.len());
    }
    let n = spec.replicas_or(1000);
    let sampler = ExcursionSampler::<f64>::new(&d, z, w).context("sampler")?;
    let catalog = LoopCatalog::new(&d, 12).context("loop catalog")?;
    let mut broken = 0usize;
    for i in 0..n {
        let mut rng = replica_rng(spec.seed, i as u64);
        let eta = SelfAvoidingExcursion::new(loop_erase(&sampler.sample(&mut rng)), &d).context("erasure")?;
        let soup = catalog.sample(1.0, &mut rng);
        let walk = attach_loops(&eta, &soup, &mut rng);
        if !walk.is_excursion_in(&d) || loop_erase(&walk).points() != eta.points() {
            broken += 1;
        }
    }
    let mut rec = ResultRecord::new(echo(&p));
    rec.insert("max_rel_error", Quantity::exact(worst).against(0.0, Tolerance::Absolute { value: 1e-10 }))
        .insert("paths", Quantity::exact(saes.len() as f64))
        .insert("broken_round_trips", Quantity::exact(broken as f64).against(0.0, Tolerance::Absolute { value: 0.0 }));
    rec.n_samples = Some(n);
    rec.judge();
    output(rec, vec![("theta.csv", csv)])
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct LambdaParams {
    domain: DomainParam,
    #[serde(skip_serializing_if = "Option::is_none")]
    z: Option<[i64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w: Option<[i64; 2]>,
    r: f64,
    lambda: f64,
    scan_widths: Vec<usize>,
    scan_r: Vec<f64>,
}

impl Default for LambdaParams {
    fn default() -> Self {
        Self {
            domain: DomainParam::Rectangle([0, 2, 0, 2]),
            z: None,
            w: None,
            r: 4f64.ln(),
            lambda: 1.0,
            scan_widths: vec![1, 2, 3, 4],
            scan_r: (0..=16).map(|k| 1.0 + 0.05 * k as f64).collect(),
        }
    }
}

fn lambda_saw(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let p: LambdaParams = spec.params()?;
    let d = spec.domain(&p.domain)?;
    let [c1, _, _, c4] = corner_points(&d);
    let z = p.z.map(point).unwrap_or(c1);
    let w = p.w.map(point).unwrap_or(c4);
    let params = SawParams::new(p.r, p.lambda);
    let profile = length_profile::<f64>(&d, z, w, p.lambda, spec.budget).context("lambda-saw mass")?;
    let mass = profile.mass(p.r);
    let mut rec = ResultRecord::new(echo(&p));
    let loop_erased = p.lambda == 1.0 && ((-p.r).exp() - 0.25).abs() < 1e-15;
    if loop_erased {
        let h: f64 = excursion_kernel(&d, z, w).context("excursion kernel")?;
        let mut worst = 0.0f64;
        for eta in enumerate_saes(&d, z, w, default_len_cap(&d), spec.budget).context("enumeration")? {
            let s: f64 = saw_weight(&d, &eta, params).context("saw weight")?;
            let l: f64 = lerw_weight_exact(&d, &eta).context("lerw weight")?;
            worst = worst.max((s / l - 1.0).abs());
        }
        rec.insert("total_mass", Quantity::exact(mass).against(h, Tolerance::Relative { value: 1e-9 }))
            .insert("max_path_rel_error", Quantity::exact(worst).against(0.0, Tolerance::Absolute { value: 1e-12 }));
    } else {
        rec.insert("total_mass", Quantity::exact(mass));
    }
    let mut artifacts = Vec::new();
    if !p.scan_widths.is_empty() && !p.scan_r.is_empty() {
        let scan = critical_r_scan(p.lambda, &p.scan_widths, &p.scan_r, spec.budget).context("critical-r scan")?;
        let mut slopes = String::from("lambda,r,slope\n");
        for (r, s) in &scan.slopes {
            let _ = writeln!(slopes, "{},{r},{s:.12e}", p.lambda);
        }
        if let Some(rs) = scan.r_star {
            rec.insert("scan_r_star", Quantity::exact(rs));
        }
        rec.notes.push("scan outputs are exploratory small-N estimates with no tolerance".into());
        artifacts.push(("scan.csv", scan.to_csv()));
        artifacts.push(("slopes.csv", slopes));
    }
    if loop_erased {
        rec.judge();
    }
    output(rec, artifacts)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct AsymptoticsParams {
    n: Vec<i64>,
}

impl Default for AsymptoticsParams {
    fn default() -> Self {
        Self { n: vec![10, 20, 40] }
    }
}

fn lattice_asymptotics(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let p: AsymptoticsParams = spec.params()?;
    if p.n.iter().any(|&n| n <= 0) {
        return Err(CliError::Config("n values must be positive".into()));
    }
    let mut csv = String::from("N,h_exact,continuum,rel_deviation,bound\n");
    let mut devs = Vec::new();
    for &n in &p.n {
        let h: f64 = halfplane_excursion_kernel(0, n).context("half-plane kernel")?;
        let c = 1.0 / (4.0 * std::f64::consts::PI * (n * n) as f64);
        let dev = (h / c - 1.0).abs();
        let _ = writeln!(csv, "{n},{h:.17e},{c:.17e},{dev:.6e},{}", 10.0 / n as f64);
        devs.push((n, dev));
    }
    let scaled = devs.iter().map(|&(n, d)| d * n as f64 / 10.0).fold(0.0, f64::max);
    let decreasing = devs.windows(2).all(|w| w[1].1 < w[0].1);
    let mut rec = ResultRecord::new(echo(&p));
    rec.insert("max_deviation_over_bound", Quantity::exact(scaled).against(0.0, Tolerance::Absolute { value: 1.0 }))
        .insert(
            "decreasing",
            Quantity::exact(f64::from(u8::from(decreasing))).against(1.0, Tolerance::Absolute { value: 0.0 }),
        );
    rec.judge();
    output(rec, vec![("asymptotics.csv", csv)])
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct TraceParams {
    kappa: f64,
    t: f64,
    dt: f64,
}

impl Default for TraceParams {
    fn default() -> Self {
        Self { kappa: 2.0, t: 1.0, dt: 1e-3 }
    }
}

fn sle_trace(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let p: TraceParams = spec.params()?;
    let driving = sle_driving(p.kappa, p.t, p.dt, &mut rng_from_seed(spec.seed)).context("driving")?;
    let trace = trace_from_driving(&driving).context("trace")?;
    let mut rec = ResultRecord::new(echo(&p));
    rec.insert("points", Quantity::exact(trace.len() as f64))
        .insert("median_step", Quantity::exact(trace.median_step()))
        .insert("far_field_capacity", Quantity::exact(driving.far_field_capacity(1e3, 64)));
    output(rec, vec![("driving.csv", driving.to_csv()), ("trace.csv", trace.to_csv())])
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ExcursionParams {
    x: f64,
    y: f64,
    dt: f64,
}

impl Default for ExcursionParams {
    fn default() -> Self {
        Self { x: 0.0, y: 1.0, dt: 1e-3 }
    }
}

fn brownian_excursion(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let p: ExcursionParams = spec.params()?;
    let path = sample_brownian_excursion(p.x, p.y, p.dt, &ExcursionConfig::default(), &mut rng_from_seed(spec.seed))
        .context("excursion")?;
    let mut rec = ResultRecord::new(echo(&p));
    rec.insert("points", Quantity::exact(path.len() as f64))
        .insert("max_height", Quantity::exact(path.max_height()))
        .insert("complete", Quantity::exact(f64::from(u8::from(path.complete))));
    output(rec, vec![("excursion.csv", path.to_csv())])
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RhoParams {
    kappa: f64,
    x0: f64,
    y: f64,
    t: f64,
    dt: f64,
}

impl Default for RhoParams {
    fn default() -> Self {
        Self {
            kappa: 2.0,
            x0: 0.0,
            y: 1.0,
            t: 10.0,
            dt: 1e-4,
        }
    }
}

fn kappa_rho(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let p: RhoParams = spec.params()?;
    let n = spec.replicas_or(100);
    let mut lifetimes = RunningStats::new();
    let mut sample = None;
    for i in 0..n {
        let mut rng = replica_rng(spec.seed, i as u64);
        let path = sle_kappa_rho(p.kappa, p.x0, KappaRhoTarget::Finite(p.y), p.t, p.dt, &mut rng).context("kappa-rho")?;
        if let Some(l) = path.lifetime {
            lifetimes.push(l);
        }
        if i == 0 {
            sample = Some(path);
        }
    }
    let mut rec = ResultRecord::new(echo(&p));
    rec.insert("finished_fraction", Quantity::exact(lifetimes.count() as f64 / n as f64));
    if lifetimes.count() > 0 {
        rec.insert("mean_lifetime", Quantity::stochastic(lifetimes.estimate()));
    }
    rec.n_samples = Some(n);
    output(rec, vec![("kappa_rho.csv", sample.map(|s| s.to_csv()).unwrap_or_default())])
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct TwoPathParams {
    kappa: f64,
    x0: f64,
    x1: f64,
    t: f64,
    dt: f64,
}

impl Default for TwoPathParams {
    fn default() -> Self {
        Self {
            kappa: 2.0,
            x0: 0.0,
            x1: 1.0,
            t: 1.0,
            dt: 1e-3,
        }
    }
}

fn two_path(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let p: TwoPathParams = spec.params()?;
    let run = two_path_simultaneous(p.kappa, p.x0, p.x1, p.t, p.dt, &mut rng_from_seed(spec.seed)).context("two paths")?;
    let mut rec = ResultRecord::new(echo(&p));
    rec.insert("far_field_capacity", Quantity::exact(run.far_field_capacity(1e3, 64)))
        .insert("expected_capacity", Quantity::exact(2.0 * run.a * p.t))
        .insert("final_separation", Quantity::exact(run.separation()))
        .insert("collided", Quantity::exact(f64::from(u8::from(run.collided))));
    output(rec, vec![("two_path.csv", run.to_csv())])
}
