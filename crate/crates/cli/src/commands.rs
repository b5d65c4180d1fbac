use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use sasakit::cone::{reeb_cone_contains_f64, FaceFailure};
use sasakit::cy::{kernel_lattice, CalabiYauData};
use sasakit::families::{self, FamilyId};
use sasakit::json::{bigint_to_f64, DiagramFile};
use sasakit::potentials::{
    dual_hessian_fd, geodesic_equation_residual, inverse_legendre, reeb_invariance_residual,
    Perturbation, SymplecticPotential,
};
use sasakit::topology::topology_report;
use sasakit::volume::{
    canonical_start, minimize_volume_from, minimize_volume_projected_gradient, weighted_start,
    ConeTriangulation, ReebMinimum,
};
use sasakit::{compute_gamma, is_good, normalize_height, validate_diagram, ToricDiagram};

use crate::error::{CliError, NO_CY_MESSAGE};
use crate::report::{
    round_sig, ser_f64, ser_f64_vec, small_rational, CrossCheck, CyStage, GridStage, InputEcho,
    RayStage, ReebStage, RunReport, StartResult, ValidationStage, FLOAT_PRECISION,
};
use crate::svg::polygon_svg;

const DEFAULT_SEED: u64 = 0x5a5a_2007;
const AGREEMENT_TOL: f64 = 1e-6;
const RAY_SAMPLES: usize = 32;

pub fn seed() -> u64 {
    let Ok(raw) = std::env::var("SASAKIT_SEED") else {
        return DEFAULT_SEED;
    };
    let raw = raw.trim();
    let parsed = match raw.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => raw.parse(),
    };
    parsed.unwrap_or_else(|_| {
        log::warn!("ignoring unparsable SASAKIT_SEED {raw:?}");
        DEFAULT_SEED
    })
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed());
    r.set_stream(stream);
    r
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

fn load(path: &Path, report: &mut RunReport) -> Result<(DiagramFile, ToricDiagram), CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let file = DiagramFile::from_json_str(&text)?;
    report.input = Some(InputEcho {
        path: path.display().to_string(),
        rank: file.rank,
        normals: file.normals.clone(),
        gamma: file.gamma.clone(),
        height: file.height.clone(),
    });
    match validate_diagram(file.normals.clone()) {
        Ok(d) => {
            report.validation = Some(ValidationStage {
                valid: true,
                error: None,
                rays: d.rays().to_vec(),
                cyclic_order: d.cyclic_order().map(<[usize]>::to_vec),
            });
            Ok((file, d))
        }
        Err(e) => {
            report.validation = Some(ValidationStage {
                valid: false,
                error: Some(e.to_string()),
                rays: Vec::new(),
                cyclic_order: None,
            });
            Err(e.into())
        }
    }
}

fn check_supplied(file: &DiagramFile, cy: Option<&CalabiYauData>) -> Result<(), CliError> {
    if let Some(g) = &file.gamma {
        if cy.map(|c| &c.gamma) != Some(g) {
            return Err(CliError::Usage(
                "supplied gamma does not satisfy <gamma, lambda_i> = -1 for every normal".into(),
            ));
        }
    }
    if let Some(h) = &file.height {
        if cy.map(|c| &c.height) != Some(h) {
            return Err(CliError::Usage(format!(
                "supplied height {h} differs from the computed height"
            )));
        }
    }
    Ok(())
}

fn describe_failure(f: &FaceFailure) -> String {
    match f {
        FaceFailure::Dependent { normals } => {
            format!("face cut by normals {normals:?} has linearly dependent normals")
        }
        FaceFailure::NotSaturated {
            normals,
            invariant_factors,
        } => {
            let factors: Vec<String> = invariant_factors.iter().map(|x| x.to_string()).collect();
            format!(
                "face cut by normals {normals:?} is not saturated (invariant factors [{}])",
                factors.join(", ")
            )
        }
    }
}

fn goodness(d: &ToricDiagram, report: &mut RunReport) -> Result<(), CliError> {
    let verdict = is_good(d)?;
    let failure = verdict.failure.as_ref().map(describe_failure);
    report.goodness = Some(verdict);
    match failure {
        Some(msg) => Err(CliError::NotGood(msg)),
        None => Ok(()),
    }
}

pub fn check(path: &Path, report: &mut RunReport) -> Result<(), CliError> {
    let (file, d) = load(path, report)?;
    check_supplied(&file, compute_gamma(&d).as_ref())?;
    goodness(&d, report)
}

#[derive(Debug, Default)]
pub struct AnalyzeOptions {
    pub cy: bool,
    pub topo: bool,
    pub reeb: bool,
    pub potential_grid: Option<usize>,
    pub grid_out: Option<PathBuf>,
    pub rays: Vec<Vec<f64>>,
    pub ray_out: Option<PathBuf>,
    pub emit_svg: Option<PathBuf>,
    pub timing: bool,
    pub starts: usize,
}

struct Timer {
    enabled: bool,
    laps: BTreeMap<&'static str, f64>,
    last: Instant,
}

impl Timer {
    fn new(enabled: bool) -> Self {
        Self {
            enabled,
            laps: BTreeMap::new(),
            last: Instant::now(),
        }
    }

    fn lap(&mut self, stage: &'static str) {
        let now = Instant::now();
        if self.enabled {
            let ms = (now - self.last).as_secs_f64() * 1e3;
            self.laps.insert(stage, ms);
        }
        self.last = now;
    }

    fn finish(self) -> Option<BTreeMap<&'static str, f64>> {
        self.enabled
            .then(|| self.laps.into_iter().map(|(k, v)| (k, round_sig(v))).collect())
    }
}

pub fn analyze(path: &Path, opts: &AnalyzeOptions, report: &mut RunReport) -> Result<(), CliError> {
    let mut timer = Timer::new(opts.timing);
    let result = analyze_stages(path, opts, report, &mut timer);
    report.timing_ms = timer.finish();
    result
}

fn analyze_stages(
    path: &Path,
    opts: &AnalyzeOptions,
    report: &mut RunReport,
    timer: &mut Timer,
) -> Result<(), CliError> {
    let (file, d) = load(path, report)?;
    timer.lap("validation");
    goodness(&d, report)?;
    timer.lap("goodness");
    let cy = compute_gamma(&d);
    check_supplied(&file, cy.as_ref())?;

    if opts.cy {
        report.cy = Some(cy_stage(&d, cy.as_ref())?);
        timer.lap("cy");
    }
    if opts.topo {
        report.topology = Some(topology_report(&d, cy.as_ref()));
        timer.lap("topology");
    }
    let mut minimum = None;
    if opts.reeb {
        let cy = cy.as_ref().ok_or(CliError::NoCalabiYau)?;
        let stage = reeb_stage(&d, cy, opts.starts)?;
        minimum = Some(stage.xi.clone());
        report.reeb = Some(stage);
        timer.lap("reeb");
    }
    if let Some(n) = opts.potential_grid {
        let out = opts
            .grid_out
            .as_deref()
            .ok_or_else(|| CliError::Usage("--potential-grid needs --grid-out".into()))?;
        report.potential_grid = Some(potential_grid(&d, minimum.as_deref(), n, out)?);
        timer.lap("potential_grid");
    }
    if !opts.rays.is_empty() {
        let xi = minimum
            .as_deref()
            .ok_or_else(|| CliError::Usage("--ray needs --reeb".into()))?;
        let out = opts
            .ray_out
            .as_deref()
            .ok_or_else(|| CliError::Usage("--ray needs --ray-out".into()))?;
        let cy = cy.as_ref().expect("reeb stage ran");
        report.volume_rays = Some(volume_rays(&d, cy, xi, &opts.rays, out)?);
        timer.lap("volume_rays");
    }
    if let Some(out) = &opts.emit_svg {
        match svg_points(&d, cy.as_ref())? {
            Some(points) => {
                write_file(out, &polygon_svg(&points))?;
                report.svg = Some(out.display().to_string());
            }
            None => log::warn!("--emit-svg skipped: needs a rank-3 diagram with gamma"),
        }
        timer.lap("svg");
    }
    Ok(())
}

fn cy_stage(d: &ToricDiagram, cy: Option<&CalabiYauData>) -> Result<CyStage, CliError> {
    let Some(cy) = cy else {
        return Ok(CyStage {
            present: false,
            message: Some(NO_CY_MESSAGE.to_string()),
            gamma: None,
            height: None,
            normalizer: None,
            normalized_normals: None,
            kernel: None,
        });
    };
    let norm = normalize_height(d, cy)?;
    let kernel = kernel_lattice(&norm.diagram, cy)?;
    Ok(CyStage {
        present: true,
        message: None,
        gamma: Some(cy.gamma.clone()),
        height: Some(cy.height.clone()),
        normalizer: Some(norm.matrix),
        normalized_normals: Some(norm.diagram.normals().to_vec()),
        kernel: Some(kernel),
    })
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn rational_label(x: f64) -> Option<String> {
    small_rational(x, 1000, 1e-9 * x.abs().max(1.0)).map(|(p, q)| {
        if q == 1 {
            p.to_string()
        } else {
            format!("{p}/{q}")
        }
    })
}

fn reeb_stage(d: &ToricDiagram, cy: &CalabiYauData, starts: usize) -> Result<ReebStage, CliError> {
    let start = canonical_start(d);
    let best: ReebMinimum = minimize_volume_from(d, cy, &start)?;
    let other = minimize_volume_projected_gradient(d, cy, &start)?;
    let gap = max_gap(&best.xi, &other.xi);
    if gap > AGREEMENT_TOL {
        return Err(CliError::Numerical(format!(
            "Newton and projected-gradient minimizers differ by {gap:e}"
        )));
    }

    let mut r = rng(1);
    let weights: Vec<Vec<f64>> = (0..starts)
        .map(|_| (0..d.len()).map(|_| r.gen_range(0.2..5.0)).collect())
        .collect();
    let results: Vec<Result<StartResult, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = weights
            .iter()
            .enumerate()
            .map(|(index, w)| {
                scope.spawn(move || {
                    let start = weighted_start(d, w);
                    let m = minimize_volume_from(d, cy, &start)?;
                    Ok(StartResult {
                        index,
                        start,
                        xi: m.xi,
                        volume: m.volume,
                        iterations: m.iterations,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("minimizer thread panicked"))
            .collect()
    });
    let mut start_results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    start_results.sort_by_key(|s| s.index);
    let spread = (!start_results.is_empty()).then(|| {
        start_results
            .iter()
            .map(|s| max_gap(&s.xi, &best.xi))
            .fold(0.0, f64::max)
    });
    if let Some(s) = spread.filter(|&s| s > AGREEMENT_TOL) {
        return Err(CliError::Numerical(format!(
            "minimizers from different starts differ by {s:e}"
        )));
    }

    let rational_components: Vec<Option<String>> = best.xi.iter().map(|&x| rational_label(x)).collect();
    let quasi_regular = rational_components.iter().all(Option::is_some);
    Ok(ReebStage {
        volume: best.volume,
        gradient_norm: best.gradient_norm,
        iterations: best.iterations,
        rational_components,
        quasi_regular,
        cross_check: CrossCheck {
            method: "projected_gradient",
            xi: other.xi,
            volume: other.volume,
            max_component_gap: gap,
        },
        starts: start_results,
        start_spread: spread,
        xi: best.xi,
    })
}

fn ray_vectors(d: &ToricDiagram) -> Vec<Vec<f64>> {
    d.rays()
        .iter()
        .map(|r| r.generator.iter().map(bigint_to_f64).collect())
        .collect()
}

fn csv_number(x: f64) -> String {
    format!("{:?}", round_sig(x))
}

fn potential_grid(d: &ToricDiagram, xi: Option<&[f64]>, n: usize, out: &Path) -> Result<GridStage, CliError> {
    let m = d.rank();
    let (pot, name) = match xi {
        Some(xi) => (SymplecticPotential::canonical_xi(d, xi)?, "canonical_xi"),
        None => (SymplecticPotential::canonical(d), "canonical"),
    };
    let rays = ray_vectors(d);
    let mut r = rng(2);

    let mut csv = String::new();
    let mut header: Vec<String> = (1..=m).map(|i| format!("y{i}")).collect();
    header.push("G".into());
    header.extend((1..=m).map(|i| format!("x{i}")));
    header.push("F".into());
    header.push("roundtrip_residual".into());
    header.push("hessian_inverse_residual".into());
    if xi.is_some() {
        header.push("identity_residual".into());
    }
    writeln!(csv, "{}", header.join(",")).unwrap();

    let (mut max_rt, mut max_hi, mut max_id) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..n {
        let mut y = vec![0.0; m];
        for ray in &rays {
            let c: f64 = r.gen_range(0.25..2.0);
            for (a, b) in y.iter_mut().zip(ray) {
                *a += c * b;
            }
        }
        let s = pot.eval(&y)?;
        let back = inverse_legendre(&pot, &s.grad, None)?;
        let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rt = max_gap(&back, &y) / y_norm;
        let fxx = dual_hessian_fd(&pot, &y, 1e-4)?;
        let hi = (&fxx * &s.hess - DMatrix::identity(m, m)).amax();
        max_rt = max_rt.max(rt);
        max_hi = max_hi.max(hi);

        let mut row: Vec<String> = y.iter().map(|&v| csv_number(v)).collect();
        row.push(csv_number(s.g));
        row.extend(s.grad.iter().map(|&v| csv_number(v)));
        row.push(csv_number(s.f));
        row.push(csv_number(rt));
        row.push(csv_number(hi));
        if let Some(xi) = xi {
            let half_l = 0.5 * DVector::from_column_slice(xi).dot(&DVector::from_column_slice(&y));
            let id = (s.f - half_l).abs() / half_l.abs();
            max_id = max_id.max(id);
            row.push(csv_number(id));
        }
        writeln!(csv, "{}", row.join(",")).unwrap();
    }
    write_file(out, &csv)?;
    Ok(GridStage {
        path: out.display().to_string(),
        rows: n,
        potential: name,
        max_roundtrip_residual: max_rt,
        max_hessian_inverse_residual: max_hi,
        max_identity_residual: xi.map(|_| max_id),
    })
}

fn volume_rays(
    d: &ToricDiagram,
    cy: &CalabiYauData,
    xi: &[f64],
    dirs: &[Vec<f64>],
    out: &Path,
) -> Result<RayStage, CliError> {
    let m = d.rank();
    let gamma = DVector::from_vec(cy.gamma_f64());
    let tri = ConeTriangulation::new(d);
    let rays = ray_vectors(d);
    let base = DVector::from_column_slice(xi);

    let mut csv = String::new();
    let mut header = vec!["ray".to_string(), "t".to_string()];
    header.extend((1..=m).map(|i| format!("xi{i}")));
    header.push("volume".into());
    writeln!(csv, "{}", header.join(",")).unwrap();

    for (k, dir) in dirs.iter().enumerate() {
        if dir.len() != m {
            return Err(CliError::Usage(format!(
                "ray {k} has {} components, diagram rank is {m}",
                dir.len()
            )));
        }
        // keep ⟨γ, ξ⟩ fixed along the ray
        let v = DVector::from_column_slice(dir);
        let v = &v - &gamma * (gamma.dot(&v) / gamma.norm_squared());
        if v.norm() < 1e-12 {
            return Err(CliError::Usage(format!("ray {k} is normal to the slice")));
        }
        let t_max = rays
            .iter()
            .filter_map(|r| {
                let r = DVector::from_column_slice(r);
                let rate = v.dot(&r);
                (rate < 0.0).then(|| -base.dot(&r) / rate)
            })
            .fold(f64::INFINITY, f64::min);
        if !t_max.is_finite() {
            return Err(CliError::Numerical(format!("ray {k} never leaves the Reeb cone")));
        }
        for i in 0..RAY_SAMPLES {
            let t = 0.97 * t_max * i as f64 / (RAY_SAMPLES - 1) as f64;
            let p = &base + &v * t;
            let p = p.as_slice();
            debug_assert!(reeb_cone_contains_f64(d, p));
            let vol = tri.volume(p)?;
            let mut row = vec![k.to_string(), csv_number(t)];
            row.extend(p.iter().map(|&x| csv_number(x)));
            row.push(csv_number(vol));
            writeln!(csv, "{}", row.join(",")).unwrap();
        }
    }
    write_file(out, &csv)?;
    Ok(RayStage {
        path: out.display().to_string(),
        rays: dirs.len(),
        samples_per_ray: RAY_SAMPLES,
    })
}

fn svg_points(d: &ToricDiagram, cy: Option<&CalabiYauData>) -> Result<Option<Vec<(BigInt, BigInt)>>, CliError> {
    let Some(cy) = cy else { return Ok(None) };
    if d.rank() != 3 {
        return Ok(None);
    }
    let norm = normalize_height(d, cy)?;
    let nd = &norm.diagram;
    let order = nd.cyclic_order().expect("rank-3 diagrams have a cyclic order");
    Ok(Some(
        order
            .iter()
            .map(|&i| (nd.normal(i)[1].clone(), nd.normal(i)[2].clone()))
            .collect(),
    ))
}

pub struct FamilyParams {
    pub l: Option<i64>,
    pub r: Option<i64>,
    pub s: i64,
}

fn required(name: &str, v: Option<i64>, family: FamilyId) -> Result<i64, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("family {family} needs --{name}")))
}

pub fn family(id: FamilyId, p: &FamilyParams) -> Result<String, CliError> {
    let d = match id {
        FamilyId::Lens => families::lens(required("l", p.l, id)?)?,
        FamilyId::NonCy => {
            let normals = families::non_cy_normals(required("l", p.l, id)?)?;
            let file = DiagramFile {
                rank: 3,
                normals,
                gamma: None,
                height: None,
            };
            return Ok(file.to_json_string() + "\n");
        }
        FamilyId::Z5Lens => families::z5_lens(),
        FamilyId::Main4Even => families::main4_even(required("r", p.r, id)?, p.s)?,
        FamilyId::Main4Odd => families::main4_odd(required("r", p.r, id)?, p.s)?,
    };
    let cy = compute_gamma(&d);
    Ok(DiagramFile::from_diagram(&d, cy.as_ref()).to_json_string() + "\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PairKind {
    /// G1 = G0 + <c, y>
    Linear,
    /// G1 = G0 + y1 y2 / (y1 + ... + yn)
    Ratio,
    /// G1 = G0 + y1^2
    Square,
    /// G1 = the canonical potential for xi = sum of normals + first normal
    Xi,
}

pub const GEODESIC_STEPS: [f64; 3] = [4e-3, 2e-3, 1e-3];
const RESIDUAL_TOL: f64 = 1e-4;
const MIN_ORDER: f64 = 1.8;
// below this the residual is roundoff and no order can be read off
const NOISE_FLOOR: f64 = 1e-9;

#[derive(Debug, Serialize)]
pub struct GeodesicPoint {
    #[serde(serialize_with = "ser_f64_vec")]
    pub y: Vec<f64>,
    #[serde(serialize_with = "ser_f64_vec")]
    pub residuals: Vec<f64>,
    pub order: Option<Rounded>,
    pub reeb_invariance_residual: Rounded,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Rounded(#[serde(serialize_with = "ser_f64")] pub f64);

#[derive(Debug, Serialize)]
pub struct GeodesicReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub float_precision: usize,
    pub path: String,
    pub pair: String,
    #[serde(serialize_with = "ser_f64")]
    pub t: f64,
    #[serde(serialize_with = "ser_f64_vec")]
    pub steps: Vec<f64>,
    pub points: Vec<GeodesicPoint>,
    #[serde(serialize_with = "ser_f64")]
    pub max_residual: f64,
    pub min_order: Option<Rounded>,
    pub passed: bool,
}

impl GeodesicReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

pub fn geodesic_test(path: &Path, pair: PairKind, points: usize, t: f64) -> Result<GeodesicReport, CliError> {
    let mut scratch = RunReport::new("geodesic-test");
    let (_, d) = load(path, &mut scratch)?;
    let m = d.rank();
    let g0 = SymplecticPotential::canonical(&d);
    let (g1, perturbation) = match pair {
        PairKind::Linear => {
            let c: Vec<f64> = (1..=m).map(|i| 0.1 * i as f64).collect();
            let p = Perturbation::Linear(c);
            (g0.shifted(p.clone()), p)
        }
        PairKind::Ratio => {
            if m < 2 {
                return Err(CliError::Usage("the ratio pair needs rank >= 2".into()));
            }
            let p = Perturbation::Ratio { i: 0, j: 1 };
            (g0.shifted(p.clone()), p)
        }
        PairKind::Square => {
            let p = Perturbation::Square { i: 0 };
            (g0.shifted(p.clone()), p)
        }
        PairKind::Xi => {
            let mut xi = sasakit::potentials::canonical_reeb(&d);
            for (a, b) in xi.iter_mut().zip(d.normal(0)) {
                *a += bigint_to_f64(b);
            }
            let g1 = SymplecticPotential::canonical_xi(&d, &xi)?;
            let (a, b) = (g0.clone(), g1.clone());
            let p = Perturbation::custom(move |y| {
                b.eval(y).map(|s| s.g).unwrap_or(f64::NAN) - a.eval(y).map(|s| s.g).unwrap_or(f64::NAN)
            });
            (g1, p)
        }
    };

    let rays = ray_vectors(&d);
    let mut r = rng(3);
    let mut out = Vec::with_capacity(points);
    for _ in 0..points {
        let mut y = vec![0.0; m];
        for ray in &rays {
            let c: f64 = r.gen_range(0.5..1.5);
            for (a, b) in y.iter_mut().zip(ray) {
                *a += c * b;
            }
        }
        let residuals = GEODESIC_STEPS
            .iter()
            .map(|&h| geodesic_equation_residual(&g0, &g1, &y, t, h))
            .collect::<Result<Vec<_>, _>>()?;
        let order = (residuals[0] > NOISE_FLOOR).then(|| {
            let o: f64 = residuals
                .windows(2)
                .map(|w| (w[0] / w[1]).log2())
                .sum::<f64>()
                / (residuals.len() - 1) as f64;
            Rounded(o)
        });
        let reeb = reeb_invariance_residual(&d, &perturbation, &y)?;
        out.push(GeodesicPoint {
            y,
            residuals,
            order,
            reeb_invariance_residual: Rounded(reeb),
        });
    }
    let max_residual = out
        .iter()
        .map(|p| *p.residuals.last().expect("nonempty steps"))
        .fold(0.0, f64::max);
    let min_order = out
        .iter()
        .filter_map(|p| p.order.map(|o| o.0))
        .reduce(f64::min)
        .map(Rounded);
    let passed = max_residual < RESIDUAL_TOL && min_order.is_none_or(|o| o.0 >= MIN_ORDER);
    Ok(GeodesicReport {
        tool: "sasakit",
        version: env!("CARGO_PKG_VERSION"),
        command: "geodesic-test",
        float_precision: FLOAT_PRECISION,
        path: path.display().to_string(),
        pair: format!("{pair:?}").to_lowercase(),
        t,
        steps: GEODESIC_STEPS.to_vec(),
        points: out,
        max_residual,
        min_order,
        passed,
    })
}
