use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use intquant::affine::{
    kinetic_fit, momentum_element, momentum_squared_element, position_power_element, AffineTransformTable,
    FiducialVector, HalfLineGrid, HalfPlaneWindow, Wavefunction,
};
use intquant::export::{write_csv, write_json, Manifest, MatrixRecord};
use intquant::verify::{self, affine_test_functions, VerifyConfig, AFFINE_PAIRS};
use intquant::weyl::{angle_operator_analytic, angle_operator_numeric, boltzmann_rho, build_m, cg_m_analytic, thermal_s};
use intquant::{PhaseSpaceQuadrature, TruncatedFockSpace, WeightFunction};
use log::{info, warn};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{AffineWindow, RunConfig};

const PSD_TOL: f64 = 1e-10;
const EQUALITY_TOL: f64 = 1e-12;
const ANGLE_TOL: f64 = 1e-4;
const ANGLE_SPECTRUM_MARGIN: f64 = 0.15;
const AFFINE_WEAK_TOL: f64 = 1e-3;
const KINETIC_FIT_TOL: f64 = 0.02;

/// Collects written files and emits `<command>_manifest.json` at the end.
struct Run<'a> {
    outdir: &'a Path,
    manifest: Manifest,
}

impl<'a> Run<'a> {
    fn new(command: &str, cfg: &'a RunConfig) -> Result<Self> {
        std::fs::create_dir_all(&cfg.outdir).with_context(|| format!("creating {}", cfg.outdir.display()))?;
        Ok(Self {
            outdir: &cfg.outdir,
            manifest: Manifest::new(command, serde_json::to_value(cfg)?),
        })
    }

    fn tolerance(&mut self, name: &str, v: f64) {
        self.manifest.tolerances.insert(name.to_string(), v);
    }

    fn path(&mut self, name: &str) -> std::path::PathBuf {
        self.manifest.outputs.push(name.to_string());
        self.outdir.join(name)
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let p = self.path(name);
        write_csv(&p, rows).with_context(|| format!("writing {}", p.display()))
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<()> {
        let p = self.path(name);
        write_json(&p, v).with_context(|| format!("writing {}", p.display()))
    }

    fn finish(mut self) -> Result<()> {
        let name = format!("{}_manifest.json", self.manifest.command);
        let p = self.outdir.join(&name);
        self.manifest.outputs.sort();
        self.manifest.write_json(&p)?;
        info!("wrote {} files plus {name} to {}", self.manifest.outputs.len(), self.outdir.display());
        Ok(())
    }
}

/// A numeric CSV cell that may be marked `N/A`.
#[derive(Serialize)]
#[serde(untagged)]
enum Cell {
    Value(f64),
    Missing(&'static str),
}

const NA: Cell = Cell::Missing("N/A");

#[derive(Serialize)]
struct CgRow {
    s: f64,
    n: usize,
    analytic: f64,
    quadrature: Cell,
    abs_diff: Cell,
}

#[derive(Serialize)]
struct CgSummary {
    s: f64,
    trace: f64,
    min_eigenvalue: f64,
    psd: bool,
    quadrature_defect: Cell,
}

pub fn cg_table(cfg: &RunConfig) -> Result<()> {
    let mut run = Run::new("cg-table", cfg)?;
    run.tolerance("psd", PSD_TOL);
    let space = TruncatedFockSpace::new(cfg.dim)?;
    let quad = PhaseSpaceQuadrature::new(cfg.radial_order, cfg.angular_order)?;
    let sb = space.safe_block();
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &s in &cfg.s {
        let analytic = cg_m_analytic(s, &space)?;
        let numeric = if s >= 0.0 {
            warn!("s = {s}: weight is not integrable against D(z); quadrature column is N/A");
            None
        } else {
            Some(build_m(&WeightFunction::cahill_glauber(s)?, &quad, &space)?)
        };
        let ad = analytic.diagonal();
        for (n, a) in ad.iter().enumerate() {
            let (quadrature, abs_diff) = match &numeric {
                Some(m) => {
                    let v = m.get(n, n).re;
                    (Cell::Value(v), Cell::Value((v - a.re).abs()))
                }
                None => (NA, NA),
            };
            rows.push(CgRow {
                s,
                n,
                analytic: a.re,
                quadrature,
                abs_diff,
            });
        }
        let min_eigenvalue = analytic.min_eigenvalue();
        summary.push(CgSummary {
            s,
            trace: analytic.trace().re,
            min_eigenvalue,
            psd: min_eigenvalue >= -PSD_TOL,
            quadrature_defect: match &numeric {
                Some(m) => Cell::Value(m.block_distance(&analytic, sb)),
                None => NA,
            },
        });
    }
    run.csv("cg_table.csv", &rows)?;
    run.csv("cg_summary.csv", &summary)?;
    run.finish()
}

#[derive(Serialize)]
struct EigenRow {
    index: usize,
    eigenvalue: f64,
}

pub fn angle(cfg: &RunConfig) -> Result<()> {
    let mut run = Run::new("angle", cfg)?;
    run.tolerance("numeric_vs_analytic", ANGLE_TOL);
    run.tolerance("spectrum_margin", ANGLE_SPECTRUM_MARGIN);
    let space = TruncatedFockSpace::new(cfg.dim)?;
    let quad = PhaseSpaceQuadrature::angle_reference();
    let analytic = angle_operator_analytic(&space);
    let numeric = angle_operator_numeric(&space, &quad);
    let defect = numeric.block_distance(&analytic, space.safe_block());
    let ev = analytic.eigenvalues_hermitian();
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    let mut meta = BTreeMap::new();
    meta.insert("radial_order".into(), json!(quad.radial_order()));
    meta.insert("angular_order".into(), json!(quad.angular_order()));
    meta.insert("hermitian_defect".into(), json!(analytic.hermitian_defect()));
    run.json("angle_matrix.json", &MatrixRecord::from_operator(&analytic, meta))?;
    let rows: Vec<EigenRow> = ev
        .iter()
        .enumerate()
        .map(|(index, &eigenvalue)| EigenRow { index, eigenvalue })
        .collect();
    run.csv("angle_eigenvalues.csv", &rows)?;
    let report = json!({
        "dim": cfg.dim,
        "safe_block": space.safe_block(),
        "trace_over_dim": analytic.trace().re / cfg.dim as f64,
        "defect": defect,
        "defect_ok": defect < ANGLE_TOL,
        "hermitian_defect": analytic.hermitian_defect(),
        "min_eigenvalue": lo,
        "max_eigenvalue": hi,
        "spectrum_in_range": lo >= -ANGLE_SPECTRUM_MARGIN && hi <= 2.0 * std::f64::consts::PI + ANGLE_SPECTRUM_MARGIN,
    });
    run.json("angle_report.json", &report)?;
    run.finish()
}

#[derive(Serialize)]
struct WeakRow {
    quantity: String,
    i: usize,
    j: usize,
    quantized_re: f64,
    quantized_im: f64,
    expected_re: f64,
    expected_im: f64,
    abs_diff: f64,
}

pub fn affine(cfg: &RunConfig) -> Result<()> {
    let mut run = Run::new("affine", cfg)?;
    run.tolerance("weak_elements", AFFINE_WEAK_TOL);
    run.tolerance("kinetic_fit_relative", KINETIC_FIT_TOL);
    let grid = HalfLineGrid::reference();
    let psi = FiducialVector::power_exp(cfg.alpha, cfg.lambda, &grid)?;
    let table_json = psi.moment_table(&[-2.0, -1.0, 0.0, 1.0])?;
    run.json("affine_moments.json", &table_json)?;

    let window = match cfg.affine_window {
        AffineWindow::Reference => HalfPlaneWindow::reference(),
        AffineWindow::Compact => HalfPlaneWindow::compact(),
    };
    // index 0 is the fiducial itself; the rest are the weak-form test functions
    let mut tests = vec![Wavefunction::from_fn(&grid, |x| psi.eval(x))];
    tests.extend(affine_test_functions().iter().map(|f| Wavefunction::from_fn(&grid, |x| f(x))));
    let table = AffineTransformTable::build(&psi, &window, &tests)?;

    let pairs: Vec<(usize, usize)> = AFFINE_PAIRS.iter().map(|&(i, j)| (i + 1, j + 1)).collect();
    let cm1 = psi.c_minus_one();
    let k = psi.kinetic_k();
    let mut rows = Vec::new();
    let mut push = |quantity: String, i: usize, j: usize, a: Complex64, e: Complex64| {
        rows.push(WeakRow {
            quantity,
            i,
            j,
            quantized_re: a.re,
            quantized_im: a.im,
            expected_re: e.re,
            expected_im: e.im,
            abs_diff: (a - e).norm(),
        })
    };
    for &(i, j) in &pairs {
        for beta in [1.0, 2.0] {
            let law = psi.c_gamma(beta - 1.0)? / cm1;
            let a = table.matrix_element(&|q, _| Complex64::from(q.powf(beta)), i, j)?;
            let e = position_power_element(&grid, &tests[i], &tests[j], beta)? * law;
            push(format!("q^{beta}"), i, j, a, e);
        }
        let a = table.matrix_element(&|_, p| Complex64::from(p), i, j)?;
        push("p".into(), i, j, a, momentum_element(&grid, &tests[i], &tests[j])?);
        let a = table.matrix_element(&|_, p| Complex64::from(p * p), i, j)?;
        let e = momentum_squared_element(&grid, &tests[i], &tests[j])?
            + position_power_element(&grid, &tests[i], &tests[j], -2.0)? * k.k;
        push("p^2".into(), i, j, a, e);
    }
    let worst = |pred: &dyn Fn(&str) -> bool| {
        rows.iter()
            .filter(|r| pred(&r.quantity))
            .map(|r| r.abs_diff)
            .fold(0.0, f64::max)
    };
    let (wq, wp, wp2) = (worst(&|q| q.starts_with("q^")), worst(&|q| q == "p"), worst(&|q| q == "p^2"));
    run.csv("affine_weak_elements.csv", &rows)?;

    let fit = kinetic_fit(&table, &tests, &grid, &pairs)?;
    let density = table.density(0)?;
    let report = json!({
        "k": k.k,
        "k_self_adjoint": k.self_adjoint,
        "c_minus_one": cm1,
        "resolution_defect": table.resolution_defect(),
        "max_position_power_defect": wq,
        "max_momentum_defect": wp,
        "max_momentum_squared_defect": wp2,
        "kinetic_fit": fit,
        "kinetic_fit_relative_error": (fit / k.k - 1.0).abs(),
        "kinetic_fit_ok": (fit / k.k - 1.0).abs() < KINETIC_FIT_TOL,
        "density_mass": density.mass,
        "window": window,
    });
    run.json("affine_report.json", &report)?;
    let p = run.path("affine_density.csv");
    density
        .downsampled(cfg.density_stride[0], cfg.density_stride[1])
        .write_csv(&p)
        .with_context(|| format!("writing {}", p.display()))?;
    run.finish()
}

#[derive(Serialize)]
struct ThermalRow {
    omega: f64,
    temp: f64,
    s: f64,
    mean_occupation: f64,
    bose_factor: f64,
    tail_bound: f64,
    tail_mass: f64,
    equality_defect: f64,
}

#[derive(Serialize)]
struct DiagonalRow {
    temp: f64,
    n: usize,
    rho: f64,
}

/// `Σ_{n ≥ d} n (1−q) qⁿ` with `q = e^{−ω/T}`: the occupation carried by the
/// discarded levels.
fn occupation_tail(omega: f64, temp: f64, dim: usize) -> f64 {
    if temp == 0.0 {
        return 0.0;
    }
    let q = (-omega / temp).exp();
    q.powi(dim as i32) * (dim as f64 + q / (1.0 - q))
}

pub fn thermal(cfg: &RunConfig) -> Result<()> {
    let mut run = Run::new("thermal", cfg)?;
    run.tolerance("equality", EQUALITY_TOL);
    let space = TruncatedFockSpace::new(cfg.dim)?;
    let mut rows = Vec::new();
    let mut diags = Vec::new();
    for &t in &cfg.temp {
        let s = thermal_s(cfg.omega, t)?;
        let state = boltzmann_rho(cfg.omega, t, &space)?;
        let m = cg_m_analytic(s, &space)?;
        let equality_defect = state.rho.operator().block_distance(&m, cfg.dim);
        if equality_defect >= EQUALITY_TOL {
            warn!("T = {t}: thermal state and CG seed differ by {equality_defect:.2e}");
        }
        let bose_factor = if t == 0.0 { 0.0 } else { 1.0 / (cfg.omega / t).exp_m1() };
        rows.push(ThermalRow {
            omega: cfg.omega,
            temp: t,
            s,
            mean_occupation: state.mean_occupation(),
            bose_factor,
            tail_bound: occupation_tail(cfg.omega, t, cfg.dim),
            tail_mass: state.tail_mass,
            equality_defect,
        });
        for (n, v) in state.rho.operator().diagonal().iter().enumerate() {
            diags.push(DiagonalRow { temp: t, n, rho: v.re });
        }
    }
    run.csv("thermal_curve.csv", &rows)?;
    run.csv("thermal_diagonals.csv", &diags)?;
    run.finish()
}

/// Returns whether every check passed.
pub fn verify(cfg: &RunConfig) -> Result<bool> {
    let mut run = Run::new("verify", cfg)?;
    let vc = VerifyConfig {
        dim: cfg.dim,
        radial_order: cfg.radial_order,
        angular_order: cfg.angular_order,
        alpha: cfg.alpha,
        lambda: cfg.lambda,
        seed: cfg.seed,
        affine: cfg.verify_affine,
    };
    let report = verify::run(&vc)?;
    for c in report.checks.iter().filter(|c| c.status != verify::CheckStatus::Pass) {
        info!("{:?} {}::{} {}", c.status, c.module, c.name, c.detail);
    }
    let v: Value = serde_json::to_value(&report)?;
    run.json("verify_report.json", &v)?;
    println!(
        "verify: {} passed, {} failed, {} skipped",
        report.passed, report.failed, report.skipped
    );
    run.finish()?;
    Ok(report.all_passed())
}
