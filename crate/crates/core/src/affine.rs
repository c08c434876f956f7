//! Affine coherent states on the half-line `L²(ℝ₊, dx)` and covariant
//! integral quantization on the half-plane `{(q, p) : q > 0}`.
//!
//! Operators are represented weakly: everything is a matrix element
//! `⟨φ₁|A_f|φ₂⟩` against sampled test functions, computed from the transform
//! table `F_i(q, p) = ⟨q,p|φ_i⟩`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, QuantError, Result};
use crate::special::ln_gamma;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Node placement on `(0, X_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Uniform,
    Geometric,
    /// `x = s·ln(1 + e^u)` with `u` uniform: geometric near the origin,
    /// uniform (step `≈ s·h`) far from it.
    Softplus { scale: f64 },
}

/// Nodes and trapezoid weights on the half-line.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLineGrid {
    spacing: Spacing,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl HalfLineGrid {
    pub const DEFAULT_LEN: usize = 2048;
    pub const DEFAULT_X_MAX: f64 = 80.0;
    pub const DEFAULT_X_MIN: f64 = 1e-10;
    pub const DEFAULT_SOFTPLUS_SCALE: f64 = 2.0;

    pub fn new(spacing: Spacing, len: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if len < 3 {
            return Err(invalid("len", "need at least 3 nodes"));
        }
        if !(x_min > 0.0 && x_max > x_min && x_max.is_finite()) {
            return Err(invalid("x_max", format!("need 0 < x_min < x_max, got {x_min}, {x_max}")));
        }
        let (u0, u1, map): (f64, f64, Box<dyn Fn(f64) -> (f64, f64)>) = match spacing {
            Spacing::Uniform => (x_min, x_max, Box::new(|u| (u, 1.0))),
            Spacing::Geometric => (x_min.ln(), x_max.ln(), Box::new(|u: f64| (u.exp(), u.exp()))),
            Spacing::Softplus { scale: s } => {
                if !(s > 0.0) {
                    return Err(invalid("scale", "softplus scale must be positive"));
                }
                let inv = |x: f64| (x / s).exp_m1().ln();
                (
                    inv(x_min),
                    inv(x_max),
                    Box::new(move |u: f64| (s * u.exp().ln_1p(), s / (1.0 + (-u).exp()))),
                )
            }
        };
        let h = (u1 - u0) / (len - 1) as f64;
        let mut nodes = Vec::with_capacity(len);
        let mut weights = Vec::with_capacity(len);
        for k in 0..len {
            let u = if k == len - 1 { u1 } else { u0 + k as f64 * h };
            let (x, dx) = map(u);
            nodes.push(x);
            let end = if k == 0 || k == len - 1 { 0.5 } else { 1.0 };
            weights.push(end * h * dx);
        }
        Ok(Self {
            spacing,
            nodes,
            weights,
        })
    }

    /// Softplus grid, 2048 nodes on `[1e-10, 80]`.
    pub fn reference() -> Self {
        Self::new(
            Spacing::Softplus {
                scale: Self::DEFAULT_SOFTPLUS_SCALE,
            },
            Self::DEFAULT_LEN,
            Self::DEFAULT_X_MIN,
            Self::DEFAULT_X_MAX,
        )
        .expect("reference grid parameters are valid")
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn x_max(&self) -> f64 {
        *self.nodes.last().expect("grid is never empty")
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// `|∫ e^{−x²} dx − √π/2|` on the grid.
    pub fn gaussian_self_test(&self) -> f64 {
        (self.integrate(|x| (-x * x).exp()) - PI.sqrt() / 2.0).abs()
    }

    fn check(&self, w: &Wavefunction) -> Result<()> {
        if w.values.len() != self.len() {
            return Err(QuantError::GridMismatch {
                expected: self.len(),
                got: w.values.len(),
            });
        }
        Ok(())
    }

    /// Linear interpolation, zero beyond `X_max` and tied to zero at `x = 0`.
    pub fn interpolate(&self, values: &[Complex64], x: f64) -> Complex64 {
        let xs = &self.nodes;
        if x <= 0.0 || x > xs[xs.len() - 1] {
            return ZERO;
        }
        let k = xs.partition_point(|&v| v < x);
        if k == 0 {
            return values[0] * (x / xs[0]);
        }
        let t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
        values[k - 1] * (1.0 - t) + values[k] * t
    }
}

/// A wavefunction sampled on a [`HalfLineGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    values: Vec<Complex64>,
}

impl Wavefunction {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn from_fn(grid: &HalfLineGrid, f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            values: grid.nodes().iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `⟨self|other⟩` by grid quadrature.
    pub fn inner(&self, other: &Self, grid: &HalfLineGrid) -> Result<Complex64> {
        grid.check(self)?;
        grid.check(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(grid.weights())
            .map(|((a, b), &w)| a.conj() * b * w)
            .sum())
    }

    pub fn norm(&self, grid: &HalfLineGrid) -> Result<f64> {
        Ok(self.inner(self, grid)?.re.sqrt())
    }

    pub fn normalized(&self, grid: &HalfLineGrid) -> Result<Self> {
        let n = self.norm(grid)?;
        if !(n > 0.0) {
            return Err(invalid("wavefunction", "zero norm"));
        }
        Ok(self.scaled(1.0 / n))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Three-point central differences on the nonuniform grid, one-sided
    /// at the two ends.
    pub fn derivative(&self, grid: &HalfLineGrid) -> Result<Self> {
        grid.check(self)?;
        let x = grid.nodes();
        let f = &self.values;
        let n = f.len();
        let mut out = vec![ZERO; n];
        for i in 1..n - 1 {
            let h1 = x[i] - x[i - 1];
            let h2 = x[i + 1] - x[i];
            out[i] = f[i - 1] * (-h2 / (h1 * (h1 + h2)))
                + f[i] * ((h2 - h1) / (h1 * h2))
                + f[i + 1] * (h1 / (h2 * (h1 + h2)));
        }
        out[0] = (f[1] - f[0]) / (x[1] - x[0]);
        out[n - 1] = (f[n - 1] - f[n - 2]) / (x[n - 1] - x[n - 2]);
        Ok(Self { values: out })
    }

    /// Three-point second derivative; the end values repeat their neighbour.
    pub fn second_derivative(&self, grid: &HalfLineGrid) -> Result<Self> {
        grid.check(self)?;
        let x = grid.nodes();
        let f = &self.values;
        let n = f.len();
        let mut out = vec![ZERO; n];
        for i in 1..n - 1 {
            let h1 = x[i] - x[i - 1];
            let h2 = x[i + 1] - x[i];
            out[i] = (f[i - 1] / (h1 * (h1 + h2)) - f[i] / (h1 * h2) + f[i + 1] / (h2 * (h1 + h2))) * 2.0;
        }
        out[0] = out[1];
        out[n - 1] = out[n - 2];
        Ok(Self { values: out })
    }
}

/// `⟨φ₁| x^β |φ₂⟩`.
pub fn position_power_element(grid: &HalfLineGrid, phi1: &Wavefunction, phi2: &Wavefunction, beta: f64) -> Result<Complex64> {
    grid.check(phi1)?;
    grid.check(phi2)?;
    Ok(grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .zip(phi1.values.iter().zip(&phi2.values))
        .map(|((&x, &w), (a, b))| a.conj() * b * (w * x.powf(beta)))
        .sum())
}

/// `⟨φ₁| −i d/dx |φ₂⟩` with central differences.
pub fn momentum_element(grid: &HalfLineGrid, phi1: &Wavefunction, phi2: &Wavefunction) -> Result<Complex64> {
    let d = phi2.derivative(grid)?;
    Ok(phi1.inner(&d, grid)? * Complex64::new(0.0, -1.0))
}

/// `⟨φ₁| −d²/dx² |φ₂⟩` with the three-point second derivative.
pub fn momentum_squared_element(grid: &HalfLineGrid, phi1: &Wavefunction, phi2: &Wavefunction) -> Result<Complex64> {
    let d2 = phi2.second_derivative(grid)?;
    Ok(-phi1.inner(&d2, grid)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FiducialFamily {
    /// `ψ(x) = C x^α e^{−λx/2}`, `C² = λ^{2α+1}/Γ(2α+1)`.
    PowerExp { alpha: f64, lambda: f64 },
    Sampled,
}

/// The fiducial vector (wavelet) `ψ` with cached norm and `c_{−1}`.
#[derive(Debug, Clone)]
pub struct FiducialVector {
    family: FiducialFamily,
    grid: HalfLineGrid,
    samples: Wavefunction,
    derivative: Wavefunction,
    ln_c: f64,
    c_minus_one: f64,
}

/// `K` together with the `K ≥ 3/4` essential self-adjointness flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KineticConstant {
    pub k: f64,
    pub self_adjoint: bool,
}

impl KineticConstant {
    pub fn new(k: f64) -> Self {
        Self {
            k,
            self_adjoint: k >= 0.75,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentTable {
    pub fiducial: FiducialFamily,
    pub c_gamma: BTreeMap<String, f64>,
    pub kinetic: KineticConstant,
}

impl MomentTable {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }
}

impl FiducialVector {
    pub fn power_exp(alpha: f64, lambda: f64, grid: &HalfLineGrid) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 1.5) {
            return Err(invalid("alpha", format!("need alpha > 3/2 so that c_1, c_0, c_-1 and K exist, got {alpha}")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(invalid("lambda", format!("need lambda > 0, got {lambda}")));
        }
        let ln_c = 0.5 * ((2.0 * alpha + 1.0) * lambda.ln() - ln_gamma(2.0 * alpha + 1.0));
        let eval = |x: f64| (ln_c + alpha * x.ln() - 0.5 * lambda * x).exp();
        let samples = Wavefunction::from_fn(grid, |x| Complex64::from(eval(x)));
        let derivative =
            Wavefunction::from_fn(grid, |x| Complex64::from(eval(x) * (alpha / x - 0.5 * lambda)));
        Self::finish(FiducialFamily::PowerExp { alpha, lambda }, grid, samples, derivative, ln_c)
    }

    /// A fiducial given by samples; it is normalized on the grid and
    /// differentiated by central differences.
    pub fn sampled(grid: &HalfLineGrid, values: Wavefunction) -> Result<Self> {
        let samples = values.normalized(grid)?;
        let derivative = samples.derivative(grid)?;
        Self::finish(FiducialFamily::Sampled, grid, samples, derivative, 0.0)
    }

    fn finish(
        family: FiducialFamily,
        grid: &HalfLineGrid,
        samples: Wavefunction,
        derivative: Wavefunction,
        ln_c: f64,
    ) -> Result<Self> {
        let mut me = Self {
            family,
            grid: grid.clone(),
            samples,
            derivative,
            ln_c,
            c_minus_one: f64::NAN,
        };
        let c = me.moment_on_grid(-1.0);
        if !(c.is_finite() && c > 0.0) {
            return Err(invalid("fiducial", format!("c_-1 must be finite and positive, got {c}")));
        }
        me.c_minus_one = c;
        Ok(me)
    }

    pub fn family(&self) -> FiducialFamily {
        self.family
    }

    pub fn grid(&self) -> &HalfLineGrid {
        &self.grid
    }

    pub fn samples(&self) -> &Wavefunction {
        &self.samples
    }

    /// `ψ(x)` off the grid: closed form for power-exp, interpolation for
    /// sampled fiducials.
    pub fn eval(&self, x: f64) -> Complex64 {
        match self.family {
            FiducialFamily::PowerExp { alpha, lambda } if x > 0.0 => {
                Complex64::from((self.ln_c + alpha * x.ln() - 0.5 * lambda * x).exp())
            }
            FiducialFamily::PowerExp { .. } => ZERO,
            FiducialFamily::Sampled => self.grid.interpolate(self.samples.values(), x),
        }
    }

    pub fn norm(&self) -> f64 {
        self.samples.norm(&self.grid).expect("samples live on the grid")
    }

    fn moment_on_grid(&self, gamma: f64) -> f64 {
        self.grid
            .nodes()
            .iter()
            .zip(self.grid.weights())
            .zip(self.samples.values())
            .map(|((&x, &w), v)| w * v.norm_sqr() * x.powf(-2.0 - gamma))
            .sum()
    }

    /// `c_γ = ∫ |ψ(x)|² x^{−2−γ} dx` on the grid.
    pub fn c_gamma(&self, gamma: f64) -> Result<f64> {
        if let FiducialFamily::PowerExp { alpha, .. } = self.family {
            if 2.0 * alpha - 1.0 - gamma <= 0.0 {
                return Err(QuantError::DivergentMoment {
                    gamma,
                    reason: format!("power-exp needs 2*alpha - 1 - gamma > 0, alpha = {alpha}"),
                });
            }
        }
        Ok(self.moment_on_grid(gamma))
    }

    /// `λ^{γ+2} Γ(2α−1−γ) / Γ(2α+1)`; `None` for sampled fiducials.
    pub fn closed_form_c_gamma(&self, gamma: f64) -> Option<Result<f64>> {
        match self.family {
            FiducialFamily::PowerExp { alpha, lambda } => Some(if 2.0 * alpha - 1.0 - gamma <= 0.0 {
                Err(QuantError::DivergentMoment {
                    gamma,
                    reason: format!("power-exp needs 2*alpha - 1 - gamma > 0, alpha = {alpha}"),
                })
            } else {
                Ok(((gamma + 2.0) * lambda.ln() + ln_gamma(2.0 * alpha - 1.0 - gamma) - ln_gamma(2.0 * alpha + 1.0))
                    .exp())
            }),
            FiducialFamily::Sampled => None,
        }
    }

    pub fn c_minus_one(&self) -> f64 {
        self.c_minus_one
    }

    /// `K = ∫ |ψ'(u)|² u du / c_{−1}`.
    pub fn kinetic_k(&self) -> KineticConstant {
        let num: f64 = self
            .grid
            .nodes()
            .iter()
            .zip(self.grid.weights())
            .zip(self.derivative.values())
            .map(|((&x, &w), d)| w * d.norm_sqr() * x)
            .sum();
        KineticConstant::new(num / self.c_minus_one)
    }

    pub fn moment_table(&self, gammas: &[f64]) -> Result<MomentTable> {
        let mut c_gamma = BTreeMap::new();
        for &g in gammas {
            c_gamma.insert(format!("{g}"), self.c_gamma(g)?);
        }
        Ok(MomentTable {
            fiducial: self.family,
            c_gamma,
            kinetic: self.kinetic_k(),
        })
    }
}

/// A point `(q, p)` of the half-plane, composed as
/// `(q, p)(q₀, p₀) = (q q₀, p₀/q + p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlanePoint {
    pub q: f64,
    pub p: f64,
}

impl HalfPlanePoint {
    pub fn new(q: f64, p: f64) -> Result<Self> {
        if !(q.is_finite() && q > 0.0 && p.is_finite()) {
            return Err(invalid("q", format!("need q > 0 and finite p, got ({q}, {p})")));
        }
        Ok(Self { q, p })
    }

    pub fn compose(self, other: Self) -> Self {
        Self {
            q: self.q * other.q,
            p: other.p / self.q + self.p,
        }
    }

    pub fn inverse(self) -> Self {
        Self {
            q: 1.0 / self.q,
            p: -self.q * self.p,
        }
    }
}

/// `(U(q,p)f)(x) = e^{ipx} f(x/q) / √q`.
pub fn affine_action<F>(g: HalfPlanePoint, f: F) -> impl Fn(f64) -> Complex64 + Send + Sync
where
    F: Fn(f64) -> Complex64 + Send + Sync,
{
    let s = 1.0 / g.q.sqrt();
    move |x| Complex64::from_polar(s, g.p * x) * f(x / g.q)
}

/// The sampled coherent state `|q,p⟩ = U(q,p)ψ`.
#[derive(Debug, Clone)]
pub struct AffineCs {
    pub point: HalfPlanePoint,
    pub state: Wavefunction,
    /// `|1 − ‖state‖²|`: mass lost outside the grid.
    pub leakage: f64,
}

pub fn affine_cs(q: f64, p: f64, psi: &FiducialVector) -> Result<AffineCs> {
    let point = HalfPlanePoint::new(q, p)?;
    let grid = psi.grid();
    let state = Wavefunction::from_fn(grid, affine_action(point, |x| psi.eval(x)));
    let leakage = (1.0 - state.norm(grid)?.powi(2)).abs();
    if leakage > 1e-6 {
        warn!("affine coherent state at (q, p) = ({q}, {p}) loses {leakage:.2e} of its mass outside the grid");
    }
    Ok(AffineCs { point, state, leakage })
}

/// `⟨q,p|φ⟩` at a single point.
pub fn cs_overlap(q: f64, p: f64, phi: &Wavefunction, psi: &FiducialVector) -> Result<Complex64> {
    let cs = affine_cs(q, p, psi)?;
    cs.state.inner(phi, psi.grid())
}

/// Log-spaced `q`, uniform `p`, with trapezoid weights for `dq dp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfPlaneWindow {
    pub q_min: f64,
    pub q_max: f64,
    pub n_q: usize,
    pub p_max: f64,
    pub n_p: usize,
}

impl HalfPlaneWindow {
    pub fn new(q_min: f64, q_max: f64, n_q: usize, p_max: f64, n_p: usize) -> Result<Self> {
        if !(q_min > 0.0 && q_max > q_min && q_max.is_finite()) {
            return Err(invalid("q window", format!("need 0 < q_min < q_max, got [{q_min}, {q_max}]")));
        }
        if !(p_max > 0.0 && p_max.is_finite()) {
            return Err(invalid("p window", format!("need p_max > 0, got {p_max}")));
        }
        if n_q < 2 || n_p < 2 {
            return Err(invalid("window", "need at least 2 nodes per axis"));
        }
        Ok(Self {
            q_min,
            q_max,
            n_q,
            p_max,
            n_p,
        })
    }

    /// `q ∈ [0.05, 2000]` (160 nodes), `p ∈ [−60, 60]` (1024 nodes).
    pub fn reference() -> Self {
        Self::new(0.05, 2000.0, 160, 60.0, 1024).expect("valid")
    }

    /// `q ∈ [0.05, 40]` (96 nodes), `p ∈ [−60, 60]` (512 nodes).
    pub fn compact() -> Self {
        Self::new(0.05, 40.0, 96, 60.0, 512).expect("valid")
    }

    pub fn q_nodes(&self) -> Vec<f64> {
        let (a, b) = (self.q_min.ln(), self.q_max.ln());
        let h = (b - a) / (self.n_q - 1) as f64;
        (0..self.n_q).map(|k| (a + k as f64 * h).exp()).collect()
    }

    pub fn q_weights(&self) -> Vec<f64> {
        let h = (self.q_max / self.q_min).ln() / (self.n_q - 1) as f64;
        self.q_nodes()
            .iter()
            .enumerate()
            .map(|(k, &q)| if k == 0 || k == self.n_q - 1 { 0.5 * h * q } else { h * q })
            .collect()
    }

    pub fn p_step(&self) -> f64 {
        2.0 * self.p_max / (self.n_p - 1) as f64
    }

    pub fn p_nodes(&self) -> Vec<f64> {
        let h = self.p_step();
        (0..self.n_p).map(|k| -self.p_max + k as f64 * h).collect()
    }

    pub fn p_weights(&self) -> Vec<f64> {
        let h = self.p_step();
        (0..self.n_p)
            .map(|k| if k == 0 || k == self.n_p - 1 { 0.5 * h } else { h })
            .collect()
    }
}

/// `F_i(q, p) = ⟨q,p|φ_i⟩` for a set of test functions on every window
/// node. Each `q` row is a discrete Fourier sum over the `x` grid,
/// evaluated for the whole uniform `p` row by phase recurrence.
#[derive(Debug, Clone)]
pub struct AffineTransformTable {
    window: HalfPlaneWindow,
    q: Vec<f64>,
    p: Vec<f64>,
    w_q: Vec<f64>,
    w_p: Vec<f64>,
    c_minus_one: f64,
    norms_sq: Vec<f64>,
    // [test][iq * n_p + ip]
    values: Vec<Vec<Complex64>>,
}

impl AffineTransformTable {
    pub fn build(psi: &FiducialVector, window: &HalfPlaneWindow, tests: &[Wavefunction]) -> Result<Self> {
        let grid = psi.grid();
        for t in tests {
            grid.check(t)?;
        }
        let nf = tests.len();
        let q = window.q_nodes();
        let p = window.p_nodes();
        let np = p.len();
        let dp = window.p_step();
        let p0 = p[0];
        let xs = grid.nodes();
        let rows: Vec<Vec<Complex64>> = q
            .par_iter()
            .map(|&qv| {
                let s = 1.0 / qv.sqrt();
                // g_ij = conj(ψ(x_j/q)) φ_i(x_j) w_j / √q
                let mut g: Vec<(usize, Vec<Complex64>)> = Vec::new();
                let mut gmax: f64 = 0.0;
                for (j, (&x, &w)) in xs.iter().zip(grid.weights()).enumerate() {
                    let c = psi.eval(x / qv).conj() * (s * w);
                    if c == ZERO {
                        continue;
                    }
                    let row: Vec<Complex64> = tests.iter().map(|t| c * t.values[j]).collect();
                    let m = row.iter().fold(0.0_f64, |a, v| a.max(v.norm()));
                    if m > 0.0 {
                        gmax = gmax.max(m);
                        g.push((j, row));
                    }
                }
                let cut = gmax * 1e-17;
                let mut acc = vec![ZERO; nf * np];
                for (j, row) in &g {
                    if row.iter().all(|v| v.norm() <= cut) {
                        continue;
                    }
                    let x = xs[*j];
                    let step = Complex64::from_polar(1.0, -dp * x);
                    let mut phase = Complex64::from_polar(1.0, -p0 * x);
                    for k in 0..np {
                        if k % 128 == 0 {
                            phase = Complex64::from_polar(1.0, -(p0 + k as f64 * dp) * x);
                        }
                        let cell = &mut acc[k * nf..(k + 1) * nf];
                        for (a, v) in cell.iter_mut().zip(row) {
                            *a += v * phase;
                        }
                        phase *= step;
                    }
                }
                acc
            })
            .collect();
        let mut values = vec![vec![ZERO; q.len() * np]; nf];
        for (iq, row) in rows.iter().enumerate() {
            for ip in 0..np {
                for (i, col) in values.iter_mut().enumerate() {
                    col[iq * np + ip] = row[ip * nf + i];
                }
            }
        }
        let norms_sq = tests
            .iter()
            .map(|t| t.norm(grid).map(|n| n * n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            window: window.clone(),
            w_q: window.q_weights(),
            w_p: window.p_weights(),
            q,
            p,
            c_minus_one: psi.c_minus_one(),
            norms_sq,
            values,
        })
    }

    pub fn window(&self) -> &HalfPlaneWindow {
        &self.window
    }

    pub fn n_tests(&self) -> usize {
        self.values.len()
    }

    pub fn overlap(&self, test: usize, iq: usize, ip: usize) -> Complex64 {
        self.values[test][iq * self.p.len() + ip]
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.values.len() {
            return Err(QuantError::GridMismatch {
                expected: self.values.len(),
                got: i + 1,
            });
        }
        Ok(())
    }

    /// `⟨φ_i|A_f|φ_j⟩ = Σ w f(q,p) conj(F_i) F_j / (2π c_{−1})`.
    pub fn matrix_element(&self, f: &(dyn Fn(f64, f64) -> Complex64 + Sync), i: usize, j: usize) -> Result<Complex64> {
        self.check_index(i)?;
        self.check_index(j)?;
        let np = self.p.len();
        let (fi, fj) = (&self.values[i], &self.values[j]);
        let mut total = ZERO;
        for (iq, (&q, &wq)) in self.q.iter().zip(&self.w_q).enumerate() {
            for (ip, (&p, &wp)) in self.p.iter().zip(&self.w_p).enumerate() {
                let k = iq * np + ip;
                let v = f(q, p);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(QuantError::NodeEvaluation { re: q, im: p });
                }
                total += v * (wq * wp) * fi[k].conj() * fj[k];
            }
        }
        Ok(total / (2.0 * PI * self.c_minus_one))
    }

    /// `max_i |Σ w |F_i|² / (2π c_{−1}) − ‖φ_i‖²|`.
    pub fn resolution_defect(&self) -> f64 {
        (0..self.n_tests())
            .map(|i| {
                let m = self.matrix_element(&|_, _| Complex64::from(1.0), i, i).expect("index in range");
                (m.re - self.norms_sq[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `ρ_φ(q,p) = |⟨q,p|φ⟩|² / (2π c_{−1})` for test function `i`.
    pub fn density(&self, i: usize) -> Result<PhaseSpaceDensity> {
        self.check_index(i)?;
        let scale = 1.0 / (2.0 * PI * self.c_minus_one);
        let rho: Vec<f64> = self.values[i].iter().map(|v| v.norm_sqr() * scale).collect();
        let np = self.p.len();
        let mass = rho
            .iter()
            .enumerate()
            .map(|(k, r)| r * self.w_q[k / np] * self.w_p[k % np])
            .sum();
        Ok(PhaseSpaceDensity {
            q: self.q.clone(),
            p: self.p.clone(),
            rho,
            mass,
        })
    }
}

/// Sampled phase-space density with its quadrature mass over the window.
#[derive(Debug, Clone)]
pub struct PhaseSpaceDensity {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// Row-major in `(q, p)`.
    pub rho: Vec<f64>,
    pub mass: f64,
}

#[derive(Serialize)]
struct DensityRow {
    q: f64,
    p: f64,
    rho: f64,
}

impl PhaseSpaceDensity {
    pub fn argmax(&self) -> HalfPlanePoint {
        let k = self
            .rho
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, &r)| if r > best.1 { (k, r) } else { best })
            .0;
        HalfPlanePoint {
            q: self.q[k / self.p.len()],
            p: self.p[k % self.p.len()],
        }
    }

    /// Keeps every `stride_q`-th `q` row and `stride_p`-th `p` column; the
    /// recorded mass is that of the full window.
    pub fn downsampled(&self, stride_q: usize, stride_p: usize) -> Self {
        let (sq, sp) = (stride_q.max(1), stride_p.max(1));
        let np = self.p.len();
        let q: Vec<f64> = self.q.iter().copied().step_by(sq).collect();
        let p: Vec<f64> = self.p.iter().copied().step_by(sp).collect();
        let mut rho = Vec::with_capacity(q.len() * p.len());
        for iq in (0..self.q.len()).step_by(sq) {
            for ip in (0..np).step_by(sp) {
                rho.push(self.rho[iq * np + ip]);
            }
        }
        Self {
            q,
            p,
            rho,
            mass: self.mass,
        }
    }

    /// CSV with header `q,p,rho`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let np = self.p.len();
        for (k, &rho) in self.rho.iter().enumerate() {
            w.serialize(DensityRow {
                q: self.q[k / np],
                p: self.p[k % np],
                rho,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Weak resolution-of-identity defect over a set of test functions.
pub fn resolution_defect_affine(psi: &FiducialVector, window: &HalfPlaneWindow, tests: &[Wavefunction]) -> Result<f64> {
    Ok(AffineTransformTable::build(psi, window, tests)?.resolution_defect())
}

/// `⟨φ₁|A_f|φ₂⟩` from a dedicated two-function table.
pub fn quantize_affine_matrix_element(
    f: &(dyn Fn(f64, f64) -> Complex64 + Sync),
    phi1: &Wavefunction,
    phi2: &Wavefunction,
    psi: &FiducialVector,
    window: &HalfPlaneWindow,
) -> Result<Complex64> {
    let table = AffineTransformTable::build(psi, window, &[phi1.clone(), phi2.clone()])?;
    table.matrix_element(f, 0, 1)
}

pub fn phase_space_density(phi: &Wavefunction, psi: &FiducialVector, window: &HalfPlaneWindow) -> Result<PhaseSpaceDensity> {
    AffineTransformTable::build(psi, window, std::slice::from_ref(phi))?.density(0)
}

/// Least-squares coefficient `κ` in `⟨A_{p²}⟩ − ⟨P²⟩ ≈ κ ⟨x^{−2}⟩` over the
/// given test-function pairs (real parts).
pub fn kinetic_fit(table: &AffineTransformTable, tests: &[Wavefunction], grid: &HalfLineGrid, pairs: &[(usize, usize)]) -> Result<f64> {
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for &(i, j) in pairs {
        let quantized = table.matrix_element(&|_, p| Complex64::from(p * p), i, j)?;
        let p2 = momentum_squared_element(grid, &tests[i], &tests[j])?;
        let inv2 = position_power_element(grid, &tests[i], &tests[j], -2.0)?;
        sxy += (quantized - p2).re * inv2.re;
        sxx += inv2.re * inv2.re;
    }
    Ok(sxy / sxx)
}

/// A test function given in closed form, so that it can be moved by the
/// group action without interpolation.
pub type TestFunction = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Normalized `x^a e^{−bx/2}`.
pub fn power_exp_test(a: f64, b: f64) -> TestFunction {
    let ln_c = 0.5 * ((2.0 * a + 1.0) * b.ln() - ln_gamma(2.0 * a + 1.0));
    Arc::new(move |x: f64| {
        if x > 0.0 {
            Complex64::from((ln_c + a * x.ln() - 0.5 * b * x).exp())
        } else {
            ZERO
        }
    })
}

/// Covariance of `f = q` in weak form: `max |⟨φ_i|A_{f∘g₀⁻¹}|φ_j⟩ −
/// ⟨U(g₀)†φ_i|A_f|U(g₀)†φ_j⟩|` over all pairs of the given test functions,
/// with `(f∘g₀⁻¹)(q,p) = q/q₀`.
pub fn affine_covariance_defect(
    psi: &FiducialVector,
    window: &HalfPlaneWindow,
    tests: &[TestFunction],
    g0: HalfPlanePoint,
) -> Result<f64> {
    let grid = psi.grid();
    let inv = g0.inverse();
    let mut sampled: Vec<Wavefunction> = tests.iter().map(|t| Wavefunction::from_fn(grid, |x| t(x))).collect();
    for t in tests {
        let moved = affine_action(inv, {
            let t = t.clone();
            move |x| t(x)
        });
        sampled.push(Wavefunction::from_fn(grid, moved));
    }
    let table = AffineTransformTable::build(psi, window, &sampled)?;
    let n = tests.len();
    let lhs_f = move |q: f64, _p: f64| Complex64::from(q / g0.q);
    let rhs_f = |q: f64, _p: f64| Complex64::from(q);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let lhs = table.matrix_element(&lhs_f, i, j)?;
            let rhs = table.matrix_element(&rhs_f, n + i, n + j)?;
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_window() -> HalfPlaneWindow {
        HalfPlaneWindow::new(0.05, 40.0, 48, 40.0, 256).unwrap()
    }

    #[test]
    fn grids_integrate_gaussian() {
        assert!(HalfLineGrid::reference().gaussian_self_test() < 1e-8);
        let g = HalfLineGrid::new(Spacing::Geometric, 4096, 1e-12, 80.0).unwrap();
        assert!(g.gaussian_self_test() < 1e-8);
        let u = HalfLineGrid::new(Spacing::Uniform, 8193, 1e-12, 80.0).unwrap();
        assert!(u.gaussian_self_test() < 1e-6);
        let r = HalfLineGrid::reference();
        assert!(r.nodes().iter().all(|&x| x > 0.0) && r.weights().iter().all(|&w| w > 0.0));
        assert!((r.x_max() - 80.0).abs() < 1e-9);
        assert!(HalfLineGrid::new(Spacing::Uniform, 2, 0.1, 1.0).is_err());
    }

    #[test]
    fn derivatives_of_smooth_function() {
        let g = HalfLineGrid::reference();
        let f = Wavefunction::from_fn(&g, |x| Complex64::from(x * x * (-x).exp()));
        let d = f.derivative(&g).unwrap();
        let d2 = f.second_derivative(&g).unwrap();
        for (k, &x) in g.nodes().iter().enumerate().skip(1).take(g.len() - 2) {
            let e1 = (2.0 * x - x * x) * (-x).exp();
            let e2 = (2.0 - 4.0 * x + x * x) * (-x).exp();
            assert!((d.values()[k].re - e1).abs() < 5e-4, "x={x}");
            assert!((d2.values()[k].re - e2).abs() < 5e-3, "x={x}");
        }
    }

    #[test]
    fn power_exp_moments() {
        let g = HalfLineGrid::reference();
        let psi = FiducialVector::power_exp(2.0, 1.0, &g).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-10);
        assert!((psi.c_minus_one() - 0.25).abs() < 1e-10);
        assert!((psi.c_gamma(1.0).unwrap() - 1.0 / 24.0).abs() < 1e-10);
        assert!((psi.c_gamma(-2.0).unwrap() - 1.0).abs() < 1e-10);
        assert!(matches!(psi.c_gamma(3.0), Err(QuantError::DivergentMoment { .. })));
        assert!(FiducialVector::power_exp(1.5, 1.0, &g).is_err());
        assert!(FiducialVector::power_exp(2.0, 0.0, &g).is_err());
        let k = psi.kinetic_k();
        assert!((k.k - 1.0).abs() < 1e-8 && k.self_adjoint);
    }

    #[test]
    fn sampled_fiducial_matches_closed_form() {
        let g = HalfLineGrid::reference();
        let psi = FiducialVector::power_exp(2.0, 1.0, &g).unwrap();
        let s = FiducialVector::sampled(&g, psi.samples().scaled(3.0)).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        assert!((s.c_minus_one() - 0.25).abs() < 1e-10);
        let ks = s.kinetic_k().k;
        assert!((ks - 1.0).abs() < 5e-4, "{ks}");
        assert!((s.eval(1.3) - psi.eval(1.3)).norm() < 1e-3);
        assert!(s.closed_form_c_gamma(0.0).is_none());
    }

    #[test]
    fn group_law() {
        let a = HalfPlanePoint::new(2.0, 0.5).unwrap();
        let b = HalfPlanePoint::new(0.7, -1.0).unwrap();
        let ab = a.compose(b);
        assert_eq!((ab.q, ab.p), (1.4, -1.0 / 2.0 + 0.5));
        let e = a.compose(a.inverse());
        assert!((e.q - 1.0).abs() < 1e-15 && e.p.abs() < 1e-15);
        assert!(HalfPlanePoint::new(0.0, 1.0).is_err());
    }

    #[test]
    fn coherent_states_are_unit_vectors() {
        let g = HalfLineGrid::reference();
        let psi = FiducialVector::power_exp(2.0, 1.0, &g).unwrap();
        let id = affine_cs(1.0, 0.0, &psi).unwrap();
        assert_eq!(&id.state, psi.samples());
        let cs = affine_cs(2.0, 5.0, &psi).unwrap();
        assert!((cs.state.norm(&g).unwrap() - 1.0).abs() < 1e-8);
        let ov = cs_overlap(2.0, 5.0, &cs.state, &psi).unwrap();
        assert!((ov - 1.0).norm() < 1e-8);
    }

    #[test]
    fn table_matches_pointwise_overlap() {
        let g = HalfLineGrid::reference();
        let psi = FiducialVector::power_exp(2.0, 1.0, &g).unwrap();
        let phi = Wavefunction::from_fn(&g, |x| power_exp_test(3.0, 1.0)(x));
        let w = HalfPlaneWindow::new(0.5, 4.0, 5, 3.0, 7).unwrap();
        let t = AffineTransformTable::build(&psi, &w, std::slice::from_ref(&phi)).unwrap();
        for (iq, &q) in w.q_nodes().iter().enumerate() {
            for (ip, &p) in w.p_nodes().iter().enumerate() {
                let direct = cs_overlap(q, p, &phi, &psi).unwrap();
                assert!((t.overlap(0, iq, ip) - direct).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn small_window_resolution_and_density() {
        let g = HalfLineGrid::reference();
        let psi = FiducialVector::power_exp(2.0, 1.0, &g).unwrap();
        let t = AffineTransformTable::build(&psi, &small_window(), &[psi.samples().clone()]).unwrap();
        assert!(t.resolution_defect() < 2e-2);
        let rho = t.density(0).unwrap();
        assert!(rho.rho.iter().all(|&r| r >= 0.0));
        let peak = rho.argmax();
        assert!((peak.q - 1.0).abs() < 0.15 && peak.p.abs() < 0.2);
        let d = rho.downsampled(4, 8);
        assert_eq!(d.q.len(), 12);
        assert_eq!(d.p.len(), 32);
        assert!(t.matrix_element(&|_, _| Complex64::from(1.0), 0, 3).is_err());
    }

    #[test]
    fn moment_table_json() {
        let g = HalfLineGrid::reference();
        let psi = FiducialVector::power_exp(2.0, 1.0, &g).unwrap();
        let t = psi.moment_table(&[-2.0, -1.0, 0.0, 1.0]).unwrap();
        let v = serde_json::to_value(&t).unwrap();
        assert!((v["c_gamma"]["-1"].as_f64().unwrap() - 0.25).abs() < 1e-10);
        assert_eq!(v["fiducial"]["family"], "power_exp");
        assert_eq!(v["kinetic"]["self_adjoint"], true);
        assert!(psi.moment_table(&[3.0]).is_err());
    }
}
