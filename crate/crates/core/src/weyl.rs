//! Weyl–Heisenberg covariant integral quantization.
//!
//! A weight `ϖ` with `ϖ(0) = 1` defines the seed operator
//! `M = ∫ D(z) ϖ(z) d²z/π`; its displaced copies `M(z) = D(z) M D(z)†`
//! resolve the identity and quantize a phase-space function `f` as
//! `A_f = ∫ f(z) M(z) d²z/π`. All integrals run over a
//! [`PhaseSpaceQuadrature`].

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, QuantError, Result};
use crate::fock::{
    coherent_coefficients, displacement_into, DensityOperator, FockOperator, Tolerances,
    TruncatedFockSpace,
};
use crate::quadrature::{PhasePoint, PhaseSpaceQuadrature, QuadNode};
use crate::special::{ln_factorials, ln_gamma};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Step of the central-difference Laplacian used for custom weights.
pub const WEIGHT_FD_STEP: f64 = 1e-4;

pub type WeightFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// A phase-space function to quantize, evaluated on quadrature nodes.
pub type PhaseFn<'a> = &'a (dyn Fn(&PhasePoint) -> Complex64 + Sync);

#[derive(Clone)]
pub enum WeightFunction {
    /// `ϖ_s(z) = e^{s|z|²/2}`, `Re s < 1`.
    CahillGlauber { s: Complex64 },
    /// A user-supplied weight with declared symmetries.
    Custom {
        name: String,
        eval: WeightFn,
        /// `ϖ(z) = ϖ(−z)` and real.
        real_even: bool,
        /// `conj(ϖ(−z)) = ϖ(z)`.
        reflection_real: bool,
    },
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::CahillGlauber { s } => write!(f, "CahillGlauber(s = {s})"),
            Self::Custom {
                name,
                real_even,
                reflection_real,
                ..
            } => write!(
                f,
                "Custom({name}, real_even = {real_even}, reflection_real = {reflection_real})"
            ),
        }
    }
}

impl WeightFunction {
    pub fn cahill_glauber(s: impl Into<Complex64>) -> Result<Self> {
        let s = s.into();
        if !(s.re.is_finite() && s.im.is_finite()) || s.re >= 1.0 {
            return Err(invalid("s", format!("Cahill–Glauber weight needs Re s < 1, got {s}")));
        }
        Ok(Self::CahillGlauber { s })
    }

    pub fn custom<F>(name: impl Into<String>, eval: F, real_even: bool, reflection_real: bool) -> Result<Self>
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        let at_zero = eval(ZERO);
        if (at_zero - ONE).norm() > 1e-12 {
            return Err(invalid(
                "weight",
                format!("a weight must satisfy w(0) = 1, got {at_zero}"),
            ));
        }
        Ok(Self::Custom {
            name: name.into(),
            eval: Arc::new(eval),
            real_even,
            reflection_real,
        })
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Self::CahillGlauber { s } => (s * (0.5 * z.norm_sqr())).exp(),
            Self::Custom { eval, .. } => eval(z),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::CahillGlauber { s } if s.im == 0.0 => format!("cahill-glauber(s={})", s.re),
            Self::CahillGlauber { s } => format!("cahill-glauber(s={s})"),
            Self::Custom { name, .. } => name.clone(),
        }
    }

    pub fn is_real_even(&self) -> bool {
        match self {
            Self::CahillGlauber { s } => s.im == 0.0,
            Self::Custom { real_even, .. } => *real_even,
        }
    }

    pub fn has_reflection_symmetry(&self) -> bool {
        match self {
            Self::CahillGlauber { s } => s.im == 0.0,
            Self::Custom { reflection_real, .. } => *reflection_real,
        }
    }

    /// `∂_z ∂_z̄ ϖ` at the origin: `s/2` for Cahill–Glauber, otherwise a
    /// central-difference Laplacian over four with step [`WEIGHT_FD_STEP`].
    pub fn laplacian_at_origin(&self) -> Complex64 {
        match self {
            Self::CahillGlauber { s } => s * 0.5,
            Self::Custom { eval, .. } => {
                let h = WEIGHT_FD_STEP;
                let sum = eval(Complex64::new(h, 0.0))
                    + eval(Complex64::new(-h, 0.0))
                    + eval(Complex64::new(0.0, h))
                    + eval(Complex64::new(0.0, -h))
                    - eval(ZERO) * 4.0;
                sum / (4.0 * h * h)
            }
        }
    }

    /// Sampled `(max |ϖ(z) − ϖ(−z)| + max |Im ϖ|, max |conj ϖ(−z) − ϖ(z)|)`
    /// over a fixed set of points; lets callers confirm declared flags.
    pub fn symmetry_defects(&self) -> (f64, f64) {
        let mut even: f64 = 0.0;
        let mut refl: f64 = 0.0;
        for i in 0..12 {
            for r in [0.1, 0.5, 1.0, 1.7, 2.5] {
                let z = Complex64::from_polar(r, 0.37 + i as f64 * PI / 6.0);
                let a = self.eval(z);
                let b = self.eval(-z);
                even = even.max((a - b).norm() + a.im.abs());
                refl = refl.max((b.conj() - a).norm());
            }
        }
        (even, refl)
    }
}

/// `M = Σ_k w_k ϖ(z_k) D(z_k)` with closed-form displacements.
///
/// Cahill–Glauber weights with `Re s ≥ 0` are rejected: `D(z)ϖ_s(z)` does not
/// decay and the analytic [`cg_m_analytic`] must be used instead.
pub fn build_m(
    weight: &WeightFunction,
    quad: &PhaseSpaceQuadrature,
    space: &TruncatedFockSpace,
) -> Result<FockOperator> {
    if let WeightFunction::CahillGlauber { s } = weight {
        if s.re >= 0.0 {
            return Err(QuantError::Integrability(format!(
                "Cahill–Glauber s = {s} has Re s >= 0; use the analytic seed"
            )));
        }
    }
    let dim = space.dim();
    let lf = ln_factorials(dim);
    let weights: Vec<Complex64> = quad
        .nodes()
        .iter()
        .map(|n| weight.eval(n.point.z) * n.weight)
        .collect();
    if let Some(k) = weights.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
        let z = quad.nodes()[k].point.z;
        return Err(QuantError::NodeEvaluation { re: z.re, im: z.im });
    }
    let partials: Vec<DMatrix<Complex64>> = quad
        .nodes()
        .par_chunks(CHUNK)
        .zip(weights.par_chunks(CHUNK))
        .map(|(nodes, ws)| {
            let mut acc = DMatrix::zeros(dim, dim);
            let mut d = DMatrix::zeros(dim, dim);
            for (node, &w) in nodes.iter().zip(ws) {
                if w == ZERO {
                    continue;
                }
                displacement_into(&mut d, node.point.z, &lf);
                acc.zip_apply(&d, |a, b| *a += w * b);
            }
            acc
        })
        .collect();
    let m = sum_in_order(partials, dim);
    FockOperator::new(format!("M[{}]", weight.name()), m)
}

/// `M_s = (2/(1−s)) ((s+1)/(s−1))^{a†a}`; `s = 0` gives twice the parity,
/// `s = −1` the vacuum projector.
pub fn cg_m_analytic(s: impl Into<Complex64>, space: &TruncatedFockSpace) -> Result<FockOperator> {
    let s = s.into();
    if !(s.re.is_finite() && s.im.is_finite()) || s.re >= 1.0 {
        return Err(invalid("s", format!("need Re s < 1, got {s}")));
    }
    let pref = 2.0 / (ONE - s);
    let ratio = (s + 1.0) / (s - 1.0);
    let mut pw = ONE;
    let diag: Vec<Complex64> = (0..space.dim())
        .map(|_| {
            let v = pref * pw;
            pw *= ratio;
            v
        })
        .collect();
    Ok(FockOperator::from_diagonal(format!("M_s(s={s})"), diag.into_iter()))
}

const CHUNK: usize = 64;

fn sum_in_order(parts: Vec<DMatrix<Complex64>>, dim: usize) -> DMatrix<Complex64> {
    parts
        .into_iter()
        .fold(DMatrix::zeros(dim, dim), |acc, p| acc + p)
}

#[derive(Debug, Clone)]
enum SeedShape {
    VacuumProjector,
    /// `c·𝖯`; displaced exactly as `c·𝖯 D(−2z)`, which avoids the
    /// truncation error of `D 𝖯 D†` for a non-decaying seed.
    Parity(Complex64),
    Diagonal(Vec<Complex64>),
    Dense,
}

fn classify(seed: &FockOperator) -> SeedShape {
    let m = seed.matrix();
    let n = m.nrows();
    let scale = seed.max_abs().max(1e-300);
    let mut off = 0.0_f64;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                off = off.max(m[(i, j)].norm());
            }
        }
    }
    if off > 1e-15 * scale {
        return SeedShape::Dense;
    }
    let diag = seed.diagonal();
    let c = diag[0];
    if c == ONE && diag[1..].iter().all(|&d| d == ZERO) {
        SeedShape::VacuumProjector
    } else if c != ZERO && diag.iter().enumerate().all(|(n, &d)| d == if n % 2 == 0 { c } else { -c }) {
        SeedShape::Parity(c)
    } else {
        SeedShape::Diagonal(diag)
    }
}

/// Weyl–Heisenberg quantizer: a weight, its seed operator `M` (cached) and
/// the quadrature used for every phase-space integral. Immutable once built.
#[derive(Debug, Clone)]
pub struct WhQuantizer {
    space: TruncatedFockSpace,
    weight: WeightFunction,
    quad: PhaseSpaceQuadrature,
    seed: FockOperator,
    shape: SeedShape,
    ln_fact: Vec<f64>,
}

impl WhQuantizer {
    /// Cahill–Glauber weights get the analytic seed; custom weights are
    /// integrated with [`build_m`].
    pub fn new(space: TruncatedFockSpace, weight: WeightFunction, quad: PhaseSpaceQuadrature) -> Result<Self> {
        let seed = match &weight {
            WeightFunction::CahillGlauber { s } => cg_m_analytic(*s, &space)?,
            WeightFunction::Custom { .. } => build_m(&weight, &quad, &space)?,
        };
        Ok(Self::with_seed(space, weight, quad, seed))
    }

    /// Always integrates the seed by quadrature.
    pub fn from_quadrature(
        space: TruncatedFockSpace,
        weight: WeightFunction,
        quad: PhaseSpaceQuadrature,
    ) -> Result<Self> {
        let seed = build_m(&weight, &quad, &space)?;
        Ok(Self::with_seed(space, weight, quad, seed))
    }

    pub fn with_seed(
        space: TruncatedFockSpace,
        weight: WeightFunction,
        quad: PhaseSpaceQuadrature,
        seed: FockOperator,
    ) -> Self {
        let shape = classify(&seed);
        let ln_fact = ln_factorials(space.dim());
        Self {
            space,
            weight,
            quad,
            seed,
            shape,
            ln_fact,
        }
    }

    /// The standard coherent-state quantizer (`s = −1`).
    pub fn coherent(space: TruncatedFockSpace, quad: PhaseSpaceQuadrature) -> Self {
        let weight = WeightFunction::CahillGlauber { s: -ONE };
        let seed = cg_m_analytic(-1.0, &space).expect("s = -1 is admissible");
        Self::with_seed(space, weight, quad, seed)
    }

    /// Same seed, different quadrature.
    pub fn with_quadrature(&self, quad: PhaseSpaceQuadrature) -> Self {
        Self {
            quad,
            ..self.clone()
        }
    }

    pub fn space(&self) -> &TruncatedFockSpace {
        &self.space
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    pub fn quadrature(&self) -> &PhaseSpaceQuadrature {
        &self.quad
    }

    pub fn seed(&self) -> &FockOperator {
        &self.seed
    }

    /// Seed is `|e_0⟩⟨e_0|`, so `M(z)` is the coherent-state projector.
    pub fn is_coherent(&self) -> bool {
        matches!(self.shape, SeedShape::VacuumProjector)
    }

    pub fn seed_is_diagonal(&self) -> bool {
        !matches!(self.shape, SeedShape::Dense)
    }

    /// `M(z) = D(z) M D(z)†`.
    pub fn displaced_seed(&self, z: Complex64) -> FockOperator {
        let dim = self.space.dim();
        let mut out = DMatrix::zeros(dim, dim);
        let mut d = DMatrix::zeros(dim, dim);
        self.displaced_into(&mut out, &mut d, z);
        FockOperator::from_matrix_unchecked("M(z)", out)
    }

    fn displaced_into(&self, out: &mut DMatrix<Complex64>, scratch: &mut DMatrix<Complex64>, z: Complex64) {
        match &self.shape {
            SeedShape::VacuumProjector => {
                let v = coherent_coefficients(self.space.dim(), z, &self.ln_fact);
                out.gemm(ONE, &v, &v.adjoint(), ZERO);
            }
            SeedShape::Parity(c) => {
                displacement_into(out, -2.0 * z, &self.ln_fact);
                for (m, mut row) in out.row_iter_mut().enumerate() {
                    row *= if m % 2 == 0 { *c } else { -*c };
                }
            }
            SeedShape::Diagonal(diag) => {
                displacement_into(scratch, z, &self.ln_fact);
                let dd = scratch.clone();
                for (j, mut col) in scratch.column_iter_mut().enumerate() {
                    col *= diag[j];
                }
                out.gemm(ONE, scratch, &dd.adjoint(), ZERO);
            }
            SeedShape::Dense => {
                displacement_into(scratch, z, &self.ln_fact);
                let dm = &*scratch * self.seed.matrix();
                out.gemm(ONE, &dm, &scratch.adjoint(), ZERO);
            }
        }
    }

    /// Quantizes several functions in one pass over the nodes.
    pub fn quantize_batch(&self, fs: &[PhaseFn<'_>]) -> Result<Vec<FockOperator>> {
        let nodes = self.quad.nodes();
        let nf = fs.len();
        let mut values = Vec::with_capacity(nodes.len() * nf);
        for node in nodes {
            for f in fs {
                let v = f(&node.point);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(QuantError::NodeEvaluation {
                        re: node.point.z.re,
                        im: node.point.z.im,
                    });
                }
                values.push(v * node.weight);
            }
        }
        let mats = self.accumulate(nodes, &values, nf);
        Ok(mats
            .into_iter()
            .map(|m| FockOperator::from_matrix_unchecked("A_f", m))
            .collect())
    }

    /// `A_f = Σ_k w_k f(z_k) M(z_k)`.
    pub fn quantize(&self, f: PhaseFn<'_>) -> Result<FockOperator> {
        Ok(self.quantize_batch(&[f])?.remove(0))
    }

    fn accumulate(&self, nodes: &[QuadNode], values: &[Complex64], nf: usize) -> Vec<DMatrix<Complex64>> {
        let dim = self.space.dim();
        let partials: Vec<Vec<DMatrix<Complex64>>> = nodes
            .par_chunks(CHUNK)
            .zip(values.par_chunks(CHUNK * nf))
            .map(|(chunk, vals)| {
                let mut acc = vec![DMatrix::zeros(dim, dim); nf];
                let mut mz = DMatrix::zeros(dim, dim);
                let mut scratch = DMatrix::zeros(dim, dim);
                for (k, node) in chunk.iter().enumerate() {
                    let row = &vals[k * nf..(k + 1) * nf];
                    if row.iter().all(|&v| v == ZERO) {
                        continue;
                    }
                    self.displaced_into(&mut mz, &mut scratch, node.point.z);
                    for (a, &v) in acc.iter_mut().zip(row) {
                        if v != ZERO {
                            a.zip_apply(&mz, |x, y| *x += v * y);
                        }
                    }
                }
                acc
            })
            .collect();
        let mut out = vec![DMatrix::zeros(dim, dim); nf];
        for part in partials {
            for (o, p) in out.iter_mut().zip(part) {
                *o += p;
            }
        }
        out
    }

    /// Safe-block max-norm of `Σ w_k M(z_k) − I`.
    pub fn resolution_defect(&self) -> f64 {
        let one = |_: &PhasePoint| ONE;
        let a = self.quantize(&one).expect("constant function is finite");
        a.block_distance(&self.space.identity(), self.space.safe_block())
    }

    /// Safe-block norm of `A_{f(z−z₀)} − D(z₀) A_f D(z₀)†`.
    pub fn covariance_defect(&self, f: PhaseFn<'_>, z0: Complex64) -> Result<f64> {
        let shifted = |p: &PhasePoint| f(&PhasePoint::from_z(p.z - z0));
        let ops = self.quantize_batch(&[f, &shifted])?;
        let d = FockOperator::from_matrix_unchecked("D", {
            let mut m = DMatrix::zeros(self.space.dim(), self.space.dim());
            displacement_into(&mut m, z0, &self.ln_fact);
            m
        });
        let moved = &(&d * &ops[0]) * &d.adjoint();
        Ok(ops[1].block_distance(&moved, self.space.safe_block()))
    }

    /// Safe-block norm of `U(θ) A_f U(−θ) − A_{f(J, γ−θ)}` with
    /// `U(θ)|e_n⟩ = e^{i(n+ν)θ}|e_n⟩`. The right-hand side is integrated on
    /// the rule rotated by `θ`, so a branch cut of `f` at `γ = 0` stays on
    /// the rule's boundary.
    pub fn angular_covariance_defect(&self, theta: f64, nu: f64, f: PhaseFn<'_>) -> Result<f64> {
        if !self.seed_is_diagonal() {
            return Err(QuantError::NotDiagonal);
        }
        let a = self.quantize(f)?;
        let u = FockOperator::from_diagonal(
            "U",
            (0..self.space.dim()).map(|n| Complex64::from_polar(1.0, (n as f64 + nu) * theta)),
        );
        let lhs = &(&u * &a) * &u.adjoint();
        let rotated = self.with_quadrature(self.quad.rotated(theta)?);
        let shifted = |p: &PhasePoint| {
            let angle = p.angle - theta;
            f(&PhasePoint {
                z: Complex64::from_polar(p.action.sqrt(), angle),
                action: p.action,
                angle,
            })
        };
        let rhs = rotated.quantize(&shifted)?;
        Ok(lhs.block_distance(&rhs, self.space.safe_block()))
    }

    /// `|tr(A_f† A_f) − Σ w_k |f(z_k)|²|`; vanishes for `|ϖ| = 1`.
    pub fn trace_duality_defect(&self, f: PhaseFn<'_>) -> Result<f64> {
        let a = self.quantize(f)?;
        let lhs = a.adjoint().trace_product(&a).re;
        let rhs: f64 = self
            .quad
            .nodes()
            .iter()
            .map(|n| n.weight * f(&n.point).norm_sqr())
            .sum();
        Ok((lhs - rhs).abs())
    }
}

/// Ground-state energy `E₀ = 1/2 − ∂∂̄ϖ|₀` of the quantized `|z|²` and the
/// minimum `E_m = −∂∂̄ϖ|₀` of the quantized potential; `E₀ − E_m = 1/2`.
pub fn ho_shifts(weight: &WeightFunction) -> (f64, f64) {
    let lap = weight.laplacian_at_origin().re;
    let em = -lap;
    (em + 0.5, em)
}

/// The discontinuous angle `γ ∈ [0, 2π)`.
pub fn angle_function(p: &PhasePoint) -> Complex64 {
    Complex64::from(p.angle.rem_euclid(2.0 * PI))
}

/// Coherent-state quantization of the angle, in closed form:
/// `π` on the diagonal and `i Γ((n+n')/2 + 1) / (√(n! n'!) (n' − n))` off it.
pub fn angle_operator_analytic(space: &TruncatedFockSpace) -> FockOperator {
    let dim = space.dim();
    let lf = ln_factorials(dim);
    let mut m = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        for k in 0..dim {
            m[(n, k)] = if n == k {
                Complex64::from(PI)
            } else {
                let mag = (ln_gamma((n + k) as f64 / 2.0 + 1.0) - 0.5 * (lf[n] + lf[k])).exp();
                Complex64::new(0.0, mag / (k as f64 - n as f64))
            };
        }
    }
    FockOperator::from_matrix_unchecked("A_angle", m)
}

/// Quadrature route for the same operator: the action-angle integral of
/// `γ |z⟩⟨z|`. Use a Gauss–Legendre angular rule
/// ([`PhaseSpaceQuadrature::angle_reference`]); the trapezoid rule is only
/// first-order accurate across the jump at `γ = 0`.
pub fn angle_operator_numeric(space: &TruncatedFockSpace, quad: &PhaseSpaceQuadrature) -> FockOperator {
    let q = WhQuantizer::coherent(*space, quad.clone());
    q.quantize(&angle_function)
        .expect("angle function is bounded")
        .with_label("A_angle(numeric)")
}

/// `s = −coth(ω / 2T)` in units `ħ = k_B = 1`; `T = 0` maps to the limit `−1`.
pub fn thermal_s(omega: f64, temperature: f64) -> Result<f64> {
    check_thermal(omega, temperature)?;
    if temperature == 0.0 {
        return Ok(-1.0);
    }
    Ok(-1.0 / (omega / (2.0 * temperature)).tanh())
}

fn check_thermal(omega: f64, temperature: f64) -> Result<()> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(invalid("omega", format!("need omega > 0, got {omega}")));
    }
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(invalid("temperature", format!("need T >= 0, got {temperature}")));
    }
    Ok(())
}

/// Truncated Gibbs state together with the probability mass lost beyond the
/// truncation.
#[derive(Debug, Clone)]
pub struct ThermalState {
    pub rho: DensityOperator,
    pub tail_mass: f64,
}

impl ThermalState {
    /// `Σ n ρ_nn` over the retained levels.
    pub fn mean_occupation(&self) -> f64 {
        self.rho
            .operator()
            .diagonal()
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.re)
            .sum()
    }
}

/// `(1 − e^{−ω/T}) Σ e^{−nω/T} |e_n⟩⟨e_n|`.
pub fn boltzmann_rho(omega: f64, temperature: f64, space: &TruncatedFockSpace) -> Result<ThermalState> {
    check_thermal(omega, temperature)?;
    let dim = space.dim();
    let (diag, tail): (Vec<Complex64>, f64) = if temperature == 0.0 {
        let mut d = vec![ZERO; dim];
        d[0] = ONE;
        (d, 0.0)
    } else {
        let x = omega / temperature;
        let pref = -(-x).exp_m1();
        (
            (0..dim).map(|n| Complex64::from(pref * (-(n as f64) * x).exp())).collect(),
            (-(dim as f64) * x).exp(),
        )
    };
    let op = FockOperator::from_diagonal("rho_thermal", diag.into_iter());
    let tol = Tolerances {
        trace: Tolerances::default().trace + tail,
        ..Tolerances::default()
    };
    Ok(ThermalState {
        rho: DensityOperator::try_new(op, tol)?,
        tail_mass: tail,
    })
}

/// Trace-duality defect for the Wigner–Weyl case `s = 0`, whose seed `2𝖯`
/// is taken in closed form.
pub fn trace_duality_defect(
    space: &TruncatedFockSpace,
    quad: &PhaseSpaceQuadrature,
    f: PhaseFn<'_>,
) -> Result<f64> {
    warn!("s = 0 seed cannot be integrated by quadrature; using the closed form 2P");
    let q = WhQuantizer::new(*space, WeightFunction::cahill_glauber(0.0)?, quad.clone())?;
    q.trace_duality_defect(f)
}
