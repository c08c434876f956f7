//! Lower symbols and the Berezin transform: the way back from operators to
//! phase-space functions.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, QuantError, Result};
use crate::fock::{coherent_coefficients, FockOperator, TruncatedFockSpace};
use crate::quadrature::{PhasePoint, PhaseSpaceQuadrature};
use crate::special::ln_factorials;
use crate::weyl::{PhaseFn, WhQuantizer};

/// A family of displaced density operators `ρ(z) = D(z) ρ₀ D(z)†`.
#[derive(Debug, Clone)]
pub struct DensityFamily {
    inner: WhQuantizer,
    ln_fact: Vec<f64>,
}

impl DensityFamily {
    /// Coherent-state projectors `|z⟩⟨z|`.
    pub fn coherent(space: TruncatedFockSpace) -> Self {
        let quad = PhaseSpaceQuadrature::new(1, 1).expect("order 1 is valid");
        Self::wrap(WhQuantizer::coherent(space, quad))
    }

    /// The displaced seeds of a quantizer; the seed must be a density
    /// operator (Hermitian, positive, unit trace).
    pub fn from_quantizer(q: &WhQuantizer) -> Result<Self> {
        let seed = q.seed();
        let tr = seed.trace();
        if seed.hermitian_defect() > 1e-10 || (tr - 1.0).norm() > 1e-8 || seed.min_eigenvalue() < -1e-10 {
            return Err(QuantError::NotDensity(format!(
                "seed of {} is not a density operator (trace {tr})",
                q.weight().name()
            )));
        }
        Ok(Self::wrap(q.clone()))
    }

    fn wrap(inner: WhQuantizer) -> Self {
        let ln_fact = ln_factorials(inner.space().dim());
        Self { inner, ln_fact }
    }

    pub fn is_coherent(&self) -> bool {
        self.inner.is_coherent()
    }

    pub fn space(&self) -> &TruncatedFockSpace {
        self.inner.space()
    }

    pub fn at(&self, z: Complex64) -> FockOperator {
        self.inner.displaced_seed(z)
    }

    fn coherent_vector(&self, z: Complex64) -> nalgebra::DVector<Complex64> {
        coherent_coefficients(self.space().dim(), z, &self.ln_fact)
    }
}

/// `tr(ρ̃(z) ρ(z'))`; for two coherent families this is `|⟨z|z'⟩|²`.
pub fn overlap_kernel(rho_a: &DensityFamily, rho_b: &DensityFamily, z: Complex64, zp: Complex64) -> f64 {
    if rho_a.is_coherent() && rho_b.is_coherent() {
        rho_a.coherent_vector(z).dotc(&rho_b.coherent_vector(zp)).norm_sqr()
    } else {
        rho_a.at(z).trace_product(&rho_b.at(zp)).re
    }
}

/// `tr(ρ̃(z) A)`.
pub fn lower_symbol(a: &FockOperator, family: &DensityFamily, z: Complex64) -> Complex64 {
    if family.is_coherent() {
        let v = family.coherent_vector(z);
        v.dotc(&(a.matrix() * &v))
    } else {
        family.at(z).trace_product(a)
    }
}

/// Rectangular grid in `(Re z, Im z)`, optionally clipped to a disk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingWindow {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub n_re: usize,
    pub n_im: usize,
    pub max_modulus: Option<f64>,
}

impl SamplingWindow {
    pub fn new(re: (f64, f64), im: (f64, f64), n_re: usize, n_im: usize) -> Result<Self> {
        if n_re < 2 || n_im < 2 {
            return Err(invalid("grid", "need at least 2 samples per axis"));
        }
        if !(re.0 < re.1 && im.0 < im.1) {
            return Err(invalid("window", "empty rectangle"));
        }
        Ok(Self {
            re,
            im,
            n_re,
            n_im,
            max_modulus: None,
        })
    }

    /// Square grid on `[−r, r]²` keeping only `|z| ≤ r`.
    pub fn disk(radius: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(invalid("radius", "must be positive"));
        }
        let mut w = Self::new((-radius, radius), (-radius, radius), n, n)?;
        w.max_modulus = Some(radius);
        Ok(w)
    }

    pub fn points(&self) -> Vec<Complex64> {
        let (dx, dy) = self.spacing();
        let lim = self.max_modulus.map(|r| r * (1.0 + 1e-12));
        let mut out = Vec::with_capacity(self.n_re * self.n_im);
        for j in 0..self.n_im {
            for i in 0..self.n_re {
                let z = Complex64::new(self.re.0 + i as f64 * dx, self.im.0 + j as f64 * dy);
                if lim.is_none_or(|r| z.norm() <= r) {
                    out.push(z);
                }
            }
        }
        out
    }

    pub fn spacing(&self) -> (f64, f64) {
        (
            (self.re.1 - self.re.0) / (self.n_re - 1) as f64,
            (self.im.1 - self.im.0) / (self.n_im - 1) as f64,
        )
    }
}

/// A function sampled on a [`SamplingWindow`].
#[derive(Debug, Clone)]
pub struct SymbolField {
    window: SamplingWindow,
    points: Vec<Complex64>,
    values: Vec<Complex64>,
}

#[derive(Serialize)]
struct FieldRow {
    re_z: f64,
    im_z: f64,
    value_re: f64,
    value_im: f64,
}

impl SymbolField {
    pub fn sample(window: &SamplingWindow, f: PhaseFn<'_>) -> Result<Self> {
        let points = window.points();
        let values: Vec<Complex64> = points.par_iter().map(|&z| f(&PhasePoint::from_z(z))).collect();
        Self::from_values(window.clone(), points, values)
    }

    fn from_values(window: SamplingWindow, points: Vec<Complex64>, values: Vec<Complex64>) -> Result<Self> {
        if let Some(k) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(QuantError::NodeEvaluation {
                re: points[k].re,
                im: points[k].im,
            });
        }
        Ok(Self { window, points, values })
    }

    pub fn window(&self) -> &SamplingWindow {
        &self.window
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        self.points.iter().copied().zip(self.values.iter().copied())
    }

    /// CSV with header `re_z,im_z,value_re,value_im`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for (z, v) in self.iter() {
            w.serialize(FieldRow {
                re_z: z.re,
                im_z: z.im,
                value_re: v.re,
                value_im: v.im,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `f̌(z) = Σ_k w_k f(z_k) tr(ρ̃(z) M(z_k))` over the quantizer's nodes.
///
/// With a coherent family on both sides the kernel is the Gaussian
/// `e^{−|z−z_k|²}` and is evaluated in closed form; otherwise every
/// `M(z_k)` is formed once and traced against each `ρ̃(z)`.
pub fn berezin_transform(
    f: PhaseFn<'_>,
    quantizer: &WhQuantizer,
    family: &DensityFamily,
    window: &SamplingWindow,
) -> Result<SymbolField> {
    let nodes = quantizer.quadrature().nodes();
    let mut fw = Vec::with_capacity(nodes.len());
    for n in nodes {
        let v = f(&n.point);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(QuantError::NodeEvaluation {
                re: n.point.z.re,
                im: n.point.z.im,
            });
        }
        fw.push(v * n.weight);
    }
    let points = window.points();
    let values: Vec<Complex64> = if quantizer.is_coherent() && family.is_coherent() {
        points
            .par_iter()
            .map(|&z| {
                nodes
                    .iter()
                    .zip(&fw)
                    .map(|(n, &c)| c * (-(z - n.point.z).norm_sqr()).exp())
                    .sum()
            })
            .collect()
    } else {
        let rhos: Vec<FockOperator> = points.iter().map(|&z| family.at(z)).collect();
        let mut acc = vec![Complex64::new(0.0, 0.0); points.len()];
        for (n, &c) in nodes.iter().zip(&fw) {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let m = quantizer.displaced_seed(n.point.z);
            acc.par_iter_mut()
                .zip(rhos.par_iter())
                .for_each(|(a, r)| *a += c * r.trace_product(&m));
        }
        acc
    };
    SymbolField::from_values(window.clone(), points, values)
}

/// Coherent-state Berezin transform at width `ε`:
/// `f̌_ε(z) = ∫ f(z') e^{−|z−z'|²/ε} d²z'/(πε)`, integrated on the
/// quadrature recentred at each sample point. `ε = 1` is the plain
/// coherent-state transform and `ε → 0` approaches `f`.
pub fn berezin_transform_scaled(
    f: PhaseFn<'_>,
    eps: f64,
    quad: &PhaseSpaceQuadrature,
    window: &SamplingWindow,
) -> Result<SymbolField> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(invalid("eps", format!("need eps > 0, got {eps}")));
    }
    let shifts: Vec<(Complex64, f64)> = quad
        .nodes()
        .iter()
        .map(|n| (n.point.z * eps.sqrt(), n.weight * (-n.point.action).exp()))
        .collect();
    let points = window.points();
    let values: Vec<Complex64> = points
        .par_iter()
        .map(|&z| shifts.iter().map(|&(u, w)| f(&PhasePoint::from_z(z + u)) * w).sum())
        .collect();
    SymbolField::from_values(window.clone(), points, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldNorm {
    Sup,
    L2,
}

/// Sup or grid-L2 (`(Σ |Δ|² ΔxΔy)^{1/2}`) distance between two fields on the
/// same grid.
pub fn classical_distance(f: &SymbolField, g: &SymbolField, norm: FieldNorm) -> Result<f64> {
    if f.window != g.window || f.points.len() != g.points.len() {
        return Err(QuantError::GridMismatch {
            expected: f.points.len(),
            got: g.points.len(),
        });
    }
    let diffs = f.values.iter().zip(&g.values).map(|(a, b)| (a - b).norm());
    Ok(match norm {
        FieldNorm::Sup => diffs.fold(0.0, f64::max),
        FieldNorm::L2 => {
            let (dx, dy) = f.window.spacing();
            (diffs.map(|d| d * d).sum::<f64>() * dx * dy).sqrt()
        }
    })
}
