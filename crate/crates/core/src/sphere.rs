//! Phase space of motion on the 2-sphere and its complexification
//! `a = cosh J x + i (sinh J / J) p` onto `{a ∈ ℂ³ : a·a = 1}`.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::affine::{HalfLineGrid, Wavefunction};
use crate::error::{invalid, QuantError, Result};
use crate::quadrature::GaussLegendre;
use crate::special::sinhc;

pub type Vec3 = [f64; 3];
pub type CVec3 = [Complex64; 3];

/// Tolerance for accepting `|x| = 1` and `x·p = 0` before snapping.
pub const ACCEPT_TOL: f64 = 1e-8;

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// `(x, p)` with `|x| = 1`, `x·p = 0`; `J = ‖x × p‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpherePhasePoint {
    x: Vec3,
    p: Vec3,
    j: f64,
}

impl SpherePhasePoint {
    /// Accepts inputs within [`ACCEPT_TOL`] of the constraints and projects
    /// them onto it exactly (`x ← x/|x|`, `p ← p − (x·p)x`).
    pub fn new(x: Vec3, p: Vec3) -> Result<Self> {
        if x.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(invalid("point", "non-finite coordinates"));
        }
        let nx = norm(&x);
        if (nx - 1.0).abs() > ACCEPT_TOL {
            return Err(invalid("x", format!("need |x| = 1, got {nx}")));
        }
        let xp = dot(&x, &p);
        if xp.abs() > ACCEPT_TOL {
            return Err(invalid("p", format!("need x·p = 0, got {xp}")));
        }
        let x = x.map(|v| v / nx);
        let xp = dot(&x, &p);
        let p = [p[0] - xp * x[0], p[1] - xp * x[1], p[2] - xp * x[2]];
        let j = norm(&cross(&x, &p));
        Ok(Self { x, p, j })
    }

    pub fn x(&self) -> Vec3 {
        self.x
    }

    pub fn p(&self) -> Vec3 {
        self.p
    }

    pub fn action(&self) -> f64 {
        self.j
    }
}

/// A point of the complex sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexSpherePoint {
    pub a: CVec3,
}

impl ComplexSpherePoint {
    /// `a·a` with the complex bilinear (not Hermitian) form.
    pub fn square(&self) -> Complex64 {
        bilinear_dot(&self.a, &self.a)
    }

    /// `|a·a − 1|`. Rounding grows like `ε cosh² J`.
    pub fn constraint_defect(&self) -> f64 {
        (self.square() - 1.0).norm()
    }
}

pub fn bilinear_dot(a: &CVec3, b: &CVec3) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn complexify(point: &SpherePhasePoint) -> ComplexSpherePoint {
    let ch = point.j.cosh();
    let sc = sinhc(point.j);
    let a = [0, 1, 2].map(|k| Complex64::new(ch * point.x[k], sc * point.p[k]));
    ComplexSpherePoint { a }
}

/// Inverse of [`complexify`]: `J = asinh |Im a|`, `x = Re a / cosh J`,
/// `p = Im a · J / sinh J`.
pub fn reconstruct(c: &ComplexSpherePoint) -> Result<SpherePhasePoint> {
    let re: Vec3 = c.a.map(|v| v.re);
    let im: Vec3 = c.a.map(|v| v.im);
    let j = norm(&im).asinh();
    let ch = j.cosh();
    let sc = sinhc(j);
    SpherePhasePoint::new(re.map(|v| v / ch), im.map(|v| v / sc))
}

/// `cos Ω = a·ŷ`.
pub fn complex_angle(a: &ComplexSpherePoint, yhat: Vec3) -> Result<Complex64> {
    let n = norm(&yhat);
    if (n - 1.0).abs() > ACCEPT_TOL {
        return Err(invalid("yhat", format!("need a unit vector, got norm {n}")));
    }
    Ok(bilinear_dot(&a.a, &yhat.map(Complex64::from)))
}

/// Gauss–Legendre in `cos θ` times a uniform azimuthal rule; weights sum to
/// `4π`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereMesh {
    directions: Vec<Vec3>,
    weights: Vec<f64>,
}

impl SphereMesh {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(invalid("mesh", "need at least one node per axis"));
        }
        let gl = GaussLegendre::new(n_theta)?;
        let dphi = 2.0 * PI / n_phi as f64;
        let mut directions = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (&c, &w) in gl.nodes.iter().zip(&gl.weights) {
            let s = (1.0 - c * c).max(0.0).sqrt();
            for k in 0..n_phi {
                let phi = k as f64 * dphi;
                directions.push([s * phi.cos(), s * phi.sin(), c]);
                weights.push(w * dphi);
            }
        }
        Ok(Self { directions, weights })
    }

    pub fn directions(&self) -> &[Vec3] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn sample(&self, f: impl Fn(Vec3) -> Complex64) -> Vec<Complex64> {
        self.directions.iter().map(|&y| f(y)).collect()
    }

    /// `(Σ w |𝒴|²)^{1/2}`.
    pub fn norm(&self, values: &[Complex64]) -> Result<f64> {
        self.check(values)?;
        Ok(values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * v.norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    fn check(&self, values: &[Complex64]) -> Result<()> {
        if values.len() != self.len() {
            return Err(QuantError::GridMismatch {
                expected: self.len(),
                got: values.len(),
            });
        }
        Ok(())
    }
}

/// `Ψ(r, ŷ) = r ψ(r) 𝒴(ŷ)` on the product of a half-line grid and a sphere
/// mesh. Norms use the measure `dr dΩ`, so `‖Ψ‖ = ‖rψ‖ ‖𝒴‖`.
#[derive(Debug, Clone)]
pub struct SeparableState {
    n_radial: usize,
    n_angular: usize,
    /// Row-major in `(r, ŷ)`.
    values: Vec<Complex64>,
    norm: f64,
}

impl SeparableState {
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_radial, self.n_angular)
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }
}

pub fn assemble_separable_state(
    radial: &Wavefunction,
    angular: &[Complex64],
    grid: &HalfLineGrid,
    mesh: &SphereMesh,
) -> Result<SeparableState> {
    if radial.len() != grid.len() {
        return Err(QuantError::GridMismatch {
            expected: grid.len(),
            got: radial.len(),
        });
    }
    mesh.check(angular)?;
    let r_psi: Vec<Complex64> = grid.nodes().iter().zip(radial.values()).map(|(&r, v)| v * r).collect();
    let mut values = Vec::with_capacity(r_psi.len() * angular.len());
    let mut sq = 0.0;
    for (rv, &wr) in r_psi.iter().zip(grid.weights()) {
        for (yv, &wy) in angular.iter().zip(mesh.weights()) {
            let v = rv * yv;
            sq += wr * wy * v.norm_sqr();
            values.push(v);
        }
    }
    Ok(SeparableState {
        n_radial: r_psi.len(),
        n_angular: angular.len(),
        values,
        norm: sq.sqrt(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexifiedRecord {
    pub x: Vec3,
    pub p: Vec3,
    pub action: f64,
    pub a_re: Vec3,
    pub a_im: Vec3,
}

impl ComplexifiedRecord {
    pub fn new(point: &SpherePhasePoint) -> Self {
        let c = complexify(point);
        Self {
            x: point.x,
            p: point.p,
            action: point.j,
            a_re: c.a.map(|v| v.re),
            a_im: c.a.map(|v| v.im),
        }
    }
}

/// JSON array of [`ComplexifiedRecord`]s.
pub fn write_complexified_json(path: impl AsRef<Path>, points: &[SpherePhasePoint]) -> Result<()> {
    let records: Vec<ComplexifiedRecord> = points.iter().map(ComplexifiedRecord::new).collect();
    let f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(f, &records)?;
    Ok(())
}
