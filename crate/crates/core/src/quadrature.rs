//! One-dimensional Gauss rules and the polar phase-space rule over the complex
//! plane with measure `d²z/π = dJ dγ/2π`, where `z = √J e^{iγ}`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::special::laguerre_log_sequence;

/// Gauss–Laguerre rule for `∫_0^∞ e^{-x} g(x) dx`.
///
/// Weights are kept as `ln w_i` because they underflow for the outermost
/// nodes of high-order rules; `scaled_weights` returns `w_i e^{x_i}`, the
/// weights for integrating an undamped integrand.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    pub ln_weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(invalid("radial_order", "must be at least 1"));
        }
        // Golub–Welsch start, then Newton polish on L_n.
        let mut jac = DMatrix::<f64>::zeros(order, order);
        for k in 0..order {
            jac[(k, k)] = 2.0 * k as f64 + 1.0;
            if k + 1 < order {
                jac[(k, k + 1)] = (k + 1) as f64;
                jac[(k + 1, k)] = (k + 1) as f64;
            }
        }
        let mut nodes: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let n = order as f64;
        for x in nodes.iter_mut() {
            for _ in 0..8 {
                let seq = laguerre_log_sequence(order + 1, 0.0, *x);
                let (s_n, l_n) = seq[order];
                let (s_m, l_m) = seq[order - 1];
                if s_n == 0.0 {
                    break;
                }
                let ratio = s_m * s_n * (l_m - l_n).exp();
                let step = *x / (n * (1.0 - ratio));
                *x -= step;
                if step.abs() <= 1e-15 * x.abs() {
                    break;
                }
            }
        }

        // Christoffel numbers: 1/w_i = Σ_{k<n} L_k(x_i)^2 (the L_k are orthonormal).
        let ln_weights = nodes
            .iter()
            .map(|&x| {
                let seq = laguerre_log_sequence(order, 0.0, x);
                let top = seq
                    .iter()
                    .map(|&(_, l)| 2.0 * l)
                    .fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = seq.iter().map(|&(_, l)| (2.0 * l - top).exp()).sum();
                -(top + sum.ln())
            })
            .collect();
        Ok(Self { nodes, ln_weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn scaled_weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes
            .iter()
            .zip(&self.ln_weights)
            .map(|(&x, &lw)| (lw + x).exp())
    }
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(invalid("order", "must be at least 1"));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Ok(Self { nodes, weights })
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| (mid + half * t, half * w))
            .collect()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Angular rule over one period of γ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AngularRule {
    /// Uniform nodes `γ_j = θ₀ + 2πj/N`; spectrally accurate for smooth periodic integrands.
    #[default]
    Trapezoid,
    /// Gauss–Legendre on `[θ₀, θ₀ + 2π]`; for integrands with a jump at `θ₀`.
    GaussLegendre,
}

/// A quadrature node in both Cartesian and action-angle form.
///
/// `angle` lies in `[θ₀, θ₀ + 2π)` where `θ₀` is the rule's angular offset, so
/// functions with a branch cut (like the angle function) see the branch the
/// rule was built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub z: Complex64,
    pub action: f64,
    pub angle: f64,
}

impl PhasePoint {
    pub fn from_z(z: Complex64) -> Self {
        let angle = z.arg().rem_euclid(2.0 * PI);
        Self {
            z,
            action: z.norm_sqr(),
            angle,
        }
    }

    /// `q = √2 Re z`.
    pub fn q(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.z.re
    }

    /// `p = √2 Im z`.
    pub fn p(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.z.im
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadNode {
    pub point: PhasePoint,
    pub weight: f64,
}

/// Product rule: Gauss–Laguerre in `J` (with `e^{J}` folded into the weights)
/// times an angular rule in `γ`.
#[derive(Debug, Clone)]
pub struct PhaseSpaceQuadrature {
    radial_order: usize,
    angular_order: usize,
    rule: AngularRule,
    offset: f64,
    nodes: Vec<QuadNode>,
}

impl PhaseSpaceQuadrature {
    pub const DEFAULT_RADIAL: usize = 80;
    pub const DEFAULT_ANGULAR: usize = 64;

    pub fn new(radial_order: usize, angular_order: usize) -> Result<Self> {
        Self::with_rule(radial_order, angular_order, AngularRule::Trapezoid, 0.0)
    }

    pub fn with_rule(
        radial_order: usize,
        angular_order: usize,
        rule: AngularRule,
        offset: f64,
    ) -> Result<Self> {
        if angular_order == 0 {
            return Err(invalid("angular_order", "must be at least 1"));
        }
        if !offset.is_finite() {
            return Err(invalid("offset", "must be finite"));
        }
        let radial = GaussLaguerre::new(radial_order)?;
        let angular: Vec<(f64, f64)> = match rule {
            AngularRule::Trapezoid => (0..angular_order)
                .map(|j| {
                    (
                        offset + 2.0 * PI * j as f64 / angular_order as f64,
                        1.0 / angular_order as f64,
                    )
                })
                .collect(),
            AngularRule::GaussLegendre => GaussLegendre::new(angular_order)?
                .on_interval(offset, offset + 2.0 * PI)
                .into_iter()
                .map(|(g, w)| (g, w / (2.0 * PI)))
                .collect(),
        };
        let mut nodes = Vec::with_capacity(radial_order * angular_order);
        for (&j, wj) in radial.nodes.iter().zip(radial.scaled_weights()) {
            let r = j.sqrt();
            for &(g, wg) in &angular {
                nodes.push(QuadNode {
                    point: PhasePoint {
                        z: Complex64::from_polar(r, g),
                        action: j,
                        angle: g,
                    },
                    weight: wj * wg,
                });
            }
        }
        Ok(Self {
            radial_order,
            angular_order,
            rule,
            offset,
            nodes,
        })
    }

    /// Defaults used by the Weyl–Heisenberg quantizer: 80 × 64, trapezoid.
    pub fn reference() -> Self {
        Self::new(Self::DEFAULT_RADIAL, Self::DEFAULT_ANGULAR).expect("default orders are valid")
    }

    /// 120 × 256 with Gauss–Legendre angles, for the discontinuous angle function.
    pub fn angle_reference() -> Self {
        Self::with_rule(120, 256, AngularRule::GaussLegendre, 0.0)
            .expect("default orders are valid")
    }

    /// Same rule with every angle shifted by `theta`.
    pub fn rotated(&self, theta: f64) -> Result<Self> {
        Self::with_rule(
            self.radial_order,
            self.angular_order,
            self.rule,
            self.offset + theta,
        )
    }

    pub fn nodes(&self) -> &[QuadNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn radial_order(&self) -> usize {
        self.radial_order
    }

    pub fn angular_order(&self) -> usize {
        self.angular_order
    }

    pub fn rule(&self) -> AngularRule {
        self.rule
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `∫ g d²z/π`.
    pub fn integrate<F: Fn(&PhasePoint) -> Complex64>(&self, g: F) -> Complex64 {
        self.nodes.iter().map(|n| n.weight * g(&n.point)).sum()
    }

    /// `|Σ w_k e^{-|z_k|²} - 1|`.
    pub fn gaussian_normalization_defect(&self) -> f64 {
        let s: f64 = self
            .nodes
            .iter()
            .map(|n| n.weight * (-n.point.action).exp())
            .sum();
        (s - 1.0).abs()
    }
}
