//! Truncated Fock space: the number basis `|e_0⟩ … |e_{dim-1}⟩`, ladder and
//! quadrature operators, parity, displacement operators and coherent states.
//!
//! Every identity of the infinite-dimensional theory fails near the
//! truncation edge, so checks are made on the top-left *safe block* of size
//! `dim - dim/2`.

use std::f64::consts::SQRT_2;
use std::ops::{Add, Mul, Sub};

use log::warn;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, QuantError, Result};
use crate::special::{laguerre_log_sequence, ln_factorials};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Checking tolerances for Hermiticity, positivity and trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub herm: f64,
    pub psd: f64,
    pub trace: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            psd: 1e-10,
            trace: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisplacementMethod {
    /// Exact matrix elements of the infinite operator, projected.
    #[default]
    ClosedForm,
    /// Matrix exponential of the truncated generator; exactly unitary.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedFockSpace {
    dim: usize,
}

impl Default for TruncatedFockSpace {
    fn default() -> Self {
        Self { dim: 64 }
    }
}

impl TruncatedFockSpace {
    pub const DEFAULT_DIM: usize = 64;

    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(invalid("dim", format!("need dim >= 2, got {dim}")));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Size of the top-left block on which identities are asserted.
    pub fn safe_block(&self) -> usize {
        self.dim - self.dim / 2
    }

    pub fn identity(&self) -> FockOperator {
        FockOperator::from_matrix_unchecked("I", DMatrix::identity(self.dim, self.dim))
    }

    /// `a|e_n⟩ = √n |e_{n-1}⟩`.
    pub fn annihilation(&self) -> FockOperator {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for n in 1..self.dim {
            m[(n - 1, n)] = Complex64::from((n as f64).sqrt());
        }
        FockOperator::from_matrix_unchecked("a", m)
    }

    pub fn creation(&self) -> FockOperator {
        self.annihilation().adjoint().with_label("a†")
    }

    /// `N = a†a`, diagonal `0, 1, …, dim-1`.
    pub fn number(&self) -> FockOperator {
        FockOperator::from_diagonal("N", (0..self.dim).map(|n| Complex64::from(n as f64)))
    }

    /// `Q = (a + a†)/√2`, `P = (a − a†)/(i√2)`.
    pub fn quadrature_pair(&self) -> (FockOperator, FockOperator) {
        let a = self.annihilation();
        let ad = a.adjoint();
        let q = (&a + &ad).scaled(Complex64::from(1.0 / SQRT_2));
        let p = (&a - &ad).scaled(Complex64::from(1.0 / SQRT_2) / I);
        (q.with_label("Q"), p.with_label("P"))
    }

    /// `Σ (−1)^n |e_n⟩⟨e_n|`.
    pub fn parity(&self) -> FockOperator {
        FockOperator::from_diagonal(
            "parity",
            (0..self.dim).map(|n| if n % 2 == 0 { ONE } else { -ONE }),
        )
    }

    pub fn displacement(&self, z: Complex64, method: DisplacementMethod) -> Result<FockOperator> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(invalid("z", "displacement argument must be finite"));
        }
        let m = match method {
            DisplacementMethod::ClosedForm => {
                let lf = ln_factorials(self.dim);
                let mut out = DMatrix::zeros(self.dim, self.dim);
                displacement_into(&mut out, z, &lf);
                out
            }
            DisplacementMethod::Exponential => {
                let a = self.annihilation();
                // H = -i (z a† - z̄ a) is Hermitian; D = exp(iH).
                let gen = a.matrix.adjoint() * z - &a.matrix * z.conj();
                let h = gen * (-I);
                let eig = SymmetricEigen::new(h);
                let phases = DVector::from_iterator(
                    self.dim,
                    eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, l)),
                );
                let v = &eig.eigenvectors;
                let mut vp = v.clone();
                for (j, mut col) in vp.column_iter_mut().enumerate() {
                    col *= phases[j];
                }
                vp * v.adjoint()
            }
        };
        Ok(FockOperator::from_matrix_unchecked("D(z)", m))
    }

    /// `|z⟩ = e^{-|z|²/2} Σ z^n/√n! |e_n⟩`, truncated. Warns when the
    /// Poisson weight beyond the truncation is not negligible.
    pub fn coherent_state(&self, z: Complex64) -> StateVector {
        if z.norm_sqr() > self.dim as f64 / 4.0 {
            warn!(
                "coherent state |z|^2 = {:.3} is not small against dim = {}; expect truncation loss",
                z.norm_sqr(),
                self.dim
            );
        }
        let lf = ln_factorials(self.dim);
        StateVector {
            coeffs: coherent_coefficients(self.dim, z, &lf),
        }
    }

    pub fn basis_state(&self, n: usize) -> Result<StateVector> {
        if n >= self.dim {
            return Err(invalid("n", format!("basis index {n} outside dim {}", self.dim)));
        }
        let mut v = DVector::zeros(self.dim);
        v[n] = ONE;
        Ok(StateVector { coeffs: v })
    }
}

pub(crate) fn coherent_coefficients(dim: usize, z: Complex64, ln_fact: &[f64]) -> DVector<Complex64> {
    let j = z.norm_sqr();
    if j == 0.0 {
        let mut v = DVector::zeros(dim);
        v[0] = ONE;
        return v;
    }
    let ln_r = 0.5 * j.ln();
    let phase = z / z.norm();
    let mut ph = ONE;
    DVector::from_iterator(
        dim,
        (0..dim).map(|n| {
            let mag = (-0.5 * j + n as f64 * ln_r - 0.5 * ln_fact[n]).exp();
            let v = ph * mag;
            ph *= phase;
            v
        }),
    )
}

/// Fills `out` with the closed-form matrix elements `⟨e_m|D(z)|e_n⟩`:
/// `√(n!/m!) z^{m−n} e^{−|z|²/2} L_n^{(m−n)}(|z|²)` for `m ≥ n`, and the
/// mirror with `(−z̄)^{n−m}` above the diagonal.
pub(crate) fn displacement_into(out: &mut DMatrix<Complex64>, z: Complex64, ln_fact: &[f64]) {
    let dim = out.nrows();
    let j = z.norm_sqr();
    if j == 0.0 {
        out.fill_with_identity();
        return;
    }
    let ln_r = 0.5 * j.ln();
    let unit = z / z.norm();
    let mut phase_k = ONE;
    for k in 0..dim {
        let lag = laguerre_log_sequence(dim - k, k as f64, j);
        let upper_phase = if k % 2 == 0 { phase_k.conj() } else { -phase_k.conj() };
        for (n, &(sgn, ln_l)) in lag.iter().enumerate() {
            let m = n + k;
            let val = if sgn == 0.0 {
                0.0
            } else {
                sgn * (0.5 * (ln_fact[n] - ln_fact[m]) + k as f64 * ln_r - 0.5 * j + ln_l).exp()
            };
            out[(m, n)] = phase_k * val;
            if k > 0 {
                out[(n, m)] = upper_phase * val;
            }
        }
        phase_k *= unit;
    }
}

/// A dense operator on a truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    label: String,
    matrix: DMatrix<Complex64>,
}

impl FockOperator {
    pub fn new(label: impl Into<String>, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(QuantError::DimensionMismatch {
                left: matrix.nrows(),
                right: matrix.ncols(),
            });
        }
        if matrix.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(invalid("matrix", "entries must be finite"));
        }
        Ok(Self {
            label: label.into(),
            matrix,
        })
    }

    pub(crate) fn from_matrix_unchecked(label: impl Into<String>, matrix: DMatrix<Complex64>) -> Self {
        Self {
            label: label.into(),
            matrix,
        }
    }

    pub fn from_diagonal(label: impl Into<String>, diag: impl ExactSizeIterator<Item = Complex64>) -> Self {
        let d = DVector::from_iterator(diag.len(), diag);
        Self::from_matrix_unchecked(label, DMatrix::from_diagonal(&d))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_matrix_unchecked("0", DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        self.matrix.diagonal().iter().copied().collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_matrix_unchecked(format!("{}†", self.label), self.matrix.adjoint())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self::from_matrix_unchecked(self.label.clone(), &self.matrix * c)
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        let c = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        Self::from_matrix_unchecked(format!("[{},{}]", self.label, other.label), c)
    }

    /// `max |A − A†|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Ascending eigenvalues of the Hermitian part `(A + A†)/2`.
    pub fn eigenvalues_hermitian(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::from(0.5);
        let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues_hermitian()[0]
    }

    /// Top-left `size × size` sub-matrix.
    pub fn block(&self, size: usize) -> DMatrix<Complex64> {
        let s = size.min(self.dim());
        self.matrix.view((0, 0), (s, s)).into_owned()
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Max-norm of `self − other` on the top-left `size` block.
    pub fn block_distance(&self, other: &Self, size: usize) -> f64 {
        let s = size.min(self.dim()).min(other.dim());
        let mut worst = 0.0_f64;
        for j in 0..s {
            for i in 0..s {
                worst = worst.max((self.matrix[(i, j)] - other.matrix[(i, j)]).norm());
            }
        }
        worst
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        let n = self.dim();
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix[(i, j)] * other.matrix[(j, i)];
            }
        }
        acc
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        StateVector {
            coeffs: &self.matrix * &v.coeffs,
        }
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: Self) -> FockOperator {
        FockOperator::from_matrix_unchecked(
            format!("{}+{}", self.label, rhs.label),
            &self.matrix + &rhs.matrix,
        )
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: Self) -> FockOperator {
        FockOperator::from_matrix_unchecked(
            format!("{}-{}", self.label, rhs.label),
            &self.matrix - &rhs.matrix,
        )
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: Self) -> FockOperator {
        FockOperator::from_matrix_unchecked(
            format!("{}{}", self.label, rhs.label),
            &self.matrix * &rhs.matrix,
        )
    }
}

/// Coefficients over the number basis. The norm is reported, never silently
/// renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    coeffs: DVector<Complex64>,
}

impl StateVector {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(invalid("coeffs", "entries must be finite"));
        }
        Ok(Self {
            coeffs: DVector::from_vec(coeffs),
        })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &DVector<Complex64> {
        &self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.coeffs.dotc(&other.coeffs)
    }

    pub fn projector(&self) -> FockOperator {
        FockOperator::from_matrix_unchecked("|ψ⟩⟨ψ|", &self.coeffs * self.coeffs.adjoint())
    }
}

/// A Hermitian, positive, unit-trace operator (within tolerances).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator(FockOperator);

impl DensityOperator {
    pub fn try_new(op: FockOperator, tol: Tolerances) -> Result<Self> {
        let h = op.hermitian_defect();
        if h > tol.herm {
            return Err(QuantError::NotDensity(format!("hermitian defect {h:.3e}")));
        }
        let min = op.min_eigenvalue();
        if min < -tol.psd {
            return Err(QuantError::NotDensity(format!("negative eigenvalue {min:.3e}")));
        }
        let tr = op.trace();
        if (tr - ONE).norm() > tol.trace {
            return Err(QuantError::NotDensity(format!("trace {} + {}i", tr.re, tr.im)));
        }
        Ok(Self(op))
    }

    pub fn pure(state: &StateVector, tol: Tolerances) -> Result<Self> {
        Self::try_new(state.projector(), tol)
    }

    pub fn operator(&self) -> &FockOperator {
        &self.0
    }

    pub fn into_operator(self) -> FockOperator {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(d: usize) -> TruncatedFockSpace {
        TruncatedFockSpace::new(d).unwrap()
    }

    #[test]
    fn rejects_tiny_space() {
        assert!(TruncatedFockSpace::new(1).is_err());
        assert!(TruncatedFockSpace::new(0).is_err());
    }

    #[test]
    fn annihilation_dim2() {
        let a = space(2).annihilation();
        assert_eq!(a.get(0, 1), ONE);
        assert_eq!(a.get(0, 0), ZERO);
        assert_eq!(a.get(1, 0), ZERO);
        assert_eq!(a.get(1, 1), ZERO);
    }

    #[test]
    fn annihilation_kills_vacuum_and_number_is_diagonal() {
        let s = space(7);
        let a = s.annihilation();
        let out = a.apply(&s.basis_state(0).unwrap());
        assert!(out.norm() == 0.0);
        let n = &s.creation() * &a;
        for k in 0..7 {
            assert!((n.get(k, k).re - k as f64).abs() < 1e-14);
        }
        assert!(n.block_distance(&s.number(), 7) < 1e-14);
    }

    #[test]
    fn quadratures_dim2_and_hermitian() {
        let (q, p) = space(2).quadrature_pair();
        let h = 1.0 / SQRT_2;
        assert!((q.get(0, 1).re - h).abs() < 1e-15 && (q.get(1, 0).re - h).abs() < 1e-15);
        let (q, p64) = space(20).quadrature_pair();
        assert!(q.hermitian_defect() < 1e-14);
        assert!(p.hermitian_defect() < 1e-14);
        assert!(p64.hermitian_defect() < 1e-14);
    }

    #[test]
    fn canonical_commutator_off_the_edge() {
        let s = space(16);
        let (q, p) = s.quadrature_pair();
        let c = q.commutator(&p);
        let target = s.identity().scaled(I);
        assert!(c.block_distance(&target, 15) < 1e-12);
        // the last diagonal entry is the truncation artefact
        assert!((c.get(15, 15) - target.get(15, 15)).norm() > 1.0);
    }

    #[test]
    fn parity_values() {
        let p = space(3).parity();
        assert_eq!(p.diagonal(), vec![ONE, -ONE, ONE]);
        let sq = &p * &p;
        assert_eq!(sq.matrix(), space(3).identity().matrix());
        let s = space(9);
        let a = s.annihilation();
        let par = s.parity();
        let conj = &(&par * &a) * &par;
        assert!(conj.block_distance(&a.scaled(-ONE), 9) == 0.0);
    }

    #[test]
    fn displacement_at_origin_is_identity() {
        let s = space(10);
        for m in [DisplacementMethod::ClosedForm, DisplacementMethod::Exponential] {
            let d = s.displacement(ZERO, m).unwrap();
            assert!(d.block_distance(&s.identity(), 10) < 1e-14);
        }
        assert!(s.displacement(Complex64::new(f64::NAN, 0.0), DisplacementMethod::ClosedForm).is_err());
    }

    #[test]
    fn displacement_column_zero_is_coherent_state() {
        // power-series oracle for e^{z a† − z̄ a}|e_0⟩
        let s = space(24);
        let z = Complex64::new(0.7, -0.4);
        let d = s.displacement(z, DisplacementMethod::ClosedForm).unwrap();
        let mut fact = 1.0;
        for n in 0..24 {
            if n > 0 {
                fact *= n as f64;
            }
            let expect = (-z.norm_sqr() / 2.0).exp() * z.powu(n as u32) / fact.sqrt();
            assert!((d.get(n, 0) - expect).norm() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn closed_form_matches_exponential_on_safe_block() {
        let s = space(48);
        for z in [Complex64::new(0.5, 0.3), Complex64::new(-1.2, 0.8), Complex64::new(0.0, -2.0)] {
            let a = s.displacement(z, DisplacementMethod::ClosedForm).unwrap();
            let b = s.displacement(z, DisplacementMethod::Exponential).unwrap();
            assert!(a.block_distance(&b, 24) < 1e-8, "z={z}");
        }
    }

    #[test]
    fn exponential_is_unitary() {
        let s = space(20);
        let d = s.displacement(Complex64::new(1.5, -0.5), DisplacementMethod::Exponential).unwrap();
        let u = &d.adjoint() * &d;
        assert!(u.block_distance(&s.identity(), 20) < 1e-12);
    }

    #[test]
    fn addition_formula() {
        let s = space(48);
        let pairs = [
            (Complex64::new(0.6, 0.2), Complex64::new(-0.3, 0.9)),
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)),
        ];
        for (z, w) in pairs {
            let dz = s.displacement(z, DisplacementMethod::ClosedForm).unwrap();
            let dw = s.displacement(w, DisplacementMethod::ClosedForm).unwrap();
            let dzw = s.displacement(z + w, DisplacementMethod::ClosedForm).unwrap();
            let phase = ((z * w.conj() - z.conj() * w) * 0.5).exp();
            let lhs = &dz * &dw;
            assert!(lhs.block_distance(&dzw.scaled(phase), 24) < 1e-8);
        }
    }

    #[test]
    fn coherent_states() {
        let s = space(64);
        let vac = s.coherent_state(ZERO);
        assert_eq!(vac.coeffs()[0], ONE);
        assert!((vac.norm() - 1.0).abs() < 1e-15);
        let z = Complex64::new(1.1, -0.6);
        let w = Complex64::new(-0.4, 1.3);
        let ov = s.coherent_state(z).inner(&s.coherent_state(w)).norm_sqr();
        assert!((ov - (-(z - w).norm_sqr()).exp()).abs() < 1e-10);
        // Poisson moduli
        let j = z.norm_sqr();
        let c = s.coherent_state(z);
        let mut pn = (-j).exp();
        for n in 0..30 {
            if n > 0 {
                pn *= j / n as f64;
            }
            assert!((c.coeffs()[n].norm_sqr() - pn).abs() < 1e-14);
        }
    }

    #[test]
    fn density_checks() {
        let s = space(6);
        let tol = Tolerances::default();
        assert!(DensityOperator::pure(&s.basis_state(0).unwrap(), tol).is_ok());
        assert!(DensityOperator::try_new(s.identity(), tol).is_err());
        assert!(DensityOperator::try_new(s.parity(), tol).is_err());
        assert!(FockOperator::new("x", DMatrix::zeros(2, 3)).is_err());
    }
}
