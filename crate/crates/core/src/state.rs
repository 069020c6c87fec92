//! Dense pure-state register.
//!
//! Qubit `i` is bit `i` of the amplitude index (little-endian). Measurement is
//! destructive: the measured qubit is removed and higher indices shift down.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::basis::{BasisPair, Outcome};
use crate::error::{Error, Result};

/// Largest register the dense representation accepts.
pub const MAX_QUBITS: usize = 24;

/// Drift beyond this is renormalized away.
pub const RENORM_TOL: f64 = 1e-12;

/// Drift beyond this is treated as a bug.
pub const NORM_FAIL_TOL: f64 = 1e-6;

/// Branches with smaller probability have no conditional state.
pub const DEGENERATE_PROB: f64 = 1e-14;

const UNITARY_TOL: f64 = 1e-12;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// A 2×2 unitary, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate2x2([[C64; 2]; 2]);

impl Gate2x2 {
    /// Checks unitarity before accepting the matrix.
    pub fn new(m: [[C64; 2]; 2]) -> Result<Self> {
        let g = Self(m);
        let dev = g.unitarity_defect();
        if !(dev <= UNITARY_TOL) {
            return Err(Error::NotUnitary(dev));
        }
        Ok(g)
    }

    /// Max entry of |U†U − I|.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint().mul_raw(self);
        let mut dev: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let target = if r == c { ONE } else { ZERO };
                dev = dev.max((p[r][c] - target).norm());
            }
        }
        dev
    }

    pub fn identity() -> Self {
        Self([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn pauli_x() -> Self {
        Self([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn pauli_y() -> Self {
        Self([[ZERO, -I], [I, ZERO]])
    }

    pub fn pauli_z() -> Self {
        Self([[ONE, ZERO], [ZERO, -ONE]])
    }

    pub fn hadamard() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Self([[h, h], [h, -h]])
    }

    /// e^{−i(u/2)X}
    pub fn rx(u: f64) -> Self {
        let (s, c) = (u / 2.0).sin_cos();
        Self([
            [C64::new(c, 0.0), C64::new(0.0, -s)],
            [C64::new(0.0, -s), C64::new(c, 0.0)],
        ])
    }

    /// e^{−i(u/2)Z}
    pub fn rz(u: f64) -> Self {
        Self([
            [C64::from_polar(1.0, -u / 2.0), ZERO],
            [ZERO, C64::from_polar(1.0, u / 2.0)],
        ])
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        let m = self.0;
        Self([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    /// Matrix product `self · rhs` (apply `rhs` first).
    pub fn then_after(&self, rhs: &Self) -> Self {
        Self(self.mul_raw(rhs))
    }

    fn mul_raw(&self, rhs: &Self) -> [[C64; 2]; 2] {
        let (a, b) = (self.0, rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        out
    }
}

/// Normalized pure state of `n_qubits` qubits.
///
/// A 0-qubit register holds one unit-modulus amplitude so that fully measured
/// registers still carry a phase and compare under [`fidelity`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Builds a state from raw amplitudes, renormalizing small drift.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidAmplitudeCount(len));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::CapacityExceeded(n_qubits));
        }
        let mut s = Self { n_qubits, amplitudes };
        s.settle()?;
        Ok(s)
    }

    /// Scales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized((norm - 1.0).abs()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(amplitudes)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::CapacityExceeded(n_qubits));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidParameter {
                name: "basis index",
                value: index as f64,
            });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// (|00⟩ + |11⟩)/√2
    pub fn bell() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Self {
            n_qubits: 2,
            amplitudes: vec![h, ZERO, ZERO, h],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    fn settle(&mut self) -> Result<()> {
        let norm_sqr = self.norm_sqr();
        let drift = (norm_sqr - 1.0).abs();
        if !(drift <= NORM_FAIL_TOL) {
            return Err(Error::NotNormalized(drift));
        }
        if drift > RENORM_TOL {
            let scale = norm_sqr.sqrt().recip();
            self.amplitudes.iter_mut().for_each(|a| *a *= scale);
        }
        Ok(())
    }

    /// Applies `g` to qubit `q`.
    pub fn apply_single_qubit(&self, q: usize, g: &Gate2x2) -> Result<Self> {
        let mut out = self.clone();
        out.apply_single_qubit_mut(q, g)?;
        Ok(out)
    }

    pub fn apply_single_qubit_mut(&mut self, q: usize, g: &Gate2x2) -> Result<()> {
        self.check_qubit(q)?;
        let dev = g.unitarity_defect();
        if !(dev <= UNITARY_TOL) {
            return Err(Error::NotUnitary(dev));
        }
        let m = g.0;
        let bit = 1usize << q;
        for i0 in (0..self.amplitudes.len()).filter(|i| i & bit == 0) {
            let i1 = i0 | bit;
            let (a0, a1) = (self.amplitudes[i0], self.amplitudes[i1]);
            self.amplitudes[i0] = m[0][0] * a0 + m[0][1] * a1;
            self.amplitudes[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
        self.settle()
    }

    /// Controlled-Z between `q1` and `q2`.
    pub fn apply_cz(&self, q1: usize, q2: usize) -> Result<Self> {
        let mut out = self.clone();
        out.apply_cz_mut(q1, q2)?;
        Ok(out)
    }

    pub fn apply_cz_mut(&mut self, q1: usize, q2: usize) -> Result<()> {
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            return Err(Error::SameQubit(q1));
        }
        let mask = (1usize << q1) | (1usize << q2);
        self.amplitudes
            .iter_mut()
            .enumerate()
            .filter(|(i, _)| i & mask == mask)
            .for_each(|(_, a)| *a = -*a);
        Ok(())
    }

    /// Returns `self ⊗ |+⟩^⊗k`; the new qubits take the `k` highest indices.
    pub fn extend_with_plus(&self, k: usize) -> Result<Self> {
        let n = self.n_qubits + k;
        if n > MAX_QUBITS {
            return Err(Error::CapacityExceeded(n));
        }
        let scale = (0.5f64).powf(k as f64 / 2.0);
        let mut amplitudes = Vec::with_capacity(1 << n);
        for _ in 0..(1usize << k) {
            amplitudes.extend(self.amplitudes.iter().map(|a| a * scale));
        }
        let mut out = Self {
            n_qubits: n,
            amplitudes,
        };
        out.settle()?;
        Ok(out)
    }

    /// Projects qubit `q` onto the `outcome` vector of `basis` and removes it.
    ///
    /// Returns the branch probability and the renormalized conditional state.
    pub fn project_measure(&self, q: usize, basis: &BasisPair, outcome: Outcome) -> Result<(f64, Self)> {
        self.check_qubit(q)?;
        let dev = basis.orthonormality_defect();
        if !(dev <= 1e-10) {
            return Err(Error::NotOrthonormal(dev));
        }
        let v = basis.vector(outcome);
        let (c0, c1) = (v[0].conj(), v[1].conj());
        let low = (1usize << q) - 1;
        let out_len = self.amplitudes.len() / 2;
        let mut amplitudes = Vec::with_capacity(out_len);
        for j in 0..out_len {
            let i0 = (j & low) | ((j & !low) << 1);
            let i1 = i0 | (1 << q);
            amplitudes.push(c0 * self.amplitudes[i0] + c1 * self.amplitudes[i1]);
        }
        let probability: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if probability < DEGENERATE_PROB {
            return Err(Error::DegenerateBranch { outcome, probability });
        }
        let scale = probability.sqrt().recip();
        amplitudes.iter_mut().for_each(|a| *a *= scale);
        let mut post = Self {
            n_qubits: self.n_qubits - 1,
            amplitudes,
        };
        post.settle()?;
        Ok((probability, post))
    }

    /// Reduced density operator of qubit `q` (all other qubits traced out).
    pub fn reduced_density_single(&self, q: usize) -> Result<SingleQubitDensity> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        let (mut r00, mut r11, mut r01) = (0.0, 0.0, ZERO);
        for i0 in (0..self.amplitudes.len()).filter(|i| i & bit == 0) {
            let (a0, a1) = (self.amplitudes[i0], self.amplitudes[i0 | bit]);
            r00 += a0.norm_sqr();
            r11 += a1.norm_sqr();
            r01 += a0 * a1.conj();
        }
        Ok(SingleQubitDensity([
            [C64::new(r00, 0.0), r01],
            [r01.conj(), C64::new(r11, 0.0)],
        ]))
    }

    /// Relabels qubits: qubit `i` of the result is qubit `order[i]` of `self`.
    pub fn permute_qubits(&self, order: &[usize]) -> Result<Self> {
        let n = self.n_qubits;
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::DimensionMismatch(order.len(), n));
        }
        for &o in order {
            self.check_qubit(o)?;
            if std::mem::replace(&mut seen[o], true) {
                return Err(Error::SameQubit(o));
            }
        }
        let mut amplitudes = vec![ZERO; self.amplitudes.len()];
        for (old, a) in self.amplitudes.iter().enumerate() {
            let new = order
                .iter()
                .enumerate()
                .fold(0usize, |acc, (i, &o)| acc | (((old >> o) & 1) << i));
            amplitudes[new] = *a;
        }
        Ok(Self {
            n_qubits: n,
            amplitudes,
        })
    }

    /// Inner product ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Largest amplitude-wise difference to `other`.
    pub fn max_amplitude_diff(&self, other: &Self) -> Result<f64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if a.norm() < 1e-12 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:+.6}{:+.6}i)|", a.re, a.im)?;
            for q in (0..self.n_qubits).rev() {
                write!(f, "{}", (i >> q) & 1)?;
            }
            write!(f, "⟩")?;
        }
        Ok(())
    }
}

/// |⟨a|b⟩|²
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// Reduced 2×2 density operator of one qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleQubitDensity([[C64; 2]; 2]);

/// Spectral data of a single-qubit density operator in Bloch form.
///
/// `rho = lambda0 |tau0⟩⟨tau0| + lambda1 |tau1⟩⟨tau1|` with
/// `|tau0⟩ = cos(mu/2)|0⟩ + e^{−i nu} sin(mu/2)|1⟩`, `lambda0 ≥ lambda1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityEigen {
    pub lambda0: f64,
    pub lambda1: f64,
    pub mu: f64,
    pub nu: f64,
}

impl SingleQubitDensity {
    pub fn matrix(&self) -> [[C64; 2]; 2] {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0].re + self.0[1][1].re
    }

    /// Tr(ρ²)
    pub fn purity(&self) -> f64 {
        let m = self.0;
        m[0][0].re * m[0][0].re + m[1][1].re * m[1][1].re + 2.0 * m[0][1].norm_sqr()
    }

    /// Tr(ρZ)
    pub fn expectation_z(&self) -> f64 {
        self.0[0][0].re - self.0[1][1].re
    }

    /// Bloch vector (x, y, z) with ρ = (I + r·σ)/2.
    pub fn bloch(&self) -> [f64; 3] {
        let r01 = self.0[0][1];
        [2.0 * r01.re, -2.0 * r01.im, self.expectation_z()]
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let m = self.0;
        (m[0][1] - m[1][0].conj())
            .norm()
            .max(m[0][0].im.abs())
            .max(m[1][1].im.abs())
    }

    pub fn eigen(&self) -> DensityEigen {
        let [x, y, z] = self.bloch();
        let r = (x * x + y * y + z * z).sqrt();
        let (mu, nu) = if r < 1e-15 {
            (0.0, 0.0)
        } else {
            ((z / r).clamp(-1.0, 1.0).acos(), -y.atan2(x))
        };
        DensityEigen {
            lambda0: (1.0 + r) / 2.0,
            lambda1: (1.0 - r) / 2.0,
            mu,
            nu,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{ideal_basis, MeasurementAngle};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    fn x_basis() -> BasisPair {
        ideal_basis(MeasurementAngle::new(0.0).unwrap())
    }

    #[test]
    fn pauli_x_flips_zero() {
        let s = StateVector::zero(1)
            .unwrap()
            .apply_single_qubit(0, &Gate2x2::pauli_x())
            .unwrap();
        assert_eq!(s.amplitudes(), &[ZERO, ONE]);
    }

    #[test]
    fn rx_zero_is_identity() {
        let s = StateVector::normalized(vec![c(0.3, 0.1), c(-0.2, 0.9)]).unwrap();
        let t = s.apply_single_qubit(0, &Gate2x2::rx(0.0)).unwrap();
        assert!(s.max_amplitude_diff(&t).unwrap() < 1e-15);
    }

    #[test]
    fn rx_quarter_turn_on_zero() {
        // cos(π/4)I − i sin(π/4)X applied to |0⟩
        let s = StateVector::zero(1)
            .unwrap()
            .apply_single_qubit(0, &Gate2x2::rx(std::f64::consts::FRAC_PI_2))
            .unwrap();
        assert!(close(s.amplitudes()[0], c(FRAC_1_SQRT_2, 0.0)));
        assert!(close(s.amplitudes()[1], c(0.0, -FRAC_1_SQRT_2)));
    }

    #[test]
    fn single_qubit_errors() {
        let s = StateVector::zero(2).unwrap();
        assert!(matches!(
            s.apply_single_qubit(2, &Gate2x2::pauli_x()),
            Err(Error::QubitOutOfRange { qubit: 2, n_qubits: 2 })
        ));
        let bad = Gate2x2([[ONE, ONE], [ZERO, ONE]]);
        assert!(matches!(s.apply_single_qubit(0, &bad), Err(Error::NotUnitary(_))));
        assert!(Gate2x2::new([[ONE, ONE], [ZERO, ONE]]).is_err());
    }

    #[test]
    fn cz_basis_action() {
        let s = StateVector::basis(2, 3).unwrap().apply_cz(0, 1).unwrap();
        assert_eq!(s.amplitudes()[3], -ONE);
        let s = StateVector::basis(2, 0).unwrap().apply_cz(0, 1).unwrap();
        assert_eq!(s.amplitudes()[0], ONE);
    }

    #[test]
    fn cz_on_plus_plus() {
        let s = StateVector::from_amplitudes(vec![ONE])
            .unwrap()
            .extend_with_plus(2)
            .unwrap()
            .apply_cz(0, 1)
            .unwrap();
        let expect = [c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(-0.5, 0.0)];
        for (a, b) in s.amplitudes().iter().zip(expect) {
            assert!(close(*a, b));
        }
        for q in 0..2 {
            let rho = s.reduced_density_single(q).unwrap().matrix();
            assert!(close(rho[0][0], c(0.5, 0.0)) && close(rho[1][1], c(0.5, 0.0)));
            assert!(close(rho[0][1], ZERO));
        }
    }

    #[test]
    fn cz_errors() {
        let s = StateVector::zero(2).unwrap();
        assert!(matches!(s.apply_cz(1, 1), Err(Error::SameQubit(1))));
        assert!(matches!(s.apply_cz(0, 5), Err(Error::QubitOutOfRange { .. })));
    }

    #[test]
    fn extend_examples() {
        let s = StateVector::zero(1).unwrap().extend_with_plus(1).unwrap();
        // |0⟩ on qubit 0, |+⟩ on qubit 1: indices 0b00 and 0b10
        assert!(close(s.amplitudes()[0], c(FRAC_1_SQRT_2, 0.0)));
        assert!(close(s.amplitudes()[2], c(FRAC_1_SQRT_2, 0.0)));
        assert!(close(s.amplitudes()[1], ZERO) && close(s.amplitudes()[3], ZERO));

        let one = StateVector::basis(1, 1).unwrap();
        assert_eq!(one.extend_with_plus(0).unwrap(), one);

        let e = one.extend_with_plus(2).unwrap();
        assert_eq!(e.amplitudes().len(), 8);
        assert!((e.norm_sqr() - 1.0).abs() < 1e-12);
        assert_eq!(e.amplitudes().iter().filter(|a| a.norm() < 1e-15).count(), 4);
        // direct tensor product: |1⟩ ⊗ |+⟩ ⊗ |+⟩ puts weight on odd indices
        for (i, a) in e.amplitudes().iter().enumerate() {
            let expect = if i & 1 == 1 { 0.5 } else { 0.0 };
            assert!(close(*a, c(expect, 0.0)));
        }
    }

    #[test]
    fn extend_capacity() {
        let s = StateVector::zero(20).unwrap();
        assert!(matches!(s.extend_with_plus(5), Err(Error::CapacityExceeded(25))));
    }

    #[test]
    fn measure_plus_eigenstate_leaves_sentinel() {
        let plus = StateVector::from_amplitudes(vec![ONE])
            .unwrap()
            .extend_with_plus(1)
            .unwrap();
        let (p, post) = plus.project_measure(0, &x_basis(), Outcome::Plus).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert_eq!(post.n_qubits(), 0);
        assert!((post.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
        assert!(matches!(
            plus.project_measure(0, &x_basis(), Outcome::Minus),
            Err(Error::DegenerateBranch {
                outcome: Outcome::Minus,
                ..
            })
        ));
    }

    #[test]
    fn measure_zero_in_x_basis() {
        let s = StateVector::zero(1).unwrap();
        for o in [Outcome::Plus, Outcome::Minus] {
            let (p, _) = s.project_measure(0, &x_basis(), o).unwrap();
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn measure_bell_in_x_basis() {
        let (p, post) = StateVector::bell()
            .project_measure(0, &x_basis(), Outcome::Plus)
            .unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert!(close(post.amplitudes()[0], c(FRAC_1_SQRT_2, 0.0)));
        assert!(close(post.amplitudes()[1], c(FRAC_1_SQRT_2, 0.0)));
    }

    #[test]
    fn measure_removes_qubit_and_shifts() {
        // |q2 q1 q0⟩ = |1 0 1⟩: measuring qubit 1 in Z leaves |q1' q0'⟩ = |1 1⟩
        let z_basis = BasisPair::new([ONE, ZERO], [ZERO, ONE]).unwrap();
        let s = StateVector::basis(3, 0b101).unwrap();
        let (p, post) = s.project_measure(1, &z_basis, Outcome::Plus).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert_eq!(post, StateVector::basis(2, 0b11).unwrap());
    }

    #[test]
    fn reduced_density_examples() {
        let prod = StateVector::zero(1).unwrap().extend_with_plus(1).unwrap();
        let rho = prod.reduced_density_single(0).unwrap().matrix();
        assert!(close(rho[0][0], ONE) && close(rho[1][1], ZERO) && close(rho[0][1], ZERO));

        let rho = StateVector::bell().reduced_density_single(0).unwrap().matrix();
        assert!(close(rho[0][0], c(0.5, 0.0)) && close(rho[0][1], ZERO));

        let s = StateVector::from_amplitudes(vec![c(0.8f64.sqrt(), 0.0), ZERO, ZERO, c(0.2f64.sqrt(), 0.0)]).unwrap();
        let rho = s.reduced_density_single(0).unwrap().matrix();
        assert!(close(rho[0][0], c(0.8, 0.0)) && close(rho[1][1], c(0.2, 0.0)) && close(rho[0][1], ZERO));
        assert!(s.reduced_density_single(2).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let zero = StateVector::zero(1).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        let plus = StateVector::from_amplitudes(vec![ONE])
            .unwrap()
            .extend_with_plus(1)
            .unwrap();
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-15);
        assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            fidelity(&zero, &StateVector::bell()),
            Err(Error::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn construction_guards() {
        assert!(matches!(
            StateVector::from_amplitudes(vec![ONE; 3]),
            Err(Error::InvalidAmplitudeCount(3))
        ));
        assert!(matches!(
            StateVector::from_amplitudes(vec![ONE, ONE]),
            Err(Error::NotNormalized(_))
        ));
        // small drift is renormalized
        let s = StateVector::from_amplitudes(vec![c(1.0 + 1e-9, 0.0), ZERO]).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn permute_swaps_bits() {
        let s = StateVector::basis(3, 0b001).unwrap();
        let p = s.permute_qubits(&[2, 0, 1]).unwrap();
        // new qubit 1 is old qubit 0
        assert_eq!(p, StateVector::basis(3, 0b010).unwrap());
        assert!(s.permute_qubits(&[0, 0, 1]).is_err());
    }

    #[test]
    fn eigen_of_plus_minus_mixture() {
        let s = StateVector::from_amplitudes(vec![
            c(0.4f64.sqrt(), 0.0),
            c(0.4f64.sqrt(), 0.0),
            c(0.1f64.sqrt(), 0.0),
            c(-(0.1f64.sqrt()), 0.0),
        ])
        .unwrap();
        let e = s.reduced_density_single(0).unwrap().eigen();
        assert!((e.lambda0 - 0.8).abs() < 1e-12);
        assert!((e.lambda1 - 0.2).abs() < 1e-12);
        assert!((e.mu - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}
