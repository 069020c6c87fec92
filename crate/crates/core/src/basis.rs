//! Ideal and deviated single-qubit measurement bases.

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Label of a two-outcome measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    /// 0 for `Plus`, 1 for `Minus`.
    pub fn bit(self) -> usize {
        match self {
            Self::Plus => 0,
            Self::Minus => 1,
        }
    }

    /// +1 or −1.
    pub fn sign(self) -> f64 {
        match self {
            Self::Plus => 1.0,
            Self::Minus => -1.0,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Plus => "+",
            Self::Minus => "-",
        })
    }
}

/// Measurement angle `u` in radians, stored reduced to [0, 2π).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementAngle(f64);

impl MeasurementAngle {
    pub fn new(u: f64) -> Result<Self> {
        if !u.is_finite() {
            return Err(Error::InvalidParameter {
                name: "measurement angle",
                value: u,
            });
        }
        Ok(Self(reduce_angle(u)))
    }

    pub const fn zero() -> Self {
        Self(0.0)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// The angle with the opposite sign.
    pub fn flipped(self) -> Self {
        Self(reduce_angle(-self.0))
    }
}

fn reduce_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Tilt of a measurement basis away from the ideal one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeviationParams {
    epsilon: f64,
    delta: f64,
}

impl DeviationParams {
    /// `epsilon` must lie in [0, π]; `delta` is reduced into [0, 2π).
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&epsilon) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: epsilon,
            });
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: delta,
            });
        }
        Ok(Self {
            epsilon,
            delta: reduce_angle(delta),
        })
    }

    pub const fn none() -> Self {
        Self {
            epsilon: 0.0,
            delta: 0.0,
        }
    }

    pub fn epsilon(self) -> f64 {
        self.epsilon
    }

    pub fn delta(self) -> f64 {
        self.delta
    }
}

/// Orthonormal pair of single-qubit states defining a projective measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisPair {
    plus: [C64; 2],
    minus: [C64; 2],
}

impl BasisPair {
    pub fn new(plus: [C64; 2], minus: [C64; 2]) -> Result<Self> {
        let b = Self { plus, minus };
        let dev = b.orthonormality_defect();
        if !(dev <= 1e-12) {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(b)
    }

    pub fn plus_state(&self) -> [C64; 2] {
        self.plus
    }

    pub fn minus_state(&self) -> [C64; 2] {
        self.minus
    }

    pub fn vector(&self, outcome: Outcome) -> [C64; 2] {
        match outcome {
            Outcome::Plus => self.plus,
            Outcome::Minus => self.minus,
        }
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let dot = |a: &[C64; 2], b: &[C64; 2]| a[0].conj() * b[0] + a[1].conj() * b[1];
        (dot(&self.plus, &self.plus).re - 1.0)
            .abs()
            .max((dot(&self.minus, &self.minus).re - 1.0).abs())
            .max(dot(&self.plus, &self.minus).norm())
    }

    /// Projector |v⟩⟨v| onto the `outcome` vector.
    pub fn projector(&self, outcome: Outcome) -> [[C64; 2]; 2] {
        let v = self.vector(outcome);
        [
            [v[0] * v[0].conj(), v[0] * v[1].conj()],
            [v[1] * v[0].conj(), v[1] * v[1].conj()],
        ]
    }
}

/// `|u±⟩ = (|0⟩ ± e^{−iu}|1⟩)/√2`, the eigenbasis of `cos u X − sin u Y`.
pub fn ideal_basis(u: MeasurementAngle) -> BasisPair {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let phase = C64::from_polar(h, -u.radians());
    BasisPair {
        plus: [C64::new(h, 0.0), phase],
        minus: [C64::new(h, 0.0), -phase],
    }
}

/// Deviated pair
/// `|ũ+⟩ = cos(ε/2)|u+⟩ + e^{−iδ} sin(ε/2)|u−⟩`,
/// `|ũ−⟩ = sin(ε/2)|u+⟩ − e^{−iδ} cos(ε/2)|u−⟩`.
pub fn deviated_basis(u: MeasurementAngle, dev: DeviationParams) -> BasisPair {
    let ideal = ideal_basis(u);
    let (s, c) = (dev.epsilon / 2.0).sin_cos();
    let tilt = C64::from_polar(1.0, -dev.delta);
    let (up, um) = (ideal.plus, ideal.minus);
    let mix = |a: f64, b: C64| [up[0] * a + um[0] * b, up[1] * a + um[1] * b];
    BasisPair {
        plus: mix(c, tilt * s),
        minus: mix(s, -tilt * c),
    }
}

/// Sign rule for adaptive measurements: `u` after a `+`, `−u` after a `−`.
pub fn adaptive_basis(u: MeasurementAngle, previous_outcome: Outcome) -> MeasurementAngle {
    match previous_outcome {
        Outcome::Plus => u,
        Outcome::Minus => u.flipped(),
    }
}
