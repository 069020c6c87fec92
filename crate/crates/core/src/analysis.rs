//! Fidelity of the elementary attach–CZ–measure process under a deviated
//! measurement, in closed form and by direct simulation.
//!
//! The first qubit is always index 0 of the register. With
//! `xi = Tr(rho Z)` and `S = 2(1 − Tr rho²)` for its reduced state `rho`:
//!
//! ```text
//! P±     = (1 ± xi sin ε cos δ) / 2
//! F±     = (1 ± xi sin ε cos δ − (1 − xi²) sin²(ε/2)) / (2 P±)
//! F_mean = P+ F+ + P− F− = 1 − (1 − xi²) sin²(ε/2) ≤ 1 − S sin²(ε/2)
//! ```

use std::f64::consts::PI;

use crate::basis::{deviated_basis, BasisPair, DeviationParams, MeasurementAngle, Outcome};
use crate::error::{Error, Result};
use crate::state::{fidelity, DensityEigen, StateVector, DEGENERATE_PROB};

/// Agreement required between closed forms and simulation.
pub const CHECK_TOL: f64 = 1e-10;

const FIRST: usize = 0;

/// `S = 2(1 − Tr ρ_q²)`, the entanglement between qubit `q` and the rest.
pub fn entanglement_s(state: &StateVector, q: usize) -> Result<f64> {
    if state.n_qubits() < 2 {
        return Err(Error::SingleQubitRegister);
    }
    let purity = state.reduced_density_single(q)?.purity();
    let s = 2.0 * (1.0 - purity);
    debug_assert!((-1e-12..=1.0 + 1e-12).contains(&s), "S = {s}");
    Ok(s.clamp(0.0, 1.0))
}

/// `Tr(ρ_q Z) = P(bit q = 0) − P(bit q = 1)`.
pub fn xi(state: &StateVector, q: usize) -> Result<f64> {
    if q >= state.n_qubits() {
        return Err(Error::QubitOutOfRange {
            qubit: q,
            n_qubits: state.n_qubits(),
        });
    }
    let bit = 1usize << q;
    Ok(state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| if i & bit == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum())
}

/// One branch of a two-outcome measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchOutcome {
    pub label: Outcome,
    pub probability: f64,
    /// `None` when the branch is degenerate (probability below 1e-14).
    pub post_state: Option<StateVector>,
}

impl BranchOutcome {
    pub fn is_degenerate(&self) -> bool {
        self.post_state.is_none()
    }
}

fn measure_branch(state: &StateVector, q: usize, basis: &BasisPair, label: Outcome) -> Result<BranchOutcome> {
    match state.project_measure(q, basis, label) {
        Ok((probability, post)) => Ok(BranchOutcome {
            label,
            probability,
            post_state: Some(post),
        }),
        Err(Error::DegenerateBranch { probability, .. }) => Ok(BranchOutcome {
            label,
            probability,
            post_state: None,
        }),
        Err(e) => Err(e),
    }
}

/// Attach `|+⟩`, CZ it to qubit 0, measure qubit 0 in the deviated basis.
///
/// Returns the `+` and `−` branches; the post-states keep the other register
/// qubits in order with the new qubit last.
pub fn process_g_branches(
    state: &StateVector,
    u: MeasurementAngle,
    dev: DeviationParams,
) -> Result<(BranchOutcome, BranchOutcome)> {
    let n = state.n_qubits();
    let prepared = state.extend_with_plus(1)?.apply_cz(FIRST, n)?;
    let basis = deviated_basis(u, dev);
    Ok((
        measure_branch(&prepared, FIRST, &basis, Outcome::Plus)?,
        measure_branch(&prepared, FIRST, &basis, Outcome::Minus)?,
    ))
}

/// Measure qubit 0 of a three-qubit block with a CZ between qubits 1 and 2,
/// placing the CZ before or after the measurement.
///
/// Returns both branches; with `cz_first = false` the CZ acts on the two
/// survivors (indices 0 and 1 after removal).
pub fn process_h_branches(
    state: &StateVector,
    basis: &BasisPair,
    cz_first: bool,
) -> Result<(BranchOutcome, BranchOutcome)> {
    if state.n_qubits() < 3 {
        return Err(Error::InvalidParameter {
            name: "process-h register size",
            value: state.n_qubits() as f64,
        });
    }
    let run = |label| -> Result<BranchOutcome> {
        if cz_first {
            measure_branch(&state.apply_cz(1, 2)?, FIRST, basis, label)
        } else {
            let mut b = measure_branch(state, FIRST, basis, label)?;
            if let Some(s) = b.post_state.as_mut() {
                s.apply_cz_mut(0, 1)?;
            }
            Ok(b)
        }
    };
    Ok((run(Outcome::Plus)?, run(Outcome::Minus)?))
}

/// Largest branch-by-branch discrepancy (probability or amplitude) between
/// the two orderings of a process-(h) step.
pub fn process_h_discrepancy(state: &StateVector, basis: &BasisPair) -> Result<f64> {
    let (a_plus, a_minus) = process_h_branches(state, basis, true)?;
    let (b_plus, b_minus) = process_h_branches(state, basis, false)?;
    let mut worst: f64 = 0.0;
    for (a, b) in [(a_plus, b_plus), (a_minus, b_minus)] {
        worst = worst.max((a.probability - b.probability).abs());
        match (&a.post_state, &b.post_state) {
            (Some(x), Some(y)) => worst = worst.max(x.max_amplitude_diff(y)?),
            (None, None) => {}
            _ => return Ok(f64::INFINITY),
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticInputs {
    pub xi: f64,
    pub s: f64,
    pub epsilon: f64,
    pub delta: f64,
}

impl AnalyticInputs {
    pub fn new(xi: f64, s: f64, dev: DeviationParams) -> Result<Self> {
        let inputs = Self {
            xi,
            s,
            epsilon: dev.epsilon(),
            delta: dev.delta(),
        };
        inputs.validate()?;
        Ok(inputs)
    }

    /// Reads `xi` and `S` off qubit 0 of `state`.
    pub fn from_state(state: &StateVector, dev: DeviationParams) -> Result<Self> {
        Self::new(xi(state, FIRST)?, entanglement_s(state, FIRST)?, dev)
    }

    fn validate(&self) -> Result<()> {
        if !(self.xi.abs() <= 1.0 + 1e-12) {
            return Err(Error::InvalidParameter {
                name: "xi",
                value: self.xi,
            });
        }
        if !(0.0..=1.0).contains(&self.s) {
            return Err(Error::InvalidParameter {
                name: "S",
                value: self.s,
            });
        }
        if 1.0 - self.xi * self.xi < self.s - CHECK_TOL {
            return Err(Error::CheckFailed(format!(
                "1 - xi^2 = {} is below S = {}",
                1.0 - self.xi * self.xi,
                self.s
            )));
        }
        Ok(())
    }

    fn bias(&self) -> f64 {
        self.xi * self.epsilon.sin() * self.delta.cos()
    }

    fn loss(&self) -> f64 {
        (1.0 - self.xi * self.xi) * (self.epsilon / 2.0).sin().powi(2)
    }
}

/// Closed-form branch statistics; `F±` is `None` where `P±` is degenerate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchStats {
    pub p_plus: f64,
    pub p_minus: f64,
    pub f_plus: Option<f64>,
    pub f_minus: Option<f64>,
}

impl BranchStats {
    pub fn probability(&self, label: Outcome) -> f64 {
        match label {
            Outcome::Plus => self.p_plus,
            Outcome::Minus => self.p_minus,
        }
    }

    pub fn fidelity(&self, label: Outcome) -> Option<f64> {
        match label {
            Outcome::Plus => self.f_plus,
            Outcome::Minus => self.f_minus,
        }
    }
}

pub fn analytic_branch_stats(inputs: &AnalyticInputs) -> Result<BranchStats> {
    inputs.validate()?;
    let (bias, loss) = (inputs.bias(), inputs.loss());
    let per_branch = |sign: f64| -> Result<(f64, Option<f64>)> {
        let p = 0.5 * (1.0 + sign * bias);
        if p <= DEGENERATE_PROB {
            return Ok((p, None));
        }
        let f = (1.0 + sign * bias - loss) / (2.0 * p);
        if !(-CHECK_TOL..=1.0 + CHECK_TOL).contains(&f) {
            return Err(Error::CheckFailed(format!("branch fidelity {f} outside [0, 1]")));
        }
        Ok((p, Some(f)))
    };
    let (p_plus, f_plus) = per_branch(1.0)?;
    let (p_minus, f_minus) = per_branch(-1.0)?;
    Ok(BranchStats {
        p_plus,
        p_minus,
        f_plus,
        f_minus,
    })
}

/// `1 − (1 − xi²) sin²(ε/2)`; independent of δ.
pub fn mean_fidelity_analytic(inputs: &AnalyticInputs) -> f64 {
    1.0 - inputs.loss()
}

/// `1 − S sin²(ε/2)`.
pub fn fidelity_upper_bound(s: f64, epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParameter { name: "S", value: s });
    }
    if !(0.0..=PI).contains(&epsilon) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: epsilon,
        });
    }
    Ok(1.0 - s * (epsilon / 2.0).sin().powi(2))
}

/// Both sides of `1 − xi² ≥ S` written through the eigendecomposition of
/// the first qubit's reduced state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProofRelation {
    /// `1 − (λ0 − λ1)² cos² μ`, equal to `1 − xi²`.
    pub lhs: f64,
    /// `1 − (λ0 − λ1)²`, equal to `S`.
    pub rhs: f64,
    pub mu: f64,
    pub eigen: DensityEigen,
}

impl ProofRelation {
    /// Eigenbasis aligned with Z (cos² μ = 1).
    pub fn z_aligned(&self, tol: f64) -> bool {
        1.0 - self.mu.cos().powi(2) <= tol
    }
}

pub fn verify_proof_relation(state: &StateVector, q: usize) -> Result<ProofRelation> {
    let s = entanglement_s(state, q)?;
    let eigen = state.reduced_density_single(q)?.eigen();
    let gap = (eigen.lambda0 - eigen.lambda1).powi(2);
    let lhs = 1.0 - gap * eigen.mu.cos().powi(2);
    let rhs = 1.0 - gap;
    if lhs < rhs - CHECK_TOL {
        return Err(Error::CheckFailed(format!("proof relation lhs {lhs} < rhs {rhs}")));
    }
    if (rhs - s).abs() > CHECK_TOL {
        return Err(Error::CheckFailed(format!(
            "1 - (l0 - l1)^2 = {rhs} differs from S = {s}"
        )));
    }
    Ok(ProofRelation {
        lhs,
        rhs,
        mu: eigen.mu,
        eigen,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FidelityReport {
    pub u: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub s: f64,
    pub xi: f64,
    /// Simulated branch probabilities of the deviated run.
    pub p_plus: f64,
    pub p_minus: f64,
    /// Simulated `|⟨φ±(0,0)|φ±(ε,δ)⟩|²`; `None` for a degenerate branch.
    pub f_plus: Option<f64>,
    pub f_minus: Option<f64>,
    pub analytic: BranchStats,
    pub f_mean_analytic: f64,
    pub f_mean_simulated: f64,
    pub bound: f64,
    /// `bound − f_mean_analytic`.
    pub slack: f64,
    pub degenerate: Vec<Outcome>,
}

/// Runs process (g) noiselessly and with deviation `dev`, pairs branches by
/// label and checks the closed forms and the bound against the simulation.
pub fn experiment_report(state: &StateVector, u: MeasurementAngle, dev: DeviationParams) -> Result<FidelityReport> {
    let inputs = AnalyticInputs::from_state(state, dev)?;
    let analytic = analytic_branch_stats(&inputs)?;
    let ideal = process_g_branches(state, u, DeviationParams::none())?;
    let noisy = process_g_branches(state, u, dev)?;

    let mut degenerate = Vec::new();
    let mut f = [None, None];
    let mut p = [0.0, 0.0];
    for (i, (ideal, noisy)) in [(&ideal.0, &noisy.0), (&ideal.1, &noisy.1)].into_iter().enumerate() {
        p[i] = noisy.probability;
        match (&ideal.post_state, &noisy.post_state) {
            (Some(a), Some(b)) => f[i] = Some(fidelity(a, b)?),
            _ => degenerate.push(noisy.label),
        }
    }
    let f_mean_simulated = p[0] * f[0].unwrap_or(0.0) + p[1] * f[1].unwrap_or(0.0);
    let f_mean_analytic = mean_fidelity_analytic(&inputs);
    let bound = fidelity_upper_bound(inputs.s, inputs.epsilon)?;
    let report = FidelityReport {
        u: u.radians(),
        epsilon: inputs.epsilon,
        delta: inputs.delta,
        s: inputs.s,
        xi: inputs.xi,
        p_plus: p[0],
        p_minus: p[1],
        f_plus: f[0],
        f_minus: f[1],
        analytic,
        f_mean_analytic,
        f_mean_simulated,
        bound,
        slack: bound - f_mean_analytic,
        degenerate,
    };
    if (f_mean_simulated - f_mean_analytic).abs() > CHECK_TOL {
        return Err(Error::CheckFailed(format!(
            "simulated mean fidelity {f_mean_simulated} differs from closed form {f_mean_analytic}"
        )));
    }
    if f_mean_simulated > bound + CHECK_TOL {
        return Err(Error::CheckFailed(format!(
            "mean fidelity {f_mean_simulated} exceeds bound {bound}"
        )));
    }
    Ok(report)
}
