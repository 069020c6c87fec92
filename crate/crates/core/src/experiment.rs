//! Seeded sweeps over `(u, ε, δ)` and noiseless gate-pattern checks.
//!
//! Randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `seed_from_u64`. Per-trial state seeds are drawn in order from a master
//! generator seeded with the sweep seed; each sampled cell uses the trial
//! seed with its own stream number, so results do not depend on scheduling.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::analysis::{
    analytic_branch_stats, entanglement_s, experiment_report, fidelity_upper_bound, mean_fidelity_analytic,
    process_h_discrepancy, xi, AnalyticInputs, CHECK_TOL,
};
use crate::basis::{deviated_basis, DeviationParams, MeasurementAngle};
use crate::error::{Error, Result};
use crate::pattern::{
    cnot_pattern, execute_exhaustive, execute_sequence_exhaustive, x_rotation_pattern, z_rotation_pattern, GatePattern,
};
use crate::state::{fidelity, Gate2x2, StateVector, MAX_QUBITS};

/// Haar-random pure state: normalized i.i.d. standard complex Gaussians.
pub fn sample_random_state(n: usize, seed: u64) -> Result<StateVector> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    random_state_with(n, &mut rng)
}

pub fn random_state_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<StateVector> {
    if n > MAX_QUBITS {
        return Err(Error::CapacityExceeded(n));
    }
    let amps = (0..1usize << n)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::normalized(amps)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    Analytic,
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Where each trial's register comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSource {
    Random,
    Bell,
    /// `|0…0⟩` on `n_qubits` qubits.
    Zero,
    Custom(StateVector),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub seed: u64,
    pub n_qubits: usize,
    pub trials: usize,
    pub epsilon_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    pub u_grid: Vec<f64>,
    pub mode: SweepMode,
    pub shots: u64,
    pub state: StateSource,
}

pub const MIN_SHOTS: u64 = 100;

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if matches!(self.state, StateSource::Random | StateSource::Zero) && !(2..=8).contains(&self.n_qubits) {
            return bad(format!("qubits must be in 2..=8, got {}", self.n_qubits));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        for (name, grid) in [
            ("epsilon", &self.epsilon_grid),
            ("delta", &self.delta_grid),
            ("u", &self.u_grid),
        ] {
            if grid.is_empty() {
                return bad(format!("{name} grid is empty"));
            }
            if let Some(v) = grid.iter().find(|v| !v.is_finite()) {
                return bad(format!("{name} grid holds non-finite value {v}"));
            }
        }
        if let Some(e) = self
            .epsilon_grid
            .iter()
            .find(|e| !(0.0..=std::f64::consts::PI).contains(*e))
        {
            return bad(format!("epsilon {e} outside [0, pi]"));
        }
        if self.mode == SweepMode::Sampled && self.shots < MIN_SHOTS {
            return bad(format!(
                "sampled mode needs at least {MIN_SHOTS} shots, got {}",
                self.shots
            ));
        }
        if let StateSource::Custom(s) = &self.state {
            if s.n_qubits() < 2 {
                return bad("custom state needs at least two qubits".into());
            }
        }
        Ok(())
    }

    fn trial_state(&self, trial_seed: u64) -> Result<StateVector> {
        match &self.state {
            StateSource::Random => sample_random_state(self.n_qubits, trial_seed),
            StateSource::Bell => Ok(StateVector::bell()),
            StateSource::Zero => StateVector::zero(self.n_qubits),
            StateSource::Custom(s) => Ok(s.clone()),
        }
    }

    fn trial_seeds(&self) -> Vec<u64> {
        let mut master = ChaCha20Rng::seed_from_u64(self.seed);
        (0..self.trials).map(|_| master.random()).collect()
    }
}

/// One line of sweep output.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub seed: u64,
    pub trial: usize,
    pub n_qubits: usize,
    pub u: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub s: f64,
    pub xi: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    pub f_plus: Option<f64>,
    pub f_minus: Option<f64>,
    pub f_mean_analytic: f64,
    /// Absent in analytic mode.
    pub f_mean_simulated: Option<f64>,
    pub bound: f64,
    pub slack: f64,
    pub bound_violated: bool,
    /// Empirical `P+` over the shots; sampled mode only.
    pub p_plus_sampled: Option<f64>,
}

pub const CSV_HEADER: [&str; 18] = [
    "seed",
    "trial",
    "n_qubits",
    "u",
    "epsilon",
    "delta",
    "S",
    "xi",
    "P_plus",
    "P_minus",
    "F_plus",
    "F_minus",
    "F_mean_analytic",
    "F_mean_simulated",
    "bound",
    "slack",
    "bound_violated",
    "P_plus_sampled",
];

/// Rows with slack below this count as bound violations.
pub const VIOLATION_TOL: f64 = 1e-10;

struct Cell {
    trial: usize,
    u: f64,
    epsilon: f64,
    delta: f64,
}

/// Evaluates every `(trial, u, ε, δ)` cell; rows come back in that order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<ReportRow>> {
    config.validate()?;
    let seeds = config.trial_seeds();
    let states = seeds
        .iter()
        .map(|&s| config.trial_state(s))
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::new();
    for trial in 0..config.trials {
        for &u in &config.u_grid {
            for &epsilon in &config.epsilon_grid {
                for &delta in &config.delta_grid {
                    cells.push(Cell {
                        trial,
                        u,
                        epsilon,
                        delta,
                    });
                }
            }
        }
    }
    cells
        .par_iter()
        .enumerate()
        .map(|(index, cell)| evaluate_cell(config, &states[cell.trial], seeds[cell.trial], index, cell))
        .collect()
}

fn evaluate_cell(
    config: &SweepConfig,
    state: &StateVector,
    trial_seed: u64,
    index: usize,
    cell: &Cell,
) -> Result<ReportRow> {
    let u = MeasurementAngle::new(cell.u)?;
    let dev = DeviationParams::new(cell.epsilon, cell.delta)?;
    let mut row = ReportRow {
        seed: config.seed,
        trial: cell.trial,
        n_qubits: state.n_qubits(),
        u: u.radians(),
        epsilon: dev.epsilon(),
        delta: dev.delta(),
        s: 0.0,
        xi: 0.0,
        p_plus: 0.0,
        p_minus: 0.0,
        f_plus: None,
        f_minus: None,
        f_mean_analytic: 0.0,
        f_mean_simulated: None,
        bound: 0.0,
        slack: 0.0,
        bound_violated: false,
        p_plus_sampled: None,
    };
    match config.mode {
        SweepMode::Analytic => {
            let inputs = AnalyticInputs::new(xi(state, 0)?, entanglement_s(state, 0)?, dev)?;
            let stats = analytic_branch_stats(&inputs)?;
            row.s = inputs.s;
            row.xi = inputs.xi;
            row.p_plus = stats.p_plus;
            row.p_minus = stats.p_minus;
            row.f_plus = stats.f_plus;
            row.f_minus = stats.f_minus;
            row.f_mean_analytic = mean_fidelity_analytic(&inputs);
            row.bound = fidelity_upper_bound(inputs.s, inputs.epsilon)?;
        }
        SweepMode::Exhaustive | SweepMode::Sampled => {
            let r = experiment_report(state, u, dev)?;
            row.s = r.s;
            row.xi = r.xi;
            row.p_plus = r.p_plus;
            row.p_minus = r.p_minus;
            row.f_plus = r.f_plus;
            row.f_minus = r.f_minus;
            row.f_mean_analytic = r.f_mean_analytic;
            row.f_mean_simulated = Some(r.f_mean_simulated);
            row.bound = r.bound;
            if config.mode == SweepMode::Sampled {
                let mut rng = ChaCha20Rng::seed_from_u64(trial_seed);
                rng.set_stream(index as u64 + 1);
                let hits = (0..config.shots).filter(|_| rng.random::<f64>() < r.p_plus).count();
                let freq = hits as f64 / config.shots as f64;
                row.p_plus_sampled = Some(freq);
                row.f_mean_simulated = Some(freq * r.f_plus.unwrap_or(0.0) + (1.0 - freq) * r.f_minus.unwrap_or(0.0));
            }
        }
    }
    row.slack = row.bound - row.f_mean_analytic;
    row.bound_violated = row.slack < -VIOLATION_TOL;
    Ok(row)
}

/// 17 significant digits; exact round trip for `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>, missing: &str) -> String {
    x.map_or_else(|| missing.to_string(), format_f64)
}

impl ReportRow {
    fn fields(&self, missing: &str) -> [String; 18] {
        [
            self.seed.to_string(),
            self.trial.to_string(),
            self.n_qubits.to_string(),
            format_f64(self.u),
            format_f64(self.epsilon),
            format_f64(self.delta),
            format_f64(self.s),
            format_f64(self.xi),
            format_f64(self.p_plus),
            format_f64(self.p_minus),
            fmt_opt(self.f_plus, missing),
            fmt_opt(self.f_minus, missing),
            format_f64(self.f_mean_analytic),
            fmt_opt(self.f_mean_simulated, missing),
            format_f64(self.bound),
            format_f64(self.slack),
            self.bound_violated.to_string(),
            fmt_opt(self.p_plus_sampled, missing),
        ]
    }
}

pub fn to_csv(rows: &[ReportRow]) -> String {
    let mut out = CSV_HEADER.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.fields("").join(","));
        out.push('\n');
    }
    out
}

/// Array of flat objects keyed like the CSV header; missing values are `null`.
pub fn to_json(rows: &[ReportRow]) -> String {
    let mut out = String::from("[");
    for (i, row) in rows.iter().enumerate() {
        out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
        for (k, (key, value)) in CSV_HEADER.iter().zip(row.fields("null")).enumerate() {
            if k > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "\"{key}\": {value}");
        }
        out.push('}');
    }
    out.push_str(if rows.is_empty() { "]\n" } else { "\n]\n" });
    out
}

pub fn write_report(rows: &[ReportRow], format: OutputFormat, path: &Path) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => to_csv(rows),
        OutputFormat::Json => to_json(rows),
    };
    std::fs::write(path, text)?;
    Ok(())
}

/// Parses CSV written by [`to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<ReportRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    if header != CSV_HEADER.join(",") {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != CSV_HEADER.len() {
                return Err(Error::Parse(format!("line {}: {} fields", i + 2, f.len())));
            }
            let num = |k: usize| -> Result<f64> {
                f[k].parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad {} {:?}", i + 2, CSV_HEADER[k], f[k])))
            };
            let opt = |k: usize| -> Result<Option<f64>> {
                if f[k].is_empty() {
                    Ok(None)
                } else {
                    num(k).map(Some)
                }
            };
            let int = |k: usize| -> Result<u64> {
                f[k].parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad {} {:?}", i + 2, CSV_HEADER[k], f[k])))
            };
            Ok(ReportRow {
                seed: int(0)?,
                trial: int(1)? as usize,
                n_qubits: int(2)? as usize,
                u: num(3)?,
                epsilon: num(4)?,
                delta: num(5)?,
                s: num(6)?,
                xi: num(7)?,
                p_plus: num(8)?,
                p_minus: num(9)?,
                f_plus: opt(10)?,
                f_minus: opt(11)?,
                f_mean_analytic: num(12)?,
                f_mean_simulated: opt(13)?,
                bound: num(14)?,
                slack: num(15)?,
                bound_violated: f[16]
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad bound_violated", i + 2)))?,
                p_plus_sampled: opt(17)?,
            })
        })
        .collect()
}

/// Reads a register from text: the qubit count on the first line, then
/// `2^n` lines of whitespace-separated `re im` pairs.
pub fn parse_state_file(text: &str) -> Result<StateVector> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let n: usize = lines
        .next()
        .ok_or_else(|| Error::Parse("empty state file".into()))?
        .parse()
        .map_err(|_| Error::Parse("first line must be the qubit count".into()))?;
    if n > MAX_QUBITS {
        return Err(Error::CapacityExceeded(n));
    }
    let amps = lines
        .map(|l| {
            let parts: Vec<&str> = l.split_whitespace().collect();
            match parts.as_slice() {
                [re, im] => match (re.parse::<f64>(), im.parse::<f64>()) {
                    (Ok(re), Ok(im)) => Ok(C64::new(re, im)),
                    _ => Err(Error::Parse(format!("bad amplitude line {l:?}"))),
                },
                _ => Err(Error::Parse(format!("expected \"re im\", got {l:?}"))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    if amps.len() != 1 << n {
        return Err(Error::Parse(format!("{} amplitudes for {n} qubits", amps.len())));
    }
    StateVector::from_amplitudes(amps)
}

pub fn load_state_file(path: &Path) -> Result<StateVector> {
    parse_state_file(&std::fs::read_to_string(path)?)
}

/// Worst case of one gate-check family.
#[derive(Clone, Debug, PartialEq)]
pub struct GateCheck {
    pub name: &'static str,
    /// Worst infidelity for gate families, worst amplitude gap for the
    /// commutation check.
    pub worst: f64,
    pub threshold: f64,
    pub cases: usize,
}

impl GateCheck {
    pub fn passed(&self) -> bool {
        self.worst <= self.threshold
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateCheckSummary {
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<GateCheck>,
}

impl GateCheckSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(GateCheck::passed)
    }
}

pub const GATE_INFIDELITY_TOL: f64 = 1e-9;
pub const COMMUTATION_TOL: f64 = 1e-12;

/// Controlled-NOT by index permutation, for checking the pattern.
pub fn cnot_oracle(state: &StateVector, control: usize, target: usize) -> Result<StateVector> {
    let (c, t) = (1usize << control, 1usize << target);
    let amps = state.amplitudes();
    let out = (0..amps.len())
        .map(|i| if i & c != 0 { amps[i ^ t] } else { amps[i] })
        .collect();
    StateVector::from_amplitudes(out)
}

fn worst_branch_infidelity(input: &StateVector, pattern: &GatePattern, expect: &StateVector) -> Result<f64> {
    let exec = execute_exhaustive(input, pattern)?;
    if (exec.total_probability() - 1.0).abs() > CHECK_TOL {
        return Ok(f64::INFINITY);
    }
    exec.branches
        .iter()
        .map(|b| fidelity(&b.state, expect).map(|f| 1.0 - f))
        .try_fold(0.0f64, |w, f| f.map(|f| w.max(f)))
}

/// Noiseless pattern-vs-circuit checks plus the process-(h) commutation check.
///
/// Each family runs `trials` random `(angle, input)` draws on registers of
/// one to three qubits, acting on a random qubit.
pub fn run_gate_checks(seed: u64, trials: usize) -> Result<GateCheckSummary> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let mut family = |name: &'static str, rng: &mut ChaCha20Rng, f: &dyn Fn(&mut ChaCha20Rng) -> Result<f64>| {
        let worst = (0..trials)
            .map(|_| f(rng))
            .try_fold(0.0f64, |w, x| x.map(|x| w.max(x)))?;
        checks.push(GateCheck {
            name,
            worst,
            threshold: GATE_INFIDELITY_TOL,
            cases: trials,
        });
        Ok::<_, Error>(())
    };

    let rotation = |make: fn(MeasurementAngle, usize) -> GatePattern, gate: fn(f64) -> Gate2x2| {
        move |rng: &mut ChaCha20Rng| -> Result<f64> {
            let n = rng.random_range(1..=3);
            let target = rng.random_range(0..n);
            let u: f64 = rng.random_range(0.0..TAU);
            let input = random_state_with(n, rng)?;
            let expect = input.apply_single_qubit(target, &gate(u))?;
            worst_branch_infidelity(&input, &make(MeasurementAngle::new(u)?, target), &expect)
        }
    };
    family("x-rotation", &mut rng, &rotation(x_rotation_pattern, Gate2x2::rx))?;
    family("z-rotation", &mut rng, &rotation(z_rotation_pattern, Gate2x2::rz))?;
    family("c-not", &mut rng, &|rng| {
        let n = rng.random_range(2..=3);
        let control = rng.random_range(0..n);
        let target = (control + rng.random_range(1..n)) % n;
        let input = random_state_with(n, rng)?;
        let expect = cnot_oracle(&input, control, target)?;
        worst_branch_infidelity(&input, &cnot_pattern(control, target)?, &expect)
    })?;
    family("euler z-x-z", &mut rng, &|rng| {
        let [a, b, g]: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..TAU));
        let input = random_state_with(1, rng)?;
        let unitary = Gate2x2::rz(a).then_after(&Gate2x2::rx(b)).then_after(&Gate2x2::rz(g));
        let expect = input.apply_single_qubit(0, &unitary)?;
        let seq = [
            z_rotation_pattern(MeasurementAngle::new(g)?, 0),
            x_rotation_pattern(MeasurementAngle::new(b)?, 0),
            z_rotation_pattern(MeasurementAngle::new(a)?, 0),
        ];
        let exec = execute_sequence_exhaustive(&input, &seq)?;
        if (exec.total_probability() - 1.0).abs() > CHECK_TOL {
            return Ok(f64::INFINITY);
        }
        exec.branches
            .iter()
            .map(|br| fidelity(&br.state, &expect).map(|f| 1.0 - f))
            .try_fold(0.0f64, |w, f| f.map(|f| w.max(f)))
    })?;

    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let state = random_state_with(3, &mut rng)?;
        let u = MeasurementAngle::new(rng.random_range(0.0..TAU))?;
        let dev = DeviationParams::new(rng.random_range(0.0..std::f64::consts::PI), rng.random_range(0.0..TAU))?;
        worst = worst.max(process_h_discrepancy(&state, &deviated_basis(u, dev))?);
    }
    checks.push(GateCheck {
        name: "process-h commutation",
        worst,
        threshold: COMMUTATION_TOL,
        cases: trials,
    });

    Ok(GateCheckSummary { seed, trials, checks })
}

impl std::fmt::Display for GateCheckSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "gate checks: seed {} trials {}", self.seed, self.trials)?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<22} worst {:.3e} (threshold {:.0e}, {} cases) {}",
                c.name,
                c.worst,
                c.threshold,
                c.cases,
                if c.passed() { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}
