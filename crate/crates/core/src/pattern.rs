//! One-buffered measurement patterns for x-rotation, z-rotation and C-NOT.
//!
//! A pattern attaches its ancillas in `|+⟩`, applies its CZ bonds, then
//! measures its instructions in order. Surviving qubits are corrected with
//! the outcome-indexed Pauli byproducts and relabelled so that the output
//! ancilla takes the slot of the register qubit it replaces.
//!
//! With `m_i = 1` for a `−` outcome on instruction `i`, the uncorrected
//! outputs are
//!
//! - x-rotation: `X^{m2} Z^{m1} e^{−i(u/2)X}`, second angle `(−1)^{m1} u`
//! - z-rotation: `X^{m2} Z^{m1} e^{−i(u/2)Z}`
//! - C-NOT: `X_t^{m2} Z_t^{m1} Z_c^{m1} CNOT`

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::basis::{adaptive_basis, deviated_basis, ideal_basis, DeviationParams, MeasurementAngle, Outcome};
use crate::error::{Error, Result};
use crate::state::{Gate2x2, StateVector};

/// Exhaustive execution explores at most `2^MAX_EXHAUSTIVE_MEASUREMENTS` branches.
pub const MAX_EXHAUSTIVE_MEASUREMENTS: usize = 12;

/// A qubit as seen by a pattern: an existing register qubit or one of the
/// pattern's own ancillas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    Register(usize),
    Ancilla(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    fn gate(self) -> Gate2x2 {
        match self {
            Self::X => Gate2x2::pauli_x(),
            Self::Y => Gate2x2::pauli_y(),
            Self::Z => Gate2x2::pauli_z(),
        }
    }
}

/// Correction applied to surviving qubits, in application order.
pub type PauliString = Vec<(Site, Pauli)>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementInstruction {
    pub target: Site,
    pub angle: MeasurementAngle,
    /// Earlier instruction whose `−` outcome flips the sign of `angle`.
    pub adaptive_on: Option<usize>,
    pub deviation: Option<DeviationParams>,
}

impl MeasurementInstruction {
    fn new(target: Site, angle: MeasurementAngle, adaptive_on: Option<usize>) -> Self {
        Self {
            target,
            angle,
            adaptive_on,
            deviation: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind {
    XRotation { angle: MeasurementAngle },
    ZRotation { angle: MeasurementAngle },
    Cnot { control: usize, target: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GatePattern {
    kind: GateKind,
    ancilla_count: usize,
    bonds: Vec<(Site, Site)>,
    instructions: Vec<MeasurementInstruction>,
    byproducts: Vec<PauliString>,
    outputs: Vec<(Site, usize)>,
}

impl GatePattern {
    /// Checks the register-independent invariants.
    ///
    /// `byproducts[bits]` is the correction for the outcome pattern `bits`,
    /// where bit `i` is set when instruction `i` gave `−`. `outputs` maps each
    /// surviving ancilla to the register slot it takes over.
    pub fn new(
        kind: GateKind,
        ancilla_count: usize,
        bonds: Vec<(Site, Site)>,
        instructions: Vec<MeasurementInstruction>,
        byproducts: Vec<PauliString>,
        outputs: Vec<(Site, usize)>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidPattern(msg));
        let ancilla_ok = |s: &Site| !matches!(s, Site::Ancilla(k) if *k >= ancilla_count);

        for (a, b) in &bonds {
            if a == b {
                return bad(format!("self bond on {a:?}"));
            }
            if !ancilla_ok(a) || !ancilla_ok(b) {
                return bad(format!("bond ({a:?}, {b:?}) names a missing ancilla"));
            }
        }
        let mut measured = HashSet::new();
        for (i, ins) in instructions.iter().enumerate() {
            if !ancilla_ok(&ins.target) {
                return bad(format!("instruction {i} measures a missing ancilla"));
            }
            if !measured.insert(ins.target) {
                return bad(format!("{:?} is measured twice", ins.target));
            }
            if matches!(ins.adaptive_on, Some(j) if j >= i) {
                return bad(format!("instruction {i} adapts on a later instruction"));
            }
        }
        if instructions.len() >= usize::BITS as usize || byproducts.len() != 1usize << instructions.len() {
            return bad(format!(
                "{} byproduct rules for {} measurements",
                byproducts.len(),
                instructions.len()
            ));
        }
        let mut output_sites = HashSet::new();
        let mut slots = HashSet::new();
        for (site, slot) in &outputs {
            if !matches!(site, Site::Ancilla(_)) || !ancilla_ok(site) || measured.contains(site) {
                return bad(format!("output {site:?} is not a surviving ancilla"));
            }
            if !measured.contains(&Site::Register(*slot)) {
                return bad(format!("output slot {slot} is not freed by a measurement"));
            }
            if !output_sites.insert(*site) || !slots.insert(*slot) {
                return bad("duplicate output mapping".into());
            }
        }
        for k in 0..ancilla_count {
            let s = Site::Ancilla(k);
            if !measured.contains(&s) && !output_sites.contains(&s) {
                return bad(format!("{s:?} is neither measured nor an output"));
            }
        }
        for ins in &instructions {
            if let Site::Register(r) = ins.target {
                if !slots.contains(&r) {
                    return bad(format!("measured register qubit {r} has no replacement"));
                }
            }
        }
        for rule in &byproducts {
            for (site, _) in rule {
                if measured.contains(site) || !ancilla_ok(site) {
                    return bad(format!("byproduct acts on non-surviving {site:?}"));
                }
            }
        }
        Ok(Self {
            kind,
            ancilla_count,
            bonds,
            instructions,
            byproducts,
            outputs,
        })
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn ancilla_count(&self) -> usize {
        self.ancilla_count
    }

    pub fn bonds(&self) -> &[(Site, Site)] {
        &self.bonds
    }

    pub fn instructions(&self) -> &[MeasurementInstruction] {
        &self.instructions
    }

    pub fn byproduct(&self, outcome_bits: usize) -> &PauliString {
        &self.byproducts[outcome_bits]
    }

    pub fn outputs(&self) -> &[(Site, usize)] {
        &self.outputs
    }

    /// Sets a deviation on one instruction.
    pub fn with_deviation(mut self, instruction: usize, dev: DeviationParams) -> Result<Self> {
        let n = self.instructions.len();
        self.instructions
            .get_mut(instruction)
            .ok_or_else(|| Error::InvalidPattern(format!("no instruction {instruction} (pattern has {n})")))?
            .deviation = Some(dev);
        Ok(self)
    }

    /// Sets the same deviation on every instruction.
    pub fn with_uniform_deviation(mut self, dev: DeviationParams) -> Self {
        self.instructions.iter_mut().for_each(|i| i.deviation = Some(dev));
        self
    }

    /// Circuit-model unitary this pattern realizes, applied to `state`.
    pub fn apply_circuit_model(&self, state: &StateVector) -> Result<StateVector> {
        match self.kind {
            GateKind::XRotation { angle } => {
                state.apply_single_qubit(self.rotation_target(), &Gate2x2::rx(angle.radians()))
            }
            GateKind::ZRotation { angle } => {
                state.apply_single_qubit(self.rotation_target(), &Gate2x2::rz(angle.radians()))
            }
            GateKind::Cnot { control, target } => {
                let h = Gate2x2::hadamard();
                state
                    .apply_single_qubit(target, &h)?
                    .apply_cz(control, target)?
                    .apply_single_qubit(target, &h)
            }
        }
    }

    fn rotation_target(&self) -> usize {
        self.outputs[0].1
    }

    fn check_register(&self, n_qubits: usize) -> Result<()> {
        let sites = self
            .bonds
            .iter()
            .flat_map(|(a, b)| [a, b])
            .chain(self.instructions.iter().map(|i| &i.target))
            .chain(self.byproducts.iter().flatten().map(|(s, _)| s));
        for s in sites {
            if let Site::Register(r) = s {
                if *r >= n_qubits {
                    return Err(Error::QubitOutOfRange { qubit: *r, n_qubits });
                }
            }
        }
        Ok(())
    }
}

fn rotation_byproducts(out: Site) -> Vec<PauliString> {
    // index bits: bit 0 = first measurement, bit 1 = second
    (0..4)
        .map(|bits| {
            let mut rule = Vec::new();
            if bits & 2 != 0 {
                rule.push((out, Pauli::X));
            }
            if bits & 1 != 0 {
                rule.push((out, Pauli::Z));
            }
            rule
        })
        .collect()
}

/// Three-qubit wire `target – a0 – a1`: X on the target, then `±u` on `a0`
/// adapted to the first outcome. Output on `a1`.
pub fn x_rotation_pattern(u: MeasurementAngle, target: usize) -> GatePattern {
    let (t, a0, a1) = (Site::Register(target), Site::Ancilla(0), Site::Ancilla(1));
    GatePattern::new(
        GateKind::XRotation { angle: u },
        2,
        vec![(t, a0), (a0, a1)],
        vec![
            MeasurementInstruction::new(t, MeasurementAngle::zero(), None),
            MeasurementInstruction::new(a0, u, Some(0)),
        ],
        rotation_byproducts(a1),
        vec![(a1, target)],
    )
    .expect("x-rotation pattern is well formed")
}

/// Three-qubit wire `target – a0 – a1`: angle `u` on the target, then X on
/// `a0`. Output on `a1`.
pub fn z_rotation_pattern(u: MeasurementAngle, target: usize) -> GatePattern {
    let (t, a0, a1) = (Site::Register(target), Site::Ancilla(0), Site::Ancilla(1));
    GatePattern::new(
        GateKind::ZRotation { angle: u },
        2,
        vec![(t, a0), (a0, a1)],
        vec![
            MeasurementInstruction::new(t, u, None),
            MeasurementInstruction::new(a0, MeasurementAngle::zero(), None),
        ],
        rotation_byproducts(a1),
        vec![(a1, target)],
    )
    .expect("z-rotation pattern is well formed")
}

/// Target wire `target – a0 – a1` with the control bonded to `a0`; X
/// measurements on the target and `a0`. Output target on `a1`.
pub fn cnot_pattern(control: usize, target: usize) -> Result<GatePattern> {
    if control == target {
        return Err(Error::SameQubit(control));
    }
    let (c, t, a0, a1) = (
        Site::Register(control),
        Site::Register(target),
        Site::Ancilla(0),
        Site::Ancilla(1),
    );
    let byproducts = (0..4)
        .map(|bits| {
            let mut rule = Vec::new();
            if bits & 2 != 0 {
                rule.push((a1, Pauli::X));
            }
            if bits & 1 != 0 {
                rule.push((a1, Pauli::Z));
                rule.push((c, Pauli::Z));
            }
            rule
        })
        .collect();
    GatePattern::new(
        GateKind::Cnot { control, target },
        2,
        vec![(t, a0), (a0, a1), (c, a0)],
        vec![
            MeasurementInstruction::new(t, MeasurementAngle::zero(), None),
            MeasurementInstruction::new(a0, MeasurementAngle::zero(), None),
        ],
        byproducts,
        vec![(a1, target)],
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecordEntry {
    pub instruction: usize,
    pub outcome: Outcome,
    pub probability: f64,
}

/// Measurement history of one branch.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MeasurementRecord {
    pub entries: Vec<RecordEntry>,
}

impl MeasurementRecord {
    /// Outcome pattern with bit `i` set when instruction `i` gave `−`.
    pub fn bits(&self) -> usize {
        self.entries
            .iter()
            .fold(0, |acc, e| acc | (e.outcome.bit() << e.instruction))
    }

    pub fn outcome_of(&self, instruction: usize) -> Option<Outcome> {
        self.entries
            .iter()
            .find(|e| e.instruction == instruction)
            .map(|e| e.outcome)
    }

    pub fn outcomes(&self) -> Vec<Outcome> {
        self.entries.iter().map(|e| e.outcome).collect()
    }
}

/// Corrected output of one measurement history.
#[derive(Clone, Debug, PartialEq)]
pub struct ExecutedBranch {
    pub record: MeasurementRecord,
    /// Joint probability of the whole history.
    pub probability: f64,
    pub state: StateVector,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Execution {
    pub branches: Vec<ExecutedBranch>,
    /// Histories cut short by a branch of probability below the degeneracy
    /// threshold; the last entry is the degenerate one.
    pub degenerate: Vec<MeasurementRecord>,
}

impl Execution {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecutionMode {
    Exhaustive,
    Sampled { seed: u64 },
}

/// A register mid-pattern: the state plus which site each qubit index holds.
#[derive(Clone, Debug)]
struct Frame {
    state: StateVector,
    layout: Vec<Site>,
    record: MeasurementRecord,
    probability: f64,
}

impl Frame {
    fn new(register: &StateVector) -> Self {
        Self {
            state: register.clone(),
            layout: (0..register.n_qubits()).map(Site::Register).collect(),
            record: MeasurementRecord::default(),
            probability: 1.0,
        }
    }

    fn position(&self, site: Site) -> Result<usize> {
        self.layout
            .iter()
            .position(|s| *s == site)
            .ok_or_else(|| Error::InvalidPattern(format!("{site:?} is not present in the register")))
    }

    fn attach(&mut self, sites: &[Site]) -> Result<()> {
        self.state = self.state.extend_with_plus(sites.len())?;
        self.layout.extend_from_slice(sites);
        Ok(())
    }

    fn cz(&mut self, a: Site, b: Site) -> Result<()> {
        let (pa, pb) = (self.position(a)?, self.position(b)?);
        self.state.apply_cz_mut(pa, pb)
    }

    fn measure(&self, pattern: &GatePattern, index: usize, outcome: Outcome) -> Result<Frame> {
        let ins = &pattern.instructions[index];
        let angle = match ins.adaptive_on {
            Some(j) => {
                let prev = self
                    .record
                    .outcome_of(j)
                    .ok_or_else(|| Error::InvalidPattern(format!("instruction {index} adapts on unmeasured {j}")))?;
                adaptive_basis(ins.angle, prev)
            }
            None => ins.angle,
        };
        let basis = match ins.deviation {
            Some(dev) => deviated_basis(angle, dev),
            None => ideal_basis(angle),
        };
        let pos = self.position(ins.target)?;
        let (p, state) = self.state.project_measure(pos, &basis, outcome)?;
        let mut layout = self.layout.clone();
        layout.remove(pos);
        let mut record = self.record.clone();
        record.entries.push(RecordEntry {
            instruction: index,
            outcome,
            probability: p,
        });
        Ok(Frame {
            state,
            layout,
            record,
            probability: self.probability * p,
        })
    }

    fn finish(mut self, pattern: &GatePattern, n_register: usize) -> Result<ExecutedBranch> {
        for (site, pauli) in pattern.byproduct(self.record.bits()) {
            let pos = self.position(*site)?;
            self.state.apply_single_qubit_mut(pos, &pauli.gate())?;
        }
        let order = (0..n_register)
            .map(|slot| {
                let site = pattern
                    .outputs
                    .iter()
                    .find(|(_, s)| *s == slot)
                    .map_or(Site::Register(slot), |(site, _)| *site);
                self.position(site)
            })
            .collect::<Result<Vec<_>>>()?;
        if order.len() != self.layout.len() {
            return Err(Error::InvalidPattern(
                "surviving qubits do not fill the register".into(),
            ));
        }
        Ok(ExecutedBranch {
            state: self.state.permute_qubits(&order)?,
            record: self.record,
            probability: self.probability,
        })
    }
}

fn prepare(register: &StateVector, pattern: &GatePattern) -> Result<Frame> {
    pattern.check_register(register.n_qubits())?;
    let mut frame = Frame::new(register);
    let ancillas: Vec<Site> = (0..pattern.ancilla_count).map(Site::Ancilla).collect();
    frame.attach(&ancillas)?;
    for &(a, b) in &pattern.bonds {
        frame.cz(a, b)?;
    }
    Ok(frame)
}

/// Splits each frame on both outcomes of `index`, collecting degenerate
/// histories separately.
fn branch_all(
    frames: Vec<Frame>,
    pattern: &GatePattern,
    index: usize,
    degenerate: &mut Vec<MeasurementRecord>,
) -> Result<Vec<Frame>> {
    let mut next = Vec::with_capacity(frames.len() * 2);
    for frame in frames {
        for outcome in Outcome::BOTH {
            match frame.measure(pattern, index, outcome) {
                Ok(f) => next.push(f),
                Err(Error::DegenerateBranch { probability, .. }) => {
                    let mut record = frame.record.clone();
                    record.entries.push(RecordEntry {
                        instruction: index,
                        outcome,
                        probability,
                    });
                    degenerate.push(record);
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(next)
}

/// Runs every measurement history of `pattern` on `register`.
pub fn execute_exhaustive(register: &StateVector, pattern: &GatePattern) -> Result<Execution> {
    let k = pattern.instructions.len();
    if k > MAX_EXHAUSTIVE_MEASUREMENTS {
        return Err(Error::TooManyBranches(k));
    }
    let mut frames = vec![prepare(register, pattern)?];
    let mut degenerate = Vec::new();
    for index in 0..k {
        frames = branch_all(frames, pattern, index, &mut degenerate)?;
    }
    let branches = frames
        .into_iter()
        .map(|f| f.finish(pattern, register.n_qubits()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Execution { branches, degenerate })
}

/// Runs one measurement history drawn with the Born-rule probabilities.
pub fn execute_sampled<R: Rng + ?Sized>(
    register: &StateVector,
    pattern: &GatePattern,
    rng: &mut R,
) -> Result<ExecutedBranch> {
    let mut frame = prepare(register, pattern)?;
    for index in 0..pattern.instructions.len() {
        let draw: f64 = rng.random();
        frame = match frame.measure(pattern, index, Outcome::Plus) {
            Ok(plus) => {
                let p_plus = plus.record.entries.last().map_or(0.0, |e| e.probability);
                if draw < p_plus {
                    plus
                } else {
                    match frame.measure(pattern, index, Outcome::Minus) {
                        Ok(minus) => minus,
                        Err(Error::DegenerateBranch { .. }) => plus,
                        Err(e) => return Err(e),
                    }
                }
            }
            Err(Error::DegenerateBranch { .. }) => frame.measure(pattern, index, Outcome::Minus)?,
            Err(e) => return Err(e),
        };
    }
    frame.finish(pattern, register.n_qubits())
}

/// Dispatches on `mode`; sampled mode seeds a ChaCha20 generator and returns
/// a single branch.
pub fn execute_pattern(register: &StateVector, pattern: &GatePattern, mode: ExecutionMode) -> Result<Execution> {
    match mode {
        ExecutionMode::Exhaustive => execute_exhaustive(register, pattern),
        ExecutionMode::Sampled { seed } => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            Ok(Execution {
                branches: vec![execute_sampled(register, pattern, &mut rng)?],
                degenerate: Vec::new(),
            })
        }
    }
}

/// Applies `patterns` in order, one buffer at a time, over every history.
///
/// Instruction indices in the returned records are offset so that they are
/// unique across the whole sequence.
pub fn execute_sequence_exhaustive(register: &StateVector, patterns: &[GatePattern]) -> Result<Execution> {
    let mut current = vec![ExecutedBranch {
        record: MeasurementRecord::default(),
        probability: 1.0,
        state: register.clone(),
    }];
    let mut degenerate = Vec::new();
    let mut offset = 0;
    for pattern in patterns {
        let mut next = Vec::new();
        for branch in current {
            let shift = |rec: &MeasurementRecord| {
                let mut out = branch.record.clone();
                out.entries.extend(rec.entries.iter().map(|e| RecordEntry {
                    instruction: e.instruction + offset,
                    ..*e
                }));
                out
            };
            let exec = execute_exhaustive(&branch.state, pattern)?;
            degenerate.extend(exec.degenerate.iter().map(shift));
            for b in exec.branches {
                next.push(ExecutedBranch {
                    record: shift(&b.record),
                    probability: branch.probability * b.probability,
                    state: b.state,
                });
            }
        }
        offset += pattern.instructions.len();
        current = next;
    }
    Ok(Execution {
        branches: current,
        degenerate,
    })
}

/// One attach–CZ–measure unit of a pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ElementaryStep {
    /// Attach `ancilla`, CZ it to `measured`, measure `measured`.
    ProcessG {
        instruction: usize,
        measured: Site,
        ancilla: Site,
    },
    /// As `ProcessG`, plus CZs between `ancilla` and each of `partners`.
    /// The measurement commutes with those CZs, so the step reduces to a
    /// `ProcessG` followed by the extra CZs.
    ProcessH {
        instruction: usize,
        measured: Site,
        ancilla: Site,
        partners: Vec<Site>,
    },
}

impl ElementaryStep {
    pub fn is_process_h(&self) -> bool {
        matches!(self, Self::ProcessH { .. })
    }
}

/// Where process-(h) CZs go when replaying.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommutationOrder {
    CzFirst,
    MeasureFirst,
}

/// Splits a pattern into its elementary attach–CZ–measure steps.
pub fn decompose_to_elementary(pattern: &GatePattern) -> Result<Vec<ElementaryStep>> {
    let shape = |msg: String| Error::UnrecognizedPattern(msg);
    let mut attached: HashSet<Site> = HashSet::new();
    let mut pending: Vec<(Site, Site)> = pattern.bonds.clone();
    let mut steps = Vec::new();
    for (index, ins) in pattern.instructions.iter().enumerate() {
        let m = ins.target;
        if let Site::Ancilla(_) = m {
            if !attached.contains(&m) {
                return Err(shape(format!("{m:?} measured before it was attached")));
            }
        }
        let touching: Vec<(Site, Site)> = pending
            .iter()
            .filter(|(a, b)| *a == m || *b == m)
            .map(|&(a, b)| if a == m { (a, b) } else { (b, a) })
            .collect();
        let is_new = |s: &Site| matches!(s, Site::Ancilla(_)) && !attached.contains(s);
        let fresh: Vec<Site> = touching.iter().map(|(_, o)| *o).filter(is_new).collect();
        if fresh.len() != 1 || touching.len() != 1 {
            return Err(shape(format!(
                "instruction {index} on {m:?} must have exactly one pending bond, to a fresh ancilla"
            )));
        }
        let ancilla = fresh[0];
        attached.insert(ancilla);
        pending.retain(|(a, b)| !(*a == m || *b == m));

        let present = |s: &Site| matches!(s, Site::Register(_)) || attached.contains(s);
        let mut partners = Vec::new();
        pending.retain(|&(a, b)| {
            let other = if a == ancilla {
                b
            } else if b == ancilla {
                a
            } else {
                return true;
            };
            if present(&other) && other != m {
                partners.push(other);
                false
            } else {
                true
            }
        });
        steps.push(if partners.is_empty() {
            ElementaryStep::ProcessG {
                instruction: index,
                measured: m,
                ancilla,
            }
        } else {
            ElementaryStep::ProcessH {
                instruction: index,
                measured: m,
                ancilla,
                partners,
            }
        });
    }
    if !pending.is_empty() {
        return Err(shape(format!("bonds {pending:?} are not covered by any step")));
    }
    Ok(steps)
}

/// Replays elementary steps one ancilla at a time over every history.
pub fn replay_exhaustive(
    register: &StateVector,
    pattern: &GatePattern,
    steps: &[ElementaryStep],
    order: CommutationOrder,
) -> Result<Execution> {
    pattern.check_register(register.n_qubits())?;
    let mut frames = vec![Frame::new(register)];
    let mut degenerate = Vec::new();
    for step in steps {
        let (instruction, measured, ancilla, partners) = match step {
            ElementaryStep::ProcessG {
                instruction,
                measured,
                ancilla,
            } => (*instruction, *measured, *ancilla, &[][..]),
            ElementaryStep::ProcessH {
                instruction,
                measured,
                ancilla,
                partners,
            } => (*instruction, *measured, *ancilla, partners.as_slice()),
        };
        for f in frames.iter_mut() {
            f.attach(&[ancilla])?;
            f.cz(measured, ancilla)?;
            if order == CommutationOrder::CzFirst {
                for &p in partners {
                    f.cz(ancilla, p)?;
                }
            }
        }
        frames = branch_all(frames, pattern, instruction, &mut degenerate)?;
        if order == CommutationOrder::MeasureFirst {
            for f in frames.iter_mut() {
                for &p in partners {
                    f.cz(ancilla, p)?;
                }
            }
        }
    }
    let branches = frames
        .into_iter()
        .map(|f| f.finish(pattern, register.n_qubits()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Execution { branches, degenerate })
}
