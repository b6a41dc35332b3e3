//! The contraction calculus: combining equal-level variables into a single
//! derived variable, steering the landing level with `(1 + pi^k)`
//! multipliers for `k < e`, and climbing a derived variable upward through
//! its re-steerable levels.
//!
//! A derived variable keeps a substitution record: a tree whose leaves are
//! original variables with their accumulated multipliers, whose merge nodes
//! carry the steering toggles applied to their first operand, and whose
//! scale nodes record `pi`-power alignment. The record alone determines the
//! value (leaves carry their coefficients), so every steering variant is
//! recomputed and checked by direct evaluation rather than trusted from a
//! static free-level prediction.

use std::collections::BTreeSet;

use crate::form::AdditiveForm;
use crate::ring::{Field, RingElement, RingError, Valuation};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContractionError {
    #[error("operands at different levels ({a} vs {b})")]
    LevelMismatch { a: Valuation, b: Valuation },
    #[error("operands share original variables")]
    OverlappingSupport,
    #[error("operand is zero at working precision")]
    ZeroOperand,
    #[error("steering parameter k = {k} must satisfy 1 <= k < e = {e}")]
    BadSteering { k: u32, e: u32 },
    #[error("duplicate steering parameter k = {k}")]
    DuplicateSteering { k: u32 },
    #[error("operands have different degrees ({a} vs {b})")]
    DegreeMismatch { a: u32, b: u32 },
    #[error("no steering reaches the requested level")]
    NotAchievable,
    #[error("too many steering toggles to enumerate (e = {e})")]
    TooManyToggles { e: u32 },
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Per-level steering choice for a new contraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteerMode {
    /// Land exactly at `base + 2k` if the sum would pass it.
    Stop,
    /// Pass `base + 2k` if the sum would land there.
    Bypass,
}

/// Target of `steer_to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteerRequest {
    Exactly(u32),
    AtLeast(u32),
}

/// Substitution record of a derived variable.
#[derive(Debug, Clone)]
pub enum Record {
    Leaf {
        original: usize,
        coefficient: RingElement,
        multiplier: RingElement,
    },
    /// `pi^pi_power` applied to every substitution below.
    Scale { pi_power: u32, inner: Box<Record> },
    /// Merge of two operands that were both at level `base` at creation.
    /// Toggle `k-1` applies `(1 + pi^k)` to the whole left operand.
    Merge {
        base: u32,
        toggles: Vec<bool>,
        left: Box<Record>,
        right: Box<Record>,
    },
}

/// One leaf of an expanded record: the certificate assigns
/// `x_original = multiplier`.
#[derive(Debug, Clone)]
pub struct ExpandedLeaf {
    pub original: usize,
    pub coefficient: RingElement,
    pub multiplier: RingElement,
}

/// Address of a steering toggle inside a record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToggleSlot {
    path: Vec<Dir>,
    k: u32,
    /// valuation the flip changes, computed from current subtree values
    pub act_level: u32,
    pub state: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    Left,
    Right,
    Inner,
}

fn steer_multiplier(field: &Field, toggles: &[bool]) -> RingElement {
    let mut m = field.one();
    for (i, &on) in toggles.iter().enumerate() {
        if on {
            m = m.mul(&field.one().add(&field.pi_pow(i as u32 + 1)));
        }
    }
    m
}

impl Record {
    fn field(&self) -> &Field {
        match self {
            Record::Leaf { coefficient, .. } => coefficient.field(),
            Record::Scale { inner, .. } => inner.field(),
            Record::Merge { left, .. } => left.field(),
        }
    }

    /// Value of the contraction described by this record.
    pub fn value(&self, d: u32) -> RingElement {
        match self {
            Record::Leaf {
                coefficient,
                multiplier,
                ..
            } => coefficient.mul(&multiplier.pow(d as u64)),
            Record::Scale { pi_power, inner } => {
                inner.value(d).mul(&inner.field().pi_pow(pi_power * d))
            }
            Record::Merge {
                toggles,
                left,
                right,
                ..
            } => {
                let sm = steer_multiplier(left.field(), toggles);
                left.value(d).mul(&sm.pow(d as u64)).add(&right.value(d))
            }
        }
    }

    /// Leaves with their total multipliers (steering and scaling applied).
    pub fn expand(&self) -> Vec<ExpandedLeaf> {
        let mut out = Vec::new();
        self.expand_into(&self.field().one(), &mut out);
        out
    }

    fn expand_into(&self, acc: &RingElement, out: &mut Vec<ExpandedLeaf>) {
        match self {
            Record::Leaf {
                original,
                coefficient,
                multiplier,
            } => out.push(ExpandedLeaf {
                original: *original,
                coefficient: coefficient.clone(),
                multiplier: acc.mul(multiplier),
            }),
            Record::Scale { pi_power, inner } => {
                inner.expand_into(&acc.mul(&inner.field().pi_pow(*pi_power)), out)
            }
            Record::Merge {
                toggles,
                left,
                right,
                ..
            } => {
                let sm = steer_multiplier(left.field(), toggles);
                left.expand_into(&acc.mul(&sm), out);
                right.expand_into(acc, out);
            }
        }
    }

    /// All toggle slots with act levels computed from current values.
    fn toggle_slots(&self, d: u32) -> Vec<ToggleSlot> {
        let mut out = Vec::new();
        self.collect_slots(d, 0, &mut Vec::new(), &mut out);
        out
    }

    fn collect_slots(&self, d: u32, shift: u32, path: &mut Vec<Dir>, out: &mut Vec<ToggleSlot>) {
        match self {
            Record::Leaf { .. } => {}
            Record::Scale { pi_power, inner } => {
                path.push(Dir::Inner);
                inner.collect_slots(d, shift.saturating_add(pi_power * d), path, out);
                path.pop();
            }
            Record::Merge {
                toggles,
                left,
                right,
                ..
            } => {
                if let Valuation::Finite(lv) = left.value(d).valuation() {
                    for (i, &state) in toggles.iter().enumerate() {
                        let k = i as u32 + 1;
                        out.push(ToggleSlot {
                            path: path.clone(),
                            k,
                            act_level: lv.saturating_add(2 * k).saturating_add(shift),
                            state,
                        });
                    }
                }
                path.push(Dir::Left);
                left.collect_slots(d, shift, path, out);
                path.pop();
                path.push(Dir::Right);
                right.collect_slots(d, shift, path, out);
                path.pop();
            }
        }
    }

    fn flipped(&self, path: &[Dir], k: u32) -> Record {
        match (self, path.first()) {
            (
                Record::Merge {
                    base,
                    toggles,
                    left,
                    right,
                },
                None,
            ) => {
                let mut t = toggles.clone();
                t[k as usize - 1] = !t[k as usize - 1];
                Record::Merge {
                    base: *base,
                    toggles: t,
                    left: left.clone(),
                    right: right.clone(),
                }
            }
            (
                Record::Merge {
                    base,
                    toggles,
                    left,
                    right,
                },
                Some(Dir::Left),
            ) => Record::Merge {
                base: *base,
                toggles: toggles.clone(),
                left: Box::new(left.flipped(&path[1..], k)),
                right: right.clone(),
            },
            (
                Record::Merge {
                    base,
                    toggles,
                    left,
                    right,
                },
                Some(Dir::Right),
            ) => Record::Merge {
                base: *base,
                toggles: toggles.clone(),
                left: left.clone(),
                right: Box::new(right.flipped(&path[1..], k)),
            },
            (Record::Scale { pi_power, inner }, Some(Dir::Inner)) => Record::Scale {
                pi_power: *pi_power,
                inner: Box::new(inner.flipped(&path[1..], k)),
            },
            _ => unreachable!("toggle path does not match record shape"),
        }
    }
}

/// A contraction product: its value, its absolute level, the substitution
/// record tracing back to original variables, and the originals consumed.
#[derive(Debug, Clone)]
pub struct DerivedVariable {
    d: u32,
    value: RingElement,
    level: Valuation,
    record: Record,
    used: BTreeSet<usize>,
}

impl DerivedVariable {
    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn value(&self) -> &RingElement {
        &self.value
    }

    pub fn level(&self) -> Valuation {
        self.level
    }

    pub fn record(&self) -> &Record {
        &self.record
    }

    pub fn used(&self) -> &BTreeSet<usize> {
        &self.used
    }

    pub fn expand(&self) -> Vec<ExpandedLeaf> {
        self.record.expand()
    }

    /// Levels at which the producing contractions can be re-steered,
    /// computed from the current record.
    pub fn free_levels(&self) -> BTreeSet<u32> {
        self.record
            .toggle_slots(self.d)
            .into_iter()
            .map(|s| s.act_level)
            .collect()
    }

    /// Full assignment for the form: expanded multipliers on the support,
    /// zero elsewhere.
    pub fn assignment_for(&self, form: &AdditiveForm) -> Vec<RingElement> {
        let mut assignment = vec![form.field().zero(); form.len()];
        for leaf in self.expand() {
            assignment[leaf.original] = leaf.multiplier;
        }
        assignment
    }

    /// Record soundness: evaluating the form at the expanded assignment
    /// reproduces the value exactly.
    pub fn is_sound(&self, form: &AdditiveForm) -> bool {
        match form.evaluate(&self.assignment_for(form)) {
            Ok(v) => v == self.value,
            Err(_) => false,
        }
    }

    fn rebuilt(&self, record: Record) -> DerivedVariable {
        let value = record.value(self.d);
        let level = value.valuation();
        DerivedVariable {
            d: self.d,
            value,
            level,
            record,
            used: self.used.clone(),
        }
    }

    /// Substitute `y -> pi^j y`: value times `pi^(j d)`, level up by `j d`.
    pub fn raised(&self, j: u32) -> DerivedVariable {
        if j == 0 {
            return self.clone();
        }
        self.rebuilt(Record::Scale {
            pi_power: j,
            inner: Box::new(self.record.clone()),
        })
    }
}

/// A single original variable as a derived variable: multiplier 1, level
/// equal to the coefficient's absolute valuation, nothing free yet.
pub fn lift_original(form: &AdditiveForm, i: usize) -> DerivedVariable {
    let value = form.coeff(i).clone();
    let level = value.valuation();
    DerivedVariable {
        d: form.d(),
        value,
        level,
        record: Record::Leaf {
            original: i,
            coefficient: form.coeff(i).clone(),
            multiplier: form.field().one(),
        },
        used: BTreeSet::from([i]),
    }
}

fn check_operands(a: &DerivedVariable, b: &DerivedVariable) -> Result<u32, ContractionError> {
    if a.d != b.d {
        return Err(ContractionError::DegreeMismatch { a: a.d, b: b.d });
    }
    if a.value.field() != b.value.field() {
        return Err(ContractionError::Ring(RingError::FieldMismatch));
    }
    let (la, lb) = (a.level, b.level);
    let base = match (la, lb) {
        (Valuation::Finite(x), Valuation::Finite(y)) if x == y => x,
        (Valuation::AtLeastPrecision, _) | (_, Valuation::AtLeastPrecision) => {
            return Err(ContractionError::ZeroOperand)
        }
        _ => return Err(ContractionError::LevelMismatch { a: la, b: lb }),
    };
    if !a.used.is_disjoint(&b.used) {
        return Err(ContractionError::OverlappingSupport);
    }
    Ok(base)
}

pub(crate) fn contract_with_toggles(
    a: &DerivedVariable,
    b: &DerivedVariable,
    toggles: Vec<bool>,
) -> Result<DerivedVariable, ContractionError> {
    let base = check_operands(a, b)?;
    let field = a.value.field();
    let sm = steer_multiplier(field, &toggles);
    let value = a.value.mul(&sm.pow(a.d as u64)).add(&b.value);
    let level = value.valuation();
    debug_assert!(
        level > Valuation::Finite(base),
        "same-level contraction must gain at least one level"
    );
    Ok(DerivedVariable {
        d: a.d,
        value,
        level,
        record: Record::Merge {
            base,
            toggles,
            left: Box::new(a.record.clone()),
            right: Box::new(b.record.clone()),
        },
        used: a.used.union(&b.used).copied().collect(),
    })
}

/// Contract two same-level variables, processing steering choices in
/// increasing `k`: `Stop` lands the sum at `base + 2k` when it would pass,
/// `Bypass` pushes it off `base + 2k` when it would land there. The result
/// is always at least one level above the operands.
pub fn contract_pair(
    a: &DerivedVariable,
    b: &DerivedVariable,
    steering: &[(u32, SteerMode)],
) -> Result<DerivedVariable, ContractionError> {
    let base = check_operands(a, b)?;
    let field = a.value.field();
    let e = field.e() as u32;
    let mut seen = vec![false; e.max(1) as usize];
    let mut choices: Vec<(u32, SteerMode)> = steering.to_vec();
    choices.sort_by_key(|&(k, _)| k);
    for &(k, _) in &choices {
        if k == 0 || k >= e {
            return Err(ContractionError::BadSteering { k, e });
        }
        if seen[k as usize] {
            return Err(ContractionError::DuplicateSteering { k });
        }
        seen[k as usize] = true;
    }
    let mut toggles = vec![false; e.saturating_sub(1) as usize];
    for (k, mode) in choices {
        let sm = steer_multiplier(field, &toggles);
        let cur = a.value.mul(&sm.pow(a.d as u64)).add(&b.value);
        let at = Valuation::Finite(base + 2 * k);
        let flip = match mode {
            SteerMode::Stop => cur.valuation() > at,
            SteerMode::Bypass => cur.valuation() == at,
        };
        if flip {
            toggles[k as usize - 1] = true;
        }
    }
    contract_with_toggles(a, b, toggles)
}

/// One steering outcome of a pair contraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SteerOutcome {
    pub level: Valuation,
    pub toggles: Vec<bool>,
}

/// All distinct landing levels over the `2^(e-1)` steering choices of a new
/// contraction, each with the lexicographically smallest toggle set that
/// achieves it, sorted by level.
pub fn achievable_levels(
    a: &DerivedVariable,
    b: &DerivedVariable,
) -> Result<Vec<SteerOutcome>, ContractionError> {
    check_operands(a, b)?;
    let field = a.value.field();
    let e = field.e() as u32;
    let t = e.saturating_sub(1);
    if t > 20 {
        return Err(ContractionError::TooManyToggles { e });
    }
    let mut outcomes: Vec<SteerOutcome> = Vec::new();
    for mask in 0u32..(1 << t) {
        let toggles: Vec<bool> = (0..t).map(|i| mask >> i & 1 == 1).collect();
        let sm = steer_multiplier(field, &toggles);
        let level = a.value.mul(&sm.pow(a.d as u64)).add(&b.value).valuation();
        if !outcomes.iter().any(|o| o.level == level) {
            outcomes.push(SteerOutcome { level, toggles });
        }
    }
    outcomes.sort_by_key(|o| o.level);
    Ok(outcomes)
}

/// Contract landing exactly at the target, or at the smallest achievable
/// level at or above it for `AtLeast`; `NotAchievable` otherwise.
pub fn steer_to(
    a: &DerivedVariable,
    b: &DerivedVariable,
    request: SteerRequest,
) -> Result<DerivedVariable, ContractionError> {
    let outcomes = achievable_levels(a, b)?;
    let chosen = match request {
        SteerRequest::Exactly(t) => outcomes
            .into_iter()
            .find(|o| o.level == Valuation::Finite(t)),
        SteerRequest::AtLeast(t) => outcomes
            .into_iter()
            .find(|o| o.level >= Valuation::Finite(t)),
    };
    match chosen {
        Some(o) => contract_with_toggles(a, b, o.toggles),
        None => Err(ContractionError::NotAchievable),
    }
}

/// Result of `climb`: either the target was reached (possibly overshooting
/// or cancelling to zero), or no re-steering made progress.
#[derive(Debug, Clone)]
pub enum ClimbOutcome {
    Reached(DerivedVariable),
    Stuck(DerivedVariable),
}

/// Raise a derived variable to level at least `target` by flipping one
/// steering toggle at a time, accepting only flips that strictly increase
/// the measured valuation. Every step is verified by direct evaluation.
pub fn climb(var: DerivedVariable, target: u32) -> ClimbOutcome {
    let mut var = var;
    loop {
        if var.level >= Valuation::Finite(target) {
            return ClimbOutcome::Reached(var);
        }
        let slots = var.record.toggle_slots(var.d);
        let mut improved = None;
        // prefer a toggle acting at the current level; fall back to any
        // strictly improving flip
        let cur = match var.level {
            Valuation::Finite(v) => v,
            Valuation::AtLeastPrecision => unreachable!(),
        };
        let mut ordered: Vec<&ToggleSlot> = slots.iter().collect();
        ordered.sort_by_key(|s| (s.act_level != cur, s.act_level));
        for slot in ordered {
            let flipped = var.rebuilt(var.record.flipped(&slot.path, slot.k));
            if flipped.level > var.level {
                improved = Some(flipped);
                break;
            }
        }
        match improved {
            Some(next) => var = next,
            None => return ClimbOutcome::Stuck(var),
        }
    }
}

/// Land a derived variable at exactly `target`, climbing first and then
/// stopping back down with a single flip if it overshot.
pub fn settle_exactly(var: DerivedVariable, target: u32) -> Option<DerivedVariable> {
    let climbed = match climb(var, target) {
        ClimbOutcome::Reached(v) => v,
        ClimbOutcome::Stuck(_) => return None,
    };
    if climbed.level == Valuation::Finite(target) {
        return Some(climbed);
    }
    let slots = climbed.record.toggle_slots(climbed.d);
    for slot in &slots {
        if slot.act_level == target {
            let flipped = climbed.rebuilt(climbed.record.flipped(&slot.path, slot.k));
            if flipped.level == Valuation::Finite(target) {
                return Some(flipped);
            }
        }
    }
    None
}
