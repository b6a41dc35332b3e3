//! The solving pipeline: the variable-count bound, profile dispatch onto
//! the three contraction strategies, the strategies themselves, a generic
//! best-first fallback search, Newton--Hensel lifting, and the end-to-end
//! `solve` that emits verified zero certificates.
//!
//! Every strategy manufactures a derived variable at absolute level at
//! least `2e + 1` whose chain contains a unit-multiplier original at
//! coefficient level 0 (or an exact cancellation at working precision).
//! Hensel lifting then pushes the pivot coordinate until the form value
//! reaches the target valuation, and the certificate is pulled back
//! through the recorded substitutions and re-verified.

use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};
use std::time::Instant;

use crate::contraction::{
    achievable_levels, climb, contract_pair, lift_original, steer_to, ClimbOutcome,
    ContractionError, DerivedVariable, SteerMode, SteerRequest,
};
use crate::form::{AdditiveForm, FormError, LevelProfile, RotationMap, ZeroCertificate};
use crate::pairing::BinAssignment;
use crate::ring::{RingElement, RingError, Valuation};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolverError {
    #[error("degree {d} is outside the supported family d = 2m, m odd, m >= 3")]
    UnsupportedDegree { d: u32 },
    #[error("strategy precondition not met: {0}")]
    StrategyPrecondition(&'static str),
    #[error("strategy failed: {0}")]
    StrategyFailed(String),
    #[error("Hensel precondition not met: residual valuation {have}, need {need}")]
    HenselPreconditionFailed { have: Valuation, need: u32 },
    #[error("target precision {n_target} exceeds working precision {n_pi}")]
    TargetBeyondPrecision { n_target: u32, n_pi: u32 },
    #[error("precision exhausted during lifting")]
    PrecisionExhausted,
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Contraction(#[from] ContractionError),
}

/// Upper bound `d^2/4 + 3d + 1` on the variables needed for a zero.
pub fn variables_bound(d: u32) -> Result<u64, SolverError> {
    let m = d / 2;
    if d == 0 || !d.is_multiple_of(2) || m.is_multiple_of(2) || m < 3 {
        return Err(SolverError::UnsupportedDegree { d });
    }
    let d = d as u64;
    Ok(d * d / 4 + 3 * d + 1)
}

/// Which lemma a normalized profile falls under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    SingleLevel(u32),
    AdjacentBig(u32),
    AdjacentFourFour(u32),
    Fallback,
}

impl Strategy {
    pub fn label(&self) -> String {
        match self {
            Strategy::SingleLevel(k) => format!("single_level({k})"),
            Strategy::AdjacentBig(k) => format!("adjacent_big({k})"),
            Strategy::AdjacentFourFour(k) => format!("adjacent_four_four({k})"),
            Strategy::Fallback => "fallback".to_string(),
        }
    }
}

/// Pick the strategy for a profile: a level with `m+7` variables, else a
/// level with `m+3` whose successor (mod d) has 2, else adjacent levels
/// with 4 and 4, else the fallback search. Smallest level wins ties.
pub fn dispatch(profile: &LevelProfile, m: u32) -> Strategy {
    let counts = profile.counts();
    let d = counts.len();
    for (k, &c) in counts.iter().enumerate() {
        if c >= (m + 7) as usize {
            return Strategy::SingleLevel(k as u32);
        }
    }
    for (k, &c) in counts.iter().enumerate() {
        if c >= (m + 3) as usize && counts[(k + 1) % d] >= 2 {
            return Strategy::AdjacentBig(k as u32);
        }
    }
    for (k, &c) in counts.iter().enumerate() {
        if c >= 4 && counts[(k + 1) % d] >= 4 {
            return Strategy::AdjacentFourFour(k as u32);
        }
    }
    Strategy::Fallback
}

/// One audited step of the winning construction.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ContractionStep {
    pub op: String,
    pub inputs: Vec<String>,
    pub steering: String,
    pub result_level: String,
}

fn toggles_label(var: &DerivedVariable) -> String {
    let frees: Vec<String> = var.free_levels().iter().map(|l| l.to_string()).collect();
    if frees.is_empty() {
        "none".to_string()
    } else {
        frees.join(",")
    }
}

fn used_label(var: &DerivedVariable) -> String {
    let items: Vec<String> = var.used().iter().map(|i| format!("x{i}")).collect();
    items.join("+")
}

fn log_step(log: &mut Vec<ContractionStep>, op: &str, inputs: Vec<String>, var: &DerivedVariable) {
    log.push(ContractionStep {
        op: op.to_string(),
        inputs,
        steering: toggles_label(var),
        result_level: var.level().to_string(),
    });
}

/// Output of a strategy: the working (rotated) form, the pull-back stages
/// back to the input form, the winning derived variable, and the log.
#[derive(Debug, Clone)]
pub struct ChainOutcome {
    pub working: AdditiveForm,
    /// (target form, map) pairs applied innermost-first at pull-back
    pub stages: Vec<(AdditiveForm, RotationMap)>,
    pub rotation: u32,
    pub winner: DerivedVariable,
    pub log: Vec<ContractionStep>,
}

/// All-bypass contraction: the pair's maximal landing, past every
/// steerable even offset.
fn max_landing(
    a: &DerivedVariable,
    b: &DerivedVariable,
    e: u32,
) -> Result<DerivedVariable, ContractionError> {
    let steering: Vec<(u32, SteerMode)> = (1..e).map(|k| (k, SteerMode::Bypass)).collect();
    contract_pair(a, b, &steering)
}

struct LandingTable {
    vars: HashMap<(usize, usize), DerivedVariable>,
}

impl LandingTable {
    fn build(lifted: &[DerivedVariable], e: u32) -> Result<LandingTable, ContractionError> {
        let mut vars = HashMap::new();
        for i in 0..lifted.len() {
            for j in i + 1..lifted.len() {
                if lifted[i].level() != lifted[j].level() {
                    continue;
                }
                vars.insert((i, j), max_landing(&lifted[i], &lifted[j], e)?);
            }
        }
        Ok(LandingTable { vars })
    }

    fn get(&self, i: usize, j: usize) -> &DerivedVariable {
        &self.vars[&(i.min(j), i.max(j))]
    }
}

enum RoundOutcome {
    /// level at least 2e+1 or exact zero; the global chain is done
    Win(DerivedVariable),
    /// a variable at exactly level 2e
    At2e(DerivedVariable),
}

/// Two disjoint same-bin pairs among `avail`, their contraction merged and
/// climbed to level 2e. Bins are the odd landing residues mod d.
fn bins_round(
    avail: &[usize],
    table: &LandingTable,
    d: u32,
    e: u32,
    log: &mut Vec<ContractionStep>,
) -> Result<RoundOutcome, SolverError> {
    let m = d / 2;
    let n = avail.len();
    if n < (m + 3) as usize {
        return Err(SolverError::StrategyFailed(format!(
            "bins round needs m+3 = {} variables, have {n}",
            m + 3
        )));
    }
    let pair_count = n * (n - 1) / 2;
    let mut bins = Vec::with_capacity(pair_count);
    for lo in 0..n {
        for hi in lo + 1..n {
            let landing = table.get(avail[lo], avail[hi]);
            match landing.level() {
                Valuation::Finite(l) if l % 2 == 1 => {
                    bins.push(((l % d - 1) / 2) as usize);
                }
                other => {
                    return Err(SolverError::StrategyFailed(format!(
                        "expected an odd landing in the bins phase, got {other}"
                    )))
                }
            }
        }
    }
    let assignment = BinAssignment::new(n, m as usize, bins);
    let hit = assignment.find_disjoint_same_bin().ok_or_else(|| {
        SolverError::StrategyFailed("no disjoint same-bin pairs with n >= m+3".to_string())
    })?;

    let (pa, pb) = (hit.first, hit.second);
    let va = table.get(avail[pa.lo], avail[pa.hi]).clone();
    let vb = table.get(avail[pb.lo], avail[pb.hi]).clone();
    log_step(log, "contract", vec![used_label(&va)], &va);
    log_step(log, "contract", vec![used_label(&vb)], &vb);
    let (la, lb) = match (va.level(), vb.level()) {
        (Valuation::Finite(a), Valuation::Finite(b)) => (a, b),
        _ => unreachable!("bins landings are finite"),
    };
    // same odd residue mod d; align the lower one if 2e exceeds d
    let (va, vb) = if la < lb {
        let raised = va.raised((lb - la) / d);
        log_step(log, "raise", vec![used_label(&raised)], &raised);
        (raised, vb)
    } else if lb < la {
        let raised = vb.raised((la - lb) / d);
        log_step(log, "raise", vec![used_label(&raised)], &raised);
        (va, raised)
    } else {
        (va, vb)
    };
    let merged = contract_pair(&va, &vb, &[])?;
    log_step(
        log,
        "merge",
        vec![used_label(&va), used_label(&vb)],
        &merged,
    );
    match climb(merged, 2 * e) {
        ClimbOutcome::Reached(v) => {
            log_step(log, "climb", vec![used_label(&v)], &v);
            if v.level() == Valuation::Finite(2 * e) {
                Ok(RoundOutcome::At2e(v))
            } else {
                Ok(RoundOutcome::Win(v))
            }
        }
        ClimbOutcome::Stuck(v) => Err(SolverError::StrategyFailed(format!(
            "climb stuck at {} short of 2e = {}",
            v.level(),
            2 * e
        ))),
    }
}

/// Shared strategy preamble: canonicalize levels, rotate the chosen level
/// to 0, and lift the level-0 and level-1 pools.
struct Workspace {
    working: AdditiveForm,
    stages: Vec<(AdditiveForm, RotationMap)>,
    rotation: u32,
    level0: Vec<usize>,
    level1: Vec<usize>,
}

fn prepare(form: &AdditiveForm, k: u32) -> Result<Workspace, SolverError> {
    let d = form.d();
    let (reduced, entry_map) = form.reduce_levels()?;
    let r = (d - k % d) % d;
    let (working, rot_map) = reduced.rotate(r)?;
    let level0 = (0..working.len())
        .filter(|&i| working.abs_level(i) == 0)
        .collect();
    let level1 = (0..working.len())
        .filter(|&i| working.abs_level(i) == 1)
        .collect();
    Ok(Workspace {
        working,
        stages: vec![(form.clone(), entry_map), (reduced, rot_map)],
        rotation: r,
        level0,
        level1,
    })
}

/// The single-level strategy: with `m+7` variables in one level, pair
/// contractions land at odd levels or 2e; two disjoint 2e landings merge
/// past 2e, and otherwise the bins lemma twice produces two variables at
/// 2e whose contraction clears it.
pub fn solve_single_level(form: &AdditiveForm, k: u32) -> Result<ChainOutcome, SolverError> {
    let d = form.d();
    let m = form.m();
    let e = form.field().e() as u32;
    let ws = prepare(form, k)?;
    if ws.level0.len() < (m + 7) as usize {
        return Err(SolverError::StrategyPrecondition(
            "single-level strategy needs m+7 variables at the chosen level",
        ));
    }
    let mut log = Vec::new();
    log.push(ContractionStep {
        op: "rotate".to_string(),
        inputs: vec![format!("level {k} to 0")],
        steering: format!("r={}", ws.rotation),
        result_level: "-".to_string(),
    });

    let lifted: Vec<DerivedVariable> = (0..ws.working.len())
        .map(|i| lift_original(&ws.working, i))
        .collect();
    let pool = &ws.level0;
    let table = LandingTable::build(&lifted, e).map_err(SolverError::from)?;

    let finish = |winner: DerivedVariable, mut log: Vec<ContractionStep>| {
        log_step(&mut log, "final", vec![used_label(&winner)], &winner);
        Ok(ChainOutcome {
            working: ws.working.clone(),
            stages: ws.stages.clone(),
            rotation: ws.rotation,
            winner,
            log,
        })
    };

    // phase 1: immediate wins and the level-2e pool, in pair order
    let mut pool2e: Vec<DerivedVariable> = Vec::new();
    for (ai, &a) in pool.iter().enumerate() {
        for &b in pool.iter().skip(ai + 1) {
            let landing = table.get(a, b);
            match landing.level() {
                Valuation::AtLeastPrecision => return finish(landing.clone(), log),
                Valuation::Finite(l) if l > 2 * e => return finish(landing.clone(), log),
                Valuation::Finite(l)
                    if l == 2 * e
                        && pool2e.iter().all(|v| v.used().is_disjoint(landing.used())) =>
                {
                    pool2e.push(landing.clone());
                }
                _ => {}
            }
        }
    }
    if pool2e.len() >= 2 {
        log_step(
            &mut log,
            "contract",
            vec![used_label(&pool2e[0])],
            &pool2e[0],
        );
        log_step(
            &mut log,
            "contract",
            vec![used_label(&pool2e[1])],
            &pool2e[1],
        );
        let winner = contract_pair(&pool2e[0], &pool2e[1], &[])?;
        log_step(
            &mut log,
            "merge",
            vec![used_label(&pool2e[0]), used_label(&pool2e[1])],
            &winner,
        );
        return finish(winner, log);
    }

    // phase 2: one or two bins rounds producing variables at exactly 2e
    let (first_2e, mut log) = if let Some(reserved) = pool2e.into_iter().next() {
        log_step(&mut log, "contract", vec![used_label(&reserved)], &reserved);
        (reserved, log)
    } else {
        let avail: Vec<usize> = pool.clone();
        match bins_round(&avail, &table, d, e, &mut log)? {
            RoundOutcome::Win(w) => return finish(w, log),
            RoundOutcome::At2e(z) => (z, log),
        }
    };
    let avail: Vec<usize> = pool
        .iter()
        .copied()
        .filter(|i| !first_2e.used().contains(i))
        .collect();
    let second_2e = match bins_round(&avail, &table, d, e, &mut log)? {
        RoundOutcome::Win(w) => return finish(w, log),
        RoundOutcome::At2e(z) => z,
    };
    let winner = contract_pair(&first_2e, &second_2e, &[])?;
    log_step(
        &mut log,
        "merge",
        vec![used_label(&first_2e), used_label(&second_2e)],
        &winner,
    );
    finish(winner, log)
}

/// Variant selector for the adjacent-level strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjacentVariant {
    /// `m+3` at the level, 2 at the next
    Big,
    /// 4 at the level, 4 at the next
    FourFour,
}

/// Build one variable at level 2e from a level-0 pair (landing `i`) and a
/// level-1 pair (landing `j`): align the pair landings by re-steering the
/// side whose free levels cover the other landing, merge, climb.
fn adjacent_round(
    working: &AdditiveForm,
    avail0: &[usize],
    avail1: &[usize],
    e: u32,
    log: &mut Vec<ContractionStep>,
) -> Result<(RoundOutcome, BTreeSet<usize>), SolverError> {
    if avail0.len() < 2 || avail1.is_empty() {
        return Err(SolverError::StrategyFailed(
            "adjacent round ran out of variables".to_string(),
        ));
    }
    let a0 = lift_original(working, avail0[0]);
    let b0 = lift_original(working, avail0[1]);
    let y0 = max_landing(&a0, &b0, e)?;
    log_step(log, "contract", vec![used_label(&y0)], &y0);
    let i = match y0.level() {
        Valuation::AtLeastPrecision => {
            return Ok((RoundOutcome::Win(y0.clone()), y0.used().clone()))
        }
        Valuation::Finite(l) if l > 2 * e => {
            return Ok((RoundOutcome::Win(y0.clone()), y0.used().clone()))
        }
        Valuation::Finite(l) if l == 2 * e => {
            return Ok((RoundOutcome::At2e(y0.clone()), y0.used().clone()))
        }
        Valuation::Finite(l) => l,
    };
    debug_assert!(i % 2 == 1, "sub-2e landing of a level-0 pair is odd");

    let merged = if i == 1 {
        // no variable can stop at level 1; merge the stuck pair with one
        // level-1 original, gaining the odd steering levels of a level-1 base
        let v1 = lift_original(working, avail1[0]);
        let z = contract_pair(&y0, &v1, &[])?;
        log_step(log, "merge", vec![used_label(&y0), used_label(&v1)], &z);
        z
    } else {
        if avail1.len() < 2 {
            return Err(SolverError::StrategyFailed(
                "adjacent round needs a level-1 pair".to_string(),
            ));
        }
        let a1 = lift_original(working, avail1[0]);
        let b1 = lift_original(working, avail1[1]);
        let y1 = max_landing(&a1, &b1, e)?;
        log_step(log, "contract", vec![used_label(&y1)], &y1);
        match y1.level() {
            Valuation::AtLeastPrecision => {
                return Ok((RoundOutcome::Win(y1.clone()), y1.used().clone()))
            }
            Valuation::Finite(j) if j < i => {
                // land the level-0 pair at the even level j instead
                let y0s = steer_to(&a0, &b0, SteerRequest::Exactly(j)).map_err(|_| {
                    SolverError::StrategyFailed(format!("level-0 pair cannot stop at {j}"))
                })?;
                log_step(log, "steer", vec![used_label(&y0s)], &y0s);
                let z = contract_pair(&y0s, &y1, &[])?;
                log_step(log, "merge", vec![used_label(&y0s), used_label(&y1)], &z);
                z
            }
            Valuation::Finite(_) => {
                // i < j: land the level-1 pair at the odd level i instead
                let y1s = steer_to(&a1, &b1, SteerRequest::Exactly(i)).map_err(|_| {
                    SolverError::StrategyFailed(format!("level-1 pair cannot stop at {i}"))
                })?;
                log_step(log, "steer", vec![used_label(&y1s)], &y1s);
                let z = contract_pair(&y0, &y1s, &[])?;
                log_step(log, "merge", vec![used_label(&y0), used_label(&y1s)], &z);
                z
            }
        }
    };
    match climb(merged, 2 * e) {
        ClimbOutcome::Reached(v) => {
            log_step(log, "climb", vec![used_label(&v)], &v);
            let used = v.used().clone();
            if v.level() == Valuation::Finite(2 * e) {
                Ok((RoundOutcome::At2e(v), used))
            } else {
                Ok((RoundOutcome::Win(v), used))
            }
        }
        ClimbOutcome::Stuck(v) => Err(SolverError::StrategyFailed(format!(
            "adjacent climb stuck at {}",
            v.level()
        ))),
    }
}

/// The adjacent-level strategies. `Big` first builds one 2e variable from
/// the big level alone (2e landings or the bins lemma) and then a second
/// from a level-0/level-1 pair construction; `FourFour` runs the pair
/// construction twice.
pub fn solve_adjacent(
    form: &AdditiveForm,
    k: u32,
    variant: AdjacentVariant,
) -> Result<ChainOutcome, SolverError> {
    let d = form.d();
    let m = form.m();
    let e = form.field().e() as u32;
    let ws = prepare(form, k)?;
    match variant {
        AdjacentVariant::Big => {
            if ws.level0.len() < (m + 3) as usize || ws.level1.len() < 2 {
                return Err(SolverError::StrategyPrecondition(
                    "big adjacent strategy needs m+3 variables at level k and 2 at level k+1",
                ));
            }
        }
        AdjacentVariant::FourFour => {
            if ws.level0.len() < 4 || ws.level1.len() < 4 {
                return Err(SolverError::StrategyPrecondition(
                    "four-four strategy needs 4 variables at level k and 4 at level k+1",
                ));
            }
        }
    }
    let mut log = Vec::new();
    log.push(ContractionStep {
        op: "rotate".to_string(),
        inputs: vec![format!("level {k} to 0")],
        steering: format!("r={}", ws.rotation),
        result_level: "-".to_string(),
    });

    let finish = |winner: DerivedVariable, mut log: Vec<ContractionStep>| {
        log_step(&mut log, "final", vec![used_label(&winner)], &winner);
        Ok(ChainOutcome {
            working: ws.working.clone(),
            stages: ws.stages.clone(),
            rotation: ws.rotation,
            winner,
            log,
        })
    };

    match variant {
        AdjacentVariant::Big => {
            let lifted: Vec<DerivedVariable> = (0..ws.working.len())
                .map(|i| lift_original(&ws.working, i))
                .collect();
            let table = LandingTable::build(&lifted, e).map_err(SolverError::from)?;
            // phase 1 over the big level, as in the single-level strategy
            let mut pool2e: Vec<DerivedVariable> = Vec::new();
            for (ai, &a) in ws.level0.iter().enumerate() {
                for &b in ws.level0.iter().skip(ai + 1) {
                    let landing = table.get(a, b);
                    match landing.level() {
                        Valuation::AtLeastPrecision => return finish(landing.clone(), log),
                        Valuation::Finite(l) if l > 2 * e => return finish(landing.clone(), log),
                        Valuation::Finite(l)
                            if l == 2 * e
                                && pool2e.iter().all(|v| v.used().is_disjoint(landing.used())) =>
                        {
                            pool2e.push(landing.clone());
                        }
                        _ => {}
                    }
                }
            }
            if pool2e.len() >= 2 {
                let winner = contract_pair(&pool2e[0], &pool2e[1], &[])?;
                log_step(
                    &mut log,
                    "merge",
                    vec![used_label(&pool2e[0]), used_label(&pool2e[1])],
                    &winner,
                );
                return finish(winner, log);
            }
            let z1 = if let Some(reserved) = pool2e.into_iter().next() {
                log_step(&mut log, "contract", vec![used_label(&reserved)], &reserved);
                reserved
            } else {
                match bins_round(&ws.level0, &table, d, e, &mut log)? {
                    RoundOutcome::Win(w) => return finish(w, log),
                    RoundOutcome::At2e(z) => z,
                }
            };
            // phase 2: one level-0 pair and the level-1 pair
            let rem0: Vec<usize> = ws
                .level0
                .iter()
                .copied()
                .filter(|i| !z1.used().contains(i))
                .collect();
            let rem1: Vec<usize> = ws
                .level1
                .iter()
                .copied()
                .filter(|i| !z1.used().contains(i))
                .collect();
            let (outcome, _) = adjacent_round(&ws.working, &rem0, &rem1, e, &mut log)?;
            let z2 = match outcome {
                RoundOutcome::Win(w) => return finish(w, log),
                RoundOutcome::At2e(z) => z,
            };
            let winner = contract_pair(&z1, &z2, &[])?;
            log_step(
                &mut log,
                "merge",
                vec![used_label(&z1), used_label(&z2)],
                &winner,
            );
            finish(winner, log)
        }
        AdjacentVariant::FourFour => {
            let (outcome, used) = adjacent_round(&ws.working, &ws.level0, &ws.level1, e, &mut log)?;
            let z1 = match outcome {
                RoundOutcome::Win(w) => return finish(w, log),
                RoundOutcome::At2e(z) => z,
            };
            let rem0: Vec<usize> = ws
                .level0
                .iter()
                .copied()
                .filter(|i| !used.contains(i))
                .collect();
            let rem1: Vec<usize> = ws
                .level1
                .iter()
                .copied()
                .filter(|i| !used.contains(i))
                .collect();
            let (outcome, _) = adjacent_round(&ws.working, &rem0, &rem1, e, &mut log)?;
            let z2 = match outcome {
                RoundOutcome::Win(w) => return finish(w, log),
                RoundOutcome::At2e(z) => z,
            };
            let winner = contract_pair(&z1, &z2, &[])?;
            log_step(
                &mut log,
                "merge",
                vec![used_label(&z1), used_label(&z2)],
                &winner,
            );
            finish(winner, log)
        }
    }
}

/// Can this derived variable feed the lifting stage? Exact zeros always
/// can; otherwise some unit-multiplier leaf must give a pivot level with
/// `v >= 2e + 2*pivot_level + 1`.
fn winnable_pivot(var: &DerivedVariable, e: u32) -> Option<usize> {
    let mut best: Option<(u32, usize)> = None;
    for leaf in var.expand() {
        if !leaf.multiplier.is_unit() {
            continue;
        }
        if let Valuation::Finite(l) = leaf.coefficient.valuation() {
            if best.is_none_or(|(bl, bi)| (l, leaf.original) < (bl, bi)) {
                best = Some((l, leaf.original));
            }
        }
    }
    let (pivot_level, pivot) = best?;
    match var.level() {
        Valuation::AtLeastPrecision => Some(pivot),
        Valuation::Finite(v) if v > 2 * e + 2 * pivot_level => Some(pivot),
        _ => None,
    }
}

/// Result of the fallback search.
#[derive(Debug, Clone)]
pub struct FallbackOutcome {
    pub winner: Option<DerivedVariable>,
    pub nodes: u64,
    pub log: Vec<ContractionStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Candidate {
    level: Valuation,
    used_count: usize,
    i: usize,
    j: usize,
    toggles: Vec<bool>,
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.level
            .cmp(&other.level)
            .then_with(|| other.used_count.cmp(&self.used_count))
            .then_with(|| other.i.cmp(&self.i))
            .then_with(|| other.j.cmp(&self.j))
            .then_with(|| other.toggles.cmp(&self.toggles))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn value_key(el: &RingElement) -> Vec<u8> {
    let mut key = Vec::new();
    for c in el.coeffs() {
        let bytes = c.to_bytes_le();
        key.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
        key.extend_from_slice(&bytes);
    }
    key
}

const POOL_CAP: usize = 4096;

/// Best-first search over a pool of derived variables keyed by level and
/// canonical value. Pairs with equal level mod d are aligned and
/// contracted; steering variants enter the frontier ranked by resulting
/// level, then by originals consumed. Succeeds when a pool member can feed
/// the lifting stage; gives up at the node budget.
pub fn generic_fallback(form: &AdditiveForm, budget: u64) -> Result<FallbackOutcome, SolverError> {
    let d = form.d();
    let e = form.field().e() as u32;
    let (reduced, entry_map) = form.reduce_levels()?;
    let _ = entry_map;
    let mut log = Vec::new();
    let mut pool: Vec<DerivedVariable> = (0..reduced.len())
        .map(|i| lift_original(&reduced, i))
        .collect();
    let mut seen: HashSet<(Valuation, Vec<u8>)> = pool
        .iter()
        .map(|v| (v.level(), value_key(v.value())))
        .collect();
    let mut frontier: BinaryHeap<Candidate> = BinaryHeap::new();

    let aligned_pair =
        |x: &DerivedVariable, y: &DerivedVariable| -> Option<(DerivedVariable, DerivedVariable)> {
            let (lx, ly) = match (x.level(), y.level()) {
                (Valuation::Finite(a), Valuation::Finite(b)) => (a, b),
                _ => return None,
            };
            if lx % d != ly % d || !x.used().is_disjoint(y.used()) {
                return None;
            }
            if lx < ly {
                Some((x.raised((ly - lx) / d), y.clone()))
            } else if ly < lx {
                Some((x.clone(), y.raised((lx - ly) / d)))
            } else {
                Some((x.clone(), y.clone()))
            }
        };

    let push_candidates = |frontier: &mut BinaryHeap<Candidate>,
                           pool: &[DerivedVariable],
                           new_idx: usize|
     -> Result<(), SolverError> {
        for i in 0..new_idx {
            if let Some((a, b)) = aligned_pair(&pool[i], &pool[new_idx]) {
                for outcome in achievable_levels(&a, &b)? {
                    frontier.push(Candidate {
                        level: outcome.level,
                        used_count: a.used().len() + b.used().len(),
                        i,
                        j: new_idx,
                        toggles: outcome.toggles,
                    });
                }
            }
        }
        Ok(())
    };

    for idx in 0..pool.len() {
        push_candidates(&mut frontier, &pool, idx)?;
    }

    let mut nodes = 0u64;
    while nodes < budget && pool.len() < POOL_CAP {
        let Some(cand) = frontier.pop() else { break };
        let Some((a, b)) = aligned_pair(&pool[cand.i], &pool[cand.j]) else {
            continue;
        };
        let var = crate::contraction::contract_with_toggles(&a, &b, cand.toggles.clone())?;
        nodes += 1;
        let key = (var.level(), value_key(var.value()));
        if !seen.insert(key) {
            continue;
        }
        if winnable_pivot(&var, e).is_some() {
            log_step(
                &mut log,
                "merge",
                vec![used_label(&a), used_label(&b)],
                &var,
            );
            log_step(&mut log, "final", vec![used_label(&var)], &var);
            return Ok(FallbackOutcome {
                winner: Some(var),
                nodes,
                log,
            });
        }
        pool.push(var);
        let new_idx = pool.len() - 1;
        if log.len() < 1024 {
            log_step(
                &mut log,
                "merge",
                vec![used_label(&a), used_label(&b)],
                &pool[new_idx],
            );
        }
        push_candidates(&mut frontier, &pool, new_idx)?;
    }
    Ok(FallbackOutcome {
        winner: None,
        nodes,
        log,
    })
}

/// Result of the Newton--Hensel stage.
#[derive(Debug, Clone)]
pub struct HenselOutcome {
    pub certificate: ZeroCertificate,
    pub iterations: usize,
    pub residuals: Vec<Valuation>,
}

/// Newton iteration on the pivot coordinate: `t <- t - F/F'` with
/// `F' = d a_p t^(d-1)`, whose valuation is `e + v(a_p)` at a unit pivot.
/// Requires `v(F(b)) >= 2e + 2 v(a_p) + 1`; the residual valuation then
/// strictly increases each step until it reaches the target.
pub fn hensel_lift(
    form: &AdditiveForm,
    assignment: &[RingElement],
    pivot: usize,
    n_target: u32,
) -> Result<HenselOutcome, SolverError> {
    let field = form.field();
    let e = field.e() as u32;
    let n_pi = field.n_pi();
    if n_target > n_pi {
        return Err(SolverError::TargetBeyondPrecision { n_target, n_pi });
    }
    if pivot >= form.len() || !assignment[pivot].is_unit() {
        return Err(SolverError::HenselPreconditionFailed {
            have: Valuation::Finite(0),
            need: 0,
        });
    }
    let pivot_level = match form.coeff(pivot).valuation() {
        Valuation::Finite(l) => l,
        Valuation::AtLeastPrecision => {
            return Err(SolverError::Internal("zero pivot coefficient".into()))
        }
    };
    let target = Valuation::Finite(n_target);
    let initial = form.evaluate(assignment)?.valuation();
    let mut residuals = vec![initial];
    if initial >= target {
        return Ok(HenselOutcome {
            certificate: ZeroCertificate {
                assignment: assignment.to_vec(),
                n_target,
                pivot,
            },
            iterations: 0,
            residuals,
        });
    }
    let need = 2 * e + 2 * pivot_level + 1;
    if initial < Valuation::Finite(need) {
        return Err(SolverError::HenselPreconditionFailed {
            have: initial,
            need,
        });
    }

    let a_p = form.coeff(pivot);
    let d_el = field.from_int(form.d() as i64);
    let b_pow = assignment[pivot].pow(form.d() as u64);
    // constant part of F along the pivot line
    let constant = form.evaluate(assignment)?.sub(&a_p.mul(&b_pow));
    let mut t = assignment[pivot].clone();
    let mut current = initial;
    let mut iterations = 0usize;
    while iterations < 64 {
        let g = a_p.mul(&t.pow(form.d() as u64)).add(&constant);
        let v = g.valuation();
        if v >= target {
            break;
        }
        let derivative = d_el.mul(a_p).mul(&t.pow(form.d() as u64 - 1));
        let (dv, dw) = derivative.unit_part()?;
        debug_assert_eq!(dv, e + pivot_level);
        let quotient = g.div_pi_pow(dv)?.mul(&dw.inv_unit()?);
        t = t.sub(&quotient);
        iterations += 1;
        let new_v = a_p.mul(&t.pow(form.d() as u64)).add(&constant).valuation();
        if new_v <= current {
            return Err(SolverError::PrecisionExhausted);
        }
        residuals.push(new_v);
        current = new_v;
    }
    if current < target {
        return Err(SolverError::PrecisionExhausted);
    }
    let mut out = assignment.to_vec();
    out[pivot] = t;
    Ok(HenselOutcome {
        certificate: ZeroCertificate {
            assignment: out,
            n_target,
            pivot,
        },
        iterations,
        residuals,
    })
}

/// Options for `solve`.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// certified valuation; default `2e + 10`
    pub n_target: Option<u32>,
    /// fallback node budget
    pub budget: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            n_target: None,
            budget: 100_000,
        }
    }
}

/// Full report of one solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// normalization rotation from the dispatch phase
    pub rotation: u32,
    /// the strategy dispatch chose
    pub dispatched: Strategy,
    /// the strategy that actually produced the certificate
    pub executed: Strategy,
    pub log: Vec<ContractionStep>,
    pub certificate: Option<ZeroCertificate>,
    pub n_target: u32,
    pub hensel_iterations: usize,
    pub fallback_nodes: u64,
    /// unsolved although the form meets the variable-count bound
    pub above_bound_unsolved: bool,
    pub wall_time_ms: f64,
}

fn finish_chain(
    chain: &ChainOutcome,
    n_target: u32,
) -> Result<(ZeroCertificate, usize, Vec<ContractionStep>), SolverError> {
    let mut log = chain.log.clone();
    let winner = &chain.winner;
    if !winner.is_sound(&chain.working) {
        return Err(SolverError::Internal(
            "substitution record does not reproduce the winner value".into(),
        ));
    }
    let assignment = winner.assignment_for(&chain.working);
    let pivot = winnable_pivot(winner, chain.working.field().e() as u32)
        .ok_or_else(|| SolverError::Internal("winning chain has no liftable unit pivot".into()))?;
    let lifted = hensel_lift(&chain.working, &assignment, pivot, n_target)?;
    log.push(ContractionStep {
        op: "hensel".to_string(),
        inputs: vec![format!("pivot x{pivot}")],
        steering: format!("iterations={}", lifted.iterations),
        result_level: lifted
            .residuals
            .last()
            .map(|v| v.to_string())
            .unwrap_or_default(),
    });
    // pull back through the recorded stages, innermost rotation first
    let mut cert = lifted.certificate;
    for (target_form, map) in chain.stages.iter().rev() {
        cert = map.pull_back(target_form, &cert)?;
    }
    Ok((cert, lifted.iterations, log))
}

/// Normalize, dispatch, run the selected strategy (fall back on failure),
/// lift, pull back, verify. A verified certificate or an honest `Unsolved`
/// (`certificate: None`) inside the report.
pub fn solve(form: &AdditiveForm, opts: &SolveOptions) -> Result<SolveReport, SolverError> {
    let started = Instant::now();
    let d = form.d();
    let bound = variables_bound(d)?;
    let e = form.field().e() as u32;
    let n_target = opts.n_target.unwrap_or(2 * e + 10);
    if n_target > form.field().n_pi() {
        return Err(SolverError::TargetBeyondPrecision {
            n_target,
            n_pi: form.field().n_pi(),
        });
    }

    let (r_norm, normed, _) = form.normalize()?;
    let dispatched = dispatch(&normed.profile(), form.m());
    // the dispatched level is in normalized coordinates; translate back
    let to_input_level = |k: u32| (k + d - r_norm) % d;

    let strategy_result: Option<(ChainOutcome, Strategy)> = match dispatched {
        Strategy::SingleLevel(k) => solve_single_level(form, to_input_level(k))
            .ok()
            .map(|c| (c, dispatched)),
        Strategy::AdjacentBig(k) => solve_adjacent(form, to_input_level(k), AdjacentVariant::Big)
            .ok()
            .map(|c| (c, dispatched)),
        Strategy::AdjacentFourFour(k) => {
            solve_adjacent(form, to_input_level(k), AdjacentVariant::FourFour)
                .ok()
                .map(|c| (c, dispatched))
        }
        Strategy::Fallback => None,
    };

    let mut fallback_nodes = 0u64;
    let (certificate, executed, hensel_iterations, log) = match strategy_result {
        Some((chain, strat)) => match finish_chain(&chain, n_target) {
            Ok((cert, iters, log)) => (Some(cert), strat, iters, log),
            Err(_) => {
                // strategy chain could not be lifted; try the fallback
                let fb = generic_fallback(form, opts.budget)?;
                fallback_nodes = fb.nodes;
                fallback_outcome(form, fb, n_target)?
            }
        },
        None => {
            let fb = generic_fallback(form, opts.budget)?;
            fallback_nodes = fb.nodes;
            fallback_outcome(form, fb, n_target)?
        }
    };

    if let Some(cert) = &certificate {
        let check = form.verify_certificate(cert);
        if !check.passes {
            return Err(SolverError::Internal(format!(
                "emitted certificate failed verification: valuation {}, pivot unit {}",
                check.valuation, check.pivot_is_unit
            )));
        }
    }
    let above_bound_unsolved = certificate.is_none() && form.len() as u64 >= bound;
    Ok(SolveReport {
        rotation: r_norm,
        dispatched,
        executed,
        log,
        certificate,
        n_target,
        hensel_iterations,
        fallback_nodes,
        above_bound_unsolved,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

type Finished = (
    Option<ZeroCertificate>,
    Strategy,
    usize,
    Vec<ContractionStep>,
);

fn fallback_outcome(
    form: &AdditiveForm,
    fb: FallbackOutcome,
    n_target: u32,
) -> Result<Finished, SolverError> {
    match fb.winner {
        None => Ok((None, Strategy::Fallback, 0, fb.log)),
        Some(winner) => {
            let (reduced, entry_map) = form.reduce_levels()?;
            let chain = ChainOutcome {
                working: reduced.clone(),
                stages: vec![(form.clone(), entry_map)],
                rotation: 0,
                winner,
                log: fb.log,
            };
            let (cert, iters, log) = finish_chain(&chain, n_target)?;
            Ok((Some(cert), Strategy::Fallback, iters, log))
        }
    }
}
