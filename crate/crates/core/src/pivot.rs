//! Pivot operations and finite pivot methods.
//!
//! Both methods are driven by a sign pattern: the least-index criss-cross
//! rule reads nothing but signs, and the smallest-index simplex rule picks
//! its leaving row either by an exact ratio test or, when only an oracle is
//! available, by trying each candidate pivot and keeping the first one that
//! stays feasible.

use std::collections::HashMap;

use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{Dictionary, ObjectiveRow, Rat, Var};
use crate::oracle::{exchanged, oracle_signs, DictionaryOracle, Sign, SignMatrix};

/// Exchanges basic `r` and nonbasic `s` (requires `d[r][s] ≠ 0`).
pub fn pivot(dict: &Dictionary, r: Var, s: Var) -> Result<Dictionary> {
    dict.pivot_with(r, s, &[]).map(|(d, _)| d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PivotRecord {
    pub leaving: Var,
    pub entering: Var,
    #[serde(with = "sign_char")]
    pub pivot_entry_sign: Sign,
}

mod sign_char {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::oracle::Sign;

    pub fn serialize<S: Serializer>(s: &Sign, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_char(s.as_char())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Sign, D::Error> {
        let c = char::deserialize(de)?;
        Sign::from_char(c).ok_or_else(|| serde::de::Error::custom("expected +, 0 or -"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminalKind {
    Optimal,
    Inconsistent,
    DualInconsistent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminalOutcome {
    pub kind: TerminalKind,
    pub dictionary: Dictionary,
    pub pivot_trace: Vec<PivotRecord>,
}

/// What to minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// The dictionary's own objective row (rational dictionaries only).
    Row,
    /// `x_v`; its row doubles as the objective while `v` is basic, otherwise
    /// the objective row is the unit row at `v`.
    Minimize(Var),
    /// `x_v` with `x_v ≥ 0` dropped; `v` is basic and never leaves.
    MinimizeFree(Var),
    /// Zero objective: terminates once feasible.
    Feasibility,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotRule {
    #[default]
    LeastIndex,
    /// Least-index rule over a random, seeded ordering of the variables.
    Randomized { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub rule: PivotRule,
    /// Hard clamp on the pivot budget `C(n+d, n)`.
    pub max_pivots: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            rule: PivotRule::LeastIndex,
            max_pivots: 10_000_000,
        }
    }
}

impl SolveOptions {
    pub fn pivot_cap(&self, n: usize, d: usize) -> u64 {
        binomial(n + d, n).min(self.max_pivots)
    }
}

/// `C(n, k)`, saturating.
pub fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Ranks variables for the least-index rules.
#[derive(Debug, Clone)]
pub(crate) struct IndexOrder {
    rank: Option<HashMap<Var, usize>>,
}

impl IndexOrder {
    pub(crate) fn new(rule: PivotRule, variables: &[Var]) -> Self {
        match rule {
            PivotRule::LeastIndex => IndexOrder { rank: None },
            PivotRule::Randomized { seed } => {
                let mut order = variables.to_vec();
                order.sort();
                order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                IndexOrder {
                    rank: Some(order.into_iter().enumerate().map(|(k, v)| (v, k)).collect()),
                }
            }
        }
    }

    fn key(&self, v: Var) -> (usize, Var) {
        match &self.rank {
            None => (v.0 as usize, v),
            Some(rank) => (rank.get(&v).copied().unwrap_or(usize::MAX), v),
        }
    }

    fn min(&self, it: impl IntoIterator<Item = Var>) -> Option<Var> {
        it.into_iter().min_by_key(|&v| self.key(v))
    }

    fn sorted(&self, mut v: Vec<Var>) -> Vec<Var> {
        v.sort_by_key(|&x| self.key(x));
        v
    }
}

pub(crate) enum Step {
    Pivot { leave: Var, enter: Var },
    Terminal(TerminalKind),
}

/// Signs of the synthesized objective row over the nonbasis.
pub(crate) fn objective_signs(signs: &SignMatrix, objective: Objective) -> Vec<Sign> {
    match objective {
        Objective::Minimize(v) | Objective::MinimizeFree(v) => match signs.row_pos(v) {
            Some(p) => signs.rows()[p].clone(),
            None => signs
                .nonbasis()
                .iter()
                .map(|&j| if j == v { Sign::Pos } else { Sign::Zero })
                .collect(),
        },
        Objective::Feasibility | Objective::Row => vec![Sign::Zero; signs.nonbasis().len()],
    }
}

fn skipped_row(objective: Objective) -> Option<Var> {
    match objective {
        Objective::MinimizeFree(v) => Some(v),
        _ => None,
    }
}

/// One step of the least-index criss-cross rule.
pub(crate) fn criss_cross_step(
    signs: &SignMatrix,
    obj: &[Sign],
    skip: Option<Var>,
    order: &IndexOrder,
) -> Step {
    let infeasible_rows = signs
        .basis()
        .iter()
        .zip(signs.g_column())
        .filter(|(v, g)| Some(**v) != skip && g.is_neg())
        .map(|(v, _)| *v);
    let improving_cols = signs
        .nonbasis()
        .iter()
        .zip(obj)
        .filter(|(_, s)| s.is_neg())
        .map(|(v, _)| *v);
    let Some(k) = order.min(infeasible_rows.chain(improving_cols)) else {
        return Step::Terminal(TerminalKind::Optimal);
    };
    if let Some(p) = signs.row_pos(k) {
        let row = &signs.rows()[p];
        let enter = order.min(
            signs
                .nonbasis()
                .iter()
                .zip(row)
                .filter(|(_, s)| s.is_pos())
                .map(|(v, _)| *v),
        );
        match enter {
            Some(enter) => Step::Pivot { leave: k, enter },
            None => Step::Terminal(TerminalKind::Inconsistent),
        }
    } else {
        let q = signs.col_pos(k).expect("candidate is basic or nonbasic");
        let leave = order.min(
            signs
                .basis()
                .iter()
                .zip(signs.rows())
                .filter(|(v, row)| Some(**v) != skip && row[q].is_neg())
                .map(|(v, _)| *v),
        );
        match leave {
            Some(leave) => Step::Pivot { leave, enter: k },
            None => Step::Terminal(TerminalKind::DualInconsistent),
        }
    }
}

fn feasible_except(signs: &SignMatrix, skip: Option<Var>) -> bool {
    signs
        .basis()
        .iter()
        .zip(signs.g_column())
        .all(|(v, g)| Some(*v) == skip || !g.is_neg())
}

/// A pivoting state: something that exposes signs and can be pivoted.
pub(crate) trait PivotState: Sized {
    fn signs(&self) -> &SignMatrix;
    fn pivot(&self, r: Var, s: Var) -> Result<Self>;

    /// Objective signs; the default synthesizes them from the body.
    fn objective(&self, objective: Objective) -> Result<Vec<Sign>> {
        Ok(objective_signs(self.signs(), objective))
    }

    /// Smallest-index leaving row for entering column `s` among `candidates`
    /// (already in rule order): the first whose pivot keeps feasibility.
    fn leaving(&self, s: Var, candidates: &[Var], skip: Option<Var>) -> Result<(Var, Self)> {
        for &r in candidates {
            let next = self.pivot(r, s)?;
            if feasible_except(next.signs(), skip) {
                return Ok((r, next));
            }
        }
        Err(Error::Precondition(
            "no feasibility-preserving pivot in a feasible dictionary".into(),
        ))
    }
}

pub(crate) struct RationalState {
    dict: Dictionary,
    signs: SignMatrix,
    trial_ratio: bool,
}

impl RationalState {
    fn new(dict: Dictionary, trial_ratio: bool) -> Self {
        let signs = oracle_signs(&dict);
        RationalState {
            dict,
            signs,
            trial_ratio,
        }
    }
}

impl PivotState for RationalState {
    fn signs(&self) -> &SignMatrix {
        &self.signs
    }

    fn pivot(&self, r: Var, s: Var) -> Result<Self> {
        Ok(RationalState::new(
            pivot(&self.dict, r, s)?,
            self.trial_ratio,
        ))
    }

    fn objective(&self, objective: Objective) -> Result<Vec<Sign>> {
        match objective {
            Objective::Row => self
                .dict
                .objective()
                .map(|o| o.coef.iter().map(Sign::of).collect())
                .ok_or_else(|| Error::Precondition("dictionary has no objective row".into())),
            other => Ok(objective_signs(&self.signs, other)),
        }
    }

    fn leaving(&self, s: Var, candidates: &[Var], skip: Option<Var>) -> Result<(Var, Self)> {
        if self.trial_ratio {
            return trial_leaving(self, s, candidates, skip);
        }
        // min d_ig / -d_is over candidates; ties keep the earliest in rule order
        let ratio = |r: Var| -> Rat {
            let g = self.dict.constant(r).expect("basic");
            let a = self.dict.entry(r, s).expect("entry");
            g / -a
        };
        let mut best: Option<(Var, Rat)> = None;
        for &r in candidates {
            let q = ratio(r);
            if best.as_ref().is_none_or(|(_, b)| q < *b) {
                best = Some((r, q));
            }
        }
        let (r, _) = best.ok_or_else(|| Error::Precondition("no leaving candidate".into()))?;
        Ok((r, self.pivot(r, s)?))
    }
}

fn trial_leaving<S: PivotState>(
    state: &S,
    s: Var,
    candidates: &[Var],
    skip: Option<Var>,
) -> Result<(Var, S)> {
    for &r in candidates {
        let next = state.pivot(r, s)?;
        if feasible_except(next.signs(), skip) {
            return Ok((r, next));
        }
    }
    Err(Error::Precondition(
        "no feasibility-preserving pivot in a feasible dictionary".into(),
    ))
}

pub(crate) struct OracleState<'a> {
    oracle: &'a dyn DictionaryOracle,
    signs: SignMatrix,
}

impl<'a> OracleState<'a> {
    pub(crate) fn new(oracle: &'a dyn DictionaryOracle, basis: &[Var]) -> Result<Self> {
        Ok(OracleState {
            oracle,
            signs: oracle.signs(basis)?,
        })
    }
}

impl PivotState for OracleState<'_> {
    fn signs(&self) -> &SignMatrix {
        &self.signs
    }

    fn pivot(&self, r: Var, s: Var) -> Result<Self> {
        match self.signs.entry(r, s) {
            None if !self.signs.is_basic(r) => return Err(Error::NotBasic(r)),
            None => return Err(Error::NotNonbasic(s)),
            Some(Sign::Zero) => return Err(Error::ZeroPivot { r, s }),
            Some(_) => {}
        }
        OracleState::new(self.oracle, &exchanged(self.signs.basis(), r, s))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Method {
    CrissCross,
    Simplex,
}

fn validate_objective(signs: &SignMatrix, objective: Objective) -> Result<()> {
    match objective {
        Objective::MinimizeFree(v) if !signs.is_basic(v) => Err(Error::NotBasic(v)),
        Objective::Minimize(v)
            if !signs.is_basic(v) && signs.nonbasis().binary_search(&v).is_err() =>
        {
            Err(Error::InvalidIndex(format!("{v} is not a variable")))
        }
        _ => Ok(()),
    }
}

fn run<S: PivotState>(
    start: S,
    objective: Objective,
    opts: &SolveOptions,
    method: Method,
) -> Result<(TerminalKind, S, Vec<PivotRecord>)> {
    validate_objective(start.signs(), objective)?;
    let skip = skipped_row(objective);
    let variables: Vec<Var> = start
        .signs()
        .basis()
        .iter()
        .chain(start.signs().nonbasis())
        .copied()
        .collect();
    let order = IndexOrder::new(opts.rule, &variables);
    let cap = opts.pivot_cap(start.signs().basis().len(), start.signs().nonbasis().len());
    if method == Method::Simplex && !feasible_except(start.signs(), skip) {
        return Err(Error::InfeasibleStart);
    }

    let mut state = start;
    let mut trace = Vec::new();
    loop {
        let obj = state.objective(objective)?;
        let step = match method {
            Method::CrissCross => criss_cross_step(state.signs(), &obj, skip, &order),
            Method::Simplex => {
                let signs = state.signs();
                let entering = order.min(
                    signs
                        .nonbasis()
                        .iter()
                        .zip(&obj)
                        .filter(|(_, s)| s.is_neg())
                        .map(|(v, _)| *v),
                );
                match entering {
                    None => Step::Terminal(TerminalKind::Optimal),
                    Some(s) => {
                        let q = signs.col_pos(s).expect("nonbasic");
                        let candidates: Vec<Var> = signs
                            .basis()
                            .iter()
                            .zip(signs.rows())
                            .filter(|(v, row)| Some(**v) != skip && row[q].is_neg())
                            .map(|(v, _)| *v)
                            .collect();
                        if candidates.is_empty() {
                            Step::Terminal(TerminalKind::DualInconsistent)
                        } else {
                            let candidates = order.sorted(candidates);
                            if trace.len() as u64 >= cap {
                                return Err(Error::IterationLimit { limit: cap });
                            }
                            let sign = signs.entry(candidates[0], s).expect("entry");
                            let (r, next) = state.leaving(s, &candidates, skip)?;
                            let sign = state.signs().entry(r, s).unwrap_or(sign);
                            trace.push(PivotRecord {
                                leaving: r,
                                entering: s,
                                pivot_entry_sign: sign,
                            });
                            state = next;
                            continue;
                        }
                    }
                }
            }
        };
        match step {
            Step::Terminal(kind) => return Ok((kind, state, trace)),
            Step::Pivot { leave, enter } => {
                if trace.len() as u64 >= cap {
                    return Err(Error::IterationLimit { limit: cap });
                }
                let sign = state.signs().entry(leave, enter).expect("pivot entry");
                trace.push(PivotRecord {
                    leaving: leave,
                    entering: enter,
                    pivot_entry_sign: sign,
                });
                state = state.pivot(leave, enter)?;
            }
        }
    }
}

fn finish(dict: Dictionary, objective: Objective) -> Result<Dictionary> {
    match objective {
        Objective::Row => Ok(dict),
        Objective::Minimize(v) => {
            let obj = dict.objective_for(v)?;
            dict.with_objective(Some(obj))
        }
        Objective::MinimizeFree(v) => dict.split_row(v),
        Objective::Feasibility => {
            let obj = ObjectiveRow {
                constant: Rat::default(),
                coef: vec![Rat::default(); dict.d()],
            };
            dict.with_objective(Some(obj))
        }
    }
}

fn solve_rational(
    dict: &Dictionary,
    objective: Objective,
    opts: &SolveOptions,
    method: Method,
    trial_ratio: bool,
) -> Result<TerminalOutcome> {
    let (kind, state, pivot_trace) = run(
        RationalState::new(dict.clone(), trial_ratio),
        objective,
        opts,
        method,
    )?;
    Ok(TerminalOutcome {
        kind,
        dictionary: finish(state.dict, objective)?,
        pivot_trace,
    })
}

/// Least-index criss-cross method from any dictionary.
///
/// For `Minimize`/`MinimizeFree` the returned dictionary carries the
/// synthesized objective row; for `MinimizeFree(v)` row `v` is moved out of
/// the body into the objective row.
pub fn criss_cross(
    dict: &Dictionary,
    objective: Objective,
    opts: &SolveOptions,
) -> Result<TerminalOutcome> {
    solve_rational(dict, objective, opts, Method::CrissCross, false)
}

/// Simplex method with the smallest-index rule; `dict` must be feasible.
pub fn simplex_smallest_index(
    dict: &Dictionary,
    objective: Objective,
    opts: &SolveOptions,
) -> Result<TerminalOutcome> {
    solve_rational(dict, objective, opts, Method::Simplex, false)
}

/// Same as [`simplex_smallest_index`] but picks leaving rows by trial pivots.
pub fn simplex_smallest_index_by_trials(
    dict: &Dictionary,
    objective: Objective,
    opts: &SolveOptions,
) -> Result<TerminalOutcome> {
    solve_rational(dict, objective, opts, Method::Simplex, true)
}

/// Terminal basis found through a sign oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignOutcome {
    pub kind: TerminalKind,
    pub basis: Vec<Var>,
    pub signs: SignMatrix,
    pub pivot_trace: Vec<PivotRecord>,
}

fn solve_oracle(
    oracle: &dyn DictionaryOracle,
    start: &[Var],
    objective: Objective,
    opts: &SolveOptions,
    method: Method,
) -> Result<SignOutcome> {
    if objective == Objective::Row {
        return Err(Error::Precondition(
            "the oracle omits the objective row".into(),
        ));
    }
    let (kind, state, pivot_trace) =
        run(OracleState::new(oracle, start)?, objective, opts, method)?;
    Ok(SignOutcome {
        kind,
        basis: state.signs.basis().to_vec(),
        signs: state.signs,
        pivot_trace,
    })
}

pub fn criss_cross_oracle(
    oracle: &dyn DictionaryOracle,
    start: &[Var],
    objective: Objective,
    opts: &SolveOptions,
) -> Result<SignOutcome> {
    solve_oracle(oracle, start, objective, opts, Method::CrissCross)
}

pub fn simplex_oracle(
    oracle: &dyn DictionaryOracle,
    start: &[Var],
    objective: Objective,
    opts: &SolveOptions,
) -> Result<SignOutcome> {
    solve_oracle(oracle, start, objective, opts, Method::Simplex)
}

/// Value of the objective at the basic solution of a terminal dictionary.
pub fn objective_value(outcome: &TerminalOutcome) -> Option<Rat> {
    outcome.dictionary.objective().map(|o| o.constant.clone())
}

/// True when the dictionary's objective row shows optimality.
pub fn is_optimal_row(dict: &Dictionary) -> bool {
    dict.objective()
        .is_some_and(|o| o.coef.iter().all(|v| !v.is_negative()))
}
