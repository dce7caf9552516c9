//! Sign-only views of dictionaries.
//!
//! The detection algorithms never read rational values: they ask a
//! [`DictionaryOracle`] for the sign pattern of `D(B)` (objective row
//! omitted) at a requested basis. [`RationalOracle`] answers from an exact
//! dictionary; the remaining types derive new oracles from an existing one
//! (subsystems, column promotion, lexicographic perturbation) using signs
//! alone.

use std::collections::VecDeque;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use num_traits::{One, Signed, Zero};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{Dictionary, Rat, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of(v: &Rat) -> Sign {
        if v.is_positive() {
            Sign::Pos
        } else if v.is_negative() {
            Sign::Neg
        } else {
            Sign::Zero
        }
    }

    pub fn negate(self) -> Sign {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Zero => Sign::Zero,
            Sign::Pos => Sign::Neg,
        }
    }

    pub fn is_pos(self) -> bool {
        self == Sign::Pos
    }

    pub fn is_neg(self) -> bool {
        self == Sign::Neg
    }

    pub fn is_zero(self) -> bool {
        self == Sign::Zero
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Neg => '-',
            Sign::Zero => '0',
            Sign::Pos => '+',
        }
    }

    pub fn from_char(c: char) -> Option<Sign> {
        match c {
            '-' => Some(Sign::Neg),
            '0' => Some(Sign::Zero),
            '+' => Some(Sign::Pos),
            _ => None,
        }
    }

    /// First nonzero sign of a lexicographic tuple.
    pub fn lex(tuple: impl IntoIterator<Item = Sign>) -> Sign {
        tuple
            .into_iter()
            .find(|s| !s.is_zero())
            .unwrap_or(Sign::Zero)
    }
}

/// Sign pattern of a dictionary body: rows `B`, columns `N ∪ {g}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignMatrix {
    basis: Vec<Var>,
    nonbasis: Vec<Var>,
    g: Vec<Sign>,
    body: Vec<Vec<Sign>>,
}

impl SignMatrix {
    /// `basis` and `nonbasis` must be sorted; rows and columns align with them.
    pub fn from_parts(
        basis: Vec<Var>,
        nonbasis: Vec<Var>,
        g: Vec<Sign>,
        body: Vec<Vec<Sign>>,
    ) -> Result<Self> {
        let sorted = |v: &[Var]| v.windows(2).all(|w| w[0] < w[1]);
        if !sorted(&basis) || !sorted(&nonbasis) {
            return Err(Error::InvalidIndex(
                "sign matrix labels must be sorted".into(),
            ));
        }
        if g.len() != basis.len()
            || body.len() != basis.len()
            || body.iter().any(|r| r.len() != nonbasis.len())
        {
            return Err(Error::DimensionMismatch("sign matrix shape".into()));
        }
        Ok(SignMatrix {
            basis,
            nonbasis,
            g,
            body,
        })
    }

    pub fn basis(&self) -> &[Var] {
        &self.basis
    }

    pub fn nonbasis(&self) -> &[Var] {
        &self.nonbasis
    }

    pub fn g_column(&self) -> &[Sign] {
        &self.g
    }

    pub fn rows(&self) -> &[Vec<Sign>] {
        &self.body
    }

    pub fn row_pos(&self, v: Var) -> Option<usize> {
        self.basis.binary_search(&v).ok()
    }

    pub fn col_pos(&self, v: Var) -> Option<usize> {
        self.nonbasis.binary_search(&v).ok()
    }

    pub fn is_basic(&self, v: Var) -> bool {
        self.row_pos(v).is_some()
    }

    pub fn g(&self, i: Var) -> Option<Sign> {
        self.row_pos(i).map(|p| self.g[p])
    }

    pub fn entry(&self, i: Var, j: Var) -> Option<Sign> {
        Some(self.body[self.row_pos(i)?][self.col_pos(j)?])
    }

    pub fn is_feasible(&self) -> bool {
        self.g.iter().all(|s| !s.is_neg())
    }

    pub fn without_rows(&self, drop: &[Var]) -> SignMatrix {
        let keep: Vec<usize> = (0..self.basis.len())
            .filter(|&i| !drop.contains(&self.basis[i]))
            .collect();
        SignMatrix {
            basis: keep.iter().map(|&i| self.basis[i]).collect(),
            nonbasis: self.nonbasis.clone(),
            g: keep.iter().map(|&i| self.g[i]).collect(),
            body: keep.iter().map(|&i| self.body[i].clone()).collect(),
        }
    }

    pub fn without_columns(&self, drop: &[Var]) -> SignMatrix {
        let keep: Vec<usize> = (0..self.nonbasis.len())
            .filter(|&j| !drop.contains(&self.nonbasis[j]))
            .collect();
        SignMatrix {
            basis: self.basis.clone(),
            nonbasis: keep.iter().map(|&j| self.nonbasis[j]).collect(),
            g: self.g.clone(),
            body: self
                .body
                .iter()
                .map(|row| keep.iter().map(|&j| row[j]).collect())
                .collect(),
        }
    }

    /// Row strings, `g` sign first, e.g. `"0++"`.
    pub fn row_strings(&self) -> Vec<String> {
        self.g
            .iter()
            .zip(&self.body)
            .map(|(g, row)| {
                std::iter::once(*g)
                    .chain(row.iter().copied())
                    .map(Sign::as_char)
                    .collect()
            })
            .collect()
    }
}

impl fmt::Display for SignMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "     g")?;
        for j in &self.nonbasis {
            write!(f, " {j:>3}")?;
        }
        writeln!(f)?;
        for (i, row) in self.basis.iter().zip(self.row_strings()) {
            write!(f, "{i:>3} ")?;
            for c in row.chars() {
                write!(f, "{c:>3} ")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Serialized form of a sign matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignMatrixDoc {
    pub basis: Vec<Var>,
    pub nonbasis: Vec<Var>,
    /// One string per basic row: the `g` sign followed by the row signs.
    pub rows: Vec<String>,
}

impl From<&SignMatrix> for SignMatrixDoc {
    fn from(s: &SignMatrix) -> Self {
        SignMatrixDoc {
            basis: s.basis.clone(),
            nonbasis: s.nonbasis.clone(),
            rows: s.row_strings(),
        }
    }
}

impl TryFrom<&SignMatrixDoc> for SignMatrix {
    type Error = Error;

    fn try_from(doc: &SignMatrixDoc) -> Result<Self> {
        let mut g = Vec::with_capacity(doc.rows.len());
        let mut body = Vec::with_capacity(doc.rows.len());
        for row in &doc.rows {
            let signs: Option<Vec<Sign>> = row.chars().map(Sign::from_char).collect();
            let signs =
                signs.ok_or_else(|| Error::InvalidIndex(format!("bad sign row {row:?}")))?;
            let (first, rest) = signs
                .split_first()
                .ok_or_else(|| Error::DimensionMismatch("empty sign row".into()))?;
            g.push(*first);
            body.push(rest.to_vec());
        }
        SignMatrix::from_parts(doc.basis.clone(), doc.nonbasis.clone(), g, body)
    }
}

/// Entrywise sign projection of a dictionary; the objective row is dropped.
pub fn oracle_signs(dict: &Dictionary) -> SignMatrix {
    SignMatrix {
        basis: dict.basis().to_vec(),
        nonbasis: dict.nonbasis().to_vec(),
        g: dict.rhs().iter().map(Sign::of).collect(),
        body: dict
            .coef()
            .iter()
            .map(|row| row.iter().map(Sign::of).collect())
            .collect(),
    }
}

/// Access to a system through the signs of its dictionaries only.
pub trait DictionaryOracle: Send + Sync {
    /// All variable labels, ascending.
    fn variables(&self) -> &[Var];

    /// A known basis (sorted) to start pivoting from.
    fn initial_basis(&self) -> &[Var];

    /// Sign matrix of `D(basis)`; `basis` must be sorted.
    fn signs(&self, basis: &[Var]) -> Result<SignMatrix>;

    /// Number of sign queries answered by the underlying backend.
    fn query_count(&self) -> u64;

    fn n(&self) -> usize {
        self.initial_basis().len()
    }

    fn d(&self) -> usize {
        self.variables().len() - self.initial_basis().len()
    }

    fn initial_nonbasis(&self) -> Vec<Var> {
        difference(self.variables(), self.initial_basis())
    }
}

/// `a \ b` for sorted slices.
pub(crate) fn difference(a: &[Var], b: &[Var]) -> Vec<Var> {
    a.iter()
        .copied()
        .filter(|v| b.binary_search(v).is_err())
        .collect()
}

pub(crate) fn union(a: &[Var], b: &[Var]) -> Vec<Var> {
    let mut out: Vec<Var> = a.iter().chain(b).copied().collect();
    out.sort();
    out.dedup();
    out
}

/// Basis after exchanging `leave` for `enter`, kept sorted.
pub(crate) fn exchanged(basis: &[Var], leave: Var, enter: Var) -> Vec<Var> {
    let mut out: Vec<Var> = basis.iter().copied().filter(|&v| v != leave).collect();
    let pos = out.binary_search(&enter).unwrap_or_else(|p| p);
    out.insert(pos, enter);
    out
}

const CACHE_SIZE: usize = 16;

/// Oracle backed by exact dictionaries. Recently visited dictionaries are
/// cached; a query is answered by pivoting from the closest cached basis.
pub struct RationalOracle {
    initial: Dictionary,
    variables: Vec<Var>,
    cache: Mutex<VecDeque<Dictionary>>,
    queries: AtomicU64,
}

impl RationalOracle {
    pub fn new(dict: Dictionary) -> Self {
        let dict = dict
            .with_objective(None)
            .expect("dropping the objective row cannot fail");
        let mut variables: Vec<Var> = dict
            .basis()
            .iter()
            .chain(dict.nonbasis())
            .copied()
            .collect();
        variables.sort();
        RationalOracle {
            initial: dict,
            variables,
            cache: Mutex::new(VecDeque::new()),
            queries: AtomicU64::new(0),
        }
    }

    pub fn initial_dictionary(&self) -> &Dictionary {
        &self.initial
    }

    /// Exact dictionary at `basis`.
    pub fn dictionary(&self, basis: &[Var]) -> Result<Dictionary> {
        if basis.len() != self.initial.n()
            || basis
                .iter()
                .any(|v| self.variables.binary_search(v).is_err())
        {
            return Err(Error::SingularBasis(basis.to_vec()));
        }
        let start = {
            let cache = self.cache.lock();
            if let Some(hit) = cache.iter().find(|d| d.basis() == basis) {
                return Ok(hit.clone());
            }
            cache
                .iter()
                .max_by_key(|d| overlap(d.basis(), basis))
                .filter(|d| overlap(d.basis(), basis) > overlap(self.initial.basis(), basis))
                .cloned()
                .unwrap_or_else(|| self.initial.clone())
        };
        let dict = walk_to_basis(start, basis)?;
        let mut cache = self.cache.lock();
        if cache.len() == CACHE_SIZE {
            cache.pop_back();
        }
        cache.push_front(dict.clone());
        Ok(dict)
    }
}

fn overlap(a: &[Var], b: &[Var]) -> usize {
    a.iter().filter(|v| b.binary_search(v).is_ok()).count()
}

/// Pivots `dict` until its basis equals `target`.
pub(crate) fn walk_to_basis(mut dict: Dictionary, target: &[Var]) -> Result<Dictionary> {
    while dict.basis() != target {
        let entering = difference(target, dict.basis());
        let leaving = difference(dict.basis(), target);
        let pair = entering.iter().find_map(|&s| {
            leaving
                .iter()
                .find(|&&r| dict.entry(r, s).is_some_and(|v| !v.is_zero()))
                .map(|&r| (r, s))
        });
        let (r, s) = pair.ok_or_else(|| Error::SingularBasis(target.to_vec()))?;
        dict = crate::pivot::pivot(&dict, r, s)?;
    }
    Ok(dict)
}

impl DictionaryOracle for RationalOracle {
    fn variables(&self) -> &[Var] {
        &self.variables
    }

    fn initial_basis(&self) -> &[Var] {
        self.initial.basis()
    }

    fn signs(&self, basis: &[Var]) -> Result<SignMatrix> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        Ok(oracle_signs(&self.dictionary(basis)?))
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

/// The subsystem keeping only the nonnegativity constraints of `keep`.
///
/// Every other variable is free; it is held basic and its row hidden, so the
/// subsystem is again in dictionary form over the variables `keep`.
pub struct Restricted<'a> {
    parent: &'a dyn DictionaryOracle,
    hidden: Vec<Var>,
    variables: Vec<Var>,
    initial: Vec<Var>,
}

impl<'a> Restricted<'a> {
    /// `start` is a parent basis from which the hidden variables are pivoted
    /// into the basis when they are not basic already.
    pub fn new(parent: &'a dyn DictionaryOracle, keep: &[Var], start: &[Var]) -> Result<Self> {
        let mut keep = keep.to_vec();
        keep.sort();
        keep.dedup();
        let hidden = difference(parent.variables(), &keep);
        let mut basis = start.to_vec();
        for &h in &hidden {
            if basis.binary_search(&h).is_ok() {
                continue;
            }
            let signs = parent.signs(&basis)?;
            let leave = signs
                .basis()
                .iter()
                .copied()
                .filter(|v| hidden.binary_search(v).is_err())
                .find(|&r| signs.entry(r, h).is_some_and(|s| !s.is_zero()))
                .ok_or_else(|| {
                    Error::AssumptionViolation(format!(
                        "kept constraints contain no nonbasis (cannot make {h} basic)"
                    ))
                })?;
            basis = exchanged(&basis, leave, h);
        }
        let initial = difference(&basis, &hidden);
        Ok(Restricted {
            parent,
            hidden,
            variables: keep,
            initial,
        })
    }

    pub fn hidden(&self) -> &[Var] {
        &self.hidden
    }

    /// Parent basis corresponding to a subsystem basis.
    pub fn parent_basis(&self, basis: &[Var]) -> Vec<Var> {
        union(basis, &self.hidden)
    }
}

impl DictionaryOracle for Restricted<'_> {
    fn variables(&self) -> &[Var] {
        &self.variables
    }

    fn initial_basis(&self) -> &[Var] {
        &self.initial
    }

    fn signs(&self, basis: &[Var]) -> Result<SignMatrix> {
        Ok(self
            .parent
            .signs(&self.parent_basis(basis))?
            .without_rows(&self.hidden))
    }

    fn query_count(&self) -> u64 {
        self.parent.query_count()
    }
}

/// Reads a homogeneous system `[0, D]` as the system whose constant column is
/// the column of `t`; `t` is removed from the variables.
pub struct ColumnPromotion<'a> {
    parent: &'a dyn DictionaryOracle,
    t: Var,
    variables: Vec<Var>,
}

impl<'a> ColumnPromotion<'a> {
    pub fn new(parent: &'a dyn DictionaryOracle, t: Var) -> Result<Self> {
        if parent.initial_basis().binary_search(&t).is_ok()
            || parent.variables().binary_search(&t).is_err()
        {
            return Err(Error::NotNonbasic(t));
        }
        Ok(ColumnPromotion {
            parent,
            t,
            variables: difference(parent.variables(), &[t]),
        })
    }
}

impl DictionaryOracle for ColumnPromotion<'_> {
    fn variables(&self) -> &[Var] {
        &self.variables
    }

    fn initial_basis(&self) -> &[Var] {
        self.parent.initial_basis()
    }

    fn signs(&self, basis: &[Var]) -> Result<SignMatrix> {
        let full = self.parent.signs(basis)?;
        let col = full.col_pos(self.t).expect("promoted column is nonbasic");
        let mut out = full.without_columns(&[self.t]);
        out.g = full.body.iter().map(|row| row[col]).collect();
        Ok(out)
    }

    fn query_count(&self) -> u64 {
        self.parent.query_count()
    }
}

/// Drops variables whose columns vanish identically; pivots never touch them.
pub struct WithoutColumns<'a> {
    parent: &'a dyn DictionaryOracle,
    dropped: Vec<Var>,
    variables: Vec<Var>,
}

impl<'a> WithoutColumns<'a> {
    pub fn new(parent: &'a dyn DictionaryOracle, dropped: &[Var]) -> Self {
        let mut dropped = dropped.to_vec();
        dropped.sort();
        WithoutColumns {
            parent,
            variables: difference(parent.variables(), &dropped),
            dropped,
        }
    }
}

impl DictionaryOracle for WithoutColumns<'_> {
    fn variables(&self) -> &[Var] {
        &self.variables
    }

    fn initial_basis(&self) -> &[Var] {
        self.parent.initial_basis()
    }

    fn signs(&self, basis: &[Var]) -> Result<SignMatrix> {
        Ok(self.parent.signs(basis)?.without_columns(&self.dropped))
    }

    fn query_count(&self) -> u64 {
        self.parent.query_count()
    }
}

/// Symbolic perturbation `x_v ≥ -ε_k` for `v = shifted[k]`, with
/// `ε_1 ≫ ε_2 ≫ … > 0`.
///
/// After substituting `x'_v = x_v + ε_k` the coefficients are unchanged and
/// row `t` gains, for each shifted `v`, the component `+1` if `v = t`, `0` if
/// `v` is some other basic variable, and `-d_tv` if `v` is nonbasic. The
/// perturbed `g` sign is the first nonzero sign of
/// `(d_tg, component_1, component_2, …)`, so it is computable from signs.
pub struct Perturbed<'a> {
    parent: &'a dyn DictionaryOracle,
    shifted: Vec<Var>,
}

impl<'a> Perturbed<'a> {
    pub fn new(parent: &'a dyn DictionaryOracle, shifted: Vec<Var>) -> Self {
        Perturbed { parent, shifted }
    }

    /// `x_i ≥ -ε^k` for the `k`-th initial basic variable.
    pub fn rowwise(parent: &'a dyn DictionaryOracle) -> Self {
        let shifted = parent.initial_basis().to_vec();
        Perturbed { parent, shifted }
    }

    pub fn shifted(&self) -> &[Var] {
        &self.shifted
    }
}

pub(crate) fn perturb_g(signs: &mut SignMatrix, shifted: &[Var]) {
    for p in 0..signs.basis.len() {
        if !signs.g[p].is_zero() {
            continue;
        }
        let t = signs.basis[p];
        signs.g[p] = Sign::lex(shifted.iter().map(|&v| {
            if v == t {
                Sign::Pos
            } else if let Some(q) = signs.col_pos(v) {
                signs.body[p][q].negate()
            } else {
                Sign::Zero
            }
        }));
    }
}

impl DictionaryOracle for Perturbed<'_> {
    fn variables(&self) -> &[Var] {
        self.parent.variables()
    }

    fn initial_basis(&self) -> &[Var] {
        self.parent.initial_basis()
    }

    fn signs(&self, basis: &[Var]) -> Result<SignMatrix> {
        let mut signs = self.parent.signs(basis)?;
        perturb_g(&mut signs, &self.shifted);
        Ok(signs)
    }

    fn query_count(&self) -> u64 {
        self.parent.query_count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PerturbationMode {
    SingleEpsilon(Var),
    RowwiseEpsilonPowers,
}

/// A dictionary carrying explicit ε-columns, highest order first. Column `k`
/// holds the coefficient of `ε^(k+1)` in each perturbed constant; pivots
/// update these columns exactly like `g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerturbedDictionary {
    base: Dictionary,
    eps_columns: Vec<Vec<Rat>>,
    mode: PerturbationMode,
}

/// `x_r ≥ -ε` for nonbasic `r`: the ε-column is `-D_{.r}`.
pub fn make_single_eps(dict: &Dictionary, r: Var) -> Result<PerturbedDictionary> {
    let q = dict.col_pos(r).ok_or(Error::NotNonbasic(r))?;
    let column = dict.coef().iter().map(|row| -&row[q]).collect();
    Ok(PerturbedDictionary {
        base: dict.clone(),
        eps_columns: vec![column],
        mode: PerturbationMode::SingleEpsilon(r),
    })
}

/// `x_i ≥ -ε^k` for the `k`-th basic variable: ε-columns start as the identity.
pub fn make_rowwise_eps(dict: &Dictionary) -> PerturbedDictionary {
    let n = dict.n();
    let eps_columns = (0..n)
        .map(|k| {
            (0..n)
                .map(|i| if i == k { Rat::one() } else { Rat::zero() })
                .collect()
        })
        .collect();
    PerturbedDictionary {
        base: dict.clone(),
        eps_columns,
        mode: PerturbationMode::RowwiseEpsilonPowers,
    }
}

impl PerturbedDictionary {
    pub fn base(&self) -> &Dictionary {
        &self.base
    }

    pub fn eps_columns(&self) -> &[Vec<Rat>] {
        &self.eps_columns
    }

    pub fn mode(&self) -> &PerturbationMode {
        &self.mode
    }

    pub fn pivot(&self, r: Var, s: Var) -> Result<PerturbedDictionary> {
        let (base, eps_columns) = self.base.pivot_with(r, s, &self.eps_columns)?;
        Ok(PerturbedDictionary {
            base,
            eps_columns,
            mode: self.mode.clone(),
        })
    }

    /// The dictionary with `ε` instantiated: `g + Σ_k ε^(k+1) · column_k`.
    pub fn instantiate(&self, eps: &Rat) -> Dictionary {
        let mut rhs = self.base.rhs().to_vec();
        let mut power = eps.clone();
        for col in &self.eps_columns {
            for (v, c) in rhs.iter_mut().zip(col) {
                *v += &power * c;
            }
            power *= eps;
        }
        Dictionary::new(
            self.base.basis().to_vec(),
            self.base.nonbasis().to_vec(),
            rhs,
            self.base.coef().to_vec(),
            None,
        )
        .expect("same shape as base")
    }
}

/// Signs with lexicographic `g` over `(base g, ε-columns…)`.
pub fn perturbed_signs(p: &PerturbedDictionary) -> SignMatrix {
    let mut signs = oracle_signs(&p.base);
    for (i, g) in signs.g.iter_mut().enumerate() {
        *g = Sign::lex(
            std::iter::once(&p.base.rhs()[i])
                .chain(p.eps_columns.iter().map(|col| &col[i]))
                .map(Sign::of),
        );
    }
    signs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{build_initial_dictionary, rat, vars, LpInstance};
    use crate::pivot::pivot;

    fn xyz() -> Dictionary {
        // x3 = x1 + x2
        build_initial_dictionary(&LpInstance {
            basis: vars([3]),
            nonbasis: vars([1, 2]),
            b: vec![rat(0)],
            a: vec![vec![rat(-1), rat(-1)]],
            c: None,
        })
        .unwrap()
    }

    #[test]
    fn signs_at_both_small_bases() {
        let d = xyz();
        assert_eq!(oracle_signs(&d).row_strings(), vec!["0++"]);
        let d2 = pivot(&d, Var(3), Var(2)).unwrap();
        let s = oracle_signs(&d2);
        assert_eq!(s.basis(), &vars([2]));
        assert_eq!(s.nonbasis(), &vars([1, 3]));
        assert_eq!(s.row_strings(), vec!["0-+"]);
    }

    #[test]
    fn all_zero_dictionary() {
        let inst = LpInstance::from_rows(
            vec![rat(0), rat(0)],
            vec![vec![rat(0), rat(0)], vec![rat(0), rat(0)]],
        )
        .unwrap();
        let s = oracle_signs(&build_initial_dictionary(&inst).unwrap());
        assert!(s.row_strings().iter().all(|r| r == "000"));
    }

    #[test]
    fn single_eps_breaks_zero_by_negated_column() {
        // row t: d_tg = 0, d_tr = + gives perturbed g sign -
        let d = xyz();
        let p = make_single_eps(&d, Var(1)).unwrap();
        assert_eq!(perturbed_signs(&p).g_column(), &[Sign::Neg]);
        // at basis {2}: row 2 = (0, -, +), -d_21 = + makes it feasible
        let d2 = pivot(&d, Var(3), Var(2)).unwrap();
        let p2 = make_single_eps(&d2, Var(1)).unwrap();
        assert_eq!(perturbed_signs(&p2).g_column(), &[Sign::Pos]);
        assert!(make_single_eps(&d, Var(3)).is_err());
    }

    #[test]
    fn rowwise_eps_positive_on_initial() {
        let p = make_rowwise_eps(&xyz());
        assert_eq!(perturbed_signs(&p).g_column(), &[Sign::Pos]);
        assert_eq!(p.eps_columns(), &[vec![rat(1)]]);
    }

    #[test]
    fn perturbed_pivot_matches_sign_rule() {
        let d = xyz();
        let oracle = RationalOracle::new(d.clone());
        let lex = Perturbed::rowwise(&oracle);
        let p = make_rowwise_eps(&d).pivot(Var(3), Var(1)).unwrap();
        assert_eq!(perturbed_signs(&p), lex.signs(&vars([1])).unwrap());
    }

    #[test]
    fn restricted_hides_rows() {
        let d = xyz();
        let oracle = RationalOracle::new(d);
        // keep {1,2}: x3 becomes free and its row disappears
        let sub = Restricted::new(&oracle, &vars([1, 2]), &vars([3])).unwrap();
        assert_eq!(sub.initial_basis(), &[] as &[Var]);
        let s = sub.signs(&[]).unwrap();
        assert_eq!(s.basis().len(), 0);
        assert_eq!(s.nonbasis(), &vars([1, 2]));
        // keep {2,3}: x1 is made basic first
        let sub = Restricted::new(&oracle, &vars([2, 3]), &vars([3])).unwrap();
        assert_eq!(sub.hidden(), &vars([1]));
        assert_eq!(sub.variables(), &vars([2, 3]));
        let s = sub.signs(sub.initial_basis()).unwrap();
        assert_eq!(s.basis().len(), 0);
    }

    #[test]
    fn column_promotion_reads_column_as_g() {
        let oracle = RationalOracle::new(xyz());
        let promoted = ColumnPromotion::new(&oracle, Var(1)).unwrap();
        let s = promoted.signs(&vars([3])).unwrap();
        assert_eq!(s.nonbasis(), &vars([2]));
        assert_eq!(s.row_strings(), vec!["++"]);
        assert!(ColumnPromotion::new(&oracle, Var(3)).is_err());
    }

    #[test]
    fn rational_oracle_rejects_singular_basis() {
        let inst = LpInstance::from_rows(vec![rat(1)], vec![vec![rat(0), rat(1)]]).unwrap();
        let oracle = RationalOracle::new(build_initial_dictionary(&inst).unwrap());
        assert!(matches!(
            oracle.signs(&vars([2])),
            Err(Error::SingularBasis(_))
        ));
        assert!(oracle.signs(&vars([3])).is_ok());
    }

    #[test]
    fn sign_doc_roundtrip() {
        let s = oracle_signs(&xyz());
        let doc = SignMatrixDoc::from(&s);
        assert_eq!(SignMatrix::try_from(&doc).unwrap(), s);
    }
}
