//! Dictionary-form linear systems over exact rationals.
//!
//! A system is given as `x_B = b - A x_N` with every variable nonnegative.
//! Its dictionary with respect to a basis `B` stores `x_B = D x_{N ∪ {g}}`
//! where the `g` column holds constants (`x_g = 1`). An optional objective
//! row `f` is kept apart from the body so that sign views can drop it.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Variable label. Labels start at 1; the objective row `f` and the constant
/// column `g` are structural and never appear as a `Var`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Var(pub u32);

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn vars(ids: impl IntoIterator<Item = u32>) -> Vec<Var> {
    ids.into_iter().map(Var).collect()
}

/// Keys of a basic solution: variables plus the two structural indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Index {
    F,
    G,
    Var(Var),
}

fn check_index_sets(basis: &[Var], nonbasis: &[Var]) -> Result<()> {
    let mut all: Vec<Var> = basis.iter().chain(nonbasis).copied().collect();
    if all.iter().any(|v| v.0 == 0) {
        return Err(Error::InvalidIndex("variable labels start at 1".into()));
    }
    all.sort();
    if all.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidIndex(
            "basis and nonbasis must be disjoint and duplicate-free".into(),
        ));
    }
    Ok(())
}

/// `x_B = b - A x_N`, `x ≥ 0`, optionally with objective `c^T x_N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpInstance {
    pub basis: Vec<Var>,
    pub nonbasis: Vec<Var>,
    pub b: Vec<Rat>,
    pub a: Vec<Vec<Rat>>,
    pub c: Option<Vec<Rat>>,
}

impl LpInstance {
    /// Builds an instance with basis `1..=n` and nonbasis `n+1..=n+d`.
    pub fn from_rows(b: Vec<Rat>, a: Vec<Vec<Rat>>) -> Result<Self> {
        let n = b.len() as u32;
        let d = a.first().map_or(0, |row| row.len()) as u32;
        let inst = LpInstance {
            basis: vars(1..=n),
            nonbasis: vars(n + 1..=n + d),
            b,
            a,
            c: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.basis.len()
    }

    pub fn d(&self) -> usize {
        self.nonbasis.len()
    }

    /// All variable labels, ascending.
    pub fn variables(&self) -> Vec<Var> {
        let mut all: Vec<Var> = self.basis.iter().chain(&self.nonbasis).copied().collect();
        all.sort();
        all
    }

    pub fn validate(&self) -> Result<()> {
        let (n, d) = (self.n(), self.d());
        if self.b.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "b has length {}, expected {n}",
                self.b.len()
            )));
        }
        if self.a.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "A has {} rows, expected {n}",
                self.a.len()
            )));
        }
        if let Some(i) = self.a.iter().position(|row| row.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "row {} of A has length {}, expected {d}",
                i + 1,
                self.a[i].len()
            )));
        }
        if let Some(c) = &self.c {
            if c.len() != d {
                return Err(Error::DimensionMismatch(format!(
                    "c has length {}, expected {d}",
                    c.len()
                )));
            }
        }
        check_index_sets(&self.basis, &self.nonbasis)
    }

    /// Checks `x_B = b - A x_N` for a full assignment.
    pub fn satisfies_equalities(&self, x: &BTreeMap<Var, Rat>) -> bool {
        self.basis.iter().enumerate().all(|(i, bi)| {
            let mut rhs = self.b[i].clone();
            for (j, nj) in self.nonbasis.iter().enumerate() {
                rhs -= &self.a[i][j] * &x[nj];
            }
            x[bi] == rhs
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectiveRow {
    pub constant: Rat,
    pub coef: Vec<Rat>,
}

/// Dictionary `D(B)`: rows indexed by the sorted basis, columns by the sorted
/// nonbasis, constants in `rhs` (the `g` column).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dictionary {
    basis: Vec<Var>,
    nonbasis: Vec<Var>,
    rhs: Vec<Rat>,
    coef: Vec<Vec<Rat>>,
    objective: Option<ObjectiveRow>,
}

/// `D = [b, -A]` with objective row `[0, c^T]` when `c` is given.
pub fn build_initial_dictionary(inst: &LpInstance) -> Result<Dictionary> {
    inst.validate()?;
    let coef = inst
        .a
        .iter()
        .map(|row| row.iter().map(|v| -v).collect())
        .collect();
    let objective = inst.c.as_ref().map(|c| ObjectiveRow {
        constant: Rat::zero(),
        coef: c.clone(),
    });
    Dictionary::new(
        inst.basis.clone(),
        inst.nonbasis.clone(),
        inst.b.clone(),
        coef,
        objective,
    )
}

impl Dictionary {
    /// Rows and columns may come in any order; they are sorted by label.
    pub fn new(
        basis: Vec<Var>,
        nonbasis: Vec<Var>,
        rhs: Vec<Rat>,
        coef: Vec<Vec<Rat>>,
        objective: Option<ObjectiveRow>,
    ) -> Result<Self> {
        check_index_sets(&basis, &nonbasis)?;
        let (n, d) = (basis.len(), nonbasis.len());
        if rhs.len() != n || coef.len() != n || coef.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "dictionary body must be {n} x {d} plus a constant column"
            )));
        }
        if objective.as_ref().is_some_and(|o| o.coef.len() != d) {
            return Err(Error::DimensionMismatch("objective row length".into()));
        }
        let mut dict = Dictionary {
            basis,
            nonbasis,
            rhs,
            coef,
            objective,
        };
        dict.normalize_order(&mut []);
        Ok(dict)
    }

    pub fn basis(&self) -> &[Var] {
        &self.basis
    }

    pub fn nonbasis(&self) -> &[Var] {
        &self.nonbasis
    }

    pub fn n(&self) -> usize {
        self.basis.len()
    }

    pub fn d(&self) -> usize {
        self.nonbasis.len()
    }

    pub fn row_pos(&self, v: Var) -> Option<usize> {
        self.basis.binary_search(&v).ok()
    }

    pub fn col_pos(&self, v: Var) -> Option<usize> {
        self.nonbasis.binary_search(&v).ok()
    }

    pub fn rhs(&self) -> &[Rat] {
        &self.rhs
    }

    pub fn coef(&self) -> &[Vec<Rat>] {
        &self.coef
    }

    /// `d[i][g]` for basic `i`.
    pub fn constant(&self, i: Var) -> Option<&Rat> {
        self.row_pos(i).map(|p| &self.rhs[p])
    }

    /// `d[i][j]` for basic `i`, nonbasic `j`.
    pub fn entry(&self, i: Var, j: Var) -> Option<&Rat> {
        Some(&self.coef[self.row_pos(i)?][self.col_pos(j)?])
    }

    pub fn objective(&self) -> Option<&ObjectiveRow> {
        self.objective.as_ref()
    }

    pub fn with_objective(mut self, objective: Option<ObjectiveRow>) -> Result<Self> {
        if objective.as_ref().is_some_and(|o| o.coef.len() != self.d()) {
            return Err(Error::DimensionMismatch("objective row length".into()));
        }
        self.objective = objective;
        Ok(self)
    }

    /// Objective row minimizing `x_v`: row `v` if basic, unit row at `v` otherwise.
    pub fn objective_for(&self, v: Var) -> Result<ObjectiveRow> {
        if let Some(p) = self.row_pos(v) {
            Ok(ObjectiveRow {
                constant: self.rhs[p].clone(),
                coef: self.coef[p].clone(),
            })
        } else if let Some(q) = self.col_pos(v) {
            let mut coef = vec![Rat::zero(); self.d()];
            coef[q] = Rat::one();
            Ok(ObjectiveRow {
                constant: Rat::zero(),
                coef,
            })
        } else {
            Err(Error::InvalidIndex(format!("{v} is not a variable")))
        }
    }

    /// Removes basic row `v` from the body and makes it the objective row.
    pub fn split_row(mut self, v: Var) -> Result<Self> {
        let p = self.row_pos(v).ok_or(Error::NotBasic(v))?;
        self.basis.remove(p);
        let constant = self.rhs.remove(p);
        let coef = self.coef.remove(p);
        self.objective = Some(ObjectiveRow { constant, coef });
        Ok(self)
    }

    /// Restores ascending label order of rows and columns; `extra` columns
    /// (one entry per row) are permuted together with the rows.
    pub(crate) fn normalize_order(&mut self, extra: &mut [Vec<Rat>]) {
        if !self.basis.windows(2).all(|w| w[0] < w[1]) {
            let mut order: Vec<usize> = (0..self.basis.len()).collect();
            order.sort_by_key(|&i| self.basis[i]);
            self.basis = order.iter().map(|&i| self.basis[i]).collect();
            self.rhs = order.iter().map(|&i| self.rhs[i].clone()).collect();
            self.coef = order.iter().map(|&i| self.coef[i].clone()).collect();
            for col in extra.iter_mut() {
                *col = order.iter().map(|&i| col[i].clone()).collect();
            }
        }
        if !self.nonbasis.windows(2).all(|w| w[0] < w[1]) {
            let mut order: Vec<usize> = (0..self.nonbasis.len()).collect();
            order.sort_by_key(|&j| self.nonbasis[j]);
            self.nonbasis = order.iter().map(|&j| self.nonbasis[j]).collect();
            for row in self.coef.iter_mut() {
                *row = order.iter().map(|&j| row[j].clone()).collect();
            }
            if let Some(obj) = self.objective.as_mut() {
                obj.coef = order.iter().map(|&j| obj.coef[j].clone()).collect();
            }
        }
    }

    /// Pivots on `(r, s)`; `extra` are constant-like columns (one entry per
    /// row) updated by the same rule as `g`.
    pub(crate) fn pivot_with(
        &self,
        r: Var,
        s: Var,
        extra: &[Vec<Rat>],
    ) -> Result<(Dictionary, Vec<Vec<Rat>>)> {
        let pr = self.row_pos(r).ok_or(Error::NotBasic(r))?;
        let ps = self.col_pos(s).ok_or(Error::NotNonbasic(s))?;
        let piv = self.coef[pr][ps].clone();
        if piv.is_zero() {
            return Err(Error::ZeroPivot { r, s });
        }
        let inv = piv.recip();
        let pivot_row: Vec<Rat> = self.coef[pr].iter().map(|v| v * &inv).collect();

        // constants of the pivot row: g first, then extras
        let pivot_consts: Vec<Rat> = std::iter::once(&self.rhs[pr])
            .chain(extra.iter().map(|col| &col[pr]))
            .map(|v| v * &inv)
            .collect();

        let transform = |row: &[Rat], consts: Vec<Rat>| -> (Vec<Rat>, Vec<Rat>) {
            let m = &row[ps];
            if m.is_zero() {
                return (row.to_vec(), consts);
            }
            let new_row = row
                .iter()
                .zip(&pivot_row)
                .enumerate()
                .map(|(j, (v, p))| if j == ps { m * &inv } else { v - m * p })
                .collect();
            let new_consts = consts
                .into_iter()
                .zip(&pivot_consts)
                .map(|(c, p)| c - m * p)
                .collect();
            (new_row, new_consts)
        };

        let mut out = self.clone();
        let mut out_extra: Vec<Vec<Rat>> = extra.to_vec();
        for i in 0..self.n() {
            if i == pr {
                continue;
            }
            let consts: Vec<Rat> = std::iter::once(self.rhs[i].clone())
                .chain(extra.iter().map(|col| col[i].clone()))
                .collect();
            let (row, consts) = transform(&self.coef[i], consts);
            out.coef[i] = row;
            let mut it = consts.into_iter();
            out.rhs[i] = it.next().expect("g entry");
            for col in out_extra.iter_mut() {
                col[i] = it.next().expect("extra entry");
            }
        }
        // new row for s
        out.coef[pr] = pivot_row
            .iter()
            .enumerate()
            .map(|(j, p)| if j == ps { inv.clone() } else { -p })
            .collect();
        out.rhs[pr] = -&pivot_consts[0];
        for (k, col) in out_extra.iter_mut().enumerate() {
            col[pr] = -&pivot_consts[k + 1];
        }
        if let Some(obj) = &self.objective {
            let (row, consts) = transform(&obj.coef, vec![obj.constant.clone()]);
            out.objective = Some(ObjectiveRow {
                constant: consts.into_iter().next().expect("objective constant"),
                coef: row,
            });
        }
        out.basis[pr] = s;
        out.nonbasis[ps] = r;
        out.normalize_order(&mut out_extra);
        Ok((out, out_extra))
    }
}

/// The basic solution: `x_g = 1`, `x_N = 0`, `x_{B ∪ {f}} = D_{.g}`.
pub fn basic_solution(dict: &Dictionary) -> BTreeMap<Index, Rat> {
    let mut x = BTreeMap::new();
    x.insert(Index::G, Rat::one());
    for v in &dict.nonbasis {
        x.insert(Index::Var(*v), Rat::zero());
    }
    for (v, c) in dict.basis.iter().zip(&dict.rhs) {
        x.insert(Index::Var(*v), c.clone());
    }
    if let Some(obj) = &dict.objective {
        x.insert(Index::F, obj.constant.clone());
    }
    x
}

/// Variable part of the basic solution.
pub fn basic_point(dict: &Dictionary) -> BTreeMap<Var, Rat> {
    basic_solution(dict)
        .into_iter()
        .filter_map(|(k, v)| match k {
            Index::Var(var) => Some((var, v)),
            _ => None,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DictionaryClass {
    pub feasible: bool,
    pub optimal: bool,
    pub inconsistent: bool,
    pub dual_inconsistent: bool,
}

impl DictionaryClass {
    pub fn terminal(&self) -> bool {
        self.optimal || self.inconsistent || self.dual_inconsistent
    }
}

/// Optimality flags are false when the dictionary carries no objective row.
pub fn classify(dict: &Dictionary) -> DictionaryClass {
    let feasible = dict.rhs.iter().all(|v| !v.is_negative());
    let inconsistent = dict
        .rhs
        .iter()
        .zip(&dict.coef)
        .any(|(g, row)| g.is_negative() && row.iter().all(|v| !v.is_positive()));
    let (optimal, dual_inconsistent) = match &dict.objective {
        None => (false, false),
        Some(obj) => {
            let optimal = feasible && obj.coef.iter().all(|v| !v.is_negative());
            let dual_inconsistent = (0..dict.d()).any(|j| {
                obj.coef[j].is_negative() && dict.coef.iter().all(|row| !row[j].is_negative())
            });
            (optimal, dual_inconsistent)
        }
    };
    DictionaryClass {
        feasible,
        optimal,
        inconsistent,
        dual_inconsistent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn section_example() -> LpInstance {
        // x3 = x1 + x2
        LpInstance {
            basis: vars([3]),
            nonbasis: vars([1, 2]),
            b: vec![rat(0)],
            a: vec![vec![rat(-1), rat(-1)]],
            c: None,
        }
    }

    #[test]
    fn initial_dictionary_negates_a() {
        let d = build_initial_dictionary(&section_example()).unwrap();
        assert_eq!(d.constant(Var(3)), Some(&rat(0)));
        assert_eq!(d.entry(Var(3), Var(1)), Some(&rat(1)));
        assert_eq!(d.entry(Var(3), Var(2)), Some(&rat(1)));
    }

    #[test]
    fn zero_case() {
        let inst = LpInstance::from_rows(vec![rat(0)], vec![vec![rat(0)]]).unwrap();
        let d = build_initial_dictionary(&inst).unwrap();
        assert_eq!(d.rhs(), &[rat(0)]);
        assert_eq!(d.coef(), &[vec![rat(0)]]);
    }

    #[test]
    fn objective_row_is_zero_then_c() {
        let mut inst = section_example();
        inst.c = Some(vec![rat(2), ratio(-1, 3)]);
        let d = build_initial_dictionary(&inst).unwrap();
        let obj = d.objective().unwrap();
        assert_eq!(obj.constant, rat(0));
        assert_eq!(obj.coef, vec![rat(2), ratio(-1, 3)]);
    }

    #[test]
    fn dimension_errors() {
        let mut inst = section_example();
        inst.a[0].push(rat(1));
        assert!(matches!(
            build_initial_dictionary(&inst),
            Err(Error::DimensionMismatch(_))
        ));
        let mut inst = section_example();
        inst.nonbasis = vars([3, 2]);
        assert!(matches!(inst.validate(), Err(Error::InvalidIndex(_))));
        let mut inst = section_example();
        inst.c = Some(vec![rat(1)]);
        assert!(inst.validate().is_err());
    }

    #[test]
    fn unsorted_input_is_sorted() {
        let inst = LpInstance {
            basis: vars([5, 2]),
            nonbasis: vars([4, 1]),
            b: vec![rat(1), rat(2)],
            a: vec![vec![rat(3), rat(4)], vec![rat(5), rat(6)]],
            c: None,
        };
        let d = build_initial_dictionary(&inst).unwrap();
        assert_eq!(d.basis(), &vars([2, 5]));
        assert_eq!(d.nonbasis(), &vars([1, 4]));
        assert_eq!(d.entry(Var(5), Var(4)), Some(&rat(-3)));
        assert_eq!(d.entry(Var(2), Var(1)), Some(&rat(-6)));
        assert_eq!(d.constant(Var(2)), Some(&rat(2)));
    }

    #[test]
    fn basic_solution_reads_g_column() {
        let d = build_initial_dictionary(&section_example()).unwrap();
        let x = basic_solution(&d);
        assert_eq!(x[&Index::G], rat(1));
        assert_eq!(x[&Index::Var(Var(1))], rat(0));
        assert_eq!(x[&Index::Var(Var(3))], rat(0));
        assert!(!x.contains_key(&Index::F));
    }

    #[test]
    fn classify_zero_g_column_is_feasible() {
        let d = build_initial_dictionary(&section_example()).unwrap();
        let c = classify(&d);
        assert!(c.feasible);
        assert!(!c.inconsistent);
        assert!(!c.optimal && !c.dual_inconsistent && !c.terminal());
    }

    #[test]
    fn classify_inconsistent_row() {
        let inst = LpInstance::from_rows(vec![rat(-1)], vec![vec![rat(0), rat(2)]]).unwrap();
        let c = classify(&build_initial_dictionary(&inst).unwrap());
        assert!(c.inconsistent && !c.feasible && c.terminal());
    }

    #[test]
    fn classify_dual_inconsistent() {
        let mut inst = LpInstance::from_rows(vec![rat(1)], vec![vec![rat(-1)]]).unwrap();
        inst.c = Some(vec![rat(-1)]);
        let c = classify(&build_initial_dictionary(&inst).unwrap());
        assert!(c.feasible && c.dual_inconsistent && !c.optimal);
    }
}
