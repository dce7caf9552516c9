//! Exhaustive enumeration over all bases; an oracle for small instances.
//!
//! Everything here works on the equality form `x_B + A x_N = b` by
//! Gauss-Jordan elimination and shares no pivoting code with the solvers.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{Dictionary, LpInstance, Rat, Var};

/// Largest `n + d` accepted by the enumeration routines.
pub const BRUTE_BUDGET: usize = 12;

/// Equality form `M x = b` with columns in variable order.
struct Equalities {
    vars: Vec<Var>,
    m: Vec<Vec<Rat>>,
    b: Vec<Rat>,
}

impl Equalities {
    fn new(inst: &LpInstance) -> Result<Self> {
        inst.validate()?;
        let size = inst.n() + inst.d();
        if size > BRUTE_BUDGET {
            return Err(Error::TooLarge {
                size,
                budget: BRUTE_BUDGET,
            });
        }
        let vars = inst.variables();
        let col = |v: Var| vars.binary_search(&v).expect("variable");
        let mut m = vec![vec![Rat::zero(); vars.len()]; inst.n()];
        for (i, row) in m.iter_mut().enumerate() {
            row[col(inst.basis[i])] = Rat::one();
            for (j, a) in inst.a[i].iter().enumerate() {
                row[col(inst.nonbasis[j])] = a.clone();
            }
        }
        Ok(Equalities {
            vars,
            m,
            b: inst.b.clone(),
        })
    }

    fn column(&self, j: usize) -> Vec<Rat> {
        self.m.iter().map(|row| row[j].clone()).collect()
    }
}

/// Solves `M_cols y = rhs_k` for every right-hand side; `None` if singular.
fn solve(m: &[Vec<Rat>], cols: &[usize], rhs: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let rows = m.len();
    let k = cols.len();
    debug_assert_eq!(rows, k);
    let mut t: Vec<Vec<Rat>> = (0..rows)
        .map(|i| {
            cols.iter()
                .map(|&c| m[i][c].clone())
                .chain(rhs.iter().map(|r| r[i].clone()))
                .collect()
        })
        .collect();
    for c in 0..k {
        let p = (c..rows).find(|&i| !t[i][c].is_zero())?;
        t.swap(c, p);
        let inv = Rat::one() / &t[c][c];
        for v in t[c].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = t[c].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == c || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= &f * p;
            }
        }
    }
    Some(
        (0..rhs.len())
            .map(|j| t.iter().map(|row| row[k + j].clone()).collect())
            .collect(),
    )
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// A basis together with its dictionary and basic solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumeratedBasis {
    pub basis: Vec<Var>,
    pub dictionary: Dictionary,
    pub solution: BTreeMap<Var, Rat>,
    pub feasible: bool,
}

/// All bases of the system (nonsingular column subsets), in lexicographic order.
pub fn enumerate_bases(inst: &LpInstance) -> Result<Vec<EnumeratedBasis>> {
    let eq = Equalities::new(inst)?;
    let n = eq.m.len();
    let total = eq.vars.len();
    let mut out = Vec::new();
    for cols in subsets(total, n) {
        let others: Vec<usize> = (0..total).filter(|c| !cols.contains(c)).collect();
        let mut rhs = vec![eq.b.clone()];
        rhs.extend(others.iter().map(|&j| eq.column(j)));
        let Some(sol) = solve(&eq.m, &cols, &rhs) else {
            continue;
        };
        let basis: Vec<Var> = cols.iter().map(|&c| eq.vars[c]).collect();
        let nonbasis: Vec<Var> = others.iter().map(|&c| eq.vars[c]).collect();
        let g = sol[0].clone();
        let coef: Vec<Vec<Rat>> = (0..n)
            .map(|i| sol[1..].iter().map(|col| -&col[i]).collect())
            .collect();
        let mut solution: BTreeMap<Var, Rat> = nonbasis.iter().map(|&v| (v, Rat::zero())).collect();
        solution.extend(basis.iter().copied().zip(g.iter().cloned()));
        let feasible = g.iter().all(|v| *v >= Rat::zero());
        out.push(EnumeratedBasis {
            dictionary: Dictionary::new(basis.clone(), nonbasis, g, coef, None)?,
            basis,
            solution,
            feasible,
        });
    }
    Ok(out)
}

/// Minimum of `u` over `M' y = b'`, `y ≥ 0`, where column `u_col` is the
/// distinguished variable; `None` when infeasible.
fn min_over_bfs(m: &[Vec<Rat>], b: &[Rat], u_col: usize) -> Option<Rat> {
    let n = m.len();
    let total = m[0].len();
    let mut best: Option<Rat> = None;
    for cols in subsets(total, n) {
        let Some(sol) = solve(m, &cols, &[b.to_vec()]) else {
            continue;
        };
        if sol[0].iter().any(|v| *v < Rat::zero()) {
            continue;
        }
        let u = cols
            .iter()
            .position(|&c| c == u_col)
            .map(|p| sol[0][p].clone())
            .unwrap_or_else(Rat::zero);
        if best.as_ref().is_none_or(|b| u < *b) {
            best = Some(u);
        }
    }
    best
}

/// Ground-truth classification by the defining LP: `r` is redundant iff
/// `min x_r ≥ 0` over the system with `x_r ≥ 0` dropped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteClassification {
    pub redundant: Vec<Var>,
    pub nonredundant: Vec<Var>,
    /// Redundant and positive at every basic feasible solution.
    pub strongly_redundant: Vec<Var>,
    pub weakly_redundant: Vec<Var>,
    pub feasible_bases: Vec<Vec<Var>>,
}

/// `min x_r` over the system without `x_r ≥ 0`, capped below at `-1`.
///
/// Substituting `x_r = u - 1` with `u ≥ 0` keeps the problem in standard
/// form with a bounded objective, so the minimum sits at a basic feasible
/// solution. Returns `None` if the relaxed system is infeasible.
pub fn capped_min(inst: &LpInstance, r: Var) -> Result<Option<Rat>> {
    let eq = Equalities::new(inst)?;
    let u_col = eq
        .vars
        .binary_search(&r)
        .map_err(|_| Error::InvalidIndex(format!("{r} is not a variable")))?;
    let b: Vec<Rat> =
        eq.b.iter()
            .zip(&eq.m)
            .map(|(b, row)| b + &row[u_col])
            .collect();
    Ok(min_over_bfs(&eq.m, &b, u_col).map(|u| u - Rat::one()))
}

pub fn brute_force_classify(inst: &LpInstance) -> Result<BruteClassification> {
    let bases = enumerate_bases(inst)?;
    let feasible: Vec<&EnumeratedBasis> = bases.iter().filter(|b| b.feasible).collect();
    if feasible.is_empty() {
        return Err(Error::Precondition("system is infeasible".into()));
    }
    let mut out = BruteClassification {
        redundant: Vec::new(),
        nonredundant: Vec::new(),
        strongly_redundant: Vec::new(),
        weakly_redundant: Vec::new(),
        feasible_bases: feasible.iter().map(|b| b.basis.clone()).collect(),
    };
    for r in inst.variables() {
        let min = capped_min(inst, r)?.expect("relaxation of a feasible system is feasible");
        if min >= Rat::zero() {
            out.redundant.push(r);
            if feasible.iter().all(|b| b.solution[&r] > Rat::zero()) {
                out.strongly_redundant.push(r);
            } else {
                out.weakly_redundant.push(r);
            }
        } else {
            out.nonredundant.push(r);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BruteOptimum {
    Infeasible,
    Unbounded,
    Optimal(Rat),
}

/// Optimal value of `min c^T x_N` for an instance carrying an objective.
pub fn brute_force_optimum(inst: &LpInstance) -> Result<BruteOptimum> {
    let c = inst
        .c
        .as_ref()
        .ok_or_else(|| Error::Precondition("instance has no objective".into()))?;
    let eq = Equalities::new(inst)?;
    let mut cost = vec![Rat::zero(); eq.vars.len()];
    for (j, v) in inst.nonbasis.iter().enumerate() {
        cost[eq.vars.binary_search(v).expect("variable")] = c[j].clone();
    }
    let value =
        |x: &[Rat], cols: &[usize]| -> Rat { cols.iter().zip(x).map(|(&c, v)| &cost[c] * v).sum() };

    let n = eq.m.len();
    let total = eq.vars.len();
    let mut best: Option<Rat> = None;
    for cols in subsets(total, n) {
        if let Some(sol) = solve(&eq.m, &cols, std::slice::from_ref(&eq.b)) {
            if sol[0].iter().all(|v| *v >= Rat::zero()) {
                let z = value(&sol[0], &cols);
                if best.as_ref().is_none_or(|b| z < *b) {
                    best = Some(z);
                }
            }
        }
    }
    let Some(best) = best else {
        return Ok(BruteOptimum::Infeasible);
    };

    // extreme rays: vertices of {M w = 0, 1^T w = 1, w ≥ 0}
    let mut m = eq.m.clone();
    m.push(vec![Rat::one(); total]);
    let mut rhs = vec![Rat::zero(); n];
    rhs.push(Rat::one());
    for cols in subsets(total, n + 1) {
        if let Some(sol) = solve(&m, &cols, &[rhs.clone()]) {
            if sol[0].iter().all(|v| *v >= Rat::zero()) && value(&sol[0], &cols) < Rat::zero() {
                return Ok(BruteOptimum::Unbounded);
            }
        }
    }
    Ok(BruteOptimum::Optimal(best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{rat, vars};

    #[test]
    fn subset_counts() {
        assert_eq!(subsets(5, 2).len(), 10);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(subsets(4, 4).len(), 1);
    }

    #[test]
    fn two_variable_system() {
        // x3 = x1 + x2: every pair of variables is a basis
        let inst = LpInstance {
            basis: vars([3]),
            nonbasis: vars([1, 2]),
            b: vec![rat(0)],
            a: vec![vec![rat(-1), rat(-1)]],
            c: None,
        };
        let bases = enumerate_bases(&inst).unwrap();
        assert_eq!(bases.len(), 3);
        assert!(bases.iter().all(|b| b.feasible));
        let cls = brute_force_classify(&inst).unwrap();
        assert_eq!(cls.redundant, vars([3]));
        assert_eq!(cls.nonredundant, vars([1, 2]));
        assert_eq!(cls.weakly_redundant, vars([3]));
    }

    #[test]
    fn optimum_cases() {
        // x2 = 1 - x1
        let mut inst = LpInstance::from_rows(vec![rat(1)], vec![vec![rat(1)]]).unwrap();
        inst.c = Some(vec![rat(-1)]);
        assert_eq!(
            brute_force_optimum(&inst).unwrap(),
            BruteOptimum::Optimal(rat(-1))
        );
        inst.a = vec![vec![rat(-1)]];
        assert_eq!(brute_force_optimum(&inst).unwrap(), BruteOptimum::Unbounded);
        inst.b = vec![rat(-1)];
        inst.a = vec![vec![rat(1)]];
        assert_eq!(
            brute_force_optimum(&inst).unwrap(),
            BruteOptimum::Infeasible
        );
    }

    #[test]
    fn budget_is_enforced() {
        let inst = LpInstance::from_rows(vec![rat(1); 7], vec![vec![rat(1); 6]; 7]).unwrap();
        assert_eq!(
            enumerate_bases(&inst),
            Err(Error::TooLarge {
                size: 13,
                budget: 12
            })
        );
    }

    #[test]
    fn capped_min_values() {
        // x1 = 1 - x2: dropping either constraint leaves x_r unbounded below
        let inst = LpInstance::from_rows(vec![rat(1)], vec![vec![rat(1)]]).unwrap();
        assert_eq!(capped_min(&inst, Var(1)).unwrap(), Some(rat(-1)));
        assert_eq!(capped_min(&inst, Var(2)).unwrap(), Some(rat(-1)));
        // x1 = 1 + x2: min x1 = 1 over x2 >= 0
        let inst = LpInstance::from_rows(vec![rat(1)], vec![vec![rat(-1)]]).unwrap();
        assert_eq!(capped_min(&inst, Var(1)).unwrap(), Some(rat(1)));
        assert_eq!(capped_min(&inst, Var(2)).unwrap(), Some(rat(-1)));
    }
}
