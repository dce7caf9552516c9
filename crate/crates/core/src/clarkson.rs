//! Clarkson-style baseline on exact rationals: subset LPs plus ray shooting
//! from an interior point.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::detection::{preprocess, DetectOptions, DetectionResult, LpSolveCount, Method, Stats};
use crate::error::{Error, Result};
use crate::lp::{basic_point, build_initial_dictionary, Dictionary, LpInstance, Rat, Var};
use crate::pivot::{criss_cross, Objective, SolveOptions, TerminalKind};

fn inconsistent_row(dict: &Dictionary) -> Var {
    dict.basis()
        .iter()
        .zip(dict.rhs().iter().zip(dict.coef()))
        .find(|(_, (g, row))| *g < &Rat::zero() && row.iter().all(|v| *v <= Rat::zero()))
        .map(|(v, _)| *v)
        .expect("inconsistent dictionary has an inconsistent row")
}

/// A point with every variable strictly positive.
///
/// Solves `max t` subject to `x - t·1 ≥ 0`, `t ≤ 1`; the region is
/// full-dimensional iff the optimum is positive.
pub fn interior_point(inst: &LpInstance) -> Result<BTreeMap<Var, Rat>> {
    inst.validate()?;
    let top = inst.variables().last().map_or(0, |v| v.0);
    let (u, t) = (Var(top + 1), Var(top + 2));
    // y_B = b - A y_N - (A·1 + 1) t,  u = 1 - t
    let mut basis = inst.basis.clone();
    basis.push(u);
    let mut nonbasis = inst.nonbasis.clone();
    nonbasis.push(t);
    let mut b = inst.b.clone();
    b.push(Rat::one());
    let mut a: Vec<Vec<Rat>> = inst
        .a
        .iter()
        .map(|row| {
            let mut row = row.clone();
            let s: Rat = row.iter().sum::<Rat>() + Rat::one();
            row.push(s);
            row
        })
        .collect();
    let mut last = vec![Rat::zero(); inst.d()];
    last.push(Rat::one());
    a.push(last);
    let mut c = vec![Rat::zero(); inst.d()];
    c.push(-Rat::one());
    let aux = LpInstance {
        basis,
        nonbasis,
        b,
        a,
        c: Some(c),
    };
    let out = criss_cross(
        &build_initial_dictionary(&aux)?,
        Objective::Row,
        &SolveOptions::default(),
    )?;
    match out.kind {
        TerminalKind::Inconsistent => Err(Error::Infeasible {
            row: inconsistent_row(&out.dictionary),
            basis: out
                .dictionary
                .basis()
                .iter()
                .copied()
                .filter(|&v| v != u)
                .collect(),
        }),
        TerminalKind::DualInconsistent => Err(Error::Precondition(
            "bounded auxiliary problem reported unboundedness".into(),
        )),
        TerminalKind::Optimal => {
            let y = basic_point(&out.dictionary);
            let ts = y[&t].clone();
            if ts <= Rat::zero() {
                return Err(Error::NotFullDimensional);
            }
            Ok(inst
                .variables()
                .into_iter()
                .map(|v| (v, &y[&v] + &ts))
                .collect())
        }
    }
}

/// Values of all variables given the nonbasic ones.
fn full_point(inst: &LpInstance, x_n: &BTreeMap<Var, Rat>) -> BTreeMap<Var, Rat> {
    let mut x = x_n.clone();
    for (i, bi) in inst.basis.iter().enumerate() {
        let mut v = inst.b[i].clone();
        for (j, nj) in inst.nonbasis.iter().enumerate() {
            v -= &inst.a[i][j] * &x_n[nj];
        }
        x.insert(*bi, v);
    }
    x
}

struct Clarkson<'a> {
    inst: &'a LpInstance,
    initial: Dictionary,
    opts: SolveOptions,
    sizes: BTreeMap<(usize, usize), u64>,
    stats: Stats,
}

impl Clarkson<'_> {
    /// Minimizes `x_r` subject to `x_r ≥ -1` and `x_k ≥ 0` for `k ∈ keep`,
    /// all other variables free. `keep ∪ {r}` must contain the initial
    /// nonbasis. Returns the minimum and a minimizer.
    fn restricted_min(
        &mut self,
        r: Var,
        keep: &BTreeSet<Var>,
    ) -> Result<(Rat, BTreeMap<Var, Rat>)> {
        let d0 = &self.initial;
        let rows: Vec<usize> = (0..d0.n())
            .filter(|&p| {
                let v = d0.basis()[p];
                v == r || keep.contains(&v)
            })
            .collect();
        let shift_col = d0.col_pos(r);
        let rhs: Vec<Rat> = rows
            .iter()
            .map(|&p| {
                let mut g = d0.rhs()[p].clone();
                if d0.basis()[p] == r {
                    g += Rat::one();
                }
                if let Some(q) = shift_col {
                    g -= &d0.coef()[p][q];
                }
                g
            })
            .collect();
        let sub = Dictionary::new(
            rows.iter().map(|&p| d0.basis()[p]).collect(),
            d0.nonbasis().to_vec(),
            rhs,
            rows.iter().map(|&p| d0.coef()[p].clone()).collect(),
            None,
        )?;
        let out = criss_cross(&sub, Objective::Minimize(r), &self.opts)?;
        *self.sizes.entry((sub.n(), sub.d())).or_default() += 1;
        self.stats.pivots += out.pivot_trace.len() as u64;
        match out.kind {
            TerminalKind::Optimal => {}
            TerminalKind::Inconsistent => {
                return Err(Error::Infeasible {
                    row: inconsistent_row(&out.dictionary),
                    basis: out.dictionary.basis().to_vec(),
                })
            }
            TerminalKind::DualInconsistent => {
                return Err(Error::Precondition(format!(
                    "x{r} >= -1 did not bound the subset problem"
                )))
            }
        }
        let sol = basic_point(&out.dictionary);
        let mut x_n: BTreeMap<Var, Rat> = self
            .inst
            .nonbasis
            .iter()
            .map(|&v| (v, sol.get(&v).cloned().unwrap_or_else(Rat::zero)))
            .collect();
        if let Some(v) = x_n.get_mut(&r) {
            *v -= Rat::one();
        }
        let point = full_point(self.inst, &x_n);
        Ok((point[&r].clone(), point))
    }

    fn redundant_wrt(
        &mut self,
        r: Var,
        keep: &BTreeSet<Var>,
    ) -> Result<(bool, BTreeMap<Var, Rat>)> {
        let (min, point) = self.restricted_min(r, keep)?;
        Ok((min >= Rat::zero(), point))
    }
}

/// Clarkson's method: test each `r` against the current nonredundant set
/// (plus a fixed nonbasis); on failure, shoot a ray from the interior point
/// towards the minimizer and add the first constraint it crosses.
pub fn detect_clarkson(inst: &LpInstance, opts: &DetectOptions) -> Result<DetectionResult> {
    let pre = preprocess(inst)?;
    let inst = &pre.instance;
    let z = interior_point(inst)?;
    let mut c = Clarkson {
        inst,
        initial: build_initial_dictionary(inst)?,
        opts: opts.solve,
        sizes: BTreeMap::new(),
        stats: Stats::default(),
    };
    let all: BTreeSet<Var> = inst.variables().into_iter().collect();
    let n0: BTreeSet<Var> = inst.nonbasis.iter().copied().collect();
    let mut s: BTreeSet<Var> = BTreeSet::new();
    let mut r_set: BTreeSet<Var> = BTreeSet::new();

    for &r in &all {
        while !s.contains(&r) && !r_set.contains(&r) {
            let mut keep: BTreeSet<Var> = s.union(&n0).copied().collect();
            keep.remove(&r);
            c.stats.subset_tests += 1;
            c.stats.max_subset_test_size = c.stats.max_subset_test_size.max(keep.len());
            let (red, y) = c.redundant_wrt(r, &keep)?;
            if red {
                r_set.insert(r);
                break;
            }
            // first crossing of z + λ (y - z) with some x_i = 0
            let mut best: Option<Rat> = None;
            let mut hits: Vec<Var> = Vec::new();
            for (&i, yi) in &y {
                if *yi >= Rat::zero() {
                    continue;
                }
                let zi = &z[&i];
                let lambda = zi / (zi - yi);
                match &best {
                    Some(b) if lambda > *b => {}
                    Some(b) if lambda == *b => hits.push(i),
                    _ => {
                        best = Some(lambda);
                        hits = vec![i];
                    }
                }
            }
            if hits.len() == 1 {
                s.insert(hits[0]);
                continue;
            }
            let mut progress = false;
            for &h in &hits {
                if s.contains(&h) || r_set.contains(&h) {
                    continue;
                }
                c.stats.full_tests += 1;
                let mut rest: BTreeSet<Var> = all.clone();
                rest.remove(&h);
                if c.redundant_wrt(h, &rest)?.0 {
                    r_set.insert(h);
                } else {
                    s.insert(h);
                    progress = true;
                }
            }
            if !progress {
                return Err(Error::AssumptionViolation(format!(
                    "constraints {hits:?} meet the ray at one point and none is nonredundant"
                )));
            }
        }
    }
    s.extend(pre.forced_nonredundant.iter().copied());
    let mut stats = c.stats;
    stats.lp_solves = c
        .sizes
        .into_iter()
        .map(|((rows, cols), count)| LpSolveCount { rows, cols, count })
        .collect();
    Ok(DetectionResult {
        method: Method::Clarkson,
        nonredundant: s.into_iter().collect(),
        redundant: r_set.into_iter().collect(),
        forced_nonredundant: pre.forced_nonredundant,
        certificates: Vec::new(),
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::rat;

    #[test]
    fn interior_point_of_a_simplex() {
        // x3 = 1 - x1 - x2
        let inst = LpInstance::from_rows(vec![rat(1)], vec![vec![rat(1), rat(1)]]).unwrap();
        let z = interior_point(&inst).unwrap();
        assert!(z.values().all(|v| *v > Rat::zero()));
        assert!(inst.satisfies_equalities(&z));
    }

    #[test]
    fn flat_region_is_rejected() {
        // x2 = -x1 forces x1 = x2 = 0
        let inst = LpInstance::from_rows(vec![rat(0)], vec![vec![rat(1)]]).unwrap();
        assert_eq!(interior_point(&inst), Err(Error::NotFullDimensional));
    }

    #[test]
    fn infeasible_region_is_reported() {
        let inst = LpInstance::from_rows(vec![rat(-1)], vec![vec![rat(1)]]).unwrap();
        assert!(matches!(
            interior_point(&inst),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn simplex_with_one_redundant_row() {
        // x3 = 1 - x1 - x2, x4 = 2 - x1 - x2
        let inst = LpInstance::from_rows(
            vec![rat(1), rat(2)],
            vec![vec![rat(1), rat(1)], vec![rat(1), rat(1)]],
        )
        .unwrap();
        let res = detect_clarkson(&inst, &DetectOptions::default()).unwrap();
        assert_eq!(res.redundant, vec![Var(2)]);
        assert_eq!(res.nonredundant, vec![Var(1), Var(3), Var(4)]);
    }
}
