//! Redundancy and nonredundancy certificates.
//!
//! A basis is `r`-redundant when `r` is basic and row `r` (constant included)
//! has no negative sign; it is `r`-nonredundant when it is feasible, `r` is
//! nonbasic and every row with a zero constant has a nonpositive entry in
//! column `r`. Both are read off a sign matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::Var;
use crate::oracle::{
    difference, exchanged, union, DictionaryOracle, Perturbed, Restricted, SignMatrix,
    SignMatrixDoc,
};
use crate::pivot::{criss_cross_oracle, Objective, SolveOptions, TerminalKind};

pub fn check_r_redundant(signs: &SignMatrix, r: Var) -> bool {
    match signs.row_pos(r) {
        Some(p) => !signs.g_column()[p].is_neg() && signs.rows()[p].iter().all(|s| !s.is_neg()),
        None => false,
    }
}

pub fn check_r_nonredundant(signs: &SignMatrix, r: Var) -> bool {
    let Some(q) = signs.col_pos(r) else {
        return false;
    };
    signs.is_feasible()
        && signs
            .g_column()
            .iter()
            .zip(signs.rows())
            .all(|(g, row)| !g.is_zero() || !row[q].is_pos())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Redundant,
    Nonredundant,
}

/// A basis of the root system witnessing the classification of `variable`.
///
/// `scope` lists the constraints the certificate speaks about: variables
/// outside it are free and basic at `basis`, and their rows are dropped from
/// `evidence`. `perturbation` lists the variables whose constraints were
/// shifted by descending powers of ε when the evidence was taken.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub variable: Var,
    pub kind: CertificateKind,
    pub basis: Vec<Var>,
    pub scope: Vec<Var>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub perturbation: Vec<Var>,
    #[serde(with = "evidence_doc")]
    pub evidence: SignMatrix,
}

mod evidence_doc {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::oracle::{SignMatrix, SignMatrixDoc};

    pub fn serialize<S: Serializer>(m: &SignMatrix, ser: S) -> Result<S::Ok, S::Error> {
        SignMatrixDoc::from(m).serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<SignMatrix, D::Error> {
        let doc = SignMatrixDoc::deserialize(de)?;
        SignMatrix::try_from(&doc).map_err(serde::de::Error::custom)
    }
}

fn scoped_signs(
    root: &dyn DictionaryOracle,
    basis: &[Var],
    scope: &[Var],
    perturbation: &[Var],
) -> Result<SignMatrix> {
    let hidden = difference(root.variables(), scope);
    if let Some(h) = hidden.iter().find(|h| basis.binary_search(h).is_err()) {
        return Err(Error::NotBasic(*h));
    }
    let signs = if perturbation.is_empty() {
        root.signs(basis)?
    } else {
        Perturbed::new(root, perturbation.to_vec()).signs(basis)?
    };
    Ok(signs.without_rows(&hidden))
}

impl Certificate {
    /// Queries `root` at `basis` and records the evidence.
    pub fn build(
        root: &dyn DictionaryOracle,
        variable: Var,
        kind: CertificateKind,
        basis: Vec<Var>,
        scope: Vec<Var>,
        perturbation: Vec<Var>,
    ) -> Result<Self> {
        let evidence = scoped_signs(root, &basis, &scope, &perturbation)?;
        Ok(Certificate {
            variable,
            kind,
            basis,
            scope,
            perturbation,
            evidence,
        })
    }

    /// True when the stored evidence satisfies the certificate predicate.
    pub fn holds(&self) -> bool {
        match self.kind {
            CertificateKind::Redundant => check_r_redundant(&self.evidence, self.variable),
            CertificateKind::Nonredundant => check_r_nonredundant(&self.evidence, self.variable),
        }
    }

    /// Re-queries `root` at the stored basis; true iff the fresh signs equal
    /// the evidence and satisfy the predicate.
    pub fn verify(&self, root: &dyn DictionaryOracle) -> Result<bool> {
        let fresh = scoped_signs(root, &self.basis, &self.scope, &self.perturbation)?;
        Ok(fresh == self.evidence && self.holds())
    }

    pub fn evidence_doc(&self) -> SignMatrixDoc {
        SignMatrixDoc::from(&self.evidence)
    }
}

/// Terminal state of a certificate search inside one (sub)system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Found {
    pub holds: bool,
    pub basis: Vec<Var>,
    pub signs: SignMatrix,
    pub pivots: u64,
}

fn inconsistent_row(signs: &SignMatrix, skip: Option<Var>) -> Var {
    signs
        .basis()
        .iter()
        .zip(signs.g_column().iter().zip(signs.rows()))
        .find(|(v, (g, row))| Some(**v) != skip && g.is_neg() && row.iter().all(|s| !s.is_pos()))
        .map(|(v, _)| *v)
        .expect("inconsistent terminal has an inconsistent row")
}

/// Minimizes `x_r` with `x_r ≥ 0` dropped, starting at `start`.
///
/// A nonbasic `r` is first pivoted in through the smallest basic row with a
/// nonzero entry in its column.
pub(crate) fn search_redundant(
    oracle: &dyn DictionaryOracle,
    r: Var,
    start: &[Var],
    opts: &SolveOptions,
) -> Result<Found> {
    let mut basis = start.to_vec();
    let mut pivots = 0;
    if basis.binary_search(&r).is_err() {
        let signs = oracle.signs(&basis)?;
        let leave = signs
            .basis()
            .iter()
            .copied()
            .find(|&i| signs.entry(i, r).is_some_and(|s| !s.is_zero()));
        match leave {
            Some(i) => {
                basis = exchanged(&basis, i, r);
                pivots = 1;
            }
            None => {
                return Ok(Found {
                    holds: false,
                    basis,
                    signs,
                    pivots,
                })
            }
        }
    }
    let out = criss_cross_oracle(oracle, &basis, Objective::MinimizeFree(r), opts)?;
    pivots += out.pivot_trace.len() as u64;
    let holds = match out.kind {
        TerminalKind::Optimal => !out.signs.g(r).expect("r stays basic").is_neg(),
        TerminalKind::DualInconsistent => false,
        TerminalKind::Inconsistent => {
            return Err(Error::Infeasible {
                row: inconsistent_row(&out.signs, Some(r)),
                basis: out.basis,
            })
        }
    };
    Ok(Found {
        holds,
        basis: out.basis,
        signs: out.signs,
        pivots,
    })
}

/// Minimizes `x_r` subject to `x_r ≥ -ε`; `r` is nonredundant iff the
/// optimum leaves `r` nonbasic. The returned signs are unperturbed.
pub(crate) fn search_nonredundant(
    oracle: &dyn DictionaryOracle,
    r: Var,
    start: &[Var],
    opts: &SolveOptions,
) -> Result<Found> {
    let perturbed = Perturbed::new(oracle, vec![r]);
    let out = criss_cross_oracle(&perturbed, start, Objective::Minimize(r), opts)?;
    let pivots = out.pivot_trace.len() as u64;
    match out.kind {
        TerminalKind::Optimal => {}
        TerminalKind::Inconsistent => {
            return Err(Error::Infeasible {
                row: inconsistent_row(&out.signs, None),
                basis: out.basis,
            })
        }
        TerminalKind::DualInconsistent => {
            return Err(Error::Precondition(format!(
                "minimizing x{r} over x{r} >= -eps reported unboundedness"
            )))
        }
    }
    let signs = oracle.signs(&out.basis)?;
    let holds = signs.col_pos(r).is_some();
    if holds && !check_r_nonredundant(&signs, r) {
        return Err(Error::Precondition(format!(
            "perturbed optimum is not {r}-nonredundant"
        )));
    }
    Ok(Found {
        holds,
        basis: out.basis,
        signs,
        pivots,
    })
}

fn restriction<'a>(
    oracle: &'a dyn DictionaryOracle,
    r: Var,
    restrict_to: Option<&[Var]>,
) -> Result<Option<Restricted<'a>>> {
    if oracle.variables().binary_search(&r).is_err() {
        return Err(Error::InvalidIndex(format!("{r} is not a variable")));
    }
    restrict_to
        .map(|t| Restricted::new(oracle, &union(t, &[r]), oracle.initial_basis()))
        .transpose()
}

/// Searches for a feasible `r`-redundant basis of the subsystem keeping only
/// the constraints in `restrict_to` (all constraints when `None`). Since
/// redundancy in a subsystem implies redundancy in the whole system, the
/// certificate is reported against the whole system.
pub fn find_redundancy_certificate(
    oracle: &dyn DictionaryOracle,
    r: Var,
    restrict_to: Option<&[Var]>,
    opts: &SolveOptions,
) -> Result<Option<Certificate>> {
    let sub = restriction(oracle, r, restrict_to)?;
    let found = match &sub {
        Some(s) => search_redundant(s, r, s.initial_basis(), opts)?,
        None => search_redundant(oracle, r, oracle.initial_basis(), opts)?,
    };
    if !found.holds {
        return Ok(None);
    }
    let basis = match &sub {
        Some(s) => s.parent_basis(&found.basis),
        None => found.basis,
    };
    Certificate::build(
        oracle,
        r,
        CertificateKind::Redundant,
        basis,
        oracle.variables().to_vec(),
        Vec::new(),
    )
    .map(Some)
}

/// Searches for an `r`-nonredundant basis of the subsystem keeping only the
/// constraints in `restrict_to` (all constraints when `None`).
pub fn find_nonredundancy_certificate(
    oracle: &dyn DictionaryOracle,
    r: Var,
    restrict_to: Option<&[Var]>,
    opts: &SolveOptions,
) -> Result<Option<Certificate>> {
    let sub = restriction(oracle, r, restrict_to)?;
    let found = match &sub {
        Some(s) => search_nonredundant(s, r, s.initial_basis(), opts)?,
        None => search_nonredundant(oracle, r, oracle.initial_basis(), opts)?,
    };
    if !found.holds {
        return Ok(None);
    }
    let (basis, scope) = match &sub {
        Some(s) => (s.parent_basis(&found.basis), s.variables().to_vec()),
        None => (found.basis, oracle.variables().to_vec()),
    };
    Certificate::build(
        oracle,
        r,
        CertificateKind::Nonredundant,
        basis,
        scope,
        Vec::new(),
    )
    .map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{build_initial_dictionary, rat, vars, LpInstance};
    use crate::oracle::{RationalOracle, Sign};

    fn xyz() -> RationalOracle {
        // x3 = x1 + x2
        RationalOracle::new(
            build_initial_dictionary(&LpInstance {
                basis: vars([3]),
                nonbasis: vars([1, 2]),
                b: vec![rat(0)],
                a: vec![vec![rat(-1), rat(-1)]],
                c: None,
            })
            .unwrap(),
        )
    }

    fn matrix(basis: &[u32], nonbasis: &[u32], rows: &[&str]) -> SignMatrix {
        let doc = SignMatrixDoc {
            basis: vars(basis.iter().copied()),
            nonbasis: vars(nonbasis.iter().copied()),
            rows: rows.iter().map(|s| s.to_string()).collect(),
        };
        SignMatrix::try_from(&doc).unwrap()
    }

    #[test]
    fn predicates_on_small_patterns() {
        let at3 = matrix(&[3], &[1, 2], &["0++"]);
        let at2 = matrix(&[2], &[1, 3], &["0-+"]);
        assert!(check_r_redundant(&at3, Var(3)));
        assert!(!check_r_redundant(&at3, Var(1)));
        assert!(!check_r_nonredundant(&at3, Var(1)));
        assert!(check_r_nonredundant(&at2, Var(1)));
        assert!(!check_r_nonredundant(&at2, Var(2)));
    }

    #[test]
    fn infeasible_basis_is_never_nonredundant() {
        let m = matrix(&[3], &[1, 2], &["--+"]);
        assert!(!check_r_nonredundant(&m, Var(1)));
        let m = matrix(&[3], &[1, 2], &["-++"]);
        assert!(!check_r_redundant(&m, Var(3)));
    }

    #[test]
    fn nonredundancy_search_reaches_basis_two() {
        let o = xyz();
        let c = find_nonredundancy_certificate(&o, Var(1), None, &SolveOptions::default())
            .unwrap()
            .unwrap();
        assert_eq!(c.basis, vars([2]));
        assert_eq!(c.evidence.row_strings(), vec!["0-+"]);
        assert!(c.verify(&o).unwrap());
    }

    #[test]
    fn redundancy_search_at_start() {
        let o = xyz();
        let c = find_redundancy_certificate(&o, Var(3), None, &SolveOptions::default())
            .unwrap()
            .unwrap();
        assert_eq!(c.basis, vars([3]));
        assert!(c.verify(&o).unwrap());
        assert!(
            find_redundancy_certificate(&o, Var(1), None, &SolveOptions::default())
                .unwrap()
                .is_none()
        );
        assert!(
            find_nonredundancy_certificate(&o, Var(3), None, &SolveOptions::default())
                .unwrap()
                .is_none()
        );
    }

    #[test]
    fn infeasible_system_is_reported() {
        // x2 = -1 - x1
        let o = RationalOracle::new(
            build_initial_dictionary(
                &LpInstance::from_rows(vec![rat(-1)], vec![vec![rat(1)]]).unwrap(),
            )
            .unwrap(),
        );
        let err = find_nonredundancy_certificate(&o, Var(1), None, &SolveOptions::default());
        assert!(matches!(err, Err(Error::Infeasible { .. })));
    }

    #[test]
    fn tampered_evidence_fails_verification() {
        let o = xyz();
        let mut c = find_redundancy_certificate(&o, Var(3), None, &SolveOptions::default())
            .unwrap()
            .unwrap();
        c.evidence = matrix(&[3], &[1, 2], &["+++"]);
        assert!(c.holds());
        assert!(!c.verify(&o).unwrap());
        c.kind = CertificateKind::Nonredundant;
        c.evidence = o.signs(&c.basis).unwrap();
        assert!(!c.verify(&o).unwrap());
        assert_eq!(c.evidence.g(Var(3)), Some(Sign::Zero));
    }

    #[test]
    fn certificate_json_round_trip() {
        let o = xyz();
        let c = find_nonredundancy_certificate(&o, Var(1), None, &SolveOptions::default())
            .unwrap()
            .unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: Certificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
