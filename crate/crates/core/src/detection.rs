//! Whole-system classification of nonnegativity constraints.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use parking_lot::Mutex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificates::{
    search_nonredundant, search_redundant, Certificate, CertificateKind, Found,
};
use crate::clarkson;
use crate::error::{Error, Result};
use crate::lp::{build_initial_dictionary, LpInstance, Var};
use crate::oracle::{
    difference, union, ColumnPromotion, DictionaryOracle, Perturbed, RationalOracle, Restricted,
    SignMatrix, WithoutColumns,
};
use crate::pivot::{criss_cross_oracle, Objective, SolveOptions, TerminalKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Naive,
    Clarkson,
    Combinatorial,
    Strong,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Naive => "naive",
            Method::Clarkson => "clarkson",
            Method::Combinatorial => "combinatorial",
            Method::Strong => "strong",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "naive" => Ok(Method::Naive),
            "clarkson" => Ok(Method::Clarkson),
            "combinatorial" => Ok(Method::Combinatorial),
            "strong" => Ok(Method::Strong),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DetectOptions {
    pub solve: SolveOptions,
    /// Attach a certificate to every classified variable.
    pub certificates: bool,
    pub parallel: bool,
    /// Skip the full-dimensionality check of the combinatorial method.
    pub assume_full_dim: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpSolveCount {
    pub rows: usize,
    pub cols: usize,
    pub count: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    /// Terminal pivot searches by dictionary size.
    pub lp_solves: Vec<LpSolveCount>,
    pub pivots: u64,
    pub oracle_queries: u64,
    /// Redundancy tests against the current `S` plus the fixed nonbasis.
    pub subset_tests: u64,
    /// Largest number of constraints kept besides `r` in such a test.
    pub max_subset_test_size: usize,
    /// Tests against all constraints not yet found redundant.
    pub full_tests: u64,
    pub certificate_searches: u64,
    pub harvests: u64,
    pub recursive_harvests: u64,
    pub harvest_without_progress: u64,
    pub max_depth: usize,
}

impl Stats {
    pub fn total_lp_solves(&self) -> u64 {
        self.lp_solves.iter().map(|c| c.count).sum()
    }

    pub fn max_lp_rows(&self) -> usize {
        self.lp_solves.iter().map(|c| c.rows).max().unwrap_or(0)
    }
}

#[derive(Default)]
struct Counters {
    stats: Stats,
    sizes: BTreeMap<(usize, usize), u64>,
}

impl Counters {
    fn finish(mut self, queries: u64) -> Stats {
        self.stats.lp_solves = self
            .sizes
            .into_iter()
            .map(|((rows, cols), count)| LpSolveCount { rows, cols, count })
            .collect();
        self.stats.oracle_queries = queries;
        self.stats
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub method: Method,
    pub nonredundant: Vec<Var>,
    pub redundant: Vec<Var>,
    /// Variables with an identically zero column.
    pub forced_nonredundant: Vec<Var>,
    /// Sorted by variable; empty unless requested.
    pub certificates: Vec<Certificate>,
    pub stats: Stats,
}

impl DetectionResult {
    pub fn certificate(&self, v: Var) -> Option<&Certificate> {
        self.certificates
            .binary_search_by_key(&v, |c| c.variable)
            .ok()
            .map(|i| &self.certificates[i])
    }

    /// Re-verifies every certificate against `root`.
    pub fn verify_certificates(&self, root: &dyn DictionaryOracle) -> Result<bool> {
        for c in &self.certificates {
            let expected = if self.redundant.binary_search(&c.variable).is_ok() {
                CertificateKind::Redundant
            } else {
                CertificateKind::Nonredundant
            };
            if c.kind != expected || !c.verify(root)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preprocessed {
    /// The instance with zero columns removed.
    pub instance: LpInstance,
    pub forced_nonredundant: Vec<Var>,
    /// A feasible basis of the system.
    pub feasible_basis: Vec<Var>,
}

struct Prepared {
    zero_columns: Vec<Var>,
    basis: Vec<Var>,
}

fn inconsistent_row(signs: &SignMatrix) -> Var {
    signs
        .basis()
        .iter()
        .zip(signs.g_column().iter().zip(signs.rows()))
        .find(|(_, (g, row))| g.is_neg() && row.iter().all(|s| !s.is_pos()))
        .map(|(v, _)| *v)
        .expect("inconsistent dictionary has an inconsistent row")
}

/// Zero columns and a feasible basis found by one criss-cross run.
fn prepare(oracle: &dyn DictionaryOracle, opts: &SolveOptions) -> Result<(Prepared, u64)> {
    let start = oracle.initial_basis().to_vec();
    let signs = oracle.signs(&start)?;
    let zero_columns: Vec<Var> = signs
        .nonbasis()
        .iter()
        .enumerate()
        .filter(|(q, _)| signs.rows().iter().all(|row| row[*q].is_zero()))
        .map(|(_, v)| *v)
        .collect();
    let reduced = WithoutColumns::new(oracle, &zero_columns);
    let out = criss_cross_oracle(&reduced, &start, Objective::Feasibility, opts)?;
    match out.kind {
        TerminalKind::Optimal => Ok((
            Prepared {
                zero_columns,
                basis: out.basis,
            },
            out.pivot_trace.len() as u64,
        )),
        _ => Err(Error::Infeasible {
            row: inconsistent_row(&out.signs),
            basis: out.basis,
        }),
    }
}

/// Removes zero columns and checks feasibility with one criss-cross run.
pub fn preprocess(inst: &LpInstance) -> Result<Preprocessed> {
    let oracle = RationalOracle::new(build_initial_dictionary(inst)?);
    let (prep, _) = prepare(&oracle, &SolveOptions::default())?;
    let keep: Vec<usize> = (0..inst.d())
        .filter(|&j| prep.zero_columns.binary_search(&inst.nonbasis[j]).is_err())
        .collect();
    let instance = LpInstance {
        basis: inst.basis.clone(),
        nonbasis: keep.iter().map(|&j| inst.nonbasis[j]).collect(),
        b: inst.b.clone(),
        a: inst
            .a
            .iter()
            .map(|row| keep.iter().map(|&j| row[j].clone()).collect())
            .collect(),
        c: inst
            .c
            .as_ref()
            .map(|c| keep.iter().map(|&j| c[j].clone()).collect()),
    };
    Ok(Preprocessed {
        instance,
        forced_nonredundant: prep.zero_columns,
        feasible_basis: prep.basis,
    })
}

#[derive(Default)]
struct Partition {
    s: BTreeSet<Var>,
    r: BTreeSet<Var>,
    certs: BTreeMap<Var, Certificate>,
}

impl Partition {
    fn decided(&self, v: Var) -> bool {
        self.s.contains(&v) || self.r.contains(&v)
    }
}

struct Engine<'a> {
    root: &'a dyn DictionaryOracle,
    perturbation: Vec<Var>,
    opts: DetectOptions,
    counters: Mutex<Counters>,
}

impl<'a> Engine<'a> {
    fn new(root: &'a dyn DictionaryOracle, perturbation: Vec<Var>, opts: &DetectOptions) -> Self {
        Engine {
            root,
            perturbation,
            opts: *opts,
            counters: Mutex::new(Counters::default()),
        }
    }

    fn solved(&self, oracle: &dyn DictionaryOracle, pivots: u64) {
        let mut c = self.counters.lock();
        *c.sizes.entry((oracle.n(), oracle.d())).or_default() += 1;
        c.stats.pivots += pivots;
    }

    fn with_stats(&self, f: impl FnOnce(&mut Stats)) {
        f(&mut self.counters.lock().stats)
    }

    fn cert(
        &self,
        v: Var,
        kind: CertificateKind,
        basis: Vec<Var>,
        scope: Vec<Var>,
    ) -> Result<Certificate> {
        let c = Certificate::build(self.root, v, kind, basis, scope, self.perturbation.clone())?;
        if !c.holds() {
            return Err(Error::Precondition(format!(
                "certificate for {v} does not hold at its basis"
            )));
        }
        Ok(c)
    }

    fn redundant_cert(&self, v: Var, basis: Vec<Var>) -> Result<Certificate> {
        self.cert(
            v,
            CertificateKind::Redundant,
            basis,
            self.root.variables().to_vec(),
        )
    }

    fn redundant(&self, oracle: &dyn DictionaryOracle, r: Var, start: &[Var]) -> Result<Found> {
        let found = search_redundant(oracle, r, start, &self.opts.solve)?;
        self.solved(oracle, found.pivots);
        Ok(found)
    }

    fn nonredundant(&self, oracle: &dyn DictionaryOracle, r: Var, start: &[Var]) -> Result<Found> {
        let found = search_nonredundant(oracle, r, start, &self.opts.solve)?;
        self.solved(oracle, found.pivots);
        Ok(found)
    }

    fn finish(self, method: Method, part: Partition, forced: Vec<Var>) -> DetectionResult {
        let queries = self.root.query_count();
        DetectionResult {
            method,
            nonredundant: part.s.into_iter().collect(),
            redundant: part.r.into_iter().collect(),
            forced_nonredundant: forced,
            certificates: part.certs.into_values().collect(),
            stats: self.counters.into_inner().finish(queries),
        }
    }

    fn prepare(&self, oracle: &dyn DictionaryOracle) -> Result<Prepared> {
        let (prep, pivots) = prepare(oracle, &self.opts.solve)?;
        self.solved(oracle, pivots);
        Ok(prep)
    }

    /// Systems without nonbasic columns: every row is a constant.
    fn base_case(
        &self,
        oracle: &dyn DictionaryOracle,
        basis: &[Var],
        certify: bool,
        out: &mut Partition,
    ) -> Result<()> {
        let signs = oracle.signs(basis)?;
        if let Some(p) = signs.g_column().iter().position(|g| g.is_neg()) {
            return Err(Error::Infeasible {
                row: signs.basis()[p],
                basis: basis.to_vec(),
            });
        }
        for &v in signs.basis() {
            out.r.insert(v);
            if certify {
                out.certs.insert(v, self.redundant_cert(v, basis.to_vec())?);
            }
        }
        Ok(())
    }

    fn naive(&self, oracle: &dyn DictionaryOracle) -> Result<(Partition, Vec<Var>)> {
        let prep = self.prepare(oracle)?;
        let reduced = WithoutColumns::new(oracle, &prep.zero_columns);
        let mut out = Partition::default();
        self.force(&prep, &mut out)?;
        let certify = self.opts.certificates;
        let classify = |r: Var| -> Result<(Var, bool, Option<Certificate>)> {
            self.with_stats(|s| s.full_tests += 1);
            let found = self.redundant(&reduced, r, &prep.basis)?;
            if found.holds {
                let cert = certify
                    .then(|| self.redundant_cert(r, found.basis))
                    .transpose()?;
                return Ok((r, true, cert));
            }
            let cert = if certify {
                self.with_stats(|s| s.certificate_searches += 1);
                let nf = self.nonredundant(&reduced, r, &prep.basis)?;
                if !nf.holds {
                    return Err(Error::Precondition(format!(
                        "{r} is neither redundant nor nonredundant"
                    )));
                }
                Some(self.cert(
                    r,
                    CertificateKind::Nonredundant,
                    nf.basis,
                    self.root.variables().to_vec(),
                )?)
            } else {
                None
            };
            Ok((r, false, cert))
        };
        let vars = reduced.variables().to_vec();
        let results: Vec<_> = if self.opts.parallel {
            vars.par_iter()
                .map(|&r| classify(r))
                .collect::<Result<_>>()?
        } else {
            vars.iter().map(|&r| classify(r)).collect::<Result<_>>()?
        };
        for (r, red, cert) in results {
            if red {
                out.r.insert(r);
            } else {
                out.s.insert(r);
            }
            if let Some(c) = cert {
                out.certs.insert(r, c);
            }
        }
        Ok((out, prep.zero_columns))
    }

    fn force(&self, prep: &Prepared, out: &mut Partition) -> Result<()> {
        for &z in &prep.zero_columns {
            out.s.insert(z);
            if self.opts.certificates {
                let c = self.cert(
                    z,
                    CertificateKind::Nonredundant,
                    prep.basis.clone(),
                    self.root.variables().to_vec(),
                )?;
                out.certs.insert(z, c);
            }
        }
        Ok(())
    }

    /// Redundancy of `r` with respect to `S ∪ N0`; returns the root basis of
    /// the certificate when redundant.
    fn subset_test(
        &self,
        oracle: &dyn DictionaryOracle,
        r: Var,
        s: &BTreeSet<Var>,
        b0: &[Var],
        n0: &[Var],
    ) -> Result<Option<Vec<Var>>> {
        let s: Vec<Var> = s.iter().copied().collect();
        let others = union(&s, n0);
        let keep = union(&others, &[r]);
        let size = difference(&others, &[r]).len();
        let sub = Restricted::new(oracle, &keep, b0)?;
        self.with_stats(|st| {
            st.subset_tests += 1;
            st.max_subset_test_size = st.max_subset_test_size.max(size);
        });
        let found = self.redundant(&sub, r, sub.initial_basis())?;
        Ok(found.holds.then(|| sub.parent_basis(&found.basis)))
    }

    /// One level of the output-sensitive algorithm on a feasible system.
    fn combinatorial(
        &self,
        oracle: &dyn DictionaryOracle,
        depth: usize,
        top: bool,
    ) -> Result<(Partition, Vec<Var>)> {
        self.with_stats(|s| s.max_depth = s.max_depth.max(depth));
        let certify = top && self.opts.certificates;
        let mut out = Partition::default();
        let prep = self.prepare(oracle)?;
        if top {
            self.force(&prep, &mut out)?;
        } else {
            out.s.extend(prep.zero_columns.iter().copied());
        }
        let reduced = WithoutColumns::new(oracle, &prep.zero_columns);
        if reduced.d() == 0 {
            self.base_case(&reduced, &prep.basis, certify, &mut out)?;
            return Ok((out, prep.zero_columns));
        }
        let b0 = prep.basis.clone();
        let n0 = difference(reduced.variables(), &b0);
        let vars = reduced.variables().to_vec();

        if top && self.opts.parallel {
            let chunk = rayon::current_num_threads().max(1) * 4;
            for block in vars.chunks(chunk) {
                let snapshot = out.s.clone();
                let hits: Vec<(Var, Option<Vec<Var>>)> = block
                    .par_iter()
                    .filter(|v| !out.decided(**v))
                    .map(|&r| Ok((r, self.subset_test(&reduced, r, &snapshot, &b0, &n0)?)))
                    .collect::<Result<_>>()?;
                for (r, basis) in hits {
                    if let Some(basis) = basis {
                        out.r.insert(r);
                        if certify {
                            out.certs.insert(r, self.redundant_cert(r, basis)?);
                        }
                    }
                }
                for &r in block {
                    if !out.decided(r) {
                        self.step(&reduced, r, &b0, &n0, depth, certify, &mut out)?;
                    }
                }
            }
        } else {
            for &r in &vars {
                if !out.decided(r) {
                    self.step(&reduced, r, &b0, &n0, depth, certify, &mut out)?;
                }
            }
        }
        Ok((out, prep.zero_columns))
    }

    #[allow(clippy::too_many_arguments)]
    fn step(
        &self,
        oracle: &dyn DictionaryOracle,
        r: Var,
        b0: &[Var],
        n0: &[Var],
        depth: usize,
        certify: bool,
        out: &mut Partition,
    ) -> Result<()> {
        if let Some(basis) = self.subset_test(oracle, r, &out.s, b0, n0)? {
            out.r.insert(r);
            if certify {
                out.certs.insert(r, self.redundant_cert(r, basis)?);
            }
            return Ok(());
        }

        let rest: Vec<Var> = difference(
            oracle.variables(),
            &out.r.iter().copied().collect::<Vec<_>>(),
        );
        let sub = Restricted::new(oracle, &rest, b0)?;
        let scope = difference(self.root.variables(), sub.hidden());
        self.with_stats(|s| s.full_tests += 1);
        let found = self.redundant(&sub, r, sub.initial_basis())?;
        if !found.holds {
            out.s.insert(r);
            if certify {
                self.with_stats(|s| s.certificate_searches += 1);
                let nf = self.nonredundant(&sub, r, sub.initial_basis())?;
                if !nf.holds {
                    return Err(Error::Precondition(format!(
                        "{r} is neither redundant nor nonredundant in the remaining system"
                    )));
                }
                let c = self.cert(
                    r,
                    CertificateKind::Nonredundant,
                    sub.parent_basis(&nf.basis),
                    scope,
                )?;
                out.certs.insert(r, c);
            }
            return Ok(());
        }

        self.harvest(&sub, r, &found, depth, certify, &scope, out)?;
        out.r.insert(r);
        if certify {
            let c = self.redundant_cert(r, sub.parent_basis(&found.basis))?;
            out.certs.insert(r, c);
        }
        Ok(())
    }

    /// Collects known-nonredundant (and known-redundant) constraints from a
    /// feasible redundancy certificate of `r` in `sub`.
    #[allow(clippy::too_many_arguments)]
    fn harvest(
        &self,
        sub: &Restricted<'_>,
        r: Var,
        found: &Found,
        depth: usize,
        certify: bool,
        scope: &[Var],
        out: &mut Partition,
    ) -> Result<()> {
        self.with_stats(|s| s.harvests += 1);
        let signs = &found.signs;
        let mut sf: BTreeSet<Var> = BTreeSet::new();
        let mut rf: BTreeSet<Var> = BTreeSet::new();
        let mut certs: Vec<Certificate> = Vec::new();

        if signs.g_column().iter().all(|g| g.is_pos()) {
            sf.extend(signs.nonbasis().iter().copied());
            if certify {
                for &v in signs.nonbasis() {
                    if !out.s.contains(&v) {
                        certs.push(self.cert(
                            v,
                            CertificateKind::Nonredundant,
                            sub.parent_basis(&found.basis),
                            scope.to_vec(),
                        )?);
                    }
                }
            }
        } else {
            self.with_stats(|s| s.recursive_harvests += 1);
            let f: Vec<Var> = signs
                .basis()
                .iter()
                .zip(signs.g_column())
                .filter(|(_, g)| g.is_zero())
                .map(|(v, _)| *v)
                .collect();
            let nc = signs.nonbasis().to_vec();
            let local = Restricted::new(sub, &union(&f, &nc), &found.basis)?;
            let t = nc[0];
            let promoted = ColumnPromotion::new(&local, t)?;
            let (inner, _) =
                self.combinatorial(&promoted, depth + 1, false)
                    .map_err(|e| match e {
                        Error::Infeasible { .. } | Error::NotFullDimensional => {
                            Error::AssumptionViolation(format!(
                                "homogenized subsystem at depth {} is infeasible ({e})",
                                depth + 1
                            ))
                        }
                        e => e,
                    })?;
            sf.extend(inner.s);
            rf.extend(inner.r);
            self.with_stats(|s| s.full_tests += 1);
            let tf = self.redundant(sub, t, &found.basis)?;
            if tf.holds {
                rf.insert(t);
            } else {
                sf.insert(t);
            }
            if certify {
                for &v in &sf {
                    if out.s.contains(&v) {
                        continue;
                    }
                    self.with_stats(|s| s.certificate_searches += 1);
                    let nf = self.nonredundant(sub, v, &found.basis)?;
                    if !nf.holds {
                        return Err(Error::AssumptionViolation(format!(
                            "harvested {v} as nonredundant but no certificate exists"
                        )));
                    }
                    certs.push(self.cert(
                        v,
                        CertificateKind::Nonredundant,
                        sub.parent_basis(&nf.basis),
                        scope.to_vec(),
                    )?);
                }
                for &v in &rf {
                    if out.r.contains(&v) || v == r {
                        continue;
                    }
                    let basis = if v == t {
                        tf.basis.clone()
                    } else {
                        self.with_stats(|s| s.certificate_searches += 1);
                        let rf_found = self.redundant(sub, v, &found.basis)?;
                        if !rf_found.holds {
                            return Err(Error::AssumptionViolation(format!(
                                "harvested {v} as redundant but no certificate exists"
                            )));
                        }
                        rf_found.basis
                    };
                    certs.push(self.redundant_cert(v, sub.parent_basis(&basis))?);
                }
            }
        }

        if let Some(v) = sf.iter().find(|v| out.r.contains(v) || rf.contains(v)) {
            return Err(Error::AssumptionViolation(format!(
                "{v} was classified both redundant and nonredundant"
            )));
        }
        if let Some(v) = rf.iter().find(|v| out.s.contains(v)) {
            return Err(Error::AssumptionViolation(format!(
                "{v} was classified both redundant and nonredundant"
            )));
        }
        if sf.is_subset(&out.s) {
            self.with_stats(|s| s.harvest_without_progress += 1);
        }
        out.s.extend(sf);
        out.r.extend(rf);
        for c in certs {
            out.certs.insert(c.variable, c);
        }
        Ok(())
    }
}

/// One redundancy search per variable against all constraints.
pub fn detect_naive(root: &dyn DictionaryOracle, opts: &DetectOptions) -> Result<DetectionResult> {
    let engine = Engine::new(root, Vec::new(), opts);
    let (part, forced) = engine.naive(root)?;
    Ok(engine.finish(Method::Naive, part, forced))
}

/// The output-sensitive recursive algorithm. Assumes the feasible region is
/// full-dimensional.
pub fn detect_combinatorial(
    root: &dyn DictionaryOracle,
    opts: &DetectOptions,
) -> Result<DetectionResult> {
    let engine = Engine::new(root, Vec::new(), opts);
    let (part, forced) = engine.combinatorial(root, 0, true)?;
    Ok(engine.finish(Method::Combinatorial, part, forced))
}

/// The combinatorial algorithm on the system with `x_i ≥ -ε^k` for the
/// `k`-th initial basic variable. The result contains every nonredundant
/// and no strongly redundant constraint; weakly redundant constraints may
/// land on either side.
pub fn detect_strong(root: &dyn DictionaryOracle, opts: &DetectOptions) -> Result<DetectionResult> {
    let perturbed = Perturbed::rowwise(root);
    let engine = Engine::new(root, root.initial_basis().to_vec(), opts);
    let (part, forced) = engine.combinatorial(&perturbed, 0, true)?;
    Ok(engine.finish(Method::Strong, part, forced))
}

/// Classifies the constraints of `inst` with the chosen method.
pub fn detect(inst: &LpInstance, method: Method, opts: &DetectOptions) -> Result<DetectionResult> {
    if method == Method::Clarkson {
        return clarkson::detect_clarkson(inst, opts);
    }
    let root = RationalOracle::new(build_initial_dictionary(inst)?);
    match method {
        Method::Naive => detect_naive(&root, opts),
        Method::Strong => detect_strong(&root, opts),
        _ => {
            if !opts.assume_full_dim {
                prepare(&root, &opts.solve)?;
                clarkson::interior_point(inst)?;
            }
            detect_combinatorial(&root, opts)
        }
    }
}
