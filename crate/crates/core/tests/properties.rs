use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use redundancy::io::{parse_system, serialize_system};
use redundancy::lp::{basic_point, ratio, LpInstance};
use redundancy::oracle::{
    make_rowwise_eps, make_single_eps, oracle_signs, perturbed_signs, PerturbedDictionary,
};
use redundancy::pivot::{
    criss_cross, criss_cross_oracle, pivot, simplex_oracle, simplex_smallest_index,
    simplex_smallest_index_by_trials, Objective, SolveOptions,
};
use redundancy::{build_initial_dictionary, Dictionary, Rat, RationalOracle, Sign, Var};

fn small_rat() -> impl Strategy<Value = Rat> {
    (-4i64..=4, 1i64..=3).prop_map(|(p, q)| ratio(p, q))
}

/// Instance with `n ≤ 4`, `d ≤ 3` and an objective row; `b ≥ 0` if `feasible`.
fn instance(feasible: bool) -> impl Strategy<Value = LpInstance> {
    (1usize..=4, 1usize..=3).prop_flat_map(move |(n, d)| {
        let b = if feasible {
            prop::collection::vec((0i64..=4).prop_map(redundancy::lp::rat), n).boxed()
        } else {
            prop::collection::vec(small_rat(), n).boxed()
        };
        (
            b,
            prop::collection::vec(prop::collection::vec(small_rat(), d), n),
            prop::collection::vec(small_rat(), d),
        )
            .prop_map(|(b, a, c)| {
                let mut inst = LpInstance::from_rows(b, a).unwrap();
                inst.c = Some(c);
                inst
            })
    })
}

/// Applies pivots chosen by the `picks`, skipping zero pivot entries.
fn walk(dict: &Dictionary, picks: &[(usize, usize)]) -> Dictionary {
    let mut cur = dict.clone();
    for &(i, j) in picks {
        let r = cur.basis()[i % cur.n()];
        let s = cur.nonbasis()[j % cur.d()];
        if !cur.entry(r, s).unwrap().is_zero() {
            cur = pivot(&cur, r, s).unwrap();
        }
    }
    cur
}

fn picks() -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((0usize..8, 0usize..8), 0..6)
}

/// All variable values given values of the nonbasic ones.
fn evaluate(dict: &Dictionary, x_n: &BTreeMap<Var, Rat>) -> BTreeMap<Var, Rat> {
    let mut x = x_n.clone();
    for (i, &v) in dict.basis().iter().enumerate() {
        let mut val = dict.rhs()[i].clone();
        for (j, w) in dict.nonbasis().iter().enumerate() {
            val += &dict.coef()[i][j] * &x_n[w];
        }
        x.insert(v, val);
    }
    x
}

/// An ε for which the sign of `g + ε c_1 + ε² c_2 + …` is the sign of the
/// first nonzero term in every row.
fn small_eps(p: &PerturbedDictionary) -> Rat {
    let mut eps = ratio(1, 2);
    for i in 0..p.base().n() {
        let terms: Vec<Rat> = std::iter::once(p.base().rhs()[i].clone())
            .chain(p.eps_columns().iter().map(|c| c[i].clone()))
            .collect();
        if let Some(k) = terms.iter().position(|t| !t.is_zero()) {
            let rest: Rat = terms[k + 1..].iter().map(|t| t.abs()).sum();
            let bound = terms[k].abs() / (rest + Rat::one());
            if bound < eps {
                eps = bound;
            }
        }
    }
    eps
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn pivot_is_an_involution(inst in instance(false), ps in picks(), i in 0usize..8, j in 0usize..8) {
        let dict = walk(&build_initial_dictionary(&inst).unwrap(), &ps);
        let r = dict.basis()[i % dict.n()];
        let s = dict.nonbasis()[j % dict.d()];
        prop_assume!(!dict.entry(r, s).unwrap().is_zero());
        let there = pivot(&dict, r, s).unwrap();
        prop_assert_eq!(pivot(&there, s, r).unwrap(), dict);
    }

    #[test]
    fn pivot_preserves_solutions(
        inst in instance(false),
        ps in picks(),
        vals in prop::collection::vec(small_rat(), 3),
    ) {
        let start = build_initial_dictionary(&inst).unwrap();
        let x_n: BTreeMap<Var, Rat> = start
            .nonbasis()
            .iter()
            .zip(vals.iter().cycle())
            .map(|(v, x)| (*v, x.clone()))
            .collect();
        let x = evaluate(&start, &x_n);
        let moved = walk(&start, &ps);
        let y_n = moved.nonbasis().iter().map(|v| (*v, x[v].clone())).collect();
        prop_assert_eq!(evaluate(&moved, &y_n), x.clone());
        // the objective row tracks the same affine function
        let c = inst.c.as_ref().unwrap();
        let z: Rat = inst.nonbasis.iter().zip(c).map(|(v, cj)| cj * &x[v]).sum();
        let obj = moved.objective().unwrap();
        let z2: Rat = &obj.constant
            + moved.nonbasis().iter().zip(&obj.coef).map(|(v, cj)| cj * &x[v]).sum::<Rat>();
        prop_assert_eq!(z, z2);
    }

    #[test]
    fn system_files_round_trip(inst in instance(false), ps in picks()) {
        // relabelled bases exercise the explicit basis/nonbasis lines
        let dict = walk(&build_initial_dictionary(&inst).unwrap(), &ps);
        let moved = LpInstance {
            basis: dict.basis().to_vec(),
            nonbasis: dict.nonbasis().to_vec(),
            b: dict.rhs().to_vec(),
            a: dict.coef().iter().map(|r| r.iter().map(|v| -v).collect()).collect(),
            c: Some(dict.objective().unwrap().coef.clone()),
        };
        for x in [inst, moved] {
            let text = serialize_system(&x);
            prop_assert_eq!(parse_system(&text).unwrap(), x.clone());
            prop_assert_eq!(serialize_system(&parse_system(&text).unwrap()), text);
        }
    }

    #[test]
    fn symbolic_perturbation_matches_small_epsilon(inst in instance(false), ps in picks(), col in 0usize..3) {
        let dict = build_initial_dictionary(&inst).unwrap();
        let r = dict.nonbasis()[col % dict.d()];
        for start in [make_single_eps(&dict, r).unwrap(), make_rowwise_eps(&dict)] {
            let mut p = start;
            for &(i, j) in &ps {
                let a = p.base().basis()[i % p.base().n()];
                let b = p.base().nonbasis()[j % p.base().d()];
                if !p.base().entry(a, b).unwrap().is_zero() {
                    p = p.pivot(a, b).unwrap();
                }
            }
            let eps = small_eps(&p);
            prop_assert_eq!(perturbed_signs(&p), oracle_signs(&p.instantiate(&eps)));
        }
    }

    #[test]
    fn rowwise_perturbation_has_no_zero_constants(inst in instance(false), ps in picks()) {
        let mut p = make_rowwise_eps(&build_initial_dictionary(&inst).unwrap());
        for &(i, j) in &ps {
            let a = p.base().basis()[i % p.base().n()];
            let b = p.base().nonbasis()[j % p.base().d()];
            if !p.base().entry(a, b).unwrap().is_zero() {
                p = p.pivot(a, b).unwrap();
            }
        }
        prop_assert!(perturbed_signs(&p).g_column().iter().all(|g| *g != Sign::Zero));
    }

    #[test]
    fn criss_cross_walks_agree(inst in instance(false), ps in picks(), v in 0usize..8) {
        let dict = walk(&build_initial_dictionary(&inst).unwrap(), &ps);
        let all: Vec<Var> = inst.variables();
        let target = all[v % all.len()];
        let oracle = RationalOracle::new(dict.clone());
        let opts = SolveOptions::default();
        for obj in [Objective::Minimize(target), Objective::Feasibility] {
            let rational = criss_cross(&dict, obj, &opts).unwrap();
            let signs = criss_cross_oracle(&oracle, dict.basis(), obj, &opts).unwrap();
            prop_assert_eq!(&rational.pivot_trace, &signs.pivot_trace);
            prop_assert_eq!(rational.kind, signs.kind);
            prop_assert_eq!(rational.dictionary.basis(), &signs.basis[..]);
        }
    }

    #[test]
    fn simplex_walks_agree(inst in instance(true), v in 0usize..8) {
        let dict = build_initial_dictionary(&inst).unwrap();
        let all: Vec<Var> = inst.variables();
        let target = all[v % all.len()];
        let oracle = RationalOracle::new(dict.clone());
        let opts = SolveOptions::default();
        let obj = Objective::Minimize(target);
        let ratio_test = simplex_smallest_index(&dict, obj, &opts).unwrap();
        let trials = simplex_smallest_index_by_trials(&dict, obj, &opts).unwrap();
        let signs = simplex_oracle(&oracle, dict.basis(), obj, &opts).unwrap();
        prop_assert_eq!(&ratio_test.pivot_trace, &trials.pivot_trace);
        prop_assert_eq!(&ratio_test.pivot_trace, &signs.pivot_trace);
        prop_assert_eq!(ratio_test.kind, signs.kind);
        // every visited dictionary stays feasible
        let end = basic_point(&ratio_test.dictionary);
        prop_assert!(end.values().all(|x| !x.is_negative()));
    }
}
