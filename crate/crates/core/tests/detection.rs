use redundancy::brute::brute_force_classify;
use redundancy::detection::{detect, DetectOptions, DetectionResult, Method};
use redundancy::generators::{gen_a1, gen_a2, gen_a3, gen_random_fulldim};
use redundancy::lp::{rat, vars, LpInstance};
use redundancy::{build_initial_dictionary, Error, RationalOracle, Var};

const ALL: [Method; 4] = [
    Method::Naive,
    Method::Clarkson,
    Method::Combinatorial,
    Method::Strong,
];

fn with_certs() -> DetectOptions {
    DetectOptions {
        certificates: true,
        ..DetectOptions::default()
    }
}

fn check_certificates(inst: &LpInstance, res: &DetectionResult) {
    let root = RationalOracle::new(build_initial_dictionary(inst).unwrap());
    assert_eq!(
        res.certificates.len(),
        res.redundant.len() + res.nonredundant.len(),
        "{}: every variable is certified",
        res.method
    );
    assert!(res.verify_certificates(&root).unwrap(), "{}", res.method);
}

#[test]
fn a1_all_methods() {
    for n in 2..=4 {
        let inst = gen_a1(n).unwrap();
        let red = vars(1..=n as u32);
        let non = vars(n as u32 + 1..=2 * n as u32 + 1);
        for m in ALL {
            let res = detect(&inst, m, &with_certs()).unwrap();
            assert_eq!(res.redundant, red, "{m} n={n}");
            assert_eq!(res.nonredundant, non, "{m} n={n}");
            if m != Method::Clarkson {
                check_certificates(&inst, &res);
            }
        }
    }
}

#[test]
fn a2_all_nonredundant() {
    for n in 2..=4 {
        let inst = gen_a2(n).unwrap();
        for m in ALL {
            let res = detect(&inst, m, &with_certs()).unwrap();
            assert!(res.redundant.is_empty(), "{m} n={n}");
            assert_eq!(res.nonredundant, vars(1..=2 * n as u32));
        }
    }
}

#[test]
fn a3_single_dictionary() {
    for n in 2..=5 {
        let inst = gen_a3(n, n).unwrap();
        let res = detect(&inst, Method::Combinatorial, &with_certs()).unwrap();
        assert_eq!(res.redundant, vars(1..=n as u32));
        assert_eq!(res.nonredundant, vars(n as u32 + 1..=2 * n as u32));
        assert_eq!(res.stats.recursive_harvests, 0);
        check_certificates(&inst, &res);
        for c in &res.certificates {
            assert_eq!(c.basis, vars(1..=n as u32));
        }
    }
}

#[test]
fn random_instances_agree_with_brute_force() {
    for seed in 0..40 {
        let n = 2 + (seed as usize % 5);
        let d = 1 + (seed as usize % 3);
        let inst = gen_random_fulldim(n, d, seed).unwrap().instance;
        let truth = brute_force_classify(&inst).unwrap();
        for m in ALL {
            if m == Method::Strong && !truth.weakly_redundant.is_empty() {
                continue;
            }
            let res =
                detect(&inst, m, &with_certs()).unwrap_or_else(|e| panic!("{m} seed={seed}: {e}"));
            assert_eq!(res.redundant, truth.redundant, "{m} seed={seed}");
            assert_eq!(res.nonredundant, truth.nonredundant, "{m} seed={seed}");
            if m != Method::Clarkson {
                check_certificates(&inst, &res);
            }
        }
    }
}

#[test]
fn parallel_matches_sequential() {
    for seed in 100..110 {
        let inst = gen_random_fulldim(12, 3, seed).unwrap().instance;
        for m in [Method::Naive, Method::Combinatorial] {
            let seq = detect(&inst, m, &with_certs()).unwrap();
            let par = detect(
                &inst,
                m,
                &DetectOptions {
                    parallel: true,
                    ..with_certs()
                },
            )
            .unwrap();
            assert_eq!(seq.redundant, par.redundant);
            assert_eq!(seq.nonredundant, par.nonredundant);
            check_certificates(&inst, &par);
        }
    }
}

#[test]
fn zero_column_is_forced_nonredundant() {
    // x1 = 1 - x2 + 0 x3
    let inst = LpInstance::from_rows(vec![rat(1)], vec![vec![rat(1), rat(0)]]).unwrap();
    for m in ALL {
        let res = detect(&inst, m, &with_certs()).unwrap();
        assert_eq!(res.forced_nonredundant, vec![Var(3)], "{m}");
        assert!(res.nonredundant.contains(&Var(3)), "{m}");
    }
}

#[test]
fn infeasible_input_is_reported() {
    let inst = LpInstance::from_rows(vec![rat(-1)], vec![vec![rat(1)]]).unwrap();
    for m in ALL {
        assert!(
            matches!(
                detect(&inst, m, &DetectOptions::default()),
                Err(Error::Infeasible { .. })
            ),
            "{m}"
        );
    }
}

#[test]
fn flat_input_needs_strong_mode() {
    // x2 = x1 - x3 and x4 = x3 - x1 force x2 = x4 = 0
    let inst = LpInstance {
        basis: vars([2, 4]),
        nonbasis: vars([1, 3]),
        b: vec![rat(0), rat(0)],
        a: vec![vec![rat(-1), rat(1)], vec![rat(1), rat(-1)]],
        c: None,
    };
    assert_eq!(
        detect(&inst, Method::Combinatorial, &DetectOptions::default()),
        Err(Error::NotFullDimensional)
    );
    assert_eq!(
        detect(&inst, Method::Clarkson, &DetectOptions::default()),
        Err(Error::NotFullDimensional)
    );
    let res = detect(&inst, Method::Strong, &with_certs()).unwrap();
    check_certificates(&inst, &res);
    let truth = brute_force_classify(&inst).unwrap();
    for v in &truth.nonredundant {
        assert!(res.nonredundant.contains(v));
    }
    for v in &truth.strongly_redundant {
        assert!(res.redundant.contains(v));
    }
}

#[test]
fn duplicated_hyperplane() {
    // x2 = 8 - 2 x6 and x3 = 4 - x6 cut out the same facet
    let inst = LpInstance::from_rows(
        vec![rat(0), rat(8), rat(4), rat(4)],
        vec![
            vec![rat(3), rat(-3)],
            vec![rat(0), rat(2)],
            vec![rat(0), rat(1)],
            vec![rat(0), rat(0)],
        ],
    )
    .unwrap();
    let truth = brute_force_classify(&inst).unwrap();
    assert_eq!(truth.redundant, vars([2, 3, 4, 6]));
    for m in [Method::Naive, Method::Combinatorial] {
        let res = detect(&inst, m, &with_certs()).unwrap();
        assert_eq!(res.redundant, truth.redundant, "{m}");
        check_certificates(&inst, &res);
    }
    assert!(matches!(
        detect(&inst, Method::Clarkson, &DetectOptions::default()),
        Err(Error::AssumptionViolation(_))
    ));
    let strong = detect(&inst, Method::Strong, &with_certs()).unwrap();
    assert!(truth
        .nonredundant
        .iter()
        .all(|v| strong.nonredundant.contains(v)));
    assert!(truth
        .strongly_redundant
        .iter()
        .all(|v| strong.redundant.contains(v)));
}
