//! Fixed instance families and seeded random instances with a known interior point.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lp::{rat, vars, LpInstance, Rat, Var};

fn positive(name: &str, v: usize) -> Result<u32> {
    if v == 0 {
        return Err(Error::Precondition(format!("{name} must be at least 1")));
    }
    u32::try_from(v).map_err(|_| Error::Precondition(format!("{name} is too large")))
}

/// `x_i = 1 - x_{n+i}` for `i ≤ n` and `x_{2n+1} = 1 - Σ x_{n+i}`.
pub fn gen_a1(n: usize) -> Result<LpInstance> {
    let m = positive("n", n)?;
    let mut a = vec![vec![rat(0); n]; n + 1];
    for (i, row) in a.iter_mut().enumerate().take(n) {
        row[i] = rat(1);
    }
    a[n] = vec![rat(1); n];
    let mut basis = vars(1..=m);
    basis.push(Var(2 * m + 1));
    Ok(LpInstance {
        basis,
        nonbasis: vars(m + 1..=2 * m),
        b: vec![rat(1); n + 1],
        a,
        c: None,
    })
}

/// `x_i = 1 - x_{n+i} + Σ_{j≠i} x_{n+j}` for `i ≤ n`.
pub fn gen_a2(n: usize) -> Result<LpInstance> {
    positive("n", n)?;
    let a = (0..n)
        .map(|i| (0..n).map(|j| rat(if i == j { 1 } else { -1 })).collect())
        .collect();
    LpInstance::from_rows(vec![rat(1); n], a)
}

/// `x_B = 1 + J x_N` with `J` the all-ones `n × d` matrix.
pub fn gen_a3(n: usize, d: usize) -> Result<LpInstance> {
    positive("n", n)?;
    positive("d", d)?;
    LpInstance::from_rows(vec![rat(1); n], vec![vec![rat(-1); d]; n])
}

/// A random instance together with a strictly positive feasible point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomInstance {
    pub instance: LpInstance,
    pub interior_point: BTreeMap<Var, Rat>,
}

/// Pairs of constraints that are positive multiples of each other as affine
/// functions of the nonbasic variables (constant constraints excluded).
/// Each member of such a pair is redundant given the other although the
/// hyperplane may support a facet.
pub fn duplicate_hyperplanes(inst: &LpInstance) -> Vec<(Var, Var)> {
    let d = inst.d();
    let mut funcs: Vec<(Var, Vec<Rat>)> = inst
        .basis
        .iter()
        .zip(inst.b.iter().zip(&inst.a))
        .filter(|(_, (_, row))| row.iter().any(|v| !v.is_zero()))
        .map(|(&v, (b, row))| {
            (
                v,
                std::iter::once(b.clone())
                    .chain(row.iter().map(|x| -x))
                    .collect(),
            )
        })
        .collect();
    for (j, &v) in inst.nonbasis.iter().enumerate() {
        let mut f = vec![rat(0); d + 1];
        f[j + 1] = rat(1);
        funcs.push((v, f));
    }
    let normalized: Vec<(Var, Vec<Rat>)> = funcs
        .into_iter()
        .map(|(v, f)| {
            let lead = f[1..]
                .iter()
                .find(|x| !x.is_zero())
                .expect("nonconstant")
                .abs();
            (v, f.iter().map(|x| x / &lead).collect())
        })
        .collect();
    let mut out = Vec::new();
    for (i, (u, f)) in normalized.iter().enumerate() {
        for (w, g) in &normalized[i + 1..] {
            if f == g {
                out.push((*u.min(w), *u.max(w)));
            }
        }
    }
    out.sort();
    out
}

/// Samples `p > 0` and an integer `A`, then sets `b = A p_N + p_B` so that
/// `p` is interior. Samples with a zero column or with two constraints on
/// the same hyperplane are redrawn. Deterministic per seed.
pub fn gen_random_fulldim(n: usize, d: usize, seed: u64) -> Result<RandomInstance> {
    positive("n", n)?;
    positive("d", d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let p: Vec<i64> = (0..n + d).map(|_| rng.gen_range(1..=4)).collect();
        let a: Vec<Vec<Rat>> = (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| {
                        if rng.gen_bool(0.25) {
                            rat(0)
                        } else {
                            rat(rng.gen_range(-4..=4))
                        }
                    })
                    .collect()
            })
            .collect();
        if (0..d).any(|j| a.iter().all(|row| row[j].is_zero())) {
            continue;
        }
        let b = (0..n)
            .map(|i| {
                let s: Rat = (0..d).map(|j| &a[i][j] * rat(p[n + j])).sum();
                s + rat(p[i])
            })
            .collect();
        let instance = LpInstance::from_rows(b, a)?;
        if !duplicate_hyperplanes(&instance).is_empty() {
            continue;
        }
        let interior_point = instance
            .variables()
            .into_iter()
            .zip(p.into_iter().map(rat))
            .collect();
        return Ok(RandomInstance {
            instance,
            interior_point,
        });
    }
}
