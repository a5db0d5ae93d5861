mod common;

use fsc_capacity::channel::{decode, family_p, family_qhat, CondTensor};
use fsc_capacity::rat::rat;
use fsc_capacity::{
    geometric_gap_profile, indecomposable_test, indecomposable_test_with, state_kernel, Family, FscParams,
    IndecompError, IndecompOptions, KernelMethod, Rat,
};
use num_traits::{One, Signed, Zero};

/// Worst kernel gap by direct enumeration, no shortcuts.
fn brute_gap(fsc: &FscParams, n: usize) -> Rat {
    let mut worst = Rat::zero();
    for xc in 0..fsc.nx().pow(n as u32) {
        let x = decode(xc, fsc.nx(), n);
        let kernels: Vec<Vec<Rat>> = (0..fsc.ns()).map(|s0| state_kernel(fsc, &x, s0).unwrap()).collect();
        for a in &kernels {
            for b in &kernels {
                for (u, v) in a.iter().zip(b) {
                    let g = (u - v).abs();
                    if g > worst {
                        worst = g;
                    }
                }
            }
        }
    }
    worst
}

/// `(1 - 2 lambda)^n` by exact matrix power of the symmetric flip chain.
fn flip_chain_gap(lambda: &Rat, n: u32) -> Rat {
    let mut m = [[Rat::one() - lambda, lambda.clone()], [lambda.clone(), Rat::one() - lambda]];
    let base = m.clone();
    for _ in 1..n {
        let mut next = [[Rat::zero(), Rat::zero()], [Rat::zero(), Rat::zero()]];
        for i in 0..2 {
            for j in 0..2 {
                next[i][j] = &m[i][0] * &base[0][j] + &m[i][1] * &base[1][j];
            }
        }
        m = next;
    }
    (&m[0][0] - &m[1][0]).abs()
}

#[test]
fn flip_chain_decay_is_exact() {
    for k in [1u64, 2, 3, 7] {
        let fsc = Family::PQk { eps: rat(1, 4), k }.build().unwrap();
        let lambda = rat(1, k as i64 + 1);
        for n in 1..=5 {
            let r = indecomposable_test(&fsc, n, &rat(0, 1)).unwrap();
            assert_eq!(r.worst_gap, flip_chain_gap(&lambda, n), "k = {k}, n = {n}");
        }
    }
    let fsc = Family::PQk { eps: rat(1, 4), k: 3 }.build().unwrap();
    for n in 1..=3 {
        assert_eq!(indecomposable_test(&fsc, n, &rat(0, 1)).unwrap().worst_gap, rat(1, 1 << n));
    }
}

#[test]
fn named_families() {
    let qhat = Family::PQhat { eps: rat(1, 4) }.build().unwrap();
    for n in 1..=8 {
        let r = indecomposable_test(&qhat, n, &rat(1, 2)).unwrap();
        assert_eq!(r.worst_gap, rat(1, 1));
        assert!(!r.pass);
    }
    let profile = geometric_gap_profile(&qhat, 4).unwrap();
    assert!(profile.iter().all(|(_, g)| *g == rat(1, 1)));
    let mix = Family::PQlambda { eps: rat(1, 4), lambda: rat(1, 2) }.build().unwrap();
    let profile = geometric_gap_profile(&mix, 4).unwrap();
    assert!(profile.iter().all(|(_, g)| g.is_zero()));
}

#[test]
fn shortcut_and_methods_agree_with_brute_force() {
    let mut r = common::rng(21);
    for i in 0..30 {
        let (nx, ns) = if i % 2 == 0 { (2, 2) } else { (2, 3) };
        let fsc = common::random_fsc(&mut r, nx, 2, ns);
        for n in 1..=4u32 {
            let by_q = indecomposable_test(&fsc, n, &rat(0, 1)).unwrap();
            let by_joint = indecomposable_test_with(
                &fsc,
                n,
                &rat(0, 1),
                &IndecompOptions { method: KernelMethod::JointMarginal, ..IndecompOptions::default() },
            )
            .unwrap();
            assert_eq!(by_q.worst_gap, by_joint.worst_gap);
            assert_eq!(by_q.argmax_witness, by_joint.argmax_witness);
            assert_eq!(by_q.worst_gap, brute_gap(&fsc, n as usize));
            let w = &by_q.argmax_witness;
            let a = state_kernel(&fsc, &w.x_seq, w.s0).unwrap();
            let b = state_kernel(&fsc, &w.x_seq, w.s0_other).unwrap();
            assert_eq!(&a[w.s_n] - &b[w.s_n], by_q.worst_gap);
        }
    }
}

#[test]
fn input_independent_laws_use_one_sequence() {
    let mut r = common::rng(22);
    for _ in 0..10 {
        let rows: Vec<Vec<Rat>> = (0..3).map(|_| common::random_law(&mut r, 3)).collect();
        let q = CondTensor::from_fn(3, 2, 3, |o, _, s| rows[s][o].clone());
        let fsc = FscParams::new(common::random_tensor(&mut r, 3, 2, 2), q).unwrap();
        for n in 1..=4 {
            let rep = indecomposable_test(&fsc, n, &rat(0, 1)).unwrap();
            assert!(rep.input_independent);
            assert_eq!(rep.worst_gap, brute_gap(&fsc, n as usize));
        }
    }
}

#[test]
fn positive_chains_contract() {
    let mut r = common::rng(23);
    for _ in 0..10 {
        let rows: Vec<Vec<Rat>> = (0..3)
            .map(|_| loop {
                let law = common::random_law(&mut r, 3);
                if law.iter().all(|p| !p.is_zero()) {
                    break law;
                }
            })
            .collect();
        let q = CondTensor::from_fn(3, 2, 3, |o, _, s| rows[s][o].clone());
        let fsc = FscParams::new(common::random_tensor(&mut r, 3, 2, 2), q).unwrap();
        let profile = geometric_gap_profile(&fsc, 7).unwrap();
        for pair in profile.windows(2) {
            assert!(pair[1].1 <= pair[0].1, "{profile:?}");
        }
    }
}

#[test]
fn gap_ignores_the_output_law() {
    let mut r = common::rng(24);
    for _ in 0..10 {
        let fsc = common::random_fsc(&mut r, 2, 3, 2);
        let permuted = CondTensor::from_fn(2, 2, 3, |y, x, s| fsc.p().get((y + 1) % 3, x, s).clone());
        let relabeled = FscParams::new(permuted, fsc.q().clone()).unwrap();
        for n in 1..=3 {
            assert_eq!(
                indecomposable_test(&fsc, n, &rat(0, 1)).unwrap().worst_gap,
                indecomposable_test(&relabeled, n, &rat(0, 1)).unwrap().worst_gap
            );
        }
    }
}

#[test]
fn enumeration_cap_is_enforced() {
    let mut r = common::rng(25);
    let fsc = common::random_fsc(&mut r, 2, 2, 2);
    assert!(!fsc.q().is_input_independent());
    match indecomposable_test(&fsc, 17, &rat(0, 1)) {
        Err(IndecompError::Budget { sequences, cap }) => {
            assert_eq!(sequences, 1 << 17);
            assert_eq!(cap, 1 << 16);
        }
        other => panic!("{other:?}"),
    }
    // Input-independent laws skip enumeration and are never capped.
    let qhat = FscParams::new(family_p(&rat(1, 4)).unwrap(), family_qhat()).unwrap();
    assert!(indecomposable_test(&qhat, 40, &rat(0, 1)).is_ok());
}
