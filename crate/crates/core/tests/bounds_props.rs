mod common;

use common::{H2_QUARTER, ONE_MINUS_H2_EIGHTH, ONE_MINUS_H2_QUARTER};
use fsc_capacity::bounds::{lower_bound_fn, reevaluate, upper_bound_fn, BoundKind, Witness};
use fsc_capacity::channel::{family_qlambda, CondTensor};
use fsc_capacity::rat::{parse_rat, rat};
use fsc_capacity::{
    capacity_to_precision, effective_limit, BoundsEngine, Bracket, Family, FscParams, LimitOutcome, PrecisionOutcome,
    RealInterval, SolverConfig,
};

fn qhat() -> FscParams {
    Family::PQhat { eps: rat(1, 4) }.build().unwrap()
}

fn qlambda_half() -> FscParams {
    Family::PQlambda { eps: rat(1, 4), lambda: rat(1, 2) }.build().unwrap()
}

fn memoryless_bsc() -> FscParams {
    let p = CondTensor::from_fn(2, 2, 2, |y, x, _| if y == x { rat(3, 4) } else { rat(1, 4) });
    FscParams::new(p, family_qlambda(&rat(1, 3)).unwrap()).unwrap()
}

fn encloses(iv: &RealInterval, v: f64, slack: f64) -> bool {
    iv.lo_f64() - slack <= v && v <= iv.hi_f64() + slack
}

#[test]
fn absorbing_family_block_bounds() {
    let cfg = SolverConfig::default();
    let fsc = qhat();
    for n in 1..=4 {
        let hi = upper_bound_fn(&fsc, n, &cfg).unwrap();
        let lo = lower_bound_fn(&fsc, n, &cfg).unwrap();
        assert!(encloses(&hi.value, 1.0, 1e-6), "n = {n}: {}", hi.value);
        assert_eq!(hi.s0_star, 0);
        assert!(encloses(&lo.value, ONE_MINUS_H2_QUARTER, 1e-6), "n = {n}: {}", lo.value);
        assert_eq!(lo.s0_star, 1);
        assert!(lo.value.lo_f64() <= ONE_MINUS_H2_QUARTER);
    }
}

/// From the second letter on the state is a fair coin the receiver cannot
/// see, so each later letter is a BSC(1/8).
fn qlambda_closed_forms(n: u32) -> (f64, f64) {
    let tail = (n - 1) as f64 * ONE_MINUS_H2_EIGHTH;
    ((ONE_MINUS_H2_QUARTER + tail) / n as f64, (1.0 + tail) / n as f64)
}

#[test]
fn mixing_family_block_bounds_match_closed_forms() {
    let engine = BoundsEngine::new(SolverConfig::default());
    let fsc = qlambda_half();
    for n in 1..=6 {
        let b = engine.block_bounds(&fsc, n).unwrap();
        let (lo, hi) = qlambda_closed_forms(n);
        assert!(b.lower.value.lo_f64() <= lo + 1e-12, "n = {n}");
        assert!(b.upper.value.hi_f64() >= hi - 1e-12, "n = {n}");
        assert!((b.lower.value.mid_f64() - lo).abs() < 1e-5, "n = {n}: {} vs {lo}", b.lower.value);
        assert!((b.upper.value.mid_f64() - hi).abs() < 1e-5, "n = {n}: {} vs {hi}", b.upper.value);
        assert!(!b.lower.stalled);
    }
}

#[test]
fn absorbing_family_gap_persists() {
    let engine = BoundsEngine::new(SolverConfig::default());
    let fsc = qhat();
    for m in 0..=2 {
        let r = engine.sandwich(&fsc, m).unwrap();
        assert!(r.gap.lo_f64() >= H2_QUARTER - 1e-6, "M = {m}: gap {}", r.gap);
        assert!(r.upper.value.contains_rat(&rat(1, 1)), "M = {m}");
        assert!(r.lower.value.hi_f64() <= ONE_MINUS_H2_QUARTER + 1e-6);
        // Corrections push the lower bound below zero through M = 2.
        assert!(r.lower.value.contains_rat(&rat(0, 1)));
    }
}

#[test]
fn mixing_family_brackets_contain_capacity() {
    let engine = BoundsEngine::new(SolverConfig::default());
    let fsc = qlambda_half();
    let mut prev: Option<(RealInterval, RealInterval)> = None;
    for m in 0..=2 {
        let r = engine.sandwich(&fsc, m).unwrap();
        assert!(r.lower.value.lo_f64() <= ONE_MINUS_H2_EIGHTH + 1e-6);
        assert!(r.upper.value.hi_f64() >= ONE_MINUS_H2_EIGHTH - 1e-6);
        if let Some((lo, hi)) = &prev {
            assert!(r.lower.value.lo() >= lo.lo());
            assert!(r.upper.value.hi() <= hi.hi());
        }
        prev = Some((r.lower.value.clone(), r.upper.value.clone()));
    }
}

#[test]
fn sandwich_is_monotone_on_random_channels() {
    let engine = BoundsEngine::new(SolverConfig::default());
    for fsc in common::binary_suite() {
        let mut prev: Option<(RealInterval, RealInterval)> = None;
        for m in 0..=2 {
            let r = engine.sandwich(&fsc, m).unwrap();
            assert!(r.lower.value.lo() <= r.upper.value.hi());
            if let Some((lo, hi)) = &prev {
                assert!(r.lower.value.lo() >= lo.lo(), "lower regressed at M = {m}");
                assert!(r.upper.value.hi() <= hi.hi(), "upper regressed at M = {m}");
            }
            assert!(r.verify(&fsc, 64).unwrap(), "certificate check failed at M = {m}");
            prev = Some((r.lower.value.clone(), r.upper.value.clone()));
        }
    }
}

#[test]
fn certificates_reevaluate_to_their_values() {
    let engine = BoundsEngine::new(SolverConfig::default());
    for fsc in common::binary_suite().iter().take(10) {
        for n in 1..=3 {
            let b = engine.block_bounds(fsc, n).unwrap();
            for cert in [&b.lower, &b.upper] {
                let again = reevaluate(cert, fsc, 64).unwrap();
                let slack = again.width() + cert.value.width();
                match cert.kind {
                    BoundKind::Lower => assert!(again.lo() >= cert.value.lo() - slack.clone()),
                    BoundKind::Upper => assert!(again.hi() <= cert.value.hi() + slack),
                }
            }
            assert!(b.lower.value.lo() <= b.upper.value.hi());
            let cap = b.lower.cap.as_ref().unwrap();
            assert!(b.lower.value.lo() <= cap.hi());
        }
    }
}

#[test]
fn identical_slices_make_bounds_meet() {
    let cfg = SolverConfig::default();
    let fsc = memoryless_bsc();
    let lo = lower_bound_fn(&fsc, 1, &cfg).unwrap();
    let hi = upper_bound_fn(&fsc, 1, &cfg).unwrap();
    assert!(hi.value.hi_f64() - lo.value.lo_f64() <= 1e-6);
    assert!(encloses(&lo.value, ONE_MINUS_H2_QUARTER, 1e-6));
}

#[test]
fn state_blind_witness_is_single_letter() {
    let engine = BoundsEngine::new(SolverConfig::default());
    let fsc = memoryless_bsc();
    let b = engine.block_bounds(&fsc, 6).unwrap();
    assert_eq!(b.lower.n_star, 6);
    match &b.lower.witness {
        Witness::Input { distribution } => assert_eq!(distribution.block_len(), 1),
        other => panic!("{other:?}"),
    }
    assert!(encloses(&b.upper.value, ONE_MINUS_H2_QUARTER, 1e-6));
}

#[test]
fn useless_channel_has_zero_capacity() {
    let p = CondTensor::from_fn(2, 2, 2, |y, _, s| if y == s { rat(2, 3) } else { rat(1, 3) });
    let fsc = FscParams::new(p, family_qlambda(&rat(1, 2)).unwrap()).unwrap();
    let hi = upper_bound_fn(&fsc, 1, &SolverConfig::default()).unwrap();
    assert!(hi.value.contains_rat(&rat(0, 1)));
    assert!(hi.value.hi_f64() < 1e-12);
}

#[test]
fn absorbing_family_never_converges() {
    let out = capacity_to_precision(&qhat(), 1, 3, &SolverConfig::default()).unwrap();
    match &out {
        PrecisionOutcome::Partial { stage, report } => {
            assert_eq!(*stage, 3);
            assert!(report.gap.lo_f64() >= H2_QUARTER - 1e-6);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn memoryless_channel_converges() {
    let out = capacity_to_precision(&memoryless_bsc(), 4, 12, &SolverConfig::default()).unwrap();
    match out {
        PrecisionOutcome::Converged { interval, stage, .. } => {
            // 2 log2|S| / 2^M plus solver slack must drop below 2^-6.
            assert_eq!(stage, 8);
            assert!(interval.width_f64() < 1.0 / 16.0);
            assert!(encloses(&interval, ONE_MINUS_H2_QUARTER, 0.0));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn stage_budget_is_clamped_to_feasible_blocks() {
    let fsc = qlambda_half();
    assert_eq!(fsc_capacity::max_feasible_stage(&fsc), 3);
    assert_eq!(fsc_capacity::max_feasible_stage(&memoryless_bsc()), fsc_capacity::MAX_STAGE);
}

#[test]
fn slowly_converging_pair_stops_at_the_crossing() {
    // lo = 1 - 1/(M + 1), hi = 1 + 1/(M + 1): width 2/(M + 1) < 2^-(N+2)
    // first holds at M = 2^(N+3).
    let bracket = |m: u32| {
        let d = rat(1, m as i64 + 1);
        Ok(Bracket {
            lower: RealInterval::from_rat(&(rat(1, 1) - &d), 64),
            upper: RealInterval::from_rat(&(rat(1, 1) + &d), 64),
        })
    };
    for n in 0..4u32 {
        let expect = 1u32 << (n + 3);
        let threshold = rat(1, 1 << (n + 2));
        assert!(rat(2, expect as i64 + 1) < threshold);
        assert!(rat(2, expect as i64) >= threshold);
        match effective_limit(bracket, n, 200).unwrap() {
            LimitOutcome::Converged { stage, interval } => {
                assert_eq!(stage, expect);
                assert!(interval.contains_rat(&rat(1, 1)));
            }
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn report_json_rationals_round_trip() {
    let engine = BoundsEngine::new(SolverConfig::default());
    let r = engine.sandwich(&qlambda_half(), 1).unwrap();
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    let lo = v["lower"]["value"]["lo"].as_str().unwrap();
    assert_eq!(parse_rat(lo).unwrap(), r.lower.value.lo());
    let hi = v["upper"]["value"]["hi"].as_str().unwrap();
    assert_eq!(parse_rat(hi).unwrap(), r.upper.value.hi());
}
