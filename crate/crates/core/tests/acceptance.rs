//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any fails.

use std::time::{Duration, Instant};

use mermin_core::exact::{eta_factorizes, InvarianceReport};
use mermin_core::model::{InstructionSet, PairState};
use mermin_core::rational::ratio;
use mermin_core::stats::{chi_square_uniform, DEFAULT_Z_THRESHOLD, INDEPENDENCE_ALPHA};
use mermin_core::{
    analyze, builtin_distribution, case_b_same_fraction, compare, conditional_stats,
    detector_invariance_check, enumerate_joint, estimate_stats, min_case_b_no_noflash,
    regularized_gamma_q, run_trials, settings_independence_test, DetectorModel,
    ExperimentConfig, SimulationPlan, SourceDistribution,
};
use num_rational::BigRational;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn config(name: &str) -> ExperimentConfig {
    ExperimentConfig::new(builtin_distribution(name).unwrap())
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ac1_table1_exact() -> Outcome {
    let start = Instant::now();
    let st = analyze(&config("table1_uniform")).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(st.p_same_case_a == Some(ratio(1, 1)), "p_same_case_a != 1")?;
    ensure(st.p_same_case_b == Some(ratio(1, 4)), "p_same_case_b != 1/4")?;
    ensure(st.eta_a == ratio(5, 6) && st.eta_b == ratio(5, 6), "eta != 5/6")?;
    ensure(
        st.coincidence_rate.iter().flatten().all(|c| *c == Some(ratio(2, 3))),
        "coincidence rate not 2/3 in every cell",
    )?;
    ensure(elapsed < Duration::from_millis(10), format!("took {elapsed:?}"))?;
    Ok(format!("1, 1/4, 5/6, 5/6, 9 x 2/3 in {elapsed:?}"))
}

fn ac2_conundrum_baseline() -> Outcome {
    let two_one = analyze(&config("two_one_uniform")).unwrap();
    ensure(two_one.p_same_case_b == Some(ratio(1, 3)), "two_one_uniform case b != 1/3")?;
    let eight = analyze(&config("all_eight_uniform")).unwrap();
    ensure(eight.p_same_case_b == Some(ratio(1, 2)), "all_eight_uniform case b != 1/2")?;
    let m = min_case_b_no_noflash();
    ensure(m.value == ratio(1, 3), "minimum != 1/3")?;
    let homogeneous: Vec<InstructionSet> = ["RRR", "GGG"].iter().map(|s| s.parse().unwrap()).collect();
    ensure(
        m.support.iter().all(|s| !homogeneous.contains(s)),
        "support contains a homogeneous set",
    )?;
    Ok(format!("1/3, 1/2, min 1/3 on {} two-one sets", m.support.len()))
}

fn ac3_detector_loss_invariance() -> Outcome {
    let ps = [ratio(0, 1), ratio(1, 5), ratio(1, 2)];
    let mut checked = 0;
    for name in ["table1_uniform", "two_one_uniform"] {
        let rep: InvarianceReport = detector_invariance_check(&config(name), &ps).map_err(|e| e.to_string())?;
        ensure(rep.conditionals_invariant, format!("{name}: conditionals change with p"))?;
        ensure(rep.coincidence_scaling_holds, format!("{name}: coincidence rates do not scale"))?;
        for pt in &rep.points {
            let keep = BigRational::from_integer(1.into()) - &pt.p;
            let s = &pt.stats;
            ensure(
                Some(&s.eta_a) == s.eta_u_a.as_ref().map(|u| u * &keep).as_ref()
                    && Some(&s.eta_b) == s.eta_u_b.as_ref().map(|u| u * &keep).as_ref(),
                format!("{name}: eta != (1-p) eta_u"),
            )?;
            ensure(eta_factorizes(s), format!("{name}: eta != eta_u eta_f"))?;
            checked += 1;
        }
    }
    // unequal detectors and the remaining builtins
    for name in ["all_eight_uniform", "single(GNR-GGR)", "table1_uniform"] {
        let cfg = config(name).with_detectors(
            DetectorModel::new(ratio(1, 5)).unwrap(),
            DetectorModel::new(ratio(1, 2)).unwrap(),
        );
        ensure(eta_factorizes(&analyze(&cfg).unwrap()), format!("{name}: eta != eta_u eta_f"))?;
        checked += 1;
    }
    Ok(format!("{checked} configs exact"))
}

fn ac4_convergence() -> Outcome {
    let mut total = Duration::ZERO;
    let mut rows = 0;
    for name in ["table1_uniform", "two_one_uniform", "all_eight_uniform", "single(GNR-GGR)"] {
        let cfg = config(name);
        let exact = analyze(&cfg).unwrap();
        let start = Instant::now();
        // one stream runs on one thread
        let tally = run_trials(&SimulationPlan::new(cfg, 1_000_000, 2024).with_streams(1)).unwrap();
        total += start.elapsed();
        let report = compare(&exact, &estimate_stats(&tally), DEFAULT_Z_THRESHOLD);
        if let Some(bad) = report.failures().next() {
            return Err(format!("{name}: {} exact {:?} est {:?} z {:?}", bad.name, bad.exact, bad.estimate, bad.z));
        }
        rows += report.rows.len();
    }
    ensure(total < Duration::from_secs(5), format!("simulation took {total:?}"))?;
    Ok(format!("{rows} fields within 5 SE, 4 x 10^6 trials in {total:?}"))
}

fn ac5_determinism() -> Outcome {
    let plan = SimulationPlan::new(config("table1_uniform"), 1_000_000, 1);
    let reference = run_trials(&plan.clone().with_streams(1)).unwrap();
    for streams in [1, 4, 8] {
        for _ in 0..2 {
            let t = run_trials(&plan.clone().with_streams(streams)).unwrap();
            ensure(t == reference, format!("{streams} streams differ"))?;
        }
    }
    Ok("1, 4, 8 streams identical, re-runs identical".into())
}

fn ac6_settings_independence() -> Outcome {
    let mut ps = Vec::new();
    for seed in [7, 8, 9] {
        let t = run_trials(&SimulationPlan::new(config("table1_uniform"), 1_000_000, seed).with_streams(4)).unwrap();
        let r = settings_independence_test(&t).map_err(|e| e.to_string())?;
        ensure(r.passes(INDEPENDENCE_ALPHA), format!("seed {seed}: p = {}", r.p_value))?;
        ps.push(format!("{:.3}", r.p_value));
    }
    let mut zeroed = [[1125u64; 3]; 3];
    zeroed[2][0] = 0;
    let r = chi_square_uniform(zeroed).unwrap();
    ensure(r.p_value < 1e-6, format!("zeroed cell p = {}", r.p_value))?;
    Ok(format!("p-values {} > 0.001; zeroed cell p = {:.1e}", ps.join(", "), r.p_value))
}

fn ac7_oracle_equivalence() -> Outcome {
    for set in InstructionSet::all_without_no_flash() {
        let direct = case_b_same_fraction(&set).unwrap();
        let table = enumerate_joint(&ExperimentConfig::new(SourceDistribution::single(PairState::identical(set)))).unwrap();
        let via_table = conditional_stats(&table).p_same_case_b;
        ensure(via_table.as_ref() == Some(&direct), format!("{set}: {direct} vs {via_table:?}"))?;
    }
    Ok("8 of 8 sets agree".into())
}

/// Q(a, x) for integer or half-integer `a` by finite sums.
fn gamma_q_closed_form(a: f64, x: f64) -> f64 {
    let twice = (2.0 * a).round() as u32;
    if twice.is_multiple_of(2) {
        // e^-x * sum_{k<a} x^k / k!
        let n = twice / 2;
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 0..n {
            if k > 0 {
                term *= x / k as f64;
            }
            sum += term;
        }
        (-x).exp() * sum
    } else {
        // erfc(sqrt x) + e^-x * sum_{k<n} x^(k+1/2) / Gamma(k+3/2)
        let n = twice / 2;
        let mut gamma = std::f64::consts::PI.sqrt() / 2.0;
        let mut sum = 0.0;
        for k in 0..n {
            sum += x.powf(k as f64 + 0.5) / gamma;
            gamma *= k as f64 + 1.5;
        }
        statrs::function::erf::erfc(x.sqrt()) + (-x).exp() * sum
    }
}

fn ac8_gamma_kernel() -> Outcome {
    let grid = [
        (0.5, 0.1), (0.5, 1.0), (0.5, 5.0), (1.0, 0.5), (1.0, 3.0),
        (1.5, 0.2), (1.5, 2.5), (2.0, 1.0), (2.0, 7.0), (2.5, 2.0),
        (3.0, 0.5), (3.0, 4.0), (4.0, 8.0), (4.0, 2.0), (4.5, 10.0),
        (5.0, 3.0), (5.0, 6.0), (10.0, 5.0), (10.0, 15.0), (20.0, 18.0),
    ];
    let mut worst: f64 = 0.0;
    for (a, x) in grid {
        let got = regularized_gamma_q(a, x).unwrap();
        let want = gamma_q_closed_form(a, x);
        let err = (got - want).abs();
        worst = worst.max(err);
        ensure(err <= 1e-10, format!("Q({a}, {x}) = {got}, oracle {want}"))?;
    }
    Ok(format!("20 points, max |error| {worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("AC1 exact oracle, Table I", ac1_table1_exact),
        ("AC2 exact oracle, conundrum baseline", ac2_conundrum_baseline),
        ("AC3 detector-loss invariance", ac3_detector_loss_invariance),
        ("AC4 Monte Carlo convergence", ac4_convergence),
        ("AC5 determinism", ac5_determinism),
        ("AC6 settings-independence test", ac6_settings_independence),
        ("AC7 small-instance oracle equivalence", ac7_oracle_equivalence),
        ("AC8 regularized gamma Q kernel", ac8_gamma_kernel),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
