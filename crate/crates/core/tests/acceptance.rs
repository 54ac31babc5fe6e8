use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use neurodecide::analysis::{
    default_prominence_threshold, detect_spikes, heading_change_around, selection_stats,
};
use neurodecide::coarse::{
    bifurcation_analysis, coarse_step, min_mu_star, mu_to_angle, solve_mu_star, CoarseConfig,
};
use neurodecide::nav::{
    bench_coarse_step_time, bench_step_time, run_scenario, ScenarioConfig, TrajectoryLog,
    COARSE_ND, PF, VISION_ND,
};
use neurodecide::neural::{
    jacobian, projected_rhs, step, DirectionField, EvidenceField, NeuralState, SigmoidParams,
};

const SEEDS: u64 = 40;
const VISION_SEEDS: u64 = 10;
const HEADING_WINDOW: usize = 10;
/// Criteria expected to report FAIL. The run fails if one of them passes.
const KNOWN_UNATTAINABLE: &[u32] = &[6];

struct Outcome {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn config(name: &str) -> ScenarioConfig {
    ScenarioConfig::from_path(configs_dir().join(name)).expect("pinned config loads")
}

fn runs(cfg: &ScenarioConfig, mode: &str, seeds: u64) -> Vec<TrajectoryLog> {
    (0..seeds)
        .map(|s| run_scenario(&cfg.with_seed(s), mode).expect("scenario runs"))
        .collect()
}

fn criterion_1() -> Outcome {
    let s = SigmoidParams::new(0.8, 6.0).unwrap();
    let (_, summary) = bifurcation_analysis((0.5, 2.0), 512, 0.0, &s).unwrap();
    match summary.mu_star {
        Some(mu) => verdict((mu - 1.56).abs() <= 0.01, format!("mu_star = {mu:.6}")),
        None => verdict(false, "no bifurcation reported"),
    }
}

fn criterion_2() -> Outcome {
    let (mu, alpha) = min_mu_star();
    let angle = mu_to_angle(mu).unwrap();
    let ok = (mu - 1.5644).abs() <= 5e-4
        && (alpha - 5.8696).abs() <= 5e-3
        && (angle - 124.4).abs() <= 1.0;
    verdict(
        ok,
        format!("mu_min = {mu:.6}, alpha_min = {alpha:.5}, theta = {angle:.3} deg"),
    )
}

fn criterion_3() -> Outcome {
    let none: Vec<bool> = [0.5, 1.0, 1.9]
        .iter()
        .map(|&a| solve_mu_star(a).is_none())
        .collect();
    let some: Vec<Option<f64>> = [2.1, 4.0, 6.0, 12.0]
        .iter()
        .map(|&a| solve_mu_star(a))
        .collect();
    let ok = none.iter().all(|&x| x) && some.iter().all(|x| x.is_some());
    verdict(
        ok,
        format!("none for [0.5, 1, 1.9]: {none:?}; roots: {some:.4?}"),
    )
}

fn random_population(rng: &mut ChaCha8Rng, k: usize) -> (EvidenceField, DirectionField) {
    let u = EvidenceField::new((0..k).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap();
    let p = DirectionField::from_unnormalized(
        (0..k)
            .map(|_| {
                nalgebra::Vector3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect(),
    )
    .unwrap();
    (u, p)
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_sum, mut min_n) = (0.0f64, f64::INFINITY);
    let (instances, steps) = (1000, 100);
    for _ in 0..instances {
        let k = rng.random_range(2..=64);
        let s =
            SigmoidParams::new(rng.random_range(0.05..3.0), rng.random_range(0.5..20.0)).unwrap();
        let mut n = NeuralState::uniform(k).unwrap();
        for _ in 0..steps {
            // Fresh evidence every step.
            let (u, p) = random_population(&mut rng, k);
            let dt = 1.0 - rng.random_range(0.0..1.0);
            n = step(&n, &u, &p, &s, dt).unwrap();
            let x = n.as_slice();
            worst_sum = worst_sum.max((x.iter().sum::<f64>() - 1.0).abs());
            min_n = min_n.min(x.iter().copied().fold(f64::INFINITY, f64::min));
        }
    }
    verdict(
        worst_sum < 1e-9 && min_n > 0.0,
        format!(
            "{} steps, max |1'n - 1| = {worst_sum:.2e}, min n = {min_n:.2e}",
            instances * steps
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let k = 12;
    let h = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (u, p) = random_population(&mut rng, k);
        let s =
            SigmoidParams::new(rng.random_range(0.1..2.0), rng.random_range(1.0..12.0)).unwrap();
        let mut n: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = n.iter().sum();
        n.iter_mut().for_each(|x| *x /= total);
        let jac = jacobian(&n, &u, &p, &s).unwrap();
        let mut fd = nalgebra::DMatrix::zeros(k, k);
        for j in 0..k {
            let (mut plus, mut minus) = (n.clone(), n.clone());
            plus[j] += h;
            minus[j] -= h;
            let fp = projected_rhs(&plus, &u, &p, &s).unwrap();
            let fm = projected_rhs(&minus, &u, &p, &s).unwrap();
            for i in 0..k {
                fd[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        worst = worst.max((&jac - &fd).norm() / jac.norm());
    }
    verdict(
        worst < 1e-5,
        format!("50 instances, max relative error {worst:.2e}"),
    )
}

/// Two five-pixel clusters at `±theta/2` among 290 zero-evidence pixels.
fn criterion_6() -> Outcome {
    let s = SigmoidParams::new(0.8, 6.0).unwrap();
    let (per, background) = (5usize, 290usize);
    let k = 2 * per + background;
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for theta_deg in [60.0f64, 100.0, 150.0] {
        let theta = theta_deg.to_radians();
        let mut angles = vec![theta / 2.0; per];
        angles.extend(vec![-theta / 2.0; per]);
        angles.extend((0..background).map(|i| -1.5 + 3.0 * i as f64 / background as f64));
        let mut u = vec![1.0; 2 * per];
        u.extend(vec![0.0; background]);
        let u = EvidenceField::new(u).unwrap();
        let p = DirectionField::planar(&angles);
        let bias = 0.55;
        let cluster_share = 2.0 * per as f64 / k as f64;
        let mut init: Vec<f64> = Vec::with_capacity(k);
        init.extend(vec![cluster_share * bias / per as f64; per]);
        init.extend(vec![cluster_share * (1.0 - bias) / per as f64; per]);
        init.extend(vec![1.0 / k as f64; background]);
        let mut n = NeuralState::new(init).unwrap();
        for _ in 0..20_000 {
            n = step(&n, &u, &p, &s, 0.5).unwrap();
        }
        let full = [n.mass(0..per), n.mass(per..2 * per)];

        let cfg = CoarseConfig::new(
            s,
            vec![per as f64; 2],
            DirectionField::planar(&[theta / 2.0, -theta / 2.0]),
        )
        .unwrap();
        let mut nbar = NeuralState::new(vec![bias, 1.0 - bias]).unwrap();
        for _ in 0..20_000 {
            nbar = coarse_step(&nbar, &cfg, 0.5).unwrap();
        }
        let coarse = nbar.as_slice();
        let gap = (full[0] - coarse[0]).abs().max((full[1] - coarse[1]).abs());
        worst = worst.max(gap);
        details.push(format!(
            "theta {theta_deg}: full ({:.4}, {:.4}) coarse ({:.4}, {:.4})",
            full[0], full[1], coarse[0], coarse[1]
        ));
    }
    verdict(
        worst <= 5e-2,
        format!("max gap {worst:.4}; {}", details.join("; ")),
    )
}

fn criterion_7() -> Outcome {
    let cfg = config("two_goal.toml");
    let nd = runs(&cfg, COARSE_ND, SEEDS);
    let nd_stats = selection_stats(&nd, cfg.targets.len()).unwrap();
    let pf = runs(&cfg, PF, SEEDS);
    let pf_stats = selection_stats(&pf, cfg.targets.len()).unwrap();
    let capture = 1.0 - nd_stats.none_rate;
    let left = nd_stats.frequencies[0];
    let pf_capture = 1.0 - pf_stats.none_rate;
    verdict(
        capture == 1.0 && (0.3..=0.7).contains(&left) && pf_capture == 0.0,
        format!("coarse-nd capture {capture:.3}, left {left:.3}; pf capture {pf_capture:.3}"),
    )
}

fn criterion_8() -> Outcome {
    let cfg = config("three_goal_asymmetric.toml");
    let logs = runs(&cfg, COARSE_ND, SEEDS);
    let stats = selection_stats(&logs, cfg.targets.len()).unwrap();
    // Targets 1 and 2 form the lower pair.
    let captured: usize = stats.counts.iter().sum();
    let lower = stats.counts[1] + stats.counts[2];
    let fraction = if captured == 0 {
        0.0
    } else {
        lower as f64 / captured as f64
    };
    verdict(
        captured > 0 && fraction >= 0.9,
        format!("counts {:?}, lower fraction {fraction:.3}", stats.counts),
    )
}

fn criterion_9() -> Outcome {
    let cfg = config("two_goal_vision.toml");
    let start = cfg.start_heading[1].atan2(cfg.start_heading[0]);
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for seed in 0..VISION_SEEDS {
        let log = run_scenario(&cfg.with_seed(seed), VISION_ND).unwrap();
        let series = log.lambda_series();
        let spikes = detect_spikes(&series, default_prominence_threshold(&series)).unwrap();
        let Some(capture) = log.reached.map(|_| log.steps - 1) else {
            failures.push(format!("seed {seed}: no capture"));
            continue;
        };
        let Some(first) = spikes.first().filter(|e| e.index < capture) else {
            failures.push(format!("seed {seed}: no spike before capture"));
            continue;
        };
        match heading_change_around(&log, start, first.index, HEADING_WINDOW) {
            Some((before, after)) if after > before => {
                summary.push(format!("t={:.2}s {before:.3}->{after:.3}", first.time))
            }
            Some((before, after)) => failures.push(format!(
                "seed {seed}: heading change {after:.3} after vs {before:.3} before"
            )),
            None => failures.push(format!("seed {seed}: spike too close to the log edge")),
        }
    }
    let ok = failures.is_empty();
    let detail = if ok {
        format!("{VISION_SEEDS} seeds; first spikes {}", summary.join(", "))
    } else {
        failures.join("; ")
    };
    verdict(ok, detail)
}

fn criterion_10() -> Outcome {
    let full = bench_step_time(2048, 200).unwrap();
    let r2 = bench_coarse_step_time(2, 1000).unwrap();
    let r3 = bench_coarse_step_time(3, 1000).unwrap();
    verdict(
        full.mean_ms < 5.0 && r2.mean_ms < 1.0 && r3.mean_ms < 1.0,
        format!(
            "k=2048 {:.4} ms, r=2 {:.5} ms, r=3 {:.5} ms",
            full.mean_ms, r2.mean_ms, r3.mean_ms
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome, Duration); 10] = [
        (1, criterion_1, Duration::from_secs(1)),
        (2, criterion_2, Duration::from_secs(1)),
        (3, criterion_3, Duration::from_secs(1)),
        (4, criterion_4, Duration::from_secs(30)),
        (5, criterion_5, Duration::from_secs(10)),
        (6, criterion_6, Duration::from_secs(30)),
        (7, criterion_7, Duration::from_secs(120)),
        (8, criterion_8, Duration::from_secs(120)),
        (9, criterion_9, Duration::from_secs(120)),
        (10, criterion_10, Duration::from_secs(60)),
    ];
    let (mut passed_count, mut unexpected) = (0, 0);
    for (id, run, budget) in criteria {
        let started = Instant::now();
        let outcome = run();
        let elapsed = started.elapsed();
        let in_budget = elapsed <= budget;
        let passed = outcome.passed && in_budget;
        let expected_fail = KNOWN_UNATTAINABLE.contains(&id);
        if passed {
            passed_count += 1;
        }
        if passed == expected_fail {
            unexpected += 1;
        }
        let note = match (passed, expected_fail) {
            (false, true) => " [known unattainable]",
            (true, true) => " [expected to fail, now passes]",
            _ => "",
        };
        println!(
            "criterion {id:>2}: {} ({:.2}s of {}s) {}{}{note}",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            outcome.detail,
            if in_budget { "" } else { " [over time budget]" }
        );
    }
    println!(
        "acceptance: {passed_count} passed, {} failed, {unexpected} unexpected",
        10 - passed_count
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
