use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coarse::{coarse_step, CoarseConfig};
use crate::error::{invalid, Result};
use crate::neural::{step, DirectionField, EvidenceField, NeuralState, SigmoidParams, DEFAULT_DT};

pub const MIN_BENCH_REPEATS: usize = 30;
const WARMUP: usize = 5;
const BENCH_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepTiming {
    pub k: usize,
    pub repeats: usize,
    pub mean_ms: f64,
    pub std_ms: f64,
}

fn timing(k: usize, samples: &[f64]) -> StepTiming {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    StepTiming {
        k,
        repeats: samples.len(),
        mean_ms: mean,
        std_ms: var.sqrt(),
    }
}

fn check(k: usize, repeats: usize) -> Result<()> {
    if k < 2 {
        return Err(invalid("k", format!("need at least 2, got {k}")));
    }
    if repeats < MIN_BENCH_REPEATS {
        return Err(invalid(
            "repeats",
            format!("need at least {MIN_BENCH_REPEATS}, got {repeats}"),
        ));
    }
    Ok(())
}

fn time_ms(mut f: impl FnMut()) -> f64 {
    let t = Instant::now();
    f();
    t.elapsed().as_secs_f64() * 1e3
}

/// Wall-clock statistics of one full neural step at population size `k`
/// on a seeded random instance, after a short warm-up.
pub fn bench_step_time(k: usize, repeats: usize) -> Result<StepTiming> {
    check(k, repeats)?;
    let mut rng = ChaCha8Rng::seed_from_u64(BENCH_SEED);
    let u = EvidenceField::new((0..k).map(|_| rng.random_range(0.0..1.0)).collect())?;
    let angles: Vec<f64> = (0..k).map(|_| rng.random_range(-1.2..1.2)).collect();
    let p = DirectionField::planar(&angles);
    let params = SigmoidParams::new(8.0 / k as f64, 4.2)?;
    let mut n = NeuralState::uniform(k)?;
    for _ in 0..WARMUP {
        n = step(&n, &u, &p, &params, DEFAULT_DT)?;
    }
    let mut samples = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let mut next = None;
        samples.push(time_ms(|| {
            next = Some(step(black_box(&n), &u, &p, &params, DEFAULT_DT));
        }));
        n = next.expect("timed closure ran")?;
    }
    Ok(timing(k, &samples))
}

/// Same measurement for the coarse model with `r` options.
pub fn bench_coarse_step_time(r: usize, repeats: usize) -> Result<StepTiming> {
    check(r, repeats)?;
    let angles: Vec<f64> = (0..r)
        .map(|s| 0.9 * s as f64 - 0.45 * (r - 1) as f64)
        .collect();
    let config = CoarseConfig::equal(
        SigmoidParams::new(2.0, 6.0)?,
        DirectionField::planar(&angles),
    )?;
    let mut n = NeuralState::uniform(r)?;
    for _ in 0..WARMUP {
        n = coarse_step(&n, &config, DEFAULT_DT)?;
    }
    let mut samples = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let mut next = None;
        samples.push(time_ms(|| {
            next = Some(coarse_step(black_box(&n), &config, DEFAULT_DT));
        }));
        n = next.expect("timed closure ran")?;
    }
    Ok(timing(r, &samples))
}
