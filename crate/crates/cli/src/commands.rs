use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use neurodecide::analysis::{selection_stats, SelectionStats};
use neurodecide::coarse::{bifurcation_analysis, write_branches_csv, BifurcationSummary};
use neurodecide::io::fmt_f64;
use neurodecide::nav::{bench_step_time, run_scenario, ScenarioConfig, TrajectoryLog};
use neurodecide::neural::SigmoidParams;

use crate::manifest::{
    git_describe, write_atomic, write_json, RunManifest, MANIFEST_FILE, OUTPUT_SCHEMA_VERSION,
};

pub const THREADS_ENV: &str = "NEURODECIDE_THREADS";

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let n: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .with_context(|| format!("{THREADS_ENV} must be a positive integer, got `{value}`"))?;
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

fn prepare_out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out)
        .with_context(|| format!("cannot create output directory {}", out.display()))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[derive(Serialize)]
struct SelectionReport<'a> {
    schema_version: u32,
    manifest: &'static str,
    scenario: &'a str,
    mode: &'a str,
    seeds: &'a [u64],
    reached: Vec<Option<usize>>,
    steps: Vec<usize>,
    stats: SelectionStats,
}

pub fn run(
    args: &[String],
    config_path: &Path,
    mode: &str,
    seeds: u64,
    out: &Path,
    strict: bool,
) -> Result<()> {
    let started = Instant::now();
    let config = ScenarioConfig::from_path(config_path)?;
    prepare_out_dir(out)?;
    let seed_list: Vec<u64> = (0..seeds).map(|i| config.seed.wrapping_add(i)).collect();
    let pool = thread_pool()?;
    let logs: Vec<TrajectoryLog> = pool.install(|| {
        seed_list
            .par_iter()
            .map(|&seed| run_scenario(&config.with_seed(seed), mode))
            .collect::<neurodecide::Result<_>>()
    })?;

    let stem = if config.name.is_empty() {
        config_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".into())
    } else {
        config.name.clone()
    };
    let mut outputs = Vec::new();
    for log in &logs {
        let path = out.join(format!("{stem}_{mode}_seed{}.csv", log.seed));
        let mut buf = Vec::new();
        log.write_csv(&mut buf)?;
        write_atomic(&path, &buf)?;
        outputs.push(file_name(&path));
    }
    let report = SelectionReport {
        schema_version: OUTPUT_SCHEMA_VERSION,
        manifest: MANIFEST_FILE,
        scenario: &stem,
        mode,
        seeds: &seed_list,
        reached: logs.iter().map(|l| l.reached).collect(),
        steps: logs.iter().map(|l| l.steps).collect(),
        stats: selection_stats(&logs, config.targets.len())?,
    };
    let stats_path = out.join(format!("{stem}_{mode}_selection.json"));
    write_json(&stats_path, &report)?;
    outputs.push(file_name(&stats_path));

    let unreached: Vec<u64> = logs
        .iter()
        .filter(|l| l.reached.is_none())
        .map(|l| l.seed)
        .collect();
    if strict && !unreached.is_empty() {
        bail!(
            "{} of {} seeds exhausted max_steps = {} without a capture: {unreached:?}",
            unreached.len(),
            logs.len(),
            config.max_steps
        );
    }
    let manifest = RunManifest {
        schema_version: OUTPUT_SCHEMA_VERSION,
        command: "run".into(),
        args: args.to_vec(),
        config_path: Some(config_path.to_path_buf()),
        seeds: seed_list.clone(),
        out_dir: out.to_path_buf(),
        outputs,
        git_describe: git_describe(),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    manifest.write()?;
    println!(
        "{} runs, capture counts {:?}, none {}",
        logs.len(),
        report.stats.counts,
        report.stats.none_count
    );
    Ok(())
}

pub struct BifurcationArgs {
    pub alpha: f64,
    pub a: f64,
    pub cbar: f64,
    pub mu_range: (f64, f64),
    pub points: usize,
}

#[derive(Serialize)]
struct SummaryReport<'a> {
    manifest: &'static str,
    branches_csv: &'a str,
    #[serde(flatten)]
    summary: &'a BifurcationSummary,
}

pub fn bifurcation(args: &[String], params: BifurcationArgs, out: &Path) -> Result<()> {
    let started = Instant::now();
    let sigmoid = SigmoidParams::new(params.a, params.alpha)?;
    let (branches, summary) =
        bifurcation_analysis(params.mu_range, params.points, params.cbar, &sigmoid)?;
    prepare_out_dir(out)?;
    let csv_path = out.join("branches.csv");
    let mut buf = Vec::new();
    write_branches_csv(&branches, &mut buf)?;
    write_atomic(&csv_path, &buf)?;
    let summary_path = out.join("summary.json");
    let csv_name = file_name(&csv_path);
    write_json(
        &summary_path,
        &SummaryReport {
            manifest: MANIFEST_FILE,
            branches_csv: &csv_name,
            summary: &summary,
        },
    )?;
    RunManifest {
        schema_version: OUTPUT_SCHEMA_VERSION,
        command: "bifurcation".into(),
        args: args.to_vec(),
        config_path: None,
        seeds: Vec::new(),
        out_dir: out.to_path_buf(),
        outputs: vec![csv_name, file_name(&summary_path)],
        git_describe: git_describe(),
        wall_time_s: started.elapsed().as_secs_f64(),
    }
    .write()?;
    match summary.mu_star {
        Some(mu) => println!(
            "mu_star = {mu:.10}, theta_star = {:.4} deg, {} branches",
            summary.theta_star_deg.unwrap_or(f64::NAN),
            summary.branch_count
        ),
        None => println!(
            "no bifurcation for alpha = {}, {} branches",
            params.alpha, summary.branch_count
        ),
    }
    Ok(())
}

pub fn bench(args: &[String], k_list: &[usize], repeats: usize, out: &Path) -> Result<()> {
    let started = Instant::now();
    prepare_out_dir(out)?;
    let mut text = String::from("k,mean_ms,std_ms\n");
    for &k in k_list {
        let t = bench_step_time(k, repeats)?;
        text.push_str(&format!(
            "{},{},{}\n",
            t.k,
            fmt_f64(t.mean_ms),
            fmt_f64(t.std_ms)
        ));
    }
    let path: PathBuf = out.join("bench.csv");
    write_atomic(&path, text.as_bytes())?;
    RunManifest {
        schema_version: OUTPUT_SCHEMA_VERSION,
        command: "bench".into(),
        args: args.to_vec(),
        config_path: None,
        seeds: Vec::new(),
        out_dir: out.to_path_buf(),
        outputs: vec![file_name(&path)],
        git_describe: git_describe(),
        wall_time_s: started.elapsed().as_secs_f64(),
    }
    .write()?;
    print!("{text}");
    Ok(())
}
