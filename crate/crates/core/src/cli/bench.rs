use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::output::OutputSet;
use super::BenchArgs;
use crate::error::{Error, Result};
use crate::synthetic::{
    brute_force_thermal_oracle, generate_lagged_pair, recovery_score, LagScenario, Segment,
    ORACLE_MAX_N,
};
use crate::tops::{
    distance_matrix, run_ensemble, thermal_average_path, thermal_weights, to_calendar_lags,
    Direction, DistanceMatrix, EnsembleConfig, LatticeNode,
};

pub const ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    scenarios: Vec<BenchScenario>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchScenario {
    pub name: String,
    #[serde(flatten)]
    pub kind: ScenarioKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Generate a lagged pair, run the ensemble, score against the truth.
    Lag {
        segments: Vec<Segment>,
        #[serde(default)]
        noise_std: f64,
        seed: Option<u64>,
        temperature: Option<f64>,
        margin: Option<usize>,
        #[serde(default = "default_burn")]
        burn: usize,
    },
    /// Compare the recursion with exhaustive enumeration on random lattices.
    Oracle {
        n: usize,
        temperature: Option<f64>,
        seed: Option<u64>,
        #[serde(default = "default_instances")]
        instances: usize,
    },
}

fn default_burn() -> usize {
    30
}

fn default_instances() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub name: String,
    pub kind: &'static str,
    pub n: usize,
    pub rmse: Option<f64>,
    pub switch_latency: Option<usize>,
    pub oracle_max_error: Option<f64>,
    pub runtime_s: f64,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub oracle_pass: Option<bool>,
    pub files: Vec<PathBuf>,
}

fn oracle_error(n: usize, temperature: f64, rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut draw = || -> Vec<f64> { (0..n).map(|_| StandardNormal.sample(&mut *rng)).collect() };
    let (x, y) = (draw(), draw());
    let d = DistanceMatrix::from_slices(&x, &y)?;
    let start = LatticeNode::from_grid(0, 0);
    let end = LatticeNode::from_grid(n - 1, n - 1);
    let fwd = thermal_weights(&d, temperature, start, end, Direction::Forward)?;
    let bwd = thermal_weights(&d, temperature, start, end, Direction::Backward)?;
    let path = thermal_average_path(&fwd, &bwd)?;
    let oracle = brute_force_thermal_oracle(&d, temperature, start, end)?;
    Ok(path
        .x_values
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

fn run_scenario(s: &BenchScenario, a: &BenchArgs) -> Result<BenchRow> {
    let clock = Instant::now();
    let mut row = match &s.kind {
        ScenarioKind::Lag {
            segments,
            noise_std,
            seed,
            temperature,
            margin,
            burn,
        } => {
            let scenario = LagScenario {
                segments: segments.clone(),
                noise_std: *noise_std,
                seed: seed.unwrap_or(a.seed),
            };
            let pair = generate_lagged_pair(&scenario)?;
            let cfg = EnsembleConfig {
                margin: margin.unwrap_or(a.margin),
                temperature: temperature.unwrap_or(a.temperature),
                ..EnsembleConfig::default()
            };
            let d = distance_matrix(&pair.x, &pair.y)?;
            let outcome = run_ensemble(&d, &cfg)?;
            let path = to_calendar_lags(&outcome.path, &pair.y.dates, cfg.temperature)?;
            let truth: Vec<f64> = pair.truth.iter().map(|&l| l as f64).collect();
            let score = recovery_score(&path, &truth, *burn)?;
            BenchRow {
                name: s.name.clone(),
                kind: "lag",
                n: scenario.len(),
                rmse: Some(score.rmse),
                switch_latency: score.switch_latency,
                oracle_max_error: None,
                runtime_s: 0.0,
            }
        }
        ScenarioKind::Oracle {
            n,
            temperature,
            seed,
            instances,
        } => {
            if *n < 2 || *n > ORACLE_MAX_N {
                return Err(Error::InvalidConfig(format!(
                    "scenario {}: oracle size must be in 2..={ORACLE_MAX_N}",
                    s.name
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(a.seed));
            let t = temperature.unwrap_or(a.temperature);
            let mut worst: f64 = 0.0;
            for _ in 0..*instances {
                worst = worst.max(oracle_error(*n, t, &mut rng)?);
            }
            BenchRow {
                name: s.name.clone(),
                kind: "oracle",
                n: *n,
                rmse: None,
                switch_latency: None,
                oracle_max_error: Some(worst),
                runtime_s: 0.0,
            }
        }
    };
    row.runtime_s = clock.elapsed().as_secs_f64();
    Ok(row)
}

fn parse_scenarios(a: &BenchArgs) -> Result<Vec<BenchScenario>> {
    let text = fs::read_to_string(&a.scenarios).map_err(|e| Error::io(&a.scenarios, e))?;
    let file: ScenarioFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        context: a.scenarios.display().to_string(),
        row: e.line(),
        message: e.to_string(),
    })?;
    for s in &file.scenarios {
        if let ScenarioKind::Lag { segments, noise_std, .. } = &s.kind {
            LagScenario {
                segments: segments.clone(),
                noise_std: *noise_std,
                seed: 0,
            }
            .validate()
            .map_err(|e| Error::InvalidConfig(format!("scenario {}: {e}", s.name)))?;
        }
    }
    Ok(file.scenarios)
}

pub fn cmd_bench(a: &BenchArgs) -> Result<BenchReport> {
    let scenarios = parse_scenarios(a)?;
    let rows: Vec<BenchRow> = scenarios
        .iter()
        .map(|s| run_scenario(s, a))
        .collect::<Result<_>>()?;

    let config = format!(
        "command=bench scenarios={} seed={} temperature={} margin={} omit_runtime={}",
        a.scenarios.display(),
        a.seed,
        a.temperature,
        a.margin,
        a.omit_runtime
    );
    let mut out = OutputSet::new(&a.out, &config);
    out.add("bench_report.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record([
            "name",
            "kind",
            "n",
            "rmse",
            "switch_latency",
            "oracle_max_error",
            "runtime_s",
        ])?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &rows {
            w.write_record([
                r.name.clone(),
                r.kind.to_string(),
                r.n.to_string(),
                opt(r.rmse.map(|v| v.to_string())),
                opt(r.switch_latency.map(|v| v.to_string())),
                opt(r.oracle_max_error.map(|v| v.to_string())),
                if a.omit_runtime {
                    String::new()
                } else {
                    format!("{:.3}", r.runtime_s)
                },
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    let files = out.commit()?;

    let mut oracle_pass = None;
    for r in &rows {
        match r.oracle_max_error {
            Some(err) => {
                let pass = err <= ORACLE_TOLERANCE;
                oracle_pass = Some(oracle_pass.unwrap_or(true) && pass);
                println!(
                    "{}: oracle agreement {} (max error {err:.3e})",
                    r.name,
                    if pass { "PASS" } else { "FAIL" }
                );
            }
            None => println!(
                "{}: rmse {:.4}, switch latency {}",
                r.name,
                r.rmse.unwrap_or(f64::NAN),
                r.switch_latency.map_or("none".into(), |l| l.to_string())
            ),
        }
    }
    if oracle_pass == Some(false) {
        return Err(Error::Degenerate(
            "recursion disagrees with the enumeration oracle".into(),
        ));
    }
    Ok(BenchReport {
        rows,
        oracle_pass,
        files,
    })
}
