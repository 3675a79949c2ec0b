use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distance::DistanceMatrix;
use super::lattice::{LatticeNode, Region};
use super::thermal::{
    free_energy, propagate, slice_mean, BoltzmannLattice, Direction, SliceSink, ThermalField,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    /// Largest start offset `M`; members use offsets `0..=M` on both axes.
    pub margin: usize,
    pub temperature: f64,
    /// Members within this much of the lowest free energy are averaged.
    pub tie_tolerance: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            margin: 30,
            temperature: 2.0,
            tie_tolerance: 1e-12,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if !(self.tie_tolerance > 0.0) {
            return Err(Error::InvalidConfig("tie tolerance must be positive".into()));
        }
        if 2 * self.margin + 1 >= n {
            return Err(Error::InvalidConfig(format!(
                "margin {} too large for N = {n} (need 2M < N - 1)",
                self.margin
            )));
        }
        Ok(())
    }
}

/// Thermal average path `<x(t)>` of one member (or a tie-average of several).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalPath {
    pub t_values: Vec<usize>,
    pub x_values: Vec<f64>,
    pub free_energy_per_step: f64,
    /// Start offsets `(i1, i2)` of the selected member.
    pub member: (usize, usize),
    /// Every member that entered the average, `member` included.
    pub tied_members: Vec<(usize, usize)>,
}

impl ThermalPath {
    pub fn len(&self) -> usize {
        self.t_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_values.is_empty()
    }

    pub fn negated(&self) -> ThermalPath {
        ThermalPath {
            x_values: self.x_values.iter().map(|x| -x).collect(),
            ..self.clone()
        }
    }
}

/// Averages the forward and backward slice means at every rotated time.
pub fn thermal_average_path(fwd: &ThermalField, bwd: &ThermalField) -> Result<ThermalPath> {
    if fwd.direction() != Direction::Forward || bwd.direction() != Direction::Backward {
        return Err(Error::InvalidConfig(
            "thermal average needs one forward and one backward field".into(),
        ));
    }
    if fwd.region() != bwd.region() || fwd.temperature() != bwd.temperature() || fwd.n() != bwd.n()
    {
        return Err(Error::InvalidConfig(
            "forward and backward fields cover different lattices".into(),
        ));
    }
    let region = fwd.region();
    let t_values: Vec<usize> = fwd.t_range().collect();
    let x_values = t_values
        .iter()
        .map(|&t| {
            let f = fwd.mean_x(t).expect("slice in range");
            let b = bwd.mean_x(t).expect("slice in range");
            (f + b) / 2.0
        })
        .collect();
    Ok(ThermalPath {
        t_values,
        x_values,
        free_energy_per_step: free_energy(fwd),
        member: (region.s1, region.s2),
        tied_members: vec![(region.s1, region.s2)],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemberSummary {
    pub i1: usize,
    pub i2: usize,
    pub free_energy_per_step: f64,
}

#[derive(Debug, Clone)]
pub struct EnsembleOutcome {
    pub path: ThermalPath,
    /// One entry per member, ordered by `(i1, i2)`.
    pub members: Vec<MemberSummary>,
}

struct MeanSink {
    t_start: usize,
    means: Vec<f64>,
    terminal_log_weight: f64,
}

impl SliceSink for MeanSink {
    fn accept(&mut self, t: usize, lo: usize, probs: &[f64], log_norm: f64) {
        self.means[t - self.t_start] = slice_mean(t, lo, probs);
        if probs.len() == 1 {
            self.terminal_log_weight = probs[0].ln() + log_norm;
        }
    }
}

struct MemberRun {
    summary: MemberSummary,
    t_start: usize,
    x: Vec<f64>,
}

fn member_region(n: usize, i1: usize, i2: usize) -> Result<Region> {
    Region::new(
        n,
        LatticeNode::from_grid(i1, i2),
        LatticeNode::from_grid(n - 1 - i1, n - 1 - i2),
    )
}

fn run_member(lattice: &BoltzmannLattice, i1: usize, i2: usize) -> Result<MemberRun> {
    let region = member_region(lattice.n(), i1, i2)?;
    let len = region.t_end() - region.t_start() + 1;
    let mut fwd = MeanSink {
        t_start: region.t_start(),
        means: vec![0.0; len],
        terminal_log_weight: f64::NAN,
    };
    propagate(lattice, &region, Direction::Forward, &mut fwd)?;
    let mut bwd = MeanSink {
        t_start: region.t_start(),
        means: vec![0.0; len],
        terminal_log_weight: f64::NAN,
    };
    propagate(lattice, &region, Direction::Backward, &mut bwd)?;
    let x = fwd
        .means
        .iter()
        .zip(&bwd.means)
        .map(|(f, b)| (f + b) / 2.0)
        .collect();
    let steps = (region.t_end() - region.t_start()) as f64;
    Ok(MemberRun {
        summary: MemberSummary {
            i1,
            i2,
            free_energy_per_step: -lattice.temperature() * fwd.terminal_log_weight / steps,
        },
        t_start: region.t_start(),
        x,
    })
}

/// The lowest-free-energy member path over all start offsets `(i1, i2)` in `0..=M`.
pub fn tops_ensemble(d: &DistanceMatrix, cfg: &EnsembleConfig) -> Result<ThermalPath> {
    run_ensemble(d, cfg).map(|o| o.path)
}

/// As [`tops_ensemble`], also returning every member's free energy.
///
/// Member `(i1, i2)` runs from grid node `(i1, i2)` to `(N-1-i1, N-1-i2)`.
/// Members are independent and evaluated in parallel; the result does not
/// depend on scheduling.
pub fn run_ensemble(d: &DistanceMatrix, cfg: &EnsembleConfig) -> Result<EnsembleOutcome> {
    let n = d.n();
    cfg.validate(n)?;
    let lattice = BoltzmannLattice::new(d, cfg.temperature)?;
    let grid: Vec<(usize, usize)> = (0..=cfg.margin)
        .flat_map(|i1| (0..=cfg.margin).map(move |i2| (i1, i2)))
        .collect();
    let runs: Vec<MemberRun> = grid
        .par_iter()
        .map(|&(i1, i2)| run_member(&lattice, i1, i2))
        .collect::<Result<_>>()?;

    let best = runs
        .iter()
        .map(|r| r.summary.free_energy_per_step)
        .fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::Degenerate("no member has a finite free energy".into()));
    }
    let tied: Vec<&MemberRun> = runs
        .iter()
        .filter(|r| r.summary.free_energy_per_step - best <= cfg.tie_tolerance)
        .collect();
    let lead = tied
        .iter()
        .min_by(|a, b| {
            a.summary
                .free_energy_per_step
                .total_cmp(&b.summary.free_energy_per_step)
        })
        .expect("at least one member attains the minimum");

    let t_lo = tied.iter().map(|r| r.t_start).max().unwrap();
    let t_hi = tied.iter().map(|r| r.t_start + r.x.len() - 1).min().unwrap();
    let t_values: Vec<usize> = (t_lo..=t_hi).collect();
    let x_values = t_values
        .iter()
        .map(|&t| {
            let total: f64 = tied.iter().map(|r| r.x[t - r.t_start]).sum();
            total / tied.len() as f64
        })
        .collect();

    let path = ThermalPath {
        t_values,
        x_values,
        free_energy_per_step: lead.summary.free_energy_per_step,
        member: (lead.summary.i1, lead.summary.i2),
        tied_members: tied.iter().map(|r| (r.summary.i1, r.summary.i2)).collect(),
    };
    Ok(EnsembleOutcome {
        path,
        members: runs.into_iter().map(|r| r.summary).collect(),
    })
}
