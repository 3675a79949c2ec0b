//! Transfer-matrix propagation of Boltzmann weights on the rotated lattice.
//!
//! A forward weight at grid node `(t1, t2)` sums `exp(-E/T)` over every
//! monotone path from the start node to it, where `E` adds the distance of
//! each visited node (start included). In rotated coordinates the three
//! predecessors sit at `(t-1, x-1)`, `(t-1, x+1)` and `(t-2, x)`. The backward
//! field runs the mirrored recursion from the end node.
//!
//! Weights are kept as per-slice probabilities plus the log of the slice sum,
//! which keeps every quantity in range for series of several thousand points.

use super::distance::DistanceMatrix;
use super::lattice::{LatticeNode, Region};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

/// `exp(-(eps - min_slice_eps) / T)` stored slice by slice over the full grid.
#[derive(Debug, Clone)]
pub struct BoltzmannLattice<'a> {
    d: &'a DistanceMatrix,
    n: usize,
    temperature: f64,
    offsets: Vec<usize>,
    /// Per-slice `-min(eps) / T`, the log of the factor removed from the slice.
    shifts: Vec<f64>,
    factors: Vec<f64>,
}

impl<'a> BoltzmannLattice<'a> {
    pub fn new(d: &'a DistanceMatrix, temperature: f64) -> Result<Self> {
        check_temperature(temperature)?;
        let n = d.n();
        let slices = 2 * n - 1;
        let mut offsets = Vec::with_capacity(slices + 1);
        let mut shifts = Vec::with_capacity(slices);
        let mut factors = Vec::with_capacity(n * n);
        let mut eps = Vec::with_capacity(n);
        for t in 0..slices {
            offsets.push(factors.len());
            let lo = t.saturating_sub(n - 1);
            let hi = t.min(n - 1);
            eps.clear();
            eps.extend((lo..=hi).map(|t2| d.get(t - t2, t2)));
            let min = eps.iter().copied().fold(f64::INFINITY, f64::min);
            shifts.push(-min / temperature);
            factors.extend(eps.iter().map(|e| (-(e - min) / temperature).exp()));
        }
        offsets.push(factors.len());
        Ok(Self {
            d,
            n,
            temperature,
            offsets,
            shifts,
            factors,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Factors of slice `t` for `t2` in `lo..=hi`, together with the slice shift.
    #[inline]
    fn slice(&self, t: usize, lo: usize, hi: usize) -> (&[f64], f64) {
        let base = self.offsets[t] + lo - t.saturating_sub(self.n - 1);
        (&self.factors[base..base + hi - lo + 1], self.shifts[t])
    }

    #[inline]
    fn eps(&self, t: usize, t2: usize) -> f64 {
        self.d.get(t - t2, t2)
    }
}

// Below this a slice is recomputed in the log domain.
const UNDERFLOW_GUARD: f64 = 1e-250;
// Relative weights below this are dropped in the linear-domain kernel.
const FLUSH_TO_ZERO: f64 = 1e-290;

fn check_temperature(temperature: f64) -> Result<()> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "temperature must be positive and finite, got {temperature}"
        )));
    }
    Ok(())
}

/// Receives each finished slice during propagation.
pub(crate) trait SliceSink {
    fn accept(&mut self, t: usize, lo: usize, probs: &[f64], log_norm: f64);
}

#[derive(Debug, Clone, Default)]
struct Slice {
    lo: usize,
    probs: Vec<f64>,
    log_norm: f64,
}

impl Slice {
    #[inline]
    fn get(&self, t2: usize) -> f64 {
        match t2.checked_sub(self.lo) {
            Some(k) => self.probs.get(k).copied().unwrap_or(0.0),
            None => 0.0,
        }
    }
}

/// Runs the recursion over `region`, handing every slice to `sink` in
/// propagation order.
pub(crate) fn propagate<S: SliceSink>(
    lattice: &BoltzmannLattice,
    region: &Region,
    direction: Direction,
    sink: &mut S,
) -> Result<()> {
    let (ts, te) = (region.t_start(), region.t_end());
    let (first_t, first_t2) = match direction {
        Direction::Forward => (ts, region.s2),
        Direction::Backward => (te, region.e2),
    };
    let mut near = Slice {
        lo: first_t2,
        probs: vec![1.0],
        log_norm: -lattice.d.get(first_t - first_t2, first_t2) / lattice.temperature,
    };
    sink.accept(first_t, near.lo, &near.probs, near.log_norm);
    // Slice two steps back; empty before the second step.
    let mut far = Slice {
        lo: 0,
        probs: Vec::new(),
        log_norm: f64::NEG_INFINITY,
    };
    let mut next = Slice::default();
    let mut scratch = Scratch::default();

    for step in 1..=(te - ts) {
        let t = match direction {
            Direction::Forward => ts + step,
            Direction::Backward => te - step,
        };
        let (lo, hi) = region.t2_bounds(t);
        let (factors, shift) = lattice.slice(t, lo, hi);

        // Put both neighbour slices on the scale of the larger normalizer.
        let (w_near, w_far, base) = if far.log_norm <= near.log_norm {
            (1.0, (far.log_norm - near.log_norm).exp(), near.log_norm)
        } else {
            ((near.log_norm - far.log_norm).exp(), 1.0, far.log_norm)
        };

        next.lo = lo;
        let sum = combine(
            &near,
            &far,
            w_near,
            w_far,
            direction,
            lo,
            factors,
            &mut scratch,
            &mut next.probs,
        );
        if sum >= UNDERFLOW_GUARD && sum.is_finite() {
            let inv = 1.0 / sum;
            next.probs.iter_mut().for_each(|p| *p *= inv);
            next.log_norm = base + sum.ln() + shift;
        } else {
            next.log_norm = combine_log(lattice, &near, &far, direction, t, lo, hi, &mut next.probs)?;
        }
        sink.accept(t, next.lo, &next.probs, next.log_norm);

        std::mem::swap(&mut far, &mut near);
        std::mem::swap(&mut near, &mut next);
    }
    Ok(())
}

/// Copies `src` values for `t2` in `from..from + len` into `buf`, zero outside.
#[inline]
fn fill_window(src: &Slice, from: isize, len: usize, buf: &mut Vec<f64>) {
    buf.clear();
    let src_lo = src.lo as isize;
    let end = from + len as isize;
    let lo = from.max(src_lo).min(end);
    let hi = end.min(src_lo + src.probs.len() as isize).max(lo);
    buf.resize((lo - from) as usize, 0.0);
    if lo < hi {
        let s = (lo - src_lo) as usize;
        buf.extend_from_slice(&src.probs[s..s + (hi - lo) as usize]);
    }
    buf.resize(len, 0.0);
}

#[derive(Default)]
struct Scratch {
    near: Vec<f64>,
    far: Vec<f64>,
}

// Forward, node t2 takes near[t2] + near[t2-1] + far[t2-1]; backward takes
// near[t2] + near[t2+1] + far[t2+1]. Either way the two near terms are
// adjacent, so both directions share one loop over shifted windows.
#[allow(clippy::too_many_arguments)]
#[inline]
fn combine(
    near: &Slice,
    far: &Slice,
    w_near: f64,
    w_far: f64,
    direction: Direction,
    lo: usize,
    factors: &[f64],
    scratch: &mut Scratch,
    out: &mut Vec<f64>,
) -> f64 {
    let width = factors.len();
    let (a0, c0) = match direction {
        Direction::Forward => (lo as isize - 1, lo as isize - 1),
        Direction::Backward => (lo as isize, lo as isize + 1),
    };
    fill_window(near, a0, width + 1, &mut scratch.near);
    fill_window(far, c0, width, &mut scratch.far);
    out.clear();
    let mut sum = 0.0;
    out.extend(
        factors
            .iter()
            .zip(scratch.near.windows(2))
            .zip(&scratch.far)
            .map(|((f, ab), c)| {
                let w = (w_near * (ab[0] + ab[1]) + w_far * c) * f;
                // Subnormals are orders of magnitude slower to operate on.
                let w = if w < FLUSH_TO_ZERO { 0.0 } else { w };
                sum += w;
                w
            }),
    );
    sum
}

/// Slow path for extreme temperatures: every term is carried as a logarithm
/// and the slice is rescaled by its largest log weight.
#[allow(clippy::too_many_arguments)]
fn combine_log(
    lattice: &BoltzmannLattice,
    near: &Slice,
    far: &Slice,
    direction: Direction,
    t: usize,
    lo: usize,
    hi: usize,
    out: &mut Vec<f64>,
) -> Result<f64> {
    out.clear();
    for t2 in lo..=hi {
        let (a, b, c) = match direction {
            Direction::Forward => {
                let prev = t2.wrapping_sub(1);
                (near.get(t2), near.get(prev), far.get(prev))
            }
            Direction::Backward => (near.get(t2), near.get(t2 + 1), far.get(t2 + 1)),
        };
        let terms = [
            a.ln() + near.log_norm,
            b.ln() + near.log_norm,
            c.ln() + far.log_norm,
        ];
        let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lw = if m == f64::NEG_INFINITY {
            m
        } else {
            m + terms.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
        };
        out.push(lw - lattice.eps(t, t2) / lattice.temperature);
    }
    let m = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return Err(Error::Degenerate(format!(
            "thermal weights vanished at t = {t} (temperature {})",
            lattice.temperature
        )));
    }
    out.iter_mut().for_each(|v| *v = (*v - m).exp());
    let sum: f64 = out.iter().sum();
    let inv = 1.0 / sum;
    out.iter_mut().for_each(|p| *p *= inv);
    Ok(m + sum.ln())
}

/// Probability-weighted mean of `x = 2 t2 - t` over one slice.
#[inline]
pub(crate) fn slice_mean(t: usize, lo: usize, probs: &[f64]) -> f64 {
    let x0 = 2.0 * lo as f64 - t as f64;
    probs
        .iter()
        .enumerate()
        .map(|(k, p)| (x0 + 2.0 * k as f64) * p)
        .sum()
}

/// A fully materialized forward or backward weight field.
#[derive(Debug, Clone)]
pub struct ThermalField {
    temperature: f64,
    direction: Direction,
    n: usize,
    region: Region,
    /// Indexed by `t - t_start`.
    slices: Vec<Slice>,
}

struct FieldSink {
    t_start: usize,
    slices: Vec<Option<Slice>>,
}

impl SliceSink for FieldSink {
    fn accept(&mut self, t: usize, lo: usize, probs: &[f64], log_norm: f64) {
        self.slices[t - self.t_start] = Some(Slice {
            lo,
            probs: probs.to_vec(),
            log_norm,
        });
    }
}

impl ThermalField {
    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn start(&self) -> LatticeNode {
        self.region.start()
    }

    pub fn end(&self) -> LatticeNode {
        self.region.end()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn region(&self) -> &Region {
        &self.region
    }

    pub fn t_range(&self) -> std::ops::RangeInclusive<usize> {
        self.region.t_start()..=self.region.t_end()
    }

    fn slice(&self, t: usize) -> Option<&Slice> {
        t.checked_sub(self.region.t_start())
            .and_then(|k| self.slices.get(k))
    }

    /// Slice probabilities `W(t, x) / W(t)` as `(x, p)` pairs in increasing `x`.
    pub fn slice_probabilities(&self, t: usize) -> Vec<(isize, f64)> {
        match self.slice(t) {
            Some(s) => s
                .probs
                .iter()
                .enumerate()
                .map(|(k, p)| (2 * (s.lo + k) as isize - t as isize, *p))
                .collect(),
            None => Vec::new(),
        }
    }

    /// Log of the slice-normalized weight at `(t, x)`; `None` outside the region.
    ///
    /// `ln W(t, x) = log_weight(t, x) + slice_log_norm(t)`. Nodes whose share
    /// of the slice underflows double precision report `-inf`.
    pub fn log_weight(&self, t: usize, x: isize) -> Option<f64> {
        let s = self.slice(t)?;
        let twice_t2 = t as isize + x;
        if twice_t2 < 0 || twice_t2 % 2 != 0 {
            return None;
        }
        let k = (twice_t2 / 2) as usize;
        k.checked_sub(s.lo)
            .and_then(|i| s.probs.get(i))
            .map(|p| p.ln())
    }

    /// Accumulated `ln W(t)`, the log of the unnormalized slice sum.
    pub fn slice_log_norm(&self, t: usize) -> Option<f64> {
        self.slice(t).map(|s| s.log_norm)
    }

    pub(crate) fn mean_x(&self, t: usize) -> Option<f64> {
        self.slice(t).map(|s| slice_mean(t, s.lo, &s.probs))
    }

    /// Total weight at the node where propagation finishes, in log.
    pub fn log_partition(&self) -> f64 {
        let terminal = match self.direction {
            Direction::Forward => self.region.end(),
            Direction::Backward => self.region.start(),
        };
        let s = self.slice(terminal.t).expect("terminal slice present");
        self.log_weight(terminal.t, terminal.x).unwrap_or(f64::NEG_INFINITY) + s.log_norm
    }
}

pub fn thermal_weights(
    d: &DistanceMatrix,
    temperature: f64,
    start: LatticeNode,
    end: LatticeNode,
    direction: Direction,
) -> Result<ThermalField> {
    check_temperature(temperature)?;
    let region = Region::new(d.n(), start, end)?;
    let lattice = BoltzmannLattice::new(d, temperature)?;
    thermal_weights_on(&lattice, &region, direction)
}

pub(crate) fn thermal_weights_on(
    lattice: &BoltzmannLattice,
    region: &Region,
    direction: Direction,
) -> Result<ThermalField> {
    let len = region.t_end() - region.t_start() + 1;
    let mut sink = FieldSink {
        t_start: region.t_start(),
        slices: vec![None; len],
    };
    propagate(lattice, region, direction, &mut sink)?;
    Ok(ThermalField {
        temperature: lattice.temperature(),
        direction,
        n: lattice.n(),
        region: *region,
        slices: sink
            .slices
            .into_iter()
            .map(|s| s.expect("every slice visited"))
            .collect(),
    })
}

/// Per-step free energy `-T ln Z / L` of the field's path ensemble.
pub fn free_energy(field: &ThermalField) -> f64 {
    let steps = (field.region.t_end() - field.region.t_start()) as f64;
    -field.temperature * field.log_partition() / steps
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn corners(n: usize) -> (LatticeNode, LatticeNode) {
        (LatticeNode::from_grid(0, 0), LatticeNode::from_grid(n - 1, n - 1))
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DistanceMatrix {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        DistanceMatrix::from_slices(&x, &y).unwrap()
    }

    #[test]
    fn two_point_lattice_splits_first_step_evenly() {
        let d = DistanceMatrix::from_raw(2, vec![0.0; 4]).unwrap();
        let (s, e) = corners(2);
        let f = thermal_weights(&d, 1.0, s, e, Direction::Forward).unwrap();
        assert_eq!(f.slice_probabilities(1), vec![(-1, 0.5), (1, 0.5)]);
        // Z = 3 paths of weight 1: two via the off-diagonal nodes, one diagonal.
        assert!((f.log_partition() - 3f64.ln()).abs() < 1e-14);
        let b = thermal_weights(&d, 1.0, s, e, Direction::Backward).unwrap();
        assert_eq!(b.slice_probabilities(1), vec![(-1, 0.5), (1, 0.5)]);
        assert!((b.log_partition() - 3f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn slices_are_normalized_on_long_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 4000;
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let d = DistanceMatrix::from_slices(&x, &y).unwrap();
        let (s, e) = corners(n);
        let f = thermal_weights(&d, 2.0, s, e, Direction::Forward).unwrap();
        for t in f.t_range().step_by(397) {
            let total: f64 = f.slice_probabilities(t).iter().map(|(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-9, "slice {t}: {total}");
        }
        assert!(f.log_partition().is_finite());
        assert!(free_energy(&f).is_finite());
    }

    #[test]
    fn forward_equals_backward_of_transposed_reversed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=6 {
            let d = random_matrix(&mut rng, n);
            let mirrored = d.transposed().time_reversed();
            for (s, e) in [((0, 0), (n - 1, n - 1)), ((0, 1), (n - 1, n - 1)), ((1, 0), (n - 2, n - 1))] {
                if e.0 < s.0 || e.1 < s.1 || e.0 + e.1 <= s.0 + s.1 {
                    continue;
                }
                let start = LatticeNode::from_grid(s.0, s.1);
                let end = LatticeNode::from_grid(e.0, e.1);
                // (t1, t2) -> (n-1-t2, n-1-t1)
                let m_start = LatticeNode::from_grid(n - 1 - e.1, n - 1 - e.0);
                let m_end = LatticeNode::from_grid(n - 1 - s.1, n - 1 - s.0);
                let f = thermal_weights(&d, 1.3, start, end, Direction::Forward).unwrap();
                let b = thermal_weights(&mirrored, 1.3, m_start, m_end, Direction::Backward).unwrap();
                let last = 2 * (n - 1);
                for t in f.t_range() {
                    let pf = f.slice_probabilities(t);
                    let pb = b.slice_probabilities(last - t);
                    assert_eq!(pf.len(), pb.len());
                    for ((xf, a), (xb, c)) in pf.iter().zip(&pb) {
                        assert_eq!(xf, xb);
                        assert!((a - c).abs() < 1e-12);
                    }
                    let lf = f.slice_log_norm(t).unwrap();
                    let lb = b.slice_log_norm(last - t).unwrap();
                    assert!((lf - lb).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn forward_and_backward_share_partition_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = random_matrix(&mut rng, 7);
        let (s, e) = corners(7);
        let f = thermal_weights(&d, 0.7, s, e, Direction::Forward).unwrap();
        let b = thermal_weights(&d, 0.7, s, e, Direction::Backward).unwrap();
        assert!((f.log_partition() - b.log_partition()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_temperature_and_nodes() {
        let d = DistanceMatrix::from_raw(3, vec![0.0; 9]).unwrap();
        let (s, e) = corners(3);
        assert!(thermal_weights(&d, 0.0, s, e, Direction::Forward).is_err());
        assert!(thermal_weights(&d, -1.0, s, e, Direction::Forward).is_err());
        assert!(thermal_weights(&d, 1.0, LatticeNode { t: 1, x: 0 }, e, Direction::Forward).is_err());
        assert!(thermal_weights(&d, 1.0, e, s, Direction::Forward).is_err());
    }

    #[test]
    fn very_low_temperature_stays_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..40).map(|_| rng.gen_range(-20.0..20.0)).collect();
        let y: Vec<f64> = (0..40).map(|_| rng.gen_range(-20.0..20.0)).collect();
        let d = DistanceMatrix::from_slices(&x, &y).unwrap();
        let (s, e) = corners(40);
        let f = thermal_weights(&d, 0.001, s, e, Direction::Forward).unwrap();
        assert!(f.log_partition().is_finite());
    }
}
