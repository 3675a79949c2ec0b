use super::distance::DistanceMatrix;
use super::lattice::{LatticeNode, Region};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    Start,
    Diagonal,
    /// `t1` advances.
    Horizontal,
    /// `t2` advances.
    Vertical,
}

/// Minimum-energy monotone path from `start` to `end`.
///
/// Energy is the sum of distances over every visited node, endpoints included.
/// Ties prefer the diagonal predecessor, then the horizontal one.
pub fn dp_optimal_path(
    d: &DistanceMatrix,
    start: LatticeNode,
    end: LatticeNode,
) -> Result<(Vec<LatticeNode>, f64)> {
    let region = Region::new(d.n(), start, end)?;
    let Region { s1, s2, e1, e2 } = region;
    let rows = e1 - s1 + 1;
    let cols = e2 - s2 + 1;
    let mut cost = vec![f64::INFINITY; rows * cols];
    let mut from = vec![Move::Start; rows * cols];
    let idx = |i: usize, j: usize| i * cols + j;

    for i in 0..rows {
        for j in 0..cols {
            let here = d.get(s1 + i, s2 + j);
            if i == 0 && j == 0 {
                cost[0] = here;
                continue;
            }
            let mut best = f64::INFINITY;
            let mut mv = Move::Start;
            if i > 0 && j > 0 {
                best = cost[idx(i - 1, j - 1)];
                mv = Move::Diagonal;
            }
            if i > 0 && cost[idx(i - 1, j)] < best {
                best = cost[idx(i - 1, j)];
                mv = Move::Horizontal;
            }
            if j > 0 && cost[idx(i, j - 1)] < best {
                best = cost[idx(i, j - 1)];
                mv = Move::Vertical;
            }
            cost[idx(i, j)] = best + here;
            from[idx(i, j)] = mv;
        }
    }

    let mut path = Vec::new();
    let (mut i, mut j) = (rows - 1, cols - 1);
    loop {
        path.push(LatticeNode::from_grid(s1 + i, s2 + j));
        match from[idx(i, j)] {
            Move::Start => break,
            Move::Diagonal => {
                i -= 1;
                j -= 1;
            }
            Move::Horizontal => i -= 1,
            Move::Vertical => j -= 1,
        }
    }
    path.reverse();
    Ok((path, cost[idx(rows - 1, cols - 1)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Exhaustive enumeration of monotone paths between two grid points.
    fn brute_min(d: &DistanceMatrix, (i, j): (usize, usize), end: (usize, usize)) -> f64 {
        let here = d.get(i, j);
        if (i, j) == end {
            return here;
        }
        let mut best = f64::INFINITY;
        if i < end.0 {
            best = best.min(brute_min(d, (i + 1, j), end));
        }
        if j < end.1 {
            best = best.min(brute_min(d, (i, j + 1), end));
        }
        if i < end.0 && j < end.1 {
            best = best.min(brute_min(d, (i + 1, j + 1), end));
        }
        here + best
    }

    #[test]
    fn identical_series_take_the_diagonal() {
        let x = [0.4, -1.0, 2.0, 0.1, -0.3];
        let d = DistanceMatrix::from_slices(&x, &x).unwrap();
        let (path, e) =
            dp_optimal_path(&d, LatticeNode::from_grid(0, 0), LatticeNode::from_grid(4, 4)).unwrap();
        assert_eq!(e, 0.0);
        assert_eq!(path.len(), 5);
        assert!(path.iter().all(|n| n.x == 0));
    }

    #[test]
    fn matches_enumeration_on_random_4x4() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let d = DistanceMatrix::from_slices(&x, &y).unwrap();
            let (path, e) =
                dp_optimal_path(&d, LatticeNode::from_grid(0, 0), LatticeNode::from_grid(3, 3))
                    .unwrap();
            let oracle = brute_min(&d, (0, 0), (3, 3));
            assert!((e - oracle).abs() < 1e-12);
            let along: f64 = path
                .iter()
                .map(|n| {
                    let (a, b) = n.grid(4).unwrap();
                    d.get(a, b)
                })
                .sum();
            assert!((along - e).abs() < 1e-12);
            let diagonal: f64 = (0..4).map(|t| d.get(t, t)).sum();
            assert!(e <= diagonal + 1e-15);
        }
    }

    #[test]
    fn unreachable_end_is_an_error() {
        let d = DistanceMatrix::from_slices(&[0.0; 4], &[0.0; 4]).unwrap();
        assert!(dp_optimal_path(&d, LatticeNode::from_grid(2, 0), LatticeNode::from_grid(1, 3)).is_err());
    }
}
