use crate::error::{Error, Result};

/// A node of the rotated lattice: `t = t1 + t2`, `x = t2 - t1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeNode {
    pub t: usize,
    pub x: isize,
}

impl LatticeNode {
    pub fn from_grid(t1: usize, t2: usize) -> Self {
        Self {
            t: t1 + t2,
            x: t2 as isize - t1 as isize,
        }
    }

    /// Checks parity and range against a lattice built from series of length `n`.
    pub fn new(t: usize, x: isize, n: usize) -> Result<Self> {
        let node = Self { t, x };
        node.grid(n)?;
        Ok(node)
    }

    /// Maps back to `(t1, t2)`, failing when off the `n x n` grid.
    pub fn grid(&self, n: usize) -> Result<(usize, usize)> {
        let t = self.t as isize;
        if (t + self.x).rem_euclid(2) != 0 {
            return Err(Error::InvalidNode(format!(
                "t + x must be even (t = {}, x = {})",
                self.t, self.x
            )));
        }
        let t1 = (t - self.x) / 2;
        let t2 = (t + self.x) / 2;
        if t1 < 0 || t2 < 0 || t1 >= n as isize || t2 >= n as isize {
            return Err(Error::InvalidNode(format!(
                "(t = {}, x = {}) maps outside the {n}x{n} grid",
                self.t, self.x
            )));
        }
        Ok((t1 as usize, t2 as usize))
    }
}

/// Rectangle of grid nodes reachable from `start` and co-reachable from `end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub s1: usize,
    pub s2: usize,
    pub e1: usize,
    pub e2: usize,
}

impl Region {
    pub fn new(n: usize, start: LatticeNode, end: LatticeNode) -> Result<Self> {
        let (s1, s2) = start.grid(n)?;
        let (e1, e2) = end.grid(n)?;
        if e1 < s1 || e2 < s2 || end.t <= start.t {
            return Err(Error::InvalidNode(format!(
                "end ({e1}, {e2}) is not reachable from start ({s1}, {s2})"
            )));
        }
        Ok(Self { s1, s2, e1, e2 })
    }

    pub fn t_start(&self) -> usize {
        self.s1 + self.s2
    }

    pub fn t_end(&self) -> usize {
        self.e1 + self.e2
    }

    /// Inclusive `t2` bounds of slice `t`.
    #[inline]
    pub fn t2_bounds(&self, t: usize) -> (usize, usize) {
        let lo = self.s2.max(t.saturating_sub(self.e1));
        let hi = self.e2.min(t - self.s1);
        (lo, hi)
    }

    /// Largest `|x|` among the slice's nodes.
    pub fn half_width(&self, t: usize) -> f64 {
        let (lo, hi) = self.t2_bounds(t);
        let x_lo = 2 * lo as isize - t as isize;
        let x_hi = 2 * hi as isize - t as isize;
        x_lo.abs().max(x_hi.abs()) as f64
    }

    pub fn start(&self) -> LatticeNode {
        LatticeNode::from_grid(self.s1, self.s2)
    }

    pub fn end(&self) -> LatticeNode {
        LatticeNode::from_grid(self.e1, self.e2)
    }
}
