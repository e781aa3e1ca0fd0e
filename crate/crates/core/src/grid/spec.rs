use super::GridError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisBoundary {
    Periodic,
    Physical,
}

/// Global uniform Cartesian grid. Axes beyond `dims` are degenerate (one point, no ghosts).
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub dims: usize,
    pub global_n: [usize; 3],
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub boundary: [AxisBoundary; 3],
}

impl GridSpec {
    /// Grid with the same point count, extent and topology on every axis.
    pub fn uniform(
        dims: usize,
        n: usize,
        lower: f64,
        upper: f64,
        boundary: AxisBoundary,
    ) -> Result<GridSpec, GridError> {
        if !(1..=3).contains(&dims) {
            return Err(GridError::InvalidSpec(format!("dimensions must be 1, 2 or 3, got {dims}")));
        }
        if n == 0 {
            return Err(GridError::InvalidSpec("global_n must be positive".into()));
        }
        if !(upper - lower > 0.0) || !(upper - lower).is_finite() {
            return Err(GridError::InvalidSpec(format!(
                "upper ({upper}) must exceed lower ({lower})"
            )));
        }
        let mut spec = GridSpec {
            dims,
            global_n: [1; 3],
            lower: [0.0; 3],
            upper: [1.0; 3],
            boundary: [AxisBoundary::Periodic; 3],
        };
        for a in 0..dims {
            spec.global_n[a] = n;
            spec.lower[a] = lower;
            spec.upper[a] = upper;
            spec.boundary[a] = boundary;
        }
        Ok(spec)
    }

    /// Grid spacing along `axis`.
    pub fn h(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.global_n[axis] as f64
    }

    /// Coordinate of global index `i` along `axis`; points sit at `lower + i h`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lower[axis] + i as f64 * self.h(axis)
    }

    pub fn total_points(&self) -> usize {
        self.global_n.iter().product()
    }

    /// Global shape over the active axes.
    pub fn shape(&self) -> Vec<usize> {
        self.global_n[..self.dims].to_vec()
    }

    /// Linear global index with axis 0 fastest.
    pub fn linear_index(&self, g: [usize; 3]) -> usize {
        (g[2] * self.global_n[1] + g[1]) * self.global_n[0] + g[0]
    }

    pub fn unravel(&self, mut idx: usize) -> [usize; 3] {
        let i = idx % self.global_n[0];
        idx /= self.global_n[0];
        let j = idx % self.global_n[1];
        [i, j, idx / self.global_n[1]]
    }

    /// Axis along which slabs are cut: the longest, ties to the lowest index.
    pub fn decomposition_axis(&self) -> usize {
        let mut best = 0;
        for a in 1..self.dims {
            if self.global_n[a] > self.global_n[best] {
                best = a;
            }
        }
        best
    }
}
