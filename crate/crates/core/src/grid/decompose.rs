use super::layout::LocalLayout;
use super::spec::{AxisBoundary, GridSpec};
use super::sync::{build_routes, GhostRoute};
use super::GridError;

/// What lies across one face of a partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    Rank(usize),
    /// Across a periodic seam; may be the partition itself.
    PeriodicWrap(usize),
    PhysicalBoundary,
    /// Degenerate axis of a lower-dimensional grid.
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Lower,
    Upper,
}

/// Storage of one variable on one partition: one array per timelevel.
#[derive(Debug, Clone, PartialEq)]
pub struct VarStorage {
    pub levels: Vec<Vec<f64>>,
}

impl VarStorage {
    pub fn zeroed(timelevels: usize, len: usize) -> Self {
        VarStorage {
            levels: vec![vec![0.0; len]; timelevels],
        }
    }

    /// Shifts level k to k+1 for every k, dropping the oldest, and installs `current` at level 0.
    pub fn rotate_in(&mut self, current: Vec<f64>) {
        self.levels.pop();
        self.levels.insert(0, current);
    }
}

/// Variable shape class: a grid function fills the local layout, a scalar is one value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StorageClass {
    Grid,
    Scalar,
}

#[derive(Debug, Clone)]
pub struct Partition {
    pub rank: usize,
    pub layout: LocalLayout,
    /// Faces per axis: `[lower, upper]`.
    pub neighbors: [[Neighbor; 2]; 3],
    pub data: Vec<VarStorage>,
}

impl Partition {
    pub fn ghost_width(&self) -> usize {
        self.layout.ghost[0]
    }

    pub fn neighbor(&self, axis: usize, side: Side) -> Neighbor {
        self.neighbors[axis][side as usize]
    }

    /// Owned interior range `lo..hi` along `axis`, global indices.
    pub fn owned(&self, axis: usize) -> std::ops::Range<usize> {
        self.layout.lo[axis]..self.layout.lo[axis] + self.layout.interior[axis]
    }
}

/// A grid split into slab partitions along one axis, with precomputed exchange routes.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub spec: GridSpec,
    pub ghost: usize,
    pub axis: usize,
    pub partitions: Vec<Partition>,
    /// Slab start index per rank, plus the total as a final entry.
    starts: Vec<usize>,
    classes: Vec<StorageClass>,
    pub(crate) routes: Vec<GhostRoute>,
}

/// Splits the interior into `n_partitions` contiguous slabs along the longest axis.
/// Slab sizes differ by at most one, larger slabs at lower ranks.
pub fn decompose(spec: &GridSpec, n_partitions: usize, ghost: usize) -> Result<Decomposition, GridError> {
    if n_partitions == 0 {
        return Err(GridError::InvalidSpec("at least one partition is required".into()));
    }
    for a in 0..spec.dims {
        if spec.global_n[a] < 2 * ghost + 1 {
            return Err(GridError::InvalidSpec(format!(
                "axis {a} has {} points, fewer than 2*ghost+1 = {}",
                spec.global_n[a],
                2 * ghost + 1
            )));
        }
    }
    let axis = spec.decomposition_axis();
    let n = spec.global_n[axis];
    let base = n / n_partitions;
    let rem = n % n_partitions;
    let min_width = ghost.max(1);
    if base < min_width {
        return Err(GridError::TooManyPartitions {
            partitions: n_partitions,
            points: n,
            ghost,
        });
    }
    let mut starts = Vec::with_capacity(n_partitions + 1);
    let mut at = 0;
    for r in 0..n_partitions {
        starts.push(at);
        at += base + usize::from(r < rem);
    }
    starts.push(n);

    let ghost_per_axis: [usize; 3] = std::array::from_fn(|a| if a < spec.dims { ghost } else { 0 });
    let last = n_partitions - 1;
    let partitions = (0..n_partitions)
        .map(|rank| {
            let mut lo = [0; 3];
            let mut interior = spec.global_n;
            lo[axis] = starts[rank];
            interior[axis] = starts[rank + 1] - starts[rank];
            let neighbors = std::array::from_fn(|a| {
                if a >= spec.dims {
                    return [Neighbor::Absent; 2];
                }
                let periodic = spec.boundary[a] == AxisBoundary::Periodic;
                if a != axis {
                    let n = if periodic {
                        Neighbor::PeriodicWrap(rank)
                    } else {
                        Neighbor::PhysicalBoundary
                    };
                    return [n; 2];
                }
                let lower = if rank > 0 {
                    Neighbor::Rank(rank - 1)
                } else if periodic {
                    Neighbor::PeriodicWrap(last)
                } else {
                    Neighbor::PhysicalBoundary
                };
                let upper = if rank < last {
                    Neighbor::Rank(rank + 1)
                } else if periodic {
                    Neighbor::PeriodicWrap(0)
                } else {
                    Neighbor::PhysicalBoundary
                };
                [lower, upper]
            });
            Partition {
                rank,
                layout: LocalLayout::new(lo, interior, ghost_per_axis),
                neighbors,
                data: Vec::new(),
            }
        })
        .collect::<Vec<_>>();
    let mut d = Decomposition {
        spec: spec.clone(),
        ghost,
        axis,
        partitions,
        starts,
        classes: Vec::new(),
        routes: Vec::new(),
    };
    d.routes = build_routes(&d);
    Ok(d)
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    /// Rank owning global index `i` along the decomposition axis.
    pub fn owner(&self, i: usize) -> usize {
        self.starts.partition_point(|&s| s <= i) - 1
    }

    pub fn class(&self, slot: usize) -> StorageClass {
        self.classes[slot]
    }

    pub fn owner_of(&self, g: [usize; 3]) -> usize {
        self.owner(g[self.axis])
    }

    /// Appends storage for one variable on every partition; returns its slot index.
    pub fn allocate(&mut self, class: StorageClass, timelevels: usize) -> usize {
        let slot = self.classes.len();
        self.classes.push(class);
        for p in &mut self.partitions {
            let len = match class {
                StorageClass::Grid => p.layout.len(),
                StorageClass::Scalar => 1,
            };
            debug_assert_eq!(p.data.len(), slot);
            p.data.push(VarStorage::zeroed(timelevels, len));
        }
        slot
    }

    /// Interior values of one variable at `level`, in ascending global index order.
    pub fn gather(&self, slot: usize, level: usize) -> Vec<f64> {
        if self.classes[slot] == StorageClass::Scalar {
            return vec![self.partitions[0].data[slot].levels[level][0]];
        }
        let total = self.spec.total_points();
        let mut out = vec![0.0; total];
        for p in &self.partitions {
            let values = &p.data[slot].levels[level];
            for (off, g) in p.layout.interior_points() {
                out[self.spec.linear_index(g)] = values[off];
            }
        }
        out
    }

    /// Writes global-order interior values into every partition; inverse of [`gather`](Self::gather).
    pub fn scatter(&mut self, slot: usize, level: usize, global: &[f64]) {
        for p in &mut self.partitions {
            let values = &mut p.data[slot].levels[level];
            if self.classes[slot] == StorageClass::Scalar {
                values[0] = global[0];
                continue;
            }
            for (off, g) in p.layout.interior_points() {
                values[off] = global[self.spec.linear_index(g)];
            }
        }
    }
}
