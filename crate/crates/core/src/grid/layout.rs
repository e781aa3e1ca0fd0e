/// Index arithmetic for one partition's local array (interior plus ghost layers).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalLayout {
    /// Global index of the first owned interior point.
    pub lo: [usize; 3],
    pub interior: [usize; 3],
    pub ghost: [usize; 3],
    pub shape: [usize; 3],
}

impl LocalLayout {
    pub fn new(lo: [usize; 3], interior: [usize; 3], ghost: [usize; 3]) -> Self {
        let shape = [
            interior[0] + 2 * ghost[0],
            interior[1] + 2 * ghost[1],
            interior[2] + 2 * ghost[2],
        ];
        LocalLayout {
            lo,
            interior,
            ghost,
            shape,
        }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.shape[0],
            _ => self.shape[0] * self.shape[1],
        }
    }

    pub fn index(&self, local: [usize; 3]) -> usize {
        (local[2] * self.shape[1] + local[1]) * self.shape[0] + local[0]
    }

    pub fn unravel(&self, mut idx: usize) -> [usize; 3] {
        let i = idx % self.shape[0];
        idx /= self.shape[0];
        let j = idx % self.shape[1];
        [i, j, idx / self.shape[1]]
    }

    /// Global index of a local point; negative or past-the-end values mean outside the domain.
    pub fn global_of(&self, local: [usize; 3]) -> [isize; 3] {
        std::array::from_fn(|a| self.lo[a] as isize + local[a] as isize - self.ghost[a] as isize)
    }

    /// Local offset of an owned global point.
    pub fn offset_of_global(&self, g: [usize; 3]) -> usize {
        self.index(std::array::from_fn(|a| g[a] - self.lo[a] + self.ghost[a]))
    }

    pub fn is_interior(&self, local: [usize; 3]) -> bool {
        (0..3).all(|a| local[a] >= self.ghost[a] && local[a] < self.ghost[a] + self.interior[a])
    }

    pub fn owns(&self, g: [usize; 3]) -> bool {
        (0..3).all(|a| g[a] >= self.lo[a] && g[a] < self.lo[a] + self.interior[a])
    }

    /// Interior points as `(local offset, global index)`, in ascending global order (axis 0 fastest).
    pub fn interior_points(&self) -> impl Iterator<Item = (usize, [usize; 3])> + '_ {
        let [nx, ny, nz] = self.interior;
        (0..nz).flat_map(move |k| {
            (0..ny).flat_map(move |j| {
                (0..nx).map(move |i| {
                    let local = [i + self.ghost[0], j + self.ghost[1], k + self.ghost[2]];
                    (self.index(local), [i + self.lo[0], j + self.lo[1], k + self.lo[2]])
                })
            })
        })
    }
}
