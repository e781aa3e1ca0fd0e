//! Boundary operators for physical (non-periodic) faces.

use super::decompose::{Neighbor, Partition, Side};
use super::GridError;
use crate::ccl::Parity;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// Mirror the interior across the face with the variable's parity sign.
    Reflective,
    /// Outgoing-wave fill by first-order linear extrapolation,
    /// `u_ghost(k) = u_edge + k (u_edge - u_inner)`.
    Radiative,
}

/// One variable to be treated: its storage slot, parity and declared timelevels.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryTarget {
    pub slot: usize,
    pub parity: Parity,
    pub timelevels: usize,
}

/// Fills the ghost layers behind every physical face of `p`, at timelevel 0.
pub fn apply_boundary_local(
    p: &mut Partition,
    targets: &[BoundaryTarget],
    condition: BoundaryCondition,
) -> Result<(), GridError> {
    if condition == BoundaryCondition::Radiative {
        if let Some(t) = targets.iter().find(|t| t.timelevels < 2) {
            return Err(GridError::MissingTimelevel { slot: t.slot });
        }
    }
    let layout = p.layout;
    for axis in 0..3 {
        let g = layout.ghost[axis];
        if g == 0 {
            continue;
        }
        let n = layout.interior[axis];
        for side in [Side::Lower, Side::Upper] {
            if p.neighbor(axis, side) != Neighbor::PhysicalBoundary {
                continue;
            }
            // plane index of the ghost at distance k, of the mirrored interior point, of edge and inner
            let ghost_plane = |k: usize| match side {
                Side::Lower => g - k,
                Side::Upper => g + n + k - 1,
            };
            let mirror_plane = |k: usize| match side {
                Side::Lower => g + k - 1,
                Side::Upper => g + n - k,
            };
            let (edge, inner) = match side {
                Side::Lower => (g, g + 1),
                Side::Upper => (g + n - 1, g + n - 2),
            };
            let stride = layout.stride(axis);
            for t in targets {
                let values = &mut p.data[t.slot].levels[0];
                for base in plane_offsets(&layout.shape, axis) {
                    for k in 1..=g {
                        let dst = base + ghost_plane(k) * stride;
                        values[dst] = match condition {
                            BoundaryCondition::Reflective => {
                                t.parity.sign() * values[base + mirror_plane(k) * stride]
                            }
                            BoundaryCondition::Radiative => {
                                let e = values[base + edge * stride];
                                let i = values[base + inner * stride];
                                e + k as f64 * (e - i)
                            }
                        };
                    }
                }
            }
        }
    }
    Ok(())
}

/// Offsets of every point with coordinate 0 along `axis`, over the full local extent of the other axes.
fn plane_offsets(shape: &[usize; 3], axis: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let dims: [usize; 3] = std::array::from_fn(|a| if a == axis { 1 } else { shape[a] });
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                out.push((k * shape[1] + j) * shape[0] + i);
            }
        }
    }
    out
}
