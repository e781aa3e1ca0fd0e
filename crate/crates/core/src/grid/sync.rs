//! Ghost-zone exchange between partitions.
//!
//! Every ghost point is filled from the partition that owns its global index
//! (wrapped on periodic axes). Ghost points beyond a physical face are left
//! for the boundary operators. The exchange is expressed as copy messages so
//! it does not depend on partitions sharing an address space.

use super::decompose::{Decomposition, Side};
use super::spec::AxisBoundary;

/// Static description of the copies from one source partition into one face of a destination.
#[derive(Debug, Clone)]
pub(crate) struct GhostRoute {
    pub from: usize,
    pub to: usize,
    pub face: (usize, Side),
    pub src: Vec<usize>,
    pub dst: Vec<usize>,
}

/// One exchange message carrying ghost data.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostMessage {
    pub from: usize,
    pub to: usize,
    pub face: (usize, Side),
    pub payload: Vec<f64>,
}

pub(crate) fn build_routes(d: &Decomposition) -> Vec<GhostRoute> {
    let spec = &d.spec;
    let mut routes: Vec<GhostRoute> = Vec::new();
    for p in &d.partitions {
        let layout = &p.layout;
        let mut by_key: Vec<GhostRoute> = Vec::new();
        'points: for off in 0..layout.len() {
            let local = layout.unravel(off);
            if layout.is_interior(local) {
                continue;
            }
            let g = layout.global_of(local);
            let mut wrapped = [0usize; 3];
            let mut face = None;
            for a in 0..3 {
                let inside = local[a] >= layout.ghost[a] && local[a] < layout.ghost[a] + layout.interior[a];
                if !inside && face.is_none() {
                    let side = if local[a] < layout.ghost[a] { Side::Lower } else { Side::Upper };
                    face = Some((a, side));
                }
                let n = spec.global_n[a] as isize;
                if g[a] < 0 || g[a] >= n {
                    if spec.boundary[a] == AxisBoundary::Physical {
                        continue 'points;
                    }
                    wrapped[a] = g[a].rem_euclid(n) as usize;
                } else {
                    wrapped[a] = g[a] as usize;
                }
            }
            let face = face.expect("ghost point lies outside the interior on some axis");
            let from = d.owner_of(wrapped);
            let src_off = d.partitions[from].layout.offset_of_global(wrapped);
            match by_key.iter_mut().find(|r| r.from == from && r.face == face) {
                Some(r) => {
                    r.src.push(src_off);
                    r.dst.push(off);
                }
                None => by_key.push(GhostRoute {
                    from,
                    to: p.rank,
                    face,
                    src: vec![src_off],
                    dst: vec![off],
                }),
            }
        }
        routes.extend(by_key);
    }
    routes
}

impl Decomposition {
    /// Messages that would refresh the ghosts of variable `slot` at timelevel 0.
    pub fn ghost_messages(&self, slot: usize) -> Vec<GhostMessage> {
        self.routes
            .iter()
            .map(|r| {
                let src = &self.partitions[r.from].data[slot].levels[0];
                GhostMessage {
                    from: r.from,
                    to: r.to,
                    face: r.face,
                    payload: r.src.iter().map(|&i| src[i]).collect(),
                }
            })
            .collect()
    }

    /// Refreshes ghost points of the given variables at timelevel 0.
    /// Barrier semantics: all messages are formed before any is delivered.
    pub fn sync_ghosts(&mut self, slots: &[usize]) {
        if self.ghost == 0 {
            return;
        }
        for &slot in slots {
            let messages = self.ghost_messages(slot);
            for (route, msg) in self.routes.iter().zip(messages) {
                let dst = &mut self.partitions[msg.to].data[slot].levels[0];
                for (&i, v) in route.dst.iter().zip(msg.payload) {
                    dst[i] = v;
                }
            }
        }
    }
}
