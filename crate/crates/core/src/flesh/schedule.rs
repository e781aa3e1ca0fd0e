//! Schedule tree construction: per bin and per schedule group, a topological
//! order of the routines under their before/after constraints. Ties between
//! simultaneously available routines go to the lexicographically least
//! `thorn::routine` key.

use super::FleshError;
use crate::ccl::{Bin, GroupRef, ScheduleLocation, ThornManifest};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledCall {
    pub thorn: String,
    pub implementation: String,
    pub routine: String,
    pub reads: Vec<GroupRef>,
    pub writes: Vec<GroupRef>,
    pub sync: Vec<GroupRef>,
    pub description: String,
}

impl ScheduledCall {
    /// `thorn::routine`
    pub fn key(&self) -> String {
        format!("{}::{}", self.thorn, self.routine)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScheduleTree {
    pub bins: BTreeMap<Bin, Vec<ScheduledCall>>,
    pub groups: BTreeMap<String, Vec<ScheduledCall>>,
}

impl ScheduleTree {
    pub fn calls(&self, location: &ScheduleLocation) -> &[ScheduledCall] {
        match location {
            ScheduleLocation::Bin(b) => self.bins.get(b).map_or(&[], Vec::as_slice),
            ScheduleLocation::Group(g) => self.groups.get(g).map_or(&[], Vec::as_slice),
        }
    }

    pub fn bin(&self, bin: Bin) -> &[ScheduledCall] {
        self.calls(&ScheduleLocation::Bin(bin))
    }

    pub fn group(&self, name: &str) -> &[ScheduledCall] {
        self.groups.get(name).map_or(&[], Vec::as_slice)
    }

    /// Routine keys per location, bins in execution order followed by groups.
    pub fn keys(&self) -> Vec<(String, Vec<String>)> {
        let bins = Bin::ALL
            .iter()
            .map(|b| (b.name().to_string(), self.bin(*b).iter().map(ScheduledCall::key).collect()));
        let groups = self
            .groups
            .iter()
            .map(|(g, calls)| (g.clone(), calls.iter().map(ScheduledCall::key).collect()));
        bins.chain(groups).collect()
    }
}

impl fmt::Display for ScheduleTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let section = |f: &mut fmt::Formatter<'_>, title: String, calls: &[ScheduledCall]| {
            writeln!(f, "{title}")?;
            if calls.is_empty() {
                writeln!(f, "  (empty)")?;
            }
            for c in calls {
                write!(f, "  {}", c.key())?;
                if !c.sync.is_empty() {
                    let s: Vec<String> = c.sync.iter().map(ToString::to_string).collect();
                    write!(f, "  [sync: {}]", s.join(", "))?;
                }
                writeln!(f)?;
            }
            Ok(())
        };
        for b in Bin::ALL {
            section(f, b.name().to_string(), self.bin(b))?;
        }
        for (g, calls) in &self.groups {
            section(f, format!("group {g}"), calls)?;
        }
        Ok(())
    }
}

struct Node<'a> {
    key: String,
    call: ScheduledCall,
    before: &'a [String],
    after: &'a [String],
}

/// Builds the schedule tree of the given (active) manifests.
pub fn build_schedule<'a>(
    manifests: impl IntoIterator<Item = &'a ThornManifest>,
) -> Result<ScheduleTree, FleshError> {
    let mut by_location: BTreeMap<ScheduleLocation, Vec<Node<'a>>> = BTreeMap::new();
    for m in manifests {
        for s in &m.schedule_items {
            let call = ScheduledCall {
                thorn: m.thorn_name.clone(),
                implementation: m.implementation.clone(),
                routine: s.routine.clone(),
                reads: s.reads.clone(),
                writes: s.writes.clone(),
                sync: s.sync.clone(),
                description: s.description.clone(),
            };
            by_location.entry(s.location.clone()).or_default().push(Node {
                key: call.key(),
                call,
                before: &s.before,
                after: &s.after,
            });
        }
    }
    let mut tree = ScheduleTree::default();
    for b in Bin::ALL {
        tree.bins.insert(b, Vec::new());
    }
    for (location, mut nodes) in by_location {
        nodes.sort_by(|a, b| a.key.cmp(&b.key));
        let order = order_location(&location, &nodes)?;
        let calls: Vec<ScheduledCall> = order.into_iter().map(|i| nodes[i].call.clone()).collect();
        match location {
            ScheduleLocation::Bin(b) => {
                tree.bins.insert(b, calls);
            }
            ScheduleLocation::Group(g) => {
                tree.groups.insert(g, calls);
            }
        }
    }
    Ok(tree)
}

/// Kahn's algorithm with the least available key chosen first. `nodes` is sorted by key,
/// so index order equals key order.
fn order_location(location: &ScheduleLocation, nodes: &[Node<'_>]) -> Result<Vec<usize>, FleshError> {
    let n = nodes.len();
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let resolve = |from: usize, target: &str| -> Result<Vec<usize>, FleshError> {
        let hits: Vec<usize> = (0..n).filter(|&j| nodes[j].call.routine == target).collect();
        if hits.is_empty() {
            return Err(FleshError::UnknownRoutineRef {
                routine: nodes[from].key.clone(),
                reference: target.to_string(),
                location: location.to_string(),
            });
        }
        Ok(hits)
    };
    for (i, node) in nodes.iter().enumerate() {
        for t in node.before {
            for j in resolve(i, t)? {
                succ[i].insert(j);
            }
        }
        for t in node.after {
            for j in resolve(i, t)? {
                succ[j].insert(i);
            }
        }
    }
    let mut indeg = vec![0usize; n];
    for s in &succ {
        for &j in s {
            indeg[j] += 1;
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                ready.insert(j);
            }
        }
    }
    if order.len() < n {
        let remaining: BTreeSet<usize> = (0..n).filter(|i| indeg[*i] > 0).collect();
        let cycle = find_cycle(&succ, &remaining);
        return Err(FleshError::CycleDetected {
            location: location.to_string(),
            routines: cycle.into_iter().map(|i| nodes[i].key.clone()).collect(),
        });
    }
    Ok(order)
}

/// Every node left after Kahn's algorithm has a predecessor that is also left, so walking
/// predecessors must revisit a node; the revisited stretch is a cycle.
fn find_cycle(succ: &[BTreeSet<usize>], remaining: &BTreeSet<usize>) -> Vec<usize> {
    let pred = |j: usize| {
        remaining
            .iter()
            .copied()
            .find(|&i| succ[i].contains(&j))
            .expect("remaining node without remaining predecessor")
    };
    let mut path = Vec::new();
    let mut seen = BTreeMap::new();
    let mut cur = *remaining.first().unwrap();
    while !seen.contains_key(&cur) {
        seen.insert(cur, path.len());
        path.push(cur);
        cur = pred(cur);
    }
    let mut cycle = path[seen[&cur]..].to_vec();
    cycle.reverse();
    cycle
}
