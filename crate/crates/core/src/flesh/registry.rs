//! Run-time reflection over the variables of the active thorns.

use crate::ccl::{GroupKind, GroupRef, Parity, ThornManifest};
use std::collections::{BTreeMap, HashMap};

/// Index of a variable; also its storage slot on every partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct VariableHandle {
    pub id: VarId,
    /// `impl::var`
    pub full_name: String,
    pub implementation: String,
    pub name: String,
    pub group: GroupRef,
    pub kind: GroupKind,
    pub timelevels: usize,
    pub ghost: usize,
    pub parity: Parity,
    pub index_in_group: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupInfo {
    pub reference: GroupRef,
    pub kind: GroupKind,
    pub timelevels: usize,
    pub ghost: usize,
    pub members: Vec<VarId>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VariableRegistry {
    vars: Vec<VariableHandle>,
    by_name: HashMap<String, VarId>,
    groups: BTreeMap<GroupRef, GroupInfo>,
}

impl VariableRegistry {
    /// Builds the registry. Ids follow the sorted full names, so they do not depend on
    /// the order in which thorns were activated.
    pub fn build<'a>(manifests: impl IntoIterator<Item = &'a ThornManifest>) -> Self {
        let mut staged: BTreeMap<String, VariableHandle> = BTreeMap::new();
        let mut groups = BTreeMap::new();
        for m in manifests {
            for g in &m.groups {
                let reference = GroupRef::new(&m.implementation, &g.name);
                for (i, member) in g.members.iter().enumerate() {
                    let full_name = format!("{}::{}", m.implementation, member.name);
                    staged.insert(
                        full_name.clone(),
                        VariableHandle {
                            id: VarId(0),
                            full_name,
                            implementation: m.implementation.clone(),
                            name: member.name.clone(),
                            group: reference.clone(),
                            kind: g.kind,
                            timelevels: g.timelevels as usize,
                            ghost: g.ghost as usize,
                            parity: member.parity,
                            index_in_group: i,
                        },
                    );
                }
                groups.insert(
                    reference.clone(),
                    GroupInfo {
                        reference,
                        kind: g.kind,
                        timelevels: g.timelevels as usize,
                        ghost: g.ghost as usize,
                        members: Vec::new(),
                    },
                );
            }
        }
        let mut vars: Vec<VariableHandle> = staged.into_values().collect();
        let mut by_name = HashMap::new();
        for (i, v) in vars.iter_mut().enumerate() {
            v.id = VarId(i);
            by_name.insert(v.full_name.clone(), v.id);
        }
        for g in groups.values_mut() {
            let mut members: Vec<&VariableHandle> = vars.iter().filter(|v| v.group == g.reference).collect();
            members.sort_by_key(|v| v.index_in_group);
            g.members = members.into_iter().map(|v| v.id).collect();
        }
        VariableRegistry { vars, by_name, groups }
    }

    pub fn lookup(&self, full_name: &str) -> Option<&VariableHandle> {
        self.by_name.get(full_name).map(|id| &self.vars[id.0])
    }

    pub fn get(&self, id: VarId) -> &VariableHandle {
        &self.vars[id.0]
    }

    /// Variables whose full name matches the `*`-wildcard pattern, sorted by name.
    pub fn matching(&self, pattern: &str) -> Vec<&VariableHandle> {
        self.vars.iter().filter(|v| glob_match(pattern, &v.full_name)).collect()
    }

    /// Union of several whitespace-separated patterns, sorted and without duplicates.
    pub fn matching_any(&self, patterns: &str) -> Vec<&VariableHandle> {
        let pats: Vec<&str> = patterns.split_whitespace().collect();
        self.vars
            .iter()
            .filter(|v| pats.iter().any(|p| glob_match(p, &v.full_name)))
            .collect()
    }

    pub fn group(&self, reference: &GroupRef) -> Option<&GroupInfo> {
        self.groups.get(reference)
    }

    pub fn groups(&self) -> impl Iterator<Item = &GroupInfo> {
        self.groups.values()
    }

    pub fn iter(&self) -> impl Iterator<Item = &VariableHandle> {
        self.vars.iter()
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }
}

/// Matches `text` against a pattern whose only metacharacter is `*`.
pub fn glob_match(pattern: &str, text: &str) -> bool {
    let parts: Vec<&str> = pattern.split('*').collect();
    if parts.len() == 1 {
        return pattern == text;
    }
    let (first, last) = (parts[0], parts[parts.len() - 1]);
    if !text.starts_with(first) || text.len() < first.len() + last.len() || !text.ends_with(last) {
        return false;
    }
    let mut rest = &text[first.len()..text.len() - last.len()];
    for mid in &parts[1..parts.len() - 1] {
        match rest.find(mid) {
            Some(i) => rest = &rest[i + mid.len()..],
            None => return false,
        }
    }
    true
}
