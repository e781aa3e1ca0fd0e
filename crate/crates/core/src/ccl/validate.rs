use super::config::RunConfig;
use super::manifest::{GroupRef, ScheduleLocation, ThornManifest};
use std::collections::{BTreeMap, HashSet};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    MissingManifest {
        thorn: String,
    },
    UnresolvedInherit {
        thorn: String,
        implementation: String,
    },
    UnknownGroupRef {
        thorn: String,
        routine: String,
        reference: GroupRef,
    },
    UnknownParameter {
        name: String,
        line: usize,
    },
    DuplicateImplementation {
        implementation: String,
        thorns: Vec<String>,
    },
    /// `before`/`after` names a routine not scheduled in the same bin or group.
    ConstraintOutsideLocation {
        thorn: String,
        routine: String,
        target: String,
        location: ScheduleLocation,
    },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::MissingManifest { thorn } => {
                write!(f, "active thorn `{thorn}` has no manifest")
            }
            ValidationIssue::UnresolvedInherit {
                thorn,
                implementation,
            } => write!(
                f,
                "thorn `{thorn}` inherits `{implementation}`, which no active thorn implements"
            ),
            ValidationIssue::UnknownGroupRef {
                thorn,
                routine,
                reference,
            } => write!(f, "{thorn}::{routine} references unknown group `{reference}`"),
            ValidationIssue::UnknownParameter { name, line } => {
                write!(f, "line {line}: assignment to unknown parameter `{name}`")
            }
            ValidationIssue::DuplicateImplementation {
                implementation,
                thorns,
            } => write!(
                f,
                "implementation `{implementation}` provided by several active thorns: {}",
                thorns.join(", ")
            ),
            ValidationIssue::ConstraintOutsideLocation {
                thorn,
                routine,
                target,
                location,
            } => write!(
                f,
                "{thorn}::{routine} orders itself against `{target}`, which is not scheduled {location}"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            writeln!(f, "error: {issue}")?;
        }
        Ok(())
    }
}

/// Checks that the active thorn set is closed under its declared dependencies.
pub fn validate_closure(manifests: &[ThornManifest], config: &RunConfig) -> ValidationReport {
    let mut issues = Vec::new();
    let mut active: Vec<&ThornManifest> = Vec::new();
    for name in &config.active_thorns {
        match manifests.iter().find(|m| &m.thorn_name == name) {
            Some(m) => active.push(m),
            None => issues.push(ValidationIssue::MissingManifest {
                thorn: name.clone(),
            }),
        }
    }

    let mut providers: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for m in &active {
        providers
            .entry(m.implementation.as_str())
            .or_default()
            .push(m.thorn_name.clone());
    }
    for (implementation, thorns) in &providers {
        if thorns.len() > 1 {
            issues.push(ValidationIssue::DuplicateImplementation {
                implementation: implementation.to_string(),
                thorns: thorns.clone(),
            });
        }
    }

    for m in &active {
        for inh in &m.inherits {
            if !providers.contains_key(inh.as_str()) {
                issues.push(ValidationIssue::UnresolvedInherit {
                    thorn: m.thorn_name.clone(),
                    implementation: inh.clone(),
                });
            }
        }
    }

    let known_groups: HashSet<(&str, &str)> = active
        .iter()
        .flat_map(|m| m.groups.iter().map(|g| (m.implementation.as_str(), g.name.as_str())))
        .collect();
    let mut routines_at: BTreeMap<&ScheduleLocation, HashSet<&str>> = BTreeMap::new();
    for m in &active {
        for s in &m.schedule_items {
            routines_at.entry(&s.location).or_default().insert(&s.routine);
        }
    }
    for m in &active {
        for s in &m.schedule_items {
            for r in s.reads.iter().chain(&s.writes).chain(&s.sync) {
                if !known_groups.contains(&(r.implementation.as_str(), r.group.as_str())) {
                    issues.push(ValidationIssue::UnknownGroupRef {
                        thorn: m.thorn_name.clone(),
                        routine: s.routine.clone(),
                        reference: r.clone(),
                    });
                }
            }
            let here = &routines_at[&s.location];
            for target in s.before.iter().chain(&s.after) {
                if !here.contains(target.as_str()) {
                    issues.push(ValidationIssue::ConstraintOutsideLocation {
                        thorn: m.thorn_name.clone(),
                        routine: s.routine.clone(),
                        target: target.clone(),
                        location: s.location.clone(),
                    });
                }
            }
        }
    }

    for a in &config.assignments {
        let declared = active
            .iter()
            .filter(|m| m.implementation == a.implementation)
            .any(|m| m.param(&a.name).is_some());
        if !declared {
            issues.push(ValidationIssue::UnknownParameter {
                name: a.full_name(),
                line: a.line,
            });
        }
    }

    ValidationReport { issues }
}
