use super::manifest::*;
use std::fmt::Write;

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

/// Canonical text form of a manifest. Re-parsing the output yields an equal manifest.
pub fn print_manifest(m: &ThornManifest) -> String {
    let mut out = String::new();
    writeln!(out, "thorn {}", m.thorn_name).unwrap();
    writeln!(out, "implements {}", m.implementation).unwrap();
    if !m.inherits.is_empty() {
        writeln!(out, "inherits {}", m.inherits.join(", ")).unwrap();
    }
    for g in &m.groups {
        writeln!(
            out,
            "\ngroup {} kind={} timelevels={} ghost={} parity={}",
            g.name,
            g.kind.keyword(),
            g.timelevels,
            g.ghost,
            g.parity.keyword()
        )
        .unwrap();
        let members: Vec<String> = g
            .members
            .iter()
            .map(|v| {
                if v.parity == g.parity {
                    v.name.clone()
                } else {
                    format!("{}:{}", v.name, v.parity.keyword())
                }
            })
            .collect();
        writeln!(out, "{{ {} }}", members.join(", ")).unwrap();
    }
    for d in &m.params {
        writeln!(
            out,
            "\nparam {} {} \"{}\"",
            d.ptype.keyword(),
            d.name,
            escape(&d.description)
        )
        .unwrap();
        writeln!(
            out,
            "{{ {} }} default {} steerable={}",
            d.range,
            d.default,
            d.steerable.keyword()
        )
        .unwrap();
    }
    for s in &m.schedule_items {
        write!(out, "\nschedule {} {}", s.routine, s.location).unwrap();
        for b in &s.before {
            write!(out, " before {b}").unwrap();
        }
        for a in &s.after {
            write!(out, " after {a}").unwrap();
        }
        out.push_str("\n{");
        for (label, refs) in [("reads", &s.reads), ("writes", &s.writes), ("sync", &s.sync)] {
            if !refs.is_empty() {
                write!(out, " {label}: {}", join(refs)).unwrap();
            }
        }
        writeln!(out, " }} \"{}\"", escape(&s.description)).unwrap();
    }
    out
}
