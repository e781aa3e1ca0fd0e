//! Typed thorn manifest produced by the parser.

use std::fmt;

/// Parsed declaration of one thorn.
#[derive(Debug, Clone, PartialEq)]
pub struct ThornManifest {
    pub thorn_name: String,
    pub implementation: String,
    pub inherits: Vec<String>,
    pub groups: Vec<GroupDecl>,
    pub params: Vec<ParamDecl>,
    pub schedule_items: Vec<ScheduleDecl>,
}

impl ThornManifest {
    pub fn group(&self, name: &str) -> Option<&GroupDecl> {
        self.groups.iter().find(|g| g.name == name)
    }

    pub fn param(&self, name: &str) -> Option<&ParamDecl> {
        self.params.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKind {
    GridFunction,
    Scalar,
}

impl GroupKind {
    pub fn keyword(self) -> &'static str {
        match self {
            GroupKind::GridFunction => "GF",
            GroupKind::Scalar => "SCALAR",
        }
    }
}

/// Mirror sign used by the reflective boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Parity {
    #[default]
    Even,
    Odd,
}

impl Parity {
    pub fn keyword(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemberDecl {
    pub name: String,
    pub parity: Parity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupDecl {
    pub name: String,
    pub kind: GroupKind,
    pub timelevels: u8,
    pub ghost: u8,
    /// Group-wide parity; members may override it individually.
    pub parity: Parity,
    pub members: Vec<MemberDecl>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamType {
    Real,
    Int,
    Keyword,
    Boolean,
    String,
}

impl ParamType {
    pub fn keyword(self) -> &'static str {
        match self {
            ParamType::Real => "real",
            ParamType::Int => "int",
            ParamType::Keyword => "keyword",
            ParamType::Boolean => "boolean",
            ParamType::String => "string",
        }
    }

    /// Tag used by the checkpoint container.
    pub fn tag(self) -> u8 {
        match self {
            ParamType::Real => 0,
            ParamType::Int => 1,
            ParamType::Keyword => 2,
            ParamType::Boolean => 3,
            ParamType::String => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Real(f64),
    Int(i64),
    Keyword(String),
    Boolean(bool),
    Str(String),
}

impl ParamValue {
    pub fn param_type(&self) -> ParamType {
        match self {
            ParamValue::Real(_) => ParamType::Real,
            ParamValue::Int(_) => ParamType::Int,
            ParamValue::Keyword(_) => ParamType::Keyword,
            ParamValue::Boolean(_) => ParamType::Boolean,
            ParamValue::Str(_) => ParamType::String,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match *self {
            ParamValue::Real(x) => Some(x),
            ParamValue::Int(i) => Some(i as f64),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match *self {
            ParamValue::Int(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ParamValue::Keyword(s) | ParamValue::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match *self {
            ParamValue::Boolean(b) => Some(b),
            _ => None,
        }
    }

    /// Bitwise equality (reals compared by representation).
    pub fn same_bits(&self, other: &ParamValue) -> bool {
        match (self, other) {
            (ParamValue::Real(a), ParamValue::Real(b)) => a.to_bits() == b.to_bits(),
            _ => self == other,
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Real(x) => write!(f, "{x:?}"),
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Keyword(s) | ParamValue::Str(s) => write!(f, "\"{}\"", escape(s)),
            ParamValue::Boolean(b) => write!(f, "{}", if *b { "yes" } else { "no" }),
        }
    }
}

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

/// One end of a numeric interval. `None` stands for `*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound<T> {
    pub value: Option<T>,
    pub inclusive: bool,
}

impl<T> Bound<T> {
    pub fn unbounded() -> Self {
        Bound {
            value: None,
            inclusive: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamRange {
    Real { lo: Bound<f64>, hi: Bound<f64> },
    Int { lo: Bound<i64>, hi: Bound<i64> },
    Keywords(Vec<String>),
    /// Boolean and string parameters accept any value of their type.
    Any,
}

fn within<T: PartialOrd + Copy>(x: T, lo: &Bound<T>, hi: &Bound<T>) -> bool {
    let above = match lo.value {
        None => true,
        Some(l) if lo.inclusive => x >= l,
        Some(l) => x > l,
    };
    let below = match hi.value {
        None => true,
        Some(h) if hi.inclusive => x <= h,
        Some(h) => x < h,
    };
    above && below
}

impl ParamRange {
    pub fn admits(&self, value: &ParamValue) -> bool {
        match (self, value) {
            (ParamRange::Real { lo, hi }, ParamValue::Real(x)) => !x.is_nan() && within(*x, lo, hi),
            (ParamRange::Int { lo, hi }, ParamValue::Int(i)) => within(*i, lo, hi),
            (ParamRange::Keywords(set), ParamValue::Keyword(k)) => set.iter().any(|s| s == k),
            (ParamRange::Any, ParamValue::Boolean(_) | ParamValue::Str(_)) => true,
            _ => false,
        }
    }
}

impl fmt::Display for ParamRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn interval<T: fmt::Debug>(
            f: &mut fmt::Formatter<'_>,
            lo: &Bound<T>,
            hi: &Bound<T>,
        ) -> fmt::Result {
            if !lo.inclusive {
                f.write_str("(")?;
            }
            match &lo.value {
                Some(v) => write!(f, "{v:?}")?,
                None => f.write_str("*")?,
            }
            f.write_str(":")?;
            match &hi.value {
                Some(v) => write!(f, "{v:?}")?,
                None => f.write_str("*")?,
            }
            if !hi.inclusive {
                f.write_str(")")?;
            }
            Ok(())
        }
        match self {
            ParamRange::Real { lo, hi } => interval(f, lo, hi),
            ParamRange::Int { lo, hi } => interval(f, lo, hi),
            ParamRange::Keywords(set) => {
                let quoted: Vec<String> = set.iter().map(|s| format!("\"{}\"", escape(s))).collect();
                f.write_str(&quoted.join(" | "))
            }
            ParamRange::Any => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Steerable {
    #[default]
    Never,
    Always,
    Recover,
}

impl Steerable {
    pub fn keyword(self) -> &'static str {
        match self {
            Steerable::Never => "never",
            Steerable::Always => "always",
            Steerable::Recover => "recover",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamDecl {
    pub name: String,
    pub ptype: ParamType,
    pub description: String,
    pub range: ParamRange,
    pub default: ParamValue,
    pub steerable: Steerable,
}

/// The fixed set of schedule bins, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bin {
    Startup,
    ParamCheck,
    Initial,
    PreStep,
    Evol,
    PostStep,
    Analysis,
    Terminate,
}

impl Bin {
    pub const ALL: [Bin; 8] = [
        Bin::Startup,
        Bin::ParamCheck,
        Bin::Initial,
        Bin::PreStep,
        Bin::Evol,
        Bin::PostStep,
        Bin::Analysis,
        Bin::Terminate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Bin::Startup => "STARTUP",
            Bin::ParamCheck => "PARAMCHECK",
            Bin::Initial => "INITIAL",
            Bin::PreStep => "PRESTEP",
            Bin::Evol => "EVOL",
            Bin::PostStep => "POSTSTEP",
            Bin::Analysis => "ANALYSIS",
            Bin::Terminate => "TERMINATE",
        }
    }

    pub fn from_name(name: &str) -> Option<Bin> {
        Bin::ALL.into_iter().find(|b| b.name() == name)
    }
}

impl fmt::Display for Bin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a routine is scheduled: a bin, or a named schedule group run by another thorn.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScheduleLocation {
    Bin(Bin),
    Group(String),
}

impl fmt::Display for ScheduleLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleLocation::Bin(b) => write!(f, "at {b}"),
            ScheduleLocation::Group(g) => write!(f, "in {g}"),
        }
    }
}

/// `impl::group` reference.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupRef {
    pub implementation: String,
    pub group: String,
}

impl GroupRef {
    pub fn new(implementation: impl Into<String>, group: impl Into<String>) -> Self {
        GroupRef {
            implementation: implementation.into(),
            group: group.into(),
        }
    }
}

impl fmt::Display for GroupRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}", self.implementation, self.group)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleDecl {
    pub routine: String,
    pub location: ScheduleLocation,
    pub before: Vec<String>,
    pub after: Vec<String>,
    pub reads: Vec<GroupRef>,
    pub writes: Vec<GroupRef>,
    pub sync: Vec<GroupRef>,
    pub description: String,
}
