use super::FleshError;
use crate::ccl::{parse_bool, ParamDecl, ParamType, ParamValue, RawValue, Steerable};
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

/// When a parameter change is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Binding the run configuration; every parameter may be set.
    Initial,
    /// Restoring from a checkpoint; `recover` and `always` parameters may be set.
    Recovery,
    /// While running; only `always` parameters may be set.
    Steering,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamEntry {
    pub implementation: String,
    pub decl: ParamDecl,
    pub value: ParamValue,
}

impl ParamEntry {
    pub fn full_name(&self) -> String {
        format!("{}::{}", self.implementation, self.decl.name)
    }
}

/// Every parameter of the active thorns, keyed by `impl::name`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParameterStore {
    entries: BTreeMap<String, ParamEntry>,
}

impl ParameterStore {
    pub fn declare(&mut self, implementation: &str, decl: &ParamDecl) {
        self.entries.insert(
            format!("{implementation}::{}", decl.name),
            ParamEntry {
                implementation: implementation.to_string(),
                decl: decl.clone(),
                value: decl.default.clone(),
            },
        );
    }

    pub fn entry(&self, name: &str) -> Option<&ParamEntry> {
        self.entries.get(name)
    }

    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.entries.get(name).map(|e| &e.value)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ParamEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn typed(&self, name: &str, want: ParamType) -> Result<&ParamValue, FleshError> {
        let e = self
            .entries
            .get(name)
            .ok_or_else(|| FleshError::UnknownParameter(name.to_string()))?;
        if e.decl.ptype != want {
            return Err(FleshError::BadValue {
                name: name.to_string(),
                reason: format!("is {}, not {}", e.decl.ptype.keyword(), want.keyword()),
            });
        }
        Ok(&e.value)
    }

    pub fn real(&self, name: &str) -> Result<f64, FleshError> {
        Ok(self.typed(name, ParamType::Real)?.as_real().unwrap())
    }

    pub fn int(&self, name: &str) -> Result<i64, FleshError> {
        Ok(self.typed(name, ParamType::Int)?.as_int().unwrap())
    }

    pub fn keyword(&self, name: &str) -> Result<&str, FleshError> {
        Ok(self.typed(name, ParamType::Keyword)?.as_str().unwrap())
    }

    pub fn string(&self, name: &str) -> Result<&str, FleshError> {
        Ok(self.typed(name, ParamType::String)?.as_str().unwrap())
    }

    pub fn boolean(&self, name: &str) -> Result<bool, FleshError> {
        Ok(self.typed(name, ParamType::Boolean)?.as_bool().unwrap())
    }

    /// Type- and range-checks `value`, then checks the phase may change it, then stores it.
    pub fn set(&mut self, name: &str, value: ParamValue, phase: Phase) -> Result<(), FleshError> {
        let entry = self
            .entries
            .get_mut(name)
            .ok_or_else(|| FleshError::UnknownParameter(name.to_string()))?;
        let value = coerce(&entry.decl, value).map_err(|reason| FleshError::BadValue {
            name: name.to_string(),
            reason,
        })?;
        if !entry.decl.range.admits(&value) {
            return Err(FleshError::OutOfRange {
                name: name.to_string(),
                value: value.to_string(),
                range: entry.decl.range.to_string(),
            });
        }
        let allowed = match phase {
            Phase::Initial => true,
            Phase::Recovery => entry.decl.steerable != Steerable::Never,
            Phase::Steering => entry.decl.steerable == Steerable::Always,
        };
        if !allowed {
            return Err(FleshError::NotSteerable {
                name: name.to_string(),
                steerable: entry.decl.steerable.keyword(),
            });
        }
        entry.value = value;
        Ok(())
    }

    /// Types a value written in a run configuration against the declaration, then sets it.
    pub fn set_text(&mut self, name: &str, raw: &RawValue, phase: Phase) -> Result<(), FleshError> {
        let decl = &self
            .entries
            .get(name)
            .ok_or_else(|| FleshError::UnknownParameter(name.to_string()))?
            .decl;
        let value = type_text(decl.ptype, raw).map_err(|reason| FleshError::BadValue {
            name: name.to_string(),
            reason,
        })?;
        self.set(name, value, phase)
    }

    /// Hash of every name and value, for detecting changes.
    pub fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for (k, e) in &self.entries {
            k.hash(&mut h);
            match &e.value {
                ParamValue::Real(x) => x.to_bits().hash(&mut h),
                ParamValue::Int(i) => i.hash(&mut h),
                ParamValue::Keyword(s) | ParamValue::Str(s) => s.hash(&mut h),
                ParamValue::Boolean(b) => b.hash(&mut h),
            }
        }
        h.finish()
    }
}

fn coerce(decl: &ParamDecl, value: ParamValue) -> Result<ParamValue, String> {
    Ok(match (decl.ptype, value) {
        (ParamType::Real, ParamValue::Real(x)) => ParamValue::Real(x),
        (ParamType::Real, ParamValue::Int(i)) => ParamValue::Real(i as f64),
        (ParamType::Int, ParamValue::Int(i)) => ParamValue::Int(i),
        (ParamType::Int, ParamValue::Real(x)) if x.fract() == 0.0 && x.abs() < 9.0e15 => ParamValue::Int(x as i64),
        (ParamType::Keyword, ParamValue::Keyword(s) | ParamValue::Str(s)) => ParamValue::Keyword(s),
        (ParamType::String, ParamValue::Str(s) | ParamValue::Keyword(s)) => ParamValue::Str(s),
        (ParamType::Boolean, ParamValue::Boolean(b)) => ParamValue::Boolean(b),
        (t, v) => return Err(format!("expected a {} value, got {v}", t.keyword())),
    })
}

fn type_text(ptype: ParamType, raw: &RawValue) -> Result<ParamValue, String> {
    let t = raw.text.trim();
    match ptype {
        ParamType::Real => t
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(ParamValue::Real)
            .ok_or_else(|| format!("`{t}` is not a real number")),
        ParamType::Int => t
            .parse::<i64>()
            .map(ParamValue::Int)
            .map_err(|_| format!("`{t}` is not an integer")),
        ParamType::Keyword => Ok(ParamValue::Keyword(raw.text.clone())),
        ParamType::String => Ok(ParamValue::Str(raw.text.clone())),
        ParamType::Boolean => parse_bool(t)
            .map(ParamValue::Boolean)
            .ok_or_else(|| format!("`{t}` is not a boolean")),
    }
}
