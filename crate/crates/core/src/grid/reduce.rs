use super::decompose::Decomposition;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReductionKind {
    Sum,
    Min,
    Max,
    /// Root mean square over the interior.
    Norm2,
    NormInf,
}

impl ReductionKind {
    pub fn name(self) -> &'static str {
        match self {
            ReductionKind::Sum => "sum",
            ReductionKind::Min => "min",
            ReductionKind::Max => "max",
            ReductionKind::Norm2 => "norm2",
            ReductionKind::NormInf => "norm_inf",
        }
    }
}

impl fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReductionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "sum" => ReductionKind::Sum,
            "min" => ReductionKind::Min,
            "max" => ReductionKind::Max,
            "norm2" => ReductionKind::Norm2,
            "norm_inf" => ReductionKind::NormInf,
            other => return Err(format!("unknown reduction `{other}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionResult {
    pub kind: ReductionKind,
    pub value: f64,
}

/// Reduces values already in ascending global index order.
pub fn reduce_values(values: &[f64], kind: ReductionKind) -> f64 {
    match kind {
        ReductionKind::Sum => values.iter().fold(0.0, |acc, &v| acc + v),
        ReductionKind::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
        ReductionKind::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ReductionKind::Norm2 => {
            let sq = values.iter().fold(0.0, |acc, &v| acc + v * v);
            (sq / values.len() as f64).sqrt()
        }
        ReductionKind::NormInf => values.iter().fold(0.0, |acc: f64, &v| acc.max(v.abs())),
    }
}

impl Decomposition {
    /// Reduction over interior points of timelevel 0. Contributions are gathered to
    /// global order first, so the result does not depend on the partition count.
    pub fn reduce(&self, slot: usize, kind: ReductionKind) -> ReductionResult {
        let values = self.gather(slot, 0);
        ReductionResult {
            kind,
            value: reduce_values(&values, kind),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::decompose::{decompose, StorageClass};
    use super::super::spec::{AxisBoundary, GridSpec};
    use super::*;

    #[test]
    fn constant_field_rms_is_one() {
        let spec = GridSpec::uniform(2, 6, 0.0, 1.0, AxisBoundary::Periodic).unwrap();
        let mut d = decompose(&spec, 3, 1).unwrap();
        let slot = d.allocate(StorageClass::Grid, 1);
        d.scatter(slot, 0, &[1.0; 36]);
        assert_eq!(d.reduce(slot, ReductionKind::Norm2).value, 1.0);
    }

    #[test]
    fn hand_sums() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(reduce_values(&v, ReductionKind::Sum), 10.0);
        assert_eq!(reduce_values(&v, ReductionKind::NormInf), 4.0);
        assert_eq!(reduce_values(&v, ReductionKind::Min), 1.0);
        assert_eq!(reduce_values(&[-5.0, 2.0], ReductionKind::NormInf), 5.0);
    }

    #[test]
    fn sum_independent_of_partition_count() {
        let spec = GridSpec::uniform(1, 97, 0.0, 1.0, AxisBoundary::Periodic).unwrap();
        let global: Vec<f64> = (0..97).map(|i| (i as f64 * 0.37).sin() * 1e-3 + 1.0 / (i as f64 + 3.0)).collect();
        let sums: Vec<u64> = [1, 2, 5]
            .iter()
            .map(|&p| {
                let mut d = decompose(&spec, p, 1).unwrap();
                let slot = d.allocate(StorageClass::Grid, 1);
                d.scatter(slot, 0, &global);
                d.reduce(slot, ReductionKind::Sum).value.to_bits()
            })
            .collect();
        assert!(sums.windows(2).all(|w| w[0] == w[1]));
    }
}
