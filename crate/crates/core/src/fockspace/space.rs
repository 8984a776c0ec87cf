use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const QUBIT: &str = "qubit";
pub const MODE_A: &str = "a";
pub const MODE_B: &str = "b";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

/// Ordered tensor-product structure. The first subsystem is the slowest-varying
/// index of the flattened basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertSpec {
    subsystems: Vec<Subsystem>,
}

impl HilbertSpec {
    pub fn new<S: Into<String>>(parts: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut subsystems: Vec<Subsystem> = Vec::new();
        for (label, dim) in parts {
            let label = label.into();
            if dim < 2 {
                return Err(Error::InvalidDimension(dim));
            }
            if subsystems.iter().any(|s| s.label == label) {
                return Err(Error::IncompatibleSpaces(format!("duplicate label `{label}`")));
            }
            subsystems.push(Subsystem { label, dim });
        }
        if subsystems.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        Ok(HilbertSpec { subsystems })
    }

    /// Qubit (2 or 3 levels) followed by modes `a` and `b`, qubit index slowest.
    pub fn qubit_two_modes(qubit_levels: usize, n_a: usize, n_b: usize) -> Result<Self> {
        if !(2..=3).contains(&qubit_levels) {
            return Err(Error::LevelMismatch(format!("qubit must have 2 or 3 levels, got {qubit_levels}")));
        }
        Self::new([(QUBIT, qubit_levels), (MODE_A, n_a), (MODE_B, n_b)])
    }

    pub fn two_modes(n_a: usize, n_b: usize) -> Result<Self> {
        Self::new([(MODE_A, n_a), (MODE_B, n_b)])
    }

    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|s| s.dim).product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn has(&self, label: &str) -> bool {
        self.subsystems.iter().any(|s| s.label == label)
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.subsystems[self.position(label)?].dim)
    }

    /// Flattened index stride of each subsystem.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.subsystems.len()];
        for k in (0..self.subsystems.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.subsystems[k + 1].dim;
        }
        strides
    }

    pub fn flat_index(&self, digits: &[usize]) -> usize {
        assert_eq!(digits.len(), self.subsystems.len());
        self.strides().iter().zip(digits).map(|(s, d)| s * d).sum()
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.subsystems.len()];
        for (k, s) in self.subsystems.iter().enumerate().rev() {
            out[k] = index % s.dim;
            index /= s.dim;
        }
        out
    }

    /// Sub-specification containing only `keep`, in this spec's order.
    pub fn restrict(&self, keep: &[&str]) -> Result<Self> {
        for l in keep {
            self.position(l)?;
        }
        let parts: Vec<(String, usize)> = self
            .subsystems
            .iter()
            .filter(|s| keep.contains(&s.label.as_str()))
            .map(|s| (s.label.clone(), s.dim))
            .collect();
        Self::new(parts)
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        Self::new(
            self.subsystems
                .iter()
                .chain(other.subsystems.iter())
                .map(|s| (s.label.clone(), s.dim)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_is_slowest_index() {
        let spec = HilbertSpec::qubit_two_modes(2, 3, 4).unwrap();
        assert_eq!(spec.total_dim(), 24);
        assert_eq!(spec.strides(), vec![12, 4, 1]);
        assert_eq!(spec.flat_index(&[1, 2, 3]), 23);
        assert_eq!(spec.digits(23), vec![1, 2, 3]);
        assert_eq!(spec.position(QUBIT).unwrap(), 0);
    }

    #[test]
    fn rejects_small_dims_and_duplicates() {
        assert_eq!(HilbertSpec::single("x", 1), Err(Error::InvalidDimension(1)));
        assert!(HilbertSpec::new([("x", 2), ("x", 3)]).is_err());
        assert!(HilbertSpec::qubit_two_modes(4, 3, 3).is_err());
    }
}
