use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{sum, Scalar};

/// A measurable probability vector: non-negative entries summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist<T> {
    entries: Vec<T>,
}

/// A signed vector summing to one. Negative entries are allowed here and
/// only here; converting back to [`Dist`] re-checks positivity.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiDist<T> {
    entries: Vec<T>,
}

fn check_sum<T: Scalar>(entries: &[T]) -> Result<()> {
    let total = sum(entries);
    if !total.near(&T::one()) {
        return Err(Error::NotNormalized { sum: total.to_string() });
    }
    Ok(())
}

impl<T: Scalar> Dist<T> {
    pub fn new(entries: Vec<T>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::DimensionTooSmall {
                min: 2,
                found: entries.len(),
            });
        }
        if let Some((index, value)) = entries.iter().enumerate().find(|(_, v)| v.is_below_zero()) {
            return Err(Error::NegativeEntry {
                index,
                value: value.to_string(),
            });
        }
        check_sum(&entries)?;
        Ok(Self { entries })
    }

    /// Build from `(numerator, denominator)` pairs.
    pub fn from_fractions(parts: &[(i64, i64)]) -> Result<Self> {
        Self::new(parts.iter().map(|&(n, d)| T::from_fraction(n, d)).collect())
    }

    /// Scale integer weights by their total, e.g. `[2, 1, 0]` → ⅓(2, 1, 0).
    pub fn from_weights(weights: &[i64]) -> Result<Self> {
        let total: i64 = weights.iter().sum();
        if total <= 0 {
            return Err(Error::NotNormalized { sum: total.to_string() });
        }
        Self::new(weights.iter().map(|&w| T::from_fraction(w, total)).collect())
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        Self::new(vec![T::from_fraction(1, dim as i64); dim])
    }

    /// Point mass on `index`.
    pub fn delta(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index + 1,
            });
        }
        let mut entries = vec![T::zero(); dim];
        entries[index] = T::one();
        Self::new(entries)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }

    pub fn to_quasi(&self) -> QuasiDist<T> {
        QuasiDist {
            entries: self.entries.clone(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(Scalar::to_f64_lossy).collect()
    }

    /// Indices whose entry is exactly (or, for floats, nearly) zero.
    pub fn zero_positions(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, v)| v.near(&T::zero()))
            .map(|(i, _)| i)
            .collect()
    }

    /// Convex combination `Σ wᵢ·pᵢ`. Weights must be non-negative and sum to one.
    pub fn mixture(parts: &[(T, &Dist<T>)]) -> Result<Self> {
        let dim = parts.first().map(|(_, d)| d.dim()).unwrap_or(0);
        let mut entries = vec![T::zero(); dim];
        for (w, d) in parts {
            if d.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d.dim(),
                });
            }
            for (acc, v) in entries.iter_mut().zip(d.entries()) {
                *acc = acc.clone() + w.clone() * v.clone();
            }
        }
        Self::new(entries)
    }
}

impl<T: Scalar> QuasiDist<T> {
    pub fn new(entries: Vec<T>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::DimensionTooSmall { min: 1, found: 0 });
        }
        check_sum(&entries)?;
        Ok(Self { entries })
    }

    pub(crate) fn new_unchecked(entries: Vec<T>) -> Self {
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn is_nonneg(&self) -> bool {
        self.entries.iter().all(Scalar::is_nonneg)
    }

    /// First index holding a negative value.
    pub fn first_negative(&self) -> Option<usize> {
        self.entries.iter().position(Scalar::is_below_zero)
    }

    /// Re-enter the measurable world; fails on any negative entry.
    pub fn to_dist(&self) -> Result<Dist<T>> {
        Dist::new(self.entries.clone())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(Scalar::to_f64_lossy).collect()
    }
}

fn write_entries<T: fmt::Display>(f: &mut fmt::Formatter<'_>, entries: &[T]) -> fmt::Result {
    write!(f, "(")?;
    for (i, e) in entries.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{e}")?;
    }
    write!(f, ")")
}

impl<T: fmt::Display> fmt::Display for Dist<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_entries(f, &self.entries)
    }
}

impl<T: fmt::Display> fmt::Display for QuasiDist<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_entries(f, &self.entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn rejects_bad_vectors() {
        assert!(matches!(
            Dist::<Rational>::from_fractions(&[(1, 2), (1, 3)]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            Dist::<Rational>::from_fractions(&[(3, 2), (-1, 2)]),
            Err(Error::NegativeEntry { index: 1, .. })
        ));
        assert!(matches!(
            Dist::<Rational>::from_fractions(&[(1, 1)]),
            Err(Error::DimensionTooSmall { .. })
        ));
    }

    #[test]
    fn quasi_allows_negatives() {
        let q = QuasiDist::<Rational>::new(vec![
            Rational::from_fraction(2, 3),
            Rational::from_fraction(2, 3),
            Rational::from_fraction(-1, 3),
        ])
        .unwrap();
        assert!(!q.is_nonneg());
        assert_eq!(q.first_negative(), Some(2));
        assert!(q.to_dist().is_err());
        assert_eq!(q.to_string(), "(2/3, 2/3, -1/3)");
    }

    #[test]
    fn weights_and_zeros() {
        let d = Dist::<Rational>::from_weights(&[2, 1, 0]).unwrap();
        assert_eq!(d.entries()[0], Rational::from_fraction(2, 3));
        assert_eq!(d.zero_positions(), vec![2]);
    }
}
