//! Interpolation knot sets on the positive half-line.

use thiserror::Error;

/// Radii below this are rejected; the construction needs `0 < r_1`.
pub const MIN_RADIUS: f64 = 1e-12;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum KnotError {
    #[error("knot set must contain at least one radius")]
    Empty,
    #[error("radii must be strictly increasing: violation at index {index} ({left} >= {right})")]
    NotIncreasing { index: usize, left: f64, right: f64 },
    #[error("radius {value} at index {index} is below the minimum {MIN_RADIUS}")]
    TooSmall { index: usize, value: f64 },
    #[error("radius {value} at index {index} is not finite")]
    NotFinite { index: usize, value: f64 },
}

/// Strictly increasing positive radii `r_1 < ... < r_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotSet {
    radii: Vec<f64>,
}

impl KnotSet {
    pub fn new(radii: Vec<f64>) -> Result<Self, KnotError> {
        if radii.is_empty() {
            return Err(KnotError::Empty);
        }
        for (i, &r) in radii.iter().enumerate() {
            if !r.is_finite() {
                return Err(KnotError::NotFinite { index: i, value: r });
            }
            if r < MIN_RADIUS {
                return Err(KnotError::TooSmall { index: i, value: r });
            }
        }
        for i in 1..radii.len() {
            if radii[i] <= radii[i - 1] {
                return Err(KnotError::NotIncreasing {
                    index: i,
                    left: radii[i - 1],
                    right: radii[i],
                });
            }
        }
        Ok(Self { radii })
    }

    /// `n` equispaced radii covering `[a, b]`.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self, KnotError> {
        if n == 1 {
            return Self::new(vec![a]);
        }
        let h = (b - a) / (n - 1) as f64;
        Self::new((0..n).map(|i| a + i as f64 * h).collect())
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees n >= 1
    }

    pub fn first(&self) -> f64 {
        self.radii[0]
    }

    pub fn last(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    /// Largest gap between consecutive radii; 0 for a single knot.
    pub fn mesh_size(&self) -> f64 {
        self.radii
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(KnotSet::new(vec![]).unwrap_err(), KnotError::Empty);
        assert!(matches!(
            KnotSet::new(vec![1.0, 1.0]).unwrap_err(),
            KnotError::NotIncreasing { index: 1, .. }
        ));
        assert!(matches!(
            KnotSet::new(vec![1e-13]).unwrap_err(),
            KnotError::TooSmall { .. }
        ));
        assert!(matches!(
            KnotSet::new(vec![f64::NAN]).unwrap_err(),
            KnotError::NotFinite { .. }
        ));
    }

    #[test]
    fn mesh_size() {
        let k = KnotSet::new(vec![1.0, 1.5, 2.5]).unwrap();
        assert_eq!(k.mesh_size(), 1.0);
        assert_eq!(KnotSet::new(vec![2.0]).unwrap().mesh_size(), 0.0);
        let u = KnotSet::uniform(1.0, 2.0, 5).unwrap();
        assert_eq!(u.len(), 5);
        assert!((u.mesh_size() - 0.25).abs() < 1e-15);
    }
}
