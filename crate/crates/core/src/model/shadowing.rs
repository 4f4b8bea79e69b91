use serde::{Deserialize, Serialize};

use super::{ModelError, DEPTH_RANGE_MM};

/// How the shadowing variance is evaluated between tabulated depths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    NearestBin,
    #[default]
    LinearInVariance,
}

/// Depth-binned variance of the shadowing term, in dB².
///
/// A single-bin profile describes a depth-independent σ. Outside the first
/// and last bin the end values are held constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowingProfile {
    bins: Vec<(f64, f64)>,
    interpolation: Interpolation,
}

impl ShadowingProfile {
    pub fn new(bins: Vec<(f64, f64)>, interpolation: Interpolation) -> Result<Self, ModelError> {
        for (i, &(depth, var)) in bins.iter().enumerate() {
            if !(DEPTH_RANGE_MM.0..=DEPTH_RANGE_MM.1).contains(&depth) {
                return Err(ModelError::DepthOutOfRange { depth_mm: depth });
            }
            if !(var >= 0.0 && var.is_finite()) {
                return Err(ModelError::InvalidParameter(format!(
                    "shadowing variance at {depth} mm must be finite and >= 0, got {var}"
                )));
            }
            if i > 0 && depth <= bins[i - 1].0 {
                return Err(ModelError::InvalidParameter(
                    "shadowing bin depths must be strictly increasing".into(),
                ));
            }
        }
        Ok(Self { bins, interpolation })
    }

    /// Depth-independent shadowing with standard deviation `sigma_db`.
    pub fn constant(sigma_db: f64) -> Result<Self, ModelError> {
        if !(sigma_db >= 0.0 && sigma_db.is_finite()) {
            return Err(ModelError::InvalidParameter(format!(
                "sigma must be finite and >= 0, got {sigma_db}"
            )));
        }
        Self::new(vec![(DEPTH_RANGE_MM.0, sigma_db * sigma_db)], Interpolation::NearestBin)
    }

    pub fn empty() -> Self {
        Self { bins: Vec::new(), interpolation: Interpolation::default() }
    }

    pub fn bins(&self) -> &[(f64, f64)] {
        &self.bins
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn with_interpolation(mut self, interpolation: Interpolation) -> Self {
        self.interpolation = interpolation;
        self
    }

    /// Shadowing variance (dB²) at `depth_mm`.
    pub fn variance_at(&self, depth_mm: f64) -> Result<f64, ModelError> {
        super::check_depth(depth_mm)?;
        let bins = &self.bins;
        let (first, last) = match (bins.first(), bins.last()) {
            (Some(f), Some(l)) => (*f, *l),
            _ => return Err(ModelError::EmptyProfile),
        };
        if depth_mm <= first.0 {
            return Ok(first.1);
        }
        if depth_mm >= last.0 {
            return Ok(last.1);
        }
        // first index whose depth is >= depth_mm; guaranteed in 1..len
        let hi = bins.partition_point(|&(d, _)| d < depth_mm);
        let (d0, v0) = bins[hi - 1];
        let (d1, v1) = bins[hi];
        Ok(match self.interpolation {
            Interpolation::NearestBin => {
                // ties go to the shallower bin
                if depth_mm - d0 <= d1 - depth_mm {
                    v0
                } else {
                    v1
                }
            }
            Interpolation::LinearInVariance => v0 + (v1 - v0) * (depth_mm - d0) / (d1 - d0),
        })
    }

    pub fn sigma_at(&self, depth_mm: f64) -> Result<f64, ModelError> {
        self.variance_at(depth_mm).map(f64::sqrt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ShadowingProfile {
        ShadowingProfile::new(vec![(10.0, 1.0), (20.0, 3.0), (40.0, 7.0)], Interpolation::LinearInVariance)
            .unwrap()
    }

    #[test]
    fn linear_between_bins() {
        let p = table();
        assert_eq!(p.variance_at(10.0).unwrap(), 1.0);
        assert_eq!(p.variance_at(15.0).unwrap(), 2.0);
        assert_eq!(p.variance_at(30.0).unwrap(), 5.0);
        assert_eq!(p.variance_at(40.0).unwrap(), 7.0);
        // held beyond the last bin
        assert_eq!(p.variance_at(100.0).unwrap(), 7.0);
    }

    #[test]
    fn nearest_bin() {
        let p = table().with_interpolation(Interpolation::NearestBin);
        assert_eq!(p.variance_at(14.0).unwrap(), 1.0);
        assert_eq!(p.variance_at(15.0).unwrap(), 1.0);
        assert_eq!(p.variance_at(16.0).unwrap(), 3.0);
        assert_eq!(p.variance_at(31.0).unwrap(), 7.0);
    }

    #[test]
    fn constant_profile() {
        let p = ShadowingProfile::constant(3.0).unwrap();
        for d in [10.0, 55.0, 100.0] {
            assert_eq!(p.variance_at(d).unwrap(), 9.0);
            assert_eq!(p.sigma_at(d).unwrap(), 3.0);
        }
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(ShadowingProfile::new(vec![(20.0, 1.0), (10.0, 2.0)], Interpolation::NearestBin).is_err());
        assert!(ShadowingProfile::new(vec![(10.0, 1.0), (10.0, 2.0)], Interpolation::NearestBin).is_err());
        assert!(ShadowingProfile::new(vec![(10.0, -1.0)], Interpolation::NearestBin).is_err());
        assert!(ShadowingProfile::new(vec![(5.0, 1.0)], Interpolation::NearestBin).is_err());
        assert!(ShadowingProfile::constant(-1.0).is_err());
    }

    #[test]
    fn empty_profile_errors() {
        assert_eq!(ShadowingProfile::empty().variance_at(50.0), Err(ModelError::EmptyProfile));
        assert!(matches!(table().variance_at(120.0), Err(ModelError::DepthOutOfRange { .. })));
    }
}
