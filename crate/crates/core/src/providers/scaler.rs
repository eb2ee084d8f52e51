use serde::{Deserialize, Serialize};

use crate::dsp::{AcousticFeatureVector, N_FEATURES};
use crate::providers::ProviderError;
use crate::Scalar;

pub const SCALER_SCHEMA_VERSION: u32 = 1;

/// Per-dimension z-score parameters with mean imputation, fitted on the
/// training split only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Scaler<T> {
    pub schema_version: u32,
    pub means: Vec<T>,
    pub stds: Vec<T>,
    pub impute_values: Vec<T>,
    /// Dimensions that were masked in every training sample.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub all_missing: Vec<usize>,
}

/// Fits means and population standard deviations over non-masked entries.
/// Zero-variance dimensions get std 1; fully masked dimensions get mean 0,
/// std 1 and are flagged in `all_missing`.
pub fn fit_scaler<T: Scalar>(features: &[AcousticFeatureVector<T>]) -> Result<Scaler<T>, ProviderError> {
    if features.is_empty() {
        return Err(ProviderError::Precondition(
            "cannot fit a scaler on an empty training set".into(),
        ));
    }
    for f in features {
        f.validate()
            .map_err(|e| ProviderError::Precondition(e.to_string()))?;
    }
    let mut means = vec![T::zero(); N_FEATURES];
    let mut stds = vec![T::one(); N_FEATURES];
    let mut all_missing = Vec::new();
    for d in 0..N_FEATURES {
        let present: Vec<T> = features
            .iter()
            .filter(|f| !f.mask[d])
            .map(|f| f.values[d])
            .collect();
        if present.is_empty() {
            all_missing.push(d);
            continue;
        }
        let n = T::from_usize_lossy(present.len());
        let mean = present.iter().copied().sum::<T>() / n;
        let var = present.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
        means[d] = mean;
        let std = var.sqrt();
        stds[d] = if std > T::zero() { std } else { T::one() };
    }
    if !all_missing.is_empty() {
        log::warn!("feature dimensions {all_missing:?} are missing in every training sample; imputing 0");
    }
    Ok(Scaler {
        schema_version: SCALER_SCHEMA_VERSION,
        impute_values: means.clone(),
        means,
        stds,
        all_missing,
    })
}

/// Imputes masked entries, then z-scores every dimension.
pub fn apply_scaler<T: Scalar>(scaler: &Scaler<T>, f: &AcousticFeatureVector<T>) -> Vec<T> {
    (0..N_FEATURES)
        .map(|d| {
            let v = if f.mask[d] {
                scaler.impute_values[d]
            } else {
                f.values[d]
            };
            (v - scaler.means[d]) / scaler.stds[d]
        })
        .collect()
}

impl<T: Scalar> Scaler<T> {
    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.schema_version != SCALER_SCHEMA_VERSION {
            return Err(ProviderError::Malformed {
                what: "scaler".into(),
                detail: format!("schema version {}", self.schema_version),
            });
        }
        let ok = [&self.means, &self.stds, &self.impute_values]
            .iter()
            .all(|v| v.len() == N_FEATURES);
        if !ok || self.stds.iter().any(|&s| !(s > T::zero())) {
            return Err(ProviderError::Malformed {
                what: "scaler".into(),
                detail: "wrong lengths or non-positive std".into(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vector(values: Vec<f64>, mask: Vec<bool>) -> AcousticFeatureVector<f64> {
        AcousticFeatureVector {
            schema_version: 1,
            values,
            mask,
        }
    }

    fn with_dim0(v: f64, masked: bool) -> AcousticFeatureVector<f64> {
        let mut values = vec![0.0; N_FEATURES];
        let mut mask = vec![false; N_FEATURES];
        values[0] = if masked { -9999.0 } else { v };
        mask[0] = masked;
        vector(values, mask)
    }

    #[test]
    fn population_std() {
        let s = fit_scaler(&[with_dim0(1.0, false), with_dim0(3.0, false)]).unwrap();
        assert_eq!(s.means[0], 2.0);
        assert_eq!(s.stds[0], 1.0);
    }

    #[test]
    fn identical_vectors_get_unit_std() {
        let s = fit_scaler(&[with_dim0(5.0, false), with_dim0(5.0, false)]).unwrap();
        assert!(s.stds.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn masked_entries_are_excluded() {
        let s = fit_scaler(&[with_dim0(2.0, false), with_dim0(0.0, true)]).unwrap();
        assert_eq!(s.means[0], 2.0);
        assert_eq!(s.impute_values[0], 2.0);
    }

    #[test]
    fn all_masked_dimension_flagged() {
        let s = fit_scaler(&[with_dim0(0.0, true)]).unwrap();
        assert_eq!(s.all_missing, vec![0]);
        assert_eq!(s.impute_values[0], 0.0);
        assert_eq!(s.stds[0], 1.0);
    }

    #[test]
    fn empty_training_set_errors() {
        assert!(fit_scaler::<f64>(&[]).is_err());
    }

    #[test]
    fn apply_examples() {
        let train = [with_dim0(1.0, false), with_dim0(3.0, false)];
        let s = fit_scaler(&train).unwrap();
        assert!(apply_scaler(&s, &with_dim0(2.0, false)).iter().all(|&v| v == 0.0));
        assert!(apply_scaler(&s, &with_dim0(0.0, true)).iter().all(|&v| v == 0.0));
        // mean + std -> 1
        assert_eq!(apply_scaler(&s, &with_dim0(3.0, false))[0], 1.0);
        let full_mask = vector(vec![-9999.0; N_FEATURES], vec![true; N_FEATURES]);
        assert!(apply_scaler(&s, &full_mask).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn json_fields() {
        let s = fit_scaler(&[with_dim0(1.0, false)]).unwrap();
        let j = serde_json::to_value(&s).unwrap();
        for k in ["means", "stds", "impute_values", "schema_version"] {
            assert!(j.get(k).is_some(), "missing {k}");
        }
        let back: Scaler<f64> = serde_json::from_value(j).unwrap();
        assert_eq!(back, s);
    }

    proptest! {
        #[test]
        fn standardized_training_set_is_centred(
            rows in proptest::collection::vec(proptest::collection::vec(-50.0f64..50.0, N_FEATURES), 2..12)
        ) {
            let data: Vec<_> = rows.iter().map(|r| vector(r.clone(), vec![false; N_FEATURES])).collect();
            let s = fit_scaler(&data).unwrap();
            let z: Vec<Vec<f64>> = data.iter().map(|f| apply_scaler(&s, f)).collect();
            let n = z.len() as f64;
            for d in 0..N_FEATURES {
                let col: Vec<f64> = z.iter().map(|r| r[d]).collect();
                let m = col.iter().sum::<f64>() / n;
                prop_assert!(m.abs() < 1e-9);
                let sd = (col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt();
                let raw_m = rows.iter().map(|r| r[d]).sum::<f64>() / n;
                let raw_var = rows.iter().map(|r| (r[d] - raw_m).powi(2)).sum::<f64>() / n;
                if raw_var > 1e-12 {
                    prop_assert!((sd - 1.0).abs() < 1e-6);
                }
            }
            // the training mean maps to the origin
            let mean_vec: Vec<f64> = (0..N_FEATURES).map(|d| rows.iter().map(|r| r[d]).sum::<f64>() / n).collect();
            let zm = apply_scaler(&s, &vector(mean_vec, vec![false; N_FEATURES]));
            prop_assert!(zm.iter().all(|v| v.abs() < 1e-9));
        }
    }
}
