//! Gaussian naive Bayes over word feature vectors.
//!
//! Every dimension, including each binary trigram indicator, gets one Gaussian
//! per class. Words are scored independently of their synset partners.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Feature, FeatureMask, FeatureVector};

pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub mean: f64,
    pub variance: f64,
    pub sample_count: u64,
}

impl GaussianParams {
    /// Sample mean and unbiased variance, floored. Values are summed in sorted
    /// order so the result does not depend on input order.
    pub fn fit(mut values: Vec<f64>) -> Self {
        let n = values.len();
        if n == 0 {
            return GaussianParams {
                mean: 0.0,
                variance: VARIANCE_FLOOR,
                sample_count: 0,
            };
        }
        values.sort_by(f64::total_cmp);
        let mean = values.iter().sum::<f64>() / n as f64;
        let variance = if n < 2 {
            VARIANCE_FLOOR
        } else {
            values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        };
        GaussianParams {
            mean,
            variance: variance.max(VARIANCE_FLOOR),
            sample_count: n as u64,
        }
    }

    /// Parameters of a 0/1 indicator that is set in `ones` of `n` samples.
    pub fn fit_binary(ones: u64, n: u64) -> Self {
        if n == 0 {
            return GaussianParams::fit(Vec::new());
        }
        let mean = ones as f64 / n as f64;
        let variance = if n < 2 {
            VARIANCE_FLOOR
        } else {
            let zeros = (n - ones) as f64;
            (ones as f64 * (1.0 - mean).powi(2) + zeros * mean * mean) / (n - 1) as f64
        };
        GaussianParams {
            mean,
            variance: variance.max(VARIANCE_FLOOR),
            sample_count: n,
        }
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        gaussian_log_pdf(self, x)
    }
}

pub fn gaussian_log_pdf(params: &GaussianParams, x: f64) -> f64 {
    -0.5 * (2.0 * PI * params.variance).ln() - (x - params.mean).powi(2) / (2.0 * params.variance)
}

/// The two class-conditional Gaussians of one dimension (index 0 = loser, 1 = winner).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarDimension {
    pub feature: Feature,
    pub classes: [GaussianParams; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigramDimension {
    pub trigram: String,
    pub classes: [GaussianParams; 2],
}

fn same_gaussians(c: &[GaussianParams; 2]) -> bool {
    c[0].mean == c[1].mean && c[0].variance == c[1].variance
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub features: FeatureMask,
    pub class_counts: [u64; 2],
    pub priors: [f64; 2],
    pub scalars: Vec<ScalarDimension>,
    /// Sorted by trigram.
    pub trigrams: Vec<TrigramDimension>,
}

impl NaiveBayesModel {
    pub fn fit(vectors: &[FeatureVector]) -> Result<Self> {
        Self::fit_with(vectors, FeatureMask::all())
    }

    /// Fits using only the features in `mask`.
    pub fn fit_with(vectors: &[FeatureVector], mask: FeatureMask) -> Result<Self> {
        let mut by_class: [Vec<&FeatureVector>; 2] = [Vec::new(), Vec::new()];
        for v in vectors {
            match v.target_class {
                Some(c @ (0 | 1)) => by_class[c as usize].push(v),
                _ => {
                    return Err(Error::Invalid(format!(
                        "training vector {} has no target class",
                        v.sense
                    )))
                }
            }
        }
        if let Some(c) = by_class.iter().position(Vec::is_empty) {
            return Err(Error::Unfittable(c as u8));
        }
        let n = vectors.len() as f64;
        let class_counts = [by_class[0].len() as u64, by_class[1].len() as u64];
        let priors = [
            (class_counts[0] as f64 + 1.0) / (n + 2.0),
            (class_counts[1] as f64 + 1.0) / (n + 2.0),
        ];

        let scalars = Feature::SCALARS
            .into_iter()
            .filter(|f| mask.contains(*f))
            .map(|feature| ScalarDimension {
                feature,
                classes: [0, 1].map(|c| {
                    GaussianParams::fit(
                        by_class[c]
                            .iter()
                            .map(|v| v.scalar(feature).expect("scalar feature"))
                            .collect(),
                    )
                }),
            })
            .collect();

        let trigrams = if mask.contains(Feature::UniqueNgrams) {
            let space: BTreeSet<&str> = vectors
                .iter()
                .flat_map(|v| v.unique_ngrams.iter())
                .collect();
            space
                .into_par_iter()
                .map(|t| TrigramDimension {
                    trigram: t.to_string(),
                    classes: [0, 1].map(|c| {
                        let ones = by_class[c]
                            .iter()
                            .filter(|v| v.unique_ngrams.contains(t))
                            .count() as u64;
                        GaussianParams::fit_binary(ones, class_counts[c])
                    }),
                })
                .collect()
        } else {
            Vec::new()
        };

        Ok(NaiveBayesModel {
            features: mask,
            class_counts,
            priors,
            scalars,
            trigrams,
        })
    }

    /// Unnormalized log posterior of each class. Dimensions whose two
    /// Gaussians coincide are skipped since they add the same term to both.
    pub fn class_scores(&self, v: &FeatureVector) -> [f64; 2] {
        let mut scores = [self.priors[0].ln(), self.priors[1].ln()];
        for dim in &self.scalars {
            if same_gaussians(&dim.classes) {
                continue;
            }
            let x = v.scalar(dim.feature).expect("scalar feature");
            for (score, params) in scores.iter_mut().zip(&dim.classes) {
                *score += params.log_pdf(x);
            }
        }
        for dim in &self.trigrams {
            if same_gaussians(&dim.classes) {
                continue;
            }
            let x = if v.unique_ngrams.contains(&dim.trigram) {
                1.0
            } else {
                0.0
            };
            for (score, params) in scores.iter_mut().zip(&dim.classes) {
                *score += params.log_pdf(x);
            }
        }
        scores
    }

    /// `ln P(winner) - ln P(loser)`; orders words exactly like the probability
    /// but does not saturate.
    pub fn log_odds(&self, v: &FeatureVector) -> f64 {
        let [s0, s1] = self.class_scores(v);
        s1 - s0
    }

    pub fn win_probability(&self, v: &FeatureVector) -> f64 {
        let lo = self.log_odds(v);
        if lo >= 0.0 {
            1.0 / (1.0 + (-lo).exp())
        } else {
            let e = lo.exp();
            e / (1.0 + e)
        }
    }

    pub fn scalar_dimension(&self, feature: Feature) -> Option<&ScalarDimension> {
        self.scalars.iter().find(|d| d.feature == feature)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
