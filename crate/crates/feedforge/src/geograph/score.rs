use super::{CandidateGraph, GeoError, RoadClass};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Composite weight coefficients: `w = lambda_d * d + lambda_c * c_cls +
/// lambda_b * c_bend`. Length already enters the synthesis objective through
/// its own term, so `lambda_d` defaults to zero to avoid counting it twice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringWeights<F> {
    pub lambda_d: F,
    pub lambda_c: F,
    pub lambda_b: F,
}

impl<F: Scalar> Default for ScoringWeights<F> {
    fn default() -> Self {
        ScoringWeights {
            lambda_d: F::zero(),
            lambda_c: F::one(),
            lambda_b: F::one(),
        }
    }
}

impl<F: Scalar> ScoringWeights<F> {
    pub fn validate(&self) -> Result<(), GeoError> {
        for (name, v) in [
            ("lambda_d", self.lambda_d),
            ("lambda_c", self.lambda_c),
            ("lambda_b", self.lambda_b),
        ] {
            if !v.is_finite() || v < F::zero() {
                return Err(GeoError::InvalidScoring(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if self.lambda_d == F::zero() && self.lambda_c == F::zero() && self.lambda_b == F::zero() {
            return Err(GeoError::InvalidScoring(
                "at least one lambda must be positive".to_string(),
            ));
        }
        Ok(())
    }
}

/// Per-class routing penalties. Classes without an entry are excluded from
/// ingestion and rejected by scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassPenalties<F>(pub BTreeMap<RoadClass, F>);

impl<F: Scalar> Default for ClassPenalties<F> {
    fn default() -> Self {
        ClassPenalties(
            [
                ("residential", 1.0),
                ("tertiary", 1.5),
                ("secondary", 2.5),
                ("primary", 4.0),
            ]
            .into_iter()
            .map(|(c, p)| (RoadClass::new(c), F::of(p)))
            .collect(),
        )
    }
}

impl<F: Scalar> ClassPenalties<F> {
    pub fn get(&self, class: &RoadClass) -> Option<F> {
        self.0.get(class).copied()
    }

    /// The classes this table admits, usable as an ingestion filter.
    pub fn classes(&self) -> std::collections::BTreeSet<RoadClass> {
        self.0.keys().cloned().collect()
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        for (class, &p) in &self.0 {
            if !p.is_finite() || p < F::zero() {
                return Err(GeoError::InvalidScoring(format!(
                    "penalty for class '{class}' must be finite and non-negative, got {p}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoringConfig<F> {
    pub weights: ScoringWeights<F>,
    pub class_penalties: ClassPenalties<F>,
}

impl<F: Scalar> Default for ScoringConfig<F> {
    fn default() -> Self {
        ScoringConfig {
            weights: ScoringWeights::default(),
            class_penalties: ClassPenalties::default(),
        }
    }
}

/// Fills `c_cls` and the composite weight `w` on every edge. Fails on a road
/// class with no penalty entry, naming the class.
pub fn score_edges<F: Scalar>(
    graph: &CandidateGraph<F>,
    config: &ScoringConfig<F>,
) -> Result<CandidateGraph<F>, GeoError> {
    config.weights.validate()?;
    config.class_penalties.validate()?;
    let mut out = graph.clone();
    let w = &config.weights;
    for e in out.edges.iter_mut() {
        let c_cls = config
            .class_penalties
            .get(&e.class)
            .ok_or_else(|| GeoError::UnknownRoadClass(e.class.clone()))?;
        e.c_cls = c_cls;
        e.w = w.lambda_d * e.d + w.lambda_c * c_cls + w.lambda_b * e.c_bend;
    }
    out.weights = Some(*w);
    Ok(out)
}
