use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sle_lab_core::loewner::EstimatorRecord;
use sle_lab_core::stats::Estimate;

/// A reported number. Stochastic values carry `std_error`; values checked
/// against a reference carry the `tolerance` used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<Tolerance>,
}

impl Quantity {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: None,
            reference: None,
            tolerance: None,
        }
    }

    pub fn stochastic(e: Estimate) -> Self {
        Self {
            value: e.value,
            std_error: Some(e.std_error),
            reference: None,
            tolerance: None,
        }
    }

    pub fn against(mut self, reference: f64, tolerance: Tolerance) -> Self {
        self.reference = Some(reference);
        self.tolerance = Some(tolerance);
        self
    }

    /// Whether the value meets its tolerance; `None` without one.
    pub fn passes(&self) -> Option<bool> {
        let (r, tol) = (self.reference?, self.tolerance?);
        let diff = (self.value - r).abs();
        Some(match tol {
            Tolerance::Absolute { value } => diff <= value,
            Tolerance::Relative { value } => diff <= value * r.abs(),
            Tolerance::StdErrors { k, relative_floor } => {
                diff <= (k * self.std_error.unwrap_or(0.0)).max(relative_floor * r.abs())
            }
            Tolerance::Below { k } => r - self.value > k * self.std_error.unwrap_or(0.0),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tolerance {
    Absolute { value: f64 },
    Relative { value: f64 },
    /// Within `max(k SE, relative_floor |reference|)`.
    StdErrors { k: f64, relative_floor: f64 },
    /// Below the reference by more than `k SE`.
    Below { k: f64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub params: serde_json::Value,
    pub values: BTreeMap<String, Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    pub seed: u64,
    pub acceptance: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub estimators: Vec<EstimatorRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub artifacts: Vec<String>,
    pub tool_version: String,
    pub wall_time_s: f64,
}

impl ResultRecord {
    pub fn new(params: serde_json::Value) -> Self {
        Self {
            params,
            ..Default::default()
        }
    }

    pub fn insert(&mut self, name: &str, q: Quantity) -> &mut Self {
        self.values.insert(name.to_string(), q);
        self
    }

    /// Marks the record acceptance-tagged and sets `passed` from every
    /// quantity that has a tolerance.
    pub fn judge(&mut self) {
        self.acceptance = true;
        self.passed = Some(self.values.values().filter_map(Quantity::passes).all(|p| p));
    }
}
