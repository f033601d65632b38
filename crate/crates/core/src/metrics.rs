//! Evaluation metrics over a run's outcomes: cloud processing cost, missed
//! deadlines, privacy, quality of result, and the composite quality of service
//!
//! ```text
//! QoS = 1/(cost + 1) · 1/(NMD + 1) · privacy · QoR
//! ```
//!
//! Privacy enters the product as a fraction in `[0, 1]`; the percentage form
//! is reported alongside.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infrastructure::{Layer, Platform};
use crate::policy::ExecutionMode;
use crate::scalar::Scalar;
use crate::simengine::{TaskOutcome, TraceReport};
use crate::workload::RealTimeClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrivacyWeighting {
    /// Each task weighs one.
    #[default]
    Count,
    /// Each task weighs its size in work units.
    Work,
}

/// Which misses count towards NMD.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NmdScope {
    #[default]
    All,
    /// Soft real-time misses are tolerated.
    HardFirm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound = "F: Scalar")]
pub struct MetricsConfig<F> {
    /// Result accuracy credited to an approximate execution.
    pub approx_accuracy: F,
    pub privacy_weighting: PrivacyWeighting,
    pub nmd_scope: NmdScope,
}

impl<F: Scalar> Default for MetricsConfig<F> {
    fn default() -> Self {
        Self {
            approx_accuracy: F::lit(0.95),
            privacy_weighting: PrivacyWeighting::Count,
            nmd_scope: NmdScope::All,
        }
    }
}

impl<F: Scalar> MetricsConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.approx_accuracy >= F::zero() && self.approx_accuracy <= F::one()) {
            return Err(Error::Metric(format!(
                "approx_accuracy must lie in [0, 1], got {}",
                self.approx_accuracy
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport<F> {
    /// Dollars spent on cloud processing.
    pub cost: F,
    pub nmd: usize,
    pub privacy_fraction: F,
    pub privacy_percent: F,
    pub qor: F,
    pub qos: F,
    pub ep_ul: usize,
    pub ep_rsu: usize,
    pub cp: usize,
}

/// Cloud processing hours times the rent price. Edge layers are free.
pub fn cost<F: Scalar>(outcomes: &[TaskOutcome<F>], srp: F) -> Result<F> {
    if !(srp >= F::zero()) {
        return Err(Error::Metric(format!("srp must be >= 0, got {srp}")));
    }
    Ok(outcomes
        .iter()
        .filter(|o| o.layer == Layer::Cloud)
        .fold(F::zero(), |acc, o| acc + o.processing_hours * srp))
}

pub fn nmd<F: Scalar>(outcomes: &[TaskOutcome<F>], scope: NmdScope) -> usize {
    outcomes
        .iter()
        .filter(|o| !o.deadline_met)
        .filter(|o| scope == NmdScope::All || o.rt != RealTimeClass::Soft)
        .count()
}

/// `(UL + K·cloud) / (UL + RSU + cloud)`. Shielded outcomes count fully in
/// the numerator wherever they ran.
pub fn privacy<F: Scalar>(
    outcomes: &[TaskOutcome<F>],
    k: F,
    weighting: PrivacyWeighting,
) -> Result<F> {
    if outcomes.is_empty() {
        return Err(Error::Metric("privacy is undefined without tasks".into()));
    }
    if !(k >= F::zero() && k <= F::one()) {
        return Err(Error::Metric(format!("k must lie in [0, 1], got {k}")));
    }
    match weighting {
        PrivacyWeighting::Count => {
            let (mut full, mut cloud) = (0usize, 0usize);
            for o in outcomes {
                if o.layer == Layer::UserLayer || o.shielded {
                    full += 1;
                } else if o.layer == Layer::Cloud {
                    cloud += 1;
                }
            }
            Ok((F::count(full) + k * F::count(cloud)) / F::count(outcomes.len()))
        }
        PrivacyWeighting::Work => {
            // total minus the uncredited work, so that full credit is exactly 1
            let (mut rsu, mut cloud, mut total) = (F::zero(), F::zero(), F::zero());
            for o in outcomes {
                total = total + o.size;
                if o.layer == Layer::UserLayer || o.shielded {
                    continue;
                }
                match o.layer {
                    Layer::Rsu => rsu = rsu + o.size,
                    _ => cloud = cloud + o.size,
                }
            }
            Ok((total - rsu - (F::one() - k) * cloud) / total)
        }
    }
}

/// Mean result accuracy: 1 for accurate executions, `approx_accuracy` for
/// approximate ones.
pub fn qor<F: Scalar>(outcomes: &[TaskOutcome<F>], approx_accuracy: F) -> Result<F> {
    if outcomes.is_empty() {
        return Err(Error::Metric("QoR is undefined without tasks".into()));
    }
    let approx = outcomes
        .iter()
        .filter(|o| o.mode == ExecutionMode::ApproximateProcessing)
        .count();
    let accurate = F::count(outcomes.len() - approx) / F::count(outcomes.len());
    // Convex form so the result stays inside [approx_accuracy, 1] after rounding.
    Ok((approx_accuracy + (F::one() - approx_accuracy) * accurate).min(F::one()))
}

pub fn qos<F: Scalar>(cost: F, nmd: usize, privacy_fraction: F, qor: F) -> F {
    F::one() / (cost + F::one()) * (F::one() / (F::count(nmd) + F::one())) * privacy_fraction * qor
}

pub fn summarize_outcomes<F: Scalar>(
    outcomes: &[TaskOutcome<F>],
    srp: F,
    k: F,
    config: &MetricsConfig<F>,
) -> Result<MetricsReport<F>> {
    config.validate()?;
    let cost = cost(outcomes, srp)?;
    let nmd = nmd(outcomes, config.nmd_scope);
    let privacy_fraction = privacy(outcomes, k, config.privacy_weighting)?;
    let qor = qor(outcomes, config.approx_accuracy)?;
    let count = |layer| outcomes.iter().filter(|o| o.layer == layer).count();
    Ok(MetricsReport {
        cost,
        nmd,
        privacy_fraction,
        privacy_percent: privacy_fraction * F::lit(100.0),
        qor,
        qos: qos(cost, nmd, privacy_fraction, qor),
        ep_ul: count(Layer::UserLayer),
        ep_rsu: count(Layer::Rsu),
        cp: count(Layer::Cloud),
    })
}

/// Metrics of one trace, priced and weighted by `platform`.
pub fn summarize<F: Scalar>(
    trace: &TraceReport<F>,
    platform: &Platform<F>,
    config: &MetricsConfig<F>,
) -> Result<MetricsReport<F>> {
    summarize_outcomes(&trace.outcomes, platform.srp(), platform.k_cloud(), config)
}
