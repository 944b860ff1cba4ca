//! JSON report documents.
//!
//! Reports are byte-deterministic: field order is fixed by struct
//! declaration, floats serialize with shortest round-trip formatting, and
//! nothing time- or machine-dependent is included (wall-clock timing goes
//! to the log; the `timing` section carries deterministic work counters).

use bioreg_core::metrics::{JacobianStats, MetricReport};
use bioreg_core::objective::LossTerms;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LossTermsJson {
    pub total: f64,
    pub sim: f64,
    pub reg: f64,
    pub seg: f64,
}

impl From<LossTerms> for LossTermsJson {
    fn from(t: LossTerms) -> Self {
        Self {
            total: t.total,
            sim: t.sim,
            reg: t.reg,
            seg: t.seg,
        }
    }
}

/// Everything needed to reproduce a `register` run.
#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub moving: String,
    pub fixed: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moving_masks: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_masks: Option<String>,
    pub regularizer: String,
    pub lambda: f64,
    pub gamma: f64,
    pub nu: f64,
    pub young: f64,
    pub lr: f64,
    pub iters: usize,
    pub pyramid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gt_dvf: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roi: Option<String>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FieldStatsJson {
    pub mean_abs_mm: f64,
    pub max_abs_mm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureMetricsJson {
    pub label: String,
    pub dice: f64,
    pub jaccard: f64,
    pub hausdorff_mm: f64,
    pub average_surface_mm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct JacobianJson {
    pub mean_abs_dev: f64,
    pub std_abs_dev: f64,
    pub non_positive: usize,
    /// `"mean ± std"`, the conventional table form.
    pub formatted: String,
}

impl From<&JacobianStats> for JacobianJson {
    fn from(s: &JacobianStats) -> Self {
        Self {
            mean_abs_dev: s.mean_abs_dev,
            std_abs_dev: s.std_abs_dev,
            non_positive: s.non_positive,
            formatted: s.formatted(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MetricReportJson {
    pub structures: Vec<StructureMetricsJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jacobian: Option<JacobianJson>,
}

impl From<&MetricReport> for MetricReportJson {
    fn from(r: &MetricReport) -> Self {
        Self {
            structures: r
                .structures
                .iter()
                .map(|s| StructureMetricsJson {
                    label: s.label.clone(),
                    dice: s.dice,
                    jaccard: s.jaccard,
                    hausdorff_mm: s.hausdorff_mm,
                    average_surface_mm: s.average_surface_mm,
                })
                .collect(),
            jacobian: r.jacobian.as_ref().map(JacobianJson::from),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EndpointErrorJson {
    pub mean_mm: f64,
    pub max_mm: f64,
}

/// Deterministic work counters (wall-clock time is logged, not reported,
/// to keep reports byte-identical across runs).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TimingCounters {
    pub objective_evaluations: usize,
}

/// One `register` run.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: ConfigEcho,
    pub iterations: usize,
    pub stop_reason: String,
    pub final_loss: LossTermsJson,
    pub field: FieldStatsJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricReportJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint_error: Option<EndpointErrorJson>,
    pub timing: TimingCounters,
    pub history: Vec<LossTermsJson>,
}

/// Standalone `metrics` run.
#[derive(Clone, Debug, Serialize)]
pub struct MetricsReport {
    pub command: String,
    pub dvf: String,
    pub moving_masks: String,
    pub fixed_masks: String,
    pub metrics: MetricReportJson,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub iterations: usize,
    pub mean_abs_u_mm: f64,
    pub final_loss: LossTermsJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricReportJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint_error: Option<EndpointErrorJson>,
}

/// One row per swept value, shared base configuration.
#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub command: String,
    pub param: String,
    pub config: ConfigEcho,
    pub rows: Vec<SweepRow>,
}

/// Pretty JSON plus a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report serialization cannot fail");
    bytes.push(b'\n');
    bytes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialization_is_deterministic_and_ordered() {
        let report = MetricsReport {
            command: "metrics".into(),
            dvf: "a.brs".into(),
            moving_masks: "m.brs".into(),
            fixed_masks: "f.brs".into(),
            metrics: MetricReportJson {
                structures: vec![StructureMetricsJson {
                    label: "structure_0".into(),
                    dice: 1.0,
                    jaccard: 1.0,
                    hausdorff_mm: 0.0,
                    average_surface_mm: 0.0,
                }],
                jacobian: Some(JacobianJson {
                    mean_abs_dev: 0.0,
                    std_abs_dev: 0.0,
                    non_positive: 0,
                    formatted: "0.0000 ± 0.0000".into(),
                }),
            },
        };
        let a = to_json_bytes(&report);
        let b = to_json_bytes(&report);
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.ends_with('\n'));
        let cmd_pos = text.find("\"command\"").unwrap();
        let dice_pos = text.find("\"dice\"").unwrap();
        assert!(cmd_pos < dice_pos);
    }

    #[test]
    fn optional_sections_are_omitted_not_null() {
        let row = SweepRow {
            value: 0.05,
            iterations: 3,
            mean_abs_u_mm: 0.0,
            final_loss: LossTermsJson {
                total: 0.0,
                sim: 0.0,
                reg: 0.0,
                seg: 0.0,
            },
            metrics: None,
            endpoint_error: None,
        };
        let text = String::from_utf8(to_json_bytes(&row)).unwrap();
        assert!(!text.contains("null"));
        assert!(!text.contains("metrics"));
    }
}
