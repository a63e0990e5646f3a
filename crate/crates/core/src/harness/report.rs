//! Report files: long-format metrics, percentile summaries, box-plot data and replays.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::eval::{Metric, MetricsReport};
use super::HarnessError;
use crate::replay::{ReplayRecord, ReplayWriter};

pub const PERCENTILES: [f64; 5] = [5.0, 25.0, 50.0, 75.0, 95.0];

/// Linear interpolation between closest ranks; `None` for an empty sample.
pub fn percentile(sorted: &[f64], p: f64) -> Option<f64> {
    match sorted.len() {
        0 => None,
        1 => Some(sorted[0]),
        n => {
            let h = (n - 1) as f64 * p / 100.0;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub p5: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p95: f64,
}

impl Distribution {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = PERCENTILES.map(|p| percentile(&v, p).unwrap());
        Some(Self {
            count: v.len(),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            min: v[0],
            max: v[v.len() - 1],
            p5: q[0],
            p25: q[1],
            p50: q[2],
            p75: q[3],
            p95: q[4],
        })
    }

    pub fn quantiles(&self) -> [f64; 5] {
        [self.p5, self.p25, self.p50, self.p75, self.p95]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub per_run: Vec<Option<Distribution>>,
    pub pooled: Option<Distribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub label: String,
    pub runs: usize,
    pub agents: usize,
    pub metrics: BTreeMap<String, MetricSummary>,
    pub visibility_fraction: Option<f64>,
    pub visibility_fraction_per_run: Vec<Option<f64>>,
    pub min_inter_mav_distance: Option<f64>,
}

pub fn summarize(report: &MetricsReport) -> Summary {
    let mut metrics = BTreeMap::new();
    for m in Metric::ALL {
        let pooled = report.values(m, None, None);
        if pooled.is_empty() {
            continue;
        }
        metrics.insert(
            m.name().to_string(),
            MetricSummary {
                per_run: (0..report.runs)
                    .map(|r| Distribution::of(&report.values(m, Some(r), None)))
                    .collect(),
                pooled: Distribution::of(&pooled),
            },
        );
    }
    Summary {
        label: report.label.clone(),
        runs: report.runs,
        agents: report.agents,
        metrics,
        visibility_fraction: report.visibility_fraction(None),
        visibility_fraction_per_run: (0..report.runs)
            .map(|r| report.visibility_fraction(Some(r)))
            .collect(),
        min_inter_mav_distance: report.min_inter_mav_distance(None),
    }
}

pub fn write_metrics_csv<W: Write>(mut w: W, report: &MetricsReport) -> std::io::Result<()> {
    writeln!(w, "run,step,agent,metric,value")?;
    for r in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.run, r.step, r.agent, r.metric, r.value
        )?;
    }
    w.flush()
}

/// Writes `metrics.csv`, `summary.json`, `plotdata/<metric>.csv` and one
/// newline-delimited replay per run under `replays/`.
pub fn emit_reports(
    report: &MetricsReport,
    replays: &[Vec<ReplayRecord>],
    out_dir: &Path,
) -> Result<Summary, HarnessError> {
    fs::create_dir_all(out_dir.join("plotdata"))?;
    write_metrics_csv(
        BufWriter::new(File::create(out_dir.join("metrics.csv"))?),
        report,
    )?;

    let summary = summarize(report);
    let mut w = BufWriter::new(File::create(out_dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut w, &summary)?;
    writeln!(w)?;
    w.flush()?;

    for (name, m) in &summary.metrics {
        let mut w = BufWriter::new(File::create(
            out_dir.join("plotdata").join(format!("{name}.csv")),
        )?);
        writeln!(w, "run,p5,p25,p50,p75,p95")?;
        for (r, d) in m.per_run.iter().enumerate() {
            if let Some(d) = d {
                writeln!(w, "{r},{}", join(&d.quantiles()))?;
            }
        }
        if let Some(d) = &m.pooled {
            writeln!(w, "pooled,{}", join(&d.quantiles()))?;
        }
        w.flush()?;
    }

    if !replays.is_empty() {
        let dir = out_dir.join("replays");
        fs::create_dir_all(&dir)?;
        for (r, log) in replays.iter().enumerate() {
            let mut rw = ReplayWriter::new(BufWriter::new(File::create(
                dir.join(format!("run_{r:03}.ndjson")),
            )?));
            for rec in log {
                rw.write(rec)?;
            }
            rw.finish()?;
        }
    }
    Ok(summary)
}

fn join(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::eval::{AgentTag, MetricRow};

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 50.0), Some(2.5));
        assert_eq!(percentile(&v, 0.0), Some(1.0));
        assert_eq!(percentile(&v, 100.0), Some(4.0));
        assert_eq!(percentile(&[], 50.0), None);
        assert_eq!(percentile(&[7.0], 5.0), Some(7.0));
    }

    #[test]
    fn empty_report_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let s = emit_reports(&MetricsReport::default(), &[], dir.path()).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
        assert_eq!(csv, "run,step,agent,metric,value\n");
        assert!(s.metrics.is_empty());
        let parsed: Summary = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("summary.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(parsed, s);
    }

    #[test]
    fn single_run_pooled_equals_run() {
        let rows = (0..9)
            .map(|i| MetricRow {
                run: 0,
                step: i,
                agent: AgentTag::Agent(0),
                metric: Metric::Cpe,
                value: (i * i) as f64,
            })
            .collect();
        let r = MetricsReport {
            label: "x".into(),
            runs: 1,
            agents: 1,
            rows,
        };
        let s = summarize(&r);
        let m = &s.metrics["cpe"];
        assert_eq!(m.per_run[0].as_ref(), m.pooled.as_ref());
    }
}
