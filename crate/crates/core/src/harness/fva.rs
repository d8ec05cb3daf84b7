use serde::{Deserialize, Serialize};

use super::bench::BenchReport;
use super::render::format_sig;
use super::HarnessError;
use crate::evaluation::{ccr, fva};

/// Accuracy and cost of one pool, the input to an FVA table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolScoreRow {
    pub label: String,
    pub mase: f64,
    pub cost_seconds: f64,
}

/// One step of an FVA table with its comparisons against every earlier step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FvaRow {
    pub step: usize,
    pub label: String,
    pub mase: f64,
    pub cost_seconds: f64,
    /// `fva_vs[j]` compares this step against step `j + 1`.
    pub fva_vs: Vec<f64>,
    pub ccr_vs: Vec<f64>,
}

/// Pairwise forecast-value-added and cost-reduction percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FvaTable {
    pub rows: Vec<FvaRow>,
}

/// Build the table for pools ordered from simplest to most complex.
pub fn fva_table(rows: &[PoolScoreRow]) -> FvaTable {
    let rows = rows
        .iter()
        .enumerate()
        .map(|(i, r)| FvaRow {
            step: i + 1,
            label: r.label.clone(),
            mase: r.mase,
            cost_seconds: r.cost_seconds,
            fva_vs: rows[..i].iter().map(|s| fva(s.mase, r.mase)).collect(),
            ccr_vs: rows[..i]
                .iter()
                .map(|s| ccr(s.cost_seconds, r.cost_seconds))
                .collect(),
        })
        .collect();
    FvaTable { rows }
}

/// Combine the pool summaries of several reports on the same dataset into an
/// FVA table. `order` lists pool labels from simplest to most complex; when
/// empty, pools keep their order of appearance.
pub fn report_fva(reports: &[BenchReport], order: &[String]) -> Result<FvaTable, HarnessError> {
    if reports.len() < 2 {
        return Err(HarnessError::DatasetMismatch(
            "at least two reports are required".into(),
        ));
    }
    let fingerprint = &reports[0].dataset.fingerprint;
    if let Some(r) = reports
        .iter()
        .find(|r| &r.dataset.fingerprint != fingerprint)
    {
        return Err(HarnessError::DatasetMismatch(format!(
            "dataset fingerprints {} and {} differ",
            fingerprint, r.dataset.fingerprint
        )));
    }
    let mut available: Vec<PoolScoreRow> = Vec::new();
    for r in reports {
        for p in &r.pools {
            if available.iter().any(|a| a.label == p.label) {
                return Err(HarnessError::DatasetMismatch(format!(
                    "pool {} appears in more than one report",
                    p.label
                )));
            }
            let (Some(mase), Some(cost)) = (p.mase_mean, p.cost_mean_seconds) else {
                return Err(HarnessError::DatasetMismatch(format!(
                    "pool {} has no records",
                    p.label
                )));
            };
            available.push(PoolScoreRow {
                label: p.label.clone(),
                mase,
                cost_seconds: cost,
            });
        }
    }
    let rows = if order.is_empty() {
        available
    } else {
        order
            .iter()
            .map(|label| {
                available
                    .iter()
                    .find(|a| &a.label == label)
                    .cloned()
                    .ok_or_else(|| {
                        HarnessError::Config(format!("pool {label} not found in reports"))
                    })
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    if rows.len() < 2 {
        return Err(HarnessError::DatasetMismatch(
            "at least two pools are required".into(),
        ));
    }
    Ok(fva_table(&rows))
}

fn pct(v: f64) -> String {
    format!("{v:.1}%")
}

impl FvaTable {
    /// Long-format CSV: one row per (step, earlier step) comparison, plus a
    /// row per step with empty comparison columns for the first step.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("step,pool,mase,cost_seconds,versus_step,versus_pool,fva_pct,ccr_pct\n");
        for r in &self.rows {
            let head = format!(
                "{},{},{},{}",
                r.step,
                r.label,
                format_sig(r.mase, 6),
                format_sig(r.cost_seconds, 6)
            );
            if r.fva_vs.is_empty() {
                out.push_str(&format!("{head},,,,\n"));
            }
            for (j, (f, c)) in r.fva_vs.iter().zip(&r.ccr_vs).enumerate() {
                out.push_str(&format!(
                    "{head},{},{},{},{}\n",
                    j + 1,
                    self.rows[j].label,
                    format_sig(*f, 6),
                    format_sig(*c, 6)
                ));
            }
        }
        out
    }

    /// Aligned text with one FVA and one CCR column per earlier step.
    pub fn render_text(&self) -> String {
        let n = self.rows.len();
        let label_w = self
            .rows
            .iter()
            .map(|r| r.label.len() + 4)
            .max()
            .unwrap_or(8)
            .max(8);
        let mut out = format!("{:<label_w$} {:>8} {:>10}", "step", "MASE", "cost (s)");
        for j in 1..n {
            out.push_str(&format!(
                " {:>9} {:>9}",
                format!("FVA vs {j}"),
                format!("CCR vs {j}")
            ));
        }
        out.push('\n');
        for r in &self.rows {
            let name = format!("{}: {}", r.step, r.label);
            out.push_str(&format!(
                "{:<label_w$} {:>8} {:>10}",
                name,
                format_sig(r.mase, 4),
                format_sig(r.cost_seconds, 4)
            ));
            for j in 0..n - 1 {
                match (r.fva_vs.get(j), r.ccr_vs.get(j)) {
                    (Some(f), Some(c)) => out.push_str(&format!(" {:>9} {:>9}", pct(*f), pct(*c))),
                    _ => out.push_str(&format!(" {:>9} {:>9}", "", "")),
                }
            }
            out.push('\n');
        }
        out
    }
}
