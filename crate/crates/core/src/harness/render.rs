use super::bench::BenchReport;
use super::HarnessError;

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Render `x` with `digits` significant digits in the style of C's `%g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{exp}", trim_zeros(mant))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn csv_error(e: csv::Error) -> HarnessError {
    HarnessError::Io(std::io::Error::other(e))
}

impl BenchReport {
    /// Flat per-series CSV with numbers at six significant digits. Coverage
    /// columns hold the fraction of covered holdout steps.
    pub fn records_csv(&self) -> Result<String, HarnessError> {
        let keys: Vec<String> = self
            .config
            .levels
            .iter()
            .map(|l| crate::evaluation::level_key(*l))
            .collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![
            "series_id".to_string(),
            "pool".into(),
            "model".into(),
            "criterion".into(),
            "mase".into(),
        ];
        header.extend(keys.iter().map(|k| format!("msis_{k}")));
        header.extend(keys.iter().map(|k| format!("coverage_{k}")));
        header.extend(["cost_seconds".into(), "explosive".into()]);
        w.write_record(&header).map_err(csv_error)?;
        for r in &self.records {
            let mut row = vec![
                r.series_id.clone(),
                r.pool_label.clone(),
                r.selected_model.clone(),
                format_sig(r.criterion, 6),
                format_sig(r.mase, 6),
            ];
            for k in &keys {
                row.push(r.msis.get(k).map_or(String::new(), |v| format_sig(*v, 6)));
            }
            for k in &keys {
                row.push(r.covered.get(k).map_or(String::new(), |c| {
                    let hits = c.iter().filter(|b| **b).count();
                    format_sig(hits as f64 / c.len().max(1) as f64, 6)
                }));
            }
            row.push(format_sig(r.cost_seconds, 6));
            row.push(r.explosive.to_string());
            w.write_record(&row).map_err(csv_error)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| HarnessError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    /// Human-readable per-pool summary.
    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        let key95 = crate::evaluation::level_key(0.95);
        out.push_str(&format!(
            "{:<24} {:>7} {:>6} {:>10} {:>12} {:>12} {:>8}\n",
            "pool", "records", "skips", "MASE", "MSIS(95%)", "cost (s)", "ratio"
        ));
        for p in &self.pools {
            let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format_sig(x, 4));
            out.push_str(&format!(
                "{:<24} {:>7} {:>6} {:>10} {:>12} {:>12} {:>8}\n",
                p.label,
                p.n_records,
                p.n_skipped,
                opt(p.mase_mean),
                opt(p.msis_mean.get(&key95).copied()),
                opt(p.cost_mean_seconds),
                opt(p.cost_ratio),
            ));
        }
        out
    }
}
