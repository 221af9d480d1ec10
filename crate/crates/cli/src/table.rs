//! CSV layouts.

use sensyn::bounds::BoundOutcome;
use sensyn::report::{ConvergenceTable, SensitivityReport};

use crate::json::format_f64;

fn finish(w: csv::Writer<Vec<u8>>) -> csv::Result<String> {
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv writes UTF-8"))
}

/// One row per input: `input`, `sigma2_share`, every measure raw, then every
/// measure normalized. Blank cells mark values that do not exist (Sobol'
/// indices are never normalized; `sigma2_share` needs an analytic oracle).
pub fn report_csv(report: &SensitivityReport, sigma2_share: Option<&[f64]>) -> csv::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["input".to_string(), "sigma2_share".to_string()];
    header.extend(report.scores.iter().map(|s| s.name.clone()));
    header.extend(report.scores.iter().map(|s| format!("{}_normalized", s.name)));
    w.write_record(&header)?;
    for i in 0..report.meta.dim {
        let mut row = vec![
            (i + 1).to_string(),
            sigma2_share.map_or(String::new(), |s| format_f64(s[i])),
        ];
        row.extend(report.scores.iter().map(|s| format_f64(s.raw[i])));
        row.extend(
            report
                .scores
                .iter()
                .map(|s| s.normalized.as_ref().map_or(String::new(), |n| format_f64(n[i]))),
        );
        w.write_record(&row)?;
    }
    finish(w)
}

/// One row per check and input.
pub fn bounds_csv(outcomes: &[BoundOutcome]) -> csv::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["check", "m", "input", "lhs", "rhs", "slack", "tolerance", "verdict"])?;
    for o in outcomes {
        match o {
            BoundOutcome::Checked(c) => {
                let m = c.params.get("m").map_or(String::new(), |m| format!("{m}"));
                for i in 0..c.lhs.len() {
                    w.write_record([
                        c.name.clone(),
                        m.clone(),
                        (i + 1).to_string(),
                        format_f64(c.lhs[i]),
                        format_f64(c.rhs[i]),
                        format_f64(c.slack[i]),
                        format_f64(c.tolerance[i]),
                        if c.pass[i] { "pass" } else { "fail" }.to_string(),
                    ])?;
                }
            }
            BoundOutcome::Skipped { name, reason } => {
                w.write_record([name.as_str(), "", "", "", "", "", "", &format!("skipped: {reason}")])?;
            }
        }
    }
    finish(w)
}

/// One row per method, size and seed.
pub fn convergence_csv(tables: &[ConvergenceTable]) -> csv::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let dim = tables.first().map_or(0, |t| t.reference.len());
    let mut header: Vec<String> = ["method", "size", "seed", "full_match", "top_k_match", "ranking"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=dim).map(|i| format!("score_{i}")));
    w.write_record(&header)?;
    for t in tables {
        for (size, row) in t.sizes.iter().zip(&t.cells) {
            for cell in row {
                let mut rec = vec![
                    t.method.as_str().to_string(),
                    size.to_string(),
                    cell.seed.to_string(),
                    cell.full_match.to_string(),
                    cell.top_k_match.to_string(),
                    cell.ranking.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" "),
                ];
                rec.extend(cell.scores.iter().map(|s| format_f64(*s)));
                w.write_record(&rec)?;
            }
        }
    }
    finish(w)
}
