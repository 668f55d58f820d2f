//! Trace CSV, metrics text/CSV and the run manifest.

use std::io::Write;
use std::path::PathBuf;

use fracobs_core::harness::{Comparison, ObserverRun};
use fracobs_core::MetricsReport;
use serde::Serialize;

use crate::CliError;

/// Header of the trace CSV for an `n`-state plant.
pub fn trace_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("x{i}")));
    h.extend((1..=n).map(|i| format!("xhat{i}")));
    h.extend((2..=n).map(|i| format!("xtilde{i}")));
    h.extend((1..=n).map(|i| format!("e{i}")));
    h.extend(["f_true", "f_tilde", "f_hat", "e_f", "theta_tilde"].map(String::from));
    h.extend((1..=n).map(|i| format!("E{i}")));
    h
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// Writes every `stride`-th row of a run. Columns a variant does not have are
/// left empty; for the baseline `f_hat` is the fault readout.
pub fn write_trace<W: Write>(out: W, run: &ObserverRun<f64>, stride: usize) -> Result<(), CliError> {
    let n = run.n;
    let trace = &run.trace;
    let col = |name: &str| trace.channel_index(name);
    let xs: Vec<usize> = (1..=n).map(|i| col(&format!("x{i}")).expect("plant channel")).collect();
    let xhats: Vec<usize> = (1..=n).map(|i| col(&format!("xhat{i}")).expect("observer channel")).collect();
    let xtildes: Vec<usize> = (2..=n).map(|i| col(&format!("xtilde{i}")).expect("observer channel")).collect();
    let f_tilde = col("f_tilde");
    let f_hat = col("f_hat");
    let theta = col("theta_tilde");
    let e_f = run.error("e_f");

    let mut w = csv::Writer::from_writer(out);
    w.write_record(trace_header(n))?;
    let times = trace.times();
    for k in (0..trace.n_rows()).step_by(stride.max(1)) {
        let row = trace.row(k);
        let mut rec = Vec::with_capacity(5 * n + 5);
        rec.push(num(times[k]));
        rec.extend(xs.iter().map(|&c| num(row[c])));
        rec.extend(xhats.iter().map(|&c| num(row[c])));
        rec.extend(xtildes.iter().map(|&c| num(row[c])));
        rec.extend(run.errors.iter().take(n).map(|ch| num(ch[k])));
        rec.push(num(run.fault_true[k]));
        rec.push(f_tilde.map_or(String::new(), |c| num(row[c])));
        rec.push(f_hat.map_or_else(|| num(run.fault_estimate[k]), |c| num(row[c])));
        rec.push(e_f.map_or(String::new(), |ch| num(ch[k])));
        rec.push(theta.map_or(String::new(), |c| num(row[c])));
        let g = &run.gates[k];
        rec.extend((1..=n).map(|i| if i <= g.len() { (g.get(i) as u8).to_string() } else { String::new() }));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// `key = value` block, one metric per line.
pub fn metrics_text(report: &MetricsReport<f64>) -> String {
    report
        .key_values()
        .into_iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect()
}

/// Header plus one data row.
pub fn metrics_csv(report: &MetricsReport<f64>) -> Result<String, CliError> {
    let kv = report.key_values();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(kv.iter().map(|(k, _)| k))?;
    w.write_record(kv.iter().map(|(_, v)| v))?;
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn opt(v: Option<f64>) -> String {
    v.map_or("na".into(), |x| format!("{x:.6}"))
}

/// Side-by-side table of the two runs and the verdict line.
pub fn comparison_text(cmp: &Comparison<f64>) -> String {
    let [a, b] = &cmp.runs;
    let (na, nb) = (a.variant.as_str(), b.variant.as_str());
    let mut s = String::new();
    s.push_str(&format!("{:<28} {:>14} {:>14}\n", "metric", na, nb));
    let mut line = |name: &str, x: String, y: String| s.push_str(&format!("{name:<28} {x:>14} {y:>14}\n"));
    let labels: Vec<&String> = a
        .error_labels
        .iter()
        .chain(b.error_labels.iter().filter(|l| !a.error_labels.contains(l)))
        .collect();
    for l in labels {
        let settle = |r: &ObserverRun<f64>| match r.report.channel(l) {
            Some(c) => c.settle_time.map_or("never".into(), |t| format!("{t:.3}")),
            None => "-".into(),
        };
        line(&format!("settle_time.{l}"), settle(a), settle(b));
    }
    line("settled_at", opt(a.report.settled_at), opt(b.report.settled_at));
    line("diverged", a.report.diverged.to_string(), b.report.diverged.to_string());
    line("chattering_index", opt(cmp.chattering[0]), opt(cmp.chattering[1]));
    line("sup_error_post_settle", opt(cmp.sup_error[0]), opt(cmp.sup_error[1]));
    s.push_str(&format!("window_start = {}\n", opt(cmp.window_start)));
    s.push_str(&format!("candidate_wins_chattering = {}\n", cmp.candidate_wins_chattering));
    s.push_str(&format!("candidate_wins_sup_error = {}\n", cmp.candidate_wins_sup_error));
    s.push_str(&format!("verdict: {}\n", verdict(cmp)));
    s
}

/// One-line verdict for a comparison.
pub fn verdict(cmp: &Comparison<f64>) -> String {
    let better = |x: Option<f64>, y: Option<f64>| matches!((x, y), (Some(x), Some(y)) if x < y);
    let ref_chat = better(cmp.chattering[1], cmp.chattering[0]);
    let ref_sup = better(cmp.sup_error[1], cmp.sup_error[0]);
    let [a, b] = &cmp.runs;
    match (cmp.candidate_wins_chattering, cmp.candidate_wins_sup_error, ref_chat, ref_sup) {
        (true, true, ..) => format!("{} wins both metrics", a.variant.as_str()),
        (false, false, true, true) => format!("{} wins both metrics", b.variant.as_str()),
        (false, false, false, false) => "tie".into(),
        (c, s, ..) => format!(
            "split: chattering to {}, sup_error to {}",
            if c { a.variant.as_str() } else { b.variant.as_str() },
            if s { a.variant.as_str() } else { b.variant.as_str() }
        ),
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub duration_secs: f64,
    pub diverged: bool,
    pub outputs: Vec<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_schema() {
        let h = trace_header(3).join(",");
        assert_eq!(
            h,
            "t,x1,x2,x3,xhat1,xhat2,xhat3,xtilde2,xtilde3,e1,e2,e3,f_true,f_tilde,f_hat,e_f,theta_tilde,E1,E2,E3"
        );
    }
}
