//! Plain-text report formats. Trajectories and query logs export as CSV
//! with exact numerator/denominator columns and as JSON mirrors; reports
//! are deterministic byte-for-byte given the same inputs.

use serde_json::json;

use crate::betting::QueryLog;
use crate::diagonal::DefeatReport;
use crate::martingale::CapitalTrajectory;
use crate::rational::ExactRational;

fn num_den(r: &ExactRational) -> (String, String) {
    (r.numer().to_string(), r.denom().to_string())
}

/// Columns: step,string,image,capital_num,capital_den. Step 0 carries the
/// initial capital with empty string/image fields.
pub fn trajectory_to_csv(t: &CapitalTrajectory) -> String {
    let mut out = String::from("step,string,image,capital_num,capital_den\n");
    let (n, d) = num_den(&t.initial_capital);
    out.push_str(&format!("0,,,{n},{d}\n"));
    for s in &t.steps {
        let (n, d) = num_den(&s.capital);
        out.push_str(&format!("{},{},{},{n},{d}\n", s.index + 1, s.domain, s.image));
    }
    out
}

pub fn trajectory_to_json(t: &CapitalTrajectory) -> String {
    let steps: Vec<_> = t
        .steps
        .iter()
        .map(|s| {
            json!({
                "step": s.index + 1,
                "string": s.domain.to_string(),
                "image": s.image.to_string(),
                "capital": s.capital.to_string(),
            })
        })
        .collect();
    let thresholds: Vec<_> = t
        .thresholds
        .iter()
        .map(|(k, hit)| json!({"k": k.to_string(), "first_step": hit}))
        .collect();
    let doc = json!({
        "strategy": t.strategy,
        "initial_capital": t.initial_capital.to_string(),
        "sup_capital": t.sup_capital.to_string(),
        "thresholds": thresholds,
        "steps": steps,
    });
    serde_json::to_string_pretty(&doc).expect("trajectory serializes")
}

/// Columns: step,query,image,stake_num,stake_den,capital_num,capital_den.
pub fn querylog_to_csv(log: &QueryLog) -> String {
    let mut out = String::from("step,query,image,stake_num,stake_den,capital_num,capital_den\n");
    for r in &log.records {
        let (sn, sd) = num_den(&r.stake);
        let (cn, cd) = num_den(&r.capital);
        out.push_str(&format!(
            "{},{},{},{sn},{sd},{cn},{cd}\n",
            r.step, r.query, r.image
        ));
    }
    out
}

pub fn querylog_to_json(log: &QueryLog) -> String {
    let records: Vec<_> = log
        .records
        .iter()
        .map(|r| {
            json!({
                "step": r.step,
                "query": r.query.to_string(),
                "image": r.image.to_string(),
                "stake": r.stake.to_string(),
                "capital": r.capital.to_string(),
            })
        })
        .collect();
    serde_json::to_string_pretty(&json!({ "records": records })).expect("log serializes")
}

/// Sup capital and the per-length slack ledger; the table itself goes out
/// through the permutation file formats.
pub fn defeat_report_to_json(report: &DefeatReport) -> String {
    let slack: Vec<_> = report
        .slack_by_length
        .iter()
        .map(|(n, s)| json!({"length": n, "slack": s.to_string()}))
        .collect();
    let doc = json!({
        "strategy": report.strategy,
        "initial_capital": report.initial_capital.to_string(),
        "sup_capital": report.sup_capital.to_string(),
        "slack_by_length": slack,
        "within_bound": report.within_bound(),
    });
    serde_json::to_string_pretty(&doc).expect("report serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingale::{figure1_martingale, run_martingale};
    use crate::permspace::FinitePermutation;

    #[test]
    fn trajectory_csv_shape() {
        let d = figure1_martingale();
        let t = run_martingale(d.as_ref(), &FinitePermutation::identity(2)).unwrap();
        let csv = trajectory_to_csv(&t);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "step,string,image,capital_num,capital_den");
        assert_eq!(lines[1], "0,,,13,24");
        assert_eq!(lines.len(), 9); // header + initial + 7 steps
        assert!(lines[2].starts_with("1,λ,λ,"));
    }

    #[test]
    fn exports_are_deterministic() {
        let d = figure1_martingale();
        let t1 = run_martingale(d.as_ref(), &FinitePermutation::random(2, 4)).unwrap();
        let t2 = run_martingale(d.as_ref(), &FinitePermutation::random(2, 4)).unwrap();
        assert_eq!(trajectory_to_csv(&t1), trajectory_to_csv(&t2));
        assert_eq!(trajectory_to_json(&t1), trajectory_to_json(&t2));
    }
}
