//! CSV and JSON encodings of differential reports.
//!
//! Both encodings carry the same field names and the same values, so they
//! compare equal field-for-field after parsing; CSV is the golden-file
//! format used in fixtures.

use crate::harness::DiffReport;

pub const CSV_HEADER: &str =
    "design,trojan,cycles,value_mismatches,validation_errors,first_trigger,rate";

fn csv_row(r: &DiffReport) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        r.design,
        r.trojan,
        r.cycles,
        r.value_mismatches,
        r.validation_errors,
        r.first_trigger_cycle
            .map(|c| c.to_string())
            .unwrap_or_default(),
        r.error_rate,
    )
}

pub fn to_csv(reports: &[DiffReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out
}

pub fn to_json(reports: &[DiffReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports always serialize")
}
