//! CSV and human renderings of a [`CheckReport`].

use tcmfg_core::check::{CheckReport, CheckRow};

pub const HEADER: &str = "check,slice,bound,measured,violation,pass";

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:e}")
    }
}

fn row_csv(r: &CheckRow) -> String {
    format!(
        "{},{},{},{},{},{}",
        r.check,
        r.slice.map(|s| s.to_string()).unwrap_or_default(),
        num(r.bound),
        num(r.measured),
        num(r.violation()),
        r.pass()
    )
}

pub fn to_csv(rep: &CheckReport) -> String {
    let mut s = String::from(HEADER);
    s.push('\n');
    for r in &rep.rows {
        s.push_str(&row_csv(r));
        s.push('\n');
    }
    s
}

/// The property a check row certifies, matched on the longest known prefix.
pub fn reference(check: &str) -> &'static str {
    const TABLE: &[(&str, &str)] = &[
        ("mass", "mass identity and positivity of the forward step under the CFL bound"),
        ("positivity", "mass identity and positivity of the forward step under the CFL bound"),
        ("comparison", "comparison principle: sup-norm contraction in the data"),
        ("holder", "Hölder regularity of the value function and of L u"),
        ("tightness", "Lyapunov tightness of the measure flow"),
        ("equicontinuity", "1/2-Hölder continuity in time for the d0 metric"),
        ("fixed_point", "fixed-point certificate of the best-response map"),
        ("picard_residual", "damped Picard residual sup_t d0"),
        ("uniqueness_gap", "two-run uniqueness in the monotone regime"),
        ("duality_phi", "exact transposition of forward and dual steps"),
        ("duality", "duality identity between two solutions"),
        ("running_monotonicity", "monotone coupling sign condition"),
        ("terminal_monotonicity", "monotone coupling sign condition"),
        ("coupling_monotone", "monotone coupling sign condition"),
        ("coupling_plancherel", "coupling pairing equals minus a squared L2 norm"),
        ("convexity_gap", "convexity inequality of F"),
        ("holmgren", "Holmgren test: forward solutions agree against dual solutions"),
        ("conjugate", "closed-form Legendre-Fenchel conjugate"),
    ];
    TABLE
        .iter()
        .filter(|(p, _)| check.starts_with(p))
        .max_by_key(|(p, _)| p.len())
        .map(|(_, r)| *r)
        .unwrap_or("")
}

pub fn to_human(rep: &CheckReport) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "{:<24} {:>6} {:>13} {:>13} {:>13} {:>5}  {}\n",
        "check", "slice", "bound", "measured", "violation", "pass", "property"
    ));
    for r in &rep.rows {
        s.push_str(&format!(
            "{:<24} {:>6} {:>13} {:>13} {:>13} {:>5}  {}\n",
            r.check,
            r.slice.map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
            format!("{:.6e}", r.bound),
            format!("{:.6e}", r.measured),
            format!("{:.6e}", r.violation()),
            if r.pass() { "ok" } else { "FAIL" },
            reference(&r.check)
        ));
    }
    let failed = rep.rows.iter().filter(|r| !r.pass()).count();
    s.push_str(&format!("{} rows, {} failed\n", rep.rows.len(), failed));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(to_csv(&CheckReport::default()), format!("{HEADER}\n"));
    }

    #[test]
    fn mass_row_passes_below_bound() {
        let mut rep = CheckReport::default();
        rep.push(CheckRow::new("mass", Some(3), 1e-10, 2e-16));
        let csv = to_csv(&rep);
        assert!(csv.lines().nth(1).unwrap().starts_with("mass,3,1e-10,2e-16,"));
        assert!(csv.trim_end().ends_with("true"));
    }

    #[test]
    fn human_format_names_the_comparison_property() {
        let mut rep = CheckReport::default();
        rep.push(CheckRow::new("comparison", Some(0), 0.1, 0.05));
        assert!(to_human(&rep).contains("comparison principle"));
    }

    #[test]
    fn suffixed_names_keep_their_property() {
        assert_eq!(reference("coupling_monotone_running"), "monotone coupling sign condition");
        assert_eq!(reference("duality_phi3"), "exact transposition of forward and dual steps");
        assert_eq!(reference("convexity_gap_1"), "convexity inequality of F");
    }
}
