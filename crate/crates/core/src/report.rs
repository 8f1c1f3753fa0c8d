//! Flat, self-describing result rows for CSV output.

use crate::engine::{AssessmentProblem, ConfidenceResult};
use crate::error::Error;
use crate::prior::PriorSpec;

/// Shortest round-trip decimal, switching to scientific notation for
/// non-zero magnitudes below `1e-4` or at least `1e15`.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

/// One assessment: its inputs, outputs and certificates, or the error that
/// stopped it.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub b: f64,
    pub n: u64,
    pub phi1: f64,
    pub phi2: f64,
    pub prior: String,
    pub result: Option<ConfidenceResult>,
    pub error: Option<String>,
}

impl ResultRow {
    pub const HEADER: [&'static str; 22] = [
        "b",
        "n",
        "phi1",
        "phi2",
        "prior",
        "c1_low",
        "c2_low",
        "c1_high",
        "c2_high",
        "case_id",
        "q",
        "ln_q",
        "conservative",
        "iid",
        "quadrature_error",
        "lower_mass_residual",
        "upper_mass_residual",
        "lower_g_residual",
        "upper_g_residual",
        "lower_pinned",
        "upper_pinned",
        "status",
    ];

    pub fn from_result(problem: &AssessmentProblem, result: ConfidenceResult) -> Self {
        Self {
            b: problem.b(),
            n: problem.n(),
            phi1: problem.phi1(),
            phi2: problem.phi2(),
            prior: problem.prior().to_string(),
            result: Some(result),
            error: None,
        }
    }

    pub fn failed(prior: &PriorSpec, b: f64, n: u64, phi1: f64, phi2: f64, error: &Error) -> Self {
        Self {
            b,
            n,
            phi1,
            phi2,
            prior: prior.to_string(),
            result: None,
            error: Some(error.to_string()),
        }
    }

    pub fn fields(&self) -> Vec<String> {
        let mut out = vec![
            format_number(self.b),
            self.n.to_string(),
            format_number(self.phi1),
            format_number(self.phi2),
            self.prior.clone(),
        ];
        match &self.result {
            Some(r) => {
                let cp = &r.cutpoints;
                out.extend([
                    format_number(cp.c1_low),
                    format_number(cp.c2_low),
                    format_number(cp.c1_high),
                    format_number(cp.c2_high),
                    cp.case.id().to_string(),
                    format_number(r.q_value),
                    format_number(r.ln_q),
                    format_number(r.conservative_confidence),
                    format_number(r.iid_confidence),
                    format_number(r.quadrature_error),
                    format_number(cp.lower.mass_residual),
                    format_number(cp.upper.mass_residual),
                    opt(cp.lower.g_residual),
                    opt(cp.upper.g_residual),
                    cp.lower.pinned.to_string(),
                    cp.upper.pinned.to_string(),
                    "ok".into(),
                ]);
            }
            None => {
                out.extend(std::iter::repeat_n(String::new(), 16));
                out.push(self.error.clone().unwrap_or_default());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{conservative_confidence, EngineOptions};

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(1e-4), "0.0001");
        assert_eq!(format_number(5e-5), "5e-5");
        assert_eq!(format_number(-2.5e-7), "-2.5e-7");
        assert_eq!(format_number(1e20), "1e20");
        assert_eq!(format_number(10000.0), "10000");
        assert_eq!(format_number(f64::INFINITY), "inf");
    }

    #[test]
    fn rows_have_header_width() {
        let p = PriorSpec::beta(1.0, 10000.0).unwrap();
        let pr = AssessmentProblem::new(p.clone(), 1e-4, 10_000, 0.05, 0.05).unwrap();
        let r = conservative_confidence(&pr, &EngineOptions::default()).unwrap();
        let row = ResultRow::from_result(&pr, r);
        assert_eq!(row.fields().len(), ResultRow::HEADER.len());
        assert_eq!(row.fields()[0], "0.0001");
        let err = AssessmentProblem::new(p.clone(), 1e-4, 10_000, 0.9, 0.0).unwrap_err();
        let bad = ResultRow::failed(&p, 1e-4, 10_000, 0.9, 0.0, &err);
        let f = bad.fields();
        assert_eq!(f.len(), ResultRow::HEADER.len());
        assert!(f.last().unwrap().contains("PK4 violated"));
    }
}
