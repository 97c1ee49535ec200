//! CSV curves, gap interpolation and the summary file.

use std::fmt::Write as _;

use relaybeam_core::montecarlo::{BlerCurve, PointCount, Scheme};
use relaybeam_core::RngSeed;

pub const CSV_HEADER: &str = "scheme,topology,R,p_db,trials,errors,bler,ci_low,ci_high,seed";

/// `{scheme}_{topology}.csv`.
pub fn csv_file_name(scheme: Scheme, topology: &str) -> String {
    format!("{scheme}_{topology}.csv")
}

/// 17 significant digits.
fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn curve_to_csv(curve: &BlerCurve, topology: &str, relay_count: usize) -> String {
    let mut out = String::with_capacity(128 * (curve.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for k in 0..curve.len() {
        let (lo, hi) = curve.ci95[k];
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            curve.scheme,
            topology,
            relay_count,
            real(curve.power_db[k]),
            curve.trials[k],
            curve.errors[k],
            real(curve.bler[k]),
            real(lo),
            real(hi),
            curve.seed.seed,
        );
    }
    out
}

/// One parsed CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvCurve {
    pub topology: String,
    pub relay_count: usize,
    pub curve: BlerCurve,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct CsvError {
    pub line: usize,
    pub message: String,
}

pub fn curve_from_csv(text: &str) -> Result<CsvCurve, CsvError> {
    let fail = |line: usize, message: &str| CsvError { line, message: message.to_string() };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(fail(1, "missing or unexpected header")),
    }
    let mut parsed: Option<CsvCurve> = None;
    for (n, line) in lines {
        let line_no = n + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(fail(line_no, "expected 10 fields"));
        }
        let scheme: Scheme = fields[0].parse().map_err(|_| fail(line_no, "unknown scheme"))?;
        let relay_count: usize = fields[2].parse().map_err(|_| fail(line_no, "bad R"))?;
        let p_db: f64 = fields[3].parse().map_err(|_| fail(line_no, "bad p_db"))?;
        let trials: u64 = fields[4].parse().map_err(|_| fail(line_no, "bad trials"))?;
        let errors: u64 = fields[5].parse().map_err(|_| fail(line_no, "bad errors"))?;
        let seed: u64 = fields[9].parse().map_err(|_| fail(line_no, "bad seed"))?;
        if errors > trials {
            return Err(fail(line_no, "more errors than trials"));
        }
        let entry = parsed.get_or_insert_with(|| CsvCurve {
            topology: fields[1].to_string(),
            relay_count,
            curve: BlerCurve::new(scheme, RngSeed::new(seed, 0)),
        });
        if entry.curve.scheme != scheme
            || entry.topology != fields[1]
            || entry.relay_count != relay_count
            || entry.curve.seed.seed != seed
        {
            return Err(fail(line_no, "rows describe different curves"));
        }
        entry.curve.push(p_db, PointCount { trials, errors });
    }
    parsed.ok_or_else(|| fail(2, "no rows"))
}

/// Power (dB) at which `curve` first falls to `target`, interpolating
/// `log10(bler)` linearly between neighbouring points.
pub fn power_at_bler(curve: &BlerCurve, target: f64) -> Option<f64> {
    if target.is_nan() || target <= 0.0 {
        return None;
    }
    for k in 0..curve.len() {
        let b = curve.bler[k];
        if b == target {
            return Some(curve.power_db[k]);
        }
        if k + 1 == curve.len() {
            break;
        }
        let next = curve.bler[k + 1];
        if b > target && next < target {
            if next <= 0.0 {
                return None;
            }
            let (la, lb, lt) = (b.log10(), next.log10(), target.log10());
            let (pa, pb) = (curve.power_db[k], curve.power_db[k + 1]);
            return Some(pa + (lt - la) / (lb - la) * (pb - pa));
        }
    }
    None
}

/// dB by which `a` needs less power than `b` to reach `target`. `None` when
/// either curve does not bracket the target.
pub fn gap_at_bler(a: &BlerCurve, b: &BlerCurve, target: f64) -> Option<f64> {
    Some(power_at_bler(b, target)? - power_at_bler(a, target)?)
}

/// Feedback overhead and fidelity at one power point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackStats {
    pub p_db: f64,
    pub draws: u64,
    pub index_list_bits: f64,
    pub threshold_bits: f64,
    /// Mean SNR lost by the threshold reconstruction, dB.
    pub threshold_loss_db: f64,
    /// Mean SNR lost by the index-list reconstruction, dB.
    pub index_list_loss_db: f64,
}

pub struct Summary<'a> {
    pub curves: &'a [BlerCurve],
    pub targets: &'a [f64],
    pub slope_window_db: (f64, f64),
    pub b1: Option<u32>,
    pub feedback: &'a [FeedbackStats],
}

impl Summary<'_> {
    /// One line per gap, slope and feedback point.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, a) in self.curves.iter().enumerate() {
            for b in &self.curves[i + 1..] {
                for &t in self.targets {
                    let _ = match gap_at_bler(a, b, t) {
                        Some(g) => writeln!(out, "gap {} vs {} at bler {t:e}: {g:.3} dB", a.scheme, b.scheme),
                        None => writeln!(out, "gap {} vs {} at bler {t:e}: not computable", a.scheme, b.scheme),
                    };
                }
            }
        }
        let (lo, hi) = self.slope_window_db;
        for c in self.curves {
            let _ = match relaybeam_core::montecarlo::diversity_slope(c, self.slope_window_db) {
                Ok(s) => writeln!(out, "slope {} over [{lo}, {hi}] dB: {s:.3}", c.scheme),
                Err(e) => writeln!(out, "slope {} over [{lo}, {hi}] dB: not computable ({e})", c.scheme),
            };
        }
        if let Some(b1) = self.b1 {
            for f in self.feedback {
                let _ = writeln!(
                    out,
                    "feedback b1={b1} at {} dB over {} draws: index-list {:.3} bits, {:.3e} dB loss; threshold {:.3} bits, {:.3e} dB loss",
                    f.p_db, f.draws, f.index_list_bits, f.index_list_loss_db, f.threshold_bits, f.threshold_loss_db
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(points: &[(f64, u64, u64)]) -> BlerCurve {
        let mut c = BlerCurve::new(Scheme::BestRelay, RngSeed::new(3, 0));
        for &(p, trials, errors) in points {
            c.push(p, PointCount { trials, errors });
        }
        c
    }

    #[test]
    fn interpolates_in_log_domain() {
        let c = curve(&[(0.0, 1000, 100), (10.0, 1000, 1)]);
        assert!((power_at_bler(&c, 1e-2).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(power_at_bler(&c, 1e-1), Some(0.0));
        assert_eq!(power_at_bler(&c, 1e-4), None);
        assert_eq!(power_at_bler(&c, 0.5), None);
    }

    #[test]
    fn zero_error_point_blocks_interpolation() {
        let c = curve(&[(0.0, 1000, 100), (10.0, 1000, 0)]);
        assert_eq!(power_at_bler(&c, 1e-2), None);
    }

    #[test]
    fn csv_round_trip() {
        let c = curve(&[(0.0, 1000, 100), (2.5, 1000, 17), (5.0, 1000, 0)]);
        let text = curve_to_csv(&c, "unit", 2);
        assert!(text.ends_with('\n') && !text.contains('\r'));
        let back = curve_from_csv(&text).unwrap();
        assert_eq!(back.curve, c);
        assert_eq!(back.topology, "unit");
        assert_eq!(back.relay_count, 2);
        assert_eq!(curve_to_csv(&back.curve, "unit", 2), text);
    }

    #[test]
    fn csv_rejects_bad_rows() {
        assert!(curve_from_csv("scheme,oops\n").is_err());
        let c = curve(&[(0.0, 10, 1)]);
        let text = curve_to_csv(&c, "unit", 2).replace(",10,1,", ",10,11,");
        assert_eq!(curve_from_csv(&text).unwrap_err().line, 2);
    }
}
