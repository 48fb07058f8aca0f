use std::fs::File;
use std::io;
use std::path::Path;

use super::{CalibrationBin, ErasurePoint, SimError};

pub const CALIBRATION_HEADER: [&str; 8] =
    ["ebn0_db", "estimator", "L", "bin_lo", "bin_hi", "mean_predicted", "empirical_error", "count"];

pub const ERASURE_HEADER: [&str; 6] = ["ebn0_db", "epsilon", "bler", "uer", "erasure_rate", "trials"];

/// Formats a float with six significant digits, `%g` style: fixed notation
/// for exponents in `[-4, 6)`, scientific otherwise, trailing zeros trimmed.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn write_calibration_csv<W: io::Write>(bins: &[CalibrationBin], out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CALIBRATION_HEADER)?;
    for b in bins {
        w.write_record([
            format_sig6(b.ebn0_db),
            b.estimator.name().to_string(),
            b.list_size.to_string(),
            format_sig6(b.lo),
            format_sig6(b.hi),
            format_sig6(b.mean_predicted),
            format_sig6(b.empirical_error),
            b.count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Detection-only rows carry `detect` in the epsilon column.
pub fn write_erasure_csv<W: io::Write>(points: &[ErasurePoint], out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ERASURE_HEADER)?;
    for p in points {
        w.write_record([
            format_sig6(p.ebn0_db),
            p.epsilon.map_or_else(|| "detect".to_string(), format_sig6),
            format_sig6(p.bler()),
            format_sig6(p.uer()),
            format_sig6(p.erasure_rate()),
            p.trials.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_calibration_csv(bins: &[CalibrationBin], path: impl AsRef<Path>) -> Result<(), SimError> {
    write_calibration_csv(bins, File::create(path)?)
}

pub fn emit_erasure_csv(points: &[ErasurePoint], path: impl AsRef<Path>) -> Result<(), SimError> {
    write_erasure_csv(points, File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::softoutput::Estimator;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_sig6(0.474070123), "0.47407");
        assert_eq!(format_sig6(0.0027644), "0.0027644");
        assert_eq!(format_sig6(4.0), "4");
        assert_eq!(format_sig6(1234567.0), "1.23457e6");
        assert_eq!(format_sig6(0.0000123456789), "1.23457e-5");
        assert_eq!(format_sig6(-2.5), "-2.5");
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(0.999999999), "1");
    }

    #[test]
    fn empty_bins_give_header_only() {
        let mut buf = Vec::new();
        write_calibration_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), CALIBRATION_HEADER.join(",") + "\n");
    }

    #[test]
    fn round_trip_parse() {
        let bins = vec![CalibrationBin {
            ebn0_db: 4.0,
            estimator: Estimator::ApproxSingle,
            list_size: 1,
            lo: 0.45,
            hi: 0.5,
            mean_predicted: 0.474071,
            empirical_error: 0.479683,
            count: 1234,
        }];
        let mut buf = Vec::new();
        write_calibration_csv(&bins, &mut buf).unwrap();
        let mut r = csv::Reader::from_reader(buf.as_slice());
        let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
        assert_eq!(rows.len(), 1);
        let row = &rows[0];
        assert_eq!(&row[1], "approx_single");
        assert_eq!(row[5].parse::<f64>().unwrap(), 0.474071);
        assert_eq!(row[6].parse::<f64>().unwrap(), 0.479683);
        assert_eq!(row[7].parse::<u64>().unwrap(), 1234);

        let points = vec![
            ErasurePoint { ebn0_db: 3.5, epsilon: None, trials: 10, erased: 3, undetected: 1, correct: 6 },
            ErasurePoint { ebn0_db: 3.5, epsilon: Some(0.1), trials: 10, erased: 2, undetected: 0, correct: 8 },
        ];
        let mut buf = Vec::new();
        write_erasure_csv(&points, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "ebn0_db,epsilon,bler,uer,erasure_rate,trials\n3.5,detect,0.4,0.1,0.3,10\n3.5,0.1,0.2,0,0.2,10\n"
        );
    }
}
