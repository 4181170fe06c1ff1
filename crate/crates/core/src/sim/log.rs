use std::fmt::Write as _;
use std::io;

use crate::error::Result;

use super::dynamics::evaluate;
use super::scenario::Scenario;
use super::PlatoonState;

pub const CSV_HEADER: &str =
    "t,vehicle,x,y,gamma,V,d,alpha_t,alpha_v,a_cmd,V_cmd,path_err,gap_err,vel_err";

/// One vehicle at one logged instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRecord {
    pub t: f64,
    /// 1-based, 1 = lead.
    pub vehicle: usize,
    pub x: f64,
    pub y: f64,
    pub gamma: f64,
    pub speed: f64,
    pub d: f64,
    pub alpha_t: f64,
    pub alpha_v: f64,
    pub a_cmd: f64,
    pub v_cmd: f64,
    pub path_err: f64,
    pub gap_err: f64,
    pub vel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    pub n: usize,
    pub records: Vec<LogRecord>,
}

impl TrajectoryLog {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            records: Vec::new(),
        }
    }

    pub(crate) fn record(&mut self, state: &PlatoonState, scenario: &Scenario) -> Result<()> {
        let eval = evaluate(state, scenario)?;
        let p = &scenario.params;
        for (i, v) in state.vehicles.iter().enumerate() {
            let g = &eval.geometry[i];
            self.records.push(LogRecord {
                t: state.t,
                vehicle: i + 1,
                x: v.position.x,
                y: v.position.y,
                gamma: v.heading,
                speed: v.speed,
                d: g.d,
                alpha_t: g.alpha_t,
                alpha_v: g.alpha_v,
                a_cmd: eval.accel[i],
                v_cmd: eval.speed_cmd[i],
                path_err: scenario.path.error(v.position),
                gap_err: g.d - p.d_star,
                vel_err: v.speed - p.v_c,
            });
        }
        Ok(())
    }

    /// Records of one vehicle (1-based), in time order.
    pub fn vehicle(&self, id: usize) -> impl Iterator<Item = &LogRecord> {
        self.records.iter().filter(move |r| r.vehicle == id)
    }

    pub fn final_time(&self) -> Option<f64> {
        self.records.last().map(|r| r.t)
    }

    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_csv_string().as_bytes())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(64 + self.records.len() * 160);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = write!(out, "{},{}", format_sig9(r.t), r.vehicle);
            for v in [
                r.x, r.y, r.gamma, r.speed, r.d, r.alpha_t, r.alpha_v, r.a_cmd, r.v_cmd,
                r.path_err, r.gap_err, r.vel_err,
            ] {
                out.push(',');
                out.push_str(&format_sig9(v));
            }
            out.push('\n');
        }
        out
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Formats with 9 significant digits in the style of C's `%.9g`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_fraction(mantissa), sign, exp.abs())
    } else {
        let decimals = (8 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_matches_printf_g() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(-2.5), "-2.5");
        assert_eq!(format_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig9(123456789.4), "123456789");
        assert_eq!(format_sig9(1234567894.0), "1.23456789e+09");
        assert_eq!(format_sig9(0.000012345), "1.2345e-05");
        assert_eq!(format_sig9(0.00012345), "0.00012345");
        assert_eq!(format_sig9(9.9999999999), "10");
        assert_eq!(format_sig9(75.0), "75");
    }
}
