//! CSV emission. Numbers use fixed scientific notation with 12 significant
//! digits; negative zero is written as zero so reruns compare byte-for-byte.

use std::fmt::Write as _;

use ep_lab_core::{CrossSectionPoint, SweepResult};

pub const SWEEP_HEADER: &str =
    "a,E1,E2,G1_half,G2_half,b11sq,b12sq,b21sq,b22sq,r1_abs,r2_abs,Z_abs,defect,e1_bare,e2_bare";

pub const SIGMA_HEADER: &str = "E,sigma,S_re,S_im";

pub fn fmt_num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

fn push_row(out: &mut String, fields: &[f64], tail: Option<(usize, &str)>) {
    for (i, v) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        if let Some((at, text)) = tail {
            if i == at {
                out.push_str(text);
                continue;
            }
        }
        out.push_str(&fmt_num(*v));
    }
    out.push('\n');
}

/// One row per grid point, branch columns in tracked order.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::with_capacity(256 * (result.rows.len() + 1));
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for row in &result.rows {
        let m = row.mixing_sq;
        let fields = [
            row.a,
            row.energies[0],
            row.energies[1],
            row.half_widths[0],
            row.half_widths[1],
            m[0][0],
            m[0][1],
            m[1][0],
            m[1][1],
            row.rigidity_abs[0],
            row.rigidity_abs[1],
            row.z_abs,
            0.0,
            row.bare[0],
            row.bare[1],
        ];
        // the defect flag is an integer column
        push_row(&mut out, &fields, Some((12, if row.defect { "1" } else { "0" })));
    }
    out
}

pub fn sigma_csv(table: &[CrossSectionPoint]) -> String {
    let mut out = String::with_capacity(64 * (table.len() + 1));
    out.push_str(SIGMA_HEADER);
    out.push('\n');
    for p in table {
        push_row(&mut out, &[p.energy, p.sigma, p.s.re, p.s.im], None);
    }
    out
}

/// Whitespace-separated copy of the sweep for gnuplot.
pub fn sweep_dat(result: &SweepResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}", SWEEP_HEADER.replace(',', " "));
    for line in sweep_csv(result).lines().skip(1) {
        out.push_str(&line.replace(',', " "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(2.0 / 3.0), "6.66666666667e-1");
        assert_eq!(fmt_num(-0.0), "0.00000000000e0");
        assert_eq!(fmt_num(1e-20), "1.00000000000e-20");
        assert_eq!(fmt_num(0.055).parse::<f64>().unwrap(), 0.055);
    }
}
