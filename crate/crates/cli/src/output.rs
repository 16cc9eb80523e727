//! Number formatting and CSV emission.

use std::io::Write;

use crate::CliError;

/// Formats `x` like C's `%.10g`.
pub fn fmt_num(x: f64) -> String {
    fmt_sig(x, 10)
}

pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A table of equally long numeric columns.
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(x_name: &str, xs: Vec<f64>) -> Self {
        Table {
            headers: vec![x_name.to_string()],
            columns: vec![xs],
        }
    }

    pub fn push(&mut self, name: impl Into<String>, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.columns[0].len());
        self.headers.push(name.into());
        self.columns.push(values);
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.headers)?;
        for i in 0..self.columns[0].len() {
            w.write_record(self.columns.iter().map(|c| fmt_num(c[i])))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_path(&self, path: &std::path::Path) -> Result<(), CliError> {
        let file =
            std::fs::File::create(path).map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
        self.write_to(std::io::BufWriter::new(file))
    }
}
