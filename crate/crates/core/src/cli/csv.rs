//! Result rows and their CSV form.

use crate::estimators::Verdict;

use super::CliError;

pub const HEADER: &str =
    "experiment,kind,x,y,t,s,lambda,delta,M,n,estimate,std_error,seed,workers,wall_time_s,verdict";
const COLUMNS: usize = 16;

/// One line of an experiment's output. `None` parameters render as empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub kind: String,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
    pub margin: Option<f64>,
    pub n: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub seed: u64,
    pub workers: usize,
    pub wall_time: f64,
    pub verdict: Verdict,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        [
            self.experiment.clone(),
            self.kind.clone(),
            fmt_opt(self.x),
            fmt_opt(self.y),
            fmt_opt(self.t),
            fmt_opt(self.s),
            fmt_opt(self.lambda),
            fmt_opt(self.delta),
            fmt_opt(self.margin),
            self.n.to_string(),
            fmt_f64(self.estimate),
            fmt_f64(self.std_error),
            self.seed.to_string(),
            self.workers.to_string(),
            fmt_f64(self.wall_time),
            self.verdict.as_str().to_string(),
        ]
        .join(",")
    }
}

pub fn render(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

fn schema(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Schema(format!("line {line}: {}", msg.into()))
}

fn parse_f64(cell: &str, line: usize, col: &str) -> Result<f64, CliError> {
    match cell {
        "NaN" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => cell
            .parse()
            .map_err(|_| schema(line, format!("column `{col}` is not a number: `{cell}`"))),
    }
}

fn parse_opt(cell: &str, line: usize, col: &str) -> Result<Option<f64>, CliError> {
    if cell.is_empty() {
        Ok(None)
    } else {
        parse_f64(cell, line, col).map(Some)
    }
}

fn parse_int<T: std::str::FromStr>(cell: &str, line: usize, col: &str) -> Result<T, CliError> {
    cell.parse()
        .map_err(|_| schema(line, format!("column `{col}` is not an integer: `{cell}`")))
}

/// Parses a CSV written by [`render`]. Any structural deviation is a schema error.
pub fn parse(text: &str) -> Result<Vec<ResultRow>, CliError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == HEADER => {}
        Some(h) => return Err(schema(1, format!("unexpected header `{h}`"))),
        None => return Err(schema(1, "empty file")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let ln = i + 2;
        if line.is_empty() {
            continue;
        }
        let c: Vec<&str> = line.split(',').collect();
        if c.len() != COLUMNS {
            return Err(schema(
                ln,
                format!("expected {COLUMNS} columns, found {}", c.len()),
            ));
        }
        rows.push(ResultRow {
            experiment: c[0].to_string(),
            kind: c[1].to_string(),
            x: parse_opt(c[2], ln, "x")?,
            y: parse_opt(c[3], ln, "y")?,
            t: parse_opt(c[4], ln, "t")?,
            s: parse_opt(c[5], ln, "s")?,
            lambda: parse_opt(c[6], ln, "lambda")?,
            delta: parse_opt(c[7], ln, "delta")?,
            margin: parse_opt(c[8], ln, "M")?,
            n: parse_int(c[9], ln, "n")?,
            estimate: parse_f64(c[10], ln, "estimate")?,
            std_error: parse_f64(c[11], ln, "std_error")?,
            seed: parse_int(c[12], ln, "seed")?,
            workers: parse_int(c[13], ln, "workers")?,
            wall_time: parse_f64(c[14], ln, "wall_time_s")?,
            verdict: Verdict::parse(c[15])
                .ok_or_else(|| schema(ln, format!("unknown verdict `{}`", c[15])))?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(estimate: f64) -> ResultRow {
        ResultRow {
            experiment: "e".into(),
            kind: "survival".into(),
            x: Some(-1.0),
            y: None,
            t: Some(2.0),
            s: None,
            lambda: Some(50.0),
            delta: Some(0.25),
            margin: None,
            n: 1000,
            estimate,
            std_error: 1e-3,
            seed: u64::MAX,
            workers: 3,
            wall_time: 0.0,
            verdict: Verdict::NotApplicable,
        }
    }

    #[test]
    fn round_trip() {
        let rows = vec![row(0.1), row(f64::NAN)];
        let text = render(&rows);
        let back = parse(&text).unwrap();
        assert_eq!(back[0], rows[0]);
        assert!(back[1].estimate.is_nan());
        assert_eq!(render(&back), text);
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(parse("a,b\n"), Err(CliError::Schema(_))));
        assert!(matches!(
            parse(&format!("{HEADER}\n1,2\n")),
            Err(CliError::Schema(_))
        ));
    }

    proptest! {
        #[test]
        fn numbers_round_trip_exactly(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
            let s = fmt_f64(v);
            prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
