//! Dataset CSV format: a required metadata comment line, a header, then one
//! long-format row per cell with 0-based indices.
//!
//! ```text
//! # p1=10 p2=10 T=672
//! t,i,j,value
//! 0,0,0,1.2345678901234567e0
//! ```
//!
//! Comma separator, `.` decimal, LF line endings, UTF-8. All floating-point
//! output is printed with 17 significant digits so files round-trip
//! bit-exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use matfact::MatrixSeriesF64;
use ndarray::Array2;

use crate::error::{CliError, Result};

/// 17 significant digits; round-trip exact for `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn read_series_csv(path: &Path) -> Result<MatrixSeriesF64> {
    let content = fs::read_to_string(path)?;
    let mut lines = content.lines();
    let meta = lines.next().ok_or(CliError::Parse {
        line: 1,
        msg: "empty file; expected metadata line `# p1=.. p2=.. T=..`".into(),
    })?;
    let (p1, p2, t_len) = parse_metadata(meta)?;

    let rest_offset = meta.len() + 1;
    let rest = if content.len() >= rest_offset {
        &content[rest_offset..]
    } else {
        ""
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(rest.as_bytes());

    {
        let headers = rdr.headers().map_err(|e| CliError::Parse {
            line: 2,
            msg: e.to_string(),
        })?;
        let expected = ["t", "i", "j", "value"];
        let got: Vec<&str> = headers.iter().map(str::trim).collect();
        if got != expected {
            return Err(CliError::Parse {
                line: 2,
                msg: format!("expected header `t,i,j,value`, found `{}`", got.join(",")),
            });
        }
    }

    let mut data = vec![Array2::<f64>::zeros((p1, p2)); t_len];
    let mut seen = vec![false; t_len * p1 * p2];
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 3; // metadata line 1, header line 2
        let record = record.map_err(|e| CliError::Parse {
            line,
            msg: e.to_string(),
        })?;
        if record.len() != 4 {
            return Err(CliError::Parse {
                line,
                msg: format!("expected 4 fields, found {}", record.len()),
            });
        }
        let t = parse_index(&record[0], "t", t_len, line)?;
        let i = parse_index(&record[1], "i", p1, line)?;
        let j = parse_index(&record[2], "j", p2, line)?;
        let value: f64 = record[3].trim().parse().map_err(|_| CliError::Parse {
            line,
            msg: format!("invalid value `{}`", &record[3]),
        })?;
        let flat = (t * p1 + i) * p2 + j;
        if seen[flat] {
            return Err(CliError::Parse {
                line,
                msg: format!("duplicate cell (t={t}, i={i}, j={j})"),
            });
        }
        seen[flat] = true;
        data[t][[i, j]] = value;
    }

    if let Some(flat) = seen.iter().position(|&s| !s) {
        let t = flat / (p1 * p2);
        let i = (flat / p2) % p1;
        let j = flat % p2;
        return Err(CliError::MissingValue { t, i, j });
    }

    Ok(MatrixSeriesF64::new(data)?)
}

fn parse_metadata(line: &str) -> Result<(usize, usize, usize)> {
    let err = |msg: String| CliError::Parse { line: 1, msg };
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| err("expected metadata line `# p1=.. p2=.. T=..`".into()))?;
    let (mut p1, mut p2, mut t_len) = (None, None, None);
    for token in body.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| err(format!("bad metadata token `{token}`")))?;
        let parsed: usize = value
            .parse()
            .map_err(|_| err(format!("bad metadata value `{token}`")))?;
        match key {
            "p1" => p1 = Some(parsed),
            "p2" => p2 = Some(parsed),
            "T" => t_len = Some(parsed),
            other => return Err(err(format!("unknown metadata key `{other}`"))),
        }
    }
    match (p1, p2, t_len) {
        (Some(p1), Some(p2), Some(t)) if p1 > 0 && p2 > 0 && t > 0 => Ok((p1, p2, t)),
        _ => Err(err("metadata must define positive p1, p2 and T".into())),
    }
}

fn parse_index(field: &str, name: &str, bound: usize, line: usize) -> Result<usize> {
    let v: usize = field.trim().parse().map_err(|_| CliError::Parse {
        line,
        msg: format!("invalid {name} index `{field}`"),
    })?;
    if v >= bound {
        return Err(CliError::Parse {
            line,
            msg: format!("{name} index {v} out of range (< {bound})"),
        });
    }
    Ok(v)
}

pub fn write_series_csv(path: &Path, series: &MatrixSeriesF64) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!(
        "# p1={} p2={} T={}\n",
        series.n_rows(),
        series.n_cols(),
        series.t_len()
    ));
    out.push_str("t,i,j,value\n");
    for (t, m) in series.iter().enumerate() {
        for i in 0..series.n_rows() {
            for j in 0..series.n_cols() {
                out.push_str(&format!("{t},{i},{j},{}\n", fmt_f64(m[[i, j]])));
            }
        }
    }
    write_file(path, &out)
}

pub fn write_matrix_csv(path: &Path, m: &Array2<f64>) -> Result<()> {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt_f64(m[[i, j]])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_file(path, &out)
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(content.as_bytes())?;
    Ok(())
}
