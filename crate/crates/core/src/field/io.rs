//! Grid CSV format shared by sampled fields and phase-velocity fields.
//!
//! ```text
//! # x0=<float> dx=<float> nx=<int>
//! # t0=<float> dt=<float> nt=<int>
//! # field=<name>
//! # layout=row-per-time
//! <nt rows of nx comma-separated floats>
//! ```
//!
//! Floats are written with 17 significant digits so that a write/read cycle
//! is lossless. Missing values are written as `nan`.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::field::{Grid1x1, SampledField};

/// Shortest fixed-width rendering that round-trips every `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

pub fn parse_float(s: &str) -> Result<f64> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("nan") {
        return Ok(f64::NAN);
    }
    s.parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad number '{s}'")))
}

/// Writes a grid CSV; `value(i, j)` returning `None` is emitted as `nan`.
pub fn write_grid<W: Write>(
    mut w: W,
    grid: &Grid1x1,
    field_name: &str,
    value: impl Fn(usize, usize) -> Option<f64>,
) -> Result<()> {
    writeln!(w, "# x0={} dx={} nx={}", format_float(grid.x0()), format_float(grid.dx()), grid.nx())?;
    writeln!(w, "# t0={} dt={} nt={}", format_float(grid.t0()), format_float(grid.dt()), grid.nt())?;
    writeln!(w, "# field={field_name}")?;
    writeln!(w, "# layout=row-per-time")?;
    let mut line = String::new();
    for j in 0..grid.nt() {
        line.clear();
        for i in 0..grid.nx() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format_float(value(i, j).unwrap_or(f64::NAN)));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// Contents of a grid CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct GridData {
    pub grid: Grid1x1,
    pub field_name: String,
    /// Row-per-time, `NaN` where the file holds `nan`.
    pub values: Vec<f64>,
}

pub fn read_grid<R: BufRead>(r: R) -> Result<GridData> {
    let mut header: HashMap<String, String> = HashMap::new();
    let mut values = Vec::new();
    let mut rows = 0usize;
    let mut nx_seen = None;
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            for tok in comment.split_whitespace() {
                if let Some((k, v)) = tok.split_once('=') {
                    header.insert(k.to_string(), v.to_string());
                }
            }
            continue;
        }
        let row: Vec<f64> = line.split(',').map(parse_float).collect::<Result<_>>()?;
        match nx_seen {
            None => nx_seen = Some(row.len()),
            Some(n) if n != row.len() => {
                return Err(Error::Parse(format!("row {} has {} columns, expected {n}", rows + 1, row.len())))
            }
            _ => {}
        }
        values.extend(row);
        rows += 1;
    }
    let get = |k: &str| -> Result<&String> {
        header
            .get(k)
            .ok_or_else(|| Error::Parse(format!("grid header lacks '{k}='")))
    };
    let num = |k: &str| -> Result<f64> { parse_float(get(k)?) };
    let count = |k: &str| -> Result<usize> {
        get(k)?
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad count for '{k}'")))
    };
    if let Some(layout) = header.get("layout") {
        if layout != "row-per-time" {
            return Err(Error::Parse(format!("unsupported layout '{layout}'")));
        }
    }
    let grid = Grid1x1::new(num("x0")?, num("dx")?, count("nx")?, num("t0")?, num("dt")?, count("nt")?)?;
    if rows != grid.nt() || nx_seen.unwrap_or(0) != grid.nx() {
        return Err(Error::InvalidGrid(format!(
            "header declares {}x{} but body has {} rows of {} values",
            grid.nx(),
            grid.nt(),
            rows,
            nx_seen.unwrap_or(0)
        )));
    }
    let field_name = header.get("field").cloned().unwrap_or_else(|| "psi".to_string());
    Ok(GridData { grid, field_name, values })
}

impl SampledField {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_grid(w, self.grid(), "psi", |i, j| Some(self.node(i, j)))
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<SampledField> {
        let data = read_grid(r)?;
        SampledField::new(data.grid, data.values)
    }
}
