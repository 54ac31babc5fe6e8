//! Plain-text serialization shared by the exporters: comma-separated, header
//! row, LF line endings, floats at 17 significant digits.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::vision::Grid;

/// Formats a float with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a grid as `rows x cols` CSV with a `c0,c1,...` header.
pub fn write_grid_csv<W: Write>(grid: &Grid, mut out: W) -> Result<()> {
    let header: Vec<String> = (0..grid.cols()).map(|c| format!("c{c}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for r in 0..grid.rows() {
        let row: Vec<String> = grid.row(r).iter().map(|&v| fmt_f64(v)).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_grid_csv<R: BufRead>(input: R) -> Result<Grid> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Csv("empty grid file".into()))??;
    let cols = header.split(',').count();
    let mut data = Vec::new();
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let values = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Csv(format!("row {}: {e}", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != cols {
            return Err(Error::Csv(format!(
                "row {} has {} fields, header has {cols}",
                i + 1,
                values.len()
            )));
        }
        data.extend(values);
        rows += 1;
    }
    Grid::new(rows, cols, data)
}
