//! Grid fields on disk: one JSON header line, then raw little-endian f64 data
//! in node-major order (all fields of node 0, then node 1, ...).

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use super::chart::{ChartMetric4, Grid4};
use crate::error::{Error, Result};

const MAGIC: &str = "asd-glue-grid";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridHeader {
    pub format: String,
    pub version: u32,
    pub dims: [usize; 4],
    pub lo: [f64; 4],
    pub spacing: [f64; 4],
    pub fields: Vec<String>,
    #[serde(default)]
    pub orientation: Option<i8>,
    pub endianness: String,
}

/// Named scalar fields on a grid, stored node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFields {
    pub grid: Grid4,
    pub names: Vec<String>,
    pub data: Vec<f64>,
    pub orientation: Option<i8>,
}

impl GridFields {
    pub fn field(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.names.iter().position(|n| n == name)?;
        let stride = self.names.len();
        Some(self.data.iter().skip(k).step_by(stride).copied().collect())
    }
}

pub fn write_fields<W: Write>(mut w: W, f: &GridFields) -> Result<()> {
    if f.data.len() != f.grid.len() * f.names.len() {
        return Err(Error::GridMismatch("data length".into()));
    }
    let header = GridHeader {
        format: MAGIC.into(),
        version: 1,
        dims: f.grid.n,
        lo: f.grid.lo,
        spacing: f.grid.h,
        fields: f.names.clone(),
        orientation: f.orientation,
        endianness: "little".into(),
    };
    let line = serde_json::to_string(&header)?;
    w.write_all(line.as_bytes())?;
    w.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(8 * f.data.len());
    for v in &f.data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_fields<R: Read>(r: R) -> Result<GridFields> {
    let mut r = BufReader::new(r);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: GridHeader = serde_json::from_str(line.trim_end())?;
    if header.format != MAGIC || header.endianness != "little" {
        return Err(Error::Format(format!("unsupported header {}", header.format)));
    }
    let grid = Grid4::new(header.dims, header.lo, header.spacing)?;
    let count = grid.len() * header.fields.len();
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * count {
        return Err(Error::Format(format!("expected {} bytes, found {}", 8 * count, bytes.len())));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(GridFields { grid, names: header.fields, data, orientation: header.orientation })
}

pub fn metric_fields(m: &ChartMetric4) -> GridFields {
    let mut names = Vec::new();
    for i in 0..4 {
        for j in i..4 {
            names.push(format!("g{i}{j}"));
        }
    }
    let mut data = Vec::with_capacity(10 * m.g.len());
    for g in &m.g {
        for i in 0..4 {
            for j in i..4 {
                data.push(g[(i, j)]);
            }
        }
    }
    GridFields { grid: m.grid.clone(), names, data, orientation: Some(m.orientation) }
}

pub fn metric_from_fields(f: &GridFields) -> Result<ChartMetric4> {
    let mut cols = Vec::new();
    for i in 0..4 {
        for j in i..4 {
            cols.push(
                f.field(&format!("g{i}{j}"))
                    .ok_or_else(|| Error::Format(format!("missing field g{i}{j}")))?,
            );
        }
    }
    let g = (0..f.grid.len())
        .map(|node| {
            let mut m = Matrix4::zeros();
            let mut k = 0;
            for i in 0..4 {
                for j in i..4 {
                    m[(i, j)] = cols[k][node];
                    m[(j, i)] = cols[k][node];
                    k += 1;
                }
            }
            m
        })
        .collect();
    ChartMetric4::new(f.grid.clone(), g, f.orientation.unwrap_or(1))
}

pub fn save_metric(path: &Path, m: &ChartMetric4) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_fields(std::io::BufWriter::new(f), &metric_fields(m))
}

pub fn load_metric(path: &Path) -> Result<ChartMetric4> {
    metric_from_fields(&read_fields(std::fs::File::open(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::super::chart::samples;
    use super::*;

    #[test]
    fn metric_roundtrip_is_bit_exact() {
        let grid = Grid4::from_box([3, 2, 2, 1], [0.1; 4], [0.7; 4]).unwrap();
        let m = ChartMetric4::from_fn(grid, -1, samples::round_s4).unwrap();
        let mut buf = Vec::new();
        write_fields(&mut buf, &metric_fields(&m)).unwrap();
        let back = metric_from_fields(&read_fields(&buf[..]).unwrap()).unwrap();
        assert_eq!(back.orientation, -1);
        assert_eq!(back.grid, m.grid);
        for (a, b) in back.g.iter().zip(&m.g) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn truncated_block_is_rejected() {
        let grid = Grid4::from_box([2, 1, 1, 1], [0.0; 4], [1.0; 4]).unwrap();
        let m = ChartMetric4::from_fn(grid, 1, samples::euclidean).unwrap();
        let mut buf = Vec::new();
        write_fields(&mut buf, &metric_fields(&m)).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_fields(&buf[..]).is_err());
    }
}
