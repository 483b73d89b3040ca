//! Per-cell CSV export: `index,x[,y],kind,gamma,t,log_mass,sign`.

use super::{CellMeasure, MeasureKind};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::io::{BufRead, Write};

pub fn write_measure_csv<T: Scalar, W: Write>(m: &CellMeasure<T>, mut w: W) -> Result<()> {
    let two_d = m.grid().dimension() == 2;
    let mut out = String::new();
    out.push_str(if two_d {
        "index,x,y,kind,gamma,t,log_mass,sign\n"
    } else {
        "index,x,kind,gamma,t,log_mass,sign\n"
    });
    for i in 0..m.len() {
        let c = m.grid().cell_center(i);
        let lm = m.log_mass(i);
        let coords = if two_d {
            format!("{},{}", c[0], c[1])
        } else {
            format!("{}", c[0])
        };
        out.push_str(&format!(
            "{i},{coords},{},{},{},{},{}\n",
            m.kind(),
            m.gamma(),
            m.t(),
            lm.log_abs.to_f64_lossy(),
            lm.sign
        ));
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureRow {
    pub index: usize,
    pub center: [f64; 2],
    pub log_mass: f64,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureTable {
    pub dimension: usize,
    pub kind: MeasureKind,
    pub gamma: f64,
    pub t: f64,
    pub rows: Vec<MeasureRow>,
}

fn field<'a>(parts: &[&'a str], i: usize, line: usize) -> Result<&'a str> {
    parts
        .get(i)
        .copied()
        .ok_or_else(|| Error::Format(format!("line {line}: missing column {i}")))
}

fn num<F: std::str::FromStr>(s: &str, line: usize) -> Result<F> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("line {line}: cannot parse '{s}'")))
}

pub fn read_measure_csv<R: BufRead>(r: R) -> Result<MeasureTable> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty measure CSV".into()))??;
    let dimension = match header.trim() {
        "index,x,kind,gamma,t,log_mass,sign" => 1,
        "index,x,y,kind,gamma,t,log_mass,sign" => 2,
        other => return Err(Error::Format(format!("unrecognized header '{other}'"))),
    };
    let off = dimension - 1;
    let mut rows = Vec::new();
    let mut meta = None;
    for (k, line) in lines.enumerate() {
        let line = line?;
        let ln = k + 2;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        let kind: MeasureKind = field(&parts, 2 + off, ln)?.parse()?;
        let gamma: f64 = num(field(&parts, 3 + off, ln)?, ln)?;
        let t: f64 = num(field(&parts, 4 + off, ln)?, ln)?;
        meta.get_or_insert((kind, gamma, t));
        let y = if dimension == 2 { num(field(&parts, 2, ln)?, ln)? } else { 0.0 };
        rows.push(MeasureRow {
            index: num(field(&parts, 0, ln)?, ln)?,
            center: [num(field(&parts, 1, ln)?, ln)?, y],
            log_mass: num(field(&parts, 5 + off, ln)?, ln)?,
            sign: num(field(&parts, 6 + off, ln)?, ln)?,
        });
    }
    let (kind, gamma, t) = meta.ok_or_else(|| Error::Format("measure CSV has no rows".into()))?;
    Ok(MeasureTable {
        dimension,
        kind,
        gamma,
        t,
        rows,
    })
}
