use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{SuperDensity, SuperGrid};
use crate::{CMatrix, Error, Result, C64};

/// Metadata written next to a density CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySidecar {
    pub grid: SuperGrid,
    pub q_max: f64,
    pub hbar: f64,
    pub mass: f64,
    pub layout: String,
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("density I/O: {e}"))
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

impl SuperDensity {
    /// One row per `Q` index: `i, Q_i, re ρ(Q_i,q_0), im ρ(Q_i,q_0), …`,
    /// plus a JSON sidecar with grid, ħ and mass.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let n = self.grid.n;
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path).map_err(io_err)?));
        let mut header = vec!["i".to_string(), "Q [length]".to_string()];
        for j in 0..n {
            header.push(format!("re_{j} [1/length]"));
            header.push(format!("im_{j} [1/length]"));
        }
        w.write_record(&header).map_err(io_err)?;
        for i in 0..n {
            let mut rec = vec![i.to_string(), format!("{:e}", self.grid.point(i))];
            for j in 0..n {
                let z = self.values[(i, j)];
                rec.push(format!("{:e}", z.re));
                rec.push(format!("{:e}", z.im));
            }
            w.write_record(&rec).map_err(io_err)?;
        }
        w.flush().map_err(io_err)?;
        let meta = DensitySidecar {
            grid: self.grid,
            q_max: self.grid.q_max(),
            hbar: self.hbar,
            mass: self.mass,
            layout: "row per Q index; columns i, Q, then re/im interleaved over q".into(),
        };
        let f = File::create(sidecar_path(path)).map_err(io_err)?;
        serde_json::to_writer_pretty(BufWriter::new(f), &meta).map_err(io_err)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let meta: DensitySidecar = serde_json::from_reader(BufReader::new(
            File::open(sidecar_path(path)).map_err(io_err)?,
        ))
        .map_err(io_err)?;
        let n = meta.grid.n;
        let mut values = CMatrix::zeros(n, n);
        let mut r = csv::Reader::from_reader(BufReader::new(File::open(path).map_err(io_err)?));
        let mut rows = 0;
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(io_err)?;
            if i >= n || rec.len() != 2 + 2 * n {
                return Err(Error::GridMismatch(format!(
                    "row {i} does not fit a {n}×{n} grid"
                )));
            }
            for j in 0..n {
                let re: f64 = rec[2 + 2 * j].parse().map_err(io_err)?;
                let im: f64 = rec[3 + 2 * j].parse().map_err(io_err)?;
                values[(i, j)] = C64::new(re, im);
            }
            rows += 1;
        }
        if rows != n {
            return Err(Error::GridMismatch(format!(
                "expected {n} rows, found {rows}"
            )));
        }
        SuperDensity::new(meta.grid, meta.hbar, meta.mass, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let g = SuperGrid::centered(4.0, 16).unwrap();
        let rho = SuperDensity::classical_gaussian(g, 0.8, 1.3, 0.2, 0.4, 0.7, 0.9);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rho.csv");
        rho.write_csv(&p).unwrap();
        let back = SuperDensity::read_csv(&p).unwrap();
        assert_eq!(back, rho);
    }
}
