use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::CocycError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    Extended,
}

/// Base points `q₀ … q_T` and the cocycle matrices `A₀ … A_{T−1}`, where `A_n`
/// maps the fiber over `q_n` to the fiber over `q_{n+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CocycleTrace {
    points: Vec<Vec<f64>>,
    matrices: Vec<DMatrix<f64>>,
    precision: Precision,
}

impl CocycleTrace {
    pub fn new(points: Vec<Vec<f64>>, matrices: Vec<DMatrix<f64>>, precision: Precision) -> Result<Self, CocycError> {
        if matrices.is_empty() {
            return Err(CocycError::Horizon("a trace needs at least one step".into()));
        }
        if points.len() != matrices.len() + 1 {
            return Err(CocycError::Shape(format!("{} points for {} steps", points.len(), matrices.len())));
        }
        let d = matrices[0].nrows();
        if matrices.iter().any(|m| m.nrows() != d || m.ncols() != d) {
            return Err(CocycError::Shape("cocycle matrices must be square of one size".into()));
        }
        let b = points[0].len();
        if points.iter().any(|p| p.len() != b) {
            return Err(CocycError::Shape("base points must share one dimension".into()));
        }
        Ok(CocycleTrace { points, matrices, precision })
    }

    /// Constant cocycle with no base-point data.
    pub fn constant(a: DMatrix<f64>, steps: usize) -> Result<Self, CocycError> {
        Self::new(vec![Vec::new(); steps + 1], vec![a; steps], Precision::Double)
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn steps(&self) -> usize {
        self.matrices.len()
    }

    pub fn fiber_dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn base_dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// The sub-trace over steps `start..end`.
    pub fn window(&self, start: usize, end: usize) -> Result<Self, CocycError> {
        if start >= end || end > self.steps() {
            return Err(CocycError::Horizon(format!("window {start}..{end} outside 0..{}", self.steps())));
        }
        Ok(CocycleTrace {
            points: self.points[start..=end].to_vec(),
            matrices: self.matrices[start..end].to_vec(),
            precision: self.precision,
        })
    }

    /// CSV with header `step, q1…, a1_1…` (matrix row-major). The final row
    /// carries `q_T` with empty matrix cells.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), CocycError> {
        let d = self.fiber_dim();
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["step".to_string()];
        header.extend((1..=self.base_dim()).map(|i| format!("q{i}")));
        for i in 1..=d {
            header.extend((1..=d).map(|j| format!("a{i}_{j}")));
        }
        out.write_record(&header).map_err(csv_err)?;
        for (n, q) in self.points.iter().enumerate() {
            let mut row = vec![n.to_string()];
            row.extend(q.iter().map(|x| format!("{x:e}")));
            match self.matrices.get(n) {
                Some(a) => {
                    for i in 0..d {
                        row.extend((0..d).map(|j| format!("{:e}", a[(i, j)])));
                    }
                }
                None => row.extend(std::iter::repeat(String::new()).take(d * d)),
            }
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush().map_err(|e| CocycError::Io(e.to_string()))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, CocycError> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers().map_err(csv_err)?.clone();
        let b = header.iter().filter(|h| h.starts_with('q')).count();
        let m = header.iter().filter(|h| h.starts_with('a')).count();
        let d = (m as f64).sqrt().round() as usize;
        if d * d != m || d == 0 || header.len() != 1 + b + m {
            return Err(CocycError::Parse("header must be step, q…, a…_… with a square matrix".into()));
        }
        let mut points = Vec::new();
        let mut matrices = Vec::new();
        for (n, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| CocycError::Parse(format!("row {n}: bad number `{s}`")));
            points.push(rec.iter().skip(1).take(b).map(num).collect::<Result<Vec<_>, _>>()?);
            let cells: Vec<&str> = rec.iter().skip(1 + b).collect();
            if cells.iter().all(|c| c.trim().is_empty()) {
                continue;
            }
            if matrices.len() != n {
                return Err(CocycError::Parse(format!("row {n}: matrix after the final point")));
            }
            let vals = cells.into_iter().map(num).collect::<Result<Vec<_>, _>>()?;
            matrices.push(DMatrix::from_row_slice(d, d, &vals));
        }
        Self::new(points, matrices, Precision::Double)
    }
}

fn csv_err(e: csv::Error) -> CocycError {
    CocycError::Parse(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let t = CocycleTrace::new(vec![vec![0.1, 0.2], vec![0.4, 0.3], vec![0.1 / 3.0, 0.7]], vec![a.clone(), a], Precision::Double)
            .unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = CocycleTrace::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn shape_errors() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        assert!(CocycleTrace::new(vec![vec![]], vec![a.clone()], Precision::Double).is_err());
        assert!(CocycleTrace::new(vec![vec![]], vec![], Precision::Double).is_err());
        assert!(CocycleTrace::read_csv("step,q1,a1_1,a1_2\n0,1,2,3\n".as_bytes()).is_err());
    }
}
