//! Compressed sparse row storage and rotation-symmetry block reduction.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{self, Write};

use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Mat};

use crate::error::{Error, Result};

/// Square or rectangular CSR matrix with `f64` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted = triplets.to_vec();
        for &(r, c, _) in &sorted {
            if r >= n_rows || c >= n_cols {
                return Err(Error::Assembly(format!(
                    "entry ({r}, {c}) outside {n_rows}x{n_cols}"
                )));
            }
        }
        sorted.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            col_idx.push(c);
            values.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries of row `i` as `(col, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[span.clone()].binary_search(&j) {
            Ok(pos) => self.values[span.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_complex(&self, x: &[c64]) -> Vec<c64> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|i| self.row(i).map(|(j, v)| x[j] * v).sum())
            .collect()
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.n_rows)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .collect()
    }

    /// `shift * I + scale * self` for square matrices.
    pub fn shifted(&self, shift: f64, scale: f64) -> Result<Self> {
        if self.n_rows != self.n_cols {
            return Err(Error::Assembly("shift of a non-square matrix".into()));
        }
        let mut t: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (i, j, scale * v)).collect();
        t.extend((0..self.n_rows).map(|i| (i, i, shift)));
        Self::from_triplets(self.n_rows, self.n_cols, &t)
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.n_rows, self.n_cols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let t: Vec<_> = self
            .triplets()
            .into_iter()
            .map(|(i, j, v)| Triplet::new(i, j, v))
            .collect();
        SparseColMat::try_new_from_triplets(self.n_rows, self.n_cols, &t)
            .map_err(|e| Error::Assembly(format!("sparse conversion failed: {e:?}")))
    }

    /// Write one `row col value` line per stored entry, after a dimension header.
    pub fn write_triplets(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "# rows {} cols {} nnz {}", self.n_rows, self.n_cols, self.nnz())?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{i} {j} {v:.17e}")?;
        }
        Ok(())
    }
}

/// Unknowns grouped into orbits of the discrete rotation `theta_j -> theta_{j+1}`.
///
/// Orbit `q` holds the unknowns at angular index `j = 0..n_theta` that differ only
/// in `theta`. An operator that commutes with the rotation and with the
/// reflection `theta -> -theta` maps `u (x) e^{i m theta}` to `(B_m u) (x) e^{i m theta}`
/// with a real block `B_m`, so its spectrum is the union of the block spectra.
#[derive(Debug, Clone)]
pub struct AngularOrbits {
    n_theta: usize,
    n_orbits: usize,
    index: Vec<usize>,
    theta0: f64,
}

impl AngularOrbits {
    /// `global(q, j)` gives the unknown index of orbit `q` at angular index `j`.
    pub fn from_fn(n_orbits: usize, n_theta: usize, theta0: f64, global: impl Fn(usize, usize) -> usize) -> Self {
        let mut index = Vec::with_capacity(n_orbits * n_theta);
        for q in 0..n_orbits {
            for j in 0..n_theta {
                index.push(global(q, j));
            }
        }
        Self {
            n_theta,
            n_orbits,
            index,
            theta0,
        }
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_orbits(&self) -> usize {
        self.n_orbits
    }

    fn global(&self, q: usize, j: usize) -> usize {
        self.index[q * self.n_theta + j]
    }

    fn locate(&self, n: usize) -> Vec<(usize, usize)> {
        let mut loc = vec![(usize::MAX, usize::MAX); n];
        for q in 0..self.n_orbits {
            for j in 0..self.n_theta {
                loc[self.global(q, j)] = (q, j);
            }
        }
        loc
    }

    /// Entries of the reference rows `(q, 0)` keyed by `(q, q', offset)`.
    fn reference_stencil(&self, m: &CsrMatrix, loc: &[(usize, usize)]) -> HashMap<(usize, usize, usize), f64> {
        let mut map = HashMap::new();
        for q in 0..self.n_orbits {
            for (col, v) in m.row(self.global(q, 0)) {
                let (qc, jc) = loc[col];
                map.insert((q, qc, jc), v);
            }
        }
        map
    }

    /// Whether `m` commutes with the rotation and reflection in `theta`.
    pub fn is_invariant(&self, m: &CsrMatrix) -> bool {
        let n = self.n_orbits * self.n_theta;
        if m.n_rows() != n || m.n_cols() != n {
            return false;
        }
        let loc = self.locate(n);
        if loc.iter().any(|&(q, _)| q == usize::MAX) {
            return false;
        }
        let reference = self.reference_stencil(m, &loc);
        let nt = self.n_theta;
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-13 * x.abs().max(y.abs());
        for (&(q, qc, off), &v) in &reference {
            let mirrored = reference.get(&(q, qc, (nt - off) % nt)).copied().unwrap_or(0.0);
            if !close(v, mirrored) {
                return false;
            }
        }
        for q in 0..self.n_orbits {
            for j in 1..nt {
                let row = self.global(q, j);
                let mut count = 0usize;
                for (col, v) in m.row(row) {
                    let (qc, jc) = loc[col];
                    let off = (jc + nt - j) % nt;
                    let r = reference.get(&(q, qc, off)).copied().unwrap_or(0.0);
                    if !close(v, r) {
                        return false;
                    }
                    count += 1;
                }
                let expected = reference.keys().filter(|k| k.0 == q).count();
                if count != expected {
                    return false;
                }
            }
        }
        true
    }

    /// Real block `B_m` acting on orbit amplitudes.
    pub fn block(&self, m: &CsrMatrix, mode: usize) -> Mat<f64> {
        let n = self.n_orbits * self.n_theta;
        let loc = self.locate(n);
        let dtheta = 2.0 * PI / self.n_theta as f64;
        let mut b = Mat::zeros(self.n_orbits, self.n_orbits);
        for q in 0..self.n_orbits {
            for (col, v) in m.row(self.global(q, 0)) {
                let (qc, jc) = loc[col];
                b[(q, qc)] += v * (mode as f64 * jc as f64 * dtheta).cos();
            }
        }
        b
    }

    /// Angular modes `0..=n_theta/2` with their multiplicity (1 or 2).
    pub fn modes(&self) -> Vec<(usize, usize)> {
        (0..=self.n_theta / 2)
            .map(|m| {
                let mult = if m == 0 || 2 * m == self.n_theta { 1 } else { 2 };
                (m, mult)
            })
            .collect()
    }

    /// Full-length vector `y_q e^{i sign m theta_j}` from orbit amplitudes `y`.
    pub fn lift(&self, y: &[c64], mode: usize, negative: bool) -> Vec<c64> {
        let n = self.n_orbits * self.n_theta;
        let dtheta = 2.0 * PI / self.n_theta as f64;
        let sign = if negative { -1.0 } else { 1.0 };
        let mut v = vec![c64::new(0.0, 0.0); n];
        for q in 0..self.n_orbits {
            for j in 0..self.n_theta {
                let theta = self.theta0 + j as f64 * dtheta;
                let phase = c64::from_polar(1.0, sign * mode as f64 * theta);
                v[self.global(q, j)] = y[q] * phase;
            }
        }
        v
    }
}
