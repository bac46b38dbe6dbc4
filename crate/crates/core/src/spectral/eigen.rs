//! Eigenpairs of the assembled operator.
//!
//! Three backends share one selection and residual check:
//!
//! * `FourierBlocks`: when `A0` commutes with rotations and reflections in `theta`
//!   (uniform linearization), it is block diagonal in the angular Fourier modes;
//!   each real block is solved densely and eigenvectors are lifted with `e^{+-i m theta}`.
//! * `Dense`: full nonsymmetric eigensolve, limited to [`DENSE_LIMIT`] unknowns.
//! * `ShiftInvert`: subspace iteration with `(A0 - sigma)^{-1}` (sparse LU) and
//!   Rayleigh-Ritz on `A0`, returning the eigenvalues nearest the shift.

use faer::prelude::*;
use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::LinearizedOperator;
use crate::sparse::CsrMatrix;

/// Largest problem handed to the full dense eigensolver.
pub const DENSE_LIMIT: usize = 6000;

/// Required relative eigenpair residual `|A0 v - lambda v| / |v|`.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMethod {
    /// Fourier blocks when the operator is rotation invariant, dense below the
    /// size limit, shift-invert above it.
    Auto,
    FourierBlocks,
    Dense,
    ShiftInvert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Which {
    SmallestReal,
    AroundZero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: c64,
    /// Unit 2-norm eigenvector in the operator's layout.
    pub vector: Vec<c64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    pub method: SpectrumMethod,
    /// Seed of the random start block for the iterative backend.
    pub seed: u64,
    /// Shift for the iterative backend; chosen automatically when `None`.
    pub shift: Option<f64>,
    pub max_iter: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            method: SpectrumMethod::Auto,
            seed: 0,
            shift: None,
            max_iter: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub pairs: Vec<Eigenpair>,
    /// Backend that produced the pairs (never `Auto`).
    pub method: SpectrumMethod,
    pub n_unknowns: usize,
}

impl Spectrum {
    pub fn max_residual(&self) -> f64 {
        self.pairs.iter().map(|p| p.residual).fold(0.0, f64::max)
    }

    pub fn values(&self) -> Vec<c64> {
        self.pairs.iter().map(|p| p.value).collect()
    }
}

/// `k` eigenpairs of `A0` selected by `which`, with the default backend choice.
pub fn compute_spectrum(op: &LinearizedOperator, k: usize, which: Which) -> Result<Vec<Eigenpair>> {
    Ok(compute_spectrum_with(op, k, which, &SpectrumOptions::default())?.pairs)
}

pub fn compute_spectrum_with(
    op: &LinearizedOperator,
    k: usize,
    which: Which,
    opts: &SpectrumOptions,
) -> Result<Spectrum> {
    spectrum_of(op.matrix(), k, which, opts, || {
        op.is_rotation_invariant().then(|| op.angular_orbits())
    })
}

/// Eigenpairs of an arbitrary square sparse matrix.
pub fn matrix_spectrum(m: &CsrMatrix, k: usize, which: Which, opts: &SpectrumOptions) -> Result<Spectrum> {
    spectrum_of(m, k, which, opts, || None)
}

fn spectrum_of(
    m: &CsrMatrix,
    k: usize,
    which: Which,
    opts: &SpectrumOptions,
    orbits: impl FnOnce() -> Option<crate::sparse::AngularOrbits>,
) -> Result<Spectrum> {
    let n = m.n_rows();
    if m.n_cols() != n {
        return Err(Error::Precondition(format!("matrix is {}x{}", n, m.n_cols())));
    }
    if k == 0 || k > n {
        return Err(Error::Precondition(format!("k = {k} must lie in 1..={n}")));
    }
    let orbits = match opts.method {
        SpectrumMethod::Auto | SpectrumMethod::FourierBlocks => orbits(),
        _ => None,
    };
    let (pairs, method) = match (opts.method, orbits) {
        (SpectrumMethod::Auto | SpectrumMethod::FourierBlocks, Some(orb)) => {
            (fourier_blocks(m, &orb, k, which)?, SpectrumMethod::FourierBlocks)
        }
        (SpectrumMethod::FourierBlocks, None) => {
            return Err(Error::Precondition("operator is not rotation invariant".into()))
        }
        (SpectrumMethod::Dense, _) | (SpectrumMethod::Auto, None) if n <= DENSE_LIMIT => {
            (dense(m, k, which)?, SpectrumMethod::Dense)
        }
        (SpectrumMethod::Dense, _) => {
            return Err(Error::Precondition(format!(
                "dense eigensolve limited to {DENSE_LIMIT} unknowns, got {n}"
            )))
        }
        _ => (shift_invert(m, k, which, opts)?, SpectrumMethod::ShiftInvert),
    };
    let worst = pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
    if !(worst <= RESIDUAL_TOL) {
        return Err(Error::Numerical(format!(
            "eigenpair residual {worst:e} exceeds {RESIDUAL_TOL:e} ({method:?} backend)"
        )));
    }
    Ok(Spectrum {
        pairs,
        method,
        n_unknowns: n,
    })
}

fn order(which: Which) -> impl Fn(&c64, &c64) -> std::cmp::Ordering {
    move |a, b| match which {
        Which::SmallestReal => a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)),
        Which::AroundZero => a.norm().total_cmp(&b.norm()).then(a.re.total_cmp(&b.re)).then(a.im.total_cmp(&b.im)),
    }
}

fn normalized(mut v: Vec<c64>) -> Vec<c64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|z| *z /= norm);
    }
    v
}

/// `|m v - lambda v| / |v|`.
pub fn residual(m: &CsrMatrix, value: c64, v: &[c64]) -> f64 {
    let y = m.mul_vec_complex(v);
    let r: f64 = y.iter().zip(v).map(|(a, b)| (a - value * b).norm_sqr()).sum();
    let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    (r / n).sqrt()
}

fn pair(m: &CsrMatrix, value: c64, v: Vec<c64>) -> Eigenpair {
    let vector = normalized(v);
    let residual = residual(m, value, &vector);
    Eigenpair { value, vector, residual }
}

fn eigen_dense(a: &Mat<f64>) -> Result<(Vec<c64>, Mat<c64>)> {
    let e = a
        .eigen()
        .map_err(|err| Error::Numerical(format!("dense eigensolve failed: {err:?}")))?;
    let values = e.S().column_vector().iter().copied().collect();
    Ok((values, e.U().to_owned()))
}

/// Inverse iteration from a Schur-based pair whose residual misses the tolerance.
///
/// Back-substituted eigenvectors lose accuracy inside nearly defective clusters
/// (e.g. where the two rotation directions of a Fourier mode meet); a few inverse
/// steps with a slightly perturbed shift recover them.
fn polish(m: &CsrMatrix, a: &Mat<c64>, p: Eigenpair) -> Eigenpair {
    if p.residual <= 0.1 * RESIDUAL_TOL {
        return p;
    }
    let n = a.nrows();
    let shift = p.value + c64::new(1e-10 * p.value.norm().max(1.0), 0.0);
    let lu = Mat::from_fn(n, n, |i, j| if i == j { a[(i, j)] - shift } else { a[(i, j)] }).partial_piv_lu();
    let mut best = p.clone();
    let mut v = p.vector;
    for _ in 0..3 {
        let x = lu.solve(Mat::from_fn(n, 1, |i, _| v[i]));
        v = normalized((0..n).map(|i| x[(i, 0)]).collect());
        let av = m.mul_vec_complex(&v);
        let value: c64 = av.iter().zip(&v).map(|(y, z)| y * z.conj()).sum();
        let cand = pair(m, value, v.clone());
        if cand.residual < best.residual {
            best = cand;
        }
        if best.residual <= 0.1 * RESIDUAL_TOL {
            break;
        }
    }
    best
}

fn dense(m: &CsrMatrix, k: usize, which: Which) -> Result<Vec<Eigenpair>> {
    let a = m.to_dense();
    let (values, u) = eigen_dense(&a)?;
    let mut idx: Vec<usize> = (0..values.len()).collect();
    let cmp = order(which);
    idx.sort_by(|&a, &b| cmp(&values[a], &values[b]));
    let mut ac: Option<Mat<c64>> = None;
    Ok(idx
        .into_iter()
        .take(k)
        .map(|c| {
            let p = pair(m, values[c], (0..u.nrows()).map(|r| u[(r, c)]).collect());
            if p.residual <= 0.1 * RESIDUAL_TOL {
                return p;
            }
            let ac = ac.get_or_insert_with(|| Mat::from_fn(a.nrows(), a.ncols(), |i, j| c64::new(a[(i, j)], 0.0)));
            polish(m, ac, p)
        })
        .collect())
}

fn fourier_blocks(
    m: &CsrMatrix,
    orbits: &crate::sparse::AngularOrbits,
    k: usize,
    which: Which,
) -> Result<Vec<Eigenpair>> {
    // (value, mode, negative, block eigenvector)
    let mut cands: Vec<(c64, usize, bool, Vec<c64>)> = Vec::new();
    for (mode, mult) in orbits.modes() {
        let (values, u) = eigen_dense(&orbits.block(m, mode))?;
        for (c, &val) in values.iter().enumerate() {
            let y: Vec<c64> = (0..u.nrows()).map(|r| u[(r, c)]).collect();
            if mult == 2 {
                cands.push((val, mode, true, y.clone()));
            }
            cands.push((val, mode, false, y));
        }
    }
    let cmp = order(which);
    cands.sort_by(|a, b| cmp(&a.0, &b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    Ok(cands
        .into_iter()
        .take(k)
        .map(|(val, mode, neg, y)| pair(m, val, orbits.lift(&y, mode, neg)))
        .collect())
}

fn gram_schmidt(q: &mut Mat<f64>) {
    let (n, p) = (q.nrows(), q.ncols());
    for j in 0..p {
        for _ in 0..2 {
            for i in 0..j {
                let dot: f64 = (0..n).map(|r| q[(r, i)] * q[(r, j)]).sum();
                for r in 0..n {
                    q[(r, j)] -= dot * q[(r, i)];
                }
            }
        }
        let norm = (0..n).map(|r| q[(r, j)].powi(2)).sum::<f64>().sqrt();
        for r in 0..n {
            q[(r, j)] = if norm > 0.0 { q[(r, j)] / norm } else { 0.0 };
        }
    }
}

fn shift_invert(m: &CsrMatrix, k: usize, which: Which, opts: &SpectrumOptions) -> Result<Vec<Eigenpair>> {
    let n = m.n_rows();
    let scale = (0..n).map(|i| m.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max).max(1.0);
    let sigma = opts.shift.unwrap_or(match which {
        // a hair to the left of the origin keeps a kernel from making the shift singular
        Which::AroundZero => -1e-7 * scale,
        Which::SmallestReal => {
            let gersh = (0..n)
                .map(|i| {
                    let (mut diag, mut off) = (0.0, 0.0);
                    for (j, v) in m.row(i) {
                        if j == i {
                            diag += v;
                        } else {
                            off += v.abs();
                        }
                    }
                    diag - off
                })
                .fold(f64::INFINITY, f64::min);
            gersh.min(0.0) - 1e-7 * scale
        }
    });
    let shifted = m.shifted(-sigma, 1.0)?.to_faer()?;
    let lu = shifted
        .sp_lu()
        .map_err(|e| Error::Numerical(format!("sparse LU of A0 - {sigma} I failed: {e:?}")))?;
    let p = n.min((2 * k).max(k + 8));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q = Mat::from_fn(n, p, |_, _| rng.gen_range(-1.0..1.0));
    gram_schmidt(&mut q);
    let mut best = f64::INFINITY;
    for _ in 0..opts.max_iter {
        lu.solve_in_place(q.as_mut());
        gram_schmidt(&mut q);
        let mut aq = Mat::zeros(n, p);
        for c in 0..p {
            let col: Vec<f64> = (0..n).map(|i| q[(i, c)]).collect();
            for (r, v) in m.mul_vec(&col).into_iter().enumerate() {
                aq[(r, c)] = v;
            }
        }
        let h = q.transpose() * &aq;
        let (values, y) = eigen_dense(&h)?;
        let mut idx: Vec<usize> = (0..p).collect();
        idx.sort_by(|&a, &b| (values[a] - sigma).norm().total_cmp(&(values[b] - sigma).norm()));
        let pairs: Vec<Eigenpair> = idx
            .iter()
            .take(k)
            .map(|&c| {
                let v: Vec<c64> = (0..n)
                    .map(|r| (0..p).map(|l| y[(l, c)] * q[(r, l)]).sum())
                    .collect();
                pair(m, values[c], v)
            })
            .collect();
        let worst = pairs.iter().map(|e| e.residual).fold(0.0, f64::max);
        best = best.min(worst);
        if worst <= 0.1 * RESIDUAL_TOL {
            let mut pairs = pairs;
            let cmp = order(which);
            pairs.sort_by(|a, b| cmp(&a.value, &b.value));
            return Ok(pairs);
        }
    }
    Err(Error::Numerical(format!(
        "shift-invert subspace iteration did not converge in {} iterations (shift {sigma}, block {p}, best residual {best:e})",
        opts.max_iter
    )))
}

/// Whether the non-real values come in conjugate pairs within `tol` (relative).
///
/// A value without partner is tolerated only when it is the last one selected,
/// where truncation at `k` can split a pair.
pub fn conjugate_pairs_closed(values: &[c64], tol: f64) -> bool {
    let mut used = vec![false; values.len()];
    for (i, z) in values.iter().enumerate() {
        if used[i] || z.im.abs() <= tol * z.norm().max(1.0) {
            continue;
        }
        let partner = (0..values.len())
            .find(|&j| j != i && !used[j] && (values[j] - z.conj()).norm() <= tol * z.norm().max(1.0));
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
            }
            None if i + 1 == values.len() => {}
            None => return false,
        }
    }
    true
}
