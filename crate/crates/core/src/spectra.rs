//! Adjacency spectra of the Cayley multigraphs, Ramanujan verdicts against
//! `2 sqrt(3)`, and spectral Cheeger bounds.
//!
//! Two independent routes: a dense symmetric eigensolver for `n <= 4096`,
//! and a matrix-free Lanczos iteration with full reorthogonalization whose
//! tridiagonal matrix is diagonalized by implicit QL. Lanczos from a single
//! start vector sees each distinct eigenvalue once, so comparisons between
//! the routes are made on distinct values.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cayley::{Multigraph, DEGREE};

pub const DENSE_CUTOFF: usize = 4096;
pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DECISION_BAND: f64 = 1e-8;
/// Ritz pairs are accepted once `|beta_m s_m| <= RESIDUAL_TOL`.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Default memory allowed for the Lanczos basis.
pub const DEFAULT_BASIS_BYTES: usize = 1 << 30;

const CHUNK: usize = 4096;

pub fn ramanujan_bound() -> f64 {
    2.0 * ((DEGREE - 1) as f64).sqrt()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("dense mode needs n <= {DENSE_CUTOFF}, got {0}")]
    TooLargeForDense(usize),
    #[error("Lanczos did not converge in {iterations} steps; residual estimates {residuals:?}")]
    NoConvergence {
        iterations: usize,
        residuals: Vec<f64>,
    },
    #[error("tridiagonal QL did not converge")]
    QlFailed,
    #[error("graph is disconnected; the verdict is undefined")]
    Disconnected,
    #[error("graph has no second eigenvalue")]
    NoSecondEigenvalue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Lanczos,
}

/// `y = A x` from the dart lists.
pub fn apply(g: &Multigraph, x: &[f64], y: &mut [f64]) {
    let darts = g.darts();
    y.par_chunks_mut(CHUNK).enumerate().for_each(|(c, ys)| {
        for (off, yu) in ys.iter_mut().enumerate() {
            let u = c * CHUNK + off;
            *yu = darts[DEGREE * u..DEGREE * (u + 1)]
                .iter()
                .map(|&v| x[v as usize])
                .sum();
        }
    });
}

// chunked so that the result does not depend on the thread count
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let parts: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum())
        .collect();
    parts.iter().sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.par_chunks_mut(CHUNK)
        .zip(x.par_chunks(CHUNK))
        .for_each(|(ys, xs)| {
            for (yi, xi) in ys.iter_mut().zip(xs) {
                *yi += alpha * xi;
            }
        });
}

fn scale(alpha: f64, x: &mut [f64]) {
    x.par_iter_mut().for_each(|v| *v *= alpha);
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn dense_matrix(g: &Multigraph) -> DMatrix<f64> {
    let n = g.n();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for u in 0..n as u32 {
        for &(v, k) in g.adjacency(u) {
            m[(u as usize, v as usize)] = f64::from(k);
        }
    }
    m
}

/// All eigenvalues in descending order.
pub fn dense_spectrum(g: &Multigraph) -> Result<Vec<f64>, SpectraError> {
    if g.n() > DENSE_CUTOFF {
        return Err(SpectraError::TooLargeForDense(g.n()));
    }
    let eig = SymmetricEigen::new(dense_matrix(g));
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    Ok(v)
}

/// Collapses a descending list to distinct values (within `tol`).
pub fn distinct(values: &[f64], tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &v in values {
        if out.last().is_none_or(|&w: &f64| (w - v).abs() > tol) {
            out.push(v);
        }
    }
    out
}

/// Implicit QL on a symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e[i] = T[i][i+1]`). Returns eigenvalues and the
/// row-major eigenvector matrix `z` (column `j` belongs to eigenvalue `j`).
pub fn tridiagonal_ql(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>), SpectraError> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(SpectraError::QlFailed);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let f = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * f;
                    z[k * n + i] = c * z[k * n + i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RitzPair {
    pub value: f64,
    /// `|beta_m s_m|`.
    pub residual_estimate: f64,
    /// `||A y - theta y||` for the assembled Ritz vector.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LanczosResult {
    /// Descending.
    pub largest: Vec<RitzPair>,
    /// Ascending.
    pub smallest: Vec<RitzPair>,
    pub iterations: usize,
    /// The Krylov space became invariant, so all Ritz values are exact.
    pub exhausted: bool,
    pub converged: bool,
}

impl LanczosResult {
    pub fn max_residual(&self) -> f64 {
        self.largest
            .iter()
            .chain(&self.smallest)
            .map(|p| p.residual)
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LanczosOptions {
    /// Number of extreme eigenvalues wanted at each end.
    pub k: usize,
    pub seed: u64,
    /// Unit vectors to project out (eigenvectors to skip).
    pub deflate: Vec<Vec<f64>>,
    pub basis_bytes: usize,
    /// Return the best estimates instead of failing on the iteration cap.
    pub allow_unconverged: bool,
}

impl LanczosOptions {
    pub fn new(k: usize) -> LanczosOptions {
        LanczosOptions {
            k,
            seed: DEFAULT_SEED,
            deflate: Vec::new(),
            basis_bytes: DEFAULT_BASIS_BYTES,
            allow_unconverged: false,
        }
    }

    /// `10 k + 200`, further limited by the basis memory.
    pub fn iteration_cap(&self, n: usize) -> usize {
        let by_memory = (self.basis_bytes / (8 * n.max(1))).max(2 * self.k + 2);
        (10 * self.k + 200).min(by_memory).min(n)
    }
}

fn orthogonalize(w: &mut [f64], against: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in against {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

pub fn lanczos(g: &Multigraph, opts: &LanczosOptions) -> Result<LanczosResult, SpectraError> {
    let n = g.n();
    let cap = opts.iteration_cap(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    orthogonalize(&mut q, &opts.deflate);
    let nq = norm(&q);
    scale(1.0 / nq, &mut q);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut exhausted = false;
    let mut last: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut converged = false;

    loop {
        let j = alpha.len();
        apply(g, &basis[j], &mut w);
        let a = dot(&basis[j], &w);
        alpha.push(a);
        axpy(-a, &basis[j], &mut w);
        if j > 0 {
            axpy(-beta[j - 1], &basis[j - 1], &mut w);
        }
        orthogonalize(&mut w, &opts.deflate);
        orthogonalize(&mut w, &basis);
        let b = norm(&w);
        let m = alpha.len();
        if b <= 1e-12 * (DEGREE as f64) {
            exhausted = true;
        }
        let check = exhausted || m >= cap || (m >= 2 * opts.k && m.is_multiple_of(5));
        if check {
            let (theta, z) = tridiagonal_ql(&alpha, &beta)?;
            let est: Vec<f64> = (0..m).map(|c| (b * z[(m - 1) * m + c]).abs()).collect();
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&x, &y| theta[y].total_cmp(&theta[x]));
            let k = opts.k.min(m);
            let wanted: Vec<usize> = order[..k]
                .iter()
                .chain(order[m - k..].iter())
                .copied()
                .collect();
            converged = exhausted || wanted.iter().all(|&c| est[c] <= RESIDUAL_TOL);
            last = Some((theta, z));
            if converged || m >= cap {
                break;
            }
        }
        if exhausted {
            break;
        }
        beta.push(b);
        let mut next = w.clone();
        scale(1.0 / b, &mut next);
        basis.push(next);
    }
    let m = alpha.len();
    let (theta, z) = last.expect("checked at the final step");
    let b_last = if exhausted { 0.0 } else { norm(&w) };
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| theta[y].total_cmp(&theta[x]));
    let k = opts.k.min(m);
    let pair = |c: usize| {
        let mut y = vec![0.0; n];
        for (r, qr) in basis.iter().take(m).enumerate() {
            axpy(z[r * m + c], qr, &mut y);
        }
        let ny = norm(&y);
        scale(1.0 / ny, &mut y);
        let mut ay = vec![0.0; n];
        apply(g, &y, &mut ay);
        axpy(-theta[c], &y, &mut ay);
        RitzPair {
            value: theta[c],
            residual_estimate: (b_last * z[(m - 1) * m + c]).abs(),
            residual: norm(&ay),
        }
    };
    let largest: Vec<RitzPair> = order[..k].iter().map(|&c| pair(c)).collect();
    let smallest: Vec<RitzPair> = order[m - k..].iter().rev().map(|&c| pair(c)).collect();
    if !converged && !opts.allow_unconverged {
        return Err(SpectraError::NoConvergence {
            iterations: m,
            residuals: largest
                .iter()
                .chain(&smallest)
                .map(|p| p.residual_estimate)
                .collect(),
        });
    }
    Ok(LanczosResult {
        largest,
        smallest,
        iterations: m,
        exhausted,
        converged,
    })
}

/// Unit constant vector and, for bipartite graphs, the unit sign vector:
/// the eigenvectors of `4` and `-4` on a connected graph.
pub fn trivial_eigenvectors(g: &Multigraph) -> Vec<Vec<f64>> {
    let n = g.n();
    let c = 1.0 / (n as f64).sqrt();
    let mut out = vec![vec![c; n]];
    if let Some(col) = g.bipartition() {
        out.push(col.iter().map(|&s| if s == 0 { c } else { -c }).collect());
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Ramanujan,
    NotRamanujan,
    Inconclusive,
}

impl Verdict {
    pub fn from_margin(margin: f64) -> Verdict {
        if margin > DECISION_BAND {
            Verdict::NotRamanujan
        } else if margin < -DECISION_BAND {
            Verdict::Ramanujan
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralReport {
    pub n: usize,
    pub bipartite: bool,
    pub lambda1: f64,
    /// Second-largest eigenvalue; absent for a single vertex.
    pub lambda2: Option<f64>,
    pub lambda_min_nontrivial: Option<f64>,
    /// Largest `|lambda|` over eigenvalues other than `4` and, if
    /// bipartite, `-4`; `0` when there are none.
    pub lambda_nontrivial_max: f64,
    pub bound: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub cheeger: Option<CheegerBounds>,
    pub method: Method,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CheegerBounds {
    pub lower: f64,
    pub upper: f64,
}

/// `(4 - lambda2) / 2 <= h <= sqrt(2 * 4 * (4 - lambda2))`.
pub fn cheeger_from_lambda2(lambda2: f64) -> CheegerBounds {
    let gap = DEGREE as f64 - lambda2;
    CheegerBounds {
        lower: gap / 2.0,
        upper: (2.0 * DEGREE as f64 * gap).sqrt(),
    }
}

#[allow(clippy::too_many_arguments)]
fn report_from_nontrivial(
    g: &Multigraph,
    bipartite: bool,
    lambda1: f64,
    top: Option<f64>,
    bottom: Option<f64>,
    method: Method,
    residual: f64,
    converged: bool,
    iterations: usize,
) -> SpectralReport {
    let max = top
        .map(f64::abs)
        .into_iter()
        .chain(bottom.map(f64::abs))
        .fold(0.0, f64::max);
    let margin = max - ramanujan_bound();
    // with no nontrivial eigenvalues left, the second one is -4 (n = 2)
    let lambda2 = match (g.n(), top) {
        (1, _) => None,
        (_, Some(t)) => Some(t),
        (_, None) => Some(-(DEGREE as f64)),
    };
    SpectralReport {
        n: g.n(),
        bipartite,
        lambda1,
        lambda2,
        lambda_min_nontrivial: bottom,
        lambda_nontrivial_max: max,
        bound: ramanujan_bound(),
        margin,
        verdict: Verdict::from_margin(margin),
        cheeger: lambda2.map(cheeger_from_lambda2),
        method,
        residual,
        converged,
        iterations,
    }
}

/// Verdict from the full dense spectrum.
pub fn dense_report(g: &Multigraph) -> Result<SpectralReport, SpectraError> {
    if !g.is_connected() {
        return Err(SpectraError::Disconnected);
    }
    if g.n() > DENSE_CUTOFF {
        return Err(SpectraError::TooLargeForDense(g.n()));
    }
    let a = dense_matrix(g);
    let eig = SymmetricEigen::new(a.clone());
    let mut spec: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    spec.sort_by(|x, y| y.total_cmp(x));
    let bipartite = g.bipartition().is_some();
    let end = if bipartite { spec.len() - 1 } else { spec.len() };
    let nontrivial = &spec[1..end.max(1)];
    let residual = (0..g.n())
        .map(|c| {
            let v = eig.eigenvectors.column(c);
            (&a * v - v * eig.eigenvalues[c]).norm()
        })
        .fold(0.0, f64::max);
    Ok(report_from_nontrivial(
        g,
        bipartite,
        spec[0],
        nontrivial.first().copied(),
        nontrivial.last().copied(),
        Method::Dense,
        residual,
        true,
        0,
    ))
}

/// Verdict from Lanczos on the complement of the trivial eigenvectors.
pub fn lanczos_report(g: &Multigraph, opts: &LanczosOptions) -> Result<SpectralReport, SpectraError> {
    if !g.is_connected() {
        return Err(SpectraError::Disconnected);
    }
    let bipartite = g.bipartition().is_some();
    let deflate = trivial_eigenvectors(g);
    if g.n() <= deflate.len() {
        return Ok(report_from_nontrivial(
            g,
            bipartite,
            DEGREE as f64,
            None,
            None,
            Method::Lanczos,
            0.0,
            true,
            0,
        ));
    }
    let mut o = opts.clone();
    o.deflate = deflate;
    let r = lanczos(g, &o)?;
    Ok(report_from_nontrivial(
        g,
        bipartite,
        DEGREE as f64,
        r.largest.first().map(|p| p.value),
        r.smallest.first().map(|p| p.value),
        Method::Lanczos,
        r.max_residual(),
        r.converged,
        r.iterations,
    ))
}

/// Dense for `n <= 4096`, Lanczos above.
pub fn ramanujan_verdict(g: &Multigraph) -> Result<SpectralReport, SpectraError> {
    if g.n() <= DENSE_CUTOFF {
        dense_report(g)
    } else {
        lanczos_report(g, &LanczosOptions::new(2))
    }
}

pub fn cheeger_bounds(g: &Multigraph) -> Result<CheegerBounds, SpectraError> {
    let r = if g.n() <= DENSE_CUTOFF {
        dense_report(g)?
    } else {
        let mut o = LanczosOptions::new(2);
        o.allow_unconverged = true;
        lanczos_report(g, &o)?
    };
    r.cheeger.ok_or(SpectraError::NoSecondEigenvalue)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::build_cayley;
    use crate::quotient::QuotientGroup;

    fn graph(level: usize) -> Multigraph {
        build_cayley(&QuotientGroup::enumerate(level).unwrap())
    }

    #[test]
    fn ql_matches_dense_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2, 5, 30] {
            let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let e: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (mut ours, z) = tridiagonal_ql(&d, &e).unwrap();
            let mut t = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                t[(i, i)] = d[i];
                if i + 1 < n {
                    t[(i, i + 1)] = e[i];
                    t[(i + 1, i)] = e[i];
                }
            }
            for c in 0..n {
                let v = nalgebra::DVector::from_iterator(n, (0..n).map(|r| z[r * n + c]));
                assert!((&t * &v - &v * ours[c]).norm() < 1e-12);
            }
            let mut theirs: Vec<f64> = SymmetricEigen::new(t).eigenvalues.iter().copied().collect();
            ours.sort_by(f64::total_cmp);
            theirs.sort_by(f64::total_cmp);
            for (a, b) in ours.iter().zip(&theirs) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn level_one_spectrum() {
        let s = dense_spectrum(&graph(1)).unwrap();
        let want = [4.0, 0.0, 0.0, -4.0];
        for (a, b) in s.iter().zip(want) {
            assert!((a - b).abs() < 1e-10);
        }
        let r = dense_report(&graph(1)).unwrap();
        assert_eq!(r.verdict, Verdict::Ramanujan);
        assert!(r.lambda_nontrivial_max.abs() < 1e-10);
    }

    #[test]
    fn bouquet() {
        let g = graph(0);
        assert_eq!(dense_spectrum(&g).unwrap(), vec![4.0]);
        let r = dense_report(&g).unwrap();
        assert_eq!(r.lambda2, None);
        assert_eq!(r.verdict, Verdict::Ramanujan);
        assert_eq!(cheeger_bounds(&g), Err(SpectraError::NoSecondEigenvalue));
    }

    #[test]
    fn lanczos_agrees_with_dense_on_level_three() {
        let g = graph(3);
        let dense = dense_report(&g).unwrap();
        let lz = lanczos_report(&g, &LanczosOptions::new(2)).unwrap();
        assert!((dense.lambda_nontrivial_max - lz.lambda_nontrivial_max).abs() < 1e-9);
        assert!((dense.lambda2.unwrap() - lz.lambda2.unwrap()).abs() < 1e-9);
    }
}
