//! Detectors built on the spectrum of the Ricci operator: Einstein-type
//! level, quasi-Einstein rank, and the rank-two null-covector decomposition
//! of `S - alpha g`.

use super::{sample_over, Sampled};
use crate::curvature::CurvatureData;
use crate::metric::{MetricError, SampleGrid, Tolerances};
use crate::numeric;
use crate::tensor::SampledTensor;
use nalgebra::{DMatrix, DVector};

/// Result of the Einstein-type level search: the smallest `k <= 4` such that
/// `{g, S, S^2, .., S^k}` is linearly dependent with nonzero top coefficient
/// at every grid point.
#[derive(Debug, Clone)]
pub struct EinLevel {
    /// `Some(1)` means Einstein; `None` means independent up to `S^4`.
    pub level: Option<usize>,
    /// Per point: coefficients `(n_0, .., n_k)` of `n_0 g + n_1 S + .. = 0`,
    /// normalized so the top coefficient is 1. When the dependence space has
    /// dimension above one, this is the minimal-norm representative.
    pub coeffs: Vec<Vec<f64>>,
    /// Dimension of the dependence space at the chosen level, per point.
    pub nullspace_dim: Vec<usize>,
}

/// Sampled powers `[g, S, S^2, S^3, S^4]` over the grid.
fn power_samples(data: &CurvatureData, grid: &SampleGrid) -> Result<Vec<Sampled>, MetricError> {
    let g = data.tensor_by_name("g", None).expect("metric field");
    Ok(vec![
        sample_over(&g, data, grid)?,
        sample_over(&data.ricci, data, grid)?,
        sample_over(&data.ricci_powers[0], data, grid)?,
        sample_over(&data.ricci_powers[1], data, grid)?,
        sample_over(&data.ricci_powers[2], data, grid)?,
    ])
}

pub fn ein_level(data: &CurvatureData, grid: &SampleGrid) -> Result<EinLevel, MetricError> {
    let powers = power_samples(data, grid)?;
    let tol = grid.tol;
    for level in 1..=4usize {
        let mut coeffs = Vec::new();
        let mut dims = Vec::new();
        let mut all_ok = true;
        for p in 0..grid.points.len() {
            match level_relation_at(&powers, p, level, tol) {
                Some((c, dim)) => {
                    coeffs.push(c);
                    dims.push(dim);
                }
                None => {
                    all_ok = false;
                    break;
                }
            }
        }
        if all_ok {
            return Ok(EinLevel {
                level: Some(level),
                coeffs,
                nullspace_dim: dims,
            });
        }
    }
    Ok(EinLevel {
        level: None,
        coeffs: Vec::new(),
        nullspace_dim: Vec::new(),
    })
}

/// Finds `(n_0, .., n_level)` with top coefficient 1 at one point, or `None`
/// when the powers up to `level` admit no such relation.
fn level_relation_at(
    powers: &[Sampled],
    p: usize,
    level: usize,
    tol: Tolerances,
) -> Option<(Vec<f64>, usize)> {
    let cols: Vec<&SampledTensor> = powers[..=level].iter().map(|f| &f[p]).collect();
    let norms: Vec<f64> = cols.iter().map(|c| c.norm()).collect();
    // A vanishing top power is the relation `1 * S^level = 0` on its own.
    if norms[level] <= tol.abs_floor {
        let mut c = vec![0.0; level + 1];
        c[level] = 1.0;
        return Some((c, level));
    }
    let live: Vec<usize> = (0..=level).filter(|j| norms[*j] > tol.abs_floor).collect();
    let rows = cols[0].vals.len();
    let mut m = DMatrix::zeros(rows, live.len());
    for (jj, j) in live.iter().enumerate() {
        let v = DVector::from_column_slice(&cols[*j].vals) / norms[*j];
        m.set_column(jj, &v);
    }
    let basis = numeric::nullspace(&m, tol.rel);
    if basis.is_empty() {
        return None;
    }
    let top_pos = live.iter().position(|j| *j == level).expect("top is live");
    // Minimal-norm combination of the (orthonormal) dependence basis whose
    // top coordinate is 1.
    let t: Vec<f64> = basis.iter().map(|v| v[top_pos]).collect();
    let tnorm2: f64 = t.iter().map(|x| x * x).sum();
    if tnorm2.sqrt() <= tol.rel {
        return None;
    }
    let mut combo = vec![0.0; live.len()];
    for (v, w) in basis.iter().zip(&t) {
        for (c, x) in combo.iter_mut().zip(v.iter()) {
            *c += x * w / tnorm2;
        }
    }
    // Back to unnormalized columns, then rescale so the top power carries 1.
    let mut out = vec![0.0; level + 1];
    for (jj, j) in live.iter().enumerate() {
        out[*j] = combo[jj] / norms[*j];
    }
    let top = out[level];
    for c in out.iter_mut() {
        *c /= top;
    }
    Some((out, basis.len()))
}

/// Result of the quasi-Einstein rank computation on the Ricci operator
/// spectrum.
#[derive(Debug, Clone)]
pub struct QuasiEinstein {
    /// `rank(S - alpha g)`; `Some` only when constant across the grid and the
    /// spectrum is real. Rank 0 is Einstein.
    pub rank: Option<usize>,
    /// Chosen eigenvalue per point.
    pub alpha: Vec<f64>,
    /// Full clustered spectrum per point: (eigenvalue, multiplicity).
    pub spectrum: Vec<Vec<(f64, usize)>>,
    /// True when a complex eigenvalue pair showed up anywhere.
    pub complex: bool,
}

/// Ricci operator `J^a_b = g^{ac} S_{cb}` at one point, as a matrix.
fn ricci_operator_at(ginv: &SampledTensor, s: &SampledTensor) -> DMatrix<f64> {
    let n = s.n;
    DMatrix::from_fn(n, n, |a, b| {
        (0..n).map(|c| ginv.get(&[a, c]) * s.get(&[c, b])).sum()
    })
}

/// Picks the eigenvalue maximizing multiplicity; ties prefer the smaller
/// rank, then the smaller |alpha|, then the larger signed alpha (the last
/// rule only discriminates exactly opposite eigenvalue pairs).
fn choose_alpha(clusters: &[(f64, usize)]) -> (f64, usize) {
    let mut best: Option<(f64, usize)> = None;
    for &(val, mult) in clusters {
        let better = match best {
            None => true,
            Some((bval, bmult)) => {
                mult > bmult
                    || (mult == bmult && val.abs() < bval.abs() * (1.0 - 1e-12))
                    || (mult == bmult && (val.abs() - bval.abs()).abs() <= 1e-12 * val.abs().max(1.0) && val > bval)
            }
        };
        if better {
            best = Some((val, mult));
        }
    }
    best.expect("spectrum is never empty")
}

pub fn quasi_einstein_rank(
    data: &CurvatureData,
    grid: &SampleGrid,
) -> Result<QuasiEinstein, MetricError> {
    let g = data.tensor_by_name("ginv", None).expect("inverse metric");
    let ginv = sample_over(&g, data, grid)?;
    let s = sample_over(&data.ricci, data, grid)?;
    let n = data.spec.n();
    let mut alpha = Vec::new();
    let mut spectrum = Vec::new();
    let mut ranks = Vec::new();
    let mut complex = false;
    for p in 0..grid.points.len() {
        let j = ricci_operator_at(&ginv[p], &s[p]);
        let (clusters, has_complex) = numeric::clustered_eigenvalues(&j, grid.tol.rel);
        complex |= has_complex;
        let (val, mult) = choose_alpha(&clusters);
        alpha.push(val);
        ranks.push(n - mult);
        spectrum.push(clusters);
    }
    let rank = if complex || ranks.windows(2).any(|w| w[0] != w[1]) {
        None
    } else {
        ranks.first().copied()
    };
    Ok(QuasiEinstein {
        rank,
        alpha,
        spectrum,
        complex,
    })
}

/// Null-covector decomposition of `S - alpha g` when its rank is two:
/// `S = alpha g + beta Pi (x) Pi + gamma (Pi (x) delta + delta (x) Pi)` with
/// `Pi` null.
#[derive(Debug, Clone)]
pub enum ChakiOutcome {
    /// The quasi-Einstein rank is not two (or not constant), so the
    /// decomposition is not defined.
    NotApplicable { rank: Option<usize> },
    /// Rank two, but no candidate eigenvalue leaves a plane containing null
    /// directions (the induced metric is definite).
    DecompositionFails { detail: String },
    Representable(ChakiDecomposition),
}

/// The canonical gauge fixes `beta = -1`, `gamma = 1` and makes the two null
/// components of `delta` opposite; `Pi` and `delta` are then determined up to
/// a common sign.
#[derive(Debug, Clone)]
pub struct ChakiDecomposition {
    /// Eigenvalue used by the decomposition, per point.
    pub alpha: Vec<f64>,
    /// Eigenvalue preferred by [`quasi_einstein_rank`], per point; when the
    /// two disagree the decomposition only exists for the non-preferred one,
    /// which is worth reporting.
    pub alpha_from_rank: Vec<f64>,
    pub beta: f64,
    pub gamma: f64,
    /// `g^{-1}(Pi, Pi)` per point (zero up to tolerance, by construction).
    pub pi_norm2: Vec<f64>,
    /// `g^{-1}(delta, delta)` per point in the canonical gauge.
    pub delta_norm2: Vec<f64>,
    /// Covector components per point.
    pub pi: Vec<Vec<f64>>,
    pub delta: Vec<Vec<f64>>,
}

pub fn generalized_qe_chaki(
    data: &CurvatureData,
    grid: &SampleGrid,
) -> Result<ChakiOutcome, MetricError> {
    let qe = quasi_einstein_rank(data, grid)?;
    if qe.rank != Some(2) {
        return Ok(ChakiOutcome::NotApplicable { rank: qe.rank });
    }
    let n = data.spec.n();
    let gf = data.tensor_by_name("g", None).expect("metric field");
    let ginvf = data.tensor_by_name("ginv", None).expect("inverse metric");
    let g = sample_over(&gf, data, grid)?;
    let ginv = sample_over(&ginvf, data, grid)?;
    let s = sample_over(&data.ricci, data, grid)?;
    let mut dec = ChakiDecomposition {
        alpha: Vec::new(),
        alpha_from_rank: qe.alpha.clone(),
        beta: -1.0,
        gamma: 1.0,
        pi_norm2: Vec::new(),
        delta_norm2: Vec::new(),
        pi: Vec::new(),
        delta: Vec::new(),
    };
    for p in 0..grid.points.len() {
        // Candidate eigenvalues with multiplicity n - 2, preferred one first.
        let mut candidates: Vec<f64> = Vec::new();
        if qe.spectrum[p]
            .iter()
            .any(|&(v, m)| m == n - 2 && v == qe.alpha[p])
        {
            candidates.push(qe.alpha[p]);
        }
        for &(v, m) in &qe.spectrum[p] {
            if m == n - 2 && v != qe.alpha[p] {
                candidates.push(v);
            }
        }
        let mut found = None;
        let mut last_err = String::new();
        for &alpha in &candidates {
            match decompose_at(&g[p], &ginv[p], &s[p], alpha, grid.tol) {
                Ok(d) => {
                    found = Some((alpha, d));
                    break;
                }
                Err(e) => last_err = e,
            }
        }
        match found {
            Some((alpha, d)) => {
                dec.alpha.push(alpha);
                dec.pi_norm2.push(d.pi_norm2);
                dec.delta_norm2.push(d.delta_norm2);
                dec.pi.push(d.pi);
                dec.delta.push(d.delta);
            }
            None => {
                return Ok(ChakiOutcome::DecompositionFails {
                    detail: format!(
                        "at grid point {}: {}",
                        p,
                        if last_err.is_empty() {
                            "no rank-two eigenvalue candidate".to_string()
                        } else {
                            last_err
                        }
                    ),
                });
            }
        }
    }
    Ok(ChakiOutcome::Representable(dec))
}

struct PointDecomposition {
    pi: Vec<f64>,
    delta: Vec<f64>,
    pi_norm2: f64,
    delta_norm2: f64,
}

fn inv_pair(ginv: &SampledTensor, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let n = ginv.n;
    let mut acc = 0.0;
    for a in 0..n {
        for b in 0..n {
            acc += ginv.get(&[a, b]) * u[a] * v[b];
        }
    }
    acc
}

/// Attempts the decomposition at one point for one candidate eigenvalue.
fn decompose_at(
    g: &SampledTensor,
    ginv: &SampledTensor,
    s: &SampledTensor,
    alpha: f64,
    tol: Tolerances,
) -> Result<PointDecomposition, String> {
    let n = g.n;
    let mut t = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            t[(a, b)] = s.get(&[a, b]) - alpha * g.get(&[a, b]);
        }
    }
    let tnorm = t.norm();
    if tnorm <= tol.abs_floor {
        return Err("S - alpha g vanishes; the metric is Einstein".to_string());
    }
    // Covector plane carrying T: the top-two right singular directions.
    let (_, sing, v) = numeric::jacobi_svd(&t);
    if sing.len() < 2 || sing[1] <= tol.rel * sing[0] {
        return Err("S - alpha g does not have rank two".to_string());
    }
    if sing.len() > 2 && sing[2] > tol.rel * sing[0] {
        return Err("S - alpha g has rank above two".to_string());
    }
    let u1: DVector<f64> = v.column(0).into_owned();
    let u2: DVector<f64> = v.column(1).into_owned();
    // Null directions of the inverse metric restricted to the plane.
    let h11 = inv_pair(ginv, &u1, &u1);
    let h12 = inv_pair(ginv, &u1, &u2);
    let h22 = inv_pair(ginv, &u2, &u2);
    let disc = h12 * h12 - h11 * h22;
    let hscale = h11.abs().max(h12.abs()).max(h22.abs());
    if disc <= tol.rel * hscale * hscale {
        return Err(format!(
            "the induced metric on the eigenplane of alpha = {alpha} is definite; no null covectors"
        ));
    }
    let roots: [(f64, f64); 2] = if h11.abs() >= h22.abs() {
        // h11 x^2 + 2 h12 x + h22 = 0 for (x, 1).
        let sq = disc.sqrt();
        [((-h12 + sq) / h11, 1.0), ((-h12 - sq) / h11, 1.0)]
    } else {
        let sq = disc.sqrt();
        [(1.0, (-h12 + sq) / h22), (1.0, (-h12 - sq) / h22)]
    };
    let mut rays: Vec<DVector<f64>> = roots
        .iter()
        .map(|&(x, y)| {
            let mut v = x * &u1 + y * &u2;
            let norm = v.norm();
            v /= norm;
            // Deterministic sign: first significant component positive.
            let flip = v
                .iter()
                .find(|c| c.abs() > 1e-9)
                .map(|c| *c < 0.0)
                .unwrap_or(false);
            if flip {
                v = -v;
            }
            v
        })
        .collect();
    rays.sort_by(|a, b| {
        a.iter()
            .partial_cmp(b.iter())
            .expect("finite components")
    });
    let (nb, nbp) = (rays[0].clone(), rays[1].clone());
    let gcross = inv_pair(ginv, &nb, &nbp);
    if gcross.abs() <= tol.rel * hscale {
        return Err("degenerate null directions on the eigenplane".to_string());
    }
    // T in the null basis: T = X nb(x)nb + Y (nb(x)nbp + nbp(x)nb) + Z nbp(x)nbp.
    let raise = |w: &DVector<f64>| -> DVector<f64> {
        DVector::from_fn(n, |a, _| (0..n).map(|b| ginv.get(&[a, b]) * w[b]).sum())
    };
    let (nr, npr) = (raise(&nb), raise(&nbp));
    let tform = |u: &DVector<f64>, v: &DVector<f64>| (u.transpose() * &t * v)[(0, 0)];
    let x = tform(&npr, &npr) / (gcross * gcross);
    let y = tform(&nr, &npr) / (gcross * gcross);
    let z = tform(&nr, &nr) / (gcross * gcross);
    let tscale = tnorm / (gcross * gcross);
    // Pi along whichever null ray is absent from T, with the gauge scale
    // s^2 = -(other diagonal) - 2 Y; both must cooperate.
    let attempt = |diag_absent: f64, diag_other: f64, pi_ray: &DVector<f64>, other: &DVector<f64>| {
        if diag_absent.abs() > tol.rel * tscale {
            return None;
        }
        let s2 = -diag_other - 2.0 * y;
        if s2 <= 0.0 {
            return None;
        }
        let sc = s2.sqrt();
        let q = y / sc;
        let pi = sc * pi_ray;
        let delta = -q * pi_ray + q * other;
        Some((pi, delta))
    };
    let solved = attempt(z, x, &nb, &nbp).or_else(|| attempt(x, z, &nbp, &nb));
    let (pi, delta) = solved.ok_or_else(|| {
        format!("S - alpha g is not expressible over a null covector for alpha = {alpha}")
    })?;
    // Self-check: the reconstruction must reproduce T.
    let mut rec = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            rec[(a, b)] =
                -pi[a] * pi[b] + pi[a] * delta[b] + delta[a] * pi[b];
        }
    }
    let err = (&rec - &t).norm();
    if err > tol.rel * tnorm {
        return Err(format!(
            "decomposition residual {err:e} exceeds tolerance for alpha = {alpha}"
        ));
    }
    Ok(PointDecomposition {
        pi_norm2: inv_pair(ginv, &pi, &pi),
        delta_norm2: inv_pair(ginv, &delta, &delta),
        pi: pi.iter().copied().collect(),
        delta: delta.iter().copied().collect(),
    })
}
