//! Covector-valued detectors: recurrency of curvature 2-forms, exchange
//! recurrency of 1-forms, differential identities of the Ricci tensor,
//! Riemann-compatibility, weak symmetry, and the dimension of the
//! annihilating covector space.

use super::fits::Verdict;
use super::sample_over;
use crate::curvature::CurvatureData;
use crate::metric::{MetricError, SampleGrid, Tolerances};
use crate::numeric;
use crate::tensor::{SampledTensor, TensorField};
use nalgebra::{DMatrix, DVector};

/// Outcome of a fit whose unknowns are one or more covectors per point.
#[derive(Debug, Clone)]
pub struct CovectorFit {
    pub verdict: Verdict,
    pub point_verdicts: Vec<Verdict>,
    /// Fitted components per point (length n, or 5n for the general weak
    /// symmetry fit); minimal-norm when the system is underdetermined.
    pub components: Vec<Vec<f64>>,
    pub residual: Vec<f64>,
    /// Solution-space dimension of the coefficient matrix per point.
    pub kernel_dim: Vec<usize>,
    pub worst_point: usize,
}

fn assemble(
    systems: Vec<Option<(DMatrix<f64>, DVector<f64>, f64)>>,
    tol: Tolerances,
) -> CovectorFit {
    let mut point_verdicts = Vec::new();
    let mut components = Vec::new();
    let mut residual = Vec::new();
    let mut kernel_dim = Vec::new();
    for sys in systems {
        match sys {
            None => {
                point_verdicts.push(Verdict::Vacuous);
                components.push(Vec::new());
                residual.push(0.0);
                kernel_dim.push(0);
            }
            Some((a, b, scale_hint)) => {
                if b.norm() <= tol.abs_floor * scale_hint.max(1.0) {
                    // The left side vanishes at working precision, so the
                    // zero covector solves the system outright.
                    point_verdicts.push(Verdict::Holds);
                    components.push(vec![0.0; a.ncols()]);
                    residual.push(0.0);
                    kernel_dim.push(numeric::nullspace(&a, tol.rel).len());
                    continue;
                }
                let x = numeric::lstsq(&a, &b);
                let resid = (&b - &a * &x).norm();
                let scale = b.norm().max(a.norm() * x.norm()).max(tol.abs_floor);
                let rel = resid / scale;
                point_verdicts.push(if rel <= tol.rel {
                    Verdict::Holds
                } else {
                    Verdict::Fails
                });
                components.push(x.iter().copied().collect());
                residual.push(rel);
                kernel_dim.push(numeric::nullspace(&a, tol.rel).len());
            }
        }
    }
    let mut worst = 0;
    for (i, r) in residual.iter().enumerate() {
        if *r > residual[worst] {
            worst = i;
        }
    }
    CovectorFit {
        verdict: Verdict::combine(&point_verdicts),
        point_verdicts,
        components,
        residual,
        kernel_dim,
        worst_point: worst,
    }
}

/// Row order shared by the cyclic systems: strictly increasing triples
/// `(a, b, c)` times strictly increasing pairs `(x, y)`.
fn cyclic_rows(n: usize) -> Vec<([usize; 3], [usize; 2])> {
    let mut rows = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                for x in 0..n {
                    for y in (x + 1)..n {
                        rows.push(([a, b, c], [x, y]));
                    }
                }
            }
        }
    }
    rows
}

/// Coefficient matrix of `sum_cyc theta(Z1) H(Z2, Z3, X, Y)` over the rows of
/// [`cyclic_rows`], one column per covector component.
fn cyclic_matrix(h: &SampledTensor) -> DMatrix<f64> {
    let n = h.n;
    let rows = cyclic_rows(n);
    let mut m = DMatrix::zeros(rows.len(), n);
    for (i, ([a, b, c], [x, y])) in rows.iter().copied().enumerate() {
        m[(i, a)] += h.get(&[b, c, x, y]);
        m[(i, b)] += h.get(&[c, a, x, y]);
        m[(i, c)] += h.get(&[a, b, x, y]);
    }
    m
}

/// Recurrency of the curvature 2-forms of `H`: fits a covector `Pi` with
/// `sum_cyc (nabla_Z1 H)(Z2, Z3, X, Y) = sum_cyc Pi(Z1) H(Z2, Z3, X, Y)`.
pub fn two_form_recurrency(
    data: &CurvatureData,
    grid: &SampleGrid,
    h: &TensorField,
) -> Result<CovectorFit, MetricError> {
    let dh = data.covariant_derivative(h);
    let hs = sample_over(h, data, grid)?;
    let dhs = sample_over(&dh, data, grid)?;
    let tol = grid.tol;
    let systems = hs
        .iter()
        .zip(&dhs)
        .map(|(h, dh)| {
            if h.norm() <= tol.abs_floor {
                return None;
            }
            let rows = cyclic_rows(h.n);
            let mut b = DVector::zeros(rows.len());
            for (i, ([a, bb, c], [x, y])) in rows.iter().copied().enumerate() {
                b[i] = dh.get(&[bb, c, x, y, a])
                    + dh.get(&[c, a, x, y, bb])
                    + dh.get(&[a, bb, x, y, c]);
            }
            Some((cyclic_matrix(h), b, h.norm()))
        })
        .collect();
    Ok(assemble(systems, tol))
}

/// Exchange recurrency of the Ricci 1-forms: fits `Pi` with
/// `(nabla_Z1 S)(Z2, X) - (nabla_Z2 S)(Z1, X) = Pi(Z1) S(Z2, X) - Pi(Z2) S(Z1, X)`.
pub fn ricci_1form_recurrency(
    data: &CurvatureData,
    grid: &SampleGrid,
) -> Result<CovectorFit, MetricError> {
    let ds = data.covariant_derivative(&data.ricci);
    let ss = sample_over(&data.ricci, data, grid)?;
    let dss = sample_over(&ds, data, grid)?;
    let tol = grid.tol;
    let systems = ss
        .iter()
        .zip(&dss)
        .map(|(s, ds)| {
            if s.norm() <= tol.abs_floor {
                return None;
            }
            let n = s.n;
            let mut rows = Vec::new();
            for z1 in 0..n {
                for z2 in (z1 + 1)..n {
                    for x in 0..n {
                        rows.push((z1, z2, x));
                    }
                }
            }
            let mut m = DMatrix::zeros(rows.len(), n);
            let mut b = DVector::zeros(rows.len());
            for (i, (z1, z2, x)) in rows.iter().copied().enumerate() {
                b[i] = ds.get(&[z2, x, z1]) - ds.get(&[z1, x, z2]);
                m[(i, z1)] += s.get(&[z2, x]);
                m[(i, z2)] -= s.get(&[z1, x]);
            }
            Some((m, b, s.norm()))
        })
        .collect();
    Ok(assemble(systems, tol))
}

/// One differential identity of `nabla S`, with the largest relative
/// residual over the grid.
#[derive(Debug, Clone)]
pub struct DifferentialCheck {
    pub verdict: Verdict,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct RicciDifferential {
    /// `sum_cyc (nabla_Z1 S)(Z2, Z3) = 0`.
    pub cyclic_parallel: DifferentialCheck,
    /// `(nabla_Z1 S)(Z2, X) = (nabla_Z2 S)(Z1, X)`.
    pub codazzi: DifferentialCheck,
}

pub fn ricci_differential_checks(
    data: &CurvatureData,
    grid: &SampleGrid,
) -> Result<RicciDifferential, MetricError> {
    let ds = data.covariant_derivative(&data.ricci);
    let ss = sample_over(&data.ricci, data, grid)?;
    let dss = sample_over(&ds, data, grid)?;
    let tol = grid.tol;
    let mut cyc_res = 0.0f64;
    let mut cod_res = 0.0f64;
    for (ds, s) in dss.iter().zip(&ss) {
        let n = ds.n;
        // A derivative at roundoff level relative to S means both identities
        // hold outright at this point.
        let scale = ds.norm();
        if scale <= tol.abs_floor * s.norm().max(1.0) {
            continue;
        }
        let mut cyc = 0.0;
        let mut cod = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let v = ds.get(&[a, b, c]) + ds.get(&[b, c, a]) + ds.get(&[c, a, b]);
                    cyc += v * v;
                    let w = ds.get(&[a, b, c]) - ds.get(&[a, c, b]);
                    cod += w * w;
                }
            }
        }
        cyc_res = cyc_res.max(cyc.sqrt() / scale);
        cod_res = cod_res.max(cod.sqrt() / scale);
    }
    let verdict = |r: f64| {
        if r <= tol.rel {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    };
    Ok(RicciDifferential {
        cyclic_parallel: DifferentialCheck {
            verdict: verdict(cyc_res),
            residual: cyc_res,
        },
        codazzi: DifferentialCheck {
            verdict: verdict(cod_res),
            residual: cod_res,
        },
    })
}

/// Compatibility of a symmetric (0,2) tensor `E` with a curvature-like `H`:
/// `sum_cyc H(EZ1, X, Z2, Z3) = 0`, `E` acting through the metric.
#[derive(Debug, Clone)]
pub struct Compatibility {
    pub verdict: Verdict,
    pub residual: f64,
}

pub fn compatibility_check(
    data: &CurvatureData,
    grid: &SampleGrid,
    h: &TensorField,
    e: &TensorField,
) -> Result<Compatibility, MetricError> {
    let ginvf = data.tensor_by_name("ginv", None).expect("inverse metric");
    let hs = sample_over(h, data, grid)?;
    let es = sample_over(e, data, grid)?;
    let ginvs = sample_over(&ginvf, data, grid)?;
    let tol = grid.tol;
    let mut residual = 0.0f64;
    let mut points = Vec::new();
    for ((h, e), ginv) in hs.iter().zip(&es).zip(&ginvs) {
        let n = h.n;
        if h.norm() <= tol.abs_floor || e.norm() <= tol.abs_floor {
            points.push(Verdict::Vacuous);
            continue;
        }
        // Raised endomorphism EZ: up[s][a] = g^{sm} E_{ma}.
        let mut up = vec![vec![0.0; n]; n];
        for s in 0..n {
            for a in 0..n {
                for m in 0..n {
                    up[s][a] += ginv.get(&[s, m]) * e.get(&[m, a]);
                }
            }
        }
        // All ordered triples: the cyclic sum collapses to the strict ones
        // only when `H` is antisymmetric in its last index pair, which the
        // projective tensor is not.
        let mut sum2 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for x in 0..n {
                        let mut v = 0.0;
                        for s in 0..n {
                            v += up[s][a] * h.get(&[s, x, b, c])
                                + up[s][b] * h.get(&[s, x, c, a])
                                + up[s][c] * h.get(&[s, x, a, b]);
                        }
                        sum2 += v * v;
                    }
                }
            }
        }
        let scale = h.norm() * e.norm() * ginv.norm();
        let rel = sum2.sqrt() / scale.max(tol.abs_floor);
        residual = residual.max(rel);
        points.push(if rel <= tol.rel {
            Verdict::Holds
        } else {
            Verdict::Fails
        });
    }
    Ok(Compatibility {
        verdict: Verdict::combine(&points),
        residual,
    })
}

/// Weak symmetry of `H`: the five-covector fit
/// `(nabla_alpha H)_{abcd} = Pi_alpha H_{abcd} + Phi_a H_{alpha bcd}
///  + PhiBar_b H_{a alpha cd} + Psi_c H_{ab alpha d} + PsiBar_d H_{abc alpha}`
/// together with its Chaki (`Pi/2 = Phi = PhiBar = Psi = PsiBar`) and
/// recurrent (`Phi = PhiBar = Psi = PsiBar = 0`) specializations.
#[derive(Debug, Clone)]
pub struct WeakSymmetry {
    /// Unknowns stacked `[Pi, Phi, PhiBar, Psi, PsiBar]`, 5n per point.
    pub general: CovectorFit,
    pub chaki: CovectorFit,
    pub recurrent: CovectorFit,
}

pub fn weak_symmetry_fit(
    data: &CurvatureData,
    grid: &SampleGrid,
    h: &TensorField,
) -> Result<WeakSymmetry, MetricError> {
    let dh = data.covariant_derivative(h);
    let hs = sample_over(h, data, grid)?;
    let dhs = sample_over(&dh, data, grid)?;
    let tol = grid.tol;
    let mut general = Vec::new();
    let mut chaki = Vec::new();
    let mut recurrent = Vec::new();
    for (h, dh) in hs.iter().zip(&dhs) {
        if h.norm() <= tol.abs_floor {
            general.push(None);
            chaki.push(None);
            recurrent.push(None);
            continue;
        }
        let n = h.n;
        let rows = n.pow(5);
        let mut mg = DMatrix::zeros(rows, 5 * n);
        let mut mc = DMatrix::zeros(rows, n);
        let mut mr = DMatrix::zeros(rows, n);
        let mut b = DVector::zeros(rows);
        let mut i = 0;
        for idx in crate::tensor::indices(n, 5) {
            let (al, a, bb, c, d) = (idx[0], idx[1], idx[2], idx[3], idx[4]);
            b[i] = dh.get(&[a, bb, c, d, al]);
            let terms = [
                h.get(&[a, bb, c, d]),
                h.get(&[al, bb, c, d]),
                h.get(&[a, al, c, d]),
                h.get(&[a, bb, al, d]),
                h.get(&[a, bb, c, al]),
            ];
            for (slot, (&who, &t)) in [al, a, bb, c, d].iter().zip(&terms).enumerate() {
                mg[(i, slot * n + who)] += t;
                // Chaki: Pi = 2E, every other covector = E.
                let weight = if slot == 0 { 2.0 } else { 1.0 };
                mc[(i, who)] += weight * t;
            }
            mr[(i, al)] += terms[0];
            i += 1;
        }
        let hint = h.norm();
        general.push(Some((mg, b.clone(), hint)));
        chaki.push(Some((mc, b.clone(), hint)));
        recurrent.push(Some((mr, b, hint)));
    }
    Ok(WeakSymmetry {
        general: assemble(general, tol),
        chaki: assemble(chaki, tol),
        recurrent: assemble(recurrent, tol),
    })
}

/// Dimension of the space of covectors `theta` with
/// `sum_cyc theta(Z1) H(Z2, Z3, X, Y) = 0`, per grid point. `n` for `H = 0`.
pub fn venzi_dimension(
    data: &CurvatureData,
    grid: &SampleGrid,
    h: &TensorField,
) -> Result<Vec<usize>, MetricError> {
    let hs = sample_over(h, data, grid)?;
    Ok(hs
        .iter()
        .map(|h| numeric::nullspace(&cyclic_matrix(h), grid.tol.rel).len())
        .collect())
}
