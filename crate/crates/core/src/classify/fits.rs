//! Least-squares fit primitives with three-valued verdicts, and the three
//! fit-driven condition suites (pseudosymmetry, mixed conditions, curvature
//! decompositions).

use super::{sampled_action, sampled_kn, sampled_q, SampledBasis};
use crate::curvature::CurvatureData;
use crate::metric::{MetricError, SampleGrid, Tolerances};
use crate::numeric;
use crate::tensor::SampledTensor;
use nalgebra::{DMatrix, DVector};
use std::fmt;

/// Three-valued outcome of a pointwise condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Vacuous,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Vacuous => "vacuous",
        }
    }

    /// A condition holds on the grid when no point fails and at least one
    /// point carries content; it is vacuous only if every point is.
    pub fn combine(points: &[Verdict]) -> Verdict {
        if points.iter().any(|v| *v == Verdict::Fails) {
            Verdict::Fails
        } else if points.iter().all(|v| *v == Verdict::Vacuous) {
            Verdict::Vacuous
        } else {
            Verdict::Holds
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of a single-coefficient fit `L = c R` over the grid.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub verdict: Verdict,
    pub point_verdicts: Vec<Verdict>,
    /// Fitted coefficient per point (zero at vacuous points).
    pub coeff: Vec<f64>,
    /// Relative residual per point.
    pub residual: Vec<f64>,
    /// Grid index with the largest residual.
    pub worst_point: usize,
    /// For a failing fit: (grid index, component tuple) of the worst deviation.
    pub witness: Option<(usize, Vec<usize>)>,
}

/// Outcome of a multi-coefficient fit `L = sum_j c_j B_j` over the grid.
#[derive(Debug, Clone)]
pub struct MultiFitResult {
    pub verdict: Verdict,
    pub point_verdicts: Vec<Verdict>,
    /// Fitted coefficient vector per point (minimal-norm when degenerate).
    pub coeffs: Vec<Vec<f64>>,
    pub residual: Vec<f64>,
    /// Dimension of the basis dependence space per point; a positive entry
    /// means the fitted coefficients are one representative of a family.
    pub nullspace_dim: Vec<usize>,
    pub worst_point: usize,
    pub witness: Option<(usize, Vec<usize>)>,
}

fn unlin(mut at: usize, n: usize, rank: usize) -> Vec<usize> {
    let mut idx = vec![0; rank];
    for slot in (0..rank).rev() {
        idx[slot] = at % n;
        at /= n;
    }
    idx
}

fn worst_index(residual: &[f64]) -> usize {
    let mut at = 0;
    for (i, r) in residual.iter().enumerate() {
        if *r > residual[at] {
            at = i;
        }
    }
    at
}

/// Fits `lhs = c * rhs` pointwise. Per point: `c` is the Frobenius projection
/// `<L, R> / <R, R>`; the point holds when `|L - c R| <= rel * max(|L|, |R|)`,
/// is vacuous when both norms sit below the absolute floor, and fails when
/// `rhs` vanishes but `lhs` does not or the residual is out of tolerance.
pub fn fit_proportionality(
    lhs: &[SampledTensor],
    rhs: &[SampledTensor],
    tol: Tolerances,
) -> FitResult {
    assert_eq!(lhs.len(), rhs.len());
    let mut point_verdicts = Vec::new();
    let mut coeff = Vec::new();
    let mut residual = Vec::new();
    let mut witnesses: Vec<Option<Vec<usize>>> = Vec::new();
    for (l, r) in lhs.iter().zip(rhs) {
        let (ln, rn) = (l.norm(), r.norm());
        if rn <= tol.abs_floor {
            if ln <= tol.abs_floor {
                point_verdicts.push(Verdict::Vacuous);
                coeff.push(0.0);
                residual.push(0.0);
                witnesses.push(None);
            } else {
                point_verdicts.push(Verdict::Fails);
                coeff.push(0.0);
                residual.push(1.0);
                let at = worst_component(l, r, 0.0);
                witnesses.push(Some(unlin(at, l.n, l.rank)));
            }
            continue;
        }
        let c = l.dot(r) / r.dot(r);
        let mut diff2 = 0.0;
        for (a, b) in l.vals.iter().zip(&r.vals) {
            let d = a - c * b;
            diff2 += d * d;
        }
        let rel = diff2.sqrt() / ln.max(rn);
        let ok = rel <= tol.rel;
        point_verdicts.push(if ok { Verdict::Holds } else { Verdict::Fails });
        coeff.push(c);
        residual.push(rel);
        witnesses.push(if ok {
            None
        } else {
            Some(unlin(worst_component(l, r, c), l.n, l.rank))
        });
    }
    let verdict = Verdict::combine(&point_verdicts);
    let worst_point = worst_index(&residual);
    let witness = if verdict == Verdict::Fails {
        let mut at = None;
        for i in 0..witnesses.len() {
            if point_verdicts[i] == Verdict::Fails
                && (at.is_none() || residual[i] >= residual[at.unwrap()])
            {
                at = Some(i);
            }
        }
        at.map(|i| (i, witnesses[i].clone().unwrap()))
    } else {
        None
    };
    FitResult {
        verdict,
        point_verdicts,
        coeff,
        residual,
        worst_point,
        witness,
    }
}

/// Linear offset of the largest entry of `|L - c R|`.
fn worst_component(l: &SampledTensor, r: &SampledTensor, c: f64) -> usize {
    let mut at = 0;
    let mut best = -1.0;
    for (i, (a, b)) in l.vals.iter().zip(&r.vals).enumerate() {
        let d = (a - c * b).abs();
        if d > best {
            best = d;
            at = i;
        }
    }
    at
}

fn flatten_full(t: &SampledTensor) -> DVector<f64> {
    DVector::from_column_slice(&t.vals)
}

/// Flattens a (0,4) tensor with Riemann symmetries onto its independent
/// components: antisymmetric index pairs `a < b`, `c < d`, ordered pairs
/// `(ab) <= (cd)`. For n = 4 this is 21 rows.
fn flatten_riemann_sym(t: &SampledTensor) -> DVector<f64> {
    assert_eq!(t.rank, 4);
    let n = t.n;
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            pairs.push((a, b));
        }
    }
    let mut rows = Vec::new();
    for (i, &(a, b)) in pairs.iter().enumerate() {
        for &(c, d) in &pairs[i..] {
            rows.push(t.get(&[a, b, c, d]));
        }
    }
    DVector::from_vec(rows)
}

fn multi_fit_rows(
    lhs: &[SampledTensor],
    basis: &[&[SampledTensor]],
    tol: Tolerances,
    flatten: fn(&SampledTensor) -> DVector<f64>,
) -> MultiFitResult {
    let npts = lhs.len();
    let k = basis.len();
    let mut point_verdicts = Vec::new();
    let mut coeffs = Vec::new();
    let mut residual = Vec::new();
    let mut nullspace_dim = Vec::new();
    let mut witnesses: Vec<Option<Vec<usize>>> = Vec::new();
    for p in 0..npts {
        let b = flatten(&lhs[p]);
        let cols: Vec<DVector<f64>> = basis.iter().map(|f| flatten(&f[p])).collect();
        let col_norms: Vec<f64> = cols.iter().map(|c| c.norm()).collect();
        let bn = b.norm();
        if bn <= tol.abs_floor {
            // Nothing to decompose: the zero coefficients fit trivially.
            point_verdicts.push(Verdict::Vacuous);
            coeffs.push(vec![0.0; k]);
            residual.push(0.0);
            nullspace_dim.push(
                (0..k).filter(|j| col_norms[*j] <= tol.abs_floor).count(),
            );
            witnesses.push(None);
            continue;
        }
        let mut a = DMatrix::zeros(b.len(), k);
        for (j, col) in cols.iter().enumerate() {
            a.set_column(j, col);
        }
        let c = numeric::lstsq(&a, &b);
        let resid = (&b - &a * &c).norm();
        let mut scale = bn;
        for j in 0..k {
            scale = scale.max(c[j].abs() * col_norms[j]);
        }
        let rel = resid / scale.max(tol.abs_floor);
        let ok = rel <= tol.rel;
        point_verdicts.push(if ok { Verdict::Holds } else { Verdict::Fails });
        coeffs.push(c.iter().copied().collect());
        residual.push(rel);
        // Dependencies among the basis columns: zero columns count, the rest
        // are compared at unit scale.
        let live: Vec<usize> = (0..k).filter(|j| col_norms[*j] > tol.abs_floor).collect();
        let mut dim = k - live.len();
        if !live.is_empty() {
            let mut normalized = DMatrix::zeros(b.len(), live.len());
            for (jj, j) in live.iter().enumerate() {
                normalized.set_column(jj, &(&cols[*j] / col_norms[*j]));
            }
            dim += numeric::nullspace(&normalized, tol.rel).len();
        }
        nullspace_dim.push(dim);
        witnesses.push(if ok {
            None
        } else {
            let fitted = &a * &c;
            let mut at = 0;
            let mut best = -1.0;
            for i in 0..b.len() {
                let d = (b[i] - fitted[i]).abs();
                if d > best {
                    best = d;
                    at = i;
                }
            }
            // The witness is only meaningful for the full flattening; for the
            // symmetric flattening report the row number itself.
            Some(if b.len() == lhs[p].vals.len() {
                unlin(at, lhs[p].n, lhs[p].rank)
            } else {
                vec![at]
            })
        });
    }
    let verdict = Verdict::combine(&point_verdicts);
    let worst_point = worst_index(&residual);
    let witness = if verdict == Verdict::Fails {
        let mut at = None;
        for (i, w) in witnesses.iter().enumerate() {
            if point_verdicts[i] == Verdict::Fails
                && w.is_some()
                && (at.is_none() || residual[i] >= residual[at.unwrap()])
            {
                at = Some(i);
            }
        }
        at.map(|i| (i, witnesses[i].clone().unwrap()))
    } else {
        None
    };
    MultiFitResult {
        verdict,
        point_verdicts,
        coeffs,
        residual,
        nullspace_dim,
        worst_point,
        witness,
    }
}

/// Fits `lhs = sum_j c_j basis_j` pointwise by least squares over all
/// components; degenerate bases yield the minimal-norm solution and a
/// positive dependence dimension.
pub fn multi_fit(
    lhs: &[SampledTensor],
    basis: &[&[SampledTensor]],
    tol: Tolerances,
) -> MultiFitResult {
    multi_fit_rows(lhs, basis, tol, flatten_full)
}

/// One row of the pseudosymmetry suite: the derivation `A . T` fitted against
/// the Tachibana term `Q(g, T)`, plus the raw semisymmetry verdict `A . T = 0`.
#[derive(Debug, Clone)]
pub struct SuiteEntry {
    pub acting: &'static str,
    pub target: &'static str,
    pub fit: FitResult,
    pub semisymmetric: Verdict,
    pub semi_residual: f64,
}

impl SuiteEntry {
    pub fn label(&self) -> String {
        format!("{}.{}", self.acting, self.target)
    }
}

pub const SUITE_ACTING: [&str; 4] = ["R", "C", "W", "K"];
pub const SUITE_TARGETS: [&str; 5] = ["R", "S", "C", "W", "K"];

/// Runs every `A . T = L Q(g, T)` fit for `A` in {R, C, W, K} and `T` in
/// {R, S, C, W, K}.
pub fn pseudosymmetry_suite(
    data: &CurvatureData,
    grid: &SampleGrid,
) -> Result<Vec<SuiteEntry>, MetricError> {
    let basis = SampledBasis::new(data, grid)?;
    let mut out = Vec::new();
    for acting in SUITE_ACTING {
        for target in SUITE_TARGETS {
            out.push(suite_entry(&basis, acting, target, grid.tol));
        }
    }
    Ok(out)
}

fn suite_entry(
    basis: &SampledBasis,
    acting: &'static str,
    target: &'static str,
    tol: Tolerances,
) -> SuiteEntry {
    let a = basis.by_name(acting).unwrap();
    let t = basis.by_name(target).unwrap();
    let npts = a.len();
    let mut acts = Vec::with_capacity(npts);
    let mut qs = Vec::with_capacity(npts);
    let mut semi_points = Vec::new();
    let mut semi_residual = 0.0f64;
    for p in 0..npts {
        let act = sampled_action(&basis.ginv[p], &a[p], &t[p]);
        let q = sampled_q(&basis.g[p], &t[p]);
        let scale = a[p].norm() * t[p].norm() * basis.ginv[p].norm();
        if scale <= tol.abs_floor {
            semi_points.push(Verdict::Vacuous);
        } else {
            let rel = act.norm() / scale;
            semi_residual = semi_residual.max(rel);
            semi_points.push(if rel <= tol.rel {
                Verdict::Holds
            } else {
                Verdict::Fails
            });
        }
        acts.push(act);
        qs.push(q);
    }
    SuiteEntry {
        acting,
        target,
        fit: fit_proportionality(&acts, &qs, tol),
        semisymmetric: Verdict::combine(&semi_points),
        semi_residual,
    }
}

/// The mixed curvature conditions that tie the derivations together.
#[derive(Debug, Clone)]
pub struct MixedConditions {
    /// `R . R - Q(S, R) = L Q(g, C)`.
    pub sps: FitResult,
    /// `Q(S, C) = c (C . R - R . C)`, expected coefficient 1.
    pub commutator_identity: FitResult,
    /// `C . R - R . C = L3 Q(g, R) + L4 Q(S, R)`.
    pub commutator_two_term: MultiFitResult,
}

pub fn mixed_condition_suite(
    data: &CurvatureData,
    grid: &SampleGrid,
) -> Result<MixedConditions, MetricError> {
    let basis = SampledBasis::new(data, grid)?;
    let npts = grid.points.len();
    let mut sps_lhs = Vec::new();
    let mut qgc = Vec::new();
    let mut qsc = Vec::new();
    let mut comm = Vec::new();
    let mut qgr = Vec::new();
    let mut qsr = Vec::new();
    for p in 0..npts {
        let (g, ginv) = (&basis.g[p], &basis.ginv[p]);
        let (r, s, c) = (&basis.riemann[p], &basis.s[p], &basis.conformal[p]);
        let rr = sampled_action(ginv, r, r);
        let qs_r = sampled_q(s, r);
        sps_lhs.push(diff(&rr, &qs_r));
        qgc.push(sampled_q(g, c));
        qsc.push(sampled_q(s, c));
        let cr = sampled_action(ginv, c, r);
        let rc = sampled_action(ginv, r, c);
        comm.push(diff(&cr, &rc));
        qgr.push(sampled_q(g, r));
        qsr.push(qs_r);
    }
    Ok(MixedConditions {
        sps: fit_proportionality(&sps_lhs, &qgc, grid.tol),
        commutator_identity: fit_proportionality(&qsc, &comm, grid.tol),
        commutator_two_term: multi_fit(&comm, &[&qgr, &qsr], grid.tol),
    })
}

fn diff(a: &SampledTensor, b: &SampledTensor) -> SampledTensor {
    let mut out = a.clone();
    for (v, w) in out.vals.iter_mut().zip(&b.vals) {
        *v -= w;
    }
    out
}

/// Coefficient order of [`roter_fit`] without the generalized flag:
/// `R = N1 S^S + N2 g^S + N3 g^g` (`^` the Kulkarni-Nomizu product).
pub const ROTER_BASIS: [&str; 3] = ["S^S", "g^S", "g^g"];
/// Coefficient order with the generalized flag:
/// `R = e1 S^S + e2 S^S2 + e3 S2^S2 + e4 g^g + e5 g^S + e6 g^S2`.
pub const GENERALIZED_ROTER_BASIS: [&str; 6] = ["S^S", "S^S2", "S2^S2", "g^g", "g^S", "g^S2"];

/// Decomposes the Riemann tensor over Kulkarni-Nomizu products of `g`, `S`
/// (and `S2` when `generalized`), solving over the independent components
/// with Riemann symmetries.
pub fn roter_fit(
    data: &CurvatureData,
    grid: &SampleGrid,
    generalized: bool,
) -> Result<MultiFitResult, MetricError> {
    let basis = SampledBasis::new(data, grid)?;
    let npts = grid.points.len();
    let mut lhs = Vec::new();
    let mut ss = Vec::new();
    let mut gs = Vec::new();
    let mut gg = Vec::new();
    let mut ss2 = Vec::new();
    let mut s2s2 = Vec::new();
    let mut gs2 = Vec::new();
    for p in 0..npts {
        let (g, s, s2) = (&basis.g[p], &basis.s[p], &basis.s2[p]);
        lhs.push(basis.riemann[p].clone());
        ss.push(sampled_kn(s, s));
        gs.push(sampled_kn(g, s));
        gg.push(sampled_kn(g, g));
        if generalized {
            ss2.push(sampled_kn(s, s2));
            s2s2.push(sampled_kn(s2, s2));
            gs2.push(sampled_kn(g, s2));
        }
    }
    let cols: Vec<&[SampledTensor]> = if generalized {
        vec![&ss, &ss2, &s2s2, &gg, &gs, &gs2]
    } else {
        vec![&ss, &gs, &gg]
    };
    Ok(multi_fit_rows(&lhs, &cols, grid.tol, flatten_riemann_sym))
}
