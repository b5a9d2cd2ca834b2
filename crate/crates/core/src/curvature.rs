//! The curvature pipeline: Christoffel symbols, the Riemann and Ricci
//! tensors, scalar curvature, Ricci powers, and the standard modified
//! curvature tensors, all as closed-form expressions.
//!
//! Conventions, fixed once:
//!
//! * `Gamma^a_bc = 1/2 g^{ad} (d_b g_dc + d_c g_bd - d_d g_bc)`
//! * `R_abcd = g_{ae} (d_c Gamma^e_bd - d_d Gamma^e_bc
//!   + Gamma^f_bd Gamma^e_fc - Gamma^f_bc Gamma^e_fd)`
//! * `S_bc = g^{ad} R_abcd`, `kappa = g^{bc} S_bc`
//! * Ricci powers are operator powers: `S^j_ab = S_ac (g^{cd} S_db)^(j-1)`
//! * Covariant derivatives append the derivative index *last*:
//!   `T_{a1..ak,e}`.

use crate::expr::Expr;
use crate::metric::{MetricError, MetricSpec};
use crate::ops::{curvature_action, kulkarni_nomizu, q_operator};
use crate::tensor::TensorField;

/// Christoffel symbols of the second kind; `get(a, b, c)` is `Gamma^a_bc`.
#[derive(Debug, Clone)]
pub struct Connection {
    pub n: usize,
    comps: Vec<Expr>,
}

impl Connection {
    fn zeros(n: usize) -> Connection {
        Connection {
            n,
            comps: vec![Expr::zero(); n * n * n],
        }
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> &Expr {
        &self.comps[(a * self.n + b) * self.n + c]
    }

    fn set(&mut self, a: usize, b: usize, c: usize, e: Expr) {
        self.comps[(a * self.n + b) * self.n + c] = e;
    }

    /// The symbols as a rank-3 field with the contravariant index first.
    pub fn as_field(&self) -> TensorField {
        TensorField::from_fn(self.n, 3, |idx| self.get(idx[0], idx[1], idx[2]).clone())
    }
}

/// Everything the classifier consumes, computed once per metric.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub spec: MetricSpec,
    pub g: TensorField,
    pub ginv: Vec<Vec<Expr>>,
    pub conn: Connection,
    /// `R_abcd`.
    pub riemann: TensorField,
    /// `S_ab`.
    pub ricci: TensorField,
    /// `S^2, S^3, S^4` as (0,2) fields.
    pub ricci_powers: [TensorField; 3],
    /// The Ricci operator `J^a_b = g^{ac} S_cb`.
    pub ricci_op: Vec<Vec<Expr>>,
    pub kappa: Expr,
    /// `G = 1/2 g ^ g`.
    pub gaussian: TensorField,
    /// Weyl conformal tensor `C`.
    pub conformal: TensorField,
    /// Projective tensor `P`.
    pub projective: TensorField,
    /// Concircular tensor `W`.
    pub concircular: TensorField,
    /// Conharmonic tensor `K`.
    pub conharmonic: TensorField,
}

pub fn compute(spec: MetricSpec) -> Result<CurvatureData, MetricError> {
    spec.validate()?;
    let n = spec.n();
    let ginv = spec.inverse()?;
    let coords = spec.chart.coords.clone();

    let g = TensorField::from_fn(n, 2, |idx| spec.g[idx[0]][idx[1]].clone());

    // d_e g_ab
    let dg: Vec<Vec<Vec<Expr>>> = (0..n)
        .map(|e| {
            (0..n)
                .map(|a| (0..n).map(|b| spec.g[a][b].diff(&coords[e])).collect())
                .collect()
        })
        .collect();

    let mut conn = Connection::zeros(n);
    let half = Expr::num(0.5);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut acc = Expr::zero();
                for d in 0..n {
                    if ginv[a][d].is_zero() {
                        continue;
                    }
                    let sum = dg[b][d][c].add(&dg[c][b][d]).sub(&dg[d][b][c]);
                    acc = acc.add(&ginv[a][d].mul(&sum));
                }
                conn.set(a, b, c, half.mul(&acc));
            }
        }
    }

    // d_e Gamma^a_bc
    let dconn: Vec<Vec<Vec<Vec<Expr>>>> = (0..n)
        .map(|e| {
            (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| (0..n).map(|c| conn.get(a, b, c).diff(&coords[e])).collect())
                        .collect()
                })
                .collect()
        })
        .collect();

    // R^a_bcd, then lowered.
    let mut upper = vec![Expr::zero(); n * n * n * n];
    let at = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut acc = dconn[c][a][b][d].sub(&dconn[d][a][b][c]);
                    for f in 0..n {
                        acc = acc
                            .add(&conn.get(f, b, d).mul(conn.get(a, f, c)))
                            .sub(&conn.get(f, b, c).mul(conn.get(a, f, d)));
                    }
                    upper[at(a, b, c, d)] = acc;
                }
            }
        }
    }
    let riemann = TensorField::from_fn(n, 4, |idx| {
        let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
        let mut acc = Expr::zero();
        for e in 0..n {
            if spec.g[a][e].is_zero() {
                continue;
            }
            acc = acc.add(&spec.g[a][e].mul(&upper[at(e, b, c, d)]));
        }
        acc
    });

    // S_bc = R^d_bcd (the g^{ad} R_abcd contraction, already traced).
    let ricci = TensorField::from_fn(n, 2, |idx| {
        let (b, c) = (idx[0], idx[1]);
        let mut acc = Expr::zero();
        for d in 0..n {
            acc = acc.add(&upper[at(d, b, c, d)]);
        }
        acc
    });

    // Ricci operator and operator powers of the Ricci tensor.
    let ricci_op: Vec<Vec<Expr>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let mut acc = Expr::zero();
                    for c in 0..n {
                        if ginv[a][c].is_zero() {
                            continue;
                        }
                        acc = acc.add(&ginv[a][c].mul(ricci.get(&[c, b])));
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let raise_once = |t: &TensorField| {
        TensorField::from_fn(n, 2, |idx| {
            let (a, b) = (idx[0], idx[1]);
            let mut acc = Expr::zero();
            for c in 0..n {
                acc = acc.add(&t.get(&[a, c]).mul(&ricci_op[c][b]));
            }
            acc
        })
    };
    let s2 = raise_once(&ricci);
    let s3 = raise_once(&s2);
    let s4 = raise_once(&s3);

    let mut kappa = Expr::zero();
    for a in 0..n {
        kappa = kappa.add(&ricci_op[a][a]);
    }

    let gaussian = kulkarni_nomizu(&g, &g).scale(&half);
    let gs = kulkarni_nomizu(&g, &ricci);
    let nm1 = (n - 1) as f64;
    let nm2 = (n - 2) as f64;
    let conharmonic = riemann.sub(&gs.scale(&Expr::num(1.0 / nm2)));
    let conformal = conharmonic.add(&gaussian.scale(&kappa.mul(&Expr::num(1.0 / (nm1 * nm2)))));
    let concircular = riemann.sub(&gaussian.scale(&kappa.mul(&Expr::num(1.0 / (n as f64 * nm1)))));
    let projective = TensorField::from_fn(n, 4, |idx| {
        let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
        let trace = g
            .get(&[a, d])
            .mul(ricci.get(&[b, c]))
            .sub(&g.get(&[b, d]).mul(ricci.get(&[a, c])));
        riemann.get(&idx[..]).sub(&Expr::num(1.0 / nm1).mul(&trace))
    });

    Ok(CurvatureData {
        spec,
        g,
        ginv,
        conn,
        riemann,
        ricci,
        ricci_powers: [s2, s3, s4],
        ricci_op,
        kappa,
        gaussian,
        conformal,
        projective,
        concircular,
        conharmonic,
    })
}

impl CurvatureData {
    pub fn n(&self) -> usize {
        self.spec.n()
    }

    /// The inverse metric as a (symbolic) rank-2 field.
    pub fn ginv_field(&self) -> TensorField {
        let n = self.n();
        TensorField::from_fn(n, 2, |idx| self.ginv[idx[0]][idx[1]].clone())
    }

    /// Covariant derivative of a (0,k) field; the derivative index is
    /// appended as the last slot of the result.
    pub fn covariant_derivative(&self, t: &TensorField) -> TensorField {
        let n = self.n();
        let k = t.rank;
        let coords = &self.spec.chart.coords;
        TensorField::from_fn(n, k + 1, |idx| {
            let (slots, last) = idx.split_at(k);
            let e = last[0];
            let mut acc = t.get(slots).diff(&coords[e]);
            let mut hit = slots.to_vec();
            for i in 0..k {
                for s in 0..n {
                    let gamma = self.conn.get(s, e, slots[i]);
                    if gamma.is_zero() {
                        continue;
                    }
                    hit[i] = s;
                    acc = acc.sub(&gamma.mul(t.get(&hit)));
                }
                hit[i] = slots[i];
            }
            acc
        })
    }

    /// Resolves an engine tensor by its public name. Derived (0,6) fields and
    /// derivatives are built on demand; `maxwell` supplies the companion
    /// field for the `F`-based names.
    pub fn tensor_by_name(&self, name: &str, maxwell: Option<&TensorField>) -> Option<TensorField> {
        let scalar = |e: &Expr| {
            let mut t = TensorField::zeros(self.n(), 0);
            t.set(&[], e.clone());
            t
        };
        Some(match name {
            "g" => self.g.clone(),
            "ginv" => self.ginv_field(),
            "Gamma" => self.conn.as_field(),
            "R" => self.riemann.clone(),
            "S" => self.ricci.clone(),
            "S2" => self.ricci_powers[0].clone(),
            "S3" => self.ricci_powers[1].clone(),
            "S4" => self.ricci_powers[2].clone(),
            "kappa" => scalar(&self.kappa),
            "C" => self.conformal.clone(),
            "P" => self.projective.clone(),
            "W" => self.concircular.clone(),
            "K" => self.conharmonic.clone(),
            "G" => self.gaussian.clone(),
            "nablaR" => self.covariant_derivative(&self.riemann),
            "nablaS" => self.covariant_derivative(&self.ricci),
            "nablaC" => self.covariant_derivative(&self.conformal),
            "nablaK" => self.covariant_derivative(&self.conharmonic),
            "RdotR" => curvature_action(&self.ginv, &self.riemann, &self.riemann),
            "RdotC" => curvature_action(&self.ginv, &self.riemann, &self.conformal),
            "CdotR" => curvature_action(&self.ginv, &self.conformal, &self.riemann),
            "CdotC" => curvature_action(&self.ginv, &self.conformal, &self.conformal),
            "RdotS" => curvature_action(&self.ginv, &self.riemann, &self.ricci),
            "QgR" => q_operator(&self.g, &self.riemann),
            "QgC" => q_operator(&self.g, &self.conformal),
            "QgS" => q_operator(&self.g, &self.ricci),
            "QSR" => q_operator(&self.ricci, &self.riemann),
            "QSC" => q_operator(&self.ricci, &self.conformal),
            "F" => maxwell?.clone(),
            "RF" => curvature_action(&self.ginv, &self.riemann, maxwell?),
            "QgF" => q_operator(&self.g, maxwell?),
            _ => return None,
        })
    }
}

/// Names accepted by [`CurvatureData::tensor_by_name`], in display order.
pub const TENSOR_NAMES: &[&str] = &[
    "g", "ginv", "Gamma", "R", "S", "S2", "S3", "S4", "kappa", "C", "P", "W", "K", "G", "nablaR",
    "nablaS", "nablaC", "nablaK", "RdotR", "RdotC", "CdotR", "CdotC", "RdotS", "QgR", "QgC", "QgS",
    "QSR", "QSC", "F", "RF", "QgF",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::expr::Scope;
    use crate::tensor::indices;
    use nalgebra::DMatrix;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    fn melvin_data() -> CurvatureData {
        compute(catalog::melvin(1.0).metric).unwrap()
    }

    fn melvin_scope(data: &CurvatureData, r: f64) -> Scope {
        data.spec.scope_at(&[0.0, r, 0.0, 0.0])
    }

    #[test]
    fn magnetic_universe_christoffel_pins() {
        let data = melvin_data();
        let scope = melvin_scope(&data, 1.0);
        let pins = [
            ((0, 0, 1), 0.4),
            ((1, 0, 0), 0.4),
            ((1, 1, 1), 0.4),
            ((1, 2, 2), -0.4),
            ((2, 1, 2), 0.4),
            ((1, 3, 3), -0.24576),
            ((3, 1, 3), 0.6),
        ];
        for ((a, b, c), want) in pins {
            let got = data.conn.get(a, b, c).eval(&scope).unwrap();
            assert!(close(got, want, 1e-12), "Gamma^{a}_{b}{c}: {got} vs {want}");
        }
        // lower-index symmetry
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let x = data.conn.get(a, b, c).eval(&scope).unwrap();
                    let y = data.conn.get(a, c, b).eval(&scope).unwrap();
                    assert!((x - y).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn magnetic_universe_curvature_pins() {
        let data = melvin_data();
        let scope = melvin_scope(&data, 1.0);
        let r_pins = [
            ([0, 1, 0, 1], 0.375),
            ([0, 2, 0, 2], 0.25),
            ([1, 2, 1, 2], -0.375),
            ([0, 3, 0, 3], 0.1536),
            ([2, 3, 2, 3], -0.1536),
            ([1, 3, 1, 3], 0.7168),
        ];
        for (idx, want) in r_pins {
            let got = data.riemann.get(&idx).eval(&scope).unwrap();
            assert!(close(got, want, 1e-12), "R{idx:?}: {got} vs {want}");
        }
        let s_pins = [-0.64, -0.64, 0.64, -0.262144];
        for (i, want) in s_pins.into_iter().enumerate() {
            let got = data.ricci.get(&[i, i]).eval(&scope).unwrap();
            assert!(close(got, want, 1e-12), "S[{i}]: {got} vs {want}");
            for j in 0..4 {
                if j != i {
                    assert!(data.ricci.get(&[i, j]).eval(&scope).unwrap().abs() < 1e-12);
                }
            }
        }
        assert!(data.kappa.eval(&scope).unwrap().abs() < 1e-12);
        let c_pins = [
            ([0, 1, 0, 1], 0.375),
            ([0, 2, 0, 2], -0.75),
            ([1, 2, 1, 2], -0.375),
            ([0, 3, 0, 3], 0.1536),
            ([1, 3, 1, 3], 0.3072),
            ([2, 3, 2, 3], -0.1536),
        ];
        for (idx, want) in c_pins {
            let got = data.conformal.get(&idx).eval(&scope).unwrap();
            assert!(close(got, want, 1e-12), "C{idx:?}: {got} vs {want}");
        }
        // kappa = 0 makes C = K and R = W for this metric.
        for idx in indices(4, 4) {
            let c = data.conformal.get(&idx).eval(&scope).unwrap();
            let k = data.conharmonic.get(&idx).eval(&scope).unwrap();
            let r = data.riemann.get(&idx).eval(&scope).unwrap();
            let w = data.concircular.get(&idx).eval(&scope).unwrap();
            assert!((c - k).abs() < 1e-12 && (r - w).abs() < 1e-12);
        }
        // S^2 = -lambda g with lambda = -65536/390625 at B0=1.
        let lambda = -65536.0 / 390625.0;
        for idx in indices(4, 2) {
            let s2 = data.ricci_powers[0].get(&idx).eval(&scope).unwrap();
            let gv = data.g.get(&idx).eval(&scope).unwrap();
            assert!(close(s2, -lambda * gv, 1e-12), "S2{idx:?}");
        }
    }

    #[test]
    fn base_block_curvature_pins() {
        let f: Expr = "ln(1 + r)".parse().unwrap();
        let data = compute(catalog::base_3metric(&f).metric).unwrap();
        let scope = data.spec.scope_at(&[0.0, 1.0, 0.0]);
        let pins = [
            ([0, 1, 0, 1], -1.0),
            ([0, 2, 0, 2], 1.0),
            ([1, 2, 1, 2], 1.0),
        ];
        for (idx, want) in pins {
            let got = data.riemann.get(&idx).eval(&scope).unwrap();
            assert!(close(got, want, 1e-12), "R{idx:?}: {got} vs {want}");
        }
        for (i, want) in [0.0, -0.5, 0.0].into_iter().enumerate() {
            let got = data.ricci.get(&[i, i]).eval(&scope).unwrap();
            assert!(close(got, want, 1e-12), "S[{i}]: {got} vs {want}");
        }
        assert!(close(data.kappa.eval(&scope).unwrap(), -0.125, 1e-12));
        for (idx, want) in [([0, 1, 0, 1], 1.0), ([0, 2, 0, 2], 1.0), ([1, 2, 1, 2], -1.0)] {
            let got = data.conharmonic.get(&idx).eval(&scope).unwrap();
            assert!(close(got, want, 1e-12), "K{idx:?}: {got} vs {want}");
        }
        let nabla_k = data.covariant_derivative(&data.conharmonic);
        let got = nabla_k.get(&[0, 1, 0, 1, 1]).eval(&scope).unwrap();
        assert!(close(got, -2.0, 1e-12), "K_1212,2: {got}");
        // The conformal tensor of any 3-metric vanishes.
        assert!(data.conformal.sample(&scope).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn connection_is_metric() {
        let data = melvin_data();
        let nabla_g = data.covariant_derivative(&data.g);
        for r in [0.7, 1.0, 2.6] {
            let scope = melvin_scope(&data, r);
            assert!(nabla_g.sample(&scope).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn riemann_symmetries_and_first_bianchi() {
        let f: Expr = "ln(1 + r)".parse().unwrap();
        for data in [melvin_data(), compute(catalog::base_3metric(&f).metric).unwrap()] {
            let n = data.n();
            let mut point = vec![0.0; n];
            point[1] = 1.3;
            let scope = data.spec.scope_at(&point);
            let riem = data.riemann.sample(&scope).unwrap();
            let scale = riem.max_abs();
            for idx in indices(n, 4) {
                let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
                let v = riem.get(&idx);
                assert!((v + riem.get(&[b, a, c, d])).abs() <= 1e-10 * scale);
                assert!((v + riem.get(&[a, b, d, c])).abs() <= 1e-10 * scale);
                assert!((v - riem.get(&[c, d, a, b])).abs() <= 1e-10 * scale);
                let cyc = v + riem.get(&[a, c, d, b]) + riem.get(&[a, d, b, c]);
                assert!(cyc.abs() <= 1e-10 * scale);
            }
            // Weyl trace-freeness, contracted on the first and last slots.
            let ginv = data.ginv_field().sample(&scope).unwrap();
            let weyl = data.conformal.sample(&scope).unwrap();
            for b in 0..n {
                for c in 0..n {
                    let mut acc = 0.0;
                    for a in 0..n {
                        for d in 0..n {
                            acc += ginv.get(&[a, d]) * weyl.get(&[a, b, c, d]);
                        }
                    }
                    assert!(acc.abs() <= 1e-10 * scale.max(1.0), "trace C[{b}{c}] = {acc}");
                }
            }
        }
    }

    /// Central-difference Christoffel symbols from numeric metric evaluations
    /// only.
    fn fd_gamma(spec: &MetricSpec, point: &[f64], h: f64) -> Vec<f64> {
        let n = spec.n();
        let eval_g = |p: &[f64]| -> Vec<f64> {
            let scope = spec.scope_at(p);
            let mut out = vec![0.0; n * n];
            for a in 0..n {
                for b in 0..n {
                    out[a * n + b] = spec.g[a][b].eval(&scope).unwrap();
                }
            }
            out
        };
        let mut dg = vec![0.0; n * n * n]; // [e][a][b]
        for e in 0..n {
            let mut plus = point.to_vec();
            plus[e] += h;
            let mut minus = point.to_vec();
            minus[e] -= h;
            let (gp, gm) = (eval_g(&plus), eval_g(&minus));
            for ab in 0..n * n {
                dg[e * n * n + ab] = (gp[ab] - gm[ab]) / (2.0 * h);
            }
        }
        let g0 = eval_g(point);
        let ginv = DMatrix::from_row_slice(n, n, &g0)
            .try_inverse()
            .expect("metric invertible at test point");
        let mut gamma = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut acc = 0.0;
                    for d in 0..n {
                        acc += ginv[(a, d)]
                            * (dg[b * n * n + d * n + c] + dg[c * n * n + b * n + d]
                                - dg[d * n * n + b * n + c]);
                    }
                    gamma[(a * n + b) * n + c] = 0.5 * acc;
                }
            }
        }
        gamma
    }

    #[test]
    fn finite_differences_confirm_the_symbolic_pipeline() {
        let h = 1e-5;
        let f: Expr = "ln(1 + r)".parse().unwrap();
        for (data, point) in [
            (melvin_data(), vec![0.0, 1.0, 0.0, 0.0]),
            (
                compute(catalog::base_3metric(&f).metric).unwrap(),
                vec![0.0, 1.0, 0.0],
            ),
        ] {
            let n = data.n();
            let scope = data.spec.scope_at(&point);
            let fd = fd_gamma(&data.spec, &point, h);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let sym = data.conn.get(a, b, c).eval(&scope).unwrap();
                        let num = fd[(a * n + b) * n + c];
                        assert!(
                            (sym - num).abs() <= 1e-5 * (1.0 + sym.abs()),
                            "Gamma^{a}_{b}{c}: {sym} vs {num}"
                        );
                    }
                }
            }
            // Riemann from finite differences of the finite-difference
            // Christoffels, lowered with the numeric metric.
            let eval_at = |p: &[f64], expr: &Expr| expr.eval(&data.spec.scope_at(p)).unwrap();
            let mut upper_fd = vec![0.0; n * n * n * n];
            for c in 0..n {
                let mut plus = point.clone();
                plus[c] += h;
                let mut minus = point.clone();
                minus[c] -= h;
                let (gp, gm) = (
                    fd_gamma(&data.spec, &plus, h),
                    fd_gamma(&data.spec, &minus, h),
                );
                for a in 0..n {
                    for b in 0..n {
                        for d in 0..n {
                            // contributes d_c Gamma^a_bd to R^a_bcd and
                            // -d_c Gamma^a_bd' pattern via the two loops
                            let idx = (a * n + b) * n + d;
                            upper_fd[((a * n + b) * n + c) * n + d] +=
                                (gp[idx] - gm[idx]) / (2.0 * h);
                            upper_fd[((a * n + b) * n + d) * n + c] -=
                                (gp[idx] - gm[idx]) / (2.0 * h);
                        }
                    }
                }
            }
            let gamma0 = fd_gamma(&data.spec, &point, h);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let mut acc = 0.0;
                            for f_ in 0..n {
                                acc += gamma0[(f_ * n + b) * n + d] * gamma0[(a * n + f_) * n + c]
                                    - gamma0[(f_ * n + b) * n + c] * gamma0[(a * n + f_) * n + d];
                            }
                            upper_fd[((a * n + b) * n + c) * n + d] += acc;
                        }
                    }
                }
            }
            for idx in indices(n, 4) {
                let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
                let mut fd_low = 0.0;
                for e in 0..n {
                    fd_low +=
                        eval_at(&point, data.g.get(&[a, e])) * upper_fd[((e * n + b) * n + c) * n + d];
                }
                let sym = data.riemann.get(&idx[..]).eval(&scope).unwrap();
                assert!(
                    (sym - fd_low).abs() <= 1e-5 * (1.0 + sym.abs()),
                    "R{idx:?}: {sym} vs {fd_low}"
                );
            }
        }
    }

    #[test]
    fn tensor_names_all_resolve() {
        let entry = catalog::melvin(1.0);
        let data = compute(entry.metric).unwrap();
        for name in TENSOR_NAMES {
            let t = data.tensor_by_name(name, entry.maxwell.as_ref());
            assert!(t.is_some(), "{name} did not resolve");
        }
        assert!(data.tensor_by_name("nonsense", None).is_none());
        // F-family names need the companion field.
        assert!(data.tensor_by_name("RF", None).is_none());
    }
}
