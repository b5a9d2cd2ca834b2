//! Reference component tables for the built-in families.
//!
//! The tables transcribe an external reference table of closed-form curvature
//! components for these metrics. Most entries are carried verbatim; a few are
//! flagged because the tabulated sign or factor is inconsistent with the rest
//! of the same table (e.g. with a proportionality the table itself is used to
//! support, or with trace-freeness of the conformal tensor). Flagged entries
//! record what was fixed and why, and sign-disputed entries keep the
//! tabulated sign so the comparison reports it rather than hiding it.
//!
//! Index tuples are 1-based; for rank-6 outputs of `A . T` and `Q(B, T)` the
//! last two positions are the endomorphism arguments.

use crate::catalog::Golden;
use crate::expr::Expr;

fn n(v: f64) -> Expr {
    Expr::num(v)
}

/// Common derived quantities of a radial profile `f`.
pub(crate) struct Profile {
    pub(crate) r: Expr,
    pub(crate) fp: Expr,
    pub(crate) fpp: Expr,
    pub(crate) fppp: Expr,
    pub(crate) e2f: Expr,
    pub(crate) em2f: Expr,
    pub(crate) e4f: Expr,
    pub(crate) em4f: Expr,
}

impl Profile {
    pub(crate) fn new(f: &Expr) -> Profile {
        let fp = f.diff("r");
        let fpp = fp.diff("r");
        let fppp = fpp.diff("r");
        Profile {
            r: Expr::sym("r"),
            fp,
            fpp,
            fppp,
            e2f: n(2.0).mul(f).exp(),
            em2f: n(-2.0).mul(f).exp(),
            e4f: n(4.0).mul(f).exp(),
            em4f: n(-4.0).mul(f).exp(),
        }
    }

    /// `r f'' - 2 r f'^2 + 2 f'`: the conformal tensor of the warped family
    /// vanishes exactly where this does.
    fn weyl_factor(&self) -> Expr {
        let p = self;
        &(&(&p.r * &p.fpp) - &(&(&n(2.0) * &p.r) * &(&p.fp * &p.fp))) + &(&n(2.0) * &p.fp)
    }
}

pub(crate) fn base_goldens(f: &Expr) -> Vec<Golden> {
    let p = Profile::new(f);
    let (fp, fpp, fppp) = (&p.fp, &p.fpp, &p.fppp);
    let e2f = &p.e2f;
    let fp2 = &(fp * fp);
    // f'^2 + f'' and f'^2 + 2 f'': the two contraction scalars of this block.
    let a = &(fp2 + fpp);
    let b = &(fp2 + &(&n(2.0) * fpp));
    let conharm = &(&-e2f * b);
    // 2 e^{2f} (f'^3 + f' f'' - f'''), the shared derivative factor.
    let dk = &(&(&n(2.0) * e2f) * &(&(&(fp * fp2) + &(fp * fpp)) - fppp));
    let rr = &(&-(&(e2f * fpp)) * &(fp2 - fpp));
    let qgr = &(&-(&p.e4f) * &(fp2 - fpp));

    vec![
        Golden::exact("R", &[1, 2, 1, 2], e2f * fpp),
        Golden::exact("R", &[1, 3, 1, 3], e2f * fp2),
        Golden::exact("R", &[2, 3, 2, 3], -(&(e2f * fpp))),
        Golden::exact("S", &[1, 1], -a),
        Golden::exact("S", &[2, 2], &n(2.0) * fpp),
        Golden::exact("S", &[3, 3], a.clone()),
        Golden::exact("kappa", &[], &(&n(2.0) * &p.em2f) * b),
        Golden::exact("K", &[1, 2, 1, 2], conharm.clone()),
        Golden::exact("K", &[1, 3, 1, 3], conharm.clone()),
        Golden::exact("K", &[2, 3, 2, 3], -conharm),
        Golden::exact("nablaK", &[1, 2, 1, 2, 2], dk.clone()),
        Golden::exact("nablaK", &[1, 3, 1, 3, 2], dk.clone()),
        Golden::exact("nablaK", &[2, 3, 2, 3, 2], -dk),
        Golden::exact("RdotR", &[1, 3, 2, 3, 1, 2], rr.clone()),
        Golden::exact("RdotR", &[1, 2, 1, 3, 2, 3], -rr),
        Golden::exact("QgR", &[1, 3, 2, 3, 1, 2], qgr.clone()),
        Golden::exact("QgR", &[1, 2, 1, 3, 2, 3], -qgr),
    ]
}

pub(crate) fn melvin_type_goldens(f: &Expr) -> Vec<Golden> {
    let p = Profile::new(f);
    let (r, fp, fpp, fppp) = (&p.r, &p.fp, &p.fpp, &p.fppp);
    let (e2f, em2f, e4f, em4f) = (&p.e2f, &p.em2f, &p.e4f, &p.em4f);
    let fp2 = &(fp * fp);
    let rfp = &(r * fp);
    let rfpp = &(r * fpp);
    let rfp2 = &(r * fp2);
    // 3 f' - 2 r f'^2 + r f''  and  f' - r f'^2 - r f''  and  f' + r f''
    let t3 = &(&(&(&n(3.0) * fp) - &(&n(2.0) * rfp2)) + rfpp);
    let tnull = &(&(fp - rfp2) - rfpp);
    let lr = &(fp + rfpp);
    let d = &p.weyl_factor();

    let mut v = Vec::new();

    // Curvature block.
    let r1212 = &(e2f * fpp);
    let r1414 = &(&(em2f * rfp) * &(&n(1.0) - rfp));
    v.push(Golden::exact("R", &[1, 2, 1, 2], r1212.clone()));
    v.push(Golden::exact("R", &[2, 3, 2, 3], -r1212));
    v.push(Golden::exact("R", &[1, 3, 1, 3], e2f * fp2));
    v.push(Golden::exact("R", &[1, 4, 1, 4], r1414.clone()));
    v.push(Golden::exact("R", &[3, 4, 3, 4], -r1414));
    v.push(Golden::exact("R", &[2, 4, 2, 4], &(em2f * r) * t3));

    // Ricci block and scalar curvature.
    let s11 = &(&-lr / r);
    v.push(Golden::exact("S", &[1, 1], s11.clone()));
    v.push(Golden::exact("S", &[3, 3], -s11));
    v.push(Golden::exact(
        "S",
        &[2, 2],
        &-(&(&(&(&n(3.0) * fp) - &(&n(2.0) * rfp2)) - rfpp)) / r,
    ));
    v.push(Golden::sign_disputed(
        "S",
        &[4, 4],
        &(em4f * r) * lr,
        "tabulated sign; the engine's fixed index conventions give the \
         opposite sign for this entry, so magnitudes are compared",
    ));
    v.push(Golden::exact(
        "kappa",
        &[],
        &(&(&n(2.0) * em2f) / r) * &(&(&(r * fpp) + &(r * fp2)) - fp),
    ));

    // Conformal tensor: the head entry is tabulated directly; the rest of the
    // tabulated proportionality chain reads with inverted factors for four of
    // the entries, so those are fixed by trace-freeness of C.
    let chain_note = "the tabulated proportionality chain reads inversely for \
                      this entry; value fixed by trace-freeness of C";
    let cc = &(&(e2f / &(&n(3.0) * r)) * d);
    let h = &(&(r * r) * em4f);
    v.push(Golden::exact("C", &[1, 2, 1, 2], cc.clone()));
    v.push(Golden::exact("C", &[2, 3, 2, 3], -cc));
    v.push(Golden::noted("C", &[1, 3, 1, 3], &-(&n(2.0)) * cc, chain_note));
    v.push(Golden::noted("C", &[1, 4, 1, 4], h * cc, chain_note));
    v.push(Golden::noted("C", &[2, 4, 2, 4], &(&n(2.0) * h) * cc, chain_note));
    v.push(Golden::noted("C", &[3, 4, 3, 4], &-h * cc, chain_note));

    // First derivative of C. The two head entries and most chain links are
    // tabulated consistently; the last two links of the first chain disagree
    // with direct differentiation (one also misprints the derivative slot)
    // and are reconstructed.
    let x_head = {
        let inner1 = &(&(&(&n(2.0) * r) * fp)
            * &(&(&(&n(2.0) * fp) - &(&n(2.0) * rfp2)) + &(&n(3.0) * rfpp)));
        let inner2 = &(&(&(&n(2.0) * fp) - &(&n(2.0) * rfpp)) - &(&(r * r) * fppp));
        &(&(&n(2.0) * e2f) / &(&n(3.0) * &(r * r))) * &(inner1 + inner2)
    };
    let y_head = &(&(&(e2f / r) * fp) * d);
    let half = &n(0.5);
    v.push(Golden::exact("nablaC", &[1, 3, 1, 3, 2], x_head.clone()));
    v.push(Golden::exact("nablaC", &[1, 2, 1, 2, 2], &-half * &x_head));
    v.push(Golden::exact("nablaC", &[2, 3, 2, 3, 2], half * &x_head));
    v.push(Golden::exact(
        "nablaC",
        &[1, 4, 1, 4, 2],
        &(&-half * h) * &x_head,
    ));
    v.push(Golden::noted(
        "nablaC",
        &[2, 4, 2, 4, 2],
        &-h * &x_head,
        "tabulated chain relation gives half this value and misprints the \
         derivative slot; reconstructed by direct differentiation",
    ));
    v.push(Golden::noted(
        "nablaC",
        &[3, 4, 3, 4, 2],
        &(half * h) * &x_head,
        "tabulated chain relation has the opposite sign and half the \
         magnitude; reconstructed by direct differentiation",
    ));
    v.push(Golden::exact("nablaC", &[1, 2, 1, 3, 3], y_head.clone()));
    v.push(Golden::exact("nablaC", &[1, 3, 2, 3, 1], y_head.clone()));
    v.push(Golden::exact("nablaC", &[1, 4, 2, 4, 1], &-h * y_head));
    v.push(Golden::exact("nablaC", &[2, 4, 3, 4, 3], h * y_head));

    // R . R block.
    let rr132312 = &(&-(&(e2f * fpp)) * &(fp2 - fpp));
    let rr142412 = &(&-(&(&(em2f * r) * fpp))
        * &(&(&(&n(4.0) * fp) - &(&n(3.0) * rfp2)) + rfpp));
    let rr133414 = &(&-(&(em2f * fp2)) * &(&(&n(1.0) - rfp) * &(&n(1.0) - &(&n(2.0) * rfp))));
    let rr122414 = &(&(&(em2f * fp) * &(&n(1.0) - rfp))
        * &(&(&(&n(3.0) * fp) - &(&n(2.0) * rfp2)) + &(&n(2.0) * rfpp)));
    let rr121424 = &(&-(&(em2f * t3)) * tnull);
    v.push(Golden::exact("RdotR", &[1, 3, 2, 3, 1, 2], rr132312.clone()));
    v.push(Golden::exact("RdotR", &[1, 2, 1, 3, 2, 3], -rr132312));
    v.push(Golden::exact("RdotR", &[1, 4, 2, 4, 1, 2], rr142412.clone()));
    v.push(Golden::exact("RdotR", &[2, 4, 3, 4, 2, 3], rr142412.clone()));
    v.push(Golden::exact("RdotR", &[1, 3, 3, 4, 1, 4], rr133414.clone()));
    v.push(Golden::exact("RdotR", &[1, 3, 1, 4, 3, 4], -rr133414));
    v.push(Golden::exact("RdotR", &[1, 2, 2, 4, 1, 4], rr122414.clone()));
    v.push(Golden::exact("RdotR", &[2, 3, 2, 4, 3, 4], rr122414.clone()));
    v.push(Golden::exact("RdotR", &[1, 2, 1, 4, 2, 4], rr121424.clone()));
    v.push(Golden::exact("RdotR", &[2, 3, 3, 4, 2, 4], rr121424.clone()));

    // Q(g, R) block.
    let qg132312 = &(&-e4f * &(fp2 - fpp));
    let qg142412 = &(&-r * &(&(&(&n(4.0) * fp) - &(&n(3.0) * rfp2)) + rfpp));
    let qg133414 = &(&-(&(r * fp)) * &(&n(1.0) - &(&n(2.0) * rfp)));
    let qg122414 = &(r * &(&(&(&n(3.0) * fp) - &(&n(2.0) * rfp2)) + &(&n(2.0) * rfpp)));
    let qg121424 = &(r * tnull);
    v.push(Golden::exact("QgR", &[1, 3, 2, 3, 1, 2], qg132312.clone()));
    v.push(Golden::exact("QgR", &[1, 2, 1, 3, 2, 3], -qg132312));
    v.push(Golden::exact("QgR", &[1, 4, 2, 4, 1, 2], qg142412.clone()));
    v.push(Golden::exact("QgR", &[2, 4, 3, 4, 2, 3], qg142412.clone()));
    v.push(Golden::exact("QgR", &[1, 3, 3, 4, 1, 4], qg133414.clone()));
    v.push(Golden::sign_disputed(
        "QgR",
        &[1, 3, 1, 4, 3, 4],
        qg133414.clone(),
        "the table equates this entry to its partner without a sign flip; \
         the engine (and the pairing used everywhere else in the same table) \
         gives the opposite sign",
    ));
    v.push(Golden::exact("QgR", &[1, 2, 2, 4, 1, 4], qg122414.clone()));
    v.push(Golden::exact("QgR", &[2, 3, 2, 4, 3, 4], qg122414.clone()));
    v.push(Golden::exact("QgR", &[1, 2, 1, 4, 2, 4], qg121424.clone()));
    v.push(Golden::exact("QgR", &[2, 3, 3, 4, 2, 4], qg121424.clone()));

    // C . C block, tabulated through a single consistent chain.
    let w = &(&(em2f / &n(3.0)) * &(d * d));
    let cchead = &(&(e4f / &(r * r)) * w);
    v.push(Golden::exact("CdotC", &[1, 3, 2, 3, 1, 2], cchead.clone()));
    v.push(Golden::exact("CdotC", &[1, 2, 1, 3, 2, 3], -cchead));
    v.push(Golden::exact("CdotC", &[1, 4, 2, 4, 1, 2], -w));
    v.push(Golden::exact("CdotC", &[2, 4, 3, 4, 2, 3], -w));
    v.push(Golden::exact("CdotC", &[1, 2, 2, 4, 1, 4], w.clone()));
    v.push(Golden::exact("CdotC", &[2, 3, 2, 4, 3, 4], w.clone()));
    v.push(Golden::exact("CdotC", &[1, 3, 3, 4, 1, 4], -w));
    v.push(Golden::exact("CdotC", &[1, 3, 1, 4, 3, 4], w.clone()));

    // Q(g, C) block. Three entries are tabulated consistently with the
    // proportionality C.C = L Q(g,C) that the same table supports; five carry
    // signs that contradict it and are kept as tabulated with the magnitude
    // compared.
    let qgc_note = "tabulated sign contradicts the proportionality between \
                    C.C and Q(g,C) supported by the same table; magnitude \
                    compared";
    let rd = &(r * d);
    let qgchead = &(&(e4f / r) * d);
    v.push(Golden::exact("QgC", &[1, 3, 2, 3, 1, 2], qgchead.clone()));
    v.push(Golden::exact("QgC", &[1, 2, 1, 3, 2, 3], -qgchead));
    v.push(Golden::exact("QgC", &[1, 4, 2, 4, 1, 2], -rd));
    v.push(Golden::sign_disputed("QgC", &[2, 4, 3, 4, 2, 3], rd.clone(), qgc_note));
    v.push(Golden::sign_disputed("QgC", &[1, 2, 2, 4, 1, 4], -rd, qgc_note));
    v.push(Golden::sign_disputed("QgC", &[2, 3, 2, 4, 3, 4], -rd, qgc_note));
    v.push(Golden::sign_disputed("QgC", &[1, 3, 3, 4, 1, 4], rd.clone(), qgc_note));
    v.push(Golden::sign_disputed("QgC", &[1, 3, 1, 4, 3, 4], -rd, qgc_note));

    // Q(S, R) block.
    let fp3 = &(fp2 * fp);
    let three_m = &(&n(3.0) - &(&n(2.0) * rfp));
    let qs_head = &(&(e2f / r)
        * &(&(fp3 * three_m) + &(fpp * &(&(fp - rfp2) + rfpp))));
    let qs142412 = &(&-(&(em2f * r))
        * &(&(fp3 * three_m)
            + &(fpp * &(&(&(&n(5.0) * fp) - &(&n(3.0) * rfp2)) + rfpp))));
    let qs133414 = &(&(em2f * fp) * lr);
    let qs122414 = &(&(&(em2f * fp) * three_m) * lr);
    let qs121424 = &(&-(&(em2f * t3)) * tnull);
    let qs_restore = "an inner term is tabulated as r f' where consistency \
                      of the table requires r f'^2; restored";
    let qs_sign = "tabulated sign; the engine's fixed conventions give the \
                   opposite sign for this entry, so magnitudes are compared";
    v.push(Golden::noted("QSR", &[1, 3, 2, 3, 1, 2], qs_head.clone(), qs_restore));
    v.push(Golden::noted("QSR", &[1, 2, 1, 3, 2, 3], -qs_head, qs_restore));
    v.push(Golden::exact("QSR", &[1, 4, 2, 4, 1, 2], qs142412.clone()));
    v.push(Golden::exact("QSR", &[2, 4, 3, 4, 2, 3], qs142412.clone()));
    v.push(Golden::sign_disputed("QSR", &[1, 3, 3, 4, 1, 4], qs133414.clone(), qs_sign));
    v.push(Golden::sign_disputed("QSR", &[1, 3, 1, 4, 3, 4], -qs133414, qs_sign));
    v.push(Golden::exact("QSR", &[1, 2, 2, 4, 1, 4], qs122414.clone()));
    v.push(Golden::exact("QSR", &[2, 3, 2, 4, 3, 4], qs122414.clone()));
    v.push(Golden::exact("QSR", &[1, 2, 1, 4, 2, 4], qs121424.clone()));
    v.push(Golden::exact("QSR", &[2, 3, 3, 4, 2, 4], qs121424.clone()));

    v
}

pub(crate) fn melvin_goldens() -> Vec<Golden> {
    let f: Expr = "ln(1 + B0^2*r^2/4)".parse().unwrap();
    let mut v = melvin_type_goldens(&f);

    let parse = |s: &str| -> Expr { s.parse().unwrap() };
    let rf = parse("16*B0^3*r*(4 - B0^2*r^2)/(4 + B0^2*r^2)^4");
    let qf = parse("B0*r/2");
    let rf_note = "tabulated closed form omits the exponent on its \
                   denominator; restored to match the proportionality with \
                   Q(g,F) the table is used to establish";
    v.push(Golden::noted("RF", &[1, 4, 1, 2], rf.neg(), rf_note));
    v.push(Golden::noted("RF", &[1, 2, 1, 4], rf.clone(), rf_note));
    v.push(Golden::noted("RF", &[3, 4, 2, 3], rf.neg(), rf_note));
    v.push(Golden::noted("RF", &[2, 3, 3, 4], rf.clone(), rf_note));
    v.push(Golden::exact("QgF", &[1, 2, 1, 4], qf.clone()));
    v.push(Golden::exact("QgF", &[1, 4, 1, 2], qf.neg()));
    v.push(Golden::exact("QgF", &[2, 3, 3, 4], qf.clone()));
    v.push(Golden::exact("QgF", &[3, 4, 2, 3], qf.neg()));
    v
}

#[cfg(test)]
mod tests {
    use crate::catalog::{golden_check, melvin, melvin_type, base_3metric, GoldenFlag, GoldenOutcome};
    use crate::curvature::compute;
    use crate::expr::Expr;
    use crate::metric::Tolerances;

    /// Every reference value must agree with the engine on the default grid:
    /// exact rows outright, sign-disputed rows in magnitude with the flip
    /// confirmed.
    #[test]
    fn reference_tables_agree_with_the_engine() {
        let profiles: [Expr; 2] = ["ln(1 + r)".parse().unwrap(), "ln(1 + r^2)".parse().unwrap()];
        let entries = vec![
            melvin(1.0),
            melvin_type(&profiles[0]),
            melvin_type(&profiles[1]),
            base_3metric(&profiles[0]),
        ];
        for entry in entries {
            let name = format!("{} [{}]", entry.name(), entry.metric.params.len());
            let grid = entry.default_grid(Tolerances::default()).unwrap();
            let data = compute(entry.metric.clone()).unwrap();
            let results = golden_check(&entry, &data, &grid);
            assert!(!results.is_empty(), "{name}: no reference rows");
            for res in results {
                match res.golden.flag {
                    GoldenFlag::Exact => assert_eq!(
                        res.outcome,
                        GoldenOutcome::Matched,
                        "{name}: {} {:?} ({:?})",
                        res.golden.tensor,
                        res.golden.idx,
                        res.golden.note,
                    ),
                    GoldenFlag::SignDisputed => assert_eq!(
                        res.outcome,
                        GoldenOutcome::MatchedWithSignFlip,
                        "{name}: {} {:?} should flip sign",
                        res.golden.tensor,
                        res.golden.idx,
                    ),
                }
            }
        }
    }
}
