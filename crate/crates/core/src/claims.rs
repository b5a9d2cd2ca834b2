//! Claim-by-claim verification of the built-in families against their
//! reference tables and closed-form coefficient functions.
//!
//! Every structural statement the reference material makes about these
//! metrics is rechecked here from scratch: the detector runs again and the
//! fitted functions are compared pointwise against the tabulated closed
//! forms. A claim whose tabulated value is internally inconsistent (a sign or
//! factor at odds with the rest of the same table) is verified against the
//! corrected reading and reported `DISPUTED` rather than silently patched or
//! failed. The `verify` subcommand and the acceptance suite both run on this
//! registry.
//!
//! The detectors always run at the engine's standard working tolerance;
//! a user-supplied tolerance only widens the value-comparison gates (and
//! never below their defaults). Loosening the tolerance therefore never
//! flips a passing claim.

use crate::catalog::{self, CatalogEntry, GoldenOutcome};
use crate::classify::fits::{self, Verdict};
use crate::classify::recur;
use crate::classify::spectral::{self, ChakiOutcome};
use crate::classify::{
    eval_over, sample_over, sampled_action, sampled_kn, sampled_q, SampledBasis,
};
use crate::curvature::{compute, CurvatureData};
use crate::expr::Expr;
use crate::golden::Profile;
use crate::metric::{MetricError, SampleGrid, Tolerances};
use crate::tensor::SampledTensor;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimStatus {
    Pass,
    /// The engine result is sound but the tabulated reference value is not;
    /// the discrepancy is documented in the claim detail.
    Disputed,
    Fail,
}

impl ClaimStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ClaimStatus::Pass => "PASS",
            ClaimStatus::Disputed => "DISPUTED",
            ClaimStatus::Fail => "FAIL",
        }
    }
}

impl fmt::Display for ClaimStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct ClaimReport {
    pub id: &'static str,
    pub status: ClaimStatus,
    pub detail: String,
}

/// Comparison thresholds. Each claim carries its own stated tolerance; when
/// the caller loosens the working tolerance beyond the default the thresholds
/// widen in proportion, so loosening never flips a passing claim.
#[derive(Clone, Copy)]
struct Gate {
    rel10: f64,
    rel8: f64,
    rel6: f64,
    floor: f64,
}

impl Gate {
    fn new(tol: Tolerances) -> Gate {
        let widen = (tol.rel / 1e-8).max(1.0);
        Gate {
            rel10: 1e-10 * widen,
            rel8: 1e-8 * widen,
            rel6: 1e-6 * widen,
            floor: tol.abs_floor,
        }
    }
}

fn pe(src: &str) -> Expr {
    src.parse()
        .unwrap_or_else(|e| panic!("bad claims closed form {src:?}: {e}"))
}

/// Relative deviation against the larger magnitude; two values below the
/// floor count as equal.
fn rel_dev(got: f64, want: f64, floor: f64) -> f64 {
    let scale = got.abs().max(want.abs());
    if scale <= floor {
        0.0
    } else {
        (got - want).abs() / scale
    }
}

fn max_rel_dev(got: &[f64], want: &[f64], floor: f64) -> f64 {
    got.iter()
        .zip(want)
        .map(|(g, w)| rel_dev(*g, *w, floor))
        .fold(0.0, f64::max)
}

/// Largest pointwise `|a - b| / max(|a|, |b|)` over two sampled fields.
fn max_tensor_gap(a: &[SampledTensor], b: &[SampledTensor], floor: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let mut d2 = 0.0;
            for (u, v) in x.vals.iter().zip(&y.vals) {
                d2 += (u - v) * (u - v);
            }
            d2.sqrt() / x.norm().max(y.norm()).max(floor)
        })
        .fold(0.0, f64::max)
}

struct Claims {
    out: Vec<ClaimReport>,
}

impl Claims {
    fn new() -> Claims {
        Claims { out: Vec::new() }
    }

    fn check(&mut self, id: &'static str, ok: bool, detail: String) {
        self.out.push(ClaimReport {
            id,
            status: if ok { ClaimStatus::Pass } else { ClaimStatus::Fail },
            detail,
        });
    }

    /// For claims whose reference value carries a documented defect: passing
    /// the corrected reading reports `DISPUTED`, anything else fails.
    fn documented(&mut self, id: &'static str, ok: bool, detail: String) {
        self.out.push(ClaimReport {
            id,
            status: if ok {
                ClaimStatus::Disputed
            } else {
                ClaimStatus::Fail
            },
            detail,
        });
    }
}

/// A catalog entry with its curvature data and default grid, computed once
/// and shared across the claims that concern it.
pub struct PreparedFamily {
    pub entry: CatalogEntry,
    pub data: CurvatureData,
    pub grid: SampleGrid,
}

pub fn prepare(entry: CatalogEntry, tol: Tolerances) -> Result<PreparedFamily, MetricError> {
    let data = compute(entry.metric.clone())?;
    let grid = entry.default_grid(tol)?;
    Ok(PreparedFamily { entry, data, grid })
}

/// Compares every reference component table of the given runs against the
/// engine. Sign-disputed rows that match in magnitude with the documented
/// flip make the claim `DISPUTED`; any other disagreement fails it.
pub fn golden_claim(id: &'static str, runs: &[&PreparedFamily]) -> ClaimReport {
    let mut matched = 0usize;
    let mut flips: Vec<String> = Vec::new();
    let mut bad: Vec<String> = Vec::new();
    for fam in runs {
        for res in catalog::golden_check(&fam.entry, &fam.data, &fam.grid) {
            let label = format!(
                "{}[{}]",
                res.golden.tensor,
                res.golden
                    .idx
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            );
            match res.outcome {
                GoldenOutcome::Matched => matched += 1,
                GoldenOutcome::MatchedWithSignFlip => flips.push(label),
                GoldenOutcome::Mismatched {
                    point,
                    reference,
                    engine,
                } => bad.push(format!(
                    "{label} at {point:?}: reference {reference:.9e}, engine {engine:.9e}"
                )),
            }
        }
    }
    let (status, detail) = if !bad.is_empty() {
        (
            ClaimStatus::Fail,
            format!("{} mismatched: {}", bad.len(), bad.join("; ")),
        )
    } else if !flips.is_empty() {
        (
            ClaimStatus::Disputed,
            format!(
                "{matched} components matched; {} matched in magnitude with the documented \
                 sign flip: {}",
                flips.len(),
                flips.join(", ")
            ),
        )
    } else {
        (
            ClaimStatus::Pass,
            format!("{matched} components matched at every grid point"),
        )
    };
    ClaimReport { id, status, detail }
}

/// Runs the whole claim registry. `tol` widens the comparison gates; the
/// detectors themselves run at the standard working tolerance.
pub fn verify_reference_claims(tol: Tolerances) -> Result<Vec<ClaimReport>, MetricError> {
    let det = Tolerances::default();
    let gate = Gate::new(tol);
    let melvin = prepare(catalog::melvin(1.0), det)?;
    let base = prepare(catalog::base_3metric(&pe("ln(1 + r)")), det)?;
    let generic = prepare(catalog::melvin_type(&pe("ln(1 + r)")), det)?;
    let quadratic = prepare(catalog::melvin_type(&pe("ln(1 + r^2)")), det)?;

    let mut cl = Claims::new();
    cl.out.push(golden_claim("melvin.reference_tables", &[&melvin]));
    cl.out.push(golden_claim(
        "melvin_type.reference_tables",
        &[&generic, &quadratic],
    ));
    cl.out.push(golden_claim("base.reference_tables", &[&base]));
    melvin_claims(&melvin, gate, &mut cl)?;
    base_claims(&base, gate, &mut cl)?;
    melvin_type_claims(&generic, &quadratic, gate, &mut cl)?;
    degenerate_claims(&melvin, &mut cl)?;
    Ok(cl.out)
}

fn melvin_claims(
    fam: &PreparedFamily,
    gate: Gate,
    cl: &mut Claims,
) -> Result<(), MetricError> {
    let (data, grid) = (&fam.data, &fam.grid);
    let basis = SampledBasis::new(data, grid)?;
    let npts = grid.points.len();

    // Scalar curvature vanishes, so the conharmonic correction to C and the
    // concircular correction to R both drop out.
    let kappa = eval_over(&data.kappa, data, grid)?;
    let kdev = kappa
        .iter()
        .zip(&basis.s)
        .map(|(k, s)| k.abs() / s.norm().max(gate.floor))
        .fold(0.0, f64::max);
    cl.check(
        "melvin.scalar_curvature_vanishes",
        kdev <= gate.rel10,
        format!("max |kappa|/|S| = {kdev:.2e} over {npts} points"),
    );
    let ck = max_tensor_gap(&basis.conformal, &basis.conharmonic, gate.floor);
    cl.check(
        "melvin.conformal_equals_conharmonic",
        ck <= gate.rel10,
        format!("max |C - K|/|C| = {ck:.2e}"),
    );
    let rw = max_tensor_gap(&basis.riemann, &basis.concircular, gate.floor);
    cl.check(
        "melvin.curvature_equals_concircular",
        rw <= gate.rel10,
        format!("max |R - W|/|R| = {rw:.2e}"),
    );

    // Pseudosymmetry, with the conformal tensor acting by the same factor.
    let l1 = eval_over(&pe("32*B0^2*(4 - B0^2*r^2)/(4 + B0^2*r^2)^4"), data, grid)?;
    let qgr: Vec<SampledTensor> = (0..npts)
        .map(|p| sampled_q(&basis.g[p], &basis.riemann[p]))
        .collect();
    let rr: Vec<SampledTensor> = (0..npts)
        .map(|p| sampled_action(&basis.ginv[p], &basis.riemann[p], &basis.riemann[p]))
        .collect();
    let fit_rr = fits::fit_proportionality(&rr, &qgr, grid.tol);
    let dev_rr = max_rel_dev(&fit_rr.coeff, &l1, gate.floor);
    cl.check(
        "melvin.pseudosymmetric",
        fit_rr.verdict == Verdict::Holds && dev_rr <= gate.rel8,
        format!(
            "R.R = L1 Q(g,R) {}; max coefficient deviation from \
             32 B0^2 (4 - B0^2 r^2)/(4 + B0^2 r^2)^4 is {dev_rr:.2e}",
            fit_rr.verdict
        ),
    );
    let cr: Vec<SampledTensor> = (0..npts)
        .map(|p| sampled_action(&basis.ginv[p], &basis.conformal[p], &basis.riemann[p]))
        .collect();
    let fit_cr = fits::fit_proportionality(&cr, &qgr, grid.tol);
    let dev_cr = max_rel_dev(&fit_cr.coeff, &l1, gate.floor);
    cl.check(
        "melvin.pseudosymmetric_due_to_weyl",
        fit_cr.verdict == Verdict::Holds && dev_cr <= gate.rel8,
        format!(
            "C.R = L1 Q(g,R) {}; max coefficient deviation from the same L1 is {dev_cr:.2e}",
            fit_cr.verdict
        ),
    );

    // The three mixed conditions.
    let mixed = fits::mixed_condition_suite(data, grid)?;
    let l2 = eval_over(
        &pe("-32*B0^2*(16 + 24*B0^2*r^2 - 3*B0^4*r^4)/(3*(4 - B0^2*r^2)*(4 + B0^2*r^2)^4)"),
        data,
        grid,
    )?;
    let dev_l2 = max_rel_dev(&mixed.sps.coeff, &l2, gate.floor);
    cl.check(
        "melvin.scalar_pseudosymmetric_type",
        mixed.sps.verdict == Verdict::Holds && dev_l2 <= gate.rel8,
        format!(
            "R.R - Q(S,R) = L2 Q(g,C) {}; max coefficient deviation from the closed form \
             is {dev_l2:.2e}",
            mixed.sps.verdict
        ),
    );
    let ones = vec![1.0; npts];
    let dev_comm = max_rel_dev(&mixed.commutator_identity.coeff, &ones, gate.floor);
    cl.check(
        "melvin.commutator_identity",
        mixed.commutator_identity.verdict == Verdict::Holds && dev_comm <= gate.rel8,
        format!(
            "Q(S,C) = C.R - R.C {}; max coefficient deviation from 1 is {dev_comm:.2e}",
            mixed.commutator_identity.verdict
        ),
    );
    let omega = "(-16 - 24*B0^2*r^2 + 3*B0^4*r^4)";
    let l3 = eval_over(
        &pe(&format!(
            "-2048*B0^2*(4 - B0^2*r^2)/({omega}*(4 + B0^2*r^2)^4)"
        )),
        data,
        grid,
    )?;
    let l4 = eval_over(&pe(&format!("1 + 64/{omega}")), data, grid)?;
    let two = &mixed.commutator_two_term;
    let c3: Vec<f64> = two.coeffs.iter().map(|c| c[0]).collect();
    let c4: Vec<f64> = two.coeffs.iter().map(|c| c[1]).collect();
    let dev_l3 = max_rel_dev(&c3, &l3, gate.floor);
    let dev_l4 = max_rel_dev(&c4, &l4, gate.floor);
    cl.check(
        "melvin.two_term_decomposition",
        two.verdict == Verdict::Holds && dev_l3 <= gate.rel6 && dev_l4 <= gate.rel6,
        format!(
            "C.R - R.C = L3 Q(g,R) + L4 Q(S,R) {}; deviations from the closed forms: \
             L3 {dev_l3:.2e}, L4 {dev_l4:.2e}",
            two.verdict
        ),
    );

    // Recurrent conformal 2-forms, with the covector along dr.
    let rec = recur::two_form_recurrency(data, grid, &data.conformal)?;
    let pi_r = eval_over(
        &pe("-16*B0^2*r/((4 - B0^2*r^2)*(4 + B0^2*r^2))"),
        data,
        grid,
    )?;
    let got_r: Vec<f64> = rec.components.iter().map(|c| c[1]).collect();
    let dev_pi = max_rel_dev(&got_r, &pi_r, gate.floor);
    let off = rec
        .components
        .iter()
        .zip(&pi_r)
        .map(|(c, want)| {
            [c[0], c[2], c[3]]
                .iter()
                .map(|v| v.abs() / want.abs().max(gate.floor))
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    cl.check(
        "melvin.weyl_two_form_recurrent",
        rec.verdict == Verdict::Holds && dev_pi <= gate.rel8 && off <= gate.rel8,
        format!(
            "2-form recurrency {}; Pi_r deviates from \
             -16 B0^2 r/((4 - B0^2 r^2)(4 + B0^2 r^2)) by {dev_pi:.2e}, \
             other components at {off:.2e} of Pi_r",
            rec.verdict
        ),
    );

    // Roter decomposition R = N1 S^S + N2 g^S + N3 g^g.
    let roter = fits::roter_fit(data, grid, false)?;
    let n1 = eval_over(&pe("-3*(4 - B0^2*r^2)*(4 + B0^2*r^2)^4/(8192*B0^2)"), data, grid)?;
    let n3 = eval_over(&pe("-8*B0^2*(4 - B0^2*r^2)/(4 + B0^2*r^2)^4"), data, grid)?;
    let halves = vec![0.5; npts];
    let r1: Vec<f64> = roter.coeffs.iter().map(|c| c[0]).collect();
    let r2: Vec<f64> = roter.coeffs.iter().map(|c| c[1]).collect();
    let r3: Vec<f64> = roter.coeffs.iter().map(|c| c[2]).collect();
    let dev_n1 = max_rel_dev(&r1, &n1, gate.floor);
    let dev_n2 = max_rel_dev(&r2, &halves, gate.floor);
    let dev_n3 = max_rel_dev(&r3, &n3, gate.floor);
    cl.check(
        "melvin.roter_type",
        roter.verdict == Verdict::Holds
            && dev_n2 <= gate.rel8
            && dev_n1 <= gate.rel6
            && dev_n3 <= gate.rel6,
        format!(
            "R = N1 S^S + N2 g^S + N3 g^g {}; deviations from the closed forms: \
             N1 {dev_n1:.2e}, N2 {dev_n2:.2e}, N3 {dev_n3:.2e}",
            roter.verdict
        ),
    );

    // Ricci spectrum: two-quasi-Einstein and the degree-two polynomial
    // identity S^2 + lambda g = 0.
    let qe = spectral::quasi_einstein_rank(data, grid)?;
    let want_alpha = eval_over(&pe("256*B0^2/(4 + B0^2*r^2)^4"), data, grid)?;
    let dev_alpha = max_rel_dev(&qe.alpha, &want_alpha, gate.floor);
    cl.check(
        "melvin.two_quasi_einstein",
        qe.rank == Some(2) && dev_alpha <= gate.rel8,
        format!(
            "rank(S - alpha g) = {:?}; alpha deviates from 256 B0^2/(4 + B0^2 r^2)^4 \
             by {dev_alpha:.2e}",
            qe.rank
        ),
    );
    let ein = spectral::ein_level(data, grid)?;
    let (ein_ok, ein_detail) = if ein.level == Some(2) {
        let lambda = eval_over(&pe("-65536*B0^2/(4 + B0^2*r^2)^8"), data, grid)?;
        let n0: Vec<f64> = ein.coeffs.iter().map(|c| c[0]).collect();
        let dev_n0 = max_rel_dev(&n0, &lambda, gate.floor);
        let mid = ein
            .coeffs
            .iter()
            .map(|c| c[1].abs() / c[0].abs().max(gate.floor))
            .fold(0.0, f64::max);
        (
            dev_n0 <= gate.rel8 && mid <= gate.rel8,
            format!(
                "level 2 with S^2 + lambda g = 0; lambda deviates from \
                 -65536 B0^2/(4 + B0^2 r^2)^8 by {dev_n0:.2e}, S coefficient at {mid:.2e}"
            ),
        )
    } else {
        (false, format!("level = {:?}, expected 2", ein.level))
    };
    cl.check("melvin.einstein_level_two", ein_ok, ein_detail);

    // Generalized quasi-Einstein decomposition in the canonical gauge. The
    // tabulated coefficient reads -256 B0^2/(4 + B0^2 r^2): the fourth power
    // of the denominator is missing, and its sign is opposite to the
    // two-quasi-Einstein eigenvalue above.
    let chaki = spectral::generalized_qe_chaki(data, grid)?;
    match chaki {
        ChakiOutcome::Representable(dec) => {
            let want_a = eval_over(&pe("-256*B0^2/(4 + B0^2*r^2)^4"), data, grid)?;
            let want_d2 = eval_over(&pe("512*B0^2/(4 + B0^2*r^2)^4"), data, grid)?;
            let dev_a = max_rel_dev(&dec.alpha, &want_a, gate.floor);
            let dev_d2 = max_rel_dev(&dec.delta_norm2, &want_d2, gate.floor);
            let pi_null = dec
                .pi_norm2
                .iter()
                .map(|p| p.abs())
                .fold(0.0, f64::max);
            let gauge_ok = dec.beta == -1.0 && dec.gamma == 1.0;
            cl.documented(
                "melvin.chaki_generalized_quasi_einstein",
                gauge_ok && pi_null <= gate.rel10 && dev_a <= gate.rel8 && dev_d2 <= gate.rel6,
                format!(
                    "decomposition exists with beta = -1, gamma = 1, max |Pi|^2 = {pi_null:.2e}; \
                     |delta|^2 deviates from 512 B0^2/(4 + B0^2 r^2)^4 by {dev_d2:.2e}; \
                     the coefficient matches -256 B0^2/(4 + B0^2 r^2)^4 (deviation {dev_a:.2e}) \
                     once the tabulated form's missing fourth power is restored, and its sign \
                     is opposite to the two-quasi-Einstein eigenvalue (documented)"
                ),
            );
        }
        other => cl.check(
            "melvin.chaki_generalized_quasi_einstein",
            false,
            format!("decomposition not representable: {other:?}"),
        ),
    }

    // Compatibility with the Ricci tensor across the curvature-like tensors.
    let compat_r = recur::compatibility_check(data, grid, &data.riemann, &data.ricci)?;
    cl.check(
        "melvin.ricci_riemann_compatible",
        compat_r.verdict == Verdict::Holds,
        format!(
            "cyclic sum for (R, S) {} with max residual {:.2e}",
            compat_r.verdict, compat_r.residual
        ),
    );
    let companions: [(&str, &crate::tensor::TensorField); 4] = [
        ("C", &data.conformal),
        ("W", &data.concircular),
        ("K", &data.conharmonic),
        ("P", &data.projective),
    ];
    let mut failing = Vec::new();
    let mut holding = Vec::new();
    for (name, h) in companions {
        let res = recur::compatibility_check(data, grid, h, &data.ricci)?;
        if res.verdict == Verdict::Fails {
            failing.push(format!("({name}, S) residual {:.2e}", res.residual));
        } else {
            holding.push(name);
        }
    }
    cl.check(
        "melvin.incompatible_companion_exists",
        !failing.is_empty(),
        format!("failing pairs: {}", failing.join(", ")),
    );
    cl.documented(
        "melvin.riemann_compatible_exclusivity",
        compat_r.verdict == Verdict::Holds && failing.iter().any(|f| f.starts_with("(P")),
        format!(
            "the reference expects every companion pair to fail; under the cyclic sum \
             convention used here the tensors {{{}}} inherit compatibility from R (each \
             differs from R by Kulkarni-Nomizu corrections in g and S that are themselves \
             S-compatible), and the projective tensor alone fails (documented)",
            holding.join(", ")
        ),
    );

    // The companion Maxwell field is pseudosymmetric-type with the same L1.
    let f = fam
        .entry
        .maxwell
        .as_ref()
        .expect("the magnetic family carries its field strength");
    let fs = sample_over(f, data, grid)?;
    let rf: Vec<SampledTensor> = (0..npts)
        .map(|p| sampled_action(&basis.ginv[p], &basis.riemann[p], &fs[p]))
        .collect();
    let qgf: Vec<SampledTensor> = (0..npts)
        .map(|p| sampled_q(&basis.g[p], &fs[p]))
        .collect();
    let fit_f = fits::fit_proportionality(&rf, &qgf, grid.tol);
    let dev_f = max_rel_dev(&fit_f.coeff, &l1, gate.floor);
    cl.check(
        "melvin.maxwell_pseudosymmetric_type",
        fit_f.verdict == Verdict::Holds && dev_f <= gate.rel8,
        format!(
            "R.F = L_F Q(g,F) {}; L_F deviates from L1 by {dev_f:.2e}",
            fit_f.verdict
        ),
    );
    Ok(())
}

fn base_claims(fam: &PreparedFamily, gate: Gate, cl: &mut Claims) -> Result<(), MetricError> {
    let (data, grid) = (&fam.data, &fam.grid);
    let basis = SampledBasis::new(data, grid)?;
    let npts = grid.points.len();
    let p = Profile::new(&pe("ln(1 + r)"));
    let fp2 = &(&p.fp * &p.fp);

    // Pseudosymmetric with coefficient e^{-2f} f''.
    let want_l = eval_over(&(&p.em2f * &p.fpp), data, grid)?;
    let qgr: Vec<SampledTensor> = (0..npts)
        .map(|q| sampled_q(&basis.g[q], &basis.riemann[q]))
        .collect();
    let rr: Vec<SampledTensor> = (0..npts)
        .map(|q| sampled_action(&basis.ginv[q], &basis.riemann[q], &basis.riemann[q]))
        .collect();
    let fit = fits::fit_proportionality(&rr, &qgr, grid.tol);
    let dev = max_rel_dev(&fit.coeff, &want_l, gate.floor);
    cl.check(
        "base.pseudosymmetric",
        fit.verdict == Verdict::Holds && dev <= gate.rel8,
        format!(
            "R.R = L Q(g,R) {}; max coefficient deviation from e^(-2f) f'' is {dev:.2e}",
            fit.verdict
        ),
    );

    // Quasi-Einstein of rank one; the tabulated eigenvalue e^{-2f}(f'^2 + f'')
    // vanishes identically for this profile.
    let qe = spectral::quasi_einstein_rank(data, grid)?;
    let want_alpha = eval_over(&(&p.em2f * &(fp2 + &p.fpp)), data, grid)?;
    let dev_a = max_rel_dev(&qe.alpha, &want_alpha, gate.floor);
    cl.check(
        "base.quasi_einstein",
        qe.rank == Some(1) && dev_a <= gate.rel8,
        format!(
            "rank(S - alpha g) = {:?}; alpha deviates from e^(-2f)(f'^2 + f'') by {dev_a:.2e} \
             (the closed form is identically zero on this profile)",
            qe.rank
        ),
    );

    // Degree-two identity S^2 + mu1 S + mu2 g = 0. The tabulated middle
    // coefficient prints a stray profile factor (3 f f''); the corrected
    // reading -e^{-2f}(f'^2 + 3 f'') is what the fit recovers.
    let ein = spectral::ein_level(data, grid)?;
    let (ein_ok, ein_detail) = if ein.level == Some(2) {
        let mu1 = eval_over(
            &(&p.em2f * &(fp2 + &(&Expr::num(3.0) * &p.fpp))).neg(),
            data,
            grid,
        )?;
        let mu2 = eval_over(
            &(&(&(&Expr::num(2.0) * &p.em4f) * &p.fpp) * &(fp2 + &p.fpp)),
            data,
            grid,
        )?;
        let n0: Vec<f64> = ein.coeffs.iter().map(|c| c[0]).collect();
        let n1: Vec<f64> = ein.coeffs.iter().map(|c| c[1]).collect();
        let dev1 = max_rel_dev(&n1, &mu1, gate.floor);
        let dev0 = max_rel_dev(&n0, &mu2, gate.floor);
        (
            dev1 <= gate.rel8 && dev0 <= gate.rel8,
            format!(
                "level 2; mu1 deviates from -e^(-2f)(f'^2 + 3 f'') by {dev1:.2e} \
                 (the tabulated form prints 3 f f'' for the 3 f'' term, documented), \
                 mu2 from 2 e^(-4f) f''(f'^2 + f'') by {dev0:.2e}"
            ),
        )
    } else {
        (false, format!("level = {:?}, expected 2", ein.level))
    };
    cl.documented("base.einstein_level_two", ein_ok, ein_detail);

    // The conharmonic tensor is recurrent with covector along dr.
    let ws = recur::weak_symmetry_fit(data, grid, &data.conharmonic)?;
    let want_pi = eval_over(
        &(&(&Expr::num(2.0) * &(&(&p.fppp - &(&p.fp * &p.fpp)) - &p.fp.powi(3)))
            / &(fp2 + &(&Expr::num(2.0) * &p.fpp))),
        data,
        grid,
    )?;
    let rec = &ws.recurrent;
    let got_r: Vec<f64> = rec.components.iter().map(|c| c[1]).collect();
    let dev_pi = max_rel_dev(&got_r, &want_pi, gate.floor);
    let off = rec
        .components
        .iter()
        .zip(&want_pi)
        .map(|(c, want)| {
            [c[0], c[2]]
                .iter()
                .map(|v| v.abs() / want.abs().max(gate.floor))
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    cl.check(
        "base.conharmonic_recurrent",
        rec.verdict == Verdict::Holds && dev_pi <= gate.rel8 && off <= gate.rel8,
        format!(
            "nabla K = Pi (x) K {}; Pi_r deviates from \
             2(f''' - f' f'' - f'^3)/(f'^2 + 2 f'') by {dev_pi:.2e}, \
             other components at {off:.2e}",
            rec.verdict
        ),
    );

    // The tabulated Ricci 1-form recurrency covector divides by f'^2 + f'',
    // which vanishes identically for this profile; the exchange system it
    // would have to solve is inconsistent, so this claim fails honestly.
    let rec1 = recur::ricci_1form_recurrency(data, grid)?;
    let den = eval_over(&(fp2 + &p.fpp), data, grid)?;
    let den_max = den.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let worst = rec1
        .residual
        .iter()
        .fold(0.0f64, |acc, r| acc.max(*r));
    cl.check(
        "base.ricci_one_form_recurrency",
        rec1.verdict == Verdict::Holds,
        format!(
            "exchange fit {} with max residual {worst:.2e}; the tabulated covector \
             -(f''' - f' f'' - f'^3)/(f'^2 + f'') divides by f'^2 + f'', which vanishes \
             identically on this profile (max |f'^2 + f''| = {den_max:.2e}), so no \
             recurrency covector exists",
            rec1.verdict
        ),
    );
    Ok(())
}

fn melvin_type_claims(
    generic: &PreparedFamily,
    quadratic: &PreparedFamily,
    gate: Gate,
    cl: &mut Claims,
) -> Result<(), MetricError> {
    // f = (1/2) ln(r/(r+2)) kills the conformal tensor everywhere.
    let flat = prepare(
        catalog::melvin_type(&pe("0.5*ln(r/(r + 2))")),
        generic.grid.tol,
    )?;
    let cs = sample_over(&flat.data.conformal, &flat.data, &flat.grid)?;
    let rs = sample_over(&flat.data.riemann, &flat.data, &flat.grid)?;
    let cdev = cs
        .iter()
        .zip(&rs)
        .map(|(c, r)| c.norm() / r.norm().max(gate.floor))
        .fold(0.0, f64::max);
    cl.check(
        "melvin_type.conformally_flat_profile",
        cdev <= gate.rel8,
        format!(
            "f = (1/2) ln(r/(r+2)): max |C|/|R| = {cdev:.2e} over {} points",
            flat.grid.points.len()
        ),
    );

    // f = ln(1 + r^2) solves r f'' + r f'^2 - f' = 0, so the family is
    // pseudosymmetric with L_R = e^{-2f}(f' - r f'^2)/r.
    {
        let (data, grid) = (&quadratic.data, &quadratic.grid);
        let basis = SampledBasis::new(data, grid)?;
        let npts = grid.points.len();
        let p = Profile::new(&pe("ln(1 + r^2)"));
        let want = eval_over(
            &(&(&p.em2f * &(&p.fp - &(&p.r * &(&p.fp * &p.fp)))) / &p.r),
            data,
            grid,
        )?;
        let qgr: Vec<SampledTensor> = (0..npts)
            .map(|q| sampled_q(&basis.g[q], &basis.riemann[q]))
            .collect();
        let rr: Vec<SampledTensor> = (0..npts)
            .map(|q| sampled_action(&basis.ginv[q], &basis.riemann[q], &basis.riemann[q]))
            .collect();
        let fit = fits::fit_proportionality(&rr, &qgr, grid.tol);
        let dev = max_rel_dev(&fit.coeff, &want, gate.floor);
        cl.check(
            "melvin_type.pseudosymmetric_example",
            fit.verdict == Verdict::Holds && dev <= gate.rel8,
            format!(
                "f = ln(1 + r^2): R.R = L_R Q(g,R) {}; max coefficient deviation from \
                 e^(-2f)(f' - r f'^2)/r is {dev:.2e}",
                fit.verdict
            ),
        );
    }

    // Generic profile f = ln(1 + r): the four structure conditions of the
    // warped family, with the reference coefficient functions.
    let (data, grid) = (&generic.data, &generic.grid);
    let basis = SampledBasis::new(data, grid)?;
    let npts = grid.points.len();
    let p = Profile::new(&pe("ln(1 + r)"));
    let fp2 = &(&p.fp * &p.fp);
    // 2 f' - 2 r f'^2 + r f'', the conformal scale of this family.
    let wnum = &(&(&(&Expr::num(2.0) * &p.fp) - &(&(&Expr::num(2.0) * &p.r) * fp2))
        + &(&p.r * &p.fpp));

    let lc = eval_over(&(&(&p.em2f * wnum) / &(&Expr::num(3.0) * &p.r)), data, grid)?;
    let qgc: Vec<SampledTensor> = (0..npts)
        .map(|q| sampled_q(&basis.g[q], &basis.conformal[q]))
        .collect();
    let cc: Vec<SampledTensor> = (0..npts)
        .map(|q| sampled_action(&basis.ginv[q], &basis.conformal[q], &basis.conformal[q]))
        .collect();
    let fit_cc = fits::fit_proportionality(&cc, &qgc, grid.tol);
    let dev_cc = max_rel_dev(&fit_cc.coeff, &lc, gate.floor);
    cl.check(
        "melvin_type.weyl_pseudosymmetric",
        fit_cc.verdict == Verdict::Holds && dev_cc <= gate.rel8,
        format!(
            "C.C = L_C Q(g,C) {}; max coefficient deviation from \
             e^(-2f)(2f' - 2rf'^2 + rf'')/(3r) is {dev_cc:.2e}",
            fit_cc.verdict
        ),
    );

    let mixed = fits::mixed_condition_suite(data, grid)?;
    // L = -e^{-2f} f' (3f'^2 - 2rf'^3 + f'')/(2f' - 2rf'^2 + rf'').
    let three_term = &(&(&(&Expr::num(3.0) * fp2) - &(&(&Expr::num(2.0) * &p.r) * &(fp2 * &p.fp)))
        + &p.fpp);
    let want_sps = eval_over(&(&(&(&p.em2f * &p.fp) * three_term) / wnum).neg(), data, grid)?;
    let dev_sps = max_rel_dev(&mixed.sps.coeff, &want_sps, gate.floor);
    cl.check(
        "melvin_type.scalar_pseudosymmetric_type",
        mixed.sps.verdict == Verdict::Holds && dev_sps <= gate.rel8,
        format!(
            "R.R - Q(S,R) = L Q(g,C) {}; max coefficient deviation from the closed form \
             is {dev_sps:.2e}",
            mixed.sps.verdict
        ),
    );

    // Generalized Roter decomposition. The engine detects the six-term
    // form; the reference prints a four-term one over g^S, g^S2, S^S, S^S2
    // whose displayed coefficients are internally inconsistent: L13 carries
    // a spurious e^{4f} and L23 is short a factor -e^{2f}. (L22, which is
    // printed in terms of L13, is only correct with the spurious factor
    // still in place.) Both readings are measured below.
    let grt = fits::roter_fit(data, grid, true)?;
    let lr = &(&(&p.em2f * &(&p.fp - &(&p.r * fp2))) / &p.r);
    let lden = &(&p.fp + &(&p.r * &p.fpp));
    let re2flr = &(&(&p.r * &p.e2f) * lr);
    let denom1 = &(re2flr + &p.fp);
    let two = &Expr::num(2.0);
    let l12 = &(&(&(&p.r * &(&(&p.e2f * lr) + &p.fpp)) / &(two * denom1))
        + &(&p.fp / &(two * lden)));
    let l13p = &(&(&(&p.e4f * &p.r.powi(2)) * &p.fpp)
        / &(&(&Expr::num(4.0) * denom1) * &lden.powi(2)))
        .neg();
    let l22 = &(&(&(l13p * lden) * &p.em2f)
        - &(&(&(&p.r.powi(2) * &p.e4f) * lr) / &(two * &lden.powi(2))));
    let l23p = &(&(&(&(two * &p.r) * &p.e2f) * l13p) * lr);
    let l13c = &(l13p * &p.em4f);
    let l23c = &(&(&p.e2f * l23p)).neg();
    let printed = [
        eval_over(l12, data, grid)?,
        eval_over(l13p, data, grid)?,
        eval_over(l22, data, grid)?,
        eval_over(l23p, data, grid)?,
    ];
    let corrected = [
        printed[0].clone(),
        eval_over(l13c, data, grid)?,
        printed[2].clone(),
        eval_over(l23c, data, grid)?,
    ];
    let combo_residual = |coeffs: &[Vec<f64>; 4]| -> f64 {
        let mut worst = 0.0f64;
        for q in 0..npts {
            let terms = [
                sampled_kn(&basis.g[q], &basis.s[q]),
                sampled_kn(&basis.g[q], &basis.s2[q]),
                sampled_kn(&basis.s[q], &basis.s[q]),
                sampled_kn(&basis.s[q], &basis.s2[q]),
            ];
            let mut diff = basis.riemann[q].clone();
            for (vals, term) in coeffs.iter().zip(&terms) {
                for (d, t) in diff.vals.iter_mut().zip(&term.vals) {
                    *d -= vals[q] * t;
                }
            }
            worst = worst.max(diff.norm() / basis.riemann[q].norm().max(gate.floor));
        }
        worst
    };
    let grt_printed = combo_residual(&printed);
    let grt_resid = combo_residual(&corrected);
    cl.documented(
        "melvin_type.generalized_roter",
        grt.verdict == Verdict::Holds && grt_resid <= gate.rel8,
        format!(
            "decomposition over Kulkarni-Nomizu products of g, S, S^2 {}; the four \
             tabulated coefficients miss R by {grt_printed:.1e} as printed, and \
             reproduce it to {grt_resid:.1e} once the spurious e^(4f) on L13 is \
             dropped and L23 gains the factor -e^(2f) (documented)",
            grt.verdict
        ),
    );

    // Degree-three identity. The printed a33 has the opposite sign; with it
    // restored the four coefficients annihilate (g, S, S^2, S^3) exactly.
    let ein = spectral::ein_level(data, grid)?;
    let a22 = &(re2flr / denom1).neg();
    let a11 = &(&(&(two * lr) + &(&(&(&p.em2f / &p.r) * lden) * a22))).neg();
    let a33p = &(&(&(&(&p.r * &p.e2f) / lden)
        * &(a22 + &(&(&(&(two * &p.r) * &p.e2f) / lden) * lr))))
        .neg();
    let a44 = &(&(&(&(&p.r.powi(2) / &lden.powi(2)) * &p.e4f) * a22)).neg();
    let printed_a = [
        eval_over(a11, data, grid)?,
        eval_over(a22, data, grid)?,
        eval_over(a33p, data, grid)?,
        eval_over(a44, data, grid)?,
    ];
    let mut corrected_a = printed_a.clone();
    for v in &mut corrected_a[2] {
        *v = -*v;
    }
    let s3 = sample_over(&data.ricci_powers[1], data, grid)?;
    let null_residual = |avals: &[Vec<f64>; 4]| -> f64 {
        let mut worst = 0.0f64;
        for q in 0..npts {
            let terms = [&basis.g[q], &basis.s[q], &basis.s2[q], &s3[q]];
            let mut acc = vec![0.0; terms[0].vals.len()];
            let mut scale = 0.0f64;
            for (vals, term) in avals.iter().zip(&terms) {
                scale = scale.max(vals[q].abs() * term.norm());
                for (a, t) in acc.iter_mut().zip(&term.vals) {
                    *a += vals[q] * t;
                }
            }
            let norm: f64 = acc.iter().map(|v| v * v).sum::<f64>().sqrt();
            worst = worst.max(norm / scale.max(gate.floor));
        }
        worst
    };
    let ein_printed = null_residual(&printed_a);
    let ein_resid = null_residual(&corrected_a);
    cl.documented(
        "melvin_type.einstein_level_three",
        ein.level == Some(3) && ein_resid <= gate.rel8,
        format!(
            "level = {:?}; the tabulated coefficients leave a relative residual of \
             {ein_printed:.1e} as printed and annihilate (g, S, S^2, S^3) to \
             {ein_resid:.1e} once the sign of a33 is restored (documented)",
            ein.level
        ),
    );

    // Conformal 2-forms stay recurrent for the generic profile.
    let rec = recur::two_form_recurrency(data, grid, &data.conformal)?;
    cl.check(
        "melvin_type.weyl_two_form_recurrent",
        rec.verdict == Verdict::Holds,
        format!(
            "2-form recurrency {} with max residual {:.2e}",
            rec.verdict,
            rec.residual.iter().fold(0.0f64, |a, r| a.max(*r))
        ),
    );
    Ok(())
}

fn degenerate_claims(melvin: &PreparedFamily, cl: &mut Claims) -> Result<(), MetricError> {
    // Switching the field off flattens the metric: every detector must
    // report vacuous rather than inventing a verdict on zero tensors.
    let flat = prepare(catalog::melvin(0.0), melvin.grid.tol)?;
    let basis = SampledBasis::new(&flat.data, &flat.grid)?;
    let npts = flat.grid.points.len();
    let qgr: Vec<SampledTensor> = (0..npts)
        .map(|p| sampled_q(&basis.g[p], &basis.riemann[p]))
        .collect();
    let rr: Vec<SampledTensor> = (0..npts)
        .map(|p| sampled_action(&basis.ginv[p], &basis.riemann[p], &basis.riemann[p]))
        .collect();
    let fit = fits::fit_proportionality(&rr, &qgr, flat.grid.tol);
    let roter = fits::roter_fit(&flat.data, &flat.grid, false)?;
    let mixed = fits::mixed_condition_suite(&flat.data, &flat.grid)?;
    let rec = recur::two_form_recurrency(&flat.data, &flat.grid, &flat.data.conformal)?;
    let verdicts = [
        ("pseudosymmetry", fit.verdict),
        ("roter", roter.verdict),
        ("scalar pseudosymmetry", mixed.sps.verdict),
        ("commutator", mixed.commutator_identity.verdict),
        ("2-form recurrency", rec.verdict),
    ];
    let stray: Vec<String> = verdicts
        .iter()
        .filter(|(_, v)| *v != Verdict::Vacuous)
        .map(|(name, v)| format!("{name}: {v}"))
        .collect();
    cl.check(
        "melvin.flat_limit_vacuous",
        stray.is_empty(),
        if stray.is_empty() {
            format!("B0 = 0: all detectors vacuous over {npts} points")
        } else {
            format!("B0 = 0 but some detectors still decided: {}", stray.join(", "))
        },
    );

    // r = 2 sits on the exceptional locus 4 - B0^2 r^2 = 0 at B0 = 1; a grid
    // pinned there must be rejected as empty rather than sampled.
    let err = melvin
        .entry
        .metric
        .explicit_grid(&[("r".to_string(), vec![2.0])], melvin.grid.tol);
    cl.check(
        "melvin.exceptional_radius_rejected",
        matches!(err, Err(MetricError::EmptyGrid)),
        match &err {
            Err(e) => format!("grid r = 2 rejected: {e}"),
            Ok(_) => "grid r = 2 was accepted but sits on the exceptional locus".to_string(),
        },
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn the_full_registry_reports_the_expected_statuses() {
        let reports = verify_reference_claims(Tolerances::default()).unwrap();
        let by_id: std::collections::BTreeMap<&str, &ClaimReport> =
            reports.iter().map(|r| (r.id, r)).collect();
        assert_eq!(by_id.len(), reports.len(), "claim ids are unique");

        let disputed = [
            "melvin.reference_tables",
            "melvin_type.reference_tables",
            "melvin.chaki_generalized_quasi_einstein",
            "melvin.riemann_compatible_exclusivity",
            "melvin_type.generalized_roter",
            "melvin_type.einstein_level_three",
            "base.einstein_level_two",
        ];
        let failing = ["base.ricci_one_form_recurrency"];
        for r in &reports {
            let want = if failing.contains(&r.id) {
                ClaimStatus::Fail
            } else if disputed.contains(&r.id) {
                ClaimStatus::Disputed
            } else {
                ClaimStatus::Pass
            };
            assert_eq!(r.status, want, "{}: {}", r.id, r.detail);
        }
    }

    #[test]
    fn loosening_the_tolerance_never_flips_a_claim_to_fail() {
        let loose = Tolerances {
            rel: 1e-2,
            abs_floor: 1e-12,
        };
        let reports = verify_reference_claims(loose).unwrap();
        for r in &reports {
            if r.id == "base.ricci_one_form_recurrency" {
                continue;
            }
            assert_ne!(r.status, ClaimStatus::Fail, "{}: {}", r.id, r.detail);
        }
    }

    #[test]
    fn a_tampered_reference_table_fails_with_the_offending_component_named() {
        let mut entry = catalog::melvin(1.0);
        let at = entry
            .golden
            .iter()
            .position(|g| g.tensor == "S")
            .expect("the table lists Ricci components");
        entry.golden[at].expr = entry.golden[at].expr.mul(&Expr::num(1.5));
        let idx = entry.golden[at].idx.clone();
        let fam = prepare(entry, Tolerances::default()).unwrap();
        let claim = golden_claim("melvin.reference_tables", &[&fam]);
        assert_eq!(claim.status, ClaimStatus::Fail);
        let label = format!(
            "S[{}]",
            idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
        );
        assert!(claim.detail.contains(&label), "detail: {}", claim.detail);
    }
}
