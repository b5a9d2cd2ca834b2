//! Built-in metric families: the cylindrically symmetric magnetic universe,
//! its general warped profile, and the conformally flat 3-metric the profile
//! family is built from. Each entry carries the metric, any companion fields,
//! and a table of reference component values used by `components` and the
//! verification suite.

use std::collections::BTreeMap;

use crate::expr::Expr;
use crate::metric::{Chart, MetricSpec, SampleGrid, Tolerances};
use crate::tensor::TensorField;

/// How a reference value is compared against the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoldenFlag {
    /// Straight comparison at 1e-10 relative.
    Exact,
    /// The tabulated sign disagrees with the engine's fixed conventions;
    /// magnitudes are compared and the sign relation is reported.
    SignDisputed,
}

/// One reference component value: a closed-form expression for a named
/// engine tensor at a 1-based index tuple.
#[derive(Debug, Clone)]
pub struct Golden {
    pub tensor: &'static str,
    pub idx: Vec<usize>,
    pub expr: Expr,
    pub flag: GoldenFlag,
    pub note: Option<&'static str>,
}

impl Golden {
    pub(crate) fn exact(tensor: &'static str, idx: &[usize], expr: Expr) -> Golden {
        Golden {
            tensor,
            idx: idx.to_vec(),
            expr,
            flag: GoldenFlag::Exact,
            note: None,
        }
    }

    pub(crate) fn sign_disputed(
        tensor: &'static str,
        idx: &[usize],
        expr: Expr,
        note: &'static str,
    ) -> Golden {
        Golden {
            flag: GoldenFlag::SignDisputed,
            note: Some(note),
            ..Golden::exact(tensor, idx, expr)
        }
    }

    pub(crate) fn noted(
        tensor: &'static str,
        idx: &[usize],
        expr: Expr,
        note: &'static str,
    ) -> Golden {
        Golden {
            note: Some(note),
            ..Golden::exact(tensor, idx, expr)
        }
    }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub metric: MetricSpec,
    /// Companion electromagnetic field strength, when the family has one.
    pub maxwell: Option<TensorField>,
    pub golden: Vec<Golden>,
}

impl CatalogEntry {
    pub fn name(&self) -> &str {
        &self.metric.name
    }

    pub fn default_grid(&self, tol: Tolerances) -> Result<SampleGrid, crate::metric::MetricError> {
        self.metric.default_grid(tol)
    }
}

fn parse(src: &str) -> Expr {
    src.parse()
        .unwrap_or_else(|e| panic!("bad builtin expr {src:?}: {e}"))
}

/// The magnetic universe with field strength parameter `B0`
/// (warp factor `U = 1 + B0^2 r^2 / 4`), together with its Maxwell field.
pub fn melvin(b0: f64) -> CatalogEntry {
    let chart = Chart::new(&["t", "r", "z", "phi"]);
    let u = parse("1 + B0^2*r^2/4");
    let u2 = u.mul(&u);
    let mut g = vec![vec![Expr::zero(); 4]; 4];
    g[0][0] = u2.neg();
    g[1][1] = u2.clone();
    g[2][2] = u2.clone();
    g[3][3] = parse("r^2").div(&u2);

    let mut params = BTreeMap::new();
    params.insert("B0".to_string(), b0);

    let metric = MetricSpec {
        name: "melvin".to_string(),
        chart,
        g,
        params,
        signature: (1, 3),
        domain: vec![parse("r")],
        exceptional: vec![parse("r"), parse("4 - B0^2*r^2")],
    };

    let f24 = parse("8*B0*r/(4 + B0^2*r^2)^2");
    let mut maxwell = TensorField::zeros(4, 2);
    maxwell.set(&[1, 3], f24.clone());
    maxwell.set(&[3, 1], f24.neg());

    CatalogEntry {
        metric,
        maxwell: Some(maxwell),
        golden: melvin_goldens(),
    }
}

/// The general warped family `ds^2 = e^{2f(r)}(-dt^2 + dr^2 + dz^2)
/// + r^2 e^{-2f(r)} dphi^2`. Non-coordinate symbols appearing in `f` become
/// parameters with default value 1.
pub fn melvin_type(f: &Expr) -> CatalogEntry {
    let chart = Chart::new(&["t", "r", "z", "phi"]);
    let e2f = Expr::num(2.0).mul(f).exp();
    let mut g = vec![vec![Expr::zero(); 4]; 4];
    g[0][0] = e2f.neg();
    g[1][1] = e2f.clone();
    g[2][2] = e2f.clone();
    g[3][3] = parse("r^2").div(&e2f);

    let params = profile_params(f, &chart);
    let fp = f.diff("r");
    let fpp = fp.diff("r");
    // The conformal tensor of this family vanishes exactly on the zero set
    // of r f'' - 2 r f'^2 + 2 f'; fits against C-built quotients stay away
    // from it.
    let weyl_locus = parse("r")
        .mul(&fpp)
        .sub(&parse("2*r").mul(&fp.mul(&fp)))
        .add(&parse("2").mul(&fp));

    let metric = MetricSpec {
        name: "melvin_type".to_string(),
        chart,
        g,
        params,
        signature: (1, 3),
        domain: vec![parse("r")],
        exceptional: vec![parse("r"), weyl_locus],
    };

    CatalogEntry {
        metric,
        maxwell: None,
        golden: melvin_type_goldens(f),
    }
}

/// The 3D conformally flat block `-g_11 = g_22 = g_33 = e^{2f(r)}` the warped
/// family interpolates over.
pub fn base_3metric(f: &Expr) -> CatalogEntry {
    let chart = Chart::new(&["t", "r", "z"]);
    let e2f = Expr::num(2.0).mul(f).exp();
    let mut g = vec![vec![Expr::zero(); 3]; 3];
    g[0][0] = e2f.neg();
    g[1][1] = e2f.clone();
    g[2][2] = e2f;

    let params = profile_params(f, &chart);
    let fp = f.diff("r");
    let fpp = fp.diff("r");
    let fp2 = fp.mul(&fp);
    // Denominators of the two recurrency coefficients for this family.
    let conharmonic_locus = fp2.add(&Expr::num(2.0).mul(&fpp));
    let ricci_locus = fp2.add(&fpp);

    let metric = MetricSpec {
        name: "base_3metric".to_string(),
        chart,
        g,
        params,
        signature: (1, 2),
        domain: vec![],
        exceptional: vec![conharmonic_locus, ricci_locus],
    };

    CatalogEntry {
        metric,
        maxwell: None,
        golden: base_goldens(f),
    }
}

/// Result of comparing one reference value against the engine over a grid.
#[derive(Debug, Clone, PartialEq)]
pub enum GoldenOutcome {
    /// Agreed (1e-10 relative) at every grid point.
    Matched,
    /// Magnitudes agreed everywhere and the sign is opposite wherever the
    /// value is above the floor — the expected shape for sign-disputed rows.
    MatchedWithSignFlip,
    /// Disagreement; carries the worst offending point and both values.
    Mismatched {
        point: Vec<f64>,
        reference: f64,
        engine: f64,
    },
}

#[derive(Debug, Clone)]
pub struct GoldenResult {
    pub golden: Golden,
    pub outcome: GoldenOutcome,
}

const GOLDEN_REL: f64 = 1e-10;

/// Compares every reference value of `entry` against the engine at every
/// grid point. Mismatches are report content, not errors.
pub fn golden_check(
    entry: &CatalogEntry,
    data: &crate::curvature::CurvatureData,
    grid: &SampleGrid,
) -> Vec<GoldenResult> {
    let floor = grid.tol.abs_floor;
    let mut fields: BTreeMap<&'static str, Option<TensorField>> = BTreeMap::new();
    let mut out = Vec::new();
    for golden in &entry.golden {
        let field = fields
            .entry(golden.tensor)
            .or_insert_with(|| data.tensor_by_name(golden.tensor, entry.maxwell.as_ref()));
        let Some(field) = field else {
            out.push(GoldenResult {
                golden: golden.clone(),
                outcome: GoldenOutcome::Mismatched {
                    point: Vec::new(),
                    reference: f64::NAN,
                    engine: f64::NAN,
                },
            });
            continue;
        };
        let idx0: Vec<usize> = golden.idx.iter().map(|i| i - 1).collect();
        let comp = field.get(&idx0);
        let mut flipped = false;
        let mut outcome = GoldenOutcome::Matched;
        for point in &grid.points {
            let scope = data.spec.scope_at(point);
            let (want, got) = match (golden.expr.eval(&scope), comp.eval(&scope)) {
                (Ok(w), Ok(g)) => (w, g),
                _ => (f64::NAN, f64::NAN),
            };
            let scale = want.abs().max(got.abs());
            let agree = |a: f64, b: f64| (a - b).abs() <= GOLDEN_REL * scale + floor;
            let ok = match golden.flag {
                GoldenFlag::Exact => agree(want, got),
                GoldenFlag::SignDisputed => {
                    if agree(want.abs(), got.abs()) {
                        if scale > floor && want.signum() != got.signum() {
                            flipped = true;
                        }
                        true
                    } else {
                        false
                    }
                }
            };
            if !ok {
                outcome = GoldenOutcome::Mismatched {
                    point: point.clone(),
                    reference: want,
                    engine: got,
                };
                break;
            }
        }
        if outcome == GoldenOutcome::Matched && flipped {
            outcome = GoldenOutcome::MatchedWithSignFlip;
        }
        out.push(GoldenResult {
            golden: golden.clone(),
            outcome,
        });
    }
    out
}

fn profile_params(f: &Expr, chart: &Chart) -> BTreeMap<String, f64> {
    f.symbols()
        .into_iter()
        .filter(|s| !chart.coords.contains(s))
        .map(|s| (s, 1.0))
        .collect()
}

/// Looks up a catalog entry by name. Profile-taking families accept an
/// argument in parentheses: `melvin_type(ln(1 + r^2))`.
pub fn lookup(name: &str) -> Result<CatalogEntry, String> {
    let name = name.trim();
    if name == "melvin" {
        return Ok(melvin(1.0));
    }
    for family in ["melvin_type", "base_3metric"] {
        if let Some(rest) = name.strip_prefix(family) {
            let rest = rest.trim();
            if rest.is_empty() {
                return Err(format!(
                    "catalog family `{family}` needs a profile, e.g. `{family}(ln(1 + r^2))`"
                ));
            }
            let inner = rest
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| format!("malformed catalog reference `{name}`"))?;
            let f: Expr = inner
                .parse()
                .map_err(|e| format!("bad profile expression `{inner}`: {e}"))?;
            return Ok(match family {
                "melvin_type" => melvin_type(&f),
                _ => base_3metric(&f),
            });
        }
    }
    Err(format!(
        "unknown catalog metric `{name}` (available: melvin, melvin_type(f), base_3metric(f))"
    ))
}

// Reference tables are appended by the verification layer; see golden.rs.
use crate::golden::{base_goldens, melvin_goldens, melvin_type_goldens};
