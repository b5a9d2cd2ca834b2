//! Classification reports: one structured record of everything the detector
//! suite concluded about a metric on a grid, with a canonical machine format
//! (the [`crate::textfmt`] family) that parses back losslessly and a compact
//! human rendering.
//!
//! Machine output is deterministic: fixed field order, no timestamps, floats
//! printed in shortest round-trip scientific notation. Every verdict is
//! reproducible from the recorded grid and tolerance settings.

use std::fmt::Write as _;

use thiserror::Error;

use crate::catalog::{self, CatalogEntry, GoldenOutcome};
use crate::classify::fits::{self, Verdict};
use crate::classify::recur;
use crate::classify::spectral::{self, ChakiOutcome};
use crate::curvature::CurvatureData;
use crate::metric::{MetricError, SampleGrid};
use crate::textfmt::{block_in, get_in, lines_of, split_key, Document, Item, TextError};

pub const ENGINE: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorRecord {
    pub name: String,
    pub verdict: String,
    /// Largest relative residual over the grid.
    pub residual: f64,
    /// Detector-specific annotations (rank, level, basis, ...), stable order.
    pub notes: Vec<(String, String)>,
    /// Fitted coefficient vector per grid point; empty for verdict-only
    /// checks.
    pub coeffs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenRecord {
    /// Component label, e.g. `S[1,1]`.
    pub component: String,
    /// `matched`, `sign-flip`, or `mismatched`.
    pub outcome: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub metric_name: String,
    pub chart: Vec<String>,
    pub signature: (usize, usize),
    pub params: Vec<(String, f64)>,
    pub engine: String,
    pub tol_rel: f64,
    pub tol_floor: f64,
    pub grid: Vec<Vec<f64>>,
    pub detectors: Vec<DetectorRecord>,
    pub golden: Vec<GoldenRecord>,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report: {0}")]
    Layout(#[from] TextError),
    #[error("missing field '{0}'")]
    Missing(&'static str),
    #[error("field '{field}': bad value '{value}'")]
    Malformed { field: &'static str, value: String },
}

fn fe(x: f64) -> String {
    format!("{x:e}")
}

fn floats(row: &[f64]) -> String {
    row.iter().map(|v| fe(*v)).collect::<Vec<_>>().join(" ")
}

fn max_of(rs: &[f64]) -> f64 {
    rs.iter().fold(0.0f64, |a, r| a.max(*r))
}

/// Failing fits leave an empty coefficient row at every point; collapse that
/// to "no coefficients" so the text form never contains blank lines.
fn norm_rows(rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    if rows.iter().all(|r| r.is_empty()) {
        Vec::new()
    } else {
        rows
    }
}

fn fit_record(name: &str, fit: &fits::FitResult, notes: Vec<(String, String)>) -> DetectorRecord {
    DetectorRecord {
        name: name.to_string(),
        verdict: fit.verdict.as_str().to_string(),
        residual: max_of(&fit.residual),
        notes,
        coeffs: norm_rows(fit.coeff.iter().map(|c| vec![*c]).collect()),
    }
}

fn multi_record(name: &str, fit: &fits::MultiFitResult, basis: &[&str]) -> DetectorRecord {
    DetectorRecord {
        name: name.to_string(),
        verdict: fit.verdict.as_str().to_string(),
        residual: max_of(&fit.residual),
        notes: vec![
            ("basis".to_string(), basis.join(" ")),
            (
                "nullspace".to_string(),
                fit.nullspace_dim
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            ),
        ],
        coeffs: norm_rows(fit.coeffs.clone()),
    }
}

fn covector_record(name: &str, fit: &recur::CovectorFit) -> DetectorRecord {
    DetectorRecord {
        name: name.to_string(),
        verdict: fit.verdict.as_str().to_string(),
        residual: max_of(&fit.residual),
        notes: vec![(
            "kernel".to_string(),
            fit.kernel_dim
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        )],
        coeffs: norm_rows(fit.components.clone()),
    }
}

fn plain_record(name: &str, verdict: Verdict, residual: f64) -> DetectorRecord {
    DetectorRecord {
        name: name.to_string(),
        verdict: verdict.as_str().to_string(),
        residual,
        notes: Vec::new(),
        coeffs: Vec::new(),
    }
}

/// Runs the full detector suite and assembles the report. When `entry` is
/// given (a catalog metric), its reference component table is compared too.
pub fn build_report(
    data: &CurvatureData,
    grid: &SampleGrid,
    entry: Option<&CatalogEntry>,
) -> Result<ClassificationReport, MetricError> {
    let mut detectors = Vec::new();

    for e in fits::pseudosymmetry_suite(data, grid)? {
        detectors.push(fit_record(
            &format!("suite.{}", e.label()),
            &e.fit,
            vec![
                ("semisymmetric".to_string(), e.semisymmetric.as_str().to_string()),
                ("semisymmetric_residual".to_string(), fe(e.semi_residual)),
            ],
        ));
    }

    let mixed = fits::mixed_condition_suite(data, grid)?;
    detectors.push(fit_record("mixed.scalar_pseudosymmetry", &mixed.sps, Vec::new()));
    detectors.push(fit_record(
        "mixed.commutator_identity",
        &mixed.commutator_identity,
        Vec::new(),
    ));
    detectors.push(multi_record(
        "mixed.commutator_two_term",
        &mixed.commutator_two_term,
        &["QgR", "QSR"],
    ));

    detectors.push(multi_record(
        "roter",
        &fits::roter_fit(data, grid, false)?,
        &fits::ROTER_BASIS,
    ));
    detectors.push(multi_record(
        "generalized_roter",
        &fits::roter_fit(data, grid, true)?,
        &fits::GENERALIZED_ROTER_BASIS,
    ));

    detectors.push(covector_record(
        "two_form.R",
        &recur::two_form_recurrency(data, grid, &data.riemann)?,
    ));
    detectors.push(covector_record(
        "two_form.C",
        &recur::two_form_recurrency(data, grid, &data.conformal)?,
    ));
    detectors.push(covector_record(
        "ricci_1form",
        &recur::ricci_1form_recurrency(data, grid)?,
    ));
    detectors.push(covector_record(
        "recurrency.K",
        &recur::weak_symmetry_fit(data, grid, &data.conharmonic)?.recurrent,
    ));

    let diff = recur::ricci_differential_checks(data, grid)?;
    detectors.push(plain_record(
        "ricci.cyclic_parallel",
        diff.cyclic_parallel.verdict,
        diff.cyclic_parallel.residual,
    ));
    detectors.push(plain_record("ricci.codazzi", diff.codazzi.verdict, diff.codazzi.residual));

    for (name, h) in [
        ("R", &data.riemann),
        ("C", &data.conformal),
        ("W", &data.concircular),
        ("K", &data.conharmonic),
        ("P", &data.projective),
    ] {
        let c = recur::compatibility_check(data, grid, h, &data.ricci)?;
        detectors.push(plain_record(
            &format!("compatibility.{name}.S"),
            c.verdict,
            c.residual,
        ));
    }

    let ein = spectral::ein_level(data, grid)?;
    detectors.push(DetectorRecord {
        name: "ein_level".to_string(),
        verdict: if ein.level.is_some() { "holds" } else { "fails" }.to_string(),
        residual: 0.0,
        notes: vec![
            (
                "level".to_string(),
                ein.level.map_or("none".to_string(), |l| l.to_string()),
            ),
            (
                "nullspace".to_string(),
                ein.nullspace_dim
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            ),
        ],
        coeffs: ein.coeffs.clone(),
    });

    let qe = spectral::quasi_einstein_rank(data, grid)?;
    detectors.push(DetectorRecord {
        name: "quasi_einstein".to_string(),
        verdict: if qe.rank.is_some() { "holds" } else { "fails" }.to_string(),
        residual: 0.0,
        notes: vec![
            (
                "rank".to_string(),
                qe.rank.map_or("none".to_string(), |r| r.to_string()),
            ),
            ("complex".to_string(), qe.complex.to_string()),
        ],
        coeffs: qe.alpha.iter().map(|a| vec![*a]).collect(),
    });

    let chaki = spectral::generalized_qe_chaki(data, grid)?;
    detectors.push(match &chaki {
        ChakiOutcome::Representable(dec) => DetectorRecord {
            name: "chaki".to_string(),
            verdict: "holds".to_string(),
            residual: 0.0,
            notes: vec![
                ("outcome".to_string(), "representable".to_string()),
                ("beta".to_string(), fe(dec.beta)),
                ("gamma".to_string(), fe(dec.gamma)),
            ],
            coeffs: (0..dec.alpha.len())
                .map(|p| vec![dec.alpha[p], dec.pi_norm2[p], dec.delta_norm2[p]])
                .collect(),
        },
        ChakiOutcome::NotApplicable { rank } => DetectorRecord {
            name: "chaki".to_string(),
            verdict: "vacuous".to_string(),
            residual: 0.0,
            notes: vec![
                ("outcome".to_string(), "not-applicable".to_string()),
                (
                    "rank".to_string(),
                    rank.map_or("none".to_string(), |r| r.to_string()),
                ),
            ],
            coeffs: Vec::new(),
        },
        ChakiOutcome::DecompositionFails { detail } => DetectorRecord {
            name: "chaki".to_string(),
            verdict: "fails".to_string(),
            residual: 0.0,
            notes: vec![
                ("outcome".to_string(), "decomposition-fails".to_string()),
                ("detail".to_string(), detail.clone()),
            ],
            coeffs: Vec::new(),
        },
    });

    let golden = match entry {
        Some(entry) if !entry.golden.is_empty() => catalog::golden_check(entry, data, grid)
            .into_iter()
            .map(|res| {
                let component = format!(
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
                    GoldenOutcome::Matched => GoldenRecord {
                        component,
                        outcome: "matched".to_string(),
                        detail: String::new(),
                    },
                    GoldenOutcome::MatchedWithSignFlip => GoldenRecord {
                        component,
                        outcome: "sign-flip".to_string(),
                        detail: "magnitude matches with the documented sign flip".to_string(),
                    },
                    GoldenOutcome::Mismatched {
                        point,
                        reference,
                        engine,
                    } => GoldenRecord {
                        component,
                        outcome: "mismatched".to_string(),
                        detail: format!(
                            "at {} reference {} engine {}",
                            floats(&point),
                            fe(reference),
                            fe(engine)
                        ),
                    },
                }
            })
            .collect(),
        _ => Vec::new(),
    };

    let spec = &data.spec;
    Ok(ClassificationReport {
        metric_name: spec.name.clone(),
        chart: spec.chart.coords.clone(),
        signature: spec.signature,
        params: spec.params.iter().map(|(k, v)| (k.clone(), *v)).collect(),
        engine: ENGINE.to_string(),
        tol_rel: grid.tol.rel,
        tol_floor: grid.tol.abs_floor,
        grid: grid.points.clone(),
        detectors,
        golden,
    })
}

impl ClassificationReport {
    /// Canonical machine-readable form; [`ClassificationReport::parse`] is
    /// its exact inverse.
    pub fn to_text(&self) -> String {
        let mut items = Vec::new();
        let mut metric = vec![
            Item::field("name", &self.metric_name),
            Item::field("dimension", self.chart.len()),
            Item::field("chart", self.chart.join(" ")),
            Item::field("signature", format!("{} {}", self.signature.0, self.signature.1)),
        ];
        for (k, v) in &self.params {
            metric.push(Item::field("param", format!("{k} {}", fe(*v))));
        }
        items.push(Item::block("metric", metric));
        items.push(Item::field("engine", &self.engine));
        items.push(Item::block(
            "tolerances",
            vec![
                Item::field("rel", fe(self.tol_rel)),
                Item::field("abs_floor", fe(self.tol_floor)),
            ],
        ));
        items.push(Item::block(
            "grid",
            self.grid
                .iter()
                .map(|p| Item::field("point", floats(p)))
                .collect(),
        ));
        let mut dets = Vec::new();
        for d in &self.detectors {
            let mut body = vec![
                Item::field("name", &d.name),
                Item::field("verdict", &d.verdict),
                Item::field("residual", fe(d.residual)),
            ];
            for (k, v) in &d.notes {
                body.push(Item::field("note", format!("{k} {v}")));
            }
            if !d.coeffs.is_empty() {
                body.push(Item::block(
                    "coeffs",
                    d.coeffs.iter().map(|row| Item::line(floats(row))).collect(),
                ));
            }
            dets.push(Item::block("detector", body));
        }
        items.push(Item::block("detectors", dets));
        if !self.golden.is_empty() {
            items.push(Item::block(
                "golden",
                self.golden
                    .iter()
                    .map(|g| {
                        let mut line = format!("{} {}", g.component, g.outcome);
                        if !g.detail.is_empty() {
                            let _ = write!(line, " {}", g.detail);
                        }
                        Item::field("entry", line)
                    })
                    .collect(),
            ));
        }
        Document { items }.to_text()
    }

    pub fn parse(src: &str) -> Result<ClassificationReport, ReportError> {
        let doc = Document::parse(src)?;
        let metric = doc.block("metric").ok_or(ReportError::Missing("metric"))?;
        let req = |items: &[Item], key: &'static str| -> Result<String, ReportError> {
            get_in(items, key)
                .map(str::to_string)
                .ok_or(ReportError::Missing(key))
        };
        let float = |field: &'static str, v: &str| -> Result<f64, ReportError> {
            v.parse().map_err(|_| ReportError::Malformed {
                field,
                value: v.to_string(),
            })
        };
        let row = |field: &'static str, v: &str| -> Result<Vec<f64>, ReportError> {
            v.split_whitespace().map(|t| float(field, t)).collect()
        };

        let name = req(metric, "name")?;
        let chart: Vec<String> = req(metric, "chart")?
            .split_whitespace()
            .map(str::to_string)
            .collect();
        let sig_raw = req(metric, "signature")?;
        let sig: Vec<usize> = sig_raw
            .split_whitespace()
            .map(|t| {
                t.parse().map_err(|_| ReportError::Malformed {
                    field: "signature",
                    value: sig_raw.clone(),
                })
            })
            .collect::<Result<_, _>>()?;
        if sig.len() != 2 {
            return Err(ReportError::Malformed {
                field: "signature",
                value: sig_raw,
            });
        }
        let mut params = Vec::new();
        for line in lines_of(metric) {
            let (key, rest) = split_key(line);
            if key == "param" {
                let (pname, pval) = split_key(rest);
                params.push((pname.to_string(), float("param", pval)?));
            }
        }

        let engine = doc.get("engine").ok_or(ReportError::Missing("engine"))?.to_string();
        let tols = doc
            .block("tolerances")
            .ok_or(ReportError::Missing("tolerances"))?;
        let tol_rel = float("rel", &req(tols, "rel")?)?;
        let tol_floor = float("abs_floor", &req(tols, "abs_floor")?)?;

        let grid_items = doc.block("grid").ok_or(ReportError::Missing("grid"))?;
        let mut grid = Vec::new();
        for line in lines_of(grid_items) {
            let (key, rest) = split_key(line);
            if key == "point" {
                grid.push(row("point", rest)?);
            }
        }

        let det_items = doc
            .block("detectors")
            .ok_or(ReportError::Missing("detectors"))?;
        let mut detectors = Vec::new();
        for item in det_items {
            let Item::Block { key, items } = item else { continue };
            if key != "detector" {
                continue;
            }
            let mut notes = Vec::new();
            for line in lines_of(items) {
                let (k, rest) = split_key(line);
                if k == "note" {
                    let (nk, nv) = split_key(rest);
                    notes.push((nk.to_string(), nv.to_string()));
                }
            }
            let coeffs = match block_in(items, "coeffs") {
                Some(rows) => lines_of(rows)
                    .map(|line| row("coeffs", line))
                    .collect::<Result<_, _>>()?,
                None => Vec::new(),
            };
            detectors.push(DetectorRecord {
                name: req(items, "name")?,
                verdict: req(items, "verdict")?,
                residual: float("residual", &req(items, "residual")?)?,
                notes,
                coeffs,
            });
        }

        let mut golden = Vec::new();
        if let Some(gitems) = doc.block("golden") {
            for line in lines_of(gitems) {
                let (key, rest) = split_key(line);
                if key != "entry" {
                    continue;
                }
                let (component, rest) = split_key(rest);
                let (outcome, detail) = split_key(rest);
                golden.push(GoldenRecord {
                    component: component.to_string(),
                    outcome: outcome.to_string(),
                    detail: detail.to_string(),
                });
            }
        }

        Ok(ClassificationReport {
            metric_name: name,
            chart,
            signature: (sig[0], sig[1]),
            params,
            engine,
            tol_rel,
            tol_floor,
            grid,
            detectors,
            golden,
        })
    }

    fn detector(&self, name: &str) -> Option<&DetectorRecord> {
        self.detectors.iter().find(|d| d.name == name)
    }

    /// Compact human-readable rendering.
    pub fn to_human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "metric {}", self.metric_name);
        let _ = writeln!(out, "  chart: {}", self.chart.join(" "));
        for (k, v) in &self.params {
            let _ = writeln!(out, "  param {k} = {v}");
        }
        let _ = writeln!(
            out,
            "  grid: {} points, tol rel {:e} floor {:e}",
            self.grid.len(),
            self.tol_rel,
            self.tol_floor
        );
        let _ = writeln!(out);

        let headline = |out: &mut String, label: &str, name: &str| {
            if let Some(d) = self.detector(name) {
                let sample = d
                    .coeffs
                    .first()
                    .filter(|row| !row.is_empty())
                    .map(|row| format!("  [{}]", floats(row)))
                    .unwrap_or_default();
                let _ = writeln!(out, "{label}: {}{sample}", d.verdict);
            }
        };
        headline(&mut out, "pseudosymmetric (R.R = L Q(g,R))", "suite.R.R");
        headline(&mut out, "weyl pseudosymmetric (C.C = L Q(g,C))", "suite.C.C");
        headline(&mut out, "scalar pseudosymmetric type", "mixed.scalar_pseudosymmetry");
        headline(&mut out, "roter", "roter");
        headline(&mut out, "generalized roter", "generalized_roter");
        headline(&mut out, "conformal 2-form recurrency", "two_form.C");
        if let Some(d) = self.detector("ein_level") {
            let level = d
                .notes
                .iter()
                .find(|(k, _)| k == "level")
                .map(|(_, v)| v.as_str())
                .unwrap_or("none");
            let _ = writeln!(out, "ein_level: {level}");
        }
        if let Some(d) = self.detector("quasi_einstein") {
            let rank = d
                .notes
                .iter()
                .find(|(k, _)| k == "rank")
                .map(|(_, v)| v.as_str())
                .unwrap_or("none");
            let _ = writeln!(out, "qe_rank: {rank}");
        }
        let _ = writeln!(out);

        let _ = writeln!(out, "detectors:");
        for d in &self.detectors {
            let mut line = format!("  {:<28} {:<8} residual {:.2e}", d.name, d.verdict, d.residual);
            for (k, v) in &d.notes {
                let _ = write!(line, "  {k}={v}");
            }
            let _ = writeln!(out, "{line}");
        }
        if !self.golden.is_empty() {
            let matched = self.golden.iter().filter(|g| g.outcome == "matched").count();
            let flips = self.golden.iter().filter(|g| g.outcome == "sign-flip").count();
            let bad: Vec<&GoldenRecord> = self
                .golden
                .iter()
                .filter(|g| g.outcome == "mismatched")
                .collect();
            let _ = writeln!(out);
            let _ = writeln!(
                out,
                "reference table: {matched} matched, {flips} sign-flagged, {} mismatched",
                bad.len()
            );
            for g in bad {
                let _ = writeln!(out, "  {} {}", g.component, g.detail);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::curvature::compute;
    use crate::metric::Tolerances;

    fn melvin_report() -> ClassificationReport {
        let entry = catalog::melvin(1.0);
        let data = compute(entry.metric.clone()).unwrap();
        let grid = entry.default_grid(Tolerances::default()).unwrap();
        build_report(&data, &grid, Some(&entry)).unwrap()
    }

    #[test]
    fn machine_form_round_trips_exactly() {
        let report = melvin_report();
        let text = report.to_text();
        let back = ClassificationReport::parse(&text).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn headline_summary_shows_the_structure() {
        let report = melvin_report();
        let human = report.to_human();
        assert!(human.contains("pseudosymmetric (R.R = L Q(g,R)): holds"));
        assert!(human.contains("roter: holds"));
        assert!(human.contains("ein_level: 2"));
        assert!(human.contains("qe_rank: 2"));
        assert!(human.contains("mismatched"));
    }

    #[test]
    fn identical_runs_serialize_identically() {
        let a = melvin_report().to_text();
        let b = melvin_report().to_text();
        assert_eq!(a, b);
    }
}
