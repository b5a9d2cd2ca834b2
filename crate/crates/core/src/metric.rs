//! Coordinate charts, metric specifications, inversion, signature checks and
//! deterministic sample grids.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::expr::{EvalError, Expr, Scope};

/// An ordered coordinate system. Indices shown to users are 1-based to match
/// the component-table notation used throughout the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub coords: Vec<String>,
}

impl Chart {
    pub fn new(coords: &[&str]) -> Chart {
        Chart {
            coords: coords.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// A metric given by closed-form components over a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    pub name: String,
    pub chart: Chart,
    /// Lower-index components g_{ab}, stored dense and symmetric.
    pub g: Vec<Vec<Expr>>,
    /// Declared parameter defaults (overridable at evaluation time).
    pub params: BTreeMap<String, f64>,
    /// Declared signature as (negative count, positive count).
    pub signature: (usize, usize),
    /// Expressions required to be strictly positive at every sample point.
    pub domain: Vec<Expr>,
    /// Expressions required to be bounded away from zero at sample points
    /// (loci where fitted-coefficient denominators degenerate).
    pub exceptional: Vec<Expr>,
}

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("chart must have at least 3 coordinates, got {0}")]
    DimensionTooSmall(usize),
    #[error("duplicate coordinate name '{0}'")]
    DuplicateCoordinate(String),
    #[error("component matrix is {rows}x{cols}, expected {n}x{n}")]
    BadShape { rows: usize, cols: usize, n: usize },
    #[error("components are not symmetric at ({a},{b})")]
    NotSymmetric { a: usize, b: usize },
    #[error("metric determinant is identically zero")]
    DegenerateSymbolic,
    #[error("metric is degenerate at {point}: {detail}")]
    DegeneratePoint { point: String, detail: String },
    #[error("signature at {point} is ({found_neg},{found_pos}), declared ({neg},{pos})")]
    SignatureMismatch {
        point: String,
        found_neg: usize,
        found_pos: usize,
        neg: usize,
        pos: usize,
    },
    #[error("no sample points survive the domain and exceptional-locus filters")]
    EmptyGrid,
    #[error("evaluation failed at {point}: {source}")]
    Eval {
        point: String,
        #[source]
        source: EvalError,
    },
}

/// Relative tolerance and absolute floor used by every pointwise verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rel: 1e-8,
            abs_floor: 1e-12,
        }
    }
}

/// A deterministic list of coordinate points plus the tolerance context.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    pub points: Vec<Vec<f64>>,
    pub tol: Tolerances,
}

/// Candidate values tried, in order, for every coordinate the metric actually
/// depends on. The first eight survive the filters for the built-in metrics
/// with default parameters; the tail only matters when a filter removes
/// primaries.
pub const GRID_CANDIDATES: [f64; 18] = [
    0.5, 0.8, 1.0, 1.3, 1.7, 2.5, 3.0, 4.0, 0.6, 0.9, 1.1, 1.4, 1.9, 2.2, 2.7, 3.4, 4.5, 5.0,
];

const GRID_TARGET: usize = 8;
const LOCUS_EPS: f64 = 1e-8;

impl MetricSpec {
    pub fn n(&self) -> usize {
        self.chart.dim()
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        let n = self.n();
        if n < 3 {
            return Err(MetricError::DimensionTooSmall(n));
        }
        for (i, c) in self.chart.coords.iter().enumerate() {
            if self.chart.coords[..i].contains(c) {
                return Err(MetricError::DuplicateCoordinate(c.clone()));
            }
        }
        if self.g.len() != n || self.g.iter().any(|row| row.len() != n) {
            return Err(MetricError::BadShape {
                rows: self.g.len(),
                cols: self.g.first().map_or(0, |r| r.len()),
                n,
            });
        }
        for a in 0..n {
            for b in (a + 1)..n {
                if self.g[a][b] != self.g[b][a] {
                    return Err(MetricError::NotSymmetric { a: a + 1, b: b + 1 });
                }
            }
        }
        Ok(())
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.n();
        (0..n).all(|a| (0..n).all(|b| a == b || self.g[a][b].is_zero()))
    }

    /// Symbolic determinant by cofactor expansion (dimensions here are tiny).
    pub fn det(&self) -> Expr {
        det_expr(&self.g)
    }

    /// Symbolic inverse metric g^{ab}: reciprocal entries when diagonal,
    /// adjugate over determinant otherwise.
    pub fn inverse(&self) -> Result<Vec<Vec<Expr>>, MetricError> {
        let n = self.n();
        if self.is_diagonal() {
            let mut inv = vec![vec![Expr::zero(); n]; n];
            for a in 0..n {
                if self.g[a][a].is_zero() {
                    return Err(MetricError::DegenerateSymbolic);
                }
                inv[a][a] = Expr::one().div(&self.g[a][a]);
            }
            return Ok(inv);
        }
        let det = self.det();
        if det.is_zero() {
            return Err(MetricError::DegenerateSymbolic);
        }
        let mut inv = vec![vec![Expr::zero(); n]; n];
        for a in 0..n {
            for b in 0..n {
                // Cofactor C_{ba} / det; the metric is symmetric so the
                // transpose in the adjugate is cosmetic.
                let minor = minor_matrix(&self.g, b, a);
                let cof = det_expr(&minor);
                let signed = if (a + b) % 2 == 0 { cof } else { cof.neg() };
                inv[a][b] = signed.div(&det);
            }
        }
        Ok(inv)
    }

    /// Bindings for a coordinate point, with parameter defaults merged in.
    pub fn scope_at(&self, point: &[f64]) -> Scope {
        let mut scope: Scope = self
            .params
            .iter()
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        for (name, value) in self.chart.coords.iter().zip(point) {
            scope.insert(name.clone(), *value);
        }
        scope
    }

    pub fn eval_matrix(&self, point: &[f64]) -> Result<DMatrix<f64>, MetricError> {
        let n = self.n();
        let scope = self.scope_at(point);
        let mut m = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                m[(a, b)] = self.g[a][b].eval(&scope).map_err(|source| MetricError::Eval {
                    point: fmt_point(&self.chart, point),
                    source,
                })?;
            }
        }
        Ok(m)
    }

    /// Eigenvalue signs of the numeric metric at a point; errors when any
    /// eigenvalue sits inside the degeneracy band.
    pub fn signature_at(&self, point: &[f64]) -> Result<(usize, usize), MetricError> {
        let m = self.eval_matrix(point)?;
        let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
        let eig = m.symmetric_eigen();
        let cutoff = 1e-10 * scale;
        let mut neg = 0;
        let mut pos = 0;
        for &ev in eig.eigenvalues.iter() {
            if ev.abs() <= cutoff {
                return Err(MetricError::DegeneratePoint {
                    point: fmt_point(&self.chart, point),
                    detail: format!("eigenvalue {ev:e} within degeneracy cutoff {cutoff:e}"),
                });
            }
            if ev < 0.0 {
                neg += 1;
            } else {
                pos += 1;
            }
        }
        Ok((neg, pos))
    }

    /// Checks invertibility and declared signature at one point.
    pub fn check_point(&self, point: &[f64]) -> Result<(), MetricError> {
        let m = self.eval_matrix(point)?;
        let n = self.n();
        let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
        let det = m.determinant();
        if det.abs() <= 1e-10 * scale.powi(n as i32) {
            return Err(MetricError::DegeneratePoint {
                point: fmt_point(&self.chart, point),
                detail: format!("|det| = {:e} below cutoff", det.abs()),
            });
        }
        let (neg, pos) = self.signature_at(point)?;
        if (neg, pos) != self.signature {
            return Err(MetricError::SignatureMismatch {
                point: fmt_point(&self.chart, point),
                found_neg: neg,
                found_pos: pos,
                neg: self.signature.0,
                pos: self.signature.1,
            });
        }
        Ok(())
    }

    /// Coordinates the metric components actually depend on.
    pub fn active_coords(&self) -> Vec<usize> {
        let mut used = std::collections::BTreeSet::new();
        for row in &self.g {
            for e in row {
                used.extend(e.symbols());
            }
        }
        self.chart
            .coords
            .iter()
            .enumerate()
            .filter(|(_, name)| used.contains(*name))
            .map(|(i, _)| i)
            .collect()
    }

    fn point_with(&self, active: &[usize], value: f64) -> Vec<f64> {
        let mut p = vec![0.0; self.n()];
        for &i in active {
            p[i] = value;
        }
        p
    }

    /// True when the point passes the domain predicates and stays clear of
    /// the given exceptional loci.
    fn admits_point(&self, point: &[f64], loci: &[Expr]) -> bool {
        let scope = self.scope_at(point);
        for d in &self.domain {
            match d.eval(&scope) {
                Ok(v) if v > 0.0 => {}
                _ => return false,
            }
        }
        for e in loci {
            match e.eval(&scope) {
                Ok(v) if v.abs() > LOCUS_EPS => {}
                _ => return false,
            }
        }
        true
    }

    /// Exceptional loci that actually discriminate somewhere on the default
    /// sampling line. A locus expression that vanishes at every default
    /// candidate is structural (identically zero along the line, as happens
    /// for conformally flat profiles) and filtering on it would empty every
    /// grid, so it is dropped. Probing always uses the default candidates so
    /// a narrow user-requested grid cannot disguise a genuine locus.
    fn effective_loci(&self) -> Vec<Expr> {
        let active = self.active_coords();
        let probes: Vec<Vec<f64>> = GRID_CANDIDATES
            .iter()
            .map(|&v| self.point_with(&active, v))
            .collect();
        self.exceptional
            .iter()
            .filter(|e| {
                probes.iter().any(|p| {
                    e.eval(&self.scope_at(p))
                        .map(|v| v.abs() > LOCUS_EPS)
                        .unwrap_or(false)
                })
            })
            .cloned()
            .collect()
    }

    /// Deterministic grid: walk the fixed candidate list, set every active
    /// coordinate to the candidate value, keep points passing the filters,
    /// and stop once eight are collected (taking more if the primaries were
    /// thinned out).
    pub fn default_grid(&self, tol: Tolerances) -> Result<SampleGrid, MetricError> {
        let active = self.active_coords();
        let candidates: Vec<Vec<f64>> = GRID_CANDIDATES
            .iter()
            .map(|&v| self.point_with(&active, v))
            .collect();
        let loci = self.effective_loci();
        let mut points = Vec::new();
        for p in candidates {
            if self.admits_point(&p, &loci) {
                points.push(p);
            }
            if points.len() >= GRID_TARGET {
                break;
            }
        }
        if points.is_empty() {
            return Err(MetricError::EmptyGrid);
        }
        Ok(SampleGrid { points, tol })
    }

    /// Grid from explicit per-coordinate value lists (CLI `--grid`); the
    /// domain and exceptional-locus filters still apply. Coordinates absent
    /// from `axes` fall back to the default candidates when the metric
    /// depends on them and to 0 otherwise.
    pub fn explicit_grid(
        &self,
        axes: &[(String, Vec<f64>)],
        tol: Tolerances,
    ) -> Result<SampleGrid, MetricError> {
        let active = self.active_coords();
        let mut per_coord: Vec<Vec<f64>> = Vec::new();
        for (i, name) in self.chart.coords.iter().enumerate() {
            if let Some((_, vals)) = axes.iter().find(|(k, _)| k == name) {
                per_coord.push(vals.clone());
            } else if active.contains(&i) {
                per_coord.push(GRID_CANDIDATES[..GRID_TARGET].to_vec());
            } else {
                per_coord.push(vec![0.0]);
            }
        }
        let mut candidates = vec![Vec::new()];
        for vals in &per_coord {
            let mut next = Vec::new();
            for stem in &candidates {
                for &v in vals {
                    let mut p: Vec<f64> = stem.clone();
                    p.push(v);
                    next.push(p);
                }
            }
            candidates = next;
        }
        let loci = self.effective_loci();
        let points: Vec<Vec<f64>> = candidates
            .into_iter()
            .filter(|p| self.admits_point(p, &loci))
            .collect();
        if points.is_empty() {
            return Err(MetricError::EmptyGrid);
        }
        Ok(SampleGrid { points, tol })
    }
}

pub fn fmt_point(chart: &Chart, point: &[f64]) -> String {
    chart
        .coords
        .iter()
        .zip(point)
        .map(|(name, v)| format!("{name}={v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn minor_matrix(m: &[Vec<Expr>], skip_row: usize, skip_col: usize) -> Vec<Vec<Expr>> {
    m.iter()
        .enumerate()
        .filter(|(r, _)| *r != skip_row)
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|(c, _)| *c != skip_col)
                .map(|(_, e)| e.clone())
                .collect()
        })
        .collect()
}

fn det_expr(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    match n {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = Expr::zero();
            for c in 0..n {
                if m[0][c].is_zero() {
                    continue;
                }
                let sub = det_expr(&minor_matrix(m, 0, c));
                let term = m[0][c].mul(&sub);
                acc = if c % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn melvin_like() -> MetricSpec {
        let u2 = Expr::parse("(1 + B0^2*r^2/4)^2").unwrap();
        let mut params = BTreeMap::new();
        params.insert("B0".to_string(), 1.0);
        MetricSpec {
            name: "test".to_string(),
            chart: Chart::new(&["t", "r", "z", "phi"]),
            g: vec![
                vec![u2.neg(), Expr::zero(), Expr::zero(), Expr::zero()],
                vec![Expr::zero(), u2.clone(), Expr::zero(), Expr::zero()],
                vec![Expr::zero(), Expr::zero(), u2.clone(), Expr::zero()],
                vec![
                    Expr::zero(),
                    Expr::zero(),
                    Expr::zero(),
                    Expr::parse("r^2/(1 + B0^2*r^2/4)^2").unwrap(),
                ],
            ],
            params,
            signature: (1, 3),
            domain: vec![Expr::sym("r")],
            exceptional: vec![Expr::parse("4 - B0^2*r^2").unwrap()],
        }
    }

    #[test]
    fn inverse_of_diagonal_metric() {
        let m = melvin_like();
        m.validate().unwrap();
        let inv = m.inverse().unwrap();
        let scope = m.scope_at(&[0.0, 1.0, 0.0, 0.0]);
        // g^{44} = U^2/r^2 with U = 1.25.
        assert!((inv[3][3].eval(&scope).unwrap() - 1.5625).abs() < 1e-12);
        assert!((inv[0][0].eval(&scope).unwrap() + 0.64).abs() < 1e-12);
        for a in 0..4 {
            for b in 0..4 {
                if a != b {
                    assert!(inv[a][b].is_zero());
                }
            }
        }
    }

    #[test]
    fn inverse_of_full_matrix_contracts_to_identity() {
        let mut m = melvin_like();
        // Perturb with an off-diagonal coupling so the adjugate path runs.
        let c = Expr::parse("r/5").unwrap();
        m.g[0][2] = c.clone();
        m.g[2][0] = c;
        m.validate().unwrap();
        let inv = m.inverse().unwrap();
        let point = [0.0, 1.3, 0.0, 0.0];
        let scope = m.scope_at(&point);
        let g = m.eval_matrix(&point).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let mut acc = 0.0;
                for c in 0..4 {
                    acc += inv[a][c].eval(&scope).unwrap() * g[(c, b)];
                }
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (acc - expect).abs() < 1e-12,
                    "delta({a},{b}) = {acc}"
                );
            }
        }
    }

    #[test]
    fn signature_checks() {
        let m = melvin_like();
        assert_eq!(m.signature_at(&[0.0, 1.0, 0.0, 0.0]).unwrap(), (1, 3));
        m.check_point(&[0.0, 1.0, 0.0, 0.0]).unwrap();
        // Degenerate at r = 0 (the phi-phi entry collapses).
        assert!(matches!(
            m.signature_at(&[0.0, 0.0, 0.0, 0.0]),
            Err(MetricError::DegeneratePoint { .. })
        ));
    }

    #[test]
    fn default_grid_is_the_documented_eight_points() {
        let m = melvin_like();
        let grid = m.default_grid(Tolerances::default()).unwrap();
        let rs: Vec<f64> = grid.points.iter().map(|p| p[1]).collect();
        assert_eq!(rs, vec![0.5, 0.8, 1.0, 1.3, 1.7, 2.5, 3.0, 4.0]);
        assert!(grid.points.iter().all(|p| p[0] == 0.0 && p[2] == 0.0 && p[3] == 0.0));
    }

    #[test]
    fn grid_filters_exceptional_points_and_refills() {
        let mut m = melvin_like();
        // Declare a locus that kills the candidate r = 1.
        m.exceptional.push(Expr::parse("r - 1").unwrap());
        let grid = m.default_grid(Tolerances::default()).unwrap();
        let rs: Vec<f64> = grid.points.iter().map(|p| p[1]).collect();
        assert_eq!(rs.len(), 8);
        assert!(!rs.contains(&1.0));
        assert!(rs.contains(&0.6));
    }

    #[test]
    fn structurally_zero_locus_is_ignored() {
        let mut m = melvin_like();
        m.exceptional.push(Expr::zero());
        let grid = m.default_grid(Tolerances::default()).unwrap();
        assert_eq!(grid.points.len(), 8);
    }

    #[test]
    fn explicit_grid_respects_filters() {
        let m = melvin_like();
        let err = m.explicit_grid(
            &[("r".to_string(), vec![2.0])],
            Tolerances::default(),
        );
        assert!(matches!(err, Err(MetricError::EmptyGrid)));
        let ok = m
            .explicit_grid(&[("r".to_string(), vec![0.7, 2.0])], Tolerances::default())
            .unwrap();
        assert_eq!(ok.points.len(), 1);
        assert_eq!(ok.points[0][1], 0.7);
    }
}
