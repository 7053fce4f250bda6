//! Checks on a parametrized submanifold of the hypersurface: totally real,
//! complex tangency, constant type, positivity of the higher Levi form along
//! `i * d(gamma)`, and the aggregated verdict.

use crate::error::{GeometryError, ManifoldError};
use crate::expr::{Assignment, Evaluator, Expr, Var};
use crate::geometry::{Hypersurface, TypeReport, TypeResult};
use crate::pool;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

/// A parametrized real-analytic submanifold `gamma : box -> C^n`.
///
/// Components are expressions in the declared parameters only; the domain
/// is a closed box in parameter space.
#[derive(Debug)]
pub struct ParamManifold {
    m: usize,
    components: Vec<Expr>,
    /// d(component_j)/d(param_k), row-major by component
    frame: Vec<Vec<Expr>>,
    domain: Vec<(f64, f64)>,
    param_names: Vec<String>,
}

impl ParamManifold {
    pub fn new(
        param_names: Vec<String>,
        components: Vec<Expr>,
        domain: Vec<(f64, f64)>,
    ) -> Result<ParamManifold, ManifoldError> {
        let m = param_names.len();
        assert!(m >= 1, "at least one parameter required");
        assert_eq!(domain.len(), m, "domain box must have one interval per parameter");
        for (index, c) in components.iter().enumerate() {
            if c.variables()
                .iter()
                .any(|v| matches!(v, Var::Holo(_) | Var::Anti(_)))
            {
                return Err(ManifoldError::AmbientInComponent { index });
            }
        }
        let frame = components
            .iter()
            .map(|c| (0..m).map(|k| c.derive(Var::Param(k as u32))).collect())
            .collect();
        Ok(ParamManifold {
            m,
            components,
            frame,
            domain,
            param_names,
        })
    }

    pub fn param_count(&self) -> usize {
        self.m
    }

    pub fn ambient_dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn param_names(&self) -> &[String] {
        &self.param_names
    }

    /// `gamma(x)` for a real parameter point.
    pub fn point_at(&self, x: &[f64]) -> Result<Vec<Complex64>, ManifoldError> {
        let a = Assignment::params_real(x);
        let mut ev = Evaluator::new(&a);
        Ok(self
            .components
            .iter()
            .map(|c| ev.eval(c))
            .collect::<Result<Vec<_>, _>>()?)
    }

    /// `d gamma(x)` as an `n x m` complex matrix (columns are parameter
    /// directions).
    pub fn tangent_frame(&self, x: &[f64]) -> Result<DMatrix<Complex64>, ManifoldError> {
        let a = Assignment::params_real(x);
        let mut ev = Evaluator::new(&a);
        let n = self.ambient_dim();
        let mut mat = DMatrix::zeros(n, self.m);
        for (j, row) in self.frame.iter().enumerate() {
            for (k, e) in row.iter().enumerate() {
                mat[(j, k)] = ev.eval(e)?;
            }
        }
        Ok(mat)
    }

    /// Totally-real test at `x`: the `2m` real vectors
    /// `{d gamma e_k, i d gamma e_k}` must be linearly independent over the
    /// reals. Returns the smallest singular value of the stacked real
    /// `2n x 2m` matrix together with the pass/fail decision at threshold
    /// `1e-8 * sigma_max`.
    pub fn totally_real_at(&self, x: &[f64]) -> Result<(bool, f64, f64), ManifoldError> {
        let frame = self.tangent_frame(x)?;
        let n = self.ambient_dim();
        let mut real = DMatrix::<f64>::zeros(2 * n, 2 * self.m);
        for k in 0..self.m {
            for j in 0..n {
                let v = frame[(j, k)];
                real[(j, k)] = v.re;
                real[(j + n, k)] = v.im;
                // multiplication by i: (re, im) -> (-im, re)
                real[(j, k + self.m)] = -v.im;
                real[(j + n, k + self.m)] = v.re;
            }
        }
        let svd = real.svd(false, false);
        let smin = svd.singular_values.iter().cloned().fold(f64::MAX, f64::min);
        let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let ok = smax > 0.0 && smin > 1e-8 * smax;
        Ok((ok, smin, smax))
    }

    /// Complex-tangency test at `x`: for each parameter direction, the
    /// pairing of `d gamma e_k` with the holomorphic gradient of `rho`
    /// must vanish. Returns the largest normalized residual.
    pub fn complex_tangency_at(
        &self,
        hs: &Hypersurface,
        x: &[f64],
    ) -> Result<(bool, f64), ManifoldError> {
        let p = self.point_at(x)?;
        hs.check_on_surface(&p)?;
        let grad = hs.gradient_at(&p)?;
        let grad_norm = grad.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let frame = self.tangent_frame(x)?;
        let mut worst = 0.0f64;
        for k in 0..self.m {
            let col_norm = (0..self.ambient_dim())
                .map(|j| frame[(j, k)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if col_norm == 0.0 {
                continue; // degenerate column; the totally-real test fails on it
            }
            let pairing: Complex64 = (0..self.ambient_dim())
                .map(|j| frame[(j, k)] * grad[j])
                .sum();
            worst = worst.max(pairing.norm() / (grad_norm * col_norm));
        }
        Ok((worst <= hs.tolerances().eps_tangency, worst))
    }
}

/// Sample layout for grid scans.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct GridSpec {
    /// sample count per parameter axis
    pub per_axis: Vec<usize>,
    /// direction sample count on the unit sphere (used when `m > 1`)
    pub directions: usize,
}

impl GridSpec {
    pub fn uniform(m: usize, count: usize) -> GridSpec {
        GridSpec {
            per_axis: vec![count; m],
            directions: 64,
        }
    }

    /// Grid points in row-major index order. A single-count axis samples
    /// the interval midpoint.
    pub fn points(&self, domain: &[(f64, f64)]) -> Vec<Vec<f64>> {
        assert_eq!(self.per_axis.len(), domain.len());
        let axes: Vec<Vec<f64>> = domain
            .iter()
            .zip(&self.per_axis)
            .map(|(&(lo, hi), &count)| linspace(lo, hi, count))
            .collect();
        let mut out = vec![Vec::new()];
        for axis in &axes {
            let mut next = Vec::with_capacity(out.len() * axis.len());
            for prefix in &out {
                for &v in axis {
                    let mut p = prefix.clone();
                    p.push(v);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 1, "grid axis needs at least one sample");
    if count == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
        .collect()
}

/// Deterministic unit directions in `R^m`.
///
/// For curves the two orientations suffice (the scanned form has even
/// homogeneity, both are kept anyway). Higher parameter counts use a
/// golden-angle spiral, extended past three dimensions by a small seeded
/// generator; all choices are fixed, so scans are reproducible.
pub fn unit_directions(m: usize, count: usize) -> Vec<Vec<f64>> {
    match m {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => {
            let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
            (0..count)
                .map(|k| {
                    let phi = 2.0 * std::f64::consts::PI * (k as f64 / golden).fract();
                    vec![phi.cos(), phi.sin()]
                })
                .collect()
        }
        3 => (0..count)
            .map(|k| {
                let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
                let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = 2.0 * std::f64::consts::PI * (k as f64 / golden).fract();
                vec![r * phi.cos(), r * phi.sin(), z]
            })
            .collect(),
        _ => {
            // fixed-seed multiplicative generator with Box-Muller pairs
            let mut state = 0x9e3779b97f4a7c15u64;
            let mut next = move || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64) / ((1u64 << 53) as f64)
            };
            (0..count)
                .map(|_| {
                    let mut v: Vec<f64> = (0..m)
                        .map(|_| {
                            let (u1, u2): (f64, f64) = (next().max(1e-12), next());
                            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
                        })
                        .collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
                    v.iter_mut().for_each(|x| *x /= norm);
                    v
                })
                .collect()
        }
    }
}

/// Type-scan outcome over a grid.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TypeScan {
    Constant {
        #[serde(rename = "type")]
        type_: u32,
    },
    Varying {
        /// grid point attaining the maximal type
        witness_high: (Vec<f64>, TypeResult),
        /// first later (or else earlier) grid point with a different type
        witness_low: (Vec<f64>, TypeResult),
    },
    /// some grid point exceeded the bracket-length bound
    Undetermined {
        witness: (Vec<f64>, TypeResult),
    },
}

/// Aggregated result of the interpolation-manifold hypothesis checks.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Verdict {
    pub totally_real: bool,
    /// min over the grid of sigma_min/sigma_max for the stacked real frame
    pub totally_real_metric: f64,
    pub complex_tangential: bool,
    /// max over the grid of the normalized tangency residual
    pub tangency_residual: f64,
    pub type_scan: TypeScan,
    /// min of the order-(M-1) Levi form along `i d(gamma) v`; `None` when
    /// the scan was skipped
    pub positivity_min: Option<f64>,
    pub theorem_holds: bool,
    pub notes: Vec<String>,
}

/// Per-grid-point records kept for reporting.
#[derive(Clone, Debug, serde::Serialize)]
pub struct PointRecord {
    pub params: Vec<f64>,
    pub type_result: TypeResult,
    /// order-(M-1) Levi form along `i d(gamma) v`, minimized over the
    /// direction sample (present only when the positivity scan ran)
    pub levi_min: Option<f64>,
}

/// Verdict plus the per-point data it was derived from.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ScanOutcome {
    pub verdict: Verdict,
    pub points: Vec<PointRecord>,
}

/// Scan the grid and decide every hypothesis of the interpolation-manifold
/// criterion. Positivity is only scanned when the type is constant and the
/// tangency check passed; the verdict notes say so otherwise.
pub fn theorem_verdict(
    hs: &Hypersurface,
    manifold: &ParamManifold,
    grid: &GridSpec,
    max_order: u32,
) -> Result<ScanOutcome, ManifoldError> {
    let points = grid.points(manifold.domain());
    let mut notes = Vec::new();
    if points.len() == 1 {
        notes.push("degenerate single-point grid: results are point data, not a scan".to_string());
    }
    notes.push(format!(
        "sampling certificate: {} grid point(s), per-axis counts {:?}",
        points.len(),
        grid.per_axis
    ));

    struct PerPoint {
        totally_real: bool,
        tr_ratio: f64,
        tangency_residual: f64,
        type_report: TypeReport,
    }

    let per_point: Vec<PerPoint> = pool::pool().install(|| {
        points
            .par_iter()
            .map(|x| -> Result<PerPoint, ManifoldError> {
                let (tr_ok, smin, smax) = manifold.totally_real_at(x)?;
                let (_ct_ok, residual) = manifold.complex_tangency_at(hs, x)?;
                let p = manifold.point_at(x)?;
                let type_report = hs.bloom_graham_type(&p, max_order)?;
                Ok(PerPoint {
                    totally_real: tr_ok,
                    tr_ratio: if smax > 0.0 { smin / smax } else { 0.0 },
                    tangency_residual: residual,
                    type_report,
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    let totally_real = per_point.iter().all(|r| r.totally_real);
    let tr_metric = per_point
        .iter()
        .map(|r| r.tr_ratio)
        .fold(f64::MAX, f64::min);
    let tangency_residual = per_point
        .iter()
        .map(|r| r.tangency_residual)
        .fold(0.0f64, f64::max);
    let complex_tangential = tangency_residual <= hs.tolerances().eps_tangency;

    let type_scan = summarize_types(&points, &per_point.iter().map(|r| &r.type_report).collect::<Vec<_>>());

    let mut positivity_min = None;
    let mut levi_mins: Vec<Option<f64>> = vec![None; points.len()];
    match (&type_scan, complex_tangential) {
        (TypeScan::Constant { type_ }, true) if *type_ >= 2 => {
            let order = type_ - 1;
            let dirs = unit_directions(manifold.param_count(), grid.directions);
            let values: Vec<f64> = pool::pool().install(|| {
                points
                    .par_iter()
                    .map(|x| positivity_at(hs, manifold, x, order, &dirs))
                    .collect::<Result<Vec<_>, _>>()
            })?;
            for (slot, v) in levi_mins.iter_mut().zip(&values) {
                *slot = Some(*v);
            }
            positivity_min = values.iter().cloned().reduce(f64::min);
        }
        (TypeScan::Constant { .. }, false) => {
            notes.push("positivity scan skipped: complex tangency failed".to_string());
        }
        (TypeScan::Varying { .. }, _) => {
            notes.push("positivity scan skipped: varying type".to_string());
        }
        (TypeScan::Undetermined { .. }, _) => {
            notes.push("positivity scan skipped: type exceeded max order".to_string());
        }
        _ => {}
    }

    match &type_scan {
        TypeScan::Varying { .. } => notes.push("varying type".to_string()),
        TypeScan::Undetermined { .. } => notes.push("type undetermined at max order".to_string()),
        _ => {}
    }

    let theorem_holds = totally_real
        && complex_tangential
        && matches!(type_scan, TypeScan::Constant { .. })
        && positivity_min.map(|v| v > 0.0).unwrap_or(false);

    let records = points
        .iter()
        .zip(&per_point)
        .zip(&levi_mins)
        .map(|((x, r), levi)| PointRecord {
            params: x.clone(),
            type_result: r.type_report.result.clone(),
            levi_min: *levi,
        })
        .collect();

    Ok(ScanOutcome {
        verdict: Verdict {
            totally_real,
            totally_real_metric: tr_metric,
            complex_tangential,
            tangency_residual,
            type_scan,
            positivity_min,
            theorem_holds,
            notes,
        },
        points: records,
    })
}

/// Minimum of the order-`order` Levi form along `i d(gamma) v` over the
/// direction sample at one grid point.
pub fn positivity_at(
    hs: &Hypersurface,
    manifold: &ParamManifold,
    x: &[f64],
    order: u32,
    dirs: &[Vec<f64>],
) -> Result<f64, ManifoldError> {
    let p = manifold.point_at(x)?;
    let frame = manifold.tangent_frame(x)?;
    let n = manifold.ambient_dim();
    let mut min_v = f64::MAX;
    for d in dirs {
        let mut xi = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for (k, &dk) in d.iter().enumerate() {
                xi[j] += frame[(j, k)] * dk;
            }
            xi[j] *= Complex64::new(0.0, 1.0);
        }
        let zeta = hs.identify_tangent(&p, &xi).map_err(propagate)?;
        let v = hs.levi_form(&p, order, &zeta).map_err(propagate)?;
        min_v = min_v.min(v.value);
    }
    Ok(min_v)
}

fn propagate(e: GeometryError) -> ManifoldError {
    ManifoldError::Geometry(e)
}

/// Run the per-point types down to a constant/varying/undetermined summary.
fn summarize_types(points: &[Vec<f64>], reports: &[&TypeReport]) -> TypeScan {
    for (x, r) in points.iter().zip(reports) {
        if let TypeResult::ExceedsMaxOrder(_) = r.result {
            return TypeScan::Undetermined {
                witness: (x.clone(), r.result.clone()),
            };
        }
    }
    let types: Vec<u32> = reports
        .iter()
        .map(|r| match r.result {
            TypeResult::Finite(m) => m,
            TypeResult::ExceedsMaxOrder(_) => unreachable!(),
        })
        .collect();
    let max = *types.iter().max().expect("nonempty grid");
    let min = *types.iter().min().expect("nonempty grid");
    if max == min {
        return TypeScan::Constant { type_: max };
    }
    let hi = types.iter().position(|&t| t == max).unwrap();
    let lo = types
        .iter()
        .enumerate()
        .skip(hi + 1)
        .find(|(_, &t)| t != max)
        .map(|(i, _)| i)
        .or_else(|| {
            types
                .iter()
                .enumerate()
                .rev()
                .find(|(_, &t)| t != max)
                .map(|(i, _)| i)
        })
        .expect("varying grid has a second type");
    TypeScan::Varying {
        witness_high: (points[hi].clone(), reports[hi].result.clone()),
        witness_low: (points[lo].clone(), reports[lo].result.clone()),
    }
}
