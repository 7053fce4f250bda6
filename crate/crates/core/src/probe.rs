//! Complexification of the parametrized manifold and the germ contact probe.
//!
//! The components of an admissible manifold are entire in the parameters, so
//! the complexification is evaluated by binding the parameter slots to
//! complex values in the same trees. The probe samples complexified points
//! just off the real parameter locus and classifies the sign of `rho` there:
//! a contact (`|u| <= tau`) or penetration (`u < -tau`) witnesses that the
//! complexified manifold meets the closed domain away from the manifold,
//! which rules the interpolation property out. A `clear` verdict is a
//! statement about the sampled resolution only, and the report says so.

use crate::error::ManifoldError;
use crate::expr::{Assignment, Evaluator, Expr, Kind};
use crate::geometry::Hypersurface;
use crate::manifold::{unit_directions, GridSpec, ParamManifold};
use crate::pool;
use num_complex::Complex64;
use rayon::prelude::*;

/// Sampling plan for the germ probe.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ProbeSpec {
    /// per-axis sample counts for the real grid over the parameter box
    pub real_grid: Vec<usize>,
    /// shell radii for the imaginary offsets, strictly increasing
    pub radii: Vec<f64>,
    /// offset direction count (angles in the complexified parameter plane
    /// for curves, unit sphere samples otherwise)
    pub directions: usize,
    /// contact tolerance
    pub tau: f64,
}

impl ProbeSpec {
    /// Geometric shells `delta/2^(count-1), ..., delta/2, delta`.
    pub fn shells(delta: f64, count: usize) -> Vec<f64> {
        assert!(delta > 0.0 && count >= 1);
        (0..count)
            .rev()
            .map(|k| delta / (1u64 << k) as f64)
            .collect()
    }

    pub fn default_for(param_count: usize) -> ProbeSpec {
        ProbeSpec {
            real_grid: vec![9; param_count],
            radii: ProbeSpec::shells(0.5, 4),
            directions: 16,
            tau: 1e-9,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.radii.is_empty() {
            return Err("probe needs at least one shell radius".into());
        }
        if self.radii.iter().any(|&r| r <= 0.0) {
            return Err("shell radii must be positive".into());
        }
        if self.radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err("shell radii must be strictly increasing".into());
        }
        if self.tau <= 0.0 {
            return Err("contact tolerance must be positive".into());
        }
        if self.directions == 0 {
            return Err("direction count must be positive".into());
        }
        if self.real_grid.iter().any(|&c| c == 0) {
            return Err("real grid counts must be positive".into());
        }
        Ok(())
    }
}

/// The complexified manifold: the same component trees, evaluated at
/// complex parameter values.
#[derive(Debug)]
pub struct Complexification {
    components: Vec<Expr>,
    param_count: usize,
    domain: Vec<(f64, f64)>,
}

/// Validate that every component is entire in the parameters (polynomials,
/// `sin`, `cos`, `exp` and their sums/products) and wrap the manifold for
/// complex evaluation. Quotients, logarithms and negative powers are
/// rejected with the offending subtree.
pub fn complexify(manifold: &ParamManifold) -> Result<Complexification, ManifoldError> {
    for (index, c) in manifold.components().iter().enumerate() {
        if let Some(subtree) = first_non_entire(c) {
            return Err(ManifoldError::NonEntireComponent {
                index,
                subtree: subtree.to_string(),
            });
        }
    }
    Ok(Complexification {
        components: manifold.components().to_vec(),
        param_count: manifold.param_count(),
        domain: manifold.domain().to_vec(),
    })
}

fn first_non_entire(e: &Expr) -> Option<&Expr> {
    match &e.0.kind {
        Kind::Const(_) | Kind::Var(_) => None,
        Kind::Sum(xs) | Kind::Prod(xs) => xs.iter().find_map(first_non_entire),
        Kind::Quot(_, _) | Kind::Log(_) => Some(e),
        Kind::Pow(b, k) => {
            if *k < 0 {
                Some(e)
            } else {
                first_non_entire(b)
            }
        }
        Kind::Sin(x) | Kind::Cos(x) | Kind::Exp(x) => first_non_entire(x),
    }
}

impl Complexification {
    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    /// `Gamma(zeta)` at a complex parameter point.
    pub fn point_at(&self, zeta: &[Complex64]) -> Result<Vec<Complex64>, ManifoldError> {
        let a = Assignment::params_complex(zeta);
        let mut ev = Evaluator::new(&a);
        Ok(self
            .components
            .iter()
            .map(|c| ev.eval(c))
            .collect::<Result<Vec<_>, _>>()?)
    }
}

/// `u(zeta) = rho(Gamma(zeta))`, with the conjugate slots bound to the
/// numeric conjugates of the ambient point. Positive means outside the
/// closed domain, zero on the boundary, negative inside.
pub fn boundary_gap(
    hs: &Hypersurface,
    gamma: &Complexification,
    zeta: &[Complex64],
) -> Result<f64, ManifoldError> {
    let p = gamma.point_at(zeta)?;
    let a = Assignment::on_surface(&p, &[]);
    let v = hs.rho().eval(&a)?;
    Ok(v.re)
}

/// Classification of an off-real sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactClass {
    /// `|u| <= tau`: the complexified manifold touches the boundary
    Contact,
    /// `u < -tau`: the complexified manifold enters the domain
    Penetration,
}

/// One contact witness.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ContactPoint {
    /// complexified parameter, `(re, im)` per slot
    pub zeta: Vec<(f64, f64)>,
    pub u: f64,
    pub class: ContactClass,
}

/// Probe verdict over the sampled resolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeVerdict {
    /// some off-real sample met the closed domain
    Obstruction,
    /// every off-real sample stayed strictly outside (at this resolution)
    Clear,
}

/// Full probe result.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ProbeOutcome {
    pub verdict: ProbeVerdict,
    pub contacts: Vec<ContactPoint>,
    /// smallest `u` over all off-real samples
    pub min_u: f64,
    /// number of off-real samples classified
    pub samples: usize,
    /// per-sample evaluation failures (left out of the classification)
    pub skipped: Vec<String>,
    pub resolution: ProbeSpec,
}

/// Sample the germ of the complexified manifold around the real locus.
///
/// For each real grid point, each shell radius and each offset direction,
/// the probe classifies `u = rho(Gamma(zeta))`. Only samples whose offset
/// has imaginary size at least the smallest shell radius participate:
/// offsets that fall back onto the real locus sit on the manifold itself,
/// where `u = 0` carries no information.
pub fn germ_probe(
    hs: &Hypersurface,
    gamma: &Complexification,
    spec: &ProbeSpec,
) -> Result<ProbeOutcome, ManifoldError> {
    spec.validate().expect("probe spec validated by caller");
    let m = gamma.param_count();
    let grid = GridSpec {
        per_axis: spec.real_grid.clone(),
        directions: spec.directions,
    };
    let base_points = grid.points(gamma.domain());
    let r_min = spec.radii[0];

    // offsets in the complexified parameter space, shared by all grid points
    let mut offsets: Vec<Vec<Complex64>> = Vec::new();
    if m == 1 {
        for &r in &spec.radii {
            for k in 0..spec.directions {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / spec.directions as f64;
                let offset = Complex64::new(0.0, r) * Complex64::from_polar(1.0, phi);
                if offset.im.abs() >= r_min * (1.0 - 1e-12) {
                    offsets.push(vec![offset]);
                }
            }
        }
    } else {
        let dirs = unit_directions(m, spec.directions);
        for &r in &spec.radii {
            for d in &dirs {
                offsets.push(d.iter().map(|&dk| Complex64::new(0.0, r * dk)).collect());
            }
        }
    }

    struct PerPoint {
        contacts: Vec<ContactPoint>,
        min_u: f64,
        samples: usize,
        skipped: Vec<String>,
    }

    let per_point: Vec<PerPoint> = pool::pool().install(|| {
        base_points
            .par_iter()
            .map(|x| {
                let mut contacts = Vec::new();
                let mut min_u = f64::MAX;
                let mut samples = 0usize;
                let mut skipped = Vec::new();
                for offset in &offsets {
                    let zeta: Vec<Complex64> = x
                        .iter()
                        .zip(offset)
                        .map(|(&xr, &o)| Complex64::new(xr, 0.0) + o)
                        .collect();
                    let u = match boundary_gap(hs, gamma, &zeta) {
                        Ok(u) if u.is_finite() => u,
                        Ok(u) => {
                            skipped.push(format!("zeta {}: non-finite u ({u})", fmt_zeta(&zeta)));
                            continue;
                        }
                        Err(e) => {
                            skipped.push(format!("zeta {}: {e}", fmt_zeta(&zeta)));
                            continue;
                        }
                    };
                    samples += 1;
                    min_u = min_u.min(u);
                    if u.abs() <= spec.tau {
                        contacts.push(ContactPoint {
                            zeta: zeta.iter().map(|c| (c.re, c.im)).collect(),
                            u,
                            class: ContactClass::Contact,
                        });
                    } else if u < -spec.tau {
                        contacts.push(ContactPoint {
                            zeta: zeta.iter().map(|c| (c.re, c.im)).collect(),
                            u,
                            class: ContactClass::Penetration,
                        });
                    }
                }
                PerPoint {
                    contacts,
                    min_u,
                    samples,
                    skipped,
                }
            })
            .collect()
    });

    let mut contacts = Vec::new();
    let mut min_u = f64::MAX;
    let mut samples = 0usize;
    let mut skipped = Vec::new();
    for pp in per_point {
        contacts.extend(pp.contacts);
        min_u = min_u.min(pp.min_u);
        samples += pp.samples;
        skipped.extend(pp.skipped);
    }
    let verdict = if contacts.is_empty() {
        ProbeVerdict::Clear
    } else {
        ProbeVerdict::Obstruction
    };
    Ok(ProbeOutcome {
        verdict,
        contacts,
        min_u,
        samples,
        skipped,
        resolution: spec.clone(),
    })
}

fn fmt_zeta(zeta: &[Complex64]) -> String {
    let parts: Vec<String> = zeta
        .iter()
        .map(|c| format!("{:.6}{:+.6}i", c.re, c.im))
        .collect();
    format!("({})", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ExprContext;

    fn quartic_model() -> Hypersurface {
        let rho = ExprContext::ambient(2).parse("abs2(z2)^2 - re(z1)").unwrap();
        Hypersurface::new(2, rho).unwrap()
    }

    fn quartic_curve() -> ParamManifold {
        let ctx = ExprContext::parameters(&["t".to_string()]);
        ParamManifold::new(
            vec!["t".to_string()],
            vec![ctx.parse("t^4").unwrap(), ctx.parse("t").unwrap()],
            vec![(-0.5, 0.5)],
        )
        .unwrap()
    }

    #[test]
    fn complexified_quartic_curve() {
        let curve = quartic_curve();
        let gamma = complexify(&curve).unwrap();
        let zeta = [Complex64::new(0.0, 0.25)];
        let p = gamma.point_at(&zeta).unwrap();
        // (i/4)^4 = 1/256
        assert!((p[0] - Complex64::new(1.0 / 256.0, 0.0)).norm() < 1e-15);
        assert!((p[1] - Complex64::new(0.0, 0.25)).norm() < 1e-15);
    }

    #[test]
    fn non_entire_component_rejected() {
        let ctx = ExprContext::parameters(&["t".to_string()]);
        let curve = ParamManifold::new(
            vec!["t".to_string()],
            vec![ctx.parse("log(t)").unwrap(), ctx.parse("t").unwrap()],
            vec![(0.5, 1.0)],
        )
        .unwrap();
        match complexify(&curve) {
            Err(ManifoldError::NonEntireComponent { index: 0, subtree }) => {
                assert!(subtree.contains("log"));
            }
            other => panic!("expected non-entire rejection, got {other:?}"),
        }
    }

    #[test]
    fn quotient_component_rejected() {
        let ctx = ExprContext::parameters(&["t".to_string()]);
        let curve = ParamManifold::new(
            vec!["t".to_string()],
            vec![ctx.parse("1/(2 + t)").unwrap(), ctx.parse("t").unwrap()],
            vec![(-0.5, 0.5)],
        )
        .unwrap();
        assert!(matches!(
            complexify(&curve),
            Err(ManifoldError::NonEntireComponent { .. })
        ));
    }

    #[test]
    fn gap_vanishes_on_real_locus_and_imaginary_axis() {
        let hs = quartic_model();
        let gamma = complexify(&quartic_curve()).unwrap();
        // real zeta on the curve
        for t in [-0.5, 0.0, 0.3] {
            let u = boundary_gap(&hs, &gamma, &[Complex64::new(t, 0.0)]).unwrap();
            assert!(u.abs() < 1e-14, "t = {t}: u = {u}");
        }
        // u(R e^{i phi}) = R^4 (1 - cos 4 phi): vanishes on the imaginary axis
        let u = boundary_gap(&hs, &gamma, &[Complex64::new(0.0, 0.25)]).unwrap();
        assert!(u.abs() < 1e-14);
        // generic angle: strictly positive
        let z = Complex64::from_polar(0.25, 0.4);
        let u = boundary_gap(&hs, &gamma, &[z]).unwrap();
        let expect = 0.25f64.powi(4) * (1.0 - (4.0 * 0.4f64).cos());
        assert!((u - expect).abs() < 1e-12);
    }

    #[test]
    fn quartic_curve_probe_finds_imaginary_axis_contacts() {
        let hs = quartic_model();
        let gamma = complexify(&quartic_curve()).unwrap();
        let spec = ProbeSpec::default_for(1);
        let outcome = germ_probe(&hs, &gamma, &spec).unwrap();
        assert_eq!(outcome.verdict, ProbeVerdict::Obstruction);
        assert!(outcome.skipped.is_empty());
        // contacts at zeta = i r around t = 0 for every shell
        for &r in &spec.radii {
            let found = outcome.contacts.iter().any(|c| {
                (c.zeta[0].0).abs() < 1e-12 && (c.zeta[0].1 - r).abs() < 1e-12 && c.u.abs() <= spec.tau
            });
            assert!(found, "no contact at i*{r}");
        }
    }

    #[test]
    fn listed_contacts_stay_off_the_real_locus() {
        let hs = quartic_model();
        let gamma = complexify(&quartic_curve()).unwrap();
        let spec = ProbeSpec::default_for(1);
        let outcome = germ_probe(&hs, &gamma, &spec).unwrap();
        for c in &outcome.contacts {
            assert!(c.zeta[0].1.abs() >= spec.radii[0] * (1.0 - 1e-12), "{c:?}");
        }
    }

    #[test]
    fn shells_are_geometric() {
        assert_eq!(ProbeSpec::shells(0.5, 4), vec![0.0625, 0.125, 0.25, 0.5]);
    }
}
