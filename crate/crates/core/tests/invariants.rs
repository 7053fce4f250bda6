//! Cross-module numeric invariants: finite-difference checks for the formal
//! derivative, basis/contraction identities, coefficient symmetries, the
//! Hessian oracle for the first Levi form, and probe regressions on the
//! gallery scenarios.

use levilab_core::expr::{Assignment, Expr, ExprContext, Var};
use levilab_core::gallery;
use levilab_core::geometry::{multi_indices, Hypersurface, MultiIndex, TypeResult};
use levilab_core::manifold::ParamManifold;
use levilab_core::probe::{boundary_gap, complexify, germ_probe, ProbeVerdict};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// --- deterministic expression generator ------------------------------------

/// Random expression over the grammar, built to stay away from the
/// singularities of `log` and quotients: denominators are exponentials and
/// `log` only sees exponentials.
fn random_expr(rng: &mut ChaCha8Rng, n: u32, m: u32, depth: u32) -> Expr {
    if depth == 0 {
        return match rng.gen_range(0..4) {
            0 => Expr::var(Var::Holo(rng.gen_range(0..n))),
            1 => Expr::var(Var::Anti(rng.gen_range(0..n))),
            2 if m > 0 => Expr::var(Var::Param(rng.gen_range(0..m))),
            _ => Expr::constant(Complex64::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            )),
        };
    }
    match rng.gen_range(0..9) {
        0 => Expr::add(
            random_expr(rng, n, m, depth - 1),
            random_expr(rng, n, m, depth - 1),
        ),
        1 => Expr::sub(
            random_expr(rng, n, m, depth - 1),
            random_expr(rng, n, m, depth - 1),
        ),
        2 => Expr::mul(
            random_expr(rng, n, m, depth - 1),
            random_expr(rng, n, m, depth - 1),
        ),
        3 => Expr::quot(
            random_expr(rng, n, m, depth - 1),
            Expr::exp(random_expr(rng, n, m, depth.saturating_sub(2))),
        ),
        4 => Expr::pow(random_expr(rng, n, m, depth - 1), rng.gen_range(2..=4)),
        5 => Expr::sin(random_expr(rng, n, m, depth - 1)),
        6 => Expr::cos(random_expr(rng, n, m, depth - 1)),
        7 => Expr::exp(random_expr(rng, n, m, depth.saturating_sub(2))),
        _ => Expr::log(Expr::exp(random_expr(rng, n, m, depth.saturating_sub(2)))),
    }
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(0.4..1.2), rng.gen_range(-0.5..0.5)))
        .collect()
}

#[test]
fn formal_derivative_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 2u32;
    let m = 1u32;
    let h = 1e-5;
    let mut checked = 0;
    while checked < 100 {
        let e = random_expr(&mut rng, n, m, 3);
        let z = random_point(&mut rng, n as usize);
        let zb = random_point(&mut rng, n as usize);
        let t = vec![Complex64::new(rng.gen_range(0.2..1.0), 0.0)];
        let base = Assignment::free(&z, &zb, &t);
        let Ok(f0) = e.eval(&base) else { continue };
        if !f0.is_finite() || f0.norm() > 1e4 {
            continue; // keep magnitudes in the well-conditioned range
        }
        // pick a variable that occurs in the tree
        let vars = e.variables();
        if vars.is_empty() {
            continue;
        }
        let v = vars[rng.gen_range(0..vars.len())];
        let shift = |delta: f64| {
            let mut z = z.clone();
            let mut zb = zb.clone();
            let mut t = t.clone();
            match v {
                Var::Holo(j) => z[j as usize] += delta,
                Var::Anti(j) => zb[j as usize] += delta,
                Var::Param(k) => t[k as usize] += delta,
            }
            Assignment::free(&z, &zb, &t)
        };
        let (Ok(fp), Ok(fm)) = (e.eval(&shift(h)), e.eval(&shift(-h))) else {
            continue;
        };
        let fd = (fp - fm) / (2.0 * h);
        let Ok(sym) = e.derive(v).eval(&base) else {
            continue;
        };
        if !fd.is_finite() || !sym.is_finite() || fd.norm() > 1e6 {
            continue;
        }
        let rel = (sym - fd).norm() / sym.norm().max(1.0);
        assert!(rel < 1e-6, "pair {checked}: d/d{v} of {e}: sym {sym}, fd {fd}");
        checked += 1;
    }
}

#[test]
fn conjugated_derivative_symmetry_on_surface() {
    // d(conj e)/dzb_j = conj(de/dz_j) at conjugate-consistent assignments
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let e = random_expr(&mut rng, 2, 0, 3);
        let z = random_point(&mut rng, 2);
        let a = Assignment::on_surface(&z, &[]);
        let j = rng.gen_range(0..2);
        let lhs = e.conjugate().derive(Var::Anti(j)).eval(&a);
        let rhs = e.derive(Var::Holo(j)).eval(&a);
        let (Ok(lhs), Ok(rhs)) = (lhs, rhs) else { continue };
        if !lhs.is_finite() || !rhs.is_finite() {
            continue;
        }
        let diff = (lhs - rhs.conj()).norm();
        assert!(
            diff < 1e-12 * (1.0 + rhs.norm()),
            "e = {e}, j = {j}: {lhs} vs conj({rhs})"
        );
    }
}

#[test]
fn real_valued_expressions_evaluate_real_on_surface() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let e = random_expr(&mut rng, 2, 0, 2);
        // e + conj(e) and e * conj(e) are real by construction
        for real_e in [Expr::add(e.clone(), e.conjugate()), Expr::abs2(e.clone())] {
            assert!(real_e.is_formally_real());
            let z = random_point(&mut rng, 2);
            let a = Assignment::on_surface(&z, &[]);
            if let Ok(v) = real_e.eval(&a) {
                if v.is_finite() {
                    assert!(
                        v.im.abs() < 1e-12 * (1.0 + v.norm()),
                        "imag part {} of {}",
                        v.im,
                        real_e
                    );
                }
            }
        }
    }
}

// --- basis and coefficient identities on the gallery ------------------------

fn gallery_surface_points(id: &str, count: usize, seed: u64) -> (Hypersurface, Vec<Vec<Complex64>>) {
    let sc = gallery::load(id).unwrap();
    let hs = sc.hypersurface();
    let manifold = sc.manifold();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..count)
        .map(|_| {
            let x: Vec<f64> = manifold
                .domain()
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..hi))
                .collect();
            manifold.point_at(&x).unwrap()
        })
        .collect();
    (hs, points)
}

#[test]
fn basis_fields_are_tangent_at_random_surface_points() {
    for id in gallery::IDS {
        let (hs, points) = gallery_surface_points(id, 50, 17);
        for p in points {
            let grad = hs.gradient_at(&p).unwrap();
            let basis = hs.tangent_basis(&p).unwrap();
            let a = hs.assignment(&p);
            let scale = 1.0 + grad.iter().map(|g| g.norm()).fold(0.0, f64::max);
            for field in basis.fields() {
                let (holo, _) = field.eval(&a).unwrap();
                let pairing: Complex64 = holo.iter().zip(&grad).map(|(h, g)| h * g).sum();
                assert!(
                    pairing.norm() < 1e-12 * scale,
                    "{id}: <S, d rho> = {pairing} at {p:?}"
                );
            }
        }
    }
}

#[test]
fn coefficient_independent_of_derivative_slot_choice() {
    // fixture with two basis directions and a type-4 origin
    let rho = ExprContext::ambient(3)
        .parse("abs2(z1)*abs2(z2) - re(z3)")
        .unwrap();
    let hs = Hypersurface::new(3, rho).unwrap();
    let origin = vec![Complex64::new(0.0, 0.0); 3];
    let mut checked_multi_choice = 0;
    for a_ord in 1..=3u32 {
        let b_ord = 4 - a_ord;
        for alpha in multi_indices(a_ord, 2) {
            for beta in multi_indices(b_ord, 2) {
                let mus: Vec<usize> = (0..2).filter(|&mu| alpha.0[mu] >= 1).collect();
                let nus: Vec<usize> = (0..2).filter(|&nu| beta.0[nu] >= 1).collect();
                let mut values = Vec::new();
                for &mu in &mus {
                    for &nu in &nus {
                        values.push(
                            hs.levi_coefficient_with(&origin, &alpha, &beta, mu, nu)
                                .unwrap(),
                        );
                    }
                }
                if values.len() > 1 {
                    checked_multi_choice += 1;
                }
                for w in values.windows(2) {
                    assert!(
                        (w[0] - w[1]).norm() < 1e-9 * (1.0 + w[0].norm()),
                        "alpha {alpha:?} beta {beta:?}: {values:?}"
                    );
                }
            }
        }
    }
    assert!(checked_multi_choice >= 8, "fixture exercised {checked_multi_choice} multi-choice pairs");
}

#[test]
fn levi_coefficients_are_hermitian_on_gallery() {
    for id in gallery::IDS {
        let (hs, points) = gallery_surface_points(id, 3, 23);
        let parts = {
            let sc = gallery::load(id).unwrap();
            sc.n - 1
        };
        for p in points {
            for a_ord in 1..=2u32 {
                for b_ord in 1..=2u32 {
                    for alpha in multi_indices(a_ord, parts) {
                        for beta in multi_indices(b_ord, parts) {
                            let ab = hs.levi_coefficient(&p, &alpha, &beta).unwrap();
                            let ba = hs.levi_coefficient(&p, &beta, &alpha).unwrap();
                            assert!(
                                (ab - ba.conj()).norm() < 1e-9 * (1.0 + ab.norm()),
                                "{id}: a[{alpha:?},{beta:?}] = {ab} vs conj a[{beta:?},{alpha:?}] = {ba}"
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn first_levi_form_matches_hessian_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for id in gallery::IDS {
        let sc = gallery::load(id).unwrap();
        let (hs, points) = gallery_surface_points(id, 20, 31);
        // independent route: complex Hessian of rho contracted with the
        // ambient representative of the tangent vector
        let hessian: Vec<Vec<Expr>> = (0..sc.n)
            .map(|j| {
                (0..sc.n)
                    .map(|k| hs.rho().derive(Var::Holo(j as u32)).derive(Var::Anti(k as u32)))
                    .collect()
            })
            .collect();
        for p in points {
            let basis = hs.tangent_basis(&p).unwrap();
            let a = hs.assignment(&p);
            let zeta: Vec<Complex64> = (0..sc.n - 1)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            // xi = sum zeta_j S_j|_p
            let mut xi = vec![Complex64::new(0.0, 0.0); sc.n];
            for (j, z) in zeta.iter().enumerate() {
                let (holo, _) = basis.field(j).eval(&a).unwrap();
                for (slot, h) in xi.iter_mut().zip(&holo) {
                    *slot += z * h;
                }
            }
            let mut oracle = Complex64::new(0.0, 0.0);
            for j in 0..sc.n {
                for k in 0..sc.n {
                    oracle += hessian[j][k].eval(&a).unwrap() * xi[j] * xi[k].conj();
                }
            }
            let direct = hs.levi_form(&p, 1, &zeta).unwrap();
            assert!(
                (direct.value - oracle.re).abs() < 1e-9 * (1.0 + oracle.norm()),
                "{id} at {p:?}: levi {} vs hessian {}",
                direct.value,
                oracle.re
            );
            assert!(oracle.im.abs() < 1e-9 * (1.0 + oracle.norm()));
        }
    }
}

#[test]
fn levi_forms_vanish_below_the_type_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    // points of type 4 in the gallery
    let cases = [
        ("ex4_2", vec![0.0]),
        ("ex4_5", vec![0.0]),
        ("ex4_5", vec![1.0]),
        ("model_n3", vec![0.0]),
    ];
    for (id, x) in cases {
        let sc = gallery::load(id).unwrap();
        let hs = sc.hypersurface();
        let p = sc.manifold().point_at(&x).unwrap();
        let report = hs.bloom_graham_type(&p, 8).unwrap();
        let TypeResult::Finite(m) = report.result else {
            panic!("{id}: expected finite type");
        };
        assert_eq!(m, 4, "{id}");
        for k in 1..m - 1 {
            for _ in 0..3 {
                let zeta: Vec<Complex64> = (0..sc.n - 1)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                let v = hs.levi_form(&p, k, &zeta).unwrap();
                assert!(
                    v.value.abs() < 1e-9 * report.scale,
                    "{id}: L^{k} = {} should vanish below type {m}",
                    v.value
                );
            }
        }
    }
}

#[test]
fn first_levi_matrix_positive_semidefinite_on_gallery() {
    use nalgebra::DMatrix;
    for id in gallery::IDS {
        let sc = gallery::load(id).unwrap();
        let (hs, points) = gallery_surface_points(id, 5, 41);
        let dim = sc.n - 1;
        for p in points {
            let mut mat = DMatrix::<Complex64>::zeros(dim, dim);
            let mut scale = 1.0f64;
            for j in 0..dim {
                for k in 0..dim {
                    let a = hs
                        .levi_coefficient(&p, &MultiIndex::unit(dim, j), &MultiIndex::unit(dim, k))
                        .unwrap();
                    mat[(j, k)] = a;
                    scale = scale.max(a.norm());
                }
            }
            let eig = mat.symmetric_eigen();
            for lambda in eig.eigenvalues.iter() {
                assert!(
                    *lambda >= -1e-9 * scale,
                    "{id}: eigenvalue {lambda} at {p:?}"
                );
            }
        }
    }
}

// --- manifold checks ---------------------------------------------------------

#[test]
fn totally_real_equivalent_to_nonvanishing_velocity_for_curves() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let ctx = ExprContext::parameters(&["t".to_string()]);
    for _ in 0..100 {
        // random cubic curve in C^2; half the samples force a critical point at 0
        let coeffs: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let force_critical = rng.gen_bool(0.5);
        let lin = if force_critical { 0.0 } else { coeffs[6] };
        let c1 = format!("{} + {}*t + {}*t^2 + {}*t^3", coeffs[0], lin, coeffs[1], coeffs[2]);
        let c2 = format!(
            "{} + {}*t + {}*t^2 + {}*t^3",
            coeffs[3],
            if force_critical { 0.0 } else { coeffs[7] },
            coeffs[4],
            coeffs[5]
        );
        let curve = ParamManifold::new(
            vec!["t".to_string()],
            vec![ctx.parse(&c1).unwrap(), ctx.parse(&c2).unwrap()],
            vec![(-1.0, 1.0)],
        )
        .unwrap();
        let x = if force_critical { 0.0 } else { rng.gen_range(-1.0..1.0) };
        let frame = curve.tangent_frame(&[x]).unwrap();
        let speed = (frame[(0, 0)].norm_sqr() + frame[(1, 0)].norm_sqr()).sqrt();
        let (ok, _, _) = curve.totally_real_at(&[x]).unwrap();
        assert_eq!(ok, speed > 0.0, "speed {speed} at t = {x}: {c1}; {c2}");
    }
}

#[test]
fn tangency_residual_invariant_under_reparametrization() {
    let sc = gallery::load("ex4_3").unwrap();
    let hs = sc.hypersurface();
    let slow = sc.manifold();
    // theta -> 2 theta
    let ctx = ExprContext::parameters(&["theta".to_string()]);
    let fast = ParamManifold::new(
        vec!["theta".to_string()],
        vec![
            ctx.parse("sin(2*theta)^4 + cos(2*theta)^4 + 1").unwrap(),
            ctx.parse("1").unwrap(),
            ctx.parse("sin(2*theta)").unwrap(),
            ctx.parse("cos(2*theta)").unwrap(),
        ],
        vec![(-1.5, 1.5)],
    )
    .unwrap();
    for x in [0.3, 0.7, 1.1] {
        let (_, r_slow) = slow.complex_tangency_at(&hs, &[2.0 * x]).unwrap();
        let (_, r_fast) = fast.complex_tangency_at(&hs, &[x]).unwrap();
        assert!(
            (r_slow - r_fast).abs() <= 1e-12,
            "residuals {r_slow} vs {r_fast} at x = {x}"
        );
    }
}

// --- probe regressions --------------------------------------------------------

#[test]
fn gap_symmetric_under_parameter_conjugation() {
    for id in ["ex4_2", "ex4_3"] {
        let sc = gallery::load(id).unwrap();
        let hs = sc.hypersurface();
        let gamma = complexify(&sc.manifold()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..20 {
            let zeta = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            let u = boundary_gap(&hs, &gamma, &[zeta]).unwrap();
            let uc = boundary_gap(&hs, &gamma, &[zeta.conj()]).unwrap();
            assert!(
                (u - uc).abs() < 1e-12 * (1.0 + u.abs()),
                "{id}: u({zeta}) = {u}, u(conj) = {uc}"
            );
        }
    }
}

#[test]
fn halving_tau_preserves_gallery_verdicts() {
    for id in gallery::IDS {
        let sc = gallery::load(id).unwrap();
        let hs = sc.hypersurface();
        let gamma = complexify(&sc.manifold()).unwrap();
        let spec = sc.settings.probe_spec();
        let full = germ_probe(&hs, &gamma, &spec).unwrap();
        let mut halved = spec.clone();
        halved.tau /= 2.0;
        let half = germ_probe(&hs, &gamma, &halved).unwrap();
        if full.verdict == ProbeVerdict::Obstruction {
            assert_eq!(half.verdict, ProbeVerdict::Obstruction, "{id}");
        } else {
            assert_eq!(half.verdict, ProbeVerdict::Clear, "{id}");
        }
    }
}

#[test]
fn probe_clear_on_the_type_four_circle() {
    let sc = gallery::load("ex4_5").unwrap();
    let hs = sc.hypersurface();
    let gamma = complexify(&sc.manifold()).unwrap();
    let outcome = germ_probe(&hs, &gamma, &sc.settings.probe_spec()).unwrap();
    assert_eq!(outcome.verdict, ProbeVerdict::Clear);
    assert!(outcome.min_u > 0.0);
    assert!(outcome.skipped.is_empty());
}

#[test]
fn gap_vanishes_on_real_grid_for_every_gallery_scenario() {
    for id in gallery::IDS {
        let sc = gallery::load(id).unwrap();
        let hs = sc.hypersurface();
        let manifold = sc.manifold();
        let gamma = complexify(&manifold).unwrap();
        for x in sc.settings.grid_spec().points(manifold.domain()) {
            let zeta: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let u = boundary_gap(&hs, &gamma, &zeta).unwrap();
            assert!(u.abs() < 1e-12, "{id}: u({x:?}) = {u}");
        }
    }
}

// --- biholomorphic invariance --------------------------------------------------

#[test]
fn type_invariant_under_cayley_type_map() {
    // unbounded model: rho = |z2|^4 - re z1 with the curve (t^4, t);
    // bounded model: |w1|^2 + |w2|^4 - 1 with the image points under
    // (z1, z2) -> ((z1-1)/(z1+1), sqrt(2) z2 / sqrt(z1+1))
    let sc = gallery::load("ex4_2").unwrap();
    let hs_model = sc.hypersurface();
    let curve = sc.manifold();

    let rho_ball = ExprContext::ambient(2)
        .parse("abs2(z1) + abs2(z2)^2 - 1")
        .unwrap();
    let hs_ball = Hypersurface::new(2, rho_ball).unwrap();

    for t in [0.0, 0.5, -0.5] {
        let p = curve.point_at(&[t]).unwrap();
        let report_model = hs_model.bloom_graham_type(&p, 8).unwrap();

        let z1 = p[0];
        let z2 = p[1];
        let w1 = (z1 - 1.0) / (z1 + 1.0);
        let w2 = Complex64::new(2.0f64.sqrt(), 0.0) * z2 / (z1 + 1.0).sqrt();
        let q = vec![w1, w2];
        let report_ball = hs_ball.bloom_graham_type(&q, 8).unwrap();

        assert_eq!(
            report_model.result, report_ball.result,
            "type mismatch at t = {t}: model {:?} vs ball {:?}",
            report_model.result, report_ball.result
        );
        let expected = if t == 0.0 { 4 } else { 2 };
        assert_eq!(report_model.result, TypeResult::Finite(expected));
    }
}
