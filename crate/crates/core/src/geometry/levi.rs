//! Higher-order Levi forms from iterated field derivatives of bracket
//! contractions, and the identification of ambient tangent vectors with
//! basis coordinates.

use super::{vec_norm, Hypersurface, MultiIndex, TangentBasis};
use crate::error::GeometryError;
use crate::expr::{Evaluator, Expr};
use crate::geometry::multi_indices;
use num_complex::Complex64;

/// A Levi form value; the imaginary part of the assembled sum is discarded
/// but its magnitude is reported.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct LeviValue {
    pub k: u32,
    pub value: f64,
    pub imag_residual: f64,
}

impl Hypersurface {
    /// Coefficient `a_{alpha beta}(p)` with the smallest admissible choice
    /// of derivative slots.
    pub fn levi_coefficient(
        &self,
        p: &[Complex64],
        alpha: &MultiIndex,
        beta: &MultiIndex,
    ) -> Result<Complex64, GeometryError> {
        let mu = alpha.first_positive().ok_or(GeometryError::ZeroMultiIndex)?;
        let nu = beta.first_positive().ok_or(GeometryError::ZeroMultiIndex)?;
        self.levi_coefficient_with(p, alpha, beta, mu, nu)
    }

    /// Coefficient `a_{alpha beta}(p)` for an explicit admissible `(mu, nu)`:
    /// `- S^(alpha*mu) Sb^(beta*nu) <[S_mu, Sb_nu], dbar rho> (p)`.
    ///
    /// The value is independent of the admissible choice; the explicit form
    /// exists so that independence can be verified.
    pub fn levi_coefficient_with(
        &self,
        p: &[Complex64],
        alpha: &MultiIndex,
        beta: &MultiIndex,
        mu: usize,
        nu: usize,
    ) -> Result<Complex64, GeometryError> {
        if alpha.is_zero() || beta.is_zero() || alpha.0[mu] == 0 || beta.0[nu] == 0 {
            return Err(GeometryError::ZeroMultiIndex);
        }
        self.check_on_surface(p)?;
        let pivot = self.pivot_at(p)?;
        let expr = self.levi_coefficient_expr(pivot, alpha, beta, mu, nu);
        let a = self.assignment(p);
        let v = expr.eval(&a)?;
        Ok(-v)
    }

    /// The symbolic part of a Levi coefficient (without the leading minus),
    /// cached per `(pivot, alpha*mu, beta*nu, mu, nu)`.
    fn levi_coefficient_expr(
        &self,
        pivot: usize,
        alpha: &MultiIndex,
        beta: &MultiIndex,
        mu: usize,
        nu: usize,
    ) -> Expr {
        let amu = alpha.star(mu);
        let bnu = beta.star(nu);
        let key = (pivot, amu.0.clone(), bnu.0.clone(), mu, nu);
        if let Some(e) = self.levi_cache.lock().unwrap().get(&key) {
            return e.clone();
        }
        let basis = self.basis_for_pivot(pivot);
        let s_mu = basis.field(mu);
        let sb_nu = basis.field(nu).conjugate();
        let base = self.dbar_contraction(&s_mu.commutator(&sb_nu));

        // Operator composition acts right to left: the conjugate block is
        // innermost, and within each block the highest index is innermost.
        let mut expr = base;
        for j in (0..basis.len()).rev() {
            let f = basis.field(j).conjugate();
            for _ in 0..bnu.0[j] {
                expr = f.apply(&expr);
            }
        }
        for j in (0..basis.len()).rev() {
            let f = basis.field(j);
            for _ in 0..amu.0[j] {
                expr = f.apply(&expr);
            }
        }
        self.levi_cache.lock().unwrap().insert(key, expr.clone());
        expr
    }

    /// The `k`-th Levi form at `p` applied to the tangent vector with
    /// basis coordinates `zeta`:
    /// `sum a_{alpha beta}(p) / (alpha! beta!) zeta^alpha conj(zeta)^beta`
    /// over `|alpha| + |beta| = k + 1`, `1 <= |beta| < k + 1`.
    pub fn levi_form(
        &self,
        p: &[Complex64],
        k: u32,
        zeta: &[Complex64],
    ) -> Result<LeviValue, GeometryError> {
        assert!(k >= 1, "Levi form order must be at least 1");
        assert_eq!(zeta.len(), self.ambient_dim() - 1, "zeta length mismatch");
        self.check_on_surface(p)?;
        let pivot = self.pivot_at(p)?;
        let parts = self.ambient_dim() - 1;
        let a = self.assignment(p);
        let mut ev = Evaluator::new(&a);

        let mut total = Complex64::new(0.0, 0.0);
        for a_ord in 1..=k {
            let b_ord = k + 1 - a_ord;
            for alpha in multi_indices(a_ord, parts) {
                for beta in multi_indices(b_ord, parts) {
                    let mu = alpha.first_positive().expect("order >= 1");
                    let nu = beta.first_positive().expect("order >= 1");
                    let expr = self.levi_coefficient_expr(pivot, &alpha, &beta, mu, nu);
                    let coeff = -ev.eval(&expr)?;
                    if coeff == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let weight = alpha.factorial() * beta.factorial();
                    total += coeff * zeta_pow(zeta, &alpha) * zeta_pow_conj(zeta, &beta) / weight;
                }
            }
        }
        Ok(LeviValue {
            k,
            value: total.re,
            imag_residual: total.im.abs(),
        })
    }

    /// Identify an ambient vector `xi` lying in the complex tangent space at
    /// `p` with its coordinates in the tangent basis: the unique `zeta` with
    /// `xi = sum zeta_j S_j|_p`.
    pub fn identify_tangent(
        &self,
        p: &[Complex64],
        xi: &[Complex64],
    ) -> Result<Vec<Complex64>, GeometryError> {
        assert_eq!(xi.len(), self.ambient_dim(), "xi length mismatch");
        let tol = self.tolerances();
        let grad = self.gradient_at(p)?;
        let xi_norm = vec_norm(xi);
        if xi_norm == 0.0 {
            return Ok(vec![Complex64::new(0.0, 0.0); self.ambient_dim() - 1]);
        }
        let pairing: Complex64 = xi.iter().zip(&grad).map(|(x, g)| x * g).sum();
        let grad_norm = vec_norm(&grad);
        let residual = pairing.norm() / (xi_norm * grad_norm);
        if residual > tol.eps_tangency {
            return Err(GeometryError::NotInComplexTangent { residual });
        }

        let basis = self.tangent_basis(p)?;
        let zeta = self.basis_coordinates(&basis, p, xi)?;
        Ok(zeta)
    }

    /// Solve `xi = sum zeta_j S_j|_p` coordinatewise: the non-pivot slots
    /// give `zeta` directly, then the reconstructed pivot slot must match.
    fn basis_coordinates(
        &self,
        basis: &TangentBasis,
        p: &[Complex64],
        xi: &[Complex64],
    ) -> Result<Vec<Complex64>, GeometryError> {
        let tol = self.tolerances();
        let a = self.assignment(p);
        let mut ev = Evaluator::new(&a);
        let mut zeta = Vec::with_capacity(basis.len());
        for &slot in basis.non_pivot_slots() {
            zeta.push(xi[slot]);
        }
        let mut recon = Complex64::new(0.0, 0.0);
        for (j, z) in zeta.iter().enumerate() {
            let f = ev.eval(basis.field(j).holo_coeff(basis.pivot()))?;
            recon += z * f;
        }
        let xi_norm = vec_norm(xi);
        let err = (recon - xi[basis.pivot()]).norm();
        if err > tol.eps_tangency * (1.0 + xi_norm) {
            return Err(GeometryError::NotInComplexTangent {
                residual: err / (1.0 + xi_norm),
            });
        }
        Ok(zeta)
    }
}

fn zeta_pow(zeta: &[Complex64], mi: &MultiIndex) -> Complex64 {
    zeta.iter()
        .zip(&mi.0)
        .map(|(z, &a)| z.powi(a as i32))
        .product()
}

fn zeta_pow_conj(zeta: &[Complex64], mi: &MultiIndex) -> Complex64 {
    zeta.iter()
        .zip(&mi.0)
        .map(|(z, &a)| z.conj().powi(a as i32))
        .product()
}
