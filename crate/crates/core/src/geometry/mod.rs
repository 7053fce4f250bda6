//! Holomorphic tangent bases, vector fields and bracket machinery on a
//! real-analytic hypersurface `{rho = 0}` with the domain on `{rho < 0}`.

mod brackets;
mod levi;

pub use brackets::{Gen, TypeReport, TypeResult};
pub use levi::LeviValue;

use crate::error::GeometryError;
use crate::expr::{Assignment, Evaluator, Expr, Var};
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Numeric thresholds, all configurable per scenario.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// threshold below which a scaled magnitude counts as zero
    pub eps_zero: f64,
    /// maximum |rho(p)| for a point to count as on-surface
    pub eps_on_surface: f64,
    /// relative residual for membership in the complex tangent space
    pub eps_tangency: f64,
}

impl Default for Tolerances {
    fn default() -> Tolerances {
        Tolerances {
            eps_zero: 1e-9,
            eps_on_surface: 1e-9,
            eps_tangency: 1e-8,
        }
    }
}

/// A complexified tangent field, `sum holo_j d/dz_j + sum anti_j d/dzb_j`.
#[derive(Clone, Debug)]
pub struct VectorField {
    holo: Vec<Expr>,
    anti: Vec<Expr>,
}

impl VectorField {
    pub fn new(holo: Vec<Expr>, anti: Vec<Expr>) -> VectorField {
        assert_eq!(holo.len(), anti.len(), "coefficient slot count mismatch");
        VectorField { holo, anti }
    }

    /// A (1,0)-field from its `d/dz_j` coefficients.
    pub fn holomorphic(holo: Vec<Expr>) -> VectorField {
        let n = holo.len();
        VectorField {
            holo,
            anti: vec![Expr::zero(); n],
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.holo.len()
    }

    pub fn holo_coeff(&self, j: usize) -> &Expr {
        &self.holo[j]
    }

    pub fn anti_coeff(&self, j: usize) -> &Expr {
        &self.anti[j]
    }

    /// Conjugate field: swaps the `d/dz` and `d/dzb` slots and conjugates
    /// the coefficients.
    pub fn conjugate(&self) -> VectorField {
        VectorField {
            holo: self.anti.iter().map(|e| e.conjugate()).collect(),
            anti: self.holo.iter().map(|e| e.conjugate()).collect(),
        }
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.holo.iter().chain(&self.anti).all(|e| e.is_zero())
    }

    /// Apply the field to a scalar expression as a first-order operator.
    pub fn apply(&self, e: &Expr) -> Expr {
        let mut terms = Vec::new();
        for (j, c) in self.holo.iter().enumerate() {
            if !c.is_zero() {
                terms.push(Expr::mul(c.clone(), e.derive(Var::Holo(j as u32))));
            }
        }
        for (j, c) in self.anti.iter().enumerate() {
            if !c.is_zero() {
                terms.push(Expr::mul(c.clone(), e.derive(Var::Anti(j as u32))));
            }
        }
        Expr::sum(terms)
    }

    /// Lie bracket `[self, other]`, componentwise over all `2n` slots.
    /// Structurally equal slot contributions cancel exactly, so `[V, V]`
    /// is the zero field.
    pub fn commutator(&self, other: &VectorField) -> VectorField {
        fn slot(a: Expr, b: Expr) -> Expr {
            if a == b {
                Expr::zero()
            } else {
                Expr::sub(a, b)
            }
        }
        let n = self.ambient_dim();
        let mut holo = Vec::with_capacity(n);
        let mut anti = Vec::with_capacity(n);
        for j in 0..n {
            holo.push(slot(
                self.apply(&other.holo[j]),
                other.apply(&self.holo[j]),
            ));
            anti.push(slot(
                self.apply(&other.anti[j]),
                other.apply(&self.anti[j]),
            ));
        }
        VectorField { holo, anti }
    }

    /// Numeric coefficients at an assignment, `(holo, anti)`.
    pub fn eval(
        &self,
        a: &Assignment,
    ) -> Result<(Vec<Complex64>, Vec<Complex64>), crate::error::EvalError> {
        let mut ev = Evaluator::new(a);
        let holo = self
            .holo
            .iter()
            .map(|e| ev.eval(e))
            .collect::<Result<Vec<_>, _>>()?;
        let anti = self
            .anti
            .iter()
            .map(|e| ev.eval(e))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((holo, anti))
    }
}

/// A multi-index over the `n-1` basis directions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(parts: usize) -> MultiIndex {
        MultiIndex(vec![0; parts])
    }

    pub fn unit(parts: usize, j: usize) -> MultiIndex {
        let mut v = vec![0; parts];
        v[j] = 1;
        MultiIndex(v)
    }

    /// `|alpha|`
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `alpha!`
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| (1..=a as u64).product::<u64>() as f64)
            .product()
    }

    /// Decrement slot `mu` when positive; the zero multi-index otherwise.
    pub fn star(&self, mu: usize) -> MultiIndex {
        if self.0[mu] >= 1 {
            let mut v = self.0.clone();
            v[mu] -= 1;
            MultiIndex(v)
        } else {
            MultiIndex::zero(self.0.len())
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Smallest slot with a positive entry.
    pub fn first_positive(&self) -> Option<usize> {
        self.0.iter().position(|&a| a >= 1)
    }
}

/// All multi-indices with `parts` slots summing to `order`.
pub fn multi_indices(order: u32, parts: usize) -> Vec<MultiIndex> {
    fn rec(order: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if parts == 1 {
            prefix.push(order);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for a in 0..=order {
            prefix.push(a);
            rec(order - a, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        return out;
    }
    rec(order, parts, &mut Vec::new(), &mut out);
    out
}

/// Basis of `(1,0)` tangent fields valid where the pivot derivative of
/// `rho` does not vanish: `S_j = d/dz_j - (rho_{z_j}/rho_{z_pivot}) d/dz_pivot`
/// for each non-pivot slot `j`.
#[derive(Clone, Debug)]
pub struct TangentBasis {
    pivot: usize,
    non_pivot: Vec<usize>,
    fields: Vec<VectorField>,
}

impl TangentBasis {
    pub fn pivot(&self) -> usize {
        self.pivot
    }

    /// Ambient coordinate slots the basis fields are indexed by, in order.
    pub fn non_pivot_slots(&self) -> &[usize] {
        &self.non_pivot
    }

    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    pub fn field(&self, j: usize) -> &VectorField {
        &self.fields[j]
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }
}

pub(crate) type LeviKey = (usize, Vec<u32>, Vec<u32>, usize, usize);

/// A hypersurface `{rho = 0}` in complex dimension `n`, oriented so the
/// domain of interest is `{rho < 0}`.
pub struct Hypersurface {
    n: usize,
    rho: Expr,
    grad_holo: Vec<Expr>,
    grad_anti: Vec<Expr>,
    tol: Tolerances,
    pub(crate) bracket_cache: Mutex<HashMap<usize, brackets::LevelStore>>,
    pub(crate) levi_cache: Mutex<HashMap<LeviKey, Expr>>,
    pub(crate) basis_cache: Mutex<HashMap<usize, Arc<TangentBasis>>>,
}

impl Hypersurface {
    /// Validates that `rho` is formally real and free of parameters, and
    /// precomputes its Wirtinger gradient.
    pub fn new(n: usize, rho: Expr) -> Result<Hypersurface, GeometryError> {
        Hypersurface::with_tolerances(n, rho, Tolerances::default())
    }

    pub fn with_tolerances(
        n: usize,
        rho: Expr,
        tol: Tolerances,
    ) -> Result<Hypersurface, GeometryError> {
        assert!(n >= 2, "ambient dimension must be at least 2");
        if rho
            .variables()
            .iter()
            .any(|v| matches!(v, Var::Param(_)))
        {
            return Err(GeometryError::ParamInDefining);
        }
        if !rho.is_formally_real() {
            return Err(GeometryError::NotRealValued);
        }
        let grad_holo: Vec<Expr> = (0..n).map(|j| rho.derive(Var::Holo(j as u32))).collect();
        let grad_anti: Vec<Expr> = (0..n).map(|j| rho.derive(Var::Anti(j as u32))).collect();
        Ok(Hypersurface {
            n,
            rho,
            grad_holo,
            grad_anti,
            tol,
            bracket_cache: Mutex::new(HashMap::new()),
            levi_cache: Mutex::new(HashMap::new()),
            basis_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> &Expr {
        &self.rho
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    pub fn set_tolerances(&mut self, tol: Tolerances) {
        self.tol = tol;
    }

    /// `rho_{z_j}` as expressions.
    pub fn grad_holo(&self) -> &[Expr] {
        &self.grad_holo
    }

    /// `rho_{zb_j}` as expressions.
    pub fn grad_anti(&self) -> &[Expr] {
        &self.grad_anti
    }

    pub fn assignment(&self, p: &[Complex64]) -> Assignment {
        Assignment::on_surface(p, &[])
    }

    /// `rho(p)` for an ambient point bound on-surface.
    pub fn rho_at(&self, p: &[Complex64]) -> Result<Complex64, GeometryError> {
        Ok(self.rho.eval(&self.assignment(p))?)
    }

    /// Checks `|rho(p)| < eps_on_surface`.
    pub fn check_on_surface(&self, p: &[Complex64]) -> Result<(), GeometryError> {
        let r = self.rho_at(p)?;
        if r.norm() >= self.tol.eps_on_surface {
            return Err(GeometryError::OffSurface {
                point: format_point(p),
                rho: r.norm(),
                eps: self.tol.eps_on_surface,
            });
        }
        Ok(())
    }

    /// Numeric holomorphic gradient `(rho_{z_1},...,rho_{z_n})(p)`.
    pub fn gradient_at(&self, p: &[Complex64]) -> Result<Vec<Complex64>, GeometryError> {
        let a = self.assignment(p);
        let mut ev = Evaluator::new(&a);
        Ok(self
            .grad_holo
            .iter()
            .map(|e| ev.eval(e))
            .collect::<Result<Vec<_>, _>>()?)
    }

    /// Pivot slot at `p`: the coordinate with the largest `|rho_{z_j}(p)|`.
    pub fn pivot_at(&self, p: &[Complex64]) -> Result<usize, GeometryError> {
        let grad = self.gradient_at(p)?;
        let (pivot, mag) = grad
            .iter()
            .enumerate()
            .map(|(j, g)| (j, g.norm()))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if mag <= self.tol.eps_zero {
            return Err(GeometryError::SingularPoint {
                point: format_point(p),
                eps: self.tol.eps_zero,
            });
        }
        Ok(pivot)
    }

    /// Symbolic basis for a given pivot slot, cached.
    pub fn basis_for_pivot(&self, pivot: usize) -> Arc<TangentBasis> {
        let mut cache = self.basis_cache.lock().unwrap();
        cache
            .entry(pivot)
            .or_insert_with(|| {
                let rp = self.grad_holo[pivot].clone();
                let mut non_pivot = Vec::new();
                let mut fields = Vec::new();
                for j in 0..self.n {
                    if j == pivot {
                        continue;
                    }
                    let mut holo = vec![Expr::zero(); self.n];
                    holo[j] = Expr::one();
                    holo[pivot] =
                        Expr::quot(Expr::neg(self.grad_holo[j].clone()), rp.clone());
                    non_pivot.push(j);
                    fields.push(VectorField::holomorphic(holo));
                }
                Arc::new(TangentBasis {
                    pivot,
                    non_pivot,
                    fields,
                })
            })
            .clone()
    }

    /// Holomorphic tangent basis at `p` (pivot chosen by largest gradient
    /// entry). Fails at singular points.
    pub fn tangent_basis(&self, p: &[Complex64]) -> Result<Arc<TangentBasis>, GeometryError> {
        let pivot = self.pivot_at(p)?;
        Ok(self.basis_for_pivot(pivot))
    }

    /// Contraction `< V , dbar rho >`: only the `d/dzb` slots pair with the
    /// antiholomorphic differential.
    pub fn dbar_contraction(&self, field: &VectorField) -> Expr {
        let terms = (0..self.n)
            .filter(|&j| !field.anti[j].is_zero())
            .map(|j| Expr::mul(field.anti[j].clone(), self.grad_anti[j].clone()))
            .collect();
        Expr::sum(terms)
    }
}

pub(crate) fn format_point(p: &[Complex64]) -> String {
    let parts: Vec<String> = p
        .iter()
        .map(|c| format!("{:.6}{:+.6}i", c.re, c.im))
        .collect();
    format!("({})", parts.join(", "))
}

pub(crate) fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}
