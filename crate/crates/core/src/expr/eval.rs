//! Numeric evaluation of expression trees at complex assignments.

use super::{Expr, Kind, Var};
use crate::error::EvalError;
use num_complex::Complex64;
use std::collections::HashMap;

/// A numeric binding of every variable class.
///
/// The `on_surface` flag records that every `zb_j` slot holds the complex
/// conjugate of the `z_j` slot, which is the contract for evaluation at
/// points of the hypersurface. Parameter slots are real there; the
/// complexification probe is the one caller that binds them to complex
/// values.
#[derive(Clone, Debug)]
pub struct Assignment {
    holo: Vec<Complex64>,
    anti: Vec<Complex64>,
    params: Vec<Complex64>,
    on_surface: bool,
}

impl Assignment {
    /// On-surface assignment: `zb_j := conj(z_j)`, parameters real.
    pub fn on_surface(z: &[Complex64], params: &[f64]) -> Assignment {
        Assignment {
            holo: z.to_vec(),
            anti: z.iter().map(|c| c.conj()).collect(),
            params: params.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            on_surface: true,
        }
    }

    /// Fully general assignment; `z` and `zb` slots are independent.
    pub fn free(z: &[Complex64], zb: &[Complex64], params: &[Complex64]) -> Assignment {
        Assignment {
            holo: z.to_vec(),
            anti: zb.to_vec(),
            params: params.to_vec(),
            on_surface: false,
        }
    }

    /// Real-parameter assignment with no ambient variables.
    pub fn params_real(params: &[f64]) -> Assignment {
        Assignment {
            holo: Vec::new(),
            anti: Vec::new(),
            params: params.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            on_surface: false,
        }
    }

    /// Complex-parameter assignment used by the complexification probe.
    pub fn params_complex(params: &[Complex64]) -> Assignment {
        Assignment {
            holo: Vec::new(),
            anti: Vec::new(),
            params: params.to_vec(),
            on_surface: false,
        }
    }

    pub fn is_on_surface(&self) -> bool {
        self.on_surface
    }

    pub fn set_on_surface_flag(&mut self, v: bool) {
        self.on_surface = v;
    }

    pub fn lookup(&self, v: Var) -> Option<Complex64> {
        match v {
            Var::Holo(j) => self.holo.get(j as usize).copied(),
            Var::Anti(j) => self.anti.get(j as usize).copied(),
            Var::Param(k) => self.params.get(k as usize).copied(),
        }
    }
}

/// Evaluates a family of expressions at one assignment, sharing the memo
/// table across calls so common subtrees are computed once.
///
/// The memo table is keyed by node address, so every evaluated root is
/// retained for the evaluator's lifetime; otherwise a dropped temporary
/// could free an address that a later tree reuses.
pub struct Evaluator<'a> {
    assignment: &'a Assignment,
    memo: HashMap<usize, Complex64>,
    roots: Vec<Expr>,
}

impl<'a> Evaluator<'a> {
    pub fn new(assignment: &'a Assignment) -> Evaluator<'a> {
        Evaluator {
            assignment,
            memo: HashMap::new(),
            roots: Vec::new(),
        }
    }

    pub fn eval(&mut self, e: &Expr) -> Result<Complex64, EvalError> {
        self.roots.push(e.clone());
        self.eval_inner(e)
    }

    fn eval_inner(&mut self, e: &Expr) -> Result<Complex64, EvalError> {
        if let Some(v) = self.memo.get(&e.ptr()) {
            return Ok(*v);
        }
        let val = match &e.0.kind {
            Kind::Const(c) => *c,
            Kind::Var(v) => self
                .assignment
                .lookup(*v)
                .ok_or(EvalError::Unassigned { var: *v })?,
            Kind::Sum(xs) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for x in xs {
                    acc += self.eval_inner(x)?;
                }
                acc
            }
            Kind::Prod(xs) => {
                let mut acc = Complex64::new(1.0, 0.0);
                for x in xs {
                    acc *= self.eval_inner(x)?;
                }
                acc
            }
            Kind::Quot(a, b) => self.eval_inner(a)? / self.eval_inner(b)?,
            Kind::Pow(b, k) => self.eval_inner(b)?.powi(*k),
            Kind::Sin(x) => self.eval_inner(x)?.sin(),
            Kind::Cos(x) => self.eval_inner(x)?.cos(),
            Kind::Exp(x) => self.eval_inner(x)?.exp(),
            Kind::Log(x) => {
                let v = self.eval_inner(x)?;
                if v == Complex64::new(0.0, 0.0) {
                    return Err(EvalError::LogOfZero {
                        subtree: e.to_string(),
                    });
                }
                v.ln()
            }
        };
        self.memo.insert(e.ptr(), val);
        Ok(val)
    }
}

impl Expr {
    /// Evaluate at an assignment. IEEE double-precision complex arithmetic,
    /// principal branch for `log`.
    pub fn eval(&self, a: &Assignment) -> Result<Complex64, EvalError> {
        Evaluator::new(a).eval(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(j: u32) -> Expr {
        Expr::var(Var::Holo(j))
    }

    #[test]
    fn re_part_on_surface() {
        let e = Expr::re(z(0));
        let a = Assignment::on_surface(&[Complex64::new(2.0, 3.0)], &[]);
        let v = e.eval(&a).unwrap();
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn quartic_surface_point() {
        // abs2(z2)^2 - re(z1) at (0.0625, 0.5): the point lies on the surface
        let rho = Expr::sub(Expr::pow(Expr::abs2(z(1)), 2), Expr::re(z(0)));
        let a = Assignment::on_surface(
            &[Complex64::new(0.0625, 0.0), Complex64::new(0.5, 0.0)],
            &[],
        );
        let v = rho.eval(&a).unwrap();
        assert!(v.norm() < 1e-15, "rho = {v}");
    }

    #[test]
    fn log_on_unit_circle() {
        // log(z*zb) = 0 at z = e^{i theta}
        let e = Expr::log(Expr::mul(z(0), Expr::var(Var::Anti(0))));
        for theta in [0.0, 1.0, 2.0] {
            let p = Complex64::from_polar(1.0, theta);
            let a = Assignment::on_surface(&[p], &[]);
            let v = e.eval(&a).unwrap();
            assert!(v.norm() < 1e-14, "theta {theta}: {v}");
        }
    }

    #[test]
    fn log_of_zero_reports_subtree() {
        let e = Expr::log(Expr::mul(z(0), z(1)));
        let a = Assignment::on_surface(&[Complex64::new(0.0, 0.0); 2], &[]);
        match e.eval(&a) {
            Err(EvalError::LogOfZero { subtree }) => assert!(subtree.contains("log")),
            other => panic!("expected log-of-zero error, got {other:?}"),
        }
    }

    #[test]
    fn unassigned_variable_is_an_error() {
        let e = z(3);
        let a = Assignment::on_surface(&[Complex64::new(1.0, 0.0)], &[]);
        assert!(matches!(e.eval(&a), Err(EvalError::Unassigned { .. })));
    }
}
