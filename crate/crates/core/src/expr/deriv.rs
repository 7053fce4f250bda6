//! Formal Wirtinger differentiation.
//!
//! `z_j`, `zb_j` and parameters are treated as independent variables, so the
//! derivative is the ordinary formal one with sum/product/quotient/chain
//! rules. Shared subtrees are differentiated once per call via a
//! pointer-keyed memo table.

use super::{Expr, Kind, Var};
use std::collections::HashMap;

impl Expr {
    /// Formal partial derivative with respect to `v`.
    pub fn derive(&self, v: Var) -> Expr {
        let mut memo: HashMap<usize, Expr> = HashMap::new();
        derive_memo(self, v, &mut memo)
    }
}

fn derive_memo(e: &Expr, v: Var, memo: &mut HashMap<usize, Expr>) -> Expr {
    if let Some(d) = memo.get(&e.ptr()) {
        return d.clone();
    }
    let d = match &e.0.kind {
        Kind::Const(_) => Expr::zero(),
        Kind::Var(w) => {
            if *w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Kind::Sum(xs) => Expr::sum(xs.iter().map(|x| derive_memo(x, v, memo)).collect()),
        Kind::Prod(xs) => {
            let terms = xs
                .iter()
                .enumerate()
                .map(|(i, xi)| {
                    let di = derive_memo(xi, v, memo);
                    if di.is_zero() {
                        return Expr::zero();
                    }
                    let mut fs: Vec<Expr> = Vec::with_capacity(xs.len());
                    for (j, xj) in xs.iter().enumerate() {
                        fs.push(if i == j { di.clone() } else { xj.clone() });
                    }
                    Expr::product(fs)
                })
                .collect();
            Expr::sum(terms)
        }
        Kind::Quot(a, b) => {
            let da = derive_memo(a, v, memo);
            let db = derive_memo(b, v, memo);
            if db.is_zero() {
                Expr::quot(da, b.clone())
            } else {
                let num = Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a.clone(), db));
                Expr::quot(num, Expr::pow(b.clone(), 2))
            }
        }
        Kind::Pow(b, k) => {
            let db = derive_memo(b, v, memo);
            Expr::product(vec![Expr::real(*k as f64), Expr::pow(b.clone(), k - 1), db])
        }
        Kind::Sin(x) => Expr::mul(Expr::cos(x.clone()), derive_memo(x, v, memo)),
        Kind::Cos(x) => Expr::neg(Expr::mul(Expr::sin(x.clone()), derive_memo(x, v, memo))),
        Kind::Exp(x) => Expr::mul(e.clone(), derive_memo(x, v, memo)),
        Kind::Log(x) => Expr::quot(derive_memo(x, v, memo), x.clone()),
    };
    memo.insert(e.ptr(), d.clone());
    d
}
