//! Structural properties of the expression engine over generated trees.

use levilab_core::expr::{Expr, ExprContext, Var};
use num_complex::Complex64;
use proptest::prelude::*;

fn leaf() -> BoxedStrategy<Expr> {
    prop_oneof![
        (0u32..2).prop_map(|j| Expr::var(Var::Holo(j))),
        (0u32..2).prop_map(|j| Expr::var(Var::Anti(j))),
        (0u32..1).prop_map(|k| Expr::var(Var::Param(k))),
        ((-4i32..=4), (-4i32..=4))
            .prop_map(|(a, b)| Expr::constant(Complex64::new(a as f64 / 2.0, b as f64 / 2.0))),
    ]
    .boxed()
}

fn expr_strategy() -> BoxedStrategy<Expr> {
    leaf().prop_recursive(4, 48, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| {
                // avoid literal-zero denominators; all other shapes allowed
                if b.is_zero() {
                    a
                } else {
                    Expr::quot(a, b)
                }
            }),
            (inner.clone(), 2i32..4).prop_map(|(b, k)| Expr::pow(b, k)),
            inner.clone().prop_map(Expr::sin),
            inner.clone().prop_map(Expr::cos),
            inner.clone().prop_map(Expr::exp),
            inner.clone().prop_map(|e| Expr::log(Expr::exp(e))),
            inner.clone().prop_map(|e| Expr::re(e)),
            inner.clone().prop_map(|e| Expr::im(e)),
            inner.prop_map(|e| Expr::abs2(e)),
        ]
    })
    .boxed()
}

proptest! {
    #[test]
    fn conjugation_is_an_involution(e in expr_strategy()) {
        prop_assert_eq!(e.conjugate().conjugate(), e);
    }

    #[test]
    fn normalize_is_idempotent_and_preserves_trees(e in expr_strategy()) {
        let n1 = e.normalize();
        let n2 = n1.normalize();
        prop_assert_eq!(&n1, &e);
        prop_assert_eq!(&n2, &n1);
    }

    #[test]
    fn abs2_and_re_are_formally_real(e in expr_strategy()) {
        prop_assert!(Expr::abs2(e.clone()).is_formally_real());
        prop_assert!(Expr::re(e).is_formally_real());
    }

    #[test]
    fn display_reparses_to_the_same_tree(e in expr_strategy()) {
        let ctx = ExprContext {
            n: 2,
            params: vec!["t1".to_string()],
            constants: vec![],
        };
        let printed = e.to_string();
        let reparsed = ctx.parse(&printed);
        prop_assert!(reparsed.is_ok(), "failed to reparse `{}`: {:?}", printed, reparsed.err());
        prop_assert_eq!(reparsed.unwrap(), e, "printed `{}`", printed);
    }
}
