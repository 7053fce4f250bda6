//! Expression trees over complex variables with formal conjugates.
//!
//! The engine works with three kinds of leaves: holomorphic variables
//! `z1..zn`, their formal conjugates `zb1..zbn`, and real parameters.
//! `z_j` and `zb_j` are independent formal variables; evaluation on the
//! hypersurface pins `zb_j` to the numeric conjugate of `z_j`, which makes
//! Wirtinger differentiation purely formal.
//!
//! Trees are immutable and hash-consed per node (`Arc` sharing, cached
//! structural hash). Constructors perform constant folding, 0/1
//! identities and power flattening, and keep commutative operand lists
//! sorted so that structural equality is insensitive to operand order.
//! No further canonicalization is attempted.

mod deriv;
mod eval;
mod parse;

pub use eval::{Assignment, Evaluator};
pub use parse::{parse_expr, ExprContext, ParseError};

use num_complex::Complex64;
use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

/// A formal variable: holomorphic coordinate, formal conjugate, or real parameter.
///
/// Indices are zero-based internally; display is one-based (`z1`, `zb1`, `t1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// `z_j`
    Holo(u32),
    /// `zb_j`, the formal conjugate of `z_j`
    Anti(u32),
    /// real parameter `t_k`
    Param(u32),
}

impl Var {
    /// The variable obtained by conjugation: `z_j <-> zb_j`, parameters fixed.
    pub fn conjugate(self) -> Var {
        match self {
            Var::Holo(j) => Var::Anti(j),
            Var::Anti(j) => Var::Holo(j),
            Var::Param(k) => Var::Param(k),
        }
    }

    fn rank(self) -> (u8, u32) {
        match self {
            Var::Holo(j) => (0, j),
            Var::Anti(j) => (1, j),
            Var::Param(k) => (2, k),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Holo(j) => write!(f, "z{}", j + 1),
            Var::Anti(j) => write!(f, "zb{}", j + 1),
            Var::Param(k) => write!(f, "t{}", k + 1),
        }
    }
}

#[derive(Debug)]
pub(crate) enum Kind {
    Const(Complex64),
    Var(Var),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Quot(Expr, Expr),
    Pow(Expr, i32),
    Sin(Expr),
    Cos(Expr),
    Exp(Expr),
    Log(Expr),
}

#[derive(Debug)]
pub(crate) struct Node {
    hash: u64,
    pub(crate) kind: Kind,
}

/// An immutable symbolic expression.
///
/// Cloning is cheap (reference counted); subtrees are shared freely between
/// expressions, and all operations are pure.
#[derive(Clone, Debug)]
pub struct Expr(pub(crate) Arc<Node>);

// --- structural hash ------------------------------------------------------

const FNV_PRIME: u64 = 0x100000001b3;

fn mix(mut h: u64, v: u64) -> u64 {
    h ^= v;
    h = h.wrapping_mul(FNV_PRIME);
    h ^ (h >> 29)
}

fn hash_kind(kind: &Kind) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    match kind {
        Kind::Const(c) => {
            h = mix(h, 1);
            h = mix(h, c.re.to_bits());
            h = mix(h, c.im.to_bits());
        }
        Kind::Var(v) => {
            let (r, i) = v.rank();
            h = mix(h, 2);
            h = mix(h, r as u64);
            h = mix(h, i as u64);
        }
        Kind::Sum(xs) => {
            h = mix(h, 3);
            for x in xs {
                h = mix(h, x.hash());
            }
        }
        Kind::Prod(xs) => {
            h = mix(h, 4);
            for x in xs {
                h = mix(h, x.hash());
            }
        }
        Kind::Quot(a, b) => {
            h = mix(h, 5);
            h = mix(h, a.hash());
            h = mix(h, b.hash());
        }
        Kind::Pow(b, k) => {
            h = mix(h, 6);
            h = mix(h, b.hash());
            h = mix(h, *k as u64);
        }
        Kind::Sin(x) => {
            h = mix(h, 7);
            h = mix(h, x.hash());
        }
        Kind::Cos(x) => {
            h = mix(h, 8);
            h = mix(h, x.hash());
        }
        Kind::Exp(x) => {
            h = mix(h, 9);
            h = mix(h, x.hash());
        }
        Kind::Log(x) => {
            h = mix(h, 10);
            h = mix(h, x.hash());
        }
    }
    h
}

fn kind_rank(kind: &Kind) -> u8 {
    match kind {
        Kind::Const(_) => 0,
        Kind::Var(_) => 1,
        Kind::Pow(_, _) => 2,
        Kind::Prod(_) => 3,
        Kind::Quot(_, _) => 4,
        Kind::Sum(_) => 5,
        Kind::Sin(_) => 6,
        Kind::Cos(_) => 7,
        Kind::Exp(_) => 8,
        Kind::Log(_) => 9,
    }
}

// Drop negative zeros so that conjugation of real constants is an exact
// structural involution.
fn clean(c: Complex64) -> Complex64 {
    let re = if c.re == 0.0 { 0.0 } else { c.re };
    let im = if c.im == 0.0 { 0.0 } else { c.im };
    Complex64::new(re, im)
}

impl Expr {
    fn new(kind: Kind) -> Expr {
        let hash = hash_kind(&kind);
        Expr(Arc::new(Node { hash, kind }))
    }

    pub(crate) fn hash(&self) -> u64 {
        self.0.hash
    }

    pub(crate) fn ptr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// Deterministic structural ordering used to sort commutative operands.
    pub fn structural_cmp(&self, other: &Expr) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        let (ka, kb) = (&self.0.kind, &other.0.kind);
        kind_rank(ka).cmp(&kind_rank(kb)).then_with(|| match (ka, kb) {
            (Kind::Const(a), Kind::Const(b)) => {
                a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
            }
            (Kind::Var(a), Kind::Var(b)) => a.rank().cmp(&b.rank()),
            (Kind::Pow(a, p), Kind::Pow(b, q)) => {
                a.structural_cmp(b).then(p.cmp(q))
            }
            (Kind::Sum(xs), Kind::Sum(ys)) | (Kind::Prod(xs), Kind::Prod(ys)) => {
                xs.len().cmp(&ys.len()).then_with(|| {
                    for (x, y) in xs.iter().zip(ys) {
                        let c = x.structural_cmp(y);
                        if c != Ordering::Equal {
                            return c;
                        }
                    }
                    Ordering::Equal
                })
            }
            (Kind::Quot(a, b), Kind::Quot(c, d)) => {
                a.structural_cmp(c).then_with(|| b.structural_cmp(d))
            }
            (Kind::Sin(a), Kind::Sin(b))
            | (Kind::Cos(a), Kind::Cos(b))
            | (Kind::Exp(a), Kind::Exp(b))
            | (Kind::Log(a), Kind::Log(b)) => a.structural_cmp(b),
            _ => unreachable!("kind ranks are distinct"),
        })
    }

    // --- constructors -----------------------------------------------------

    pub fn constant(c: Complex64) -> Expr {
        Expr::new(Kind::Const(clean(c)))
    }

    pub fn real(x: f64) -> Expr {
        Expr::constant(Complex64::new(x, 0.0))
    }

    pub fn zero() -> Expr {
        Expr::real(0.0)
    }

    pub fn one() -> Expr {
        Expr::real(1.0)
    }

    pub fn i() -> Expr {
        Expr::constant(Complex64::new(0.0, 1.0))
    }

    pub fn var(v: Var) -> Expr {
        Expr::new(Kind::Var(v))
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match &self.0.kind {
            Kind::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(Complex64::new(0.0, 0.0))
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(Complex64::new(1.0, 0.0))
    }

    /// n-ary sum with flattening, constant folding and sorted operands.
    pub fn sum(terms: Vec<Expr>) -> Expr {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut rest: Vec<Expr> = Vec::with_capacity(terms.len());
        let mut stack: Vec<Expr> = terms;
        stack.reverse();
        while let Some(t) = stack.pop() {
            match &t.0.kind {
                Kind::Const(c) => acc += c,
                Kind::Sum(xs) => {
                    for x in xs.iter().rev() {
                        stack.push(x.clone());
                    }
                }
                _ => rest.push(t),
            }
        }
        rest.sort_by(|a, b| a.structural_cmp(b));
        if acc != Complex64::new(0.0, 0.0) || rest.is_empty() {
            rest.insert(0, Expr::constant(acc));
        }
        if rest.len() == 1 {
            return rest.pop().unwrap();
        }
        Expr::new(Kind::Sum(rest))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::sum(vec![a, b])
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::add(a, Expr::neg(b))
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::mul(Expr::real(-1.0), e)
    }

    /// n-ary product with flattening, constant folding and sorted operands.
    /// A zero factor collapses the whole product.
    pub fn product(factors: Vec<Expr>) -> Expr {
        let mut acc = Complex64::new(1.0, 0.0);
        let mut rest: Vec<Expr> = Vec::with_capacity(factors.len());
        let mut stack: Vec<Expr> = factors;
        stack.reverse();
        while let Some(t) = stack.pop() {
            match &t.0.kind {
                Kind::Const(c) => acc *= c,
                Kind::Prod(xs) => {
                    for x in xs.iter().rev() {
                        stack.push(x.clone());
                    }
                }
                _ => rest.push(t),
            }
        }
        if acc == Complex64::new(0.0, 0.0) {
            return Expr::zero();
        }
        rest.sort_by(|a, b| a.structural_cmp(b));
        if acc != Complex64::new(1.0, 0.0) || rest.is_empty() {
            rest.insert(0, Expr::constant(clean(acc)));
        }
        if rest.len() == 1 {
            return rest.pop().unwrap();
        }
        Expr::new(Kind::Prod(rest))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::product(vec![a, b])
    }

    /// Quotient. Folds constant/constant; panics on a literal zero
    /// denominator (callers validate user input before constructing).
    pub fn quot(num: Expr, den: Expr) -> Expr {
        if den.is_zero() {
            panic!("quotient with literal zero denominator");
        }
        if den.is_one() {
            return num;
        }
        if num.is_zero() {
            return Expr::zero();
        }
        if let (Some(a), Some(b)) = (num.as_const(), den.as_const()) {
            return Expr::constant(a / b);
        }
        Expr::new(Kind::Quot(num, den))
    }

    /// Integer power with flattening: `(e^a)^b -> e^(a*b)`, `e^0 -> 1`, `e^1 -> e`.
    pub fn pow(base: Expr, exp: i32) -> Expr {
        if exp == 0 {
            return Expr::one();
        }
        if exp == 1 {
            return base;
        }
        if let Some(c) = base.as_const() {
            return Expr::constant(c.powi(exp));
        }
        if let Kind::Pow(b, k) = &base.0.kind {
            return Expr::pow(b.clone(), k * exp);
        }
        Expr::new(Kind::Pow(base, exp))
    }

    pub fn sin(e: Expr) -> Expr {
        if let Some(c) = e.as_const() {
            return Expr::constant(c.sin());
        }
        Expr::new(Kind::Sin(e))
    }

    pub fn cos(e: Expr) -> Expr {
        if let Some(c) = e.as_const() {
            return Expr::constant(c.cos());
        }
        Expr::new(Kind::Cos(e))
    }

    pub fn exp(e: Expr) -> Expr {
        if let Some(c) = e.as_const() {
            return Expr::constant(c.exp());
        }
        Expr::new(Kind::Exp(e))
    }

    /// Principal-branch logarithm. Constant folding requires a nonzero
    /// argument; `log(0)` is left symbolic and fails at evaluation time.
    pub fn log(e: Expr) -> Expr {
        if let Some(c) = e.as_const() {
            if c != Complex64::new(0.0, 0.0) {
                return Expr::constant(c.ln());
            }
        }
        Expr::new(Kind::Log(e))
    }

    /// Real part, `(e + conj e)/2`.
    pub fn re(e: Expr) -> Expr {
        let c = e.conjugate();
        Expr::quot(Expr::add(e, c), Expr::real(2.0))
    }

    /// Imaginary part, `(e - conj e)/(2i)`.
    pub fn im(e: Expr) -> Expr {
        let c = e.conjugate();
        Expr::quot(Expr::sub(e, c), Expr::constant(Complex64::new(0.0, 2.0)))
    }

    /// Squared modulus as the formal product `e * conj(e)`.
    pub fn abs2(e: Expr) -> Expr {
        let c = e.conjugate();
        Expr::mul(e, c)
    }

    // --- conjugation ------------------------------------------------------

    /// Formal conjugation: swaps `z_j <-> zb_j`, conjugates constants and
    /// fixes real parameters. Pushed down to the leaves, so it is a
    /// structural involution on normalized trees.
    ///
    /// Conjugation is pushed through `log` as well; this identifies
    /// `conj(log x)` with `log(conj x)`, which is valid off the branch cut
    /// (all supported scenarios evaluate `log` on positive reals).
    pub fn conjugate(&self) -> Expr {
        match &self.0.kind {
            Kind::Const(c) => Expr::constant(c.conj()),
            Kind::Var(v) => Expr::var(v.conjugate()),
            Kind::Sum(xs) => Expr::sum(xs.iter().map(|x| x.conjugate()).collect()),
            Kind::Prod(xs) => Expr::product(xs.iter().map(|x| x.conjugate()).collect()),
            Kind::Quot(a, b) => Expr::quot(a.conjugate(), b.conjugate()),
            Kind::Pow(b, k) => Expr::pow(b.conjugate(), *k),
            Kind::Sin(x) => Expr::sin(x.conjugate()),
            Kind::Cos(x) => Expr::cos(x.conjugate()),
            Kind::Exp(x) => Expr::exp(x.conjugate()),
            Kind::Log(x) => Expr::log(x.conjugate()),
        }
    }

    /// Rebuild through the normalizing constructors. Trees produced by this
    /// crate are already normalized; this is the entry point for structural
    /// equality checks on externally assembled trees.
    pub fn normalize(&self) -> Expr {
        match &self.0.kind {
            Kind::Const(c) => Expr::constant(*c),
            Kind::Var(v) => Expr::var(*v),
            Kind::Sum(xs) => Expr::sum(xs.iter().map(|x| x.normalize()).collect()),
            Kind::Prod(xs) => Expr::product(xs.iter().map(|x| x.normalize()).collect()),
            Kind::Quot(a, b) => Expr::quot(a.normalize(), b.normalize()),
            Kind::Pow(b, k) => Expr::pow(b.normalize(), *k),
            Kind::Sin(x) => Expr::sin(x.normalize()),
            Kind::Cos(x) => Expr::cos(x.normalize()),
            Kind::Exp(x) => Expr::exp(x.normalize()),
            Kind::Log(x) => Expr::log(x.normalize()),
        }
    }

    /// True when the expression is real-valued as a formal object,
    /// i.e. structurally equal to its conjugate.
    pub fn is_formally_real(&self) -> bool {
        self.conjugate() == *self
    }

    /// Variables occurring in the tree, deduplicated, in sorted order.
    pub fn variables(&self) -> Vec<Var> {
        fn walk(e: &Expr, out: &mut Vec<Var>) {
            match &e.0.kind {
                Kind::Const(_) => {}
                Kind::Var(v) => out.push(*v),
                Kind::Sum(xs) | Kind::Prod(xs) => xs.iter().for_each(|x| walk(x, out)),
                Kind::Quot(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Kind::Pow(b, _) => walk(b, out),
                Kind::Sin(x) | Kind::Cos(x) | Kind::Exp(x) | Kind::Log(x) => walk(x, out),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out.dedup();
        out
    }

    /// Number of nodes in the tree, counting shared subtrees once.
    pub fn dag_size(&self) -> usize {
        fn walk(e: &Expr, seen: &mut std::collections::HashSet<usize>) {
            if !seen.insert(e.ptr()) {
                return;
            }
            match &e.0.kind {
                Kind::Const(_) | Kind::Var(_) => {}
                Kind::Sum(xs) | Kind::Prod(xs) => xs.iter().for_each(|x| walk(x, seen)),
                Kind::Quot(a, b) => {
                    walk(a, seen);
                    walk(b, seen);
                }
                Kind::Pow(b, _) => walk(b, seen),
                Kind::Sin(x) | Kind::Cos(x) | Kind::Exp(x) | Kind::Log(x) => walk(x, seen),
            }
        }
        let mut seen = std::collections::HashSet::new();
        walk(self, &mut seen);
        seen.len()
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.hash != other.0.hash {
            return false;
        }
        self.structural_cmp(other) == Ordering::Equal
    }
}

impl Eq for Expr {}

impl std::hash::Hash for Expr {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

// --- display ----------------------------------------------------------

fn fmt_const(c: Complex64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{}", c.re)
    } else if c.re == 0.0 {
        if c.im == 1.0 {
            write!(f, "i")
        } else if c.im == -1.0 {
            write!(f, "-i")
        } else {
            write!(f, "{}*i", c.im)
        }
    } else if c.im < 0.0 {
        write!(f, "({}-{}*i)", c.re, -c.im)
    } else {
        write!(f, "({}+{}*i)", c.re, c.im)
    }
}

fn needs_parens(e: &Expr, parent: u8) -> bool {
    // parent: 0 sum, 1 product, 2 power/quotient operand
    match &e.0.kind {
        Kind::Sum(_) => parent >= 1,
        Kind::Quot(_, _) => parent >= 1,
        Kind::Prod(_) => parent >= 2,
        Kind::Const(c) => {
            // negative reals, and the `a*i` imaginary form, bind too loosely
            // to stand bare inside a product or quotient
            let negative = c.re < 0.0 || (c.re == 0.0 && c.im < 0.0);
            let product_form = c.re == 0.0 && c.im != 0.0 && c.im != 1.0 && c.im != -1.0;
            parent >= 1 && (negative || product_form)
        }
        _ => false,
    }
}

fn fmt_sub(e: &Expr, parent: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if needs_parens(e, parent) {
        write!(f, "(")?;
        fmt_expr(e, f)?;
        write!(f, ")")
    } else {
        fmt_expr(e, f)
    }
}

fn fmt_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match &e.0.kind {
        Kind::Const(c) => fmt_const(*c, f),
        Kind::Var(v) => write!(f, "{}", v),
        Kind::Sum(xs) => {
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, " + ")?;
                }
                fmt_sub(x, 0, f)?;
            }
            Ok(())
        }
        Kind::Prod(xs) => {
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, "*")?;
                }
                fmt_sub(x, 1, f)?;
            }
            Ok(())
        }
        Kind::Quot(a, b) => {
            fmt_sub(a, 2, f)?;
            write!(f, "/")?;
            fmt_sub(b, 2, f)
        }
        Kind::Pow(b, k) => {
            fmt_sub(b, 2, f)?;
            if *k < 0 {
                write!(f, "^({})", k)
            } else {
                write!(f, "^{}", k)
            }
        }
        Kind::Sin(x) => write!(f, "sin({})", x),
        Kind::Cos(x) => write!(f, "cos({})", x),
        Kind::Exp(x) => write!(f, "exp({})", x),
        Kind::Log(x) => write!(f, "log({})", x),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(j: u32) -> Expr {
        Expr::var(Var::Holo(j))
    }

    fn zb(j: u32) -> Expr {
        Expr::var(Var::Anti(j))
    }

    #[test]
    fn constant_folding() {
        let e = Expr::add(Expr::real(2.0), Expr::real(3.0));
        assert_eq!(e.as_const(), Some(Complex64::new(5.0, 0.0)));
        let e = Expr::mul(Expr::zero(), z(0));
        assert!(e.is_zero());
        let e = Expr::mul(Expr::one(), z(0));
        assert_eq!(e, z(0));
        let e = Expr::pow(Expr::pow(z(0), 2), 3);
        assert_eq!(e, Expr::pow(z(0), 6));
        assert!(Expr::pow(z(0), 0).is_one());
    }

    #[test]
    fn sorted_commutative_operands() {
        assert_eq!(Expr::mul(z(0), zb(0)), Expr::mul(zb(0), z(0)));
        assert_eq!(
            Expr::sum(vec![z(1), z(0), Expr::real(1.0)]),
            Expr::sum(vec![Expr::real(1.0), z(0), z(1)])
        );
    }

    #[test]
    fn conjugate_examples() {
        // conj(z1) = zb1
        assert_eq!(z(0).conjugate(), zb(0));
        // conj(i*t) = -i*t
        let t = Expr::var(Var::Param(0));
        let it = Expr::mul(Expr::i(), t.clone());
        assert_eq!(it.conjugate(), Expr::mul(Expr::constant(Complex64::new(0.0, -1.0)), t));
        // conj(conj(exp(z2))) = exp(z2)
        let e = Expr::exp(z(1));
        assert_eq!(e.conjugate().conjugate(), e);
    }

    #[test]
    fn conjugate_involution_on_products() {
        let e = Expr::mul(z(0), Expr::add(zb(1), Expr::i()));
        assert_eq!(e.conjugate().conjugate(), e);
    }

    #[test]
    fn formally_real_detection() {
        let e = Expr::mul(z(0), zb(0));
        assert!(e.is_formally_real());
        assert!(!z(0).is_formally_real());
        // re(z1) is real by construction
        assert!(Expr::re(z(0)).is_formally_real());
    }

    #[test]
    fn negative_zero_constants_are_canonical() {
        let a = Expr::constant(Complex64::new(0.0, -0.0));
        let b = Expr::zero();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
    }

    #[test]
    fn display_round_trippable_shape() {
        let e = Expr::add(Expr::pow(Expr::mul(z(1), zb(1)), 2), Expr::neg(Expr::re(z(0))));
        let s = format!("{}", e);
        assert!(s.contains("z2"));
        assert!(s.contains("zb2"));
    }
}
