//! Scalar expressions over chart coordinates.
//!
//! Coefficients of forms, vector fields and maps are stored as small
//! expression trees so that partial derivatives of every order are exact
//! whenever the leaves are closed-form. Opaque closures are allowed as
//! leaves; their derivatives fall back to central differences and the
//! resulting expressions are flagged so reports can pick the right
//! tolerance tier.

use std::fmt;
use std::sync::Arc;

use crate::tolerance::{Tier, FD_STEP};

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A user- or solver-supplied function of `arity` arguments.
pub struct OpaqueFn {
    value: Box<ValueFn>,
    arity: usize,
    partials: Option<Vec<Expr>>,
    fd: bool,
    label: String,
}

impl fmt::Debug for OpaqueFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)
    }
}

/// Polynomial on `[0, 1]` extended by constants outside.
#[derive(Debug, Clone, PartialEq)]
pub struct ClampedPoly {
    /// Ascending coefficients.
    pub coeffs: Vec<f64>,
    pub below: f64,
    pub above: f64,
}

impl ClampedPoly {
    /// `10x^3 - 15x^4 + 6x^5`: C2 at both ends, 0 below and 1 above.
    pub fn smoothstep() -> Self {
        Self {
            coeffs: vec![0.0, 0.0, 0.0, 10.0, -15.0, 6.0],
            below: 0.0,
            above: 1.0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            self.below
        } else if x >= 1.0 {
            self.above
        } else {
            self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
        }
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| k as f64 * c)
            .collect();
        Self {
            coeffs,
            below: 0.0,
            above: 0.0,
        }
    }

    fn is_zero(&self) -> bool {
        self.below == 0.0 && self.above == 0.0 && self.coeffs.iter().all(|&c| c == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Atan,
}

impl Func {
    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Atan => x.atan(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "atan" => Func::Atan,
            _ => return None,
        })
    }
}

#[derive(Debug)]
enum Node {
    Const(f64),
    Var(usize),
    Add(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Powi(Expr, i32),
    Unary(Func, Expr),
    Clamped(Arc<ClampedPoly>, Expr),
    /// `below` where `cond < threshold`, otherwise `above`.
    Select {
        cond: Expr,
        threshold: f64,
        below: Expr,
        above: Expr,
    },
    Opaque(Arc<OpaqueFn>, Vec<Expr>),
}

/// Immutable, cheaply clonable scalar expression.
#[derive(Clone, Debug)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn node(n: Node) -> Self {
        Expr(Arc::new(n))
    }

    pub fn constant(c: f64) -> Self {
        Self::node(Node::Const(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn var(i: usize) -> Self {
        Self::node(Node::Var(i))
    }

    /// Opaque leaf over the chart coordinates; derivatives by central differences.
    pub fn from_fn<F>(arity: usize, label: &str, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::opaque(
            OpaqueFn {
                value: Box::new(f),
                arity,
                partials: None,
                fd: false,
                label: label.to_string(),
            },
            arity,
        )
    }

    /// Opaque leaf with caller-supplied exact partials (expressions in the same coordinates).
    pub fn from_fn_with_partials<F>(arity: usize, label: &str, f: F, partials: Vec<Expr>) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        assert_eq!(partials.len(), arity, "one partial per argument");
        Self::opaque(
            OpaqueFn {
                value: Box::new(f),
                arity,
                partials: Some(partials),
                fd: false,
                label: label.to_string(),
            },
            arity,
        )
    }

    fn opaque(f: OpaqueFn, arity: usize) -> Self {
        let args = (0..arity).map(Expr::var).collect();
        Self::node(Node::Opaque(Arc::new(f), args))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn add(&self, other: &Expr) -> Expr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            (Some(a), _) if a == 0.0 => other.clone(),
            (_, Some(b)) if b == 0.0 => self.clone(),
            _ => Self::node(Node::Add(self.clone(), other.clone())),
        }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            (Some(a), _) if a == 0.0 => Expr::zero(),
            (_, Some(b)) if b == 0.0 => Expr::zero(),
            (Some(a), _) if a == 1.0 => other.clone(),
            (_, Some(b)) if b == 1.0 => self.clone(),
            (Some(a), _) if a == -1.0 => other.neg(),
            (_, Some(b)) if b == -1.0 => self.neg(),
            _ => Self::node(Node::Mul(self.clone(), other.clone())),
        }
    }

    pub fn scale(&self, c: f64) -> Expr {
        Expr::constant(c).mul(self)
    }

    pub fn div(&self, other: &Expr) -> Expr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a / b),
            (Some(a), _) if a == 0.0 => Expr::zero(),
            (_, Some(b)) if b == 1.0 => self.clone(),
            _ => Self::node(Node::Div(self.clone(), other.clone())),
        }
    }

    pub fn neg(&self) -> Expr {
        match &*self.0 {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Self::node(Node::Neg(self.clone())),
        }
    }

    pub fn powi(&self, n: i32) -> Expr {
        match (self.as_const(), n) {
            (_, 0) => Expr::one(),
            (_, 1) => self.clone(),
            (Some(c), _) => Expr::constant(c.powi(n)),
            _ => Self::node(Node::Powi(self.clone(), n)),
        }
    }

    pub fn apply(&self, f: Func) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(f.apply(c)),
            None => Self::node(Node::Unary(f, self.clone())),
        }
    }

    pub fn sin(&self) -> Expr {
        self.apply(Func::Sin)
    }
    pub fn cos(&self) -> Expr {
        self.apply(Func::Cos)
    }
    pub fn exp(&self) -> Expr {
        self.apply(Func::Exp)
    }
    pub fn sqrt(&self) -> Expr {
        self.apply(Func::Sqrt)
    }
    pub fn atan(&self) -> Expr {
        self.apply(Func::Atan)
    }
    pub fn ln(&self) -> Expr {
        self.apply(Func::Ln)
    }

    pub fn clamped(&self, poly: ClampedPoly) -> Expr {
        if poly.is_zero() {
            return Expr::zero();
        }
        match self.as_const() {
            Some(c) => Expr::constant(poly.eval(c)),
            None => Self::node(Node::Clamped(Arc::new(poly), self.clone())),
        }
    }

    /// `below` where `self < threshold`, else `above`.
    pub fn select_below(&self, threshold: f64, below: &Expr, above: &Expr) -> Expr {
        if below.is_zero() && above.is_zero() {
            return Expr::zero();
        }
        Self::node(Node::Select {
            cond: self.clone(),
            threshold,
            below: below.clone(),
            above: above.clone(),
        })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &*self.0 {
            Node::Const(c) => *c,
            Node::Var(i) => x[*i],
            Node::Add(a, b) => a.eval(x) + b.eval(x),
            Node::Mul(a, b) => a.eval(x) * b.eval(x),
            Node::Div(a, b) => a.eval(x) / b.eval(x),
            Node::Neg(a) => -a.eval(x),
            Node::Powi(a, n) => a.eval(x).powi(*n),
            Node::Unary(f, a) => f.apply(a.eval(x)),
            Node::Clamped(p, a) => p.eval(a.eval(x)),
            Node::Select {
                cond,
                threshold,
                below,
                above,
            } => {
                if cond.eval(x) < *threshold {
                    below.eval(x)
                } else {
                    above.eval(x)
                }
            }
            Node::Opaque(f, args) => {
                let mut buf = [0.0; 8];
                if args.len() <= buf.len() {
                    for (slot, a) in buf.iter_mut().zip(args) {
                        *slot = a.eval(x);
                    }
                    (f.value)(&buf[..args.len()])
                } else {
                    let v: Vec<f64> = args.iter().map(|a| a.eval(x)).collect();
                    (f.value)(&v)
                }
            }
        }
    }

    /// Partial derivative with respect to coordinate `i`.
    pub fn diff(&self, i: usize) -> Expr {
        match &*self.0 {
            Node::Const(_) => Expr::zero(),
            Node::Var(j) => Expr::constant(if *j == i { 1.0 } else { 0.0 }),
            Node::Add(a, b) => a.diff(i).add(&b.diff(i)),
            Node::Mul(a, b) => a.diff(i).mul(b).add(&a.mul(&b.diff(i))),
            Node::Div(a, b) => {
                let da = a.diff(i);
                let db = b.diff(i);
                if db.is_zero() {
                    da.div(b)
                } else {
                    da.mul(b).sub(&a.mul(&db)).div(&b.powi(2))
                }
            }
            Node::Neg(a) => a.diff(i).neg(),
            Node::Powi(a, n) => {
                let da = a.diff(i);
                if da.is_zero() {
                    return Expr::zero();
                }
                Expr::constant(*n as f64).mul(&a.powi(n - 1)).mul(&da)
            }
            Node::Unary(f, a) => {
                let da = a.diff(i);
                if da.is_zero() {
                    return Expr::zero();
                }
                let outer = match f {
                    Func::Sin => a.cos(),
                    Func::Cos => a.sin().neg(),
                    Func::Tan => Expr::one().add(&self.powi(2)),
                    Func::Exp => self.clone(),
                    Func::Ln => Expr::one().div(a),
                    Func::Sqrt => Expr::constant(0.5).div(self),
                    Func::Atan => Expr::one().div(&Expr::one().add(&a.powi(2))),
                };
                outer.mul(&da)
            }
            Node::Clamped(p, a) => {
                let da = a.diff(i);
                if da.is_zero() {
                    return Expr::zero();
                }
                a.clamped(p.derivative()).mul(&da)
            }
            Node::Select {
                cond,
                threshold,
                below,
                above,
            } => cond.select_below(*threshold, &below.diff(i), &above.diff(i)),
            Node::Opaque(f, args) => {
                let mut acc = Expr::zero();
                for (k, arg) in args.iter().enumerate() {
                    let darg = arg.diff(i);
                    if darg.is_zero() {
                        continue;
                    }
                    let outer = opaque_partial(f, k).substitute(args);
                    acc = acc.add(&outer.mul(&darg));
                }
                acc
            }
        }
    }

    /// Replace every `Var(i)` by `args[i]`.
    pub fn substitute(&self, args: &[Expr]) -> Expr {
        match &*self.0 {
            Node::Const(_) => self.clone(),
            Node::Var(i) => args[*i].clone(),
            Node::Add(a, b) => a.substitute(args).add(&b.substitute(args)),
            Node::Mul(a, b) => a.substitute(args).mul(&b.substitute(args)),
            Node::Div(a, b) => a.substitute(args).div(&b.substitute(args)),
            Node::Neg(a) => a.substitute(args).neg(),
            Node::Powi(a, n) => a.substitute(args).powi(*n),
            Node::Unary(f, a) => a.substitute(args).apply(*f),
            Node::Clamped(p, a) => a.substitute(args).clamped((**p).clone()),
            Node::Select {
                cond,
                threshold,
                below,
                above,
            } => cond.substitute(args).select_below(
                *threshold,
                &below.substitute(args),
                &above.substitute(args),
            ),
            Node::Opaque(f, inner) => Self::node(Node::Opaque(
                f.clone(),
                inner.iter().map(|a| a.substitute(args)).collect(),
            )),
        }
    }

    /// Shift variable indices: `Var(i)` becomes `Var(map[i])`.
    pub fn reindex(&self, map: &[usize]) -> Expr {
        let args: Vec<Expr> = map.iter().map(|&j| Expr::var(j)).collect();
        self.substitute(&args)
    }

    /// `Fd` when any leaf was produced by finite differencing.
    pub fn tier(&self) -> Tier {
        match &*self.0 {
            Node::Const(_) | Node::Var(_) => Tier::Exact,
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => a.tier().join(b.tier()),
            Node::Neg(a) | Node::Powi(a, _) | Node::Unary(_, a) | Node::Clamped(_, a) => a.tier(),
            Node::Select {
                cond, below, above, ..
            } => cond.tier().join(below.tier()).join(above.tier()),
            Node::Opaque(f, args) => {
                let own = if f.fd { Tier::Fd } else { Tier::Exact };
                args.iter().fold(own, |t, a| t.join(a.tier()))
            }
        }
    }

    /// Largest variable index referenced, if any (opaque arguments included).
    pub fn max_var(&self) -> Option<usize> {
        match &*self.0 {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => a.max_var().max(b.max_var()),
            Node::Neg(a) | Node::Powi(a, _) | Node::Unary(_, a) | Node::Clamped(_, a) => {
                a.max_var()
            }
            Node::Select {
                cond, below, above, ..
            } => cond.max_var().max(below.max_var()).max(above.max_var()),
            Node::Opaque(_, args) => args.iter().filter_map(|a| a.max_var()).max(),
        }
    }

    /// Render with the given coordinate names.
    pub fn display<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        Named { expr: self, names }
    }
}

fn opaque_partial(f: &Arc<OpaqueFn>, k: usize) -> Expr {
    if let Some(p) = &f.partials {
        return p[k].clone();
    }
    let parent = f.clone();
    let h = FD_STEP;
    let value = move |x: &[f64]| {
        let mut y = x.to_vec();
        y[k] = x[k] + h;
        let fp = (parent.value)(&y);
        y[k] = x[k] - h;
        let fm = (parent.value)(&y);
        (fp - fm) / (2.0 * h)
    };
    Expr::opaque(
        OpaqueFn {
            value: Box::new(value),
            arity: f.arity,
            partials: None,
            fd: true,
            label: format!("d{}({})", k, f.label),
        },
        f.arity,
    )
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::constant(c)
    }
}

struct Named<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl Named<'_> {
    fn sub<'b>(&'b self, e: &'b Expr) -> Named<'b> {
        Named {
            expr: e,
            names: self.names,
        }
    }
}

impl fmt::Display for Named<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.expr.0 {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(i) => match self.names.get(*i) {
                Some(n) => write!(f, "{n}"),
                None => write!(f, "x{i}"),
            },
            Node::Add(a, b) => write!(f, "({} + {})", self.sub(a), self.sub(b)),
            Node::Mul(a, b) => write!(f, "{}*{}", self.sub(a), self.sub(b)),
            Node::Div(a, b) => write!(f, "{}/({})", self.sub(a), self.sub(b)),
            Node::Neg(a) => write!(f, "-{}", self.sub(a)),
            Node::Powi(a, n) => write!(f, "({})^{n}", self.sub(a)),
            Node::Unary(func, a) => write!(f, "{}({})", func.name(), self.sub(a)),
            Node::Clamped(_, a) => write!(f, "step({})", self.sub(a)),
            Node::Select {
                cond,
                threshold,
                below,
                above,
            } => write!(
                f,
                "[{} < {threshold} ? {} : {}]",
                self.sub(cond),
                self.sub(below),
                self.sub(above)
            ),
            Node::Opaque(func, _) => write!(f, "{}(..)", func.label),
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(&self, &rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(&self, &rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(&self, &rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_constants() {
        let x = Expr::var(0);
        assert!(x.mul(&Expr::zero()).is_zero());
        assert!(Expr::constant(3.0).diff(0).is_zero());
        assert!(x.diff(1).is_zero());
        assert_eq!(x.diff(0).as_const(), Some(1.0));
    }

    #[test]
    fn chain_rule_matches_hand_derivative() {
        // f = sin(2 pi x) cos(2 pi y)
        let tau = 2.0 * std::f64::consts::PI;
        let f = Expr::var(0).scale(tau).sin().mul(&Expr::var(1).scale(tau).cos());
        let p = [0.13, 0.71];
        let fx = f.diff(0).eval(&p);
        let expect = tau * (tau * p[0]).cos() * (tau * p[1]).cos();
        assert!((fx - expect).abs() < 1e-12);
        let fxy = f.diff(0).diff(1).eval(&p);
        let fyx = f.diff(1).diff(0).eval(&p);
        assert!((fxy - fyx).abs() < 1e-12);
    }

    #[test]
    fn opaque_without_partials_is_fd_tier() {
        let f = Expr::from_fn(2, "f", |x| x[0] * x[0] * x[1]);
        assert_eq!(f.tier(), Tier::Exact);
        let fx = f.diff(0);
        assert_eq!(fx.tier(), Tier::Fd);
        assert!((fx.eval(&[0.5, 2.0]) - 2.0).abs() < 1e-8);
    }

    #[test]
    fn opaque_partials_are_used() {
        let f = Expr::from_fn_with_partials(
            1,
            "sq",
            |x| x[0] * x[0],
            vec![Expr::var(0).scale(2.0)],
        );
        let g = f.substitute(&[Expr::var(1).scale(3.0)]);
        // g(y) = 9 y^2, g' = 18 y
        assert_eq!(g.diff(1).tier(), Tier::Exact);
        assert!((g.diff(1).eval(&[0.0, 0.5]) - 9.0).abs() < 1e-14);
    }

    #[test]
    fn smoothstep_is_c2() {
        let s = ClampedPoly::smoothstep();
        assert_eq!(s.eval(-0.1), 0.0);
        assert_eq!(s.eval(1.3), 1.0);
        let d = s.derivative();
        let dd = d.derivative();
        for x in [0.0, 1.0] {
            assert!(d.eval(x).abs() < 1e-15);
            assert!(dd.eval(x).abs() < 1e-15);
        }
        assert!((s.eval(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn select_picks_branch() {
        let r = Expr::var(0);
        let e = r.select_below(1.0, &r.powi(2), &Expr::constant(7.0));
        assert_eq!(e.eval(&[0.5]), 0.25);
        assert_eq!(e.eval(&[2.0]), 7.0);
        assert_eq!(e.diff(0).eval(&[0.5]), 1.0);
        assert_eq!(e.diff(0).eval(&[2.0]), 0.0);
    }
}
