//! Symbolic polynomial functions with cyclotomic coefficients.
//!
//! These are the "smooth functions" of the calculus: exact multivariate
//! polynomials over the scalar field of a given order. Everything downstream
//! (forms, covariant objects, the one-dimensional theory) differentiates,
//! multiplies and composes these without ever rounding.

use crate::scalar::{rat_int, CycScalar, QContext, Rat, ScalarError};
use num::traits::Zero;
use rand_core::{RngCore, SeedableRng};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymError {
    #[error("function expects {expected} variables, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("function parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Polynomial in `n_vars` commuting variables over `Q(zeta)`.
///
/// Terms are keyed by exponent vectors; zero coefficients are never stored,
/// so structural equality is mathematical equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyFun {
    n_order: u32,
    n_vars: usize,
    terms: BTreeMap<Vec<u32>, CycScalar>,
}

impl PolyFun {
    pub fn zero(n_order: u32, n_vars: usize) -> Self {
        PolyFun { n_order, n_vars, terms: BTreeMap::new() }
    }

    pub fn constant(n_order: u32, n_vars: usize, c: CycScalar) -> Self {
        let mut f = Self::zero(n_order, n_vars);
        if !c.is_zero() {
            f.terms.insert(vec![0; n_vars], c);
        }
        f
    }

    pub fn one(n_order: u32, n_vars: usize) -> Self {
        let ctx = QContext::new(n_order).expect("order >= 2");
        Self::constant(n_order, n_vars, ctx.one())
    }

    /// The coordinate function x_i (0-based).
    pub fn var(n_order: u32, n_vars: usize, i: usize) -> Self {
        assert!(i < n_vars, "variable index out of range");
        let ctx = QContext::new(n_order).expect("order >= 2");
        let mut e = vec![0; n_vars];
        e[i] = 1;
        let mut f = Self::zero(n_order, n_vars);
        f.terms.insert(e, ctx.one());
        f
    }

    pub fn monomial(n_order: u32, exps: Vec<u32>, c: CycScalar) -> Self {
        let n_vars = exps.len();
        let mut f = Self::zero(n_order, n_vars);
        if !c.is_zero() {
            f.terms.insert(exps, c);
        }
        f
    }

    pub fn n_order(&self) -> u32 {
        self.n_order
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k == 0))
    }

    /// The constant term (the whole value if `is_constant`).
    pub fn constant_part(&self) -> CycScalar {
        self.terms
            .get(&vec![0; self.n_vars])
            .cloned()
            .unwrap_or_else(|| CycScalar::zero(crate::scalar::conductor(self.n_order)))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &CycScalar)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum())
            .max()
            .unwrap_or(0)
    }

    fn assert_compatible(&self, other: &Self) {
        assert_eq!(self.n_order, other.n_order, "mixed scalar orders");
        assert_eq!(self.n_vars, other.n_vars, "mixed arities");
    }

    fn insert_term(&mut self, e: Vec<u32>, c: CycScalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().checked_add(&c).expect("same order");
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_compatible(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        PolyFun {
            n_order: self.n_order,
            n_vars: self.n_vars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
        }
    }

    pub fn scale(&self, s: &CycScalar) -> Self {
        if s.is_zero() {
            return Self::zero(self.n_order, self.n_vars);
        }
        PolyFun {
            n_order: self.n_order,
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.checked_mul(s).expect("same order")))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_compatible(other);
        let mut out = Self::zero(self.n_order, self.n_vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.insert_term(e, ca.checked_mul(cb).expect("same order"));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.n_order, self.n_vars);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Partial derivative with respect to x_i (0-based).
    pub fn partial(&self, i: usize) -> Self {
        assert!(i < self.n_vars, "variable index out of range");
        let mut out = Self::zero(self.n_order, self.n_vars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.insert_term(e2, c.scale(&rat_int(e[i] as i64)));
        }
        out
    }

    /// Iterated partial along a multi-index (one entry per differentiation).
    pub fn partial_many(&self, idxs: &[usize]) -> Self {
        let mut f = self.clone();
        for &i in idxs {
            f = f.partial(i);
        }
        f
    }

    /// Substitute `subs[i]` for x_i. All substituted functions must share an
    /// arity and the scalar order.
    pub fn compose(&self, subs: &[Self]) -> Result<Self, SymError> {
        if subs.len() != self.n_vars {
            return Err(SymError::ArityMismatch { expected: self.n_vars, got: subs.len() });
        }
        let inner_vars = subs.first().map(|f| f.n_vars).unwrap_or(0);
        for s in subs {
            if s.n_vars != inner_vars {
                return Err(SymError::ArityMismatch { expected: inner_vars, got: s.n_vars });
            }
            if s.n_order != self.n_order {
                return Err(ScalarError::MismatchedOrder(self.n_order, s.n_order).into());
            }
        }
        // memoized powers of each substituted function
        let mut pow_cache: Vec<Vec<Self>> = subs
            .iter()
            .map(|f| vec![Self::one(self.n_order, inner_vars), f.clone()])
            .collect();
        let power = |i: usize, k: u32, cache: &mut Vec<Vec<Self>>| -> Self {
            while cache[i].len() <= k as usize {
                let next = cache[i].last().unwrap().mul(&cache[i][1]);
                cache[i].push(next);
            }
            cache[i][k as usize].clone()
        };
        let mut out = Self::zero(self.n_order, inner_vars);
        for (e, c) in &self.terms {
            let mut term = Self::constant(self.n_order, inner_vars, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = term.mul(&power(i, k, &mut pow_cache));
                }
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Evaluate at a point of scalars.
    pub fn eval(&self, point: &[CycScalar]) -> Result<CycScalar, SymError> {
        if point.len() != self.n_vars {
            return Err(SymError::ArityMismatch { expected: self.n_vars, got: point.len() });
        }
        let ctx = QContext::new(self.n_order)?;
        let mut acc = ctx.zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t.checked_mul(&point[i].pow(k))?;
                }
            }
            acc = acc.checked_add(&t)?;
        }
        Ok(acc)
    }

    /// Evaluate at a rational point.
    pub fn eval_rat(&self, point: &[Rat]) -> Result<CycScalar, SymError> {
        let ctx = QContext::new(self.n_order)?;
        let pts: Vec<CycScalar> = point.iter().map(|r| ctx.from_rat(r.clone())).collect();
        self.eval(&pts)
    }

    // -- univariate helpers (used heavily by the one-dimensional theory) ----

    /// d/dt for univariate functions.
    pub fn derivative(&self) -> Self {
        assert_eq!(self.n_vars, 1, "derivative() is univariate");
        self.partial(0)
    }

    /// Antiderivative with zero constant term (univariate).
    pub fn antiderivative(&self) -> Self {
        assert_eq!(self.n_vars, 1, "antiderivative() is univariate");
        let mut out = Self::zero(self.n_order, 1);
        for (e, c) in &self.terms {
            let k = e[0];
            out.insert_term(
                vec![k + 1],
                c.scale(&Rat::new(1.into(), (k as i64 + 1).into())),
            );
        }
        out
    }

    /// Exact square root of a univariate polynomial, when one exists whose
    /// coefficients stay in the field. Uses the leading-coefficient /
    /// long-division scheme and verifies the result by squaring.
    pub fn poly_sqrt(&self) -> Option<Self> {
        assert_eq!(self.n_vars, 1, "poly_sqrt() is univariate");
        if self.is_zero() {
            return Some(self.clone());
        }
        let deg = self.total_degree();
        if deg % 2 != 0 {
            return None;
        }
        let half = deg / 2;
        let coeff = |k: u32| -> CycScalar {
            self.terms
                .get(&vec![k])
                .cloned()
                .unwrap_or_else(|| CycScalar::zero(crate::scalar::conductor(self.n_order)))
        };
        let lead_root = coeff(deg).sqrt_shape()?;
        let mut s: Vec<CycScalar> = vec![CycScalar::zero(lead_root.order()); half as usize + 1];
        s[half as usize] = lead_root.clone();
        let two_lead = lead_root.checked_add(&lead_root).unwrap();
        for k in (0..half).rev() {
            // match the coefficient of t^{half + k} in s^2
            let mut acc = coeff(half + k);
            let mut i = k + 1;
            while i < half && half + k >= i && (half + k - i) > k {
                let j = half + k - i;
                if j <= half {
                    let prod = s[i as usize].checked_mul(&s[j as usize]).unwrap();
                    acc = acc.checked_sub(&prod).unwrap();
                }
                i += 1;
            }
            s[k as usize] = acc.checked_div(&two_lead).ok()?;
        }
        let mut root = Self::zero(self.n_order, 1);
        for (k, c) in s.into_iter().enumerate() {
            root.insert_term(vec![k as u32], c);
        }
        if root.mul(&root) == *self {
            Some(root)
        } else {
            None
        }
    }
}

// ---------------------------------------------------------------------------
// Deterministic random polynomials for stress tests.
// ---------------------------------------------------------------------------

/// Thin wrapper pinning the stream-to-integer mapping by hand, so recorded
/// test values depend only on the ChaCha8 keystream for a given seed and not
/// on distribution code elsewhere.
pub struct PinnedRng(rand_chacha::ChaCha8Rng);

impl PinnedRng {
    pub fn new(seed: u64) -> Self {
        PinnedRng(rand_chacha::ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform-ish value in 0..m via plain reduction (bias is irrelevant for
    /// test-case generation; stability across library versions is not).
    pub fn below(&mut self, m: u64) -> u64 {
        assert!(m > 0);
        self.0.next_u64() % m
    }

    pub fn ibelow(&mut self, m: u64) -> i64 {
        self.below(m) as i64
    }
}

/// Deterministic pseudo-random polynomial: a handful of terms with small
/// rational coefficients times small powers of q, total degree <= max_deg.
pub fn random_poly(seed: u64, n_vars: usize, max_deg: u32, n_order: u32) -> PolyFun {
    let mut rng = PinnedRng::new(seed);
    let ctx = QContext::new(n_order).expect("order >= 2");
    let n_terms = 2 + rng.below(4);
    let mut f = PolyFun::zero(n_order, n_vars);
    for _ in 0..n_terms {
        let mut budget = max_deg;
        let mut exps = vec![0u32; n_vars];
        for e in exps.iter_mut() {
            let k = rng.below(budget as u64 + 1) as u32;
            *e = k;
            budget -= k;
        }
        let numer = 1 + rng.ibelow(5);
        let sign = if rng.below(2) == 0 { 1 } else { -1 };
        let denom = 1 + rng.ibelow(3);
        let qk = rng.ibelow(n_order as u64);
        let coeff = ctx
            .q_pow(qk)
            .scale(&Rat::new((sign * numer).into(), denom.into()));
        f = f.add(&PolyFun::monomial(n_order, exps, coeff));
    }
    f
}

// ---------------------------------------------------------------------------
// Parsing and printing.
//
// Grammar (whitespace-insensitive):
//   expr   := ['-'] term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := rational | 'q'['^'k] | 's'['^'k] | var['^'k] | '(' expr ')'
//   var    := 'x' digits  (1-based)  |  't'  (alias for x1)
// ---------------------------------------------------------------------------

struct Parser<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    n_order: u32,
    n_vars: usize,
    ctx: QContext,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while matches!(self.chars.peek(), Some(c) if c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn expr(&mut self) -> Result<PolyFun, SymError> {
        self.skip_ws();
        let mut sign = 1i64;
        while let Some(&c) = self.chars.peek() {
            if c == '-' {
                sign = -sign;
                self.chars.next();
                self.skip_ws();
            } else if c == '+' {
                self.chars.next();
                self.skip_ws();
            } else {
                break;
            }
        }
        let mut acc = self.term()?;
        if sign < 0 {
            acc = acc.neg();
        }
        loop {
            self.skip_ws();
            match self.chars.peek() {
                Some('+') | Some('-') => {
                    let mut sign = 1i64;
                    while let Some(&c) = self.chars.peek() {
                        if c == '-' {
                            sign = -sign;
                            self.chars.next();
                            self.skip_ws();
                        } else if c == '+' {
                            self.chars.next();
                            self.skip_ws();
                        } else {
                            break;
                        }
                    }
                    let t = self.term()?;
                    acc = if sign < 0 { acc.sub(&t) } else { acc.add(&t) };
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<PolyFun, SymError> {
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            if self.chars.peek() == Some(&'*') {
                self.chars.next();
                self.skip_ws();
                let f = self.factor()?;
                acc = acc.mul(&f);
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<PolyFun, SymError> {
        self.skip_ws();
        match self.chars.peek() {
            Some('(') => {
                self.chars.next();
                let inner = self.expr()?;
                self.skip_ws();
                if self.chars.next() != Some(')') {
                    return Err(SymError::Parse("missing ')'".to_string()));
                }
                Ok(inner)
            }
            Some(&d) if d.is_ascii_digit() => {
                let r = self.rational()?;
                Ok(PolyFun::constant(self.n_order, self.n_vars, self.ctx.from_rat(r)))
            }
            Some('q') => {
                self.chars.next();
                let k = self.opt_exponent()?;
                Ok(PolyFun::constant(
                    self.n_order,
                    self.n_vars,
                    self.ctx.q_pow(k as i64),
                ))
            }
            Some('s') => {
                self.chars.next();
                if self.n_order % 2 != 0 {
                    return Err(SymError::Parse(
                        "s (sqrt q) is only available for even orders".to_string(),
                    ));
                }
                let k = self.opt_exponent()?;
                Ok(PolyFun::constant(
                    self.n_order,
                    self.n_vars,
                    self.ctx.sqrt_q().pow(k),
                ))
            }
            Some('t') => {
                self.chars.next();
                if self.n_vars != 1 {
                    return Err(SymError::Parse(
                        "variable 't' is only available for univariate functions".to_string(),
                    ));
                }
                let k = self.opt_exponent()?;
                Ok(PolyFun::var(self.n_order, 1, 0).pow(k))
            }
            Some('x') => {
                self.chars.next();
                let mut digits = String::new();
                while matches!(self.chars.peek(), Some(c) if c.is_ascii_digit()) {
                    digits.push(self.chars.next().unwrap());
                }
                let idx: usize = digits
                    .parse()
                    .map_err(|_| SymError::Parse(format!("bad variable 'x{digits}'")))?;
                if idx == 0 || idx > self.n_vars {
                    return Err(SymError::Parse(format!(
                        "variable x{idx} out of range 1..{}",
                        self.n_vars
                    )));
                }
                let k = self.opt_exponent()?;
                Ok(PolyFun::var(self.n_order, self.n_vars, idx - 1).pow(k))
            }
            Some(&c) => Err(SymError::Parse(format!("unexpected '{c}'"))),
            None => Err(SymError::Parse("unexpected end of input".to_string())),
        }
    }

    fn rational(&mut self) -> Result<Rat, SymError> {
        let mut digits = String::new();
        while matches!(self.chars.peek(), Some(c) if c.is_ascii_digit()) {
            digits.push(self.chars.next().unwrap());
        }
        let numer: num::BigInt = digits
            .parse()
            .map_err(|_| SymError::Parse(format!("bad integer '{digits}'")))?;
        let mut save = self.chars.clone();
        if self.chars.peek() == Some(&'/') {
            self.chars.next();
            let mut dd = String::new();
            while matches!(self.chars.peek(), Some(c) if c.is_ascii_digit()) {
                dd.push(self.chars.next().unwrap());
            }
            if dd.is_empty() {
                // not a fraction after all (e.g. "3 / x" is not supported);
                // restore and treat as plain integer
                std::mem::swap(&mut self.chars, &mut save);
                return Ok(Rat::from_integer(numer));
            }
            let denom: num::BigInt = dd
                .parse()
                .map_err(|_| SymError::Parse(format!("bad denominator '{dd}'")))?;
            if denom.is_zero() {
                return Err(SymError::Parse("zero denominator".to_string()));
            }
            Ok(Rat::new(numer, denom))
        } else {
            Ok(Rat::from_integer(numer))
        }
    }

    fn opt_exponent(&mut self) -> Result<u32, SymError> {
        if self.chars.peek() != Some(&'^') {
            return Ok(1);
        }
        self.chars.next();
        let mut digits = String::new();
        while matches!(self.chars.peek(), Some(c) if c.is_ascii_digit()) {
            digits.push(self.chars.next().unwrap());
        }
        digits
            .parse()
            .map_err(|_| SymError::Parse(format!("bad exponent '{digits}'")))
    }
}

impl PolyFun {
    pub fn parse(n_order: u32, n_vars: usize, input: &str) -> Result<Self, SymError> {
        let ctx = QContext::new(n_order)?;
        let mut p = Parser { chars: input.chars().peekable(), n_order, n_vars, ctx };
        let f = p.expr()?;
        p.skip_ws();
        if let Some(&c) = p.chars.peek() {
            return Err(SymError::Parse(format!("trailing '{c}'")));
        }
        Ok(f)
    }
}

impl fmt::Display for PolyFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let cs = c
                .to_q_string(self.n_order)
                .unwrap_or_else(|| c.to_string());
            let needs_parens = cs.contains('+') || cs.contains(' ') || cs[1..].contains('-');
            let mut vars = String::new();
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                if !vars.is_empty() {
                    vars.push('*');
                }
                if self.n_vars == 1 {
                    vars.push('t');
                } else {
                    vars.push_str(&format!("x{}", i + 1));
                }
                if k > 1 {
                    vars.push_str(&format!("^{k}"));
                }
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (vars.is_empty(), needs_parens, cs.as_str()) {
                (true, _, _) if needs_parens => write!(f, "({cs})")?,
                (true, _, _) => write!(f, "{cs}")?,
                (false, true, _) => write!(f, "({cs})*{vars}")?,
                (false, false, "1") => write!(f, "{vars}")?,
                (false, false, "-1") => write!(f, "-{vars}")?,
                (false, false, _) => write!(f, "{cs}*{vars}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn ctx3() -> QContext {
        QContext::new(3).unwrap()
    }

    #[test]
    fn ring_operations() {
        let x = PolyFun::var(3, 2, 0);
        let y = PolyFun::var(3, 2, 1);
        let f = x.mul(&y).add(&x.pow(2)); // x^2 + xy
        let g = f.sub(&x.pow(2)); // xy
        assert_eq!(g, x.mul(&y));
        assert!(f.sub(&f).is_zero());
        assert_eq!(f.total_degree(), 2);
    }

    #[test]
    fn seeded_generator_is_pinned() {
        // the exact output for one (seed, shape) is frozen so that any
        // change to the generator's sampling order is caught immediately
        let f = random_poly(7, 2, 3, 3);
        let again = random_poly(7, 2, 3, 3);
        assert_eq!(f, again);
        assert_eq!(
            f.to_string(),
            "-2*x1 + -1/3*q*x1*x2^2 + 11/6*q*x1^2*x2 + (-5/3 - 5/3*q)*x1^3"
        );
    }

    #[test]
    fn partial_derivatives_commute() {
        let f = random_poly(11, 3, 4, 3);
        let fxy = f.partial(0).partial(1);
        let fyx = f.partial(1).partial(0);
        assert_eq!(fxy, fyx);
    }

    #[test]
    fn leibniz_rule_for_partials() {
        let f = random_poly(5, 2, 3, 3);
        let g = random_poly(6, 2, 3, 3);
        let lhs = f.mul(&g).partial(0);
        let rhs = f.partial(0).mul(&g).add(&f.mul(&g.partial(0)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn evaluation_matches_structure() {
        let ctx = ctx3();
        // f = x1^2 + q*x2, at (2, 3): 4 + 3q
        let f = PolyFun::var(3, 2, 0)
            .pow(2)
            .add(&PolyFun::var(3, 2, 1).scale(&ctx.q()));
        let v = f.eval_rat(&[rat(2, 1), rat(3, 1)]).unwrap();
        let expect = ctx.from_int(4).checked_add(&ctx.q().scale(&rat_int(3))).unwrap();
        assert_eq!(v, expect);
    }

    #[test]
    fn composition_matches_pointwise_evaluation() {
        let f = random_poly(21, 2, 3, 3);
        let g1 = random_poly(22, 2, 2, 3);
        let g2 = random_poly(23, 2, 2, 3);
        let comp = f.compose(&[g1.clone(), g2.clone()]).unwrap();
        for pt in [[rat(1, 2), rat(-1, 3)], [rat(2, 1), rat(0, 1)]] {
            let inner = [g1.eval_rat(&pt).unwrap(), g2.eval_rat(&pt).unwrap()];
            assert_eq!(comp.eval_rat(&pt).unwrap(), f.eval(&inner).unwrap());
        }
    }

    #[test]
    fn chain_rule_univariate() {
        let f = random_poly(31, 1, 4, 3);
        let g = random_poly(32, 1, 3, 3);
        let comp = f.compose(&[g.clone()]).unwrap();
        let lhs = comp.derivative();
        let rhs = f.derivative().compose(&[g.clone()]).unwrap().mul(&g.derivative());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn antiderivative_inverts_derivative() {
        let f = random_poly(41, 1, 5, 3);
        assert_eq!(f.antiderivative().derivative(), f);
    }

    #[test]
    fn sqrt_of_a_square() {
        // monic top term keeps the leading coefficient inside the scalar
        // square-root shape that poly_sqrt recognizes
        let f = random_poly(51, 1, 3, 3).add(&PolyFun::var(3, 1, 0).pow(4));
        let sq = f.mul(&f);
        let r = sq.poly_sqrt().expect("square has a root");
        assert_eq!(r.mul(&r), sq);
        // non-squares are rejected
        let odd = PolyFun::var(3, 1, 0); // t
        assert!(odd.poly_sqrt().is_none());
        let two = PolyFun::constant(3, 1, ctx3().from_int(2));
        assert!(two.poly_sqrt().is_none());
    }

    #[test]
    fn parse_print_round_trip() {
        let cases = [
            random_poly(61, 2, 3, 3),
            random_poly(62, 1, 4, 3),
            random_poly(63, 3, 2, 3),
            PolyFun::zero(3, 2),
            PolyFun::one(3, 1),
        ];
        for f in cases {
            let s = f.to_string();
            let back = PolyFun::parse(f.n_order(), f.n_vars(), &s).unwrap();
            assert_eq!(back, f, "string was '{s}'");
        }
    }

    #[test]
    fn parse_handles_explicit_syntax() {
        let f = PolyFun::parse(3, 2, "x1^2*x2 - 1/2*x2 + (1+q)*x1").unwrap();
        let x1 = PolyFun::var(3, 2, 0);
        let x2 = PolyFun::var(3, 2, 1);
        let ctx = ctx3();
        let expect = x1
            .pow(2)
            .mul(&x2)
            .add(&x2.scale(&ctx.from_rat(rat(-1, 2))))
            .add(&x1.scale(&ctx.one().checked_add(&ctx.q()).unwrap()));
        assert_eq!(f, expect);
        // univariate alias
        let g = PolyFun::parse(3, 1, "t^2 + 2*t").unwrap();
        let t = PolyFun::var(3, 1, 0);
        assert_eq!(g, t.pow(2).add(&t.scale(&ctx.from_int(2))));
    }

    #[test]
    fn parse_rejects_errors() {
        assert!(PolyFun::parse(3, 2, "x3").is_err()); // out of range
        assert!(PolyFun::parse(3, 2, "x1 +").is_err());
        assert!(PolyFun::parse(3, 2, "(x1").is_err());
        assert!(PolyFun::parse(3, 2, "t").is_err()); // t needs n_vars == 1
        assert!(PolyFun::parse(3, 2, "s").is_err()); // odd order has no s
        assert!(PolyFun::parse(3, 2, "x1 x2").is_err()); // implicit product
    }

    #[test]
    fn random_polys_are_deterministic() {
        let a = random_poly(7, 2, 3, 3);
        let b = random_poly(7, 2, 3, 3);
        assert_eq!(a, b);
        let c = random_poly(8, 2, 3, 3);
        assert_ne!(a, c);
        assert!(a.total_degree() <= 3);
    }
}
