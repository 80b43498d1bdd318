//! Exact arithmetic in cyclotomic fields, the coefficient scalars of every
//! algebraic object in this crate.
//!
//! An element of `Q(zeta_M)` is stored as a vector of arbitrary-precision
//! rationals over the power basis `1, zeta, ..., zeta^{phi(M)-1}` and reduced
//! modulo the M-th cyclotomic polynomial, so `zeta` is a genuinely primitive
//! M-th root of unity (powers of `zeta` below M are never 1). No floating
//! point enters any arithmetic here.
//!
//! A calculus of order N uses the deformation parameter q, a primitive N-th
//! root of unity. For odd N we work in `Q(zeta_N)` with `q = zeta`; for even N
//! we work in `Q(zeta_{2N})` with `q = zeta^2`, so that a square root of q
//! (namely `zeta`) is available — it is needed by matrix representations and
//! by square roots of forms. [`QContext`] packages this choice.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

pub type Rat = BigRational;

/// Rational n/d as a `Rat`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer n as a `Rat`.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScalarError {
    #[error("division by zero scalar")]
    DivisionByZero,
    #[error("mismatched cyclotomic orders {0} and {1}")]
    MismatchedOrder(u32, u32),
    #[error("unsupported order {0}")]
    UnsupportedOrder(u32),
    #[error("bad q-number index: {0}")]
    BadIndex(String),
    #[error("scalar parse error: {0}")]
    Parse(String),
}

/// Coefficients of the M-th cyclotomic polynomial, ascending degree, monic.
///
/// Computed as (x^M - 1) divided by the product of all lower cyclotomic
/// polynomials at proper divisors of M; the division is exact over Z.
fn cyclotomic_poly(order: u32) -> Vec<BigInt> {
    let mut num = vec![BigInt::zero(); order as usize + 1];
    num[0] = BigInt::from(-1);
    num[order as usize] = BigInt::one();
    for d in 1..order {
        if order % d == 0 {
            num = poly_div_exact_int(&num, &cyclotomic_poly(d));
        }
    }
    num
}

/// Exact division of integer polynomials (ascending coeffs, monic divisor).
fn poly_div_exact_int(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dn = num.len() - 1;
    let dd = den.len() - 1;
    assert!(den[dd].is_one(), "divisor must be monic");
    let mut rem: Vec<BigInt> = num.to_vec();
    let mut quot = vec![BigInt::zero(); dn - dd + 1];
    for k in (0..=dn - dd).rev() {
        let c = rem[k + dd].clone();
        quot[k] = c.clone();
        for (j, dj) in den.iter().enumerate() {
            rem[k + j] -= &c * dj;
        }
    }
    assert!(rem.iter().all(|c| c.is_zero()), "division not exact");
    quot
}

struct CycContext {
    phi: Vec<BigInt>,
    deg: usize,
    /// zeta^k reduced into the power basis, for k in 0..order.
    zeta_pows: Vec<Vec<Rat>>,
}

fn context(order: u32) -> Arc<CycContext> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<CycContext>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(order)
        .or_insert_with(|| {
            let phi = cyclotomic_poly(order);
            let deg = phi.len() - 1;
            let mut zeta_pows = Vec::with_capacity(order as usize);
            for k in 0..order as usize {
                let mut raw = vec![Rat::zero(); k + 1];
                raw[k] = Rat::one();
                zeta_pows.push(poly_rem(raw, &phi, deg));
            }
            Arc::new(CycContext { phi, deg, zeta_pows })
        })
        .clone()
}

/// Remainder of a rational polynomial modulo a monic integer polynomial,
/// padded to exactly `deg` coefficients.
fn poly_rem(mut raw: Vec<Rat>, phi: &[BigInt], deg: usize) -> Vec<Rat> {
    while raw.len() > deg {
        let top = raw.len() - 1;
        let c = raw[top].clone();
        if !c.is_zero() {
            for (j, pj) in phi.iter().enumerate().take(phi.len() - 1) {
                let idx = top - (phi.len() - 1) + j;
                let delta = &c * Rat::from_integer(pj.clone());
                raw[idx] -= delta;
            }
        }
        raw.truncate(top);
    }
    raw.resize(deg, Rat::zero());
    raw
}

/// An element of the cyclotomic field `Q(zeta_order)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycScalar {
    order: u32,
    coeffs: Vec<Rat>,
}

impl CycScalar {
    pub fn zero(order: u32) -> Self {
        let ctx = context(order);
        CycScalar { order, coeffs: vec![Rat::zero(); ctx.deg] }
    }

    pub fn one(order: u32) -> Self {
        Self::from_rat(order, Rat::one())
    }

    pub fn from_rat(order: u32, r: Rat) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = r;
        s
    }

    pub fn from_int(order: u32, n: i64) -> Self {
        Self::from_rat(order, rat_int(n))
    }

    /// The primitive root `zeta` itself.
    pub fn zeta(order: u32) -> Self {
        Self::zeta_pow(order, 1)
    }

    /// `zeta^k` with k taken modulo the order (negative k allowed).
    pub fn zeta_pow(order: u32, k: i64) -> Self {
        let ctx = context(order);
        let k = k.rem_euclid(order as i64) as usize;
        CycScalar { order, coeffs: ctx.zeta_pows[k].clone() }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    /// The rational value if the element lies in Q, else None.
    pub fn as_rational(&self) -> Option<Rat> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    fn check_order(&self, other: &Self) -> Result<(), ScalarError> {
        if self.order != other.order {
            return Err(ScalarError::MismatchedOrder(self.order, other.order));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, ScalarError> {
        self.check_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CycScalar { order: self.order, coeffs })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, ScalarError> {
        self.check_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(CycScalar { order: self.order, coeffs })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, ScalarError> {
        self.check_order(other)?;
        let ctx = context(self.order);
        let mut raw = vec![Rat::zero(); 2 * ctx.deg.max(1)];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                raw[i + j] += a * b;
            }
        }
        Ok(CycScalar {
            order: self.order,
            coeffs: poly_rem(raw, &ctx.phi, ctx.deg),
        })
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in Q[x];
    /// cyclotomic polynomials are irreducible over Q, so every nonzero
    /// residue is invertible.
    pub fn checked_inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let ctx = context(self.order);
        let modulus: Vec<Rat> = ctx
            .phi
            .iter()
            .map(|c| Rat::from_integer(c.clone()))
            .collect();
        let (g, u) = poly_xgcd(&self.coeffs, &modulus);
        // g is a nonzero constant; divide the cofactor through by it.
        debug_assert!(poly_deg(&g) == Some(0));
        let ginv = Rat::one() / g[0].clone();
        let mut coeffs: Vec<Rat> = u.iter().map(|c| c * &ginv).collect();
        coeffs = poly_rem(coeffs, &ctx.phi, ctx.deg);
        Ok(CycScalar { order: self.order, coeffs })
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, ScalarError> {
        self.checked_mul(&other.checked_inv()?)
    }

    pub fn neg(&self) -> Self {
        CycScalar {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn pow(&self, mut k: u32) -> Self {
        let mut acc = Self::one(self.order);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.checked_mul(&base).unwrap();
            }
            base = base.checked_mul(&base).unwrap();
            k >>= 1;
        }
        acc
    }

    pub fn scale(&self, r: &Rat) -> Self {
        CycScalar {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    /// The field automorphism `zeta -> zeta^{-1}` (complex conjugation).
    pub fn conjugate(&self) -> Self {
        let mut out = Self::zero(self.order);
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let img = Self::zeta_pow(self.order, -(j as i64)).scale(c);
            out = out.checked_add(&img).unwrap();
        }
        out
    }

    /// Numeric value with `zeta = exp(2 pi i / order)`, as (re, im).
    pub fn to_complex(&self) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let v = c.to_f64().unwrap_or(f64::NAN);
            let theta = 2.0 * std::f64::consts::PI * (j as f64) / (self.order as f64);
            re += v * theta.cos();
            im += v * theta.sin();
        }
        (re, im)
    }

    /// Square root within the field, if one exists of the recognized shape
    /// `zeta^k * (rational square)`. Returns None otherwise (the element may
    /// still have a square root this routine does not find; callers treat
    /// None as "not a perfect square" for their inputs).
    pub fn sqrt_shape(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(self.clone());
        }
        for k in 0..self.order {
            let cand = self
                .checked_mul(&Self::zeta_pow(self.order, -(k as i64)))
                .unwrap();
            if let Some(r) = cand.as_rational() {
                if r.is_negative() {
                    continue;
                }
                let (num, den) = (r.numer().clone(), r.denom().clone());
                let sn = num.sqrt();
                let sd = den.sqrt();
                if &sn * &sn == num && &sd * &sd == den {
                    // sqrt(zeta^k) = zeta^{k/2} when k even; zeta^{(k+order)/2}
                    // when k+order is even; otherwise no root of this shape.
                    let half = if k % 2 == 0 {
                        k / 2
                    } else if self.order % 2 == 1 {
                        (k + self.order) / 2
                    } else {
                        continue;
                    };
                    let root = Self::zeta_pow(self.order, half as i64)
                        .scale(&Rat::new(sn, sd));
                    debug_assert_eq!(root.checked_mul(&root).unwrap(), *self);
                    return Some(root);
                }
            }
        }
        None
    }
}

fn poly_deg(p: &[Rat]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

/// Extended gcd over Q[x]: returns (g, u) with u*a ≡ g (mod m) and g the gcd.
fn poly_xgcd(a: &[Rat], m: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let mut r0 = m.to_vec();
    let mut r1 = a.to_vec();
    let mut s0 = vec![Rat::zero()];
    let mut s1 = vec![Rat::one()];
    while poly_deg(&r1).is_some() {
        let q = poly_quot(&r0, &r1);
        let r2 = poly_sub(&r0, &poly_mul(&q, &r1));
        let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
        r0 = r1;
        r1 = r2;
        s0 = s1;
        s1 = s2;
    }
    (r0, s0)
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len() + b.len()];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let n = a.len().max(b.len());
    let mut out = vec![Rat::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    out
}

fn poly_quot(num: &[Rat], den: &[Rat]) -> Vec<Rat> {
    let dn = match poly_deg(num) {
        Some(d) => d,
        None => return vec![Rat::zero()],
    };
    let dd = poly_deg(den).expect("division by zero polynomial");
    if dn < dd {
        return vec![Rat::zero()];
    }
    let lead = den[dd].clone();
    let mut rem = num.to_vec();
    let mut quot = vec![Rat::zero(); dn - dd + 1];
    for k in (0..=dn - dd).rev() {
        let c = &rem[k + dd] / &lead;
        if c.is_zero() {
            continue;
        }
        quot[k] = c.clone();
        for (j, dj) in den.iter().enumerate().take(dd + 1) {
            let delta = &c * dj;
            rem[k + j] -= delta;
        }
    }
    quot
}

/// The scalar field attached to a calculus of order N: the conductor is N for
/// odd N and 2N for even N (so that sqrt(q) exists in the field).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QContext {
    pub n_order: u32,
    pub conductor: u32,
}

/// Conductor of the field used for a calculus of order N.
pub fn conductor(n_order: u32) -> u32 {
    if n_order % 2 == 0 {
        2 * n_order
    } else {
        n_order
    }
}

impl QContext {
    pub fn new(n_order: u32) -> Result<Self, ScalarError> {
        if n_order < 2 {
            return Err(ScalarError::UnsupportedOrder(n_order));
        }
        Ok(QContext { n_order, conductor: conductor(n_order) })
    }

    /// The deformation parameter q, a primitive N-th root of unity.
    pub fn q(&self) -> CycScalar {
        self.q_pow(1)
    }

    /// q^k with k reduced modulo N (negative k allowed).
    pub fn q_pow(&self, k: i64) -> CycScalar {
        let step = (self.conductor / self.n_order) as i64;
        CycScalar::zeta_pow(self.conductor, step * k.rem_euclid(self.n_order as i64))
    }

    /// A square root of q: zeta itself for even N, q^{(N+1)/2} for odd N.
    pub fn sqrt_q(&self) -> CycScalar {
        if self.n_order % 2 == 0 {
            CycScalar::zeta(self.conductor)
        } else {
            self.q_pow(((self.n_order + 1) / 2) as i64)
        }
    }

    pub fn zero(&self) -> CycScalar {
        CycScalar::zero(self.conductor)
    }

    pub fn one(&self) -> CycScalar {
        CycScalar::one(self.conductor)
    }

    pub fn from_rat(&self, r: Rat) -> CycScalar {
        CycScalar::from_rat(self.conductor, r)
    }

    pub fn from_int(&self, n: i64) -> CycScalar {
        CycScalar::from_int(self.conductor, n)
    }
}

/// Convenience: q^k for a calculus of order N.
pub fn q_pow(n_order: u32, k: i64) -> CycScalar {
    QContext::new(n_order).expect("order >= 2").q_pow(k)
}

/// Cache of the higher q-numbers [l]^{(i)}.
///
/// Level 0 is the plain q-number [l] = 1 + q + ... + q^{l-1}; each higher
/// level is built from the previous by
///     [l]^{(i)} = sum_{k=1..l} q^{k-1} [k]^{(i-1)},
/// and by convention [l]^{(-1)} = 1 (so the zeroth alpha-coefficient is 1).
/// The key vanishing fact driving everything: [N-i+1]^{(i-1)} = 0 for
/// i = 1 .. N-1.
pub struct QNumberTower {
    ctx: QContext,
    cache: HashMap<(u32, i64), CycScalar>,
}

impl QNumberTower {
    pub fn new(n_order: u32) -> Result<Self, ScalarError> {
        Ok(QNumberTower { ctx: QContext::new(n_order)?, cache: HashMap::new() })
    }

    pub fn context(&self) -> QContext {
        self.ctx
    }

    /// [l]^{(i)} for l >= 1, i >= -1.
    pub fn q_number(&mut self, l: u32, i: i64) -> Result<CycScalar, ScalarError> {
        if l < 1 {
            return Err(ScalarError::BadIndex(format!("l = {l} must be >= 1")));
        }
        if i < -1 {
            return Err(ScalarError::BadIndex(format!("i = {i} must be >= -1")));
        }
        if let Some(v) = self.cache.get(&(l, i)) {
            return Ok(v.clone());
        }
        let val = if i == -1 {
            self.ctx.one()
        } else if i == 0 {
            let mut acc = self.ctx.zero();
            for k in 0..l {
                acc = acc.checked_add(&self.ctx.q_pow(k as i64))?;
            }
            acc
        } else {
            let mut acc = self.ctx.zero();
            for k in 1..=l {
                let prev = self.q_number(k, i - 1)?;
                acc = acc.checked_add(&self.ctx.q_pow(k as i64 - 1).checked_mul(&prev)?)?;
            }
            acc
        };
        self.cache.insert((l, i), val.clone());
        Ok(val)
    }

    /// The coefficient of `G^{l-i} B G^i` in the l-fold q-differential of a
    /// homogeneous element B of grade `a`:
    ///     alpha^{(l)}_i = (-1)^i q^{(2a+i-1)i/2} [l-i+1]^{(i-1)}.
    pub fn alpha_coeff(&mut self, l: u32, i: u32, a: u32) -> Result<CycScalar, ScalarError> {
        if i > l {
            return Err(ScalarError::BadIndex(format!("i = {i} exceeds l = {l}")));
        }
        if i == 0 {
            return Ok(self.ctx.one());
        }
        let sigma = (2 * a as i64 + i as i64 - 1) * i as i64 / 2;
        let tower = self.q_number(l - i + 1, i as i64 - 1)?;
        let mut out = self.ctx.q_pow(sigma).checked_mul(&tower)?;
        if i % 2 == 1 {
            out = out.neg();
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Textual form: sums of rational multiples of q-powers (and s = sqrt q for
// even N), e.g. "1 - 1/2*q + q^2" or "3*s*q".
// ---------------------------------------------------------------------------

impl CycScalar {
    /// Render in terms of q (and s = sqrt q when the conductor is twice N).
    /// Returns None if the element does not lie in the q/s-span for the given
    /// order (cannot happen for conductors produced by [`conductor`]).
    pub fn to_q_string(&self, n_order: u32) -> Option<String> {
        if self.order != conductor(n_order) {
            return None;
        }
        let even = n_order % 2 == 0;
        let mut parts: Vec<(bool, String)> = Vec::new(); // (negative, body)
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (s_pow, q_pow) = if even {
                (j % 2, (j / 2) as u32)
            } else {
                (0, j as u32)
            };
            let mut factors: Vec<String> = Vec::new();
            let mag = c.abs();
            if !mag.is_one() || (s_pow == 0 && q_pow == 0) {
                factors.push(mag.to_string());
            }
            if s_pow == 1 {
                factors.push("s".to_string());
            }
            match q_pow {
                0 => {}
                1 => factors.push("q".to_string()),
                k => factors.push(format!("q^{k}")),
            }
            parts.push((c.is_negative(), factors.join("*")));
        }
        if parts.is_empty() {
            return Some("0".to_string());
        }
        let mut out = String::new();
        for (i, (neg, body)) in parts.iter().enumerate() {
            if i == 0 {
                if *neg {
                    out.push('-');
                }
            } else {
                out.push_str(if *neg { " - " } else { " + " });
            }
            out.push_str(body);
        }
        Some(out)
    }

    /// Parse the textual form. Accepts sums/differences of terms, each a
    /// product of an optional rational, optional `s` (even N only) and an
    /// optional `q`-power: "1 - 1/2*q + q^2", "3*s*q", "-q".
    pub fn parse_q_string(n_order: u32, input: &str) -> Result<CycScalar, ScalarError> {
        let ctx = QContext::new(n_order)?;
        let cleaned: String = input.replace('\u{2212}', "-");
        let mut chars = cleaned.chars().peekable();
        let mut acc = ctx.zero();
        let mut pending_sign = 1i64;
        let mut expect_term = true;
        while let Some(&c) = chars.peek() {
            if c.is_whitespace() {
                chars.next();
                continue;
            }
            if c == '+' || c == '-' {
                chars.next();
                if c == '-' {
                    pending_sign = -pending_sign;
                }
                expect_term = true;
                continue;
            }
            if !expect_term {
                return Err(ScalarError::Parse(format!("unexpected '{c}'")));
            }
            let term = parse_scalar_term(&mut chars, &ctx)?;
            let term = if pending_sign < 0 { term.neg() } else { term };
            acc = acc.checked_add(&term)?;
            pending_sign = 1;
            expect_term = false;
        }
        if expect_term {
            return Err(ScalarError::Parse("empty term".to_string()));
        }
        Ok(acc)
    }
}

fn parse_scalar_term(
    chars: &mut std::iter::Peekable<std::str::Chars>,
    ctx: &QContext,
) -> Result<CycScalar, ScalarError> {
    let mut acc = ctx.one();
    let mut saw_factor = false;
    loop {
        while matches!(chars.peek(), Some(c) if c.is_whitespace()) {
            chars.next();
        }
        match chars.peek() {
            Some(&d) if d.is_ascii_digit() => {
                let r = parse_rational(chars)?;
                acc = acc.checked_mul(&ctx.from_rat(r))?;
            }
            Some('q') => {
                chars.next();
                let e = parse_opt_exponent(chars)?;
                acc = acc.checked_mul(&ctx.q_pow(e as i64))?;
            }
            Some('s') => {
                chars.next();
                if ctx.n_order % 2 != 0 {
                    return Err(ScalarError::Parse(
                        "s (sqrt q) is only meaningful for even orders".to_string(),
                    ));
                }
                let e = parse_opt_exponent(chars)?;
                acc = acc.checked_mul(&ctx.sqrt_q().pow(e))?;
            }
            _ => {
                if !saw_factor {
                    return Err(ScalarError::Parse("expected a term".to_string()));
                }
                return Ok(acc);
            }
        }
        saw_factor = true;
        while matches!(chars.peek(), Some(c) if c.is_whitespace()) {
            chars.next();
        }
        if chars.peek() == Some(&'*') {
            chars.next();
        } else {
            return Ok(acc);
        }
    }
}

fn parse_rational(
    chars: &mut std::iter::Peekable<std::str::Chars>,
) -> Result<Rat, ScalarError> {
    let mut digits = String::new();
    while matches!(chars.peek(), Some(c) if c.is_ascii_digit()) {
        digits.push(chars.next().unwrap());
    }
    let numer: BigInt = digits
        .parse()
        .map_err(|_| ScalarError::Parse(format!("bad integer '{digits}'")))?;
    if chars.peek() == Some(&'/') {
        chars.next();
        let mut dd = String::new();
        while matches!(chars.peek(), Some(c) if c.is_ascii_digit()) {
            dd.push(chars.next().unwrap());
        }
        let denom: BigInt = dd
            .parse()
            .map_err(|_| ScalarError::Parse(format!("bad denominator '{dd}'")))?;
        if denom.is_zero() {
            return Err(ScalarError::Parse("zero denominator".to_string()));
        }
        Ok(Rat::new(numer, denom))
    } else {
        Ok(Rat::from_integer(numer))
    }
}

fn parse_opt_exponent(
    chars: &mut std::iter::Peekable<std::str::Chars>,
) -> Result<u32, ScalarError> {
    if chars.peek() != Some(&'^') {
        return Ok(1);
    }
    chars.next();
    let mut digits = String::new();
    while matches!(chars.peek(), Some(c) if c.is_ascii_digit()) {
        digits.push(chars.next().unwrap());
    }
    digits
        .parse()
        .map_err(|_| ScalarError::Parse(format!("bad exponent '{digits}'")))
}

impl fmt::Display for CycScalar {
    /// Fallback rendering over the zeta power basis ("z^k"); q-based
    /// rendering needs the calculus order, see [`CycScalar::to_q_string`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if j == 0 {
                write!(f, "{c}")?;
            } else if j == 1 {
                write!(f, "{c}*z")?;
            } else {
                write!(f, "{c}*z^{j}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
