//! The Z_N-graded left module of differential forms on a chart.
//!
//! A monomial is a word in the higher-order differentials d^a x^i (1 <= a <=
//! N-1); a form is a finite sum of such words with polynomial coefficients
//! written on the left. Three rewriting regimes are supported:
//!
//! * `Truncated` — the order-N calculus proper: words of order N are
//!   identified with q^{a_1} times their left rotation and canonicalized to
//!   the least rotation; words of order > N vanish. A word fixed by a
//!   nontrivial rotation accumulates two distinct phases and is therefore
//!   zero — first-order differentials come out N-nilpotent as a theorem of
//!   the rewriting, not as an extra rule.
//! * `Free` — the one-dimensional tower (order 3, one variable): moving d^2t
//!   left past dt costs q^2, (dt)^3 = 0, powers of d^2t survive unboundedly.
//! * `Unreduced` — words are kept verbatim. This is where the recurrence
//!   polynomials of the nilpotency module are built, so that "the relations
//!   imply the vanishing conditions" can be tested as an actual reduction.

use crate::scalar::{CycScalar, QContext};
use crate::symfun::PolyFun;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// One factor d^alpha x^idx; idx is 1-based.
pub type Factor = (u32, u32);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DiffMonomial {
    factors: Vec<Factor>,
}

impl DiffMonomial {
    /// The empty word (the module unit).
    pub fn unit() -> Self {
        DiffMonomial { factors: Vec::new() }
    }

    pub fn from_factors(factors: Vec<Factor>) -> Self {
        DiffMonomial { factors }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    /// Sum of the differential orders of the factors.
    pub fn order(&self) -> u32 {
        self.factors.iter().map(|f| f.0).sum()
    }

    pub fn grade(&self, n_order: u32) -> u32 {
        self.order() % n_order
    }
}

impl fmt::Display for DiffMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for &(a, i) in &self.factors {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if a == 1 {
                write!(f, "dx{i}")?;
            } else {
                write!(f, "d{a}x{i}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Truncated,
    Free,
    Unreduced,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormError {
    #[error("differential order {0} outside 1..={1}")]
    BadOrder(u32, u32),
    #[error("coordinate index {0} outside 1..={1}")]
    BadCoordinate(u32, u32),
    #[error("non-constant coefficient cannot cross a higher-order differential")]
    NonCommutativeCoefficient,
    #[error("operation is not available at order {0}")]
    UnsupportedN(u32),
}

/// Result of canonicalizing a raw word: either zero or q^phase times a
/// normal-form monomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normalized {
    Zero,
    Term { phase: u32, monomial: DiffMonomial },
}

/// Canonicalize a raw factor word under the rules of the given mode.
///
/// Truncated mode, order exactly N: every rotation carries the phase
/// accumulated from the factors rotated off the front (the word equals
/// q^{a_1} times its single left rotation); the representative is the
/// lexicographically least rotation under componentwise (alpha, idx) order.
/// If the least rotation is reachable with two distinct phases the word is
/// zero.
pub fn normal_form(
    n_order: u32,
    n_vars: usize,
    mode: Mode,
    factors: &[Factor],
) -> Result<Normalized, FormError> {
    for &(a, i) in factors {
        if a < 1 || a > n_order - 1 {
            return Err(FormError::BadOrder(a, n_order - 1));
        }
        if i < 1 || i as usize > n_vars {
            return Err(FormError::BadCoordinate(i, n_vars as u32));
        }
    }
    match mode {
        Mode::Unreduced => Ok(Normalized::Term {
            phase: 0,
            monomial: DiffMonomial::from_factors(factors.to_vec()),
        }),
        Mode::Free => {
            if n_order != 3 || n_vars != 1 {
                return Err(FormError::UnsupportedN(n_order));
            }
            let ones = factors.iter().filter(|f| f.0 == 1).count();
            if ones >= 3 {
                return Ok(Normalized::Zero);
            }
            // each d2t standing left of a dt costs q^2 to move right
            let mut inversions = 0u32;
            let mut twos_seen = 0u32;
            for &(a, _) in factors {
                if a == 2 {
                    twos_seen += 1;
                } else {
                    inversions += twos_seen;
                }
            }
            let mut canon = vec![(1u32, 1u32); ones];
            canon.extend(std::iter::repeat((2u32, 1u32)).take(factors.len() - ones));
            Ok(Normalized::Term {
                phase: (2 * inversions) % 3,
                monomial: DiffMonomial::from_factors(canon),
            })
        }
        Mode::Truncated => {
            let order: u32 = factors.iter().map(|f| f.0).sum();
            if order < n_order {
                return Ok(Normalized::Term {
                    phase: 0,
                    monomial: DiffMonomial::from_factors(factors.to_vec()),
                });
            }
            if order > n_order {
                return Ok(Normalized::Zero);
            }
            let m = factors.len();
            let mut rots: Vec<(Vec<Factor>, u32)> = Vec::with_capacity(m);
            let mut phase = 0u32;
            for t in 0..m {
                let rot: Vec<Factor> = factors[t..]
                    .iter()
                    .chain(&factors[..t])
                    .cloned()
                    .collect();
                rots.push((rot, phase % n_order));
                phase += factors[t].0;
            }
            let min_word = rots.iter().map(|(w, _)| w).min().unwrap().clone();
            let phases: BTreeSet<u32> = rots
                .iter()
                .filter(|(w, _)| *w == min_word)
                .map(|(_, p)| *p)
                .collect();
            if phases.len() > 1 {
                Ok(Normalized::Zero)
            } else {
                Ok(Normalized::Term {
                    phase: *phases.iter().next().unwrap(),
                    monomial: DiffMonomial::from_factors(min_word),
                })
            }
        }
    }
}

/// A differential form: map from normal-form monomials to left coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Form {
    n_order: u32,
    n_vars: usize,
    mode: Mode,
    terms: BTreeMap<DiffMonomial, PolyFun>,
}

impl Form {
    pub fn zero(n_order: u32, n_vars: usize, mode: Mode) -> Self {
        Form { n_order, n_vars, mode, terms: BTreeMap::new() }
    }

    /// A grade-0 form: just a coefficient function.
    pub fn fun(n_order: u32, n_vars: usize, mode: Mode, f: PolyFun) -> Self {
        let mut out = Self::zero(n_order, n_vars, mode);
        if !f.is_zero() {
            out.terms.insert(DiffMonomial::unit(), f);
        }
        out
    }

    /// Coefficient times a raw word, canonicalized on entry.
    pub fn word(
        n_order: u32,
        n_vars: usize,
        mode: Mode,
        coeff: PolyFun,
        factors: &[Factor],
    ) -> Result<Self, FormError> {
        let mut out = Self::zero(n_order, n_vars, mode);
        let ctx = QContext::new(n_order).expect("order >= 2");
        out.accumulate(factors, coeff, &ctx)?;
        Ok(out)
    }

    pub fn n_order(&self) -> u32 {
        self.n_order
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DiffMonomial, &PolyFun)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, monomial: &DiffMonomial) -> Option<&PolyFun> {
        self.terms.get(monomial)
    }

    fn assert_context(&self, other: &Self) {
        assert_eq!(self.n_order, other.n_order, "mixed calculus orders");
        assert_eq!(self.n_vars, other.n_vars, "mixed chart dimensions");
        assert_eq!(self.mode, other.mode, "mixed algebra modes");
    }

    fn insert(&mut self, monomial: DiffMonomial, coeff: PolyFun) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(monomial) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(&coeff);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn accumulate(
        &mut self,
        word: &[Factor],
        coeff: PolyFun,
        ctx: &QContext,
    ) -> Result<(), FormError> {
        if coeff.is_zero() {
            return Ok(());
        }
        match normal_form(self.n_order, self.n_vars, self.mode, word)? {
            Normalized::Zero => {}
            Normalized::Term { phase, monomial } => {
                let c = if phase == 0 {
                    coeff
                } else {
                    coeff.scale(&ctx.q_pow(phase as i64))
                };
                self.insert(monomial, c);
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_context(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Form {
            n_order: self.n_order,
            n_vars: self.n_vars,
            mode: self.mode,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn scale(&self, s: &CycScalar) -> Self {
        if s.is_zero() {
            return Self::zero(self.n_order, self.n_vars, self.mode);
        }
        Form {
            n_order: self.n_order,
            n_vars: self.n_vars,
            mode: self.mode,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.scale(s))).collect(),
        }
    }

    /// Left action of a coefficient function: g · (f·w) = (g f)·w.
    pub fn left_mul_fun(&self, g: &PolyFun) -> Self {
        let mut out = Self::zero(self.n_order, self.n_vars, self.mode);
        for (m, c) in &self.terms {
            out.insert(m.clone(), g.mul(c));
        }
        out
    }

    /// Left multiplication by a single first-order differential dx^i.
    /// Coefficients migrate across one dx freely (first-order differentials
    /// commute with functions), so this is legal in every mode.
    pub fn left_mul_dx(&self, i: u32) -> Result<Self, FormError> {
        let ctx = QContext::new(self.n_order).expect("order >= 2");
        let mut out = Self::zero(self.n_order, self.n_vars, self.mode);
        for (m, c) in &self.terms {
            let mut w = Vec::with_capacity(m.factors.len() + 1);
            w.push((1u32, i));
            w.extend_from_slice(&m.factors);
            out.accumulate(&w, c.clone(), &ctx)?;
        }
        Ok(out)
    }

    /// Product of forms. Coefficients always collect on the left; a
    /// non-constant right coefficient may only cross a left word made of
    /// first-order differentials — except in the free one-dimensional tower,
    /// where the crossing is computed exactly. Functions commute with dt,
    /// while d2t·g = g·d2t + (1-q) g' (dt)^2, so moving g left across the
    /// word adds, for every d2t factor, a correction term with that factor
    /// flipped to (dt)^2 and the coefficient (1-q) g'. (Iterated corrections
    /// carry four dt factors and die against (dt)^3 = 0, so one pass is
    /// exact.)
    pub fn mul(&self, other: &Self) -> Result<Self, FormError> {
        self.assert_context(other);
        let ctx = QContext::new(self.n_order).expect("order >= 2");
        let one_minus_q = ctx.one().checked_sub(&ctx.q()).expect("same order");
        let mut out = Self::zero(self.n_order, self.n_vars, self.mode);
        for (v, f) in &self.terms {
            let first_order_only = v.factors.iter().all(|&(a, _)| a == 1);
            for (w, g) in &other.terms {
                if !g.is_constant() && !first_order_only {
                    if self.mode != Mode::Free {
                        return Err(FormError::NonCommutativeCoefficient);
                    }
                    let gp = g.partial(0);
                    if !gp.is_zero() {
                        let corr = f.mul(&gp).scale(&one_minus_q);
                        for p in 0..v.factors.len() {
                            if v.factors[p].0 != 2 {
                                continue;
                            }
                            let mut word: Vec<Factor> =
                                Vec::with_capacity(v.factors.len() + w.factors.len() + 1);
                            word.extend_from_slice(&v.factors[..p]);
                            word.push((1, 1));
                            word.push((1, 1));
                            word.extend_from_slice(&v.factors[p + 1..]);
                            word.extend_from_slice(&w.factors);
                            out.accumulate(&word, corr.clone(), &ctx)?;
                        }
                    }
                }
                let word: Vec<Factor> =
                    v.factors.iter().chain(&w.factors).cloned().collect();
                out.accumulate(&word, f.mul(g), &ctx)?;
            }
        }
        Ok(out)
    }

    /// The exterior differential: d(f·w) = sum_i (∂_i f) dx^i w + f·dw, with
    /// dw distributing over the factors under the q-Leibniz rule — bumping
    /// factor k carries the phase q^{order of the prefix}, and a factor of
    /// order N-1 differentiates to zero.
    pub fn exterior_d(&self) -> Self {
        let ctx = QContext::new(self.n_order).expect("order >= 2");
        let mut out = Self::zero(self.n_order, self.n_vars, self.mode);
        for (mono, f) in &self.terms {
            for i in 0..self.n_vars {
                let df = f.partial(i);
                if df.is_zero() {
                    continue;
                }
                let mut w = Vec::with_capacity(mono.factors.len() + 1);
                w.push((1u32, i as u32 + 1));
                w.extend_from_slice(&mono.factors);
                out.accumulate(&w, df, &ctx).expect("stored monomials are valid");
            }
            let mut prefix = 0u32;
            for k in 0..mono.factors.len() {
                let (alpha, _) = mono.factors[k];
                if alpha < self.n_order - 1 {
                    let mut w = mono.factors.clone();
                    w[k].0 += 1;
                    let coeff = if prefix == 0 {
                        f.clone()
                    } else {
                        f.scale(&ctx.q_pow(prefix as i64))
                    };
                    out.accumulate(&w, coeff, &ctx).expect("stored monomials are valid");
                }
                prefix = (prefix + alpha) % self.n_order;
            }
        }
        out
    }

    /// d applied k times.
    pub fn exterior_d_iter(&self, k: u32) -> Self {
        let mut f = self.clone();
        for _ in 0..k {
            f = f.exterior_d();
        }
        f
    }

    /// Common grade of all stored monomials, or None when mixed or zero.
    pub fn homogeneous_grade(&self) -> Option<u32> {
        let mut g: Option<u32> = None;
        for m in self.terms.keys() {
            let gm = m.grade(self.n_order);
            match g {
                None => g = Some(gm),
                Some(x) if x == gm => {}
                _ => return None,
            }
        }
        g
    }

    /// Reinterpret this form in the truncated algebra: every stored word is
    /// passed through the truncated normal form (with the cyclic relations
    /// and order-> N truncation) and the results are summed.
    pub fn reduce_to_truncated(&self) -> Result<Self, FormError> {
        let ctx = QContext::new(self.n_order).expect("order >= 2");
        let mut out = Self::zero(self.n_order, self.n_vars, Mode::Truncated);
        for (m, c) in &self.terms {
            out.accumulate(&m.factors, c.clone(), &ctx)?;
        }
        Ok(out)
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let cs = c.to_string();
            if cs.starts_with('(') && cs.ends_with(')') {
                write!(f, "{cs} ⊗ {m}")?;
            } else {
                write!(f, "({cs}) ⊗ {m}")?;
            }
        }
        Ok(())
    }
}

/// All independent normal-form monomials of the order-3 truncated calculus
/// in n variables (orders 1, 2, 3), by brute enumeration plus normal-form
/// deduplication.
pub fn basis_enumerate(n_order: u32, n_vars: usize) -> Result<Vec<DiffMonomial>, FormError> {
    if n_order != 3 {
        return Err(FormError::UnsupportedN(n_order));
    }
    let mut canon: BTreeSet<DiffMonomial> = BTreeSet::new();
    let mut stack: Vec<Vec<Factor>> = vec![Vec::new()];
    while let Some(word) = stack.pop() {
        let order: u32 = word.iter().map(|f| f.0).sum();
        if order > 0 {
            match normal_form(n_order, n_vars, Mode::Truncated, &word)? {
                Normalized::Zero => {}
                Normalized::Term { monomial, .. } => {
                    canon.insert(monomial);
                }
            }
        }
        if order < n_order {
            for a in 1..=(n_order - 1).min(n_order - order) {
                for i in 1..=n_vars as u32 {
                    let mut w = word.clone();
                    w.push((a, i));
                    stack.push(w);
                }
            }
        }
    }
    Ok(canon.into_iter().collect())
}

/// Closed-form dimension of the order-3 truncated module in n variables.
pub fn module_dimension(n_vars: u64) -> u64 {
    (n_vars.pow(3) + 6 * n_vars.pow(2) + 5 * n_vars) / 3
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;
    use crate::symfun::random_poly;

    fn ctx(n: u32) -> QContext {
        QContext::new(n).unwrap()
    }

    fn one_fun(n_order: u32, n_vars: usize) -> PolyFun {
        PolyFun::one(n_order, n_vars)
    }

    fn nf3(word: &[Factor]) -> Normalized {
        normal_form(3, 3, Mode::Truncated, word).unwrap()
    }

    #[test]
    fn low_order_words_are_untouched() {
        let w = [(1, 2), (1, 1)];
        match nf3(&w) {
            Normalized::Term { phase, monomial } => {
                assert_eq!(phase, 0);
                assert_eq!(monomial.factors(), &w);
            }
            _ => panic!("order-2 word must survive"),
        }
    }

    #[test]
    fn full_order_words_rotate_to_least() {
        // already least
        match nf3(&[(1, 1), (1, 2), (1, 3)]) {
            Normalized::Term { phase, monomial } => {
                assert_eq!(phase, 0);
                assert_eq!(monomial.factors(), &[(1, 1), (1, 2), (1, 3)]);
            }
            _ => panic!(),
        }
        // two rotations away, each rotation costs the order rotated off
        match nf3(&[(1, 2), (1, 3), (1, 1)]) {
            Normalized::Term { phase, monomial } => {
                assert_eq!(phase, 2);
                assert_eq!(monomial.factors(), &[(1, 1), (1, 2), (1, 3)]);
            }
            _ => panic!(),
        }
        // mixed orders: d2x1*dx1 rotates to dx1*d2x1 with cost q^2
        match nf3(&[(2, 1), (1, 1)]) {
            Normalized::Term { phase, monomial } => {
                assert_eq!(phase, 2);
                assert_eq!(monomial.factors(), &[(1, 1), (2, 1)]);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn periodic_words_vanish() {
        assert_eq!(nf3(&[(1, 1), (1, 1), (1, 1)]), Normalized::Zero);
    }

    #[test]
    fn overlong_words_vanish() {
        assert_eq!(nf3(&[(1, 1), (1, 1), (1, 2), (1, 2)]), Normalized::Zero);
        assert_eq!(nf3(&[(2, 1), (2, 2)]), Normalized::Zero);
    }

    #[test]
    fn rotation_phases_compose_around_the_cycle() {
        // expressing w via rot^t and then rot^t via the canonical word must
        // agree with expressing w directly; going all the way around costs
        // q^{total order} = q^N = 1
        let w = [(1, 2), (2, 3)];
        let (pw, canon) = match nf3(&w) {
            Normalized::Term { phase, monomial } => (phase, monomial),
            _ => panic!(),
        };
        let rot = [(2, 3), (1, 2)];
        let (pr, canon2) = match nf3(&rot) {
            Normalized::Term { phase, monomial } => (phase, monomial),
            _ => panic!(),
        };
        assert_eq!(canon, canon2);
        // w = q^{alpha_1} rot, so phase(w) = alpha_1 + phase(rot) mod 3
        assert_eq!(pw, (1 + pr) % 3);
        let total: u32 = w.iter().map(|f| f.0).sum();
        assert_eq!(total % 3, 0);
    }

    #[test]
    fn bad_factors_are_rejected() {
        assert!(matches!(
            normal_form(3, 2, Mode::Truncated, &[(3, 1)]),
            Err(FormError::BadOrder(3, 2))
        ));
        assert!(matches!(
            normal_form(3, 2, Mode::Truncated, &[(1, 5)]),
            Err(FormError::BadCoordinate(5, 2))
        ));
    }

    #[test]
    fn free_mode_canonicalizes_the_tower() {
        // d2t * dt -> q^2 dt * d2t
        match normal_form(3, 1, Mode::Free, &[(2, 1), (1, 1)]).unwrap() {
            Normalized::Term { phase, monomial } => {
                assert_eq!(phase, 2);
                assert_eq!(monomial.factors(), &[(1, 1), (2, 1)]);
            }
            _ => panic!(),
        }
        // (dt)^3 = 0, but high powers of d2t survive
        assert_eq!(
            normal_form(3, 1, Mode::Free, &[(1, 1); 3]).unwrap(),
            Normalized::Zero
        );
        match normal_form(3, 1, Mode::Free, &[(2, 1); 5]).unwrap() {
            Normalized::Term { phase, monomial } => {
                assert_eq!(phase, 0);
                assert_eq!(monomial.order(), 10);
            }
            _ => panic!("powers of d2t must survive in free mode"),
        }
        assert!(matches!(
            normal_form(4, 1, Mode::Free, &[(1, 1)]),
            Err(FormError::UnsupportedN(4))
        ));
    }

    #[test]
    fn exterior_d_chain_on_coordinates() {
        // d x -> dx -> d2x -> 0 at order 3
        let x = Form::fun(3, 1, Mode::Truncated, PolyFun::var(3, 1, 0));
        let dx = x.exterior_d();
        assert_eq!(
            dx,
            Form::word(3, 1, Mode::Truncated, one_fun(3, 1), &[(1, 1)]).unwrap()
        );
        let d2x = dx.exterior_d();
        assert_eq!(
            d2x,
            Form::word(3, 1, Mode::Truncated, one_fun(3, 1), &[(2, 1)]).unwrap()
        );
        assert!(d2x.exterior_d().is_zero());
    }

    #[test]
    fn differential_of_dt_squared() {
        // d[(dt)^2] = (q + q^2)(dt d2t) = -dt d2t in the one-variable tower
        let dt2 = Form::word(3, 1, Mode::Free, one_fun(3, 1), &[(1, 1), (1, 1)]).unwrap();
        let d = dt2.exterior_d();
        let expect = Form::word(3, 1, Mode::Free, one_fun(3, 1), &[(1, 1), (2, 1)])
            .unwrap()
            .neg();
        assert_eq!(d, expect);
    }

    #[test]
    fn d_cubed_kills_functions_at_order_three() {
        for (seed, n) in [(1u64, 1usize), (2, 2), (3, 3)] {
            let f = random_poly(seed, n, 4, 3);
            let form = Form::fun(3, n, Mode::Truncated, f);
            assert!(form.exterior_d_iter(3).is_zero(), "seed {seed}, n {n}");
        }
        // and specifically t^2 in one variable
        let t2 = PolyFun::var(3, 1, 0).pow(2);
        assert!(Form::fun(3, 1, Mode::Truncated, t2).exterior_d_iter(3).is_zero());
    }

    #[test]
    fn products_collect_coefficients_left() {
        let f = random_poly(71, 2, 2, 3);
        let g = random_poly(72, 2, 2, 3);
        let a = Form::word(3, 2, Mode::Truncated, f.clone(), &[(1, 1)]).unwrap();
        let b = Form::word(3, 2, Mode::Truncated, g.clone(), &[(1, 2)]).unwrap();
        let ab = a.mul(&b).unwrap();
        let expect =
            Form::word(3, 2, Mode::Truncated, f.mul(&g), &[(1, 1), (1, 2)]).unwrap();
        assert_eq!(ab, expect);
    }

    #[test]
    fn nonconstant_coefficient_blocked_by_higher_factor() {
        let f = one_fun(3, 2);
        let g = PolyFun::var(3, 2, 0);
        let a = Form::word(3, 2, Mode::Truncated, f, &[(2, 1)]).unwrap();
        let b = Form::word(3, 2, Mode::Truncated, g, &[(1, 2)]).unwrap();
        assert_eq!(a.mul(&b), Err(FormError::NonCommutativeCoefficient));
        // constant right coefficient is fine
        let c = Form::word(3, 2, Mode::Truncated, one_fun(3, 2).scale(&ctx(3).q()), &[(1, 2)])
            .unwrap();
        assert!(a.mul(&c).is_ok());
    }

    #[test]
    fn free_mode_square_collects_the_commutation_phase() {
        // (q^{-l} s dt (d2t)^l)^2 = s^2 (dt)^2 (d2t)^{2l} for l = 1, s = t
        let c = ctx(3);
        let s = PolyFun::var(3, 1, 0);
        let theta = Form::word(
            3,
            1,
            Mode::Free,
            s.clone().scale(&c.q_pow(-1)),
            &[(1, 1), (2, 1)],
        )
        .unwrap();
        let sq = theta.mul(&theta).unwrap();
        let expect = Form::word(
            3,
            1,
            Mode::Free,
            s.mul(&s),
            &[(1, 1), (1, 1), (2, 1), (2, 1)],
        )
        .unwrap();
        assert_eq!(sq, expect);
    }

    #[test]
    fn free_mode_coefficient_crossing_is_exact() {
        // d2t · (g d2t) = g (d2t)^2 + (1-q) g' (dt)^2 d2t
        let c = ctx(3);
        let g = PolyFun::var(3, 1, 0).pow(2); // g = t^2, g' = 2t
        let a = Form::word(3, 1, Mode::Free, one_fun(3, 1), &[(2, 1)]).unwrap();
        let b = Form::word(3, 1, Mode::Free, g.clone(), &[(2, 1)]).unwrap();
        let prod = a.mul(&b).unwrap();
        let one_minus_q = c.one().checked_sub(&c.q()).unwrap();
        let expect = Form::word(3, 1, Mode::Free, g, &[(2, 1), (2, 1)])
            .unwrap()
            .add(
                &Form::word(
                    3,
                    1,
                    Mode::Free,
                    PolyFun::var(3, 1, 0).scale(&c.from_int(2)).scale(&one_minus_q),
                    &[(1, 1), (1, 1), (2, 1)],
                )
                .unwrap(),
            );
        assert_eq!(prod, expect);
        // crossing a dt-only word stays correction-free
        let dt = Form::word(3, 1, Mode::Free, one_fun(3, 1), &[(1, 1)]).unwrap();
        let tdt = Form::word(3, 1, Mode::Free, PolyFun::var(3, 1, 0), &[(1, 1)]).unwrap();
        assert_eq!(
            dt.mul(&tdt).unwrap(),
            Form::word(3, 1, Mode::Free, PolyFun::var(3, 1, 0), &[(1, 1), (1, 1)]).unwrap()
        );
    }

    #[test]
    fn free_mode_q_leibniz_with_function_coefficients() {
        // with the exact crossing rule, d(a·b) = da·b + q^{|a|} a·db holds
        // even when b carries a non-constant coefficient
        let c = ctx(3);
        for (seed, word_a, word_b) in [
            (21u64, vec![(1u32, 1u32)], vec![(2u32, 1u32)]),
            (22, vec![(2, 1)], vec![(2, 1)]),
            (23, vec![(1, 1), (2, 1)], vec![(2, 1), (2, 1)]),
            (24, vec![(2, 1), (2, 1)], vec![(1, 1)]),
        ] {
            let f = random_poly(seed, 1, 3, 3);
            let g = random_poly(seed + 7, 1, 3, 3);
            let a = Form::word(3, 1, Mode::Free, f, &word_a).unwrap();
            let b = Form::word(3, 1, Mode::Free, g, &word_b).unwrap();
            let grade_a = word_a.iter().map(|&(x, _)| x).sum::<u32>() % 3;
            let lhs = a.mul(&b).unwrap().exterior_d();
            let rhs = a.exterior_d().mul(&b).unwrap().add(
                &a.mul(&b.exterior_d()).unwrap().scale(&c.q_pow(grade_a as i64)),
            );
            assert_eq!(lhs, rhs, "seed {seed}");
        }
    }

    #[test]
    fn free_mode_product_is_associative() {
        let words: [&[Factor]; 3] = [&[(1, 1)], &[(2, 1)], &[(2, 1), (2, 1)]];
        for (i, wa) in words.iter().enumerate() {
            for (j, wb) in words.iter().enumerate() {
                for (k, wc) in words.iter().enumerate() {
                    let s = (i * 9 + j * 3 + k) as u64;
                    let a =
                        Form::word(3, 1, Mode::Free, random_poly(s + 31, 1, 2, 3), wa).unwrap();
                    let b =
                        Form::word(3, 1, Mode::Free, random_poly(s + 61, 1, 2, 3), wb).unwrap();
                    let c =
                        Form::word(3, 1, Mode::Free, random_poly(s + 91, 1, 2, 3), wc).unwrap();
                    assert_eq!(
                        a.mul(&b).unwrap().mul(&c).unwrap(),
                        a.mul(&b.mul(&c).unwrap()).unwrap(),
                    );
                }
            }
        }
    }

    #[test]
    fn q_leibniz_rule_for_products() {
        // d(ab) = da·b + q^{|a|} a·db with homogeneous a, constant right
        // coefficients so that every product stays defined
        let c = ctx(3);
        for seed in [11u64, 12, 13] {
            let f = random_poly(seed, 2, 3, 3);
            let a = Form::word(3, 2, Mode::Truncated, f, &[(1, 1)]).unwrap();
            let b =
                Form::word(3, 2, Mode::Truncated, one_fun(3, 2).scale(&c.q()), &[(1, 2)])
                    .unwrap();
            let lhs = a.mul(&b).unwrap().exterior_d();
            let grade = a.homogeneous_grade().unwrap();
            let rhs = a.exterior_d().mul(&b).unwrap().add(
                &a.mul(&b.exterior_d())
                    .unwrap()
                    .scale(&c.q_pow(grade as i64)),
            );
            assert_eq!(lhs, rhs, "seed {seed}");
        }
    }

    #[test]
    fn exterior_d_raises_grade() {
        let w = Form::word(3, 2, Mode::Truncated, one_fun(3, 2), &[(1, 1)]).unwrap();
        assert_eq!(w.homogeneous_grade(), Some(1));
        let dw = w.exterior_d();
        assert_eq!(dw.homogeneous_grade(), Some(2));
        let f = Form::fun(3, 2, Mode::Truncated, random_poly(9, 2, 3, 3));
        assert_eq!(f.homogeneous_grade(), Some(0));
        assert_eq!(f.exterior_d().homogeneous_grade(), Some(1));
    }

    #[test]
    fn cyclic_relation_is_already_the_identity() {
        // w and q^{a1}·rot(w) are the same form; d of the difference is zero
        let c = ctx(3);
        let w = Form::word(3, 2, Mode::Truncated, one_fun(3, 2), &[(1, 2), (2, 1)]).unwrap();
        let rot = Form::word(3, 2, Mode::Truncated, one_fun(3, 2), &[(2, 1), (1, 2)])
            .unwrap()
            .scale(&c.q_pow(1));
        assert_eq!(w, rot);
        assert!(w.sub(&rot).exterior_d().is_zero());
        // any order-3 form differentiates to zero outright (order 4 vanishes)
        assert!(w.exterior_d().is_zero());
    }

    #[test]
    fn basis_counts_match_the_closed_formula() {
        let expected = [4u64, 14, 32];
        for n in 1..=3usize {
            let basis = basis_enumerate(3, n).unwrap();
            assert_eq!(basis.len() as u64, module_dimension(n as u64), "n = {n}");
            assert_eq!(basis.len() as u64, expected[n - 1], "n = {n}");
        }
        assert!(matches!(basis_enumerate(4, 2), Err(FormError::UnsupportedN(4))));
    }

    #[test]
    fn one_variable_basis_is_the_expected_tower_prefix() {
        let basis = basis_enumerate(3, 1).unwrap();
        let words: Vec<String> = basis.iter().map(|m| m.to_string()).collect();
        assert_eq!(words, vec!["dx1", "dx1*dx1", "dx1*d2x1", "d2x1"]);
    }

    #[test]
    fn reduction_into_the_truncated_algebra() {
        // an unreduced word of order 3 reduces to its canonical class
        let raw = Form::word(3, 2, Mode::Unreduced, one_fun(3, 2), &[(1, 2), (1, 3)]);
        assert!(raw.is_err()); // n_vars = 2 but index 3
        let raw = Form::word(3, 3, Mode::Unreduced, one_fun(3, 3), &[(1, 2), (1, 3), (1, 1)])
            .unwrap();
        let red = raw.reduce_to_truncated().unwrap();
        let expect = Form::word(3, 3, Mode::Truncated, one_fun(3, 3), &[(1, 1), (1, 2), (1, 3)])
            .unwrap()
            .scale(&ctx(3).q_pow(2));
        assert_eq!(red, expect);
        // an unreduced overlong word reduces to zero
        let long = Form::word(3, 2, Mode::Unreduced, one_fun(3, 2), &[(2, 1), (2, 2)]).unwrap();
        assert!(long.reduce_to_truncated().unwrap().is_zero());
    }

    #[test]
    fn display_syntax() {
        let m = DiffMonomial::from_factors(vec![(2, 1), (1, 3)]);
        assert_eq!(m.to_string(), "d2x1*dx3");
        assert_eq!(DiffMonomial::unit().to_string(), "1");
        // the order-3 word rotates to its least representative: dx3 < d2x1,
        // and the rotation costs q^2
        let f = Form::word(3, 3, Mode::Truncated, one_fun(3, 3).scale(&rat_q(2)), &[(2, 1), (1, 3)])
            .unwrap();
        // 2q^2 = -2 - 2q over the power basis of the scalar field
        assert_eq!(f.to_string(), "(-2 - 2*q) ⊗ dx3*d2x1");
    }

    fn rat_q(k: i64) -> CycScalar {
        ctx(3).from_rat(rat_int(k))
    }

    #[test]
    fn zero_handling() {
        let z = Form::zero(3, 2, Mode::Truncated);
        assert!(z.is_zero());
        assert!(z.exterior_d().is_zero());
        assert_eq!(z.to_string(), "0");
        let f = Form::fun(3, 2, Mode::Truncated, random_poly(99, 2, 2, 3));
        assert!(f.sub(&f).is_zero());
    }
}
