//! The generalized Clifford algebra C_{p,N}: p generators G_1..G_p with
//! G_i G_j = q_{ij} G_j G_i (q_{ij} = q for i < j, q^{-1} for i > j) and
//! G_k^N = 1, graded over Z_N by word length mod N.
//!
//! Elements are exact: normal-ordered monomials G_1^{a_1}..G_p^{a_p} with
//! cyclotomic coefficients. The matrix representation in [`matrix`] is an
//! independent second evaluation path, used as an oracle for everything
//! derived here. [`curvature`] builds the covariant calculus on top.

pub mod curvature;
pub mod matrix;

use crate::report::Check;
use crate::scalar::{CycScalar, QContext, QNumberTower, ScalarError};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliffordError {
    #[error("generator index {0} outside 1..={1}")]
    IndexOutOfRange(u32, usize),
    #[error("expected {expected} arguments, got {got}")]
    ArityMismatch { expected: u32, got: usize },
    #[error("connection component {0} is not homogeneous of grade 1")]
    NotGradeOne(usize),
    #[error("operator anticommutator is not left multiplication: {0}")]
    NotLeftMultiplication(String),
    #[error("elements from different algebras")]
    MixedContext,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// An element of C_{p,N}, stored over the normal-ordered monomial basis
/// G_1^{a_1}..G_p^{a_p}, a_k in 0..N-1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliffordElement {
    p: usize,
    n_order: u32,
    terms: BTreeMap<Vec<u8>, CycScalar>,
}

impl CliffordElement {
    pub fn zero(p: usize, n_order: u32) -> Self {
        CliffordElement { p, n_order, terms: BTreeMap::new() }
    }

    pub fn one(p: usize, n_order: u32) -> Self {
        let mut out = Self::zero(p, n_order);
        let ctx = QContext::new(n_order).expect("order >= 2");
        out.terms.insert(vec![0; p], ctx.one());
        out
    }

    pub fn scalar(p: usize, n_order: u32, c: CycScalar) -> Self {
        let mut out = Self::zero(p, n_order);
        if !c.is_zero() {
            out.terms.insert(vec![0; p], c);
        }
        out
    }

    /// The generator G_k (1-based).
    pub fn generator(p: usize, n_order: u32, k: u32) -> Result<Self, CliffordError> {
        if k < 1 || k as usize > p {
            return Err(CliffordError::IndexOutOfRange(k, p));
        }
        let mut exps = vec![0u8; p];
        exps[k as usize - 1] = 1;
        Ok(Self::monomial(p, n_order, exps))
    }

    /// A single basis monomial with coefficient 1.
    pub fn monomial(p: usize, n_order: u32, exps: Vec<u8>) -> Self {
        assert_eq!(exps.len(), p);
        let ctx = QContext::new(n_order).expect("order >= 2");
        let mut out = Self::zero(p, n_order);
        out.terms.insert(exps, ctx.one());
        out
    }

    /// Normal-order a word of generator indices: the product
    /// G_{w_1} G_{w_2} .. G_{w_r}.
    pub fn from_word(p: usize, n_order: u32, word: &[u32]) -> Result<Self, CliffordError> {
        let mut out = Self::one(p, n_order);
        for &k in word {
            out = out.mul(&Self::generator(p, n_order, k)?);
        }
        Ok(out)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_order(&self) -> u32 {
        self.n_order
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u8>, CycScalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn ctx(&self) -> QContext {
        QContext::new(self.n_order).expect("order >= 2")
    }

    fn assert_context(&self, other: &Self) {
        assert!(
            self.p == other.p && self.n_order == other.n_order,
            "elements from different algebras"
        );
    }

    fn insert(&mut self, exps: Vec<u8>, c: CycScalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().checked_add(&c).expect("same order");
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_context(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        CliffordElement {
            p: self.p,
            n_order: self.n_order,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
        }
    }

    pub fn scale(&self, s: &CycScalar) -> Self {
        if s.is_zero() {
            return Self::zero(self.p, self.n_order);
        }
        CliffordElement {
            p: self.p,
            n_order: self.n_order,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.checked_mul(s).expect("same order")))
                .collect(),
        }
    }

    /// Product. Normal-ordering G^a · G^b moves each G_j^{b_j} left past the
    /// G_i^{a_i} with i > j; every adjacent swap costs q^{-1}, so the phase
    /// is q^{-sum_{i>j} a_i b_j}; exponents then add mod N (G^N = 1 is free
    /// of phase).
    pub fn mul(&self, other: &Self) -> Self {
        self.assert_context(other);
        let ctx = self.ctx();
        let n = self.n_order as u16;
        let mut out = Self::zero(self.p, self.n_order);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let mut inv: i64 = 0;
                let mut suffix: i64 = 0; // sum of a_i for i > current j
                for j in (0..self.p).rev() {
                    inv += suffix * b[j] as i64;
                    suffix += a[j] as i64;
                }
                let exps: Vec<u8> =
                    (0..self.p).map(|i| ((a[i] as u16 + b[i] as u16) % n) as u8).collect();
                let c = ca
                    .checked_mul(cb)
                    .expect("same order")
                    .checked_mul(&ctx.q_pow(-inv))
                    .expect("same order");
                out.insert(exps, c);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.p, self.n_order);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// The grade of a monomial is the sum of its exponents mod N; an element
    /// has a grade only when all monomials agree.
    pub fn grade(&self) -> Option<u32> {
        let mut grade = None;
        for e in self.terms.keys() {
            let g = e.iter().map(|&x| x as u32).sum::<u32>() % self.n_order;
            match grade {
                None => grade = Some(g),
                Some(h) if h != g => return None,
                _ => {}
            }
        }
        grade
    }

    /// Split into grade-homogeneous parts, indexed by grade.
    pub fn grade_components(&self) -> BTreeMap<u32, Self> {
        let mut out: BTreeMap<u32, Self> = BTreeMap::new();
        for (e, c) in &self.terms {
            let g = e.iter().map(|&x| x as u32).sum::<u32>() % self.n_order;
            out.entry(g)
                .or_insert_with(|| Self::zero(self.p, self.n_order))
                .insert(e.clone(), c.clone());
        }
        out
    }
}

impl fmt::Display for CliffordElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &a)| a > 0)
                .map(|(i, &a)| {
                    if a == 1 {
                        format!("G{}", i + 1)
                    } else {
                        format!("G{}^{}", i + 1, a)
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})·{}", mono.join("·"))?;
            }
        }
        Ok(())
    }
}

/// Sum of the products over all N! orderings (repetitions counted with
/// multiplicity), so that on generators it evaluates the N!·delta relation.
pub fn n_anticommutator(elems: &[CliffordElement]) -> Result<CliffordElement, CliffordError> {
    let first = elems.first().ok_or(CliffordError::ArityMismatch { expected: 1, got: 0 })?;
    let n = first.n_order;
    if elems.len() != n as usize {
        return Err(CliffordError::ArityMismatch { expected: n, got: elems.len() });
    }
    let mut out = CliffordElement::zero(first.p, n);
    let mut idx: Vec<usize> = (0..elems.len()).collect();
    permutations_of(&mut idx, &mut |perm| {
        let mut prod = CliffordElement::one(first.p, n);
        for &i in perm {
            prod = prod.mul(&elems[i]);
        }
        out = out.add(&prod);
    });
    Ok(out)
}

/// Like [`n_anticommutator`] but with each distinct word of the multiset
/// counted once (equal arguments do not multiply the repeated orderings).
/// This is the brace used by the curvature blocks.
pub fn distinct_anticommutator(
    elems: &[CliffordElement],
) -> Result<CliffordElement, CliffordError> {
    // value-equal arguments are the same slot symbol
    let mut labels: Vec<usize> = Vec::with_capacity(elems.len());
    for (i, e) in elems.iter().enumerate() {
        let l = elems[..i].iter().position(|x| x == e).unwrap_or(i);
        labels.push(l);
    }
    labeled_anticommutator(elems, &labels)
}

/// Distinct-arrangement brace over explicitly labeled slots: arrangements
/// count as one word when their label sequences agree. Distinct labels stay
/// distinct even if they evaluate to equal elements, which matters when a
/// connection component happens to coincide with a generator.
pub fn labeled_anticommutator<L: Ord + Clone>(
    elems: &[CliffordElement],
    labels: &[L],
) -> Result<CliffordElement, CliffordError> {
    assert_eq!(elems.len(), labels.len());
    let first = elems.first().ok_or(CliffordError::ArityMismatch { expected: 1, got: 0 })?;
    let n = first.n_order;
    if elems.len() != n as usize {
        return Err(CliffordError::ArityMismatch { expected: n, got: elems.len() });
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut out = CliffordElement::zero(first.p, n);
    let mut idx: Vec<usize> = (0..elems.len()).collect();
    permutations_of(&mut idx, &mut |perm| {
        let word: Vec<L> = perm.iter().map(|&i| labels[i].clone()).collect();
        if !seen.insert(word) {
            return;
        }
        let mut prod = CliffordElement::one(first.p, n);
        for &i in perm {
            prod = prod.mul(&elems[i]);
        }
        out = out.add(&prod);
    });
    Ok(out)
}

pub(crate) fn permutations_of<T: Copy>(items: &mut Vec<T>, visit: &mut impl FnMut(&[T])) {
    fn rec<T: Copy>(items: &mut Vec<T>, k: usize, visit: &mut impl FnMut(&[T])) {
        if k == items.len() {
            visit(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            rec(items, k + 1, visit);
            items.swap(k, i);
        }
    }
    rec(items, 0, visit);
}

/// q-commutator [B, B']_q = B B' - q^{b b'} B' B over homogeneous components
/// (b, b' the grades).
pub fn q_commutator(a: &CliffordElement, b: &CliffordElement) -> CliffordElement {
    let ctx = QContext::new(a.n_order).expect("order >= 2");
    let mut out = CliffordElement::zero(a.p, a.n_order);
    for (ga, pa) in a.grade_components() {
        for (gb, pb) in b.grade_components() {
            let cross = pb.mul(&pa).scale(&ctx.q_pow((ga as i64) * (gb as i64)));
            out = out.add(&pa.mul(&pb).sub(&cross));
        }
    }
    out
}

/// The q-exterior differential d_k B = G_k B - q^b B G_k per homogeneous
/// grade b; raises grade by one.
pub fn q_exterior_d(k: u32, b: &CliffordElement) -> Result<CliffordElement, CliffordError> {
    let g = CliffordElement::generator(b.p, b.n_order, k)?;
    let ctx = QContext::new(b.n_order).expect("order >= 2");
    let mut out = CliffordElement::zero(b.p, b.n_order);
    for (grade, part) in b.grade_components() {
        let right = part.mul(&g).scale(&ctx.q_pow(grade as i64));
        out = out.add(&g.mul(&part).sub(&right));
    }
    Ok(out)
}

/// All basis monomials of C_{p,N}, in lexicographic exponent order.
pub fn basis(p: usize, n_order: u32) -> Vec<CliffordElement> {
    let mut out = Vec::new();
    let mut exps = vec![0u8; p];
    loop {
        out.push(CliffordElement::monomial(p, n_order, exps.clone()));
        let mut i = p;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            exps[i] += 1;
            if (exps[i] as u32) < n_order {
                break;
            }
            exps[i] = 0;
        }
    }
}

/// Sorted index multisets 1 <= i_1 <= ... <= i_len <= p.
pub fn sorted_multisets(p: u32, len: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len as usize);
    fn rec(p: u32, len: u32, start: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == len as usize {
            out.push(cur.clone());
            return;
        }
        for i in start..=p {
            cur.push(i);
            rec(p, len, i, cur, out);
            cur.pop();
        }
    }
    rec(p, len, 1, &mut cur, &mut out);
    out
}

/// Exhaustive structural verification for one (p, N): the defining
/// relations and N!·delta in both evaluation paths, the algebra-to-matrix
/// homomorphism on short words, N-nilpotency of every d_k on the full
/// basis, vanishing of the operator anticommutators, and agreement of the
/// alpha-coefficient expansion of d_k^l with direct iteration.
pub fn verify_nilpotency_and_anticommutators(
    p: usize,
    n_order: u32,
) -> Result<Vec<Check>, CliffordError> {
    let mut checks = Vec::new();
    let rep = matrix::matrix_rep(p, n_order)?;
    let ctx = QContext::new(n_order)?;
    let n = n_order;

    // defining relations, element path (the matrix path asserts them at
    // construction)
    let mut relations_ok = true;
    let mut witness = String::new();
    for i in 1..=p as u32 {
        for j in 1..=p as u32 {
            let gi = CliffordElement::generator(p, n, i)?;
            let gj = CliffordElement::generator(p, n, j)?;
            let qij = match i.cmp(&j) {
                std::cmp::Ordering::Less => ctx.q_pow(1),
                std::cmp::Ordering::Equal => ctx.one(),
                std::cmp::Ordering::Greater => ctx.q_pow(-1),
            };
            if gi.mul(&gj) != gj.mul(&gi).scale(&qij) {
                relations_ok = false;
                witness = format!("G{i} G{j} != q_ij G{j} G{i}");
            }
        }
        let gi = CliffordElement::generator(p, n, i)?;
        if gi.pow(n) != CliffordElement::one(p, n) {
            relations_ok = false;
            witness = format!("G{i}^{n} != 1");
        }
    }
    checks.push(Check::expect(
        format!("generator relations hold in C_{{{p},{n}}}"),
        relations_ok,
        || witness.clone(),
    ));

    // homomorphism into the matrix representation, words up to length 4
    let mut hom_ok = true;
    let mut hom_witness = String::new();
    let mut words: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..4 {
        let mut next = Vec::new();
        for w in &words {
            for g in 1..=p as u32 {
                let mut w2 = w.clone();
                w2.push(g);
                next.push(w2);
            }
        }
        for w in &next {
            let elem = CliffordElement::from_word(p, n, w)?;
            let mut m = matrix::Matrix::identity(rep.dim(), n);
            for &g in w {
                m = m.mul(rep.generator(g as usize - 1));
            }
            if rep.represent(&elem) != m {
                hom_ok = false;
                hom_witness = format!("word {w:?}");
            }
        }
        words = next;
    }
    checks.push(Check::expect(
        format!("normal order agrees with matrix products up to length 4 (p={p}, N={n})"),
        hom_ok,
        || hom_witness.clone(),
    ));

    // N!·delta on generator tuples, both paths
    let mut delta_ok = true;
    let mut delta_witness = String::new();
    let fact: i64 = (1..=n as i64).product();
    for tuple in sorted_multisets(p as u32, n) {
        let elems: Vec<CliffordElement> = tuple
            .iter()
            .map(|&k| CliffordElement::generator(p, n, k))
            .collect::<Result<_, _>>()?;
        let got = n_anticommutator(&elems)?;
        let all_equal = tuple.iter().all(|&k| k == tuple[0]);
        let want = if all_equal {
            CliffordElement::scalar(p, n, ctx.from_int(fact))
        } else {
            CliffordElement::zero(p, n)
        };
        if got != want || rep.represent(&got) != rep.represent(&want) {
            delta_ok = false;
            delta_witness = format!("{tuple:?}");
        }
    }
    checks.push(Check::expect(
        format!("N-anticommutator of generators is N!·delta (p={p}, N={n})"),
        delta_ok,
        || delta_witness.clone(),
    ));

    // d_k^N annihilates the whole basis; d_k raises grade by 1
    let basis_elems = basis(p, n);
    for k in 1..=p as u32 {
        let mut nil_ok = true;
        let mut nil_witness = String::new();
        for b in &basis_elems {
            let mut cur = b.clone();
            let g0 = cur.grade().expect("basis monomials are homogeneous");
            for step in 0..n {
                cur = q_exterior_d(k, &cur)?;
                if step == 0 && !cur.is_zero() {
                    let g1 = cur.grade();
                    if g1 != Some((g0 + 1) % n) {
                        nil_ok = false;
                        nil_witness = format!("d_{k} grade jump on {b}");
                    }
                }
            }
            if !cur.is_zero() {
                nil_ok = false;
                nil_witness = format!("d_{k}^{n} ({b}) != 0");
            }
        }
        checks.push(Check::expect(
            format!("d_{k}^{n} = 0 on the basis of C_{{{p},{n}}}"),
            nil_ok,
            || nil_witness.clone(),
        ));
    }

    // operator anticommutators {d_{i_1}, ..., d_{i_N}} vanish on the basis
    let mut anti_ok = true;
    let mut anti_witness = String::new();
    for tuple in sorted_multisets(p as u32, n) {
        for b in &basis_elems {
            let mut total = CliffordElement::zero(p, n);
            let mut idx: Vec<usize> = (0..tuple.len()).collect();
            let mut failed: Option<CliffordError> = None;
            permutations_of(&mut idx, &mut |perm| {
                let mut cur = b.clone();
                for &i in perm.iter().rev() {
                    match q_exterior_d(tuple[i], &cur) {
                        Ok(next) => cur = next,
                        Err(e) => failed = Some(e),
                    }
                }
                total = total.add(&cur);
            });
            if let Some(e) = failed {
                return Err(e);
            }
            if !total.is_zero() {
                anti_ok = false;
                anti_witness = format!("{{d_{tuple:?}}} on {b}");
            }
        }
    }
    checks.push(Check::expect(
        format!("operator N-anticommutators vanish (p={p}, N={n})"),
        anti_ok,
        || anti_witness.clone(),
    ));

    // alpha expansion: d_k^l B = sum_i alpha^{(l)}_i G^{l-i} B G^i
    let mut tower = QNumberTower::new(n)?;
    let mut alpha_ok = true;
    let mut alpha_witness = String::new();
    for k in 1..=p as u32 {
        let g = CliffordElement::generator(p, n, k)?;
        for b in &basis_elems {
            let a = b.grade().expect("basis monomials are homogeneous");
            let mut iterated = b.clone();
            for l in 1..=n {
                iterated = q_exterior_d(k, &iterated)?;
                let mut expansion = CliffordElement::zero(p, n);
                for i in 0..=l {
                    let coeff = tower.alpha_coeff(l, i, a)?;
                    let term = g.pow(l - i).mul(b).mul(&g.pow(i)).scale(&coeff);
                    expansion = expansion.add(&term);
                }
                if expansion != iterated {
                    alpha_ok = false;
                    alpha_witness = format!("d_{k}^{l} on {b}");
                }
            }
        }
    }
    checks.push(Check::expect(
        format!("alpha-coefficient expansion matches iterated d_k (p={p}, N={n})"),
        alpha_ok,
        || alpha_witness.clone(),
    ));

    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_order_examples() {
        // G2 G1 = q^{-1} G1 G2
        let e = CliffordElement::from_word(2, 3, &[2, 1]).unwrap();
        let want = CliffordElement::from_word(2, 3, &[1, 2])
            .unwrap()
            .scale(&QContext::new(3).unwrap().q_pow(-1));
        assert_eq!(e, want);
        // G1^N = 1
        let e = CliffordElement::from_word(2, 3, &[1, 1, 1]).unwrap();
        assert_eq!(e, CliffordElement::one(2, 3));
        // G3 G1 G2 = q^{-2} G1 G2 G3
        let e = CliffordElement::from_word(3, 3, &[3, 1, 2]).unwrap();
        let want = CliffordElement::from_word(3, 3, &[1, 2, 3])
            .unwrap()
            .scale(&QContext::new(3).unwrap().q_pow(-2));
        assert_eq!(e, want);
        assert!(matches!(
            CliffordElement::from_word(2, 3, &[5]),
            Err(CliffordError::IndexOutOfRange(5, 2))
        ));
    }

    #[test]
    fn grades() {
        let g1 = CliffordElement::generator(2, 3, 1).unwrap();
        let g2 = CliffordElement::generator(2, 3, 2).unwrap();
        assert_eq!(g1.grade(), Some(1));
        assert_eq!(g1.mul(&g2).grade(), Some(2));
        assert_eq!(g1.mul(&g2).mul(&g2).grade(), Some(0));
        assert_eq!(g1.add(&g1.mul(&g2)).grade(), None);
        assert_eq!(CliffordElement::one(2, 3).grade(), Some(0));
        let split = g1.add(&g1.mul(&g2)).grade_components();
        assert_eq!(split.len(), 2);
        assert_eq!(split[&1], g1);
    }

    #[test]
    fn anticommutators_on_generators() {
        // N = 2: {G1, G1} = 2, {G1, G2} = 0
        let g1 = CliffordElement::generator(2, 2, 1).unwrap();
        let g2 = CliffordElement::generator(2, 2, 2).unwrap();
        let two = CliffordElement::scalar(2, 2, CycScalar::from_int(4, 2));
        assert_eq!(n_anticommutator(&[g1.clone(), g1.clone()]).unwrap(), two);
        assert!(n_anticommutator(&[g1.clone(), g2.clone()]).unwrap().is_zero());
        assert!(matches!(
            n_anticommutator(&[g1.clone()]),
            Err(CliffordError::ArityMismatch { expected: 2, got: 1 })
        ));
        // N = 3: {e1, e1, e2} = 0
        let e1 = CliffordElement::generator(2, 3, 1).unwrap();
        let e2 = CliffordElement::generator(2, 3, 2).unwrap();
        assert!(n_anticommutator(&[e1.clone(), e1.clone(), e2]).unwrap().is_zero());
        let six = CliffordElement::scalar(2, 3, QContext::new(3).unwrap().from_int(6));
        assert_eq!(n_anticommutator(&[e1.clone(), e1.clone(), e1]).unwrap(), six);
    }

    #[test]
    fn distinct_brace_counts_each_word_once() {
        let e1 = CliffordElement::generator(2, 3, 1).unwrap();
        let e2 = CliffordElement::generator(2, 3, 2).unwrap();
        // {e1, e1, e1} -> single word e1^3 = 1
        assert_eq!(
            distinct_anticommutator(&[e1.clone(), e1.clone(), e1.clone()]).unwrap(),
            CliffordElement::one(2, 3)
        );
        // {e1, e1, e2} -> 3 distinct words = half the full sum
        let d = distinct_anticommutator(&[e1.clone(), e1.clone(), e2.clone()]).unwrap();
        let full = n_anticommutator(&[e1.clone(), e1.clone(), e2.clone()]).unwrap();
        assert_eq!(d.scale(&QContext::new(3).unwrap().from_int(2)), full);
        // all-distinct arguments: both braces coincide
        let a = e1.mul(&e2);
        let d2 = distinct_anticommutator(&[e1.clone(), e2.clone(), a.clone()]).unwrap();
        let f2 = n_anticommutator(&[e1, e2, a]).unwrap();
        assert_eq!(d2, f2);
    }

    #[test]
    fn exterior_d_basics() {
        // d_k(1) = 0
        for k in 1..=2 {
            assert!(q_exterior_d(k, &CliffordElement::one(2, 3)).unwrap().is_zero());
        }
        // N = 2: d_1^2 = 0 on every basis element
        for b in basis(2, 2) {
            let d2 = q_exterior_d(1, &q_exterior_d(1, &b).unwrap()).unwrap();
            assert!(d2.is_zero(), "{b}");
        }
        // d_1(e2) = e1 e2 - q·(e2 e1) = e1 e2 - q·q^{-1} e1 e2 = 0: the
        // cross-generator differential cancels exactly
        let e1 = CliffordElement::generator(2, 3, 1).unwrap();
        let e2 = CliffordElement::generator(2, 3, 2).unwrap();
        assert!(q_exterior_d(1, &e2).unwrap().is_zero());
        // d_1(e1) = (1 - q) e1^2: nonzero, grade 2
        let de1 = q_exterior_d(1, &e1).unwrap();
        let ctx = QContext::new(3).unwrap();
        let one_minus_q = ctx.one().checked_sub(&ctx.q()).unwrap();
        assert_eq!(de1, e1.mul(&e1).scale(&one_minus_q));
        assert_eq!(de1.grade(), Some(2));
    }

    #[test]
    fn q_commutator_grades() {
        // [B, B']_q with grades 1,1 at N=3: BB' - q BB'
        let e1 = CliffordElement::generator(2, 3, 1).unwrap();
        let e2 = CliffordElement::generator(2, 3, 2).unwrap();
        let lhs = q_commutator(&e1, &e2);
        let q = QContext::new(3).unwrap().q();
        let want = e1.mul(&e2).sub(&e2.mul(&e1).scale(&q));
        assert_eq!(lhs, want);
    }

    #[test]
    fn verification_sweeps() {
        for (p, n) in [(2usize, 2u32), (2, 3)] {
            for chk in verify_nilpotency_and_anticommutators(p, n).unwrap() {
                assert!(chk.passed(), "{chk}");
            }
        }
    }

    #[test]
    fn multiset_enumeration() {
        assert_eq!(sorted_multisets(2, 3).len(), 4); // 111 112 122 222
        assert_eq!(sorted_multisets(3, 2).len(), 6);
        assert_eq!(basis(2, 3).len(), 9);
        assert_eq!(basis(3, 2).len(), 8);
    }
}
