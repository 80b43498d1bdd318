//! Covariant differentials D_k = d_k + A_k on C_{p,N}, their curvature
//! operators and the Bianchi identities.
//!
//! The N-fold brace of covariant differentials, each distinct arrangement
//! of the index multiset taken once, acts as left multiplication by a fixed
//! element Omega. [`curvature_direct`] extracts Omega from the operator and
//! verifies the left-multiplication property on the whole monomial basis;
//! [`curvature_formula`] builds the same element as a sum of braces in
//! which part of the generators have been replaced by connection
//! components. Both paths are exact and must agree.

use super::{
    basis, labeled_anticommutator, q_commutator, q_exterior_d, sorted_multisets, CliffordElement,
    CliffordError,
};
use crate::report::Check;
use crate::scalar::QContext;
use crate::symfun::PinnedRng;
use std::collections::BTreeSet;

/// Connection: one element A_k per generator, each zero or homogeneous of
/// grade 1 so that D_k = d_k + A_k raises grade uniformly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliffordConnection {
    p: usize,
    n_order: u32,
    components: Vec<CliffordElement>,
}

impl CliffordConnection {
    pub fn new(components: Vec<CliffordElement>) -> Result<Self, CliffordError> {
        let first = components
            .first()
            .ok_or(CliffordError::ArityMismatch { expected: 1, got: 0 })?;
        let (p, n_order) = (first.p(), first.n_order());
        for (i, a) in components.iter().enumerate() {
            if a.p() != p || a.n_order() != n_order {
                return Err(CliffordError::MixedContext);
            }
            if !a.is_zero() && a.grade() != Some(1) {
                return Err(CliffordError::NotGradeOne(i + 1));
            }
        }
        Ok(CliffordConnection { p, n_order, components })
    }

    /// The flat connection A = 0.
    pub fn flat(p: usize, n_order: u32) -> Self {
        CliffordConnection {
            p,
            n_order,
            components: vec![CliffordElement::zero(p, n_order); p],
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_order(&self) -> u32 {
        self.n_order
    }

    /// A_k, 1-based.
    pub fn component(&self, k: u32) -> Result<&CliffordElement, CliffordError> {
        self.components
            .get(k as usize - 1)
            .ok_or(CliffordError::IndexOutOfRange(k, self.p))
    }

    /// D_k B = d_k B + A_k B.
    pub fn covariant_d(&self, k: u32, b: &CliffordElement) -> Result<CliffordElement, CliffordError> {
        let a = self.component(k)?;
        Ok(q_exterior_d(k, b)?.add(&a.mul(b)))
    }
}

/// Seeded grade-1 connection with small integer coefficients on every
/// grade-1 monomial.
pub fn random_connection(p: usize, n_order: u32, seed: u64) -> CliffordConnection {
    let mut rng = PinnedRng::new(seed);
    let ctx = QContext::new(n_order).expect("order >= 2");
    let grade_one: Vec<Vec<u8>> = basis(p, n_order)
        .into_iter()
        .filter(|b| b.grade() == Some(1))
        .map(|b| b.terms().keys().next().expect("monomial").clone())
        .collect();
    let mut components = Vec::with_capacity(p);
    for _ in 0..p {
        let mut a = CliffordElement::zero(p, n_order);
        for exps in &grade_one {
            let c = rng.ibelow(5) - 2;
            if c != 0 {
                a = a.add(
                    &CliffordElement::monomial(p, n_order, exps.clone())
                        .scale(&ctx.from_int(c)),
                );
            }
        }
        components.push(a);
    }
    CliffordConnection::new(components).expect("grade-1 by construction")
}

/// The distinct arrangements of an index multiset.
fn distinct_words(indices: &[u32]) -> Vec<Vec<u32>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut idx = indices.to_vec();
    super::permutations_of(&mut idx, &mut |w: &[u32]| {
        if seen.insert(w.to_vec()) {
            out.push(w.to_vec());
        }
    });
    out
}

fn check_arity(conn: &CliffordConnection, indices: &[u32]) -> Result<(), CliffordError> {
    if indices.len() != conn.n_order as usize {
        return Err(CliffordError::ArityMismatch {
            expected: conn.n_order,
            got: indices.len(),
        });
    }
    for &k in indices {
        if k < 1 || k as usize > conn.p {
            return Err(CliffordError::IndexOutOfRange(k, conn.p));
        }
    }
    Ok(())
}

/// Apply the brace of covariant differentials (distinct arrangements of
/// `indices`, composed right to left) to an element.
pub fn brace_apply(
    conn: &CliffordConnection,
    indices: &[u32],
    b: &CliffordElement,
) -> Result<CliffordElement, CliffordError> {
    let mut out = CliffordElement::zero(conn.p, conn.n_order);
    for word in distinct_words(indices) {
        let mut cur = b.clone();
        for &k in word.iter().rev() {
            cur = conn.covariant_d(k, &cur)?;
        }
        out = out.add(&cur);
    }
    Ok(out)
}

/// Extract the curvature element as the brace applied to 1, then verify on
/// every basis monomial that the brace is left multiplication by it.
pub fn curvature_direct(
    conn: &CliffordConnection,
    indices: &[u32],
) -> Result<CliffordElement, CliffordError> {
    check_arity(conn, indices)?;
    let omega = brace_apply(conn, indices, &CliffordElement::one(conn.p, conn.n_order))?;
    for b in basis(conn.p, conn.n_order) {
        let lhs = brace_apply(conn, indices, &b)?;
        if lhs != omega.mul(&b) {
            return Err(CliffordError::NotLeftMultiplication(format!(
                "indices {indices:?} on {b}"
            )));
        }
    }
    Ok(omega)
}

/// Curvature as a sum of element braces: group the index multiset by
/// distinct value, and for every choice of how many slots of each value
/// carry the connection component instead of the generator (at least one
/// in total), add the distinct-arrangement brace of that mixed multiset.
pub fn curvature_formula(
    conn: &CliffordConnection,
    indices: &[u32],
) -> Result<CliffordElement, CliffordError> {
    check_arity(conn, indices)?;
    let (p, n) = (conn.p, conn.n_order);
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    let mut values: Vec<(u32, u32)> = Vec::new(); // (index value, multiplicity)
    for &k in &sorted {
        match values.last_mut() {
            Some((v, c)) if *v == k => *c += 1,
            _ => values.push((k, 1)),
        }
    }

    let mut omega = CliffordElement::zero(p, n);
    let mut replace = vec![0u32; values.len()];
    loop {
        // advance the odometer over 0..=multiplicity per distinct value
        let mut pos = 0;
        loop {
            if pos == replace.len() {
                return Ok(omega);
            }
            replace[pos] += 1;
            if replace[pos] <= values[pos].1 {
                break;
            }
            replace[pos] = 0;
            pos += 1;
        }
        // at least one slot replaced from here on; generator and connection
        // slots are distinct symbols even when their values coincide
        let mut elems = Vec::with_capacity(n as usize);
        let mut labels: Vec<(u32, bool)> = Vec::with_capacity(n as usize);
        for (i, &(v, c)) in values.iter().enumerate() {
            let gamma = CliffordElement::generator(p, n, v)?;
            for _ in 0..c - replace[i] {
                elems.push(gamma.clone());
                labels.push((v, false));
            }
            for _ in 0..replace[i] {
                elems.push(conn.component(v)?.clone());
                labels.push((v, true));
            }
        }
        omega = omega.add(&labeled_anticommutator(&elems, &labels)?);
    }
}

/// The Bianchi identity for an index multiset of size N+1: omitting each
/// slot in turn, the d-differentials of the curvatures balance their
/// commutators with the omitted connection components,
/// sum_s d_{i_s} Omega_{s^} = sum_s [Omega_{s^}, A_{i_s}]_q.
pub fn bianchi_check(
    conn: &CliffordConnection,
    indices: &[u32],
) -> Result<Check, CliffordError> {
    let n = conn.n_order;
    if indices.len() != n as usize + 1 {
        return Err(CliffordError::ArityMismatch { expected: n + 1, got: indices.len() });
    }
    let mut lhs = CliffordElement::zero(conn.p, n);
    let mut rhs = CliffordElement::zero(conn.p, n);
    for s in 0..indices.len() {
        let mut rest = indices.to_vec();
        let k = rest.remove(s);
        let omega = curvature_formula(conn, &rest)?;
        lhs = lhs.add(&q_exterior_d(k, &omega)?);
        rhs = rhs.add(&q_commutator(&omega, conn.component(k)?));
    }
    Ok(Check::expect(
        format!("Bianchi identity for indices {indices:?}"),
        lhs == rhs,
        || format!("lhs - rhs = {}", lhs.sub(&rhs)),
    ))
}

/// Curvature coherence sweep: direct and formula paths agree on every
/// sorted multiset, and the Bianchi identity holds on every sorted
/// multiset one longer.
pub fn verify_curvature_and_bianchi(
    conn: &CliffordConnection,
    label: &str,
) -> Result<Vec<Check>, CliffordError> {
    let (p, n) = (conn.p as u32, conn.n_order);
    let mut checks = Vec::new();
    let mut agree = true;
    let mut witness = String::new();
    for tuple in sorted_multisets(p, n) {
        let direct = curvature_direct(conn, &tuple)?;
        let formula = curvature_formula(conn, &tuple)?;
        if direct != formula {
            agree = false;
            witness = format!("indices {tuple:?}");
        }
    }
    checks.push(Check::expect(
        format!("curvature operator extraction matches the brace formula ({label})"),
        agree,
        || witness.clone(),
    ));
    for tuple in sorted_multisets(p, n + 1) {
        checks.push(bianchi_check(conn, &tuple)?);
    }
    Ok(checks)
}
