//! The recurrence polynomials behind the k-th differential of a function and
//! the machine verification that d^N f = 0 under the cyclic relations.
//!
//! The logic is deliberately non-circular: the L-polynomials are constructed
//! in the unreduced word algebra (no relations at all), and only afterwards
//! pushed through the truncated normal form. That the reductions come out
//! zero is then a genuine consequence of the cyclic relations, not an
//! artifact of building with them.

use crate::forms::{Form, FormError, Mode};
use crate::report::Check;
use crate::scalar::{Rat, ScalarError};
use crate::symfun::{random_poly, PolyFun};
use num::BigInt;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NilError {
    #[error("index multiset size {0} must lie in 1..={1}")]
    BadIndexCount(usize, u32),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Memoized table of the L-polynomials for a fixed order and chart dimension.
/// Keys are sorted index multisets — L is symmetric by construction.
pub struct LTable {
    n_order: u32,
    n_vars: usize,
    cache: HashMap<(u32, Vec<u32>), Form>,
}

impl LTable {
    pub fn new(n_order: u32, n_vars: usize) -> Self {
        LTable { n_order, n_vars, cache: HashMap::new() }
    }

    /// L^{i_1...i_m}_{(k)} in the unreduced algebra.
    ///
    /// Boundaries: m = k gives the fully symmetrized product of first-order
    /// differentials (1/k! times the sum over permutations); m = 1 gives the
    /// single factor d^k x^i, which is zero once k reaches N. In between,
    ///     L_{(k)} = d L_{(k-1)} + (1/m) sum_l dx^{i_l} L^{...without i_l...}_{(k-1)}.
    pub fn l_poly(&mut self, k: u32, indices: &[u32]) -> Result<Form, NilError> {
        let m = indices.len();
        if m < 1 || m as u32 > k {
            return Err(NilError::BadIndexCount(m, k));
        }
        let mut key: Vec<u32> = indices.to_vec();
        key.sort_unstable();
        if let Some(f) = self.cache.get(&(k, key.clone())) {
            return Ok(f.clone());
        }
        let value = if m as u32 == k {
            self.symmetrized_first_order(&key)?
        } else if m == 1 {
            let i = key[0];
            if k <= self.n_order - 1 {
                Form::word(
                    self.n_order,
                    self.n_vars,
                    Mode::Unreduced,
                    PolyFun::one(self.n_order, self.n_vars),
                    &[(k, i)],
                )?
            } else {
                Form::zero(self.n_order, self.n_vars, Mode::Unreduced)
            }
        } else {
            let mut acc = self.l_poly(k - 1, &key)?.exterior_d();
            let weight = Rat::new(BigInt::from(1), BigInt::from(m as i64));
            for l in 0..m {
                let mut rest = key.clone();
                let il = rest.remove(l);
                let sub = self.l_poly(k - 1, &rest)?;
                let term = sub.left_mul_dx(il)?;
                acc = acc.add(&term.scale(
                    &crate::scalar::QContext::new(self.n_order)?.from_rat(weight.clone()),
                ));
            }
            acc
        };
        self.cache.insert((k, key), value.clone());
        Ok(value)
    }

    fn symmetrized_first_order(&self, indices: &[u32]) -> Result<Form, NilError> {
        let k = indices.len();
        let ctx = crate::scalar::QContext::new(self.n_order)?;
        let mut acc = Form::zero(self.n_order, self.n_vars, Mode::Unreduced);
        let mut perm: Vec<u32> = indices.to_vec();
        let mut count = 0u64;
        permute(&mut perm, 0, &mut |p| {
            count += 1;
            let word: Vec<(u32, u32)> = p.iter().map(|&i| (1, i)).collect();
            let f = Form::word(
                self.n_order,
                self.n_vars,
                Mode::Unreduced,
                PolyFun::one(self.n_order, self.n_vars),
                &word,
            )
            .expect("validated factors");
            acc = acc.add(&f);
        });
        debug_assert_eq!(count, (1..=k as u64).product::<u64>());
        let inv = Rat::new(BigInt::from(1), BigInt::from(count));
        Ok(acc.scale(&ctx.from_rat(inv)))
    }
}

/// Heap-style enumeration of all permutations (duplicates enumerated with
/// multiplicity — the 1/k! weight is exact either way).
fn permute(items: &mut Vec<u32>, start: usize, visit: &mut impl FnMut(&[u32])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

/// Convenience wrapper for a single L-polynomial query.
pub fn l_poly(n_order: u32, n_vars: usize, k: u32, indices: &[u32]) -> Result<Form, NilError> {
    LTable::new(n_order, n_vars).l_poly(k, indices)
}

/// The k-th differential of a function expanded through the L-polynomials:
///     sum_m (∂^m f / ∂x^{i_1}..∂x^{i_m}) L^{i_1..i_m}_{(k)},
/// summed over ordered index tuples. Equals the k-fold exterior differential
/// in the unreduced algebra.
pub fn dk_expand(f: &PolyFun, k: u32) -> Result<Form, NilError> {
    let n_order = f.n_order();
    let n_vars = f.n_vars();
    let mut table = LTable::new(n_order, n_vars);
    let mut acc = Form::zero(n_order, n_vars, Mode::Unreduced);
    for m in 1..=k as usize {
        let mut tuple = vec![1u32; m];
        loop {
            let idxs: Vec<usize> = tuple.iter().map(|&i| i as usize - 1).collect();
            let df = f.partial_many(&idxs);
            if !df.is_zero() {
                let l = table.l_poly(k, &tuple)?;
                acc = acc.add(&l.left_mul_fun(&df));
            }
            // advance the odometer over {1..n}^m
            let mut pos = m;
            loop {
                if pos == 0 {
                    break;
                }
                tuple[pos - 1] += 1;
                if tuple[pos - 1] <= n_vars as u32 {
                    break;
                }
                tuple[pos - 1] = 1;
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
        }
    }
    Ok(acc)
}

/// d applied N times to random polynomials in the truncated algebra; every
/// result must be the exact zero form.
pub fn verify_dn_zero(n_order: u32, n_vars: usize, trials: u32, seed: u64) -> Vec<Check> {
    let mut checks = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let f = random_poly(seed.wrapping_add(t as u64), n_vars, 4, n_order);
        let form = Form::fun(n_order, n_vars, Mode::Truncated, f.clone());
        let dn = form.exterior_d_iter(n_order);
        checks.push(Check::expect(
            format!("d^{n_order} f = 0, trial {t}, n={n_vars}"),
            dn.is_zero(),
            || format!("f = {f}; d^{n_order} f = {dn}"),
        ));
    }
    checks
}

/// Every L^{i_1..i_m}_{(N)} built in the unreduced algebra must reduce to
/// the zero form under the cyclic relations — one check per sorted index
/// multiset, for 1 <= m <= N.
pub fn verify_l_conditions(n_order: u32, n_vars: usize) -> Result<Vec<Check>, NilError> {
    let mut table = LTable::new(n_order, n_vars);
    let mut checks = Vec::new();
    for m in 1..=n_order as usize {
        let mut multisets: Vec<Vec<u32>> = Vec::new();
        collect_multisets(n_vars as u32, m, 1, &mut Vec::new(), &mut multisets);
        for idx in multisets {
            let l = table.l_poly(n_order, &idx)?;
            let reduced = l.reduce_to_truncated()?;
            let name = format!(
                "L_({})^({}) reduces to 0, N={}",
                n_order,
                idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","),
                n_order
            );
            checks.push(Check::expect(name, reduced.is_zero(), || format!("residue {reduced}")));
        }
    }
    Ok(checks)
}

fn collect_multisets(n: u32, m: usize, lo: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if cur.len() == m {
        out.push(cur.clone());
        return;
    }
    for i in lo..=n {
        cur.push(i);
        collect_multisets(n, m, i, cur, out);
        cur.pop();
    }
}
