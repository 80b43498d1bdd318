//! Randomized algebraic properties. Case counts are kept small: every
//! property is exact, so a handful of structured samples per law is about
//! coverage of shapes, not statistical confidence.

use proptest::prelude::*;

use qcalc::covariant::{z3_split, Tensor4};
use qcalc::forms::{Form, Mode};
use qcalc::scalar::{rat, CycScalar, QContext, Rat};
use qcalc::symfun::{random_poly, PolyFun};

fn small_rat() -> impl Strategy<Value = Rat> {
    (-9i64..=9, 1i64..=9).prop_map(|(n, d)| rat(n, d))
}

/// A scalar of the form r0 + r1 q^k in the order's cyclotomic field.
fn scalar_in(n_order: u32) -> impl Strategy<Value = CycScalar> {
    let ctx = QContext::new(n_order).expect("order >= 2");
    (small_rat(), small_rat(), 0i64..n_order as i64).prop_map(move |(r0, r1, k)| {
        ctx.from_rat(r0)
            .checked_add(&ctx.q_pow(k).scale(&r1))
            .expect("same order")
    })
}

fn order_and_scalars() -> impl Strategy<Value = (u32, CycScalar, CycScalar, CycScalar)> {
    (2u32..=6).prop_flat_map(|n| {
        (Just(n), scalar_in(n), scalar_in(n), scalar_in(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scalar_ring_laws((n_order, a, b, c) in order_and_scalars()) {
        let ctx = QContext::new(n_order).unwrap();
        let ab = a.checked_add(&b).unwrap();
        prop_assert_eq!(
            ab.checked_add(&c).unwrap(),
            a.checked_add(&b.checked_add(&c).unwrap()).unwrap()
        );
        prop_assert_eq!(a.checked_mul(&b).unwrap(), b.checked_mul(&a).unwrap());
        prop_assert_eq!(
            a.checked_mul(&ab).unwrap(),
            a.checked_mul(&a).unwrap().checked_add(&a.checked_mul(&b).unwrap()).unwrap()
        );
        prop_assert_eq!(a.checked_mul(&ctx.one()).unwrap(), a.clone());
        prop_assert!(a.checked_add(&a.neg()).unwrap().is_zero());
    }

    #[test]
    fn scalar_conjugation_and_inverses((n_order, a, b, _c) in order_and_scalars()) {
        let ctx = QContext::new(n_order).unwrap();
        prop_assert_eq!(a.conjugate().conjugate(), a.clone());
        prop_assert_eq!(
            a.checked_mul(&b).unwrap().conjugate(),
            a.conjugate().checked_mul(&b.conjugate()).unwrap()
        );
        // q is a primitive root: q^N = 1 and conjugation inverts it
        prop_assert!(ctx.q_pow(n_order as i64).is_one());
        prop_assert_eq!(ctx.q().conjugate(), ctx.q_pow(-1));
        if !a.is_zero() {
            prop_assert!(a.checked_mul(&a.checked_inv().unwrap()).unwrap().is_one());
        }
    }

    #[test]
    fn polynomial_evaluation_is_a_homomorphism(
        seed_f in any::<u64>(),
        seed_g in any::<u64>(),
        x1 in small_rat(),
        x2 in small_rat(),
    ) {
        let f = random_poly(seed_f, 2, 3, 3);
        let g = random_poly(seed_g, 2, 3, 3);
        let point = [x1, x2];
        let ev = |p: &PolyFun| p.eval_rat(&point).expect("point matches arity");
        prop_assert_eq!(
            ev(&f.mul(&g)),
            ev(&f).checked_mul(&ev(&g)).unwrap()
        );
        prop_assert_eq!(
            ev(&f.add(&g)),
            ev(&f).checked_add(&ev(&g)).unwrap()
        );
    }

    #[test]
    fn partial_derivatives_obey_the_product_rule(
        seed_f in any::<u64>(),
        seed_g in any::<u64>(),
        var in 0usize..2,
    ) {
        let f = random_poly(seed_f, 2, 3, 3);
        let g = random_poly(seed_g, 2, 3, 3);
        let lhs = f.mul(&g).partial(var);
        let rhs = f.partial(var).mul(&g).add(&f.mul(&g.partial(var)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn third_differential_vanishes(seed in any::<u64>(), n_vars in 1usize..=2) {
        let f = random_poly(seed, n_vars, 3, 3);
        let d3 = Form::fun(3, n_vars, Mode::Truncated, f).exterior_d_iter(3);
        prop_assert!(d3.is_zero());
    }

    #[test]
    fn cyclic_split_recomposes_into_eigentensors(
        entries in proptest::collection::vec((-5i64..=5, -5i64..=5), 16),
    ) {
        let ctx = QContext::new(3).unwrap();
        let n = 2usize;
        let at = |k: usize, l: usize, m: usize, s: usize| {
            let (c0, c1) = entries[((k * n + l) * n + m) * n + s];
            PolyFun::parse(3, n, &format!("{c0} + {c1}*x1")).unwrap()
        };
        let t = Tensor4::from_fn(n, |k, l, m, s| at(k, l, m, s));
        let rotate = |u: &Tensor4| Tensor4::from_fn(n, |k, l, m, s| u.get(k, s, l, m).clone());
        let scaled = |u: &Tensor4, w: &CycScalar| {
            Tensor4::from_fn(n, |k, l, m, s| u.get(k, l, m, s).scale(w))
        };

        let (sym, conj, anti) = z3_split(&t);
        prop_assert_eq!(sym.add(&conj).add(&anti), t);
        prop_assert_eq!(rotate(&sym), sym.clone());
        prop_assert_eq!(rotate(&conj), scaled(&conj, &ctx.q()));
        prop_assert_eq!(rotate(&anti), scaled(&anti, &ctx.q_pow(2)));
    }
}
