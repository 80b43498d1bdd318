//! Numerical integration of the third-order geodesic equation
//!
//!   d³x^k/dλ³ + (E+F)^k_lm ẋ^l (ẍ^m + Γ^m_rs ẋ^r ẋ^s) + G^k_lmn ẋ^l ẋ^m ẋ^n = 0.
//!
//! The combination ẍ^m + Γ^m_rs ẋ^r ẋ^s is the covariant acceleration, so
//! classical geodesics of Γ solve the equation whenever they also kill the
//! G-term; with all coefficients zero every straight line and every
//! parabola is a solution. The equation is reduced to a first-order system
//! on (x, ẋ, ẍ) of dimension 3n and advanced with the classical 4th-order
//! one-step scheme; polynomial coefficients are evaluated in f64 along the
//! trajectory.

use crate::covariant::GeodesicCoefficients;
use crate::dim1::eval_poly_f64;
use crate::symfun::PolyFun;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeodesicError {
    #[error("state left the representable range near lambda = {0}")]
    NonFiniteState(f64),
    #[error("initial vector has length {got}, chart dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("step must be positive and the span nonempty (step = {step}, span = {span})")]
    BadStep { step: f64, span: f64 },
    #[error("coefficient entry evaluated to a non-real value at lambda = {0}")]
    ComplexCoefficient(f64),
}

/// One sample of the integrated trajectory.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TrajectoryPoint {
    pub lambda: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
}

fn eval_real(f: &PolyFun, x: &[f64], lambda: f64) -> Result<f64, GeodesicError> {
    let (re, im) = eval_poly_f64(f, x);
    if im.abs() > 1e-9 * (1.0 + re.abs()) {
        return Err(GeodesicError::ComplexCoefficient(lambda));
    }
    Ok(re)
}

/// ẋ' = v, v' = a, a'^k = −(E+F)^k_lm v^l (a^m + Γ^m_rs v^r v^s) − G^k_lmn v^l v^m v^n.
fn derivative(
    coeffs: &GeodesicCoefficients,
    state: &[f64],
    lambda: f64,
) -> Result<Vec<f64>, GeodesicError> {
    let n = coeffs.ef.n();
    let (x, rest) = state.split_at(n);
    let (v, a) = rest.split_at(n);
    let mut out = Vec::with_capacity(3 * n);
    out.extend_from_slice(v);
    out.extend_from_slice(a);

    // covariant acceleration a^m + Γ^m_rs v^r v^s, reused across k
    let mut cov_acc = a.to_vec();
    for m in 0..n {
        for r in 0..n {
            for s in 0..n {
                let g = coeffs.gamma.get(m, r, s);
                if g.is_zero() {
                    continue;
                }
                cov_acc[m] += eval_real(g, x, lambda)? * v[r] * v[s];
            }
        }
    }
    for k in 0..n {
        let mut acc = 0.0;
        for l in 0..n {
            for m in 0..n {
                let ef = coeffs.ef.get(k, l, m);
                if !ef.is_zero() {
                    acc -= eval_real(ef, x, lambda)? * v[l] * cov_acc[m];
                }
                for s in 0..n {
                    let g3 = coeffs.g3.get(k, l, m, s);
                    if !g3.is_zero() {
                        acc -= eval_real(g3, x, lambda)? * v[l] * v[m] * v[s];
                    }
                }
            }
        }
        out.push(acc);
    }
    Ok(out)
}

fn rk4_step(
    coeffs: &GeodesicCoefficients,
    state: &[f64],
    lambda: f64,
    h: f64,
) -> Result<Vec<f64>, GeodesicError> {
    let axpy = |s: &[f64], k: &[f64], c: f64| -> Vec<f64> {
        s.iter().zip(k).map(|(a, b)| a + c * b).collect()
    };
    let k1 = derivative(coeffs, state, lambda)?;
    let k2 = derivative(coeffs, &axpy(state, &k1, h / 2.0), lambda + h / 2.0)?;
    let k3 = derivative(coeffs, &axpy(state, &k2, h / 2.0), lambda + h / 2.0)?;
    let k4 = derivative(coeffs, &axpy(state, &k3, h), lambda + h)?;
    Ok(state
        .iter()
        .enumerate()
        .map(|(i, s)| s + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Integrate from `lambda_span.0` to `lambda_span.1` with the given step,
/// recording the state at every step multiple (plus a final shortened step
/// if the span is not a multiple). The returned trajectory starts with the
/// initial state.
pub fn integrate(
    coeffs: &GeodesicCoefficients,
    x0: &[f64],
    v0: &[f64],
    a0: &[f64],
    lambda_span: (f64, f64),
    step: f64,
) -> Result<Vec<TrajectoryPoint>, GeodesicError> {
    let n = coeffs.ef.n();
    for vec in [x0, v0, a0] {
        if vec.len() != n {
            return Err(GeodesicError::DimensionMismatch { expected: n, got: vec.len() });
        }
    }
    let (start, end) = lambda_span;
    let span = end - start;
    if !(step > 0.0) || !(span > 0.0) || !step.is_finite() || !span.is_finite() {
        return Err(GeodesicError::BadStep { step, span });
    }

    let mut state: Vec<f64> = x0.iter().chain(v0).chain(a0).copied().collect();
    let mut lambda = start;
    let record = |state: &[f64], lambda: f64| -> TrajectoryPoint {
        TrajectoryPoint {
            lambda,
            x: state[..n].to_vec(),
            v: state[n..2 * n].to_vec(),
            a: state[2 * n..].to_vec(),
        }
    };
    let mut out = vec![record(&state, lambda)];

    let n_full = (span / step + 1e-12).floor() as u64;
    let tail = span - n_full as f64 * step;
    for i in 1..=n_full {
        state = rk4_step(coeffs, &state, lambda, step)?;
        lambda = start + i as f64 * step;
        if !state.iter().all(|s| s.is_finite()) {
            return Err(GeodesicError::NonFiniteState(lambda));
        }
        out.push(record(&state, lambda));
    }
    if tail > 1e-12 * span.max(1.0) {
        state = rk4_step(coeffs, &state, lambda, tail)?;
        if !state.iter().all(|s| s.is_finite()) {
            return Err(GeodesicError::NonFiniteState(end));
        }
        out.push(record(&state, end));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariant::{Tensor3, Tensor4};
    use crate::symfun::PolyFun;

    fn zero_coeffs(n: usize) -> GeodesicCoefficients {
        GeodesicCoefficients::new(Tensor3::zero(n), Tensor4::zero(n), Tensor3::zero(n))
    }

    #[test]
    fn straight_lines_are_exact() {
        let coeffs = zero_coeffs(2);
        let traj = integrate(
            &coeffs,
            &[1.0, -0.5],
            &[0.25, 2.0],
            &[0.0, 0.0],
            (0.0, 4.0),
            0.25,
        )
        .unwrap();
        assert_eq!(traj.len(), 17);
        for pt in &traj {
            assert!((pt.x[0] - (1.0 + 0.25 * pt.lambda)).abs() <= 1e-12);
            assert!((pt.x[1] - (-0.5 + 2.0 * pt.lambda)).abs() <= 1e-12);
            assert!((pt.v[0] - 0.25).abs() <= 1e-12);
            assert!((pt.a[1]).abs() <= 1e-12);
        }
    }

    #[test]
    fn quadratics_are_exact() {
        // d³x/dλ³ = 0 with a0 ≠ 0: the scheme reproduces polynomials of
        // degree ≤ 3 without truncation error
        let coeffs = zero_coeffs(1);
        let (x0, v0, a0) = (0.75, -1.5, 3.0);
        let traj =
            integrate(&coeffs, &[x0], &[v0], &[a0], (0.0, 2.0), 0.125).unwrap();
        for pt in &traj {
            let l = pt.lambda;
            let want = x0 + v0 * l + 0.5 * a0 * l * l;
            assert!((pt.x[0] - want).abs() <= 1e-12, "lambda {l}");
            assert!((pt.v[0] - (v0 + a0 * l)).abs() <= 1e-12);
            assert!((pt.a[0] - a0).abs() <= 1e-12);
        }
    }

    fn curved_instance() -> GeodesicCoefficients {
        // n = 1: (E+F)¹₁₁ = 1, Γ¹₁₁ = t, G¹₁₁₁ = 1/4 — smooth and nonlinear
        let mut ef = Tensor3::zero(1);
        ef.set(0, 0, 0, PolyFun::parse(3, 1, "1").unwrap());
        let mut gamma = Tensor3::zero(1);
        gamma.set(0, 0, 0, PolyFun::parse(3, 1, "t").unwrap());
        let mut g3 = Tensor4::zero(1);
        g3.set(0, 0, 0, 0, PolyFun::parse(3, 1, "1/4").unwrap());
        GeodesicCoefficients::new(ef, g3, gamma)
    }

    #[test]
    fn halving_the_step_quarters_the_error_twice() {
        let coeffs = curved_instance();
        let run = |h: f64| {
            integrate(&coeffs, &[0.5], &[1.0 / 3.0], &[-0.2], (0.0, 1.0), h)
                .unwrap()
                .last()
                .unwrap()
                .x[0]
        };
        let reference = run(1.0 / 256.0);
        let err_h = (run(0.1) - reference).abs();
        let err_h2 = (run(0.05) - reference).abs();
        let ratio = err_h / err_h2;
        assert!(
            (12.0..=20.0).contains(&ratio),
            "order-4 convergence expected, got ratio {ratio} ({err_h} vs {err_h2})"
        );
    }

    #[test]
    fn partial_final_step_lands_on_the_endpoint() {
        let coeffs = curved_instance();
        let traj =
            integrate(&coeffs, &[0.5], &[0.25], &[0.0], (0.0, 1.0), 0.3).unwrap();
        let last = traj.last().unwrap();
        assert!((last.lambda - 1.0).abs() < 1e-12);
        assert_eq!(traj.len(), 5); // start, 3 full steps, shortened tail
    }

    #[test]
    fn error_cases() {
        let coeffs = zero_coeffs(2);
        assert!(matches!(
            integrate(&coeffs, &[0.0], &[0.0, 0.0], &[0.0, 0.0], (0.0, 1.0), 0.1),
            Err(GeodesicError::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(matches!(
            integrate(&coeffs, &[0.0; 2], &[0.0; 2], &[0.0; 2], (0.0, 1.0), -0.5),
            Err(GeodesicError::BadStep { .. })
        ));
        assert!(matches!(
            integrate(&coeffs, &[0.0; 2], &[0.0; 2], &[0.0; 2], (1.0, 1.0), 0.1),
            Err(GeodesicError::BadStep { .. })
        ));

        // cubic velocity forcing with a huge initial velocity overflows
        let mut g3 = Tensor4::zero(1);
        g3.set(0, 0, 0, 0, PolyFun::parse(3, 1, "1").unwrap());
        let blowup = GeodesicCoefficients::new(Tensor3::zero(1), g3, Tensor3::zero(1));
        assert!(matches!(
            integrate(&blowup, &[0.0], &[1.0e150], &[0.0], (0.0, 1.0), 0.5),
            Err(GeodesicError::NonFiniteState(_))
        ));
    }
}
