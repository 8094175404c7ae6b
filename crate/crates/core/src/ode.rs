//! Adaptive Dormand-Prince 5(4) integration for matrix-valued ODEs.

use crate::error::{Error, Result};
use crate::linalg::{r, CMat};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen from the derivative norm when `None`.
    pub first_step: Option<f64>,
    /// Upper bound on the step size.
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, first_step: None, max_step: None, max_steps: 5_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Differences between the 5th- and embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy_into(out: &mut CMat, base: &CMat, h: f64, terms: &[(f64, &CMat)]) {
    out.copy_from(base);
    for &(a, k) in terms {
        if a != 0.0 {
            out.zip_apply(k, |o, kv| *o += kv * (h * a));
        }
    }
}

fn error_norm(err: &CMat, y0: &CMat, y1: &CMat, opts: &OdeOptions) -> f64 {
    let mut acc = 0.0_f64;
    for ((e, a), b) in err.iter().zip(y0.iter()).zip(y1.iter()) {
        let scale = opts.atol + opts.rtol * a.norm().max(b.norm());
        acc = acc.max(e.norm() / scale);
    }
    acc
}

/// Integrates dy/dt = f(t, y) and calls `observe(k, t_k, y)` at every output
/// time. `f` writes the derivative into its third argument. Output times must
/// be non-decreasing and start at or after `t0`.
pub fn integrate<F, O>(mut f: F, t0: f64, y0: CMat, t_out: &[f64], opts: &OdeOptions, mut observe: O) -> Result<OdeStats>
where
    F: FnMut(f64, &CMat, &mut CMat),
    O: FnMut(usize, f64, &CMat),
{
    if t_out.windows(2).any(|w| w[1] < w[0]) || t_out.first().is_some_and(|&t| t < t0) {
        return Err(Error::InvalidParameter("output times must be sorted and >= t0".into()));
    }
    let (nr, nc) = y0.shape();
    let mut stats = OdeStats::default();
    let mut y = y0;
    let mut t = t0;
    let mut k1 = CMat::zeros(nr, nc);
    let mut k2 = CMat::zeros(nr, nc);
    let mut k3 = CMat::zeros(nr, nc);
    let mut k4 = CMat::zeros(nr, nc);
    let mut k5 = CMat::zeros(nr, nc);
    let mut k6 = CMat::zeros(nr, nc);
    let mut k7 = CMat::zeros(nr, nc);
    let mut tmp = CMat::zeros(nr, nc);
    let mut y_new = CMat::zeros(nr, nc);
    let mut err = CMat::zeros(nr, nc);

    f(t, &y, &mut k1);
    stats.evaluations += 1;
    let span = t_out.last().map_or(0.0, |&tl| tl - t0);
    let mut h = match opts.first_step {
        Some(h) => h,
        None => {
            let dnorm = k1.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
            let ynorm = y.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
            if dnorm > 1e-12 && ynorm > 1e-12 {
                0.01 * ynorm / dnorm
            } else {
                span * 1e-6
            }
        }
    };
    if let Some(hm) = opts.max_step {
        h = h.min(hm);
    }
    if !(h > 0.0) || !h.is_finite() {
        h = (span * 1e-6).max(f64::MIN_POSITIVE);
    }

    for (k, &target) in t_out.iter().enumerate() {
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::Convergence(format!("ODE step budget exhausted at t = {t:e}")));
            }
            let remaining = target - t;
            let mut step = h.min(remaining);
            // Avoid a sliver of a step right before the output time.
            if remaining - step < 1e-3 * step {
                step = remaining;
            }
            if step <= 1e-14 * t.abs().max(span) {
                return Err(Error::Stiffness { t });
            }
            axpy_into(&mut tmp, &y, step, &[(A21, &k1)]);
            f(t + C2 * step, &tmp, &mut k2);
            axpy_into(&mut tmp, &y, step, &[(A31, &k1), (A32, &k2)]);
            f(t + C3 * step, &tmp, &mut k3);
            axpy_into(&mut tmp, &y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            f(t + C4 * step, &tmp, &mut k4);
            axpy_into(&mut tmp, &y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
            f(t + C5 * step, &tmp, &mut k5);
            axpy_into(&mut tmp, &y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
            f(t + step, &tmp, &mut k6);
            axpy_into(&mut y_new, &y, step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            f(t + step, &y_new, &mut k7);
            stats.evaluations += 6;
            err.fill(r(0.0));
            for (e, k) in [(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)] {
                err.zip_apply(k, |o, kv| *o += kv * (step * e));
            }
            let en = error_norm(&err, &y, &y_new, opts);
            if en <= 1.0 {
                t = if step == remaining { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                stats.accepted += 1;
                let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
                h = step * fac;
            } else {
                stats.rejected += 1;
                let fac = if en.is_finite() { (0.9 * en.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                h = step * fac;
            }
            if let Some(hm) = opts.max_step {
                h = h.min(hm);
            }
        }
        observe(k, target, &y);
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, expm, I};
    use approx::assert_relative_eq;

    #[test]
    fn scalar_exponential_decay() {
        let y0 = CMat::from_element(1, 1, r(1.0));
        let times = [0.5, 1.0, 2.0, 5.0];
        let mut got = vec![];
        integrate(|_, y, dy| dy.copy_from(&(y * r(-1.3))), 0.0, y0, &times, &OdeOptions::default(), |_, _, y| got.push(y[(0, 0)].re))
            .unwrap();
        for (t, v) in times.iter().zip(&got) {
            assert_relative_eq!(*v, (-1.3 * t).exp(), max_relative = 1e-7);
        }
    }

    #[test]
    fn matrix_linear_system_matches_expm() {
        let a = CMat::from_row_slice(2, 2, &[c(0.0, -1.0), c(0.3, 0.0), c(-0.3, 0.0), c(-0.2, 2.0)]);
        let y0 = CMat::identity(2, 2);
        let mut last = CMat::zeros(2, 2);
        integrate(|_, y, dy| dy.copy_from(&(&a * y)), 0.0, y0, &[3.0], &OdeOptions::default(), |_, _, y| last = y.clone()).unwrap();
        let exact = expm(&(&a * r(3.0)));
        assert!((last - exact).norm() < 1e-7);
    }

    #[test]
    fn time_dependent_phase() {
        // dy/dt = -i cos(t) y  =>  y = exp(-i sin t)
        let y0 = CMat::from_element(1, 1, r(1.0));
        let mut got = r(0.0);
        integrate(|t, y, dy| dy.copy_from(&(y * (-I * t.cos()))), 0.0, y0, &[4.0], &OdeOptions::default(), |_, _, y| got = y[(0, 0)])
            .unwrap();
        assert!((got - (-I * 4f64.sin()).exp()).norm() < 1e-7);
    }

    #[test]
    fn rejects_unsorted_times() {
        let y0 = CMat::from_element(1, 1, r(1.0));
        let res = integrate(|_, y, dy| dy.copy_from(y), 0.0, y0, &[1.0, 0.5], &OdeOptions::default(), |_, _, _| {});
        assert!(res.is_err());
    }

    #[test]
    fn repeated_output_times_are_allowed() {
        let y0 = CMat::from_element(1, 1, r(1.0));
        let mut n = 0;
        integrate(|_, y, dy| dy.copy_from(&(y * r(-1.0))), 0.0, y0, &[0.0, 0.0, 1.0], &OdeOptions::default(), |_, _, _| n += 1)
            .unwrap();
        assert_eq!(n, 3);
    }
}
