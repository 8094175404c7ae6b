//! Small numerical utilities: special functions, fits, splines, peaks.

/// Bessel function of the first kind J_n(x) by its power series.
/// Accurate to ~1e-12 for |x| ≤ 10, degrading slowly beyond.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    if n < 0 {
        let v = bessel_j(-n, x);
        return if n % 2 == 0 { v } else { -v };
    }
    let n = n as u32;
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    let q = half * half;
    for k in 1..300u32 {
        term *= -q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Least-squares line; returns (slope, intercept).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Decay rate from a log-linear fit of a positive signal.
pub fn exp_decay_rate(t: &[f64], y: &[f64]) -> f64 {
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    -linear_fit(t, &ly).0
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Trapezoidal integral of samples on a (possibly nonuniform) grid.
pub fn trapz(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Natural cubic spline through (x, y), x strictly increasing.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            let mut a = vec![0.0; n];
            let mut b = vec![0.0; n];
            let mut cc = vec![0.0; n];
            let mut d = vec![0.0; n];
            b[0] = 1.0;
            b[n - 1] = 1.0;
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                a[i] = h0;
                b[i] = 2.0 * (h0 + h1);
                cc[i] = h1;
                d[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            }
            for i in 1..n {
                let w = a[i] / b[i - 1];
                b[i] -= w * cc[i - 1];
                d[i] -= w * d[i - 1];
            }
            m[n - 1] = d[n - 1] / b[n - 1];
            for i in (0..n - 1).rev() {
                m[i] = (d[i] - cc[i] * m[i + 1]) / b[i];
            }
        }
        Self { x: x.to_vec(), y: y.to_vec(), m }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Golden-section search for a maximum of `f` on [a, b].
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c1 = b - g * (b - a);
    let mut c2 = a + g * (b - a);
    let mut f1 = f(c1);
    let mut f2 = f(c2);
    while (b - a).abs() > tol {
        if f1 > f2 {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - g * (b - a);
            f1 = f(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + g * (b - a);
            f2 = f(c2);
        }
    }
    0.5 * (a + b)
}

/// Local maxima of sampled data, refined on a cubic spline.
/// Returns (position, value) pairs in ascending position.
pub fn local_maxima(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    if x.len() < 3 {
        return vec![];
    }
    let spline = CubicSpline::new(x, y);
    let mut out = Vec::new();
    for i in 1..x.len() - 1 {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] {
            let tol = 1e-6 * (x[i + 1] - x[i - 1]);
            let p = golden_max(|t| spline.eval(t), x[i - 1], x[i + 1], tol);
            out.push((p, spline.eval(p)));
        }
    }
    out
}

/// Full width at half maximum around the global maximum (linear crossing).
pub fn fwhm(x: &[f64], y: &[f64]) -> Option<f64> {
    let (imax, &ymax) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    let half = 0.5 * ymax;
    let cross = |i0: usize, i1: usize| {
        let t = (half - y[i0]) / (y[i1] - y[i0]);
        x[i0] + t * (x[i1] - x[i0])
    };
    let left = (1..=imax).rev().find(|&i| y[i - 1] < half).map(|i| cross(i - 1, i))?;
    let right = (imax..y.len() - 1).find(|&i| y[i + 1] < half).map(|i| cross(i, i + 1))?;
    Some(right - left)
}

/// Brent-style bracketed root (bisection with secant acceleration).
pub fn bisect_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a).abs() < tol {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bessel_reference_values() {
        assert_abs_diff_eq!(bessel_j(0, 0.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(bessel_j(0, 1.0), 0.765_197_686_557_966_6, epsilon = 1e-14);
        assert_abs_diff_eq!(bessel_j(1, 1.0), 0.440_050_585_744_933_5, epsilon = 1e-14);
        assert_abs_diff_eq!(bessel_j(2, 5.0), 0.046_565_116_277_752_2, epsilon = 1e-13);
        assert_abs_diff_eq!(bessel_j(-1, 1.0), -0.440_050_585_744_933_5, epsilon = 1e-14);
    }

    #[test]
    fn bessel_first_maximum() {
        let x = golden_max(|x| bessel_j(1, x), 1.0, 3.0, 1e-10);
        assert_abs_diff_eq!(x, 1.841_183_781, epsilon = 1e-6);
        assert_abs_diff_eq!(bessel_j(1, x), 0.581_865_2, epsilon = 1e-6);
    }

    #[test]
    fn spline_reproduces_cubic_interior() {
        let x = linspace(0.0, 3.0, 31);
        let y: Vec<f64> = x.iter().map(|t| (t * 1.3).sin()).collect();
        let s = CubicSpline::new(&x, &y);
        assert_abs_diff_eq!(s.eval(1.234), (1.234f64 * 1.3).sin(), epsilon = 1e-5);
    }

    #[test]
    fn maxima_of_two_gaussians() {
        let x = linspace(-5.0, 5.0, 201);
        let y: Vec<f64> = x
            .iter()
            .map(|t| (-(t - 1.234f64).powi(2)).exp() + (-(t + 2.0f64).powi(2)).exp())
            .collect();
        let m = local_maxima(&x, &y);
        assert_eq!(m.len(), 2);
        assert_abs_diff_eq!(m[1].0, 1.234, epsilon = 2e-3);
    }

    #[test]
    fn lorentzian_fwhm() {
        let x = linspace(-10.0, 10.0, 4001);
        let y: Vec<f64> = x.iter().map(|t| 1.0 / (1.0 + (t / 0.7).powi(2))).collect();
        assert_abs_diff_eq!(fwhm(&x, &y).unwrap(), 1.4, epsilon = 1e-4);
    }
}
