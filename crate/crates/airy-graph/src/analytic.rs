//! The Airy function `Ai` and the free-line solution `K_t ∗ u0`.
//!
//! For `u_t = αu''' + βu'` on the whole line the kernel is
//! `K_t(x) = c⁻¹ Ai(−(x + βt)/c)` with `c = (3αt)^{1/3}`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use thiserror::Error;

use crate::C64;

/// `Ai(0) = 3^{−2/3}/Γ(2/3)`.
pub const AI0: f64 = 0.355_028_053_887_817_2;
/// `−Ai'(0) = 3^{−1/3}/Γ(1/3)`.
pub const AIP0: f64 = 0.258_819_403_792_806_8;
/// Largest `|x|` accepted by [`airy_ai`].
pub const AIRY_RANGE: f64 = 50.0;

const SERIES_LIMIT: f64 = 5.0;
const OSC_LIMIT: f64 = -8.0;
const ANCHOR_STEP: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("Airy argument {0} is outside [-50, 50]")]
    OutOfRange(f64),
    #[error("free-line problem: {0}")]
    BadProblem(String),
}

/// Maclaurin series for `(Ai, Ai')`.
fn maclaurin(x: f64) -> (f64, f64) {
    let x2 = x * x;
    let x3 = x2 * x;
    // t_k ∝ x^{3k}, s_k ∝ x^{3k+1} and their derivatives
    let (mut t, mut s, mut tp, mut sp) = (1.0, x, 0.0, 1.0);
    let (mut f, mut g, mut fp, mut gp) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..200 {
        f += t;
        g += s;
        fp += tp;
        gp += sp;
        let kf = k as f64;
        tp = t * x2 / (3.0 * kf + 2.0);
        sp = s * x2 / (3.0 * kf + 3.0);
        t *= x3 / ((3.0 * kf + 2.0) * (3.0 * kf + 3.0));
        s *= x3 / ((3.0 * kf + 3.0) * (3.0 * kf + 4.0));
        let small = |v: f64, acc: f64| v.abs() <= 1e-18 * acc.abs();
        if k > 2 && small(t, f) && small(s, g) && small(tp, fp) && small(sp, gp) {
            break;
        }
    }
    (AI0 * f - AIP0 * g, AI0 * fp - AIP0 * gp)
}

/// Coefficients `u_k` of the large-argument expansions.
fn asymptotic_coeffs() -> &'static [f64] {
    static U: OnceLock<Vec<f64>> = OnceLock::new();
    U.get_or_init(|| {
        let mut u = vec![1.0];
        for k in 1..40 {
            let kf = k as f64;
            let prev = u[k - 1];
            u.push(prev * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf));
        }
        u
    })
}

fn positive_asymptotic(x: f64) -> f64 {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let u = asymptotic_coeffs();
    let mut sum = 0.0;
    let mut pow = 1.0;
    let mut last = f64::INFINITY;
    for (k, &uk) in u.iter().enumerate() {
        let term = uk * pow;
        if term.abs() > last {
            break;
        }
        sum += if k % 2 == 0 { term } else { -term };
        last = term.abs();
        pow /= zeta;
    }
    (-zeta).exp() / (2.0 * PI.sqrt() * x.powf(0.25)) * sum
}

fn oscillatory_asymptotic(x: f64) -> f64 {
    let z = -x;
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let u = asymptotic_coeffs();
    let (mut p, mut q) = (0.0, 0.0);
    let mut pow = 1.0;
    let mut last = f64::INFINITY;
    for (k, &uk) in u.iter().enumerate() {
        let term = uk * pow;
        if term.abs() > last {
            break;
        }
        last = term.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        pow /= zeta;
    }
    let th = zeta + PI / 4.0;
    (th.sin() * p - th.cos() * q) / (PI.sqrt() * z.powf(0.25))
}

/// Taylor coefficients of a solution of `y'' = x y` about `a`.
fn taylor_step(a: f64, y: f64, yp: f64, dx: f64) -> (f64, f64) {
    let mut c = [0.0f64; 48];
    c[0] = y;
    c[1] = yp;
    for n in 0..46 {
        let prev = if n >= 1 { c[n - 1] } else { 0.0 };
        c[n + 2] = (a * c[n] + prev) / ((n + 2) as f64 * (n + 1) as f64);
    }
    let (mut v, mut d) = (0.0, 0.0);
    for n in (0..48).rev() {
        v = v * dx + c[n];
        if n >= 1 {
            d = d * dx + n as f64 * c[n];
        }
    }
    (v, d)
}

/// `(x, Ai, Ai')` on `0, −0.25, …, −8`, integrated from the exact values at 0.
fn anchors() -> &'static [(f64, f64, f64)] {
    static A: OnceLock<Vec<(f64, f64, f64)>> = OnceLock::new();
    A.get_or_init(|| {
        let n = (-OSC_LIMIT / ANCHOR_STEP).round() as usize;
        let mut out = vec![(0.0, AI0, -AIP0)];
        for k in 0..n {
            let (a, y, yp) = out[k];
            let (y2, yp2) = taylor_step(a, y, yp, -ANCHOR_STEP);
            out.push((-(k as f64 + 1.0) * ANCHOR_STEP, y2, yp2));
        }
        out
    })
}

fn from_anchor(x: f64) -> f64 {
    let k = ((-x) / ANCHOR_STEP).round() as usize;
    let (a, y, yp) = anchors()[k];
    taylor_step(a, y, yp, x - a).0
}

/// `Ai(x)` for `|x| ≤ 50`.
pub fn airy_ai(x: f64) -> Result<f64, AnalyticError> {
    if x.is_nan() || x.abs() > AIRY_RANGE {
        return Err(AnalyticError::OutOfRange(x));
    }
    Ok(if x > SERIES_LIMIT {
        positive_asymptotic(x)
    } else if x >= -SERIES_LIMIT {
        maclaurin(x).0
    } else if x >= OSC_LIMIT {
        from_anchor(x)
    } else {
        oscillatory_asymptotic(x)
    })
}

/// `Ai'(x)` from the Maclaurin series, for `|x| ≤ 5`.
pub fn airy_ai_prime_series(x: f64) -> f64 {
    maclaurin(x).1
}

/// Free evolution on the line from `u0` sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeLineProblem {
    pub alpha: f64,
    pub beta: f64,
    pub x0: f64,
    pub dx: f64,
    pub u0: Vec<f64>,
}

impl FreeLineProblem {
    pub fn new(alpha: f64, beta: f64, x0: f64, dx: f64, u0: Vec<f64>) -> Result<Self, AnalyticError> {
        if alpha == 0.0 || !alpha.is_finite() || !beta.is_finite() {
            return Err(AnalyticError::BadProblem("alpha must be nonzero and finite".into()));
        }
        if dx.is_nan() || dx <= 0.0 || u0.len() < 2 {
            return Err(AnalyticError::BadProblem("need a uniform grid with at least two points".into()));
        }
        let scale = u0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tail = u0[0].abs().max(u0[u0.len() - 1].abs());
        if tail > 1e-12 * scale.max(1.0) {
            return Err(AnalyticError::BadProblem(format!("datum is {tail:.2e} at the grid ends")));
        }
        Ok(FreeLineProblem { alpha, beta, x0, dx, u0 })
    }

    /// Samples `f` on `n` points starting at `x0`.
    pub fn sampled(
        alpha: f64,
        beta: f64,
        x0: f64,
        dx: f64,
        n: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self, AnalyticError> {
        let u0 = (0..n).map(|j| f(x0 + j as f64 * dx)).collect();
        Self::new(alpha, beta, x0, dx, u0)
    }
}

/// `K_t(x) = c⁻¹ Ai(−(x + βt)/c)`, `c = (3αt)^{1/3}`; `α < 0` reflects the argument.
pub fn kernel(alpha: f64, beta: f64, t: f64, x: f64) -> Result<f64, AnalyticError> {
    let c = (3.0 * alpha.abs() * t).cbrt();
    let arg = (x + beta * t) / c;
    let arg = if alpha > 0.0 { -arg } else { arg };
    if arg > AIRY_RANGE {
        // Ai(50) ≈ 4.6e−104: the kernel is zero to double precision
        return Ok(0.0);
    }
    Ok(airy_ai(arg)? / c)
}

/// `(K_t ∗ u0)(x)` at each requested point by the trapezoid rule on `u0`'s grid.
pub fn free_solution(p: &FreeLineProblem, t: f64, x_grid: &[f64]) -> Result<Vec<C64>, AnalyticError> {
    if t.is_nan() || t <= 0.0 {
        return Err(AnalyticError::BadProblem(format!("time must be positive, got {t}")));
    }
    let n = p.u0.len();
    let mut out = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let mut acc = 0.0;
        for (j, &v) in p.u0.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            let y = p.x0 + j as f64 * p.dx;
            acc += w * v * kernel(p.alpha, p.beta, t, x - y)?;
        }
        out.push(C64::new(acc * p.dx, 0.0));
    }
    Ok(out)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    /// Reference values computed with 30-digit arithmetic.
    const REFERENCE: [(f64, f64); 21] = [
        (0.0, 0.35502805388781723926),
        (1.0, 0.13529241631288141552),
        (2.5, 0.015725923380470489995),
        (-1.0, 0.5355608832923521188),
        (-2.5, -0.11232506769296608919),
        (4.9, 0.00013599211701506742767),
        (5.1, 0.000086132427064788511554),
        (-4.9, 0.37453635470583874724),
        (-5.1, 0.30952599628731769164),
        (-6.3, -0.33734764921613511545),
        (-7.77, 0.158490259490167074),
        (-8.2, -0.2215994548036039131),
        (-10.0, 0.040241238486443190689),
        (-20.0, -0.17640612707798468959),
        (-37.5, 0.013668155455244660842),
        (7.0, 7.4921288639971670808e-7),
        (10.0, 1.1047532552898685934e-10),
        (20.0, 1.6916728686705403136e-27),
        (35.5, 6.6461245584200390975e-63),
        (50.0, 4.5849417240748284783e-104),
        (-50.0, -0.16188142361232092392),
    ];

    #[test]
    fn matches_reference_values() {
        for (x, want) in REFERENCE {
            let got = airy_ai(x).unwrap();
            if x.abs() <= 10.0 {
                assert!((got - want).abs() <= 1e-10, "Ai({x}) = {got}, want {want}");
            }
            assert!(
                (got - want).abs() <= 1e-8 * want.abs() + 1e-10 * f64::from(x.abs() <= 10.0),
                "Ai({x}) = {got}, want {want}"
            );
        }
        assert_eq!(airy_ai(50.5), Err(AnalyticError::OutOfRange(50.5)));
        assert!(airy_ai(f64::NAN).is_err());
    }

    #[test]
    fn branches_agree_at_switch_points() {
        for x in [5.0, 5.5, 6.0] {
            let a = maclaurin(x).0;
            let b = positive_asymptotic(x);
            assert!((a - b).abs() < 1e-11, "{x}: {a} vs {b}");
        }
        for x in [-5.0, -6.0, -7.5] {
            let a = maclaurin(x).0;
            let b = from_anchor(x);
            assert!((a - b).abs() < 1e-9, "{x}: {a} vs {b}");
        }
        assert!((from_anchor(-8.0) - oscillatory_asymptotic(-8.0)).abs() < 1e-11);
        assert!((airy_ai_prime_series(0.0) + AIP0).abs() < 1e-16);
        // Ai'(1) from 30-digit arithmetic
        assert!((airy_ai_prime_series(1.0) + 0.15914744129679321279).abs() < 1e-14);
    }

    #[test]
    fn decreasing_for_positive_arguments() {
        let mut prev = airy_ai(1.0).unwrap();
        for k in 1..=490 {
            let v = airy_ai(1.0 + 0.1 * k as f64).unwrap();
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
    }

    #[test]
    fn shifted_kernel_translates() {
        let p = FreeLineProblem::sampled(1.0, 0.0, -12.0, 0.02, 1201, |x| (-x * x / 2.0).exp()).unwrap();
        let pb = FreeLineProblem { beta: 0.8, ..p.clone() };
        let t = 0.5;
        let xs = [-2.0, -0.5, 0.3, 1.7];
        let shifted: Vec<f64> = xs.iter().map(|x| x + 0.8 * t).collect();
        let a = free_solution(&pb, t, &xs).unwrap();
        let b = free_solution(&p, t, &shifted).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).norm() < 1e-10);
        }
    }
}
