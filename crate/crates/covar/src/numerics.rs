//! Special functions and root-finding primitives.
//!
//! Everything here is pure and deterministic. The normal and Student-t
//! distribution functions are implemented from scratch (series / continued
//! fraction for erfc, regularized incomplete beta for t) so that accuracy is
//! under our control down to ~1e-14 in probability space.

use crate::error::{CovarError, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3; // 1/sqrt(pi)
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Tolerances for iterative numeric routines.
///
/// `abs_tol` is interpreted in the space of the residual being driven to
/// zero (probability space for cdf inversions).
#[derive(Debug, Clone, Copy)]
pub struct NumericTolerance {
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for NumericTolerance {
    fn default() -> Self {
        NumericTolerance {
            abs_tol: 1e-12,
            max_iter: 200,
        }
    }
}

impl NumericTolerance {
    pub fn new(abs_tol: f64, max_iter: usize) -> Result<Self> {
        if !(abs_tol > 0.0) {
            return Err(CovarError::Domain(format!(
                "abs_tol must be positive, got {abs_tol}"
            )));
        }
        if max_iter == 0 {
            return Err(CovarError::Domain("max_iter must be >= 1".into()));
        }
        Ok(NumericTolerance { abs_tol, max_iter })
    }
}

/// A sign-changing interval for root finding.
#[derive(Debug, Clone, Copy)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(CovarError::Domain(format!(
                "bracket requires lo < hi, got [{lo}, {hi}]"
            )));
        }
        if f_lo * f_hi > 0.0 {
            return Err(CovarError::Bracket { lo, hi, f_lo, f_hi });
        }
        Ok(Bracket { lo, hi, f_lo, f_hi })
    }

    /// Evaluate `f` at both ends and build the bracket.
    pub fn from_fn<F: FnMut(f64) -> f64>(lo: f64, hi: f64, f: &mut F) -> Result<Self> {
        let f_lo = f(lo);
        let f_hi = f(hi);
        Bracket::new(lo, hi, f_lo, f_hi)
    }
}

fn erf_series(z: f64) -> f64 {
    // erf(z) = 2/sqrt(pi) * exp(-z^2) * sum_{n>=0} (2 z^2)^n * z / (1*3*...*(2n+1))
    // All terms positive: numerically stable for moderate z.
    let z2 = 2.0 * z * z;
    let mut term = z;
    let mut sum = z;
    let mut denom = 1.0f64;
    for _ in 1..200 {
        denom += 2.0;
        term *= z2 / denom;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    2.0 * FRAC_1_SQRT_PI * (-z * z).exp() * sum
}

fn erfc_cf(z: f64) -> f64 {
    // erfc(z) = exp(-z^2)/sqrt(pi) * 1/(z + 1/2/(z + 1/(z + 3/2/(z + ...))))
    // Modified Lentz evaluation; rapid for z >= 3.
    let tiny = 1e-300;
    let mut c = z;
    let mut d = 0.0f64;
    let mut h = z;
    for i in 1..200 {
        let a = 0.5 * i as f64;
        d = z + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = z + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    (-z * z).exp() * FRAC_1_SQRT_PI / h
}

/// Complementary error function, accurate to ~1e-16 relative.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 3.0 {
        1.0 - erf_series(x)
    } else if x > 27.0 {
        0.0 // underflows below f64 minimum
    } else {
        erfc_cf(x)
    }
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Standard normal distribution function.
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(CovarError::Domain(format!("non-finite input {x}")));
    }
    let p = 0.5 * erfc(-x / SQRT_2);
    Ok(p)
}

/// Standard normal quantile.
///
/// Acklam's rational approximation refined by two Halley steps on the cdf
/// residual; the result composes with [`std_normal_cdf`] to identity well
/// below 1e-10.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(CovarError::Domain(format!(
            "quantile level must lie in (0,1), got {p}"
        )));
    }
    let mut x = acklam(p);
    for _ in 0..2 {
        let e = 0.5 * erfc(-x / SQRT_2) - p;
        let u = e * SQRT_2PI * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(x)
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Natural log of the gamma function (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (i, &g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized incomplete beta function I_x(a, b), continued-fraction
/// evaluation with the usual symmetry switch.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(CovarError::Domain(format!(
            "incomplete beta requires a,b > 0, got a={a}, b={b}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(CovarError::Domain(format!(
            "incomplete beta requires x in [0,1], got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_cf(x, a, b) / a)
    } else {
        Ok(1.0 - front * beta_cf(1.0 - x, b, a) / b)
    }
}

fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    let tiny = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0f64;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Student-t distribution function with `nu > 0` degrees of freedom
/// (non-integer allowed).
pub fn student_t_cdf(x: f64, nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(CovarError::Domain(format!(
            "degrees of freedom must be positive, got {nu}"
        )));
    }
    if !x.is_finite() {
        return Err(CovarError::Domain(format!("non-finite input {x}")));
    }
    if x == 0.0 {
        return Ok(0.5);
    }
    let t = nu / (nu + x * x);
    let half_tail = 0.5 * reg_inc_beta(t, 0.5 * nu, 0.5)?;
    Ok(if x > 0.0 { 1.0 - half_tail } else { half_tail })
}

/// Student-t density.
pub fn student_t_pdf(x: f64, nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(CovarError::Domain(format!(
            "degrees of freedom must be positive, got {nu}"
        )));
    }
    let ln_c = ln_gamma(0.5 * (nu + 1.0))
        - ln_gamma(0.5 * nu)
        - 0.5 * (nu * std::f64::consts::PI).ln();
    Ok((ln_c - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()).exp())
}

/// Student-t quantile, inverse of [`student_t_cdf`] to 1e-12 in probability
/// space. Closed form for nu = 1 (Cauchy) and nu = 2; bracketed root
/// finding otherwise.
pub fn student_t_quantile(p: f64, nu: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(CovarError::Domain(format!(
            "quantile level must lie in (0,1), got {p}"
        )));
    }
    if !(nu > 0.0) {
        return Err(CovarError::Domain(format!(
            "degrees of freedom must be positive, got {nu}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if nu == 1.0 {
        return Ok((std::f64::consts::PI * (p - 0.5)).tan());
    }
    if nu == 2.0 {
        let a = 2.0 * p - 1.0;
        return Ok(a * (2.0 / (1.0 - a * a)).sqrt());
    }
    // Bracket around a normal-quantile-shaped initial guess, expanding
    // geometrically; needed because small-nu tails reach far beyond any
    // fixed window.
    let mut f = |x: f64| student_t_cdf(x, nu).expect("finite x") - p;
    let mut half = 50.0f64;
    let (mut lo, mut hi) = (-half, half);
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    for _ in 0..64 {
        if f_lo * f_hi <= 0.0 {
            break;
        }
        half *= 8.0;
        lo = -half;
        hi = half;
        f_lo = f(lo);
        f_hi = f(hi);
    }
    let bracket = Bracket::new(lo, hi, f_lo, f_hi)?;
    find_root(
        &mut f,
        bracket,
        NumericTolerance {
            abs_tol: 1e-12,
            max_iter: 200,
        },
    )
}

/// Bracketed root finding for a monotone continuous function: bisection with
/// secant acceleration, falling back to pure bisection whenever the secant
/// step fails to contract the interval. Fully deterministic.
pub fn find_root<F: FnMut(f64) -> f64>(
    f: &mut F,
    bracket: Bracket,
    tol: NumericTolerance,
) -> Result<f64> {
    let Bracket {
        mut lo,
        mut hi,
        mut f_lo,
        mut f_hi,
    } = bracket;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo * f_hi > 0.0 {
        return Err(CovarError::Bracket { lo, hi, f_lo, f_hi });
    }

    let mut best = if f_lo.abs() < f_hi.abs() { lo } else { hi };
    let mut best_res = f_lo.abs().min(f_hi.abs());

    for iter in 0..tol.max_iter {
        let width = hi - lo;
        // Secant proposal, kept strictly interior; otherwise bisect.
        let secant = lo - f_lo * width / (f_hi - f_lo);
        let margin = 0.01 * width;
        let x = if secant > lo + margin && secant < hi - margin {
            secant
        } else {
            0.5 * (lo + hi)
        };
        let fx = f(x);
        if fx.abs() < best_res {
            best = x;
            best_res = fx.abs();
        }
        if fx == 0.0 || fx.abs() <= tol.abs_tol {
            return Ok(x);
        }
        if fx * f_lo < 0.0 {
            hi = x;
            f_hi = fx;
        } else {
            lo = x;
            f_lo = fx;
        }
        // Every few iterations force a bisection so the interval provably
        // contracts even when the secant stalls at one end.
        if iter % 3 == 2 {
            let mid = 0.5 * (lo + hi);
            if mid > lo && mid < hi {
                let fm = f(mid);
                if fm.abs() < best_res {
                    best = mid;
                    best_res = fm.abs();
                }
                if fm == 0.0 || fm.abs() <= tol.abs_tol {
                    return Ok(mid);
                }
                if fm * f_lo < 0.0 {
                    hi = mid;
                    f_hi = fm;
                } else {
                    lo = mid;
                    f_lo = fm;
                }
            }
        }
        if hi - lo <= tol.abs_tol {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(CovarError::Convergence {
        best,
        residual: best_res,
        iterations: tol.max_iter,
    })
}

/// Adaptive Simpson quadrature of `f` on [a, b] with absolute tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fb, fm, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, fm, flm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, fb, frm, right, 0.5 * tol, depth - 1)
    }
}
