//! Bivariate copula families with conditional distributions, conditional
//! quantiles, sampling, and tail-dependence diagnostics.
//!
//! The conditional distribution g(v, u) = dC(u, v)/du is the object
//! everything else is built on: its inverse in v turns a conditional
//! confidence level into an unconditional one.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{CovarError, Result};
use crate::numerics::{
    find_root, integrate, std_normal_cdf, std_normal_quantile, student_t_cdf,
    student_t_quantile, Bracket, NumericTolerance,
};

const RHO_MAX: f64 = 0.999;
const THETA_MAX: f64 = 50.0;
// probability-space guard for root-finding brackets
const EPS: f64 = 1e-12;

/// Tail side selector for finite-level dependence measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
}

/// An Archimedean generator: phi decreasing convex on (0,1] with phi(1)=0,
/// together with its inverse and derivative. `phi_prime_inv` is optional;
/// without it the conditional quantile falls back to root finding.
#[derive(Clone)]
pub struct GeneratorSpec {
    pub phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub phi_inv: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub phi_prime: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub phi_prime_inv: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl std::fmt::Debug for GeneratorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GeneratorSpec")
            .field("phi_prime_inv", &self.phi_prime_inv.is_some())
            .finish()
    }
}

impl GeneratorSpec {
    /// Clayton generator phi(t) = t^{-theta} - 1, with analytic phi'^{-1}.
    pub fn clayton(theta: f64) -> Result<Self> {
        if !(theta > 0.0) {
            return Err(CovarError::Domain(format!(
                "Clayton generator requires theta > 0, got {theta}"
            )));
        }
        Ok(GeneratorSpec {
            phi: Arc::new(move |t: f64| t.powf(-theta) - 1.0),
            phi_inv: Arc::new(move |s: f64| (1.0 + s).powf(-1.0 / theta)),
            phi_prime: Arc::new(move |t: f64| -theta * t.powf(-theta - 1.0)),
            phi_prime_inv: Some(Arc::new(move |y: f64| {
                (-y / theta).powf(-1.0 / (theta + 1.0))
            })),
        })
    }

    /// Gumbel generator phi(t) = (-ln t)^theta; phi'^{-1} has no closed
    /// form, so the conditional quantile goes through root finding.
    pub fn gumbel(theta: f64) -> Result<Self> {
        if !(theta >= 1.0) {
            return Err(CovarError::Domain(format!(
                "Gumbel generator requires theta >= 1, got {theta}"
            )));
        }
        Ok(GeneratorSpec {
            phi: Arc::new(move |t: f64| (-t.ln()).powf(theta)),
            phi_inv: Arc::new(move |s: f64| (-s.powf(1.0 / theta)).exp()),
            phi_prime: Arc::new(move |t: f64| -theta * (-t.ln()).powf(theta - 1.0) / t),
            phi_prime_inv: None,
        })
    }
}

/// A bivariate copula.
#[derive(Debug, Clone)]
pub enum CopulaModel {
    Gaussian { rho: f64 },
    StudentT { rho: f64, nu: f64 },
    Gumbel { theta: f64 },
    Clayton { theta: f64 },
    Archimedean { gen: GeneratorSpec },
}

impl CopulaModel {
    pub fn gaussian(rho: f64) -> Result<Self> {
        if !(rho.abs() <= RHO_MAX) {
            return Err(CovarError::Domain(format!(
                "|rho| must be <= {RHO_MAX}, got {rho}"
            )));
        }
        Ok(CopulaModel::Gaussian { rho })
    }

    pub fn student_t(rho: f64, nu: f64) -> Result<Self> {
        if !(rho.abs() <= RHO_MAX) {
            return Err(CovarError::Domain(format!(
                "|rho| must be <= {RHO_MAX}, got {rho}"
            )));
        }
        if !(nu > 0.0) {
            return Err(CovarError::Domain(format!(
                "t copula requires nu > 0, got {nu}"
            )));
        }
        Ok(CopulaModel::StudentT { rho, nu })
    }

    pub fn gumbel(theta: f64) -> Result<Self> {
        if !(1.0..=THETA_MAX).contains(&theta) {
            return Err(CovarError::Domain(format!(
                "theta must be >= 1 (and <= {THETA_MAX}), got {theta}"
            )));
        }
        Ok(CopulaModel::Gumbel { theta })
    }

    pub fn clayton(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= THETA_MAX) {
            return Err(CovarError::Domain(format!(
                "theta must lie in (0, {THETA_MAX}], got {theta}"
            )));
        }
        Ok(CopulaModel::Clayton { theta })
    }

    pub fn archimedean(gen: GeneratorSpec) -> Self {
        CopulaModel::Archimedean { gen }
    }

    /// The copula function C(u, v).
    pub fn copula_cdf(&self, u: f64, v: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return Err(CovarError::Domain(format!(
                "copula arguments must lie in [0,1], got ({u}, {v})"
            )));
        }
        // Boundary conditions hold exactly by construction.
        if u == 0.0 || v == 0.0 {
            return Ok(0.0);
        }
        if u == 1.0 {
            return Ok(v);
        }
        if v == 1.0 {
            return Ok(u);
        }
        match self {
            CopulaModel::Gaussian { rho } => {
                if *rho == 0.0 {
                    return Ok(u * v);
                }
                let rho = *rho;
                let s = (1.0 - rho * rho).sqrt();
                let qv = std_normal_quantile(v)?;
                // C(u,v) = integral_0^u g(v, t) dt of the conditional cdf
                let f = move |t: f64| {
                    if t <= 0.0 {
                        return if rho > 0.0 { 1.0 } else { 0.0 };
                    }
                    if t >= 1.0 {
                        return if rho > 0.0 { 0.0 } else { 1.0 };
                    }
                    let qt = std_normal_quantile(t).unwrap();
                    std_normal_cdf((qv - rho * qt) / s).unwrap()
                };
                Ok(integrate(&f, 0.0, u, 5e-14).clamp(0.0, u.min(v)))
            }
            CopulaModel::StudentT { rho, nu } => {
                let (rho, nu) = (*rho, *nu);
                let s = (1.0 - rho * rho).sqrt();
                let qv = student_t_quantile(v, nu)?;
                let limit_lo = student_t_cdf((nu + 1.0).sqrt() * rho / s, nu + 1.0)?;
                let limit_hi = student_t_cdf(-(nu + 1.0).sqrt() * rho / s, nu + 1.0)?;
                let f = move |t: f64| {
                    if t <= 1e-14 {
                        return limit_lo;
                    }
                    if t >= 1.0 - 1e-14 {
                        return limit_hi;
                    }
                    let qt = student_t_quantile(t, nu).unwrap();
                    let scale = ((nu + 1.0) / (nu + qt * qt)).sqrt();
                    student_t_cdf(scale * (qv - rho * qt) / s, nu + 1.0).unwrap()
                };
                Ok(integrate(&f, 0.0, u, 1e-12).clamp(0.0, u.min(v)))
            }
            CopulaModel::Gumbel { theta } => {
                let a = (-u.ln()).powf(*theta) + (-v.ln()).powf(*theta);
                Ok((-a.powf(1.0 / theta)).exp())
            }
            CopulaModel::Clayton { theta } => {
                Ok((u.powf(-theta) + v.powf(-theta) - 1.0).powf(-1.0 / theta))
            }
            CopulaModel::Archimedean { gen } => {
                let s = (gen.phi)(u) + (gen.phi)(v);
                Ok((gen.phi_inv)(s).clamp(0.0, 1.0))
            }
        }
    }

    /// Conditional distribution g(v, u) = dC(u, v)/du = P(V <= v | U = u).
    pub fn cond_cdf(&self, v: f64, u: f64) -> Result<f64> {
        check_open_unit("v", v)?;
        check_open_unit("u", u)?;
        match self {
            CopulaModel::Gaussian { rho } => {
                let s = (1.0 - rho * rho).sqrt();
                let z = (std_normal_quantile(v)? - rho * std_normal_quantile(u)?) / s;
                std_normal_cdf(z)
            }
            CopulaModel::StudentT { rho, nu } => {
                let s = (1.0 - rho * rho).sqrt();
                let qu = student_t_quantile(u, *nu)?;
                let qv = student_t_quantile(v, *nu)?;
                let scale = ((nu + 1.0) / (nu + qu * qu)).sqrt();
                student_t_cdf(scale * (qv - rho * qu) / s, nu + 1.0)
            }
            CopulaModel::Gumbel { theta } => {
                if *theta == 1.0 {
                    return Ok(v);
                }
                let lu = -u.ln();
                let a = lu.powf(*theta) + (-v.ln()).powf(*theta);
                let c = (-a.powf(1.0 / theta)).exp();
                Ok((c * a.powf(1.0 / theta - 1.0) * lu.powf(theta - 1.0) / u).clamp(0.0, 1.0))
            }
            CopulaModel::Clayton { theta } => {
                Ok((1.0 + u.powf(*theta) * (v.powf(-theta) - 1.0))
                    .powf(-(theta + 1.0) / theta))
            }
            CopulaModel::Archimedean { gen } => {
                let inner = (gen.phi_inv)((gen.phi)(u) + (gen.phi)(v));
                Ok(((gen.phi_prime)(u) / (gen.phi_prime)(inner)).clamp(0.0, 1.0))
            }
        }
    }

    /// Conditional quantile g^{-1}(alpha, u): the v with g(v, u) = alpha.
    pub fn cond_quantile(&self, alpha: f64, u: f64) -> Result<f64> {
        check_open_unit("alpha", alpha)?;
        check_open_unit("u", u)?;
        match self {
            CopulaModel::Gaussian { rho } => {
                let s = (1.0 - rho * rho).sqrt();
                std_normal_cdf(rho * std_normal_quantile(u)? + s * std_normal_quantile(alpha)?)
            }
            CopulaModel::StudentT { rho, nu } => {
                let s2 = 1.0 - rho * rho;
                let qu = student_t_quantile(u, *nu)?;
                let w = (s2 * (nu + qu * qu) / (nu + 1.0)).sqrt();
                student_t_cdf(rho * qu + w * student_t_quantile(alpha, nu + 1.0)?, *nu)
            }
            CopulaModel::Clayton { theta } => {
                let a = alpha.powf(-theta / (1.0 + theta)) - 1.0;
                Ok((a * u.powf(-theta) + 1.0).powf(-1.0 / theta))
            }
            CopulaModel::Gumbel { theta } => {
                if *theta == 1.0 {
                    return Ok(alpha);
                }
                self.cond_quantile_by_root(alpha, u)
            }
            CopulaModel::Archimedean { gen } => match &gen.phi_prime_inv {
                Some(phi_prime_inv) => {
                    let t = phi_prime_inv((gen.phi_prime)(u) / alpha);
                    Ok((gen.phi_inv)((gen.phi)(t) - (gen.phi)(u)).clamp(0.0, 1.0))
                }
                None => self.cond_quantile_by_root(alpha, u),
            },
        }
    }

    fn cond_quantile_by_root(&self, alpha: f64, u: f64) -> Result<f64> {
        // g(., u) is strictly increasing in v, so the bracketed root is
        // unique.
        let mut f = |v: f64| self.cond_cdf(v, u).unwrap() - alpha;
        let (lo, hi) = (EPS, 1.0 - EPS);
        let f_lo = f(lo);
        let f_hi = f(hi);
        if f_lo >= 0.0 {
            return Ok(lo);
        }
        if f_hi <= 0.0 {
            return Ok(hi);
        }
        let bracket = Bracket::new(lo, hi, f_lo, f_hi)?;
        find_root(&mut f, bracket, NumericTolerance::default())
    }

    /// Draws `n` iid pairs with this copula. Deterministic per seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
        self.sample_where(n, seed, |_| true)
    }

    /// Like [`sample`](Self::sample) but only materializes pairs whose first
    /// coordinate passes the filter. The RNG stream is consumed identically
    /// regardless of the filter, so retained pairs match what an unfiltered
    /// run would produce. For the Archimedean conditional method the v-side
    /// inversion is skipped for rejected draws.
    pub fn sample_where<F: FnMut(f64) -> bool>(
        &self,
        n: usize,
        seed: u64,
        mut keep: F,
    ) -> Result<Vec<(f64, f64)>> {
        if n == 0 {
            return Err(CovarError::Domain("sample size must be >= 1".into()));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        match self {
            CopulaModel::Gaussian { rho } => {
                let s = (1.0 - rho * rho).sqrt();
                for _ in 0..n {
                    let z1: f64 = StandardNormal.sample(&mut rng);
                    let z2: f64 = StandardNormal.sample(&mut rng);
                    let u = clamp_unit(std_normal_cdf(z1)?);
                    if keep(u) {
                        let v = std_normal_cdf(rho * z1 + s * z2)?;
                        out.push((u, clamp_unit(v)));
                    }
                }
            }
            CopulaModel::StudentT { rho, nu } => {
                let s = (1.0 - rho * rho).sqrt();
                let chi = ChiSquared::new(*nu).map_err(|e| {
                    CovarError::Domain(format!("chi-squared sampler: {e}"))
                })?;
                for _ in 0..n {
                    let z1: f64 = StandardNormal.sample(&mut rng);
                    let z2: f64 = StandardNormal.sample(&mut rng);
                    let w: f64 = chi.sample(&mut rng);
                    let scale = (nu / w).sqrt();
                    let u = clamp_unit(student_t_cdf(z1 * scale, *nu)?);
                    if keep(u) {
                        let x2 = (rho * z1 + s * z2) * scale;
                        let v = student_t_cdf(x2, *nu)?;
                        out.push((u, clamp_unit(v)));
                    }
                }
            }
            // Archimedean families: conditional method, v = g^{-1}(w, u)
            // with u, w iid uniform.
            _ => {
                for _ in 0..n {
                    let u = open_uniform(&mut rng);
                    let w = open_uniform(&mut rng);
                    if keep(u) {
                        let v = self.cond_quantile(w, u)?;
                        out.push((u, clamp_unit(v)));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Asymptotic (lower, upper) tail dependence coefficients.
    pub fn tail_coefficients(&self) -> Result<(f64, f64)> {
        match self {
            CopulaModel::Gaussian { .. } => Ok((0.0, 0.0)),
            CopulaModel::StudentT { rho, nu } => {
                let arg = ((nu + 1.0) * (1.0 - rho) / (1.0 + rho)).sqrt();
                let lambda = 2.0 - 2.0 * student_t_cdf(arg, nu + 1.0)?;
                Ok((lambda, lambda))
            }
            CopulaModel::Gumbel { theta } => Ok((0.0, 2.0 - 2f64.powf(1.0 / theta))),
            CopulaModel::Clayton { theta } => Ok((2f64.powf(-1.0 / theta), 0.0)),
            CopulaModel::Archimedean { gen } => {
                // Numerical limits of the generator-based expressions.
                let x0 = (gen.phi)(1.0 - 1e-8);
                let upper =
                    2.0 - (1.0 - (gen.phi_inv)(2.0 * x0)) / (1.0 - (gen.phi_inv)(x0));
                let x1 = (gen.phi)(1e-8);
                let lower = (gen.phi_inv)(2.0 * x1) / (gen.phi_inv)(x1);
                Ok((lower.clamp(0.0, 1.0), upper.clamp(0.0, 1.0)))
            }
        }
    }

    /// Finite-level quantile-quantile dependence:
    /// lower: C(a,a)/a; upper: (1 - 2a + C(a,a))/(1 - a).
    pub fn tail_dep_fn(&self, level: f64, side: Side) -> Result<f64> {
        check_open_unit("level", level)?;
        let c = self.copula_cdf(level, level)?;
        Ok(match side {
            Side::Lower => c / level,
            Side::Upper => (1.0 - 2.0 * level + c) / (1.0 - level),
        })
    }
}

fn check_open_unit(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(CovarError::Domain(format!(
            "{name} must lie in the open interval (0,1), got {x}"
        )));
    }
    Ok(())
}

#[inline]
fn clamp_unit(x: f64) -> f64 {
    x.clamp(EPS, 1.0 - EPS)
}

#[inline]
fn open_uniform<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let x: f64 = rng.gen();
        if x > 0.0 && x < 1.0 {
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn families() -> Vec<CopulaModel> {
        vec![
            CopulaModel::gaussian(0.5).unwrap(),
            CopulaModel::student_t(0.5, 5.0).unwrap(),
            CopulaModel::gumbel(2.0).unwrap(),
            CopulaModel::clayton(2.0).unwrap(),
            CopulaModel::archimedean(GeneratorSpec::clayton(2.0).unwrap()),
        ]
    }

    #[test]
    fn parameter_validation() {
        assert!(CopulaModel::gaussian(1.0).is_err());
        assert!(CopulaModel::student_t(0.5, 0.0).is_err());
        assert!(CopulaModel::gumbel(0.5).is_err());
        assert!(CopulaModel::clayton(0.0).is_err());
    }

    #[test]
    fn boundary_conditions_exact() {
        for c in families() {
            assert_eq!(c.copula_cdf(0.0, 0.7).unwrap(), 0.0);
            assert_eq!(c.copula_cdf(1.0, 0.7).unwrap(), 0.7);
            assert_eq!(c.copula_cdf(0.7, 1.0).unwrap(), 0.7);
            assert_eq!(c.copula_cdf(0.7, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn independence_product() {
        let c = CopulaModel::gaussian(0.0).unwrap();
        assert!((c.copula_cdf(0.4, 0.6).unwrap() - 0.24).abs() < 1e-15);
        assert!((c.cond_cdf(0.3, 0.8).unwrap() - 0.3).abs() < 1e-12);
        let g = CopulaModel::gumbel(1.0).unwrap();
        assert!((g.cond_cdf(0.3, 0.8).unwrap() - 0.3).abs() < 1e-12);
        assert!((g.cond_quantile(0.95, 0.5).unwrap() - 0.95).abs() < 1e-12);
        assert!((c.cond_quantile(0.95, 0.5).unwrap() - 0.95).abs() < 1e-12);
    }

    #[test]
    fn gaussian_cond_cdf_median_fixed_point() {
        let c = CopulaModel::gaussian(0.5).unwrap();
        assert!((c.cond_cdf(0.5, 0.5).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gaussian_cond_quantile_closed_form() {
        // v = Phi(rho Phi^{-1}(u) + sqrt(1-rho^2) Phi^{-1}(alpha)),
        // evaluated independently for rho=0.5, alpha=u=0.95
        let c = CopulaModel::gaussian(0.5).unwrap();
        let q = std_normal_quantile(0.95).unwrap();
        let expect = std_normal_cdf(0.5 * q + 0.75f64.sqrt() * q).unwrap();
        assert!((expect - 0.98768).abs() < 5e-5);
        assert!((c.cond_quantile(0.95, 0.95).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn gumbel_cond_quantile_residual() {
        let c = CopulaModel::gumbel(2.0).unwrap();
        let v = c.cond_quantile(0.95, 0.9).unwrap();
        assert!((c.cond_cdf(v, 0.9).unwrap() - 0.95).abs() < 1e-9);
    }

    #[test]
    fn round_trip_all_families() {
        for c in families() {
            for i in 1..20 {
                for j in 1..20 {
                    let alpha = 0.01 + 0.98 * i as f64 / 20.0;
                    let u = 0.01 + 0.98 * j as f64 / 20.0;
                    let v = c.cond_quantile(alpha, u).unwrap();
                    let back = c.cond_cdf(v, u).unwrap();
                    assert!(
                        (back - alpha).abs() < 1e-8,
                        "{c:?} alpha={alpha} u={u} got {back}"
                    );
                }
            }
        }
    }

    #[test]
    fn cond_cdf_monotone_in_v() {
        for c in families() {
            for &u in &[0.1, 0.5, 0.9] {
                let mut prev = -1.0;
                for i in 1..100 {
                    let v = i as f64 / 100.0;
                    let g = c.cond_cdf(v, u).unwrap();
                    assert!((0.0..=1.0).contains(&g));
                    assert!(g >= prev, "{c:?} u={u} v={v}");
                    prev = g;
                }
            }
        }
    }

    #[test]
    fn derivative_consistency() {
        // central finite difference of C(u,v) in u matches g(v,u)
        let h = 1e-6;
        for c in families() {
            for &(u, v) in &[(0.3, 0.6), (0.5, 0.5), (0.8, 0.2), (0.9, 0.9)] {
                let num =
                    (c.copula_cdf(u + h, v).unwrap() - c.copula_cdf(u - h, v).unwrap())
                        / (2.0 * h);
                let ana = c.cond_cdf(v, u).unwrap();
                assert!(
                    (num - ana).abs() < 1e-5,
                    "{c:?} u={u} v={v}: fd {num} vs {ana}"
                );
            }
        }
    }

    #[test]
    fn clayton_closed_form_matches_generic_archimedean() {
        let closed = CopulaModel::clayton(2.0).unwrap();
        let generic = CopulaModel::archimedean(GeneratorSpec::clayton(2.0).unwrap());
        for i in 1..10 {
            for j in 1..10 {
                let alpha = i as f64 / 10.0;
                let u = j as f64 / 10.0;
                let a = closed.cond_quantile(alpha, u).unwrap();
                let b = generic.cond_quantile(alpha, u).unwrap();
                assert!((a - b).abs() < 1e-9, "alpha={alpha} u={u}");
            }
        }
    }

    #[test]
    fn generic_archimedean_without_phi_prime_inv_matches_gumbel() {
        let closed = CopulaModel::gumbel(2.0).unwrap();
        let generic = CopulaModel::archimedean(GeneratorSpec::gumbel(2.0).unwrap());
        for &(alpha, u) in &[(0.95, 0.9), (0.5, 0.3), (0.1, 0.7)] {
            let a = closed.cond_quantile(alpha, u).unwrap();
            let b = generic.cond_quantile(alpha, u).unwrap();
            assert!((a - b).abs() < 1e-7, "alpha={alpha} u={u}: {a} vs {b}");
        }
    }

    #[test]
    fn t_converges_to_gaussian() {
        let t = CopulaModel::student_t(0.5, 1e6).unwrap();
        let g = CopulaModel::gaussian(0.5).unwrap();
        for &(v, u) in &[(0.2, 0.7), (0.5, 0.5), (0.9, 0.95), (0.05, 0.3)] {
            let a = t.cond_cdf(v, u).unwrap();
            let b = g.cond_cdf(v, u).unwrap();
            assert!((a - b).abs() < 1e-3, "v={v} u={u}");
        }
    }

    #[test]
    fn two_increasing_property() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for c in families() {
            for _ in 0..40 {
                let mut pts = [0.0f64; 4];
                for p in pts.iter_mut() {
                    *p = 0.02 + 0.96 * rng.gen::<f64>();
                }
                let (u1, u2) = (pts[0].min(pts[1]), pts[0].max(pts[1]));
                let (v1, v2) = (pts[2].min(pts[3]), pts[2].max(pts[3]));
                let vol = c.copula_cdf(u2, v2).unwrap() - c.copula_cdf(u2, v1).unwrap()
                    - c.copula_cdf(u1, v2).unwrap()
                    + c.copula_cdf(u1, v1).unwrap();
                assert!(vol >= -1e-12, "{c:?} rectangle volume {vol}");
            }
        }
    }

    #[test]
    fn tail_coefficients_reference() {
        let (l, u) = CopulaModel::gaussian(0.8).unwrap().tail_coefficients().unwrap();
        assert_eq!((l, u), (0.0, 0.0));

        let (_, u) = CopulaModel::gumbel(2.0).unwrap().tail_coefficients().unwrap();
        assert!((u - (2.0 - 2f64.sqrt())).abs() < 1e-14);

        let (l, u) = CopulaModel::gumbel(1.0).unwrap().tail_coefficients().unwrap();
        assert!(l == 0.0 && u.abs() < 1e-14);

        let (l, u) = CopulaModel::clayton(2.0).unwrap().tail_coefficients().unwrap();
        assert!((l - 2f64.powf(-0.5)).abs() < 1e-14 && u == 0.0);

        // generic Clayton generator reproduces the closed-form coefficients
        let (l, u) = CopulaModel::archimedean(GeneratorSpec::clayton(2.0).unwrap())
            .tail_coefficients()
            .unwrap();
        assert!((l - 2f64.powf(-0.5)).abs() < 1e-6);
        assert!(u.abs() < 1e-6);
    }

    #[test]
    fn tail_dep_fn_independence_algebra() {
        let c = CopulaModel::gaussian(0.0).unwrap();
        assert!((c.tail_dep_fn(0.9, Side::Upper).unwrap() - 0.1).abs() < 1e-12);
        assert!((c.tail_dep_fn(0.9, Side::Lower).unwrap() - 0.9).abs() < 1e-12);
        assert!(c.tail_dep_fn(0.0, Side::Upper).is_err());
    }

    #[test]
    fn gumbel_finite_level_converges_to_asymptote() {
        let c = CopulaModel::gumbel(2.0).unwrap();
        let finite = c.tail_dep_fn(1.0 - 1e-6, Side::Upper).unwrap();
        assert!((finite - (2.0 - 2f64.sqrt())).abs() < 5e-3);
    }

    #[test]
    fn sampling_range_and_size() {
        let c = CopulaModel::gaussian(0.3).unwrap();
        assert!(c.sample(0, 1).is_err());
        let pts = c.sample(1, 1).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(pts[0].0 > 0.0 && pts[0].0 < 1.0 && pts[0].1 > 0.0 && pts[0].1 < 1.0);
    }

    #[test]
    fn sampling_deterministic_per_seed() {
        let c = CopulaModel::clayton(2.0).unwrap();
        let a = c.sample(100, 9).unwrap();
        let b = c.sample(100, 9).unwrap();
        assert_eq!(a, b);
        let d = c.sample(100, 10).unwrap();
        assert_ne!(a, d);
    }

    fn sample_kendall_tau(pairs: &[(f64, f64)]) -> f64 {
        // O(n^2) brute force on a subsample; oracle use only
        let n = pairs.len();
        let mut conc = 0i64;
        let mut disc = 0i64;
        for i in 0..n {
            for j in (i + 1)..n {
                let s = (pairs[i].0 - pairs[j].0) * (pairs[i].1 - pairs[j].1);
                if s > 0.0 {
                    conc += 1;
                } else if s < 0.0 {
                    disc += 1;
                }
            }
        }
        (conc - disc) as f64 / (0.5 * n as f64 * (n as f64 - 1.0))
    }

    #[test]
    fn sampling_kendall_tau_gaussian() {
        // elliptical identity tau = (2/pi) asin(rho)
        let c = CopulaModel::gaussian(0.5).unwrap();
        let pts = c.sample(20_000, 42).unwrap();
        let tau = sample_kendall_tau(&pts);
        let expect = 2.0 / std::f64::consts::PI * 0.5f64.asin();
        assert!((tau - expect).abs() < 0.02, "tau {tau} vs {expect}");
    }

    #[test]
    fn sampling_kendall_tau_gumbel() {
        // Archimedean identity tau = 1 - 1/theta
        let c = CopulaModel::gumbel(2.0).unwrap();
        let pts = c.sample(20_000, 42).unwrap();
        let tau = sample_kendall_tau(&pts);
        assert!((tau - 0.5).abs() < 0.02, "tau {tau}");
    }

    #[test]
    fn sampling_consistency_with_cdf() {
        for c in [
            CopulaModel::gaussian(0.5).unwrap(),
            CopulaModel::clayton(2.0).unwrap(),
        ] {
            let pts = c.sample(1_000_000, 11).unwrap();
            for &u in &[0.25, 0.5, 0.75] {
                for &v in &[0.25, 0.5, 0.75] {
                    let emp = pts.iter().filter(|p| p.0 <= u && p.1 <= v).count() as f64
                        / pts.len() as f64;
                    let ana = c.copula_cdf(u, v).unwrap();
                    assert!((emp - ana).abs() < 0.003, "{c:?} ({u},{v})");
                }
            }
        }
    }
}
