//! Regularized incomplete beta function and the realisation count of an
//! accepted batch.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

const CF_EPS: f64 = 1e-14;
const CF_MAX_ITER: usize = 300;
const TINY: f64 = 1e-300;
/// Up to this many trials binomial tails are summed term by term.
const DIRECT_SUM_MAX_TRIALS: u64 = 64;

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) || !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!(
            "incomplete beta outside domain: a={a}, b={b}, x={x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let front = (a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b)).exp();
    // The fraction converges fast below the mean; use the mirror image above it.
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok((front * beta_fraction(a, b, x) / a).clamp(0.0, 1.0))
    } else {
        Ok((1.0 - front * beta_fraction(b, a, 1.0 - x) / b).clamp(0.0, 1.0))
    }
}

/// Continued fraction of the incomplete beta, modified Lentz.
fn beta_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

fn direct_binomial_tail(n: u64, trials: u64, p: f64) -> f64 {
    let q = 1.0 - p;
    let mut coeff = 1.0f64;
    let mut sum = 0.0;
    for i in 0..=trials {
        if i > 0 {
            coeff = coeff * (trials - i + 1) as f64 / i as f64;
        }
        if i >= n {
            sum += coeff * p.powi(i as i32) * q.powi((trials - i) as i32);
        }
    }
    sum.clamp(0.0, 1.0)
}

/// `P(X >= n)` for `X ~ Binomial(trials, p)`, i.e. `I_p(n, trials - n + 1)`.
pub fn binomial_survival(n: u64, trials: u64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    if n == 0 {
        return Ok(1.0);
    }
    if n > trials {
        return Ok(0.0);
    }
    if trials <= DIRECT_SUM_MAX_TRIALS {
        return Ok(direct_binomial_tail(n, trials, p));
    }
    reg_inc_beta(n as f64, (trials - n + 1) as f64, p)
}

/// Largest `m` in `lo..=hi` with `pred(m)`, for a predicate that holds on a
/// prefix of the range and at `lo`.
fn last_true(lo: u64, hi: u64, mut pred: impl FnMut(u64) -> Result<bool>) -> Result<u64> {
    let (mut lo, mut hi) = (lo, hi);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if pred(mid)? {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

/// Realisation count for an accepted batch from the acceptance uniform `x`:
/// `1 + max{m in 0..k : S(m) >= x}` with `S(m) = I_p(m, k - m)`, the tail of
/// `Binomial(k - 1, p)` at `m`.
pub fn inv_draw_realisations(k: u64, p: f64, x: f64) -> Result<u64> {
    if k == 0 {
        return Err(Error::InvalidArgument("reservoir size must be positive".into()));
    }
    if !(p > 0.0 && p <= 1.0) || !(0.0..p).contains(&x) {
        return Err(Error::InvalidArgument(format!(
            "realisation count needs 0 <= x < p <= 1, got x={x}, p={p}"
        )));
    }
    if k == 1 {
        return Ok(1);
    }
    let m = last_true(0, k - 1, |m| Ok(binomial_survival(m, k - 1, p)? >= x))?;
    Ok((1 + m).clamp(1, k))
}

/// How the number of replaced slots is derived once a batch arrives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RealisationMode {
    /// `n_r = max{m : P(Bin(k, p) >= m) > x}`; the batch is accepted iff
    /// `n_r >= 1`. Every slot is then replaced with probability exactly `p`.
    #[default]
    Binomial,
    /// Accept iff `p > x`, then [`inv_draw_realisations`] with the same `x`.
    Survival,
    /// Accept iff `p > x`, then `n_r ~ Bin(k, p)` conditioned on `n_r >= 1`
    /// from a fresh uniform.
    Conditioned,
}

impl RealisationMode {
    pub const ALL: [RealisationMode; 3] = [
        RealisationMode::Binomial,
        RealisationMode::Survival,
        RealisationMode::Conditioned,
    ];

    /// Slots to replace given acceptance probability `p` and the acceptance
    /// uniform `x`; zero means the batch is rejected. Only `Conditioned`
    /// draws from `rng`, and only after acceptance.
    pub fn realisations<R: Rng + ?Sized>(
        self,
        k: u64,
        p: f64,
        x: f64,
        rng: &mut R,
    ) -> Result<u64> {
        match self {
            RealisationMode::Binomial => {
                last_true(0, k, |m| Ok(binomial_survival(m, k, p)? > x))
            }
            RealisationMode::Survival => {
                if p > x {
                    inv_draw_realisations(k, p, x)
                } else {
                    Ok(0)
                }
            }
            RealisationMode::Conditioned => {
                if p > x {
                    let u: f64 = rng.random();
                    let at_least_one = binomial_survival(1, k, p)?;
                    last_true(1, k, |m| Ok(binomial_survival(m, k, p)? > u * at_least_one))
                } else {
                    Ok(0)
                }
            }
        }
    }
}

impl fmt::Display for RealisationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RealisationMode::Binomial => "binomial",
            RealisationMode::Survival => "survival",
            RealisationMode::Conditioned => "conditioned",
        })
    }
}

impl FromStr for RealisationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binomial" => Ok(RealisationMode::Binomial),
            "survival" => Ok(RealisationMode::Survival),
            "conditioned" => Ok(RealisationMode::Conditioned),
            _ => Err(Error::Config(format!(
                "unknown realisation mode `{s}` (binomial, survival, conditioned)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    #[test]
    fn closed_forms() {
        assert!((reg_inc_beta(1.0, 1.0, 0.5).unwrap() - 0.5).abs() < 1e-12);
        assert!((reg_inc_beta(1.0, 3.0, 0.5).unwrap() - 0.875).abs() < 1e-12);
        assert!((reg_inc_beta(2.0, 2.0, 0.5).unwrap() - 0.5).abs() < 1e-12);
        // I_x(a, 1) = x^a
        assert!((reg_inc_beta(3.5, 1.0, 0.3).unwrap() - 0.3f64.powf(3.5)).abs() < 1e-12);
        assert_eq!(reg_inc_beta(2.0, 5.0, 0.0).unwrap(), 0.0);
        assert_eq!(reg_inc_beta(2.0, 5.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn domain_errors() {
        assert!(reg_inc_beta(0.0, 1.0, 0.5).is_err());
        assert!(reg_inc_beta(1.0, -1.0, 0.5).is_err());
        assert!(reg_inc_beta(1.0, 1.0, 1.5).is_err());
        assert!(binomial_survival(1, 3, 1.2).is_err());
    }

    #[test]
    fn ln_gamma_factorials() {
        let mut fact = 1.0f64;
        for n in 1..30 {
            assert!((ln_gamma(n as f64) - fact.ln()).abs() < 1e-12, "n={n}");
            fact *= n as f64;
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn survival_values() {
        assert_eq!(binomial_survival(0, 7, 0.3).unwrap(), 1.0);
        assert!((binomial_survival(1, 3, 0.5).unwrap() - 0.875).abs() < 1e-15);
        assert!((binomial_survival(2, 2, 0.3).unwrap() - 0.09).abs() < 1e-15);
        assert_eq!(binomial_survival(4, 3, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn survival_beyond_direct_range_uses_beta() {
        // Bin(100, 0.5) is symmetric: P(X >= 51) = (1 - P(X = 50)) / 2.
        let p50 = (ln_gamma(101.0) - 2.0 * ln_gamma(51.0) - 100.0 * 2f64.ln()).exp();
        let tail = binomial_survival(51, 100, 0.5).unwrap();
        assert!((tail - (1.0 - p50) / 2.0).abs() < 1e-11);
    }

    #[test]
    fn realisation_examples() {
        for (p, x) in [(0.3, 0.1), (1.0, 0.99), (0.5, 0.0)] {
            assert_eq!(inv_draw_realisations(1, p, x).unwrap(), 1);
        }
        for x in [0.0, 0.3, 0.999] {
            assert_eq!(inv_draw_realisations(5, 1.0, x).unwrap(), 5);
        }
        assert_eq!(inv_draw_realisations(2, 0.6, 0.5).unwrap(), 2);
        assert!(inv_draw_realisations(3, 0.4, 0.5).is_err());
    }

    #[test]
    fn modes_fill_on_certain_acceptance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for mode in RealisationMode::ALL {
            for x in [0.0, 0.5, 0.999_999] {
                assert_eq!(mode.realisations(9, 1.0, x, &mut rng).unwrap(), 9, "{mode}");
            }
            assert_eq!(mode.realisations(4, 0.2, 0.9, &mut rng).unwrap(), 0, "{mode}");
        }
    }

    #[test]
    fn binomial_mode_is_the_inverse_cdf() {
        // Over a uniform grid of x the count follows Bin(k, p) exactly.
        let (k, p) = (6u64, 0.35);
        let grid = 200_000;
        let mut hist = [0usize; 7];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for i in 0..grid {
            let x = (i as f64 + 0.5) / grid as f64;
            let n = RealisationMode::Binomial.realisations(k, p, x, &mut rng).unwrap();
            hist[n as usize] += 1;
        }
        for (m, &h) in hist.iter().enumerate() {
            let c = (1..=m as u64).fold(1.0, |acc, i| acc * (k - i + 1) as f64 / i as f64);
            let pm = c * p.powi(m as i32) * (1.0 - p).powi((k - m as u64) as i32);
            assert!((h as f64 / grid as f64 - pm).abs() < 1e-4, "m={m}");
        }
    }

    proptest! {
        #[test]
        fn mirror_identity(a in 0.1f64..60.0, b in 0.1f64..60.0, x in 0.0f64..=1.0) {
            let lhs = reg_inc_beta(a, b, x).unwrap() + reg_inc_beta(b, a, 1.0 - x).unwrap();
            prop_assert!((lhs - 1.0).abs() < 1e-12);
        }

        #[test]
        fn monotone_in_x(a in 0.1f64..40.0, b in 0.1f64..40.0, x in 0.0f64..1.0, dx in 0.0f64..0.5) {
            let x2 = (x + dx).min(1.0);
            prop_assert!(reg_inc_beta(a, b, x).unwrap() <= reg_inc_beta(a, b, x2).unwrap() + 1e-15);
        }

        #[test]
        fn smaller_x_never_gives_fewer(k in 1u64..80, p in 0.01f64..=1.0, f1 in 0.0f64..1.0, f2 in 0.0f64..1.0) {
            let (lo, hi) = if f1 < f2 { (f1, f2) } else { (f2, f1) };
            let a = inv_draw_realisations(k, p, lo * p).unwrap();
            let b = inv_draw_realisations(k, p, hi * p).unwrap();
            prop_assert!(a >= b);
            prop_assert!((1..=k).contains(&a));
        }
    }
}
