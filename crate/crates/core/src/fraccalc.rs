//! Fractional-calculus primitives: Gamma, Grünwald–Letnikov weights, the
//! discrete Caputo derivative of sampled signals, and the Mittag-Leffler
//! series used as a closed-form oracle for the solver.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{dot, Real};

/// Commensurate fractional order `0 < alpha < 1`.
///
/// `alpha = 1` can only be built through [`FracOrder::unit`]; it exists so the
/// solver can be cross-checked against integer-order dynamics.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FracOrder<T = f64>(T);

impl<T: Real> FracOrder<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if alpha > T::zero() && alpha < T::one() {
            Ok(FracOrder(alpha))
        } else {
            Err(Error::domain(
                "FracOrder",
                format!("order must lie in (0, 1), got {alpha}"),
            ))
        }
    }

    /// Integer order one, for validating the scheme against explicit Euler.
    pub fn unit() -> Self {
        FracOrder(T::one())
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }

    pub fn is_unit(self) -> bool {
        self.0 == T::one()
    }
}

impl TryFrom<f64> for FracOrder<f64> {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        if alpha == 1.0 {
            Ok(FracOrder::unit())
        } else {
            FracOrder::new(alpha)
        }
    }
}

impl Serialize for FracOrder<f64> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for FracOrder<f64> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let alpha = f64::deserialize(d)?;
        FracOrder::try_from(alpha).map_err(serde::de::Error::custom)
    }
}

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_series<T: Real>(xm1: T) -> T {
    let mut a = T::lit(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += T::lit(c) / (xm1 + T::from_usize_lossy(i));
    }
    a
}

/// Euler's Gamma function for positive arguments.
pub fn gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::domain("gamma", format!("argument must be positive, got {x}")));
    }
    Ok(gamma_pos(x))
}

fn gamma_pos<T: Real>(x: T) -> T {
    // Small integers: exact factorial (22! is the last one exact in f64).
    if x.fract() == T::zero() && x <= T::lit(23.0) {
        let mut acc = T::one();
        let mut k = T::lit(2.0);
        while k < x {
            acc *= k;
            k += T::one();
        }
        return acc;
    }
    let half = T::lit(0.5);
    if x < half {
        // Γ(x) = Γ(x + 1) / x keeps the Lanczos sum in its accurate range.
        return gamma_pos(x + T::one()) / x;
    }
    let xm1 = x - T::one();
    let t = xm1 + T::lit(LANCZOS_G) + half;
    let sqrt_two_pi = (T::TAU()).sqrt();
    sqrt_two_pi * t.powf(xm1 + half) * (-t).exp() * lanczos_series(xm1)
}

/// Natural log of Γ(x) for positive arguments; finite far beyond where Γ overflows.
pub fn ln_gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::domain(
            "ln_gamma",
            format!("argument must be positive, got {x}"),
        ));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        return ln_gamma_pos(x + T::one()) - x.ln();
    }
    let xm1 = x - T::one();
    let t = xm1 + T::lit(LANCZOS_G) + half;
    half * T::TAU().ln() + (xm1 + half) * t.ln() - t + lanczos_series(xm1).ln()
}

/// Signed binomial weights `w_j = (-1)^j C(alpha, j)`, `j = 0..=k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlWeightTable<T = f64> {
    alpha: FracOrder<T>,
    weights: Vec<T>,
}

impl<T: Real> GlWeightTable<T> {
    pub fn alpha(&self) -> FracOrder<T> {
        self.alpha
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Running sums `Σ_{j<=k} w_j`.
    pub fn partial_sums(&self) -> Vec<T> {
        self.weights
            .iter()
            .scan(T::zero(), |acc, &w| {
                *acc += w;
                Some(*acc)
            })
            .collect()
    }

    /// Weights stored back to front (`w_k, ..., w_1, w_0`), so a history
    /// window dotted against `[k - m, k)` lines up with `w_m..w_1`.
    pub(crate) fn reversed(&self) -> Vec<T> {
        self.weights.iter().rev().copied().collect()
    }
}

/// Grünwald–Letnikov weights via `w_j = w_{j-1} (1 - (alpha + 1) / j)`.
pub fn gl_weights<T: Real>(alpha: FracOrder<T>, k: usize) -> GlWeightTable<T> {
    let a1 = alpha.value() + T::one();
    let mut weights = Vec::with_capacity(k + 1);
    weights.push(T::one());
    for j in 1..=k {
        let prev = weights[j - 1];
        weights.push(prev * (T::one() - a1 / T::from_usize_lossy(j)));
    }
    GlWeightTable { alpha, weights }
}

/// Discrete Caputo derivative of uniformly sampled data.
///
/// `out[k] = h^-alpha Σ_{j=0..k} w_j (samples[k-j] - samples[0])`, so a
/// constant signal maps to zero and `out[0] = 0`.
pub fn gl_derivative<T: Real>(samples: &[T], alpha: FracOrder<T>, h: T) -> Result<Vec<T>> {
    if !(h > T::zero()) {
        return Err(Error::domain("gl_derivative", format!("step must be positive, got {h}")));
    }
    if samples.is_empty() {
        return Err(Error::domain("gl_derivative", "empty sample sequence"));
    }
    let n = samples.len();
    let table = gl_weights(alpha, n - 1);
    let rev = table.reversed();
    let base = samples[0];
    let shifted: Vec<T> = samples.iter().map(|&s| s - base).collect();
    let scale = h.powf(-alpha.value());
    let out = (0..n)
        .map(|k| {
            // Σ_{j=0..k} w_j z[k-j] = z[0..=k] · (w_k..w_0)
            scale * dot(&shifted[..=k], &rev[n - 1 - k..])
        })
        .collect();
    Ok(out)
}

/// Maximum number of series terms for [`mittag_leffler`].
pub const ML_MAX_TERMS: usize = 500;

/// One-parameter Mittag-Leffler function `E_alpha(z) = Σ z^k / Γ(alpha k + 1)`.
///
/// Plain truncated series, intended for `|z| <= 30`. Terms are formed in log
/// space so `Γ(alpha k + 1)` never overflows.
pub fn mittag_leffler<T: Real>(alpha: FracOrder<T>, z: T) -> Result<T> {
    if !z.is_finite() {
        return Err(Error::domain("mittag_leffler", format!("non-finite argument {z}")));
    }
    if z.abs() > T::lit(30.0) {
        return Err(Error::domain(
            "mittag_leffler",
            format!("|z| = {} outside the series regime |z| <= 30", z.abs()),
        ));
    }
    if z == T::zero() {
        return Ok(T::one());
    }
    let a = alpha.value();
    let ln_abs_z = z.abs().ln();
    let negative = z < T::zero();
    let tol = T::lit(1e-15);
    let mut sum = T::one();
    for k in 1..ML_MAX_TERMS {
        let kk = T::from_usize_lossy(k);
        let mag = (kk * ln_abs_z - ln_gamma_pos(a * kk + T::one())).exp();
        let term = if negative && k % 2 == 1 { -mag } else { mag };
        sum += term;
        if term.abs() < tol * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        terms: ML_MAX_TERMS,
        z: z.to_f64_lossy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn order_bounds() {
        assert!(FracOrder::new(0.0_f64).is_err());
        assert!(FracOrder::new(1.0_f64).is_err());
        assert!(FracOrder::new(-0.2_f64).is_err());
        assert!(FracOrder::new(f64::NAN).is_err());
        assert!(FracOrder::new(0.97_f64).is_ok());
        assert!(FracOrder::<f64>::unit().is_unit());
        let parsed: FracOrder = serde_json::from_str("0.9").unwrap();
        assert_eq!(parsed.value(), 0.9);
        assert!(serde_json::from_str::<FracOrder>("1.5").is_err());
    }

    #[test]
    fn gamma_trivial_points() {
        assert_eq!(gamma(1.0_f64).unwrap(), 1.0);
        assert_eq!(gamma(2.0_f64).unwrap(), 1.0);
        assert_eq!(gamma(5.0_f64).unwrap(), 24.0);
        assert_eq!(gamma(21.0_f64).unwrap(), 2432902008176640000.0);
        // No seam between the factorial and Lanczos branches.
        assert!(rel(gamma(2.0_f64 + 1e-12).unwrap(), 1.0) < 1e-11);
        assert!(rel(gamma(23.5_f64).unwrap() / gamma(22.5_f64).unwrap(), 22.5) < 1e-13);
        assert!(rel(gamma(0.5_f64).unwrap(), std::f64::consts::PI.sqrt()) < 1e-14);
    }

    #[test]
    fn gamma_against_high_precision_values() {
        // 50-digit reference values.
        let refs = [
            (0.03, 32.784_998_351_794_135_982),
            (0.1, 9.513_507_698_668_731_836_3),
            (1.5, 0.886_226_925_452_758_013_65),
            (1.97, 0.987_684_983_823_991_570_31),
            (2.9, 1.827_355_080_624_036_096_9),
            (10.3, 716_430.689_062_375_244_55),
            (25.5, 3.086_770_540_528_696_782_8e24),
            (49.9, 4.118_011_034_253_058_041_9e62),
            (50.0, 6.082_818_640_342_675_608_7e62),
        ];
        for (x, g) in refs {
            let got = gamma(x).unwrap();
            assert!(rel(got, g) <= 1e-12, "gamma({x}) = {got}, want {g}");
            assert!((ln_gamma(x).unwrap() - g.ln()).abs() < 1e-12 * g.ln().abs().max(1.0));
        }
    }

    #[test]
    fn gamma_rejects_non_positive() {
        assert!(gamma(0.0_f64).is_err());
        assert!(gamma(-1.5_f64).is_err());
        assert!(ln_gamma(0.0_f64).is_err());
    }

    #[test]
    fn small_weight_tables() {
        let half = FracOrder::new(0.5_f64).unwrap();
        assert_eq!(gl_weights(half, 2).weights(), &[1.0, -0.5, -0.125]);
        assert_eq!(gl_weights(half, 0).weights(), &[1.0]);
        let unit = gl_weights(FracOrder::<f64>::unit(), 5);
        assert_eq!(unit.weights(), &[1.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn weights_negative_and_partial_sums_decrease() {
        let table = gl_weights(FracOrder::new(0.97_f64).unwrap(), 1000);
        assert!(table.weights()[1..].iter().all(|&w| w < 0.0));
        let sums = table.partial_sums();
        assert!(sums.windows(2).all(|p| p[1] < p[0]));
        let last = *sums.last().unwrap();
        assert!(last > 0.0 && last < 1.0);
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let d = gl_derivative(&[3.5_f64; 50], FracOrder::new(0.7).unwrap(), 0.01).unwrap();
        assert!(d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn derivative_rejects_bad_input() {
        let a = FracOrder::new(0.5_f64).unwrap();
        assert!(gl_derivative(&[1.0, 2.0], a, 0.0).is_err());
        assert!(gl_derivative::<f64>(&[], a, 0.1).is_err());
    }

    #[test]
    fn derivative_of_ramp_half_order() {
        let h = 1e-3;
        let a = FracOrder::new(0.5_f64).unwrap();
        let ts: Vec<f64> = (0..=1000).map(|k| k as f64 * h).collect();
        let d = gl_derivative(&ts, a, h).unwrap();
        let coef = 1.0 / gamma(1.5).unwrap();
        let worst = ts
            .iter()
            .zip(&d)
            .filter(|(t, _)| **t >= 0.1)
            .map(|(t, v)| (v - coef * t.sqrt()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 5e-3, "max error {worst}");
    }

    #[test]
    fn unit_order_is_backward_difference() {
        let h = 1e-3;
        let ts: Vec<f64> = (0..=1000).map(|k| k as f64 * h).collect();
        let sq: Vec<f64> = ts.iter().map(|t| t * t).collect();
        let d = gl_derivative(&sq, FracOrder::unit(), h).unwrap();
        for k in 100..=1000 {
            assert!((d[k] - 2.0 * ts[k]).abs() < 1e-2);
        }
    }

    #[test]
    fn mittag_leffler_special_values() {
        let one = FracOrder::<f64>::unit();
        assert!(rel(mittag_leffler(one, 1.0).unwrap(), std::f64::consts::E) < 1e-14);
        assert_eq!(mittag_leffler(FracOrder::new(0.3).unwrap(), 0.0).unwrap(), 1.0);
        // 50-digit summation of the first 500 terms.
        let v: f64 = mittag_leffler(FracOrder::new(0.9).unwrap(), -1.0).unwrap();
        assert!((v - 0.376_066_021_424_641_881_18).abs() < 1e-10);
        // E_{1/2}(-2) = e^4 erfc(2)
        let v: f64 = mittag_leffler(FracOrder::new(0.5).unwrap(), -2.0).unwrap();
        assert!((v - 0.255_395_676_310_505_743_87).abs() < 1e-10);
        let v = mittag_leffler(FracOrder::new(0.9).unwrap(), 2.5).unwrap();
        assert!(rel(v, 17.668_515_949_653_906_09) < 1e-12);
    }

    #[test]
    fn mittag_leffler_errors() {
        let a = FracOrder::new(0.5_f64).unwrap();
        assert!(mittag_leffler(a, 31.0).is_err());
        assert!(matches!(
            mittag_leffler(FracOrder::new(0.2_f64).unwrap(), 30.0),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn works_in_single_precision() {
        let g = gamma(4.0_f32).unwrap();
        assert!((g - 6.0).abs() < 1e-4);
        let w = gl_weights(FracOrder::new(0.5_f32).unwrap(), 2);
        assert_eq!(w.weights(), &[1.0, -0.5, -0.125]);
    }
}
