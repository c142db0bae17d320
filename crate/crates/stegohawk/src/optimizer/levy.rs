//! Heavy-tailed Levy-flight steps via Mantegna's algorithm.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

/// One Levy-flight step per coordinate: `u / |v|^(1/beta)` with
/// `u ~ N(0, sigma_u^2)` and `v ~ N(0, 1)`, `sigma_u` from Mantegna's
/// formula for the stability exponent `beta`.
///
/// Panics if `beta` is outside `(1, 2]`.
pub fn levy_step<R: Rng + ?Sized>(dim: usize, beta: f64, rng: &mut R) -> Vec<f64> {
    assert!(
        beta > 1.0 && beta <= 2.0,
        "levy beta {beta} outside (1, 2]"
    );
    let sigma_u = mantegna_sigma(beta);
    let inv_beta = 1.0 / beta;
    (0..dim)
        .map(|_| {
            let u: f64 = rng.sample::<f64, _>(StandardNormal) * sigma_u;
            let mut v: f64 = rng.sample(StandardNormal);
            if v == 0.0 {
                v = f64::MIN_POSITIVE;
            }
            u / v.abs().powf(inv_beta)
        })
        .collect()
}

/// `sigma_u = (G(1+b) sin(pi b/2) / (G((1+b)/2) b 2^((b-1)/2)))^(1/b)`.
fn mantegna_sigma(beta: f64) -> f64 {
    let numerator = gamma(1.0 + beta) * (PI * beta / 2.0).sin();
    let denominator = gamma((1.0 + beta) / 2.0) * beta * 2f64.powf((beta - 1.0) / 2.0);
    (numerator / denominator).powf(1.0 / beta)
}

/// Lanczos approximation of the gamma function (g = 7, 9 coefficients),
/// good to roughly 1e-13 over the small positive range needed here.
fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEFFICIENTS: [f64; 9] = [
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
        // Reflection formula keeps the approximation on x >= 0.5.
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = COEFFICIENTS[0];
    for (i, &c) in COEFFICIENTS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}
