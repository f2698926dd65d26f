//! Small polynomial utilities: root finding for stationarity checks and
//! coefficient convolution.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// All complex roots of `c[0] + c[1] z + ... + c[d] z^d` (Durand-Kerner).
///
/// Degree is capped at 64; plenty for the model orders handled here.
pub fn roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    // Strip trailing zeros.
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.last().is_some_and(|v| *v == 0.0) {
        c.pop();
    }
    if c.len() <= 1 {
        return Ok(Vec::new());
    }
    if c.len() > 65 {
        return Err(Error::InvalidArgument("polynomial degree above 64".into()));
    }
    let d = c.len() - 1;
    let lead = c[d];
    let monic: Vec<Complex64> = c.iter().map(|v| Complex64::new(v / lead, 0.0)).collect();

    // Initial guesses spread on a circle whose radius bounds the roots.
    let radius = 1.0
        + c[..d]
            .iter()
            .map(|v| (v / lead).abs())
            .fold(0.0_f64, f64::max);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / d as f64 + 0.35;
            Complex64::from_polar(radius.min(2.0 + 0.1 * k as f64), angle)
        })
        .collect();

    let eval = |x: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &co in monic.iter().rev() {
            acc = acc * x + co;
        }
        acc
    };

    for _ in 0..500 {
        let mut max_step = 0.0_f64;
        for i in 0..d {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..d {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() < 1e-300 {
                denom = Complex64::new(1e-300, 0.0);
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-13 {
            return Ok(z);
        }
    }
    Err(Error::Numeric("polynomial root iteration did not converge".into()))
}

/// Smallest root modulus of `1 + sum_k c[k] z^{k+1}`.
///
/// This is the characteristic polynomial form shared by the AR side
/// (c = -phi) and the MA side (c = theta). Returns +inf when c is empty.
pub fn min_root_modulus_char(c: &[f64]) -> Result<f64> {
    if c.is_empty() {
        return Ok(f64::INFINITY);
    }
    let mut coeffs = Vec::with_capacity(c.len() + 1);
    coeffs.push(1.0);
    coeffs.extend_from_slice(c);
    let r = roots(&coeffs)?;
    Ok(r.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min))
}

/// Convolution of two coefficient sequences.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}
