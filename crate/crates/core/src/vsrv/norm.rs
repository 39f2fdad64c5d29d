use crate::error::{Error, Result};

/// `log max_i |x_i|^{alpha_i}`; `-inf` at the origin.
#[inline]
pub fn log_vs_norm(x: &[f64], alpha: &[f64]) -> f64 {
    x.iter()
        .zip(alpha)
        .map(|(v, a)| a * v.abs().ln())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// The vector-scaling radius `max_i |x_i|^{alpha_i}`.
///
/// Not a norm, but `vs_norm(lambda^{1/alpha} x) = lambda vs_norm(x)`.
/// Falls back to the log-space value when a power overflows.
pub fn vs_norm(x: &[f64], alpha: &[f64]) -> f64 {
    let r = x.iter().zip(alpha).map(|(v, a)| v.abs().powf(*a)).fold(0.0, f64::max);
    if r.is_finite() && r > f64::MIN_POSITIVE {
        r
    } else {
        log_vs_norm(x, alpha).exp()
    }
}

/// `(||x||^{-1/alpha_i} x_i)_i`, which lies on the max-norm unit sphere.
pub fn spectral_component(x: &[f64], alpha: &[f64]) -> Result<Vec<f64>> {
    let l = log_vs_norm(x, alpha);
    if l == f64::NEG_INFINITY {
        return Err(Error::ZeroVector);
    }
    Ok(scale_by_radius(x, alpha, vs_norm(x, alpha), l))
}

/// Scales `y` by `r^{-1/alpha_i}` coordinate-wise, where `l = log r`; the
/// log-space route is used when `r` is not representable.
pub fn scale_by_radius(y: &[f64], alpha: &[f64], r: f64, l: f64) -> Vec<f64> {
    let direct = r.is_finite() && r > f64::MIN_POSITIVE;
    y.iter()
        .zip(alpha)
        .map(|(v, a)| {
            if *v == 0.0 {
                0.0
            } else if direct {
                v * r.powf(-1.0 / a)
            } else {
                v.signum() * (v.abs().ln() - l / a).exp()
            }
        })
        .collect()
}

/// Spectral component with the maximizing coordinate pinned to exactly `±1`.
pub(crate) fn spectral_exact(x: &[f64], alpha: &[f64], l: f64) -> Vec<f64> {
    let mut s = scale_by_radius(x, alpha, vs_norm(x, alpha), l);
    let arg = x
        .iter()
        .zip(alpha)
        .map(|(v, a)| a * v.abs().ln())
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |best, (i, v)| if v > best.1 { (i, v) } else { best },
        )
        .0;
    s[arg] = x[arg].signum();
    for v in s.iter_mut() {
        *v = v.clamp(-1.0, 1.0);
    }
    s
}

pub fn max_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(vs_norm(&[0.0, 0.0], &[2.0, 4.0]), 0.0);
        assert!((vs_norm(&[2.0, 0.0], &[2.0, 4.0]) - 4.0).abs() < 1e-14);
        assert_eq!(spectral_component(&[3.0, 0.0], &[2.0, 4.0]).unwrap(), vec![1.0, 0.0]);
        let s = spectral_component(&[2.0, 2.0], &[2.0, 2.0]).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-15 && (s[1] - 1.0).abs() < 1e-15);
        let s = spectral_component(&[4.0, 2.0], &[1.0, 2.0]).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-15 && (s[1] - 1.0).abs() < 1e-15);
        assert!(matches!(
            spectral_component(&[0.0, 0.0], &[1.0, 1.0]),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn homogeneity_example() {
        let x = [0.3, -1.7];
        let a = [2.0, 4.0];
        let lam: f64 = 7.3;
        let y: Vec<f64> = x.iter().zip(&a).map(|(v, a)| lam.powf(1.0 / a) * v).collect();
        assert!((vs_norm(&y, &a) / vs_norm(&x, &a) - lam).abs() < 1e-12 * lam);
    }

    #[test]
    fn pinned_spectral_has_unit_max() {
        let s = spectral_exact(&[-5.0, 2.0], &[1.5, 3.0], log_vs_norm(&[-5.0, 2.0], &[1.5, 3.0]));
        assert_eq!(max_norm(&s), 1.0);
    }
}
