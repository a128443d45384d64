use std::f64::consts::PI;

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > sum * 1e-17 {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// Symmetric Kaiser window of length `n`.
pub fn kaiser(n: usize, beta: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let denom = bessel_i0(beta);
    let m = (n - 1) as f64;
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let r = 2.0 * i as f64 / m - 1.0;
        let v = bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / denom;
        w[i] = v;
        w[n - 1 - i] = v;
    }
    w
}

/// Flat window whose outer `fraction` of samples on each side follows a
/// raised-cosine ramp.
pub fn raised_cosine_taper(n: usize, fraction: f64) -> Vec<f64> {
    let t = ((n as f64 * fraction).round() as usize).min(n / 2);
    let mut w = vec![1.0; n];
    for i in 0..t {
        let v = 0.5 * (1.0 - (PI * i as f64 / t as f64).cos());
        w[i] = v;
        w[n - 1 - i] = v;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn i0_reference_values() {
        assert_eq!(bessel_i0(0.0), 1.0);
        assert_relative_eq!(
            bessel_i0(1.0),
            1.266_065_877_752_008_4,
            max_relative = 1e-15
        );
        assert_relative_eq!(bessel_i0(10.0), 2_815.716_628_466_254, max_relative = 1e-13);
    }

    #[test]
    fn kaiser_shape() {
        let w = kaiser(513, 10.0);
        assert_eq!(w[256], 1.0);
        assert!((0..513).all(|i| w[i] == w[512 - i]));
        assert_relative_eq!(w[0], 1.0 / bessel_i0(10.0), max_relative = 1e-12);
        assert_eq!(kaiser(1, 5.0), vec![1.0]);
    }

    #[test]
    fn taper_shape() {
        let w = raised_cosine_taper(513, 0.125);
        assert_eq!(w[0], 0.0);
        assert_eq!(w[256], 1.0);
        assert!((0..513).all(|i| w[i] == w[512 - i]));
    }
}
