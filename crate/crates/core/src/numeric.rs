//! Small numeric helpers shared across modules.

/// Empirical quantile with linear interpolation (the R type-7 definition).
///
/// `q` must be in `[0, 1]`; `values` must be nonempty. The input slice is
/// not assumed sorted.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of empty slice");
    assert!((0.0..=1.0).contains(&q), "quantile level out of range");
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite value in quantile input"));
    quantile_sorted(&sorted, q)
}

/// Quantile over an already-sorted slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n as f64 - 1.0) * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Sample mean. Returns 0 for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance (n - 1 denominator).
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n as f64 - 1.0)
}

/// Standard normal CDF, accurate to near machine precision.
///
/// Marsaglia's Taylor expansion `Phi(z) = 1/2 + pdf(z) * (z + z^3/3 +
/// z^5/(3*5) + ...)`: every term has the sign of `z`, so the series sums
/// without cancellation. Beyond |z| = 9 the tail mass is below 1e-18 and
/// the result saturates.
pub fn normal_cdf(z: f64) -> f64 {
    if z <= -9.0 {
        return 0.0;
    }
    if z >= 9.0 {
        return 1.0;
    }
    let mut term = z;
    let mut sum = z;
    let mut n = 0u32;
    while n < 400 {
        n += 1;
        term *= z * z / (2 * n + 1) as f64;
        let prev = sum;
        sum += term;
        if sum == prev {
            break;
        }
    }
    let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    (0.5 + pdf * sum).clamp(0.0, 1.0)
}

/// Derive a labeled sub-seed from a master seed.
///
/// Every source of randomness in the pipeline draws its seed through this
/// function so that parallel execution and re-runs reproduce the serial
/// output exactly. The mix is FNV-1a over the label folded into a
/// SplitMix64 round of the master seed.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = FNV_OFFSET;
    for byte in label.as_bytes() {
        h ^= u64::from(*byte);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h ^= index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut z = master.wrapping_add(h).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_median_of_three() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
    }

    #[test]
    fn quantile_interpolates() {
        // type-7 on [1,2,3,4]: h = 3*0.5 = 1.5 -> 2.5
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        // h = 3*0.8 = 2.4 -> 3 + 0.4*(4-3) = 3.4
        assert!((quantile(&[1.0, 2.0, 3.0, 4.0], 0.8) - 3.4).abs() < 1e-12);
    }

    #[test]
    fn quantile_extremes() {
        let v = [5.0, -1.0, 2.0];
        assert_eq!(quantile(&v, 0.0), -1.0);
        assert_eq!(quantile(&v, 1.0), 5.0);
    }

    #[test]
    fn normal_cdf_reference_values() {
        // reference quantiles to 15 digits
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_cdf(1.0) - 0.841344746068543).abs() < 1e-14);
        assert!((normal_cdf(-1.0) - 0.158655253931457).abs() < 1e-14);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-14);
        assert!((normal_cdf(3.0) - 0.998650101968370).abs() < 1e-14);
        assert!((normal_cdf(-5.0) - 2.866515718791939e-7).abs() < 1e-16);
        assert_eq!(normal_cdf(10.0), 1.0);
        assert_eq!(normal_cdf(-10.0), 0.0);
        // symmetry
        for i in 0..80 {
            let z = i as f64 / 10.0;
            assert!((normal_cdf(z) + normal_cdf(-z) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn derive_seed_is_stable_and_label_sensitive() {
        let a = derive_seed(42, "bootstrap", 0);
        let b = derive_seed(42, "bootstrap", 0);
        assert_eq!(a, b);
        assert_ne!(a, derive_seed(42, "bootstrap", 1));
        assert_ne!(a, derive_seed(42, "perturb", 0));
        assert_ne!(a, derive_seed(43, "bootstrap", 0));
    }
}
