//! Strict sign-change counting for sampled functions of x, with the
//! conventions z = 0 for sign-definite functions and z = -1 for the function
//! that vanishes identically.

/// Relative tolerance below which a sample is treated as zero, scaled by
/// max|w| before counting.
pub const TOL_ZERO_REL: f64 = 1e-7;

/// Count strict sign changes, ignoring samples with |w| < tol. A run of
/// sub-threshold samples between opposite strict signs counts as one change.
pub fn sign_changes(w: &[f64], tol: f64) -> usize {
    let mut count = 0;
    let mut last = 0i8;
    for &v in w {
        let s = if v > tol {
            1i8
        } else if v < -tol {
            -1i8
        } else {
            0i8
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Zero number of a sampled function: -1 if it vanishes identically, else the
/// number of strict sign changes with tolerance TOL_ZERO_REL * max|w|.
pub fn zero_number(w: &[f64]) -> i64 {
    let max = w.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    if max == 0.0 {
        return -1;
    }
    sign_changes(w, TOL_ZERO_REL * max) as i64
}

/// Fraction of samples below the counting tolerance (duplicate-root guard).
pub fn fraction_below_tol(w: &[f64]) -> f64 {
    let max = w.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    if max == 0.0 {
        return 1.0;
    }
    let tol = TOL_ZERO_REL * max;
    w.iter().filter(|v| v.abs() < tol).count() as f64 / w.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_difference_has_no_sign_change() {
        let w = vec![0.7; 100];
        assert_eq!(zero_number(&w), 0);
    }

    #[test]
    fn identically_zero_uses_the_sentinel() {
        let w = vec![0.0; 100];
        assert_eq!(zero_number(&w), -1);
    }

    #[test]
    fn cosine_has_one_sign_change_on_half_period() {
        let w: Vec<f64> =
            (0..2049).map(|i| (std::f64::consts::PI * i as f64 / 2048.0).cos()).collect();
        assert_eq!(zero_number(&w), 1);
    }

    #[test]
    fn subthreshold_run_between_opposite_signs_counts_once() {
        let w = vec![1.0, 1.0, 1e-12, 1e-13, -1e-12, -1.0, -1.0];
        assert_eq!(sign_changes(&w, 1e-9), 1);
    }

    #[test]
    fn subthreshold_run_between_same_signs_counts_zero() {
        let w = vec![1.0, 1e-12, 1.0];
        assert_eq!(sign_changes(&w, 1e-9), 0);
    }

    #[test]
    fn touching_zero_without_crossing_is_not_a_change() {
        let w: Vec<f64> = (0..101).map(|i| {
            let x = -1.0 + i as f64 / 50.0;
            x * x
        }).collect();
        assert_eq!(zero_number(&w), 0);
    }
}
