//! Small fixed-size ODE stepping kernels: one embedded Dormand-Prince 5(4)
//! step (adaptive driver lives with its callers) and a classical RK4 step
//! used as a fixed-step cross-check.

/// Butcher tableau of the Dormand-Prince 5(4) pair.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

fn axpy<const N: usize>(y: &[f64; N], coeffs: &[f64], ks: &[[f64; N]], h: f64) -> [f64; N] {
    let mut out = *y;
    for (c, k) in coeffs.iter().zip(ks) {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// One Dormand-Prince 5(4) step. Returns the 5th-order solution and the
/// embedded error estimate (5th minus 4th order solution).
pub fn dp45_step<const N: usize, F>(f: &F, x: f64, y: &[f64; N], h: f64) -> ([f64; N], [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(x, y);
    let k2 = f(x + C[0] * h, &axpy(y, &A2, &[k1], h));
    let k3 = f(x + C[1] * h, &axpy(y, &A3, &[k1, k2], h));
    let k4 = f(x + C[2] * h, &axpy(y, &A4, &[k1, k2, k3], h));
    let k5 = f(x + C[3] * h, &axpy(y, &A5, &[k1, k2, k3, k4], h));
    let k6 = f(x + C[4] * h, &axpy(y, &A6, &[k1, k2, k3, k4, k5], h));
    let y5 = axpy(y, &B5, &[k1, k2, k3, k4, k5, k6], h);
    let k7 = f(x + h, &y5);
    let y4 = axpy(y, &B4, &[k1, k2, k3, k4, k5, k6, k7], h);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = y5[i] - y4[i];
    }
    (y5, err)
}

/// RMS of the error scaled by atol + rtol * |y|; a value <= 1 means accept.
pub fn error_norm<const N: usize>(
    y: &[f64; N],
    y_new: &[f64; N],
    err: &[f64; N],
    abs_tol: f64,
    rel_tol: f64,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let scale = abs_tol + rel_tol * y[i].abs().max(y_new[i].abs());
        let e = err[i] / scale;
        acc += e * e;
    }
    (acc / N as f64).sqrt()
}

/// New step size from the standard order-5 controller, clamped to [0.2h, 5h].
pub fn next_step(h: f64, err_norm: f64) -> f64 {
    let factor = if err_norm > 0.0 { 0.9 * err_norm.powf(-0.2) } else { 5.0 };
    h * factor.clamp(0.2, 5.0)
}

/// One classical RK4 step (fixed-step cross-check integrator).
pub fn rk4_step<const N: usize, F>(f: &F, x: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(x, y);
    let k2 = f(x + 0.5 * h, &axpy(y, &[0.5], &[k1], h));
    let k3 = f(x + 0.5 * h, &axpy(y, &[0.5], &[k2], h));
    let k4 = f(x + h, &axpy(y, &[1.0], &[k3], h));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    // y' = -y, exact solution e^{-x}.
    fn decay(_x: f64, y: &[f64; 1]) -> [f64; 1] {
        [-y[0]]
    }

    #[test]
    fn dp45_is_fifth_order_on_decay() {
        let exact = (-0.5f64).exp();
        let (y_h, _) = dp45_step(&decay, 0.0, &[1.0], 0.5);
        let mut y = [1.0];
        for i in 0..2 {
            let (yn, _) = dp45_step(&decay, 0.25 * i as f64, &y, 0.25);
            y = yn;
        }
        let err_h = (y_h[0] - exact).abs();
        let err_h2 = (y[0] - exact).abs();
        // halving the step should cut the error by about 2^5
        assert!(err_h2 < err_h / 16.0, "err(h)={err_h:.3e} err(h/2)={err_h2:.3e}");
    }

    #[test]
    fn embedded_error_tracks_true_error() {
        let (y, err) = dp45_step(&decay, 0.0, &[1.0], 0.3);
        let true_err = (y[0] - (-0.3f64).exp()).abs();
        assert!(err[0].abs() < 1e-4);
        assert!(true_err < 1e-6);
    }

    #[test]
    fn rk4_rotation_preserves_radius_to_fourth_order() {
        // (u, v)' = (v, -u): circular rotation.
        let f = |_x: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut y = [1.0, 0.0];
        let n = 4096;
        let h = std::f64::consts::TAU / n as f64;
        for i in 0..n {
            y = rk4_step(&f, i as f64 * h, &y, h);
        }
        assert!((y[0] - 1.0).abs() < 1e-10);
        assert!(y[1].abs() < 1e-10);
    }
}
