//! Composite Simpson quadrature on uniform grids.
//!
//! All time integrals in the monitors use these routines so the quadrature
//! order matches the integrator's. Odd panel counts are closed with the
//! Simpson 3/8 rule; a single panel falls back to the trapezoid rule.

/// Integral of uniformly sampled values with spacing `dt`.
pub fn simpson_uniform(values: &[f64], dt: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let panels = n - 1;
    if panels == 1 {
        return 0.5 * dt * (values[0] + values[1]);
    }
    if panels % 2 == 0 {
        return simpson_even(values, dt);
    }
    if panels == 3 {
        return three_eighths(values, dt);
    }
    // even prefix + 3/8 tail keeps fourth-order accuracy
    simpson_even(&values[..n - 3], dt) + three_eighths(&values[n - 4..], dt)
}

fn simpson_even(values: &[f64], dt: f64) -> f64 {
    let n = values.len();
    debug_assert!(n >= 3 && (n - 1) % 2 == 0);
    let mut s = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * dt / 3.0
}

fn three_eighths(values: &[f64], dt: f64) -> f64 {
    debug_assert_eq!(values.len(), 4);
    3.0 * dt / 8.0 * (values[0] + 3.0 * values[1] + 3.0 * values[2] + values[3])
}

/// Prefix integrals: `out[i] = integral over the first i panels`.
///
/// The one-panel prefix uses the four-point starter rule
/// `h (9 f0 + 19 f1 - 5 f2 + f3) / 24` when enough nodes exist, keeping
/// every prefix fourth-order accurate.
pub fn cumulative_simpson(values: &[f64], dt: f64) -> Vec<f64> {
    (0..values.len())
        .map(|i| {
            if i == 1 && values.len() >= 4 {
                dt * (9.0 * values[0] + 19.0 * values[1] - 5.0 * values[2] + values[3]) / 24.0
            } else {
                simpson_uniform(&values[..=i], dt)
            }
        })
        .collect()
}

/// Prefix integrals of a piecewise-smooth integrand whose derivative
/// breakpoints sit at node multiples of `block` panels (delayed equations
/// propagate the initial-time kink at delay-length spacing). No composite
/// sub-rule straddles a breakpoint: the quadrature restarts on each block.
pub fn cumulative_simpson_blocked(values: &[f64], dt: f64, block: usize) -> Vec<f64> {
    if block == 0 || block >= values.len() {
        return cumulative_simpson(values, dt);
    }
    let mut out = Vec::with_capacity(values.len());
    let mut base = 0.0;
    let mut start = 0;
    while start < values.len() {
        let end = (start + block).min(values.len() - 1);
        let inner = cumulative_simpson(&values[start..=end], dt);
        if start == 0 {
            out.push(inner[0]);
        }
        out.extend(inner.iter().skip(1).map(|v| base + v));
        base += inner[end - start];
        if end == values.len() - 1 {
            break;
        }
        start = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomials_integrated_exactly() {
        // Simpson and 3/8 are exact on cubics.
        let f = |x: f64| 2.0 * x.powi(3) - x * x + 3.0;
        let exact = |a: f64, b: f64| {
            (0.5 * b.powi(4) - b.powi(3) / 3.0 + 3.0 * b)
                - (0.5 * a.powi(4) - a.powi(3) / 3.0 + 3.0 * a)
        };
        for n in [3usize, 4, 5, 6, 9] {
            let dt = 0.37;
            let vals: Vec<f64> = (0..n).map(|i| f(i as f64 * dt)).collect();
            assert_relative_eq!(
                simpson_uniform(&vals, dt),
                exact(0.0, (n - 1) as f64 * dt),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn fourth_order_convergence_on_exponential() {
        let integrate = |n: usize| {
            let dt = 1.0 / n as f64;
            let vals: Vec<f64> = (0..=n).map(|i| (i as f64 * dt).exp()).collect();
            simpson_uniform(&vals, dt)
        };
        let exact = 1.0f64.exp() - 1.0;
        let e1 = (integrate(16) - exact).abs();
        let e2 = (integrate(32) - exact).abs();
        assert!(e1 / e2 > 12.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn cumulative_matches_prefixes() {
        let vals: Vec<f64> = (0..12).map(|i| (i as f64 * 0.2).sin()).collect();
        let cum = cumulative_simpson(&vals, 0.2);
        assert_eq!(cum[0], 0.0);
        for i in 2..vals.len() {
            assert_relative_eq!(cum[i], simpson_uniform(&vals[..=i], 0.2));
        }
        // the starter prefix is exact on cubics too
        let f = |x: f64| x.powi(3) - 2.0 * x + 1.0;
        let vals: Vec<f64> = (0..5).map(|i| f(i as f64 * 0.3)).collect();
        let cum = cumulative_simpson(&vals, 0.3);
        let exact = 0.25 * 0.3f64.powi(4) - 0.3f64.powi(2) + 0.3;
        assert_relative_eq!(cum[1], exact, epsilon = 1e-13);
    }
}
