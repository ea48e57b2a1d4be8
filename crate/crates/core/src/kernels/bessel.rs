//! Integer-order Bessel functions `J_m(x)`, `Y_m(x)` for `x > 0`, evaluated
//! for a contiguous run of orders at once.

use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE_AT: f64 = 1e200;

/// `J_0(x) … J_{count-1}(x)` and `Y_0(x) … Y_{count-1}(x)`.
///
/// `J` comes from Miller's backward recurrence normalized by
/// `J_0 + 2 Σ J_{2k} = 1`; `Y_0` and `Y_1` from their Neumann series in the
/// same `J` values, and higher `Y_m` by forward recurrence. Accurate while
/// the orders stay below about `x`, the regime the Hankel kernel uses.
pub fn bessel_jy(x: f64, count: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(x > 0.0 && x.is_finite(), "bessel_jy needs finite x > 0");
    let count = count.max(2);
    let guess = (x + 40.0 * x.cbrt() + 40.0).ceil() as usize;
    let mut start = guess.max(count + 2);
    start += start % 2;

    let mut j = vec![0.0; start + 2];
    j[start] = 1e-30;
    for k in (1..=start).rev() {
        j[k - 1] = 2.0 * k as f64 / x * j[k] - j[k + 1];
        if j[k - 1].abs() > RESCALE_AT {
            for v in &mut j[k - 1..] {
                *v /= RESCALE_AT;
            }
        }
    }

    let norm = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    for v in &mut j {
        *v /= norm;
    }

    let log_term = (x / 2.0).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for k in 1..=start / 2 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / (2 * k) as f64;
    }
    let y0 = 2.0 / PI * log_term * j[0] - 4.0 / PI * s0;
    let y1 = -2.0 / PI * j[0] / x + 2.0 / PI * log_term * j[1] + 4.0 / PI * s1;

    let mut y = Vec::with_capacity(count);
    y.push(y0);
    y.push(y1);
    for m in 1..count - 1 {
        let next = 2.0 * m as f64 / x * y[m] - y[m - 1];
        y.push(next);
    }
    j.truncate(count);
    (j, y)
}
