//! Bessel functions of the first kind for integer order.

/// J_n(x) for integer `n` and real `x`.
///
/// Small arguments use the power series directly. Otherwise Miller's downward
/// recurrence is started well above max(n, |x|) from a series-sized seed and
/// normalized with J_0 + 2 Σ_k J_2k = 1.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    if n < 0 {
        let v = bessel_j(-n, x);
        return if n % 2 == 0 { v } else { -v };
    }
    if x < 0.0 {
        let v = bessel_j(n, -x);
        return if n % 2 == 0 { v } else { -v };
    }
    let n = n as usize;
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x * x < 0.1 * (n as f64 + 1.0) {
        return series(n, x);
    }
    miller(n, x)
}

fn series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let q = -half * half;
    let mut sum = term;
    for k in 1..60 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn miller(n: usize, x: f64) -> f64 {
    let top = n.max(x as usize);
    let mut m = top + 20 + (40.0 * (top as f64 + 1.0)).sqrt() as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let two_over_x = 2.0 / x;
    let (mut jp1, mut j) = (0.0_f64, 1e-300_f64);
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for k in (1..=m).rev() {
        // j holds J_k (unnormalized), compute J_{k-1}
        let jm1 = k as f64 * two_over_x * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
        let idx = k - 1;
        if idx == n {
            wanted = j;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * j;
        }
    }
    norm += j;
    wanted / norm
}
