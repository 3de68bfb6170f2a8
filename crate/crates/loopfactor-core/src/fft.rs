//! Radix-2 complex FFT, in place.

use crate::linalg::C;
use core::f64::consts::PI;

/// Transform with kernel e^{+2πi jk/M} when `positive_exponent` is true, e^{-2πi jk/M} otherwise.
/// No normalization is applied.
pub fn fft_in_place(data: &mut [C], positive_exponent: bool) {
    let n = data.len();
    assert!(n.is_power_of_two(), "fft length must be a power of two");
    if n <= 1 {
        return;
    }
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
    let sign = if positive_exponent { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = ang * k as f64;
                let w = C::new(libm::cos(a), libm::sin(a));
                let u = data[start + k];
                let v = data[start + k + half] * w;
                data[start + k] = u + v;
                data[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }
}
