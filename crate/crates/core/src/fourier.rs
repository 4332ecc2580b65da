//! Radix-2 discrete Fourier transform used for the (inverse) QFT.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

/// Sign of the exponent in `exp(sign · 2πi · jk / M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Negative,
    Positive,
}

/// Precomputed twiddles and bit-reversal table for one transform length.
pub(crate) struct Plan {
    bits: u32,
    twiddles: Vec<Complex64>,
    reversed: Vec<usize>,
}

impl Plan {
    pub(crate) fn new(bits: u32, direction: Direction) -> Self {
        let len = 1usize << bits;
        let sign = match direction {
            Direction::Negative => -1.0,
            Direction::Positive => 1.0,
        };
        // Each twiddle is evaluated directly so rounding does not accumulate
        // along the table.
        let twiddles = (0..len / 2)
            .map(|j| {
                let angle = sign * 2.0 * PI * j as f64 / len as f64;
                Complex64::new(libm::cos(angle), libm::sin(angle))
            })
            .collect();
        let reversed = (0..len)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        Self {
            bits,
            twiddles,
            reversed,
        }
    }

    pub(crate) fn len(&self) -> usize {
        1 << self.bits
    }

    /// Unnormalized transform `out[j] = Σ_k exp(sign · 2πi · jk / M) · in[k]`.
    pub(crate) fn run(&self, buf: &mut [Complex64]) {
        let len = self.len();
        debug_assert_eq!(buf.len(), len);
        for i in 0..len {
            let j = self.reversed[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < len {
            let stride = len / (2 * half);
            for start in (0..len).step_by(2 * half) {
                for offset in 0..half {
                    let w = self.twiddles[offset * stride];
                    let a = buf[start + offset];
                    let b = buf[start + offset + half] * w;
                    buf[start + offset] = a + b;
                    buf[start + offset + half] = a - b;
                }
            }
            half *= 2;
        }
    }
}
