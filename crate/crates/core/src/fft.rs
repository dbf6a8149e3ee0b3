//! In-place iterative radix-2 FFT.
//!
//! Forward transform uses the kernel `exp(-j2πnk/N)`; neither direction is
//! normalized. A [`Radix2Fft`] holds the twiddle table and bit-reversal
//! permutation for one length and can be reused across rows.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Radix2Fft {
    len: usize,
    // exp(-j2πk/N) for k in 0..N/2
    twiddles: Vec<Complex64>,
    bit_reverse: Vec<usize>,
}

impl Radix2Fft {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let twiddles = (0..len / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64))
            .collect();
        let bits = len.trailing_zeros();
        let bit_reverse = (0..len)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Ok(Self {
            len,
            twiddles,
            bit_reverse,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.transform(buf, false);
    }

    /// Inverse transform without the `1/N` factor.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.transform(buf, true);
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        assert_eq!(buf.len(), self.len, "buffer length does not match FFT size");
        for (i, &j) in self.bit_reverse.iter().enumerate() {
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < self.len {
            let stride = self.len / (2 * half);
            for start in (0..self.len).step_by(2 * half) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let w = if inverse { w.conj() } else { w };
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }

}

/// Forward DFT of any length: radix-2 when possible, direct summation otherwise.
pub fn dft_any(input: &[Complex64]) -> Vec<Complex64> {
    let n = input.len();
    if let Ok(plan) = Radix2Fft::new(n) {
        let mut out = input.to_vec();
        plan.forward(&mut out);
        return out;
    }
    (0..n)
        .map(|k| {
            input
                .iter()
                .enumerate()
                .map(|(j, &x)| x * Complex64::from_polar(1.0, -2.0 * PI * ((j * k) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

/// Unnormalized inverse DFT of any length.
pub fn idft_any(input: &[Complex64]) -> Vec<Complex64> {
    let conj: Vec<Complex64> = input.iter().map(|z| z.conj()).collect();
    dft_any(&conj).into_iter().map(|z| z.conj()).collect()
}
