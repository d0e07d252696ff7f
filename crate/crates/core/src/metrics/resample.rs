use crate::error::{invalid, Result};

/// Zero crossings of the interpolation kernel on each side, at the lower of
/// the two rates.
const HALF_ZEROS: usize = 16;
const KAISER_BETA: f64 = 8.0;

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Rational-ratio resampling with a zero-phase Kaiser-windowed sinc.
///
/// The output has `ceil(len * to / from)` samples and sample `n` corresponds
/// to input time `n * from / to`.
pub fn resample(x: &[f64], from: u32, to: u32) -> Result<Vec<f64>> {
    if from == 0 || to == 0 {
        return Err(invalid("sample rates must be positive"));
    }
    if from == to {
        return Ok(x.to_vec());
    }
    let g = gcd(from, to);
    let up = (to / g) as usize;
    let down = (from / g) as usize;
    let ratio = up.max(down);
    // kernel on the upsampled grid, cutoff at the lower Nyquist
    let half = HALF_ZEROS * ratio;
    let i0_beta = bessel_i0(KAISER_BETA);
    let kernel: Vec<f64> = (0..=2 * half)
        .map(|i| {
            let t = i as f64 - half as f64;
            let r = t / half as f64;
            let w = bessel_i0(KAISER_BETA * (1.0 - r * r).max(0.0).sqrt()) / i0_beta;
            w * sinc(t / ratio as f64) * up as f64 / ratio as f64
        })
        .collect();

    let out_len = (x.len() * up).div_ceil(down);
    let mut out = vec![0.0; out_len];
    for (n, y) in out.iter_mut().enumerate() {
        let p = n * down;
        let k_lo = p.saturating_sub(half).div_ceil(up);
        let k_hi = ((p + half) / up).min(x.len().saturating_sub(1));
        let mut acc = 0.0;
        for k in k_lo..=k_hi {
            if k >= x.len() {
                break;
            }
            acc += x[k] * kernel[k * up + half - p];
        }
        *y = acc;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_length() {
        assert_eq!(resample(&[0.0; 80], 8000, 10000).unwrap().len(), 100);
        assert_eq!(resample(&[0.0; 81], 8000, 10000).unwrap().len(), 102);
        assert_eq!(resample(&[1.0, 2.0], 8000, 8000).unwrap(), vec![1.0, 2.0]);
        assert!(resample(&[1.0], 0, 8000).is_err());
    }

    #[test]
    fn sine_preserved() {
        let f = 440.0;
        let x: Vec<f64> = (0..8000)
            .map(|n| (2.0 * std::f64::consts::PI * f * n as f64 / 8000.0).sin())
            .collect();
        let y = resample(&x, 8000, 10000).unwrap();
        // ignore edges where the kernel is truncated
        for (n, v) in y.iter().enumerate().skip(200).take(9600) {
            let expect = (2.0 * std::f64::consts::PI * f * n as f64 / 10000.0).sin();
            assert!((v - expect).abs() < 1e-3, "n={n}: {v} vs {expect}");
        }
    }

    #[test]
    fn bessel_values() {
        assert_eq!(bessel_i0(0.0), 1.0);
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-14);
    }
}
