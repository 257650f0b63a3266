use super::DistanceError;
use crate::scalar::{CompensatedSum, Scalar};

/// Mode number and trig kind of coefficient slot `i`:
/// `[a0, a1, b1, a2, b2, …]`.
fn slot(i: usize) -> (usize, bool) {
    (i.div_ceil(2), i % 2 == 1)
}

/// Real Fourier coefficients of a closed curve `r(θ)` sampled at
/// `θ_i = 2πi/n` for `i = 0..n`.
///
/// Returns `n_modes` values laid out as `[a0, a1, b1, a2, b2, …]` with
/// `a0` the mean radius and `r(θ) ≈ a0 + Σ a_m cos(mθ) + b_m sin(mθ)`.
pub fn fourier_decompose<S: Scalar>(samples: &[S], n_modes: usize) -> Result<Vec<S>, DistanceError> {
    let n = samples.len();
    if n_modes == 0 || n < 2 * n_modes {
        return Err(DistanceError::TooFewSamples { n_theta: n, n_modes });
    }
    let nf = S::of_usize(n);
    let step = S::TAU() / nf;
    let coeffs = (0..n_modes)
        .map(|i| {
            let (m, cosine) = slot(i);
            let mf = S::of_usize(m);
            let acc: CompensatedSum<S> = samples
                .iter()
                .enumerate()
                .map(|(k, &r)| {
                    let theta = mf * step * S::of_usize(k);
                    r * if cosine || m == 0 { theta.cos() } else { theta.sin() }
                })
                .collect();
            let scale = if m == 0 { S::one() / nf } else { S::of(2.0) / nf };
            acc.total() * scale
        })
        .collect();
    Ok(coeffs)
}

/// Evaluate a coefficient vector from [`fourier_decompose`] at `n_theta`
/// uniform angles.
pub fn fourier_reconstruct<S: Scalar>(coeffs: &[S], n_theta: usize) -> Vec<S> {
    let step = S::TAU() / S::of_usize(n_theta);
    (0..n_theta)
        .map(|k| {
            let theta = step * S::of_usize(k);
            coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| {
                    let (m, cosine) = slot(i);
                    let a = S::of_usize(m) * theta;
                    c * if m == 0 {
                        S::one()
                    } else if cosine {
                        a.cos()
                    } else {
                        a.sin()
                    }
                })
                .collect::<CompensatedSum<S>>()
                .total()
        })
        .collect()
}
