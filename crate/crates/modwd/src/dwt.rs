//! One-level biorthogonal wavelet analysis and synthesis.
//!
//! The default bank is the B-spline biorthogonal (3,7) pair: the synthesis
//! lowpass is the cubic B-spline filter, the analysis lowpass its length-16
//! dual. Naming follows the reconstruction-order-3 / decomposition-order-7
//! convention (some toolkits swap the roles, so the orders are stated here
//! rather than inferred from the name).
//!
//! Boundary handling is half-sample symmetric extension, which preserves
//! perfect reconstruction for every input length, odd lengths included.

use crate::error::{Error, Result};
use std::sync::OnceLock;

// CDF(3,7) dual lowpass: (1+z)^7 binomial times the degree-4 truncated
// binomial-series polynomial in sin^2(w/2), scaled to DC gain sqrt(2).
const BIOR37_DEC_LO: [f64; 16] = [
    0.0030210861012608843,
    -0.009063258303782653,
    -0.01683176542131064,
    0.074663985074019,
    0.03133297870736289,
    -0.301159125922835,
    -0.026499240945345472,
    0.9516421218971786,
    0.9516421218971786,
    -0.026499240945345472,
    -0.301159125922835,
    0.03133297870736289,
    0.074663985074019,
    -0.01683176542131064,
    -0.009063258303782653,
    0.0030210861012608843,
];

// Cubic B-spline lowpass sqrt(2)/8 * [1,3,3,1], centered in the common length.
const BIOR37_REC_LO: [f64; 16] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.1767766952966369,
    0.5303300858899107,
    0.5303300858899107,
    0.1767766952966369,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
];

/// Analysis/synthesis filter quadruple, all zero-padded to a common length.
#[derive(Debug, Clone, PartialEq)]
pub struct BiorFilterBank {
    pub dec_lo: Vec<f64>,
    pub dec_hi: Vec<f64>,
    pub rec_lo: Vec<f64>,
    pub rec_hi: Vec<f64>,
    pub name: String,
}

impl BiorFilterBank {
    pub fn filter_len(&self) -> usize {
        self.dec_lo.len()
    }

    /// Coefficient length produced by [`dwt1`] for an input of `n` samples.
    pub fn coeff_len(&self, n: usize) -> usize {
        (n + self.filter_len() - 1) / 2
    }
}

/// Approximation/detail planes of one sequence, with the length needed to
/// truncate the inverse transform.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPair {
    pub approx: Vec<f64>,
    pub detail: Vec<f64>,
    pub original_len: usize,
}

fn build_bior37() -> BiorFilterBank {
    let dec_lo = BIOR37_DEC_LO.to_vec();
    let rec_lo = BIOR37_REC_LO.to_vec();
    // alternating-sign relations of the two-channel biorthogonal bank
    let dec_hi: Vec<f64> = rec_lo
        .iter()
        .enumerate()
        .map(|(k, &v)| if k % 2 == 0 { v } else { -v })
        .collect();
    let rec_hi: Vec<f64> = dec_lo
        .iter()
        .enumerate()
        .map(|(k, &v)| if k % 2 == 0 { v } else { -v })
        .collect();
    BiorFilterBank { dec_lo, dec_hi, rec_lo, rec_hi, name: "bior3.7".into() }
}

fn validate(bank: &BiorFilterBank) {
    let hi_sum: f64 = bank.dec_hi.iter().sum();
    assert!(hi_sum.abs() < 1e-12, "analysis highpass has nonzero mean: {hi_sum}");
    let lo_sum: f64 = bank.dec_lo.iter().sum();
    assert!(
        (lo_sum - std::f64::consts::SQRT_2).abs() < 1e-12,
        "analysis lowpass DC gain off: {lo_sum}"
    );
    // impulse round trip catches any transcription error in the constants
    let mut impulse = vec![0.0; 32];
    impulse[0] = 1.0;
    let pair = dwt1(&impulse, bank).expect("impulse decomposition");
    let back = idwt1(&pair, bank).expect("impulse reconstruction");
    for (i, (&a, &b)) in impulse.iter().zip(&back).enumerate() {
        assert!((a - b).abs() < 1e-10, "impulse PR failed at {i}: {a} vs {b}");
    }
}

/// The standard B-spline biorthogonal (3,7) bank, self-checked on first use.
pub fn make_bior37() -> BiorFilterBank {
    static CHECKED: OnceLock<BiorFilterBank> = OnceLock::new();
    CHECKED
        .get_or_init(|| {
            let bank = build_bior37();
            validate(&bank);
            bank
        })
        .clone()
}

/// Half-sample symmetric index with repeated reflection (period `2n`).
fn sym_index(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let mut p = i.rem_euclid(period);
    if p >= n as isize {
        p = period - 1 - p;
    }
    p as usize
}

/// One-level analysis: symmetric extension, filter, downsample by 2.
pub fn dwt1(seq: &[f64], bank: &BiorFilterBank) -> Result<WaveletPair> {
    let n = seq.len();
    if n < 2 {
        return Err(Error::SequenceTooShort(n));
    }
    let flen = bank.filter_len();
    let out_len = bank.coeff_len(n);
    let mut approx = vec![0.0; out_len];
    let mut detail = vec![0.0; out_len];
    for i in 0..out_len {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for k in 0..flen {
            let idx = 2 * i as isize + k as isize - flen as isize + 2;
            let x = seq[sym_index(idx, n)];
            lo += bank.dec_lo[k] * x;
            hi += bank.dec_hi[k] * x;
        }
        approx[i] = lo;
        detail[i] = hi;
    }
    Ok(WaveletPair { approx, detail, original_len: n })
}

/// One-level synthesis: upsample by 2, filter, sum, truncate to the
/// recorded original length.
pub fn idwt1(pair: &WaveletPair, bank: &BiorFilterBank) -> Result<Vec<f64>> {
    if pair.approx.len() != pair.detail.len() {
        return Err(Error::InconsistentPair {
            approx: pair.approx.len(),
            detail: pair.detail.len(),
        });
    }
    let flen = bank.filter_len();
    let clen = pair.approx.len();
    let n = pair.original_len;
    // full convolution of the upsampled coefficients, boundary transient
    // (flen - 2 leading samples) removed
    let conv_len = 2 * clen + flen - 1;
    let mut full = vec![0.0; conv_len];
    for (i, (&a, &d)) in pair.approx.iter().zip(&pair.detail).enumerate() {
        let base = 2 * i;
        for k in 0..flen {
            full[base + k] += bank.rec_lo[k] * a + bank.rec_hi[k] * d;
        }
    }
    let start = flen - 2;
    if start + n > conv_len {
        return Err(Error::InconsistentPair { approx: clen, detail: clen });
    }
    Ok(full[start..start + n].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_seq(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn highpass_sums_to_zero() {
        let bank = make_bior37();
        assert!(bank.dec_hi.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn lowpass_dc_gain_is_sqrt2() {
        let bank = make_bior37();
        assert!((bank.dec_lo.iter().sum::<f64>() - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn impulse_round_trip() {
        let bank = make_bior37();
        let mut impulse = vec![0.0; 32];
        impulse[0] = 1.0;
        let back = idwt1(&dwt1(&impulse, &bank).unwrap(), &bank).unwrap();
        assert!(max_abs_diff(&impulse, &back) < 1e-10);
    }

    #[test]
    fn perfect_reconstruction_across_lengths() {
        let bank = make_bior37();
        for &n in &[8usize, 9, 99, 100, 512] {
            let s = random_seq(n, n as u64);
            let back = idwt1(&dwt1(&s, &bank).unwrap(), &bank).unwrap();
            assert_eq!(back.len(), n);
            assert!(max_abs_diff(&s, &back) < 1e-10, "length {n}");
        }
    }

    #[test]
    fn constant_input_annihilates_detail() {
        let bank = make_bior37();
        let c = 3.7;
        let seq = vec![c; 32];
        let pair = dwt1(&seq, &bank).unwrap();
        let max_detail = pair.detail.iter().fold(0.0f64, |m, &d| m.max(d.abs()));
        assert!(max_detail < 1e-10, "max detail {max_detail}");
        for &a in &pair.approx {
            assert!((a - c * std::f64::consts::SQRT_2).abs() < 1e-10);
        }
    }

    #[test]
    fn linear_ramp_annihilates_detail() {
        let bank = make_bior37();
        let seq: Vec<f64> = (0..32).map(|i| i as f64).collect();
        let pair = dwt1(&seq, &bank).unwrap();
        let interior = &pair.detail[4..pair.detail.len() - 4];
        let max_detail = interior.iter().fold(0.0f64, |m, &d| m.max(d.abs()));
        assert!(max_detail < 1e-9, "max interior detail {max_detail}");
    }

    #[test]
    fn length_formula() {
        let bank = make_bior37();
        let pair = dwt1(&random_seq(100, 1), &bank).unwrap();
        assert_eq!(pair.approx.len(), pair.detail.len());
        assert_eq!(pair.approx.len(), (100 + 15) / 2);
        assert!(pair.approx.len() >= 50 && pair.approx.len() <= 58);
    }

    #[test]
    fn too_short_sequence_rejected() {
        let bank = make_bior37();
        assert!(matches!(dwt1(&[1.0], &bank), Err(Error::SequenceTooShort(1))));
    }

    #[test]
    fn inconsistent_pair_rejected() {
        let bank = make_bior37();
        let pair = WaveletPair { approx: vec![0.0; 5], detail: vec![0.0; 4], original_len: 8 };
        assert!(matches!(idwt1(&pair, &bank), Err(Error::InconsistentPair { .. })));
    }

    #[test]
    fn coefficient_domain_identity() {
        let bank = make_bior37();
        for &n in &[20usize, 33, 99, 100, 512] {
            let pair = dwt1(&random_seq(n, n as u64 + 7), &bank).unwrap();
            let back = idwt1(&pair, &bank).unwrap();
            let pair2 = dwt1(&back, &bank).unwrap();
            assert!(max_abs_diff(&pair.approx, &pair2.approx) < 1e-9);
            assert!(max_abs_diff(&pair.detail, &pair2.detail) < 1e-9);
        }
    }

    #[test]
    fn synthesis_is_linear() {
        let bank = make_bior37();
        let pair = dwt1(&random_seq(64, 3), &bank).unwrap();
        let a = 2.5;
        let scaled = WaveletPair {
            approx: pair.approx.iter().map(|v| v * a).collect(),
            detail: pair.detail.iter().map(|v| v * a).collect(),
            original_len: pair.original_len,
        };
        let x = idwt1(&pair, &bank).unwrap();
        let xs = idwt1(&scaled, &bank).unwrap();
        for (u, v) in x.iter().zip(&xs) {
            assert!((u * a - v).abs() <= 1e-12 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn reconstruction_error_shrinks_linearly_toward_alpha_one() {
        let bank = make_bior37();
        let s = random_seq(128, 11);
        let err_at = |alpha: f64| {
            let pair = dwt1(&s, &bank).unwrap();
            let scaled = WaveletPair {
                approx: pair.approx.clone(),
                detail: pair.detail.iter().map(|d| d * alpha).collect(),
                original_len: pair.original_len,
            };
            let back = idwt1(&scaled, &bank).unwrap();
            s.iter()
                .zip(&back)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let e09 = err_at(0.9);
        let e099 = err_at(0.99);
        // error is linear in (1 - alpha)
        assert!((e09 / e099 - 10.0).abs() < 1e-6, "ratio {}", e09 / e099);
    }

    proptest! {
        #[test]
        fn pr_holds_for_arbitrary_inputs(n in 2usize..300, seed in 0u64..1000) {
            let bank = make_bior37();
            let s = random_seq(n, seed);
            let back = idwt1(&dwt1(&s, &bank).unwrap(), &bank).unwrap();
            prop_assert_eq!(back.len(), n);
            prop_assert!(max_abs_diff(&s, &back) < 1e-10);
        }
    }
}
