//! Closed-form statevectors for every representation, written directly from
//! the defining state equations without going through the library encoders.
//!
//! Basis index layout: time bits lowest, then amplitude bits, then channel bits.

#![allow(dead_code)]

use qaudio::circuit::Scheme;

pub fn log2_exact(n: usize) -> usize {
    assert!(n.is_power_of_two(), "{n} is not a power of two");
    n.trailing_zeros() as usize
}

/// Two's complement word, `round(a * (2^(q-1) - 1))`.
pub fn signed_word(a: f64, q: u32) -> i64 {
    let full = ((1i64 << (q - 1)) - 1) as f64;
    (a * full).round() as i64
}

/// Unsigned word, `round((a + 1) / 2 * (2^q - 1))`.
pub fn unsigned_word(a: f64, q: u32) -> i64 {
    ((a + 1.0) / 2.0 * ((1i64 << q) - 1) as f64).round() as i64
}

/// Fixed-point word with `m` integer bits, clamped to the signed range.
pub fn fixed_word(a: f64, q: u32, m: u32) -> i64 {
    let scaled = (a * 2f64.powi((q - m - 1) as i32)).round() as i64;
    scaled.clamp(-(1i64 << (q - 1)), (1i64 << (q - 1)) - 1)
}

pub fn word_for(scheme: Scheme, a: f64, q: u32, m: u32) -> i64 {
    match scheme {
        Scheme::Qsm | Scheme::Mqsm => signed_word(a, q),
        Scheme::Uqsm => unsigned_word(a, q),
        Scheme::Fpqsm => fixed_word(a, q, m),
        other => panic!("{other} has no code words"),
    }
}

/// Expected real amplitudes of the prepared state for `channels` (each of
/// power-of-two length). Multichannel schemes pad the channel count with
/// silent channels.
pub fn expected_state(scheme: Scheme, channels: &[Vec<f64>], q: u32, m: u32) -> Vec<f64> {
    let big_n = channels[0].len();
    let n = log2_exact(big_n);
    let mut chans = channels.to_vec();
    if matches!(scheme, Scheme::Mqsm | Scheme::Msqpam) {
        chans.resize(chans.len().next_power_of_two(), vec![0.0; big_n]);
    } else {
        assert_eq!(chans.len(), 1);
    }
    let big_c = chans.len();
    let c = log2_exact(big_c);

    match scheme {
        Scheme::Qpam => {
            let a = &chans[0];
            let g: f64 = a.iter().map(|x| (x + 1.0) / 2.0).sum();
            a.iter().map(|x| (((x + 1.0) / 2.0) / g).sqrt()).collect()
        }
        Scheme::Sqpam | Scheme::Msqpam => {
            let mut state = vec![0.0; 1 << (n + 1 + c)];
            let norm = 1.0 / ((big_n * big_c) as f64).sqrt();
            for (j, row) in chans.iter().enumerate() {
                for (i, &a) in row.iter().enumerate() {
                    let theta = ((a + 1.0) / 2.0).sqrt().asin();
                    let base = (j << (n + 1)) | i;
                    state[base] = norm * theta.cos();
                    state[base | (1 << n)] = norm * theta.sin();
                }
            }
            state
        }
        Scheme::Qsm | Scheme::Uqsm | Scheme::Fpqsm | Scheme::Mqsm => {
            let qs = q as usize;
            let mut state = vec![0.0; 1 << (n + qs + c)];
            let norm = 1.0 / ((big_n * big_c) as f64).sqrt();
            let mask = (1u64 << q) - 1;
            for (j, row) in chans.iter().enumerate() {
                for (i, &a) in row.iter().enumerate() {
                    let word = (word_for(scheme, a, q, m) as u64 & mask) as usize;
                    state[(j << (n + qs)) | (word << n) | i] = norm;
                }
            }
            state
        }
    }
}
