//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use irisrec::features::{make_filters, swt2, WaveletFamily};
use irisrec::normalization::Matrix;

/// Builds the zero-inserted filter of dilation `d`.
fn a_trous(taps: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; (taps.len() - 1) * d + 1];
    for (k, &h) in taps.iter().enumerate() {
        out[k * d] = h;
    }
    out
}

/// Explicitly padded copy of `x`: periodic tiling or mirrored copies
/// (`… x1 x0 | x0 x1 … xn-1 | xn-1 …`), `pad` samples on both sides.
fn padded(x: &[f64], pad: usize, periodic: bool) -> Vec<f64> {
    let n = x.len();
    let mut period: Vec<f64> = x.to_vec();
    if !periodic {
        period.extend(x.iter().rev());
    }
    let p = period.len();
    // Start far enough left that the period aligns with x[0] at index `pad`.
    let reps = pad / p + 2;
    (0..n + 2 * pad).map(|i| period[(i + reps * p - pad) % p]).collect()
}

/// Direct dilated convolution `y[n] = Σ_m g[m] x[n - m + d·L/2]`.
fn convolve(x: &[f64], taps: &[f64], d: usize, periodic: bool) -> Vec<f64> {
    let g = a_trous(taps, d);
    let shift = d * (taps.len() / 2);
    let pad = g.len() + shift;
    let xp = padded(x, pad, periodic);
    (0..x.len())
        .map(|n| {
            g.iter()
                .enumerate()
                .map(|(m, gm)| gm * xp[(n + pad + shift) - m])
                .sum()
        })
        .collect()
}

fn along_cols(m: &Matrix, taps: &[f64], d: usize) -> Matrix {
    let rows: Vec<Vec<f64>> = (0..m.rows()).map(|r| convolve(m.row(r), taps, d, true)).collect();
    Matrix::from_fn(m.rows(), m.cols(), |r, c| rows[r][c])
}

fn along_rows(m: &Matrix, taps: &[f64], d: usize) -> Matrix {
    let cols: Vec<Vec<f64>> = (0..m.cols())
        .map(|c| {
            let col: Vec<f64> = (0..m.rows()).map(|r| m.get(r, c)).collect();
            convolve(&col, taps, d, false)
        })
        .collect();
    Matrix::from_fn(m.rows(), m.cols(), |r, c| cols[c][r])
}

pub fn max_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Largest deviation of `swt2` from the oracle over all families, two
/// levels and four bands, with a label for the worst case.
pub fn swt_oracle_error(m: &Matrix) -> (f64, String) {
    let mut worst = (0.0, String::new());
    for family in WaveletFamily::ALL {
        let f = make_filters(family);
        let dec = swt2(m, &f, 2).unwrap();
        let mut input = m.clone();
        for (j, level) in dec.iter().enumerate() {
            let d = 1 << j;
            let lo = along_cols(&input, &f.lo, d);
            let hi = along_cols(&input, &f.hi, d);
            let ca = along_rows(&lo, &f.lo, d);
            let expect = [
                ("ca", &level.ca, ca.clone()),
                ("ch", &level.ch, along_rows(&lo, &f.hi, d)),
                ("cv", &level.cv, along_rows(&hi, &f.lo, d)),
                ("cd", &level.cd, along_rows(&hi, &f.hi, d)),
            ];
            for (band, got, want) in expect {
                let e = max_diff(got, &want);
                if e >= worst.0 {
                    worst = (e, format!("{family} level {} {band}", j + 1));
                }
            }
            input = ca;
        }
    }
    worst
}

/// Scalar loop over both halves with explicit modular indexing.
pub fn brute_force_semi(a: &[u8], b: &[u8], max_shift: i64) -> f64 {
    let mut best = f64::INFINITY;
    for s in -max_shift..=max_shift {
        let mut sum = 0i64;
        for half in 0..2 {
            for j in 0..160i64 {
                let x = a[(half * 160 + j) as usize] as i64;
                let y = b[(half * 160 + (j + s).rem_euclid(160)) as usize] as i64;
                sum += (x - y).abs();
            }
        }
        best = best.min(sum as f64 / 320.0);
    }
    best
}

/// Exhaustive statement of the vote: rank labels by (votes desc, rank of
/// their nearest member asc) among those with ≥ a votes in the top k; with
/// no such label, the nearest neighbour wins. Ties in distance keep input
/// order.
pub fn aknn_oracle(scores: &[(u8, f64)], k: usize, a: usize) -> u8 {
    let mut ranked: Vec<(f64, usize, u8)> = scores.iter().enumerate().map(|(i, &(l, d))| (d, i, l)).collect();
    ranked.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)));
    let top = &ranked[..k.min(ranked.len())];
    let mut best: Option<(usize, usize, u8)> = None;
    for label in 0u8..=u8::MAX {
        let votes = top.iter().filter(|t| t.2 == label).count();
        let Some(first) = top.iter().position(|t| t.2 == label) else { continue };
        if votes < a {
            continue;
        }
        let better = match best {
            None => true,
            Some((v, f, _)) => votes > v || (votes == v && first < f),
        };
        if better {
            best = Some((votes, first, label));
        }
    }
    best.map(|b| b.2).unwrap_or(ranked[0].2)
}

/// Per-feature moments from raw sums, then the averaged ratio.
pub fn dis_oracle(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let n = a[0].len();
    let stats = |c: &[Vec<f64>], i: usize| {
        let (mut s, mut s2) = (0.0, 0.0);
        for v in c {
            s += v[i];
            s2 += v[i] * v[i];
        }
        let m = s / c.len() as f64;
        (m, s2 / c.len() as f64 - m * m)
    };
    let mut total = 0.0;
    for i in 0..n {
        let (ma, va) = stats(a, i);
        let (mb, vb) = stats(b, i);
        total += (ma - mb) * (ma - mb) / (va * vb);
    }
    total / n as f64
}
