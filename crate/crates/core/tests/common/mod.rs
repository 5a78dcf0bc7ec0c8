#![allow(dead_code)]

use mbl_core::lattice::{CouplingMatrix, ModelSpec, Provenance};
use mbl_core::Complex64;
use nalgebra::DMatrix;

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Single-site Pauli matrix in the (bit 0 = ↓, bit 1 = ↑) basis.
pub fn pauli(axis: char) -> [[Complex64; 2]; 2] {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match axis {
        'x' => [[o, l], [l, o]],
        'y' => [[o, i], [-i, o]],
        'z' => [[-l, o], [o, l]],
        _ => panic!("axis"),
    }
}

/// `σ^axis` on `site` embedded in `n` spins, built entry by entry.
pub fn site_operator(n: usize, site: usize, axis: char) -> CMat {
    let dim = 1usize << n;
    let p = pauli(axis);
    let mask = 1usize << site;
    CMat::from_fn(dim, dim, |row, col| {
        if row & !mask != col & !mask {
            return c(0.0, 0.0);
        }
        p[(row >> site) & 1][(col >> site) & 1]
    })
}

/// `Σ J σˣσˣ + Σ (B + D_i)/2 σᶻ` from explicit operator products.
pub fn dense_hamiltonian(spec: &ModelSpec) -> CMat {
    let n = spec.n();
    let dim = 1usize << n;
    let mut h = CMat::zeros(dim, dim);
    for i in 0..n {
        for j in (i + 1)..n {
            let jij = spec.couplings.get(i, j);
            if jij != 0.0 {
                h += (site_operator(n, i, 'x') * site_operator(n, j, 'x')).scale(jij);
            }
        }
        h += site_operator(n, i, 'z').scale(spec.site_field(i) / 2.0);
    }
    h
}

/// `e^{A}` by scaling and squaring of a truncated Taylor series.
pub fn expm(a: &CMat) -> CMat {
    let norm: f64 = a.iter().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let squarings = (norm.log2().ceil().max(0.0) as u32) + 4;
    let scaled = a.scale(1.0 / 2f64.powi(squarings as i32));
    let dim = a.nrows();
    let mut term = CMat::identity(dim, dim);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &scaled / c(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn nearest_neighbor(n: usize, j: f64) -> CouplingMatrix {
    let mut v = vec![0.0; n * n];
    for i in 0..n.saturating_sub(1) {
        v[i * n + i + 1] = j;
        v[(i + 1) * n + i] = j;
    }
    CouplingMatrix::from_values(n, v, Provenance::Explicit).unwrap()
}

pub fn log_grid(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| t_min * (t_max / t_min).powf(k as f64 / (points - 1) as f64))
        .collect()
}
