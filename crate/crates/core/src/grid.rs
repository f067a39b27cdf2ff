//! Periodic one-dimensional position grid with spectral momentum.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{c, CMatrix, CVector, Operator, SpaceSpec, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n_sites: usize,
    pub length: f64,
}

impl Grid {
    pub fn new(n_sites: usize, length: f64) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::InvalidConfig(format!("grid needs at least 2 sites, got {n_sites}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidConfig(format!("grid length must be positive, got {length}")));
        }
        Ok(Self { n_sites, length })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_sites as f64
    }

    /// Site positions x_j = −L/2 + j·dx.
    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_sites).map(|j| -0.5 * self.length + j as f64 * self.dx()).collect()
    }

    /// Signed FFT-ordered wavenumbers. The Nyquist mode of an even grid has
    /// no sign and is assigned zero, which keeps the derivative hermitian.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_sites as i64;
        (0..n)
            .map(|m| {
                let signed = if 2 * m < n { m } else { m - n };
                if 2 * m == n {
                    0.0
                } else {
                    2.0 * PI * signed as f64 / self.length
                }
            })
            .collect()
    }

    /// Largest resolved wavenumber π/dx.
    pub fn k_max(&self) -> f64 {
        PI / self.dx()
    }

    /// Index of the site nearest to `x`, if `x` lies in the box.
    pub fn nearest_site(&self, x: f64) -> Option<usize> {
        let half = 0.5 * self.length;
        if !(x >= -half && x < half) {
            return None;
        }
        let j = ((x + half) / self.dx()).round() as usize;
        Some(j % self.n_sites)
    }

    /// Wraps a separation into [−L/2, L/2).
    pub fn min_image(&self, d: f64) -> f64 {
        let l = self.length;
        (d + 0.5 * l).rem_euclid(l) - 0.5 * l
    }

    pub fn space(&self) -> SpaceSpec {
        SpaceSpec::single(self.n_sites).expect("grid has sites")
    }

    pub fn position_operator(&self) -> Operator {
        Operator::diagonal(&self.space(), &self.positions()).expect("matching size")
    }

    /// Dense spectral momentum −iħ d/dx.
    pub fn momentum_matrix(&self, hbar: f64) -> CMatrix {
        let n = self.n_sites;
        let xs = self.positions();
        let ks = self.wavenumbers();
        CMatrix::from_fn(n, n, |a, b| {
            let d = xs[a] - xs[b];
            let s: C64 = ks.iter().map(|&k| C64::from_polar(k, k * d)).sum();
            s * (hbar / n as f64)
        })
    }

    pub fn momentum_operator(&self, hbar: f64) -> Operator {
        Operator::new(self.space(), self.momentum_matrix(hbar)).expect("matching size")
    }

    /// P²/2m.
    pub fn kinetic_operator(&self, mass: f64, hbar: f64) -> Operator {
        let p = self.momentum_operator(hbar);
        (&p * &p).scaled(c(0.5 / mass))
    }

    /// Packet width whose position and momentum tails reach the box edge
    /// and the Nyquist wavenumber at the same number of widths.
    pub fn balanced_width(&self) -> f64 {
        self.length / (2.0 * PI * self.n_sites as f64).sqrt()
    }

    /// Normalized Gaussian packet exp(−(x−x0)²/(4w²) + i k0 x); |ψ|² has
    /// standard deviation `width`.
    pub fn gaussian(&self, center: f64, k0: f64, width: f64) -> CVector {
        let v = CVector::from_iterator(
            self.n_sites,
            self.positions().into_iter().map(|x| {
                let d = self.min_image(x - center);
                C64::from_polar((-d * d / (4.0 * width * width)).exp(), k0 * x)
            }),
        );
        let norm = v.norm();
        v / c(norm)
    }

    /// Orthonormal columns spanning the first `count` Hermite functions of
    /// scale `sigma`, centred in the box.
    pub fn hermite_basis(&self, count: usize, sigma: f64) -> CMatrix {
        let xs = self.positions();
        let n = self.n_sites;
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(count);
        let u: Vec<f64> = xs.iter().map(|x| x / sigma).collect();
        let g: Vec<f64> = u.iter().map(|u| PI.powf(-0.25) * (-0.5 * u * u).exp()).collect();
        for k in 0..count {
            let col: Vec<f64> = match k {
                0 => g.clone(),
                1 => u.iter().zip(&g).map(|(u, g)| 2f64.sqrt() * u * g).collect(),
                _ => {
                    let (a, b) = (&cols[k - 1], &cols[k - 2]);
                    let kf = k as f64;
                    (0..n)
                        .map(|j| (2.0 / kf).sqrt() * u[j] * a[j] - ((kf - 1.0) / kf).sqrt() * b[j])
                        .collect()
                }
            };
            cols.push(col);
        }
        let mut basis = CMatrix::from_fn(n, count, |j, k| c(cols[k][j]));
        orthonormalize_columns(&mut basis);
        basis
    }
}

/// Modified Gram–Schmidt, in place.
pub fn orthonormalize_columns(m: &mut CMatrix) {
    for k in 0..m.ncols() {
        for j in 0..k {
            let proj = m.column(j).dotc(&m.column(k));
            let qj = m.column(j).clone_owned();
            let mut ck = m.column_mut(k);
            ck -= qj * proj;
        }
        let norm = m.column(k).norm();
        let mut ck = m.column_mut(k);
        ck /= c(norm);
    }
}
