//! Dirichlet sine eigenbasis of the negative Laplacian on `(0, len)`.
//!
//! Eigenfunctions are orthonormal in `L^2`,
//! `w_j(x) = sqrt(2/len) * sin(j*pi*x/len)` with eigenvalues
//! `lambda_j = (j*pi/len)^2`, `j = 1..=n`. All fields are stored as
//! coefficient vectors against this basis; every norm used by the energy
//! estimates is a weighted Euclidean norm of the coefficients.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::DomainSpec;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    /// Pseudo-spectral grids below `2N+1` points alias the cubic range back
    /// onto the resolved modes.
    #[error("pseudo-spectral grid of {got} points is too coarse for {modes} modes (need >= {need})")]
    GridTooCoarse { got: usize, modes: usize, need: usize },
}

/// A solution snapshot: coefficients against the orthonormal eigenbasis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    pub coeffs: Vec<f64>,
    pub time: f64,
}

impl SpectralField {
    pub fn new(coeffs: Vec<f64>, time: f64) -> Self {
        Self { coeffs, time }
    }

    pub fn zeros(n: usize, time: f64) -> Self {
        Self { coeffs: vec![0.0; n], time }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

/// Eigenvalues of the Dirichlet Laplacian, `lambda_j = (j*pi/len)^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenData {
    pub lambda: Vec<f64>,
}

impl EigenData {
    /// First eigenvalue; the constant in the Poincare inequality
    /// `||grad u||^2 >= lambda_1 ||u||^2`.
    pub fn lambda1(&self) -> f64 {
        self.lambda[0]
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }
}

/// Standard spectrum of the 1-D Dirichlet Laplacian.
pub fn eigenvalues(domain: &DomainSpec) -> EigenData {
    let lambda = (1..=domain.mode_count)
        .map(|j| {
            let w = j as f64 * std::f64::consts::PI / domain.length;
            w * w
        })
        .collect();
    EigenData { lambda }
}

/// All squared norms the estimates need, evaluated at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NormBundle {
    /// `||u||_2^2`
    pub l2_sq: f64,
    /// `||grad u||_2^2`
    pub grad_sq: f64,
    /// `||Delta u||_2^2`
    pub lap_sq: f64,
    /// `||u||_{-1}^2`, the norm induced by the inverse Dirichlet Laplacian
    pub hminus1_sq: f64,
    /// `||u||^2 + eps * ||grad u||^2`
    pub ht_sq: f64,
    /// `||grad u||^2 + |eps| * ||Delta u||^2`
    pub ht1_sq: f64,
}

/// Norms of a snapshot given the instantaneous value of `eps(t)`.
pub fn norms(field: &SpectralField, eigen: &EigenData, eps_value: f64) -> NormBundle {
    norms_of_coeffs(&field.coeffs, eigen, eps_value)
}

pub fn norms_of_coeffs(coeffs: &[f64], eigen: &EigenData, eps_value: f64) -> NormBundle {
    let mut b = NormBundle::default();
    for (c, l) in coeffs.iter().zip(&eigen.lambda) {
        let c2 = c * c;
        b.l2_sq += c2;
        b.grad_sq += l * c2;
        b.lap_sq += l * l * c2;
        b.hminus1_sq += c2 / l;
    }
    b.ht_sq = b.l2_sq + eps_value * b.grad_sq;
    b.ht1_sq = b.grad_sq + eps_value.abs() * b.lap_sq;
    b
}

/// Parseval form of the nonlocal functional `l(u) = integral j*u`:
/// the Euclidean pairing of the weight coefficients with the field.
/// Mismatched lengths are treated as zero-padded.
pub fn nonlocal_value(coeffs: &[f64], weights: &[f64]) -> f64 {
    coeffs.iter().zip(weights).map(|(u, j)| u * j).sum()
}

/// Collocation plan for pseudo-spectral evaluation of pointwise maps.
///
/// Synthesis evaluates the sine series on `grid_size` interior nodes
/// `x_i = i*len/(grid_size+1)`; analysis projects grid values back by the
/// discrete sine quadrature, which is exact for sine polynomials up to
/// degree `2*(grid_size+1) - 1 - n`. With `grid_size >= 2n+1` the first
/// `n` coefficients of a cubic of an `n`-mode field are recovered exactly.
#[derive(Debug, Clone)]
pub struct SineBasis {
    pub length: f64,
    pub n_modes: usize,
    pub grid_size: usize,
    /// `table[j][i] = w_{j+1}(x_i)`, orthonormal eigenfunction values.
    table: Vec<Vec<f64>>,
    /// Quadrature weight `len/(grid_size+1)` of the trapezoid rule on
    /// functions vanishing at both endpoints.
    weight: f64,
}

impl SineBasis {
    pub fn new(domain: &DomainSpec, grid_size: usize) -> Result<Self, SpectralError> {
        let n = domain.mode_count;
        let need = 2 * n + 1;
        if grid_size < need {
            return Err(SpectralError::GridTooCoarse { got: grid_size, modes: n, need });
        }
        let len = domain.length;
        let scale = (2.0 / len).sqrt();
        let g1 = (grid_size + 1) as f64;
        let table = (1..=n)
            .map(|j| {
                (1..=grid_size)
                    .map(|i| scale * (j as f64 * std::f64::consts::PI * i as f64 / g1).sin())
                    .collect()
            })
            .collect();
        Ok(Self { length: len, n_modes: n, grid_size, table, weight: len / g1 })
    }

    /// Grid nodes `x_i`, `i = 1..=grid_size`.
    pub fn nodes(&self) -> Vec<f64> {
        let g1 = (self.grid_size + 1) as f64;
        (1..=self.grid_size).map(|i| self.length * i as f64 / g1).collect()
    }

    /// Evaluate the coefficient vector on the grid.
    pub fn synth(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut vals = vec![0.0; self.grid_size];
        for (c, row) in coeffs.iter().zip(&self.table) {
            if *c == 0.0 {
                continue;
            }
            for (v, w) in vals.iter_mut().zip(row) {
                *v += c * w;
            }
        }
        vals
    }

    /// Project grid values onto the first `n_modes` coefficients.
    pub fn analyze(&self, vals: &[f64]) -> Vec<f64> {
        self.table
            .iter()
            .map(|row| self.weight * row.iter().zip(vals).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }

    /// Transform -> pointwise map -> inverse transform.
    pub fn project_fn(&self, coeffs: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut vals = self.synth(coeffs);
        for v in &mut vals {
            *v = f(*v);
        }
        self.analyze(&vals)
    }
}

/// Pseudo-spectral evaluation of `fn(u(x))`, one-shot API.
pub fn apply_pointwise(
    field: &SpectralField,
    domain: &DomainSpec,
    f: impl Fn(f64) -> f64,
    grid_size: usize,
) -> Result<SpectralField, SpectralError> {
    let basis = SineBasis::new(domain, grid_size)?;
    Ok(SpectralField::new(basis.project_fn(&field.coeffs, f), field.time))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::DomainSpec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn domain(len: f64, n: usize) -> DomainSpec {
        DomainSpec { length: len, mode_count: n }
    }

    #[test]
    fn eigenvalues_analytic() {
        let e = eigenvalues(&domain(PI, 3));
        assert_relative_eq!(e.lambda[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(e.lambda[2], 9.0, max_relative = 1e-14);
        let e2 = eigenvalues(&domain(2.0 * PI, 2));
        assert_relative_eq!(e2.lambda[1], 1.0, max_relative = 1e-14);
        assert!(e.lambda.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn norms_single_modes() {
        let d = domain(PI, 2);
        let e = eigenvalues(&d);
        // u = w_1, eps = 1
        let b = norms(&SpectralField::new(vec![1.0, 0.0], 0.0), &e, 1.0);
        assert_relative_eq!(b.l2_sq, 1.0, max_relative = 1e-14);
        assert_relative_eq!(b.grad_sq, 1.0, max_relative = 1e-14);
        assert_relative_eq!(b.lap_sq, 1.0, max_relative = 1e-14);
        assert_relative_eq!(b.hminus1_sq, 1.0, max_relative = 1e-14);
        assert_relative_eq!(b.ht_sq, 2.0, max_relative = 1e-14);
        assert_relative_eq!(b.ht1_sq, 2.0, max_relative = 1e-14);
        // u = w_2 on L = pi, eps = 0.5: lambda_2 = 4
        let b2 = norms(&SpectralField::new(vec![0.0, 1.0], 0.0), &e, 0.5);
        assert_relative_eq!(b2.l2_sq, 1.0, max_relative = 1e-14);
        assert_relative_eq!(b2.grad_sq, 4.0, max_relative = 1e-14);
        assert_relative_eq!(b2.ht_sq, 3.0, max_relative = 1e-14);
        assert_relative_eq!(b2.hminus1_sq, 0.25, max_relative = 1e-14);
        // zero field
        let z = norms(&SpectralField::zeros(2, 0.0), &e, 1.0);
        assert_eq!(z, NormBundle::default());
    }

    #[test]
    fn nonlocal_orthonormality() {
        // j = w_1, u = 2 w_1
        assert_relative_eq!(nonlocal_value(&[2.0, 0.0], &[1.0]), 2.0);
        // zero field
        assert_eq!(nonlocal_value(&[0.0, 0.0], &[1.0, 1.0]), 0.0);
        // disjoint mode support
        assert_eq!(nonlocal_value(&[0.0, 3.0], &[1.0, 0.0]), 0.0);
    }

    #[test]
    fn pointwise_identity_and_zero() {
        let d = domain(PI, 3);
        let u = SpectralField::new(vec![0.7, -0.3, 0.1], 0.0);
        let id = apply_pointwise(&u, &d, |x| x, 16).unwrap();
        for (a, b) in id.coeffs.iter().zip(&u.coeffs) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
        let z = apply_pointwise(&u, &d, |_| 0.0, 16).unwrap();
        assert!(z.coeffs.iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn grid_too_coarse_rejected() {
        let d = domain(PI, 3);
        let u = SpectralField::zeros(3, 0.0);
        let err = apply_pointwise(&u, &d, |x| x, 6).unwrap_err();
        assert_eq!(err, SpectralError::GridTooCoarse { got: 6, modes: 3, need: 7 });
    }

    /// Oracle: direct quadrature of the integrand on a fine independent grid.
    fn quadrature_coefficient(f: impl Fn(f64) -> f64, j: usize, len: f64) -> f64 {
        // Composite Simpson with many panels, independent of SineBasis.
        let n = 20_000;
        let h = len / n as f64;
        let scale = (2.0 / len).sqrt();
        let integrand =
            |x: f64| f(x) * scale * (j as f64 * std::f64::consts::PI * x / len).sin();
        let mut s = integrand(0.0) + integrand(len);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * integrand(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn cubic_of_single_mode_matches_trig_identity() {
        // sin^3(x) = (3 sin x - sin 3x)/4; with orthonormal scaling the
        // coefficients follow from direct quadrature of (c*w_1)^3.
        let d = domain(PI, 3);
        let c = 0.8;
        let u = SpectralField::new(vec![c, 0.0, 0.0], 0.0);
        let cube = apply_pointwise(&u, &d, |x| x * x * x, 16).unwrap();
        let scale = (2.0 / PI).sqrt();
        let f = |x: f64| (c * scale * x.sin()).powi(3);
        for j in 1..=3 {
            let expect = quadrature_coefficient(f, j, PI);
            assert_relative_eq!(cube.coeffs[j - 1], expect, epsilon = 1e-10);
        }
        // trig identity in orthonormal coefficients:
        // (c w_1)^3 = c^3 (2/pi)^(3/2) (3 sin - sin3)/4
        //           = (3 c^3 / (2 pi)) w_1 - (c^3 / (2 pi)) w_3
        assert_relative_eq!(cube.coeffs[0], 3.0 * c.powi(3) / (2.0 * PI), epsilon = 1e-12);
        assert_relative_eq!(cube.coeffs[2], -c.powi(3) / (2.0 * PI), epsilon = 1e-12);
        assert!(cube.coeffs[1].abs() < 1e-12);
    }

    proptest! {
        /// Parseval round-trip: synth then analyze reproduces coefficients.
        #[test]
        fn roundtrip(coeffs in proptest::collection::vec(-10.0f64..10.0, 1..8),
                     extra in 0usize..20) {
            let n = coeffs.len();
            let d = domain(PI, n);
            let basis = SineBasis::new(&d, 2 * n + 1 + extra).unwrap();
            let back = basis.analyze(&basis.synth(&coeffs));
            let norm: f64 = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
            for (a, b) in back.iter().zip(&coeffs) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + norm));
            }
        }

        /// Poincare: grad_sq >= lambda_1 * l2_sq.
        #[test]
        fn poincare(coeffs in proptest::collection::vec(-10.0f64..10.0, 1..8)) {
            let d = domain(2.3, coeffs.len());
            let e = eigenvalues(&d);
            let b = norms_of_coeffs(&coeffs, &e, 1.0);
            prop_assert!(b.grad_sq >= e.lambda1() * b.l2_sq - 1e-12 * (1.0 + b.grad_sq));
        }

        /// Duality (Cauchy-Schwarz in the eigenbasis):
        /// hminus1_sq * grad_sq >= l2_sq^2.
        #[test]
        fn duality(coeffs in proptest::collection::vec(-10.0f64..10.0, 1..8)) {
            let d = domain(1.7, coeffs.len());
            let e = eigenvalues(&d);
            let b = norms_of_coeffs(&coeffs, &e, 1.0);
            prop_assert!(b.hminus1_sq * b.grad_sq >= b.l2_sq * b.l2_sq * (1.0 - 1e-12));
        }

        /// Equality in Poincare iff only the first mode is populated.
        #[test]
        fn poincare_equality_first_mode(c in 0.1f64..10.0) {
            let d = domain(PI, 4);
            let e = eigenvalues(&d);
            let b = norms_of_coeffs(&[c, 0.0, 0.0, 0.0], &e, 1.0);
            prop_assert!((b.grad_sq - e.lambda1() * b.l2_sq).abs() < 1e-12 * b.grad_sq);
        }
    }
}
