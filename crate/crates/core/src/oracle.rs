//! Closed-form single-qubit results.
//!
//! Everything here is scalar arithmetic on the three numbers that define a
//! qubit state. Nothing is shared with the matrix simulator, so the two can
//! cross-check each other.
//!
//! For `rho = [[r11, r12], [r21, r22]]` evolved by the general single-qubit gate
//! `U(phi, theta, omega)`, the zero-state probability is
//!
//! ```text
//! pi(theta, phi) = 1/2 + (r11 - r22)/2 cos(theta) - R sin(theta) cos(phi) - I sin(theta) sin(phi)
//! ```
//!
//! with `R = Re r12` and `I = Im r12`. Its extrema are `1/2 +- sqrt((r11 - r22)^2/4 + |r12|^2)`,
//! which are exactly the eigenvalues of `rho`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::DensityMatrix;

const VALIDITY_TOL: f64 = 1e-12;

/// A one-qubit density matrix as three scalars.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleQubitState {
    pub rho11: f64,
    pub rho22: f64,
    pub rho12: Complex64,
}

impl SingleQubitState {
    pub fn new(rho11: f64, rho22: f64, rho12: Complex64) -> Result<Self> {
        let trace_gap = (rho11 + rho22 - 1.0).abs();
        if trace_gap.is_nan() || trace_gap > VALIDITY_TOL {
            return Err(Error::InvalidState(format!("rho11 + rho22 = {}", rho11 + rho22)));
        }
        if rho11 < -VALIDITY_TOL || rho22 < -VALIDITY_TOL {
            return Err(Error::InvalidState("negative population".into()));
        }
        if rho11 * rho22 - rho12.norm_sqr() < -VALIDITY_TOL {
            return Err(Error::InvalidState("state is not positive semidefinite".into()));
        }
        Ok(Self { rho11, rho22, rho12 })
    }

    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        if rho.n_qubits() != 1 {
            return Err(Error::InvalidArgument(format!(
                "expected a one-qubit state, got {} qubits",
                rho.n_qubits()
            )));
        }
        let m = rho.matrix();
        Self::new(m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)])
    }

    #[inline]
    pub fn rho21(&self) -> Complex64 {
        self.rho12.conj()
    }

    /// `R = (rho12 + rho21) / 2`.
    #[inline]
    pub fn real_part(&self) -> f64 {
        self.rho12.re
    }

    /// `I = (rho12 - rho21) / 2i`.
    #[inline]
    pub fn imag_part(&self) -> f64 {
        self.rho12.im
    }

    #[inline]
    fn half_radius(&self) -> f64 {
        // rho12 rho21 = |rho12|^2 for a Hermitian state
        let delta = self.rho11 - self.rho22;
        (delta * delta / 4.0 + self.rho12.norm_sqr()).sqrt()
    }
}

/// Zero-state probability after the gate `U(phi, theta, omega)`; independent of `omega`.
pub fn pi_surface(s: &SingleQubitState, theta: f64, phi: f64) -> f64 {
    let (sin_t, cos_t) = theta.sin_cos();
    let (sin_p, cos_p) = phi.sin_cos();
    0.5 + (s.rho11 - s.rho22) / 2.0 * cos_t
        - s.real_part() * sin_t * cos_p
        - s.imag_part() * sin_t * sin_p
}

/// `(pi_minus, pi_plus)`.
pub fn pi_extrema(s: &SingleQubitState) -> (f64, f64) {
    let r = s.half_radius();
    (0.5 - r, 0.5 + r)
}

/// Roots of `det(rho - lambda I) = 0`, ascending.
pub fn eigenvalues_2x2(s: &SingleQubitState) -> (f64, f64) {
    // lambda^2 - lambda + (rho11 rho22 - |rho12|^2) = 0 with trace 1
    let delta = s.rho11 - s.rho22;
    let disc = (delta * delta / 4.0 + s.rho12.norm_sqr()).sqrt();
    (0.5 - disc, 0.5 + disc)
}

/// Off-diagonal entry `rho'_12` of the evolved state.
pub fn evolved_offdiag(s: &SingleQubitState, theta: f64, phi: f64, omega: f64) -> Complex64 {
    let (sin_t, cos_t) = theta.sin_cos();
    let e_phi = Complex64::from_polar(1.0, phi);
    let e_omega_inv = Complex64::from_polar(1.0, -omega);
    let delta = s.rho11 - s.rho22;
    e_omega_inv
        * (Complex64::new(delta / 2.0 * sin_t, 0.0) + s.rho12 * ((1.0 + cos_t) / 2.0) * e_phi.conj()
            - s.rho21() * ((1.0 - cos_t) / 2.0) * e_phi)
}

/// Angles `(theta*, phi*)` of one extremum of [`pi_surface`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtremumAngles {
    pub theta: f64,
    pub phi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extrema {
    /// Where `pi` attains `pi_minus`.
    pub minimum: ExtremumAngles,
    /// Where `pi` attains `pi_plus`.
    pub maximum: ExtremumAngles,
    /// Set when `rho12` vanishes: `phi` is then arbitrary and fixed to 0.
    pub degenerate: bool,
}

/// Stationary angles of the zero-state probability.
///
/// With `r = |rho12|`, `phi* = atan2(I, R)` reduces the surface to
/// `1/2 + (delta/2) cos(theta) - r sin(theta)`, whose minimum and maximum sit at
/// `(cos, sin) = (-delta/2, r)/h` and `(delta/2, -r)/h`, `h = sqrt(delta^2/4 + r^2)`.
pub fn extremum_angles(s: &SingleQubitState) -> Extrema {
    let r = s.rho12.norm();
    let delta = s.rho11 - s.rho22;
    let degenerate = r <= VALIDITY_TOL;
    let phi = if degenerate {
        0.0
    } else {
        s.imag_part().atan2(s.real_part())
    };
    let (minimum, maximum) = if degenerate {
        // sin(theta) = 0: theta = 0 keeps the populations, theta = pi swaps them.
        let keep = ExtremumAngles { theta: 0.0, phi };
        let swap = ExtremumAngles {
            theta: std::f64::consts::PI,
            phi,
        };
        if delta <= 0.0 {
            (keep, swap)
        } else {
            (swap, keep)
        }
    } else {
        let h = (delta * delta / 4.0 + r * r).sqrt();
        let min_theta = (r / h).atan2(-delta / 2.0 / h);
        let max_theta = (-r / h).atan2(delta / 2.0 / h);
        (
            ExtremumAngles { theta: min_theta, phi },
            ExtremumAngles { theta: max_theta, phi },
        )
    };
    Extrema {
        minimum,
        maximum,
        degenerate,
    }
}
