//! Classical-trajectory limit: the internal state evolves under the laser
//! Hamiltonian for the transit time through each laser and under the bare
//! Hamiltonian in between.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::physics::{rabi_matrix_elements, Setup};

const G: usize = 0;
const E: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiclassicalInput {
    pub omega: f64,
    pub delta: f64,
    /// Transit time through the pi laser, l / v.
    pub tau: f64,
    /// Free flight time between lasers, L / v.
    pub t_free: f64,
    pub phases: [f64; 3],
}

impl SemiclassicalInput {
    pub fn new(omega: f64, delta: f64, tau: f64, t_free: f64, phases: [f64; 3]) -> Self {
        debug_assert!(tau > 0.0 && t_free >= 0.0);
        Self { omega, delta, tau, t_free, phases }
    }

    pub fn from_setup(setup: &Setup) -> Self {
        Self::new(setup.omega, setup.delta, setup.transit_time(), setup.free_time(), setup.phases)
    }

    /// Phi = phi1 - 2 phi2 + phi3.
    pub fn composite_phase(&self) -> f64 {
        self.phases[0] - 2.0 * self.phases[1] + self.phases[2]
    }
}

/// The four ground-to-excited path amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SclPathSet {
    pub a: [Complex64; 4],
}

impl SclPathSet {
    pub fn a1(&self) -> Complex64 {
        self.a[0]
    }
    pub fn a2(&self) -> Complex64 {
        self.a[1]
    }
    pub fn a3(&self) -> Complex64 {
        self.a[2]
    }
    pub fn a4(&self) -> Complex64 {
        self.a[3]
    }
}

fn bare_evolution(delta: f64, t: f64) -> Matrix2<Complex64> {
    Matrix2::new(
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::from_polar(1.0, delta * t),
    )
}

pub fn scl_path_amplitudes(input: &SemiclassicalInput) -> SclPathSet {
    let [p1, p2, p3] = input.phases;
    let (omega, delta, tau) = (input.omega, input.delta, input.tau);
    let free = bare_evolution(delta, input.t_free);

    let first = rabi_matrix_elements(delta, omega, 0.5 * tau, p1);
    let second = rabi_matrix_elements(delta, omega, tau, p2) * free;
    let third = rabi_matrix_elements(delta, omega, 0.5 * tau, p3) * free;

    SclPathSet {
        a: [
            third[(E, E)] * second[(E, E)] * first[(E, G)],
            third[(E, G)] * second[(G, E)] * first[(E, G)],
            third[(E, E)] * second[(E, G)] * first[(G, G)],
            third[(E, G)] * second[(G, G)] * first[(G, G)],
        ],
    }
}

/// Mach-Zehnder excitation probability |A2 + A3|^2.
pub fn scl_probability(input: &SemiclassicalInput) -> f64 {
    let paths = scl_path_amplitudes(input);
    (paths.a2() + paths.a3()).norm_sqr()
}

/// Closed form of the Mach-Zehnder probability in terms of Phi.
pub fn scl_probability_closed_form(omega: f64, delta: f64, tau: f64, phi: f64) -> f64 {
    let omega_prime = omega.hypot(delta);
    if omega == 0.0 {
        return 0.0;
    }
    let w2 = omega * omega;
    let d2 = delta * delta;
    let wp2 = omega_prime * omega_prime;
    let half = 0.5 * omega_prime * tau;
    let quarter_sin = (0.25 * omega_prime * tau).sin();

    let bracket = 4.0 * d2 * half.cos() + w2 * (omega_prime * tau).cos()
        - 4.0 * (d2 + wp2 + w2 * half.cos()) * quarter_sin * quarter_sin * phi.cos();
    let braces = 4.0 * d2 * wp2 + 3.0 * w2 * w2 + w2 * bracket;
    w2 / (4.0 * wp2 * wp2 * wp2) * half.sin().powi(2) * braces
}
