//! Physical inputs, the 3D -> 1D reduction, channel kinematics and the
//! time-domain Rabi propagator of a single laser region.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::constants::{DEFAULT_GAP, HBAR, SODIUM_MASS};
use crate::error::{Error, Result};

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Square root on the branch used for every wavenumber: non-negative real part
/// for positive arguments, positive imaginary part for negative ones.
pub fn branch_sqrt(x: f64) -> Complex64 {
    if x >= 0.0 {
        Complex64::new(x.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-x).sqrt())
    }
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

/// Incident atom and laser wavevector in three dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomSpec {
    pub mass: f64,
    pub k_x: f64,
    pub k_y: f64,
    /// Evolves freely; carried for completeness.
    pub k_z: f64,
    pub k_l: f64,
    /// Laser minus transition frequency, rad/s.
    pub delta0: f64,
}

impl AtomSpec {
    pub fn new(mass: f64, k_x: f64, k_y: f64, k_z: f64, k_l: f64, delta0: f64) -> Result<Self> {
        let spec = Self { mass, k_x, k_y, k_z, k_l, delta0 };
        require([mass, k_x, k_y, k_z, k_l, delta0].iter().all(|v| v.is_finite()), || {
            "atom parameters must be finite".into()
        })?;
        require(mass > 0.0, || format!("mass must be positive, got {mass}"))?;
        require(k_x > 0.0, || format!("k_x must be positive, got {k_x}"))?;
        Ok(spec)
    }

    pub fn effective_detuning(&self) -> f64 {
        effective_detuning(self)
    }
}

/// Effective detuning: bare detuning minus the photon-recoil and Doppler terms.
pub fn effective_detuning(atom: &AtomSpec) -> f64 {
    let recoil = HBAR * atom.k_l * atom.k_l / (2.0 * atom.mass);
    let doppler = HBAR * atom.k_y * atom.k_l / atom.mass;
    atom.delta0 - recoil - doppler
}

/// Three square lasers: widths l/2, l, l/2 separated by free flights of length L.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserGeometry {
    /// Width of the pi laser (m); the pi/2 lasers are half as wide.
    pub width: f64,
    /// Free-flight distance between consecutive lasers (m).
    pub gap: f64,
}

impl LaserGeometry {
    pub fn new(width: f64, gap: f64) -> Result<Self> {
        require(width.is_finite() && width > 0.0, || format!("l must be positive, got {width}"))?;
        require(gap.is_finite() && gap > 0.0, || format!("L must be positive, got {gap}"))?;
        Ok(Self { width, gap })
    }

    /// Boundary coordinates x1..x6.
    pub fn edges(&self) -> [f64; 6] {
        let (l, gap) = (self.width, self.gap);
        [
            0.0,
            0.5 * l,
            gap + 0.5 * l,
            gap + 1.5 * l,
            2.0 * gap + 1.5 * l,
            2.0 * gap + 2.0 * l,
        ]
    }

    /// `(start, end)` of laser `n` (0-based).
    pub fn span(&self, n: usize) -> (f64, f64) {
        let e = self.edges();
        (e[2 * n], e[2 * n + 1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserDrive {
    /// Rabi frequency (rad/s).
    pub omega: f64,
    /// Laser phases, stored wrapped into (-pi, pi].
    pub phases: [f64; 3],
}

impl LaserDrive {
    pub fn new(omega: f64, phases: [f64; 3]) -> Result<Self> {
        require(omega.is_finite() && omega >= 0.0, || format!("Rabi frequency must be >= 0, got {omega}"))?;
        require(phases.iter().all(|p| p.is_finite()), || "laser phases must be finite".into())?;
        Ok(Self { omega, phases: phases.map(wrap_angle) })
    }

    /// Phi = phi1 - 2 phi2 + phi3.
    pub fn composite_phase(&self) -> f64 {
        self.phases[0] - 2.0 * self.phases[1] + self.phases[2]
    }
}

/// Wavenumbers of the free and dressed channels at fixed total energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelKinematics {
    pub mass: f64,
    pub omega: f64,
    pub delta: f64,
    pub k_x: f64,
    /// Excited-channel wavenumber outside the lasers. Real, since closed
    /// channels are rejected.
    pub q_x: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub k_plus: Complex64,
    pub k_minus: Complex64,
    pub omega_prime: f64,
}

/// Detuning at which the excited channel closes, -hbar k_x^2 / 2m.
pub fn critical_detuning(mass: f64, k_x: f64) -> f64 {
    -HBAR * k_x * k_x / (2.0 * mass)
}

/// Dressed energies (lambda_+, lambda_-) evaluated without cancellation.
pub fn dressed_energies(omega: f64, delta: f64) -> (f64, f64) {
    let omega_prime = omega.hypot(delta);
    if omega_prime == 0.0 {
        return (0.0, 0.0);
    }
    let half_omega_sq = 0.5 * omega * omega;
    if delta >= 0.0 {
        (half_omega_sq / (omega_prime + delta), -0.5 * (delta + omega_prime))
    } else {
        (0.5 * (omega_prime - delta), -half_omega_sq / (omega_prime - delta))
    }
}

impl ChannelKinematics {
    pub fn new(mass: f64, k_x: f64, omega: f64, delta: f64) -> Result<Self> {
        require(mass.is_finite() && mass > 0.0, || format!("mass must be positive, got {mass}"))?;
        require(k_x.is_finite() && k_x > 0.0, || format!("k_x must be positive, got {k_x}"))?;
        require(omega.is_finite() && omega >= 0.0, || format!("Rabi frequency must be >= 0, got {omega}"))?;
        require(delta.is_finite(), || "detuning must be finite".into())?;

        let critical = critical_detuning(mass, k_x);
        if delta <= critical {
            return Err(Error::ClosedChannel { delta, critical });
        }

        let scale = 2.0 * mass / HBAR;
        let k_sq = k_x * k_x;
        let q_x = if delta == 0.0 { k_x } else { (k_sq + scale * delta).sqrt() };
        let (lambda_plus, lambda_minus) = dressed_energies(omega, delta);

        Ok(Self {
            mass,
            omega,
            delta,
            k_x,
            q_x,
            lambda_plus,
            lambda_minus,
            k_plus: branch_sqrt(k_sq - scale * lambda_plus),
            k_minus: branch_sqrt(k_sq - scale * lambda_minus),
            omega_prime: omega.hypot(delta),
        })
    }

    /// q_x / k_x, the flux weight of the excited channel.
    pub fn flux_weight(&self) -> f64 {
        self.q_x / self.k_x
    }

    pub fn velocity(&self) -> f64 {
        HBAR * self.k_x / self.mass
    }
}

pub fn channel_kinematics(atom: &AtomSpec, drive: &LaserDrive, delta: f64) -> Result<ChannelKinematics> {
    ChannelKinematics::new(atom.mass, atom.k_x, drive.omega, delta)
}

/// `<i| exp(-i H_n t / hbar) |j>` for i, j in {g = 0, e = 1}, with
/// H_n = -hbar Delta |e><e| + (hbar Omega / 2)(e^{-i phi} sigma_+ + h.c.).
pub fn rabi_matrix_elements(delta: f64, omega: f64, t: f64, phi: f64) -> Matrix2<Complex64> {
    let omega_prime = omega.hypot(delta);
    if omega_prime == 0.0 {
        return Matrix2::identity();
    }
    let half = 0.5 * omega_prime * t;
    let (s, c) = half.sin_cos();
    let i = Complex64::i();
    let common = Complex64::from_polar(1.0, 0.5 * delta * t);
    let detuned = delta / omega_prime * s;
    let coupled = omega / omega_prime * s;

    let gg = common * Complex64::new(c, -detuned);
    let ee = common * Complex64::new(c, detuned);
    let eg = -i * common * Complex64::from_polar(coupled, -phi);
    let ge = -i * common * Complex64::from_polar(coupled, phi);
    Matrix2::new(gg, ge, eg, ee)
}

/// Everything needed to evaluate one point of the interferometer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setup {
    pub mass: f64,
    pub k_x: f64,
    pub geometry: LaserGeometry,
    pub omega: f64,
    pub delta: f64,
    pub phases: [f64; 3],
}

impl Setup {
    /// Sodium at 1 cm/s through a 10 um pi laser, exact pi-pulse, on resonance.
    pub fn reference() -> Self {
        let velocity = 0.01;
        let width = 10e-6;
        Self::from_velocity(SODIUM_MASS, velocity, LaserGeometry { width, gap: DEFAULT_GAP }, 0.0, 0.0)
    }

    /// Builds a setup with Omega = (pi + eps) v / l.
    pub fn from_velocity(mass: f64, velocity: f64, geometry: LaserGeometry, eps: f64, delta: f64) -> Self {
        let k_x = mass * velocity / HBAR;
        let omega = (PI + eps) * velocity / geometry.width;
        Self { mass, k_x, geometry, omega, delta, phases: [0.0; 3] }
    }

    pub fn velocity(&self) -> f64 {
        HBAR * self.k_x / self.mass
    }

    /// tau = l / v, the transit time through the pi laser.
    pub fn transit_time(&self) -> f64 {
        self.geometry.width / self.velocity()
    }

    /// T = L / v.
    pub fn free_time(&self) -> f64 {
        self.geometry.gap / self.velocity()
    }

    pub fn kx_l(&self) -> f64 {
        self.k_x * self.geometry.width
    }

    /// Omega l / v.
    pub fn pulse_area(&self) -> f64 {
        self.omega * self.transit_time()
    }

    pub fn with_pulse_offset(mut self, eps: f64) -> Self {
        self.omega = (PI + eps) / self.transit_time();
        self
    }

    /// Keeps l fixed, sets k_x = kx_l / l and restores the pi-pulse condition.
    pub fn with_kx_l(mut self, kx_l: f64) -> Self {
        self.k_x = kx_l / self.geometry.width;
        self.with_pulse_offset(0.0)
    }

    pub fn with_gap(mut self, gap: f64) -> Self {
        self.geometry.gap = gap;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_phases(mut self, phases: [f64; 3]) -> Self {
        self.phases = phases;
        self
    }

    /// Realizes Phi as (phi1, phi2, phi3) = (0, 0, Phi).
    pub fn with_composite_phase(self, phi: f64) -> Self {
        self.with_phases([0.0, 0.0, phi])
    }

    pub fn kinematics(&self) -> Result<ChannelKinematics> {
        ChannelKinematics::new(self.mass, self.k_x, self.omega, self.delta)
    }

    pub fn drive(&self) -> Result<LaserDrive> {
        LaserDrive::new(self.omega, self.phases)
    }

    pub fn validate(&self) -> Result<()> {
        LaserGeometry::new(self.geometry.width, self.geometry.gap)?;
        self.drive()?;
        self.kinematics().map(|_| ())
    }
}
