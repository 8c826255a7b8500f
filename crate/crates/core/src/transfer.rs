//! Transfer matrices of square laser barriers.
//!
//! Amplitude vectors are `(G+, G-, E+, E-)`, the coefficients of
//! `e^{+-i k_x x}|g>` and `e^{+-i q_x x}|e>` in absolute coordinates, so a
//! region without a laser has the identity as its transfer matrix. A transfer
//! matrix maps the amplitudes to the right of a region onto those to its left.

use std::ops::Mul;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::constants::{CONDITION_WARN, DENOMINATOR_FLOOR};
use crate::error::{Error, Result};
use crate::physics::{ChannelKinematics, LaserDrive, LaserGeometry};

pub type Mat4 = Matrix4<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Origin {
    Barrier { x_start: f64, x_end: f64, phi: f64 },
    Composite,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix4 {
    pub matrix: Mat4,
    pub origin: Origin,
}

impl TransferMatrix4 {
    pub fn identity() -> Self {
        Self { matrix: Mat4::identity(), origin: Origin::Identity }
    }

    pub fn composite(matrix: Mat4) -> Self {
        Self { matrix, origin: Origin::Composite }
    }

    /// 1-based entry access matching the usual T_ij notation.
    pub fn t(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i - 1, j - 1)]
    }
}

impl Mul for TransferMatrix4 {
    type Output = TransferMatrix4;

    fn mul(self, rhs: TransferMatrix4) -> TransferMatrix4 {
        TransferMatrix4::composite(self.matrix * rhs.matrix)
    }
}

pub fn max_abs(m: &Mat4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn one_norm(m: &Mat4) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Inverse with the closed-form cofactor expansion, falling back to a
/// partially pivoted LU. Ill-conditioned inputs are logged.
pub fn invert(m: &Mat4) -> Result<Mat4> {
    let inv = match m.try_inverse() {
        Some(inv) if inv.iter().all(|z| z.is_finite()) => inv,
        _ => m.lu().try_inverse().ok_or(Error::SingularMatrix)?,
    };
    let cond = one_norm(m) * one_norm(&inv);
    if !cond.is_finite() {
        return Err(Error::SingularMatrix);
    }
    if cond > CONDITION_WARN {
        log::warn!("4x4 inversion with condition number {cond:.3e}");
    }
    Ok(inv)
}

/// Maps free-region amplitudes to (g, e, g', e') at `x`.
pub fn free_matrix_m0(x: f64, kin: &ChannelKinematics) -> Mat4 {
    let k = Complex64::new(kin.k_x, 0.0);
    let q = Complex64::new(kin.q_x, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let (ekp, ekm) = ((I * k * x).exp(), (-I * k * x).exp());
    let (eqp, eqm) = ((I * q * x).exp(), (-I * q * x).exp());
    Mat4::new(
        ekp, ekm, zero, zero,
        zero, zero, eqp, eqm,
        I * k * ekp, -I * k * ekm, zero, zero,
        zero, zero, I * q * eqp, -I * q * eqm,
    )
}

/// Maps dressed-region amplitudes to (g, e, g', e') at `x`.
pub fn barrier_matrix_mb(x: f64, phi: f64, kin: &ChannelKinematics) -> Result<Mat4> {
    if kin.omega == 0.0 {
        return Err(Error::DegenerateBasis);
    }
    let phase = Complex64::from_polar(1.0, -phi);
    let cp = phase * (2.0 * kin.lambda_plus / kin.omega);
    let cm = phase * (2.0 * kin.lambda_minus / kin.omega);
    let (kp, km) = (kin.k_plus, kin.k_minus);
    let (ep, em) = ((I * kp * x).exp(), (-I * kp * x).exp());
    let (fp, fm) = ((I * km * x).exp(), (-I * km * x).exp());
    Ok(Mat4::new(
        ep, em, fp, fm,
        cp * ep, cp * em, cm * fp, cm * fm,
        I * kp * ep, -I * kp * em, I * km * fp, -I * km * fm,
        I * kp * cp * ep, -I * kp * cp * em, I * km * cm * fp, -I * km * cm * fm,
    ))
}

/// diag(e^{ikx}, e^{-ikx}, e^{iqx}, e^{-iqx}): M0(x) = M0(0) P(x).
fn free_phases(x: f64, kin: &ChannelKinematics) -> [Complex64; 4] {
    let ek = Complex64::from_polar(1.0, kin.k_x * x);
    let eq = Complex64::from_polar(1.0, kin.q_x * x);
    [ek, ek.conj(), eq, eq.conj()]
}

/// T(x1, x2, phi) = M0(x1)^-1 Mb(x1, phi) Mb(x2, phi)^-1 M0(x2).
///
/// Evaluated as P(x1)^-1 K(w) P(x1) with K(w) the same product for a barrier
/// of width w = x2 - x1 starting at the origin, so large k_x x phases only
/// enter through a diagonal similarity.
pub fn single_laser_transfer(x1: f64, x2: f64, phi: f64, kin: &ChannelKinematics) -> Result<TransferMatrix4> {
    if x2.partial_cmp(&x1) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidParameter(format!("barrier edges must increase: {x1} >= {x2}")));
    }
    if kin.omega == 0.0 {
        return Ok(TransferMatrix4::identity());
    }
    let width = x2 - x1;
    let local = invert(&free_matrix_m0(0.0, kin))?
        * barrier_matrix_mb(0.0, phi, kin)?
        * invert(&barrier_matrix_mb(width, phi, kin)?)?
        * free_matrix_m0(width, kin);

    let p = free_phases(x1, kin);
    let matrix = Mat4::from_fn(|i, j| local[(i, j)] * p[j] / p[i]);
    Ok(TransferMatrix4 { matrix, origin: Origin::Barrier { x_start: x1, x_end: x2, phi } })
}

/// Decorates a phase-free single-laser matrix with the laser phase: the
/// ground/excited off-diagonal blocks pick up e^{+i phi} (upper right) and
/// e^{-i phi} (lower left).
pub fn apply_phase_factorization(tilde: &TransferMatrix4, phi: f64) -> TransferMatrix4 {
    let up = Complex64::from_polar(1.0, phi);
    let matrix = Mat4::from_fn(|i, j| match (i < 2, j < 2) {
        (true, false) => tilde.matrix[(i, j)] * up,
        (false, true) => tilde.matrix[(i, j)] * up.conj(),
        _ => tilde.matrix[(i, j)],
    });
    let origin = match tilde.origin {
        Origin::Barrier { x_start, x_end, phi: base } => Origin::Barrier { x_start, x_end, phi: base + phi },
        other => other,
    };
    TransferMatrix4 { matrix, origin }
}

/// The three single-laser matrices, in beam order.
pub fn laser_matrices(geom: &LaserGeometry, drive: &LaserDrive, kin: &ChannelKinematics) -> Result<[TransferMatrix4; 3]> {
    let build = |n: usize| {
        let (x1, x2) = geom.span(n);
        single_laser_transfer(x1, x2, drive.phases[n], kin)
    };
    Ok([build(0)?, build(1)?, build(2)?])
}

/// T(1) T(2) T(3) for the full interferometer.
pub fn compose_interferometer(geom: &LaserGeometry, drive: &LaserDrive, kin: &ChannelKinematics) -> Result<TransferMatrix4> {
    let [t1, t2, t3] = laser_matrices(geom, drive, kin)?;
    Ok(t1 * t2 * t3)
}

/// Excited-state transmission amplitude for ground-state incidence from the left.
pub fn extract_transmission(total: &TransferMatrix4) -> Result<Complex64> {
    let denom = total.t(1, 3) * total.t(3, 1) - total.t(1, 1) * total.t(3, 3);
    if denom.norm() < DENOMINATOR_FLOOR {
        return Err(Error::SingularExtraction(denom.norm()));
    }
    Ok(total.t(3, 1) / denom)
}

/// Flux-weighted excitation probability (q_x / k_x) |T_ge|^2.
pub fn quantum_probability(t_ge: Complex64, kin: &ChannelKinematics) -> f64 {
    kin.flux_weight() * t_ge.norm_sqr()
}

/// Like [`quantum_probability`], but a closed excited channel reports zero.
pub fn reported_probability(t_ge: Result<Complex64>, kin: Result<ChannelKinematics>) -> Result<f64> {
    match (t_ge, kin) {
        (_, Err(Error::ClosedChannel { .. })) | (Err(Error::ClosedChannel { .. }), _) => Ok(0.0),
        (Ok(t), Ok(k)) => Ok(quantum_probability(t, &k)),
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

/// Piecewise solution for ground-state incidence from the left.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    /// Free-region amplitudes `(G+, G-, E+, E-)`, left to right.
    pub free: [Vector4<Complex64>; 4],
    /// Dressed-wave amplitudes inside each laser, with plane waves measured
    /// from the laser's left edge.
    pub dressed: [Vector4<Complex64>; 3],
    geometry: LaserGeometry,
    phases: [f64; 3],
    kin: ChannelKinematics,
}

/// Rebuilds the wavefunction in all seven regions from the outgoing waves
/// `(T_gg, 0, T_ge, 0)` behind the third laser.
pub fn reconstruct_wavefunction(geom: &LaserGeometry, drive: &LaserDrive, kin: &ChannelKinematics) -> Result<Wavefunction> {
    if kin.omega == 0.0 {
        return Err(Error::DegenerateBasis);
    }
    let lasers = laser_matrices(geom, drive, kin)?;
    let total = lasers[0] * lasers[1] * lasers[2];
    let denom = total.t(1, 3) * total.t(3, 1) - total.t(1, 1) * total.t(3, 3);
    if denom.norm() < DENOMINATOR_FLOOR {
        return Err(Error::SingularExtraction(denom.norm()));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut free = [Vector4::zeros(); 4];
    free[3] = Vector4::new(-total.t(3, 3) / denom, zero, total.t(3, 1) / denom, zero);
    for n in (0..3).rev() {
        free[n] = lasers[n].matrix * free[n + 1];
    }
    let mut dressed = [Vector4::zeros(); 3];
    for (n, slot) in dressed.iter_mut().enumerate() {
        let (x1, x2) = geom.span(n);
        let w = x2 - x1;
        let right = free_matrix_m0(w, kin) * shifted(&free[n + 1], x1, kin);
        *slot = invert(&barrier_matrix_mb(w, drive.phases[n], kin)?)? * right;
    }
    Ok(Wavefunction { free, dressed, geometry: *geom, phases: drive.phases, kin: *kin })
}

/// Re-expresses absolute-convention amplitudes relative to origin `x0`.
fn shifted(v: &Vector4<Complex64>, x0: f64, kin: &ChannelKinematics) -> Vector4<Complex64> {
    let p = free_phases(x0, kin);
    Vector4::new(v[0] * p[0], v[1] * p[1], v[2] * p[2], v[3] * p[3])
}

impl Wavefunction {
    /// (g, e, g', e') just outside (`free`) and just inside (`dressed`) each
    /// of the six edges, derivatives divided by k_x.
    pub fn edge_values(&self) -> Vec<(Vector4<Complex64>, Vector4<Complex64>)> {
        let scale = Vector4::new(1.0, 1.0, 1.0 / self.kin.k_x, 1.0 / self.kin.k_x).map(Complex64::from);
        let mut out = Vec::with_capacity(6);
        for n in 0..3 {
            let (x1, x2) = self.geometry.span(n);
            let w = x2 - x1;
            let phi = self.phases[n];
            let mb0 = barrier_matrix_mb(0.0, phi, &self.kin).expect("non-zero field");
            let mbw = barrier_matrix_mb(w, phi, &self.kin).expect("non-zero field");
            let outside_left = free_matrix_m0(0.0, &self.kin) * shifted(&self.free[n], x1, &self.kin);
            let outside_right = free_matrix_m0(w, &self.kin) * shifted(&self.free[n + 1], x1, &self.kin);
            out.push((outside_left.component_mul(&scale), (mb0 * self.dressed[n]).component_mul(&scale)));
            out.push((outside_right.component_mul(&scale), (mbw * self.dressed[n]).component_mul(&scale)));
        }
        out
    }

    /// Largest relative jump of (g, e, g', e') across any edge, together with
    /// the deviation of the incoming wave from a unit ground-state wave.
    pub fn matching_residual(&self) -> f64 {
        let vmax = |v: &Vector4<Complex64>| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let edges = self
            .edge_values()
            .iter()
            .map(|(a, b)| vmax(&(a - b)) / vmax(a).max(vmax(b)).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        let incoming = (self.free[0][0] - 1.0).norm().max(self.free[0][2].norm());
        edges.max(incoming)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::SODIUM_MASS;
    use crate::physics::Setup;
    use std::f64::consts::PI;

    fn reference_kin() -> (Setup, ChannelKinematics) {
        let s = Setup::reference();
        (s, s.kinematics().unwrap())
    }

    fn close(a: &Mat4, b: &Mat4) -> f64 {
        max_abs(&(a - b)) / max_abs(a).max(max_abs(b)).max(1.0)
    }

    #[test]
    fn m0_at_origin() {
        let (_, kin) = reference_kin();
        let m = free_matrix_m0(0.0, &kin);
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(m[(0, 0)], one);
        assert_eq!(m[(1, 3)], one);
        assert_eq!(m[(2, 1)], -I * kin.k_x);
        assert_eq!(m[(3, 2)], I * kin.q_x);
        assert!(m.determinant().norm() > 0.0);
    }

    #[test]
    fn m0_first_column_is_forward_ground_wave() {
        let (_, kin) = reference_kin();
        let x = 3.7e-6;
        let col = free_matrix_m0(x, &kin) * Vector4::new(Complex64::new(1.0, 0.0), 0.0.into(), 0.0.into(), 0.0.into());
        let e = Complex64::from_polar(1.0, kin.k_x * x);
        assert!((col[0] - e).norm() < 1e-15);
        assert_eq!(col[1], Complex64::new(0.0, 0.0));
        assert!((col[2] - I * kin.k_x * e).norm() < 1e-15 * kin.k_x);
        assert_eq!(col[3], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn mb_excited_row_at_origin() {
        let kin = ChannelKinematics::new(SODIUM_MASS, 3.6e6, 3000.0, 700.0).unwrap();
        let m = barrier_matrix_mb(0.0, 0.0, &kin).unwrap();
        assert_eq!(m[(1, 0)].re, 2.0 * kin.lambda_plus / kin.omega);
        assert_eq!(m[(1, 2)].re, 2.0 * kin.lambda_minus / kin.omega);

        let (_, res) = reference_kin();
        let m = barrier_matrix_mb(0.0, 0.0, &res).unwrap();
        let row: Vec<f64> = (0..4).map(|j| m[(1, j)].re).collect();
        assert_eq!(row, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn mb_is_two_pi_periodic_in_phase() {
        let (_, kin) = reference_kin();
        let a = barrier_matrix_mb(1e-6, 0.4, &kin).unwrap();
        let b = barrier_matrix_mb(1e-6, 0.4 + 2.0 * PI, &kin).unwrap();
        assert!(close(&a, &b) < 1e-14);
    }

    #[test]
    fn mb_needs_a_field() {
        let kin = ChannelKinematics::new(SODIUM_MASS, 3.6e6, 0.0, 0.0).unwrap();
        assert_eq!(barrier_matrix_mb(0.0, 0.0, &kin), Err(Error::DegenerateBasis));
    }

    #[test]
    fn absent_barrier_is_identity() {
        let kin = ChannelKinematics::new(SODIUM_MASS, 3.6e6, 0.0, 0.0).unwrap();
        let t = single_laser_transfer(0.0, 1e-5, 0.3, &kin).unwrap();
        assert_eq!(t.matrix, Mat4::identity());
    }

    #[test]
    fn zero_width_limit_is_identity() {
        let (_, kin) = reference_kin();
        let t = single_laser_transfer(2e-3, 2e-3 + 1e-15, 0.3, &kin).unwrap();
        assert!(close(&t.matrix, &Mat4::identity()) < 1e-6);
        assert!(single_laser_transfer(1.0, 1.0, 0.0, &kin).is_err());
    }

    #[test]
    fn agrees_with_the_literal_matrix_product() {
        let (s, kin) = reference_kin();
        let (x1, x2) = s.geometry.span(1);
        let literal = invert(&free_matrix_m0(x1, &kin)).unwrap()
            * barrier_matrix_mb(x1, 0.9, &kin).unwrap()
            * invert(&barrier_matrix_mb(x2, 0.9, &kin).unwrap()).unwrap()
            * free_matrix_m0(x2, &kin);
        let t = single_laser_transfer(x1, x2, 0.9, &kin).unwrap();
        assert!(close(&t.matrix, &literal) < 1e-9);
    }

    /// Solves the two matching conditions for ground incidence from the left
    /// as one 8x8 linear system (unknowns: r_gg, r_ge, four inner amplitudes,
    /// t_gg, t_ge).
    fn matching_solve(x1: f64, x2: f64, phi: f64, kin: &ChannelKinematics) -> (Complex64, Complex64) {
        use nalgebra::{DMatrix, DVector};
        let m0a = free_matrix_m0(x1, kin);
        let mba = barrier_matrix_mb(x1, phi, kin).unwrap();
        let mbb = barrier_matrix_mb(x2, phi, kin).unwrap();
        let m0b = free_matrix_m0(x2, kin);
        let mut a = DMatrix::<Complex64>::zeros(8, 8);
        let mut b = DVector::<Complex64>::zeros(8);
        for r in 0..4 {
            // M0(x1)(1, rgg, 0, rge) - Mb(x1) v = 0
            b[r] = -m0a[(r, 0)];
            a[(r, 0)] = m0a[(r, 1)];
            a[(r, 1)] = m0a[(r, 3)];
            for c in 0..4 {
                a[(r, 2 + c)] = -mba[(r, c)];
                a[(4 + r, 2 + c)] = mbb[(r, c)];
            }
            // Mb(x2) v - M0(x2)(tgg, 0, tge, 0) = 0
            a[(4 + r, 6)] = -m0b[(r, 0)];
            a[(4 + r, 7)] = -m0b[(r, 2)];
        }
        let sol = a.lu().solve(&b).unwrap();
        (sol[6], sol[7])
    }

    #[test]
    fn first_laser_matches_direct_linear_solve() {
        let (s, kin) = reference_kin();
        let (x1, x2) = s.geometry.span(0);
        let t = single_laser_transfer(x1, x2, 0.0, &kin).unwrap();
        let f = t.t(1, 3) * t.t(3, 1) - t.t(1, 1) * t.t(3, 3);
        let (tgg, tge) = matching_solve(x1, x2, 0.0, &kin);
        assert!((tge - t.t(3, 1) / f).norm() < 1e-10);
        assert!((tgg + t.t(3, 3) / f).norm() < 1e-10);
    }

    #[test]
    fn phase_factorization_matches_direct_construction() {
        let kin = ChannelKinematics::new(SODIUM_MASS, 2e6, 4000.0, -900.0).unwrap();
        let tilde = single_laser_transfer(3e-5, 4.1e-5, 0.0, &kin).unwrap();
        for phi in [0.3, -2.0, 3.1] {
            let direct = single_laser_transfer(3e-5, 4.1e-5, phi, &kin).unwrap();
            let decorated = apply_phase_factorization(&tilde, phi);
            assert!(close(&direct.matrix, &decorated.matrix) < 1e-12);
        }
        assert_eq!(apply_phase_factorization(&tilde, 0.0).matrix, tilde.matrix);
        let back = apply_phase_factorization(&apply_phase_factorization(&tilde, 0.8), -0.8);
        assert!(close(&back.matrix, &tilde.matrix) < 1e-15);
    }

    #[test]
    fn composition_with_absent_lasers() {
        let s = Setup::reference().with_omega(0.0);
        let kin = s.kinematics().unwrap();
        let total = compose_interferometer(&s.geometry, &s.drive().unwrap(), &kin).unwrap();
        assert_eq!(total.matrix, Mat4::identity());
        assert_eq!(extract_transmission(&total).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn single_active_laser_equals_its_matrix() {
        let (s, kin) = reference_kin();
        let (x1, x2) = s.geometry.span(1);
        let laser = single_laser_transfer(x1, x2, 0.2, &kin).unwrap();
        let product = TransferMatrix4::identity() * laser * TransferMatrix4::identity();
        assert_eq!(product.matrix, laser.matrix);
    }

    #[test]
    fn composition_is_associative() {
        let (s, kin) = reference_kin();
        let [a, b, c] = laser_matrices(&s.geometry, &LaserDrive::new(s.omega, [0.1, 0.7, -1.2]).unwrap(), &kin).unwrap();
        let left = (a * b) * c;
        let right = a * (b * c);
        assert!(close(&left.matrix, &right.matrix) < 1e-12);
    }

    #[test]
    fn resonant_direct_probability_is_positive_at_zero_phase() {
        let (s, kin) = reference_kin();
        let total = compose_interferometer(&s.geometry, &s.drive().unwrap(), &kin).unwrap();
        let p = quantum_probability(extract_transmission(&total).unwrap(), &kin);
        assert!(p > 0.0 && p < 1e-3, "p = {p}");
    }

    #[test]
    fn flux_weight_in_probability() {
        let kin = ChannelKinematics::new(SODIUM_MASS, 3.6e6, 3000.0, 0.0).unwrap();
        assert_eq!(quantum_probability(Complex64::new(0.0, 0.0), &kin), 0.0);
        assert_eq!(quantum_probability(Complex64::new(0.6, 0.0), &kin), 0.36);
        let blue = ChannelKinematics::new(SODIUM_MASS, 3.6e6, 3000.0, 500.0).unwrap();
        assert!(blue.flux_weight() > 1.0);
    }

    #[test]
    fn closed_channel_reports_zero() {
        let closed = ChannelKinematics::new(SODIUM_MASS, 1e3, 1.0, -1e9);
        assert_eq!(reported_probability(Ok(Complex64::new(1.0, 0.0)), closed), Ok(0.0));
    }

    #[test]
    fn singular_extraction_is_an_error() {
        let zero = TransferMatrix4::composite(Mat4::zeros());
        assert!(matches!(extract_transmission(&zero), Err(Error::SingularExtraction(_))));
    }

    #[test]
    fn reconstructed_wavefunction_is_smooth() {
        let (s, kin) = reference_kin();
        let wf = reconstruct_wavefunction(&s.geometry, &LaserDrive::new(s.omega, [0.4, -0.2, 1.1]).unwrap(), &kin).unwrap();
        assert!(wf.matching_residual() < 1e-9, "{}", wf.matching_residual());
        assert_eq!(wf.free[3][1], Complex64::new(0.0, 0.0));
        let mut broken = wf.clone();
        broken.dressed[1][0] *= 1.0 + 1e-6;
        assert!(broken.matching_residual() > 1e-8);
    }

    #[test]
    fn identity_extraction_is_zero() {
        assert_eq!(extract_transmission(&TransferMatrix4::identity()).unwrap(), Complex64::new(0.0, 0.0));
    }
}
