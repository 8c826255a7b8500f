//! Fringe scans P(Phi), phase-shift extraction, visibility, the pulse-area
//! offset at which the two interferometer arms balance, velocity sweeps and
//! the Doppler check.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par::{map_collect, ExecPolicy};
use crate::paths::{direct_transmission, mz_transmission, PathDecomposition};
use crate::physics::{wrap_angle, ChannelKinematics, Setup};
use crate::semiclassical::{scl_path_amplitudes, scl_probability, SemiclassicalInput};
use crate::transfer::{apply_phase_factorization, extract_transmission, laser_matrices, quantum_probability, TransferMatrix4};

pub const DEFAULT_POINTS: usize = 1001;
/// Minima closer than this in value are indistinguishable.
pub const AMBIGUITY_TOLERANCE: f64 = 1e-12;
pub const MINIMIZER_TOLERANCE: f64 = 1e-10;
pub const ROOT_TOLERANCE: f64 = 1e-10;
/// Below this k_x l the exact shift oscillates on scales finer than any
/// practical grid; such sweep points are flagged.
pub const WILD_REGIME_KXL: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Semiclassical,
    QuantumExact,
    QuantumDirect,
    QuantumMz,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Semiclassical, Mode::QuantumExact, Mode::QuantumMz, Mode::QuantumDirect];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Semiclassical => "semiclassical",
            Mode::QuantumExact => "quantum-exact",
            Mode::QuantumDirect => "quantum-direct",
            Mode::QuantumMz => "quantum-mz",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Precomputed evaluator of P(Phi) with Phi realized as (0, 0, Phi).
#[derive(Debug, Clone)]
pub enum FringeModel {
    Semiclassical(SemiclassicalInput),
    Exact { head: TransferMatrix4, tail: TransferMatrix4, kin: ChannelKinematics },
    Direct { dec: PathDecomposition, weight: f64 },
    Mz { dec: PathDecomposition, weight: f64 },
    /// Closed excited channel: nothing is transmitted.
    Closed,
}

impl FringeModel {
    pub fn new(setup: &Setup, mode: Mode) -> Result<Self> {
        let base = setup.with_phases([0.0; 3]);
        if mode == Mode::Semiclassical {
            return Ok(FringeModel::Semiclassical(SemiclassicalInput::from_setup(&base)));
        }
        let kin = match base.kinematics() {
            Ok(kin) => kin,
            Err(Error::ClosedChannel { .. }) => return Ok(FringeModel::Closed),
            Err(e) => return Err(e),
        };
        let [t1, t2, t3] = laser_matrices(&base.geometry, &base.drive()?, &kin)?;
        Ok(match mode {
            Mode::QuantumExact => FringeModel::Exact { head: t1 * t2, tail: t3, kin },
            Mode::QuantumDirect => FringeModel::Direct {
                dec: PathDecomposition::from_matrices(&[t1, t2, t3], [0.0; 3])?,
                weight: kin.flux_weight(),
            },
            Mode::QuantumMz => {
                FringeModel::Mz { dec: PathDecomposition::from_matrices(&[t1, t2, t3], [0.0; 3])?, weight: kin.flux_weight() }
            }
            Mode::Semiclassical => unreachable!(),
        })
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, FringeModel::Closed)
    }

    pub fn probability(&self, phi: f64) -> Result<f64> {
        match self {
            FringeModel::Semiclassical(input) => {
                let mut input = *input;
                input.phases = [0.0, 0.0, phi];
                Ok(scl_probability(&input))
            }
            FringeModel::Exact { head, tail, kin } => {
                let total = *head * apply_phase_factorization(tail, phi);
                Ok(quantum_probability(extract_transmission(&total)?, kin))
            }
            FringeModel::Direct { dec, weight } => Ok(weight * direct_transmission(dec, [0.0, 0.0, phi]).norm_sqr()),
            FringeModel::Mz { dec, weight } => Ok(weight * mz_transmission(dec, [0.0, 0.0, phi]).norm_sqr()),
            FringeModel::Closed => Ok(0.0),
        }
    }

    /// The two phase-free arm amplitudes (X, Y) with P = w |e^{-i Phi} X + Y|^2,
    /// when the model has that structure.
    pub fn arms(&self) -> Option<(Complex64, Complex64)> {
        match self {
            FringeModel::Semiclassical(input) => {
                let paths = scl_path_amplitudes(input);
                Some((paths.a2(), paths.a3()))
            }
            FringeModel::Direct { dec, .. } => Some((dec.a(2), dec.a(3))),
            FringeModel::Mz { dec, .. } => Some(dec.mz_arms()),
            FringeModel::Exact { .. } | FringeModel::Closed => None,
        }
    }
}

/// Uniform grid of `n` points on [-pi, pi], endpoints included.
pub fn phase_grid(n: usize) -> Vec<f64> {
    let step = 2.0 * PI / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { PI } else { -PI + step * i as f64 }).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FringeScan {
    pub grid: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub mode: Mode,
    pub closed_channel: bool,
}

impl FringeScan {
    pub fn argmin(&self) -> usize {
        argmin(&self.probabilities)
    }

    pub fn min_value(&self) -> f64 {
        self.probabilities.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.probabilities.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn argmin(values: &[f64]) -> usize {
    values.iter().enumerate().fold(0, |best, (i, &v)| if v < values[best] { i } else { best })
}

pub fn fringe_scan(setup: &Setup, mode: Mode, n_points: usize) -> Result<FringeScan> {
    fringe_scan_with(setup, mode, n_points, ExecPolicy::default())
}

pub fn fringe_scan_with(setup: &Setup, mode: Mode, n_points: usize, policy: ExecPolicy) -> Result<FringeScan> {
    if n_points < 3 {
        return Err(Error::InvalidParameter(format!("a fringe scan needs at least 3 points, got {n_points}")));
    }
    let model = FringeModel::new(setup, mode)?;
    let grid = phase_grid(n_points);
    let probabilities = map_collect(policy, &grid, |&phi| model.probability(phi)).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(FringeScan { grid, probabilities, mode, closed_channel: model.is_closed() })
}

/// (Pmax - Pmin) / (Pmax + Pmin).
pub fn visibility(scan: &FringeScan) -> Result<f64> {
    if scan.probabilities.is_empty() {
        return Err(Error::InvalidParameter("empty scan".into()));
    }
    visibility_from(scan.min_value(), scan.max_value())
}

fn visibility_from(p_min: f64, p_max: f64) -> Result<f64> {
    if p_max <= 0.0 {
        return Err(Error::Undefined);
    }
    Ok((p_max - p_min) / (p_max + p_min))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftMethod {
    ArgRatio,
    NumericMin,
}

impl ShiftMethod {
    pub fn name(self) -> &'static str {
        match self {
            ShiftMethod::ArgRatio => "arg-ratio",
            ShiftMethod::NumericMin => "numeric-min",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftResult {
    /// Primary estimate of the fringe displacement, in (-pi, pi].
    pub delta_phi: f64,
    pub method: ShiftMethod,
    pub arg_ratio: Option<f64>,
    pub numeric: f64,
    pub min_value: f64,
    pub visibility: f64,
}

/// arg(X / Y) - pi, wrapped: the Phi at which e^{-i Phi} X and Y are opposed.
pub fn arg_ratio_shift(x: Complex64, y: Complex64) -> f64 {
    wrap_angle((x / y).arg() - PI)
}

/// Golden-section search for a minimum of `f` on [a, b].
pub fn golden_section<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Indices of the local minima of a periodic sampling whose last point
/// repeats the first.
fn local_minima(values: &[f64]) -> Vec<usize> {
    let n = values.len() - 1;
    (0..n)
        .filter(|&i| {
            let prev = values[(i + n - 1) % n];
            let next = values[(i + 1) % n];
            values[i] <= prev && values[i] < next
        })
        .collect()
}

/// Refined minimum of a periodic scan of `f`: golden section seeded at the
/// grid minimum.
pub fn refine_minimum<F>(f: F, scan: &FringeScan) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let minima = local_minima(&scan.probabilities);
    let best = scan.min_value();
    let near = minima.iter().filter(|&&i| scan.probabilities[i] - best < AMBIGUITY_TOLERANCE).count();
    if minima.is_empty() || near > 1 {
        let count = if minima.is_empty() { scan.grid.len() - 1 } else { near };
        return Err(Error::AmbiguousMinimum { count, tolerance: AMBIGUITY_TOLERANCE });
    }
    let i = scan.argmin();
    let step = scan.grid[1] - scan.grid[0];
    let center = scan.grid[i];
    let phi = golden_section(f, center - step, center + step, MINIMIZER_TOLERANCE)?;
    Ok(wrap_angle(phi))
}

pub fn phase_shift(setup: &Setup, mode: Mode) -> Result<ShiftResult> {
    phase_shift_with(setup, mode, DEFAULT_POINTS, ExecPolicy::Sequential)
}

pub fn phase_shift_with(setup: &Setup, mode: Mode, n_points: usize, policy: ExecPolicy) -> Result<ShiftResult> {
    let model = FringeModel::new(setup, mode)?;
    if model.is_closed() {
        return Err(setup.kinematics().expect_err("closed channel"));
    }
    let grid = phase_grid(n_points);
    let probabilities = map_collect(policy, &grid, |&phi| model.probability(phi)).into_iter().collect::<Result<Vec<_>>>()?;
    let scan = FringeScan { grid, probabilities, mode, closed_channel: false };

    let numeric = refine_minimum(|p| model.probability(p), &scan)?;
    let arg_ratio = model.arms().map(|(x, y)| arg_ratio_shift(x, y));
    let (delta_phi, method) = match arg_ratio {
        Some(a) => (a, ShiftMethod::ArgRatio),
        None => (numeric, ShiftMethod::NumericMin),
    };
    let min_value = model.probability(delta_phi)?.min(scan.min_value());
    let max_value = model.probability(wrap_angle(delta_phi + PI))?.max(scan.max_value());
    Ok(ShiftResult { delta_phi, method, arg_ratio, numeric, min_value, visibility: visibility_from(min_value, max_value)? })
}

/// Which pair of arm amplitudes an epsilon scan tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArmModel {
    /// Semiclassical A2, A3.
    Semiclassical,
    /// Quantum direct A2, A3.
    QuantumDirect,
    /// Quantum arms including the leading reflection paths.
    QuantumMz,
}

impl ArmModel {
    pub fn mode(self) -> Mode {
        match self {
            ArmModel::Semiclassical => Mode::Semiclassical,
            ArmModel::QuantumDirect => Mode::QuantumDirect,
            ArmModel::QuantumMz => Mode::QuantumMz,
        }
    }

    /// (|A2|, |A3|) at pulse-area offset `eps`.
    pub fn moduli(self, setup: &Setup, eps: f64) -> Result<(f64, f64)> {
        let model = FringeModel::new(&setup.with_pulse_offset(eps), self.mode())?;
        let (x, y) = match model.arms() {
            Some(arms) => arms,
            None => return Err(setup.kinematics().expect_err("only a closed channel lacks arms")),
        };
        Ok((x.norm(), y.norm()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonScan {
    pub grid: Vec<f64>,
    pub abs_a2: Vec<f64>,
    pub abs_a3: Vec<f64>,
    pub epsilon_o: Option<f64>,
    /// Sign changes of |A2| - |A3| along the grid.
    pub crossings: usize,
    pub model: ArmModel,
}

/// Bisection for a root of `f` on [lo, hi] to `tol`.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut flo, fhi) = (f(lo)?, f(hi)?);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Root of |A2|(eps) - |A3|(eps) in `range`, with Omega = (pi + eps) v / l.
pub fn find_epsilon_o(setup: &Setup, range: (f64, f64), model: ArmModel) -> Result<f64> {
    let gap = |eps: f64| model.moduli(setup, eps).map(|(a2, a3)| a2 - a3);
    bisect(gap, range.0, range.1, ROOT_TOLERANCE)
}

pub fn epsilon_scan(setup: &Setup, range: (f64, f64), n_points: usize, model: ArmModel, policy: ExecPolicy) -> Result<EpsilonScan> {
    if n_points < 2 || range.1.partial_cmp(&range.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidParameter(format!("bad epsilon range {range:?} with {n_points} points")));
    }
    let step = (range.1 - range.0) / (n_points - 1) as f64;
    let grid: Vec<f64> = (0..n_points).map(|i| if i == n_points - 1 { range.1 } else { range.0 + step * i as f64 }).collect();
    let moduli = map_collect(policy, &grid, |&eps| model.moduli(setup, eps)).into_iter().collect::<Result<Vec<_>>>()?;
    let (abs_a2, abs_a3): (Vec<f64>, Vec<f64>) = moduli.into_iter().unzip();
    let diff: Vec<f64> = abs_a2.iter().zip(&abs_a3).map(|(a, b)| a - b).collect();
    let crossings = diff.windows(2).filter(|w| w[0].signum() != w[1].signum() || w[1] == 0.0).count();
    let epsilon_o = match find_epsilon_o(setup, range, model) {
        Ok(root) => Some(root),
        Err(Error::NoBracket { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(EpsilonScan { grid, abs_a2, abs_a3, epsilon_o, crossings, model })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub kx_l: f64,
    pub direct: Result<f64>,
    pub exact: Result<f64>,
    /// Low-velocity point whose exact shift is resolution dependent.
    pub wild: bool,
}

/// Phase shift in the direct approximation and from the exact fringe for
/// each k_x l, keeping l fixed and the pi-pulse condition.
pub fn shift_sweep_kxl(base: &Setup, kxl_grid: &[f64], policy: ExecPolicy) -> Vec<SweepRow> {
    map_collect(policy, kxl_grid, |&kx_l| {
        if !(kx_l > 0.0 && kx_l.is_finite()) {
            let err = Err(Error::InvalidParameter(format!("k_x l must be positive, got {kx_l}")));
            return SweepRow { kx_l, direct: err.clone(), exact: err, wild: false };
        }
        let setup = base.with_kx_l(kx_l);
        let direct = phase_shift(&setup, Mode::QuantumDirect).map(|s| s.delta_phi);
        let exact = phase_shift(&setup, Mode::QuantumExact).map(|s| s.delta_phi);
        let wild = kx_l < WILD_REGIME_KXL || matches!(exact, Err(Error::AmbiguousMinimum { .. }));
        SweepRow { kx_l, direct, exact, wild }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DopplerReport {
    /// (Delta, delta Phi) at Delta = -2v/L, 0, +2v/L.
    pub rows: [(f64, f64); 3],
    /// (max - min) / |delta Phi at Delta = 0|.
    pub relative_spread: f64,
    pub mode: Mode,
}

/// Sensitivity of the phase shift to the Doppler spread Delta = +-2 v / L.
pub fn doppler_robustness(setup: &Setup, mode: Mode) -> Result<DopplerReport> {
    doppler_robustness_with_offset(setup, mode, 2.0 * setup.velocity() / setup.geometry.gap)
}

pub fn doppler_robustness_with_offset(setup: &Setup, mode: Mode, spread: f64) -> Result<DopplerReport> {
    let deltas = [setup.delta - spread, setup.delta, setup.delta + spread];
    let mut rows = [(0.0, 0.0); 3];
    for (row, delta) in rows.iter_mut().zip(deltas) {
        *row = (delta, phase_shift(&setup.with_delta(delta), mode)?.delta_phi);
    }
    let shifts = rows.map(|r| r.1);
    let (lo, hi) = shifts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    let relative_spread = if hi == lo { 0.0 } else { (hi - lo) / shifts[1].abs() };
    Ok(DopplerReport { rows, relative_spread, mode })
}
