//! Steered linear arrays: full coupled solve and the array-factor
//! approximation used to cross-check it.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farfield::{self, AngularGrid, Direction, FarFieldPattern};
use crate::geometry::{build_curved_monopole, build_linear_array, ArrayLayout, WireModel};
use crate::mom::{self, Frequency, GroundModel, SolveResult};
use crate::rf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringSpec {
    /// Beam direction from zenith (rad).
    pub theta0: f64,
    pub phi0: f64,
    /// Per-element real weights.
    pub amplitudes: Vec<f64>,
}

impl SteeringSpec {
    pub fn uniform(theta0: f64, phi0: f64, n: usize) -> Self {
        SteeringSpec {
            theta0,
            phi0,
            amplitudes: vec![1.0; n],
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(0.0..=PI / 2.0).contains(&self.theta0) {
            return Err(Error::Domain(format!(
                "steering theta {} rad outside [0, pi/2]",
                self.theta0
            )));
        }
        if self.amplitudes.len() != n {
            return Err(Error::Domain(format!(
                "{} amplitudes for {n} elements",
                self.amplitudes.len()
            )));
        }
        if self.amplitudes.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::Domain("amplitudes must be positive".into()));
        }
        Ok(())
    }

    pub fn direction(&self) -> Direction {
        Direction::new(self.theta0, self.phi0)
    }
}

/// Progressive-phase excitation `a_n exp(-j k n d sin(theta0) cos(phi0))`.
pub fn steering_weights(layout: &ArrayLayout, spec: &SteeringSpec, f: Frequency) -> Vec<Complex64> {
    let k = f.wavenumber();
    let step = k * layout.spacing * spec.theta0.sin() * spec.phi0.cos();
    spec.amplitudes
        .iter()
        .enumerate()
        .map(|(n, &a)| Complex64::from_polar(a, -step * n as f64))
        .collect()
}

/// `sum_n w_n exp(+j k n d sin(theta) cos(phi))`.
pub fn array_factor(
    layout: &ArrayLayout,
    spec: &SteeringSpec,
    f: Frequency,
    dir: Direction,
) -> Complex64 {
    let k = f.wavenumber();
    let step = k * layout.spacing * dir.theta.sin() * dir.phi.cos();
    steering_weights(layout, spec, f)
        .iter()
        .enumerate()
        .map(|(n, w)| w * Complex64::from_polar(1.0, step * n as f64))
        .sum()
}

#[derive(Debug, Clone)]
pub struct ArrayResult {
    pub model: WireModel,
    pub solve: SolveResult,
    pub weights: Vec<Complex64>,
    pub active_impedances: Vec<Complex64>,
    pub pattern: FarFieldPattern,
    pub gain_at_steering: f64,
    pub steering: SteeringSpec,
}

/// One coupled solve of the whole array driven by the steering weights.
pub fn solve_array(
    layout: &ArrayLayout,
    spec: &SteeringSpec,
    f: Frequency,
    ground: GroundModel,
    grid: &AngularGrid,
    z0: f64,
) -> Result<ArrayResult> {
    spec.validate(layout.n_elements)?;
    let weights = steering_weights(layout, spec, f);
    let model = build_linear_array(layout)?.with_port_voltages(&weights)?;
    let z = mom::fill_impedance_matrix(&model, f, ground)?;
    let solve = mom::solve_currents(&z, &model, &weights)?;
    let active_impedances = solve.port_impedances.clone();
    let mismatch = rf::mismatch_factor(&active_impedances, &weights, z0)?;
    let pattern = farfield::compute_pattern(&solve, &model, grid, mismatch)?;
    let gain_at_steering = pattern.realized_gain_dbi_at(spec.direction());
    Ok(ArrayResult {
        model,
        solve,
        weights,
        active_impedances,
        pattern,
        gain_at_steering,
        steering: spec.clone(),
    })
}

/// Isolated-element pattern times the array factor. Mismatch is that of
/// the isolated element; coupling is ignored.
pub fn pattern_multiplication(
    layout: &ArrayLayout,
    spec: &SteeringSpec,
    f: Frequency,
    ground: GroundModel,
    grid: &AngularGrid,
    z0: f64,
) -> Result<FarFieldPattern> {
    spec.validate(layout.n_elements)?;
    let element = build_curved_monopole(&layout.element)?;
    let solved = mom::solve(&element, f, ground)?;
    let mismatch = rf::mismatch_factor(&solved.port_impedances, &solved.port_voltages, z0)?;
    let single = farfield::compute_pattern(&solved, &element, grid, mismatch)?;
    let np = single.phis.len();
    let mut e_theta = single.e_theta.clone();
    let mut e_phi = single.e_phi.clone();
    for idx in 0..e_theta.len() {
        let dir = Direction::new(single.thetas[idx / np], single.phis[idx % np]);
        let af = array_factor(layout, spec, f, dir);
        e_theta[idx] *= af;
        e_phi[idx] *= af;
    }
    let power: f64 = spec.amplitudes.iter().map(|a| a * a).sum::<f64>() * solved.input_power();
    FarFieldPattern::from_fields(
        single.thetas.clone(),
        single.phis.clone(),
        e_theta,
        e_phi,
        f.hz(),
        power,
        mismatch,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElevationReport {
    /// `(theta_deg, realized_gain_dbi)` at phi = 0.
    pub rows: Vec<(f64, f64)>,
    /// Realized gain toward `(theta0, phi0 + pi)`.
    pub backlobe_dbi: f64,
}

/// Realized gain over `theta_range_deg` in the phi = 0 plane, plus the
/// back-lobe level at the mirror of the steering direction.
pub fn elevation_report(result: &ArrayResult, theta_range_deg: (f64, f64)) -> ElevationReport {
    let (lo, hi) = theta_range_deg;
    let rows = farfield::pattern_cut(&result.pattern, 0.0)
        .into_iter()
        .map(|(th, g)| (th.to_degrees(), g))
        .filter(|(th, _)| *th >= lo - 1e-9 && *th <= hi + 1e-9)
        .collect();
    let back = Direction::new(result.steering.theta0, result.steering.phi0 + PI);
    ElevationReport {
        rows,
        backlobe_dbi: result.pattern.realized_gain_dbi_at(back),
    }
}

/// Local maxima of a sampled cut `(angle, dB)`, as indices.
pub fn local_maxima(cut: &[(f64, f64)]) -> Vec<usize> {
    (0..cut.len())
        .filter(|&i| {
            let left = i == 0 || cut[i - 1].1 < cut[i].1;
            let right = i + 1 == cut.len() || cut[i + 1].1 <= cut[i].1;
            left && right
        })
        .collect()
}

/// Highest secondary maximum relative to the main beam (dB) in a plane
/// cut, ignoring the main lobe out to its first nulls on both sides.
pub fn peak_sidelobe_db(cut: &[(f64, f64)]) -> Option<f64> {
    let (imax, &(_, gmax)) = cut
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))?;
    let mut lo = imax;
    while lo > 0 && cut[lo - 1].1 <= cut[lo].1 {
        lo -= 1;
    }
    let mut hi = imax;
    while hi + 1 < cut.len() && cut[hi + 1].1 <= cut[hi].1 {
        hi += 1;
    }
    local_maxima(cut)
        .into_iter()
        .filter(|&i| i < lo || i > hi)
        .map(|i| cut[i].1 - gmax)
        .max_by(f64::total_cmp)
}

/// Strongest direction outside the main-lobe cone, relative to the
/// pattern peak (dB).
///
/// The cone is `|u - u0| < lambda / (N d)` with `u = sin(theta) cos(phi)`,
/// i.e. everything up to the first array-factor nulls around the steered
/// beam. Grating lobes, when present, sit at `u0 +- m lambda / d` and are
/// caught by this scan.
pub fn peak_outside_main_lobe_db(
    pattern: &FarFieldPattern,
    layout: &ArrayLayout,
    spec: &SteeringSpec,
    f: Frequency,
) -> Option<f64> {
    let u0 = spec.theta0.sin() * spec.phi0.cos();
    let half_width = f.wavelength() / (layout.n_elements as f64 * layout.spacing);
    let mut peak = 0.0f64;
    let mut outside: Option<f64> = None;
    for (it, &th) in pattern.thetas.iter().enumerate() {
        for (ip, &ph) in pattern.phis.iter().enumerate() {
            let u = pattern.intensity(it, ip);
            peak = peak.max(u);
            if (th.sin() * ph.cos() - u0).abs() >= half_width {
                outside = Some(outside.map_or(u, |o: f64| o.max(u)));
            }
        }
    }
    outside.map(|o| 10.0 * (o / peak).log10())
}
