//! Far-zone fields, directivity and realized gain.
//!
//! Fields are reported at r = 1 m with the `exp(-jkr)/r` factor removed,
//! i.e. phase-referenced to the origin.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::fmt9;
use crate::geometry::{Vec3, WireModel};
use crate::mom::{GroundModel, SolveResult, ETA0, MU0};
use crate::rf;

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    /// From +z (rad).
    pub theta: f64,
    /// From +x (rad).
    pub phi: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Self {
        Direction { theta, phi }
    }

    pub fn from_degrees(theta: f64, phi: f64) -> Self {
        Direction::new(theta.to_radians(), phi.to_radians())
    }

    pub fn unit(&self) -> Vec3 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vec3::new(st * cp, st * sp, ct)
    }

    pub fn theta_hat(&self) -> Vec3 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vec3::new(ct * cp, ct * sp, -st)
    }

    pub fn phi_hat(&self) -> Vec3 {
        let (sp, cp) = self.phi.sin_cos();
        Vec3::new(-sp, cp, 0.0)
    }
}

/// A straight radiating piece with linearly varying current
/// `c_start (1 - u) + c_end u` along `dir`.
#[derive(Debug, Clone, Copy)]
struct Radiator {
    start: Vec3,
    dir: Vec3,
    len: f64,
    c_start: Complex64,
    c_end: Complex64,
}

/// Segment currents (and their images) ready for far-field evaluation.
#[derive(Debug, Clone)]
pub struct CurrentDistribution {
    radiators: Vec<Radiator>,
    omega: f64,
    k: f64,
    ground: GroundModel,
}

impl CurrentDistribution {
    pub fn new(result: &SolveResult, model: &WireModel) -> Self {
        let segs = model.segments();
        let mut ends = vec![(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); segs.len()];
        for (b, i) in result.basis.iter().zip(&result.currents) {
            for h in &b.halves {
                let c = i * h.sign;
                if h.rising {
                    ends[h.segment].1 += c;
                } else {
                    ends[h.segment].0 += c;
                }
            }
        }
        let mut radiators = Vec::with_capacity(2 * segs.len());
        for (s, &(c_start, c_end)) in segs.iter().zip(&ends) {
            radiators.push(Radiator {
                start: s.start,
                dir: s.direction(),
                len: s.length(),
                c_start,
                c_end,
            });
        }
        if result.ground.has_image() {
            for (s, &(c_start, c_end)) in segs.iter().zip(&ends) {
                let m = s.mirror_z();
                radiators.push(Radiator {
                    start: m.start,
                    dir: m.direction(),
                    len: m.length(),
                    c_start: -c_start,
                    c_end: -c_end,
                });
            }
        }
        CurrentDistribution {
            radiators,
            omega: result.frequency.omega(),
            k: result.frequency.wavenumber(),
            ground: result.ground,
        }
    }

    /// `(E_theta, E_phi)` toward `dir`.
    pub fn field(&self, dir: Direction) -> Result<(Complex64, Complex64)> {
        if self.ground.has_image() && dir.theta > PI / 2.0 + 1e-12 {
            return Err(Error::Domain(format!(
                "theta {:.3} rad is below the ground plane",
                dir.theta
            )));
        }
        let rhat = dir.unit();
        let mut n = [Complex64::new(0.0, 0.0); 3];
        for r in &self.radiators {
            let phase = Complex64::from_polar(1.0, self.k * rhat.dot(r.start));
            let b = self.k * r.len * rhat.dot(r.dir);
            let (f0, f1) = linear_phase_integrals(b);
            let amp = phase * (r.c_start * (f0 - f1) + r.c_end * f1) * r.len;
            n[0] += amp * r.dir.x;
            n[1] += amp * r.dir.y;
            n[2] += amp * r.dir.z;
        }
        let coef = -J * (self.omega * MU0 / (4.0 * PI));
        let th = dir.theta_hat();
        let ph = dir.phi_hat();
        let e_theta = coef * (n[0] * th.x + n[1] * th.y + n[2] * th.z);
        let e_phi = coef * (n[0] * ph.x + n[1] * ph.y);
        Ok((e_theta, e_phi))
    }
}

/// `(int_0^1 e^{jbu} du, int_0^1 u e^{jbu} du)`.
fn linear_phase_integrals(b: f64) -> (Complex64, Complex64) {
    let c = J * b;
    if b.abs() < 0.05 {
        // sum_n c^n / n! * (1/(n+1), 1/(n+2))
        let mut term = Complex64::new(1.0, 0.0);
        let (mut f0, mut f1) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for n in 0..10 {
            f0 += term / (n as f64 + 1.0);
            f1 += term / (n as f64 + 2.0);
            term *= c / (n as f64 + 1.0);
        }
        (f0, f1)
    } else {
        let e = c.exp();
        let f0 = (e - 1.0) / c;
        let f1 = e * (1.0 / c - 1.0 / (c * c)) + 1.0 / (c * c);
        (f0, f1)
    }
}

/// Far field toward one direction.
pub fn radiated_field(
    result: &SolveResult,
    model: &WireModel,
    dir: Direction,
) -> Result<(Complex64, Complex64)> {
    CurrentDistribution::new(result, model).field(dir)
}

/// Sampling of the radiation sphere, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AngularGrid {
    pub theta_step_deg: f64,
    pub phi_step_deg: f64,
}

impl Default for AngularGrid {
    fn default() -> Self {
        AngularGrid {
            theta_step_deg: 1.0,
            phi_step_deg: 2.0,
        }
    }
}

impl AngularGrid {
    fn count(span: f64, step: f64) -> Result<usize> {
        if !(step > 0.0) || step > 2.0 {
            return Err(Error::Domain(format!("angular step {step} deg must be in (0, 2]")));
        }
        let n = span / step;
        if (n - n.round()).abs() > 1e-9 {
            return Err(Error::Domain(format!("step {step} deg does not divide {span} deg")));
        }
        Ok(n.round() as usize)
    }

    /// Theta samples (rad) including both ends: the upper hemisphere over
    /// ground, the full sphere otherwise.
    pub fn thetas(&self, ground: GroundModel) -> Result<Vec<f64>> {
        let span = if ground.has_image() { 90.0 } else { 180.0 };
        let n = Self::count(span, self.theta_step_deg)?;
        Ok((0..=n)
            .map(|i| (i as f64 * self.theta_step_deg).to_radians())
            .collect())
    }

    /// Phi samples (rad) over `[0, 360)`.
    pub fn phis(&self) -> Result<Vec<f64>> {
        let n = Self::count(360.0, self.phi_step_deg)?;
        Ok((0..n).map(|i| (i as f64 * self.phi_step_deg).to_radians()).collect())
    }
}

/// Sampled far field plus the power bookkeeping needed for gains.
#[derive(Debug, Clone)]
pub struct FarFieldPattern {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// Row-major over `(theta, phi)`.
    pub e_theta: Vec<Complex64>,
    pub e_phi: Vec<Complex64>,
    pub frequency_hz: f64,
    pub radiated_power: f64,
    pub accepted_power: f64,
    pub mismatch_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSample {
    pub theta: f64,
    pub phi: f64,
    pub directivity_dbi: f64,
    pub gain_dbi: f64,
    pub realized_gain_dbi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternSummary {
    pub peak_rg_dbi: f64,
    pub peak_theta_deg: f64,
    pub peak_phi_deg: f64,
    pub p_rad_w: f64,
    pub mismatch: f64,
}

fn db(x: f64) -> f64 {
    if x > 0.0 {
        10.0 * x.log10()
    } else {
        f64::NEG_INFINITY
    }
}

/// Trapezoid in theta, periodic rectangle in phi.
fn integrate_sphere(thetas: &[f64], phis: &[f64], u: &[f64]) -> f64 {
    let np = phis.len();
    let dphi = 2.0 * PI / np as f64;
    let nt = thetas.len();
    let mut total = 0.0;
    for i in 0..nt {
        let w = if i == 0 {
            0.5 * (thetas[1] - thetas[0])
        } else if i == nt - 1 {
            0.5 * (thetas[i] - thetas[i - 1])
        } else {
            0.5 * (thetas[i + 1] - thetas[i - 1])
        };
        let row: f64 = u[i * np..(i + 1) * np].iter().sum();
        total += row * thetas[i].sin() * w;
    }
    total * dphi
}

impl FarFieldPattern {
    /// Builds a pattern from sampled fields; integrates the radiated power.
    pub fn from_fields(
        thetas: Vec<f64>,
        phis: Vec<f64>,
        e_theta: Vec<Complex64>,
        e_phi: Vec<Complex64>,
        frequency_hz: f64,
        accepted_power: f64,
        mismatch_factor: f64,
    ) -> Result<Self> {
        if thetas.len() < 2 || phis.is_empty() {
            return Err(Error::DegeneratePattern("grid too small".into()));
        }
        let mut p = FarFieldPattern {
            thetas,
            phis,
            e_theta,
            e_phi,
            frequency_hz,
            radiated_power: 0.0,
            accepted_power,
            mismatch_factor,
        };
        let u: Vec<f64> = (0..p.e_theta.len()).map(|i| p.intensity_at(i)).collect();
        p.radiated_power = integrate_sphere(&p.thetas, &p.phis, &u);
        if !(p.radiated_power > 0.0) {
            return Err(Error::DegeneratePattern("zero radiated power".into()));
        }
        Ok(p)
    }

    fn intensity_at(&self, idx: usize) -> f64 {
        (self.e_theta[idx].norm_sqr() + self.e_phi[idx].norm_sqr()) / (2.0 * ETA0)
    }

    fn index(&self, it: usize, ip: usize) -> usize {
        it * self.phis.len() + ip
    }

    /// Radiation intensity (W/sr) at a grid node.
    pub fn intensity(&self, it: usize, ip: usize) -> f64 {
        self.intensity_at(self.index(it, ip))
    }

    /// Linear directivity at a grid node.
    pub fn directivity(&self, it: usize, ip: usize) -> f64 {
        4.0 * PI * self.intensity(it, ip) / self.radiated_power
    }

    /// `integral D dOmega / 4 pi`; one by construction of `radiated_power`.
    pub fn directivity_integral(&self) -> f64 {
        let d: Vec<f64> = (0..self.e_theta.len())
            .map(|i| 4.0 * PI * self.intensity_at(i) / self.radiated_power)
            .collect();
        integrate_sphere(&self.thetas, &self.phis, &d) / (4.0 * PI)
    }

    /// Realized gain (linear) at `(theta, phi)`, bilinear between nodes.
    pub fn realized_gain_at(&self, dir: Direction) -> f64 {
        let dt = self.thetas[1] - self.thetas[0];
        let np = self.phis.len();
        let dp = 2.0 * PI / np as f64;
        let tf = (dir.theta / dt).clamp(0.0, (self.thetas.len() - 1) as f64);
        let it = (tf.floor() as usize).min(self.thetas.len() - 2);
        let wt = tf - it as f64;
        let pf = dir.phi.rem_euclid(2.0 * PI) / dp;
        let ip = (pf.floor() as usize) % np;
        let wp = pf - pf.floor();
        let ip2 = (ip + 1) % np;
        let d = |a, b| self.directivity(a, b);
        let v = (1.0 - wt) * ((1.0 - wp) * d(it, ip) + wp * d(it, ip2))
            + wt * ((1.0 - wp) * d(it + 1, ip) + wp * d(it + 1, ip2));
        v * self.mismatch_factor
    }

    pub fn realized_gain_dbi_at(&self, dir: Direction) -> f64 {
        db(self.realized_gain_at(dir))
    }

    /// Grid node with the largest realized gain: `(dBi, theta, phi)`.
    pub fn peak(&self) -> (f64, f64, f64) {
        let np = self.phis.len();
        let mut best = (0usize, f64::NEG_INFINITY);
        for i in 0..self.e_theta.len() {
            let u = self.intensity_at(i);
            if u > best.1 {
                best = (i, u);
            }
        }
        let (it, ip) = (best.0 / np, best.0 % np);
        (
            db(self.directivity(it, ip) * self.mismatch_factor),
            self.thetas[it],
            self.phis[ip],
        )
    }

    /// Largest directivity on the grid (dBi).
    pub fn peak_directivity_dbi(&self) -> f64 {
        let (rg, _, _) = self.peak();
        rg - db(self.mismatch_factor)
    }

    pub fn summary(&self) -> PatternSummary {
        let (rg, th, ph) = self.peak();
        PatternSummary {
            peak_rg_dbi: rg,
            peak_theta_deg: th.to_degrees(),
            peak_phi_deg: ph.to_degrees(),
            p_rad_w: self.radiated_power,
            mismatch: self.mismatch_factor,
        }
    }

    /// `theta_deg,phi_deg,d_dbi,g_dbi,rg_dbi` for every grid node.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta_deg,phi_deg,d_dbi,g_dbi,rg_dbi\n");
        for s in directivity_gain(self) {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt9(s.theta.to_degrees()),
                fmt9(s.phi.to_degrees()),
                fmt9(s.directivity_dbi),
                fmt9(s.gain_dbi),
                fmt9(s.realized_gain_dbi)
            )
            .unwrap();
        }
        out
    }
}

/// Evaluates the far field of a solved model over `grid`.
pub fn compute_pattern(
    result: &SolveResult,
    model: &WireModel,
    grid: &AngularGrid,
    mismatch_factor: f64,
) -> Result<FarFieldPattern> {
    let thetas = grid.thetas(result.ground)?;
    let phis = grid.phis()?;
    let dist = CurrentDistribution::new(result, model);
    let np = phis.len();
    let fields: Vec<(Complex64, Complex64)> = (0..thetas.len() * np)
        .into_par_iter()
        .map(|i| dist.field(Direction::new(thetas[i / np], phis[i % np])))
        .collect::<Result<_>>()?;
    let (e_theta, e_phi) = fields.into_iter().unzip();
    FarFieldPattern::from_fields(
        thetas,
        phis,
        e_theta,
        e_phi,
        result.frequency.hz(),
        result.input_power(),
        mismatch_factor,
    )
}

/// Pattern with the realized-gain mismatch taken from the solved ports
/// against `z0`.
pub fn solved_pattern(
    result: &SolveResult,
    model: &WireModel,
    grid: &AngularGrid,
    z0: f64,
) -> Result<FarFieldPattern> {
    let mismatch = rf::mismatch_factor(&result.port_impedances, &result.port_voltages, z0)?;
    compute_pattern(result, model, grid, mismatch)
}

/// Directivity, gain and realized gain (dBi) at every grid node, row-major.
///
/// Wires are lossless PEC, so gain equals directivity.
pub fn directivity_gain(pattern: &FarFieldPattern) -> Vec<GainSample> {
    let np = pattern.phis.len();
    (0..pattern.e_theta.len())
        .map(|i| {
            let (it, ip) = (i / np, i % np);
            let d = pattern.directivity(it, ip);
            GainSample {
                theta: pattern.thetas[it],
                phi: pattern.phis[ip],
                directivity_dbi: db(d),
                gain_dbi: db(d),
                realized_gain_dbi: db(d * pattern.mismatch_factor),
            }
        })
        .collect()
}

/// Realized gain (dBi) versus theta at fixed `phi`, interpolating in phi
/// between grid columns when needed.
pub fn pattern_cut(pattern: &FarFieldPattern, phi: f64) -> Vec<(f64, f64)> {
    let np = pattern.phis.len();
    let dp = 2.0 * PI / np as f64;
    let pf = phi.rem_euclid(2.0 * PI) / dp;
    let on_node = (pf - pf.round()).abs() < 1e-9;
    pattern
        .thetas
        .iter()
        .enumerate()
        .map(|(it, &th)| {
            let d = if on_node {
                pattern.directivity(it, (pf.round() as usize) % np)
            } else {
                let ip = pf.floor() as usize % np;
                let w = pf - pf.floor();
                (1.0 - w) * pattern.directivity(it, ip) + w * pattern.directivity(it, (ip + 1) % np)
            };
            (th, db(d * pattern.mismatch_factor))
        })
        .collect()
}

/// Full elevation plane through `phi`: negative theta values are the
/// `phi + pi` half, so the result runs from -theta_max to +theta_max.
pub fn plane_cut(pattern: &FarFieldPattern, phi: f64) -> Vec<(f64, f64)> {
    let front = pattern_cut(pattern, phi);
    let back = pattern_cut(pattern, phi + PI);
    back.iter()
        .rev()
        .filter(|(th, _)| *th > 0.0)
        .map(|&(th, g)| (-th, g))
        .chain(front)
        .collect()
}

/// `|P_rad - P_in| / P_in`.
pub fn power_balance(result: &SolveResult, pattern: &FarFieldPattern) -> Result<f64> {
    let p_in = result.input_power();
    if !(p_in > 0.0) {
        return Err(Error::Inconsistent(format!("input power {p_in:.3e} W is not positive")));
    }
    Ok((pattern.radiated_power - p_in).abs() / p_in)
}
