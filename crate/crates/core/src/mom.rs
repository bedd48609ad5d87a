//! Thin-wire method of moments.
//!
//! Currents are expanded in overlapping triangle functions, one per
//! junction shared by two segment ends (and one per segment end touching
//! an infinite PEC ground, whose other half is the image). The mixed
//! potential EFIE is tested with the same functions, so the matrix is
//! complex symmetric.
//!
//! Kernel: `G = exp(-jkR)/R` with `R^2 = |r - r'|^2 + a^2` (source on the
//! axis, observation on the surface). The static `1/R` part of every
//! source-segment integral is done in closed form; the remainder
//! `(exp(-jkR) - 1)/R` is smooth and goes to Gauss-Legendre.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Vec3, WireModel, WireSegment, JUNCTION_TOL, SPEED_OF_LIGHT};
use crate::linalg;
use crate::quadrature::GaussRule;
use crate::rf::{FrequencyResponse, ResponseEntry};

/// Vacuum permeability (H/m).
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Vacuum permittivity (F/m), `1 / (mu0 c^2)`.
pub const EPS0: f64 = 1.0 / (MU0 * SPEED_OF_LIGHT * SPEED_OF_LIGHT);
/// Free-space wave impedance (ohms).
pub const ETA0: f64 = 376.730;

/// Solves with a condition estimate above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;
/// Maximum accepted relative residual `|Z I - V| / |V|`.
pub const MAX_RESIDUAL: f64 = 1e-10;

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Frequency(f64);

impl Frequency {
    pub fn new(hz: f64) -> Result<Self> {
        if !(hz > 0.0) || !hz.is_finite() {
            return Err(Error::Domain(format!("frequency must be positive, got {hz}")));
        }
        Ok(Frequency(hz))
    }

    pub fn hz(self) -> f64 {
        self.0
    }

    pub fn wavelength(self) -> f64 {
        SPEED_OF_LIGHT / self.0
    }

    pub fn wavenumber(self) -> f64 {
        2.0 * PI * self.0 / SPEED_OF_LIGHT
    }

    pub fn omega(self) -> f64 {
        2.0 * PI * self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroundModel {
    #[serde(rename = "free-space")]
    FreeSpace,
    #[serde(rename = "pec-infinite")]
    InfinitePec,
}

impl GroundModel {
    pub fn has_image(self) -> bool {
        matches!(self, GroundModel::InfinitePec)
    }
}

/// One side of a triangle function, living on a single segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Half {
    pub segment: usize,
    /// Shape `u` (peak at the segment end) when `true`, `1 - u` otherwise.
    pub rising: bool,
    /// +1 when the current flows along the segment direction.
    pub sign: f64,
}

impl Half {
    pub fn shape(&self, u: f64) -> f64 {
        if self.rising {
            u
        } else {
            1.0 - u
        }
    }

    fn slope(&self, len: f64) -> f64 {
        if self.rising {
            1.0 / len
        } else {
            -1.0 / len
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisFunction {
    /// Index into [`WireModel::junctions`].
    pub junction: usize,
    pub halves: Vec<Half>,
}

/// Enumerates the triangle functions of `model` under `ground`.
pub fn basis_functions(model: &WireModel, ground: GroundModel) -> Vec<BasisFunction> {
    let mut out = Vec::new();
    for (ji, j) in model.junctions().iter().enumerate() {
        let grounded = ground.has_image() && j.position.z.abs() <= JUNCTION_TOL;
        if grounded {
            for e in &j.ends {
                out.push(BasisFunction {
                    junction: ji,
                    halves: vec![Half {
                        segment: e.segment,
                        rising: e.at_end,
                        sign: if e.at_end { -1.0 } else { 1.0 },
                    }],
                });
            }
            continue;
        }
        if j.ends.len() < 2 {
            continue;
        }
        let first = j.ends[0];
        let incoming = Half {
            segment: first.segment,
            rising: first.at_end,
            sign: if first.at_end { 1.0 } else { -1.0 },
        };
        for e in &j.ends[1..] {
            out.push(BasisFunction {
                junction: ji,
                halves: vec![
                    incoming,
                    Half {
                        segment: e.segment,
                        rising: e.at_end,
                        sign: if e.at_end { -1.0 } else { 1.0 },
                    },
                ],
            });
        }
    }
    out
}

/// Basis index and orientation sign for each feed port.
///
/// The gap sits at the start node of the fed segment; the port current is
/// the current leaving that node along the segment.
pub fn port_basis(model: &WireModel, basis: &[BasisFunction]) -> Result<Vec<(usize, f64)>> {
    model
        .ports()
        .iter()
        .map(|p| {
            basis
                .iter()
                .enumerate()
                .find_map(|(bi, b)| {
                    b.halves
                        .iter()
                        .find(|h| h.segment == p.segment_index && !h.rising)
                        .map(|h| (bi, h.sign))
                })
                .ok_or_else(|| {
                    Error::InvalidModel(format!(
                        "port on segment {} starts at a free wire end",
                        p.segment_index
                    ))
                })
        })
        .collect()
}

/// Filled Galerkin matrix together with the basis it refers to.
#[derive(Debug, Clone)]
pub struct ImpedanceMatrix {
    pub matrix: DMatrix<Complex64>,
    pub basis: Vec<BasisFunction>,
    pub frequency: Frequency,
    pub ground: GroundModel,
}

impl ImpedanceMatrix {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `max |Z_ij - Z_ji| / max |Z_ij|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut peak = 0.0f64;
        let mut diff = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                peak = peak.max(self.matrix[(i, j)].norm());
                diff = diff.max((self.matrix[(i, j)] - self.matrix[(j, i)]).norm());
            }
        }
        diff / peak
    }
}

/// `[I00, I10, I01, I11]`: integrals of `G`, `u G`, `u' G`, `u u' G` over
/// an observation segment (`u`) and a source segment (`u'`), in m^2 / m.
type Moments = [Complex64; 4];

fn swap(m: Moments) -> Moments {
    [m[0], m[2], m[1], m[3]]
}

struct Rules {
    outer: GaussRule,
    inner: GaussRule,
    inner_near: GaussRule,
    base: GaussRule,
}

impl Rules {
    fn new() -> Self {
        Rules {
            outer: GaussRule::new(8),
            inner: GaussRule::new(8),
            inner_near: GaussRule::new(16),
            base: GaussRule::new(8),
        }
    }

    /// Outer rule graded toward both segment ends, where the analytically
    /// integrated static part varies on the scale of the wire radius.
    fn graded(&self, radius_ratio: f64) -> GaussRule {
        let mut left = vec![0.5];
        let floor = 0.1 * radius_ratio;
        while *left.last().unwrap() > floor {
            let next = left.last().unwrap() * 0.25;
            left.push(next);
        }
        left.push(0.0);
        left.reverse();
        let mut breaks = left.clone();
        for x in left.iter().rev().skip(1) {
            breaks.push(1.0 - x);
        }
        self.base.composite(&breaks)
    }
}

/// Integral of `G` and `(s/len) G` over the source segment for one
/// observation point.
fn source_integrals(
    r: Vec3,
    src: &WireSegment,
    a2: f64,
    k: f64,
    rule: &GaussRule,
) -> (Complex64, Complex64) {
    let len = src.length();
    let t = src.direction();
    let d = r - src.start;
    let s0 = d.dot(t);
    let rho2 = (d.dot(d) - s0 * s0).max(0.0) + a2;
    let rho = rho2.sqrt();
    let r_start = (s0 * s0 + rho2).sqrt();
    let r_end = ((len - s0) * (len - s0) + rho2).sqrt();
    let j0 = ((len - s0) / rho).asinh() + (s0 / rho).asinh();
    let j1 = r_end - r_start + s0 * j0;
    let mut k0 = Complex64::new(j0, 0.0);
    let mut k1 = Complex64::new(j1 / len, 0.0);
    for (x, w) in rule.iter() {
        let ds = x * len - s0;
        let rr = (ds * ds + rho2).sqrt();
        let kr = k * rr;
        // (exp(-jkR) - 1) / R, series near R = 0 is not needed since R >= a
        let g = Complex64::new(kr.cos() - 1.0, -kr.sin()) / rr;
        k0 += g * (w * len);
        k1 += g * (w * len * x);
    }
    (k0, k1)
}

fn pair_moments(obs: &WireSegment, src: &WireSegment, k: f64, rules: &Rules) -> Moments {
    let a2 = 0.5 * (obs.radius * obs.radius + src.radius * src.radius);
    let lp = obs.length();
    let near = obs.distance_to(src) < lp.max(src.length());
    let graded;
    let (outer, inner) = if near {
        graded = rules.graded(obs.radius / lp);
        (&graded, &rules.inner_near)
    } else {
        (&rules.outer, &rules.inner)
    };
    let mut m = [Complex64::new(0.0, 0.0); 4];
    for (x, w) in outer.iter() {
        let (k0, k1) = source_integrals(obs.point_at(x), src, a2, k, inner);
        let w = w * lp;
        m[0] += k0 * w;
        m[1] += k0 * (w * x);
        m[2] += k1 * w;
        m[3] += k1 * (w * x);
    }
    m
}

/// `int int s_h(u) s_g(u') G` from the four moments.
fn shape_product(m: &Moments, h: &Half, g: &Half) -> Complex64 {
    match (h.rising, g.rising) {
        (true, true) => m[3],
        (true, false) => m[1] - m[3],
        (false, true) => m[2] - m[3],
        (false, false) => m[0] - m[1] - m[2] + m[3],
    }
}

/// Upper-triangular table of segment-pair moments.
struct MomentTable {
    n: usize,
    direct: Vec<Moments>,
    image: Option<Vec<Moments>>,
}

impl MomentTable {
    fn build(segments: &[WireSegment], k: f64, ground: GroundModel) -> Self {
        let n = segments.len();
        let rules = Rules::new();
        let rows: Vec<(Vec<Moments>, Vec<Moments>)> = (0..n)
            .into_par_iter()
            .map(|p| {
                let direct = (p..n)
                    .map(|q| pair_moments(&segments[p], &segments[q], k, &rules))
                    .collect();
                let image = if ground.has_image() {
                    (p..n)
                        .map(|q| pair_moments(&segments[p], &segments[q].mirror_z(), k, &rules))
                        .collect()
                } else {
                    Vec::new()
                };
                (direct, image)
            })
            .collect();
        let mut direct = Vec::with_capacity(n * (n + 1) / 2);
        let mut image = Vec::new();
        for (d, i) in rows {
            direct.extend(d);
            image.extend(i);
        }
        MomentTable {
            n,
            direct,
            image: ground.has_image().then_some(image),
        }
    }

    fn lookup(table: &[Moments], n: usize, p: usize, q: usize) -> Moments {
        let (lo, hi, swapped) = if p <= q { (p, q, false) } else { (q, p, true) };
        let idx = row_start(n, lo) + (hi - lo);
        if swapped {
            swap(table[idx])
        } else {
            table[idx]
        }
    }

    fn direct(&self, p: usize, q: usize) -> Moments {
        Self::lookup(&self.direct, self.n, p, q)
    }

    fn image(&self, p: usize, q: usize) -> Option<Moments> {
        self.image
            .as_ref()
            .map(|t| Self::lookup(t, self.n, p, q))
    }
}

/// Offset of row `p` in the packed upper triangle: `sum_{r < p} (n - r)`.
fn row_start(n: usize, p: usize) -> usize {
    p * n - p * p.saturating_sub(1) / 2
}

fn check_model(model: &WireModel, f: Frequency, ground: GroundModel) -> Result<()> {
    let max_len = f.wavelength() / 10.0;
    for (i, s) in model.segments().iter().enumerate() {
        let len = s.length();
        if len < 2.0 * s.radius {
            return Err(Error::KernelValidity(format!(
                "segment {i} length {len:.4e} m is below twice its radius"
            )));
        }
        if len > max_len * (1.0 + 1e-9) {
            return Err(Error::KernelValidity(format!(
                "segment {i} length {len:.4} m exceeds lambda/10 = {max_len:.4} m"
            )));
        }
        if ground.has_image() {
            if s.start.z < -JUNCTION_TOL || s.end.z < -JUNCTION_TOL {
                return Err(Error::InvalidModel(format!("segment {i} extends below the ground")));
            }
            if s.start.z.abs() <= JUNCTION_TOL && s.end.z.abs() <= JUNCTION_TOL {
                return Err(Error::InvalidModel(format!("segment {i} lies in the ground plane")));
            }
        }
    }
    Ok(())
}

/// Fills the Galerkin impedance matrix of `model` at `f`.
pub fn fill_impedance_matrix(
    model: &WireModel,
    f: Frequency,
    ground: GroundModel,
) -> Result<ImpedanceMatrix> {
    check_model(model, f, ground)?;
    let basis = basis_functions(model, ground);
    if basis.is_empty() {
        return Err(Error::InvalidModel("model has no current basis functions".into()));
    }
    let segments = model.segments();
    let k = f.wavenumber();
    let omega = f.omega();
    let table = MomentTable::build(segments, k, ground);
    let vec_coef = J * (omega * MU0 / (4.0 * PI));
    let scal_coef = 1.0 / (J * (omega * EPS0 * 4.0 * PI));
    let dirs: Vec<Vec3> = segments.iter().map(WireSegment::direction).collect();
    let lens: Vec<f64> = segments.iter().map(WireSegment::length).collect();

    let nb = basis.len();
    let entry = |m: usize, n: usize| -> Complex64 {
        let mut z = Complex64::new(0.0, 0.0);
        for h in &basis[m].halves {
            for g in &basis[n].halves {
                let (p, q) = (h.segment, g.segment);
                let sign = h.sign * g.sign;
                let slopes = h.slope(lens[p]) * g.slope(lens[q]);
                let mom = table.direct(p, q);
                z += vec_coef * (sign * dirs[p].dot(dirs[q])) * shape_product(&mom, h, g)
                    + scal_coef * (sign * slopes) * mom[0];
                if let Some(img) = table.image(p, q) {
                    let tq = dirs[q].mirror_z();
                    z -= vec_coef * (sign * dirs[p].dot(tq)) * shape_product(&img, h, g)
                        + scal_coef * (sign * slopes) * img[0];
                }
            }
        }
        z
    };
    let rows: Vec<Vec<Complex64>> = (0..nb)
        .into_par_iter()
        .map(|m| (m..nb).map(|n| entry(m, n)).collect())
        .collect();
    let mut matrix = DMatrix::zeros(nb, nb);
    for (m, row) in rows.into_iter().enumerate() {
        for (off, z) in row.into_iter().enumerate() {
            let n = m + off;
            matrix[(m, n)] = z;
            matrix[(n, m)] = z;
        }
    }
    Ok(ImpedanceMatrix {
        matrix,
        basis,
        frequency: f,
        ground,
    })
}

/// Solved currents at one frequency.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub frequency: Frequency,
    pub ground: GroundModel,
    pub basis: Vec<BasisFunction>,
    /// Expansion coefficient (A) of each basis function.
    pub currents: Vec<Complex64>,
    pub port_voltages: Vec<Complex64>,
    pub port_currents: Vec<Complex64>,
    pub port_impedances: Vec<Complex64>,
    pub condition_estimate: f64,
    pub residual: f64,
}

impl SolveResult {
    /// `1/2 Re sum V conj(I)` over all ports.
    pub fn input_power(&self) -> f64 {
        0.5 * self
            .port_voltages
            .iter()
            .zip(&self.port_currents)
            .map(|(v, i)| (v * i.conj()).re)
            .sum::<f64>()
    }
}

/// Solves `Z I = V` with delta-gap voltages `excitation` (one per port).
pub fn solve_currents(
    z: &ImpedanceMatrix,
    model: &WireModel,
    excitation: &[Complex64],
) -> Result<SolveResult> {
    if excitation.len() != model.ports().len() {
        return Err(Error::InvalidModel(format!(
            "{} excitation voltages for {} ports",
            excitation.len(),
            model.ports().len()
        )));
    }
    if z.matrix.nrows() != z.dim() || z.matrix.ncols() != z.dim() {
        return Err(Error::InvalidModel("matrix does not match basis".into()));
    }
    let feeds = port_basis(model, &z.basis)?;
    let mut v = DVector::zeros(z.dim());
    for (&(bi, sign), volts) in feeds.iter().zip(excitation) {
        v[bi] += volts * sign;
    }
    let sol = linalg::solve(&z.matrix, &v)?;
    if sol.condition_estimate > MAX_CONDITION {
        return Err(Error::Singular {
            condition: sol.condition_estimate,
        });
    }
    if !(sol.residual < MAX_RESIDUAL) {
        return Err(Error::Inconsistent(format!(
            "relative residual {:.3e} above {MAX_RESIDUAL:.0e}",
            sol.residual
        )));
    }
    let currents: Vec<Complex64> = sol.x.iter().copied().collect();
    let port_currents: Vec<Complex64> = feeds.iter().map(|&(bi, s)| currents[bi] * s).collect();
    let port_impedances = excitation
        .iter()
        .zip(&port_currents)
        .map(|(v, i)| v / i)
        .collect();
    Ok(SolveResult {
        frequency: z.frequency,
        ground: z.ground,
        basis: z.basis.clone(),
        currents,
        port_voltages: excitation.to_vec(),
        port_currents,
        port_impedances,
        condition_estimate: sol.condition_estimate,
        residual: sol.residual,
    })
}

/// Fill and solve with the model's own port voltages.
pub fn solve(model: &WireModel, f: Frequency, ground: GroundModel) -> Result<SolveResult> {
    let z = fill_impedance_matrix(model, f, ground)?;
    let volts: Vec<Complex64> = model.ports().iter().map(|p| p.gap_voltage).collect();
    solve_currents(&z, model, &volts)
}

fn check_sweep(freqs: &[Frequency]) -> Result<()> {
    if freqs.is_empty() {
        return Err(Error::Domain("empty frequency list".into()));
    }
    if freqs.windows(2).any(|w| w[1].hz() <= w[0].hz()) {
        return Err(Error::Domain("frequencies must be strictly increasing".into()));
    }
    Ok(())
}

/// One response per port, each referenced to `z0`.
pub fn input_impedance_sweep_ports(
    model: &WireModel,
    freqs: &[Frequency],
    ground: GroundModel,
    z0: f64,
) -> Result<Vec<FrequencyResponse>> {
    check_sweep(freqs)?;
    let results: Vec<Result<SolveResult>> = freqs
        .par_iter()
        .map(|&f| {
            solve(model, f, ground).map_err(|e| Error::AtFrequency {
                frequency_hz: f.hz(),
                source: Box::new(e),
            })
        })
        .collect();
    let mut solved = Vec::with_capacity(results.len());
    for r in results {
        solved.push(r?);
    }
    (0..model.ports().len())
        .map(|port| {
            FrequencyResponse::new(
                solved
                    .iter()
                    .map(|s| ResponseEntry {
                        frequency_hz: s.frequency.hz(),
                        z_in: s.port_impedances[port],
                    })
                    .collect(),
                z0,
            )
        })
        .collect()
}

/// Input impedance of port 0 over `freqs`.
pub fn input_impedance_sweep(
    model: &WireModel,
    freqs: &[Frequency],
    ground: GroundModel,
    z0: f64,
) -> Result<FrequencyResponse> {
    if model.ports().is_empty() {
        return Err(Error::InvalidModel("model has no ports".into()));
    }
    Ok(input_impedance_sweep_ports(model, freqs, ground, z0)?.swap_remove(0))
}
