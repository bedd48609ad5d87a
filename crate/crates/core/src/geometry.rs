//! Curved monopole geometry and its thin-wire discretization.
//!
//! The element is a vertical straight section of length `l_straight`
//! rising from the ground attachment at the origin, followed by a circular
//! arc of radius `1/kappa` in the xz-plane, tangent to the vertical at the
//! junction. The total wire length is held at `l_ref` for every design, so
//! the arc angle is whatever `kappa * (l_ref - l_straight)` comes out to.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Two segment endpoints closer than this are treated as one junction.
pub const JUNCTION_TOL: f64 = 1e-9;

/// Largest arc angle (rad) spanned by one chord. Keeps the chord-vs-arc
/// length deficit below 5e-4 of the arc length.
/// Largest angle one arc chord may subtend. A chord leans by half this
/// against the local tangent, so 0.028 rad keeps adjacent directions
/// aligned to better than 1e-4 in the dot product.
const MAX_CHORD_ANGLE: f64 = 0.028;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn unit(self) -> Vec3 {
        self * (1.0 / self.norm())
    }

    /// Reflection through the plane z = 0.
    pub fn mirror_z(self) -> Vec3 {
        Vec3::new(self.x, self.y, -self.z)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// One straight piece of wire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireSegment {
    pub start: Vec3,
    pub end: Vec3,
    pub radius: f64,
}

impl WireSegment {
    pub fn new(start: Vec3, end: Vec3, radius: f64) -> Self {
        WireSegment { start, end, radius }
    }

    pub fn length(&self) -> f64 {
        self.start.distance(self.end)
    }

    pub fn direction(&self) -> Vec3 {
        (self.end - self.start).unit()
    }

    pub fn midpoint(&self) -> Vec3 {
        (self.start + self.end) * 0.5
    }

    pub fn point_at(&self, u: f64) -> Vec3 {
        self.start + (self.end - self.start) * u
    }

    pub fn mirror_z(&self) -> WireSegment {
        WireSegment::new(self.start.mirror_z(), self.end.mirror_z(), self.radius)
    }

    pub fn translated(&self, offset: Vec3) -> WireSegment {
        WireSegment::new(self.start + offset, self.end + offset, self.radius)
    }

    /// Minimum distance between the axes of two segments.
    pub fn distance_to(&self, other: &WireSegment) -> f64 {
        segment_distance(self.start, self.end, other.start, other.end)
    }
}

/// Closest distance between segments `p0p1` and `q0q1`.
pub(crate) fn segment_distance(p0: Vec3, p1: Vec3, q0: Vec3, q1: Vec3) -> f64 {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let a = d1.dot(d1);
    let e = d2.dot(d2);
    let f = d2.dot(r);
    let c = d1.dot(r);
    let b = d1.dot(d2);
    let denom = a * e - b * b;
    let mut s = if denom > 1e-14 * a * e {
        ((b * f - c * e) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    (p0 + d1 * s).distance(q0 + d2 * t)
}

/// Delta-gap source at the start node of a segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedPort {
    pub segment_index: usize,
    #[serde(with = "complex_pair")]
    pub gap_voltage: Complex64,
}

impl FeedPort {
    pub fn new(segment_index: usize, gap_voltage: Complex64) -> Self {
        FeedPort {
            segment_index,
            gap_voltage,
        }
    }
}

pub(crate) mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

/// Which end of a segment touches a junction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentEnd {
    pub segment: usize,
    /// `true` for `end`, `false` for `start`.
    pub at_end: bool,
}

/// A point where one or more segment endpoints coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct Junction {
    pub position: Vec3,
    pub ends: Vec<SegmentEnd>,
}

#[derive(Deserialize)]
struct RawWireModel {
    segments: Vec<WireSegment>,
    ports: Vec<FeedPort>,
}

/// A discretized antenna: segments, feed ports and the derived junction map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWireModel")]
pub struct WireModel {
    segments: Vec<WireSegment>,
    ports: Vec<FeedPort>,
    #[serde(skip)]
    junctions: Vec<Junction>,
}

impl TryFrom<RawWireModel> for WireModel {
    type Error = Error;
    fn try_from(raw: RawWireModel) -> Result<Self> {
        WireModel::new(raw.segments, raw.ports)
    }
}

impl WireModel {
    /// Validates the segments and ports and builds the junction map.
    pub fn new(segments: Vec<WireSegment>, ports: Vec<FeedPort>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidModel("no segments".into()));
        }
        for (i, s) in segments.iter().enumerate() {
            if !s.start.is_finite() || !s.end.is_finite() || !s.radius.is_finite() {
                return Err(Error::InvalidModel(format!("segment {i} is not finite")));
            }
            let len = s.length();
            if len <= 0.0 {
                return Err(Error::InvalidModel(format!("segment {i} has zero length")));
            }
            if s.radius <= 0.0 || s.radius >= len {
                return Err(Error::KernelValidity(format!(
                    "segment {i}: radius {} must be in (0, length {len})",
                    s.radius
                )));
            }
        }
        let mut seen = vec![false; segments.len()];
        for p in &ports {
            if p.segment_index >= segments.len() {
                return Err(Error::InvalidModel(format!(
                    "port on segment {} but model has {} segments",
                    p.segment_index,
                    segments.len()
                )));
            }
            if std::mem::replace(&mut seen[p.segment_index], true) {
                return Err(Error::InvalidModel(format!(
                    "two ports on segment {}",
                    p.segment_index
                )));
            }
        }
        let junctions = build_junctions(&segments);
        let model = WireModel {
            segments,
            ports,
            junctions,
        };
        model.check_overlap()?;
        Ok(model)
    }

    pub fn segments(&self) -> &[WireSegment] {
        &self.segments
    }

    pub fn ports(&self) -> &[FeedPort] {
        &self.ports
    }

    pub fn junctions(&self) -> &[Junction] {
        &self.junctions
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(WireSegment::length).sum()
    }

    /// Same segments with every port's gap voltage replaced.
    pub fn with_port_voltages(&self, volts: &[Complex64]) -> Result<WireModel> {
        if volts.len() != self.ports.len() {
            return Err(Error::InvalidModel(format!(
                "{} voltages for {} ports",
                volts.len(),
                self.ports.len()
            )));
        }
        let mut m = self.clone();
        for (p, v) in m.ports.iter_mut().zip(volts) {
            p.gap_voltage = *v;
        }
        Ok(m)
    }

    pub fn translated(&self, offset: Vec3) -> WireModel {
        let mut m = self.clone();
        for s in &mut m.segments {
            *s = s.translated(offset);
        }
        for j in &mut m.junctions {
            j.position = j.position + offset;
        }
        m
    }

    /// Axis-aligned bounding box `(min, max)` of all endpoints.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for s in &self.segments {
            for p in [s.start, s.end] {
                lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
                hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
            }
        }
        (lo, hi)
    }

    /// Junction index of one end of a segment.
    pub fn junction_of(&self, end: SegmentEnd) -> usize {
        self.junctions
            .iter()
            .position(|j| j.ends.contains(&end))
            .expect("every segment end belongs to a junction")
    }

    fn connected(&self, a: usize, b: usize) -> bool {
        self.junctions.iter().any(|j| {
            j.ends.iter().any(|e| e.segment == a) && j.ends.iter().any(|e| e.segment == b)
        })
    }

    fn check_overlap(&self) -> Result<()> {
        let n = self.segments.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (&self.segments[i], &self.segments[j]);
                let reach = a.length().max(b.length()) + a.radius + b.radius;
                if a.midpoint().distance(b.midpoint()) > reach {
                    continue;
                }
                if self.connected(i, j) {
                    continue;
                }
                let d = a.distance_to(b);
                if d < a.radius + b.radius {
                    return Err(Error::Collision(format!(
                        "segments {i} and {j} are {d:.3e} m apart, closer than their radii"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn build_junctions(segments: &[WireSegment]) -> Vec<Junction> {
    let mut junctions: Vec<Junction> = Vec::new();
    for (i, s) in segments.iter().enumerate() {
        for (p, at_end) in [(s.start, false), (s.end, true)] {
            let end = SegmentEnd { segment: i, at_end };
            match junctions
                .iter_mut()
                .find(|j| j.position.distance(p) <= JUNCTION_TOL)
            {
                Some(j) => j.ends.push(end),
                None => junctions.push(Junction {
                    position: p,
                    ends: vec![end],
                }),
            }
        }
    }
    junctions
}

/// Quarter-wave length `c / (4 f_c)`.
pub fn reference_length(f_c: f64) -> Result<f64> {
    if !(f_c > 0.0) || !f_c.is_finite() {
        return Err(Error::Domain(format!("frequency must be positive, got {f_c}")));
    }
    Ok(SPEED_OF_LIGHT / (4.0 * f_c))
}

/// Curvature of an arc of the given bend radius.
pub fn curvature_from_radius(r_curved: f64) -> Result<f64> {
    if !(r_curved > 0.0) {
        return Err(Error::Domain(format!("bend radius must be positive, got {r_curved}")));
    }
    Ok(1.0 / r_curved)
}

/// Arc angle that keeps `l_straight + arc length == l_ref`.
pub fn solve_arc_angle(l_ref: f64, l_straight: f64, kappa: f64) -> Result<f64> {
    if l_straight < 0.0 || l_straight > l_ref {
        return Err(Error::Constraint(format!(
            "straight length {l_straight} m must lie in [0, {l_ref}] m"
        )));
    }
    if !(kappa >= 0.0) {
        return Err(Error::Domain(format!("curvature must be non-negative, got {kappa}")));
    }
    Ok(kappa * (l_ref - l_straight))
}

/// Design vector of one curved monopole element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurvedMonopoleParams {
    /// Center frequency (Hz). Sets the mesh density.
    pub f_c: f64,
    /// Total wire length (m).
    pub l_ref: f64,
    pub l_straight: f64,
    /// 1/m; zero is the straight reference monopole.
    pub kappa: f64,
    pub wire_radius: f64,
    pub segments_per_wavelength: u32,
}

impl Default for CurvedMonopoleParams {
    fn default() -> Self {
        CurvedMonopoleParams {
            f_c: 15e6,
            l_ref: 4.67,
            l_straight: 2.0,
            kappa: 0.5,
            wire_radius: 0.01,
            segments_per_wavelength: 40,
        }
    }
}

impl CurvedMonopoleParams {
    /// The straight monopole with the same length, radius and mesh.
    pub fn straight_reference(&self) -> Self {
        CurvedMonopoleParams { kappa: 0.0, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_c > 0.0) || !self.f_c.is_finite() {
            return Err(Error::Domain(format!("f_c must be positive, got {}", self.f_c)));
        }
        if !(self.l_ref > 0.0) || !self.l_ref.is_finite() {
            return Err(Error::Domain(format!("l_ref must be positive, got {}", self.l_ref)));
        }
        if !(self.wire_radius > 0.0) {
            return Err(Error::Domain(format!(
                "wire radius must be positive, got {}",
                self.wire_radius
            )));
        }
        if self.segments_per_wavelength < 10 {
            return Err(Error::Domain(format!(
                "segments_per_wavelength must be >= 10, got {}",
                self.segments_per_wavelength
            )));
        }
        if !self.kappa.is_finite() {
            return Err(Error::Domain("curvature must be finite".into()));
        }
        solve_arc_angle(self.l_ref, self.l_straight, self.kappa).map(|_| ())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.f_c
    }

    pub fn l_curved(&self) -> f64 {
        self.l_ref - self.l_straight
    }

    /// `None` in the straight limit.
    pub fn r_curved(&self) -> Option<f64> {
        (self.kappa > 0.0).then(|| 1.0 / self.kappa)
    }

    pub fn theta_curved(&self) -> f64 {
        self.kappa * self.l_curved()
    }

    /// Point on the wire at arc-length `s` from the ground attachment.
    pub fn point_at(&self, s: f64) -> Vec3 {
        if s <= self.l_straight {
            return Vec3::new(0.0, 0.0, s);
        }
        let t = s - self.l_straight;
        let k = self.kappa;
        if k == 0.0 {
            return Vec3::new(0.0, 0.0, s);
        }
        // R(1 - cos a) written as 2 sin^2(a/2)/k to stay accurate as k -> 0
        let half = 0.5 * k * t;
        Vec3::new(
            2.0 * half.sin().powi(2) / k,
            0.0,
            self.l_straight + (k * t).sin() / k,
        )
    }

    /// Closed-form tip position.
    pub fn tip(&self) -> Vec3 {
        self.point_at(self.l_ref)
    }

    /// `true` when the arc bends back below the top of the straight section.
    pub fn has_low_tip(&self) -> bool {
        self.tip().z < self.l_straight
    }

    /// Nominal segment length `lambda / segments_per_wavelength`.
    pub fn target_segment_length(&self) -> f64 {
        self.wavelength() / self.segments_per_wavelength as f64
    }

    fn section_counts(&self) -> (usize, usize) {
        let target = self.target_segment_length();
        let count = |len: f64| -> usize {
            if len <= 0.0 {
                0
            } else {
                ((len / target) - 1e-9).ceil().max(1.0) as usize
            }
        };
        let n_straight = count(self.l_straight);
        let mut n_curved = count(self.l_curved());
        if n_curved > 0 {
            let by_angle = ((self.theta_curved() / MAX_CHORD_ANGLE) - 1e-9).ceil() as usize;
            // tight bends would need chords shorter than the kernel allows
            let by_radius = (self.l_curved() / (2.0 * self.wire_radius)).floor() as usize;
            n_curved = n_curved.max(by_angle.min(by_radius));
        }
        (n_straight, n_curved)
    }
}

/// Discretizes one element. The feed is port 0 on the lowest segment.
pub fn build_curved_monopole(params: &CurvedMonopoleParams) -> Result<WireModel> {
    params.validate()?;
    let (n_straight, n_curved) = params.section_counts();
    let mut arc_lengths = Vec::with_capacity(n_straight + n_curved + 1);
    for i in 0..=n_straight {
        arc_lengths.push(params.l_straight * i as f64 / n_straight.max(1) as f64);
    }
    for i in 1..=n_curved {
        arc_lengths.push(params.l_straight + params.l_curved() * i as f64 / n_curved as f64);
    }
    let points: Vec<Vec3> = arc_lengths.iter().map(|&s| params.point_at(s)).collect();
    let radius = params.wire_radius;
    let mut segments = Vec::with_capacity(points.len() - 1);
    for (i, w) in points.windows(2).enumerate() {
        let seg = WireSegment::new(w[0], w[1], radius);
        if seg.length() < 2.0 * radius {
            return Err(Error::KernelValidity(format!(
                "segment {i} length {:.4} m is below twice the wire radius {radius} m",
                seg.length()
            )));
        }
        segments.push(seg);
    }
    WireModel::new(segments, vec![FeedPort::new(0, Complex64::new(1.0, 0.0))])
}

/// A uniform line of identical elements along +x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayLayout {
    pub element: CurvedMonopoleParams,
    pub n_elements: usize,
    /// Center-to-center spacing along x (m).
    pub spacing: f64,
}

impl ArrayLayout {
    pub fn validate(&self) -> Result<()> {
        if self.n_elements < 1 {
            return Err(Error::Domain("array needs at least one element".into()));
        }
        if !(self.spacing > 0.0) {
            return Err(Error::Domain(format!("spacing must be positive, got {}", self.spacing)));
        }
        self.element.validate()
    }

    pub fn element_offset(&self, n: usize) -> Vec3 {
        Vec3::new(n as f64 * self.spacing, 0.0, 0.0)
    }
}

/// Translated copies of the element at `x = n * spacing`, one port each,
/// ports ordered by element index.
pub fn build_linear_array(layout: &ArrayLayout) -> Result<WireModel> {
    layout.validate()?;
    let element = build_curved_monopole(&layout.element)?;
    if layout.n_elements == 1 {
        return Ok(element);
    }
    let (lo, hi) = element.bounds();
    let footprint = hi.x - lo.x + 2.0 * layout.element.wire_radius;
    if footprint >= layout.spacing {
        return Err(Error::Collision(format!(
            "element footprint {footprint:.3} m along x does not fit in spacing {} m",
            layout.spacing
        )));
    }
    let per = element.segments().len();
    let mut segments = Vec::with_capacity(per * layout.n_elements);
    let mut ports = Vec::with_capacity(layout.n_elements * element.ports().len());
    for n in 0..layout.n_elements {
        let offset = layout.element_offset(n);
        segments.extend(element.segments().iter().map(|s| s.translated(offset)));
        ports.extend(element.ports().iter().map(|p| FeedPort {
            segment_index: p.segment_index + n * per,
            ..*p
        }));
    }
    WireModel::new(segments, ports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimized_design() -> CurvedMonopoleParams {
        CurvedMonopoleParams::default()
    }

    #[test]
    fn quarter_wave_lengths() {
        assert!((reference_length(15e6).unwrap() - 4.99654).abs() < 1e-5);
        assert!((reference_length(30e6).unwrap() - 2.49827).abs() < 1e-5);
        assert!(matches!(reference_length(0.0), Err(Error::Domain(_))));
        assert!(matches!(reference_length(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn curvature_is_reciprocal_radius() {
        assert_eq!(curvature_from_radius(2.0).unwrap(), 0.5);
        assert_eq!(curvature_from_radius(1.0).unwrap(), 1.0);
        assert!(curvature_from_radius(0.0).is_err());
        assert!(curvature_from_radius(-3.0).is_err());
    }

    #[test]
    fn arc_angle_under_length_constraint() {
        let th = solve_arc_angle(4.67, 2.0, 0.5).unwrap();
        assert!((th - 1.335).abs() < 1e-12);
        // the reported 1.33 rad is this value truncated
        assert!((th - 1.33).abs() < 0.01);
        assert_eq!(solve_arc_angle(4.67, 4.67, 0.5).unwrap(), 0.0);
        assert_eq!(solve_arc_angle(4.67, 2.0, 0.0).unwrap(), 0.0);
        assert!(matches!(
            solve_arc_angle(4.67, 5.0, 0.5),
            Err(Error::Constraint(_))
        ));
    }

    #[test]
    fn derived_lengths_add_up() {
        let p = optimized_design();
        assert!((p.l_straight + p.l_curved() - p.l_ref).abs() < 1e-12 * p.l_ref);
        let r = p.r_curved().unwrap();
        assert!((r * p.theta_curved() - p.l_curved()).abs() < 1e-12);
        assert_eq!(p.straight_reference().r_curved(), None);
    }

    #[test]
    fn straight_limit_is_colinear() {
        let p = CurvedMonopoleParams {
            kappa: 0.0,
            ..optimized_design()
        };
        let m = build_curved_monopole(&p).unwrap();
        for s in m.segments() {
            for v in [s.start, s.end] {
                assert_eq!(v.x, 0.0);
                assert_eq!(v.y, 0.0);
            }
        }
        assert!((m.total_length() - 4.67).abs() < 1e-12);
    }

    #[test]
    fn optimal_tip_position() {
        // closed form evaluated directly
        let th: f64 = 1.335;
        let x = 2.0 * (1.0 - th.cos());
        let z = 2.0 + 2.0 * th.sin();
        assert!((x - 1.533).abs() < 1e-3);
        assert!((z - 3.944).abs() < 1e-3);
        let m = build_curved_monopole(&optimized_design()).unwrap();
        let tip = m.segments().last().unwrap().end;
        assert!((tip.x - x).abs() < 1e-12 && (tip.z - z).abs() < 1e-12);
        assert!(tip.y == 0.0);
    }

    #[test]
    fn optimal_length_conserved() {
        let m = build_curved_monopole(&optimized_design()).unwrap();
        assert!((m.total_length() - 4.67).abs() / 4.67 < 1e-3);
    }

    #[test]
    fn feed_on_lowest_segment() {
        let m = build_curved_monopole(&optimized_design()).unwrap();
        assert_eq!(m.ports().len(), 1);
        let s = m.segments()[m.ports()[0].segment_index];
        assert_eq!(s.start, Vec3::new(0.0, 0.0, 0.0));
    }

    #[test]
    fn straight_mesh_count() {
        let p = optimized_design().straight_reference();
        let m = build_curved_monopole(&p).unwrap();
        // 2.0 m and 2.67 m sections at lambda/40 = 0.4997 m
        assert_eq!(m.segments().len(), 5 + 6);
        let full = (p.l_ref / p.target_segment_length()).ceil() as usize;
        assert!(m.segments().len() <= full + 1);
    }

    #[test]
    fn coarse_mesh_rejected() {
        let p = CurvedMonopoleParams {
            wire_radius: 0.3,
            ..optimized_design()
        };
        assert!(matches!(
            build_curved_monopole(&p),
            Err(Error::KernelValidity(_))
        ));
        let p = CurvedMonopoleParams {
            segments_per_wavelength: 5,
            ..optimized_design()
        };
        assert!(build_curved_monopole(&p).is_err());
    }

    #[test]
    fn tangent_junction() {
        let p = optimized_design();
        let m = build_curved_monopole(&p).unwrap();
        let k = m
            .segments()
            .iter()
            .position(|s| (s.end.z - p.l_straight).abs() < 1e-12)
            .unwrap();
        // the first arc chord leans by half its subtended angle
        let (_, n_c) = p.section_counts();
        let half = 0.5 * p.theta_curved() / n_c as f64;
        let d = m.segments()[k].direction().dot(m.segments()[k + 1].direction());
        assert!((d - half.cos()).abs() < 1e-9, "{d}");
        assert!(d > 1.0 - 1e-4);
        let eps = 1e-7;
        let a = p.point_at(p.l_straight - eps);
        let b = p.point_at(p.l_straight + eps);
        assert!((b - a).unit().dot(Vec3::new(0.0, 0.0, 1.0)) > 1.0 - 1e-12);
    }

    #[test]
    fn looping_arc_collides() {
        // theta_curved ~ 2 pi brings the tip back to the junction
        let p = CurvedMonopoleParams {
            kappa: 2.0 * std::f64::consts::PI / 2.67 - 0.01,
            ..optimized_design()
        };
        assert!(matches!(build_curved_monopole(&p), Err(Error::Collision(_))));
    }

    #[test]
    fn low_tip_flag() {
        let p = CurvedMonopoleParams {
            kappa: 1.5,
            ..optimized_design()
        };
        assert!(p.theta_curved() > std::f64::consts::PI);
        assert!(p.has_low_tip());
        assert!(build_curved_monopole(&p).is_ok());
        assert!(!optimized_design().has_low_tip());
    }

    #[test]
    fn twelve_element_layout() {
        let layout = ArrayLayout {
            element: optimized_design(),
            n_elements: 12,
            spacing: 9.0,
        };
        let m = build_linear_array(&layout).unwrap();
        assert_eq!(m.ports().len(), 12);
        let per = build_curved_monopole(&optimized_design()).unwrap().segments().len();
        let s11 = m.segments()[m.ports()[11].segment_index];
        assert_eq!(s11.start, Vec3::new(99.0, 0.0, 0.0));
        assert_eq!(m.ports()[11].segment_index, 11 * per);
        for w in m.ports().windows(2) {
            assert!(w[0].segment_index < w[1].segment_index);
        }
    }

    #[test]
    fn single_element_array_is_element() {
        let layout = ArrayLayout {
            element: optimized_design(),
            n_elements: 1,
            spacing: 9.0,
        };
        assert_eq!(
            build_linear_array(&layout).unwrap(),
            build_curved_monopole(&optimized_design()).unwrap()
        );
    }

    #[test]
    fn close_spacing_collides() {
        let layout = ArrayLayout {
            element: optimized_design(),
            n_elements: 2,
            spacing: 0.1,
        };
        assert!(matches!(build_linear_array(&layout), Err(Error::Collision(_))));
    }

    #[test]
    fn array_elements_are_exact_translations() {
        let layout = ArrayLayout {
            element: optimized_design(),
            n_elements: 4,
            spacing: 9.0,
        };
        let m = build_linear_array(&layout).unwrap();
        let per = m.segments().len() / 4;
        for n in 0..4 {
            let off = layout.element_offset(n);
            for i in 0..per {
                assert_eq!(m.segments()[n * per + i], m.segments()[i].translated(off));
            }
        }
    }

    #[test]
    fn model_validation() {
        let s = |a: [f64; 3], b: [f64; 3]| WireSegment::new(a.into(), b.into(), 0.001);
        let segs = vec![s([0., 0., 0.], [0., 0., 1.]), s([0., 0., 1.], [0., 0., 2.])];
        let one = Complex64::new(1.0, 0.0);
        assert!(WireModel::new(segs.clone(), vec![FeedPort::new(2, one)]).is_err());
        assert!(
            WireModel::new(segs.clone(), vec![FeedPort::new(0, one), FeedPort::new(0, one)])
                .is_err()
        );
        let m = WireModel::new(segs, vec![FeedPort::new(0, one)]).unwrap();
        assert_eq!(m.junctions().len(), 3);
        assert_eq!(m.junctions()[1].ends.len(), 2);
        // overlapping parallel wires
        let segs = vec![s([0., 0., 0.], [0., 0., 1.]), s([0.0005, 0., 0.2], [0.0005, 0., 0.8])];
        assert!(matches!(WireModel::new(segs, vec![]), Err(Error::Collision(_))));
    }

    #[test]
    fn json_field_names() {
        let s = WireSegment::new(Vec3::new(0., 0., 0.), Vec3::new(0., 0., 1.), 0.01);
        let m = WireModel::new(vec![s], vec![FeedPort::new(0, Complex64::new(1.0, 0.5))]).unwrap();
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        assert_eq!(v["segments"][0]["start"], serde_json::json!([0.0, 0.0, 0.0]));
        assert_eq!(v["segments"][0]["end"], serde_json::json!([0.0, 0.0, 1.0]));
        assert_eq!(v["segments"][0]["radius"], serde_json::json!(0.01));
        assert_eq!(v["ports"][0]["segment_index"], serde_json::json!(0));
        let back: WireModel = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn segment_distance_cases() {
        let d = segment_distance(
            Vec3::new(0., 0., 0.),
            Vec3::new(1., 0., 0.),
            Vec3::new(0.5, 1., -1.),
            Vec3::new(0.5, 1., 1.),
        );
        assert!((d - 1.0).abs() < 1e-12);
        // parallel, offset end to end
        let d = segment_distance(
            Vec3::new(0., 0., 0.),
            Vec3::new(1., 0., 0.),
            Vec3::new(2., 0., 0.),
            Vec3::new(3., 0., 0.),
        );
        assert!((d - 1.0).abs() < 1e-12);
    }
}
