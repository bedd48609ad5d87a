#![allow(dead_code)]

use curvemom_core::quadrature::GaussRule;
use curvemom_core::{Complex64, FeedPort, Frequency, Vec3, WireModel, WireSegment};

pub fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

pub fn f15() -> Frequency {
    Frequency::new(15e6).unwrap()
}

/// `n` equal vertical segments from `z0` to `z0 + len`.
pub fn vertical_wire(n: usize, len: f64, radius: f64, z0: f64) -> Vec<WireSegment> {
    (0..n)
        .map(|i| {
            let a = z0 + len * i as f64 / n as f64;
            let b = z0 + len * (i + 1) as f64 / n as f64;
            WireSegment::new(Vec3::new(0.0, 0.0, a), Vec3::new(0.0, 0.0, b), radius)
        })
        .collect()
}

/// Centre-fed free-space dipole of total length `len` with `n` segments
/// (`n` even so the feed sits on the middle node).
pub fn dipole(n: usize, len: f64, radius: f64) -> WireModel {
    assert!(n.is_multiple_of(2));
    WireModel::new(
        vertical_wire(n, len, radius, -len / 2.0),
        vec![FeedPort::new(n / 2, one())],
    )
    .unwrap()
}

/// Base-fed monopole of height `h` standing on z = 0.
pub fn monopole(n: usize, h: f64, radius: f64) -> WireModel {
    WireModel::new(vertical_wire(n, h, radius, 0.0), vec![FeedPort::new(0, one())]).unwrap()
}

fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let rule = GaussRule::new(16);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            rule.iter()
                .map(|(x, w)| w * h * f(a + h * (p as f64 + x)))
                .sum::<f64>()
        })
        .sum()
}

/// Induced-EMF impedance of an infinitely thin half-wave dipole with a
/// sinusoidal current: `30 Cin(2 pi) + j 30 Si(2 pi)`.
pub fn induced_emf_half_wave() -> Complex64 {
    let x = 2.0 * std::f64::consts::PI;
    let cin = integrate(|t| if t == 0.0 { 0.0 } else { (1.0 - t.cos()) / t }, 0.0, x, 8);
    let si = integrate(|t| if t == 0.0 { 1.0 } else { t.sin() / t }, 0.0, x, 8);
    Complex64::new(30.0 * cin, 30.0 * si)
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}
