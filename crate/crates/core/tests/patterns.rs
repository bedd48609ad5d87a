//! Far-field symmetry and normalization properties.

mod common;

use std::f64::consts::PI;

use common::*;
use curvemom_core::farfield::{
    directivity_gain, pattern_cut, solved_pattern, AngularGrid, CurrentDistribution,
};
use curvemom_core::mom;
use curvemom_core::{
    build_curved_monopole, CurvedMonopoleParams, Direction, Error, FarFieldPattern, GroundModel,
    Vec3, WireModel, WireSegment,
};

fn solved(model: &WireModel) -> (mom::SolveResult, FarFieldPattern) {
    let r = mom::solve(model, f15(), GroundModel::InfinitePec).unwrap();
    let p = solved_pattern(&r, model, &AngularGrid::default(), 50.0).unwrap();
    (r, p)
}

fn curved() -> WireModel {
    build_curved_monopole(&CurvedMonopoleParams::default()).unwrap()
}

fn straight() -> WireModel {
    build_curved_monopole(&CurvedMonopoleParams::default().straight_reference()).unwrap()
}

#[test]
fn vertical_monopole_is_vertically_polarized_with_zenith_null() {
    let m = straight();
    let (r, p) = solved(&m);
    let emax = p.e_theta.iter().map(|e| e.norm()).fold(0.0, f64::max);
    assert!(p.e_phi.iter().all(|e| e.norm() <= 1e-12 * emax));
    let cd = CurrentDistribution::new(&r, &m);
    let (et, _) = cd.field(Direction::new(0.0, 0.0)).unwrap();
    assert!(et.norm() <= 1e-12 * emax);
}

#[test]
fn vertical_monopole_is_axisymmetric() {
    let (_, p) = solved(&straight());
    let a = pattern_cut(&p, 0.0);
    let b = pattern_cut(&p, PI / 2.0);
    for (x, y) in a.iter().zip(&b).skip(1) {
        assert!((x.1 - y.1).abs() < 0.01, "{x:?} {y:?}");
    }
}

#[test]
fn curved_pattern_is_mirror_symmetric_in_phi() {
    let m = curved();
    let r = mom::solve(&m, f15(), GroundModel::InfinitePec).unwrap();
    let cd = CurrentDistribution::new(&r, &m);
    for (t, ph) in [(20.0, 30.0), (60.0, 100.0), (85.0, 170.0), (45.0, 5.0)] {
        let (a1, b1) = cd.field(Direction::from_degrees(t, ph)).unwrap();
        let (a2, b2) = cd.field(Direction::from_degrees(t, -ph)).unwrap();
        // E_phi flips sign under the mirror because phi_hat does
        assert!((a1 - a2).norm() <= 1e-9 * a1.norm().max(1e-30));
        assert!((b1 + b2).norm() <= 1e-9 * a1.norm().max(b1.norm()));
    }
}

#[test]
fn curved_front_back_asymmetry_matches_mirrored_geometry() {
    let m = curved();
    let (_, p) = solved(&m);
    let front = pattern_cut(&p, 0.0);
    let back = pattern_cut(&p, PI);
    let max_diff = front
        .iter()
        .zip(&back)
        .skip(1)
        .map(|(a, b)| (a.1 - b.1).abs())
        .fold(0.0, f64::max);
    assert!(max_diff > 0.1, "{max_diff}");

    let flip = |v: Vec3| Vec3::new(-v.x, v.y, v.z);
    let segs: Vec<WireSegment> = m
        .segments()
        .iter()
        .map(|s| WireSegment::new(flip(s.start), flip(s.end), s.radius))
        .collect();
    let mirrored = WireModel::new(segs, m.ports().to_vec()).unwrap();
    let (_, pm) = solved(&mirrored);
    for (a, b) in pattern_cut(&pm, 0.0).iter().zip(&back).skip(1) {
        assert!((a.1 - b.1).abs() < 1e-6, "{a:?} {b:?}");
    }
}

#[test]
fn directivity_normalizes_and_orders_gains() {
    for m in [straight(), curved()] {
        let (_, p) = solved(&m);
        assert!((p.directivity_integral() - 1.0).abs() < 0.01);
        for s in directivity_gain(&p) {
            assert!(s.realized_gain_dbi <= s.gain_dbi + 1e-12);
            assert!(s.gain_dbi <= s.directivity_dbi + 1e-12);
        }
        assert!(p.mismatch_factor > 0.0 && p.mismatch_factor <= 1.0);
        assert!(p.radiated_power > 0.0);
    }
}

#[test]
fn cut_endpoint_is_the_grid_zenith_sample() {
    let (_, p) = solved(&curved());
    let cut = pattern_cut(&p, 0.7);
    let zenith = directivity_gain(&p)[0].realized_gain_dbi;
    assert_eq!(cut[0].1, zenith);
    assert_eq!(cut.len(), p.thetas.len());
}

#[test]
fn field_below_horizon_is_rejected_over_pec() {
    let m = curved();
    let r = mom::solve(&m, f15(), GroundModel::InfinitePec).unwrap();
    let cd = CurrentDistribution::new(&r, &m);
    assert!(matches!(
        cd.field(Direction::from_degrees(100.0, 0.0)),
        Err(Error::Domain(_))
    ));
}

#[test]
fn coarse_grids_are_rejected() {
    let g = AngularGrid {
        theta_step_deg: 3.0,
        phi_step_deg: 2.0,
    };
    assert!(g.thetas(GroundModel::InfinitePec).is_err());
}
