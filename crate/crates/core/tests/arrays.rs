//! Coupled array solves against element-level and array-factor references.

mod common;

use common::*;
use curvemom_core::array::{
    elevation_report, pattern_multiplication, solve_array, SteeringSpec,
};
use curvemom_core::farfield::{power_balance, solved_pattern, AngularGrid};
use curvemom_core::mom;
use curvemom_core::{
    build_curved_monopole, build_linear_array, ArrayLayout, CurvedMonopoleParams, Direction,
    GroundModel,
};

fn layout(element: CurvedMonopoleParams, n: usize, spacing: f64) -> ArrayLayout {
    ArrayLayout {
        element,
        n_elements: n,
        spacing,
    }
}

fn grid() -> AngularGrid {
    AngularGrid::default()
}

#[test]
fn single_element_array_is_the_element() {
    let p = CurvedMonopoleParams::default();
    let l = layout(p, 1, 9.0);
    let ar = solve_array(&l, &SteeringSpec::uniform(0.0, 0.0, 1), f15(), GroundModel::InfinitePec, &grid(), 50.0).unwrap();
    let m = build_curved_monopole(&p).unwrap();
    let r = mom::solve(&m, f15(), GroundModel::InfinitePec).unwrap();
    let pat = solved_pattern(&r, &m, &grid(), 50.0).unwrap();
    assert_eq!(ar.active_impedances[0], r.port_impedances[0]);
    assert_eq!(ar.pattern.e_theta, pat.e_theta);
    assert_eq!(ar.pattern.peak(), pat.peak());
}

#[test]
fn widely_spaced_elements_decouple() {
    // radiative coupling between vertical elements falls off as 1/d
    let p = CurvedMonopoleParams::default();
    let lam = f15().wavelength();
    let m = build_curved_monopole(&p).unwrap();
    let z = mom::solve(&m, f15(), GroundModel::InfinitePec).unwrap().port_impedances[0];
    let deviation = |d: f64| {
        let l = layout(p, 3, d * lam);
        let ar = solve_array(&l, &SteeringSpec::uniform(0.0, 0.0, 3), f15(), GroundModel::InfinitePec, &grid(), 50.0).unwrap();
        rel_err(ar.active_impedances[1], z)
    };
    let (d10, d20, d40) = (deviation(10.0), deviation(20.0), deviation(40.0));
    assert!(d10 < 0.06, "{d10}");
    assert!((d10 / d20 - 2.0).abs() < 0.3, "{d10} {d20}");
    assert!((d20 / d40 - 2.0).abs() < 0.3, "{d20} {d40}");
    assert!(d40 < 0.02, "{d40}");
}

#[test]
fn layout_matrix_is_symmetric_and_translated() {
    let l = layout(CurvedMonopoleParams::default(), 4, 9.0);
    let m = build_linear_array(&l).unwrap();
    let z = mom::fill_impedance_matrix(&m, f15(), GroundModel::InfinitePec).unwrap();
    assert!(z.asymmetry() < 1e-10);
    let per = m.segments().len() / 4;
    for n in 0..4 {
        for k in 0..per {
            let a = m.segments()[k].translated(l.element_offset(n));
            assert_eq!(a, m.segments()[n * per + k]);
        }
    }
}

#[test]
fn broadside_active_impedances_are_mirror_symmetric() {
    // exact for straight elements; the common +x bend breaks it only slightly
    let p = CurvedMonopoleParams::default();
    for element in [p.straight_reference(), p] {
        let l = layout(element, 12, 9.0);
        let ar = solve_array(&l, &SteeringSpec::uniform(0.0, 0.0, 12), f15(), GroundModel::InfinitePec, &grid(), 50.0).unwrap();
        for n in 0..12 {
            assert!(rel_err(ar.active_impedances[n], ar.active_impedances[11 - n]) < 0.01);
        }
    }
}

#[test]
fn steered_array_balances_power_and_reports_elevation() {
    let l = layout(CurvedMonopoleParams::default(), 12, 9.0);
    let spec = SteeringSpec::uniform(30f64.to_radians(), 0.0, 12);
    let ar = solve_array(&l, &spec, f15(), GroundModel::InfinitePec, &grid(), 50.0).unwrap();
    assert_eq!(ar.active_impedances.len(), 12);
    assert!(power_balance(&ar.solve, &ar.pattern).unwrap() < 0.02);
    assert!(ar.solve.residual < 1e-10);
    let rep = elevation_report(&ar, (0.0, 45.0));
    assert_eq!(rep.rows.len(), 46);
    assert_eq!(rep.rows[0].0, 0.0);
    assert!((rep.rows[45].0 - 45.0).abs() < 1e-9);
    let at30 = rep.rows.iter().find(|r| (r.0 - 30.0).abs() < 1e-9).unwrap();
    assert!((at30.1 - ar.gain_at_steering).abs() < 1e-9);
}

#[test]
fn sparse_array_matches_pattern_multiplication() {
    let lam = f15().wavelength();
    let l = layout(CurvedMonopoleParams::default(), 4, 2.0 * lam);
    let spec = SteeringSpec::uniform(0.0, 0.0, 4);
    let fw = solve_array(&l, &spec, f15(), GroundModel::InfinitePec, &grid(), 50.0).unwrap();
    let pm = pattern_multiplication(&l, &spec, f15(), GroundModel::InfinitePec, &grid(), 50.0).unwrap();
    assert!((fw.pattern.peak().0 - pm.peak().0).abs() < 0.5, "{:?} {:?}", fw.pattern.peak(), pm.peak());
}

#[test]
fn broadside_vertical_array_has_zenith_null() {
    let l = layout(CurvedMonopoleParams::default().straight_reference(), 12, 9.0);
    let ar = solve_array(&l, &SteeringSpec::uniform(0.0, 0.0, 12), f15(), GroundModel::InfinitePec, &grid(), 50.0).unwrap();
    let zenith = ar.pattern.realized_gain_dbi_at(Direction::new(0.0, 0.0));
    assert!(zenith < ar.pattern.peak().0 - 40.0, "{zenith}");
}

#[test]
fn overlapping_elements_collide() {
    let l = layout(CurvedMonopoleParams::default(), 2, 0.1);
    assert!(matches!(build_linear_array(&l), Err(curvemom_core::Error::Collision(_))));
}
