//! The experiments: parameter sweeps, the single-element comparison and the
//! steered-array comparison.

use anyhow::{Context, Result};
use curvemom_core::array::{
    elevation_report, pattern_multiplication, peak_outside_main_lobe_db, peak_sidelobe_db,
    solve_array, ArrayResult, ElevationReport, SteeringSpec,
};
use curvemom_core::farfield::{plane_cut, solved_pattern, FarFieldPattern};
use curvemom_core::geometry::{build_curved_monopole, ArrayLayout, CurvedMonopoleParams};
use curvemom_core::mom::{self, Frequency};
use curvemom_core::rf::{self, BandwidthReport, FrequencyResponse};
use curvemom_core::Complex64;
use rayon::prelude::*;

use crate::config::{RunConfig, SweepParameter};

/// Everything measured for one element design.
#[derive(Debug, Clone)]
pub struct DesignResult {
    pub params: CurvedMonopoleParams,
    pub n_segments: usize,
    pub response: FrequencyResponse,
    pub bandwidth: BandwidthReport,
    /// `(dB, Hz)` of the deepest return-loss sample.
    pub best_return_loss: Option<(f64, f64)>,
    pub resonant_hz: Option<f64>,
    /// Pattern at the design centre frequency.
    pub pattern: FarFieldPattern,
    pub z_center: Complex64,
    pub low_tip: bool,
}

impl DesignResult {
    pub fn peak_rg_dbi(&self) -> f64 {
        self.pattern.peak().0
    }

    /// Deepest return loss, `+inf` when unavailable; smaller is better.
    pub fn match_metric(&self) -> f64 {
        self.best_return_loss.map_or(f64::INFINITY, |b| b.0)
    }
}

pub fn evaluate_design(params: &CurvedMonopoleParams, cfg: &RunConfig) -> Result<DesignResult> {
    let model = build_curved_monopole(params)?;
    let freqs = cfg.frequency.frequencies();
    let response = mom::input_impedance_sweep(&model, &freqs, cfg.ground, cfg.z0)?;
    let bandwidth = rf::extract_bandwidth(&response, params.f_c, cfg.threshold_db)?;
    let best_return_loss = response.best_return_loss()?;
    let fc = Frequency::new(params.f_c)?;
    let solved = mom::solve(&model, fc, cfg.ground)
        .with_context(|| format!("solving at the centre frequency {} Hz", params.f_c))?;
    let pattern = solved_pattern(&solved, &model, &cfg.pattern, cfg.z0)?;
    Ok(DesignResult {
        params: *params,
        n_segments: model.segments().len(),
        resonant_hz: response.resonant_frequency(),
        response,
        bandwidth,
        best_return_loss,
        z_center: solved.port_impedances[0],
        pattern,
        low_tip: params.has_low_tip(),
    })
}

#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub value: f64,
    pub outcome: std::result::Result<DesignResult, String>,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub parameter: SweepParameter,
    pub records: Vec<SweepRecord>,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.outcome.is_err()).count()
    }

    fn ok(&self) -> impl Iterator<Item = (usize, &DesignResult)> {
        self.records
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.outcome.as_ref().ok().map(|d| (i, d)))
    }

    /// Index of the design with the deepest return-loss dip.
    pub fn best_match(&self) -> Option<usize> {
        self.ok()
            .min_by(|a, b| a.1.match_metric().total_cmp(&b.1.match_metric()))
            .map(|(i, _)| i)
    }

    /// Index of the design with the widest band below the threshold.
    pub fn best_bandwidth(&self) -> Option<usize> {
        self.ok()
            .max_by(|a, b| a.1.bandwidth.bandwidth.total_cmp(&b.1.bandwidth.bandwidth))
            .map(|(i, _)| i)
    }
}

/// Runs every sweep value; failing points are recorded, not fatal.
pub fn run_sweep(cfg: &RunConfig, parameter: SweepParameter) -> Result<SweepReport> {
    let values = cfg.sweep_values(parameter)?;
    let records = values
        .par_iter()
        .map(|&value| {
            let params = parameter.apply(&cfg.geometry, value);
            SweepRecord {
                value,
                outcome: evaluate_design(&params, cfg).map_err(|e| format!("{e:#}")),
            }
        })
        .collect();
    Ok(SweepReport { parameter, records })
}

/// `optimized - reference` figures of merit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deltas {
    pub delta_peak_rg_db: f64,
    /// Linear power ratio, `10^(delta / 10)`.
    pub peak_ratio: f64,
    pub percent_increase: f64,
    pub delta_bandwidth_hz: f64,
}

impl Deltas {
    pub fn new(delta_db: f64, delta_bandwidth_hz: f64) -> Self {
        Deltas {
            delta_peak_rg_db: delta_db,
            peak_ratio: rf::power_ratio_from_db(delta_db),
            percent_increase: rf::percent_increase_from_db(delta_db),
            delta_bandwidth_hz,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub reference: DesignResult,
    pub optimized: DesignResult,
    pub deltas: Deltas,
}

/// The configured design against its straight (kappa = 0) counterpart.
pub fn run_compare(cfg: &RunConfig) -> Result<Comparison> {
    let optimized_params = cfg.geometry;
    let reference_params = optimized_params.straight_reference();
    let (reference, optimized) = rayon::join(
        || evaluate_design(&reference_params, cfg).context("reference design"),
        || evaluate_design(&optimized_params, cfg).context("optimized design"),
    );
    let (reference, optimized) = (reference?, optimized?);
    let deltas = Deltas::new(
        optimized.peak_rg_dbi() - reference.peak_rg_dbi(),
        optimized.bandwidth.bandwidth - reference.bandwidth.bandwidth,
    );
    Ok(Comparison {
        reference,
        optimized,
        deltas,
    })
}

#[derive(Debug, Clone)]
pub struct ArrayRun {
    pub layout: ArrayLayout,
    pub steering: SteeringSpec,
    pub result: ArrayResult,
    /// Isolated element pattern times the array factor.
    pub estimate: FarFieldPattern,
    pub elevation: ElevationReport,
    /// Strongest direction outside the main-lobe cone, dB below the peak.
    pub outside_main_lobe_db: Option<f64>,
    /// Highest secondary maximum in the phi = 0 plane, dB below its peak.
    pub plane_sidelobe_db: Option<f64>,
}

impl ArrayRun {
    pub fn estimate_gain_at_steer_dbi(&self) -> f64 {
        self.estimate.realized_gain_dbi_at(self.steering.direction())
    }
}

pub fn run_array_for(
    cfg: &RunConfig,
    element: CurvedMonopoleParams,
    theta0_deg: f64,
) -> Result<ArrayRun> {
    let f = Frequency::new(element.f_c)?;
    let layout = ArrayLayout {
        element,
        n_elements: cfg.array.n_elements,
        spacing: cfg.array.spacing,
    };
    let steering = SteeringSpec::uniform(
        theta0_deg.to_radians(),
        cfg.array.steer_phi_deg.to_radians(),
        layout.n_elements,
    );
    let result = solve_array(&layout, &steering, f, cfg.ground, &cfg.pattern, cfg.z0)?;
    let estimate = pattern_multiplication(&layout, &steering, f, cfg.ground, &cfg.pattern, cfg.z0)?;
    let elevation = elevation_report(&result, (0.0, 45.0));
    let outside_main_lobe_db = peak_outside_main_lobe_db(&result.pattern, &layout, &steering, f);
    let plane_sidelobe_db = peak_sidelobe_db(&plane_cut(&result.pattern, 0.0));
    Ok(ArrayRun {
        layout,
        steering,
        result,
        estimate,
        elevation,
        outside_main_lobe_db,
        plane_sidelobe_db,
    })
}

#[derive(Debug, Clone)]
pub struct ArrayComparison {
    pub curved: ArrayRun,
    pub reference: ArrayRun,
    pub delta_gain_at_steer_db: f64,
}

/// The configured element and the straight reference in the same array.
pub fn run_array(cfg: &RunConfig) -> Result<ArrayComparison> {
    let theta0 = cfg.array.steer_theta_deg;
    let (curved, reference) = rayon::join(
        || run_array_for(cfg, cfg.geometry, theta0).context("curved-element array"),
        || {
            run_array_for(cfg, cfg.geometry.straight_reference(), theta0)
                .context("reference array")
        },
    );
    let (curved, reference) = (curved?, reference?);
    let delta_gain_at_steer_db =
        curved.result.gain_at_steering - reference.result.gain_at_steering;
    Ok(ArrayComparison {
        curved,
        reference,
        delta_gain_at_steer_db,
    })
}
