//! Writes recipe results to an output directory.
//!
//! Every number goes through `fmt9`, JSON included, so identical runs give
//! identical bytes. Run metadata lives only in `manifest.toml`.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use curvemom_core::farfield::{plane_cut, FarFieldPattern};
use curvemom_core::format::{fmt9, fmt9_trim};
use curvemom_core::rf::{write_impedance_csv, write_touchstone, FrequencyResponse};
use curvemom_core::Complex64;
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::plot::{render_line_plot, render_polar_plot, LinePlot, Series};
use crate::recipes::{ArrayComparison, ArrayRun, Comparison, DesignResult, SweepReport};

/// A JSON number printed with [`fmt9`]; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    serde_json::Number::from_str(&fmt9(x)).map_or(Value::Null, Value::Number)
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

fn complex_pair(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.root.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path);
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// `manifest.toml`: the tool version and command as comments, then the
/// resolved config, which loads back through `--config`.
pub fn manifest(command: &str, cfg: &RunConfig) -> String {
    format!(
        "# curvemom {}\n# command: {command}\n{}",
        env!("CARGO_PKG_VERSION"),
        cfg.to_toml()
    )
}

pub fn write_manifest(out: &mut OutputDir, command: &str, cfg: &RunConfig) -> Result<()> {
    out.write("manifest.toml", &manifest(command, cfg))
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

fn return_loss_points(resp: &FrequencyResponse) -> Result<Vec<(f64, f64)>> {
    Ok(resp
        .entries()
        .iter()
        .zip(resp.return_loss_db()?)
        .map(|(e, rl)| (e.frequency_hz / 1e6, rl))
        .collect())
}

/// Elevation-plane cut through phi = 0 in degrees, theta from -90 to 90.
pub fn phi0_cut_deg(pattern: &FarFieldPattern) -> Vec<(f64, f64)> {
    plane_cut(pattern, 0.0)
        .into_iter()
        .map(|(t, g)| (t.to_degrees(), g))
        .collect()
}

/// Joins series sampled on the same abscissa into CSV rows.
fn overlay_csv(x_label: &str, series: &[Series]) -> String {
    let mut header = vec![x_label];
    header.extend(series.iter().map(|s| s.label.as_str()));
    let n = series.first().map_or(0, |s| s.points.len());
    let rows = (0..n).map(|i| {
        let mut row = vec![fmt9(series[0].points[i].0)];
        row.extend(series.iter().map(|s| fmt9(s.points[i].1)));
        row
    });
    csv_table(&header, rows)
}

fn write_impedance(out: &mut OutputDir, cfg: &RunConfig, stem: &str, resp: &FrequencyResponse) -> Result<()> {
    if cfg.wants(Format::Csv) {
        out.write(&format!("{stem}.csv"), &write_impedance_csv(resp)?)?;
    }
    if cfg.wants(Format::S1p) {
        out.write(&format!("{stem}.s1p"), &write_touchstone(resp)?)?;
    }
    Ok(())
}

pub fn design_json(d: &DesignResult) -> Value {
    let (rg, th, ph) = d.pattern.peak();
    let b = &d.bandwidth;
    json!({
        "kappa": num(d.params.kappa),
        "l_straight_m": num(d.params.l_straight),
        "l_ref_m": num(d.params.l_ref),
        "n_segments": d.n_segments,
        "low_tip": d.low_tip,
        "best_rl_db": opt_num(d.best_return_loss.map(|b| b.0)),
        "best_rl_freq_hz": opt_num(d.best_return_loss.map(|b| b.1)),
        "resonant_hz": opt_num(d.resonant_hz),
        "bandwidth_hz": num(b.bandwidth),
        "f_low_hz": num(b.f_low),
        "f_high_hz": num(b.f_high),
        "band_contains_fc": b.contains_fc,
        "z_fc": complex_pair(d.z_center),
        "peak_rg_dbi": num(rg),
        "peak_theta_deg": num(th.to_degrees()),
        "peak_phi_deg": num(ph.to_degrees()),
        "peak_directivity_dbi": num(d.pattern.peak_directivity_dbi()),
        "p_rad_w": num(d.pattern.radiated_power),
        "mismatch": num(d.pattern.mismatch_factor),
    })
}

pub fn write_sweep(out: &mut OutputDir, cfg: &RunConfig, report: &SweepReport) -> Result<()> {
    let name = report.parameter.name();
    for r in &report.records {
        if let Ok(d) = &r.outcome {
            write_impedance(out, cfg, &format!("{name}_{}", fmt9_trim(r.value)), &d.response)?;
        }
    }
    if cfg.wants(Format::Csv) {
        let rows = report.records.iter().map(|r| match &r.outcome {
            Ok(d) => vec![
                fmt9(r.value),
                "ok".into(),
                d.best_return_loss.map_or("nan".into(), |b| fmt9(b.0)),
                d.best_return_loss.map_or("nan".into(), |b| fmt9_trim(b.1)),
                d.resonant_hz.map_or("nan".into(), fmt9),
                fmt9(d.bandwidth.bandwidth),
                fmt9(d.bandwidth.f_low),
                fmt9(d.bandwidth.f_high),
                fmt9(d.peak_rg_dbi()),
                d.low_tip.to_string(),
            ],
            Err(_) => {
                let mut row = vec![fmt9(r.value), "failed".into()];
                row.extend(std::iter::repeat_n("nan".to_string(), 7));
                row.push("false".into());
                row
            }
        });
        out.write(
            "sweep_summary.csv",
            &csv_table(
                &[
                    "value",
                    "status",
                    "best_rl_db",
                    "best_rl_freq_hz",
                    "resonant_hz",
                    "bandwidth_hz",
                    "f_low_hz",
                    "f_high_hz",
                    "peak_rg_dbi",
                    "low_tip",
                ],
                rows,
            ),
        )?;
    }
    if cfg.wants(Format::Json) {
        let value_of = |i: Option<usize>| opt_num(i.map(|i| report.records[i].value));
        let records: Vec<Value> = report
            .records
            .iter()
            .map(|r| {
                let mut m = Map::new();
                m.insert("value".into(), num(r.value));
                match &r.outcome {
                    Ok(d) => {
                        m.insert("status".into(), "ok".into());
                        if let Value::Object(extra) = design_json(d) {
                            m.extend(extra);
                        }
                    }
                    Err(e) => {
                        m.insert("status".into(), "failed".into());
                        m.insert("error".into(), e.clone().into());
                    }
                }
                Value::Object(m)
            })
            .collect();
        out.write_json(
            "sweep_report.json",
            &json!({
                "parameter": name,
                "threshold_db": num(cfg.threshold_db),
                "best_match_value": value_of(report.best_match()),
                "best_bandwidth_value": value_of(report.best_bandwidth()),
                "failures": report.failures(),
                "records": records,
            }),
        )?;
    }
    if cfg.wants(Format::Svg) {
        let mut series = Vec::new();
        for r in &report.records {
            if let Ok(d) = &r.outcome {
                series.push(Series {
                    label: format!("{name} = {}", fmt9_trim(r.value)),
                    points: return_loss_points(&d.response)?,
                });
            }
        }
        out.write(
            "return_loss.svg",
            &render_line_plot(&LinePlot {
                title: format!("Return loss, {name} sweep"),
                x_label: "frequency (MHz)".into(),
                y_label: "S11 (dB)".into(),
                series,
            }),
        )?;
    }
    Ok(())
}

pub fn write_compare(out: &mut OutputDir, cfg: &RunConfig, c: &Comparison) -> Result<()> {
    write_impedance(out, cfg, "impedance_reference", &c.reference.response)?;
    write_impedance(out, cfg, "impedance_optimized", &c.optimized.response)?;
    let rl = vec![
        Series {
            label: "reference_s11_db".into(),
            points: return_loss_points(&c.reference.response)?,
        },
        Series {
            label: "optimized_s11_db".into(),
            points: return_loss_points(&c.optimized.response)?,
        },
    ];
    let cut = vec![
        Series {
            label: "reference_rg_dbi".into(),
            points: phi0_cut_deg(&c.reference.pattern),
        },
        Series {
            label: "optimized_rg_dbi".into(),
            points: phi0_cut_deg(&c.optimized.pattern),
        },
    ];
    if cfg.wants(Format::Csv) {
        out.write("return_loss_overlay.csv", &overlay_csv("freq_mhz", &rl))?;
        out.write("cut_phi0_overlay.csv", &overlay_csv("theta_deg", &cut))?;
        out.write("pattern_reference.csv", &c.reference.pattern.to_csv())?;
        out.write("pattern_optimized.csv", &c.optimized.pattern.to_csv())?;
    }
    if cfg.wants(Format::Json) {
        let d = &c.deltas;
        out.write_json(
            "compare.json",
            &json!({
                "reference": design_json(&c.reference),
                "optimized": design_json(&c.optimized),
                "deltas": {
                    "delta_peak_rg_db": num(d.delta_peak_rg_db),
                    "peak_ratio": num(d.peak_ratio),
                    "percent_increase": num(d.percent_increase),
                    "delta_bandwidth_hz": num(d.delta_bandwidth_hz),
                },
            }),
        )?;
    }
    if cfg.wants(Format::Svg) {
        out.write(
            "return_loss_overlay.svg",
            &render_line_plot(&LinePlot {
                title: "Return loss".into(),
                x_label: "frequency (MHz)".into(),
                y_label: "S11 (dB)".into(),
                series: rl,
            }),
        )?;
        out.write(
            "cut_phi0_overlay.svg",
            &render_polar_plot("Realized gain, phi = 0 plane", &cut, 40.0),
        )?;
    }
    Ok(())
}

fn array_json(run: &ArrayRun) -> Value {
    let r = &run.result;
    let (rg, th, ph) = r.pattern.peak();
    let cut = phi0_cut_deg(&r.pattern);
    let est_cut = phi0_cut_deg(&run.estimate);
    json!({
        "n": run.layout.n_elements,
        "spacing_m": num(run.layout.spacing),
        "theta0_deg": num(run.steering.theta0.to_degrees()),
        "gain_at_steer_dbi": num(r.gain_at_steering),
        "active_z": r.active_impedances.iter().map(|&z| complex_pair(z)).collect::<Vec<_>>(),
        "backlobe_dbi": num(run.elevation.backlobe_dbi),
        "kappa": num(run.layout.element.kappa),
        "peak_rg_dbi": num(rg),
        "peak_theta_deg": num(th.to_degrees()),
        "peak_phi_deg": num(ph.to_degrees()),
        "cut_peak_theta_deg": num(cut_peak(&cut).0),
        "estimate_cut_peak_theta_deg": num(cut_peak(&est_cut).0),
        "estimate_gain_at_steer_dbi": num(run.estimate_gain_at_steer_dbi()),
        "outside_main_lobe_db": opt_num(run.outside_main_lobe_db),
        "plane_sidelobe_db": opt_num(run.plane_sidelobe_db),
        "mismatch": num(r.pattern.mismatch_factor),
        "residual": num(r.solve.residual),
    })
}

/// `(theta_deg, dB)` of the largest finite sample; ties go to the first.
pub fn cut_peak(cut: &[(f64, f64)]) -> (f64, f64) {
    cut.iter()
        .copied()
        .filter(|p| p.1.is_finite())
        .fold((f64::NAN, f64::NEG_INFINITY), |a, p| if p.1 > a.1 { p } else { a })
}

pub fn write_array(out: &mut OutputDir, cfg: &RunConfig, a: &ArrayComparison) -> Result<()> {
    let cut = vec![
        Series {
            label: "curved_rg_dbi".into(),
            points: phi0_cut_deg(&a.curved.result.pattern),
        },
        Series {
            label: "reference_rg_dbi".into(),
            points: phi0_cut_deg(&a.reference.result.pattern),
        },
    ];
    let elevation = vec![
        Series {
            label: "curved_rg_dbi".into(),
            points: a.curved.elevation.rows.clone(),
        },
        Series {
            label: "reference_rg_dbi".into(),
            points: a.reference.elevation.rows.clone(),
        },
    ];
    if cfg.wants(Format::Csv) {
        out.write("elevation.csv", &overlay_csv("theta_deg", &elevation))?;
        out.write("cut_phi0_overlay.csv", &overlay_csv("theta_deg", &cut))?;
        out.write("pattern_curved.csv", &a.curved.result.pattern.to_csv())?;
        out.write("pattern_reference.csv", &a.reference.result.pattern.to_csv())?;
    }
    if cfg.wants(Format::Json) {
        let delta = a.delta_gain_at_steer_db;
        out.write_json(
            "array.json",
            &json!({
                "curved": array_json(&a.curved),
                "reference": array_json(&a.reference),
                "delta_gain_at_steer_db": num(delta),
                "gain_ratio": num(curvemom_core::rf::power_ratio_from_db(delta)),
                "percent_increase": num(curvemom_core::rf::percent_increase_from_db(delta)),
            }),
        )?;
    }
    if cfg.wants(Format::Svg) {
        out.write(
            "elevation.svg",
            &render_line_plot(&LinePlot {
                title: "Array realized gain, phi = 0".into(),
                x_label: "theta (deg)".into(),
                y_label: "gain (dBi)".into(),
                series: elevation,
            }),
        )?;
        out.write(
            "cut_phi0_overlay.svg",
            &render_polar_plot("Array realized gain, phi = 0 plane", &cut, 40.0),
        )?;
    }
    Ok(())
}

/// One SVG per input CSV, named after the input file.
pub fn plot_files(inputs: &[PathBuf], out: &mut OutputDir, polar: bool) -> Result<()> {
    for path in inputs {
        let text = fs::read_to_string(path)
            .map_err(|e| crate::config::config_error(format!("cannot read {}: {e}", path.display())))?;
        let (x_label, series) =
            crate::plot::read_csv_series(&text).with_context(|| format!("in {}", path.display()))?;
        let stem = path
            .file_stem()
            .map_or_else(|| "plot".to_string(), |s| s.to_string_lossy().into_owned());
        let svg = if polar {
            render_polar_plot(&stem, &series, 40.0)
        } else {
            render_line_plot(&LinePlot {
                title: stem.clone(),
                x_label,
                y_label: String::new(),
                series,
            })
        };
        out.write(&format!("{stem}.svg"), &svg)?;
    }
    Ok(())
}
