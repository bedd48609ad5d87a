//! Reflection, return loss, bandwidth and Touchstone/CSV output.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{fmt9, fmt9_trim};

pub const DEFAULT_Z0: f64 = 50.0;
pub const DEFAULT_THRESHOLD_DB: f64 = -10.0;

/// Floor used when interpolating across a perfectly matched sample.
const RL_FLOOR_DB: f64 = -400.0;

/// Reflection coefficient of `z_in` against a real reference `z0`.
pub fn s11(z_in: Complex64, z0: f64) -> Result<Complex64> {
    if !(z0 > 0.0) {
        return Err(Error::Domain(format!("reference impedance must be positive, got {z0}")));
    }
    let den = z_in + z0;
    if den.norm() == 0.0 {
        return Err(Error::Domain("load equals -z0: reflection pole".into()));
    }
    Ok((z_in - z0) / den)
}

/// `20 log10 |s|`; a perfect match gives negative infinity.
pub fn return_loss_db(s: Complex64) -> f64 {
    let m = s.norm();
    if m == 0.0 {
        f64::NEG_INFINITY
    } else {
        20.0 * m.log10()
    }
}

pub fn vswr(s: Complex64) -> f64 {
    let m = s.norm();
    if m >= 1.0 {
        f64::INFINITY
    } else {
        (1.0 + m) / (1.0 - m)
    }
}

/// Fraction of incident power accepted by a set of ports driven with
/// `weights`: `1 - sum |w|^2 |G|^2 / sum |w|^2`.
pub fn mismatch_factor(z_in: &[Complex64], weights: &[Complex64], z0: f64) -> Result<f64> {
    let mut inc = 0.0;
    let mut refl = 0.0;
    for (z, w) in z_in.iter().zip(weights) {
        let g = s11(*z, z0)?;
        inc += w.norm_sqr();
        refl += w.norm_sqr() * g.norm_sqr();
    }
    if !(inc > 0.0) {
        return Err(Error::Domain("no incident power".into()));
    }
    Ok(1.0 - refl / inc)
}

pub fn power_ratio_from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Percentage increase in power density implied by a gain delta in dB.
pub fn percent_increase_from_db(db: f64) -> f64 {
    100.0 * (power_ratio_from_db(db) - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseEntry {
    pub frequency_hz: f64,
    #[serde(with = "crate::geometry::complex_pair")]
    pub z_in: Complex64,
}

/// Input impedance over frequency, one port.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyResponse {
    entries: Vec<ResponseEntry>,
    z0: f64,
}

impl FrequencyResponse {
    pub fn new(entries: Vec<ResponseEntry>, z0: f64) -> Result<Self> {
        if !(z0 > 0.0) {
            return Err(Error::Domain(format!("z0 must be positive, got {z0}")));
        }
        if entries
            .windows(2)
            .any(|w| w[1].frequency_hz <= w[0].frequency_hz)
        {
            return Err(Error::Domain("frequencies must be strictly increasing".into()));
        }
        Ok(FrequencyResponse { entries, z0 })
    }

    pub fn entries(&self) -> &[ResponseEntry] {
        &self.entries
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn s11(&self) -> Result<Vec<Complex64>> {
        self.entries.iter().map(|e| s11(e.z_in, self.z0)).collect()
    }

    pub fn return_loss_db(&self) -> Result<Vec<f64>> {
        Ok(self.s11()?.into_iter().map(return_loss_db).collect())
    }

    /// Deepest return loss and where it occurs.
    pub fn best_return_loss(&self) -> Result<Option<(f64, f64)>> {
        let rl = self.return_loss_db()?;
        Ok(rl
            .iter()
            .zip(&self.entries)
            .map(|(r, e)| (*r, e.frequency_hz))
            .fold(None, |best: Option<(f64, f64)>, cur| match best {
                Some(b) if b.0 <= cur.0 => Some(b),
                _ => Some(cur),
            }))
    }

    /// First frequency where the reactance changes sign, interpolated.
    pub fn resonant_frequency(&self) -> Option<f64> {
        self.entries.windows(2).find_map(|w| {
            let (a, b) = (w[0], w[1]);
            if a.z_in.im == 0.0 {
                return Some(a.frequency_hz);
            }
            if a.z_in.im.signum() != b.z_in.im.signum() {
                let t = a.z_in.im / (a.z_in.im - b.z_in.im);
                Some(a.frequency_hz + t * (b.frequency_hz - a.frequency_hz))
            } else {
                None
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthReport {
    pub f_low: f64,
    pub f_high: f64,
    pub bandwidth: f64,
    pub threshold_db: f64,
    pub contains_fc: bool,
}

/// Contiguous band where return loss is at or below `threshold_db`.
///
/// The band containing `f_c` wins; failing that, the band with the deepest
/// dip. Edges are interpolated linearly in dB between adjacent samples.
pub fn extract_bandwidth(
    resp: &FrequencyResponse,
    f_c: f64,
    threshold_db: f64,
) -> Result<BandwidthReport> {
    if resp.entries.is_empty() {
        return Err(Error::Domain("empty response".into()));
    }
    if !(threshold_db < 0.0) {
        return Err(Error::Domain(format!("threshold must be negative, got {threshold_db}")));
    }
    let rl: Vec<f64> = resp
        .return_loss_db()?
        .into_iter()
        .map(|r| r.max(RL_FLOOR_DB))
        .collect();
    let f: Vec<f64> = resp.entries.iter().map(|e| e.frequency_hz).collect();
    let n = rl.len();
    let crossing = |i: usize, j: usize| -> f64 {
        let t = (threshold_db - rl[i]) / (rl[j] - rl[i]);
        f[i] + t * (f[j] - f[i])
    };

    struct Band {
        lo: f64,
        hi: f64,
        depth: f64,
    }
    let mut bands = Vec::new();
    let mut i = 0;
    while i < n {
        if rl[i] > threshold_db {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < n && rl[i + 1] <= threshold_db {
            i += 1;
        }
        let end = i;
        let lo = if start > 0 { crossing(start - 1, start) } else { f[start] };
        let hi = if end + 1 < n { crossing(end, end + 1) } else { f[end] };
        let depth = rl[start..=end].iter().copied().fold(f64::INFINITY, f64::min);
        bands.push(Band { lo, hi, depth });
        i += 1;
    }
    let chosen = bands
        .iter()
        .find(|b| b.lo <= f_c && f_c <= b.hi)
        .map(|b| (b, true))
        .or_else(|| {
            bands
                .iter()
                .fold(None, |best: Option<&Band>, b| match best {
                    Some(x) if x.depth <= b.depth => Some(x),
                    _ => Some(b),
                })
                .map(|b| (b, false))
        });
    Ok(match chosen {
        Some((b, contains_fc)) => BandwidthReport {
            f_low: b.lo,
            f_high: b.hi,
            bandwidth: b.hi - b.lo,
            threshold_db,
            contains_fc,
        },
        None => BandwidthReport {
            f_low: f_c,
            f_high: f_c,
            bandwidth: 0.0,
            threshold_db,
            contains_fc: false,
        },
    })
}

fn clean(x: f64) -> f64 {
    // turn -0.0 into 0.0 so it prints without a sign
    x + 0.0
}

/// Touchstone v1 one-port file, real/imaginary S11.
pub fn write_touchstone(resp: &FrequencyResponse) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "# Hz S RI R {}", fmt9_trim(resp.z0)).unwrap();
    for (e, s) in resp.entries.iter().zip(resp.s11()?) {
        writeln!(
            out,
            "{} {:.9} {:.9}",
            fmt9_trim(e.frequency_hz),
            clean(s.re),
            clean(s.im)
        )
        .unwrap();
    }
    Ok(out)
}

/// One-port Touchstone data: reference impedance and `(Hz, S11)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct OnePortData {
    pub z0: f64,
    pub points: Vec<(f64, Complex64)>,
}

/// Parses a one-port Touchstone v1 file (any unit, RI/MA/DB).
pub fn parse_touchstone(text: &str) -> Result<OnePortData> {
    let mut scale = 1e9; // GHz default
    let mut format = "MA".to_string();
    let mut z0 = 50.0;
    let mut seen_option = false;
    let mut points = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('!').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: ln + 1,
            message,
        };
        if let Some(opts) = line.strip_prefix('#') {
            if seen_option {
                return Err(err("second option line".into()));
            }
            seen_option = true;
            let toks: Vec<String> = opts.split_whitespace().map(str::to_uppercase).collect();
            let mut k = 0;
            while k < toks.len() {
                match toks[k].as_str() {
                    "HZ" => scale = 1.0,
                    "KHZ" => scale = 1e3,
                    "MHZ" => scale = 1e6,
                    "GHZ" => scale = 1e9,
                    "S" => {}
                    "RI" | "MA" | "DB" => format = toks[k].clone(),
                    "R" => {
                        k += 1;
                        z0 = toks
                            .get(k)
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| err("missing reference impedance".into()))?;
                    }
                    other => return Err(err(format!("unsupported option `{other}`"))),
                }
                k += 1;
            }
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad number `{t}`"))))
            .collect::<Result<_>>()?;
        if vals.len() != 3 {
            return Err(err(format!("expected 3 values, found {}", vals.len())));
        }
        let s = match format.as_str() {
            "RI" => Complex64::new(vals[1], vals[2]),
            "MA" => Complex64::from_polar(vals[1], vals[2].to_radians()),
            _ => Complex64::from_polar(10f64.powf(vals[1] / 20.0), vals[2].to_radians()),
        };
        points.push((vals[0] * scale, s));
    }
    Ok(OnePortData { z0, points })
}

/// `freq_hz,re_zin,im_zin,s11_db` rows.
pub fn write_impedance_csv(resp: &FrequencyResponse) -> Result<String> {
    let mut out = String::from("freq_hz,re_zin,im_zin,s11_db\n");
    for (e, rl) in resp.entries.iter().zip(resp.return_loss_db()?) {
        writeln!(
            out,
            "{},{},{},{}",
            fmt9_trim(e.frequency_hz),
            fmt9(e.z_in.re),
            fmt9(e.z_in.im),
            fmt9(rl)
        )
        .unwrap();
    }
    Ok(out)
}
