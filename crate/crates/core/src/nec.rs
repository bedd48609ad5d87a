//! NEC-style card decks for cross-checking against external wire solvers.
//!
//! One `GW` card per segment (tag = segment index + 1, one segment per
//! card), `GE 1` when the model touches the z = 0 plane, one `EX 0` card
//! per port and `EN`. Coordinates use six decimals so a parse round trip
//! is exact to 1e-6 m.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{FeedPort, Vec3, WireModel, WireSegment, JUNCTION_TOL};

fn num(x: f64) -> String {
    format!("{:.6}", x + 0.0)
}

pub fn export_nec_cards(model: &WireModel) -> String {
    let mut out = String::new();
    out.push_str("CM curvemom wire model\n");
    out.push_str("CE\n");
    for (i, s) in model.segments().iter().enumerate() {
        writeln!(
            out,
            "GW {} 1 {} {} {} {} {} {} {}",
            i + 1,
            num(s.start.x),
            num(s.start.y),
            num(s.start.z),
            num(s.end.x),
            num(s.end.y),
            num(s.end.z),
            num(s.radius)
        )
        .unwrap();
    }
    let grounded = model
        .segments()
        .iter()
        .any(|s| s.start.z.abs() <= JUNCTION_TOL || s.end.z.abs() <= JUNCTION_TOL);
    writeln!(out, "GE {}", if grounded { 1 } else { 0 }).unwrap();
    for p in model.ports() {
        writeln!(
            out,
            "EX 0 {} 1 0 {} {}",
            p.segment_index + 1,
            num(p.gap_voltage.re),
            num(p.gap_voltage.im)
        )
        .unwrap();
    }
    out.push_str("EN\n");
    out
}

/// Rebuilds a model from a deck written by [`export_nec_cards`]. Only
/// single-segment `GW` cards and `EX 0` sources are understood.
pub fn parse_nec_cards(text: &str) -> Result<WireModel> {
    let mut segments = Vec::new();
    let mut tags = Vec::new();
    let mut ports = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let err = |message: String| Error::Parse {
            line: ln + 1,
            message,
        };
        let f = |i: usize| -> Result<f64> {
            toks.get(i)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err(format!("field {i} is not a number")))
        };
        match toks.first().copied() {
            Some("GW") => {
                if toks.len() != 10 {
                    return Err(err(format!("GW needs 9 fields, found {}", toks.len() - 1)));
                }
                if toks[2] != "1" {
                    return Err(err("only one segment per GW card is supported".into()));
                }
                tags.push(f(1)? as usize);
                segments.push(WireSegment::new(
                    Vec3::new(f(3)?, f(4)?, f(5)?),
                    Vec3::new(f(6)?, f(7)?, f(8)?),
                    f(9)?,
                ));
            }
            Some("EX") => {
                let tag = f(2)? as usize;
                let idx = tags
                    .iter()
                    .position(|&t| t == tag)
                    .ok_or_else(|| err(format!("EX refers to unknown tag {tag}")))?;
                ports.push(FeedPort::new(idx, Complex64::new(f(5)?, f(6)?)));
            }
            Some("CM") | Some("CE") | Some("GE") | Some("EN") | None => {}
            Some(other) => return Err(err(format!("unsupported card `{other}`"))),
        }
    }
    WireModel::new(segments, ports)
}
