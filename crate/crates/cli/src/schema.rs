//! Model files.
//!
//! A chain:
//! `{"M":3,"N":40,"tR":[0.4,0.9,1],"tL":[2.025,-0.4,1],"long_range":[{"i":1,"j":1,"m":3,"tR":0.1,"tL":[0,0.2]}],"boundary":"obc"}`
//! and a square lattice:
//! `{"Mx":30,"Ny":40,"tR":0.2,"tL":0.4,"tU":0.35,"tD":0.65,"t1":0.5,"t2":1.1}`.
//! Amplitudes are a number or `[re, im]`; sublattice indices are 1-based.

use nonrecip_core::lattice::{Boundary, LatticeModel1D, LatticeModel2D, LongRangeHop};
use nonrecip_core::C64;
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug)]
pub enum Model {
    Chain(LatticeModel1D),
    Square(LatticeModel2D),
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Amplitude> for C64 {
    fn from(a: Amplitude) -> Self {
        match a {
            Amplitude::Real(x) => C64::new(x, 0.0),
            Amplitude::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum BoundaryTag {
    Obc,
    Pbc,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HopSpec {
    i: i64,
    j: i64,
    m: i64,
    #[serde(rename = "tR")]
    forward: Amplitude,
    #[serde(rename = "tL")]
    backward: Amplitude,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainSpec {
    #[serde(rename = "M")]
    sublattices: i64,
    #[serde(rename = "N")]
    cells: i64,
    #[serde(rename = "tR")]
    right: Vec<Amplitude>,
    #[serde(rename = "tL")]
    left: Vec<Amplitude>,
    #[serde(default)]
    long_range: Vec<HopSpec>,
    #[serde(default)]
    boundary: Option<BoundaryTag>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SquareSpec {
    #[serde(rename = "Mx")]
    width: i64,
    #[serde(rename = "Ny")]
    height: i64,
    #[serde(rename = "tR")]
    right: Amplitude,
    #[serde(rename = "tL")]
    left: Amplitude,
    #[serde(rename = "tU")]
    up: Amplitude,
    #[serde(rename = "tD")]
    down: Amplitude,
    #[serde(default)]
    t1: Option<Amplitude>,
    #[serde(default)]
    t2: Option<Amplitude>,
}

/// 1-based line of the first `"key":` in `src`, or of the start of the
/// `nth` object inside the array under `key` when `nth` is given.
fn line_of(src: &str, key: &str, nth: Option<usize>) -> usize {
    let needle = format!("\"{key}\"");
    let mut pos = None;
    let mut from = 0;
    while let Some(off) = src[from..].find(&needle) {
        let at = from + off;
        if src[at + needle.len()..].trim_start().starts_with(':') {
            pos = Some(at);
            break;
        }
        from = at + needle.len();
    }
    let Some(mut at) = pos else { return 1 };
    if let Some(n) = nth {
        let mut seen = 0;
        for (k, ch) in src[at..].char_indices() {
            if ch == '{' {
                if seen == n {
                    at += k;
                    break;
                }
                seen += 1;
            }
        }
    }
    src[..at].matches('\n').count() + 1
}

struct Ctx<'a> {
    path: &'a str,
    src: &'a str,
}

impl Ctx<'_> {
    fn fail(&self, key: &str, nth: Option<usize>, msg: impl AsRef<str>) -> CliError {
        CliError::schema(format!("{}:{}: {}", self.path, line_of(self.src, key, nth), msg.as_ref()))
    }
}

fn serde_error(path: &str, e: serde_json::Error) -> CliError {
    CliError::schema(format!("{path}:{}:{}: {e}", e.line(), e.column()))
}

/// Parses and validates a model; every failure names the file and line.
pub fn parse_model(path: &str, src: &str) -> Result<Model, CliError> {
    let value: serde_json::Value = serde_json::from_str(src).map_err(|e| serde_error(path, e))?;
    let Some(obj) = value.as_object() else {
        return Err(CliError::schema(format!("{path}:1: the model must be a JSON object")));
    };
    let ctx = Ctx { path, src };
    if obj.contains_key("Mx") || obj.contains_key("Ny") {
        let spec: SquareSpec = serde_json::from_str(src).map_err(|e| serde_error(path, e))?;
        square(&ctx, spec).map(Model::Square)
    } else {
        let spec: ChainSpec = serde_json::from_str(src).map_err(|e| serde_error(path, e))?;
        chain(&ctx, spec).map(Model::Chain)
    }
}

fn finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn chain(ctx: &Ctx, spec: ChainSpec) -> Result<LatticeModel1D, CliError> {
    if spec.sublattices < 1 {
        return Err(ctx.fail("M", None, "M must be at least 1"));
    }
    if spec.cells < 1 {
        return Err(ctx.fail("N", None, "N must be at least 1"));
    }
    let m = spec.sublattices as usize;
    for (key, list) in [("tR", &spec.right), ("tL", &spec.left)] {
        if list.len() != m {
            return Err(ctx.fail(key, None, format!("{key} has {} entries, expected M = {m}", list.len())));
        }
    }
    let right: Vec<C64> = spec.right.into_iter().map(C64::from).collect();
    let left: Vec<C64> = spec.left.into_iter().map(C64::from).collect();
    let mut hops = Vec::with_capacity(spec.long_range.len());
    for (k, h) in spec.long_range.into_iter().enumerate() {
        let at = |msg: String| ctx.fail("long_range", Some(k), format!("long_range[{k}]: {msg}"));
        for (name, idx) in [("i", h.i), ("j", h.j)] {
            if idx < 1 || idx > m as i64 {
                return Err(at(format!("{name} = {idx} is outside 1..={m}")));
            }
        }
        if h.m < 0 {
            return Err(at(format!("m = {} must not be negative", h.m)));
        }
        if h.m == 0 && h.i == h.j {
            return Err(at("m = 0 with i = j hops a site onto itself".into()));
        }
        let hop = LongRangeHop {
            source: h.i as usize - 1,
            target: h.j as usize - 1,
            cells: h.m as usize,
            forward: h.forward.into(),
            backward: h.backward.into(),
        };
        if !finite(hop.forward) || !finite(hop.backward) {
            return Err(at("amplitudes must be finite".into()));
        }
        hops.push(hop);
    }
    let boundary = match spec.boundary {
        None | Some(BoundaryTag::Obc) => Boundary::Open,
        Some(BoundaryTag::Pbc) => Boundary::Periodic,
    };
    LatticeModel1D::new(right, left, spec.cells as usize, boundary)
        .and_then(|model| model.with_long_range(hops))
        .map_err(|e| CliError::schema(format!("{}:1: {e}", ctx.path)))
}

fn square(ctx: &Ctx, spec: SquareSpec) -> Result<LatticeModel2D, CliError> {
    for (key, n) in [("Mx", spec.width), ("Ny", spec.height)] {
        if n < 2 {
            return Err(ctx.fail(key, None, format!("{key} must be at least 2")));
        }
    }
    let z = |a: Option<Amplitude>| a.map(C64::from).unwrap_or(C64::new(0.0, 0.0));
    let model = LatticeModel2D {
        width: spec.width as usize,
        height: spec.height as usize,
        right: spec.right.into(),
        left: spec.left.into(),
        up: spec.up.into(),
        down: spec.down.into(),
        diag_forward: z(spec.t1),
        diag_backward: z(spec.t2),
    };
    model.validate().map_err(|e| CliError::schema(format!("{}:1: {e}", ctx.path)))?;
    Ok(model)
}
