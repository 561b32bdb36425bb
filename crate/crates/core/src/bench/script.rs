//! Line-oriented bench scripts.
//!
//! ```text
//! # cyclic sequence, π-class setting
//! source epsilon=0.5
//! converter theta=22.5 phi=90
//! hwp theta=45
//! converter theta=22.5 phi=90
//! qwp theta=0
//! trajectory samples=256
//! interfere qx=8162.3 qy=4712.4 grid=512 extent=0.002 out=pi.pgm
//! ```
//!
//! Keywords and keys are case-insensitive, `#` starts a comment, angles and
//! retardations are in degrees, lengths in metres and wavevectors in rad/m.

use std::fmt;

use thiserror::Error;

use crate::elements::{OpticalElement, Polarization};
use crate::error::ElementError;

/// Source position of a directive. Spans never take part in equality, so
/// scripts compare by content.
#[derive(Debug, Clone, Copy, Default, Eq)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceDirective {
    pub epsilon: f64,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementSpec {
    WavePlate { theta: f64, phi_deg: f64 },
    Hwp { theta: f64 },
    Qwp { theta: f64 },
    Converter { theta: f64, phi_deg: f64 },
    Pbs { keep: Polarization },
}

impl ElementSpec {
    pub fn to_element(&self) -> Result<OpticalElement, ElementError> {
        match *self {
            ElementSpec::WavePlate { theta, phi_deg } => {
                OpticalElement::wave_plate(theta, phi_deg.to_radians())
            }
            ElementSpec::Hwp { theta } => OpticalElement::half_wave_plate(theta),
            ElementSpec::Qwp { theta } => OpticalElement::quarter_wave_plate(theta),
            ElementSpec::Converter { theta, phi_deg } => {
                OpticalElement::mode_converter(theta, phi_deg.to_radians())
            }
            ElementSpec::Pbs { keep } => Ok(OpticalElement::polarization_filter(keep)),
        }
    }
}

impl fmt::Display for ElementSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementSpec::WavePlate { theta, phi_deg } => {
                write!(f, "waveplate theta={theta} phi={phi_deg}")
            }
            ElementSpec::Hwp { theta } => write!(f, "hwp theta={theta}"),
            ElementSpec::Qwp { theta } => write!(f, "qwp theta={theta}"),
            ElementSpec::Converter { theta, phi_deg } => {
                write!(f, "converter theta={theta} phi={phi_deg}")
            }
            ElementSpec::Pbs { keep } => {
                let k = match keep {
                    Polarization::H => "H",
                    Polarization::V => "V",
                };
                write!(f, "pbs keep={k}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementDirective {
    pub spec: ElementSpec,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisSpec {
    Trajectory {
        samples: Option<usize>,
        out: Option<String>,
    },
    /// Unset optional fields fall back to the default tilt, 512 pixels and a
    /// half-width of `2·w(0)`.
    Interfere {
        qx: Option<f64>,
        qy: Option<f64>,
        grid: Option<usize>,
        extent: Option<f64>,
        out: String,
    },
}

impl fmt::Display for AnalysisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisSpec::Trajectory { samples, out } => {
                write!(f, "trajectory")?;
                if let Some(n) = samples {
                    write!(f, " samples={n}")?;
                }
                if let Some(o) = out {
                    write!(f, " out={o}")?;
                }
                Ok(())
            }
            AnalysisSpec::Interfere { qx, qy, grid, extent, out } => {
                write!(f, "interfere")?;
                if let Some(v) = qx {
                    write!(f, " qx={v}")?;
                }
                if let Some(v) = qy {
                    write!(f, " qy={v}")?;
                }
                if let Some(v) = grid {
                    write!(f, " grid={v}")?;
                }
                if let Some(v) = extent {
                    write!(f, " extent={v}")?;
                }
                write!(f, " out={out}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisDirective {
    pub spec: AnalysisSpec,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchScript {
    pub source: SourceDirective,
    pub elements: Vec<ElementDirective>,
    pub analyses: Vec<AnalysisDirective>,
}

impl BenchScript {
    pub fn optical_elements(&self) -> Result<Vec<OpticalElement>, ElementError> {
        self.elements.iter().map(|e| e.spec.to_element()).collect()
    }
}

/// Canonical text: source, then elements, then analyses, one per line.
impl fmt::Display for BenchScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "source epsilon={}", self.source.epsilon)?;
        for e in &self.elements {
            writeln!(f, "{}", e.spec)?;
        }
        for a in &self.analyses {
            writeln!(f, "{}", a.spec)?;
        }
        Ok(())
    }
}

pub fn print(script: &BenchScript) -> String {
    script.to_string()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("missing source directive")]
    MissingSource,
    #[error("duplicate source directive")]
    DuplicateSource,
    #[error("source directive must come before any other directive")]
    SourceNotFirst,
    #[error("unknown keyword `{0}`")]
    UnknownKeyword(String),
    #[error("{directive} takes no {key}")]
    UnknownKey { directive: &'static str, key: String },
    #[error("{directive} requires {key}")]
    MissingKey { directive: &'static str, key: &'static str },
    #[error("duplicate key `{0}`")]
    DuplicateKey(String),
    #[error("expected key=value, found `{0}`")]
    MalformedArgument(String),
    #[error("invalid value `{value}` for {key}")]
    InvalidValue { key: String, value: String },
    #[error("{key}={value} out of range ({range})")]
    OutOfRange { key: String, value: String, range: &'static str },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (byte, ch)) in line.char_indices().enumerate() {
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                out.push(Token { text: &line[b..byte], column: c + 1 });
            }
        } else if start.is_none() {
            start = Some((byte, col));
        }
    }
    if let Some((b, c)) = start {
        out.push(Token { text: &line[b..], column: c + 1 });
    }
    out
}

struct Arg<'a> {
    key: String,
    value: &'a str,
    column: usize,
    used: bool,
}

struct Args<'a> {
    directive: &'static str,
    line: usize,
    column: usize,
    items: Vec<Arg<'a>>,
}

impl<'a> Args<'a> {
    fn new(
        directive: &'static str,
        line: usize,
        column: usize,
        tokens: &[Token<'a>],
    ) -> Result<Self, ParseError> {
        let mut items: Vec<Arg<'a>> = Vec::new();
        for t in tokens {
            let err = |kind| ParseError { line, column: t.column, kind };
            let Some((k, v)) = t.text.split_once('=') else {
                return Err(err(ParseErrorKind::MalformedArgument(t.text.to_string())));
            };
            if k.is_empty() || v.is_empty() {
                return Err(err(ParseErrorKind::MalformedArgument(t.text.to_string())));
            }
            let key = k.to_ascii_lowercase();
            if items.iter().any(|a| a.key == key) {
                return Err(err(ParseErrorKind::DuplicateKey(key)));
            }
            items.push(Arg { key, value: v, column: t.column, used: false });
        }
        Ok(Self { directive, line, column, items })
    }

    fn take(&mut self, key: &str) -> Option<(&'a str, usize)> {
        let a = self.items.iter_mut().find(|a| a.key == key)?;
        a.used = true;
        Some((a.value, a.column))
    }

    fn error(&self, column: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { line: self.line, column, kind }
    }

    fn number(&mut self, key: &'static str) -> Result<Option<(f64, usize)>, ParseError> {
        let Some((v, col)) = self.take(key) else {
            return Ok(None);
        };
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Some((x, col))),
            _ => Err(self.error(
                col,
                ParseErrorKind::InvalidValue { key: key.into(), value: v.into() },
            )),
        }
    }

    fn ranged(
        &mut self,
        key: &'static str,
        range: &'static str,
        ok: impl Fn(f64) -> bool,
    ) -> Result<Option<f64>, ParseError> {
        match self.number(key)? {
            None => Ok(None),
            Some((x, _)) if ok(x) => Ok(Some(x)),
            Some((x, col)) => Err(self.error(
                col,
                ParseErrorKind::OutOfRange { key: key.into(), value: x.to_string(), range },
            )),
        }
    }

    fn integer(
        &mut self,
        key: &'static str,
        range: &'static str,
        ok: impl Fn(usize) -> bool,
    ) -> Result<Option<usize>, ParseError> {
        let Some((v, col)) = self.take(key) else {
            return Ok(None);
        };
        let n: usize = v.parse().map_err(|_| {
            self.error(col, ParseErrorKind::InvalidValue { key: key.into(), value: v.into() })
        })?;
        if !ok(n) {
            return Err(self.error(
                col,
                ParseErrorKind::OutOfRange { key: key.into(), value: v.into(), range },
            ));
        }
        Ok(Some(n))
    }

    fn require<T>(&self, key: &'static str, v: Option<T>) -> Result<T, ParseError> {
        v.ok_or_else(|| {
            self.error(self.column, ParseErrorKind::MissingKey { directive: self.directive, key })
        })
    }

    /// Rejects any key that no accessor consumed.
    fn finish(self) -> Result<(), ParseError> {
        match self.items.iter().find(|a| !a.used) {
            Some(a) => Err(self.error(
                a.column,
                ParseErrorKind::UnknownKey { directive: self.directive, key: a.key.clone() },
            )),
            None => Ok(()),
        }
    }
}

const THETA_RANGE: &str = "-360 <= theta <= 360 degrees";
const PHI_RANGE: &str = "0 <= phi < 360 degrees";

fn theta_ok(x: f64) -> bool {
    (-360.0..=360.0).contains(&x)
}

fn phi_ok(x: f64) -> bool {
    (0.0..360.0).contains(&x)
}

enum Directive {
    Source(f64),
    Element(ElementSpec),
    Analysis(AnalysisSpec),
}

fn parse_directive(
    keyword: &str,
    args: &mut Args<'_>,
) -> Result<Directive, ParseError> {
    let theta = |a: &mut Args<'_>| -> Result<f64, ParseError> {
        let v = a.ranged("theta", THETA_RANGE, theta_ok)?;
        a.require("theta", v)
    };
    let phi = |a: &mut Args<'_>| -> Result<f64, ParseError> {
        let v = a.ranged("phi", PHI_RANGE, phi_ok)?;
        a.require("phi", v)
    };
    Ok(match keyword {
        "source" => {
            let e = args.ranged("epsilon", "0 <= epsilon <= 1", |x| (0.0..=1.0).contains(&x))?;
            Directive::Source(args.require("epsilon", e)?)
        }
        "waveplate" => {
            let t = theta(args)?;
            Directive::Element(ElementSpec::WavePlate { theta: t, phi_deg: phi(args)? })
        }
        "converter" => {
            let t = theta(args)?;
            Directive::Element(ElementSpec::Converter { theta: t, phi_deg: phi(args)? })
        }
        "hwp" => Directive::Element(ElementSpec::Hwp { theta: theta(args)? }),
        "qwp" => Directive::Element(ElementSpec::Qwp { theta: theta(args)? }),
        "pbs" => {
            let keep = args.take("keep");
            let (v, col) = args.require("keep", keep)?;
            let keep = match v.to_ascii_uppercase().as_str() {
                "H" => Polarization::H,
                "V" => Polarization::V,
                _ => {
                    return Err(args.error(
                        col,
                        ParseErrorKind::InvalidValue { key: "keep".into(), value: v.into() },
                    ))
                }
            };
            Directive::Element(ElementSpec::Pbs { keep })
        }
        "trajectory" => {
            let samples = args.integer("samples", "16 <= samples <= 1000000", |n| {
                (16..=1_000_000).contains(&n)
            })?;
            let out = args.take("out").map(|(v, _)| v.to_string());
            Directive::Analysis(AnalysisSpec::Trajectory { samples, out })
        }
        "interfere" => {
            let qx = args.number("qx")?.map(|(x, _)| x);
            let qy = args.number("qy")?.map(|(x, _)| x);
            let grid = args.integer("grid", "64 <= grid <= 8192", |n| (64..=8192).contains(&n))?;
            let extent = args.ranged("extent", "extent > 0", |x| x > 0.0)?;
            let out = args.take("out");
            let out = args.require("out", out)?.0.to_string();
            Directive::Analysis(AnalysisSpec::Interfere { qx, qy, grid, extent, out })
        }
        _ => unreachable!("keyword checked by caller"),
    })
}

fn keyword_name(kw: &str) -> Option<&'static str> {
    const KEYWORDS: [&str; 8] =
        ["source", "waveplate", "hwp", "qwp", "converter", "pbs", "trajectory", "interfere"];
    KEYWORDS.into_iter().find(|k| *k == kw)
}

/// Parses a bench script, reporting the first error with its position.
pub fn parse(text: &str) -> Result<BenchScript, ParseError> {
    let mut source: Option<SourceDirective> = None;
    let mut elements = Vec::new();
    let mut analyses = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(content);
        let Some((head, rest)) = tokens.split_first() else {
            continue;
        };
        let span = Span { line, column: head.column };
        let err = |kind| ParseError { line, column: head.column, kind };
        let lowered = head.text.to_ascii_lowercase();
        let Some(keyword) = keyword_name(&lowered) else {
            return Err(err(ParseErrorKind::UnknownKeyword(head.text.to_string())));
        };
        let mut args = Args::new(keyword, line, head.column, rest)?;
        let directive = parse_directive(keyword, &mut args)?;
        args.finish()?;

        match directive {
            Directive::Source(epsilon) => {
                if source.is_some() {
                    return Err(err(ParseErrorKind::DuplicateSource));
                }
                source = Some(SourceDirective { epsilon, span });
            }
            _ if source.is_none() => return Err(err(ParseErrorKind::SourceNotFirst)),
            Directive::Element(spec) => elements.push(ElementDirective { spec, span }),
            Directive::Analysis(spec) => analyses.push(AnalysisDirective { spec, span }),
        }
    }

    let source = source
        .ok_or(ParseError { line: 1, column: 1, kind: ParseErrorKind::MissingSource })?;
    Ok(BenchScript { source, elements, analyses })
}
