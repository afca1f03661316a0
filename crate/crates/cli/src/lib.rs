//! Orchestration behind the `rtpi` binary: verification suites, convergence
//! sweeps, constant sweeps and Gram dumps, emitted as CSV or JSON.
//!
//! Every sweep evaluates its degrees in parallel and writes once, in order,
//! so identical configurations give byte-identical output.

use rayon::prelude::*;
use rtpi_core::fields::field_by_name;
use rtpi_core::interp::DivPairing;
use rtpi_core::refelem::{max_quad_degree, set_max_quad_degree};
use rtpi_core::sobolev::{gram_matrix, GramKind, LIFT_MARGIN};
use rtpi_core::verify::{
    friedrichs_constant, run_suite, trailing_fit, Check, FriedrichsVariant, RateSetup, Status,
    SuiteConfig, FRIEDRICHS_MARGIN, SLOPE_WINDOW,
};
use rtpi_core::Element;
use serde::Serialize;
use std::fmt;
use std::io::Write;

pub const CONVERGE_HEADER: [&str; 9] = [
    "element",
    "field",
    "p",
    "err_l2",
    "err_div_l2",
    "err_hdiv",
    "err_dualhalf",
    "err_dualhalf_div",
    "slope_window",
];

/// Environment override for the quadrature degree cap.
pub const QUAD_MAX_VAR: &str = "RTPI_QUAD_MAX";

/// Command failures, split by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, names or degrees (exit 2).
    Config(String),
    /// A computation or IO step failed (exit 1).
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<rtpi_core::Error> for CliError {
    fn from(e: rtpi_core::Error) -> Self {
        match e {
            rtpi_core::Error::Capability { .. }
            | rtpi_core::Error::InvalidArgument(_)
            | rtpi_core::Error::IndexOutOfRange { .. } => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// `tri` or `quad`.
pub fn parse_element(s: &str) -> CliResult<Element> {
    Element::ALL
        .into_iter()
        .find(|e| e.name() == s)
        .ok_or_else(|| CliError::Config(format!("unknown element `{s}` (expected tri or quad)")))
}

/// Applies `RTPI_QUAD_MAX` when set.
pub fn apply_quad_override(value: Option<&str>) -> CliResult<()> {
    if let Some(v) = value {
        let d: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{QUAD_MAX_VAR}={v} is not a degree")))?;
        if d == 0 {
            return Err(CliError::Config(format!("{QUAD_MAX_VAR} must be positive")));
        }
        set_max_quad_degree(d);
    }
    Ok(())
}

/// Full-precision scientific notation (17 significant digits).
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn check_degree(needed: usize) -> CliResult<()> {
    if needed > max_quad_degree() {
        return Err(CliError::Config(format!(
            "degree {needed} exceeds the quadrature cap {} (raise {QUAD_MAX_VAR})",
            max_quad_degree()
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operator {
    /// The projection-based operator with H-tilde^{-1/2} interior pairing.
    DivHalf,
    /// The classical operator with L2 interior pairing.
    Div,
}

impl Operator {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "div-half" => Ok(Operator::DivHalf),
            "div" => Ok(Operator::Div),
            _ => Err(CliError::Config(format!(
                "unknown operator `{s}` (expected div-half or div)"
            ))),
        }
    }

    fn pairing(self) -> DivPairing {
        match self {
            Operator::DivHalf => DivPairing::DualHalf,
            Operator::Div => DivPairing::L2,
        }
    }
}

/// Settings shared by the subcommands.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub element: Element,
    pub p_max: usize,
    /// Reference degree of the discrete norms is `p_max + p_ref_offset`
    /// unless `p_ref` is given.
    pub p_ref_offset: usize,
    pub p_ref: Option<usize>,
    pub seed: u64,
    pub field: String,
    pub operator: Operator,
}

impl RunConfig {
    pub fn new(element: Element, p_max: usize, field: impl Into<String>) -> Self {
        Self {
            element,
            p_max,
            p_ref_offset: 4,
            p_ref: None,
            seed: 0,
            field: field.into(),
            operator: Operator::DivHalf,
        }
    }

    pub fn reference_degree(&self) -> usize {
        self.p_ref.unwrap_or(self.p_max + self.p_ref_offset)
    }

    fn validate(&self) -> CliResult<()> {
        if self.p_max == 0 {
            return Err(CliError::Config("--pmax must be at least 1".into()));
        }
        if self.p_ref_offset < 2 || self.reference_degree() < self.p_max + 2 {
            return Err(CliError::Config(
                "the reference degree must exceed --pmax by at least 2".into(),
            ));
        }
        check_degree(self.reference_degree() + LIFT_MARGIN)
    }
}

/// One `converge` row.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergeRow {
    pub p: usize,
    pub err_l2: f64,
    pub err_div_l2: f64,
    pub err_hdiv: f64,
    pub err_dualhalf: f64,
    pub err_dualhalf_div: f64,
    /// Slope over the trailing window ending at p (NaN before it fills).
    pub slope_window: f64,
}

/// Interpolation errors of the named field for p = 1..=p_max.
///
/// The slope column fits `err_dualhalf_div` for the new operator and
/// `err_hdiv` for the classical one, the norms of their respective rates.
pub fn converge(cfg: &RunConfig) -> CliResult<Vec<ConvergeRow>> {
    cfg.validate()?;
    let f = field_by_name(cfg.element, &cfg.field, cfg.seed)?;
    let u = f
        .vector()
        .ok_or_else(|| CliError::Config(format!("`{}` is not a vector field", cfg.field)))?;
    let setup = RateSetup::new(cfg.element, u, cfg.p_max, cfg.reference_degree())?;
    let pairing = cfg.operator.pairing();
    let norms = (1..=cfg.p_max)
        .into_par_iter()
        .map(|p| setup.errors(p, pairing))
        .collect::<Result<Vec<_>, _>>()?;
    let degrees: Vec<usize> = (1..=cfg.p_max).collect();
    let tracked: Vec<f64> = norms
        .iter()
        .map(|n| match cfg.operator {
            Operator::DivHalf => n.dualhalf_graph(),
            Operator::Div => n.hdiv(),
        })
        .collect();
    Ok(norms
        .iter()
        .enumerate()
        .map(|(k, n)| ConvergeRow {
            p: k + 1,
            err_l2: n.l2,
            err_div_l2: n.div_l2,
            err_hdiv: n.hdiv(),
            err_dualhalf: n.dualhalf,
            err_dualhalf_div: n.dualhalf_graph(),
            slope_window: trailing_fit(&degrees[..=k], &tracked[..=k], SLOPE_WINDOW)
                .map_or(f64::NAN, |f| f.slope),
        })
        .collect())
}

pub fn write_converge<W: Write>(out: W, cfg: &RunConfig, rows: &[ConvergeRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CONVERGE_HEADER)?;
    for r in rows {
        w.write_record([
            cfg.element.name().to_string(),
            cfg.field.clone(),
            r.p.to_string(),
            fmt_num(r.err_l2),
            fmt_num(r.err_div_l2),
            fmt_num(r.err_hdiv),
            fmt_num(r.err_dualhalf),
            fmt_num(r.err_dualhalf_div),
            fmt_num(r.slope_window),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Both discrete Friedrichs constants for p = 1..=p_max.
pub fn friedrichs(element: Element, p_max: usize) -> CliResult<Vec<(usize, f64, f64)>> {
    if p_max == 0 {
        return Err(CliError::Config("--pmax must be at least 1".into()));
    }
    check_degree(p_max + FRIEDRICHS_MARGIN + LIFT_MARGIN)?;
    (1..=p_max)
        .into_par_iter()
        .map(|p| {
            Ok((
                p,
                friedrichs_constant(element, p, FriedrichsVariant::Bubble)?,
                friedrichs_constant(element, p, FriedrichsVariant::Full)?,
            ))
        })
        .collect()
}

pub fn write_friedrichs<W: Write>(out: W, rows: &[(usize, f64, f64)]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "c_bubble", "c_full"])?;
    for (p, b, f) in rows {
        w.write_record([p.to_string(), fmt_num(*b), fmt_num(*f)])?;
    }
    w.flush()?;
    Ok(())
}

/// Gram matrix of `kind` on P_p, rows `i,j,value` in row-major order.
pub fn gram(
    element: Element,
    kind: &str,
    p: usize,
    margin: usize,
) -> CliResult<Vec<(usize, usize, f64)>> {
    let k: GramKind = kind
        .parse()
        .map_err(|_| CliError::Config(format!("unknown Gram kind `{kind}`")))?;
    check_degree(p + margin.max(2) + LIFT_MARGIN)?;
    let g = gram_matrix(element, k, p, margin)?;
    let mut out = Vec::with_capacity(g.len());
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            out.push((i, j, g[(i, j)]));
        }
    }
    Ok(out)
}

pub fn write_gram<W: Write>(out: W, rows: &[(usize, usize, f64)]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "value"])?;
    for (i, j, v) in rows {
        w.write_record([i.to_string(), j.to_string(), fmt_num(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// One JSON report record.
#[derive(Clone, Debug, Serialize, serde::Deserialize, PartialEq)]
pub struct ReportEntry {
    pub check_id: String,
    pub status: String,
    pub measured: Option<f64>,
    pub expected: f64,
    pub tolerance: f64,
}

impl From<&Check> for ReportEntry {
    fn from(c: &Check) -> Self {
        Self {
            check_id: c.id.clone(),
            status: c.status.as_str().to_string(),
            measured: c.measured.is_finite().then_some(c.measured),
            expected: c.expected,
            tolerance: c.tolerance,
        }
    }
}

/// Runs the suite; the caller decides the exit status with [`verify_status`].
pub fn verify(cfg: &SuiteConfig) -> CliResult<Vec<Check>> {
    if cfg.p_max == 0 {
        return Err(CliError::Config("--pmax must be at least 1".into()));
    }
    Ok(run_suite(cfg)?)
}

/// 0 when every check passes, 1 otherwise (an inconclusive slope is not a pass).
pub fn verify_status(checks: &[Check]) -> i32 {
    if checks.iter().all(|c| c.status == Status::Pass) {
        0
    } else {
        1
    }
}

pub fn write_table<W: Write>(mut out: W, checks: &[Check]) -> std::io::Result<()> {
    let width = checks.iter().map(|c| c.id.len()).max().unwrap_or(8).max(8);
    writeln!(
        out,
        "{:<width$}  {:<12}  {:>24}  {:>24}  {:>12}",
        "check", "status", "measured", "expected", "tolerance"
    )?;
    for c in checks {
        writeln!(
            out,
            "{:<width$}  {:<12}  {:>24}  {:>24}  {:>12.3e}",
            c.id,
            c.status.as_str(),
            fmt_num(c.measured),
            fmt_num(c.expected),
            c.tolerance
        )?;
    }
    let failed = checks.iter().filter(|c| c.status != Status::Pass).count();
    writeln!(out, "{} checks, {} not passing", checks.len(), failed)
}

pub fn write_report<W: Write>(out: W, checks: &[Check]) -> CliResult<()> {
    let entries: Vec<ReportEntry> = checks.iter().map(ReportEntry::from).collect();
    serde_json::to_writer_pretty(out, &entries).map_err(|e| CliError::Runtime(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_carry_seventeen_digits() {
        assert_eq!(fmt_num(1.0), "1.0000000000000000e0");
        let x = 0.1f64 + 0.2;
        assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_element("quad").unwrap(), Element::Square);
        assert_eq!(parse_element("x").unwrap_err().exit_code(), 2);
        assert!(Operator::parse("div").is_ok() && Operator::parse("curl").is_err());
        assert!(apply_quad_override(Some("abc")).is_err());
        assert!(apply_quad_override(Some("0")).is_err());
        assert!(apply_quad_override(None).is_ok());
    }

    #[test]
    fn config_validation() {
        let mut c = RunConfig::new(Element::Square, 3, "smooth_trig");
        assert!(c.validate().is_ok());
        c.p_ref = Some(4);
        assert!(c.validate().is_err());
        c.p_ref = None;
        c.p_max = 0;
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn slope_column_fills_after_window() {
        let c = RunConfig::new(Element::Square, 5, "curl_smooth");
        let rows = converge(&c).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows[..3].iter().all(|r| r.slope_window.is_nan()));
        assert!(rows[3..].iter().all(|r| r.slope_window < -1.0), "{rows:?}");
    }

    #[test]
    fn report_entries_round_trip() {
        let checks = vec![
            Check::at_most("a", 0.5, 1.0),
            Check::at_most("b", f64::NAN, 1.0),
        ];
        let mut buf = Vec::new();
        write_report(&mut buf, &checks).unwrap();
        let back: Vec<ReportEntry> = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back[0].status, "pass");
        assert_eq!(back[1].measured, None);
        assert_eq!(verify_status(&checks), 1);
        assert_eq!(verify_status(&checks[..1]), 0);
    }
}
