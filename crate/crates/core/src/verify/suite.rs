use super::constants::{
    friedrichs_subspace, friedrichs_sweep, inverse_sweep, FriedrichsVariant, InversePair,
};
use super::rates::{projector_rate, stability_table, RateSetup, SLOPE_TOL, SLOPE_WINDOW};
use super::{Check, SlopeReport};
use crate::error::{invalid, Result};
use crate::fields::{catalog, field_by_name, poly_random, rt_random, CurlOf, FieldKind};
use crate::interp::{DivPairing, InterpContext, ScalarData, VectorData};
use crate::linalg::asymmetry;
use crate::poincare::{right_inverse_div, PoincareConfig, PoincarePoly};
use crate::polyspace::spaces::{bubble_dim, rt_bubble_dim};
use crate::refelem::{max_quad_degree, Element};
use crate::sobolev::{DualHalfGram, GramKind, LiftVariant, LIFT_MARGIN};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use nalgebra::DMatrix;

/// What [`run_suite`] runs.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub element: Element,
    pub p_max: usize,
    pub seed: u64,
    /// Random inputs per degree in the reproduction and Poincare checks.
    pub samples: usize,
    /// Also run the slope checks (slow: reference degree `p_ref`).
    pub rates: bool,
    pub p_ref: usize,
}

impl SuiteConfig {
    pub fn new(element: Element, p_max: usize, seed: u64) -> Self {
        Self {
            element,
            p_max,
            seed,
            samples: 5,
            rates: false,
            p_ref: 30,
        }
    }
}

/// Symmetry of a Gram matrix to `1e-12` relative to its largest entry.
pub fn check_symmetric(id: impl Into<String>, g: &DMatrix<f64>) -> Check {
    let scale = g
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    Check::at_most(id, asymmetry(g) / scale, 1e-12)
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0f64, |m, v| {
        if m.is_nan() || v.is_nan() {
            f64::NAN
        } else {
            m.max(v)
        }
    })
}

/// Runs every check for one element; deterministic given the config.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let el = cfg.element;
    let pm = cfg.p_max;
    if pm == 0 {
        return Err(invalid("p_max must be at least 1"));
    }
    if pm + 2 * LIFT_MARGIN > max_quad_degree() {
        return Err(crate::Error::Capability {
            requested: pm + 2 * LIFT_MARGIN,
            max: max_quad_degree(),
        });
    }
    let tag = el.name();
    let mut out = Vec::new();

    // Grams
    for t in GramKind::ALL_TAGS {
        let k: GramKind = t.parse()?;
        if matches!(k, GramKind::EdgeH12 { .. }) && pm < 2 {
            continue;
        }
        let g = crate::sobolev::gram_default(el, k, pm)?;
        out.push(check_symmetric(format!("gram.{tag}.{t}.symmetric"), &g));
    }
    let half = DualHalfGram::new(el, pm, LiftVariant::Tilde, pm + LIFT_MARGIN)?;
    let root = libm::sqrt(el.area());
    let key = worst(
        (0..half.dim())
            .map(|j| root * (half.matrix[(j, 0)] - if j == 0 { 1.0 } else { 0.0 }).abs()),
    );
    out.push(Check::at_most(
        format!("gram.{tag}.key_identity"),
        key,
        1e-12,
    ));

    // reproduction and idempotence
    let mut repro = 0.0f64;
    let mut idem = 0.0f64;
    for p in 1..=pm {
        let ctx = InterpContext::new(el, p)?;
        for k in 0..cfg.samples as u64 {
            let u = rt_random(el, p, cfg.seed.wrapping_add(1000 * p as u64 + k));
            let data = VectorData::new(el, &u, ctx.required_degree())?;
            for pairing in [DivPairing::DualHalf, DivPairing::L2] {
                let t = ctx.interpolate(&data, pairing)?.total;
                repro = worst([repro, (&t.coeffs - &u.coeffs).norm() / u.coeffs.norm()]);
            }
        }
        let w = rt_random(el, p + 1, cfg.seed.wrapping_add(p as u64));
        let data = VectorData::new(el, &w, ctx.required_degree())?;
        let once = ctx.interp_div_half(&data)?.total;
        let again = ctx
            .interp_div_half(&VectorData::new(el, &once, ctx.required_degree())?)?
            .total;
        idem = worst([idem, (&again.coeffs - &once.coeffs).norm()]);
    }
    out.push(Check::at_most(
        format!("interp.{tag}.rt_reproduction"),
        repro,
        1e-9,
    ));
    out.push(Check::at_most(
        format!("interp.{tag}.idempotence"),
        idem,
        1e-10,
    ));

    // commuting diagrams, curl intertwining and stability over the catalog
    let fields = catalog(el, cfg.seed);
    let n = pm + LIFT_MARGIN;
    let (mut new_res, mut old_res, mut curl_res) = (0.0f64, 0.0f64, 0.0f64);
    let mut stability = 0.0f64;
    let contexts = (1..=pm)
        .map(|p| InterpContext::new(el, p))
        .collect::<Result<Vec<_>>>()?;
    for f in &fields {
        match &f.kind {
            FieldKind::Vector(u) => {
                let data = VectorData::new(el, u.as_ref(), n)?;
                let div_norm = libm::sqrt(data.norms_sq().1);
                for ctx in &contexts {
                    let new = ctx.interp_div_half(&data)?.total.divergence();
                    let rhs = ctx.proj_dualhalf_lower(&data.div)?;
                    let r = libm::sqrt(ctx.half.norm_sq_of(&(&new.coeffs - &rhs.coeffs)).max(0.0));
                    new_res = worst([new_res, r / (1.0 + div_norm)]);
                    let old = ctx.interp_div(&data)?.total.divergence();
                    let m = old.coeffs.len();
                    old_res = worst([old_res, (&old.coeffs - data.div.rows(0, m)).norm()]);
                }
                // the last entry stands in for the norm of u itself
                let mut degrees: Vec<usize> = (1..=pm).collect();
                degrees.push(pm + 4);
                let t = stability_table(el, u.as_ref(), &degrees)?;
                let (head, reference) = t.split_at(pm);
                let max = head.iter().cloned().fold(0.0, f64::max);
                stability = worst([stability, max / reference[0]]);
            }
            FieldKind::Scalar(g) => {
                let u = CurlOf(g.clone());
                let vd = VectorData::new(el, &u, n)?;
                let sd = ScalarData::from_field(el, g.as_ref(), n)?;
                for ctx in &contexts {
                    let pu = ctx.interp_div_half(&vd)?.total;
                    let pg = ctx.interp_h1(&sd)?.curl();
                    curl_res = worst([curl_res, (&pu.coeffs - &pg.coeffs).norm()]);
                }
            }
            FieldKind::Density(_) => {}
        }
    }
    out.push(Check::at_most(
        format!("interp.{tag}.commuting_new"),
        new_res,
        1e-8,
    ));
    out.push(Check::at_most(
        format!("interp.{tag}.commuting_old"),
        old_res,
        1e-9,
    ));
    out.push(Check::at_most(
        format!("interp.{tag}.curl_intertwining"),
        curl_res,
        1e-8,
    ));
    out.push(Check::at_most(
        format!("interp.{tag}.stability"),
        stability,
        3.0,
    ));

    // Poincare operators
    let pc = PoincareConfig::default_for(el);
    let (mut r1, mut a1, mut fit, mut tres) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for p in 1..=pm.min(5) {
        let ops = PoincarePoly::new(&pc, p)?;
        fit = worst([fit, ops.r_residual, ops.a_residual]);
        let curl = crate::polyspace::spaces::curl_matrix(
            el,
            p,
            &crate::polyspace::spaces::diff_matrices(el, p),
        );
        for k in 0..cfg.samples as u64 {
            let s = cfg.seed.wrapping_add(77 * p as u64 + k);
            let psi = poly_random(el, p, s);
            let v = ops.r_of(&psi)?;
            r1 = worst([
                r1,
                (&v.divergence().coeffs - &psi.coeffs).norm() / psi.coeffs.norm(),
            ]);
            let g = poly_random(el, p, s ^ 0x5a5a);
            let w = crate::polyspace::RtPoly {
                element: el,
                order: p,
                coeffs: &curl * &g.coeffs,
            };
            let back = &curl * ops.a_of(&w)?.coeffs;
            a1 = worst([a1, (back - &w.coeffs).norm() / w.coeffs.norm()]);
        }
        if p >= 2 {
            let mut psi = poly_random(el, p - 1, cfg.seed.wrapping_add(p as u64));
            psi.coeffs[0] = 0.0;
            let t = right_inverse_div(&psi, p, &pc)?;
            tres = worst([tres, (&t.divergence().coeffs - &psi.coeffs).norm()]);
        }
    }
    out.push(Check::at_most(format!("poincare.{tag}.r1"), r1, 1e-8));
    out.push(Check::at_most(format!("poincare.{tag}.a1"), a1, 1e-8));
    out.push(Check::at_most(format!("poincare.{tag}.fit"), fit, 1e-8));
    out.push(Check::at_most(
        format!("poincare.{tag}.right_inverse"),
        tres,
        1e-9,
    ));

    // Friedrichs and inverse inequalities
    let mut dims = 0.0f64;
    for p in 1..=pm {
        let s = friedrichs_subspace(el, p, FriedrichsVariant::Bubble).ncols();
        let want = rt_bubble_dim(el, p) - bubble_dim(el, p);
        dims = dims.max((s as f64 - want as f64).abs());
    }
    out.push(Check::at_most(
        format!("friedrichs.{tag}.dimensions"),
        dims,
        0.0,
    ));
    let degrees: Vec<usize> = (2..=pm).collect();
    if degrees.is_empty() {
        let c = super::constants::friedrichs_constant(el, 1, FriedrichsVariant::Bubble)?;
        out.push(Check::at_most(
            format!("friedrichs.{tag}.bubble.empty"),
            c,
            0.0,
        ));
    } else {
        for variant in [FriedrichsVariant::Bubble, FriedrichsVariant::Full] {
            out.extend(friedrichs_sweep(el, &degrees, variant)?.checks());
        }
        out.extend(inverse_sweep(el, &degrees, InversePair::H1OverL2)?.checks());
    }

    if cfg.rates {
        out.extend(rate_checks(cfg)?);
    }
    Ok(out)
}

/// Slope checks over p = 1..=p_max against the predicted exponents.
fn rate_checks(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let el = cfg.element;
    let mut out = Vec::new();
    let degrees: Vec<usize> = (1..=cfg.p_max).collect();
    for a in [0.4, 0.6, 0.8] {
        let name = format!("curl_singular({a})");
        let f = field_by_name(el, &name, cfg.seed)?;
        let setup = RateSetup::new(el, f.vector().expect("vector entry"), cfg.p_max, cfg.p_ref)?;
        let rows = setup.sweep(DivPairing::DualHalf)?;
        let e = rows.iter().map(|r| r.dualhalf_graph()).collect();
        let rep = SlopeReport::new(
            name,
            "dualhalf_div",
            degrees.clone(),
            e,
            SLOPE_WINDOW,
            -(a + 0.5),
            SLOPE_TOL,
        );
        out.push(rep.check());
    }
    let f = field_by_name(el, "grad_singular(0.6)", cfg.seed)?;
    let setup = RateSetup::new(el, f.vector().expect("vector entry"), cfg.p_max, cfg.p_ref)?;
    let e = setup
        .sweep(DivPairing::L2)?
        .iter()
        .map(|r| r.hdiv())
        .collect();
    out.push(
        SlopeReport::new(
            f.name.clone(),
            "hdiv_old",
            degrees.clone(),
            e,
            SLOPE_WINDOW,
            -0.6,
            SLOPE_TOL,
        )
        .check(),
    );
    let f = field_by_name(el, "density_singular(0.6)", cfg.seed)?;
    let rep = projector_rate(
        el,
        &f.name,
        f.density().expect("scalar entry"),
        f.regularity,
        cfg.p_max,
        cfg.p_ref,
    )?;
    out.push(rep.check());
    Ok(out)
}
