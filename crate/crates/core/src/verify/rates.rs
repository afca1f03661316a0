use super::SlopeReport;
use crate::error::{invalid, Result};
use crate::fields::{ScalarFn, VectorField};
use crate::interp::{proj_dualhalf_with, DivPairing, InterpContext, ScalarData, VectorData};
use crate::refelem::Element;
use crate::sobolev::{DualHalfGram, ErrorNorms, LiftVariant, LIFT_MARGIN};
use alloc::string::String;
use alloc::vec::Vec;

/// Absolute tolerance on fitted exponents.
pub const SLOPE_TOL: f64 = 0.15;
/// Number of trailing degrees in a slope fit.
pub const SLOPE_WINDOW: usize = 4;

/// Moment data of one field and the reference Gram in which its
/// interpolation errors are measured.
pub struct RateSetup {
    pub element: Element,
    pub p_max: usize,
    pub data: VectorData,
    pub gram: DualHalfGram,
}

impl RateSetup {
    /// Data of degree `max(p_ref, p_max + LIFT_MARGIN)`; errors measured in the
    /// discrete norm on P_{p_ref}.
    pub fn new(element: Element, u: &dyn VectorField, p_max: usize, p_ref: usize) -> Result<Self> {
        if p_ref < p_max + 2 {
            return Err(invalid("reference degree must exceed p_max by at least 2"));
        }
        let data = VectorData::new(element, u, p_ref.max(p_max + LIFT_MARGIN))?;
        let gram = DualHalfGram::new(element, p_ref, LiftVariant::Tilde, p_ref + LIFT_MARGIN)?;
        Ok(Self {
            element,
            p_max,
            data,
            gram,
        })
    }

    /// Error norms of the degree-p interpolant.
    pub fn errors(&self, p: usize, pairing: DivPairing) -> Result<ErrorNorms> {
        let ctx = InterpContext::new(self.element, p)?;
        let parts = ctx.interpolate(&self.data, pairing)?;
        self.data.error_norms(&parts.total, &self.gram)
    }

    /// Rows for p = 1..=p_max, in order.
    pub fn sweep(&self, pairing: DivPairing) -> Result<Vec<ErrorNorms>> {
        (1..=self.p_max).map(|p| self.errors(p, pairing)).collect()
    }
}

/// `||f - proj_dualhalf(f, p)||` in the discrete H-tilde^{-1/2} norm on
/// P_{p_ref}, for p = 1..=p_max, with the trailing slope against
/// `-(1/2 + regularity)`.
pub fn projector_rate(
    element: Element,
    name: &str,
    f: &dyn ScalarFn,
    regularity: f64,
    p_max: usize,
    p_ref: usize,
) -> Result<SlopeReport> {
    if p_ref < p_max + 2 {
        return Err(invalid("reference degree must exceed p_max by at least 2"));
    }
    let data = ScalarData::from_fn(element, f, p_ref.max(p_max) + LIFT_MARGIN)?;
    let gram = DualHalfGram::new(element, p_ref, LiftVariant::Tilde, p_ref + LIFT_MARGIN)?;
    let mut degrees = Vec::new();
    let mut errors = Vec::new();
    for p in 1..=p_max {
        let g = DualHalfGram::new(element, p, LiftVariant::Tilde, p + LIFT_MARGIN)?;
        let q = proj_dualhalf_with(&g, &data.f)?;
        degrees.push(p);
        errors.push(data.dualhalf_error(&q, &gram)?);
    }
    Ok(SlopeReport::new(
        String::from(name),
        "dualhalf",
        degrees,
        errors,
        SLOPE_WINDOW,
        -(0.5 + regularity),
        SLOPE_TOL,
    ))
}

/// `||Pi u||_{L2} + ||div Pi u||_{H-tilde^{-1/2}}` for p in `degrees`.
pub fn stability_table(
    element: Element,
    u: &dyn VectorField,
    degrees: &[usize],
) -> Result<Vec<f64>> {
    let top = degrees.iter().copied().max().unwrap_or(1);
    let data = VectorData::new(element, u, top + LIFT_MARGIN)?;
    degrees
        .iter()
        .map(|p| {
            let ctx = InterpContext::new(element, *p)?;
            let total = ctx.interp_div_half(&data)?.total;
            let d = total.divergence();
            Ok(total.l2_norm() + libm::sqrt(ctx.half.norm_sq_of(&d.coeffs).max(0.0)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{field_by_name, rt_random, ScalarSmooth};

    #[test]
    fn polynomial_fields_have_zero_error_from_their_order() {
        let el = Element::Square;
        let u = rt_random(el, 3, 5);
        let s = RateSetup::new(el, &u, 4, 8).unwrap();
        let rows = s.sweep(DivPairing::DualHalf).unwrap();
        assert!(rows[0].l2 > 1e-3);
        for r in &rows[2..] {
            assert!(r.l2 < 1e-10 && r.dualhalf_graph() < 1e-10, "{r:?}");
        }
        assert!(RateSetup::new(el, &u, 4, 5).is_err());
    }

    #[test]
    fn smooth_projector_decays_fast() {
        let r = projector_rate(
            Element::Square,
            "scalar_smooth",
            &ScalarSmooth,
            f64::INFINITY,
            8,
            14,
        )
        .unwrap();
        assert!(r.slope() <= -3.0, "{}", r.slope());
        let q = crate::fields::poly_random(Element::Triangle, 3, 1);
        let r = projector_rate(Element::Triangle, "poly", &q, f64::INFINITY, 5, 9).unwrap();
        for (p, e) in r.degrees.iter().zip(&r.errors) {
            if *p >= 3 {
                assert!(*e < 1e-10, "{p} {e}");
            }
        }
    }

    #[test]
    fn stability_of_smooth_field() {
        let f = field_by_name(Element::Triangle, "smooth_trig", 0).unwrap();
        let t = stability_table(Element::Triangle, f.vector().unwrap(), &[1, 2, 3, 4]).unwrap();
        let max = t.iter().cloned().fold(0.0, f64::max);
        let min = t.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min <= 3.0, "{t:?}");
    }
}
