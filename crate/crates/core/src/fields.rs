//! Analytic test fields with known divergence and Sobolev regularity.
//!
//! The singular entries are built from `s = |x - c|^2 - R^2` on a circle
//! inside the element: `|s|^gamma` lies in H^{gamma + 1/2 - eps} and, unlike a
//! point singularity at a corner, is approximated by polynomials of degree p
//! no better than its Sobolev index predicts. The corner entry keeps the
//! classical harmonic singularity at vertex 0 for comparison.

use crate::error::{invalid, Result};
use crate::math::{atan2, cos, powf, sin, sqrt, PI};
use crate::polyspace::{rt_basis, scalar_dim, RtPoly};
use crate::refelem::Element;
pub use crate::refelem::Singularity;
use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Regularity haircut: a field of limiting exponent alpha is declared in H^{alpha - EPS}.
pub const EPS: f64 = 0.01;

/// Circle carrying the singular entries: centre and radius per element.
pub fn default_circle(element: Element) -> ([f64; 2], f64) {
    match element {
        Element::Square => ([0.47, 0.52], 0.28),
        Element::Triangle => ([0.48, 0.30], 0.17),
    }
}

pub trait ScalarFn: Send + Sync {
    fn value(&self, x: [f64; 2]) -> f64;
    fn singularity(&self) -> Option<Singularity> {
        None
    }
    /// Polynomial degree when the function is a polynomial.
    fn poly_degree(&self) -> Option<usize> {
        None
    }
}

pub trait ScalarField: ScalarFn {
    fn grad(&self, x: [f64; 2]) -> [f64; 2];
}

pub trait VectorField: Send + Sync {
    fn value(&self, x: [f64; 2]) -> [f64; 2];
    fn div(&self, x: [f64; 2]) -> f64;
    fn singularity(&self) -> Option<Singularity> {
        None
    }
    fn poly_degree(&self) -> Option<usize> {
        None
    }
}

/// A closure-backed scalar function.
pub struct FnScalar<F: Fn([f64; 2]) -> f64 + Send + Sync> {
    pub f: F,
    pub singularity: Option<Singularity>,
    pub degree: Option<usize>,
}

impl<F: Fn([f64; 2]) -> f64 + Send + Sync> ScalarFn for FnScalar<F> {
    fn value(&self, x: [f64; 2]) -> f64 {
        (self.f)(x)
    }
    fn singularity(&self) -> Option<Singularity> {
        self.singularity
    }
    fn poly_degree(&self) -> Option<usize> {
        self.degree
    }
}

/// Divergence of a vector field as a scalar function.
pub struct DivOf<'a>(pub &'a dyn VectorField);

impl ScalarFn for DivOf<'_> {
    fn value(&self, x: [f64; 2]) -> f64 {
        self.0.div(x)
    }
    fn singularity(&self) -> Option<Singularity> {
        self.0.singularity()
    }
    fn poly_degree(&self) -> Option<usize> {
        self.0.poly_degree().map(|d| d.saturating_sub(1))
    }
}

/// `curl g = (dg/dx2, -dg/dx1)` of a scalar field.
pub struct CurlOf(pub Arc<dyn ScalarField>);

impl VectorField for CurlOf {
    fn value(&self, x: [f64; 2]) -> [f64; 2] {
        let g = self.0.grad(x);
        [g[1], -g[0]]
    }
    fn div(&self, _x: [f64; 2]) -> f64 {
        0.0
    }
    fn singularity(&self) -> Option<Singularity> {
        self.0.singularity()
    }
    fn poly_degree(&self) -> Option<usize> {
        self.0.poly_degree().map(|d| d.saturating_sub(1))
    }
}

impl VectorField for RtPoly {
    fn value(&self, x: [f64; 2]) -> [f64; 2] {
        RtPoly::value(self, x)
    }
    fn div(&self, x: [f64; 2]) -> f64 {
        self.divergence().value(x)
    }
    fn poly_degree(&self) -> Option<usize> {
        Some(self.order)
    }
}

/// `(sin(pi x1) cos(pi x2), x1 x2)`.
pub struct SmoothTrig;

impl VectorField for SmoothTrig {
    fn value(&self, x: [f64; 2]) -> [f64; 2] {
        [sin(PI * x[0]) * cos(PI * x[1]), x[0] * x[1]]
    }
    fn div(&self, x: [f64; 2]) -> f64 {
        PI * cos(PI * x[0]) * cos(PI * x[1]) + x[0]
    }
}

/// `sin(pi x1) sin(pi x2)`.
pub struct ScalarSmooth;

impl ScalarFn for ScalarSmooth {
    fn value(&self, x: [f64; 2]) -> f64 {
        sin(PI * x[0]) * sin(PI * x[1])
    }
}

impl ScalarField for ScalarSmooth {
    fn grad(&self, x: [f64; 2]) -> [f64; 2] {
        [
            PI * cos(PI * x[0]) * sin(PI * x[1]),
            PI * sin(PI * x[0]) * cos(PI * x[1]),
        ]
    }
}

/// `|s|^gamma` with `s = |x - c|^2 - R^2`.
#[derive(Clone, Copy, Debug)]
pub struct Interface {
    pub center: [f64; 2],
    pub radius: f64,
    pub gamma: f64,
}

impl Interface {
    fn s(&self, x: [f64; 2]) -> (f64, [f64; 2]) {
        let d = [x[0] - self.center[0], x[1] - self.center[1]];
        (d[0] * d[0] + d[1] * d[1] - self.radius * self.radius, d)
    }

    /// `gamma |s|^(gamma-1) sign(s)`, the derivative of the profile in s.
    fn dprofile(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        self.gamma * powf(s.abs(), self.gamma - 1.0) * s.signum()
    }

    pub fn laplacian(&self, x: [f64; 2]) -> f64 {
        let (s, d) = self.s(x);
        if s == 0.0 {
            return 0.0;
        }
        let g = self.gamma;
        let r2 = d[0] * d[0] + d[1] * d[1];
        g * (g - 1.0) * powf(s.abs(), g - 2.0) * 4.0 * r2 + 4.0 * self.dprofile(s)
    }
}

impl ScalarFn for Interface {
    fn value(&self, x: [f64; 2]) -> f64 {
        let (s, _) = self.s(x);
        if s == 0.0 {
            return if self.gamma > 0.0 { 0.0 } else { f64::INFINITY };
        }
        powf(s.abs(), self.gamma)
    }
    fn singularity(&self) -> Option<Singularity> {
        Some(Singularity::Circle {
            center: self.center,
            radius: self.radius,
        })
    }
}

impl ScalarField for Interface {
    fn grad(&self, x: [f64; 2]) -> [f64; 2] {
        let (s, d) = self.s(x);
        let f = 2.0 * self.dprofile(s);
        [f * d[0], f * d[1]]
    }
}

/// `grad |s|^gamma`, with divergence the Laplacian of the profile.
pub struct GradInterface(pub Interface);

impl VectorField for GradInterface {
    fn value(&self, x: [f64; 2]) -> [f64; 2] {
        self.0.grad(x)
    }
    fn div(&self, x: [f64; 2]) -> f64 {
        self.0.laplacian(x)
    }
    fn singularity(&self) -> Option<Singularity> {
        self.0.singularity()
    }
}

/// `curl(rho^alpha sin(alpha theta))` about vertex 0, theta from edge 0:
/// `alpha rho^(alpha-1) (cos((alpha-1) theta), -sin((alpha-1) theta))`.
pub struct Corner {
    pub alpha: f64,
    pub vertex: [f64; 2],
}

impl VectorField for Corner {
    fn value(&self, x: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - self.vertex[0], x[1] - self.vertex[1]];
        let rho = sqrt(d[0] * d[0] + d[1] * d[1]);
        if rho == 0.0 {
            return [0.0, 0.0];
        }
        let th = atan2(d[1], d[0]);
        let a = self.alpha;
        let m = a * powf(rho, a - 1.0);
        [m * cos((a - 1.0) * th), -m * sin((a - 1.0) * th)]
    }
    fn div(&self, _x: [f64; 2]) -> f64 {
        0.0
    }
    fn singularity(&self) -> Option<Singularity> {
        Some(Singularity::Point(self.vertex))
    }
}

/// A random element of RT_p0(K), reproducible from the seed.
pub fn rt_random(element: Element, p0: usize, seed: u64) -> RtPoly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = rt_basis(element, p0);
    let coords = DVector::from_iterator(
        b.ncols(),
        (0..b.ncols()).map(|_| rng.random_range(-1.0..1.0)),
    );
    RtPoly {
        element,
        order: p0,
        coeffs: b * coords,
    }
}

/// A random element of P_p0(K), reproducible from the seed.
pub fn poly_random(element: Element, p0: usize, seed: u64) -> crate::polyspace::ScalarPoly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = scalar_dim(element, p0);
    crate::polyspace::ScalarPoly {
        element,
        degree: p0,
        coeffs: DVector::from_iterator(n, (0..n).map(|_| rng.random_range(-1.0..1.0))),
    }
}

impl ScalarFn for crate::polyspace::ScalarPoly {
    fn value(&self, x: [f64; 2]) -> f64 {
        crate::polyspace::ScalarPoly::value(self, x)
    }
    fn poly_degree(&self) -> Option<usize> {
        Some(self.degree)
    }
}

impl ScalarField for crate::polyspace::ScalarPoly {
    fn grad(&self, x: [f64; 2]) -> [f64; 2] {
        self.value_grad(x).1
    }
}

#[derive(Clone)]
pub enum FieldKind {
    Vector(Arc<dyn VectorField>),
    /// H1 data for the scalar interpolant.
    Scalar(Arc<dyn ScalarField>),
    /// L2 data for the scalar projectors only.
    Density(Arc<dyn ScalarFn>),
}

/// A catalog entry.
#[derive(Clone)]
pub struct Field {
    pub name: String,
    pub kind: FieldKind,
    /// Vector entries: u in H^r(div, K); scalar entries: g in H^{1+r}(K);
    /// densities: f in H^r(K). Infinite for smooth data.
    pub regularity: f64,
    /// For curl fields, the scalar potential g with u = curl g.
    pub potential: Option<Arc<dyn ScalarField>>,
    pub singularity: Option<Singularity>,
}

impl core::fmt::Debug for Field {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Field")
            .field("name", &self.name)
            .field("regularity", &self.regularity)
            .field("singularity", &self.singularity)
            .finish()
    }
}

impl Field {
    pub fn vector(&self) -> Option<&dyn VectorField> {
        match &self.kind {
            FieldKind::Vector(v) => Some(v.as_ref()),
            _ => None,
        }
    }

    pub fn scalar(&self) -> Option<&dyn ScalarField> {
        match &self.kind {
            FieldKind::Scalar(s) => Some(s.as_ref()),
            _ => None,
        }
    }

    /// Scalar data usable by the L2 and H-tilde^{-1/2} projectors.
    pub fn density(&self) -> Option<&dyn ScalarFn> {
        match &self.kind {
            FieldKind::Scalar(s) => Some(s.as_ref() as &dyn ScalarFn),
            FieldKind::Density(d) => Some(d.as_ref()),
            FieldKind::Vector(_) => None,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(invalid("singular exponent alpha must be positive"))
    }
}

fn smooth(name: &str, kind: FieldKind, potential: Option<Arc<dyn ScalarField>>) -> Field {
    Field {
        name: String::from(name),
        kind,
        regularity: f64::INFINITY,
        potential,
        singularity: None,
    }
}

/// Builds a catalog entry from its CLI name, e.g. `curl_singular(0.6)`.
///
/// Singular entries with exponent alpha:
/// * `curl_singular`: `curl |s|^(alpha+1/2)`, divergence free, in H^{alpha-eps}.
/// * `grad_singular`: `grad |s|^(alpha+3/2)`, divergence in H^{alpha-eps}.
/// * `curl_corner`: `curl(rho^alpha sin(alpha theta))` at vertex 0.
/// * `scalar_singular`: `|s|^(alpha+1/2)` in H^{1+alpha-eps}.
/// * `density_singular`: `|s|^(alpha-1/2)` in H^{alpha-eps}.
///
/// Here `s = |x - c|^2 - R^2` with the circle from [`default_circle`].
pub fn field_by_name(element: Element, name: &str, seed: u64) -> Result<Field> {
    let name = name.trim();
    let (base, arg) = match name.find('(') {
        Some(i) if name.ends_with(')') => (&name[..i], Some(&name[i + 1..name.len() - 1])),
        Some(_) => return Err(invalid("malformed field name")),
        None => (name, None),
    };
    let num = |default: f64| -> Result<f64> {
        match arg {
            None => Ok(default),
            Some(a) => a
                .trim()
                .parse::<f64>()
                .map_err(|_| invalid("field parameter is not a number")),
        }
    };
    let (center, radius) = default_circle(element);
    let interface = |gamma: f64| Interface {
        center,
        radius,
        gamma,
    };
    let singular =
        |base: &str, a: f64, kind: FieldKind, potential: Option<Arc<dyn ScalarField>>| {
            let singularity = match &kind {
                FieldKind::Vector(v) => v.singularity(),
                FieldKind::Scalar(g) => g.singularity(),
                FieldKind::Density(d) => d.singularity(),
            };
            Field {
                name: format!("{base}({a})"),
                kind,
                regularity: a - EPS,
                potential,
                singularity,
            }
        };
    let field = match base {
        "smooth_trig" => smooth("smooth_trig", FieldKind::Vector(Arc::new(SmoothTrig)), None),
        "curl_smooth" => {
            let g: Arc<dyn ScalarField> = Arc::new(ScalarSmooth);
            smooth(
                "curl_smooth",
                FieldKind::Vector(Arc::new(CurlOf(g.clone()))),
                Some(g),
            )
        }
        "scalar_smooth" => smooth(
            "scalar_smooth",
            FieldKind::Scalar(Arc::new(ScalarSmooth)),
            None,
        ),
        "rt_random" => {
            let p0 = num(3.0)?;
            if p0 < 1.0 || libm::trunc(p0) != p0 {
                return Err(invalid("rt_random needs an integer order >= 1"));
            }
            let p0 = p0 as usize;
            let kind = FieldKind::Vector(Arc::new(rt_random(element, p0, seed)));
            let mut f = smooth("rt_random", kind, None);
            f.name = format!("rt_random({p0})");
            f
        }
        "curl_singular" | "grad_singular" | "curl_corner" | "scalar_singular"
        | "density_singular" => {
            let a = num(0.6)?;
            check_alpha(a)?;
            match base {
                "curl_singular" => {
                    let g: Arc<dyn ScalarField> = Arc::new(interface(a + 0.5));
                    singular(
                        base,
                        a,
                        FieldKind::Vector(Arc::new(CurlOf(g.clone()))),
                        Some(g),
                    )
                }
                "grad_singular" => {
                    let u = GradInterface(interface(a + 1.5));
                    singular(base, a, FieldKind::Vector(Arc::new(u)), None)
                }
                "curl_corner" => {
                    let u = Corner {
                        alpha: a,
                        vertex: element.vertices()[0],
                    };
                    singular(base, a, FieldKind::Vector(Arc::new(u)), None)
                }
                "scalar_singular" => singular(
                    base,
                    a,
                    FieldKind::Scalar(Arc::new(interface(a + 0.5))),
                    None,
                ),
                _ => singular(
                    base,
                    a,
                    FieldKind::Density(Arc::new(interface(a - 0.5))),
                    None,
                ),
            }
        }
        _ => return Err(invalid("unknown field name")),
    };
    Ok(field)
}

/// Names of the default catalog entries.
pub const CATALOG_NAMES: [&str; 10] = [
    "smooth_trig",
    "curl_smooth",
    "rt_random(3)",
    "curl_singular(0.6)",
    "curl_singular(0.4)",
    "grad_singular(0.6)",
    "curl_corner(0.6)",
    "scalar_smooth",
    "scalar_singular(0.6)",
    "density_singular(0.6)",
];

pub fn catalog(element: Element, seed: u64) -> Vec<Field> {
    CATALOG_NAMES
        .iter()
        .map(|n| field_by_name(element, n, seed).expect("catalog names parse"))
        .collect()
}

/// Boxed closure helper for ad-hoc scalar data.
pub fn scalar_fn<F: Fn([f64; 2]) -> f64 + Send + Sync + 'static>(f: F) -> Box<dyn ScalarFn> {
    Box::new(FnScalar {
        f,
        singularity: None,
        degree: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_div(u: &dyn VectorField, x: [f64; 2]) -> f64 {
        let h = 1e-5;
        let a = u.value([x[0] + h, x[1]]);
        let b = u.value([x[0] - h, x[1]]);
        let c = u.value([x[0], x[1] + h]);
        let d = u.value([x[0], x[1] - h]);
        (a[0] - b[0]) / (2.0 * h) + (c[1] - d[1]) / (2.0 * h)
    }

    fn sample_points(el: Element, sing: Option<Singularity>, n: usize) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut out = Vec::new();
        while out.len() < n {
            let x = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
            let far = sing.map_or(true, |s| s.distance(x) > 0.02);
            if el.contains(x, -0.02) && far {
                out.push(x);
            }
        }
        out
    }

    #[test]
    fn divergence_matches_finite_differences() {
        for el in Element::ALL {
            for f in catalog(el, 1) {
                let Some(u) = f.vector() else { continue };
                for x in sample_points(el, f.singularity, 50) {
                    let exact = u.div(x);
                    let fd = fd_div(u, x);
                    let scale = 1.0 + exact.abs() + u.value(x)[0].abs() + u.value(x)[1].abs();
                    assert!(
                        (exact - fd).abs() <= 1e-6 * scale,
                        "{} {x:?} {exact} {fd}",
                        f.name
                    );
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let h = 1e-6;
        for el in Element::ALL {
            for f in catalog(el, 1) {
                let g: &dyn ScalarField = match (&f.kind, &f.potential) {
                    (FieldKind::Scalar(s), _) => s.as_ref(),
                    (_, Some(p)) => p.as_ref(),
                    _ => continue,
                };
                for x in sample_points(el, f.singularity, 20) {
                    let gr = g.grad(x);
                    let fx = (g.value([x[0] + h, x[1]]) - g.value([x[0] - h, x[1]])) / (2.0 * h);
                    let fy = (g.value([x[0], x[1] + h]) - g.value([x[0], x[1] - h])) / (2.0 * h);
                    let scale = 1.0 + gr[0].abs() + gr[1].abs();
                    assert!(
                        (gr[0] - fx).abs() < 1e-6 * scale && (gr[1] - fy).abs() < 1e-6 * scale,
                        "{}",
                        f.name
                    );
                }
            }
        }
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        let g = Interface {
            center: [0.47, 0.52],
            radius: 0.28,
            gamma: 2.1,
        };
        let h = 1e-4;
        for x in [[0.2, 0.3], [0.5, 0.5], [0.9, 0.1]] {
            let fd = (g.value([x[0] + h, x[1]])
                + g.value([x[0] - h, x[1]])
                + g.value([x[0], x[1] + h])
                + g.value([x[0], x[1] - h])
                - 4.0 * g.value(x))
                / (h * h);
            assert!(
                (fd - g.laplacian(x)).abs() < 1e-5 * (1.0 + fd.abs()),
                "{x:?}"
            );
        }
    }

    #[test]
    fn corner_field_is_tangent_on_its_edges() {
        for el in Element::ALL {
            let f = field_by_name(el, "curl_corner(0.4)", 0).unwrap();
            let u = f.vector().unwrap();
            let n = el.edges()[0].normal;
            for s in [0.1, 0.5, 0.9] {
                let v = u.value([s, 0.0]);
                assert!((v[0] * n[0] + v[1] * n[1]).abs() < 1e-14, "{s} {v:?}");
            }
        }
    }

    #[test]
    fn interface_circle_lies_inside() {
        for el in Element::ALL {
            let (c, r) = default_circle(el);
            for e in el.edges() {
                assert!(Singularity::Circle {
                    center: c,
                    radius: r
                }
                .edge_cuts(&e)
                .is_empty());
            }
        }
    }

    #[test]
    fn names_and_errors() {
        let f = field_by_name(Element::Square, "curl_singular(0.6)", 0).unwrap();
        assert!((f.regularity - 0.59).abs() < 1e-15);
        assert!(matches!(f.singularity, Some(Singularity::Circle { .. })));
        assert!(field_by_name(Element::Square, "curl_singular(-1)", 0).is_err());
        assert!(field_by_name(Element::Square, "curl_singular(x)", 0).is_err());
        assert!(field_by_name(Element::Square, "nope", 0).is_err());
        let r = field_by_name(Element::Triangle, "rt_random(3)", 5).unwrap();
        assert!(r.regularity.is_infinite());
        assert_eq!(r.name, "rt_random(3)");
    }
}
