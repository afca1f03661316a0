//! Composite Gauss rules geometrically graded toward point singularities.

use super::quad::{gauss_legendre, QuadRule};
use super::{Edge, Element, BOUNDARY_TOL};
use crate::error::{invalid, Result};
use crate::math::{norm, sub};
use alloc::vec::Vec;

pub const GRADING_RATIO: f64 = 0.15;
pub const GRADING_LEVELS: usize = 30;
/// Minimum Gauss points across one graded layer: the nearby singularity
/// limits convergence to roughly 2.26^(-2n) at ratio 0.15.
const LAYER_POINTS: usize = 18;
const RESOLUTION: f64 = 4.0 * f64::EPSILON;
/// Interval layers narrower than this (relative to the singular abscissa)
/// are merged into one: nodes nearer than a few dozen ulp would round onto
/// the singularity.
const LAYER_RESOLUTION: f64 = 1e-12;

/// Breakpoints `0 = t_0 < ... < t_L = 1` graded toward 0.
fn graded_breaks() -> Vec<f64> {
    let mut b = Vec::with_capacity(GRADING_LEVELS + 2);
    b.push(0.0);
    let mut t = 1.0;
    let mut tail = Vec::with_capacity(GRADING_LEVELS + 1);
    for _ in 0..=GRADING_LEVELS {
        tail.push(t);
        t *= GRADING_RATIO;
    }
    tail.reverse();
    b.extend(tail);
    b
}

fn push_segment(
    nodes: &mut Vec<[f64; 1]>,
    weights: &mut Vec<f64>,
    l: f64,
    r: f64,
    g: &(Vec<f64>, Vec<f64>),
) {
    let h = r - l;
    for (x, w) in g.0.iter().zip(&g.1) {
        nodes.push([l + h * x]);
        weights.push(h * w);
    }
}

/// Rule on [a, b] graded toward every listed singular abscissa in [a, b].
pub fn graded_interval_rule(
    a: f64,
    b: f64,
    singular: &[f64],
    degree: usize,
) -> Result<QuadRule<1>> {
    if b <= a {
        return Err(invalid("empty interval"));
    }
    let tol = BOUNDARY_TOL * (b - a).max(1.0);
    let g = gauss_legendre(degree / 2 + 1);
    let gl = gauss_legendre((degree / 2 + 1).max(LAYER_POINTS));
    let mut cuts: Vec<f64> = singular
        .iter()
        .copied()
        .filter(|s| *s > a + tol && *s < b - tol)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite abscissae"));
    let is_sing = |x: f64| singular.iter().any(|s| (s - x).abs() <= tol);
    let breaks = graded_breaks();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for w in cuts.windows(2) {
        let (l, r) = (w[0], w[1]);
        let (sl, sr) = (is_sing(l), is_sing(r));
        let mut graded = |from: f64, to: f64| {
            // graded toward `from`
            let floor = LAYER_RESOLUTION * from.abs();
            let mut x0 = from;
            for k in 1..breaks.len() {
                let x1 = from + (to - from) * breaks[k];
                if (x1 - from).abs() <= floor && k + 1 < breaks.len() {
                    continue;
                }
                let (lo, hi) = if x0 < x1 { (x0, x1) } else { (x1, x0) };
                push_segment(&mut nodes, &mut weights, lo, hi, &gl);
                x0 = x1;
            }
        };
        match (sl, sr) {
            (false, false) => push_segment(&mut nodes, &mut weights, l, r, &g),
            (true, false) => graded(l, r),
            (false, true) => graded(r, l),
            (true, true) => {
                let m = 0.5 * (l + r);
                graded(l, m);
                graded(r, m);
            }
        }
    }
    Ok(QuadRule {
        nodes,
        weights,
        degree,
    })
}

/// Quadrature on the initial piece `[0, upto]` of an edge: arclength
/// abscissae, physical points and weights.
#[derive(Clone, Debug, Default)]
pub struct EdgeSamples {
    pub s: Vec<f64>,
    pub x: Vec<[f64; 2]>,
    pub w: Vec<f64>,
}

impl EdgeSamples {
    pub fn integrate(&self, mut f: impl FnMut(f64, [f64; 2]) -> f64) -> f64 {
        self.s
            .iter()
            .zip(&self.x)
            .zip(&self.w)
            .map(|((s, x), w)| w * f(*s, *x))
            .sum()
    }
}

/// Graded rule on `[0, upto]` of `edge`. Each half is parametrized from its
/// own end, so nodes graded toward a singular endpoint keep full relative
/// precision in their distance to it.
pub fn edge_samples(edge: &Edge, upto: f64, cuts: &[f64], degree: usize) -> Result<EdgeSamples> {
    let mut out = EdgeSamples::default();
    if upto <= 0.0 {
        return Ok(out);
    }
    let t = edge.tangent();
    let half = 0.5 * upto;
    let end = if upto >= edge.length {
        edge.b
    } else {
        edge.point(upto)
    };
    let fwd: Vec<f64> = cuts.iter().copied().filter(|c| *c <= half).collect();
    let r = graded_interval_rule(0.0, half, &fwd, degree)?;
    for (n, w) in r.nodes.iter().zip(&r.weights) {
        let d = n[0];
        out.s.push(d);
        out.x.push([edge.a[0] + d * t[0], edge.a[1] + d * t[1]]);
        out.w.push(*w);
    }
    let bwd: Vec<f64> = cuts
        .iter()
        .filter(|c| **c >= half)
        .map(|c| upto - c)
        .collect();
    let r = graded_interval_rule(0.0, upto - half, &bwd, degree)?;
    for (n, w) in r.nodes.iter().zip(&r.weights) {
        let d = n[0];
        out.s.push(upto - d);
        out.x.push([end[0] - d * t[0], end[1] - d * t[1]]);
        out.w.push(*w);
    }
    Ok(out)
}

/// Duffy-polar rule on triangle (c, a, b) graded toward the apex `c`.
pub fn graded_triangle_rule(
    c: [f64; 2],
    a: [f64; 2],
    b: [f64; 2],
    degree: usize,
) -> Result<QuadRule<2>> {
    let da = sub(a, c);
    let db = sub(b, c);
    let det = (da[0] * db[1] - da[1] * db[0]).abs();
    let gt = gauss_legendre(degree / 2 + 1);
    let gr = gauss_legendre(((degree + 1) / 2 + 1).max(LAYER_POINTS));
    let breaks = graded_breaks();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for k in 0..breaks.len() - 1 {
        let (r0, r1) = (breaks[k], breaks[k + 1]);
        let h = r1 - r0;
        if r1 * norm(da).max(norm(db)) <= RESOLUTION * norm(c) {
            continue;
        }
        for (xr, wr) in gr.0.iter().zip(&gr.1) {
            let r = r0 + h * xr;
            for (t, wt) in gt.0.iter().zip(&gt.1) {
                let d = [(1.0 - t) * da[0] + t * db[0], (1.0 - t) * da[1] + t * db[1]];
                nodes.push([c[0] + r * d[0], c[1] + r * d[1]]);
                weights.push(h * wr * wt * r * det);
            }
        }
    }
    Ok(QuadRule {
        nodes,
        weights,
        degree,
    })
}

/// Where an integrand fails to be smooth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Singularity {
    Point([f64; 2]),
    /// The circle `|x - center| = radius`.
    Circle {
        center: [f64; 2],
        radius: f64,
    },
}

impl Singularity {
    /// Distance from `x` to the singular set.
    pub fn distance(&self, x: [f64; 2]) -> f64 {
        match *self {
            Singularity::Point(c) => norm(sub(x, c)),
            Singularity::Circle { center, radius } => (norm(sub(x, center)) - radius).abs(),
        }
    }

    /// Arclength positions where the singular set meets `edge`.
    pub fn edge_cuts(&self, edge: &Edge) -> Vec<f64> {
        match *self {
            Singularity::Point(c) => {
                if edge.distance(c) <= BOUNDARY_TOL {
                    alloc::vec![edge.arclength_of(c)]
                } else {
                    Vec::new()
                }
            }
            Singularity::Circle { center, radius } => {
                let t = edge.tangent();
                let d = sub(edge.a, center);
                let b = d[0] * t[0] + d[1] * t[1];
                let c = d[0] * d[0] + d[1] * d[1] - radius * radius;
                let disc = b * b - c;
                if disc < 0.0 {
                    return Vec::new();
                }
                let r = crate::math::sqrt(disc);
                [-b - r, -b + r]
                    .into_iter()
                    .filter(|s| *s >= -BOUNDARY_TOL && *s <= edge.length + BOUNDARY_TOL)
                    .collect()
            }
        }
    }
}

/// Rule on triangle (c, a, b) in Duffy-polar coordinates about `c`, graded
/// along every ray toward the circle of radius `radius` about `c`.
pub fn graded_annulus_rule(
    c: [f64; 2],
    a: [f64; 2],
    b: [f64; 2],
    radius: f64,
    degree: usize,
) -> Result<QuadRule<2>> {
    let da = sub(a, c);
    let db = sub(b, c);
    let det = (da[0] * db[1] - da[1] * db[0]).abs();
    let gt = gauss_legendre(degree / 2 + 1);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (t, wt) in gt.0.iter().zip(&gt.1) {
        let d = [(1.0 - t) * da[0] + t * db[0], (1.0 - t) * da[1] + t * db[1]];
        let cut = radius / norm(d);
        let cuts = if cut < 1.0 {
            alloc::vec![cut]
        } else {
            Vec::new()
        };
        let rr = graded_interval_rule(0.0, 1.0, &cuts, degree + 1)?;
        for (r, wr) in rr.nodes.iter().zip(&rr.weights) {
            let r = r[0];
            nodes.push([c[0] + r * d[0], c[1] + r * d[1]]);
            weights.push(wt * wr * r * det);
        }
    }
    Ok(QuadRule {
        nodes,
        weights,
        degree,
    })
}

/// Element rule adapted to a singularity: a fan about the singular point or
/// about the circle's centre (which must lie in the element).
pub fn singular_rule(
    element: Element,
    sing: Option<&Singularity>,
    degree: usize,
) -> Result<QuadRule<2>> {
    match sing {
        None => element.rule(degree),
        Some(Singularity::Point(c)) => graded_element_rule(element, &[*c], degree),
        Some(Singularity::Circle { center, radius }) => {
            let c = *center;
            if !element.contains(c, -BOUNDARY_TOL) {
                return Err(invalid("circle centre must lie inside the element"));
            }
            let mut rule = QuadRule {
                nodes: Vec::new(),
                weights: Vec::new(),
                degree,
            };
            for e in element.edges() {
                rule.append(graded_annulus_rule(c, e.a, e.b, *radius, degree)?);
            }
            Ok(rule)
        }
    }
}

/// Element rule; with a singular point the element is fanned into
/// triangles with apex at the point, each graded toward it.
pub fn graded_element_rule(
    element: Element,
    singular: &[[f64; 2]],
    degree: usize,
) -> Result<QuadRule<2>> {
    match singular {
        [] => element.rule(degree),
        [c] => {
            if !element.contains(*c, BOUNDARY_TOL) {
                return Err(invalid("singular point outside element"));
            }
            let mut rule = QuadRule {
                nodes: Vec::new(),
                weights: Vec::new(),
                degree,
            };
            for e in element.edges() {
                if e.distance(*c) <= BOUNDARY_TOL {
                    continue;
                }
                if norm(sub(e.a, *c)) <= BOUNDARY_TOL || norm(sub(e.b, *c)) <= BOUNDARY_TOL {
                    continue;
                }
                rule.append(graded_triangle_rule(*c, e.a, e.b, degree)?);
            }
            Ok(rule)
        }
        _ => Err(invalid("at most one singular point is supported")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{powf, sqrt};

    #[test]
    fn interval_singular_endpoint() {
        let r = graded_interval_rule(0.0, 1.0, &[0.0], 10).unwrap();
        let v = r.integrate(|x| 1.0 / sqrt(x[0]));
        assert!((v - 2.0).abs() < 1e-11, "{v}");
        let v = r.integrate(|x| powf(x[0], -0.6));
        assert!((v - 2.5).abs() < 1e-10, "{v}");
    }

    #[test]
    fn edge_samples_toward_end_vertex() {
        // |x - v0|^(-0.4) along the last edge, which ends at vertex 0
        for el in Element::ALL {
            let e = el.edges()[el.vertices().len() - 1];
            let v = el.vertices()[0];
            let r = edge_samples(&e, e.length, &[e.length], 40).unwrap();
            let got = r.integrate(|_, x| powf(norm(sub(x, v)), -0.4));
            let exact = powf(e.length, 0.6) / 0.6;
            assert!((got - exact).abs() < 1e-13, "{el:?} {got} {exact}");
            for (s, x) in r.s.iter().zip(&r.x) {
                assert!(norm(sub(*x, e.point(*s))) < 1e-14);
            }
            let part = edge_samples(&e, 0.4, &[e.length], 10).unwrap();
            assert!((part.w.iter().sum::<f64>() - 0.4).abs() < 1e-14);
        }
    }

    #[test]
    fn interval_interior_singularity() {
        let r = graded_interval_rule(0.0, 1.0, &[0.3], 10).unwrap();
        let v = r.integrate(|x| powf((x[0] - 0.3).abs(), 0.4));
        let exact = (powf(0.3, 1.4) + powf(0.7, 1.4)) / 1.4;
        assert!((v - exact).abs() < 1e-8 * exact, "{v} {exact}");
        assert!((r.measure() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn annulus_rule_against_radial_oracle() {
        // int_Q |rho - R|^(-0.3) about the centre: rho-integral of the
        // integrand times the arc length of the circle inside Q
        let (c, rad, beta) = ([0.5, 0.5], 0.3, -0.3);
        let sing = Singularity::Circle {
            center: c,
            radius: rad,
        };
        let r = singular_rule(Element::Square, Some(&sing), 20).unwrap();
        assert!((r.measure() - 1.0).abs() < 1e-13);
        let v = r.integrate(|x| powf((norm(sub(x, c)) - rad).abs(), beta));
        let arc = |rho: f64| {
            if rho <= 0.5 {
                2.0 * crate::math::PI * rho
            } else {
                2.0 * crate::math::PI * rho - 8.0 * rho * libm::acos(0.5 / rho)
            }
        };
        let o1 = graded_interval_rule(0.0, 0.5, &[rad], 30).unwrap();
        let o2 = graded_interval_rule(0.5, sqrt(0.5), &[0.5, sqrt(0.5)], 30).unwrap();
        let f = |x: [f64; 1]| powf((x[0] - rad).abs(), beta) * arc(x[0]);
        let exact = o1.integrate(f) + o2.integrate(f);
        assert!((v - exact).abs() < 1e-8 * exact, "{v} {exact}");
    }

    #[test]
    fn circle_edge_cuts() {
        let e = Element::Square.edge(0).unwrap();
        let s = Singularity::Circle {
            center: [0.5, 0.2],
            radius: 0.25,
        };
        let cuts = s.edge_cuts(&e);
        assert_eq!(cuts.len(), 2);
        assert!((cuts[0] - 0.35).abs() < 1e-14 && (cuts[1] - 0.65).abs() < 1e-14);
        assert!(Singularity::Circle {
            center: [0.5, 0.5],
            radius: 0.3
        }
        .edge_cuts(&e)
        .is_empty());
    }

    #[test]
    fn element_fan_measures() {
        for el in Element::ALL {
            for c in [[0.0, 0.0], [0.5, 0.0], [0.4, 0.3]] {
                let r = graded_element_rule(el, &[c], 8).unwrap();
                assert!((r.measure() - el.area()).abs() < 1e-13, "{el:?} {c:?}");
            }
        }
    }

    #[test]
    fn element_fan_singular_integrand() {
        // int_Q |x - c|^{-1} with c on the bottom edge
        let c = [0.5, 0.0];
        let r = graded_element_rule(Element::Square, &[c], 30).unwrap();
        let v = r.integrate(|x| 1.0 / norm(sub(x, c)));
        // two rectangles with a singular corner: a asinh(b/a) + b asinh(a/b)
        let asinh = |z: f64| crate::math::ln(z + sqrt(z * z + 1.0));
        let piece = |a: f64, b: f64| a * asinh(b / a) + b * asinh(a / b);
        let exact = 2.0 * piece(0.5, 1.0);
        assert!((v - exact).abs() < 1e-10, "{v} {exact}");
    }
}
