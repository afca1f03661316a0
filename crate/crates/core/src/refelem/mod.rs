//! Reference elements, edge frames and quadrature.

mod graded;
mod quad;

pub use graded::{
    edge_samples, graded_annulus_rule, graded_element_rule, graded_interval_rule,
    graded_triangle_rule, singular_rule, EdgeSamples, Singularity, GRADING_LEVELS, GRADING_RATIO,
};
pub use quad::{
    cube_rule, gauss_legendre, interval_rule, max_quad_degree, prism_rule, set_max_quad_degree,
    square_rule, triangle_rule, triangle_rule_on, QuadRule, DEFAULT_MAX_QUAD_DEGREE,
};

use crate::error::{Error, Result};
use crate::math::{dot, norm, sub, SQRT3};
use alloc::vec::Vec;

/// Boundary membership tolerance.
pub const BOUNDARY_TOL: f64 = 1e-12;

const TRI_VERTS: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.5, SQRT3 / 2.0]];
const SQUARE_VERTS: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

/// The equilateral reference triangle T or the unit square Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Triangle,
    Square,
}

/// An oriented edge with arclength parametrization `x(s) = a + s (b - a) / |b - a|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub index: usize,
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub normal: [f64; 2],
    pub length: f64,
}

impl Edge {
    pub fn tangent(&self) -> [f64; 2] {
        let d = sub(self.b, self.a);
        [d[0] / self.length, d[1] / self.length]
    }

    pub fn point(&self, s: f64) -> [f64; 2] {
        let t = self.tangent();
        [self.a[0] + s * t[0], self.a[1] + s * t[1]]
    }

    /// Arclength of the orthogonal projection of `x` onto the edge line.
    pub fn arclength_of(&self, x: [f64; 2]) -> f64 {
        dot(sub(x, self.a), self.tangent())
    }

    /// Euclidean distance from `x` to the closed segment.
    pub fn distance(&self, x: [f64; 2]) -> f64 {
        let s = self.arclength_of(x).clamp(0.0, self.length);
        norm(sub(x, self.point(s)))
    }
}

impl Element {
    pub const ALL: [Element; 2] = [Element::Triangle, Element::Square];

    pub fn name(self) -> &'static str {
        match self {
            Element::Triangle => "tri",
            Element::Square => "quad",
        }
    }

    pub fn vertices(self) -> &'static [[f64; 2]] {
        match self {
            Element::Triangle => &TRI_VERTS,
            Element::Square => &SQUARE_VERTS,
        }
    }

    pub fn num_edges(self) -> usize {
        self.vertices().len()
    }

    pub fn area(self) -> f64 {
        match self {
            Element::Triangle => SQRT3 / 4.0,
            Element::Square => 1.0,
        }
    }

    pub fn perimeter(self) -> f64 {
        self.num_edges() as f64
    }

    pub fn centroid(self) -> [f64; 2] {
        match self {
            Element::Triangle => [0.5, SQRT3 / 6.0],
            Element::Square => [0.5, 0.5],
        }
    }

    pub fn edge(self, index: usize) -> Result<Edge> {
        let v = self.vertices();
        if index >= v.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: v.len(),
            });
        }
        let a = v[index];
        let b = v[(index + 1) % v.len()];
        let d = sub(b, a);
        let length = norm(d);
        Ok(Edge {
            index,
            a,
            b,
            normal: [d[1] / length, -d[0] / length],
            length,
        })
    }

    pub fn edges(self) -> Vec<Edge> {
        (0..self.num_edges())
            .map(|i| self.edge(i).expect("edge index in range"))
            .collect()
    }

    /// Barycentric coordinates on T (panics on Q).
    pub fn barycentric(self, x: [f64; 2]) -> [f64; 3] {
        assert_eq!(self, Element::Triangle);
        let l2 = 2.0 * x[1] / SQRT3;
        let l1 = x[0] - x[1] / SQRT3;
        [1.0 - l1 - l2, l1, l2]
    }

    pub fn contains(self, x: [f64; 2], tol: f64) -> bool {
        match self {
            Element::Triangle => self.barycentric(x).iter().all(|&l| l >= -tol),
            Element::Square => x.iter().all(|&c| c >= -tol && c <= 1.0 + tol),
        }
    }

    /// Counterclockwise arclength from vertex 0 of a boundary point.
    pub fn boundary_arclength(self, x: [f64; 2]) -> Result<f64> {
        let mut offset = 0.0;
        for e in self.edges() {
            if e.distance(x) <= BOUNDARY_TOL {
                let s = e.arclength_of(x).clamp(0.0, e.length);
                return Ok(offset + s);
            }
            offset += e.length;
        }
        Err(Error::NotOnBoundary { point: x })
    }

    /// Whether `x` lies on the closure of edge `i` within the boundary tolerance.
    pub fn on_edge(self, i: usize, x: [f64; 2]) -> bool {
        self.edge(i)
            .map(|e| e.distance(x) <= BOUNDARY_TOL)
            .unwrap_or(false)
    }

    /// Exact-degree quadrature on the element.
    pub fn rule(self, degree: usize) -> Result<QuadRule<2>> {
        match self {
            Element::Triangle => triangle_rule(degree),
            Element::Square => square_rule(degree),
        }
    }

    /// Tensor rule on the cylinder K x (0,1).
    pub fn cylinder_rule(self, degree: usize) -> Result<QuadRule<3>> {
        match self {
            Element::Triangle => prism_rule(degree),
            Element::Square => cube_rule(degree),
        }
    }
}
