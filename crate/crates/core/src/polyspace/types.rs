use super::basis::{eval_modes, eval_modes_grad, scalar_dim, tabulate};
use super::legendre::{legendre01, lobatto01};
use super::spaces::{
    bubble_basis, bubble_dim, curl_matrix, diff_matrices, div_matrix, edge_bubble_dim, rt_basis,
    rt_bubble_basis, rt_bubble_dim, rt_dim,
};
use crate::error::{invalid, Error, Result};
use crate::refelem::{Edge, Element, BOUNDARY_TOL};
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

fn check_inside(element: Element, x: [f64; 2]) -> Result<()> {
    if element.contains(x, BOUNDARY_TOL) {
        Ok(())
    } else {
        Err(Error::OutsideElement { point: x })
    }
}

/// Element of P_p(K) in the modal orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarPoly {
    pub element: Element,
    pub degree: usize,
    pub coeffs: DVector<f64>,
}

impl ScalarPoly {
    pub fn new(element: Element, degree: usize, coeffs: DVector<f64>) -> Result<Self> {
        if coeffs.len() != scalar_dim(element, degree) {
            return Err(invalid("coefficient length does not match dim P_p"));
        }
        Ok(Self {
            element,
            degree,
            coeffs,
        })
    }

    pub fn zero(element: Element, degree: usize) -> Self {
        Self {
            element,
            degree,
            coeffs: DVector::zeros(scalar_dim(element, degree)),
        }
    }

    /// The constant function with value `c`.
    pub fn constant(element: Element, c: f64) -> Self {
        Self {
            element,
            degree: 0,
            coeffs: DVector::from_element(1, c * libm::sqrt(element.area())),
        }
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        let m = eval_modes(self.element, self.degree, x);
        m.iter().zip(self.coeffs.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn value_grad(&self, x: [f64; 2]) -> (f64, [f64; 2]) {
        let (v, dx, dy) = eval_modes_grad(self.element, self.degree, x);
        let c = self.coeffs.as_slice();
        let dot = |a: &[f64]| a.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
        (dot(&v), [dot(&dx), dot(&dy)])
    }

    /// Batch evaluation; errors if a point lies outside the closed element.
    pub fn eval(&self, points: &[[f64; 2]]) -> Result<Vec<f64>> {
        for x in points {
            check_inside(self.element, *x)?;
        }
        let v = tabulate(self.element, self.degree, points) * &self.coeffs;
        Ok(v.iter().copied().collect())
    }

    /// The same polynomial viewed in P_q(K), q >= degree.
    pub fn raised(&self, q: usize) -> Self {
        assert!(q >= self.degree);
        let mut c = DVector::zeros(scalar_dim(self.element, q));
        c.rows_mut(0, self.coeffs.len()).copy_from(&self.coeffs);
        Self {
            element: self.element,
            degree: q,
            coeffs: c,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0] / libm::sqrt(self.element.area())
    }

    /// Vector curl `(d/dx2, -d/dx1)`, an element of RT_p(K) for p >= 1.
    pub fn curl(&self) -> RtPoly {
        let p = self.degree.max(1);
        let s = self.raised(p);
        let d = diff_matrices(self.element, p);
        RtPoly {
            element: self.element,
            order: p,
            coeffs: curl_matrix(self.element, p, &d) * s.coeffs,
        }
    }
}

/// Element of RT_p(K), stored as components in the modal basis of P_p(K).
#[derive(Clone, Debug, PartialEq)]
pub struct RtPoly {
    pub element: Element,
    pub order: usize,
    pub coeffs: DVector<f64>,
}

impl RtPoly {
    pub fn zero(element: Element, order: usize) -> Self {
        Self {
            element,
            order,
            coeffs: DVector::zeros(2 * scalar_dim(element, order)),
        }
    }

    /// Builds from coordinates in the orthonormal basis returned by [`rt_basis`].
    pub fn from_rt_coords(element: Element, order: usize, coords: &DVector<f64>) -> Self {
        Self {
            element,
            order,
            coeffs: rt_basis(element, order) * coords,
        }
    }

    fn n(&self) -> usize {
        scalar_dim(self.element, self.order)
    }

    pub fn component(&self, i: usize) -> ScalarPoly {
        let n = self.n();
        ScalarPoly {
            element: self.element,
            degree: self.order,
            coeffs: self.coeffs.rows(i * n, n).into_owned(),
        }
    }

    pub fn value(&self, x: [f64; 2]) -> [f64; 2] {
        let m = eval_modes(self.element, self.order, x);
        let n = self.n();
        let c = self.coeffs.as_slice();
        let a = m.iter().zip(&c[..n]).map(|(a, b)| a * b).sum();
        let b = m.iter().zip(&c[n..]).map(|(a, b)| a * b).sum();
        [a, b]
    }

    pub fn eval(&self, points: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
        for x in points {
            check_inside(self.element, *x)?;
        }
        Ok(points.iter().map(|x| self.value(*x)).collect())
    }

    pub fn raised(&self, q: usize) -> Self {
        assert!(q >= self.order);
        let n = self.n();
        let m = scalar_dim(self.element, q);
        let mut c = DVector::zeros(2 * m);
        c.rows_mut(0, n).copy_from(&self.coeffs.rows(0, n));
        c.rows_mut(m, n).copy_from(&self.coeffs.rows(n, n));
        Self {
            element: self.element,
            order: q,
            coeffs: c,
        }
    }

    /// Divergence as an element of P_{p-1}(K).
    pub fn divergence(&self) -> ScalarPoly {
        let d = diff_matrices(self.element, self.order);
        let dm = div_matrix(self.element, self.order, &d);
        ScalarPoly {
            element: self.element,
            degree: self.order - 1,
            coeffs: dm * &self.coeffs,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.norm()
    }

    /// `s -> v(x(s)) . n` on an edge.
    pub fn normal_trace(&self, edge: &Edge, s: f64) -> f64 {
        let v = self.value(edge.point(s));
        v[0] * edge.normal[0] + v[1] * edge.normal[1]
    }

    pub fn add(&self, other: &RtPoly) -> RtPoly {
        let q = self.order.max(other.order);
        RtPoly {
            element: self.element,
            order: q,
            coeffs: self.raised(q).coeffs + other.raised(q).coeffs,
        }
    }

    pub fn sub(&self, other: &RtPoly) -> RtPoly {
        let q = self.order.max(other.order);
        RtPoly {
            element: self.element,
            order: q,
            coeffs: self.raised(q).coeffs - other.raised(q).coeffs,
        }
    }
}

/// Polynomial on an edge in the orthonormal Legendre basis of P_p(l),
/// parametrized by arclength.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgePoly {
    pub edge: Edge,
    pub degree: usize,
    pub coeffs: DVector<f64>,
}

impl EdgePoly {
    /// The k-th integrated-Legendre bubble (k >= 2) of the edge.
    pub fn lobatto(edge: Edge, degree: usize, k: usize) -> Result<Self> {
        if k < 2 || k > degree {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: degree + 1,
            });
        }
        // (L_k - L_{k-2}) / (2 sqrt(2k-1)) in orthonormal Legendre coordinates,
        // scaled to unit-length edge measure
        let mut c = DVector::zeros(degree + 1);
        let s = 1.0 / (2.0 * libm::sqrt((2 * k - 1) as f64));
        let scale = libm::sqrt(edge.length);
        c[k] = s / libm::sqrt((2 * k + 1) as f64) * scale;
        c[k - 2] = -s / libm::sqrt((2 * k - 3) as f64) * scale;
        Ok(Self {
            edge,
            degree,
            coeffs: c,
        })
    }

    pub fn value(&self, s: f64) -> f64 {
        let t = s / self.edge.length;
        let (l, _) = legendre01(self.degree, t);
        let scale = 1.0 / libm::sqrt(self.edge.length);
        l.iter()
            .zip(self.coeffs.iter())
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * scale
    }

    /// Vanishes at both endpoints within 1e-12.
    pub fn is_bubble(&self) -> bool {
        self.value(0.0).abs() <= 1e-12 && self.value(self.edge.length).abs() <= 1e-12
    }
}

/// Values of the Lobatto edge bubbles 2..=p at arclength `s` of an edge of length `len`.
pub fn edge_bubbles_at(p: usize, len: f64, s: f64) -> Vec<f64> {
    lobatto01(p, s / len)
}

/// Which polynomial space a [`BasisHandle`] spans.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceTag {
    Scalar,
    ScalarBubble,
    Edge(usize),
    EdgeBubble(usize),
    Rt,
    RtBubble,
}

/// A basis with its dimension and an evaluator.
#[derive(Clone, Debug)]
pub struct BasisHandle {
    pub tag: SpaceTag,
    pub element: Element,
    pub degree: usize,
    pub dim: usize,
    /// Modal coefficients of the basis members (columns); `None` for edge spaces.
    pub coeffs: Option<DMatrix<f64>>,
}

impl BasisHandle {
    /// Values of every member at every point: scalar spaces give
    /// `points x dim`; vector spaces give `2 points x dim` (components stacked).
    pub fn eval(&self, points: &[[f64; 2]]) -> Result<DMatrix<f64>> {
        match self.tag {
            SpaceTag::Edge(e) | SpaceTag::EdgeBubble(e) => {
                let edge = self.element.edge(e)?;
                let bubble = matches!(self.tag, SpaceTag::EdgeBubble(_));
                let mut m = DMatrix::zeros(points.len(), self.dim);
                for (r, x) in points.iter().enumerate() {
                    if edge.distance(*x) > BOUNDARY_TOL {
                        return Err(Error::NotOnBoundary { point: *x });
                    }
                    let s = edge.arclength_of(*x);
                    let vals = if bubble {
                        edge_bubbles_at(self.degree, edge.length, s)
                    } else {
                        legendre01(self.degree, s / edge.length).0
                    };
                    for (c, v) in vals.iter().enumerate() {
                        m[(r, c)] = *v;
                    }
                }
                Ok(m)
            }
            _ => {
                for x in points {
                    check_inside(self.element, *x)?;
                }
                let c = self.coeffs.as_ref().expect("modal coefficients");
                let v = tabulate(self.element, self.degree, points);
                match self.tag {
                    SpaceTag::Scalar | SpaceTag::ScalarBubble => Ok(v * c),
                    _ => {
                        let n = v.ncols();
                        let a = &v * c.rows(0, n);
                        let b = &v * c.rows(n, n);
                        let mut m = DMatrix::zeros(2 * points.len(), self.dim);
                        m.rows_mut(0, points.len()).copy_from(&a);
                        m.rows_mut(points.len(), points.len()).copy_from(&b);
                        Ok(m)
                    }
                }
            }
        }
    }
}

pub fn scalar_basis(element: Element, p: usize) -> BasisHandle {
    let n = scalar_dim(element, p);
    BasisHandle {
        tag: SpaceTag::Scalar,
        element,
        degree: p,
        dim: n,
        coeffs: Some(DMatrix::identity(n, n)),
    }
}

pub fn scalar_bubble_basis(element: Element, p: usize) -> BasisHandle {
    BasisHandle {
        tag: SpaceTag::ScalarBubble,
        element,
        degree: p,
        dim: bubble_dim(element, p),
        coeffs: Some(bubble_basis(element, p)),
    }
}

pub fn edge_basis(element: Element, edge: usize, p: usize, bubbles_only: bool) -> BasisHandle {
    BasisHandle {
        tag: if bubbles_only {
            SpaceTag::EdgeBubble(edge)
        } else {
            SpaceTag::Edge(edge)
        },
        element,
        degree: p,
        dim: if bubbles_only {
            edge_bubble_dim(p)
        } else {
            p + 1
        },
        coeffs: None,
    }
}

pub fn rt_space_basis(element: Element, p: usize) -> BasisHandle {
    BasisHandle {
        tag: SpaceTag::Rt,
        element,
        degree: p,
        dim: rt_dim(element, p),
        coeffs: Some(rt_basis(element, p)),
    }
}

pub fn rt_bubble_space_basis(element: Element, p: usize) -> BasisHandle {
    let c = rt_bubble_basis(element, p);
    debug_assert_eq!(c.ncols(), rt_bubble_dim(element, p));
    BasisHandle {
        tag: SpaceTag::RtBubble,
        element,
        degree: p,
        dim: c.ncols(),
        coeffs: Some(c),
    }
}
