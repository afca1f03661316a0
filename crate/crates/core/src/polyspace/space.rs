use super::basis::scalar_dim;
use super::spaces::{
    bubble_basis, curl_matrix, diff_matrices, div_matrix, rt_basis, rt_bubble_basis,
};
use crate::refelem::Element;
use nalgebra::DMatrix;

/// Precomputed operators of degree p on one element.
#[derive(Clone, Debug)]
pub struct PolySpace {
    pub element: Element,
    pub p: usize,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
    /// Dirichlet stiffness on P_p(K).
    pub stiffness: DMatrix<f64>,
    /// L2-orthonormal basis of P^0_p(K).
    pub bubbles: DMatrix<f64>,
    /// L2-orthonormal basis of RT_p(K) in (P_p)^2 coefficients.
    pub rt: DMatrix<f64>,
    pub rt_bubbles: DMatrix<f64>,
    /// (P_p)^2 -> P_{p-1}.
    pub div: DMatrix<f64>,
    /// P_p -> (P_p)^2.
    pub curl: DMatrix<f64>,
}

impl PolySpace {
    pub fn new(element: Element, p: usize) -> Self {
        assert!(p >= 1, "PolySpace needs p >= 1");
        let d = diff_matrices(element, p);
        let stiffness = d.0.transpose() * &d.0 + d.1.transpose() * &d.1;
        Self {
            element,
            p,
            stiffness,
            bubbles: bubble_basis(element, p),
            rt: rt_basis(element, p),
            rt_bubbles: rt_bubble_basis(element, p),
            div: div_matrix(element, p, &d),
            curl: curl_matrix(element, p, &d),
            d1: d.0,
            d2: d.1,
        }
    }

    pub fn dim(&self) -> usize {
        scalar_dim(self.element, self.p)
    }

    pub fn dim_lower(&self) -> usize {
        scalar_dim(self.element, self.p - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, null_space};
    use crate::polyspace::spaces::*;
    use crate::polyspace::{tabulate, RtPoly, ScalarPoly};
    use nalgebra::DVector;

    fn rank(a: &DMatrix<f64>) -> usize {
        a.ncols() - null_space(a, 1e-10).ncols()
    }

    #[test]
    fn dimensions_match_closed_forms() {
        for el in Element::ALL {
            for p in 1..=8 {
                let s = PolySpace::new(el, p);
                assert_eq!(s.bubbles.ncols(), bubble_dim(el, p), "{el:?} {p}");
                assert_eq!(s.rt.ncols(), rt_dim(el, p));
                assert_eq!(s.rt_bubbles.ncols(), rt_bubble_dim(el, p), "{el:?} {p}");
            }
        }
        assert_eq!(rt_dim(Element::Triangle, 1), 3);
        assert_eq!(rt_dim(Element::Square, 2), 12);
        assert_eq!(rt_bubble_dim(Element::Square, 3), 12);
        assert_eq!(bubble_dim(Element::Triangle, 5), 6);
    }

    #[test]
    fn bubble_dimension_by_rank_oracle() {
        // nullity of the boundary evaluation map on P_5(T)
        let el = Element::Triangle;
        let p = 5;
        let mut pts = alloc::vec::Vec::new();
        for e in el.edges() {
            for k in 0..=p + 2 {
                pts.push(e.point(k as f64 / (p + 2) as f64));
            }
        }
        let v = tabulate(el, p, &pts);
        assert_eq!(null_space(&v, 1e-10).ncols(), 6);
    }

    #[test]
    fn bases_orthonormal_and_bubbles_vanish() {
        for el in Element::ALL {
            for p in 1..=7 {
                let s = PolySpace::new(el, p);
                for b in [&s.bubbles, &s.rt, &s.rt_bubbles] {
                    let g = b.transpose() * b;
                    assert!(max_abs(&(g - DMatrix::identity(b.ncols(), b.ncols()))) < 1e-12);
                }
                let nt = normal_trace_matrix(el, p, p + 2) * &s.rt_bubbles;
                assert!(max_abs(&nt) < 1e-11, "{el:?} {p}");
                let mut pts = alloc::vec::Vec::new();
                for e in el.edges() {
                    for k in 0..=6 {
                        pts.push(e.point(k as f64 / 6.0));
                    }
                }
                let v = tabulate(el, p, &pts) * &s.bubbles;
                assert!(max_abs(&v) < 1e-12);
            }
        }
    }

    #[test]
    fn de_rham_exactness_by_rank() {
        for el in Element::ALL {
            for p in 1..=6 {
                let s = PolySpace::new(el, p);
                // div: RT bubbles -> mean-zero P_{p-1}, onto
                let db = &s.div * &s.rt_bubbles;
                let r = rank(&db);
                assert_eq!(r, scalar_dim(el, p - 1) - 1, "{el:?} {p}");
                // kernel of div on bubbles = curl of scalar bubbles
                let kern = s.rt_bubbles.ncols() - r;
                assert_eq!(kern, bubble_dim(el, p));
                let cb = &s.curl * &s.bubbles;
                assert!(max_abs(&(&s.div * &cb)) < 1e-10);
                // curl bubbles lie in the RT bubble space
                let proj = &s.rt_bubbles * (s.rt_bubbles.transpose() * &cb);
                assert!(max_abs(&(proj - &cb)) < 1e-10);
                // div lands in P_{p-1}: full derivative of RT members has no degree-p part
                let full =
                    nalgebra::DMatrix::from_fn(scalar_dim(el, p), 2 * scalar_dim(el, p), |i, j| {
                        let n = scalar_dim(el, p);
                        if j < n {
                            s.d1[(i, j)]
                        } else {
                            s.d2[(i, j - n)]
                        }
                    }) * &s.rt;
                let nl = scalar_dim(el, p - 1);
                assert!(max_abs(&full.rows(nl, full.nrows() - nl).into_owned()) < 1e-11);
            }
        }
        // rank of div on RT bubbles of Q_3 is dim of mean-zero P_2(Q)
        let s = PolySpace::new(Element::Square, 3);
        assert_eq!(rank(&(&s.div * &s.rt_bubbles)), 8);
    }

    #[test]
    fn divergence_and_curl_examples() {
        for el in Element::ALL {
            // v = (x1, x2)
            let rule = el.rule(4).unwrap();
            let v = tabulate(el, 1, &rule.nodes);
            let wv = weighted(&v, &rule.weights);
            let c1 = wv.transpose()
                * DVector::from_iterator(rule.len(), rule.nodes.iter().map(|x| x[0]));
            let c2 = wv.transpose()
                * DVector::from_iterator(rule.len(), rule.nodes.iter().map(|x| x[1]));
            let mut c = DVector::zeros(2 * c1.len());
            c.rows_mut(0, c1.len()).copy_from(&c1);
            c.rows_mut(c1.len(), c1.len()).copy_from(&c2);
            let rt = RtPoly {
                element: el,
                order: 1,
                coeffs: c,
            };
            let d = rt.divergence();
            assert!((d.value([0.3, 0.2]) - 2.0).abs() < 1e-13);
            // curl of x1 is (0, -1)
            let x1 = ScalarPoly::new(el, 1, c1).unwrap();
            let cu = x1.curl().value([0.4, 0.1]);
            assert!(cu[0].abs() < 1e-13 && (cu[1] + 1.0).abs() < 1e-13);
            assert!(ScalarPoly::constant(el, 3.0).curl().l2_norm() < 1e-14);
        }
    }
}
