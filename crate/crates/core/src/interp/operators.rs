use super::boundary::{solve_edge, CLOSURE_TOL};
use super::context::InterpContext;
use super::data::{edge_legendre, ScalarData, VectorData};
use crate::error::{invalid, Error, Result};
use crate::linalg::spd_solve_vec;
use crate::polyspace::{scalar_dim, RtPoly, ScalarPoly};
use crate::refelem::gauss_legendre;
use crate::sobolev::DualHalfGram;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

/// Tolerance on the posterior residuals of the interior systems.
pub const INTERIOR_TOL: f64 = 1e-9;

/// Inner product in which the interior stage matches divergences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DivPairing {
    /// H-tilde^{-1/2}(K): the new operator.
    DualHalf,
    /// L2(K): the classical operator.
    L2,
}

#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    /// Largest vertex value of the boundary potential.
    pub closure_defect: f64,
    /// Largest relative residual of the edge projections.
    pub edge_residual: f64,
    /// Relative residual of the divergence equations.
    pub div_residual: f64,
    /// Relative residual of the curl equations.
    pub curl_residual: f64,
}

/// `u^p = u_1 + u_2 + u_3`.
#[derive(Clone, Debug)]
pub struct InterpolantParts {
    /// Order 1.
    pub u1: RtPoly,
    pub u2: RtPoly,
    /// RT bubble.
    pub u3: RtPoly,
    pub total: RtPoly,
    pub diagnostics: Diagnostics,
}

fn check_degree(ctx: &InterpContext, have: usize) -> Result<()> {
    if have < ctx.required_degree() {
        return Err(Error::Capability {
            requested: ctx.required_degree(),
            max: have,
        });
    }
    Ok(())
}

impl InterpContext {
    fn rt(&self, coeffs: DVector<f64>) -> RtPoly {
        RtPoly {
            element: self.element,
            order: self.p,
            coeffs,
        }
    }

    /// Lowest-order part from the edge fluxes in the data.
    pub fn lowest_order(&self, data: &VectorData) -> RtPoly {
        let fluxes: Vec<f64> = data.normal.iter().map(|m| m[0]).collect();
        RtPoly {
            element: self.element,
            order: 1,
            coeffs: &self.unit_flux * DVector::from_vec(fluxes),
        }
    }

    /// Edge stage: H-tilde^{1/2}(l) projections of the boundary potential,
    /// extended and curled. Returns `u_2` with closure and projection residuals.
    pub fn edge_stage(&self, data: &VectorData, u1: &RtPoly) -> Result<(RtPoly, f64, f64)> {
        check_degree(self, data.degree)?;
        let dim = self.dim();
        let mut u2 = DVector::zeros(2 * dim);
        // psi' = (u - u_1).n; u_1.n is the edge mean of u.n, so only the
        // constant moment changes
        let mut anchor = 0.0;
        let mut anchors = Vec::new();
        let mut defects = Vec::new();
        for (e, m) in self.element.edges().iter().zip(&data.normal) {
            let mut d = m.clone();
            let mean = u1.normal_trace(e, 0.5 * e.length) * libm::sqrt(e.length);
            d[0] -= mean;
            anchors.push(anchor);
            anchor += d[0] * libm::sqrt(e.length);
            defects.push(d);
        }
        let closure = anchors.iter().fold(anchor.abs(), |a, b| a.max(b.abs()));
        if closure > CLOSURE_TOL {
            return Err(Error::InconsistentFlux { defect: closure });
        }
        let mut worst = 0.0f64;
        if let Some(ext) = &self.extension {
            for (k, stage) in self.edges.iter().enumerate() {
                let n = stage.from_derivative.ncols();
                let r = &stage.from_derivative * defects[k].rows(0, n)
                    + &stage.from_anchor * anchors[k];
                let (c, res) = solve_edge(&stage.gram.matrix, &r)?;
                worst = worst.max(res);
                let phi = ext.extend(k, &c);
                u2 += &self.space.curl * phi.coeffs;
            }
        }
        Ok((self.rt(u2), closure, worst))
    }

    /// Interior stage: the RT bubble `u_3` for data `u` after `u_1 + u_2`.
    pub fn interior(
        &self,
        data: &VectorData,
        u1: &RtPoly,
        u2: &RtPoly,
        pairing: DivPairing,
    ) -> Result<(RtPoly, f64, f64)> {
        check_degree(self, data.degree)?;
        if self.space.rt_bubbles.ncols() == 0 {
            return Ok((RtPoly::zero(self.element, self.p), 0.0, 0.0));
        }
        let u1p = u1.raised(self.p);
        let nl = scalar_dim(self.element, self.p - 1);
        let d1 = &self.space.div * &u1p.coeffs;
        let dmat = &self.complement_div;
        // (a) divergence-determined part
        let (target, gram): (DVector<f64>, Option<&DMatrix<f64>>) = match pairing {
            DivPairing::DualHalf => {
                let nlift = scalar_dim(self.element, self.half.lift_degree());
                (
                    self.half
                        .pair_projected(&data.div.rows(0, nlift).into_owned()),
                    Some(&self.half.matrix),
                )
            }
            DivPairing::L2 => (data.div.rows(0, nl).into_owned(), None),
        };
        let apply = |v: &DVector<f64>| -> DVector<f64> {
            match gram {
                Some(g) => g * v,
                None => v.clone(),
            }
        };
        let gd = match gram {
            Some(g) => g * dmat,
            None => dmat.clone(),
        };
        let lhs = dmat.transpose() * &gd;
        let defect = &target - apply(&d1);
        let y = spd_solve_vec(&lhs, &(dmat.transpose() * &defect))?;
        let w = &self.complement * &y;
        let all_div = &self.space.div * &self.space.rt_bubbles;
        let resid = all_div.transpose() * (&defect - apply(&(dmat * &y)));
        // relative to the data, which may be divergence free
        let magnitude = data.ambient(self.p).norm() + data.div.rows(0, nl).norm();
        let scale = (all_div.transpose() * &target).norm()
            + (all_div.transpose() * apply(&d1)).norm()
            + magnitude;
        let div_res = resid.norm() / (scale + f64::MIN_POSITIVE);
        // (b) curl part
        let cb = &self.curl_bubbles;
        let rest = data.ambient(self.p) - &u1p.coeffs - &u2.coeffs - &w;
        let z = spd_solve_vec(&(cb.transpose() * cb), &(cb.transpose() * &rest))?;
        let u3 = &w + cb * &z;
        let full = data.ambient(self.p) - &u1p.coeffs - &u2.coeffs - &u3;
        let curl_res =
            (cb.transpose() * full).norm() / (data.ambient(self.p).norm() + f64::MIN_POSITIVE);
        Ok((self.rt(u3), div_res, curl_res))
    }

    fn assemble(&self, data: &VectorData, pairing: DivPairing) -> Result<InterpolantParts> {
        let u1 = self.lowest_order(data);
        let (u2, closure, edge_res) = self.edge_stage(data, &u1)?;
        let (u3, div_res, curl_res) = self.interior(data, &u1, &u2, pairing)?;
        for r in [div_res, curl_res] {
            // scale-free residuals of roughly machine size are expected;
            // anything larger means the reduced systems were not solved
            if r > INTERIOR_TOL {
                return Err(Error::SolverFailure {
                    residual: r,
                    threshold: INTERIOR_TOL,
                });
            }
        }
        let total = u1.raised(self.p).add(&u2).add(&u3);
        Ok(InterpolantParts {
            u1,
            u2,
            u3,
            total,
            diagnostics: Diagnostics {
                closure_defect: closure,
                edge_residual: edge_res,
                div_residual: div_res,
                curl_residual: curl_res,
            },
        })
    }

    /// The H(div) interpolant with the H-tilde^{-1/2} interior divergence condition.
    pub fn interp_div_half(&self, data: &VectorData) -> Result<InterpolantParts> {
        self.assemble(data, DivPairing::DualHalf)
    }

    /// The classical H(div) interpolant with the L2 interior divergence condition.
    pub fn interp_div(&self, data: &VectorData) -> Result<InterpolantParts> {
        self.assemble(data, DivPairing::L2)
    }

    pub fn interpolate(&self, data: &VectorData, pairing: DivPairing) -> Result<InterpolantParts> {
        self.assemble(data, pairing)
    }

    /// The H1 interpolant: vertex interpolation, H-tilde^{1/2} edge
    /// projections with minimal-energy extension, and an H1-seminorm
    /// projection onto the bubbles.
    pub fn interp_h1(&self, data: &ScalarData) -> Result<ScalarPoly> {
        check_degree(self, data.degree)?;
        let grad = data
            .grad
            .as_ref()
            .ok_or_else(|| invalid("H1 interpolation needs gradient data"))?;
        let dim = self.dim();
        let vv = DVector::from_column_slice(&data.vertex_values);
        let g1 = &self.vertex_shapes * &vv;
        let mut g2 = DVector::zeros(dim);
        if let Some(ext) = &self.extension {
            for (k, e) in self.element.edges().iter().enumerate() {
                let stage = &self.edges[k];
                let n = stage.gram.flux.nrows();
                let (t, w) = gauss_legendre(n / 2 + 2);
                let ga = data.vertex_values[k];
                let gb = data.vertex_values[(k + 1) % data.vertex_values.len()];
                let mut m = data.trace[k].rows(0, n).into_owned();
                for (tq, wq) in t.iter().zip(&w) {
                    let s = tq * e.length;
                    let lin = ga + (gb - ga) * tq;
                    for (j, b) in edge_legendre(n - 1, e.length, s).into_iter().enumerate() {
                        m[j] -= wq * e.length * lin * b;
                    }
                }
                let r = stage.gram.flux.transpose() * m;
                let (c, _) = solve_edge(&stage.gram.matrix, &r)?;
                g2 += ext.extend(k, &c).coeffs;
            }
        }
        let b = &self.space.bubbles;
        let mut g3 = DVector::zeros(dim);
        if b.ncols() > 0 {
            let s = &self.space.stiffness;
            let a_g = self.space.d1.transpose() * grad[0].rows(0, dim)
                + self.space.d2.transpose() * grad[1].rows(0, dim);
            let rhs = b.transpose() * (a_g - s * (&g1 + &g2));
            let z = spd_solve_vec(&(b.transpose() * s * b), &rhs)?;
            g3 = b * z;
        }
        Ok(ScalarPoly {
            element: self.element,
            degree: self.p,
            coeffs: g1 + g2 + g3,
        })
    }

    /// H-tilde^{-1/2} projection onto P_{p-1} with this context's Gram.
    pub fn proj_dualhalf_lower(&self, f: &DVector<f64>) -> Result<ScalarPoly> {
        proj_dualhalf_with(&self.half, f)
    }
}

/// L2 projection onto P_p from moment data.
pub fn proj_l2(data: &ScalarData, p: usize) -> ScalarPoly {
    ScalarPoly {
        element: data.element,
        degree: p,
        coeffs: data.projection(p),
    }
}

/// H-tilde^{-1/2} projection with a given Gram, from P_n moments of f
/// (n at least the Gram's lift degree).
pub fn proj_dualhalf_with(gram: &DualHalfGram, f: &DVector<f64>) -> Result<ScalarPoly> {
    let nlift = scalar_dim(gram.element, gram.lift_degree());
    if f.len() < nlift {
        return Err(Error::Capability {
            requested: gram.lift_degree(),
            max: f.len(),
        });
    }
    let b = gram.pair_projected(&f.rows(0, nlift).into_owned());
    let c = spd_solve_vec(&gram.matrix, &b)?;
    Ok(ScalarPoly {
        element: gram.element,
        degree: gram.degree,
        coeffs: c,
    })
}

/// H-tilde^{-1/2} projection onto P_p.
pub fn proj_dualhalf(data: &ScalarData, p: usize, lift_margin: usize) -> Result<ScalarPoly> {
    let gram = DualHalfGram::new(
        data.element,
        p,
        crate::sobolev::LiftVariant::Tilde,
        p + lift_margin,
    )?;
    proj_dualhalf_with(&gram, &data.f)
}
