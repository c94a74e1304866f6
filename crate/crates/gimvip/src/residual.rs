//! The natural-map machinery: B(w) = prox^{gamma g}_Omega(F(w) - h(w)) and
//! the residual Xi(w) = F(w) - B(w), whose zeros are exactly the problem
//! solutions.

use crate::error::Result;
use crate::model::{eval_operator, ProblemInstance, Vector};
use crate::proxcat;

/// Residual norms below this are treated as exactly settled downstream,
/// protecting divisions by powers of ||Xi||.
pub const EXACT_SETTLE: f64 = 1e-14;

/// Xi and B evaluated together at one point; prox is the dominant cost,
/// so integrators consume this sample rather than re-evaluating.
#[derive(Debug, Clone)]
pub struct ResidualSample {
    pub w: Vector,
    pub xi: Vector,
    pub xi_norm: f64,
    pub b: Vector,
}

impl ResidualSample {
    pub fn effectively_settled(&self) -> bool {
        self.xi_norm < EXACT_SETTLE
    }
}

/// B(w) = prox^{gamma g}_Omega(F(w) - h(w)); lies in Omega.
pub fn b_map(p: &ProblemInstance, w: &Vector) -> Result<Vector> {
    let fw = eval_operator(&p.f, w)?;
    let hw = eval_operator(&p.h, w)?;
    let arg = fw.sub(&hw);
    Ok(proxcat::prox(&p.g, &p.omega, p.gamma, &arg)?.point)
}

/// Evaluate the residual sample at `w`.
pub fn xi(p: &ProblemInstance, w: &Vector) -> Result<ResidualSample> {
    let fw = eval_operator(&p.f, w)?;
    let hw = eval_operator(&p.h, w)?;
    let arg = fw.sub(&hw);
    let b = proxcat::prox(&p.g, &p.omega, p.gamma, &arg)?.point;
    let xi = fw.sub(&b);
    let xi_norm = xi.norm();
    Ok(ResidualSample {
        w: w.clone(),
        xi,
        xi_norm,
        b,
    })
}
