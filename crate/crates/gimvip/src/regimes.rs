//! Operator constants: exact closed forms for affine instances, empirical
//! surrogates otherwise, and the pass/fail verdict on the standing
//! assumptions with margins.

use crate::error::{Error, Result};
use crate::model::{eval_operator, OperatorSpec, ProblemInstance, Vector};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum ConstantsSource {
    ExactAffine,
    Empirical {
        samples: usize,
        radius: f64,
        seed: u64,
    },
}

/// Derived quantities; absent when the radicand beta^2 + alpha^2 - 2 mu
/// is negative (invalid report, no NaN propagation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// Gamma = sqrt(beta^2 + alpha^2 - 2 mu) + alpha; Lipschitz constant of Xi.
    pub gamma_const: f64,
    /// Lambda = sqrt(alpha^2 + beta^2 - 2 mu); contraction factor of B toward
    /// the solution.
    pub lambda_const: f64,
    /// Contraction modulus m = sigma - Lambda, the certified lower-bound
    /// constant relating ||Xi(w)|| to ||w - wbar||.
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsReport {
    /// Lipschitz constant of h.
    pub alpha: f64,
    /// Strong-monotonicity modulus of h.
    pub lambda_mono: f64,
    /// Strong-monotone-couple modulus of (F, h).
    pub mu: f64,
    /// Cocoercivity constant of F.
    pub rho: f64,
    /// Lipschitz constant of F.
    pub beta: f64,
    /// Strong-monotonicity modulus of F; feeds the certified lower bounds.
    pub sigma: f64,
    pub derived: Option<DerivedConstants>,
    pub source: ConstantsSource,
}

impl ConstantsReport {
    fn from_base(
        alpha: f64,
        lambda_mono: f64,
        mu: f64,
        rho: f64,
        beta: f64,
        sigma: f64,
        source: ConstantsSource,
    ) -> Self {
        let rad = beta * beta + alpha * alpha - 2.0 * mu;
        let derived = if rad >= 0.0 {
            let lambda_const = rad.sqrt();
            Some(DerivedConstants {
                gamma_const: lambda_const + alpha,
                lambda_const,
                m: sigma - lambda_const,
            })
        } else {
            None
        };
        ConstantsReport {
            alpha,
            lambda_mono,
            mu,
            rho,
            beta,
            sigma,
            derived,
            source,
        }
    }

    /// Rebuild the report with an overridden alpha, recomputing the
    /// derived quantities.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self::from_base(
            alpha,
            self.lambda_mono,
            self.mu,
            self.rho,
            self.beta,
            self.sigma,
            self.source.clone(),
        )
    }

    /// Derived constants, or an error naming the failure.
    pub fn derived_or_err(&self) -> Result<DerivedConstants> {
        self.derived.ok_or_else(|| {
            Error::InvalidConstants(
                "beta^2 + alpha^2 - 2 mu is negative; Gamma and Lambda undefined".into(),
            )
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margins {
    /// 1 - lhs of condition (iii).
    pub cond_iii: f64,
    /// rho - Lambda.
    pub cond_iv: f64,
    /// m itself.
    pub contraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionVerdict {
    /// sqrt(beta^2+alpha^2-2mu) + sqrt(1-2lambda+alpha^2); None when a
    /// radicand is negative.
    pub cond_iii_lhs: Option<f64>,
    pub cond_iii_pass: bool,
    /// rho > Lambda, as printed in the source condition.
    pub cond_iv_pass: bool,
    /// m > 0, the criterion the certificates actually rely on.
    pub contraction_pass: bool,
    pub margins: Margins,
    /// Explanatory message when the verdict is invalid.
    pub invalid: Option<String>,
}

impl AssumptionVerdict {
    pub fn all_pass(&self) -> bool {
        self.invalid.is_none() && self.cond_iii_pass && self.cond_iv_pass && self.contraction_pass
    }
}

fn operator_matrix(op: &OperatorSpec, d: usize) -> Option<DMatrix<f64>> {
    match op {
        OperatorSpec::Affine { matrix, .. } => {
            let flat: Vec<f64> = matrix.iter().flatten().copied().collect();
            Some(DMatrix::from_row_slice(d, d, &flat))
        }
        OperatorSpec::ScalarLinear { coefficient } => {
            Some(DMatrix::identity(d, d) * *coefficient)
        }
        OperatorSpec::Custom { .. } => None,
    }
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

fn min_eig_sym_part(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Exact cocoercivity modulus inf <Mx, x> / ||Mx||^2 of an affine map.
///
/// For invertible M this equals the smallest eigenvalue of the symmetric
/// part of M^{-1} (substitute y = Mx), which reduces to sigma / beta^2 on
/// scalar maps. Singular maps fall back to the quadratic-form lower bound.
fn cocoercivity_modulus(m: &DMatrix<f64>, beta: f64, sigma: f64) -> f64 {
    if beta < 1e-300 {
        return f64::INFINITY; // constant map, vacuously cocoercive
    }
    if let Some(inv) = m.clone().try_inverse() {
        return min_eig_sym_part(&inv);
    }
    if sigma > 0.0 {
        sigma / (beta * beta)
    } else {
        0.0
    }
}

/// Closed-form constants for affine or scalar-linear F and h.
pub fn exact_constants_affine(p: &ProblemInstance) -> Result<ConstantsReport> {
    let mf = operator_matrix(&p.f, p.d).ok_or_else(|| {
        Error::InvalidConfig("exact constants need affine F; use estimate_constants".into())
    })?;
    let mh = operator_matrix(&p.h, p.d).ok_or_else(|| {
        Error::InvalidConfig("exact constants need affine h; use estimate_constants".into())
    })?;

    let alpha = spectral_norm(&mh);
    let lambda_mono = min_eig_sym_part(&mh);
    let mu = min_eig_sym_part(&(mf.transpose() * &mh));
    let beta = spectral_norm(&mf);
    let sigma = min_eig_sym_part(&mf);
    let rho = cocoercivity_modulus(&mf, beta, sigma);

    Ok(ConstantsReport::from_base(
        alpha,
        lambda_mono,
        mu,
        rho,
        beta,
        sigma,
        ConstantsSource::ExactAffine,
    ))
}

/// Empirical surrogates from `n_samples` i.i.d. uniform pairs in the
/// origin-centered box of half-width `radius`. Deterministic given `seed`.
pub fn estimate_constants(
    p: &ProblemInstance,
    n_samples: usize,
    radius: f64,
    seed: u64,
) -> Result<ConstantsReport> {
    if n_samples < 2 {
        return Err(Error::InvalidConfig("n_samples must be >= 2".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidConfig("radius must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vector {
        (0..p.d)
            .map(|_| rng.gen_range(-radius..radius))
            .collect::<Vec<_>>()
            .into()
    };

    let mut alpha: f64 = 0.0;
    let mut beta: f64 = 0.0;
    let mut lambda_mono = f64::INFINITY;
    let mut mu = f64::INFINITY;
    let mut rho = f64::INFINITY;
    let mut sigma = f64::INFINITY;
    let mut used = 0usize;

    for _ in 0..n_samples {
        let u = draw(&mut rng);
        let v = draw(&mut rng);
        let duv = u.dist(&v);
        if duv < 1e-14 {
            continue;
        }
        used += 1;
        let diff = u.sub(&v);
        let hd = eval_operator(&p.h, &u)?.sub(&eval_operator(&p.h, &v)?);
        let fd = eval_operator(&p.f, &u)?.sub(&eval_operator(&p.f, &v)?);
        let d2 = duv * duv;
        alpha = alpha.max(hd.norm() / duv);
        lambda_mono = lambda_mono.min(hd.dot(&diff) / d2);
        mu = mu.min(fd.dot(&hd) / d2);
        let fd_norm = fd.norm();
        beta = beta.max(fd_norm / duv);
        sigma = sigma.min(fd_norm / duv);
        if fd_norm >= 1e-14 {
            rho = rho.min(fd.dot(&diff) / (fd_norm * fd_norm));
        }
    }
    if used == 0 {
        return Err(Error::DegenerateSampling);
    }

    Ok(ConstantsReport::from_base(
        alpha,
        lambda_mono,
        mu,
        rho,
        beta,
        sigma,
        ConstantsSource::Empirical {
            samples: n_samples,
            radius,
            seed,
        },
    ))
}

/// Evaluate the standing-assumption conditions with margins.
pub fn check_assumption_a(r: &ConstantsReport) -> AssumptionVerdict {
    let rad1 = r.beta * r.beta + r.alpha * r.alpha - 2.0 * r.mu;
    let rad2 = 1.0 - 2.0 * r.lambda_mono + r.alpha * r.alpha;
    if rad1 < 0.0 || rad2 < 0.0 {
        let which = if rad1 < 0.0 {
            format!("beta^2 + alpha^2 - 2 mu = {rad1}")
        } else {
            format!("1 - 2 lambda + alpha^2 = {rad2}")
        };
        return AssumptionVerdict {
            cond_iii_lhs: None,
            cond_iii_pass: false,
            cond_iv_pass: false,
            contraction_pass: false,
            margins: Margins {
                cond_iii: f64::NEG_INFINITY,
                cond_iv: f64::NEG_INFINITY,
                contraction: f64::NEG_INFINITY,
            },
            invalid: Some(format!("negative radicand: {which}")),
        };
    }
    let lambda_const = rad1.sqrt();
    let lhs = lambda_const + rad2.sqrt();
    let m = r.sigma - lambda_const;
    AssumptionVerdict {
        cond_iii_lhs: Some(lhs),
        cond_iii_pass: lhs < 1.0,
        cond_iv_pass: r.rho > lambda_const,
        contraction_pass: m > 0.0,
        margins: Margins {
            cond_iii: 1.0 - lhs,
            cond_iv: r.rho - lambda_const,
            contraction: m,
        },
        invalid: None,
    }
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Serialize a report plus verdict to the fixed JSON layout.
pub fn report_json(r: &ConstantsReport, v: &AssumptionVerdict) -> Value {
    let source = match &r.source {
        ConstantsSource::ExactAffine => json!("exact_affine"),
        ConstantsSource::Empirical {
            samples,
            radius,
            seed,
        } => json!({ "empirical": { "samples": samples, "radius": radius, "seed": seed } }),
    };
    json!({
        "alpha": r.alpha,
        "lambda": r.lambda_mono,
        "mu": r.mu,
        "rho": finite_or_null(r.rho),
        "beta": r.beta,
        "sigma": r.sigma,
        "Gamma": r.derived.map_or(Value::Null, |d| json!(d.gamma_const)),
        "Lambda": r.derived.map_or(Value::Null, |d| json!(d.lambda_const)),
        "m": r.derived.map_or(Value::Null, |d| json!(d.m)),
        "source": source,
        "verdict": {
            "cond_iii_lhs": v.cond_iii_lhs.map_or(Value::Null, |x| json!(x)),
            "cond_iii_pass": v.cond_iii_pass,
            "cond_iv_pass": v.cond_iv_pass,
            "contraction_pass": v.contraction_pass,
            "margins": {
                "cond_iii": finite_or_null(v.margins.cond_iii),
                "cond_iv": finite_or_null(v.margins.cond_iv),
                "contraction": finite_or_null(v.margins.contraction),
            },
            "invalid": v.invalid,
        },
    })
}
