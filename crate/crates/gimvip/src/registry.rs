//! Compile-time registries for custom operators and custom separable
//! 1-D functions. Keeping these as static tables makes problem documents
//! reproducible: a name either resolves here or the document is rejected.

/// A named vector operator `R^d -> R^d`, dimension-generic.
pub struct CustomOperator {
    pub name: &'static str,
    pub apply: fn(&[f64], &mut [f64]),
}

fn op_identity(w: &[f64], out: &mut [f64]) {
    out.copy_from_slice(w);
}

/// Componentwise `w + w^3`; strongly monotone, non-affine. Useful for
/// exercising the empirical constant estimator.
fn op_cubic(w: &[f64], out: &mut [f64]) {
    for (o, &x) in out.iter_mut().zip(w) {
        *o = x + x * x * x;
    }
}

pub static OPERATORS: &[CustomOperator] = &[
    CustomOperator {
        name: "identity",
        apply: op_identity,
    },
    CustomOperator {
        name: "cubic",
        apply: op_cubic,
    },
];

pub fn lookup_operator(name: &str) -> Option<&'static CustomOperator> {
    OPERATORS.iter().find(|op| op.name == name)
}

/// A named scalar convex function with subgradient access, used per
/// coordinate by the separable prox fallback.
pub struct CustomScalarFn {
    pub name: &'static str,
    pub value: fn(f64) -> f64,
    /// Subgradient interval [lo, hi] at the point (a single point for
    /// differentiable functions).
    pub subgrad: fn(f64) -> (f64, f64),
}

fn abs_value(v: f64) -> f64 {
    v.abs()
}
fn abs_subgrad(v: f64) -> (f64, f64) {
    if v > 0.0 {
        (1.0, 1.0)
    } else if v < 0.0 {
        (-1.0, -1.0)
    } else {
        (-1.0, 1.0)
    }
}

fn quartic_value(v: f64) -> f64 {
    v.powi(4)
}
fn quartic_subgrad(v: f64) -> (f64, f64) {
    let d = 4.0 * v.powi(3);
    (d, d)
}

fn hinge_value(v: f64) -> f64 {
    v.max(0.0)
}
fn hinge_subgrad(v: f64) -> (f64, f64) {
    if v > 0.0 {
        (1.0, 1.0)
    } else if v < 0.0 {
        (0.0, 0.0)
    } else {
        (0.0, 1.0)
    }
}

pub static SCALAR_FUNCTIONS: &[CustomScalarFn] = &[
    CustomScalarFn {
        name: "abs",
        value: abs_value,
        subgrad: abs_subgrad,
    },
    CustomScalarFn {
        name: "quartic",
        value: quartic_value,
        subgrad: quartic_subgrad,
    },
    CustomScalarFn {
        name: "hinge",
        value: hinge_value,
        subgrad: hinge_subgrad,
    },
];

pub fn lookup_scalar_fn(name: &str) -> Option<&'static CustomScalarFn> {
    SCALAR_FUNCTIONS.iter().find(|f| f.name == name)
}
