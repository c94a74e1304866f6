//! Problem data model: vectors, operator/function/set specifications and
//! configuration-document loading.

use crate::error::{Error, Result};
use crate::registry;
use serde_json::{json, Map, Value};

/// A finite real vector of fixed length `d >= 1`.
///
/// Checked construction rejects NaN/infinite entries; arithmetic helpers
/// assume finite inputs and are checked again at integration boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidConfig("vector must have length >= 1".into()));
        }
        if let Some(i) = entries.iter().position(|e| !e.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "vector entry {i} is not finite"
            )));
        }
        Ok(Vector(entries))
    }

    pub fn zeros(d: usize) -> Self {
        Vector(vec![0.0; d])
    }

    pub fn from_scalar(x: f64) -> Self {
        Vector(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|e| e.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|e| e * e).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: f64) -> Vector {
        Vector(self.0.iter().map(|a| c * a).collect())
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + c * b)
                .collect(),
        )
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        self.sub(other).norm()
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for Vector {
    /// Unchecked wrap for internal arithmetic; use `Vector::new` at input
    /// boundaries.
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

/// Specification of a single-valued operator `R^d -> R^d`.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    /// `w -> M w + q` with a dense row-major square matrix.
    Affine { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    /// `w -> c w`, shorthand for `c * I`.
    ScalarLinear { coefficient: f64 },
    /// A named entry of the compile-time operator registry.
    Custom { name: String },
}

impl OperatorSpec {
    pub fn scalar(c: f64) -> Self {
        OperatorSpec::ScalarLinear { coefficient: c }
    }

    pub fn identity(d: usize) -> Self {
        let matrix = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        OperatorSpec::Affine {
            matrix,
            offset: vec![0.0; d],
        }
    }

    /// Dimension pinned by the spec itself, if any.
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            OperatorSpec::Affine { matrix, .. } => Some(matrix.len()),
            _ => None,
        }
    }

    pub fn is_affine(&self) -> bool {
        !matches!(self, OperatorSpec::Custom { .. })
    }

    fn validate(&self, d: usize, field: &str) -> Result<()> {
        match self {
            OperatorSpec::Affine { matrix, offset } => {
                if matrix.len() != d {
                    return Err(Error::Schema {
                        field: format!("{field}.matrix"),
                        message: format!("expected {d} rows, found {}", matrix.len()),
                    });
                }
                for (i, row) in matrix.iter().enumerate() {
                    if row.len() != d {
                        return Err(Error::Schema {
                            field: format!("{field}.matrix[{i}]"),
                            message: format!("expected {d} columns, found {}", row.len()),
                        });
                    }
                    if row.iter().any(|e| !e.is_finite()) {
                        return Err(Error::Schema {
                            field: format!("{field}.matrix[{i}]"),
                            message: "entries must be finite".into(),
                        });
                    }
                }
                if offset.len() != d {
                    return Err(Error::Schema {
                        field: format!("{field}.offset"),
                        message: format!("expected length {d}, found {}", offset.len()),
                    });
                }
                if offset.iter().any(|e| !e.is_finite()) {
                    return Err(Error::Schema {
                        field: format!("{field}.offset"),
                        message: "entries must be finite".into(),
                    });
                }
            }
            OperatorSpec::ScalarLinear { coefficient } => {
                if !coefficient.is_finite() {
                    return Err(Error::Schema {
                        field: format!("{field}.coefficient"),
                        message: "must be finite".into(),
                    });
                }
            }
            OperatorSpec::Custom { name } => {
                if registry::lookup_operator(name).is_none() {
                    return Err(Error::UnknownCustom {
                        kind: "operator",
                        name: name.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Specification of the proper convex l.s.c. function `g`.
#[derive(Debug, Clone, PartialEq)]
pub enum GSpec {
    Zero,
    /// `g(v) = sum_i curvature_i v_i^2 + slope_i v_i` + `constant`.
    SeparableQuadratic {
        curvature: Vec<f64>,
        slope: Vec<f64>,
        constant: f64,
    },
    /// `g(v) = weight * sum_i |v_i|`.
    L1 { weight: f64 },
    /// One registered scalar function per coordinate.
    SeparableCustom1D { names: Vec<String> },
}

impl GSpec {
    pub fn value(&self, v: &[f64]) -> f64 {
        match self {
            GSpec::Zero => 0.0,
            GSpec::SeparableQuadratic {
                curvature,
                slope,
                constant,
            } => {
                let mut acc = *constant;
                for ((&a, &b), &x) in curvature.iter().zip(slope).zip(v) {
                    acc += a * x * x + b * x;
                }
                acc
            }
            GSpec::L1 { weight } => weight * v.iter().map(|x| x.abs()).sum::<f64>(),
            GSpec::SeparableCustom1D { names } => names
                .iter()
                .zip(v)
                .map(|(n, &x)| (registry::lookup_scalar_fn(n).expect("validated").value)(x))
                .sum(),
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        match self {
            GSpec::Zero => Ok(()),
            GSpec::SeparableQuadratic {
                curvature, slope, ..
            } => {
                if curvature.len() != d || slope.len() != d {
                    return Err(Error::Schema {
                        field: "g".into(),
                        message: format!("curvature and slope must have length {d}"),
                    });
                }
                if let Some(i) = curvature.iter().position(|&a| !(a >= 0.0)) {
                    return Err(Error::Schema {
                        field: format!("g.curvature[{i}]"),
                        message: "must be nonnegative (convexity)".into(),
                    });
                }
                Ok(())
            }
            GSpec::L1 { weight } => {
                if !(*weight >= 0.0) {
                    return Err(Error::Schema {
                        field: "g.weight".into(),
                        message: "must be nonnegative".into(),
                    });
                }
                Ok(())
            }
            GSpec::SeparableCustom1D { names } => {
                if names.len() != d {
                    return Err(Error::Schema {
                        field: "g.names".into(),
                        message: format!("expected {d} names, found {}", names.len()),
                    });
                }
                for name in names {
                    if registry::lookup_scalar_fn(name).is_none() {
                        return Err(Error::UnknownCustom {
                            kind: "scalar function",
                            name: name.clone(),
                        });
                    }
                }
                Ok(())
            }
        }
    }
}

/// Specification of the closed convex set `Omega`.
#[derive(Debug, Clone, PartialEq)]
pub enum SetSpec {
    WholeSpace,
    NonnegativeOrthant,
    /// Componentwise bounds; entries may be -inf / +inf.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    /// `{ x : <normal, x> <= offset }`.
    Halfspace { normal: Vec<f64>, offset: f64 },
}

impl SetSpec {
    /// Per-coordinate bounds when the set is box-like (whole space,
    /// nonnegative orthant or an explicit box). The orthant is a box
    /// special case so prox needs one code path.
    pub fn coord_bounds(&self, i: usize) -> Option<(f64, f64)> {
        match self {
            SetSpec::WholeSpace => Some((f64::NEG_INFINITY, f64::INFINITY)),
            SetSpec::NonnegativeOrthant => Some((0.0, f64::INFINITY)),
            SetSpec::Box { lo, hi } => Some((lo[i], hi[i])),
            _ => None,
        }
    }

    pub fn is_box_like(&self) -> bool {
        matches!(
            self,
            SetSpec::WholeSpace | SetSpec::NonnegativeOrthant | SetSpec::Box { .. }
        )
    }

    pub fn describe(&self) -> &'static str {
        match self {
            SetSpec::WholeSpace => "whole_space",
            SetSpec::NonnegativeOrthant => "nonnegative",
            SetSpec::Box { .. } => "box",
            SetSpec::Ball { .. } => "ball",
            SetSpec::Halfspace { .. } => "halfspace",
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        match self {
            SetSpec::WholeSpace | SetSpec::NonnegativeOrthant => Ok(()),
            SetSpec::Box { lo, hi } => {
                if lo.len() != d || hi.len() != d {
                    return Err(Error::Schema {
                        field: "omega".into(),
                        message: format!("box bounds must have length {d}"),
                    });
                }
                for i in 0..d {
                    if lo[i].is_nan() || hi[i].is_nan() {
                        return Err(Error::Schema {
                            field: "omega".into(),
                            message: format!("box bound {i} is NaN"),
                        });
                    }
                    if lo[i] > hi[i] {
                        return Err(Error::Schema {
                            field: "omega".into(),
                            message: "empty box".into(),
                        });
                    }
                }
                Ok(())
            }
            SetSpec::Ball { center, radius } => {
                if center.len() != d {
                    return Err(Error::Schema {
                        field: "omega.center".into(),
                        message: format!("expected length {d}, found {}", center.len()),
                    });
                }
                if center.iter().any(|e| !e.is_finite()) {
                    return Err(Error::Schema {
                        field: "omega.center".into(),
                        message: "entries must be finite".into(),
                    });
                }
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(Error::Schema {
                        field: "omega.radius".into(),
                        message: "must be positive and finite".into(),
                    });
                }
                Ok(())
            }
            SetSpec::Halfspace { normal, offset } => {
                if normal.len() != d {
                    return Err(Error::Schema {
                        field: "omega.normal".into(),
                        message: format!("expected length {d}, found {}", normal.len()),
                    });
                }
                if normal.iter().any(|e| !e.is_finite()) || !offset.is_finite() {
                    return Err(Error::Schema {
                        field: "omega".into(),
                        message: "halfspace data must be finite".into(),
                    });
                }
                if normal.iter().all(|&e| e == 0.0) {
                    return Err(Error::Schema {
                        field: "omega.normal".into(),
                        message: "must be nonzero".into(),
                    });
                }
                Ok(())
            }
        }
    }
}

/// A full, validated problem description.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub d: usize,
    pub f: OperatorSpec,
    pub h: OperatorSpec,
    pub g: GSpec,
    pub omega: SetSpec,
    pub gamma: f64,
}

impl ProblemInstance {
    pub fn new(
        d: usize,
        f: OperatorSpec,
        h: OperatorSpec,
        g: GSpec,
        omega: SetSpec,
        gamma: f64,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::Schema {
                field: "dimension".into(),
                message: "must be a positive integer".into(),
            });
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::Schema {
                field: "gamma".into(),
                message: "gamma must be positive".into(),
            });
        }
        for (op, name) in [(&f, "F"), (&h, "h")] {
            if let Some(od) = op.fixed_dim() {
                if od != d {
                    return Err(Error::DimensionMismatch {
                        context: if name == "F" { "operator F" } else { "operator h" },
                        expected: d,
                        found: od,
                    });
                }
            }
            op.validate(d, name)?;
        }
        g.validate(d)?;
        omega.validate(d)?;
        Ok(ProblemInstance {
            d,
            f,
            h,
            g,
            omega,
            gamma,
        })
    }
}

/// Evaluate an operator specification at `w`.
pub fn eval_operator(op: &OperatorSpec, w: &Vector) -> Result<Vector> {
    match op {
        OperatorSpec::Affine { matrix, offset } => {
            if matrix.len() != w.dim() {
                return Err(Error::DimensionMismatch {
                    context: "eval_operator",
                    expected: matrix.len(),
                    found: w.dim(),
                });
            }
            let mut out = offset.clone();
            for (o, row) in out.iter_mut().zip(matrix) {
                *o += row.iter().zip(w.as_slice()).map(|(m, x)| m * x).sum::<f64>();
            }
            Ok(out.into())
        }
        OperatorSpec::ScalarLinear { coefficient } => Ok(w.scale(*coefficient)),
        OperatorSpec::Custom { name } => {
            let op = registry::lookup_operator(name).ok_or_else(|| Error::UnknownCustom {
                kind: "operator",
                name: name.clone(),
            })?;
            let mut out = vec![0.0; w.dim()];
            (op.apply)(w.as_slice(), &mut out);
            Ok(out.into())
        }
    }
}

/// The worked 1-D instance: h(w) = w/2, F(w) = 3w/4, g(v) = v^2 + 2v + 1,
/// Omega = [0, inf), gamma = 1.
pub fn builtin_example1() -> ProblemInstance {
    ProblemInstance::new(
        1,
        OperatorSpec::scalar(0.75),
        OperatorSpec::scalar(0.5),
        GSpec::SeparableQuadratic {
            curvature: vec![1.0],
            slope: vec![2.0],
            constant: 1.0,
        },
        SetSpec::NonnegativeOrthant,
        1.0,
    )
    .expect("builtin instance is valid")
}

/// Look up a builtin instance by name.
pub fn builtin(name: &str) -> Option<ProblemInstance> {
    match name {
        "example1" => Some(builtin_example1()),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Configuration documents (strict JSON)
// ---------------------------------------------------------------------------

fn expect_object<'v>(v: &'v Value, field: &str) -> Result<&'v Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::Schema {
        field: field.into(),
        message: "expected an object".into(),
    })
}

fn check_keys(map: &Map<String, Value>, allowed: &[&str], field: &str) -> Result<()> {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Schema {
                field: format!("{field}.{key}"),
                message: "unknown key (strict mode)".into(),
            });
        }
    }
    Ok(())
}

fn get<'v>(map: &'v Map<String, Value>, key: &str, field: &str) -> Result<&'v Value> {
    map.get(key).ok_or_else(|| Error::Schema {
        field: format!("{field}.{key}"),
        message: "missing required key".into(),
    })
}

fn as_f64(v: &Value, field: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| Error::Schema {
        field: field.into(),
        message: "expected a number".into(),
    })
}

fn as_str<'v>(v: &'v Value, field: &str) -> Result<&'v str> {
    v.as_str().ok_or_else(|| Error::Schema {
        field: field.into(),
        message: "expected a string".into(),
    })
}

fn number_list(v: &Value, field: &str) -> Result<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| Error::Schema {
        field: field.into(),
        message: "expected an array of numbers".into(),
    })?;
    arr.iter()
        .enumerate()
        .map(|(i, e)| as_f64(e, &format!("{field}[{i}]")))
        .collect()
}

/// A bound entry: a number, or null meaning unbounded in that direction.
fn bound_list(v: &Value, field: &str, unbounded: f64) -> Result<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| Error::Schema {
        field: field.into(),
        message: "expected an array".into(),
    })?;
    arr.iter()
        .enumerate()
        .map(|(i, e)| {
            if e.is_null() {
                Ok(unbounded)
            } else {
                as_f64(e, &format!("{field}[{i}]"))
            }
        })
        .collect()
}

fn parse_operator(v: &Value, field: &str) -> Result<OperatorSpec> {
    let map = expect_object(v, field)?;
    let ty = as_str(get(map, "type", field)?, &format!("{field}.type"))?;
    match ty {
        "affine" => {
            check_keys(map, &["type", "matrix", "offset"], field)?;
            let rows = get(map, "matrix", field)?
                .as_array()
                .ok_or_else(|| Error::Schema {
                    field: format!("{field}.matrix"),
                    message: "expected an array of rows".into(),
                })?;
            let matrix: Vec<Vec<f64>> = rows
                .iter()
                .enumerate()
                .map(|(i, r)| number_list(r, &format!("{field}.matrix[{i}]")))
                .collect::<Result<_>>()?;
            let offset = number_list(get(map, "offset", field)?, &format!("{field}.offset"))?;
            Ok(OperatorSpec::Affine { matrix, offset })
        }
        "scalar_linear" => {
            check_keys(map, &["type", "coefficient"], field)?;
            let coefficient = as_f64(
                get(map, "coefficient", field)?,
                &format!("{field}.coefficient"),
            )?;
            Ok(OperatorSpec::ScalarLinear { coefficient })
        }
        "custom" => {
            check_keys(map, &["type", "name"], field)?;
            let name = as_str(get(map, "name", field)?, &format!("{field}.name"))?;
            Ok(OperatorSpec::Custom { name: name.into() })
        }
        other => Err(Error::Schema {
            field: format!("{field}.type"),
            message: format!("unknown operator type `{other}`"),
        }),
    }
}

fn parse_g(v: &Value) -> Result<GSpec> {
    let map = expect_object(v, "g")?;
    let ty = as_str(get(map, "type", "g")?, "g.type")?;
    match ty {
        "zero" => {
            check_keys(map, &["type"], "g")?;
            Ok(GSpec::Zero)
        }
        "separable_quadratic" => {
            check_keys(map, &["type", "curvature", "slope", "constant"], "g")?;
            Ok(GSpec::SeparableQuadratic {
                curvature: number_list(get(map, "curvature", "g")?, "g.curvature")?,
                slope: number_list(get(map, "slope", "g")?, "g.slope")?,
                constant: as_f64(get(map, "constant", "g")?, "g.constant")?,
            })
        }
        "l1" => {
            check_keys(map, &["type", "weight"], "g")?;
            Ok(GSpec::L1 {
                weight: as_f64(get(map, "weight", "g")?, "g.weight")?,
            })
        }
        "custom1d" => {
            check_keys(map, &["type", "names"], "g")?;
            let arr = get(map, "names", "g")?
                .as_array()
                .ok_or_else(|| Error::Schema {
                    field: "g.names".into(),
                    message: "expected an array of strings".into(),
                })?;
            let names = arr
                .iter()
                .enumerate()
                .map(|(i, e)| as_str(e, &format!("g.names[{i}]")).map(String::from))
                .collect::<Result<_>>()?;
            Ok(GSpec::SeparableCustom1D { names })
        }
        other => Err(Error::Schema {
            field: "g.type".into(),
            message: format!("unknown g type `{other}`"),
        }),
    }
}

fn parse_omega(v: &Value) -> Result<SetSpec> {
    let map = expect_object(v, "omega")?;
    let ty = as_str(get(map, "type", "omega")?, "omega.type")?;
    match ty {
        "whole_space" => {
            check_keys(map, &["type"], "omega")?;
            Ok(SetSpec::WholeSpace)
        }
        "nonnegative" => {
            check_keys(map, &["type"], "omega")?;
            Ok(SetSpec::NonnegativeOrthant)
        }
        "box" => {
            check_keys(map, &["type", "lo", "hi"], "omega")?;
            Ok(SetSpec::Box {
                lo: bound_list(get(map, "lo", "omega")?, "omega.lo", f64::NEG_INFINITY)?,
                hi: bound_list(get(map, "hi", "omega")?, "omega.hi", f64::INFINITY)?,
            })
        }
        "ball" => {
            check_keys(map, &["type", "center", "radius"], "omega")?;
            Ok(SetSpec::Ball {
                center: number_list(get(map, "center", "omega")?, "omega.center")?,
                radius: as_f64(get(map, "radius", "omega")?, "omega.radius")?,
            })
        }
        "halfspace" => {
            check_keys(map, &["type", "normal", "offset"], "omega")?;
            Ok(SetSpec::Halfspace {
                normal: number_list(get(map, "normal", "omega")?, "omega.normal")?,
                offset: as_f64(get(map, "offset", "omega")?, "omega.offset")?,
            })
        }
        other => Err(Error::Schema {
            field: "omega.type".into(),
            message: format!("unknown omega type `{other}`"),
        }),
    }
}

/// Parse and validate a problem configuration document (strict mode:
/// unknown keys are an error).
pub fn load_problem(document: &str) -> Result<ProblemInstance> {
    let root: Value = serde_json::from_str(document)?;
    let map = expect_object(&root, "<root>")?;
    check_keys(map, &["dimension", "F", "h", "g", "omega", "gamma"], "<root>")?;

    let d = get(map, "dimension", "<root>")?
        .as_u64()
        .ok_or_else(|| Error::Schema {
            field: "dimension".into(),
            message: "must be a positive integer".into(),
        })? as usize;
    let f = parse_operator(get(map, "F", "<root>")?, "F")?;
    let h = parse_operator(get(map, "h", "<root>")?, "h")?;
    let g = parse_g(get(map, "g", "<root>")?)?;
    let omega = parse_omega(get(map, "omega", "<root>")?)?;
    let gamma = as_f64(get(map, "gamma", "<root>")?, "gamma")?;

    ProblemInstance::new(d, f, h, g, omega, gamma)
}

fn bound_value(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Serialize an instance back to its configuration document.
pub fn to_document(p: &ProblemInstance) -> Value {
    let op_doc = |op: &OperatorSpec| match op {
        OperatorSpec::Affine { matrix, offset } => json!({
            "type": "affine", "matrix": matrix, "offset": offset
        }),
        OperatorSpec::ScalarLinear { coefficient } => json!({
            "type": "scalar_linear", "coefficient": coefficient
        }),
        OperatorSpec::Custom { name } => json!({ "type": "custom", "name": name }),
    };
    let g_doc = match &p.g {
        GSpec::Zero => json!({ "type": "zero" }),
        GSpec::SeparableQuadratic {
            curvature,
            slope,
            constant,
        } => json!({
            "type": "separable_quadratic",
            "curvature": curvature, "slope": slope, "constant": constant
        }),
        GSpec::L1 { weight } => json!({ "type": "l1", "weight": weight }),
        GSpec::SeparableCustom1D { names } => json!({ "type": "custom1d", "names": names }),
    };
    let omega_doc = match &p.omega {
        SetSpec::WholeSpace => json!({ "type": "whole_space" }),
        SetSpec::NonnegativeOrthant => json!({ "type": "nonnegative" }),
        SetSpec::Box { lo, hi } => json!({
            "type": "box",
            "lo": lo.iter().copied().map(bound_value).collect::<Vec<_>>(),
            "hi": hi.iter().copied().map(bound_value).collect::<Vec<_>>(),
        }),
        SetSpec::Ball { center, radius } => json!({
            "type": "ball", "center": center, "radius": radius
        }),
        SetSpec::Halfspace { normal, offset } => json!({
            "type": "halfspace", "normal": normal, "offset": offset
        }),
    };
    json!({
        "dimension": p.d,
        "F": op_doc(&p.f),
        "h": op_doc(&p.h),
        "g": g_doc,
        "omega": omega_doc,
        "gamma": p.gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE1_DOC: &str = r#"{
        "dimension": 1,
        "F": {"type": "scalar_linear", "coefficient": 0.75},
        "h": {"type": "scalar_linear", "coefficient": 0.5},
        "g": {"type": "separable_quadratic", "curvature": [1.0], "slope": [2.0], "constant": 1.0},
        "omega": {"type": "nonnegative"},
        "gamma": 1.0
    }"#;

    #[test]
    fn load_example1_document() {
        let p = load_problem(EXAMPLE1_DOC).unwrap();
        assert_eq!(p, builtin_example1());
    }

    #[test]
    fn zero_gamma_is_rejected() {
        let doc = EXAMPLE1_DOC.replace("\"gamma\": 1.0", "\"gamma\": 0.0");
        let err = load_problem(&doc).unwrap_err();
        assert!(err.to_string().contains("gamma must be positive"), "{err}");
    }

    #[test]
    fn empty_box_is_rejected() {
        let doc = r#"{
            "dimension": 1,
            "F": {"type": "scalar_linear", "coefficient": 1.0},
            "h": {"type": "scalar_linear", "coefficient": 1.0},
            "g": {"type": "zero"},
            "omega": {"type": "box", "lo": [1.0], "hi": [0.0]},
            "gamma": 1.0
        }"#;
        let err = load_problem(doc).unwrap_err();
        assert!(err.to_string().contains("empty box"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let doc = EXAMPLE1_DOC.replace("\"gamma\": 1.0", "\"gamma\": 1.0, \"extra\": 3");
        let err = load_problem(&doc).unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");
    }

    #[test]
    fn unknown_custom_operator_is_rejected() {
        let doc = EXAMPLE1_DOC.replace(
            r#"{"type": "scalar_linear", "coefficient": 0.75}"#,
            r#"{"type": "custom", "name": "nope"}"#,
        );
        match load_problem(&doc) {
            Err(Error::UnknownCustom { name, .. }) => assert_eq!(name, "nope"),
            other => panic!("expected UnknownCustom, got {other:?}"),
        }
    }

    #[test]
    fn eval_scalar_linear() {
        let f = OperatorSpec::scalar(0.75);
        let out = eval_operator(&f, &Vector::from_scalar(12.0)).unwrap();
        assert_eq!(out.as_slice(), &[9.0]);
        let h = OperatorSpec::scalar(0.5);
        let out = eval_operator(&h, &Vector::from_scalar(-4.0)).unwrap();
        assert_eq!(out.as_slice(), &[-2.0]);
    }

    #[test]
    fn eval_affine_identity() {
        let id = OperatorSpec::identity(3);
        let w = Vector::new(vec![1.0, -2.5, 0.25]).unwrap();
        let out = eval_operator(&id, &w).unwrap();
        assert_eq!(out.as_slice(), w.as_slice());
    }

    #[test]
    fn eval_dimension_mismatch() {
        let id = OperatorSpec::identity(3);
        let w = Vector::new(vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            eval_operator(&id, &w),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn example1_fields() {
        let p = builtin_example1();
        assert_eq!(p.d, 1);
        assert_eq!(p.gamma, 1.0);
        let out = eval_operator(&p.f, &Vector::from_scalar(4.0)).unwrap();
        assert_eq!(out.as_slice(), &[3.0]);
    }

    #[test]
    fn vector_rejects_non_finite() {
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
        assert!(Vector::new(vec![]).is_err());
    }

    #[test]
    fn affine_eval_is_linear_plus_offset() {
        use rand::{Rng, SeedableRng};
        let matrix = vec![
            vec![0.7, 0.01, -0.02],
            vec![0.0, 0.8, 0.03],
            vec![0.05, -0.01, 0.75],
        ];
        let offset = vec![0.1, -0.2, 0.3];
        let q: Vector = offset.clone().into();
        let op = OperatorSpec::Affine { matrix, offset };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let u: Vector = (0..3)
                .map(|_| rng.gen_range(-10.0..10.0))
                .collect::<Vec<_>>()
                .into();
            let v: Vector = (0..3)
                .map(|_| rng.gen_range(-10.0..10.0))
                .collect::<Vec<_>>()
                .into();
            let (a, b): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let combo = u.scale(a).add_scaled(b, &v);
            let lhs = eval_operator(&op, &combo).unwrap().sub(&q);
            let rhs = eval_operator(&op, &u)
                .unwrap()
                .sub(&q)
                .scale(a)
                .add_scaled(b, &eval_operator(&op, &v).unwrap().sub(&q));
            let scale = lhs.norm().max(1.0);
            assert!(lhs.dist(&rhs) <= 1e-12 * scale);
        }
    }

    #[test]
    fn document_roundtrip_evaluates_identically() {
        use rand::{Rng, SeedableRng};
        let p = ProblemInstance::new(
            3,
            OperatorSpec::Affine {
                matrix: vec![
                    vec![0.7, 0.01, -0.02],
                    vec![0.0, 0.8, 0.03],
                    vec![0.05, -0.01, 0.75],
                ],
                offset: vec![0.1, -0.2, 0.3],
            },
            OperatorSpec::scalar(0.5),
            GSpec::L1 { weight: 0.25 },
            SetSpec::Box {
                lo: vec![0.0, f64::NEG_INFINITY, -1.0],
                hi: vec![f64::INFINITY, 2.0, 1.0],
            },
            0.5,
        )
        .unwrap();
        let doc = serde_json::to_string(&to_document(&p)).unwrap();
        let q = load_problem(&doc).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let w: Vector = (0..3)
                .map(|_| rng.gen_range(-50.0..50.0))
                .collect::<Vec<_>>()
                .into();
            let a = eval_operator(&p.f, &w).unwrap();
            let b = eval_operator(&q.f, &w).unwrap();
            assert_eq!(a.as_slice(), b.as_slice());
        }
    }
}
