//! Continuous-time right-hand sides for the nominal, finite-time and
//! fixed/predefined-time dynamical systems, plus numerical integration
//! with settling detection.

use crate::error::{Error, Result};
use crate::model::{ProblemInstance, Vector};
use crate::residual::{self, ResidualSample};

/// Residual norms at or below this are treated as the equilibrium by the
/// vector fields (zero field), so the singular gains never divide by ~0.
pub const DEFAULT_SING_GUARD: f64 = 1e-12;

/// Gain parameters of the fixed/predefined-time field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedTimeParams {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub gd: f64,
    pub td: f64,
}

impl FixedTimeParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(a1: f64, a2: f64, a3: f64, k1: f64, k2: f64, k3: f64, gd: f64, td: f64) -> Result<Self> {
        let p = FixedTimeParams {
            a1,
            a2,
            a3,
            k1,
            k2,
            k3,
            gd,
            td,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a1 > 0.0) || !(self.a2 > 0.0) {
            return Err(Error::InvalidConfig("a1 and a2 must be positive".into()));
        }
        if !(self.a3 >= 0.0) {
            return Err(Error::InvalidConfig("a3 must be nonnegative".into()));
        }
        if !(self.k1 > 0.0 && self.k1 < 1.0) {
            return Err(Error::InvalidConfig("k1 must lie in (0, 1)".into()));
        }
        if !(self.k2 > 1.0) {
            return Err(Error::InvalidConfig("k2 must exceed 1".into()));
        }
        // k3 = 1 gives a bounded sliding-mode-style term (chatter under
        // discretization); k3 > 1 makes the field unbounded near the
        // equilibrium and is rejected.
        if !(self.k3 >= 0.0 && self.k3 <= 1.0) {
            return Err(Error::InvalidConfig("k3 must lie in [0, 1]".into()));
        }
        if !(self.gd > 0.0) || !(self.td > 0.0) {
            return Err(Error::InvalidConfig("Gd and Td must be positive".into()));
        }
        Ok(())
    }
}

/// Which dynamical system to integrate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeConfig {
    /// w' = -kappa Xi(w): exponential regime.
    Nominal { kappa: f64 },
    /// w' = -tau Xi(w)/||Xi(w)||^((k-2)/(k-1)).
    FiniteTime { tau: f64, k: f64 },
    /// w' = -(Gd/Td) tau(w) Xi(w) with the three-term gain.
    FixedTime(FixedTimeParams),
}

impl RegimeConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            RegimeConfig::Nominal { kappa } => {
                if !(*kappa > 0.0) {
                    return Err(Error::InvalidConfig("kappa must be positive".into()));
                }
            }
            RegimeConfig::FiniteTime { tau, k } => {
                if !(*tau > 0.0) {
                    return Err(Error::InvalidConfig("tau must be positive".into()));
                }
                if !(*k > 2.0) {
                    return Err(Error::InvalidConfig("k must exceed 2".into()));
                }
            }
            RegimeConfig::FixedTime(fp) => fp.validate()?,
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match self {
            RegimeConfig::Nominal { kappa } => format!("nominal(kappa={kappa})"),
            RegimeConfig::FiniteTime { tau, k } => format!("finite_time(tau={tau}, k={k})"),
            RegimeConfig::FixedTime(fp) => format!(
                "fixed_time(a1={}, a2={}, a3={}, k1={}, k2={}, k3={}, Gd={}, Td={})",
                fp.a1, fp.a2, fp.a3, fp.k1, fp.k2, fp.k3, fp.gd, fp.td
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Rk4Fixed,
    EulerFixed,
    Rk4Adaptive,
}

#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_max: f64,
    /// Settling threshold on ||Xi||.
    pub settle_tol: f64,
    pub sing_guard: f64,
    pub sample_stride: usize,
    /// Contraction modulus m from a constants report; sharpens the
    /// displacement limiter cap 0.5*||Xi||/m.
    pub limiter_modulus: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            scheme: Scheme::Rk4Fixed,
            dt: 1e-3,
            t_max: 100.0,
            settle_tol: 1e-9,
            sing_guard: DEFAULT_SING_GUARD,
            sample_stride: 10,
            limiter_modulus: None,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.t_max > 0.0) || self.dt >= self.t_max {
            return Err(Error::InvalidConfig(
                "need 0 < dt < t_max for integration".into(),
            ));
        }
        if !(self.settle_tol > 0.0) || !(self.sing_guard > 0.0) {
            return Err(Error::InvalidConfig(
                "settle_tol and sing_guard must be positive".into(),
            ));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidConfig("sample_stride must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrajectorySample {
    /// Flow time, or iteration index for discrete runs.
    pub t: f64,
    pub w: Vector,
    pub xi_norm: f64,
    pub v_lyap: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub settled_at: Option<f64>,
    pub regime: String,
}

/// The scalar gain of the fixed-time field:
/// a1/||Xi||^(1-k1) + a2/||Xi||^(1-k2) + a3/||Xi||^k3, and 0 at the
/// equilibrium (the zero branch of the gain definition).
pub fn tau_gain(fp: &FixedTimeParams, xi_norm: f64) -> f64 {
    tau_gain_guarded(fp, xi_norm, DEFAULT_SING_GUARD)
}

fn tau_gain_guarded(fp: &FixedTimeParams, xi_norm: f64, guard: f64) -> f64 {
    if xi_norm <= guard {
        return 0.0;
    }
    fp.a1 * xi_norm.powf(fp.k1 - 1.0)
        + fp.a2 * xi_norm.powf(fp.k2 - 1.0)
        + fp.a3 * xi_norm.powf(-fp.k3)
}

fn field_from_sample(rc: &RegimeConfig, s: &ResidualSample, guard: f64) -> Vector {
    if s.xi_norm <= guard {
        return Vector::zeros(s.w.dim());
    }
    match rc {
        RegimeConfig::Nominal { kappa } => s.xi.scale(-kappa),
        RegimeConfig::FiniteTime { tau, k } => {
            let expo = (k - 2.0) / (k - 1.0);
            s.xi.scale(-tau * s.xi_norm.powf(-expo))
        }
        RegimeConfig::FixedTime(fp) => {
            let gain = tau_gain_guarded(fp, s.xi_norm, guard);
            s.xi.scale(-(fp.gd / fp.td) * gain)
        }
    }
}

/// The regime's vector field at `w`; zero once ||Xi(w)|| is inside the
/// singularity guard.
pub fn rhs(p: &ProblemInstance, rc: &RegimeConfig, w: &Vector) -> Result<Vector> {
    let s = residual::xi(p, w)?;
    Ok(field_from_sample(rc, &s, DEFAULT_SING_GUARD))
}

fn cap_norm(v: Vector, cap: f64) -> Vector {
    let n = v.norm();
    if n > cap {
        v.scale(cap / n)
    } else {
        v
    }
}

/// One explicit step of the chosen scheme with the displacement limiter.
///
/// The limiter caps the step displacement at max(settle_tol, 0.5*||Xi||/m);
/// for the RK4 schemes the same cap is applied to the internal stage
/// displacements, which keeps the stage states on the current side of the
/// non-Lipschitz equilibrium and prevents both substep blow-up (huge w0)
/// and the substep-straddle stall near settling.
fn step(
    p: &ProblemInstance,
    rc: &RegimeConfig,
    w: &Vector,
    s0: &ResidualSample,
    dt: f64,
    ic: &IntegratorConfig,
) -> Result<(Vector, bool)> {
    let m_eff = ic.limiter_modulus.unwrap_or(1.0);
    let cap = (0.5 * s0.xi_norm / m_eff).max(ic.settle_tol);
    let k1 = field_from_sample(rc, s0, ic.sing_guard);

    let dw = match ic.scheme {
        Scheme::EulerFixed => k1.scale(dt),
        Scheme::Rk4Fixed | Scheme::Rk4Adaptive => {
            let stage = |k: &Vector, c: f64| -> Vector {
                w.add_scaled(1.0, &cap_norm(k.scale(c * dt), cap))
            };
            let k2 = field_from_sample(rc, &residual::xi(p, &stage(&k1, 0.5))?, ic.sing_guard);
            let k3 = field_from_sample(rc, &residual::xi(p, &stage(&k2, 0.5))?, ic.sing_guard);
            let k4 = field_from_sample(rc, &residual::xi(p, &stage(&k3, 1.0))?, ic.sing_guard);
            k1.add_scaled(2.0, &k2)
                .add_scaled(2.0, &k3)
                .add_scaled(1.0, &k4)
                .scale(dt / 6.0)
        }
    };
    let norm = dw.norm();
    let limited = norm > cap;
    let dw = if limited { dw.scale(cap / norm) } else { dw };
    Ok((w.add_scaled(1.0, &dw), limited))
}

/// Integrate the regime's flow from `w0` until `t_max` or settling.
///
/// Samples are retained every `sample_stride` steps plus the final state;
/// `settled_at` is the first crossing of `settle_tol`, refined by linear
/// interpolation between the bracketing steps. Reaching `t_max` without
/// settling is not an error.
pub fn integrate(
    p: &ProblemInstance,
    rc: &RegimeConfig,
    w0: &Vector,
    ic: &IntegratorConfig,
) -> Result<Trajectory> {
    rc.validate()?;
    ic.validate()?;

    let mut samples = Vec::new();
    let s0 = residual::xi(p, w0)?;
    samples.push(TrajectorySample {
        t: 0.0,
        w: w0.clone(),
        xi_norm: s0.xi_norm,
        v_lyap: None,
    });
    if s0.xi_norm <= ic.settle_tol {
        return Ok(Trajectory {
            samples,
            settled_at: Some(0.0),
            regime: rc.describe(),
        });
    }

    let mut w = w0.clone();
    let mut sample = s0;
    let mut t = 0.0;
    let mut dt = ic.dt;
    let mut nstep = 0usize;
    let mut clean_streak = 0usize;
    let mut last_recorded_step = 0usize;
    let mut settled_at = None;

    while t < ic.t_max - 1e-15 {
        let (w_next, limited) = step(p, rc, &w, &sample, dt, ic)?;
        nstep += 1;
        t += dt;
        if !w_next.is_finite() {
            return Err(Error::NonFiniteState {
                step: nstep,
                time: t,
            });
        }
        let s_next = residual::xi(p, &w_next)?;

        if ic.scheme == Scheme::Rk4Adaptive {
            if limited {
                dt = (dt * 0.5).max(1e-8);
                clean_streak = 0;
            } else {
                clean_streak += 1;
                if clean_streak >= 10 {
                    dt = (dt * 2.0).min(ic.dt);
                    clean_streak = 0;
                }
            }
        }

        let record = nstep.is_multiple_of(ic.sample_stride);
        let settled = s_next.xi_norm <= ic.settle_tol;
        if record || settled {
            samples.push(TrajectorySample {
                t,
                w: w_next.clone(),
                xi_norm: s_next.xi_norm,
                v_lyap: None,
            });
            last_recorded_step = nstep;
        }
        if settled {
            let prev = sample.xi_norm;
            let cross = if prev > s_next.xi_norm {
                t - dt + dt * (prev - ic.settle_tol) / (prev - s_next.xi_norm)
            } else {
                t
            };
            settled_at = Some(cross);
            w = w_next;
            break;
        }
        w = w_next;
        sample = s_next;
    }

    if settled_at.is_none() && last_recorded_step != nstep {
        let s = residual::xi(p, &w)?;
        samples.push(TrajectorySample {
            t,
            w: w.clone(),
            xi_norm: s.xi_norm,
            v_lyap: None,
        });
    }

    Ok(Trajectory {
        samples,
        settled_at,
        regime: rc.describe(),
    })
}

/// First interpolated time at which the retained samples cross `tol`.
pub fn observed_settling(traj: &Trajectory, tol: f64) -> Option<f64> {
    let first = traj.samples.first()?;
    if first.xi_norm <= tol {
        return Some(0.0);
    }
    for pair in traj.samples.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if b.xi_norm <= tol {
            if a.xi_norm > b.xi_norm {
                return Some(a.t + (b.t - a.t) * (a.xi_norm - tol) / (a.xi_norm - b.xi_norm));
            }
            return Some(b.t);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Trajectory CSV (header: t,w_0,...,w_{d-1},xi_norm,V)
// ---------------------------------------------------------------------------

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Render the trajectory as CSV with 17 significant digits per value.
pub fn to_csv(traj: &Trajectory) -> String {
    let d = traj.samples.first().map_or(0, |s| s.w.dim());
    let mut out = String::from("t");
    for i in 0..d {
        out.push_str(&format!(",w_{i}"));
    }
    out.push_str(",xi_norm,V\n");
    for s in &traj.samples {
        out.push_str(&fmt17(s.t));
        for i in 0..d {
            out.push(',');
            out.push_str(&fmt17(s.w[i]));
        }
        out.push(',');
        out.push_str(&fmt17(s.xi_norm));
        out.push(',');
        if let Some(v) = s.v_lyap {
            out.push_str(&fmt17(v));
        }
        out.push('\n');
    }
    out
}

/// Parse a trajectory CSV written by `to_csv`.
pub fn from_csv(text: &str) -> Result<Trajectory> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::MalformedCsv {
        line: 1,
        message: "empty file".into(),
    })?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "t" || cols[cols.len() - 2] != "xi_norm" {
        return Err(Error::MalformedCsv {
            line: 1,
            message: "expected header t,w_0,...,xi_norm,V".into(),
        });
    }
    let d = cols.len() - 3;
    let mut samples = Vec::new();
    let mut any_row = false;
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        any_row = true;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::MalformedCsv {
                line: idx + 1,
                message: format!("expected {} fields, found {}", cols.len(), fields.len()),
            });
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::MalformedCsv {
                line: idx + 1,
                message: format!("bad {what} value `{s}`"),
            })
        };
        let t = parse(fields[0], "t")?;
        let w: Vec<f64> = fields[1..1 + d]
            .iter()
            .map(|s| parse(s, "w"))
            .collect::<Result<_>>()?;
        let xi_norm = parse(fields[1 + d], "xi_norm")?;
        let vfield = fields[2 + d].trim();
        let v_lyap = if vfield.is_empty() {
            None
        } else {
            Some(parse(vfield, "V")?)
        };
        samples.push(TrajectorySample {
            t,
            w: w.into(),
            xi_norm,
            v_lyap,
        });
    }
    if !any_row {
        return Err(Error::MalformedCsv {
            line: 2,
            message: "no data rows".into(),
        });
    }
    Ok(Trajectory {
        samples,
        settled_at: None,
        regime: String::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_example1;

    fn example_fp() -> FixedTimeParams {
        FixedTimeParams::new(0.9, 0.5, 1e-4, 0.4, 1.5, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn tau_gain_unit_residual() {
        let fp = example_fp();
        assert!((tau_gain(&fp, 1.0) - (0.9 + 0.5 + 1e-4)).abs() < 1e-15);
    }

    #[test]
    fn tau_gain_at_26_thirds() {
        let fp = example_fp();
        let xin: f64 = 26.0 / 3.0;
        let direct = 0.9 * xin.powf(-0.6) + 0.5 * xin.powf(0.5) + 1e-4;
        let got = tau_gain(&fp, xin);
        assert!((got - direct).abs() < 1e-15);
        assert!((got - 1.7184).abs() < 1e-3, "got {got}");
    }

    #[test]
    fn tau_gain_zero_residual() {
        assert_eq!(tau_gain(&example_fp(), 0.0), 0.0);
    }

    #[test]
    fn rhs_zero_at_solution() {
        let p = builtin_example1();
        for rc in [
            RegimeConfig::Nominal { kappa: 1.0 },
            RegimeConfig::FiniteTime { tau: 1.0, k: 3.0 },
            RegimeConfig::FixedTime(example_fp()),
        ] {
            let f = rhs(&p, &rc, &Vector::from_scalar(0.0)).unwrap();
            assert_eq!(f.as_slice(), &[0.0]);
        }
    }

    #[test]
    fn rhs_finite_time_at_12() {
        let p = builtin_example1();
        let rc = RegimeConfig::FiniteTime { tau: 1.0, k: 3.0 };
        let f = rhs(&p, &rc, &Vector::from_scalar(12.0)).unwrap();
        let expect = -(26.0f64 / 3.0).sqrt();
        assert!((f[0] - expect).abs() < 1e-12, "{} vs {expect}", f[0]);
    }

    #[test]
    fn rhs_fixed_time_at_12() {
        let p = builtin_example1();
        let rc = RegimeConfig::FixedTime(example_fp());
        let f = rhs(&p, &rc, &Vector::from_scalar(12.0)).unwrap();
        let xin = 26.0 / 3.0;
        let expect = -tau_gain(&example_fp(), xin) * xin;
        assert!((f[0] - expect).abs() < 1e-12);
        assert!((f[0] + 14.89).abs() < 1e-2, "got {}", f[0]);
    }

    #[test]
    fn integrate_already_settled() {
        let p = builtin_example1();
        let traj = integrate(
            &p,
            &RegimeConfig::FiniteTime { tau: 1.0, k: 3.0 },
            &Vector::from_scalar(0.0),
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(traj.samples.len(), 1);
        assert_eq!(traj.settled_at, Some(0.0));
    }

    #[test]
    fn finite_time_settles_under_bound() {
        let p = builtin_example1();
        let ic = IntegratorConfig {
            t_max: 100.0,
            ..Default::default()
        };
        let traj = integrate(
            &p,
            &RegimeConfig::FiniteTime { tau: 1.0, k: 3.0 },
            &Vector::from_scalar(50.0),
            &ic,
        )
        .unwrap();
        let settled = traj.settled_at.expect("should settle");
        assert!(settled <= 20.0, "settled at {settled}");
    }

    #[test]
    fn nominal_residual_strictly_decreasing() {
        let p = builtin_example1();
        let ic = IntegratorConfig {
            t_max: 40.0,
            ..Default::default()
        };
        let traj = integrate(
            &p,
            &RegimeConfig::Nominal { kappa: 1.0 },
            &Vector::from_scalar(50.0),
            &ic,
        )
        .unwrap();
        for pair in traj.samples.windows(2) {
            assert!(pair[1].xi_norm < pair[0].xi_norm);
        }
    }

    #[test]
    fn times_strictly_increasing() {
        let p = builtin_example1();
        let traj = integrate(
            &p,
            &RegimeConfig::FiniteTime { tau: 1.0, k: 3.0 },
            &Vector::from_scalar(50.0),
            &IntegratorConfig::default(),
        )
        .unwrap();
        for pair in traj.samples.windows(2) {
            assert!(pair[1].t > pair[0].t);
        }
    }

    #[test]
    fn observed_settling_edge_cases() {
        let traj = Trajectory {
            samples: vec![
                TrajectorySample {
                    t: 0.0,
                    w: Vector::from_scalar(1.0),
                    xi_norm: 5.0,
                    v_lyap: None,
                },
                TrajectorySample {
                    t: 1.0,
                    w: Vector::from_scalar(0.5),
                    xi_norm: 3.0,
                    v_lyap: None,
                },
            ],
            settled_at: None,
            regime: String::new(),
        };
        assert_eq!(observed_settling(&traj, 1.0), None);
        assert_eq!(observed_settling(&traj, 10.0), Some(0.0));
        // interpolation between 5 and 3 crossing 4 -> t = 0.5
        assert_eq!(observed_settling(&traj, 4.0), Some(0.5));
    }

    #[test]
    fn config_validation_rejects_bad_parameters() {
        assert!(FixedTimeParams::new(0.9, 0.5, 1e-4, 0.4, 1.5, 1.5, 1.0, 1.0).is_err());
        assert!(FixedTimeParams::new(0.9, 0.5, 1e-4, 1.0, 1.5, 0.0, 1.0, 1.0).is_err());
        assert!(RegimeConfig::FiniteTime { tau: 1.0, k: 2.0 }.validate().is_err());
        assert!(RegimeConfig::Nominal { kappa: 0.0 }.validate().is_err());
        let ic = IntegratorConfig {
            dt: 2.0,
            t_max: 1.0,
            ..Default::default()
        };
        assert!(ic.validate().is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let p = builtin_example1();
        let ic = IntegratorConfig {
            t_max: 0.5,
            sample_stride: 100,
            ..Default::default()
        };
        let traj = integrate(
            &p,
            &RegimeConfig::Nominal { kappa: 1.0 },
            &Vector::from_scalar(50.0),
            &ic,
        )
        .unwrap();
        let csv = to_csv(&traj);
        let parsed = from_csv(&csv).unwrap();
        assert_eq!(parsed.samples.len(), traj.samples.len());
        for (a, b) in parsed.samples.iter().zip(&traj.samples) {
            assert_eq!(a.t, b.t);
            assert_eq!(a.w.as_slice(), b.w.as_slice());
            assert_eq!(a.xi_norm, b.xi_norm);
        }
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(from_csv("").is_err());
        assert!(from_csv("t,w_0,xi_norm,V\n1.0,2.0\n").is_err());
        assert!(from_csv("nope,w_0,xi_norm,V\n").is_err());
    }
}
