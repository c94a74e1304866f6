//! Discrete-time solvers: forward-Euler discretizations of the flows with
//! step schedules and stopping rules. Trajectories carry the iteration
//! index in the time column.

use crate::error::{Error, Result};
use crate::flow::{tau_gain, FixedTimeParams, Trajectory, TrajectorySample, DEFAULT_SING_GUARD};
use crate::model::{ProblemInstance, Vector};
use crate::residual;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaSchedule {
    Constant(f64),
    /// theta_n = theta_min + 1/n with n starting at 1.
    PaperSchedule { theta_min: f64 },
}

impl ThetaSchedule {
    pub fn at(&self, n: usize) -> f64 {
        match self {
            ThetaSchedule::Constant(theta) => *theta,
            ThetaSchedule::PaperSchedule { theta_min } => theta_min + 1.0 / n as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MethodVariant {
    /// w_{n+1} = w_n - tau*theta*Xi(w_n)/||Xi(w_n)||^((k-2)/(k-1)), k >= 2.
    Alg2 { tau: f64, theta: f64, k: f64 },
    /// w_{n+1} = w_n - theta_n (Gd/Td) tau(w_n) Xi(w_n).
    Eq29 {
        schedule: ThetaSchedule,
        params: FixedTimeParams,
    },
    /// w_{n+1} = w_n - kappa_theta*Xi(w_n): the plain projection-type step.
    NominalIter { kappa_theta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    pub variant: MethodVariant,
    pub n_max: usize,
    pub stop_tol: f64,
}

impl MethodConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.stop_tol > 0.0) {
            return Err(Error::InvalidConfig("stop_tol must be positive".into()));
        }
        match &self.variant {
            MethodVariant::Alg2 { tau, theta, k } => {
                if !(*tau > 0.0) || !(*theta > 0.0) {
                    return Err(Error::InvalidConfig("tau and theta must be positive".into()));
                }
                if !(*k >= 2.0) {
                    return Err(Error::InvalidConfig("k must be >= 2".into()));
                }
            }
            MethodVariant::Eq29 { schedule, params } => {
                params.validate()?;
                match schedule {
                    ThetaSchedule::Constant(t) if !(*t > 0.0) => {
                        return Err(Error::InvalidConfig("theta must be positive".into()));
                    }
                    ThetaSchedule::PaperSchedule { theta_min } if !(*theta_min >= 0.0) => {
                        return Err(Error::InvalidConfig("theta_min must be nonnegative".into()));
                    }
                    _ => {}
                }
            }
            MethodVariant::NominalIter { kappa_theta } => {
                if !(*kappa_theta > 0.0) {
                    return Err(Error::InvalidConfig("kappa_theta must be positive".into()));
                }
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match &self.variant {
            MethodVariant::Alg2 { tau, theta, k } => {
                format!("alg2(tau={tau}, theta={theta}, k={k})")
            }
            MethodVariant::Eq29 { schedule, params } => {
                let sched = match schedule {
                    ThetaSchedule::Constant(t) => format!("theta={t}"),
                    ThetaSchedule::PaperSchedule { theta_min } => {
                        format!("theta_n={theta_min}+1/n")
                    }
                };
                format!(
                    "eq29({sched}, a1={}, a2={}, a3={}, k1={}, k2={}, k3={}, Gd={}, Td={})",
                    params.a1, params.a2, params.a3, params.k1, params.k2, params.k3,
                    params.gd, params.td
                )
            }
            MethodVariant::NominalIter { kappa_theta } => {
                format!("nominal_iter(kappa_theta={kappa_theta})")
            }
        }
    }
}

/// One normalized-gradient step. Returns `w` unchanged at (numerical)
/// fixed points.
pub fn step_alg2(
    p: &ProblemInstance,
    w: &Vector,
    tau: f64,
    theta: f64,
    k: f64,
) -> Result<Vector> {
    let s = residual::xi(p, w)?;
    if s.xi_norm <= DEFAULT_SING_GUARD {
        return Ok(w.clone());
    }
    let expo = (k - 2.0) / (k - 1.0);
    Ok(w.add_scaled(-tau * theta * s.xi_norm.powf(-expo), &s.xi))
}

/// One step of the discretized fixed-time system.
pub fn step_eq29(
    p: &ProblemInstance,
    w: &Vector,
    theta: f64,
    fp: &FixedTimeParams,
) -> Result<Vector> {
    let s = residual::xi(p, w)?;
    if s.xi_norm <= DEFAULT_SING_GUARD {
        return Ok(w.clone());
    }
    let gain = tau_gain(fp, s.xi_norm);
    Ok(w.add_scaled(-theta * (fp.gd / fp.td) * gain, &s.xi))
}

/// Iteration indices at which V(w) = 0.5 ||w - wbar||^2 increased.
/// Nonempty output on a method with a known horizon is evidence the step
/// size exceeds the (existence-only) threshold theta*.
pub fn lyapunov_increase_steps(traj: &Trajectory, wbar: &Vector) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev = f64::INFINITY;
    for (n, s) in traj.samples.iter().enumerate() {
        let v = 0.5 * s.w.dist(wbar).powi(2);
        if v > prev {
            out.push(n);
        }
        prev = v;
    }
    out
}

/// Iterate until ||Xi(w_n)|| <= stop_tol or n = n_max, recording every
/// iterate. The time column holds the iteration index.
pub fn run(p: &ProblemInstance, mc: &MethodConfig, w0: &Vector) -> Result<Trajectory> {
    mc.validate()?;
    let mut samples = Vec::with_capacity(mc.n_max + 1);
    let mut w = w0.clone();
    let mut settled_at = None;

    let s0 = residual::xi(p, &w)?;
    samples.push(TrajectorySample {
        t: 0.0,
        w: w.clone(),
        xi_norm: s0.xi_norm,
        v_lyap: None,
    });
    if s0.xi_norm <= mc.stop_tol {
        return Ok(Trajectory {
            samples,
            settled_at: Some(0.0),
            regime: mc.describe(),
        });
    }

    for n in 1..=mc.n_max {
        w = match &mc.variant {
            MethodVariant::Alg2 { tau, theta, k } => step_alg2(p, &w, *tau, *theta, *k)?,
            MethodVariant::Eq29 { schedule, params } => {
                step_eq29(p, &w, schedule.at(n), params)?
            }
            MethodVariant::NominalIter { kappa_theta } => {
                step_alg2(p, &w, 1.0, *kappa_theta, 2.0)?
            }
        };
        if !w.is_finite() {
            return Err(Error::NonFiniteState {
                step: n,
                time: n as f64,
            });
        }
        let s = residual::xi(p, &w)?;
        samples.push(TrajectorySample {
            t: n as f64,
            w: w.clone(),
            xi_norm: s.xi_norm,
            v_lyap: None,
        });
        if s.xi_norm <= mc.stop_tol {
            settled_at = Some(n as f64);
            break;
        }
    }

    Ok(Trajectory {
        samples,
        settled_at,
        regime: mc.describe(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_example1;

    fn bench_gains(k3: f64) -> FixedTimeParams {
        FixedTimeParams::new(0.9, 0.5, 1e-4, 0.4, 1.5, k3, 1.0, 1.0).unwrap()
    }

    #[test]
    fn alg2_step_k2_hand_value() {
        let p = builtin_example1();
        let w = step_alg2(&p, &Vector::from_scalar(50.0), 1.0, 0.2, 2.0).unwrap();
        assert!((w[0] - 43.2).abs() < 1e-12, "got {}", w[0]);
    }

    #[test]
    fn alg2_step_k3_hand_value() {
        let p = builtin_example1();
        let w = step_alg2(&p, &Vector::from_scalar(50.0), 1.0, 0.2, 3.0).unwrap();
        let expect = 50.0 - 0.2 * 34.0f64.sqrt();
        assert!((w[0] - expect).abs() < 1e-12);
        assert!((w[0] - 48.834).abs() < 1e-3);
    }

    #[test]
    fn alg2_step_fixed_point() {
        let p = builtin_example1();
        let w = step_alg2(&p, &Vector::from_scalar(0.0), 1.0, 0.2, 3.0).unwrap();
        assert_eq!(w[0], 0.0);
    }

    #[test]
    fn eq29_step_hand_value() {
        let p = builtin_example1();
        let w = step_eq29(&p, &Vector::from_scalar(50.0), 0.01, &bench_gains(0.0)).unwrap();
        let gain = 0.9 * 34.0f64.powf(-0.6) + 0.5 * 34.0f64.sqrt() + 1e-4;
        let expect = 50.0 - 0.01 * gain * 34.0;
        assert!((w[0] - expect).abs() < 1e-12);
        assert!((w[0] - 48.97).abs() < 1e-2, "got {}", w[0]);
    }

    #[test]
    fn eq29_step_at_solution_and_degenerate_theta() {
        let p = builtin_example1();
        let w = step_eq29(&p, &Vector::from_scalar(0.0), 0.01, &bench_gains(0.0)).unwrap();
        assert_eq!(w[0], 0.0);
        let w = step_eq29(&p, &Vector::from_scalar(50.0), 0.0, &bench_gains(0.0)).unwrap();
        assert_eq!(w[0], 50.0);
    }

    #[test]
    fn run_starts_settled() {
        let p = builtin_example1();
        let mc = MethodConfig {
            variant: MethodVariant::Alg2 {
                tau: 1.0,
                theta: 0.2,
                k: 2.0,
            },
            n_max: 50,
            stop_tol: 1e-9,
        };
        let traj = run(&p, &mc, &Vector::from_scalar(0.0)).unwrap();
        assert_eq!(traj.settled_at, Some(0.0));
        assert_eq!(traj.samples.len(), 1);
    }

    #[test]
    fn eq29_paper_schedule_reproduction() {
        let p = builtin_example1();
        let mc = MethodConfig {
            variant: MethodVariant::Eq29 {
                schedule: ThetaSchedule::PaperSchedule { theta_min: 1e-4 },
                params: bench_gains(1.0),
            },
            n_max: 150,
            stop_tol: 1e-12,
        };
        let traj = run(&p, &mc, &Vector::from_scalar(50.0)).unwrap();
        let last = traj.samples.last().unwrap();
        assert!(last.w[0].abs() <= 1e-3, "final w = {}", last.w[0]);
    }

    #[test]
    fn alg2_bounded_chatter_k3() {
        let p = builtin_example1();
        let mc = MethodConfig {
            variant: MethodVariant::Alg2 {
                tau: 1.0,
                theta: 0.2,
                k: 3.0,
            },
            n_max: 150,
            stop_tol: 1e-12,
        };
        let traj = run(&p, &mc, &Vector::from_scalar(50.0)).unwrap();
        for s in &traj.samples {
            assert!(s.w[0].abs() <= 50.0);
        }
    }

    #[test]
    fn alg2_k2_geometric_residual_decay() {
        let p = builtin_example1();
        let mc = MethodConfig {
            variant: MethodVariant::Alg2 {
                tau: 1.0,
                theta: 0.2,
                k: 2.0,
            },
            n_max: 150,
            stop_tol: 1e-6,
        };
        let traj = run(&p, &mc, &Vector::from_scalar(50.0)).unwrap();
        for pair in traj.samples.windows(2) {
            if pair[0].xi_norm > 1e-6 {
                assert!(
                    pair[1].xi_norm <= 0.9 * pair[0].xi_norm + 1e-15,
                    "ratio {} at xi={}",
                    pair[1].xi_norm / pair[0].xi_norm,
                    pair[0].xi_norm
                );
            }
        }
    }

    #[test]
    fn fixed_point_consistency() {
        let p = builtin_example1();
        // any w with ||Xi|| > guard moves; the solution stays put
        for &w0 in &[0.5, -3.0, 42.0] {
            let w = Vector::from_scalar(w0);
            let next = step_alg2(&p, &w, 1.0, 0.1, 3.0).unwrap();
            assert_ne!(next[0], w[0], "w0 = {w0}");
            let next = step_eq29(&p, &w, 0.01, &bench_gains(0.0)).unwrap();
            assert_ne!(next[0], w[0], "w0 = {w0}");
        }
    }

    #[test]
    fn lyapunov_increase_diagnostic() {
        let p = builtin_example1();
        let wbar = Vector::from_scalar(0.0);
        // small theta: monotone decrease, no flags
        let mc = MethodConfig {
            variant: MethodVariant::Alg2 {
                tau: 1.0,
                theta: 0.2,
                k: 2.0,
            },
            n_max: 50,
            stop_tol: 1e-9,
        };
        let traj = run(&p, &mc, &Vector::from_scalar(50.0)).unwrap();
        assert!(lyapunov_increase_steps(&traj, &wbar).is_empty());
        // overshooting theta: V must bounce somewhere
        let mc = MethodConfig {
            variant: MethodVariant::Alg2 {
                tau: 1.0,
                theta: 3.5,
                k: 2.0,
            },
            n_max: 50,
            stop_tol: 1e-9,
        };
        let traj = run(&p, &mc, &Vector::from_scalar(50.0)).unwrap();
        assert!(!lyapunov_increase_steps(&traj, &wbar).is_empty());
    }

    #[test]
    fn divergent_theta_reports_non_finite() {
        let p = builtin_example1();
        let mc = MethodConfig {
            variant: MethodVariant::Alg2 {
                tau: 1.0,
                theta: 1e6,
                k: 2.0,
            },
            n_max: 2000,
            stop_tol: 1e-12,
        };
        match run(&p, &mc, &Vector::from_scalar(50.0)) {
            Err(Error::NonFiniteState { .. }) => {}
            other => panic!("expected NonFiniteState, got {other:?}"),
        }
    }
}
