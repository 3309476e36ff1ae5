//! Flow experiments on the normal-form models: monotone moduli along saddle
//! trajectories, transversal crossings, nodal separator conservation,
//! saddle-node accumulation, leafwise saturation coverage and the composed
//! corner-transit experiment.

use serde::Serialize;

use crate::numeric::Complex64;

use super::integrator::{integrate, integrate_to_event, StepControl};
use super::{FlowError, FlowSpec, Trajectory};

/// Numeric slack allowed on the strict monotonicity of sampled moduli.
pub const MONOTONICITY_SLACK: f64 = 1e-9;

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    /// Largest increase of |y| between consecutive samples (0 when |y| is
    /// strictly decreasing).
    pub max_y_forward_step: f64,
    /// Largest decrease of |x| between consecutive samples.
    pub max_x_backward_step: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Check that `|x|` grows and `|y|` shrinks strictly along a saddle-model
/// trajectory started off both axes.
pub fn monotonicity_check(traj: &Trajectory) -> Result<MonotonicityReport, FlowError> {
    traj.spec.certify_saddle()?;
    let (x0, y0) = traj.points[0];
    if x0.norm() == 0.0 || y0.norm() == 0.0 {
        return Err(FlowError::OnAxis);
    }
    let mut max_x_backward_step = 0.0f64;
    let mut max_y_forward_step = 0.0f64;
    for pair in traj.points.windows(2) {
        let (x_prev, y_prev) = pair[0];
        let (x_next, y_next) = pair[1];
        max_x_backward_step = max_x_backward_step.max(x_prev.norm() - x_next.norm());
        max_y_forward_step = max_y_forward_step.max(y_next.norm() - y_prev.norm());
    }
    Ok(MonotonicityReport {
        max_y_forward_step,
        max_x_backward_step,
        samples: traj.points.len(),
        pass: max_x_backward_step <= MONOTONICITY_SLACK && max_y_forward_step <= MONOTONICITY_SLACK,
    })
}

#[derive(Debug, Clone)]
pub struct Crossing {
    pub t: f64,
    pub point: (Complex64, Complex64),
    pub trajectory: Trajectory,
}

/// Locate the unique intersection of the forward trajectory with the set
/// `{|x| = level}`. Requires a certified saddle model and `|x0| < level`.
pub fn crossing_point(
    spec: &FlowSpec,
    p0: (Complex64, Complex64),
    level: f64,
    ctrl: StepControl,
) -> Result<Crossing, FlowError> {
    let (re_a_min, _) = spec.certify_saddle()?;
    if !positive(level) || level > spec.box_a {
        return Err(FlowError::InvalidStart(format!(
            "crossing level {level} must lie inside the box (0, {}]",
            spec.box_a
        )));
    }
    if p0.0.norm() >= level {
        return Err(FlowError::InvalidStart(format!(
            "|x0| = {} must be below the crossing level {level}",
            p0.0.norm()
        )));
    }
    if p0.0.norm() == 0.0 {
        return Err(FlowError::OnAxis);
    }
    // |x| grows at least like exp(re_a_min * t).
    let t_max = (level / p0.0.norm()).ln() / re_a_min * 1.5 + 5.0;
    let (t, point, trajectory) =
        integrate_to_event(spec, p0, t_max, |x, _| x.norm() - level, ctrl)?;
    Ok(Crossing {
        t,
        point,
        trajectory,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparatorSample {
    pub t: f64,
    pub abs_x: f64,
    pub abs_y: f64,
    /// `c |x|^lambda` for the constant fixed by the start point.
    pub expected_abs_y: f64,
    pub drift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparatorReport {
    pub lambda: f64,
    pub c: f64,
    pub max_drift: f64,
    pub samples: Vec<SeparatorSample>,
}

/// Conservation of the separator level `|y| = c |x|^lambda` along the
/// trajectory of the linear node model `x dx + lambda y dy`, with `c` fixed
/// by the start point. Returns the sampled drift.
pub fn nodal_separator_residual(
    lambda: f64,
    p0: (Complex64, Complex64),
    t_range: (f64, f64),
    ctrl: StepControl,
) -> Result<SeparatorReport, FlowError> {
    if !positive(lambda) {
        return Err(FlowError::SpecNotNode);
    }
    if p0.0.norm() == 0.0 || p0.1.norm() == 0.0 {
        return Err(FlowError::OnAxis);
    }
    let (t_min, t_max) = t_range;
    if t_min > 0.0 || t_max < 0.0 {
        return Err(FlowError::InvalidStart(
            "time range must contain 0".to_string(),
        ));
    }
    // Closed-form growth bounds fix a box that contains the whole orbit.
    let box_a = p0.0.norm() * t_max.exp() * 1.2;
    let box_b = p0.1.norm() * (lambda * t_max).exp() * 1.2;
    let spec = FlowSpec::linear(
        Complex64::new(1.0, 0.0),
        Complex64::new(lambda, 0.0),
        box_a,
        box_b,
    )?;
    let c = p0.1.norm() / p0.0.norm().powf(lambda);

    let mut samples = Vec::new();
    let mut push = |traj: &Trajectory, skip_first: bool| {
        for (i, (&t, &(x, y))) in traj.times.iter().zip(&traj.points).enumerate() {
            if skip_first && i == 0 {
                continue;
            }
            let expected = c * x.norm().powf(lambda);
            samples.push(SeparatorSample {
                t,
                abs_x: x.norm(),
                abs_y: y.norm(),
                expected_abs_y: expected,
                drift: (y.norm() - expected).abs(),
            });
        }
    };
    let backward = integrate(&spec, p0, (0.0, t_min), ctrl)?;
    let forward = integrate(&spec, p0, (0.0, t_max), ctrl)?;
    push(&backward, false);
    push(&forward, true);
    samples.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
    let max_drift = samples.iter().map(|s| s.drift).fold(0.0, f64::max);
    Ok(SeparatorReport {
        lambda,
        c,
        max_drift,
        samples,
    })
}

/// Outcome of a saddle-node run: either the crossing of `{|y| = level}`, or
/// the flag that the start lay on the central manifold `{y = 0}` and can
/// never cross.
#[derive(Debug, Clone)]
pub enum SnOutcome {
    Crossing {
        t: f64,
        point: (Complex64, Complex64),
        abs_x: f64,
    },
    CentralManifold,
}

/// Flow the saddle-node normal form `x^2 dx + y dy` forward from a start
/// with real `x0 < 0` until `|y| = level`. As `|y0|` shrinks, the crossing
/// `|x|` shrinks toward 0: trajectories accumulate on the strong manifold
/// `{x = 0}`.
pub fn saddle_node_approach(
    p0: (Complex64, Complex64),
    level: f64,
    ctrl: StepControl,
) -> Result<SnOutcome, FlowError> {
    let (x0, y0) = p0;
    if x0.im != 0.0 || x0.re >= 0.0 {
        return Err(FlowError::InvalidStart(format!(
            "x0 must be real and negative, got {x0}"
        )));
    }
    if y0.norm() == 0.0 {
        return Ok(SnOutcome::CentralManifold);
    }
    if y0.norm() >= level {
        return Err(FlowError::InvalidStart(format!(
            "|y0| = {} must be below the target level {level}",
            y0.norm()
        )));
    }
    let spec = FlowSpec::saddle_node(x0.norm() * 1.05, level * 1.05)?;
    // |y| = |y0| e^t, so the crossing sits at t = ln(level/|y0|).
    let t_max = (level / y0.norm()).ln() + 5.0;
    let (t, point, _) = integrate_to_event(&spec, p0, t_max, |_, y| y.norm() - level, ctrl)?;
    Ok(SnOutcome::Crossing {
        t,
        point,
        abs_x: point.0.norm(),
    })
}

/// Transversal `{x = a, |y| < delta}` with the monodromy branch bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransversalSpec {
    pub a: f64,
    pub delta: f64,
    pub branch_bound: i32,
}

impl TransversalSpec {
    pub fn new(a: f64, delta: f64, branch_bound: i32) -> Result<Self, FlowError> {
        if !positive(a) || !positive(delta) || branch_bound < 0 {
            return Err(FlowError::InvalidBox);
        }
        Ok(TransversalSpec {
            a,
            delta,
            branch_bound,
        })
    }
}

/// Modulus/phase grid over the punctured polydisc, off both axes. Only the
/// phase of `x0` matters for coverage, so `y0` is sampled by modulus.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub moduli: usize,
    pub phases: usize,
}

impl GridSpec {
    pub fn new(r_min: f64, r_max: f64, moduli: usize, phases: usize) -> Result<Self, FlowError> {
        if !positive(r_min) || r_max < r_min || moduli == 0 || phases == 0 {
            return Err(FlowError::GridOnAxis);
        }
        Ok(GridSpec {
            r_min,
            r_max,
            moduli,
            phases,
        })
    }

    fn moduli_values(&self) -> Vec<f64> {
        if self.moduli == 1 {
            return vec![self.r_min];
        }
        (0..self.moduli)
            .map(|i| self.r_min + (self.r_max - self.r_min) * i as f64 / (self.moduli - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoveragePoint {
    pub abs_x0: f64,
    pub arg_x0: f64,
    pub abs_y0: f64,
    /// Transported |y| at the transversal level for the best branch.
    pub min_transported: f64,
    /// Branch of smallest |k| that lands inside the transversal disc.
    pub witness_branch: Option<i32>,
    pub covered: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageReport {
    pub coverage: f64,
    pub total: usize,
    pub covered: usize,
    pub points: Vec<CoveragePoint>,
}

/// Transported modulus of y when the leaf through (x0, y0) of the linear
/// model `x dx + lambda y dy` is continued to `x = a` along the branch `k`:
/// the first integral `y x^(-lambda)` gives
/// `|y0| |a/x0|^(Re lambda) exp(-Im lambda (Arg(a/x0) + 2 pi k))`.
fn transported_modulus(lambda: Complex64, x0: Complex64, abs_y0: f64, a: f64, k: i32) -> f64 {
    let ratio = Complex64::new(a, 0.0) / x0;
    let log_mod = ratio.norm().ln();
    let arg = ratio.arg() + 2.0 * std::f64::consts::PI * k as f64;
    abs_y0 * (lambda.re * log_mod - lambda.im * arg).exp()
}

/// Fraction of the grid whose leaves meet the transversal within the branch
/// bound, for a node-free linear model (saddle or hyperbolic eigenvalue
/// ratio). A real positive ratio is a node and is rejected, since coverage
/// of a punctured neighborhood requires a model without nodes.
pub fn saturation_coverage(
    lambda: Complex64,
    transversal: TransversalSpec,
    grid: GridSpec,
) -> Result<CoverageReport, FlowError> {
    if lambda.im == 0.0 {
        if lambda.re > 0.0 {
            return Err(FlowError::NodeEigenvalue(lambda.re));
        }
        if lambda.re == 0.0 {
            return Err(FlowError::SaddleNodeEigenvalue);
        }
    }
    let moduli = grid.moduli_values();
    let mut points = Vec::new();
    let mut covered = 0usize;
    for &abs_x0 in &moduli {
        for p in 0..grid.phases {
            let arg_x0 = 2.0 * std::f64::consts::PI * p as f64 / grid.phases as f64;
            let x0 = Complex64::from_polar(abs_x0, arg_x0);
            for &abs_y0 in &moduli {
                // Scan branches by increasing |k| so the witness is the
                // least monodromy winding that lands inside the disc.
                let mut witness = None;
                let mut best = f64::INFINITY;
                'branches: for magnitude in 0..=transversal.branch_bound {
                    for k in [magnitude, -magnitude] {
                        let value = transported_modulus(lambda, x0, abs_y0, transversal.a, k);
                        best = best.min(value);
                        if value < transversal.delta {
                            witness = Some(k);
                            break 'branches;
                        }
                        if magnitude == 0 {
                            break;
                        }
                    }
                }
                let is_covered = witness.is_some();
                covered += is_covered as usize;
                points.push(CoveragePoint {
                    abs_x0,
                    arg_x0,
                    abs_y0,
                    min_transported: best,
                    witness_branch: witness,
                    covered: is_covered,
                });
            }
        }
    }
    let total = points.len();
    Ok(CoverageReport {
        coverage: covered as f64 / total as f64,
        total,
        covered,
        points,
    })
}

/// One local corner model of a composed transit: a saddle chart crossed at
/// `{|x| = exit_radius}` measuring the exit distance to the destination axis
/// `{y = 0}`, or a saddle-node chart crossed at `{|y| = exit_height}`
/// measuring the distance to the strong manifold `{x = 0}`. The station is
/// where transported points re-enter the next chart.
#[derive(Debug, Clone, Copy)]
pub enum CornerLeg {
    Saddle {
        lambda1: Complex64,
        lambda2: Complex64,
        station: f64,
        exit_radius: f64,
    },
    SaddleNode {
        station: f64,
        exit_height: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct TransitStep {
    pub leg: usize,
    pub entry_height: f64,
    pub exit_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransitRun {
    pub height: f64,
    pub steps: Vec<TransitStep>,
    pub final_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransitReport {
    pub runs: Vec<TransitRun>,
    /// True when the final distances strictly decrease along the height
    /// sequence (vacuously true for a single height).
    pub distances_decreasing: bool,
}

/// Compose one or two corner transits: each start `(station_1, height_n)`
/// is pushed through the legs, the exit distance of one leg entering the
/// next leg at its station. Heights approaching 0 model a sequence of
/// points approaching the first invariant curve; the final distances then
/// approach 0, witnessing approach to the last separatrix.
pub fn composed_transit_experiment(
    legs: &[CornerLeg],
    heights: &[f64],
    ctrl: StepControl,
) -> Result<TransitReport, FlowError> {
    if legs.is_empty() || legs.len() > 2 {
        return Err(FlowError::InvalidStart(
            "the composed transit takes one or two corner models".to_string(),
        ));
    }
    if heights.is_empty() || !heights.iter().all(|&e| positive(e)) {
        return Err(FlowError::InvalidStart(
            "heights must be positive".to_string(),
        ));
    }
    let mut runs = Vec::new();
    for &height in heights {
        let mut distance = height;
        let mut steps = Vec::new();
        for (i, leg) in legs.iter().enumerate() {
            let entry_height = distance;
            distance = match *leg {
                CornerLeg::Saddle {
                    lambda1,
                    lambda2,
                    station,
                    exit_radius,
                } => {
                    let spec = FlowSpec::saddle(
                        lambda1,
                        lambda2,
                        exit_radius * 1.05,
                        entry_height * 1.5 + 1e-12,
                    )?;
                    let p0 = (
                        Complex64::new(station, 0.0),
                        Complex64::new(entry_height, 0.0),
                    );
                    let crossing = crossing_point(&spec, p0, exit_radius, ctrl)?;
                    crossing.point.1.norm()
                }
                CornerLeg::SaddleNode {
                    station,
                    exit_height,
                } => {
                    let p0 = (
                        Complex64::new(station, 0.0),
                        Complex64::new(entry_height, 0.0),
                    );
                    match saddle_node_approach(p0, exit_height, ctrl)? {
                        SnOutcome::Crossing { abs_x, .. } => abs_x,
                        SnOutcome::CentralManifold => 0.0,
                    }
                }
            };
            steps.push(TransitStep {
                leg: i,
                entry_height,
                exit_distance: distance,
            });
        }
        runs.push(TransitRun {
            height,
            steps,
            final_distance: distance,
        });
    }
    let distances_decreasing = runs
        .windows(2)
        .all(|w| w[1].final_distance < w[0].final_distance);
    Ok(TransitReport {
        runs,
        distances_decreasing,
    })
}
