//! Embedded 5(4) Runge-Kutta integration of the real flow, with a
//! fourth-order continuous extension used for event location by bisection.

use crate::numeric::Complex64;

use super::{BoxExit, FlowError, FlowSpec, Trajectory};

type State = [f64; 4];

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Stage abscissae are not needed: the fields here are autonomous.
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
// Continuous-extension weights.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step size; estimated from the field when absent.
    pub h_init: Option<f64>,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            max_steps: 1_000_000,
        }
    }
}

fn rhs(spec: &FlowSpec, s: &State) -> State {
    let (dx, dy) = spec.eval(Complex64::new(s[0], s[1]), Complex64::new(s[2], s[3]));
    [dx.re, dx.im, dy.re, dy.im]
}

fn axpy(y: &State, scale: f64, x: &State) -> State {
    [
        y[0] + scale * x[0],
        y[1] + scale * x[1],
        y[2] + scale * x[2],
        y[3] + scale * x[3],
    ]
}

/// One accepted step with its dense-output coefficients.
struct DenseStep {
    t0: f64,
    h: f64,
    rcont: [State; 5],
}

impl DenseStep {
    /// Interpolated state at `t0 + theta*h`, `theta` in [0, 1].
    fn eval(&self, theta: f64) -> State {
        let s = theta;
        let s1 = 1.0 - s;
        let mut out = [0.0; 4];
        for i in 0..4 {
            let r = &self.rcont;
            out[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
        }
        out
    }
}

struct Stepper<'a> {
    spec: &'a FlowSpec,
    ctrl: StepControl,
    t: f64,
    y: State,
    dydt: State,
    h: f64,
    direction: f64,
    steps_accepted: usize,
    steps_total: usize,
}

impl<'a> Stepper<'a> {
    fn new(spec: &'a FlowSpec, ctrl: StepControl, t0: f64, y0: State, t_end: f64) -> Self {
        let direction = if t_end >= t0 { 1.0 } else { -1.0 };
        let dydt = rhs(spec, &y0);
        let h = ctrl.h_init.map(|h| h.abs()).unwrap_or_else(|| {
            // Crude first-step guess from the field magnitude.
            let scale = (y0.iter().map(|v| v * v).sum::<f64>()).sqrt().max(1e-6);
            let speed = (dydt.iter().map(|v| v * v).sum::<f64>()).sqrt();
            (1e-3 * scale / speed.max(1e-12)).min((t_end - t0).abs().max(1e-6))
        });
        Stepper {
            spec,
            ctrl,
            t: t0,
            y: y0,
            dydt,
            h: h * direction,
            steps_accepted: 0,
            steps_total: 0,
            direction,
        }
    }

    /// Advance one accepted step, not beyond `t_end`. Returns the dense
    /// output, or None when `t_end` has been reached.
    fn step(&mut self, t_end: f64) -> Result<Option<DenseStep>, FlowError> {
        if (t_end - self.t) * self.direction <= 1e-300 {
            return Ok(None);
        }
        loop {
            self.steps_total += 1;
            if self.steps_total > self.ctrl.max_steps {
                return Err(FlowError::MaxStepsExceeded);
            }
            if self.h.abs() < 1e-14 * self.t.abs().max(1.0) {
                return Err(FlowError::StepUnderflow { t: self.t });
            }
            let mut h = self.h;
            if (self.t + h - t_end) * self.direction > 0.0 {
                h = t_end - self.t;
            }

            let mut k: [State; 7] = [[0.0; 4]; 7];
            k[0] = self.dydt;
            for stage in 0..6 {
                let mut ys = self.y;
                for (j, a) in A[stage].iter().enumerate().take(stage + 1) {
                    if *a != 0.0 {
                        ys = axpy(&ys, h * a, &k[j]);
                    }
                }
                k[stage + 1] = rhs(self.spec, &ys);
            }
            let mut y5 = self.y;
            let mut y4 = self.y;
            for j in 0..7 {
                if B5[j] != 0.0 {
                    y5 = axpy(&y5, h * B5[j], &k[j]);
                }
                if B4[j] != 0.0 {
                    y4 = axpy(&y4, h * B4[j], &k[j]);
                }
            }
            // k7 = f(t+h, y5) would be the FSAL stage; the tableau row for
            // stage 6 equals B5, so k[6] already is f(t+h, y5).
            let mut err = 0.0f64;
            for i in 0..4 {
                let tol = self.ctrl.atol + self.ctrl.rtol * self.y[i].abs().max(y5[i].abs());
                err = err.max(((y5[i] - y4[i]) / tol).abs());
            }

            let scale = if err == 0.0 {
                10.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 10.0)
            };
            if err <= 1.0 {
                let dy = [
                    y5[0] - self.y[0],
                    y5[1] - self.y[1],
                    y5[2] - self.y[2],
                    y5[3] - self.y[3],
                ];
                let mut rcont5 = [0.0; 4];
                for i in 0..4 {
                    rcont5[i] = h
                        * (D[0] * k[0][i]
                            + D[2] * k[2][i]
                            + D[3] * k[3][i]
                            + D[4] * k[4][i]
                            + D[5] * k[5][i]
                            + D[6] * k[6][i]);
                }
                let dense = DenseStep {
                    t0: self.t,
                    h,
                    rcont: [
                        self.y,
                        dy,
                        [
                            h * k[0][0] - dy[0],
                            h * k[0][1] - dy[1],
                            h * k[0][2] - dy[2],
                            h * k[0][3] - dy[3],
                        ],
                        [
                            dy[0] - h * k[6][0] - (h * k[0][0] - dy[0]),
                            dy[1] - h * k[6][1] - (h * k[0][1] - dy[1]),
                            dy[2] - h * k[6][2] - (h * k[0][2] - dy[2]),
                            dy[3] - h * k[6][3] - (h * k[0][3] - dy[3]),
                        ],
                        rcont5,
                    ],
                };
                self.t += h;
                self.y = y5;
                self.dydt = k[6];
                self.h = h * scale;
                self.steps_accepted += 1;
                return Ok(Some(dense));
            }
            self.h = h * scale;
        }
    }
}

fn to_pair(s: &State) -> (Complex64, Complex64) {
    (Complex64::new(s[0], s[1]), Complex64::new(s[2], s[3]))
}

/// Locate a zero of `g` inside a dense step by bisection, given a sign
/// change between `theta_lo` and `theta_hi`.
fn bisect(dense: &DenseStep, g: &dyn Fn(&State) -> f64, mut lo: f64, mut hi: f64) -> (f64, State) {
    let mut g_lo = g(&dense.eval(lo));
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(&dense.eval(mid));
        if g_mid == 0.0 {
            lo = mid;
            break;
        }
        if (g_lo < 0.0) == (g_mid < 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() < 1e-16 {
            break;
        }
    }
    let theta = 0.5 * (lo + hi);
    (dense.t0 + theta * dense.h, dense.eval(theta))
}

fn box_violation(spec: &FlowSpec, s: &State) -> Option<BoxExit> {
    let (x, y) = to_pair(s);
    if x.norm() > spec.box_a {
        Some(BoxExit::XWall)
    } else if y.norm() > spec.box_b {
        Some(BoxExit::YWall)
    } else {
        None
    }
}

/// Integrate the real flow from `p0` over `[t0, t1]` (either direction),
/// recording accepted steps. Integration stops at the box boundary and
/// reports the exit wall.
pub fn integrate(
    spec: &FlowSpec,
    p0: (Complex64, Complex64),
    t_range: (f64, f64),
    ctrl: StepControl,
) -> Result<Trajectory, FlowError> {
    if !spec.contains(p0.0, p0.1) {
        return Err(FlowError::LeftDomainImmediately);
    }
    let y0 = [p0.0.re, p0.0.im, p0.1.re, p0.1.im];
    let (t0, t1) = t_range;
    let mut stepper = Stepper::new(spec, ctrl, t0, y0, t1);
    let mut times = vec![t0];
    let mut points = vec![p0];
    let mut exit = None;

    while let Some(dense) = stepper.step(t1)? {
        let end_state = dense.eval(1.0);
        if let Some(wall) = box_violation(spec, &end_state) {
            // Walk back to the wall crossing.
            let g: Box<dyn Fn(&State) -> f64> = match wall {
                BoxExit::XWall => {
                    let a = spec.box_a;
                    Box::new(move |s: &State| (s[0] * s[0] + s[1] * s[1]).sqrt() - a)
                }
                BoxExit::YWall => {
                    let b = spec.box_b;
                    Box::new(move |s: &State| (s[2] * s[2] + s[3] * s[3]).sqrt() - b)
                }
            };
            let (t_exit, s_exit) = bisect(&dense, &g, 0.0, 1.0);
            times.push(t_exit);
            points.push(to_pair(&s_exit));
            exit = Some((wall, t_exit));
            break;
        }
        times.push(stepper.t);
        points.push(to_pair(&stepper.y));
    }

    Ok(Trajectory {
        spec: spec.clone(),
        times,
        points,
        exit,
        rtol: ctrl.rtol,
        steps_accepted: stepper.steps_accepted,
    })
}

/// Integrate forward until the scalar event `g(x, y)` changes sign, and
/// locate the crossing on the dense output. The search fails when the
/// trajectory leaves the box or `t_max` passes before the event.
pub fn integrate_to_event(
    spec: &FlowSpec,
    p0: (Complex64, Complex64),
    t_max: f64,
    event: impl Fn(Complex64, Complex64) -> f64,
    ctrl: StepControl,
) -> Result<(f64, (Complex64, Complex64), Trajectory), FlowError> {
    if !spec.contains(p0.0, p0.1) {
        return Err(FlowError::LeftDomainImmediately);
    }
    let y0 = [p0.0.re, p0.0.im, p0.1.re, p0.1.im];
    let g_state = |s: &State| {
        let (x, y) = to_pair(s);
        event(x, y)
    };
    let mut stepper = Stepper::new(spec, ctrl, 0.0, y0, t_max);
    let mut times = vec![0.0];
    let mut points = vec![p0];
    let mut g_prev = g_state(&y0);
    if g_prev == 0.0 {
        let traj = Trajectory {
            spec: spec.clone(),
            times,
            points,
            exit: None,
            rtol: ctrl.rtol,
            steps_accepted: 0,
        };
        return Ok((0.0, p0, traj));
    }

    while let Some(dense) = stepper.step(t_max)? {
        let g_new = g_state(&stepper.y);
        if (g_prev < 0.0) != (g_new < 0.0) || g_new == 0.0 {
            let (t_cross, s_cross) = bisect(&dense, &g_state, 0.0, 1.0);
            times.push(t_cross);
            points.push(to_pair(&s_cross));
            let traj = Trajectory {
                spec: spec.clone(),
                times,
                points,
                exit: None,
                rtol: ctrl.rtol,
                steps_accepted: stepper.steps_accepted,
            };
            return Ok((t_cross, to_pair(&s_cross), traj));
        }
        if box_violation(spec, &stepper.y).is_some() {
            return Err(FlowError::NoCrossingInBox);
        }
        times.push(stepper.t);
        points.push(to_pair(&stepper.y));
        g_prev = g_new;
    }
    Err(FlowError::NoCrossingInBox)
}
