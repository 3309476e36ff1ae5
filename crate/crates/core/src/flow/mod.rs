//! Local holomorphic vector fields in normal form and their real flows.
//!
//! Three model kinds are supported: the linear diagonal field
//! `l1*x dx + l2*y dy`, its polynomially perturbed variant
//! `l1*x*(1+e1(x,y)) dx + l2*y*(1+e2(x,y)) dy`, and the saddle-node normal
//! form `x^2 dx + y dy`. The real flow lives in four real dimensions
//! (re/im of each coordinate) inside the polydisc `|x| <= a, |y| <= b`.

mod experiments;
mod integrator;

pub use experiments::{
    composed_transit_experiment, crossing_point, monotonicity_check, nodal_separator_residual,
    saddle_node_approach, saturation_coverage, CornerLeg, CoveragePoint, CoverageReport, Crossing,
    GridSpec, MonotonicityReport, SeparatorReport, SeparatorSample, SnOutcome, TransitReport,
    TransitRun, TransitStep, TransversalSpec, MONOTONICITY_SLACK,
};
pub use integrator::{integrate, integrate_to_event, StepControl};

use serde::Serialize;
use thiserror::Error;

use crate::numeric::{complex_is_finite, Complex64};

#[derive(Debug, Error, PartialEq)]
pub enum FlowError {
    #[error("non-finite value in flow specification")]
    NonFinite,
    #[error("box radii must be positive")]
    InvalidBox,
    #[error("spec is not a saddle model: requires Re(l1) > 0 > Re(l2) on the box")]
    SpecNotSaddle,
    #[error("spec is not a node model: requires a real eigenvalue ratio > 0")]
    SpecNotNode,
    #[error("perturbation bound cannot certify the sign hypothesis on the box: {0}")]
    HypothesisNotCertified(String),
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("initial point is outside the domain box")]
    LeftDomainImmediately,
    #[error("trajectory left the box before reaching the target level")]
    NoCrossingInBox,
    #[error("step budget exhausted before the event")]
    MaxStepsExceeded,
    #[error("point lies on an invariant axis")]
    OnAxis,
    #[error("grid touches a coordinate axis; points must be off both axes")]
    GridOnAxis,
    #[error("invalid start: {0}")]
    InvalidStart(String),
    #[error(
        "saturation requires a model without nodes: eigenvalue ratio {0} is a node (real and positive)"
    )]
    NodeEigenvalue(f64),
    #[error("saturation requires a model without saddle-nodes: eigenvalue ratio is 0")]
    SaddleNodeEigenvalue,
}

/// Polynomial perturbation `sum c_k x^(i_k) y^(j_k)` with `i + j >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyPerturbation {
    terms: Vec<(u32, u32, [f64; 2])>,
}

impl PolyPerturbation {
    pub fn new(terms: Vec<(u32, u32, Complex64)>) -> Result<Self, FlowError> {
        if terms
            .iter()
            .any(|&(i, j, c)| i + j == 0 || !complex_is_finite(c))
        {
            return Err(FlowError::NonFinite);
        }
        Ok(PolyPerturbation {
            terms: terms
                .into_iter()
                .map(|(i, j, c)| (i, j, [c.re, c.im]))
                .collect(),
        })
    }

    pub fn zero() -> Self {
        PolyPerturbation { terms: Vec::new() }
    }

    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for &(i, j, c) in &self.terms {
            sum += Complex64::new(c[0], c[1]) * x.powu(i) * y.powu(j);
        }
        sum
    }

    /// Coarse sup bound of `|eval|` on the polydisc of radii (a, b).
    pub fn sup_bound(&self, a: f64, b: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(i, j, c)| {
                Complex64::new(c[0], c[1]).norm() * a.powi(i as i32) * b.powi(j as i32)
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FlowKind {
    LinearDiag {
        #[serde(with = "crate::numeric::complex_pair")]
        lambda1: Complex64,
        #[serde(with = "crate::numeric::complex_pair")]
        lambda2: Complex64,
    },
    PerturbedDiag {
        #[serde(with = "crate::numeric::complex_pair")]
        lambda1: Complex64,
        #[serde(with = "crate::numeric::complex_pair")]
        lambda2: Complex64,
        eps1: PolyPerturbation,
        eps2: PolyPerturbation,
    },
    SaddleNodeNormal,
}

/// A local model together with its domain box `|x| <= a, |y| <= b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSpec {
    pub kind: FlowKind,
    pub box_a: f64,
    pub box_b: f64,
}

impl FlowSpec {
    pub fn linear(
        lambda1: Complex64,
        lambda2: Complex64,
        box_a: f64,
        box_b: f64,
    ) -> Result<Self, FlowError> {
        if !complex_is_finite(lambda1) || !complex_is_finite(lambda2) {
            return Err(FlowError::NonFinite);
        }
        let spec = FlowSpec {
            kind: FlowKind::LinearDiag { lambda1, lambda2 },
            box_a,
            box_b,
        };
        spec.check_box()?;
        Ok(spec)
    }

    /// Linear saddle model: requires `Re(l1) > 0 > Re(l2)`.
    pub fn saddle(
        lambda1: Complex64,
        lambda2: Complex64,
        box_a: f64,
        box_b: f64,
    ) -> Result<Self, FlowError> {
        let spec = Self::linear(lambda1, lambda2, box_a, box_b)?;
        spec.certify_saddle()?;
        Ok(spec)
    }

    /// Perturbed saddle model; the sign hypothesis `Re(A) > 0 > Re(B)` is
    /// certified on the whole box by the coarse sup bound of the
    /// perturbations, and construction fails when the bound cannot close.
    pub fn perturbed_saddle(
        lambda1: Complex64,
        lambda2: Complex64,
        eps1: PolyPerturbation,
        eps2: PolyPerturbation,
        box_a: f64,
        box_b: f64,
    ) -> Result<Self, FlowError> {
        if !complex_is_finite(lambda1) || !complex_is_finite(lambda2) {
            return Err(FlowError::NonFinite);
        }
        let spec = FlowSpec {
            kind: FlowKind::PerturbedDiag {
                lambda1,
                lambda2,
                eps1,
                eps2,
            },
            box_a,
            box_b,
        };
        spec.check_box()?;
        spec.certify_saddle()?;
        Ok(spec)
    }

    pub fn saddle_node(box_a: f64, box_b: f64) -> Result<Self, FlowError> {
        let spec = FlowSpec {
            kind: FlowKind::SaddleNodeNormal,
            box_a,
            box_b,
        };
        spec.check_box()?;
        Ok(spec)
    }

    fn check_box(&self) -> Result<(), FlowError> {
        if self.box_a > 0.0 && self.box_b > 0.0 && self.box_a.is_finite() && self.box_b.is_finite()
        {
            Ok(())
        } else {
            Err(FlowError::InvalidBox)
        }
    }

    /// Certified bounds `(min Re A, max Re B)` on the box for saddle models.
    /// Fails for non-saddle kinds or when the perturbation bound cannot
    /// separate the signs.
    pub fn certify_saddle(&self) -> Result<(f64, f64), FlowError> {
        match &self.kind {
            FlowKind::LinearDiag { lambda1, lambda2 } => {
                if lambda1.re > 0.0 && lambda2.re < 0.0 {
                    Ok((lambda1.re, lambda2.re))
                } else {
                    Err(FlowError::SpecNotSaddle)
                }
            }
            FlowKind::PerturbedDiag {
                lambda1,
                lambda2,
                eps1,
                eps2,
            } => {
                if lambda1.re <= 0.0 || lambda2.re >= 0.0 {
                    return Err(FlowError::SpecNotSaddle);
                }
                let e1 = eps1.sup_bound(self.box_a, self.box_b);
                let e2 = eps2.sup_bound(self.box_a, self.box_b);
                let re_a_min = lambda1.re - lambda1.norm() * e1;
                let re_b_max = lambda2.re + lambda2.norm() * e2;
                if re_a_min > 0.0 && re_b_max < 0.0 {
                    Ok((re_a_min, re_b_max))
                } else {
                    Err(FlowError::HypothesisNotCertified(format!(
                        "Re(A) >= {re_a_min:.3e}, Re(B) <= {re_b_max:.3e} with |eps| <= ({e1:.3e}, {e2:.3e})"
                    )))
                }
            }
            FlowKind::SaddleNodeNormal => Err(FlowError::SpecNotSaddle),
        }
    }

    /// The field as a map on complex pairs.
    pub fn eval(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        match &self.kind {
            FlowKind::LinearDiag { lambda1, lambda2 } => (lambda1 * x, lambda2 * y),
            FlowKind::PerturbedDiag {
                lambda1,
                lambda2,
                eps1,
                eps2,
            } => (
                lambda1 * x * (Complex64::new(1.0, 0.0) + eps1.eval(x, y)),
                lambda2 * y * (Complex64::new(1.0, 0.0) + eps2.eval(x, y)),
            ),
            FlowKind::SaddleNodeNormal => (x * x, y),
        }
    }

    pub fn contains(&self, x: Complex64, y: Complex64) -> bool {
        x.norm() <= self.box_a && y.norm() <= self.box_b
    }
}

/// Which wall a trajectory left through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxExit {
    XWall,
    YWall,
}

/// A sampled real-flow orbit: strictly increasing (or decreasing, for
/// backward runs) times, points inside the box, and the exit event if the
/// run was stopped at the boundary.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub spec: FlowSpec,
    pub times: Vec<f64>,
    pub points: Vec<(Complex64, Complex64)>,
    pub exit: Option<(BoxExit, f64)>,
    pub rtol: f64,
    pub steps_accepted: usize,
}

impl Trajectory {
    pub fn last(&self) -> (f64, (Complex64, Complex64)) {
        (
            *self.times.last().expect("trajectory is never empty"),
            *self.points.last().expect("trajectory is never empty"),
        )
    }
}
