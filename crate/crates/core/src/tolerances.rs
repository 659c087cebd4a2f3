use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by every stage of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Slack allowed outside `[-1, 1]` before a point counts as escaped.
    pub domain: f64,
    /// Smallest derivative magnitude accepted in a quotient.
    pub derivative: f64,
    /// Containment, disjointness and normalization slack for renormalization.
    pub renorm: f64,
    /// Smallest interval length treated as non-degenerate.
    pub conditioning: f64,
    /// Residual accepted from the periodic-point solver.
    pub root: f64,
    /// Residual accepted for `f^{m_k}(p_k) = p_k` in base coordinates.
    pub periodic: f64,
    /// Landmark alignment slack for the induced map.
    pub markov: f64,
    /// Radius around the critical point excluded from nonlinearity sampling.
    pub critical: f64,
    /// Iteration budget of the bisection solvers.
    pub bisection_budget: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            domain: 1e-9,
            derivative: 1e-12,
            renorm: 1e-9,
            conditioning: 1e-12,
            root: 1e-10,
            periodic: 1e-8,
            markov: 1e-7,
            critical: 1e-4,
            bisection_budget: 200,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("domain", self.domain),
            ("derivative", self.derivative),
            ("renorm", self.renorm),
            ("conditioning", self.conditioning),
            ("root", self.root),
            ("periodic", self.periodic),
            ("markov", self.markov),
            ("critical", self.critical),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(format!("tolerance `{name}` must be positive, got {value}"));
            }
        }
        if self.bisection_budget == 0 {
            return Err("bisection budget must be positive".into());
        }
        Ok(())
    }
}
