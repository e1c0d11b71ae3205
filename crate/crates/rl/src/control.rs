//! Multiplier controllers for the cost constraint.

/// Projected dual ascent on the Lagrange multiplier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LagrangeState {
    pub lambda: f64,
}

pub fn lagrange_update(state: LagrangeState, j_c: f64, budget: f64, rate: f64) -> LagrangeState {
    LagrangeState { lambda: (state.lambda + rate * (j_c - budget)).max(0.0) }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PidState {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Accumulated constraint error, never negative.
    pub integral: f64,
    pub prev_cost: f64,
}

impl PidState {
    pub fn new(kp: f64, ki: f64, kd: f64) -> Self {
        Self { kp, ki, kd, integral: 0.0, prev_cost: 0.0 }
    }
}

/// One controller step; returns the new state and the multiplier.
pub fn pid_update(state: PidState, j_c: f64, budget: f64) -> (PidState, f64) {
    let e = j_c - budget;
    let integral = (state.integral + e).max(0.0);
    let derivative = (j_c - state.prev_cost).max(0.0);
    let lambda = (state.kp * e + state.ki * integral + state.kd * derivative).max(0.0);
    (PidState { integral, prev_cost: j_c, ..state }, lambda)
}

/// Cost folded into the reward.
pub fn shape_cost_reward(r: f64, c: f64, kappa: f64) -> f64 {
    r - kappa * c
}
