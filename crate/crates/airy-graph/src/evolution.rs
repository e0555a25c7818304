//! Crank–Nicolson time stepping of the constrained semi-discrete system,
//! observables, and a dense matrix-exponential reference solution.
//!
//! The semi-discrete problem is `H u_t = (H A_h) u − Cᴴλ`, `C u = 0`. One
//! Crank–Nicolson step solves the saddle system
//! `[H − dt/2·HA, Cᴴ; C, 0] [u⁺; λ] = [(H + dt/2·HA) u; 0]`, which gives
//! `‖u⁺‖²_H − ‖u‖²_H = dt · (boundary form at the midpoint state)`.

use thiserror::Error;

use crate::discretization::{DiscreteSystem, SaddleLayout};
use crate::graph_model::{unflatten_trace, BoundaryTrace, Orientation, Side};
use crate::krein_bc::flux_functional;
use crate::linalg::{expm, BandedLu, LinalgError};
use crate::{CMat, CVec, C64};

/// Dense reference solutions are refused above this many unknowns.
pub const ORACLE_MAX_UNKNOWNS: usize = 2000;
/// Default number of steps between recorded observables.
pub const DEFAULT_RECORD_EVERY: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolutionError {
    #[error("time step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("linear solve failed: {0}")]
    SolveFailed(String),
    #[error("{0} unknowns exceed the dense limit of {ORACLE_MAX_UNKNOWNS}")]
    TooLarge(usize),
    #[error("state has length {got}, system has {want} unknowns")]
    BadState { got: usize, want: usize },
}

impl From<LinalgError> for EvolutionError {
    fn from(e: LinalgError) -> Self {
        EvolutionError::SolveFailed(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableRecord {
    pub t: f64,
    /// `uᴴ H u`, the discrete `‖u‖²`.
    pub momentum: f64,
    /// `Σ H_i u_i`, the discrete `∫ u`.
    pub mass: C64,
    pub minus: BoundaryTrace,
    pub plus: BoundaryTrace,
    /// The flux functional evaluated on the discrete vertex traces.
    pub mass_flux: C64,
    /// `⟨y∣y⟩+ − ⟨x∣x⟩−` on the discrete vertex traces.
    pub vertex_power: f64,
    /// Momentum removed so far through the far-end truncation rows.
    pub farend_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    pub t: f64,
    pub steps: usize,
    pub u: Vec<C64>,
    pub farend_loss: f64,
    pub history: Vec<ObservableRecord>,
}

fn end_form(alpha: f64, beta: f64, u0: C64, u1: C64, u2: C64) -> f64 {
    alpha * (2.0 * (u0.conj() * u2).re - u1.norm_sqr()) + beta * u0.norm_sqr()
}

/// `[α(2 Re ū u'' − |u'|²) + β|u|²]` summed over the edges of one side.
fn side_form(sys: &DiscreteSystem, side: Side, t: &BoundaryTrace) -> f64 {
    sys.graph
        .side_edges(side)
        .iter()
        .enumerate()
        .map(|(i, e)| end_form(e.alpha, e.beta, t.u0[i], t.u1[i], t.u2[i]))
        .sum()
}

/// Rate of change of `‖u‖²_H` produced by the far-end rows: the outgoing far
/// end with `u = 0` contributes `−α|u'|²`, the incoming one vanishes.
pub fn farend_power(sys: &DiscreteSystem, u: &[C64]) -> f64 {
    let grid = &sys.grid;
    let (n, h) = (grid.n_points(), grid.spec.h());
    let mut p = 0.0;
    for (e, edge) in sys.graph.edges().iter().enumerate() {
        let at = |j: usize| u[grid.index(e, j)];
        let tr = match edge.orientation {
            Orientation::Outgoing => crate::discretization::right_traces(n, h),
            Orientation::Incoming => crate::discretization::left_traces(n, h),
        };
        let ev = |k: usize| tr[k].iter().map(|&(j, w)| at(j) * w).sum::<C64>();
        let f = end_form(edge.alpha, edge.beta, ev(0), ev(1), ev(2));
        p += match edge.orientation {
            Orientation::Outgoing => f,
            Orientation::Incoming => -f,
        };
    }
    p
}

pub fn observables(sys: &DiscreteSystem, t: f64, u: &[C64], farend_loss: f64) -> ObservableRecord {
    let momentum = u.iter().zip(&sys.weights).map(|(z, w)| w * z.norm_sqr()).sum();
    let mass = u.iter().zip(&sys.weights).map(|(z, w)| z * w).sum();
    let tm = CVec::from_vec(sys.trace_minus.mul_vec(u));
    let tp = CVec::from_vec(sys.trace_plus.mul_vec(u));
    let minus = unflatten_trace(Side::Minus, &tm).expect("trace length is a multiple of 3");
    let plus = unflatten_trace(Side::Plus, &tp).expect("trace length is a multiple of 3");
    let phi = flux_functional(&sys.graph);
    let mass_flux = tm.iter().chain(tp.iter()).zip(phi.iter()).map(|(x, w)| x * w).sum();
    let vertex_power = side_form(sys, Side::Minus, &minus) - side_form(sys, Side::Plus, &plus);
    ObservableRecord { t, momentum, mass, minus, plus, mass_flux, vertex_power, farend_loss }
}

/// `H`-orthogonal projection onto `ker C`.
pub fn project_initial(sys: &DiscreteSystem, u: &[C64]) -> Result<Vec<C64>, EvolutionError> {
    let c = sys.constraints();
    let hinv: Vec<f64> = sys.weights.iter().map(|w| 1.0 / w).collect();
    let m = c.nrows();
    let mut gram = CMat::zeros(m, m);
    for (i, ri) in c.rows.iter().enumerate() {
        for (k, rk) in c.rows.iter().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for &(j, w) in ri {
                for &(j2, w2) in rk {
                    if j == j2 {
                        s += w * w2.conj() * hinv[j];
                    }
                }
            }
            gram[(i, k)] = s;
        }
    }
    let cu = CVec::from_vec(c.mul_vec(u));
    let y =
        gram.lu().solve(&cu).ok_or_else(|| EvolutionError::SolveFailed("singular constraint Gram matrix".into()))?;
    let mut out = u.to_vec();
    for (r, row) in c.rows.iter().enumerate() {
        for &(j, w) in row {
            out[j] -= w.conj() * y[r] * hinv[j];
        }
    }
    Ok(out)
}

/// Fixed-step Crank–Nicolson integrator with a factored saddle matrix.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub sys: DiscreteSystem,
    pub dt: f64,
    layout: SaddleLayout,
    lu: BandedLu,
}

impl Simulation {
    pub fn new(sys: DiscreteSystem, dt: f64) -> Result<Self, EvolutionError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(EvolutionError::BadStep(dt));
        }
        let layout = sys.saddle_layout();
        let mut trip = Vec::new();
        for (i, row) in sys.ha.rows.iter().enumerate() {
            let pi = layout.node_pos[i];
            trip.push((pi, pi, C64::new(sys.weights[i], 0.0)));
            for &(j, w) in row {
                trip.push((pi, layout.node_pos[j], -w * (0.5 * dt)));
            }
        }
        for (r, row) in sys.constraints().rows.iter().enumerate() {
            let pr = layout.multiplier_pos(r);
            for &(j, w) in row {
                let pj = layout.node_pos[j];
                trip.push((pr, pj, w));
                trip.push((pj, pr, w.conj()));
            }
        }
        let lu = BandedLu::factor(layout.dim(), &trip)?;
        Ok(Simulation { sys, dt, layout, lu })
    }

    /// Projects `u0` onto the constraints and records the initial observables.
    pub fn start(&self, u0: &[C64]) -> Result<SimulationState, EvolutionError> {
        if u0.len() != self.sys.len() {
            return Err(EvolutionError::BadState { got: u0.len(), want: self.sys.len() });
        }
        let u = project_initial(&self.sys, u0)?;
        let rec = observables(&self.sys, 0.0, &u, 0.0);
        Ok(SimulationState { t: 0.0, steps: 0, u, farend_loss: 0.0, history: vec![rec] })
    }

    /// One step; the caller decides whether to record.
    pub fn step_crank_nicolson(&self, state: &mut SimulationState) -> Result<(), EvolutionError> {
        let sys = &self.sys;
        let hu = sys.ha.mul_vec(&state.u);
        let mut rhs = vec![C64::new(0.0, 0.0); self.layout.dim()];
        for i in 0..sys.len() {
            rhs[self.layout.node_pos[i]] = state.u[i] * sys.weights[i] + hu[i] * (0.5 * self.dt);
        }
        self.lu.solve_in_place(&mut rhs);
        let next: Vec<C64> = (0..sys.len()).map(|i| rhs[self.layout.node_pos[i]]).collect();
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(EvolutionError::SolveFailed(format!("non-finite state at step {}", state.steps + 1)));
        }
        let mid: Vec<C64> = next.iter().zip(&state.u).map(|(a, b)| (a + b) * 0.5).collect();
        state.farend_loss -= self.dt * farend_power(sys, &mid);
        state.u = next;
        state.steps += 1;
        state.t = state.steps as f64 * self.dt;
        Ok(())
    }

    /// Advances `n_steps`, recording every `record_every` steps and at the end.
    pub fn advance(
        &self,
        state: &mut SimulationState,
        n_steps: usize,
        record_every: usize,
    ) -> Result<(), EvolutionError> {
        let every = record_every.max(1);
        for k in 1..=n_steps {
            self.step_crank_nicolson(state)?;
            if k % every == 0 || k == n_steps {
                state.history.push(observables(&self.sys, state.t, &state.u, state.farend_loss));
            }
        }
        Ok(())
    }

    pub fn run(&self, u0: &[C64], n_steps: usize, record_every: usize) -> Result<SimulationState, EvolutionError> {
        let mut s = self.start(u0)?;
        self.advance(&mut s, n_steps, record_every)?;
        Ok(s)
    }
}

/// Number of steps of size `dt` needed to reach `t_end`.
pub fn steps_for(t_end: f64, dt: f64) -> usize {
    (t_end / dt - 1e-9).ceil().max(0.0) as usize
}

/// `exp(t·Π S Π)` applied in the coordinates `w = H^{1/2} u`, where
/// `S = H^{−1/2}(H A_h)H^{−1/2}` and `Π` projects onto `ker(C H^{−1/2})`.
pub fn expm_oracle(sys: &DiscreteSystem, u0: &[C64], t: f64) -> Result<Vec<C64>, EvolutionError> {
    let n = sys.len();
    if n > ORACLE_MAX_UNKNOWNS {
        return Err(EvolutionError::TooLarge(n));
    }
    if u0.len() != n {
        return Err(EvolutionError::BadState { got: u0.len(), want: n });
    }
    if t == 0.0 {
        return Ok(u0.to_vec());
    }
    let sq: Vec<f64> = sys.weights.iter().map(|w| w.sqrt()).collect();
    let mut s = sys.dense_ha();
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] /= sq[i] * sq[j];
        }
    }
    let mut gmat = sys.constraints().to_dense();
    for j in 0..n {
        for i in 0..gmat.nrows() {
            gmat[(i, j)] /= sq[j];
        }
    }
    let gram = &gmat * gmat.adjoint();
    let sol =
        gram.lu().solve(&gmat).ok_or_else(|| EvolutionError::SolveFailed("singular constraint Gram matrix".into()))?;
    let pi = CMat::identity(n, n) - gmat.adjoint() * sol;
    let b = &pi * s * &pi * C64::new(t, 0.0);
    let e = expm(&b)?;
    let w0 = CVec::from_iterator(n, u0.iter().zip(&sq).map(|(z, r)| z * *r));
    let w = e * (&pi * w0);
    Ok(w.iter().zip(&sq).map(|(z, r)| z / *r).collect())
}

/// Runs the scheme from real data and returns `max_t ‖Im u(t)‖∞`.
pub fn realness_check(sim: &Simulation, u0_real: &[f64], t_end: f64) -> Result<f64, EvolutionError> {
    let u0: Vec<C64> = u0_real.iter().map(|&x| C64::new(x, 0.0)).collect();
    let mut s = sim.start(&u0)?;
    let imag = |u: &[C64]| u.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let mut worst = imag(&s.u);
    for _ in 0..steps_for(t_end, sim.dt) {
        sim.step_crank_nicolson(&mut s)?;
        worst = worst.max(imag(&s.u));
    }
    Ok(worst)
}

/// Fraction of a Gaussian's spectrum treated as negligible when estimating its
/// largest wavenumber.
pub const SPECTRAL_CUTOFF: f64 = 1e-6;

/// Time before the fastest resolved wave packet of a Gaussian of the given
/// width can travel half the truncated edge length: `0.5·X / c_est` with
/// `c_est = max_e (3α k² + |β|)`.
pub fn contamination_window(sys: &DiscreteSystem, width: f64) -> f64 {
    let h = sys.grid.spec.h();
    let k = ((2.0 * (1.0 / SPECTRAL_CUTOFF).ln()).sqrt() / width).min(std::f64::consts::PI / h);
    let c = sys.graph.edges().iter().map(|e| 3.0 * e.alpha * k * k + e.beta.abs()).fold(0.0, f64::max);
    0.5 * sys.grid.spec.length / c
}

/// Samples `f(edge index, x)` on every node, `x` in the edge's own chart.
pub fn sample(sys: &DiscreteSystem, f: impl Fn(usize, f64) -> C64) -> Vec<C64> {
    let mut u = Vec::with_capacity(sys.len());
    for (e, xs) in sys.grid.coords.iter().enumerate() {
        u.extend(xs.iter().map(|&x| f(e, x)));
    }
    u
}

/// `A·exp(−(x − c)²/(2w²))`.
pub fn gaussian(x: f64, center: f64, width: f64, amplitude: f64) -> f64 {
    amplitude * (-(x - center).powi(2) / (2.0 * width * width)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::GridSpec;
    use crate::graph_model::{Edge, StarGraph};
    use crate::krein_bc::{SeparatedCondition, VertexCondition};
    use crate::linalg::vec_from;

    fn system(u: f64, n: usize) -> DiscreteSystem {
        let g = StarGraph::new(vec![Edge::incoming("m", 1.0, 0.0), Edge::outgoing("p", 1.0, 0.0)]);
        let cond = VertexCondition::Separated(SeparatedCondition {
            y_basis: vec![vec_from(&[1.0, 1.0])],
            u: CMat::from_element(1, 1, C64::new(u, 0.0)),
        });
        DiscreteSystem::assemble(&g, &cond, GridSpec::new(12.0, n).unwrap()).unwrap()
    }

    #[test]
    fn zero_stays_zero() {
        let sim = Simulation::new(system(1.0, 40), 0.01).unwrap();
        let s = sim.run(&vec![C64::new(0.0, 0.0); 80], 20, 5).unwrap();
        assert!(s.u.iter().all(|z| *z == C64::new(0.0, 0.0)));
        assert_eq!(s.history.len(), 5);
        assert!((s.t - 0.2).abs() < 1e-15);
    }

    #[test]
    fn projection_satisfies_constraints() {
        let sys = system(0.5, 40);
        let u = sample(&sys, |e, x| C64::new(1.0 + x * 0.1 + e as f64, 0.3));
        let p = project_initial(&sys, &u).unwrap();
        let res: f64 = sys.constraints().mul_vec(&p).iter().map(|z| z.norm()).sum();
        assert!(res < 1e-10);
        let pp = project_initial(&sys, &p).unwrap();
        assert!(pp.iter().zip(&p).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn energy_budget_is_exact() {
        let sys = system(0.5, 60);
        let sim = Simulation::new(sys, 0.005).unwrap();
        let u0 = sample(&sim.sys, |_, x| C64::new(gaussian(x, -2.0, 0.8, 1.0), 0.0));
        let mut s = sim.start(&u0).unwrap();
        let m0 = s.history[0].momentum;
        let mut prev = m0;
        for _ in 0..200 {
            let before = s.u.clone();
            sim.step_crank_nicolson(&mut s).unwrap();
            let mid: Vec<C64> = s.u.iter().zip(&before).map(|(a, b)| (a + b) * 0.5).collect();
            let rec = observables(&sim.sys, s.t, &s.u, s.farend_loss);
            let vp = observables(&sim.sys, s.t, &mid, 0.0).vertex_power;
            let fp = farend_power(&sim.sys, &mid);
            assert!((rec.momentum - prev - sim.dt * (vp + fp)).abs() < 1e-11 * m0);
            assert!(vp <= 1e-12 && fp <= 1e-12);
            prev = rec.momentum;
        }
    }

    #[test]
    fn oracle_identity_and_limit() {
        let sys = system(1.0, 20);
        let u0 = project_initial(&sys, &sample(&sys, |_, x| C64::new(gaussian(x, -3.0, 1.5, 1.0), 0.0))).unwrap();
        assert_eq!(expm_oracle(&sys, &u0, 0.0).unwrap(), u0);
        let big = system(1.0, 1001);
        assert_eq!(expm_oracle(&big, &vec![C64::new(0.0, 0.0); 2002], 1.0), Err(EvolutionError::TooLarge(2002)));
    }

    #[test]
    fn window_shrinks_for_narrow_data() {
        let sys = system(1.0, 200);
        let wide = contamination_window(&sys, 2.0);
        let narrow = contamination_window(&sys, 1.0);
        assert!(narrow < wide && narrow > 0.0);
        assert_eq!(steps_for(1.0, 0.1), 10);
        assert_eq!(steps_for(0.0, 0.1), 0);
    }
}
