//! Deficiency indices of the minimal Airy operator on a star graph.
//!
//! On a half-line the kernel of `A0* ∓ 1` is spanned by exponentials `e^{λx}`
//! with `αλ³ + βλ ± 1 = 0`; a solution is square integrable on `(−∞, 0)` when
//! `Re λ > 0` and on `(0, ∞)` when `Re λ < 0`.

use nalgebra::Matrix3;

use crate::graph_model::{Orientation, StarGraph};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfLine {
    NegAxis,
    PosAxis,
}

impl From<Orientation> for HalfLine {
    fn from(o: Orientation) -> Self {
        match o {
            Orientation::Incoming => HalfLine::NegAxis,
            Orientation::Outgoing => HalfLine::PosAxis,
        }
    }
}

/// Roots of `αλ³ + βλ + s = 0` as eigenvalues of the companion matrix.
pub fn cubic_roots(alpha: f64, beta: f64, s: f64) -> [C64; 3] {
    let comp = Matrix3::new(0.0, 0.0, -s / alpha, 1.0, 0.0, -beta / alpha, 0.0, 1.0, 0.0);
    let ev = comp.complex_eigenvalues();
    [ev[0], ev[1], ev[2]]
}

/// Number of independent `L²` solutions of `αu''' + βu' = sign·u` on the half-line.
pub fn count_l2_solutions(alpha: f64, beta: f64, sign: i8, halfline: HalfLine) -> usize {
    let s = if sign >= 0 { 1.0 } else { -1.0 };
    cubic_roots(alpha, beta, s)
        .iter()
        .filter(|z| match halfline {
            HalfLine::NegAxis => z.re > 0.0,
            HalfLine::PosAxis => z.re < 0.0,
        })
        .count()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeficiencyReport {
    pub n_plus: usize,
    pub n_minus: usize,
    /// `(edge id, count for sign +1, count for sign −1)`.
    pub per_edge: Vec<(String, usize, usize)>,
    pub balanced: bool,
}

pub fn deficiency_indices(g: &StarGraph) -> DeficiencyReport {
    let per_edge: Vec<_> = g
        .edges()
        .iter()
        .map(|e| {
            let hl = HalfLine::from(e.orientation);
            (e.id.clone(), count_l2_solutions(e.alpha, e.beta, 1, hl), count_l2_solutions(e.alpha, e.beta, -1, hl))
        })
        .collect();
    let n_plus = per_edge.iter().map(|p| p.1).sum();
    let n_minus = per_edge.iter().map(|p| p.2).sum();
    DeficiencyReport { n_plus, n_minus, per_edge, balanced: n_plus == n_minus }
}

/// Skew-adjoint extensions exist iff the deficiency indices agree.
pub fn balanced_check(g: &StarGraph) -> bool {
    deficiency_indices(g).balanced
}
