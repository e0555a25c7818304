//! Worked examples of vertex conditions with their predicted classification.
//!
//! Expected verdicts come from the scalar criteria stated for each family
//! (weighted norms of `U`, relations among the `β`), evaluated here directly
//! and independently of the Krein-space machinery in [`crate::krein_bc`].

use crate::graph_model::{Edge, StarGraph};
use crate::krein_bc::{GeneralCondition, MassConservation, SeparatedCondition, Verdict, VertexCondition};
use crate::linalg::vec_from;
use crate::{CMat, CVec, C64};

/// Tolerance for the scalar equalities in the closed-form criteria.
const RULE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub id: u32,
    pub name: String,
    pub graph: StarGraph,
    pub condition: VertexCondition,
    pub expected_verdict: Verdict,
    pub expected_mass: MassConservation,
    /// The criterion the expectation rests on, as stated for the example.
    pub statement: &'static str,
    /// Parameter values used by this instance.
    pub defaults: String,
}

impl CatalogEntry {
    /// Mass verdicts match by kind; the text of a `Conditional` is not compared.
    pub fn mass_matches(&self, got: &MassConservation) -> bool {
        self.expected_mass.tag() == got.tag()
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn scalar(u: C64) -> CMat {
    CMat::from_element(1, 1, u)
}

fn two(am: f64, bm: f64, ap: f64, bp: f64) -> StarGraph {
    StarGraph::new(vec![Edge::incoming("in", am, bm), Edge::outgoing("out", ap, bp)])
}

fn three(am: f64, bm: f64, ap: [f64; 2], bp: [f64; 2]) -> StarGraph {
    StarGraph::new(vec![
        Edge::incoming("in", am, bm),
        Edge::outgoing("out1", ap[0], bp[0]),
        Edge::outgoing("out2", ap[1], bp[1]),
    ])
}

/// Verdict from `Σ|U_i|²α+,i` against `α−`.
fn weighted_rule(norm2: f64, am: f64, balanced: bool) -> Verdict {
    if balanced && (norm2 - am).abs() <= RULE_TOL * am {
        Verdict::SkewAdjoint
    } else if norm2 <= am * (1.0 + RULE_TOL) {
        Verdict::ContractionGenerator
    } else {
        Verdict::NotGenerator
    }
}

fn iff(cond: bool, relation: &str) -> MassConservation {
    if cond {
        MassConservation::Always
    } else {
        MassConservation::Conditional(relation.to_string())
    }
}

fn sep(y: Vec<CVec>, u: CMat) -> VertexCondition {
    VertexCondition::Separated(SeparatedCondition { y_basis: y, u })
}

fn fmt_c(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

/// Two half-lines, `u(0−) = u(0+) = 0`, `u'(0+) = U u'(0−)`.
pub fn two_halflines_dirichlet(am: f64, bm: f64, ap: f64, bp: f64, u: C64) -> CatalogEntry {
    CatalogEntry {
        id: 1,
        name: "two-halflines/Y=0".into(),
        graph: two(am, bm, ap, bp),
        condition: sep(vec![], scalar(u)),
        expected_verdict: weighted_rule(u.norm_sqr() * ap, am, true),
        expected_mass: MassConservation::Never,
        statement: "contraction iff |U|² ≤ α−/α+, unitary iff |U|² = α−/α+",
        defaults: format!("α=({am},{ap}), β=({bm},{bp}), U={}", fmt_c(u)),
    }
}

/// Two half-lines, `Y = lin{(0,1)}`: Dirichlet on the incoming edge and
/// `α+u''(0+) = −β+/2·u(0+)` on the outgoing one.
pub fn two_halflines_y01(am: f64, bm: f64, ap: f64, bp: f64, u: C64) -> CatalogEntry {
    CatalogEntry {
        id: 2,
        name: "two-halflines/Y=(0,1)".into(),
        graph: two(am, bm, ap, bp),
        condition: sep(vec![vec_from(&[0.0, 1.0])], scalar(u)),
        expected_verdict: weighted_rule(u.norm_sqr() * ap, am, true),
        expected_mass: MassConservation::Never,
        statement: "u(0−) = 0, u''(0+)α+ = −β+/2 u(0+)",
        defaults: format!("α=({am},{ap}), β=({bm},{bp}), U={}", fmt_c(u)),
    }
}

/// Mirror of [`two_halflines_y01`].
pub fn two_halflines_y10(am: f64, bm: f64, ap: f64, bp: f64, u: C64) -> CatalogEntry {
    CatalogEntry {
        id: 3,
        name: "two-halflines/Y=(1,0)".into(),
        graph: two(am, bm, ap, bp),
        condition: sep(vec![vec_from(&[1.0, 0.0])], scalar(u)),
        expected_verdict: weighted_rule(u.norm_sqr() * ap, am, true),
        expected_mass: MassConservation::Never,
        statement: "u(0+) = 0, u''(0−)α− = −β−/2 u(0−)",
        defaults: format!("α=({am},{ap}), β=({bm},{bp}), U={}", fmt_c(u)),
    }
}

/// δ-type: `u(0−) = u(0+)`, `α+u''(0+) − α−u''(0−) = (β−−β+)/2·u(0)`.
pub fn two_halflines_delta(am: f64, bm: f64, ap: f64, bp: f64, u: C64) -> CatalogEntry {
    CatalogEntry {
        id: 4,
        name: "two-halflines/delta".into(),
        graph: two(am, bm, ap, bp),
        condition: sep(vec![vec_from(&[1.0, 1.0])], scalar(u)),
        expected_verdict: weighted_rule(u.norm_sqr() * ap, am, true),
        expected_mass: iff((bm - bp).abs() <= RULE_TOL, "beta_minus = beta_plus"),
        statement: "u''(0+)α+ − u''(0−)α− = (β− − β+)/2 u(0); mass only if β+ = β−",
        defaults: format!("α=({am},{ap}), β=({bm},{bp}), U={}", fmt_c(u)),
    }
}

/// δ′-type: `u(0−) = −u(0+)`.
pub fn two_halflines_delta_prime(am: f64, bm: f64, ap: f64, bp: f64, u: C64) -> CatalogEntry {
    CatalogEntry {
        id: 5,
        name: "two-halflines/delta-prime".into(),
        graph: two(am, bm, ap, bp),
        condition: sep(vec![vec_from(&[1.0, -1.0])], scalar(u)),
        expected_verdict: weighted_rule(u.norm_sqr() * ap, am, true),
        expected_mass: MassConservation::Never,
        statement: "u(0−) = −u(0+); the mass relation is generally not satisfied",
        defaults: format!("α=({am},{ap}), β=({bm},{bp}), U={}", fmt_c(u)),
    }
}

/// `Y = ℂ²`: Robin-type conditions on both edges.
pub fn two_halflines_robin(am: f64, bm: f64, ap: f64, bp: f64, u: C64) -> CatalogEntry {
    CatalogEntry {
        id: 6,
        name: "two-halflines/Y=C2".into(),
        graph: two(am, bm, ap, bp),
        condition: sep(vec![vec_from(&[1.0, 0.0]), vec_from(&[0.0, 1.0])], scalar(u)),
        expected_verdict: weighted_rule(u.norm_sqr() * ap, am, true),
        expected_mass: iff(bm.abs() <= RULE_TOL && bp.abs() <= RULE_TOL, "beta_minus = beta_plus = 0"),
        statement: "mass only if β− = β+ = 0",
        defaults: format!("α=({am},{ap}), β=({bm},{bp}), U={}", fmt_c(u)),
    }
}

/// The explicit unitary `L = [[1,0,0],[√2,1,0],[1,√2,1]]`, `α = 1`, `β = 0`.
pub fn sqrt2_matrix() -> CMat {
    let s = 2f64.sqrt();
    CMat::from_row_slice(3, 3, &[c(1.0), c(0.0), c(0.0), c(s), c(1.0), c(0.0), c(1.0), c(s), c(1.0)])
}

pub fn two_halflines_sqrt2() -> CatalogEntry {
    CatalogEntry {
        id: 7,
        name: "two-halflines/general-sqrt2".into(),
        graph: two(1.0, 0.0, 1.0, 0.0),
        condition: VertexCondition::General(GeneralCondition { l: sqrt2_matrix() }),
        expected_verdict: Verdict::SkewAdjoint,
        expected_mass: MassConservation::Never,
        statement: "L*B+L = B−; mass is not conserved",
        defaults: "α=(1,1), β=(0,0)".into(),
    }
}

/// Three half-lines, `u = 0` at the vertex on every edge, `u'(0+) = U u'(0−)`.
pub fn three_halflines_dirichlet(am: f64, bm: f64, ap: [f64; 2], bp: [f64; 2], u: [C64; 2]) -> CatalogEntry {
    let norm2 = u[0].norm_sqr() * ap[0] + u[1].norm_sqr() * ap[1];
    CatalogEntry {
        id: 8,
        name: "three-halflines/Y=0".into(),
        graph: three(am, bm, ap, bp),
        condition: sep(vec![], CMat::from_column_slice(2, 1, &u)),
        expected_verdict: weighted_rule(norm2, am, false),
        expected_mass: MassConservation::Never,
        statement: "contraction provided |U1|²α+,1 + |U2|²α+,2 ≤ α−; never unitary",
        defaults: format!(
            "α=({am},{},{}), β=({bm},{},{}), U=({},{})",
            ap[0],
            ap[1],
            bp[0],
            bp[1],
            fmt_c(u[0]),
            fmt_c(u[1])
        ),
    }
}

/// Three half-lines, δ-type: `Y = lin{(1,1,1)}`.
pub fn three_halflines_delta(am: f64, bm: f64, ap: [f64; 2], bp: [f64; 2], u: [C64; 2]) -> CatalogEntry {
    let norm2 = u[0].norm_sqr() * ap[0] + u[1].norm_sqr() * ap[1];
    CatalogEntry {
        id: 9,
        name: "three-halflines/delta".into(),
        graph: three(am, bm, ap, bp),
        condition: sep(vec![vec_from(&[1.0, 1.0, 1.0])], CMat::from_column_slice(2, 1, &u)),
        expected_verdict: weighted_rule(norm2, am, false),
        expected_mass: iff((bm - bp[0] - bp[1]).abs() <= RULE_TOL, "beta_minus - beta_plus_1 - beta_plus_2 = 0"),
        statement: "mass preserving iff β− − β+,1 − β+,2 = 0",
        defaults: format!(
            "α=({am},{},{}), β=({bm},{},{}), U=({},{})",
            ap[0],
            ap[1],
            bp[0],
            bp[1],
            fmt_c(u[0]),
            fmt_c(u[1])
        ),
    }
}

/// One half-line `(0, ∞)` with `u(0) = u'(0) = 0`: the boundary form vanishes,
/// so the dynamics are conservative.
pub fn halfline_conservative(alpha: f64, beta: f64) -> CatalogEntry {
    CatalogEntry {
        id: 10,
        name: "halfline/two-conditions".into(),
        graph: StarGraph::new(vec![Edge::outgoing("edge", alpha, beta)]),
        condition: sep(vec![], CMat::zeros(1, 0)),
        expected_verdict: Verdict::ContractionGenerator,
        expected_mass: MassConservation::Never,
        statement: "⟨Hu, u⟩ = 0 with u(0) = u'(0) = 0",
        defaults: format!("α={alpha}, β={beta}"),
    }
}

/// One half-line `(−∞, 0)` with `u(0) = 0`: dissipative.
pub fn halfline_dissipative(alpha: f64, beta: f64) -> CatalogEntry {
    CatalogEntry {
        id: 11,
        name: "halfline/one-condition".into(),
        graph: StarGraph::new(vec![Edge::incoming("edge", alpha, beta)]),
        condition: sep(vec![], CMat::zeros(0, 1)),
        expected_verdict: Verdict::ContractionGenerator,
        expected_mass: MassConservation::Never,
        statement: "generates a contraction semigroup with u(0) = 0 alone",
        defaults: format!("α={alpha}, β={beta}"),
    }
}

/// All examples with their default parameters.
pub fn entries() -> Vec<CatalogEntry> {
    let phase = C64::from_polar(2f64.sqrt(), std::f64::consts::FRAC_PI_3);
    vec![
        two_halflines_dirichlet(1.0, 0.0, 1.0, 0.0, c(0.5)),
        two_halflines_y01(1.0, 0.0, 1.0, 0.5, c(1.0)),
        two_halflines_y10(1.0, 0.5, 1.0, 0.0, c(0.3)),
        two_halflines_delta(1.0, 0.5, 1.0, 0.5, c(1.0)),
        two_halflines_delta_prime(2.0, 0.0, 1.0, 0.0, phase),
        two_halflines_robin(1.0, 0.0, 1.0, 0.0, c(0.7)),
        two_halflines_sqrt2(),
        three_halflines_dirichlet(1.0, 0.0, [1.0, 1.0], [0.0, 0.0], [c(1.0), c(0.0)]),
        three_halflines_delta(1.0, 1.0, [1.0, 1.0], [0.25, 0.75], [c(0.5), c(0.5)]),
        halfline_conservative(1.0, 0.5),
        halfline_dissipative(1.0, 0.5),
    ]
}
