//! Boundary conditions and numerical evolution for the Airy operator
//! `α u''' + β u'` on metric star graphs.
//!
//! Edges are half-lines glued at a single vertex. Incoming edges are
//! parametrized by `(−∞, 0)`, outgoing edges by `(0, ∞)`, and `α > 0` on every
//! edge. The dynamics is `u_t = α u''' + β u'`.
//!
//! * [`graph_model`]: edges, star graphs and vertex traces.
//! * [`krein_bc`]: the indefinite forms `B±`, ♯-adjoints, contraction and
//!   unitarity tests, and classification of vertex conditions.
//! * [`extension_theory`]: deficiency indices.
//! * [`discretization`]: summation-by-parts operators and constrained system assembly.
//! * [`evolution`]: Crank–Nicolson stepping, observables and a matrix-exponential oracle.
//! * [`analytic`]: the Airy function and the free-line solution.
//! * [`catalog`]: the worked examples with their predicted classifications.

pub mod analytic;
pub mod catalog;
pub mod discretization;
pub mod evolution;
pub mod extension_theory;
pub mod graph_model;
pub mod krein_bc;
pub mod linalg;

pub use num_complex::Complex64 as C64;

/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;
