//! Propagation of bilinear quantum control systems `dψ/dt = (A + u(t)B)ψ`
//! through Galerkin compressions, with the a-priori energy, truncation and
//! approximation bounds that control them.
//!
//! ```
//! use bvprop::{compress, build_rotor, propagate_pc, PiecewiseConstantControl, StateVector};
//!
//! let model = build_rotor(20).unwrap();
//! let system = compress(&model.drift, &model.coupling, 20).unwrap();
//! let u = PiecewiseConstantControl::new(vec![0.0, 1.0, 2.0], vec![0.3, -0.1]).unwrap();
//! let psi0 = StateVector::basis(20, 1).unwrap();
//! let traj = propagate_pc(&system, &u, &psi0, &[2.0]).unwrap();
//! assert!((traj.final_state().norm() - 1.0).abs() < 1e-12);
//! ```

pub mod cli;
pub mod controls;
pub mod error;
pub mod estimates;
pub mod linalg;
pub mod models;
pub mod operators;
pub mod propagator;

pub use controls::{
    admissibility_threshold, check_admissible, is_admissible, Control, ControlSignal, ControlSpec,
    PiecewiseConstantControl, SampledBVControl, TvConvention,
};
pub use error::{Error, Result};
pub use estimates::{
    bang_bang_tv_lower_bound, energy_bound, gga_dimension_for, gga_error_bound,
    switch_count_lower_bound, switch_growth_bound, truncation_bound, BoundReport,
};
pub use linalg::C64;
pub use models::{build_anharmonic, build_rotor, build_trap, rotor_steering_control, Model, ModelSpec};
pub use operators::{compress, Constants, CouplingOperator, GalerkinSystem, Provenance, SpectralDrift};
pub use propagator::{
    overlap, propagate_bv, propagate_pc, shift_phase, step_unitary, BvSchedule, StateVector, Trajectory,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/systems.md")]
    mod systems {}
    #[doc = include_str!("../../../book/src/controls.md")]
    mod controls {}
    #[doc = include_str!("../../../book/src/propagation.md")]
    mod propagation {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
