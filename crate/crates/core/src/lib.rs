//! Core data model for the Offline Nanosatellite Task Scheduling (ONTS) problem.
//!
//! An instance schedules `J` jobs over a horizon of `T` time steps. A schedule
//! is a binary activation matrix `x` together with the start indicators `phi`
//! it induces. This crate provides
//!
//! * exact semantics of the formulation: start derivation, constraint checking,
//!   QoS evaluation and battery state-of-charge simulation ([`model`]),
//! * seeded random instance generation ([`instance_gen`]),
//! * lowering to an explicit sparse matrix model ([`standard_form`]) with an LP
//!   text dialect for interop ([`lp`]),
//! * the weighted bipartite variable/constraint graph used by the GNN ([`graph`]),
//! * file formats for instances and solutions ([`io`]).

pub mod graph;
pub mod instance_gen;
pub mod io;
pub mod lp;
pub mod model;
pub mod standard_form;

pub use graph::{encode_bipartite, BipartiteGraph, GraphError};
pub use instance_gen::{power_curve, random_instance, GenError, GeneratorConfig};
pub use model::{
    check_feasibility, derive_phi, qos, soc_trajectory, BatteryParams, BinaryMatrix,
    CandidateSolution, Family, FeasibilityReport, Instance, JobParams, ModelError, SocTrajectory,
    Violation, CONTINUOUS_TOL,
};
pub use standard_form::{build_standard_form, Row, Sense, StandardForm, VarKind};
