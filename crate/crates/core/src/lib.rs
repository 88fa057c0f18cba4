//! Scheduling and control of a battery energy storage system (BESS) that
//! stacks two services on one asset: tracking a day-ahead dispatch plan for a
//! distribution feeder and primary frequency regulation (PFR).
//!
//! The crate is organised around the two time layers of the problem:
//!
//! * **Day-ahead**: [`budgets`] expresses each service's power and energy
//!   needs as per-slot intervals, [`freq_stats`] fits confidence envelopes for
//!   the energy content of grid-frequency deviations, and [`scheduler`] turns
//!   both into a linear program (solved by [`lp`]) whose solution is the PFR
//!   droop coefficient `alpha` and the offset profile `F`.
//! * **Real time**: [`realtime`] computes 1 Hz setpoints for both services,
//!   [`plant`] integrates the stored energy under an asymmetric round-trip
//!   efficiency model, and [`simulator`] closes the loop over multi-day
//!   horizons and reports tracking/state-of-energy metrics.
//!
//! [`data_io`] holds the CSV/JSON file formats used by the CLI.

pub mod budgets;
pub mod data_io;
pub mod freq_stats;
pub mod lp;
pub mod plant;
pub mod realtime;
pub mod scheduler;
pub mod simulator;

pub use budgets::{FrParams, IntervalSequence, LoadScenarios, TimeGrid};
pub use freq_stats::{FrequencyEnvelope, FrequencyRecord};
pub use lp::{LinearProgram, LpSolution, LpStatus};
pub use plant::PlantState;
pub use realtime::{ControllerState, Setpoint};
pub use scheduler::{BessParams, DayAheadPlan, ObjectiveMode, ScheduleInputs};
pub use simulator::{DayResult, HorizonReport, SimulationTrace};
