pub mod fit_envelope;
pub mod report;
pub mod schedule;
pub mod simulate;
