//! Experiment configuration, Monte-Carlo BER runs and CSV export.

mod ber;
mod config;
mod experiments;

pub use ber::{
    ci95, receive, run_ber_point, run_counts, run_distance_sweep, run_ebn0_sweep, run_shard, shard_rng,
    transmit, BerPoint, BerReport, Burst, Counts, FecHistogram, Link, PointSetup, BER_CSV_HEADER,
    PAYLOAD_BITS, SWEEP_BANDWIDTH_HZ, SWEEP_BIT_RATE,
};
pub use config::{Coding, ExperimentConfig, Mode, Receiver};
pub use experiments::{
    fifo_summary_csv, measure_eye, roundtrip_csv, run_experiment, run_fifo_summaries, run_roundtrip,
    FifoSummary, RoundtripFrame, FIFO_CSV_HEADER, ROUNDTRIP_CSV_HEADER,
};
