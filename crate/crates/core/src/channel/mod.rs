//! Channel impairments, the free-space link budget, and linear response
//! probing of the transmit/channel/receive chain.

mod awgn;
mod link;
mod phase_noise;
mod probe;
mod profile;
mod tdl;

pub use awgn::{awgn_apply, noise_variance};
pub use link::{ebn0_from_snr, fspl_db, friis_snr, AntennaModel, LinkBudget, LinkPoint, SPEED_OF_LIGHT};
pub use phase_noise::phase_noise_apply;
pub use probe::{probe_response, write_response_csv, ProbeChain, Response};
pub use profile::{ChannelProfile, Tap};
pub use tdl::{tdl_apply, TdlReport};
