//! On-air frame format and the dual-clock rate adaptation model.

mod clock;
mod fifo;
mod frame;

pub use clock::{net_rate, truncate_2dp, ClockPlan};
pub use fifo::{simulate_fifo, FifoModel, FifoTrace, Gating, GatedSide};
pub use frame::{
    build_frame, decode_body, parse_frame, ByteFrame, FrameError, ParsedFrame, BODY_LEN,
    FRAME_BITS, FRAME_LEN, HEADER_OFFSET, PREAMBLE_LEN,
};
