//! Dual-clock FIFO between the payload clock f1 and the line clock f2.
//!
//! Time is integral: both clock periods are scaled to integers from the
//! exact rational rates, so edges never drift. One event is one edge of
//! either clock; when edges coincide the write is applied first.

use num_integer::Integer;
use num_rational::Ratio;

use super::ClockPlan;
use crate::error::{Error, Result};
use crate::fec::MESSAGE_LEN;
use crate::framing::FRAME_LEN;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GatedSide {
    Read,
    Write,
}

/// Periodic enable: `active` clock periods on, then `idle` off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gating {
    pub side: GatedSide,
    pub active: u64,
    pub idle: u64,
}

impl Gating {
    /// 239 active periods, 21 idle.
    pub fn frame(side: GatedSide) -> Self {
        Gating {
            side,
            active: MESSAGE_LEN as u64,
            idle: (FRAME_LEN - MESSAGE_LEN) as u64,
        }
    }

    fn enabled(&self, period: u64) -> bool {
        period % (self.active + self.idle) < self.active
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FifoModel {
    pub capacity: u64,
    pub write_hz: Ratio<u64>,
    pub read_hz: Ratio<u64>,
    pub gating: Option<Gating>,
    /// Reading begins at the first read edge that sees at least this many bytes.
    pub start_threshold: u64,
    pub initial_occupancy: u64,
}

impl FifoModel {
    /// Transmit side: continuous writes at f1, reads at f2 gated 239/21,
    /// reading held until half full.
    pub fn transmit(plan: &ClockPlan, capacity: u64) -> Self {
        FifoModel {
            capacity,
            write_hz: plan.f1_hz(),
            read_hz: plan.f2_hz(),
            gating: Some(Gating::frame(GatedSide::Read)),
            start_threshold: capacity / 2,
            initial_occupancy: 0,
        }
    }

    /// Receive side: gated writes at f2, continuous reads at f1.
    pub fn receive(plan: &ClockPlan, capacity: u64) -> Self {
        FifoModel {
            capacity,
            write_hz: plan.f2_hz(),
            read_hz: plan.f1_hz(),
            gating: Some(Gating::frame(GatedSide::Write)),
            start_threshold: capacity / 2,
            initial_occupancy: 0,
        }
    }

    /// Two frames (520 bytes) on the transmit side.
    pub fn default_transmit() -> Self {
        Self::transmit(&ClockPlan::default(), 2 * FRAME_LEN as u64)
    }

    fn validate(&self) -> Result<()> {
        if self.capacity == 0 {
            return Err(Error::invalid("FIFO capacity must be positive"));
        }
        if self.initial_occupancy > self.capacity {
            return Err(Error::invalid("initial occupancy exceeds capacity"));
        }
        if *self.write_hz.numer() == 0 || *self.read_hz.numer() == 0 {
            return Err(Error::invalid("clock rates must be positive"));
        }
        if let Some(g) = self.gating {
            if g.active + g.idle == 0 {
                return Err(Error::invalid("gating cycle must be nonempty"));
            }
        }
        Ok(())
    }

    /// Integer clock periods (write, read) in a shared time unit.
    pub fn integer_periods(&self) -> (u128, u128) {
        // period = denom / numer; scale both by numer_w * numer_r
        let (nw, dw) = (*self.write_hz.numer() as u128, *self.write_hz.denom() as u128);
        let (nr, dr) = (*self.read_hz.numer() as u128, *self.read_hz.denom() as u128);
        let pw = dw * nr;
        let pr = dr * nw;
        let g = pw.gcd(&pr);
        (pw / g, pr / g)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FifoTrace {
    /// Occupancy after each event.
    pub occupancy: Vec<u64>,
    /// Event index of the first read, if reading started.
    pub read_start: Option<usize>,
    pub underflows: u64,
    pub overflows: u64,
    /// Occupancy at the start of each gating cycle after reading began.
    pub cycle_levels: Vec<u64>,
}

impl FifoTrace {
    /// Occupancy range from the first read onward.
    pub fn steady_range(&self) -> Option<(u64, u64)> {
        let start = self.read_start?;
        let tail = &self.occupancy[start..];
        Some((*tail.iter().min()?, *tail.iter().max()?))
    }

    pub fn min(&self) -> Option<u64> {
        self.occupancy.iter().copied().min()
    }

    pub fn max(&self) -> Option<u64> {
        self.occupancy.iter().copied().max()
    }

    /// Largest deviation of a cycle-start level from the first one.
    pub fn drift(&self) -> u64 {
        let Some(&first) = self.cycle_levels.first() else {
            return 0;
        };
        self.cycle_levels
            .iter()
            .map(|&l| l.abs_diff(first))
            .max()
            .unwrap_or(0)
    }
}

pub fn simulate_fifo(model: &FifoModel, events: usize) -> Result<FifoTrace> {
    model.validate()?;
    let (pw, pr) = model.integer_periods();
    let mut trace = FifoTrace {
        occupancy: Vec::with_capacity(events),
        ..Default::default()
    };
    let mut occ = model.initial_occupancy;
    let (mut next_w, mut next_r) = (0u128, 0u128);
    let (mut w_periods, mut r_periods) = (0u64, 0u64);
    let mut reading = false;

    for ev in 0..events {
        if next_w <= next_r {
            let enabled = match model.gating {
                Some(g) if g.side == GatedSide::Write => {
                    let cycle = g.active + g.idle;
                    if reading && w_periods % cycle == 0 {
                        trace.cycle_levels.push(occ);
                    }
                    g.enabled(w_periods)
                }
                _ => true,
            };
            if enabled {
                if occ == model.capacity {
                    trace.overflows += 1;
                } else {
                    occ += 1;
                }
            }
            w_periods += 1;
            next_w += pw;
        } else {
            if !reading && occ >= model.start_threshold {
                reading = true;
                trace.read_start = Some(ev);
            }
            if reading {
                let enabled = match model.gating {
                    Some(g) if g.side == GatedSide::Read => {
                        if r_periods % (g.active + g.idle) == 0 {
                            trace.cycle_levels.push(occ);
                        }
                        g.enabled(r_periods)
                    }
                    _ => true,
                };
                if enabled {
                    if occ == 0 {
                        trace.underflows += 1;
                    } else {
                        occ -= 1;
                    }
                }
                r_periods += 1;
            }
            next_r += pr;
        }
        trace.occupancy.push(occ);
    }
    Ok(trace)
}
