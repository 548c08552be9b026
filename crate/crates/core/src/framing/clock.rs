use num_rational::Ratio;

use crate::fec::{MESSAGE_LEN, N};
use crate::framing::FRAME_LEN;

/// Serial and byte clocks of the link, held as exact rationals (Hz).
///
/// The line carries 260-byte frames of which 239 bytes are payload, so the
/// payload clock `F1` is `F2 * 239 / 260`. Byte clocks are the bit clocks
/// divided by 8.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClockPlan {
    /// Gross serial rate F2.
    pub gross_hz: Ratio<u64>,
    /// IF carrier, metadata only.
    pub if_hz: Ratio<u64>,
}

impl Default for ClockPlan {
    fn default() -> Self {
        ClockPlan {
            gross_hz: Ratio::from_integer(875_000_000),
            if_hz: Ratio::from_integer(3_500_000_000),
        }
    }
}

impl ClockPlan {
    pub fn with_gross(gross_hz: u64) -> Self {
        ClockPlan {
            gross_hz: Ratio::from_integer(gross_hz),
            if_hz: Ratio::from_integer(gross_hz * 4),
        }
    }

    pub fn frame_ratio() -> Ratio<u64> {
        Ratio::new(MESSAGE_LEN as u64, FRAME_LEN as u64)
    }

    /// F1, the net payload bit rate.
    pub fn net_hz(&self) -> Ratio<u64> {
        net_rate(self)
    }

    /// f1 = F1 / 8, the payload byte clock.
    pub fn f1_hz(&self) -> Ratio<u64> {
        self.net_hz() / 8
    }

    /// f2 = F2 / 8, the line byte clock.
    pub fn f2_hz(&self) -> Ratio<u64> {
        self.gross_hz / 8
    }

    /// IF carrier cycles per symbol; the delay-line demodulator is carrier
    /// transparent only when this is an integer.
    pub fn carrier_cycles_per_symbol(&self) -> Ratio<u64> {
        self.if_hz / self.gross_hz
    }

    /// Rate of RS codewords per second on the line.
    pub fn codeword_rate(&self) -> Ratio<u64> {
        self.gross_hz / (FRAME_LEN as u64 * 8)
    }

    pub fn code_rate() -> Ratio<u64> {
        Ratio::new(MESSAGE_LEN as u64, N as u64)
    }
}

/// F2 * 239 / 260, exact.
pub fn net_rate(plan: &ClockPlan) -> Ratio<u64> {
    plan.gross_hz * ClockPlan::frame_ratio()
}

/// Formats `value / scale` truncated (not rounded) to two decimals.
pub fn truncate_2dp(value: Ratio<u64>, scale: u64) -> String {
    let hundredths = (value * 100 / scale).to_integer();
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn net_rate_is_exact() {
        let plan = ClockPlan::default();
        assert_eq!(net_rate(&plan), Ratio::new(875_000_000 * 239, 260));
        assert_eq!(net_rate(&plan) / plan.gross_hz, Ratio::new(239, 260));
        assert_eq!(net_rate(&ClockPlan::with_gross(260)), Ratio::from_integer(239));
    }

    #[test]
    fn byte_clocks() {
        let plan = ClockPlan::default();
        assert_eq!(plan.f2_hz(), Ratio::from_integer(109_375_000));
        assert_eq!(plan.f1_hz(), Ratio::new(875_000_000 * 239, 260 * 8));
        assert_eq!(truncate_2dp(plan.f1_hz(), 1_000_000), "100.54");
        assert_eq!(truncate_2dp(plan.f2_hz(), 1_000_000), "109.37");
        assert_eq!(truncate_2dp(plan.net_hz(), 1_000_000), "804.32");
        let f = *plan.net_hz().numer() as f64 / *plan.net_hz().denom() as f64;
        assert!((f - 804_326_923.08).abs() < 0.01);
    }

    #[test]
    fn four_carrier_cycles_per_symbol() {
        assert_eq!(
            ClockPlan::default().carrier_cycles_per_symbol(),
            Ratio::from_integer(4)
        );
    }
}
