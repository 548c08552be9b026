//! Seeded Monte-Carlo bit error measurements over the full frame chain.
//!
//! Each shard is one burst: random lead-in bits (a random stream offset),
//! `frames_per_shard` back-to-back frames with random payloads, and a short
//! random tail. The burst goes through the chosen channel, then the
//! receiver synchronizes, descrambles and (with coding on) decodes.
//!
//! Pre-FEC errors are counted like a pattern error detector: sliced payload
//! bits are compared with the transmitted ones at their true positions, so
//! the count does not depend on sync. Post-FEC errors are counted on frames
//! the synchronizer delivered; frames it never delivered are reported as
//! sync losses.

use std::io::Write;
use std::ops::AddAssign;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;

use super::config::{ExperimentConfig, Mode};
use crate::bits;
use crate::channel::{awgn_apply, friis_snr, phase_noise_apply, tdl_apply, ChannelProfile};
use crate::error::{Error, Result};
use crate::fec::{MESSAGE_LEN, T};
use crate::framing::{build_frame, decode_body, FRAME_BITS, PREAMBLE_LEN};
use crate::modem::{self, agc, AgcConfig, ModemConfig};
use crate::pnseq;
use crate::sync::{descramble_align, Synchronizer};

pub const PAYLOAD_BITS: u64 = (MESSAGE_LEN * 8) as u64;
const MIN_LEAD_BITS: usize = 64;
const TAIL_BITS: usize = 64;

/// What sits between the transmitted and the sliced bits.
#[derive(Debug, Clone, PartialEq)]
pub enum Link {
    /// Modem, multipath profile, phase noise and AWGN at the given Eb/N0
    /// (per channel bit; `+inf` for a noiseless link).
    Modem {
        modem: ModemConfig,
        profile: ChannelProfile,
        ebn0_db: f64,
    },
    /// Binary symmetric channel on the line bits.
    BitFlip { probability: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSetup {
    pub link: Link,
    pub coding: bool,
    pub seed: u64,
    pub min_errors: u64,
    pub max_bits: u64,
    pub frames_per_shard: usize,
    pub shards_per_batch: usize,
}

impl PointSetup {
    pub fn from_config(cfg: &ExperimentConfig, mode: Mode, ebn0_db: f64) -> Result<Self> {
        cfg.validate()?;
        Ok(PointSetup {
            link: Link::Modem {
                modem: cfg.receiver_for(mode).modem(),
                profile: cfg.channel_profile()?,
                ebn0_db,
            },
            coding: cfg.coding.enabled(),
            seed: cfg.seed,
            min_errors: cfg.min_errors,
            max_bits: cfg.max_bits,
            frames_per_shard: cfg.frames_per_shard,
            shards_per_batch: cfg.shards_per_batch,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.frames_per_shard < 2 || self.shards_per_batch == 0 || self.min_errors == 0 || self.max_bits == 0 {
            return Err(Error::invalid("invalid stop rule or shard size"));
        }
        match &self.link {
            Link::Modem { modem, profile, ebn0_db } => {
                modem.validate()?;
                profile.validate()?;
                if ebn0_db.is_nan() {
                    return Err(Error::invalid("Eb/N0 is NaN"));
                }
            }
            Link::BitFlip { probability } => {
                if !(0.0..=1.0).contains(probability) {
                    return Err(Error::invalid(format!("flip probability {probability} outside [0, 1]")));
                }
            }
        }
        Ok(())
    }
}

/// Corrected-byte counts of delivered codewords, plus decode failures.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FecHistogram {
    pub corrected: [u64; T + 1],
    pub failures: u64,
}

impl AddAssign for FecHistogram {
    fn add_assign(&mut self, o: Self) {
        for (a, b) in self.corrected.iter_mut().zip(o.corrected) {
            *a += b;
        }
        self.failures += o.failures;
    }
}

/// Counts from one or more shards. Merging is plain addition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub frames: u64,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub sync_lost_frames: u64,
    /// Deliveries at positions where no frame started.
    pub false_locks: u64,
    pub post_fec_bits: u64,
    pub post_fec_bit_errors: u64,
    pub fec: FecHistogram,
}

impl AddAssign for Counts {
    fn add_assign(&mut self, o: Self) {
        self.frames += o.frames;
        self.bits_sent += o.bits_sent;
        self.bit_errors += o.bit_errors;
        self.frame_errors += o.frame_errors;
        self.sync_lost_frames += o.sync_lost_frames;
        self.false_locks += o.false_locks;
        self.post_fec_bits += o.post_fec_bits;
        self.post_fec_bit_errors += o.post_fec_bit_errors;
        self.fec += o.fec;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub ebn0_db: Option<f64>,
    pub distance_m: Option<f64>,
    pub snr_db: Option<f64>,
    pub coding: bool,
    pub counts: Counts,
    /// Stopped on `max_bits` before reaching `min_errors`.
    pub upper_bound: bool,
}

/// Two-sided 95% normal-approximation interval, `p +/- 1.96 sqrt(p(1-p)/n)`,
/// clipped to [0, 1]. Zero trials give [0, 1].
pub fn ci95(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let half = 1.96 * (p * (1.0 - p) / n).sqrt();
    ((p - half).max(0.0), (p + half).min(1.0))
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        f64::NAN
    } else {
        a as f64 / b as f64
    }
}

impl BerPoint {
    /// Pre-FEC payload bit error rate.
    pub fn ber(&self) -> f64 {
        ratio(self.counts.bit_errors, self.counts.bits_sent)
    }

    pub fn ci95(&self) -> (f64, f64) {
        ci95(self.counts.bit_errors, self.counts.bits_sent)
    }

    pub fn post_fec_ber(&self) -> Option<f64> {
        self.coding
            .then(|| ratio(self.counts.post_fec_bit_errors, self.counts.post_fec_bits))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BerReport {
    pub points: Vec<BerPoint>,
}

pub const BER_CSV_HEADER: &str = "ebn0_db,distance_m,snr_db,coding,frames,bits_sent,bit_errors,ber,ci95_low,ci95_high,\
frame_errors,sync_lost_frames,false_locks,post_fec_bits,post_fec_bit_errors,post_fec_ber,\
fec_0,fec_1,fec_2,fec_3,fec_4,fec_5,fec_6,fec_7,fec_8,fec_fail,upper_bound";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn sci(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.6e}")
    }
}

impl BerReport {
    pub fn write_csv_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{BER_CSV_HEADER}")?;
        for p in &self.points {
            let c = &p.counts;
            let (lo, hi) = p.ci95();
            write!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},",
                opt(p.ebn0_db),
                opt(p.distance_m),
                p.snr_db.map(|x| format!("{x:.4}")).unwrap_or_default(),
                if p.coding { "on" } else { "off" },
                c.frames,
                c.bits_sent,
                c.bit_errors,
                sci(p.ber()),
                sci(lo),
                sci(hi),
                c.frame_errors,
                c.sync_lost_frames,
                c.false_locks,
            )?;
            if p.coding {
                write!(
                    w,
                    "{},{},{}",
                    c.post_fec_bits,
                    c.post_fec_bit_errors,
                    sci(p.post_fec_ber().unwrap())
                )?;
                for n in c.fec.corrected {
                    write!(w, ",{n}")?;
                }
                write!(w, ",{}", c.fec.failures)?;
            } else {
                write!(w, "{}", ",".repeat(3 + T + 1))?;
            }
            writeln!(w, ",{}", p.upper_bound as u8)?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// A transmitted burst.
#[derive(Debug, Clone)]
pub struct Burst {
    pub bits: Vec<u8>,
    pub lead_bits: usize,
    pub payloads: Vec<Vec<u8>>,
}

impl Burst {
    pub fn random<R: Rng>(rng: &mut R, frames: usize, first_seq: u64) -> Self {
        let lead_bits = rng.random_range(MIN_LEAD_BITS..MIN_LEAD_BITS + FRAME_BITS);
        let mut bits: Vec<u8> = (0..lead_bits).map(|_| rng.random_range(0..2u8)).collect();
        let mut payloads = Vec::with_capacity(frames);
        for k in 0..frames {
            let payload: Vec<u8> = (0..MESSAGE_LEN).map(|_| rng.random()).collect();
            let frame = build_frame(&payload, first_seq + k as u64).expect("payload length");
            bits.extend(bits::unpack(&frame.serialize()));
            payloads.push(payload);
        }
        // tail pads the burst to whole bytes
        let tail = TAIL_BITS + (8 - (bits.len() + TAIL_BITS) % 8) % 8;
        bits.extend((0..tail).map(|_| rng.random_range(0..2u8)));
        Burst {
            bits,
            lead_bits,
            payloads,
        }
    }

    pub fn frame_start(&self, k: usize) -> usize {
        self.lead_bits + k * FRAME_BITS
    }
}

/// Sends `bits` through the link and returns the sliced bits, one per input bit.
pub fn transmit<R: Rng>(bits: &[u8], link: &Link, rng: &mut R) -> Result<Vec<u8>> {
    match link {
        Link::BitFlip { probability } => {
            let mut out = bits.to_vec();
            if *probability > 0.0 {
                let geo = Geometric::new(*probability).map_err(|e| Error::invalid(e.to_string()))?;
                let mut i = geo.sample(rng) as usize;
                while i < out.len() {
                    out[i] ^= 1;
                    i = i.saturating_add(1 + geo.sample(rng) as usize);
                }
            }
            Ok(out)
        }
        Link::Modem {
            modem: cfg,
            profile,
            ebn0_db,
        } => {
            let line = modem::differential_burst(bits, 0);
            let tx = modem::dbpsk_modulate(&line, cfg)?;
            let (mut rx, _) = tdl_apply(tx, profile)?;
            if profile.phase_noise_rate > 0.0 {
                rx = phase_noise_apply(rx, profile.phase_noise_rate, rng);
            }
            let rx = awgn_apply(rx, *ebn0_db, 1, cfg.samples_per_symbol, rng);
            let rx = modem::rx_front(rx, cfg)?;
            let (rx, _) = agc(rx, &AgcConfig::default());
            let soft = modem::delay_line_demod(&rx, cfg)?;
            let mut hard = modem::slice(&soft, cfg);
            hard.truncate(bits.len());
            Ok(hard)
        }
    }
}

/// Receives one burst from its sliced bits and tallies it against what was sent.
pub fn receive(burst: &Burst, hard: &[u8], coding: bool) -> Counts {
    let mut c = Counts::default();
    let n = burst.payloads.len();
    let payload_off = PREAMBLE_LEN * 8;
    let mut raw_frame_bad = vec![false; n];
    for (k, bad) in raw_frame_bad.iter_mut().enumerate() {
        let s = burst.frame_start(k) + payload_off;
        let e = s + PAYLOAD_BITS as usize;
        let errs = hard[s..e]
            .iter()
            .zip(&burst.bits[s..e])
            .filter(|(a, b)| a != b)
            .count() as u64;
        c.bit_errors += errs;
        *bad = errs > 0;
    }
    c.frames = n as u64;
    c.bits_sent = n as u64 * PAYLOAD_BITS;
    if !coding {
        c.frame_errors = raw_frame_bad.iter().filter(|&&b| b).count() as u64;
    }

    let run = Synchronizer::default().run(&bits::pack(hard));
    let mut delivered = vec![false; n];
    let word = pnseq::scrambler();
    for f in &run.frames {
        let offset = f.start_bit.checked_sub(burst.lead_bits);
        let k = match offset {
            Some(o) if o % FRAME_BITS == 0 && o / FRAME_BITS < n => o / FRAME_BITS,
            _ => {
                c.false_locks += 1;
                continue;
            }
        };
        delivered[k] = true;
        if !coding {
            continue;
        }
        let plain = descramble_align(&f.body, &word, None).bytes;
        c.post_fec_bits += PAYLOAD_BITS;
        let sent = &burst.payloads[k];
        let got = match decode_body(&plain) {
            Ok(parsed) => {
                c.fec.corrected[parsed.fec_corrected.min(T)] += 1;
                parsed.payload
            }
            Err(_) => {
                c.fec.failures += 1;
                plain[..MESSAGE_LEN].to_vec()
            }
        };
        let errs = bits::hamming(&got, sent);
        c.post_fec_bit_errors += errs;
        c.frame_errors += (errs > 0) as u64;
    }
    c.sync_lost_frames = delivered.iter().filter(|&&d| !d).count() as u64;
    c
}

/// RNG for shard `shard`. The stream does not depend on the point, so every
/// point of a sweep sees the same payloads and noise draws.
pub fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

pub fn run_shard(setup: &PointSetup, shard: u64) -> Result<Counts> {
    let mut rng = shard_rng(setup.seed, shard);
    let frames = setup.frames_per_shard;
    let burst = Burst::random(&mut rng, frames, shard * frames as u64);
    let hard = transmit(&burst.bits, &setup.link, &mut rng)?;
    Ok(receive(&burst, &hard, setup.coding))
}

/// Runs shards in fixed-size batches until the stop rule fires: at least
/// `min_errors` errors (post-FEC when coding is on) or `max_bits` payload
/// bits sent. Batches run in parallel and merge in shard order, so the
/// result does not depend on scheduling.
pub fn run_counts(setup: &PointSetup) -> Result<(Counts, bool)> {
    setup.validate()?;
    let mut total = Counts::default();
    let mut next = 0u64;
    loop {
        let batch: Vec<Result<Counts>> = (next..next + setup.shards_per_batch as u64)
            .into_par_iter()
            .map(|s| run_shard(setup, s))
            .collect();
        for r in batch {
            total += r?;
        }
        next += setup.shards_per_batch as u64;
        let errors = if setup.coding {
            total.post_fec_bit_errors
        } else {
            total.bit_errors
        };
        if errors >= setup.min_errors {
            return Ok((total, false));
        }
        if total.bits_sent >= setup.max_bits {
            return Ok((total, true));
        }
    }
}

pub fn run_ber_point(setup: &PointSetup) -> Result<BerPoint> {
    let (counts, upper_bound) = run_counts(setup)?;
    let ebn0_db = match &setup.link {
        Link::Modem { ebn0_db, .. } => Some(*ebn0_db),
        Link::BitFlip { .. } => None,
    };
    Ok(BerPoint {
        ebn0_db,
        distance_m: None,
        snr_db: None,
        coding: setup.coding,
        counts,
        upper_bound,
    })
}

pub fn run_ebn0_sweep(cfg: &ExperimentConfig) -> Result<BerReport> {
    let mut report = BerReport::default();
    for &e in &cfg.ebn0_db {
        report.points.push(run_ber_point(&PointSetup::from_config(cfg, Mode::BerEbn0, e)?)?);
    }
    Ok(report)
}

/// Noise bandwidth and bit rate used to turn link SNR into Eb/N0.
pub const SWEEP_BANDWIDTH_HZ: f64 = 2e9;
pub const SWEEP_BIT_RATE: f64 = modem::SYMBOL_RATE_HZ;

pub fn run_distance_sweep(cfg: &ExperimentConfig) -> Result<BerReport> {
    let budget = cfg.link_budget()?;
    let mut report = BerReport::default();
    for &d in &cfg.distances_m {
        let lp = friis_snr(&budget, d)?;
        let ebn0 = lp.ebn0_db(SWEEP_BANDWIDTH_HZ, SWEEP_BIT_RATE);
        let mut point = run_ber_point(&PointSetup::from_config(cfg, Mode::BerDistance, ebn0)?)?;
        point.distance_m = Some(d);
        point.snr_db = Some(lp.snr_db);
        report.points.push(point);
    }
    Ok(report)
}
