use mmw_phy::channel::{ChannelProfile, Tap};
use mmw_phy::harness::{run_ber_point, run_experiment, BerPoint, ExperimentConfig, Link, Mode, PointSetup, PAYLOAD_BITS};
use mmw_phy::modem::ModemConfig;

fn point(modem: ModemConfig, profile: ChannelProfile, ebn0_db: f64, coding: bool, min_errors: u64) -> BerPoint {
    run_ber_point(&PointSetup {
        link: Link::Modem { modem, profile, ebn0_db },
        coding,
        seed: 99,
        min_errors,
        max_bits: 4_000_000,
        frames_per_shard: 32,
        shards_per_batch: 2,
    })
    .unwrap()
}

#[test]
fn one_symbol_echo_worsens_ber() {
    let cfg = ModemConfig::default();
    let echo = ChannelProfile::echo(cfg.symbol_period_s(), -3.0);
    let los = point(cfg.clone(), ChannelProfile::los_only(), 9.0, false, 300);
    let ech = point(cfg, echo, 9.0, false, 300);
    assert!(ech.ber() > los.ber(), "echo {} vs los {}", ech.ber(), los.ber());
}

#[test]
fn phase_noise_degrades_monotonically() {
    let bers: Vec<f64> = [0.0, 2e-3, 1e-2]
        .into_iter()
        .map(|rate| {
            let mut p = ChannelProfile::los_only();
            p.phase_noise_rate = rate;
            point(ModemConfig::matched(), p, 8.0, false, 500).ber()
        })
        .collect();
    assert!(bers[0] < bers[1] && bers[1] < bers[2], "{bers:?}");
}

#[test]
fn coded_run_accounting() {
    let p = point(ModemConfig::matched(), ChannelProfile::los_only(), 6.0, true, 1);
    let c = p.counts;
    assert_eq!(c.bits_sent, c.frames * PAYLOAD_BITS);
    assert!(p.post_fec_ber().unwrap() <= p.ber());
    assert!(c.bit_errors > 0);
}

#[test]
fn profile_file_matches_builtin_echo() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/echo_profile.toml");
    let loaded = ChannelProfile::resolve(path).unwrap();
    let builtin = ChannelProfile::echo(2.0 / 875e6, -3.0);
    assert_eq!(loaded.taps.len(), 2);
    for (a, b) in loaded.taps.iter().zip(&builtin.taps) {
        assert!((a.delay_s - b.delay_s).abs() < 1e-18);
        assert!((a.gain - b.gain).abs() < 1e-12);
    }
    let text = builtin.to_toml_string();
    let back = ChannelProfile::from_toml_str(&text).unwrap();
    assert_eq!(back.taps.len(), 2);
    assert!(ChannelProfile::new(vec![Tap::new(1e-9, 1.0, 0.0)]).is_err());
}

#[test]
fn distance_sweep_ber_is_non_decreasing() {
    let cfg = ExperimentConfig {
        distances_m: vec![40.0, 55.0, 65.0, 75.0, 90.0],
        max_bits: 2_000_000,
        ..Default::default()
    };
    let csv = run_experiment(&cfg, Mode::BerDistance).unwrap();
    let bers: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(7).unwrap().parse().unwrap())
        .collect();
    assert_eq!(bers.len(), 5);
    assert!(bers.windows(2).all(|w| w[1] >= w[0]), "{bers:?}");
    assert_eq!(bers[0], 0.0);
}
