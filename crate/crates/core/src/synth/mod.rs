//! Deterministic synthetic multi-driver telemetry.
//!
//! Each driver is a profile of per-channel second-order autoregressive
//! (AR(2)) dynamics around a cruising band, plus aggressive-pedal bursts
//! whose start probability oscillates with the driver's habitual behavior
//! period. Identity therefore lives both in the marginal levels and in
//! the temporal texture, which is what sequence models are supposed to
//! exploit.
//!
//! Generation is a pure function of (profiles, shape, seed): each
//! (driver, trip) pair draws from its own derived stream, so tables are
//! reproducible bitwise and independent of generation order.

use thiserror::Error;

use crate::data::FrameTable;
use crate::numerics::SeededRng;

/// Largest window length the architecture search tries; trips must cover
/// it four times over so every grid cell gets usable windows.
pub const MAX_SUPPORTED_WINDOW: usize = 120;

/// Lower bound on `rows_per_trip`: 4 x the largest supported window.
pub const MIN_ROWS_PER_TRIP: usize = 4 * MAX_SUPPORTED_WINDOW;

/// Steps simulated and discarded before each trip so emitted rows start
/// near the stationary distribution.
const BURN_IN_STEPS: usize = 64;

/// Burst pulse length in steps; a new burst cannot start while one runs.
const BURST_LEN: usize = 4;

/// Peak burst height in units of the channel spread.
const BURST_HEIGHT: f64 = 1.6;

/// Emitted deviations saturate at this many spreads from the cruising
/// mean, like a sensor's dynamic range; it keeps every value strictly
/// within six process standard deviations of the mean.
const SATURATION_SPREADS: f64 = 5.5;

/// OBD-II-style channel names used for the first eight features.
const CHANNEL_NAMES: [&str; 8] = [
    "engine_rpm",
    "vehicle_speed",
    "accel_pedal",
    "brake_pedal",
    "engine_load",
    "throttle_position",
    "fuel_rate",
    "gear_ratio",
];

pub const LABEL_COLUMN: &str = "driver_id";
pub const TRIP_COLUMN: &str = "trip_id";

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("need at least 2 driver profiles, got {found}")]
    TooFewProfiles { found: usize },
    #[error("driver id {id:?} appears in more than one profile")]
    DuplicateDriverId { id: String },
    #[error(
        "profile {driver:?} feature {feature}: AR coefficients ({phi1}, {phi2}) are unstable \
         (companion spectral radius must be < 1)"
    )]
    UnstableAr {
        driver: String,
        feature: usize,
        phi1: f64,
        phi2: f64,
    },
    #[error("profile {driver:?}: behavior period {period} violates period >= 2")]
    PeriodTooShort { driver: String, period: usize },
    #[error("profile {driver:?}: event intensity {value} must lie in [0, 1]")]
    InvalidIntensity { driver: String, value: f64 },
    #[error("profile {driver:?} feature {feature}: cruising spread {value} must be positive and finite")]
    InvalidSpread {
        driver: String,
        feature: usize,
        value: f64,
    },
    #[error("profile {driver:?} feature {feature}: cruising mean {value} must be finite")]
    InvalidMean {
        driver: String,
        feature: usize,
        value: f64,
    },
    #[error("profile {driver:?} describes {got} features, expected {expected}")]
    FeatureMismatch {
        driver: String,
        expected: usize,
        got: usize,
    },
    #[error("feature_count must be at least 1")]
    NoFeatures,
    #[error("trips_per_driver must be at least 1")]
    NoTrips,
    #[error(
        "rows_per_trip {rows} is below the minimum {minimum} \
         (four times the largest supported window length)"
    )]
    TripTooShort { rows: usize, minimum: usize },
}

/// Stationarity test for AR(2): the companion-matrix spectral radius is
/// below one exactly when `|phi2| < 1`, `phi1 + phi2 < 1`, and
/// `phi2 - phi1 < 1`.
pub fn ar2_is_stable(phi1: f64, phi2: f64) -> bool {
    phi1.is_finite()
        && phi2.is_finite()
        && phi2.abs() < 1.0
        && phi1 + phi2 < 1.0
        && phi2 - phi1 < 1.0
}

/// One driver's generative fingerprint.
#[derive(Clone, Debug)]
pub struct DriverProfile {
    pub driver_id: String,
    /// Per-feature AR(2) coefficient pairs `(phi1, phi2)`.
    pub ar_coefficients: Vec<(f64, f64)>,
    /// Probability that an aggressive-pedal burst starts at a step (at
    /// the peak of the behavior cycle; the trough is event-free).
    pub event_intensity: f64,
    /// Per-feature cruising band `(mean, spread)`; `spread` is the
    /// stationary standard deviation of the AR component.
    pub cruising: Vec<(f64, f64)>,
    /// Steps per habitual behavior cycle.
    pub behavior_period: usize,
}

impl DriverProfile {
    pub fn validate(&self, feature_count: usize) -> Result<(), SynthError> {
        let driver = || self.driver_id.clone();
        if self.ar_coefficients.len() != feature_count {
            return Err(SynthError::FeatureMismatch {
                driver: driver(),
                expected: feature_count,
                got: self.ar_coefficients.len(),
            });
        }
        if self.cruising.len() != feature_count {
            return Err(SynthError::FeatureMismatch {
                driver: driver(),
                expected: feature_count,
                got: self.cruising.len(),
            });
        }
        for (j, &(phi1, phi2)) in self.ar_coefficients.iter().enumerate() {
            if !ar2_is_stable(phi1, phi2) {
                return Err(SynthError::UnstableAr {
                    driver: driver(),
                    feature: j,
                    phi1,
                    phi2,
                });
            }
        }
        if self.behavior_period < 2 {
            return Err(SynthError::PeriodTooShort {
                driver: driver(),
                period: self.behavior_period,
            });
        }
        if !self.event_intensity.is_finite() || !(0.0..=1.0).contains(&self.event_intensity) {
            return Err(SynthError::InvalidIntensity {
                driver: driver(),
                value: self.event_intensity,
            });
        }
        for (j, &(mean, spread)) in self.cruising.iter().enumerate() {
            if !mean.is_finite() {
                return Err(SynthError::InvalidMean {
                    driver: driver(),
                    feature: j,
                    value: mean,
                });
            }
            if !spread.is_finite() || spread <= 0.0 {
                return Err(SynthError::InvalidSpread {
                    driver: driver(),
                    feature: j,
                    value: spread,
                });
            }
        }
        Ok(())
    }
}

/// Innovation standard deviation that gives the AR(2) component a
/// stationary standard deviation of exactly `spread`.
fn innovation_std(phi1: f64, phi2: f64, spread: f64) -> f64 {
    let factor = (1.0 + phi2) * ((1.0 - phi2) * (1.0 - phi2) - phi1 * phi1) / (1.0 - phi2);
    spread * factor.sqrt()
}

/// Half-sine burst pulse in spread units, step `k` of `BURST_LEN`.
fn burst_pulse(k: usize) -> f64 {
    BURST_HEIGHT * (std::f64::consts::PI * (k + 1) as f64 / (BURST_LEN + 1) as f64).sin()
}

fn feature_names(feature_count: usize) -> Vec<String> {
    (0..feature_count)
        .map(|j| {
            CHANNEL_NAMES
                .get(j)
                .map(|s| s.to_string())
                .unwrap_or_else(|| format!("ch{j}"))
        })
        .collect()
}

/// Generates `trips_per_driver` trips of `rows_per_trip` rows for every
/// profile, deterministic in `seed`.
///
/// Rows come out driver-major, trips in order, chronological within each
/// trip, labelled `driver_id` with a `trip_id` column.
pub fn generate(
    profiles: &[DriverProfile],
    trips_per_driver: usize,
    rows_per_trip: usize,
    feature_count: usize,
    seed: u64,
) -> Result<FrameTable, SynthError> {
    if profiles.len() < 2 {
        return Err(SynthError::TooFewProfiles {
            found: profiles.len(),
        });
    }
    if feature_count == 0 {
        return Err(SynthError::NoFeatures);
    }
    if trips_per_driver == 0 {
        return Err(SynthError::NoTrips);
    }
    if rows_per_trip < MIN_ROWS_PER_TRIP {
        return Err(SynthError::TripTooShort {
            rows: rows_per_trip,
            minimum: MIN_ROWS_PER_TRIP,
        });
    }
    for (i, p) in profiles.iter().enumerate() {
        p.validate(feature_count)?;
        if profiles[..i].iter().any(|q| q.driver_id == p.driver_id) {
            return Err(SynthError::DuplicateDriverId {
                id: p.driver_id.clone(),
            });
        }
    }

    let mut table = FrameTable::new(
        feature_names(feature_count),
        LABEL_COLUMN,
        Some(TRIP_COLUMN.to_string()),
    );
    for (d, profile) in profiles.iter().enumerate() {
        let sigmas: Vec<f64> = profile
            .ar_coefficients
            .iter()
            .zip(&profile.cruising)
            .map(|(&(p1, p2), &(_, spread))| innovation_std(p1, p2, spread))
            .collect();
        for t in 0..trips_per_driver {
            // Every (driver, trip) owns a stream, so any subset of the
            // suite regenerates identically.
            let mut rng =
                SeededRng::new(seed.wrapping_add(d as u64 * 1_000_003).wrapping_add(t as u64));
            let trip_name = format!("trip_{t}");
            // AR(2) deviation states per feature: (d_{t-1}, d_{t-2}).
            let mut state = vec![(0.0_f64, 0.0_f64); feature_count];
            let mut burst_left = 0usize;
            for step in 0..BURN_IN_STEPS + rows_per_trip {
                let mut row = Vec::with_capacity(feature_count);
                for j in 0..feature_count {
                    let (phi1, phi2) = profile.ar_coefficients[j];
                    let (mean, spread) = profile.cruising[j];
                    let (d1, d2) = state[j];
                    let dev = phi1 * d1 + phi2 * d2 + sigmas[j] * rng.next_gaussian();
                    state[j] = (dev, d1);
                    let burst = if burst_left > 0 {
                        spread * burst_pulse(BURST_LEN - burst_left)
                    } else {
                        0.0
                    };
                    let limit = SATURATION_SPREADS * spread;
                    row.push(mean + (dev + burst).clamp(-limit, limit));
                }
                // One event draw per step keeps the stream layout fixed;
                // the draw is ignored while a burst is running.
                let phase = (2.0 * std::f64::consts::PI * step as f64
                    / profile.behavior_period as f64)
                    .sin();
                let start_probability = profile.event_intensity * (1.0 + phase) / 2.0;
                let u = rng.next_uniform();
                if burst_left > 0 {
                    burst_left -= 1;
                } else if u < start_probability {
                    burst_left = BURST_LEN;
                }
                if step >= BURN_IN_STEPS {
                    table.push_row(&profile.driver_id, &trip_name, row);
                }
            }
        }
    }
    Ok(table)
}

/// Offsets with pairwise Hamming distance 4 (first-order Reed-Muller
/// codewords), so every pair of default drivers separates on exactly half
/// the channels.
const MEAN_OFFSET_CODE: [[f64; 8]; 5] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0],
    [0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0],
    [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
    [0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0],
];

/// Offset size in spread units on the channels where a pair differs.
const MEAN_OFFSET_SPREADS: f64 = 1.35;

/// Baseline (mean, spread) per channel before driver offsets.
const CHANNEL_BANDS: [(f64, f64); 8] = [
    (1800.0, 150.0), // engine_rpm
    (55.0, 8.0),     // vehicle_speed
    (0.30, 0.08),    // accel_pedal
    (0.15, 0.05),    // brake_pedal
    (45.0, 7.0),     // engine_load
    (22.0, 5.0),     // throttle_position
    (2.2, 0.4),      // fuel_rate
    (0.90, 0.12),    // gear_ratio
];

/// The standard five-driver, eight-channel suite: distinct AR dynamics,
/// event intensities, behavior periods, and code-separated cruising
/// means.
pub fn default_profiles() -> Vec<DriverProfile> {
    let dynamics: [(f64, f64); 5] = [
        (0.85, -0.10), // smooth, heavily damped
        (1.20, -0.50), // oscillatory (complex roots)
        (0.30, 0.10),  // choppy, weak memory
        (-0.40, 0.20), // alternating overshoot
        (0.55, 0.30),  // slow drift
    ];
    let intensities = [0.02, 0.05, 0.08, 0.12, 0.03];
    let periods = [16, 24, 12, 32, 20];
    (0..5)
        .map(|i| DriverProfile {
            driver_id: format!("driver_{i}"),
            ar_coefficients: vec![dynamics[i]; 8],
            event_intensity: intensities[i],
            cruising: CHANNEL_BANDS
                .iter()
                .enumerate()
                .map(|(j, &(mean, spread))| {
                    (mean + MEAN_OFFSET_SPREADS * spread * MEAN_OFFSET_CODE[i][j], spread)
                })
                .collect(),
            behavior_period: periods[i],
        })
        .collect()
}

/// The default suite rendered at the standard shape: 5 drivers x 3 trips
/// x 2,000 rows x 8 channels.
pub fn default_table(seed: u64) -> FrameTable {
    generate(&default_profiles(), 3, 2000, 8, seed)
        .expect("default profiles always satisfy the generator preconditions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{train_tree, TreeConfig};

    #[test]
    fn stability_triangle_matches_companion_eigenvalues() {
        // Spectral radius of [[phi1, phi2], [1, 0]]: roots of
        // z^2 - phi1 z - phi2.
        let radius = |phi1: f64, phi2: f64| {
            let disc = phi1 * phi1 + 4.0 * phi2;
            if disc >= 0.0 {
                let r = disc.sqrt();
                ((phi1 + r) / 2.0).abs().max(((phi1 - r) / 2.0).abs())
            } else {
                // Complex pair with modulus sqrt(-phi2).
                (-phi2).sqrt()
            }
        };
        let mut checked = 0;
        for i in -30..=30 {
            for j in -30..=30 {
                let phi1 = i as f64 / 10.0;
                let phi2 = j as f64 / 10.0;
                let spectral = radius(phi1, phi2);
                if (spectral - 1.0).abs() < 1e-9 {
                    continue; // boundary cases are ambiguous under rounding
                }
                assert_eq!(
                    ar2_is_stable(phi1, phi2),
                    spectral < 1.0,
                    "triangle test disagrees with spectral radius at ({phi1}, {phi2})"
                );
                checked += 1;
            }
        }
        assert!(checked > 3_000);
    }

    #[test]
    fn default_suite_has_standard_shape() {
        let table = default_table(7);
        assert_eq!(table.num_rows(), 30_000);
        assert_eq!(table.feature_count(), 8);
        assert_eq!(table.driver_labels().len(), 5);
        assert_eq!(table.segments().len(), 15, "5 drivers x 3 trips");
        assert_eq!(table.feature_names()[0], "engine_rpm");
    }

    #[test]
    fn generation_is_deterministic_in_seed() {
        let profiles = default_profiles();
        let a = generate(&profiles, 1, MIN_ROWS_PER_TRIP, 8, 11).unwrap();
        let b = generate(&profiles, 1, MIN_ROWS_PER_TRIP, 8, 11).unwrap();
        assert_eq!(a.num_rows(), b.num_rows());
        for (x, y) in a.rows().iter().zip(b.rows()) {
            assert_eq!(x.values, y.values);
        }
        let c = generate(&profiles, 1, MIN_ROWS_PER_TRIP, 8, 12).unwrap();
        assert!(a.rows().iter().zip(c.rows()).any(|(x, y)| x.values != y.values));
    }

    #[test]
    fn values_stay_finite_and_within_six_spreads_of_the_mean() {
        let profiles = default_profiles();
        let table = default_table(3);
        for row in table.rows() {
            let name = table.driver_name(row.driver);
            let profile = profiles.iter().find(|p| p.driver_id == name).unwrap();
            for (j, &v) in row.values.iter().enumerate() {
                let (mean, spread) = profile.cruising[j];
                assert!(v.is_finite());
                assert!(
                    (v - mean).abs() <= 6.0 * spread,
                    "driver {} feature {j}: {v} is {} spreads from {mean}",
                    profile.driver_id,
                    (v - mean).abs() / spread
                );
            }
        }
    }

    #[test]
    fn default_drivers_separate_on_at_least_half_the_channels() {
        let table = default_table(5);
        let all_profiles = default_profiles();
        // Align profiles with the table's interned driver indices.
        let profiles: Vec<&DriverProfile> = (0..all_profiles.len())
            .map(|i| {
                let name = table.driver_name(i);
                all_profiles.iter().find(|p| p.driver_id == name).unwrap()
            })
            .collect();
        // Empirical per-driver means.
        let mut sums = vec![vec![0.0_f64; 8]; profiles.len()];
        let mut counts = vec![0usize; profiles.len()];
        for row in table.rows() {
            counts[row.driver] += 1;
            for (j, &v) in row.values.iter().enumerate() {
                sums[row.driver][j] += v;
            }
        }
        let means: Vec<Vec<f64>> = sums
            .iter()
            .zip(&counts)
            .map(|(s, &c)| s.iter().map(|x| x / c as f64).collect())
            .collect();
        for a in 0..profiles.len() {
            for b in a + 1..profiles.len() {
                let separated = (0..8)
                    .filter(|&j| {
                        let spread =
                            profiles[a].cruising[j].1.max(profiles[b].cruising[j].1);
                        (means[a][j] - means[b][j]).abs() >= spread
                    })
                    .count();
                assert!(
                    separated >= 4,
                    "drivers {a} and {b} separate on only {separated} of 8 channels"
                );
            }
        }
    }

    #[test]
    fn maximally_separated_pair_is_easy_for_a_shallow_tree() {
        // Two profiles offset by 3 spreads on every channel.
        let mk = |id: &str, shift: f64| DriverProfile {
            driver_id: id.to_string(),
            ar_coefficients: vec![(0.6, -0.1); 4],
            event_intensity: 0.03,
            cruising: (0..4).map(|j| (10.0 * (j + 1) as f64 + shift, 1.0)).collect(),
            behavior_period: 16,
        };
        let profiles = vec![mk("calm", 0.0), mk("rushed", 3.0)];
        let table = generate(&profiles, 1, MIN_ROWS_PER_TRIP, 4, 42).unwrap();
        let rows: Vec<Vec<f64>> = table.rows().iter().map(|r| r.values.clone()).collect();
        let labels: Vec<usize> = table.rows().iter().map(|r| r.driver).collect();
        let tree = train_tree(
            &rows,
            &labels,
            2,
            TreeConfig {
                max_depth: Some(3),
                min_samples_split: 2,
            },
        )
        .unwrap();
        let correct = rows
            .iter()
            .zip(&labels)
            .filter(|(row, &label)| tree.predict_row(row).unwrap().0 == label)
            .count();
        let accuracy = correct as f64 / rows.len() as f64;
        assert!(
            accuracy >= 0.9,
            "depth-3 tree should separate 3-spread profiles, got {accuracy}"
        );
    }

    #[test]
    fn invalid_profiles_are_named_errors() {
        let mut profiles = default_profiles();
        profiles[1].ar_coefficients[3] = (1.9, 0.2);
        let err = generate(&profiles, 1, MIN_ROWS_PER_TRIP, 8, 1).unwrap_err();
        assert!(matches!(err, SynthError::UnstableAr { feature: 3, .. }));
        assert!(err.to_string().contains("spectral radius"));

        let mut profiles = default_profiles();
        profiles[0].behavior_period = 1;
        assert!(matches!(
            generate(&profiles, 1, MIN_ROWS_PER_TRIP, 8, 1),
            Err(SynthError::PeriodTooShort { period: 1, .. })
        ));

        let mut profiles = default_profiles();
        profiles[2].event_intensity = 1.5;
        assert!(matches!(
            generate(&profiles, 1, MIN_ROWS_PER_TRIP, 8, 1),
            Err(SynthError::InvalidIntensity { .. })
        ));

        let mut profiles = default_profiles();
        profiles[4].cruising[0].1 = 0.0;
        assert!(matches!(
            generate(&profiles, 1, MIN_ROWS_PER_TRIP, 8, 1),
            Err(SynthError::InvalidSpread { feature: 0, .. })
        ));

        let profiles = default_profiles();
        assert!(matches!(
            generate(&profiles[..1], 1, MIN_ROWS_PER_TRIP, 8, 1),
            Err(SynthError::TooFewProfiles { found: 1 })
        ));
        assert!(matches!(
            generate(&profiles, 1, MIN_ROWS_PER_TRIP, 4, 1),
            Err(SynthError::FeatureMismatch { expected: 4, got: 8, .. })
        ));
        assert!(matches!(
            generate(&profiles, 1, 100, 8, 1),
            Err(SynthError::TripTooShort { rows: 100, .. })
        ));

        let mut profiles = default_profiles();
        profiles[1].driver_id = profiles[0].driver_id.clone();
        assert!(matches!(
            generate(&profiles, 1, MIN_ROWS_PER_TRIP, 8, 1),
            Err(SynthError::DuplicateDriverId { .. })
        ));
    }

    #[test]
    fn behavior_period_changes_the_event_texture() {
        let mut profiles = default_profiles();
        let base = generate(&profiles, 1, MIN_ROWS_PER_TRIP, 8, 99).unwrap();
        profiles[3].behavior_period = 8;
        let shifted = generate(&profiles, 1, MIN_ROWS_PER_TRIP, 8, 99).unwrap();
        let differs = base
            .rows()
            .iter()
            .zip(shifted.rows())
            .any(|(a, b)| a.values != b.values);
        assert!(differs, "changing a period must change burst placement");
    }

    #[test]
    fn minimum_trip_length_tracks_the_window_grid() {
        let max_grid = *crate::eval::DEFAULT_WINDOW_GRID.iter().max().unwrap();
        assert_eq!(MAX_SUPPORTED_WINDOW, max_grid);
        assert_eq!(MIN_ROWS_PER_TRIP, 4 * max_grid);
    }
}
