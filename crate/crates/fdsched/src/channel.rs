//! Cell geometry, path loss, shadowing, and block-fading channel generation.
//!
//! A *drop* fixes user positions and large-scale attenuation (path loss plus
//! log-normal shadowing) for one simulation run; per-slot Rayleigh fading is
//! then drawn independently on top of it. All randomness is derived from
//! explicit seeds, so drops and fading traces are reproducible bit for bit.
//!
//! ```
//! use fdsched::channel::{CellConfig, ChannelParams, CellDrop};
//!
//! let cell = CellConfig { n_users: 2, ..CellConfig::default() };
//! let drop = CellDrop::generate(&cell, &ChannelParams::default(), 7).unwrap();
//! let slot0 = drop.draw_realization(99, 0);
//! assert_eq!(slot0.g_sq.len(), 2);
//! assert_eq!(drop, CellDrop::generate(&cell, &ChannelParams::default(), 7).unwrap());
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Line-of-sight path loss in dB at distance `d_km` kilometres.
const PL_LOS: (f64, f64) = (89.5, 16.9);
/// Non-line-of-sight path loss in dB at distance `d_km` kilometres.
const PL_NLOS: (f64, f64) = (147.4, 43.3);

/// Distances below this are clamped before path-loss evaluation so that
/// near-coincident users cannot produce an infinite channel gain.
const MIN_COUPLING_DISTANCE_M: f64 = 1.0;

/// Rejection-sampling attempts per placed point before giving up.
const REJECTION_CAP: usize = 10_000;

const SALT_DROP: u64 = 0x44524F50;
const SALT_REALIZATION: u64 = 0x5245414C;

// ---------------------------------------------------------------------------
// Unit helpers
// ---------------------------------------------------------------------------

/// Converts a dB value to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to dB.
pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts a power in watts to dBm.
pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Line-of-sight path loss in dB for a distance in metres.
pub fn pathloss_los_db(d_m: f64) -> f64 {
    let d_km = d_m.max(MIN_COUPLING_DISTANCE_M) / 1000.0;
    PL_LOS.0 + PL_LOS.1 * d_km.log10()
}

/// Non-line-of-sight path loss in dB for a distance in metres.
pub fn pathloss_nlos_db(d_m: f64) -> f64 {
    let d_km = d_m.max(MIN_COUPLING_DISTANCE_M) / 1000.0;
    PL_NLOS.0 + PL_NLOS.1 * d_km.log10()
}

/// Deterministically folds a list of seed parts into one well-mixed seed.
pub(crate) fn mix_seed(parts: &[u64]) -> u64 {
    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let mut acc = 0x0DDB_1A5E_5BAD_5EEDu64;
    for &p in parts {
        acc = splitmix64(acc ^ splitmix64(p));
    }
    acc
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// How users are scattered over the cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Placement {
    /// Independent uniform placement over the whole cell.
    Uniform,
    /// Users split evenly across disk-shaped hotspots with random centers.
    Hotspot { n_hotspots: usize, radius_m: f64 },
}

/// Line-of-sight model for the links of a drop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LosMode {
    /// Every link is non-line-of-sight (the default worst-case assumption).
    AllNlos,
    /// Each link is independently line-of-sight with probability `p_los`.
    Probabilistic { p_los: f64 },
}

/// Square cell geometry and user placement policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CellConfig {
    /// Side length of the square cell in metres (base station at the center).
    pub side_m: f64,
    /// No user may be placed closer to the base station than this radius.
    pub exclusion_radius_m: f64,
    /// Number of users dropped in the cell.
    pub n_users: usize,
    /// Spatial distribution of the users.
    pub placement: Placement,
    /// Line-of-sight model for all links.
    pub los: LosMode,
}

impl Default for CellConfig {
    fn default() -> Self {
        CellConfig {
            side_m: 50.0,
            exclusion_radius_m: 5.0,
            n_users: 4,
            placement: Placement::Uniform,
            los: LosMode::AllNlos,
        }
    }
}

/// Radio parameters shared by every drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelParams {
    /// System bandwidth in Hz.
    pub bandwidth_hz: f64,
    /// Thermal noise power spectral density in dBm/Hz.
    pub noise_psd_dbm_per_hz: f64,
    /// Receiver noise figure of the base station in dB (uplink noise).
    pub noise_figure_bs_db: f64,
    /// Receiver noise figure of a user terminal in dB (downlink noise).
    pub noise_figure_user_db: f64,
    /// Self-interference mitigation at the base station in dB.
    pub sim_db: f64,
    /// Log-normal shadowing standard deviation on line-of-sight links, dB.
    pub shadow_std_los_db: f64,
    /// Log-normal shadowing standard deviation on non-line-of-sight links, dB.
    pub shadow_std_nlos_db: f64,
    /// Spectral-efficiency cap of the rate model in bps/Hz.
    pub gamma_max: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            bandwidth_hz: 1.0e7,
            noise_psd_dbm_per_hz: -174.0,
            noise_figure_bs_db: 8.0,
            noise_figure_user_db: 9.0,
            sim_db: 80.0,
            shadow_std_los_db: 3.0,
            shadow_std_nlos_db: 4.0,
            gamma_max: 6.0,
        }
    }
}

impl ChannelParams {
    /// Uplink (base-station receiver) noise power in dBm.
    pub fn noise_ul_dbm(&self) -> f64 {
        self.noise_psd_dbm_per_hz + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_bs_db
    }

    /// Downlink (user receiver) noise power in dBm.
    pub fn noise_dl_dbm(&self) -> f64 {
        self.noise_psd_dbm_per_hz + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_user_db
    }

    /// Uplink noise power in watts.
    pub fn noise_ul_watts(&self) -> f64 {
        dbm_to_watts(self.noise_ul_dbm())
    }

    /// Downlink noise power in watts.
    pub fn noise_dl_watts(&self) -> f64 {
        dbm_to_watts(self.noise_dl_dbm())
    }

    /// Residual self-interference channel gain (linear) after mitigation.
    pub fn psi_b(&self) -> f64 {
        db_to_linear(-self.sim_db)
    }
}

/// Errors raised while validating a configuration or generating a drop.
#[derive(Debug, Error)]
pub enum ChannelError {
    /// The configuration violates a structural requirement.
    #[error("invalid cell configuration: {0}")]
    InvalidConfig(String),
    /// Rejection sampling could not place a point within the attempt cap.
    #[error("placement failed: {0} rejection attempts exhausted")]
    PlacementFailed(usize),
}

impl CellConfig {
    /// Checks the structural invariants of the geometry.
    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.n_users == 0 {
            return Err(ChannelError::InvalidConfig("n_users must be >= 1".into()));
        }
        if !(self.side_m > 0.0) {
            return Err(ChannelError::InvalidConfig("side_m must be > 0".into()));
        }
        if !(self.exclusion_radius_m >= 0.0) || self.exclusion_radius_m >= self.side_m / 2.0 {
            return Err(ChannelError::InvalidConfig(
                "exclusion radius must lie in [0, side/2)".into(),
            ));
        }
        if let Placement::Hotspot { n_hotspots, radius_m } = &self.placement {
            if *n_hotspots == 0 || self.n_users % n_hotspots != 0 {
                return Err(ChannelError::InvalidConfig(
                    "n_users must divide evenly across hotspots".into(),
                ));
            }
            if !(*radius_m > 0.0) {
                return Err(ChannelError::InvalidConfig("hotspot radius must be > 0".into()));
            }
        }
        if let LosMode::Probabilistic { p_los } = self.los {
            if !(0.0..=1.0).contains(&p_los) {
                return Err(ChannelError::InvalidConfig("p_los must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Power calibration
// ---------------------------------------------------------------------------

/// Maximum transmit powers, in watts, calibrated so that the average SNR of a
/// non-line-of-sight link at the cell-diagonal distance `side * sqrt(2)` is
/// exactly 0 dB in each direction.
pub fn calibrate_pmax(cell: &CellConfig, ch: &ChannelParams) -> (f64, f64) {
    let d_ref_m = cell.side_m * 2f64.sqrt();
    let pl_lin = db_to_linear(pathloss_nlos_db(d_ref_m));
    (ch.noise_ul_watts() * pl_lin, ch.noise_dl_watts() * pl_lin)
}

// ---------------------------------------------------------------------------
// Drop generation
// ---------------------------------------------------------------------------

/// One placement of users with frozen large-scale attenuation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDrop {
    /// Number of users.
    pub n: usize,
    /// User coordinates relative to the base station at the origin, metres.
    pub positions: Vec<[f64; 2]>,
    /// Hotspot centers actually drawn (empty for uniform placement).
    pub hotspot_centers: Vec<[f64; 2]>,
    /// Whether each base-station/user link is line-of-sight.
    pub bs_los: Vec<bool>,
    /// Base-station/user path loss including shadowing, dB.
    pub bs_pathloss_db: Vec<f64>,
    /// User-pair path loss including shadowing, dB; symmetric, diagonal unused.
    pub pair_pathloss_db: Vec<Vec<f64>>,
    /// Linear base-station/user attenuation `10^(-PL/10)` (derived cache).
    pub bs_gain: Vec<f64>,
    /// Linear user-pair attenuation (derived cache); symmetric, diagonal 0.
    pub pair_gain: Vec<Vec<f64>>,
    /// Calibrated maximum uplink transmit power, watts.
    pub p_max_ul_w: f64,
    /// Calibrated maximum downlink transmit power, watts.
    pub p_max_dl_w: f64,
}

/// Per-slot squared channel magnitudes (unit-mean Rayleigh block fading
/// applied to the drop's large-scale attenuation).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `|G_i|^2`, squared base-station/user channel gains.
    pub g_sq: Vec<f64>,
    /// `|H_ij|^2`, squared user-pair channel gains; symmetric, diagonal 0.
    pub h_sq: Vec<Vec<f64>>,
}

impl ChannelRealization {
    /// Order-sensitive checksum of every sample; used to verify that paired
    /// simulation runs consumed identical channel randomness.
    pub fn checksum(&self) -> u64 {
        let mut z = 0u64;
        for &g in &self.g_sq {
            z = z.rotate_left(7) ^ g.to_bits();
        }
        for row in &self.h_sq {
            for &h in row {
                z = z.rotate_left(7) ^ h.to_bits();
            }
        }
        z
    }
}

fn sample_position<R: Rng>(
    rng: &mut R,
    half: f64,
    excl_sq: f64,
    hotspot: Option<([f64; 2], f64)>,
) -> Result<[f64; 2], ChannelError> {
    for _ in 0..REJECTION_CAP {
        let p = match hotspot {
            None => [rng.gen_range(-half..half), rng.gen_range(-half..half)],
            Some((c, r)) => {
                let rad = r * rng.gen_range(0f64..1f64).sqrt();
                let ang = rng.gen_range(0.0..std::f64::consts::TAU);
                [c[0] + rad * ang.cos(), c[1] + rad * ang.sin()]
            }
        };
        let in_cell = p[0].abs() <= half && p[1].abs() <= half;
        if in_cell && p[0] * p[0] + p[1] * p[1] >= excl_sq {
            return Ok(p);
        }
    }
    Err(ChannelError::PlacementFailed(REJECTION_CAP))
}

impl CellDrop {
    /// Draws positions and shadowed path losses for one drop. The same
    /// `(cell, ch, seed)` triple always produces an identical drop.
    pub fn generate(
        cell: &CellConfig,
        ch: &ChannelParams,
        seed: u64,
    ) -> Result<CellDrop, ChannelError> {
        cell.validate()?;
        let n = cell.n_users;
        let half = cell.side_m / 2.0;
        let excl_sq = cell.exclusion_radius_m * cell.exclusion_radius_m;
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, SALT_DROP]));

        let mut hotspot_centers = Vec::new();
        let mut positions = Vec::with_capacity(n);
        match &cell.placement {
            Placement::Uniform => {
                for _ in 0..n {
                    positions.push(sample_position(&mut rng, half, excl_sq, None)?);
                }
            }
            Placement::Hotspot { n_hotspots, radius_m } => {
                for _ in 0..*n_hotspots {
                    hotspot_centers.push([rng.gen_range(-half..half), rng.gen_range(-half..half)]);
                }
                let per = n / n_hotspots;
                for c in &hotspot_centers {
                    for _ in 0..per {
                        positions.push(sample_position(
                            &mut rng,
                            half,
                            excl_sq,
                            Some((*c, *radius_m)),
                        )?);
                    }
                }
            }
        }

        let draw_los = |rng: &mut ChaCha8Rng| match cell.los {
            LosMode::AllNlos => false,
            LosMode::Probabilistic { p_los } => rng.gen_range(0f64..1f64) < p_los,
        };

        let mut bs_los = Vec::with_capacity(n);
        let mut bs_pathloss_db = Vec::with_capacity(n);
        for p in &positions {
            let los = draw_los(&mut rng);
            let d = (p[0] * p[0] + p[1] * p[1]).sqrt();
            let (base, sigma) = if los {
                (pathloss_los_db(d), ch.shadow_std_los_db)
            } else {
                (pathloss_nlos_db(d), ch.shadow_std_nlos_db)
            };
            let z: f64 = rng.sample(StandardNormal);
            bs_los.push(los);
            bs_pathloss_db.push(base + sigma * z);
        }

        let mut pair_pathloss_db = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let los = draw_los(&mut rng);
                let dx = positions[i][0] - positions[j][0];
                let dy = positions[i][1] - positions[j][1];
                let d = (dx * dx + dy * dy).sqrt();
                let (base, sigma) = if los {
                    (pathloss_los_db(d), ch.shadow_std_los_db)
                } else {
                    (pathloss_nlos_db(d), ch.shadow_std_nlos_db)
                };
                let z: f64 = rng.sample(StandardNormal);
                let pl = base + sigma * z;
                pair_pathloss_db[i][j] = pl;
                pair_pathloss_db[j][i] = pl;
            }
        }

        let bs_gain: Vec<f64> = bs_pathloss_db.iter().map(|&pl| db_to_linear(-pl)).collect();
        let mut pair_gain = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    pair_gain[i][j] = db_to_linear(-pair_pathloss_db[i][j]);
                }
            }
        }

        let (p_max_ul_w, p_max_dl_w) = calibrate_pmax(cell, ch);
        Ok(CellDrop {
            n,
            positions,
            hotspot_centers,
            bs_los,
            bs_pathloss_db,
            pair_pathloss_db,
            bs_gain,
            pair_gain,
            p_max_ul_w,
            p_max_dl_w,
        })
    }

    /// Distance from user `i` to the base station, metres.
    pub fn bs_distance(&self, i: usize) -> f64 {
        let p = self.positions[i];
        (p[0] * p[0] + p[1] * p[1]).sqrt()
    }

    /// Distance between users `i` and `j`, metres.
    pub fn pair_distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.positions[i], self.positions[j]);
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    }

    /// Draws the block-fading realization of one slot. Deterministic given
    /// `(seed, slot)`; distinct slots yield independent draws.
    pub fn draw_realization(&self, seed: u64, slot: u64) -> ChannelRealization {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, SALT_REALIZATION, slot]));
        let g_sq: Vec<f64> = self
            .bs_gain
            .iter()
            .map(|&g| g * rng.sample::<f64, _>(Exp1))
            .collect();
        let mut h_sq = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let h = self.pair_gain[i][j] * rng.sample::<f64, _>(Exp1);
                h_sq[i][j] = h;
                h_sq[j][i] = h;
            }
        }
        ChannelRealization { g_sq, h_sq }
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
