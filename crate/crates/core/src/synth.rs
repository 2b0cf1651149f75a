//! Deterministic synthetic motion corpora and 2D projection.
//!
//! Motions are generated by forward kinematics over a bone chain (or a
//! 17-joint humanoid) whose per-bone direction angles follow sums of
//! sinusoids. Bone lengths are exactly constant by construction, motions are
//! smooth, and every sequence is a pure function of (seed, index).
//!
//! The polar angle of each bone stays within `(0, pi/2)`, so the depth
//! increment along a bone is always positive: an orthographic top-down
//! projection then determines depth uniquely, which keeps the 2D-to-3D
//! lifting task well posed.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::{load_motion, save_motion, MotionSequence, MotionSequence2D, Skeleton};

/// Base polar angle of every bone; harmonic excursions stay within
/// `+-MAX_ANGLE_EXCURSION` of it.
const POLAR_BASE: f64 = PI / 4.0;

/// Polar harmonics use this fraction of the sampled amplitude. Azimuth
/// carries most of the motion; depth varies more gently, which keeps the
/// lifting task well conditioned at desk scale.
const POLAR_AMPLITUDE_SCALE: f64 = 0.3;

/// Largest allowed total harmonic amplitude: keeps the polar angle inside
/// `(0, pi/2)` so the chain never degenerates and depth stays recoverable.
const MAX_ANGLE_EXCURSION: f64 = 0.7;

/// Minimum depth accepted by the perspective projection.
pub const DEPTH_EPSILON: f64 = 1e-6;

/// Which skeleton the generator builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkeletonPreset {
    /// A single kinematic chain of `joints` joints.
    Chain,
    /// The 17-joint humanoid preset (for scale tests); ignores `joints`.
    Humanoid17,
}

/// Synthetic corpus configuration. All fields have defaults, so partial
/// JSON configs are accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub preset: SkeletonPreset,
    /// Chain length when `preset` is `Chain`.
    pub joints: usize,
    pub bone_length_mm: f64,
    /// Frames per sequence.
    pub frames: usize,
    pub fps: f64,
    /// Sinusoidal components per joint angle.
    pub harmonics: usize,
    pub freq_range_hz: (f64, f64),
    pub amplitude_range_rad: (f64, f64),
    pub seed: u64,
    /// Standard deviation of additive 2D noise (mm), applied at projection.
    pub noise_std_2d: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            preset: SkeletonPreset::Chain,
            joints: 5,
            bone_length_mm: 100.0,
            frames: 64,
            fps: 50.0,
            harmonics: 3,
            freq_range_hz: (0.1, 0.5),
            amplitude_range_rad: (0.02, 0.1),
            seed: 0,
            noise_std_2d: 0.0,
        }
    }
}

impl SynthConfig {
    pub fn skeleton(&self) -> Result<Skeleton> {
        match self.preset {
            SkeletonPreset::Chain => Skeleton::chain(self.joints),
            SkeletonPreset::Humanoid17 => Ok(Skeleton::humanoid17()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(Error::InvalidConfig("frames must be >= 1".into()));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::InvalidConfig(format!("fps must be positive, got {}", self.fps)));
        }
        if self.preset == SkeletonPreset::Chain && self.joints == 0 {
            return Err(Error::InvalidConfig("chain needs at least one joint".into()));
        }
        if !(self.bone_length_mm.is_finite() && self.bone_length_mm > 0.0) {
            return Err(Error::InvalidConfig("bone length must be positive".into()));
        }
        if self.harmonics == 0 {
            return Err(Error::InvalidConfig("harmonics must be >= 1".into()));
        }
        let (f_lo, f_hi) = self.freq_range_hz;
        if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo < 0.0 || f_lo > f_hi {
            return Err(Error::InvalidConfig(format!(
                "frequency range ({f_lo}, {f_hi}) is not a valid interval"
            )));
        }
        if f_hi >= self.fps / 2.0 {
            return Err(Error::InvalidConfig(format!(
                "max frequency {f_hi} Hz would alias at {} fps",
                self.fps
            )));
        }
        let (a_lo, a_hi) = self.amplitude_range_rad;
        if !(a_lo.is_finite() && a_hi.is_finite()) || a_lo < 0.0 || a_lo > a_hi {
            return Err(Error::InvalidConfig(format!(
                "amplitude range ({a_lo}, {a_hi}) is not a valid interval"
            )));
        }
        if self.harmonics as f64 * a_hi > MAX_ANGLE_EXCURSION {
            return Err(Error::InvalidConfig(format!(
                "total amplitude {} rad would let the chain degenerate (limit {MAX_ANGLE_EXCURSION})",
                self.harmonics as f64 * a_hi
            )));
        }
        if !(self.noise_std_2d.is_finite() && self.noise_std_2d >= 0.0) {
            return Err(Error::InvalidConfig("noise_std_2d must be nonnegative".into()));
        }
        Ok(())
    }
}

/// RNG for sequence `index` of a corpus seeded with `seed`.
fn sequence_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

struct Harmonic {
    amplitude: f64,
    frequency: f64,
    phase: f64,
}

impl Harmonic {
    fn sample(rng: &mut impl Rng, config: &SynthConfig) -> Self {
        let (a_lo, a_hi) = config.amplitude_range_rad;
        let (f_lo, f_hi) = config.freq_range_hz;
        Harmonic {
            amplitude: if a_lo < a_hi { rng.gen_range(a_lo..a_hi) } else { a_lo },
            frequency: if f_lo < f_hi { rng.gen_range(f_lo..f_hi) } else { f_lo },
            phase: rng.gen_range(0.0..2.0 * PI),
        }
    }

    fn eval(&self, t: f64, fps: f64) -> f64 {
        self.amplitude * (2.0 * PI * self.frequency * t / fps + self.phase).sin()
    }
}

/// One synthetic sequence, a pure function of `(config.seed, index)`.
pub fn generate_one(config: &SynthConfig, index: u64) -> Result<MotionSequence> {
    config.validate()?;
    let skeleton = config.skeleton()?;
    let joints = skeleton.joint_count();
    let mut rng = sequence_rng(config.seed, index);

    struct BoneMotion {
        azimuth_base: f64,
        polar: Vec<Harmonic>,
        azimuth: Vec<Harmonic>,
    }
    let bones: Vec<Option<BoneMotion>> = (0..joints)
        .map(|j| {
            skeleton.parent(j)?;
            let azimuth_base = rng.gen_range(0.0..2.0 * PI);
            let polar = (0..config.harmonics)
                .map(|_| {
                    let mut h = Harmonic::sample(&mut rng, config);
                    h.amplitude *= POLAR_AMPLITUDE_SCALE;
                    h
                })
                .collect();
            let azimuth = (0..config.harmonics)
                .map(|_| Harmonic::sample(&mut rng, config))
                .collect();
            Some(BoneMotion {
                azimuth_base,
                polar,
                azimuth,
            })
        })
        .collect();

    let mut positions = vec![0.0; config.frames * joints * 3];
    for t in 0..config.frames {
        let time = t as f64;
        // Parents precede children in both presets, so one pass suffices.
        for j in 0..joints {
            let Some(bone) = &bones[j] else { continue };
            let parent = skeleton.parent(j).expect("non-root joint has a parent");
            let theta = POLAR_BASE
                + bone.polar.iter().map(|h| h.eval(time, config.fps)).sum::<f64>();
            let psi = bone.azimuth_base
                + bone.azimuth.iter().map(|h| h.eval(time, config.fps)).sum::<f64>();
            let dir = [
                theta.sin() * psi.cos(),
                theta.sin() * psi.sin(),
                theta.cos(),
            ];
            let p_base = (t * joints + parent) * 3;
            let p_out = (t * joints + j) * 3;
            for c in 0..3 {
                positions[p_out + c] = positions[p_base + c] + config.bone_length_mm * dir[c];
            }
        }
    }
    MotionSequence::new(skeleton, config.fps, config.frames, positions)
}

/// Generates `count` sequences; sequence `i` depends only on `(seed, i)`.
pub fn generate(config: &SynthConfig, count: usize) -> Result<Vec<MotionSequence>> {
    (0..count as u64).map(|i| generate_one(config, i)).collect()
}

/// Projection mode for turning 3D ground truth into 2D network input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMode {
    /// Drop the z coordinate.
    OrthoXy,
    /// Pinhole projection `(x, y, z) -> f * (x/z, y/z)`; requires z > 0.
    Persp,
}

/// Projection parameters: the focal length (perspective only) and optional
/// seeded additive noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectionParams {
    pub focal_mm: f64,
    pub noise_std: f64,
    pub noise_seed: u64,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        Self {
            focal_mm: 1000.0,
            noise_std: 0.0,
            noise_seed: 0,
        }
    }
}

/// Standard normal draw via Box-Muller; two uniforms per call.
fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Projects a 3D sequence to 2D input space.
pub fn project_2d(
    seq: &MotionSequence,
    mode: ProjectionMode,
    params: &ProjectionParams,
) -> Result<MotionSequence2D> {
    let joints = seq.joints();
    let mut positions = Vec::with_capacity(seq.frames() * joints * 2);
    for t in 0..seq.frames() {
        for j in 0..joints {
            let [x, y, z] = seq.pos(t, j);
            match mode {
                ProjectionMode::OrthoXy => {
                    positions.push(x);
                    positions.push(y);
                }
                ProjectionMode::Persp => {
                    if z <= DEPTH_EPSILON {
                        return Err(Error::NonPositiveDepth {
                            frame: t,
                            joint: j,
                            depth: z,
                        });
                    }
                    positions.push(params.focal_mm * x / z);
                    positions.push(params.focal_mm * y / z);
                }
            }
        }
    }
    if params.noise_std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(params.noise_seed);
        for p in &mut positions {
            *p += params.noise_std * gaussian(&mut rng);
        }
    }
    MotionSequence2D::new(seq.skeleton().clone(), seq.fps(), seq.frames(), positions)
}

/// Corpus manifest: configuration, a stable content hash of it, and the
/// train/test split by file name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub config: SynthConfig,
    pub config_hash: String,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// FNV-1a over the canonical JSON encoding; stable across runs and platforms.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for b in bytes {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn sequence_file_name(index: usize) -> String {
    format!("seq_{index:05}.json")
}

/// Generates a corpus of `count` sequences into `dir`: one Motion-JSON file
/// per sequence plus `manifest.json`. The first `train_count` indices form
/// the train split, the rest the test split.
pub fn write_corpus(
    config: &SynthConfig,
    count: usize,
    train_count: usize,
    dir: impl AsRef<Path>,
) -> Result<Manifest> {
    config.validate()?;
    if train_count > count {
        return Err(Error::InvalidConfig(format!(
            "train split {train_count} exceeds corpus size {count}"
        )));
    }
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut names = Vec::with_capacity(count);
    for i in 0..count {
        let seq = generate_one(config, i as u64)?;
        let name = sequence_file_name(i);
        save_motion(&seq, dir.join(&name))?;
        names.push(name);
    }
    let config_json = serde_json::to_string(config)?;
    let manifest = Manifest {
        seed: config.seed,
        config: config.clone(),
        config_hash: format!("{:016x}", fnv1a64(config_json.as_bytes())),
        train: names[..train_count].to_vec(),
        test: names[train_count..].to_vec(),
    };
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

/// A corpus loaded back from disk.
pub struct Corpus {
    pub manifest: Manifest,
    pub train: Vec<MotionSequence>,
    pub test: Vec<MotionSequence>,
}

/// Loads a corpus directory written by [`write_corpus`].
pub fn load_corpus(dir: impl AsRef<Path>) -> Result<Corpus> {
    let dir = dir.as_ref();
    let manifest: Manifest =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
    let load_all = |names: &[String]| -> Result<Vec<MotionSequence>> {
        names.iter().map(|n| load_motion(dir.join(n))).collect()
    };
    let train = load_all(&manifest.train)?;
    let test = load_all(&manifest.test)?;
    Ok(Corpus {
        manifest,
        train,
        test,
    })
}
