//! Reproducible synthetic regression instances `y = X w* + ξ`.
//!
//! Every random quantity is drawn from its own ChaCha20 stream whose key is a
//! SHA-256 digest of `(master seed, run index, purpose)`, so an instance only
//! depends on its configuration and never on scheduling.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::optim::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureDistribution {
    Normal,
    LogNormal,
    Rademacher,
}

impl FeatureDistribution {
    pub const ALL: [FeatureDistribution; 3] = [Self::Normal, Self::LogNormal, Self::Rademacher];

    pub fn tag(self) -> u32 {
        match self {
            Self::Normal => 0,
            Self::LogNormal => 1,
            Self::Rademacher => 2,
        }
    }

    pub fn from_tag(tag: u32) -> Result<Self> {
        match tag {
            0 => Ok(Self::Normal),
            1 => Ok(Self::LogNormal),
            2 => Ok(Self::Rademacher),
            _ => Err(Error::Parse(format!("unknown distribution tag {tag}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Normal => "normal",
            Self::LogNormal => "lognormal",
            Self::Rademacher => "rademacher",
        }
    }

    /// One standardized draw.
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Self::Normal => rng.sample(StandardNormal),
            Self::LogNormal => {
                let z: f64 = rng.sample(StandardNormal);
                (z.exp() - LOGNORMAL_MEAN) / LOGNORMAL_SD
            }
            Self::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

impl fmt::Display for FeatureDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(Self::Normal),
            "lognormal" | "log-normal" => Ok(Self::LogNormal),
            "rademacher" => Ok(Self::Rademacher),
            other => Err(Error::Parse(format!("unknown distribution '{other}'"))),
        }
    }
}

/// `E[exp(Z)] = e^{1/2}`.
const LOGNORMAL_MEAN: f64 = 1.648_721_270_700_128_2;
/// `sqrt(Var[exp(Z)]) = sqrt((e − 1)·e)`.
const LOGNORMAL_SD: f64 = 2.161_197_415_895_087_7;

/// Purpose tag mixed into the stream key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamTag {
    Features,
    Noise,
    /// Gaussian vectors `h` for the path and auxiliary experiments.
    PathVector,
}

impl StreamTag {
    fn bytes(self) -> &'static [u8] {
        match self {
            Self::Features => b"features",
            Self::Noise => b"noise",
            Self::PathVector => b"path-vector",
        }
    }
}

/// Deterministic random stream keyed by `(seed, run_index, tag)`.
pub fn stream(seed: u64, run_index: u64, tag: StreamTag) -> ChaCha20Rng {
    let mut hasher = Sha256::new();
    hasher.update(b"bpinterp/v1");
    hasher.update(seed.to_le_bytes());
    hasher.update(run_index.to_le_bytes());
    hasher.update(tag.bytes());
    let key: [u8; 32] = hasher.finalize().into();
    ChaCha20Rng::from_seed(key)
}

/// Standard Gaussian vector of length `d` from the path stream.
pub fn gaussian_vector(d: usize, seed: u64, run_index: u64) -> Vec<f64> {
    let mut rng = stream(seed, run_index, StreamTag::PathVector);
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum GroundTruth {
    /// `(1, 0, …, 0)`.
    UnitFirst,
    Explicit(Vec<f64>),
}

impl GroundTruth {
    pub fn materialize(&self, d: usize) -> Vec<f64> {
        match self {
            GroundTruth::UnitFirst => {
                let mut w = vec![0.0; d];
                if d > 0 {
                    w[0] = 1.0;
                }
                w
            }
            GroundTruth::Explicit(w) => w.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceConfig {
    pub n: usize,
    pub d: usize,
    pub sigma2: f64,
    pub dist: FeatureDistribution,
    pub w_star: GroundTruth,
    pub seed: u64,
    pub run_index: u64,
}

impl InstanceConfig {
    pub fn new(n: usize, d: usize, sigma2: f64, dist: FeatureDistribution, seed: u64, run_index: u64) -> Self {
        Self { n, d, sigma2, dist, w_star: GroundTruth::UnitFirst, seed, run_index }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::InvalidConfig(format!("n and d must be positive (n={}, d={})", self.n, self.d)));
        }
        if self.d < self.n {
            return Err(Error::InvalidConfig(format!("need d ≥ n (n={}, d={})", self.n, self.d)));
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidConfig(format!("sigma2 must be finite and ≥ 0, got {}", self.sigma2)));
        }
        if let GroundTruth::Explicit(w) = &self.w_star {
            if w.len() != self.d {
                return Err(Error::InvalidConfig(format!(
                    "explicit w_star has length {}, expected d={}",
                    w.len(),
                    self.d
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RegressionInstance {
    pub x: Matrix,
    pub w_star: Vec<f64>,
    pub xi: Vec<f64>,
    pub y: Vec<f64>,
    pub config: InstanceConfig,
}

/// `n × d` matrix of i.i.d. standardized entries, filled row by row.
pub fn gen_features<R: Rng + ?Sized>(n: usize, d: usize, dist: FeatureDistribution, rng: &mut R) -> Matrix {
    let data: Vec<f64> = (0..n * d).map(|_| dist.sample(rng)).collect();
    Matrix::from_row_major(n, d, data).expect("sizes agree by construction")
}

pub fn gen_instance(cfg: &InstanceConfig) -> Result<RegressionInstance> {
    cfg.validate()?;
    let mut feature_rng = stream(cfg.seed, cfg.run_index, StreamTag::Features);
    let x = gen_features(cfg.n, cfg.d, cfg.dist, &mut feature_rng);

    let mut noise_rng = stream(cfg.seed, cfg.run_index, StreamTag::Noise);
    let sigma = cfg.sigma2.sqrt();
    let xi: Vec<f64> = (0..cfg.n)
        .map(|_| {
            let z: f64 = noise_rng.sample(StandardNormal);
            sigma * z
        })
        .collect();

    let w_star = cfg.w_star.materialize(cfg.d);
    let y: Vec<f64> = x.mul_vec(&w_star).iter().zip(&xi).map(|(a, b)| a + b).collect();
    Ok(RegressionInstance { x, w_star, xi, y, config: cfg.clone() })
}

const MAGIC: &[u8; 4] = b"BPI1";

/// Writes the instance as a 32-byte header (`BPI1`, n, d, dist tag, seed)
/// followed by X (row-major), w*, ξ and y as little-endian f64.
pub fn write_instance(inst: &RegressionInstance, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(&(inst.config.n as u64).to_le_bytes())?;
    out.write_all(&(inst.config.d as u64).to_le_bytes())?;
    out.write_all(&inst.config.dist.tag().to_le_bytes())?;
    out.write_all(&inst.config.seed.to_le_bytes())?;
    for v in inst.x.as_slice().iter().chain(&inst.w_star).chain(&inst.xi).chain(&inst.y) {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Reads an instance written by [`write_instance`]. The run index and noise
/// level are not stored, so the returned config carries `run_index = 0` and
/// the empirical `sigma2 = 0`.
pub fn read_instance(path: &Path) -> Result<RegressionInstance> {
    let mut input = BufReader::new(File::open(path)?);
    let mut header = [0u8; 32];
    input.read_exact(&mut header)?;
    if &header[..4] != MAGIC {
        return Err(Error::Parse("bad instance magic".into()));
    }
    let u64_at = |o: usize| u64::from_le_bytes(header[o..o + 8].try_into().unwrap());
    let n = u64_at(4) as usize;
    let d = u64_at(12) as usize;
    let dist = FeatureDistribution::from_tag(u32::from_le_bytes(header[20..24].try_into().unwrap()))?;
    let seed = u64_at(24);
    let mut read_vec = |len: usize| -> Result<Vec<f64>> {
        let mut buf = vec![0u8; len * 8];
        input.read_exact(&mut buf)?;
        Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    };
    let x = Matrix::from_row_major(n, d, read_vec(n * d)?)?;
    let w_star = read_vec(d)?;
    let xi = read_vec(n)?;
    let y = read_vec(n)?;
    let config = InstanceConfig {
        n,
        d,
        sigma2: 0.0,
        dist,
        w_star: GroundTruth::Explicit(w_star.clone()),
        seed,
        run_index: 0,
    };
    Ok(RegressionInstance { x, w_star, xi, y, config })
}
