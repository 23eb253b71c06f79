//! Families of linear functionals on R^m and their measure vectors, with
//! built-in generators for the standard examples.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{self, Vector};
use crate::rational::{rat, Rational};
use crate::rng::Rng;

/// A family `L = (L_j : j in J)` of rational linear functionals on R^m,
/// stored as row vectors of length `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    m: usize,
    rows: Vec<Vector>,
}

impl Configuration {
    /// Rows must be nonzero and of length `m >= 1`. Structural hypotheses
    /// beyond that (nondegeneracy and friends) are the checkers' business,
    /// not the constructor's.
    pub fn new(m: usize, rows: Vec<Vector>) -> Result<Self> {
        if m == 0 {
            return Err(Error::BadParameter("dimension m must be >= 1".into()));
        }
        if rows.is_empty() {
            return Err(Error::BadParameter(
                "configuration needs at least one row".into(),
            ));
        }
        for (j, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::BadParameter(format!(
                    "row {j} has length {}, expected {m}",
                    row.len()
                )));
            }
            if linalg::is_zero_vector(row) {
                return Err(Error::BadParameter(format!("row {j} is zero")));
            }
        }
        Ok(Configuration { m, rows })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn slots(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vector] {
        &self.rows
    }

    pub fn row(&self, j: usize) -> &Vector {
        &self.rows[j]
    }

    /// `L_j(x)`.
    pub fn apply(&self, j: usize, x: &[Rational]) -> Rational {
        linalg::dot(&self.rows[j], x)
    }
}

/// Strictly positive target measures `e = (e_j : j in J)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureVector {
    e: Vec<Rational>,
}

impl MeasureVector {
    pub fn new(e: Vec<Rational>) -> Result<Self> {
        for (j, v) in e.iter().enumerate() {
            if *v <= Rational::zero() {
                return Err(Error::BadParameter(format!("e_{j} must be positive")));
            }
        }
        Ok(MeasureVector { e })
    }

    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }

    pub fn get(&self, j: usize) -> &Rational {
        &self.e[j]
    }

    pub fn values(&self) -> &[Rational] {
        &self.e
    }

    pub fn min(&self) -> Rational {
        self.e.iter().min().expect("empty measure vector").clone()
    }
}

/// Built-in configuration presets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Preset {
    /// m = 2, rows (1,0), (0,1), (-1,-1); the convolution form on three sets.
    RieszSobolev,
    /// m = k+1, rows (1, a) for a in {0,1}^k; 2^k slots.
    Gowers { k: usize },
    /// n rows in R^m with entries from {-3,...,3}, rejection-sampled until
    /// nondegenerate. Deterministic for a fixed seed.
    Random { n: usize, m: usize, seed: u64 },
}

/// Retry budget for the random preset's rejection sampler.
pub const RANDOM_RETRY_BUDGET: usize = 1000;

/// Builds a preset configuration with its default measure vector
/// (riesz-sobolev: e = (2,2,2); gowers: all 1; random: all 2).
pub fn builtin_config(preset: &Preset) -> Result<(Configuration, MeasureVector)> {
    match preset {
        Preset::RieszSobolev => {
            let rows = vec![
                vec![rat(1), rat(0)],
                vec![rat(0), rat(1)],
                vec![rat(-1), rat(-1)],
            ];
            let config = Configuration::new(2, rows)?;
            let e = MeasureVector::new(vec![rat(2), rat(2), rat(2)])?;
            Ok((config, e))
        }
        Preset::Gowers { k } => {
            if *k < 1 || *k > 6 {
                return Err(Error::BadParameter("gowers k must be in 1..=6".into()));
            }
            let m = k + 1;
            let mut rows = Vec::with_capacity(1 << k);
            for alpha in 0u32..(1 << k) {
                let mut row = vec![rat(1)];
                for bit in 0..*k {
                    row.push(rat(((alpha >> bit) & 1) as i64));
                }
                rows.push(row);
            }
            let config = Configuration::new(m, rows)?;
            let e = MeasureVector::new(vec![rat(1); 1 << k])?;
            Ok((config, e))
        }
        Preset::Random { n, m, seed } => {
            if *m < 2 {
                return Err(Error::BadParameter("random preset needs m >= 2".into()));
            }
            if *n < m + 1 {
                return Err(Error::BadParameter(
                    "random preset needs n >= m + 1 rows for nondegeneracy".into(),
                ));
            }
            let mut rng = Rng::new(*seed);
            for _ in 0..RANDOM_RETRY_BUDGET {
                let mut rows = Vec::with_capacity(*n);
                for _ in 0..*n {
                    loop {
                        let row: Vector = (0..*m).map(|_| rat(rng.int_in(-3, 3))).collect();
                        if !linalg::is_zero_vector(&row) {
                            rows.push(row);
                            break;
                        }
                    }
                }
                let config = Configuration::new(*m, rows)?;
                if crate::conditions::check_nondegenerate(&config).nondegenerate {
                    let e = MeasureVector::new(vec![rat(2); *n])?;
                    return Ok((config, e));
                }
            }
            Err(Error::RandomRetriesExhausted(RANDOM_RETRY_BUDGET))
        }
    }
}

/// Parses a preset name as used on the command line: `riesz-sobolev`,
/// `gowers` (with k), or `random` (with n, m, seed).
pub fn parse_preset(name: &str, k: usize, n: usize, m: usize, seed: u64) -> Result<Preset> {
    match name {
        "riesz-sobolev" => Ok(Preset::RieszSobolev),
        "gowers" => Ok(Preset::Gowers { k }),
        "random" => Ok(Preset::Random { n, m, seed }),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}
