use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const STATE_MAGIC: &[u8; 8] = b"ROTFOUR1";

/// Fourier coefficients on the hypercube `[-omega_max, omega_max]^n`,
/// stored row-major with axis 0 slowest and per-axis index `omega_i + omega_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierState {
    n: usize,
    omega_max: usize,
    coeffs: Vec<f64>,
}

impl FourierState {
    pub fn zeros(n: usize, omega_max: usize) -> Result<Self> {
        let len = Self::checked_len(n, omega_max)?;
        Ok(Self { n, omega_max, coeffs: vec![0.0; len] })
    }

    pub fn from_vec(n: usize, omega_max: usize, coeffs: Vec<f64>) -> Result<Self> {
        let len = Self::checked_len(n, omega_max)?;
        if coeffs.len() != len {
            return Err(Error::DimensionMismatch { expected: len, actual: coeffs.len() });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("fourier coefficients".into()));
        }
        Ok(Self { n, omega_max, coeffs })
    }

    /// `(2 omega_max + 1)^n`, or an error if that does not fit in memory indices.
    pub fn checked_len(n: usize, omega_max: usize) -> Result<usize> {
        if n == 0 || omega_max == 0 {
            return Err(Error::InvalidSettings("need n >= 1 and omega_max >= 1".into()));
        }
        let side = 2 * omega_max + 1;
        u32::try_from(n)
            .ok()
            .and_then(|e| side.checked_pow(e))
            .ok_or_else(|| Error::InvalidSettings(format!("(2*{omega_max}+1)^{n} overflows")))
    }

    /// The state with a single unit coefficient at frequency `omega`.
    pub fn indicator(n: usize, omega_max: usize, omega: &[i64]) -> Result<Self> {
        let mut state = Self::zeros(n, omega_max)?;
        let idx = state
            .index_of(omega)
            .ok_or_else(|| Error::InvalidSettings(format!("frequency {omega:?} outside the cube")))?;
        state.coeffs[idx] = 1.0;
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn omega_max(&self) -> usize {
        self.omega_max
    }

    pub fn side(&self) -> usize {
        2 * self.omega_max + 1
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coeffs
    }

    /// Flat index of frequency vector `omega`, if inside the cube.
    pub fn index_of(&self, omega: &[i64]) -> Option<usize> {
        if omega.len() != self.n {
            return None;
        }
        let w = self.omega_max as i64;
        let side = self.side();
        omega.iter().try_fold(0usize, |acc, &o| (-w..=w).contains(&o).then(|| acc * side + (o + w) as usize))
    }

    /// Frequency vector at flat index `idx`.
    pub fn frequency_at(&self, mut idx: usize) -> Vec<i64> {
        let side = self.side();
        let mut omega = vec![0i64; self.n];
        for slot in omega.iter_mut().rev() {
            *slot = (idx % side) as i64 - self.omega_max as i64;
            idx /= side;
        }
        omega
    }

    pub fn get(&self, omega: &[i64]) -> Option<f64> {
        self.index_of(omega).map(|i| self.coeffs[i])
    }

    pub fn norm(&self) -> f64 {
        dot(&self.coeffs, &self.coeffs).sqrt()
    }

    pub fn dot(&self, other: &FourierState) -> f64 {
        dot(&self.coeffs, &other.coeffs)
    }

    /// Scales to unit Euclidean norm; returns the previous norm.
    pub fn normalize(&mut self) -> f64 {
        let norm = self.norm();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            self.coeffs.iter_mut().for_each(|c| *c *= inv);
        }
        norm
    }

    /// `max_omega |psi(omega) - psi(-omega)|`. Negating every frequency
    /// reverses the flat index.
    pub fn reflection_asymmetry(&self) -> f64 {
        let len = self.coeffs.len();
        (0..len / 2 + 1).map(|k| (self.coeffs[k] - self.coeffs[len - 1 - k]).abs()).fold(0.0, f64::max)
    }

    /// Largest coefficient magnitude over frequencies with `|omega|_inf >= shell`.
    pub fn max_beyond(&self, shell: usize) -> f64 {
        let shell = shell as i64;
        (0..self.len())
            .filter(|&k| self.frequency_at(k).iter().any(|o| o.abs() >= shell))
            .map(|k| self.coeffs[k].abs())
            .fold(0.0, f64::max)
    }

    /// Largest coefficient magnitude on the shell `|omega|_inf == shell`.
    pub fn max_on_shell(&self, shell: usize) -> f64 {
        let shell = shell as i64;
        (0..self.len())
            .filter(|&k| self.frequency_at(k).iter().map(|o| o.abs()).max() == Some(shell))
            .map(|k| self.coeffs[k].abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max)
    }

    /// Binary layout: 8-byte magic, `n`, `omega_max`, coefficient count as
    /// little-endian `u64`, then the coefficients as little-endian `f64`.
    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        out.write_all(STATE_MAGIC)?;
        for v in [self.n as u64, self.omega_max as u64, self.coeffs.len() as u64] {
            out.write_all(&v.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(8 * self.coeffs.len());
        for c in &self.coeffs {
            buf.extend_from_slice(&c.to_le_bytes());
        }
        out.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(mut input: impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != STATE_MAGIC {
            return Err(Error::Format("not a fourier state file".into()));
        }
        let mut word = [0u8; 8];
        let mut header = [0u64; 3];
        for h in header.iter_mut() {
            input.read_exact(&mut word)?;
            *h = u64::from_le_bytes(word);
        }
        let [n, omega_max, count] = header.map(|v| v as usize);
        let expected = Self::checked_len(n, omega_max)?;
        if count != expected {
            return Err(Error::Format(format!("header promises {count} coefficients, cube holds {expected}")));
        }
        let mut bytes = vec![0u8; 8 * count];
        input.read_exact(&mut bytes)?;
        let coeffs = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
        Self::from_vec(n, omega_max, coeffs)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = std::io::BufWriter::new(fs::File::create(path)?);
        self.write_to(&mut file)?;
        file.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(fs::File::open(path)?))
    }
}

/// Dot product summed in fixed-size blocks, so the rounding pattern does not
/// depend on how the vector might later be partitioned.
pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    const BLOCK: usize = 4096;
    u.chunks(BLOCK).zip(v.chunks(BLOCK)).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()).sum()
}
