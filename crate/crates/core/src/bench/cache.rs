//! Binary offline cache: everything `plan` needs without re-solving the tube.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "HJBA"  u32 version
//! grid    f64 lo[3], f64 hi[3], u64 n[3]
//! values  f64 × n0·n1·n2, θ fastest
//! mask    ceil(len / 8) bytes, bit i of byte i/8 (LSB first) = cell i safe
//! batch   u64 seed, u8 truncated, u64 count, count × (u64 id, f64 x, f64 y, f64 θ)
//! scene   u64 byte length, UTF-8 scenario TOML
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::grid::{Grid3, ValueField};
use crate::pipeline::Precomputed;
use crate::safe_set::{ConnectedState, SafetyMask};
use crate::scenario::{parse_scenario, scenario_to_toml, Scenario};

pub const MAGIC: &[u8; 4] = b"HJBA";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct OfflineCache {
    pub scenario: Scenario,
    pub field: ValueField,
    pub mask: SafetyMask,
    pub connected: Vec<ConnectedState>,
    pub seed: u64,
    pub truncated: bool,
}

impl OfflineCache {
    pub fn new(scenario: Scenario, pre: Precomputed) -> Self {
        OfflineCache {
            scenario,
            field: pre.field,
            mask: pre.mask,
            connected: pre.connected,
            seed: pre.seed,
            truncated: pre.truncated,
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        if self.field.grid != self.mask.grid {
            return Err(Error::GridMismatch);
        }
        let g = &self.field.grid;
        let mut out = Vec::with_capacity(64 + 8 * g.len() + g.len() / 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        for v in g.lo.iter().chain(&g.hi) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for &n in &g.n {
            out.extend_from_slice(&(n as u64).to_le_bytes());
        }
        for v in &self.field.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let mut bits = vec![0u8; g.len().div_ceil(8)];
        for (i, _) in self.mask.safe.iter().enumerate().filter(|(_, &s)| s) {
            bits[i / 8] |= 1 << (i % 8);
        }
        out.extend_from_slice(&bits);
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.push(self.truncated as u8);
        out.extend_from_slice(&(self.connected.len() as u64).to_le_bytes());
        for c in &self.connected {
            out.extend_from_slice(&(c.id as u64).to_le_bytes());
            for v in [c.pose.x, c.pose.y, c.pose.theta] {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let scene = scenario_to_toml(&self.scenario);
        out.extend_from_slice(&(scene.len() as u64).to_le_bytes());
        out.extend_from_slice(scene.as_bytes());
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, at: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Cache("not an offline cache (bad magic)".into()));
        }
        let version = u32::from_le_bytes(r.array()?);
        if version != FORMAT_VERSION {
            return Err(Error::Cache(format!("format version {version}, expected {FORMAT_VERSION}")));
        }
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for v in lo.iter_mut().chain(hi.iter_mut()) {
            *v = r.f64()?;
        }
        let mut n = [0usize; 3];
        for k in &mut n {
            *k = usize::try_from(r.u64()?).map_err(|_| Error::Cache("grid size overflows".into()))?;
        }
        let grid = Grid3::new((lo[0], hi[0]), (lo[1], hi[1]), n)?;
        if grid.lo[2] != lo[2] || grid.hi[2] != hi[2] {
            return Err(Error::Cache("heading axis must span [-pi, pi)".into()));
        }
        let len = n.iter().try_fold(1usize, |a, &b| a.checked_mul(b));
        let len = len.filter(|&l| l.saturating_mul(8) <= bytes.len()).ok_or_else(|| truncated())?;
        let values = (0..len).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let bits = r.take(len.div_ceil(8))?;
        let safe = (0..len).map(|i| bits[i / 8] >> (i % 8) & 1 == 1).collect();
        let seed = r.u64()?;
        let truncated_flag = match r.take(1)?[0] {
            0 => false,
            1 => true,
            b => return Err(Error::Cache(format!("bad truncation flag {b}"))),
        };
        let count = r.u64()? as usize;
        if count.saturating_mul(32) > bytes.len() {
            return Err(truncated());
        }
        let mut connected = Vec::with_capacity(count);
        for _ in 0..count {
            let id = r.u64()? as usize;
            let pose = Pose::new(r.f64()?, r.f64()?, r.f64()?);
            connected.push(ConnectedState { pose, id });
        }
        let scene_len = r.u64()? as usize;
        let scene = std::str::from_utf8(r.take(scene_len)?).map_err(|_| Error::Cache("scenario is not UTF-8".into()))?;
        let scenario = parse_scenario(scene)?;
        if r.at != bytes.len() {
            return Err(Error::Cache(format!("{} trailing bytes", bytes.len() - r.at)));
        }
        Ok(OfflineCache {
            scenario,
            field: ValueField { grid: grid.clone(), values },
            mask: SafetyMask { grid, safe },
            connected,
            seed,
            truncated: truncated_flag,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    /// Nodes inside the tube.
    pub fn tube_cells(&self) -> usize {
        self.field.values.iter().filter(|&&v| v <= 0.0).count()
    }

    /// Nodes both inside the tube and safe.
    pub fn safe_reachable_cells(&self) -> usize {
        self.field.values.iter().zip(&self.mask.safe).filter(|(&v, &s)| s && v <= 0.0).count()
    }
}

fn truncated() -> Error {
    Error::Cache("unexpected end of data".into())
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(truncated)?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("slice has length N"))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
}
