//! Stochastic engine parameters shared by infer, calibrate and fault-sweep.

use isc_core::lfsr::{SourceKind, DEFAULT_WIDTH};
use isc_core::network::{calibrate_network, LayerCalibration, Network, NetworkConfig};
use isc_core::seed::derive;

use crate::args::{EngineArgs, OverrideArgs};
use crate::error::{CliError, CliResult};
use crate::settings::Settings;

pub const CALIBRATION_PATH: u64 = 0xCA1B;
const DEFAULT_M: u32 = 4;
const DEFAULT_LENGTH: usize = 256;
const DEFAULT_CALIB_SAMPLES: usize = 100;

#[derive(Debug)]
pub struct EngineSpec {
    pub m: u32,
    pub length: usize,
    pub source: SourceKind,
    pub lfsr_width: u32,
    pub calib_samples: usize,
    pub m_prime: Option<Vec<u32>>,
    pub n_tanh: Option<Vec<f64>>,
}

pub fn resolve(a: EngineArgs, o: Option<OverrideArgs>, s: &mut Settings) -> CliResult<EngineSpec> {
    let (m_prime, n_tanh) = match o {
        Some(o) => (s.optional_list("m-prime", o.m_prime)?, s.optional_list("n-tanh", o.n_tanh)?),
        None => (None, None),
    };
    Ok(EngineSpec {
        m: s.value("m", a.m, DEFAULT_M)?,
        length: s.value("length", a.length, DEFAULT_LENGTH)?,
        source: s.value("source", a.source, SourceKind::Lfsr)?,
        lfsr_width: s.value("lfsr-width", a.lfsr_width, DEFAULT_WIDTH)?,
        calib_samples: s.value("calib-samples", a.calib_samples, DEFAULT_CALIB_SAMPLES)?,
        m_prime,
        n_tanh,
    })
}

impl EngineSpec {
    /// Uncalibrated configuration for `net`.
    pub fn base(&self, net: &Network) -> CliResult<NetworkConfig> {
        let mut cfg = NetworkConfig::for_network(net, self.m, self.length)?.with_source(self.source);
        cfg.lfsr_width = self.lfsr_width;
        cfg.check_network(net)?;
        Ok(cfg)
    }

    /// Calibrate on the first `calib_samples` images.
    pub fn calibrate(
        &self,
        net: &Network,
        images: &[Vec<u8>],
        seed: u64,
    ) -> CliResult<(NetworkConfig, Vec<LayerCalibration>)> {
        let base = self.base(net)?;
        let k = self.calib_samples.min(images.len());
        Ok(calibrate_network(net, &base, &images[..k], derive(seed, &[CALIBRATION_PATH]))?)
    }

    /// Calibrated or default configuration with explicit overrides applied.
    pub fn configure(&self, net: &Network, images: &[Vec<u8>], seed: u64) -> CliResult<NetworkConfig> {
        let both = self.m_prime.is_some() && self.n_tanh.is_some();
        let mut cfg = if self.calib_samples > 0 && !both {
            self.calibrate(net, images, seed)?.0
        } else {
            self.base(net)?
        };
        let hidden = cfg.hidden_layers();
        if let Some(mp) = &self.m_prime {
            check_len("m-prime", mp.len(), hidden)?;
            cfg.m_prime = mp.clone();
        }
        if let Some(nt) = &self.n_tanh {
            check_len("n-tanh", nt.len(), hidden)?;
            cfg.n_tanh = nt.clone();
        }
        cfg.check_network(net)?;
        Ok(cfg)
    }
}

fn check_len(key: &str, got: usize, hidden: usize) -> CliResult<()> {
    if got == hidden {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--{key} needs {hidden} values, one per hidden layer, got {got}"
        )))
    }
}
