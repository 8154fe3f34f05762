//! Discretized von Neumann measurement with a Gaussian pointer.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, CVector, ComplexScalar};
use crate::quantum::Observable;
use crate::weak::DEFAULT_OVERLAP_FLOOR;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeterConfig {
    pub grid_points: usize,
    pub x_extent: f64,
    pub sigma_x: f64,
}

impl Default for MeterConfig {
    fn default() -> Self {
        Self {
            grid_points: 1024,
            x_extent: 20.0,
            sigma_x: 1.0,
        }
    }
}

impl MeterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 128 || !self.grid_points.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "grid_points must be a power of two >= 128, got {}",
                self.grid_points
            )));
        }
        if !(self.sigma_x.is_finite() && self.sigma_x > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sigma_x must be positive, got {}",
                self.sigma_x
            )));
        }
        if !(self.x_extent.is_finite() && self.x_extent >= 8.0 * self.sigma_x) {
            return Err(Error::InvalidConfig(format!(
                "x_extent {} must be at least 8 sigma_x ({})",
                self.x_extent,
                8.0 * self.sigma_x
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.x_extent / self.grid_points as f64
    }

    pub fn positions(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.grid_points).map(|j| -self.x_extent + j as f64 * dx).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn momenta(&self) -> Vec<f64> {
        let n = self.grid_points as i64;
        let scale = 2.0 * PI / (n as f64 * self.dx());
        (0..n)
            .map(|k| if k < (n + 1) / 2 { k } else { k - n } as f64 * scale)
            .collect()
    }

    /// `σ_p² = 1/(4σ_x²)` for the minimum-uncertainty pointer.
    pub fn momentum_variance(&self) -> f64 {
        1.0 / (4.0 * self.sigma_x * self.sigma_x)
    }

    /// Sampled `(2πσ²)^{-1/4} exp(−x²/4σ²)`, scaled by `sqrt(dx)` and renormalized on the grid.
    pub fn pointer(&self) -> Vec<ComplexScalar> {
        let s2 = self.sigma_x * self.sigma_x;
        let amp = (2.0 * PI * s2).powf(-0.25) * self.dx().sqrt();
        let raw: Vec<f64> = self
            .positions()
            .iter()
            .map(|x| amp * (-x * x / (4.0 * s2)).exp())
            .collect();
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        raw.into_iter().map(|v| c64(v / norm, 0.0)).collect()
    }
}

/// Sign of the coupling `exp(∓iγ O⊗P)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CouplingSign {
    /// `exp(−iγ O⊗P)`: eigenvalue `λ` shifts the pointer by `+γλ`.
    #[default]
    Negative,
    /// `exp(+iγ O⊗P)`: shift `−γλ`.
    Positive,
}

impl CouplingSign {
    fn direction(self) -> f64 {
        match self {
            CouplingSign::Negative => 1.0,
            CouplingSign::Positive => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub observable: Observable,
    pub psi_i: CVector,
    pub psi_f: CVector,
    pub gamma: f64,
    pub meter: MeterConfig,
    #[serde(default)]
    pub sign: CouplingSign,
}

impl ProtocolConfig {
    pub fn new(observable: Observable, psi_i: CVector, psi_f: CVector, gamma: f64) -> Self {
        Self {
            observable,
            psi_i,
            psi_f,
            gamma,
            meter: MeterConfig::default(),
            sign: CouplingSign::default(),
        }
    }

    fn with_gamma(&self, gamma: f64) -> Self {
        Self { gamma, ..self.clone() }
    }

    fn validate(&self) -> Result<()> {
        self.meter.validate()?;
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        let d = self.observable.dim();
        for psi in [&self.psi_i, &self.psi_f] {
            if psi.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: psi.dim(),
                });
            }
        }
        let shift = self.gamma * self.observable.max_abs_eigenvalue();
        let limit = self.meter.x_extent / 4.0;
        if shift >= limit {
            return Err(Error::GridOverflow { shift, limit });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    pub mean_x: f64,
    pub mean_p: f64,
    pub success_prob: f64,
    pub conditioned_meter: CVector,
    /// Norm of the joint system–meter state after the coupling.
    pub joint_norm: f64,
}

fn translate(
    fft: &dyn Fft<f64>,
    ifft: &dyn Fft<f64>,
    wave: &[ComplexScalar],
    momenta: &[f64],
    shift: f64,
) -> Vec<ComplexScalar> {
    let n = wave.len() as f64;
    let mut buf = wave.to_vec();
    fft.process(&mut buf);
    for (z, p) in buf.iter_mut().zip(momenta) {
        *z *= ComplexScalar::from_polar(1.0 / n, -p * shift);
    }
    ifft.process(&mut buf);
    buf
}

pub fn run_protocol(c: &ProtocolConfig) -> Result<ProtocolResult> {
    c.validate()?;
    let overlap_sq = c.psi_f.inner(&c.psi_i)?.norm_sqr();
    if overlap_sq < DEFAULT_OVERLAP_FLOOR {
        return Err(Error::NearOrthogonalPostselection {
            overlap_sq,
            floor: DEFAULT_OVERLAP_FLOOR,
        });
    }
    let m = &c.meter;
    let n = m.grid_points;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let pointer = m.pointer();
    let momenta = m.momenta();

    let mut conditioned = vec![c64(0.0, 0.0); n];
    let mut joint_norm_sq = 0.0;
    for (lambda, e) in c.observable.spectrum().iter().zip(c.observable.eigenvectors()) {
        let amp_i = e.inner(&c.psi_i)?;
        let weight = c.psi_f.inner(e)? * amp_i;
        let shifted = translate(
            fft.as_ref(),
            ifft.as_ref(),
            &pointer,
            &momenta,
            c.sign.direction() * c.gamma * lambda,
        );
        joint_norm_sq += amp_i.norm_sqr() * shifted.iter().map(|z| z.norm_sqr()).sum::<f64>();
        for (acc, z) in conditioned.iter_mut().zip(&shifted) {
            *acc += weight * z;
        }
    }

    let success_prob: f64 = conditioned.iter().map(|z| z.norm_sqr()).sum();
    if success_prob <= 0.0 {
        return Err(Error::NearOrthogonalPostselection {
            overlap_sq: success_prob,
            floor: DEFAULT_OVERLAP_FLOOR,
        });
    }
    let mean_x = m
        .positions()
        .iter()
        .zip(&conditioned)
        .map(|(x, z)| x * z.norm_sqr())
        .sum::<f64>()
        / success_prob;
    let mut spectrum = conditioned.clone();
    fft.process(&mut spectrum);
    let total: f64 = spectrum.iter().map(|z| z.norm_sqr()).sum();
    let mean_p = momenta
        .iter()
        .zip(&spectrum)
        .map(|(p, z)| p * z.norm_sqr())
        .sum::<f64>()
        / total;

    let scale = c64(1.0 / success_prob.sqrt(), 0.0);
    Ok(ProtocolResult {
        mean_x,
        mean_p,
        success_prob,
        conditioned_meter: CVector::new(conditioned.into_iter().map(|z| z * scale).collect())?,
        joint_norm: joint_norm_sq.sqrt(),
    })
}

/// Neville extrapolation of `(h_k, v_k)` samples to `h = 0`.
fn extrapolate_to_zero(h: &[f64], v: &[f64]) -> f64 {
    let mut p = v.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (h[i] * p[i + 1] - h[i + m] * p[i]) / (h[i] - h[i + m]);
        }
    }
    p[0]
}

fn check_convergence(channel: &str, gammas: &[f64], values: &[f64]) -> Result<()> {
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    for (k, pair) in diffs.windows(2).enumerate() {
        let noise = 1e-12 * (1.0 + values[k + 1].abs());
        if pair[1] > noise && pair[1] >= pair[0] {
            return Err(Error::OutsideWeakRegime(format!(
                "{channel} channel not converging: |Δ| = {:.3e} at gamma {} after {:.3e} at gamma {}; values {:?}",
                pair[1],
                gammas[k + 2],
                pair[0],
                gammas[k + 1],
                values
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftEstimate {
    pub re_est: f64,
    pub im_est: f64,
    pub runs: Vec<(f64, ProtocolResult)>,
}

pub fn weak_shift_estimate(c: &ProtocolConfig, gamma_ladder: &[f64]) -> Result<ShiftEstimate> {
    if gamma_ladder.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "gamma ladder needs at least 3 values, got {}",
            gamma_ladder.len()
        )));
    }
    if gamma_ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidConfig("gamma ladder must be strictly decreasing".into()));
    }
    let runs: Vec<(f64, ProtocolResult)> = gamma_ladder
        .par_iter()
        .map(|&g| run_protocol(&c.with_gamma(g)).map(|r| (g, r)))
        .collect::<Result<_>>()?;
    let dir = c.sign.direction();
    let sp2 = c.meter.momentum_variance();
    let re: Vec<f64> = runs.iter().map(|(g, r)| r.mean_x / (dir * g)).collect();
    let im: Vec<f64> = runs.iter().map(|(g, r)| r.mean_p / (2.0 * dir * g * sp2)).collect();
    check_convergence("real", gamma_ladder, &re)?;
    check_convergence("imaginary", gamma_ladder, &im)?;
    Ok(ShiftEstimate {
        re_est: extrapolate_to_zero(gamma_ladder, &re),
        im_est: extrapolate_to_zero(gamma_ladder, &im),
        runs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeterRecord {
    pub gamma: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub success_prob: f64,
    pub re_est: f64,
    pub im_est: f64,
}

impl ShiftEstimate {
    pub fn records(&self) -> Vec<MeterRecord> {
        self.runs
            .iter()
            .map(|(g, r)| MeterRecord {
                gamma: *g,
                mean_x: r.mean_x,
                mean_p: r.mean_p,
                success_prob: r.success_prob,
                re_est: self.re_est,
                im_est: self.im_est,
            })
            .collect()
    }
}
