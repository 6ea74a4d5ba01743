//! Logistic-map orbits `x_{n+1} = c x_n (1 - x_n)` as estimator input.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::EstimatorWeights;
use crate::sample::{Sample, SampleSource};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitConfig {
    pub c: f64,
    pub x0: f64,
    pub burn_in: usize,
    pub length: usize,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        Self {
            c: 4.0,
            x0: 0.1,
            burn_in: 1000,
            length: 5000,
        }
    }
}

impl OrbitConfig {
    pub fn with_c(self, c: f64) -> Self {
        Self { c, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=4.0).contains(&self.c) {
            return Err(Error::InvalidArgument(format!("c = {} must lie in [0, 4]", self.c)));
        }
        if !(self.x0 > 0.0 && self.x0 < 1.0) {
            return Err(Error::InvalidArgument(format!("x0 = {} must lie in (0, 1)", self.x0)));
        }
        if self.length < 2 {
            return Err(Error::InvalidArgument(format!(
                "orbit length must be at least 2, got {}",
                self.length
            )));
        }
        Ok(())
    }
}

/// The `length` iterates after `burn_in`, in iteration order.
pub fn orbit_values(cfg: &OrbitConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let c = cfg.c;
    let mut x = cfg.x0;
    for _ in 0..cfg.burn_in {
        x = c * x * (1.0 - x);
    }
    Ok((0..cfg.length)
        .map(|_| {
            x = c * x * (1.0 - x);
            x
        })
        .collect())
}

/// Post-burn-in orbit as a sorted sample.
pub fn orbit(cfg: &OrbitConfig) -> Result<Sample> {
    Sample::new(
        orbit_values(cfg)?,
        SampleSource::Orbit {
            c: cfg.c,
            x0: cfg.x0,
            burn_in: cfg.burn_in,
            length: cfg.length,
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub c_grid: Vec<f64>,
    pub eta_grid: Vec<f64>,
    pub orbit: OrbitConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub c: f64,
    pub eta: f64,
    pub qfgcpe: f64,
}

/// Estimates on the orbit for every `(c, η)`, `c` outer and `η` inner.
pub fn entropy_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.c_grid.is_empty() || spec.eta_grid.is_empty() {
        return Err(Error::InvalidArgument("c and eta grids must not be empty".into()));
    }
    spec.orbit.validate()?;
    for &c in &spec.c_grid {
        spec.orbit.with_c(c).validate()?;
    }
    let weights = spec
        .eta_grid
        .iter()
        .map(|&eta| EstimatorWeights::new(spec.orbit.length, eta))
        .collect::<Result<Vec<_>>>()?;
    let per_c: Vec<Vec<SweepRow>> = spec
        .c_grid
        .par_iter()
        .map(|&c| {
            let s = orbit(&spec.orbit.with_c(c))?;
            Ok(weights
                .iter()
                .map(|w| SweepRow {
                    c,
                    eta: w.eta(),
                    qfgcpe: w.apply(s.values()),
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_c.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPoint {
    pub c: f64,
    pub x: f64,
}

/// The last `keep` post-burn-in iterates for each `c`, unsorted.
pub fn bifurcation_points(c_grid: &[f64], template: &OrbitConfig, keep: usize) -> Result<Vec<BifurcationPoint>> {
    if keep < 1 {
        return Err(Error::InvalidArgument("keep must be at least 1".into()));
    }
    if keep > template.length {
        return Err(Error::InvalidArgument(format!(
            "keep = {keep} exceeds the orbit length {}",
            template.length
        )));
    }
    let per_c: Vec<Vec<BifurcationPoint>> = c_grid
        .par_iter()
        .map(|&c| {
            let xs = orbit_values(&template.with_c(c))?;
            Ok(xs[xs.len() - keep..]
                .iter()
                .map(|&x| BifurcationPoint { c, x })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_c.into_iter().flatten().collect())
}

/// `lo, lo + step, …` up to `hi` (included when it lies on the lattice).
pub fn range_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidArgument(format!(
            "grid {lo}:{hi}:{step} needs lo <= hi and a positive step"
        )));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > 10_000_000 {
        return Err(Error::InvalidArgument(format!("grid {lo}:{hi}:{step} has too many points")));
    }
    Ok((0..count).map(|i| (lo + i as f64 * step).min(hi)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_points() {
        let cfg = OrbitConfig::default();
        let zero = orbit(&cfg.with_c(0.0)).unwrap();
        assert!(zero.values().iter().all(|&x| x == 0.0));
        let two = orbit(&cfg.with_c(2.0)).unwrap();
        let v = two.values();
        assert!(v[v.len() - 1] - v[0] < 1e-10);
        assert!((v[0] - 0.5).abs() < 1e-10);
        let four = orbit(&cfg.with_c(4.0)).unwrap();
        let v = four.values();
        assert!(v[v.len() - 1] - v[0] > 0.9);
    }

    #[test]
    fn invalid_configs() {
        let cfg = OrbitConfig::default();
        assert!(orbit(&cfg.with_c(4.1)).is_err());
        assert!(orbit(&OrbitConfig { x0: 0.0, ..cfg }).is_err());
        assert!(orbit(&OrbitConfig { length: 1, ..cfg }).is_err());
    }

    #[test]
    fn bifurcation_clusters() {
        let cfg = OrbitConfig::default();
        let pts = bifurcation_points(&[2.0], &cfg, 10).unwrap();
        assert_eq!(pts.len(), 10);
        assert!(pts.iter().all(|p| (p.x - 0.5).abs() < 1e-10));
        let pts = bifurcation_points(&[1.0], &cfg, 10).unwrap();
        assert!(pts.iter().all(|p| p.x.abs() < 1e-3));
        let mut xs: Vec<f64> = bifurcation_points(&[3.2], &cfg, 100).unwrap().iter().map(|p| p.x).collect();
        xs.sort_by(f64::total_cmp);
        let clusters = 1 + xs.windows(2).filter(|w| w[1] - w[0] > 1e-6).count();
        assert_eq!(clusters, 2);
        assert!(bifurcation_points(&[3.2], &cfg, 0).is_err());
    }

    #[test]
    fn sweep_order_and_grid() {
        let spec = SweepSpec {
            c_grid: vec![2.0, 3.7],
            eta_grid: vec![0.25, 0.5],
            orbit: OrbitConfig::default(),
        };
        let rows = entropy_sweep(&spec).unwrap();
        let keys: Vec<(f64, f64)> = rows.iter().map(|r| (r.c, r.eta)).collect();
        assert_eq!(keys, vec![(2.0, 0.25), (2.0, 0.5), (3.7, 0.25), (3.7, 0.5)]);
        assert!(rows[0].qfgcpe < 1e-6);
        let g = range_grid(1.0, 4.0, 0.005).unwrap();
        assert_eq!(g.len(), 601);
        assert_eq!(*g.last().unwrap(), 4.0);
        assert!(range_grid(1.0, 0.0, 0.1).is_err());
    }
}
