use super::table::{KernelKind, KernelTable};
use crate::error::{Error, Result};

/// Feedback and output-injection gains sampled on the simulation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GainVectors {
    /// `k(0, y_j)`, `j = 0..=Nx`.
    pub k: Vec<f64>,
    /// `p1(x_i)`, `i = 0..=Nx`.
    pub p1: Vec<f64>,
    pub lambda: f64,
    pub length: f64,
    /// Kernel-grid resolution the gains were taken from.
    pub source_m: usize,
}

impl GainVectors {
    pub fn zero(nx: usize, length: f64) -> Self {
        Self {
            k: vec![0.0; nx + 1],
            p1: vec![0.0; nx + 1],
            lambda: 0.0,
            length,
            source_m: 0,
        }
    }

    pub fn from_tables(controller: &KernelTable, observer: &KernelTable, nx: usize) -> Result<Self> {
        if controller.grid != observer.grid || controller.lambda != observer.lambda {
            return Err(Error::Usage("gain tables come from different grids or lambdas".into()));
        }
        Ok(Self {
            k: extract_feedback_gain(controller, nx)?,
            p1: extract_observer_gain(observer, nx)?,
            lambda: controller.lambda,
            length: controller.grid.length(),
            source_m: controller.grid.subdivisions(),
        })
    }

    pub fn nx(&self) -> usize {
        self.k.len() - 1
    }
}

/// Piecewise-linear resampling of `src` (uniform, `M` panels on `[0, L]`)
/// onto `Nx` panels. Nodes shared by both grids are copied exactly.
pub fn resample(src: &[f64], nx: usize) -> Vec<f64> {
    let m = src.len() - 1;
    (0..=nx)
        .map(|j| {
            let num = j * m;
            let (k, r) = (num / nx, num % nx);
            if r == 0 {
                src[k]
            } else {
                let w = r as f64 / nx as f64;
                (1.0 - w) * src[k] + w * src[k + 1]
            }
        })
        .collect()
}

fn check_kind(table: &KernelTable, want: KernelKind) -> Result<()> {
    if table.kind != want {
        return Err(Error::Usage(format!("expected a {want} table, got {}", table.kind)));
    }
    Ok(())
}

fn check_nx(nx: usize) -> Result<()> {
    if nx < 2 {
        return Err(Error::Config(format!("simulation grid needs Nx >= 2, got {nx}")));
    }
    Ok(())
}

/// Trace `k(0, y)` resampled onto `y_j = j L / Nx`.
pub fn extract_feedback_gain(table: &KernelTable, nx: usize) -> Result<Vec<f64>> {
    check_kind(table, KernelKind::ControllerK)?;
    check_nx(nx)?;
    let m = table.grid.subdivisions();
    let trace: Vec<f64> = (0..=m).map(|j| table.value(0, j)).collect();
    Ok(resample(&trace, nx))
}

/// `p1(x) = p_yy(x, L) + p(x, L)` resampled onto `x_i = i L / Nx`.
pub fn extract_observer_gain(table: &KernelTable, nx: usize) -> Result<Vec<f64>> {
    check_kind(table, KernelKind::ObserverP)?;
    check_nx(nx)?;
    let m = table.grid.subdivisions();
    let p1: Vec<f64> = (0..=m).map(|i| table.d_yy_at_l[i] + table.value(i, m)).collect();
    Ok(resample(&p1, nx))
}
