use std::f64::consts::PI;

use serde::Serialize;

use crate::chart::OrbitPoint;
use crate::error::{Error, Result};
use crate::rds::{continue_orbit, Mergeable, Observer, OrbitState, StepEvent, SymbolStream};
use crate::sphere::SpherePoint;
use crate::systems::{HypothesisReport, IfsSystem};

/// Equal-area cells on the unit sphere: `n_lat` bands of equal height in the
/// polar coordinate `Z` (equal area by Archimedes) times `n_lon` equal
/// longitude sectors. `0` sits at the south pole `Z = −1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CellScheme {
    pub n_lat: usize,
    pub n_lon: usize,
}

impl CellScheme {
    /// Factors `cells = n_lat · n_lon` with `n_lon / n_lat` closest to `π`
    /// (cells roughly square near the equator).
    pub fn with_cells(cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidParameter("need at least one cell".into()));
        }
        let mut best = (1, cells);
        let mut best_err = f64::INFINITY;
        for n_lat in 1..=cells {
            if !cells.is_multiple_of(n_lat) {
                continue;
            }
            let err = ((cells / n_lat) as f64 / n_lat as f64 / PI).ln().abs();
            if err < best_err {
                best_err = err;
                best = (n_lat, cells / n_lat);
            }
        }
        Ok(Self {
            n_lat: best.0,
            n_lon: best.1,
        })
    }

    pub fn cells(&self) -> usize {
        self.n_lat * self.n_lon
    }

    pub fn cell_of_unit(&self, v: [f64; 3]) -> usize {
        let band = (((v[2] + 1.0) * 0.5 * self.n_lat as f64) as usize).min(self.n_lat - 1);
        let lon = v[1].atan2(v[0]);
        let sector = (((lon + PI) / (2.0 * PI) * self.n_lon as f64) as usize) % self.n_lon;
        band * self.n_lon + sector
    }

    pub fn cell_of(&self, p: &SpherePoint) -> usize {
        self.cell_of_unit(p.to_unit_sphere())
    }

    /// `(lat_lo, lat_hi, lon_lo, lon_hi)` in radians.
    pub fn bounds(&self, cell: usize) -> (f64, f64, f64, f64) {
        let band = cell / self.n_lon;
        let sector = cell % self.n_lon;
        let z = |j: usize| -1.0 + 2.0 * j as f64 / self.n_lat as f64;
        let lon = |j: usize| -PI + 2.0 * PI * j as f64 / self.n_lon as f64;
        (z(band).asin(), z(band + 1).asin(), lon(sector), lon(sector + 1))
    }

    /// Spherical area of a cell, `ΔZ · Δlon`.
    pub fn area(&self, cell: usize) -> f64 {
        let (a, b, c, d) = self.bounds(cell);
        (b.sin() - a.sin()) * (d - c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SphereHistogram {
    pub scheme: CellScheme,
    pub counts: Vec<u64>,
    pub total: u64,
    /// Chordal radius of the ball around `0` tracked separately.
    pub near_radius: f64,
    pub near_zero: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HistogramRow {
    pub bin: usize,
    pub lat_lo: f64,
    pub lat_hi: f64,
    pub lon_lo: f64,
    pub lon_hi: f64,
    pub mass: f64,
}

impl SphereHistogram {
    pub fn new(scheme: CellScheme, near_radius: f64) -> Self {
        Self {
            scheme,
            counts: vec![0; scheme.cells()],
            total: 0,
            near_radius,
            near_zero: 0,
        }
    }

    pub fn record(&mut self, p: &OrbitPoint) {
        self.counts[self.scheme.cell_of(&p.to_sphere())] += 1;
        self.total += 1;
        if p.chordal_to_zero() < self.near_radius {
            self.near_zero += 1;
        }
    }

    pub fn mass_near_zero(&self) -> f64 {
        self.near_zero as f64 / self.total as f64
    }

    pub fn rows(&self) -> Vec<HistogramRow> {
        self.counts
            .iter()
            .enumerate()
            .map(|(bin, &c)| {
                let (lat_lo, lat_hi, lon_lo, lon_hi) = self.scheme.bounds(bin);
                HistogramRow {
                    bin,
                    lat_lo,
                    lat_hi,
                    lon_lo,
                    lon_hi,
                    mass: c as f64 / self.total as f64,
                }
            })
            .collect()
    }
}

impl Mergeable for SphereHistogram {
    fn merge(&mut self, other: Self) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.total += other.total;
        self.near_zero += other.near_zero;
    }
}

impl Observer for SphereHistogram {
    fn observe(&mut self, ev: &StepEvent<'_>) -> std::result::Result<(), String> {
        self.record(ev.point);
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CesaroReport {
    pub histogram: SphereHistogram,
    pub burnin: u64,
    pub n_steps: u64,
    pub mass_near_zero: f64,
    pub hypotheses: HypothesisReport,
    pub regime: String,
}

/// Histogram of `z_n` for `burnin ≤ n < N`.
pub fn empirical_cesaro_measure(
    sys: &IfsSystem,
    z0: SpherePoint,
    n: u64,
    burnin: u64,
    cells: usize,
    near_radius: f64,
    stream: &mut SymbolStream,
) -> Result<CesaroReport> {
    if n <= burnin {
        return Err(Error::InvalidParameter(format!("need N > burnin, got N = {n}, burnin = {burnin}")));
    }
    let mut hist = SphereHistogram::new(CellScheme::with_cells(cells)?, near_radius);
    let mut state = OrbitState::new(sys, z0);
    continue_orbit(sys, &mut state, stream, burnin, &mut [])?;
    continue_orbit(sys, &mut state, stream, n - burnin, &mut [&mut hist])?;
    let hypotheses = sys.check_hypotheses();
    Ok(CesaroReport {
        mass_near_zero: hist.mass_near_zero(),
        histogram: hist,
        burnin,
        n_steps: n,
        regime: hypotheses.regime().to_string(),
        hypotheses,
    })
}
