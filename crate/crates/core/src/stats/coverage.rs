use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sphere::SpherePoint;
use crate::stats::measure::CellScheme;
use crate::systems::{HypothesisReport, IfsSystem};

/// Refinement of the reporting cells used to deduplicate word images.
pub const DEDUP_REFINEMENT: usize = 64;
pub const DEFAULT_FRONTIER_BUDGET: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoverageRow {
    pub depth: usize,
    pub visited: usize,
    pub total: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverageReport {
    pub cells_total: usize,
    pub cells_visited: usize,
    pub fraction: f64,
    pub depth_reached: usize,
    pub points_generated: u64,
    /// The frontier budget cut a level short.
    pub partial: bool,
    pub per_depth: Vec<CoverageRow>,
    pub hypotheses: HypothesisReport,
}

/// Breadth-first images of `z0` under all words of length `≤ depth`,
/// keeping one representative per cell of a grid `DEDUP_REFINEMENT` times
/// finer than the reporting cells.
pub fn coverage_probe(
    sys: &IfsSystem,
    z0: SpherePoint,
    depth: usize,
    cells: usize,
    frontier_budget: usize,
) -> Result<CoverageReport> {
    if sys.is_special(&z0) {
        return Err(Error::DegenerateStart(format!("z0 = {z0} is a distinguished point")));
    }
    let coarse = CellScheme::with_cells(cells)?;
    let fine = CellScheme::with_cells(cells * DEDUP_REFINEMENT)?;
    let mut visited = vec![false; coarse.cells()];
    let mut seen = HashSet::new();
    let mark = |p: &SpherePoint, visited: &mut [bool]| visited[coarse.cell_of(p)] = true;
    mark(&z0, &mut visited);
    seen.insert(fine.cell_of(&z0));
    let mut frontier = vec![z0];
    let mut points: u64 = 1;
    let mut partial = false;
    let mut per_depth = vec![CoverageRow {
        depth: 0,
        visited: 1,
        total: coarse.cells(),
        fraction: 1.0 / coarse.cells() as f64,
    }];
    let mut reached = 0;
    for d in 1..=depth {
        let mut next = Vec::new();
        'level: for p in &frontier {
            for s in 0..2u8 {
                let q = sys.map(s).apply(p)?;
                points += 1;
                mark(&q, &mut visited);
                if seen.insert(fine.cell_of(&q)) {
                    if next.len() == frontier_budget {
                        partial = true;
                        break 'level;
                    }
                    next.push(q);
                }
            }
        }
        reached = d;
        let v = visited.iter().filter(|&&b| b).count();
        per_depth.push(CoverageRow {
            depth: d,
            visited: v,
            total: coarse.cells(),
            fraction: v as f64 / coarse.cells() as f64,
        });
        if next.is_empty() || partial {
            break;
        }
        frontier = next;
    }
    let cells_visited = visited.iter().filter(|&&b| b).count();
    Ok(CoverageReport {
        cells_total: coarse.cells(),
        cells_visited,
        fraction: cells_visited as f64 / coarse.cells() as f64,
        depth_reached: reached,
        points_generated: points,
        partial,
        per_depth,
        hypotheses: sys.check_hypotheses(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn depth_zero_is_one_cell() {
        let sys = IfsSystem::critical(Complex64::new(0.35, 0.35), 0.5).unwrap();
        let r = coverage_probe(&sys, SpherePoint::from_re_im(0.3, 0.0), 0, 1000, DEFAULT_FRONTIER_BUDGET).unwrap();
        assert_eq!(r.cells_visited, 1);
        assert_eq!(r.fraction, 1.0 / 1000.0);
    }

    #[test]
    fn real_parameter_stays_on_the_real_circle() {
        let sys = IfsSystem::critical(Complex64::new(0.5, 0.0), 0.5).unwrap();
        let r = coverage_probe(&sys, SpherePoint::from_re_im(0.3, 0.0), 14, 1000, DEFAULT_FRONTIER_BUDGET).unwrap();
        // the real great circle crosses each of the 20 bands in two sectors
        assert!(r.cells_visited <= 40, "{}", r.cells_visited);
        assert_eq!(r.fraction, r.cells_visited as f64 / r.cells_total as f64);
    }

    #[test]
    fn budget_flags_partial() {
        let sys = IfsSystem::critical(Complex64::new(0.35, 0.35), 0.5).unwrap();
        let r = coverage_probe(&sys, SpherePoint::from_re_im(0.3, 0.0), 20, 1000, 50).unwrap();
        assert!(r.partial);
        assert!(r.depth_reached < 20);
    }

    #[test]
    fn distinguished_start_rejected() {
        let sys = IfsSystem::critical(Complex64::new(0.35, 0.35), 0.5).unwrap();
        assert!(coverage_probe(&sys, SpherePoint::ZERO, 3, 100, 100).is_err());
    }
}
