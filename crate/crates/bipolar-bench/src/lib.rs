//! Shared fixtures for the criterion benchmarks.

use bipolar_core::evolve::BipolarState;
use bipolar_core::field::ComplexField;
use bipolar_core::grid::Grid;
use bipolar_core::packet::{gaussian_packet, PacketSpec};
use bipolar_core::potential::{PotentialModel, SampledPotential};

pub const MASS: f64 = 2000.0;

pub fn benchmark_grid() -> Grid {
    Grid::new(-35.0, 35.0, 876).unwrap()
}

pub fn benchmark_packet(grid: &Grid) -> ComplexField {
    gaussian_packet(
        &PacketSpec {
            gamma: 0.35,
            x0: -7.0,
            p0: (2.0 * MASS * 0.0027_f64).sqrt(),
            mass: MASS,
            t0: 0.0,
        },
        grid,
    )
    .unwrap()
}

pub fn single_surface_state(grid: Grid) -> BipolarState {
    let plus = benchmark_packet(&grid);
    BipolarState::single_surface(plus, ComplexField::zeros(grid), 0.0, MASS).unwrap()
}

pub fn two_surface_state(grid: Grid) -> BipolarState {
    let plus = benchmark_packet(&grid);
    BipolarState::new(
        vec![
            (plus, ComplexField::zeros(grid)),
            (ComplexField::zeros(grid), ComplexField::zeros(grid)),
        ],
        0.0,
        MASS,
    )
    .unwrap()
}

pub fn eckart(grid: &Grid) -> SampledPotential {
    SampledPotential::new(&PotentialModel::eckart(0.0024, 2.5).unwrap(), grid)
}

pub fn coupled(grid: &Grid) -> SampledPotential {
    SampledPotential::new(
        &PotentialModel::two_surface(0.0024, 0.00072, 2.5).unwrap(),
        grid,
    )
}
