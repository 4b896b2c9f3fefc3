//! Shared fixtures for the benchmark targets.

use nalgebra::Vector2;
use rtm2d_core::forward::{generate_dataset, ScatterDataSet, Scene, SolverSelection};
use rtm2d_core::geometry::{make_aperture, BoundaryCondition, ParametricBoundary};
use rtm2d_core::green::WaveConfig;
use rtm2d_core::Point;

pub fn e1() -> Vector2<f64> {
    Vector2::new(1.0, 0.0)
}

/// Desk-scale PEC-circle dataset used by the imaging benchmarks.
pub fn circle_dataset(transducers: usize) -> ScatterDataSet {
    let wave = WaveConfig::from_wavelength(0.5).unwrap();
    let aperture = make_aperture(transducers, 100.0, transducers, 100.0).unwrap();
    let scene = Scene::single(
        ParametricBoundary::circle(1.0, Point::zeros()),
        BoundaryCondition::Pec,
    );
    generate_dataset(
        &scene,
        &aperture,
        &wave,
        &[e1()],
        SolverSelection::default(),
    )
    .unwrap()
}
