//! Fixtures shared by the engine benchmarks.

use std::f64::consts::PI;

use holonomic::fock::KickSchedule;
use holonomic::loops::rectangle_loop;
use holonomic::matrix::{c, ComplexMatrix};
use holonomic::{Chart, Loop};

/// A dense anti-hermitian `n×n` matrix with entries of order one.
pub fn antihermitian(n: usize) -> ComplexMatrix {
    let m = ComplexMatrix::from_fn(n, n, |i, j| c(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64 - 1.0));
    m.antihermitian_part()
}

/// The `(θ1, θ2)` rectangle on CP², a genuinely non-Abelian loop.
pub fn cp2_loop() -> Loop {
    rectangle_loop(Chart::Cpn { n: 2 }, (0, 1), &[0.0, 0.0, 0.3, -0.4], [0.2, 0.1], [0.6, 0.8]).expect("valid rectangle")
}

/// The interferometer rectangle in `(α, β)`.
pub fn interferometer_loop() -> Loop {
    rectangle_loop(Chart::Su2Int, (0, 1), &[0.0; 3], [0.0, 0.0], [PI, 0.7]).expect("valid rectangle")
}

/// The kick polygon of the convergence table with `n` vertices.
pub fn kick_schedule(n: usize) -> KickSchedule {
    KickSchedule::circle(1.0, n, 0.1, 1.0).expect("valid schedule")
}
