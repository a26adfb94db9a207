//! Acceptance report: one PASS/FAIL line per criterion, detail lines indented.
//! Exits non-zero when any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use holonomic::chart::{Chart, ControlPoint};
use holonomic::connection::{
    chart_connection, cpn_connection, interferometer_connection, optical_connection,
    CpnConnection, InterferometerConnection, NumericConnection,
};
use holonomic::curvature::{cpn_origin_blocks, curvature_blocks, span_dimension};
use holonomic::fock::{convergence_table, TableConfig};
use holonomic::frames::{
    numeric_connection, CpnCartesianFrame, CpnFamily, CpnFrame, FrameField, HamiltonianFamily,
    InterferometerFrame, SingleModeFrame, TwoModeFrame,
};
use holonomic::holonomy::{
    adiabatic_evolve, area_weighted, berry_phase, dynamical_phase, holonomy_abelian_flux, holonomy_ordered,
    stokes_rectangle, wrap_phase, Measure,
};
use holonomic::loops::{compose, ellipse_loop, invert, polygon_loop, rectangle_loop, reparametrize, Loop};
use holonomic::matrix::{c, expm, pauli, ComplexMatrix};
use holonomic::synthesis::{optical_loop, OpticalKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEPS: usize = 20_000;
const STOKES_CELLS: usize = 600;

/// Published kick-method deviations (%) for N = 5, 10, 20, 26; columns 00, 01, 10, 11.
const KICK_TABLE: [(usize, [f64; 4]); 4] = [
    (5, [0.2419, 0.9119, 0.9119, 1.6763]),
    (10, [0.0595, 0.2260, 0.2260, 0.4061]),
    (20, [0.0149, 0.0558, 0.0558, 0.0760]),
    (26, [0.0099, 0.0186, 0.0186, 0.0269]),
];

struct Report {
    failed: Vec<usize>,
}

impl Report {
    fn criterion(&mut self, id: usize, title: &str, pass: bool, summary: String) {
        println!("{} [{id}] {title}: {summary}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id);
        }
    }
}

fn leg(pass: bool, text: String) -> bool {
    println!("    {} {text}", if pass { "ok  " } else { "FAIL" });
    pass
}

fn info(text: String) {
    println!("    info {text}");
}

fn exp_i(g: &ComplexMatrix, s: f64) -> ComplexMatrix {
    expm(&g.scale(c(0.0, -s))).unwrap()
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn kick_table(r: &mut Report) {
    let t0 = Instant::now();
    let rows = convergence_table(&TableConfig::default()).expect("table");
    let elapsed = t0.elapsed().as_secs_f64();
    let dev = |k: usize, col: usize| rows[k].deviations[col].expect("non-zero reference");
    for (k, row) in rows.iter().enumerate() {
        info(format!(
            "N={:>2}  00={:.4}  01={:.4}  10={:.4}  11={:.4}",
            row.n,
            dev(k, 0),
            dev(k, 1),
            dev(k, 2),
            dev(k, 3)
        ));
    }
    let sym = (0..rows.len()).map(|k| (dev(k, 1) - dev(k, 2)).abs()).fold(0.0, f64::max);
    let a = leg(sym <= 1e-10, format!("(a) max |dev01 − dev10| = {sym:.2e} (≤ 1e-10)"));

    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let mut b = true;
    for col in 0..4 {
        let ys: Vec<f64> = (0..rows.len()).map(|k| dev(k, col)).collect();
        let monotone = ys.windows(2).all(|w| w[1] < w[0]);
        let p = -log_slope(&ns, &ys);
        b &= leg(
            monotone && (p - 2.0).abs() <= 0.3,
            format!("(b) column {col:02b}: monotone = {monotone}, fitted exponent {p:.3} (2 ± 0.3)"),
        );
    }

    let mut c_ok = true;
    for (k, (n, paper)) in KICK_TABLE.iter().enumerate() {
        assert_eq!(rows[k].n, *n);
        for col in 0..4 {
            let rel = (dev(k, col) - paper[col]) / paper[col];
            c_ok &= leg(
                rel.abs() <= 0.3,
                format!("(c) N={n:>2} column {col:02b}: {:.4} vs published {:.4} ({:+.1}%)", dev(k, col), paper[col], 100.0 * rel),
            );
        }
    }
    let t = leg(elapsed <= 60.0, format!("runtime {elapsed:.2} s at cutoff 40 (≤ 60 s)"));
    r.criterion(
        1,
        "kick-method convergence table",
        a && b && c_ok && t,
        format!("symmetry {a}, scaling {b}, ±30% band {c_ok}, runtime {t}"),
    );
}

fn optical_gate(r: &mut Report) {
    let plan = optical_loop(OpticalKind::V, PI / 4.0).unwrap();
    let u = plan.holonomy(STEPS).unwrap().unitary;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let displayed = ComplexMatrix::from_rows(&[
        [c(1.0, 0.0), z, z, z],
        [z, c(s, 0.0), c(0.0, -s), z],
        [z, c(0.0, -s), c(s, 0.0), z],
        [z, z, z, c(1.0, 0.0)],
    ]);
    let d = u.distance(&displayed);
    r.criterion(2, "two-qubit optical gate from C_V", d <= 1e-5, format!("‖Γ − U‖_F = {d:.2e} (≤ 1e-5)"));
}

fn stokes(r: &mut Report) {
    let a = InterferometerConnection;
    let g = pauli::embed_pair(&pauli::sigma2(), 4, 1, 2);
    let (mut target_ok, mut ordered_ok) = (true, true);
    for beta in [0.3, 0.7, 1.2] {
        let rect = rectangle_loop(Chart::Su2Int, (0, 1), &[0.0; 3], [0.0, 0.0], [PI, beta]).unwrap();
        let s = stokes_rectangle(&a, &rect, STOKES_CELLS, STOKES_CELLS).unwrap();
        let o = holonomy_ordered(&a, &rect, STEPS).unwrap().unitary;
        let target = exp_i(&g, 2.0 * beta);
        let dt = s.unitary.distance(&target);
        let dor = s.unitary.distance(&o);
        target_ok &= leg(dt <= 1e-5, format!("β={beta}: ‖stokes − exp(−i2βσ̂2)‖ = {dt:.2e}"));
        ordered_ok &= leg(dor <= 1e-5, format!("β={beta}: ‖stokes − ordered‖ = {dor:.2e} ({} cells)", s.steps));
        let cw = stokes_rectangle(&a, &invert(&rect), STOKES_CELLS, STOKES_CELLS).unwrap().unitary.distance(&target);
        info(format!("β={beta}: clockwise traversal ‖stokes − exp(−i2βσ̂2)‖ = {cw:.2e}"));
    }
    info("the |00⟩ entry of the ordered product is a pure phase; the |11⟩ entry carries the N=2 block".into());
    r.criterion(
        3,
        "non-Abelian Stokes on the SU2INT rectangle",
        target_ok && ordered_ok,
        format!("matches exp(−i2βσ̂2) {target_ok}, matches ordered product {ordered_ok}"),
    );
}

fn irreducibility(r: &mut Report) {
    let closed = span_dimension(&cpn_origin_blocks(2).unwrap()).unwrap();
    let numeric_conn = NumericConnection::new(CpnCartesianFrame { n: 2 });
    let origin = ControlPoint::origin(Chart::CpnCartesian { n: 2 });
    let blocks: Vec<ComplexMatrix> =
        curvature_blocks(&numeric_conn, &origin, 1e-4).unwrap().into_iter().map(|b| b.value).collect();
    let numeric = span_dimension(&blocks).unwrap();
    r.criterion(
        4,
        "CP² curvature span at the origin",
        closed == 4 && numeric == 4,
        format!("closed form {closed}, numeric {numeric} (dim u(2) = 4)"),
    );
}

fn consistency_triangle(r: &mut Report) {
    let chart = Chart::Cpn { n: 2 };
    let a = CpnConnection { n: 2 };
    let sigma = 0.8;
    // Rectangles in the (θ1, φ1) plane; the 2 sin 2θ-weighted area of
    // [θa, θb] × [φa, φa + W] is W (cos 2θa − cos 2θb).
    let height = |theta0: f64, w: f64| -> f64 { 0.5 * ((2.0 * theta0).cos() - sigma / w).acos() - theta0 };
    let shapes = [([0.0, 0.0], PI), ([0.0, 0.5], 2.0), ([0.3, -1.0], 3.0)];
    let mut ordered = Vec::new();
    let (mut flux_ok, mut formula_ok) = (true, true);
    let mut area_ok = true;
    let target = ComplexMatrix::from_diagonal(&[c(0.0, -sigma).exp(), c(1.0, 0.0)]);
    for (corner, w) in shapes {
        let rect = rectangle_loop(chart, (0, 2), &[0.0; 4], corner, [height(corner[0], w), w]).unwrap();
        let area = area_weighted(&rect, Measure::Sphere2ThetaPhi).unwrap();
        area_ok &= leg((area - sigma).abs() <= 1e-9, format!("corner {corner:?}, width {w}: Σ1 = {area:.12}"));
        let o = holonomy_ordered(&a, &rect, STEPS).unwrap().unitary;
        let f = holonomy_abelian_flux(&a, &rect).unwrap().unitary;
        let (dof, dot) = (o.distance(&f), o.distance(&target));
        flux_ok &= leg(dof <= 1e-5, format!("‖ordered − flux‖ = {dof:.2e}"));
        formula_ok &= leg(dot <= 1e-5, format!("‖ordered − exp(−iΣ1|1⟩⟨1|)‖ = {dot:.2e}"));
        let half = ComplexMatrix::from_diagonal(&[c(0.0, -sigma / 2.0).exp(), c(1.0, 0.0)]);
        info(format!("‖ordered − exp(−iΣ1|1⟩⟨1|/2)‖ = {:.2e}", o.distance(&half)));
        ordered.push(o);
    }
    let spread = (0..3)
        .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
        .map(|(i, j)| ordered[i].distance(&ordered[j]))
        .fold(0.0, f64::max);
    let shape_ok = leg(spread <= 1e-5, format!("shape independence: max pairwise distance {spread:.2e}"));
    r.criterion(
        5,
        "consistency triangle on the CP² C1 plane",
        area_ok && flux_ok && formula_ok && shape_ok,
        format!("ordered = flux {flux_ok}, = exp(−iΣ1|β⟩⟨β|) {formula_ok}, shape independent {shape_ok}"),
    );
}

fn random_triangle(rng: &mut ChaCha8Rng, chart: Chart, base: &[f64], spread: f64) -> Loop {
    let dim = chart.dim();
    let mu = rng.random_range(0..dim);
    let nu = (mu + rng.random_range(1..dim)) % dim;
    let b = [base[mu], base[nu]];
    let mut d = || rng.random_range(-spread..spread);
    let v1 = [b[0] + d(), b[1] + d()];
    let v2 = [b[0] + d(), b[1] + d()];
    polygon_loop(chart, (mu, nu), base, &[b, v1, v2]).unwrap()
}

fn group_laws(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let tol = 1e-6;
    let mut worst = [0.0f64; 4];
    for chart in [Chart::Cpn { n: 2 }, Chart::Optical1] {
        let a = chart_connection(chart);
        for _ in 0..20 {
            let base: Vec<f64> = match chart {
                Chart::Optical1 => vec![
                    rng.random_range(-0.5..0.5),
                    rng.random_range(-0.5..0.5),
                    rng.random_range(0.1..0.5),
                    rng.random_range(-PI..PI),
                ],
                _ => (0..4).map(|k| if k < 2 { rng.random_range(0.3..1.2) } else { rng.random_range(-PI..PI) }).collect(),
            };
            let g1 = random_triangle(&mut rng, chart, &base, 0.3);
            let g2 = random_triangle(&mut rng, chart, &base, 0.3);
            let h = |g: &Loop, n: usize| holonomy_ordered(a.as_ref(), g, n).unwrap().unitary;
            let (u1, u2) = (h(&g1, STEPS), h(&g2, STEPS));
            let id = ComplexMatrix::identity(u1.rows());
            worst[0] = worst[0].max(h(&compose(&g1, &g2).unwrap(), 2 * STEPS).distance(&(&u2 * &u1)));
            let triv = Loop::trivial(&g1.basepoint());
            worst[1] = worst[1]
                .max(h(&triv, STEPS).distance(&id))
                .max(h(&compose(&g1, &triv).unwrap(), 2 * STEPS).distance(&u1));
            worst[2] = worst[2]
                .max(h(&invert(&g1), STEPS).distance(&u1.adjoint()))
                .max(h(&compose(&g1, &invert(&g1)).unwrap(), 2 * STEPS).distance(&id));
            let fast = reparametrize(&g1, |t| t * t).unwrap();
            let wobble = reparametrize(&g2, |t| t + 0.1 * (2.0 * PI * t).sin() / PI).unwrap();
            worst[3] = worst[3].max(h(&fast, 4 * STEPS).distance(&u1)).max(h(&wobble, STEPS).distance(&u2));
        }
    }
    let names = ["i) composition", "ii) trivial loop", "iii) inverse", "iv) reparametrization"];
    let mut ok = true;
    for (name, w) in names.iter().zip(worst) {
        ok &= leg(w <= tol, format!("{name}: worst distance {w:.2e}"));
    }
    r.criterion(6, "loop-group laws on CP² and OPTICAL1", ok, format!("20 trials per chart, tolerance {tol:.0e}"));
}

fn connections(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-5;
    let mut worst = [0.0f64; 4];
    // Squeezing at r1 = 0.5 needs a deep Fock space for the frame to converge to 1e-6.
    let single = SingleModeFrame::qubit(100);
    let two = TwoModeFrame { cutoff: 20 };
    let inter = InterferometerFrame::default();
    let cmp = |got: &[ComplexMatrix], f: &dyn FrameField, p: &ControlPoint| -> f64 {
        got.iter()
            .enumerate()
            .map(|(mu, g)| g.distance(&numeric_connection(f, p, mu, h).unwrap()))
            .fold(0.0, f64::max)
    };
    for _ in 0..100 {
        let n = rng.random_range(1..=4);
        let coords: Vec<f64> = (0..2 * n)
            .map(|k| if k < n { rng.random_range(0.05..1.5) } else { rng.random_range(-PI..PI) })
            .collect();
        let p = ControlPoint::new(Chart::Cpn { n }, coords).unwrap();
        let got: Vec<ComplexMatrix> = (0..2 * n).map(|mu| cpn_connection(&p, mu).unwrap()).collect();
        worst[0] = worst[0].max(cmp(&got, &CpnFrame { n }, &p));

        let p = ControlPoint::new(
            Chart::Optical1,
            vec![rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8), rng.random_range(0.0..0.5), rng.random_range(-PI..PI)],
        )
        .unwrap();
        worst[1] = worst[1].max(cmp(&optical_connection(&p).unwrap(), &single, &p));

        let p = ControlPoint::new(
            Chart::Optical2,
            vec![rng.random_range(0.0..0.4), rng.random_range(-PI..PI), rng.random_range(0.0..1.5), rng.random_range(-PI..PI)],
        )
        .unwrap();
        worst[2] = worst[2].max(cmp(&optical_connection(&p).unwrap(), &two, &p));

        let p = ControlPoint::new(Chart::Su2Int, (0..3).map(|_| rng.random_range(-PI..PI)).collect()).unwrap();
        worst[3] = worst[3].max(cmp(&interferometer_connection(&p).unwrap(), &inter, &p));
    }
    let names = ["cpn_connection (n ≤ 4)", "optical_connection OPTICAL1", "optical_connection OPTICAL2", "interferometer_connection"];
    let mut ok = true;
    for (name, w) in names.iter().zip(worst) {
        ok &= leg(w <= 1e-6, format!("{name}: worst Frobenius distance {w:.2e} over 100 points"));
    }
    r.criterion(7, "analytic vs numeric connections", ok, "tolerance 1e-6".into());
}

/// The excited column of the CP¹ frame as a one-dimensional fiber.
struct Excited(CpnFrame);

impl FrameField for Excited {
    fn chart(&self) -> Chart {
        self.0.chart()
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn degenerate_indices(&self) -> Vec<usize> {
        vec![1]
    }
    fn frame(&self, p: &[f64]) -> ComplexMatrix {
        self.0.frame(p)
    }
}

fn adiabatic(r: &mut Report) {
    let chart = Chart::Cpn { n: 1 };
    let family = CpnFamily { n: 1, epsilon: 1.0 };
    let h0 = family.h0();
    let u = |p: &[f64]| family.unitary(p);
    let gamma = ellipse_loop(chart, (0, 1), &[0.0; 2], [0.6, 1.0], [0.3, 0.8]).unwrap();
    let beta0 = berry_phase(&CpnFrame { n: 1 }, &gamma, STEPS).unwrap().total;
    let predicted = c(0.0, beta0).exp();
    let u0 = u(&gamma.point(0.0));
    let ts = [40.0, 80.0, 160.0, 320.0, 640.0];
    let mut errors = Vec::new();
    for &t in &ts {
        let steps = (32.0 * t) as usize;
        let m = adiabatic_evolve(&h0, &u, &gamma, t, steps).unwrap();
        let block = (&(&u0.adjoint() * &m) * &u0).get(0, 0);
        let e = (block - predicted).norm();
        info(format!("T = {t:>4}, {steps:>6} steps: |Γ00 − e^(iβ)| = {e:.3e}"));
        errors.push(e);
    }
    let slope = log_slope(&ts, &errors);
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let conv = leg(decreasing, format!("error decreases with T (steps ∝ T), fitted slope {slope:.3}"));

    // Excited level: total phase = dynamical + geometric.
    let t = 65_536.0;
    let steps = 32 * t as usize;
    let m = adiabatic_evolve(&h0, &u, &gamma, t, steps).unwrap();
    let total = (&(&u0.adjoint() * &m) * &u0).get(1, 1).arg();
    let frame = Excited(CpnFrame { n: 1 });
    let geometric = berry_phase(&frame, &gamma, STEPS).unwrap().total;
    let hamiltonian = |s: f64| {
        let w = u(&gamma.point(s / t));
        &(&w * &h0) * &w.adjoint()
    };
    let psi = |s: f64| u(&gamma.point(s / t)).column(1);
    let dynamical = dynamical_phase(&hamiltonian, &psi, t, 4096).unwrap();
    let gap = wrap_phase(total - dynamical - geometric).abs();
    let closes = leg(
        gap <= 1e-4,
        format!("T = {t}: arg Γ11 = {total:.6}, α = {dynamical:.3}, β = {geometric:.6}, residual {gap:.2e} (≤ 1e-4)"),
    );
    r.criterion(
        8,
        "adiabatic convergence on CP¹",
        conv && closes,
        format!("slope {slope:.3}, phase decomposition residual {gap:.2e}"),
    );
}

fn displacer(r: &mut Report) {
    let frame = SingleModeFrame { cutoff: 40, levels: vec![0] };
    let circle = ellipse_loop(Chart::Optical1, (0, 1), &[0.0; 4], [0.0, 0.0], [1.0, 1.0]).unwrap();
    let b = berry_phase(&frame, &circle, STEPS).unwrap();
    let d = (b.total.abs() - 2.0 * PI).abs();
    r.criterion(
        9,
        "displacer Berry phase on the unit circle",
        d <= 1e-6,
        format!("β = {:.9}, ||β| − 2π| = {d:.2e} (≤ 1e-6)", b.total),
    );
}

fn main() -> ExitCode {
    let mut r = Report { failed: Vec::new() };
    let t0 = Instant::now();
    kick_table(&mut r);
    optical_gate(&mut r);
    stokes(&mut r);
    irreducibility(&mut r);
    consistency_triangle(&mut r);
    group_laws(&mut r);
    connections(&mut r);
    adiabatic(&mut r);
    displacer(&mut r);
    println!("acceptance: {} of 9 criteria pass ({:.1} s)", 9 - r.failed.len(), t0.elapsed().as_secs_f64());
    if r.failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing criteria: {:?}", r.failed);
        ExitCode::FAILURE
    }
}
