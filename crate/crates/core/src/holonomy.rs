//! Holonomies `Γ_A(γ) = P exp ∮_γ A`: ordered mid-point products, Abelian
//! flux integrals, the non-Abelian Stokes surface form, weighted areas, the
//! kicked adiabatic evolution and the Abelian Berry and dynamical phases.
//!
//! Ordering: the transport `U(t)` solves `dU = A(dγ) U`, so factors for later
//! parameter values multiply on the left and
//! `Γ(compose(γ1, γ2)) = Γ(γ2) Γ(γ1)`. The curvature seen by this transport
//! around a counter-clockwise cell is `K = ∂_σA_τ − ∂_τA_σ − [A_σ, A_τ]`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connection::ConnectionField;
use crate::curvature::exterior_derivative;
use crate::error::{Error, Result};
use crate::frames::{directional_connection, FrameField, DEFAULT_STEP};
use crate::loops::{Loop, Segment, Shape, CLOSURE_TOL};
use crate::matrix::{c, expm, structure_defects, ComplexMatrix, C64, STRUCTURE_TOL};

/// Steps per parallel work item in ordered products.
const CHUNK: usize = 256;

/// Difference step for derivatives of connection components.
const FIELD_STEP: f64 = 1e-5;

/// A holonomy with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolonomyResult {
    pub unitary: ComplexMatrix,
    /// Number of factors (ordered products) or quadrature nodes (surface forms).
    pub steps: usize,
    /// `‖Γ†Γ − I‖_F`.
    pub unitarity_defect: f64,
    /// Error estimate from a run at half resolution.
    pub richardson_error: f64,
}

impl HolonomyResult {
    fn new(unitary: ComplexMatrix, steps: usize, coarse: &ComplexMatrix, order: i32) -> Result<Self> {
        let unitarity_defect = structure_defects(&unitary)?.unitarity;
        let richardson_error = unitary.distance(coarse) / (2f64.powi(order) - 1.0);
        Ok(Self { unitary, steps, unitarity_defect, richardson_error })
    }
}

fn check_loop(a: &dyn ConnectionField, gamma: &Loop) -> Result<()> {
    a.chart().expect(gamma.chart())?;
    let gap = gamma.closure_gap();
    if gap > CLOSURE_TOL {
        return Err(Error::OpenLoop(gap));
    }
    Ok(())
}

fn segment_steps(seg: &Segment, steps: usize) -> usize {
    ((steps as f64 * seg.duration()).round() as usize).max(1)
}

/// Ordered product of `count` factors, combined in parallel chunks with the
/// later chunk on the left.
fn ordered_product<F>(n: usize, count: usize, factor: F) -> ComplexMatrix
where
    F: Fn(usize) -> ComplexMatrix + Sync,
{
    let chunks: Vec<ComplexMatrix> = (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|k| {
            let mut u = ComplexMatrix::identity(n);
            for j in (k * CHUNK)..((k + 1) * CHUNK).min(count) {
                u = &factor(j) * &u;
            }
            u
        })
        .collect();
    chunks.into_iter().fold(ComplexMatrix::identity(n), |acc, u| &u * &acc)
}

fn transport(a: &dyn ConnectionField, gamma: &Loop, steps: usize) -> (ComplexMatrix, usize) {
    let n = a.block_dim();
    let plan: Vec<(usize, usize)> = gamma
        .segments()
        .iter()
        .enumerate()
        .flat_map(|(k, seg)| {
            let m = segment_steps(seg, steps);
            (0..m).map(move |j| (k, j))
        })
        .collect();
    let counts: Vec<usize> = gamma.segments().iter().map(|s| segment_steps(s, steps)).collect();
    let u = ordered_product(n, plan.len(), |idx| {
        let (k, j) = plan[idx];
        let seg = &gamma.segments()[k];
        let m = counts[k] as f64;
        let (s0, s1) = (j as f64 / m, (j + 1) as f64 / m);
        let mid = seg.at(0.5 * (s0 + s1));
        let delta: Vec<f64> = seg.at(s1).iter().zip(seg.at(s0)).map(|(b, a)| b - a).collect();
        expm(&a.contract(&mid, &delta)).expect("square connection block")
    });
    (u, plan.len())
}

/// Path-ordered mid-point product `Π_k exp(Σ_μ A_μ(p_k) Δλ^μ_k)`, later
/// factors on the left. Each segment receives `round(steps · duration)`
/// factors (at least one).
pub fn holonomy_ordered(a: &dyn ConnectionField, gamma: &Loop, steps: usize) -> Result<HolonomyResult> {
    if steps == 0 {
        return Err(Error::Parameter("steps must be at least 1".into()));
    }
    check_loop(a, gamma)?;
    let (u, used) = transport(a, gamma, steps);
    let (coarse, _) = transport(a, gamma, (steps / 2).max(1));
    HolonomyResult::new(u, used, &coarse, 2)
}

/// Named area weights on a coordinate plane `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// `1`
    Flat,
    /// `2 sin 2u`: the sphere with polar angle `2θ` and azimuth `φ`.
    #[serde(rename = "sphere_2theta_phi")]
    Sphere2ThetaPhi,
    /// `cos u`: the sphere with polar angle `π/2 − u`.
    SphereCopolar,
    /// `2 e^{−2v}`
    HyperbolicDecay,
    /// `2 e^{2v}`
    HyperbolicGrowth,
    /// `sinh 4u`
    Sinh4,
    /// `2 sinh 2u`
    TwoSinh2,
}

impl Measure {
    pub const ALL: [Measure; 7] = [
        Measure::Flat,
        Measure::Sphere2ThetaPhi,
        Measure::SphereCopolar,
        Measure::HyperbolicDecay,
        Measure::HyperbolicGrowth,
        Measure::Sinh4,
        Measure::TwoSinh2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Measure::Flat => "flat",
            Measure::Sphere2ThetaPhi => "sphere_2theta_phi",
            Measure::SphereCopolar => "sphere_copolar",
            Measure::HyperbolicDecay => "hyperbolic_decay",
            Measure::HyperbolicGrowth => "hyperbolic_growth",
            Measure::Sinh4 => "sinh4",
            Measure::TwoSinh2 => "two_sinh2",
        }
    }

    pub fn weight(&self, u: f64, v: f64) -> f64 {
        match self {
            Measure::Flat => 1.0,
            Measure::Sphere2ThetaPhi => 2.0 * (2.0 * u).sin(),
            Measure::SphereCopolar => u.cos(),
            Measure::HyperbolicDecay => 2.0 * (-2.0 * v).exp(),
            Measure::HyperbolicGrowth => 2.0 * (2.0 * v).exp(),
            Measure::Sinh4 => (4.0 * u).sinh(),
            Measure::TwoSinh2 => 2.0 * (2.0 * u).sinh(),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown measure '{s}'")))
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let p = p1;
                dp = n as f64 * (x * p - p0) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Resolution of the cone quadrature.
#[derive(Debug, Clone, Copy)]
struct ConeRule {
    radial: usize,
    panels: usize,
    per_panel: usize,
}

const FINE: ConeRule = ConeRule { radial: 16, panels: 8, per_panel: 8 };
const COARSE: ConeRule = ConeRule { radial: 8, panels: 4, per_panel: 8 };

fn require_plane(gamma: &Loop) -> Result<(usize, usize)> {
    let plane = gamma
        .plane()
        .ok_or_else(|| Error::Parameter("loop does not lie in a known coordinate plane".into()))?;
    let base = gamma.basepoint().coords;
    for k in 0..=64 {
        let p = gamma.point(k as f64 / 64.0);
        for (mu, (&x, &b)) in p.iter().zip(&base).enumerate() {
            if mu != plane.0 && mu != plane.1 && (x - b).abs() > CLOSURE_TOL {
                return Err(Error::Parameter(format!("loop leaves its plane along coordinate {mu}")));
            }
        }
    }
    Ok(plane)
}

/// Nodes `(u, v)` and signed weights of `∬_{D(γ)} f du dv`, using the cone
/// `Φ(s, t) = c + s(γ(t) − c)` from the centroid `c` with Jacobian
/// `s · (γ − c) × γ'`. Valid for any closed planar curve.
fn cone_nodes(gamma: &Loop, plane: (usize, usize), rule: ConeRule) -> Vec<([f64; 2], f64)> {
    let proj = |p: Vec<f64>| [p[plane.0], p[plane.1]];
    let samples = 256;
    let mut center = [0.0, 0.0];
    for k in 0..samples {
        let q = proj(gamma.point(k as f64 / samples as f64));
        center[0] += q[0] / samples as f64;
        center[1] += q[1] / samples as f64;
    }
    let t_rule = gauss_legendre(rule.per_panel);
    let s_rule = gauss_legendre(rule.radial);
    let h = 2e-4;
    let mut nodes = Vec::new();
    for seg in gamma.segments() {
        for panel in 0..rule.panels {
            for &(x, w) in &t_rule {
                let u = (panel as f64 + 0.5 * (x + 1.0)) / rule.panels as f64;
                let wt = 0.5 * w / rule.panels as f64;
                let q = proj(seg.at(u));
                let (p1, m1) = (proj(seg.at(u + h)), proj(seg.at(u - h)));
                let (p2, m2) = (proj(seg.at(u + 2.0 * h)), proj(seg.at(u - 2.0 * h)));
                let d = |k: usize| (8.0 * (p1[k] - m1[k]) - (p2[k] - m2[k])) / (12.0 * h);
                let dq = [d(0), d(1)];
                let r = [q[0] - center[0], q[1] - center[1]];
                let cross = r[0] * dq[1] - r[1] * dq[0];
                if cross == 0.0 {
                    continue;
                }
                for &(y, ws) in &s_rule {
                    let s = 0.5 * (y + 1.0);
                    let point = [center[0] + s * r[0], center[1] + s * r[1]];
                    nodes.push((point, s * cross * wt * 0.5 * ws));
                }
            }
        }
    }
    nodes
}

/// Signed `∬_{D(γ)} w(u, v) du dv` over the region enclosed by a planar
/// loop, positive for counter-clockwise traversal.
pub fn area_weighted(gamma: &Loop, measure: Measure) -> Result<f64> {
    let plane = require_plane(gamma)?;
    Ok(cone_nodes(gamma, plane, FINE).iter().map(|&([u, v], w)| w * measure.weight(u, v)).sum())
}

/// [`area_weighted`] with the measure given by name.
pub fn area_weighted_named(gamma: &Loop, measure: &str) -> Result<f64> {
    area_weighted(gamma, measure.parse()?)
}

fn plane_point(base: &[f64], plane: (usize, usize), uv: [f64; 2]) -> Vec<f64> {
    let mut p = base.to_vec();
    p[plane.0] = uv[0];
    p[plane.1] = uv[1];
    p
}

fn flux(a: &dyn ConnectionField, gamma: &Loop, plane: (usize, usize), rule: ConeRule) -> Result<(ComplexMatrix, usize)> {
    let base = gamma.basepoint().coords;
    let nodes = cone_nodes(gamma, plane, rule);
    let parts: Vec<(ComplexMatrix, f64)> = nodes
        .par_iter()
        .map(|&(uv, w)| {
            let p = plane_point(&base, plane, uv);
            let (am, an) = (a.component(&p, plane.0), a.component(&p, plane.1));
            let comm = (&am * &an - &an * &am).frobenius_norm();
            (exterior_derivative(a, &p, plane.0, plane.1, FIELD_STEP).scale_real(w), comm)
        })
        .collect();
    let worst = parts.iter().map(|p| p.1).fold(0.0, f64::max);
    if worst > STRUCTURE_TOL {
        return Err(Error::NotAbelian(worst));
    }
    let n = a.block_dim();
    let total = parts.into_iter().fold(ComplexMatrix::zeros(n, n), |acc, (m, _)| acc + m);
    Ok((expm(&total)?, nodes.len()))
}

/// `exp ∬_{D(γ)} F_{μν} dμ dν` for a planar loop whose plane components
/// commute on the enclosed surface (checked at every quadrature node).
pub fn holonomy_abelian_flux(a: &dyn ConnectionField, gamma: &Loop) -> Result<HolonomyResult> {
    check_loop(a, gamma)?;
    let plane = require_plane(gamma)?;
    let (u, nodes) = flux(a, gamma, plane, FINE)?;
    let (coarse, _) = flux(a, gamma, plane, COARSE)?;
    HolonomyResult::new(u, nodes, &coarse, 4)
}

/// `K = ∂_σA_τ − ∂_τA_σ − [A_σ, A_τ]`.
fn transport_curvature(a: &dyn ConnectionField, p: &[f64], sigma: usize, tau: usize) -> ComplexMatrix {
    let (am, an) = (a.component(p, sigma), a.component(p, tau));
    exterior_derivative(a, p, sigma, tau, FIELD_STEP) - (&am * &an - &an * &am)
}

fn stokes_ccw(
    a: &dyn ConnectionField,
    base: &[f64],
    plane: (usize, usize),
    corner: [f64; 2],
    sides: [f64; 2],
    ns: usize,
    nt: usize,
) -> ComplexMatrix {
    let n = a.block_dim();
    let (ds, dt) = (sides[0] / ns as f64, sides[1] / nt as f64);
    let at = |s: f64, t: f64| plane_point(base, plane, [s, t]);
    let step = |p: &[f64], mu: usize, len: f64| expm(&a.component(p, mu).scale_real(len)).expect("square");
    // Left-edge transports from the corner to each row's mid-height.
    let mut lefts = Vec::with_capacity(nt);
    let mut l = step(&at(corner[0], corner[1] + 0.25 * dt), plane.1, 0.5 * dt);
    for j in 0..nt {
        if j > 0 {
            l = &step(&at(corner[0], corner[1] + j as f64 * dt), plane.1, dt) * &l;
        }
        lefts.push(l.clone());
    }
    let rows: Vec<ComplexMatrix> = lefts
        .par_iter()
        .enumerate()
        .map(|(j, l)| {
            let tm = corner[1] + (j as f64 + 0.5) * dt;
            let mut r = step(&at(corner[0] + 0.25 * ds, tm), plane.0, 0.5 * ds);
            let mut omega = ComplexMatrix::zeros(n, n);
            for i in 0..ns {
                if i > 0 {
                    r = &step(&at(corner[0] + i as f64 * ds, tm), plane.0, ds) * &r;
                }
                let sm = corner[0] + (i as f64 + 0.5) * ds;
                let t = &r * l;
                let k = transport_curvature(a, &at(sm, tm), plane.0, plane.1);
                omega += &(&(&t.adjoint() * &k) * &t).scale_real(ds * dt);
            }
            expm(&omega).expect("square")
        })
        .collect();
    rows.into_iter().fold(ComplexMatrix::identity(n), |acc, row| &row * &acc)
}

/// Non-Abelian Stokes form of a rectangle's holonomy: the τ-ordered product
/// over rows of `exp Σ_cells T⁻¹ K T Δσ Δτ`, where `T` transports from the
/// corner up the left edge and along the row to the cell center.
pub fn stokes_rectangle(
    a: &dyn ConnectionField,
    rect: &Loop,
    sigma_steps: usize,
    tau_steps: usize,
) -> Result<HolonomyResult> {
    check_loop(a, rect)?;
    let Shape::Rectangle { corner, sides, counter_clockwise } = rect.shape() else {
        return Err(Error::Shape);
    };
    let plane = rect.plane().ok_or(Error::Shape)?;
    if sigma_steps == 0 || tau_steps == 0 {
        return Err(Error::Parameter("stokes_rectangle needs at least one step per side".into()));
    }
    let base = rect.basepoint().coords;
    let orient = |u: ComplexMatrix| if counter_clockwise { u } else { u.adjoint() };
    let u = orient(stokes_ccw(a, &base, plane, corner, sides, sigma_steps, tau_steps));
    let coarse = orient(stokes_ccw(
        a,
        &base,
        plane,
        corner,
        sides,
        (sigma_steps / 2).max(1),
        (tau_steps / 2).max(1),
    ));
    HolonomyResult::new(u, sigma_steps * tau_steps, &coarse, 2)
}

/// Kicked adiabatic evolution `Π_i U_i e^{−iH0Δt} U_i†` along `γ` in total
/// time `T`, with `U_i` taken at the step midpoints `t = (i + ½)/steps` and
/// later steps on the left.
pub fn adiabatic_evolve(
    h0: &ComplexMatrix,
    u: &(dyn Fn(&[f64]) -> ComplexMatrix + Sync),
    gamma: &Loop,
    duration: f64,
    steps: usize,
) -> Result<ComplexMatrix> {
    if !h0.is_square() {
        return Err(Error::Dimension(format!("H0 is {}x{}", h0.rows(), h0.cols())));
    }
    if steps == 0 {
        return Err(Error::Parameter("steps must be at least 1".into()));
    }
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::Parameter(format!("duration must be finite and non-negative, got {duration}")));
    }
    let dt = duration / steps as f64;
    let kerr = expm(&h0.scale(c(0.0, -dt)))?;
    let n = h0.rows();
    let check = u(&gamma.point(0.0));
    if check.rows() != n || !check.is_square() {
        return Err(Error::Dimension(format!("control unitary is {}x{}, H0 is {n}x{n}", check.rows(), check.cols())));
    }
    Ok(ordered_product(n, steps, |i| {
        let ui = u(&gamma.point((i as f64 + 0.5) / steps as f64));
        &(&ui * &kerr) * &ui.adjoint()
    }))
}

/// The evolution of [`adiabatic_evolve`] restricted to a block of the frame
/// at the basepoint: `(U_0† M U_0)` on rows and columns `indices`.
pub fn adiabatic_block(
    h0: &ComplexMatrix,
    u: &(dyn Fn(&[f64]) -> ComplexMatrix + Sync),
    indices: &[usize],
    gamma: &Loop,
    duration: f64,
    steps: usize,
) -> Result<ComplexMatrix> {
    let m = adiabatic_evolve(h0, u, gamma, duration, steps)?;
    if let Some(&bad) = indices.iter().find(|&&i| i >= h0.rows()) {
        return Err(Error::Index(format!("block index {bad} out of range for dimension {}", h0.rows())));
    }
    let u0 = u(&gamma.point(0.0));
    Ok((&(&u0.adjoint() * &m) * &u0).select(indices, indices))
}

/// An Abelian Berry phase: the accumulated line integral and its value
/// wrapped to `(−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerryPhase {
    pub total: f64,
    pub wrapped: f64,
}

pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// `β = ∮ i⟨ψ|dψ⟩` for a frame with a single degenerate column, by the
/// mid-point rule with per-segment step allocation as in
/// [`holonomy_ordered`].
pub fn berry_phase(frame: &dyn FrameField, gamma: &Loop, steps: usize) -> Result<BerryPhase> {
    frame.chart().expect(gamma.chart())?;
    let fiber = frame.degenerate_indices().len();
    if fiber != 1 {
        return Err(Error::Dimension(format!("Berry phase needs a one-dimensional fiber, got {fiber}")));
    }
    if steps == 0 {
        return Err(Error::Parameter("steps must be at least 1".into()));
    }
    let gap = gamma.closure_gap();
    if gap > CLOSURE_TOL {
        return Err(Error::OpenLoop(gap));
    }
    let mut work = Vec::new();
    for seg in gamma.segments() {
        let m = segment_steps(seg, steps);
        work.extend((0..m).map(|j| (seg, j, m)));
    }
    // Collected before summing so the result does not depend on scheduling.
    let terms: Vec<f64> = work
        .par_iter()
        .map(|&(seg, j, m)| {
            let (s0, s1) = (j as f64 / m as f64, (j + 1) as f64 / m as f64);
            let mid = seg.at(0.5 * (s0 + s1));
            let delta: Vec<f64> = seg.at(s1).iter().zip(seg.at(s0)).map(|(b, a)| b - a).collect();
            let len = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
            if len == 0.0 {
                return 0.0;
            }
            let unit: Vec<f64> = delta.iter().map(|d| d / len).collect();
            // A = ⟨ψ|∂ψ⟩ is imaginary, so i·A·Δ = −Im(A)·Δ.
            -directional_connection(frame, &mid, &unit, DEFAULT_STEP).get(0, 0).im * len
        })
        .collect();
    let total: f64 = terms.iter().sum();
    Ok(BerryPhase { total, wrapped: wrap_phase(total) })
}

/// `α = −∫_0^T ⟨ψ(t)|H(t)|ψ(t)⟩ dt` by the mid-point rule.
pub fn dynamical_phase(
    h: &dyn Fn(f64) -> ComplexMatrix,
    psi: &dyn Fn(f64) -> DVector<C64>,
    duration: f64,
    steps: usize,
) -> Result<f64> {
    if steps == 0 {
        return Err(Error::Parameter("steps must be at least 1".into()));
    }
    let dt = duration / steps as f64;
    let mut sum = 0.0;
    for i in 0..steps {
        let t = (i as f64 + 0.5) * dt;
        let v = psi(t);
        let hv = h(t).mul_vec(&v);
        if hv.len() != v.len() {
            return Err(Error::Dimension(format!("H is {0}x{0}, ψ has length {1}", hv.len(), v.len())));
        }
        sum -= v.dotc(&hv).re * dt;
    }
    Ok(sum)
}
