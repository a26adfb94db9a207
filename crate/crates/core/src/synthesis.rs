//! Loops realizing requested generators and areas, U(2) synthesis from
//! them, and tensor embedding of small gates into qubit registers.
//!
//! Every plan carries the unitary the engine ordering is expected to
//! produce; orientations are chosen so that the plan's prediction holds for
//! [`holonomy_ordered`].

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chart::{Chart, ControlPoint};
use crate::connection::chart_connection;
use crate::error::{Error, Result};
use crate::holonomy::{holonomy_ordered, wrap_phase, HolonomyResult};
use crate::loops::{compose, Loop, LoopKind, LoopSpec};
use crate::matrix::{c, expm, pauli, structure_defects, ComplexMatrix};

/// Ceiling on radial controls of the optical loops.
pub const DEFAULT_R_MAX: f64 = 2.0;

/// Largest phase one diagonal-phase rectangle of angular width π realizes.
pub const MAX_PHASE_PER_LOOP: f64 = PI;

/// Largest rotation angle one rotation rectangle realizes.
pub const MAX_ROTATION_PER_LOOP: f64 = PI;

/// Steps used to verify synthesized programs.
pub const VERIFY_STEPS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LoopLabel {
    C1,
    C2,
    C3,
    C4,
    #[serde(rename = "C_I")]
    CI,
    #[serde(rename = "C_II")]
    CII,
    #[serde(rename = "C_III")]
    CIII,
    #[serde(rename = "C_IV")]
    CIV,
    #[serde(rename = "C_V")]
    CV,
    #[serde(rename = "SU2INT-C1")]
    Su2IntC1,
    #[serde(rename = "SU2INT-C2")]
    Su2IntC2,
}

impl fmt::Display for LoopLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_string(self).map_err(|_| fmt::Error)?;
        f.write_str(s.trim_matches('"'))
    }
}

/// Loops realizing one requested generator exponent, traversed in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopPlan {
    pub label: LoopLabel,
    pub chart: Chart,
    /// Requested exponent `Σ` in `exp(−iΣG)`.
    pub area: f64,
    pub pieces: Vec<LoopSpec>,
    /// More than one piece was needed.
    pub split: bool,
    /// Expected holonomy on the degenerate block.
    pub prediction: ComplexMatrix,
}

impl LoopPlan {
    /// The pieces composed into one loop; the trivial loop at the origin when empty.
    pub fn build(&self) -> Result<Loop> {
        let mut it = self.pieces.iter();
        let Some(first) = it.next() else {
            return Ok(Loop::trivial(&ControlPoint::origin(self.chart)));
        };
        let mut out = first.build()?;
        for spec in it {
            out = compose(&out, &spec.build()?)?;
        }
        Ok(out)
    }

    /// Engine holonomy of the plan, piece by piece with later pieces on the left.
    pub fn holonomy(&self, steps: usize) -> Result<HolonomyResult> {
        let a = chart_connection(self.chart);
        let n = a.block_dim();
        let mut out = HolonomyResult {
            unitary: ComplexMatrix::identity(n),
            steps: 0,
            unitarity_defect: 0.0,
            richardson_error: 0.0,
        };
        for spec in &self.pieces {
            let h = holonomy_ordered(a.as_ref(), &spec.build()?, steps)?;
            out.unitary = &h.unitary * &out.unitary;
            out.steps += h.steps;
            out.richardson_error += h.richardson_error;
        }
        out.unitarity_defect = structure_defects(&out.unitary)?.unitarity;
        Ok(out)
    }
}

fn exp_generator(g: &ComplexMatrix, sigma: f64) -> ComplexMatrix {
    expm(&g.scale(c(0.0, -sigma))).expect("square generator")
}

fn pieces_of(sigma: f64, limit: f64) -> (usize, f64) {
    let k = (sigma.abs() / limit).ceil() as usize;
    if k == 0 {
        (0, 0.0)
    } else {
        (k, sigma.abs() / k as f64)
    }
}

fn name(prefix: &str, index: usize) -> String {
    format!("{prefix}_{index}")
}

/// Rectangles in `(θ_β, φ_β)` with `φ_β ∈ [0, π]`, `θ_β ∈ [0, θ*]` and the
/// other coordinates 0, realizing `exp(−iΣ|β⟩⟨β|)` on CP^n (`β` 1-based).
///
/// The engine phase is half the `sphere_2theta_phi` area, so each piece has
/// `π(1 − cos 2θ*) = 2|Σ|/k` and carries at most `|Σ| = π`; larger requests
/// are split into equal pieces. Negative `Σ` reverses the pieces.
pub fn diagonal_phase_loop(n: usize, beta: usize, sigma: f64) -> Result<LoopPlan> {
    if !(1..=n).contains(&beta) {
        return Err(Error::Index(format!("β = {beta} outside 1..={n}")));
    }
    if !sigma.is_finite() {
        return Err(Error::Parameter(format!("area must be finite, got {sigma}")));
    }
    let chart = Chart::Cpn { n };
    let (k, per) = pieces_of(sigma, MAX_PHASE_PER_LOOP);
    let theta = 0.5 * (1.0 - 2.0 * per / PI).clamp(-1.0, 1.0).acos();
    let theta_name = name("theta", beta);
    let phi_name = name("phi", beta);
    let spec = LoopSpec::new(
        chart,
        [&theta_name, &phi_name],
        &[],
        LoopKind::Rectangle { corner: [0.0, 0.0], sides: [theta, PI] },
    )
    .reversed(sigma < 0.0);
    let mut g = ComplexMatrix::zeros(n, n);
    g.set(beta - 1, beta - 1, c(1.0, 0.0));
    Ok(LoopPlan {
        label: LoopLabel::C1,
        chart,
        area: sigma,
        pieces: vec![spec; k],
        split: k > 1,
        prediction: exp_generator(&g, sigma),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RotationKind {
    /// `φ_β = φ_β̄ = 0`, generator `−i|β⟩⟨β̄| + i|β̄⟩⟨β|`.
    C3,
    /// `φ_β = π/2`, `φ_β̄ = 0`, generator `|β⟩⟨β̄| + |β̄⟩⟨β|`.
    C4,
}

/// Rectangles in `(θ_β, θ_β̄)` with `θ_β ∈ [0, u]`, `θ_β̄ ∈ [0, π]`, realizing
/// `exp(−iσ̂Σ̃)` on span{|β⟩, |β̄⟩} (`β < β̄`, 1-based). Each piece encloses
/// `Σ̃ = π sin u` in the `sphere_copolar` measure, at most π.
///
/// Counter-clockwise traversal gives `exp(+iσ̂Σ̃)`, so positive `Σ̃` is
/// realized clockwise.
pub fn rotation_loop(n: usize, beta: usize, beta_bar: usize, kind: RotationKind, sigma: f64) -> Result<LoopPlan> {
    if beta >= beta_bar {
        return Err(Error::Index(format!("need β < β̄, got β = {beta}, β̄ = {beta_bar}")));
    }
    if beta == 0 || beta_bar > n {
        return Err(Error::Index(format!("indices must lie in 1..={n}, got {beta}, {beta_bar}")));
    }
    if !sigma.is_finite() {
        return Err(Error::Parameter(format!("area must be finite, got {sigma}")));
    }
    let chart = Chart::Cpn { n };
    let (k, per) = pieces_of(sigma, MAX_ROTATION_PER_LOOP);
    let u = (per / PI).clamp(0.0, 1.0).asin();
    let phi = name("phi", beta);
    let fixed: Vec<(&str, f64)> = match kind {
        RotationKind::C3 => vec![],
        RotationKind::C4 => vec![(phi.as_str(), PI / 2.0)],
    };
    let (tb, tbb) = (name("theta", beta), name("theta", beta_bar));
    let spec = LoopSpec::new(chart, [&tb, &tbb], &fixed, LoopKind::Rectangle { corner: [0.0, 0.0], sides: [u, PI] })
        .reversed(sigma > 0.0);
    let pair = match kind {
        RotationKind::C3 => pauli::sigma2(),
        RotationKind::C4 => pauli::sigma1(),
    };
    let g = pauli::embed_pair(&pair, n, beta - 1, beta_bar - 1);
    Ok(LoopPlan {
        label: match kind {
            RotationKind::C3 => LoopLabel::C3,
            RotationKind::C4 => LoopLabel::C4,
        },
        chart,
        area: sigma,
        pieces: vec![spec; k],
        split: k > 1,
        prediction: exp_generator(&g, sigma),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OpticalKind {
    I,
    II,
    III,
    IV,
    V,
}

/// The optical loop of the given kind with [`DEFAULT_R_MAX`].
pub fn optical_loop(kind: OpticalKind, sigma: f64) -> Result<LoopPlan> {
    optical_loop_with(kind, sigma, DEFAULT_R_MAX)
}

/// A counter-clockwise rectangle (clockwise for negative `Σ`) realizing
/// `exp(−iGΣ)`:
/// * I: `(x, r1)`, `r1 ∈ [0, 1]`, `x`-width `Σ/(1 − e^{−2})`, `G = σ2`
/// * II: `(y, r1)`, `r1 ∈ [0, 1]`, `y`-width `Σ/(e² − 1)`, `G = σ1`
/// * III: `(r1, θ1)`, `θ1 ∈ [0, π]`, `r1 ∈ [0, r*]` with `π(cosh 4r* − 1)/4 = Σ`, `G = −diag(1, 3)`
/// * IV, V: `(r2, r3)`, `r3 ∈ [0, 1]`, `r2 ∈ [0, r*]` with `cosh 2r* − 1 = Σ`,
///   `θ2 = 0` and `θ3 = 0` (IV) or `3π/2` (V), `G = σ̂2`, `σ̂1` on span{|01⟩, |10⟩}
pub fn optical_loop_with(kind: OpticalKind, sigma: f64, r_max: f64) -> Result<LoopPlan> {
    if !sigma.is_finite() {
        return Err(Error::Parameter(format!("area must be finite, got {sigma}")));
    }
    let s = sigma.abs();
    let rect = |w: f64, h: f64| LoopKind::Rectangle { corner: [0.0, 0.0], sides: [w, h] };
    let radial = |r: f64, reach: f64| -> Result<f64> {
        if r > r_max {
            Err(Error::Range { requested: s, max: reach })
        } else {
            Ok(r)
        }
    };
    let e2 = (2.0f64).exp();
    let (label, chart, spec, g) = match kind {
        OpticalKind::I => (
            LoopLabel::CI,
            Chart::Optical1,
            LoopSpec::new(Chart::Optical1, ["x", "r1"], &[], rect(s / (1.0 - 1.0 / e2), 1.0)),
            pauli::sigma2(),
        ),
        OpticalKind::II => (
            LoopLabel::CII,
            Chart::Optical1,
            LoopSpec::new(Chart::Optical1, ["y", "r1"], &[], rect(s / (e2 - 1.0), 1.0)),
            pauli::sigma1(),
        ),
        OpticalKind::III => {
            let reach = PI * ((4.0 * r_max).cosh() - 1.0) / 4.0;
            let r = radial((1.0 + 4.0 * s / PI).acosh() / 4.0, reach)?;
            (
                LoopLabel::CIII,
                Chart::Optical1,
                LoopSpec::new(Chart::Optical1, ["r1", "theta1"], &[], rect(r, PI)),
                ComplexMatrix::from_real_diagonal(&[-1.0, -3.0]),
            )
        }
        OpticalKind::IV | OpticalKind::V => {
            let reach = (2.0 * r_max).cosh() - 1.0;
            let r = radial((1.0 + s).acosh() / 2.0, reach)?;
            let (label, theta3, pair) = if kind == OpticalKind::IV {
                (LoopLabel::CIV, 0.0, pauli::sigma2())
            } else {
                (LoopLabel::CV, 1.5 * PI, pauli::sigma1())
            };
            (
                label,
                Chart::Optical2,
                LoopSpec::new(Chart::Optical2, ["r2", "r3"], &[("theta3", theta3)], rect(r, 1.0)),
                pauli::embed_pair(&pair, 4, 1, 2),
            )
        }
    };
    let pieces = if sigma == 0.0 { vec![] } else { vec![spec.reversed(sigma < 0.0)] };
    Ok(LoopPlan { label, chart, area: sigma, pieces, split: false, prediction: exp_generator(&g, sigma) })
}

/// The interferometer rectangles: `SU2INT-C1` in `(α, β)` with `α ∈ [0, π]`
/// and `β`-extent `|Σ|`, predicted `exp(−i2Σσ̂2)`; `SU2INT-C2` in `(α, γ)`,
/// predicted `exp(−i2Σσ̂3)`, both on span{|01⟩, |10⟩}.
///
/// Counter-clockwise traversal gives the inverse, so positive `Σ` runs clockwise.
pub fn interferometer_loop(label: LoopLabel, sigma: f64) -> Result<LoopPlan> {
    let (other, pair) = match label {
        LoopLabel::Su2IntC1 => ("beta", pauli::sigma2()),
        LoopLabel::Su2IntC2 => ("gamma", pauli::sigma3()),
        other => return Err(Error::Parameter(format!("{other} is not an interferometer loop"))),
    };
    if !sigma.is_finite() {
        return Err(Error::Parameter(format!("extent must be finite, got {sigma}")));
    }
    let spec = LoopSpec::new(
        Chart::Su2Int,
        ["alpha", other],
        &[],
        LoopKind::Rectangle { corner: [0.0, 0.0], sides: [PI, sigma.abs()] },
    )
    .reversed(sigma > 0.0);
    let g = pauli::embed_pair(&pair, 4, 1, 2);
    let pieces = if sigma == 0.0 { vec![] } else { vec![spec] };
    Ok(LoopPlan { label, chart: Chart::Su2Int, area: sigma, pieces, split: false, prediction: exp_generator(&g, 2.0 * sigma) })
}

/// Ordered plans; later plans act after earlier ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopProgram {
    pub chart: Chart,
    pub plans: Vec<LoopPlan>,
    /// Frobenius distance of the engine-evaluated product from the target.
    pub verified_error: Option<f64>,
    pub verified_steps: Option<usize>,
}

impl LoopProgram {
    pub fn predicted(&self) -> ComplexMatrix {
        let n = chart_connection(self.chart).block_dim();
        self.plans.iter().fold(ComplexMatrix::identity(n), |acc, p| &p.prediction * &acc)
    }

    pub fn evaluate(&self, steps: usize) -> Result<ComplexMatrix> {
        let n = chart_connection(self.chart).block_dim();
        let mut u = ComplexMatrix::identity(n);
        for p in &self.plans {
            u = &p.holonomy(steps)?.unitary * &u;
        }
        Ok(u)
    }
}

/// Factorization `U = diag(e^{ia1}, e^{ia2}) · exp(−itσ2) · diag(e^{ic}, 1)`,
/// angles wrapped to `(−π, π]`, `t ∈ [0, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct U2Angles {
    pub a1: f64,
    pub a2: f64,
    pub t: f64,
    pub c: f64,
}

pub fn u2_angles(u: &ComplexMatrix) -> U2Angles {
    let (u00, u01, u10, u11) = (u.get(0, 0), u.get(0, 1), u.get(1, 0), u.get(1, 1));
    let t = u10.norm().atan2(u11.norm());
    let tiny = 1e-12;
    let (a1, a2, cc) = if u10.norm() < tiny {
        (u00.arg(), u11.arg(), 0.0)
    } else if u11.norm() < tiny {
        ((-u01).arg(), u10.arg(), 0.0)
    } else {
        let a2 = u11.arg();
        ((-u01).arg(), a2, u10.arg() - a2)
    };
    U2Angles { a1: wrap_phase(a1), a2: wrap_phase(a2), t, c: wrap_phase(cc) }
}

/// Plans a CP² program for a 2×2 unitary: a phase on |1⟩, a C3 rotation, then
/// phases on |1⟩ and |2⟩, skipping zero factors. The engine product is
/// verified against the target, doubling the step count until it is within
/// `tol`.
pub fn synthesize_u2(target: &ComplexMatrix, tol: f64) -> Result<LoopProgram> {
    if target.rows() != 2 || target.cols() != 2 {
        return Err(Error::Dimension(format!("target must be 2x2, got {}x{}", target.rows(), target.cols())));
    }
    let defect = structure_defects(target)?.unitarity;
    if defect > 1e-10 {
        return Err(Error::Input(format!("target is not unitary (defect {defect:.3e})")));
    }
    let ang = u2_angles(target);
    let mut plans = Vec::new();
    let zero = 1e-14;
    if ang.c.abs() > zero {
        plans.push(diagonal_phase_loop(2, 1, -ang.c)?);
    }
    if ang.t.abs() > zero {
        plans.push(rotation_loop(2, 1, 2, RotationKind::C3, ang.t)?);
    }
    if ang.a1.abs() > zero {
        plans.push(diagonal_phase_loop(2, 1, -ang.a1)?);
    }
    if ang.a2.abs() > zero {
        plans.push(diagonal_phase_loop(2, 2, -ang.a2)?);
    }
    let mut program = LoopProgram { chart: Chart::Cpn { n: 2 }, plans, verified_error: None, verified_steps: None };
    if program.plans.is_empty() {
        program.verified_error = Some(target.distance(&ComplexMatrix::identity(2)));
        program.verified_steps = Some(0);
        return Ok(program);
    }
    let mut steps = VERIFY_STEPS;
    loop {
        let err = program.evaluate(steps)?.distance(target);
        program.verified_error = Some(err);
        program.verified_steps = Some(steps);
        if err <= tol {
            return Ok(program);
        }
        if steps >= 16 * VERIFY_STEPS {
            return Err(Error::Parameter(format!("synthesis error {err:.3e} exceeds tolerance {tol:.3e}")));
        }
        steps *= 2;
    }
}

/// `gate` acting on qubits `positions` of an `m`-qubit register, identity
/// elsewhere; qubit 0 is the most significant bit and `positions[0]` the
/// gate's most significant factor.
pub fn embed(gate: &ComplexMatrix, positions: &[usize], m: usize) -> Result<ComplexMatrix> {
    let k = positions.len();
    if gate.rows() != 1 << k || gate.cols() != 1 << k {
        return Err(Error::Dimension(format!(
            "gate is {}x{}, {k} positions need {}x{}",
            gate.rows(),
            gate.cols(),
            1 << k,
            1 << k
        )));
    }
    for (i, &p) in positions.iter().enumerate() {
        if p >= m {
            return Err(Error::Input(format!("position {p} outside a {m}-qubit register")));
        }
        if positions[..i].contains(&p) {
            return Err(Error::Input(format!("position {p} listed twice")));
        }
    }
    let dim = 1usize << m;
    let bit = |x: usize, q: usize| (x >> (m - 1 - q)) & 1;
    let sub = |x: usize| positions.iter().fold(0, |acc, &q| (acc << 1) | bit(x, q));
    let mask: usize = positions.iter().map(|&q| 1 << (m - 1 - q)).sum();
    Ok(ComplexMatrix::from_fn(dim, dim, |r, col| {
        if r & !mask == col & !mask {
            gate.get(sub(r), sub(col))
        } else {
            c(0.0, 0.0)
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holonomy::{area_weighted, Measure};
    use crate::matrix::{cis, C64};

    fn hadamard() -> ComplexMatrix {
        let h = 0.5f64.sqrt();
        ComplexMatrix::from_rows(&[[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]])
    }

    #[test]
    fn diagonal_phase_sizes() {
        let p = diagonal_phase_loop(2, 1, PI / 2.0).unwrap();
        assert_eq!(p.pieces.len(), 1);
        let lp = p.build().unwrap();
        // π(1 − cos 2θ*) = 2Σ: the enclosed sphere area is twice the phase.
        assert!((area_weighted(&lp, Measure::Sphere2ThetaPhi).unwrap() - PI).abs() < 1e-11);
        let LoopKind::Rectangle { sides, .. } = p.pieces[0].kind else { panic!() };
        assert!((sides[0] - PI / 4.0).abs() < 1e-15);
        let big = diagonal_phase_loop(2, 2, -2.5 * PI).unwrap();
        assert!(big.split && big.pieces.len() == 3 && big.pieces.iter().all(|s| s.reversed));
        assert!(diagonal_phase_loop(2, 0, 1.0).is_err());
        assert!(diagonal_phase_loop(2, 1, 0.0).unwrap().pieces.is_empty());
    }

    #[test]
    fn diagonal_phase_holonomy() {
        for (beta, sigma) in [(1, 0.7), (2, -1.9), (1, 4.0)] {
            let p = diagonal_phase_loop(2, beta, sigma).unwrap();
            let h = p.holonomy(20_000).unwrap().unitary;
            let expect = cis(-sigma);
            assert!((h.get(beta - 1, beta - 1) - expect).norm() < 1e-5, "β={beta} Σ={sigma}: {h}");
            assert!(h.distance(&p.prediction) < 1e-5);
        }
    }

    #[test]
    fn area_additivity() {
        let (a, b) = (0.8, 1.3);
        let pa = diagonal_phase_loop(2, 1, a).unwrap().build().unwrap();
        let pb = diagonal_phase_loop(2, 1, b).unwrap().build().unwrap();
        let sum = diagonal_phase_loop(2, 1, a + b).unwrap();
        let conn = chart_connection(Chart::Cpn { n: 2 });
        let both = holonomy_ordered(conn.as_ref(), &compose(&pa, &pb).unwrap(), 40_000).unwrap().unitary;
        assert!(both.distance(&sum.holonomy(20_000).unwrap().unitary) < 1e-5);
    }

    #[test]
    fn rotation_examples() {
        let minus = rotation_loop(2, 1, 2, RotationKind::C3, PI).unwrap();
        let h = minus.holonomy(20_000).unwrap().unitary;
        assert!(h.distance(&ComplexMatrix::identity(2).scale_real(-1.0)) < 1e-5, "{h}");
        let not = rotation_loop(2, 1, 2, RotationKind::C4, PI / 2.0).unwrap();
        let h = not.holonomy(20_000).unwrap().unitary;
        let expect = pauli::sigma1().scale(c(0.0, -1.0));
        assert!(h.distance(&expect) < 1e-5, "{h}");
        let r = rotation_loop(2, 1, 2, RotationKind::C3, 0.6).unwrap();
        let lp = r.build().unwrap();
        let conn = chart_connection(Chart::Cpn { n: 2 });
        let back = compose(&lp, &crate::loops::invert(&lp)).unwrap();
        let h = holonomy_ordered(conn.as_ref(), &back, 20_000).unwrap().unitary;
        assert!(h.distance(&ComplexMatrix::identity(2)) < 1e-10);
        assert!(matches!(rotation_loop(2, 2, 1, RotationKind::C3, 0.1), Err(Error::Index(_))));
        assert!(matches!(rotation_loop(2, 1, 3, RotationKind::C3, 0.1), Err(Error::Index(_))));
    }

    #[test]
    fn rotation_in_a_larger_space() {
        let r = rotation_loop(3, 1, 3, RotationKind::C3, 0.9).unwrap();
        let h = r.holonomy(20_000).unwrap().unitary;
        assert!(h.distance(&r.prediction) < 1e-5, "{h}");
    }

    #[test]
    fn optical_plans_match_their_predictions() {
        for (kind, sigma) in [
            (OpticalKind::I, 0.4),
            (OpticalKind::II, -0.3),
            (OpticalKind::III, 0.6),
            (OpticalKind::IV, 0.5),
            (OpticalKind::V, PI / 4.0),
        ] {
            let p = optical_loop(kind, sigma).unwrap();
            let h = p.holonomy(20_000).unwrap().unitary;
            assert!(h.distance(&p.prediction) < 1e-5, "{kind:?}: {h}");
        }
        let zero = optical_loop(OpticalKind::I, 0.0).unwrap();
        assert!(zero.holonomy(100).unwrap().unitary.distance(&ComplexMatrix::identity(2)) < 1e-15);
        assert!(matches!(optical_loop(OpticalKind::IV, 100.0), Err(Error::Range { .. })));
        assert_eq!(
            optical_loop(OpticalKind::III, 0.2).unwrap().prediction,
            exp_generator(&ComplexMatrix::from_real_diagonal(&[-1.0, -3.0]), 0.2)
        );
    }

    #[test]
    fn two_qubit_gate_from_c_v() {
        let p = optical_loop(OpticalKind::V, PI / 4.0).unwrap();
        let h = p.holonomy(20_000).unwrap().unitary;
        let r = 0.5f64.sqrt();
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let gate = ComplexMatrix::from_rows(&[
            [one, z, z, z],
            [z, c(r, 0.0), c(0.0, -r), z],
            [z, c(0.0, -r), c(r, 0.0), z],
            [z, z, z, one],
        ]);
        assert!(h.distance(&gate) < 1e-5, "{h}");
    }

    #[test]
    fn interferometer_plans() {
        for label in [LoopLabel::Su2IntC1, LoopLabel::Su2IntC2] {
            let p = interferometer_loop(label, 0.45).unwrap();
            let h = p.holonomy(20_000).unwrap().unitary;
            assert!(h.distance(&p.prediction) < 1e-5, "{label}: {h}");
        }
        assert!(interferometer_loop(LoopLabel::C1, 0.1).is_err());
    }

    #[test]
    fn factorization_reconstructs() {
        let targets = [
            hadamard(),
            ComplexMatrix::from_diagonal(&[cis(0.4), cis(-1.1)]),
            ComplexMatrix::from_rows(&[[c(0.0, 0.0), cis(0.3)], [cis(2.0), c(0.0, 0.0)]]),
        ];
        for u in targets {
            let a = u2_angles(&u);
            let rot = ComplexMatrix::from_rows(&[[c(a.t.cos(), 0.0), c(-a.t.sin(), 0.0)], [c(a.t.sin(), 0.0), c(a.t.cos(), 0.0)]]);
            let rebuilt = &(&ComplexMatrix::from_diagonal(&[cis(a.a1), cis(a.a2)]) * &rot)
                * &ComplexMatrix::from_diagonal(&[cis(a.c), c(1.0, 0.0)]);
            assert!(rebuilt.distance(&u) < 1e-12, "{rebuilt}");
        }
    }

    #[test]
    fn synthesis_examples() {
        let id = synthesize_u2(&ComplexMatrix::identity(2), 1e-4).unwrap();
        assert!(id.plans.is_empty());
        let h = synthesize_u2(&hadamard(), 1e-4).unwrap();
        assert!(h.verified_error.unwrap() < 1e-4);
        assert!(h.predicted().distance(&hadamard()) < 1e-12);
        let delta = 0.9;
        let d = synthesize_u2(&ComplexMatrix::from_diagonal(&[cis(delta), c(1.0, 0.0)]), 1e-4).unwrap();
        assert_eq!(d.plans.len(), 1);
        assert_eq!(d.plans[0].label, LoopLabel::C1);
        assert!((d.plans[0].area + delta).abs() < 1e-15);
        let bad = ComplexMatrix::from_rows(&[[c(1.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
        assert!(matches!(synthesize_u2(&bad, 1e-4), Err(Error::Input(_))));
    }

    fn brute_embed(gate: &ComplexMatrix, positions: &[usize], m: usize) -> ComplexMatrix {
        // Permute the register so the gate qubits come first, apply gate ⊗ I, permute back.
        let dim = 1 << m;
        let k = positions.len();
        let mut order: Vec<usize> = positions.to_vec();
        order.extend((0..m).filter(|q| !positions.contains(q)));
        let perm = |x: usize| -> usize {
            order.iter().fold(0, |acc, &q| (acc << 1) | ((x >> (m - 1 - q)) & 1))
        };
        let rest = 1 << (m - k);
        let mut big = ComplexMatrix::zeros(dim, dim);
        for r in 0..dim {
            for col in 0..dim {
                let (pr, pc) = (perm(r), perm(col));
                if pr % rest == pc % rest {
                    big.set(r, col, gate.get(pr / rest, pc / rest));
                }
            }
        }
        big
    }

    #[test]
    fn embedding() {
        let x = pauli::sigma1();
        assert_eq!(embed(&x, &[0], 1).unwrap(), x);
        assert_eq!(embed(&ComplexMatrix::identity(4), &[0, 1], 3).unwrap(), ComplexMatrix::identity(8));
        let one = c(1.0, 0.0);
        let z: C64 = c(0.0, 0.0);
        let cnot = ComplexMatrix::from_rows(&[[one, z, z, z], [z, one, z, z], [z, z, z, one], [z, z, one, z]]);
        for pos in [[0, 2], [2, 0], [1, 2]] {
            assert_eq!(embed(&cnot, &pos, 3).unwrap(), brute_embed(&cnot, &pos, 3));
        }
        assert!(matches!(embed(&cnot, &[1, 1], 3), Err(Error::Input(_))));
        assert!(matches!(embed(&cnot, &[0, 3], 3), Err(Error::Input(_))));
        assert!(embed(&x, &[0, 1], 3).is_err());
    }
}
