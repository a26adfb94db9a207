//! Truncated Fock-space optics: ladder operators, the Kerr Hamiltonian,
//! displacement, squeezing and two-mode unitaries, and the kick-method
//! evolution around a polygon of displacements.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c, cis, expm, ComplexMatrix, C64};

/// Default single-mode cutoff.
pub const DEFAULT_CUTOFF: usize = 40;

/// Truncated Fock space with one or two modes.
///
/// Two-mode states `|ν1 ν2⟩` are ordered lexicographically, index `ν1·cutoff + ν2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    pub cutoff: usize,
    pub modes: usize,
}

impl FockSpace {
    pub fn new(cutoff: usize, modes: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::Parameter(format!("Fock cutoff must be at least 2, got {cutoff}")));
        }
        if !(1..=2).contains(&modes) {
            return Err(Error::Parameter(format!("only one or two modes are supported, got {modes}")));
        }
        Ok(Self { cutoff, modes })
    }

    pub fn dim(&self) -> usize {
        self.cutoff.pow(self.modes as u32)
    }

    /// Index of `|ν1 ν2⟩` (ignores `nu2` for a single mode).
    pub fn index(&self, nu1: usize, nu2: usize) -> usize {
        if self.modes == 1 {
            nu1
        } else {
            nu1 * self.cutoff + nu2
        }
    }

    /// States with some mode at the highest retained level.
    pub fn boundary_states(&self) -> Vec<usize> {
        let top = self.cutoff - 1;
        (0..self.dim())
            .filter(|&i| {
                if self.modes == 1 {
                    i == top
                } else {
                    i / self.cutoff == top || i % self.cutoff == top
                }
            })
            .collect()
    }

    /// Largest amplitude norm that the listed input states send onto the
    /// boundary of the truncated space.
    pub fn leakage(&self, u: &ComplexMatrix, inputs: &[usize]) -> f64 {
        let boundary = self.boundary_states();
        inputs
            .iter()
            .map(|&j| boundary.iter().map(|&i| u.get(i, j).norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// Sparse operator in coordinate form, used for fast exponential actions
/// on vectors in large Fock spaces.
#[derive(Debug, Clone, Default)]
pub struct SparseOp {
    pub dim: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    pub fn new(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn push(&mut self, i: usize, j: usize, v: C64) {
        if v != c(0.0, 0.0) {
            self.entries.push((i, j, v));
        }
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(self.dim);
        for &(i, j, a) in &self.entries {
            out[i] += a * v[j];
        }
        out
    }

    pub fn norm_one(&self) -> f64 {
        let mut col = vec![0.0; self.dim];
        for &(_, j, a) in &self.entries {
            col[j] += a.norm();
        }
        col.into_iter().fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for &(i, j, a) in &self.entries {
            m.set(i, j, m.get(i, j) + a);
        }
        m
    }

    /// `e^{G} v` by Taylor series on `v` with the step split so each piece
    /// has 1-norm at most 1/2.
    pub fn exp_apply(&self, v: &DVector<C64>) -> DVector<C64> {
        let norm = self.norm_one();
        let pieces = if norm > 0.5 { (norm / 0.5).ceil() as usize } else { 1 };
        let scale = c(1.0 / pieces as f64, 0.0);
        let mut w = v.clone();
        for _ in 0..pieces {
            let mut term = w.clone();
            let mut sum = w.clone();
            for k in 1..=40 {
                term = self.apply(&term) * (scale / k as f64);
                sum += &term;
                if term.norm() <= f64::EPSILON * sum.norm() {
                    break;
                }
            }
            w = sum;
        }
        w
    }
}

/// Truncated `a`, `a†` and `n = a†a`.
#[derive(Debug, Clone)]
pub struct Ladder {
    pub a: ComplexMatrix,
    pub adag: ComplexMatrix,
    pub n: ComplexMatrix,
}

pub fn ladder(cutoff: usize) -> Result<Ladder> {
    FockSpace::new(cutoff, 1)?;
    let a = ComplexMatrix::from_fn(cutoff, cutoff, |i, j| {
        if j == i + 1 {
            c((j as f64).sqrt(), 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    let adag = a.adjoint();
    let n = ComplexMatrix::from_real_diagonal(&(0..cutoff).map(|v| v as f64).collect::<Vec<_>>());
    Ok(Ladder { a, adag, n })
}

/// `H_I = X n(n−1)` with ħ = 1.
pub fn kerr_hamiltonian(x: f64, cutoff: usize) -> Result<ComplexMatrix> {
    FockSpace::new(cutoff, 1)?;
    Ok(ComplexMatrix::from_real_diagonal(&kerr_levels(x, cutoff)))
}

fn kerr_levels(x: f64, cutoff: usize) -> Vec<f64> {
    (0..cutoff).map(|v| x * (v as f64) * (v as f64 - 1.0)).collect()
}

/// Two-mode Kerr Hamiltonian `X [n1(n1−1) + n2(n2−1)]`.
pub fn kerr_hamiltonian_two_mode(x: f64, cutoff: usize) -> Result<ComplexMatrix> {
    let space = FockSpace::new(cutoff, 2)?;
    let levels = kerr_levels(x, cutoff);
    let mut diag = vec![0.0; space.dim()];
    for n1 in 0..cutoff {
        for n2 in 0..cutoff {
            diag[space.index(n1, n2)] = levels[n1] + levels[n2];
        }
    }
    Ok(ComplexMatrix::from_real_diagonal(&diag))
}

/// Generator `λa† − λ̄a`.
pub fn displacement_generator(lambda: C64, cutoff: usize) -> SparseOp {
    let mut g = SparseOp::new(cutoff);
    for v in 0..cutoff - 1 {
        let s = ((v + 1) as f64).sqrt();
        g.push(v + 1, v, lambda * s);
        g.push(v, v + 1, -lambda.conj() * s);
    }
    g
}

/// Generator `μa†² − μ̄a²`.
pub fn squeeze_generator(mu: C64, cutoff: usize) -> SparseOp {
    let mut g = SparseOp::new(cutoff);
    for v in 0..cutoff.saturating_sub(2) {
        let s = (((v + 1) * (v + 2)) as f64).sqrt();
        g.push(v + 2, v, mu * s);
        g.push(v, v + 2, -mu.conj() * s);
    }
    g
}

/// Generator `ξ a1†a2 − ξ̄ a1a2†` on the two-mode space.
pub fn mixer_generator(xi: C64, cutoff: usize) -> SparseOp {
    let sp = FockSpace { cutoff, modes: 2 };
    let mut g = SparseOp::new(sp.dim());
    for n1 in 0..cutoff {
        for n2 in 0..cutoff {
            if n1 + 1 < cutoff && n2 >= 1 {
                let s = ((n1 + 1) as f64 * n2 as f64).sqrt();
                g.push(sp.index(n1 + 1, n2 - 1), sp.index(n1, n2), xi * s);
            }
            if n1 >= 1 && n2 + 1 < cutoff {
                let s = (n1 as f64 * (n2 + 1) as f64).sqrt();
                g.push(sp.index(n1 - 1, n2 + 1), sp.index(n1, n2), -xi.conj() * s);
            }
        }
    }
    g
}

/// Generator `ζ a1†a2† − ζ̄ a1a2` on the two-mode space.
pub fn two_mode_squeeze_generator(zeta: C64, cutoff: usize) -> SparseOp {
    let sp = FockSpace { cutoff, modes: 2 };
    let mut g = SparseOp::new(sp.dim());
    for n1 in 0..cutoff {
        for n2 in 0..cutoff {
            if n1 + 1 < cutoff && n2 + 1 < cutoff {
                let s = ((n1 + 1) as f64 * (n2 + 1) as f64).sqrt();
                g.push(sp.index(n1 + 1, n2 + 1), sp.index(n1, n2), zeta * s);
            }
            if n1 >= 1 && n2 >= 1 {
                let s = (n1 as f64 * n2 as f64).sqrt();
                g.push(sp.index(n1 - 1, n2 - 1), sp.index(n1, n2), -zeta.conj() * s);
            }
        }
    }
    g
}

/// `D(λ) = exp(λa† − λ̄a)` on the truncated space.
pub fn displacement(lambda: C64, cutoff: usize) -> Result<ComplexMatrix> {
    FockSpace::new(cutoff, 1)?;
    expm(&displacement_generator(lambda, cutoff).to_dense())
}

/// `S(μ) = exp(μa†² − μ̄a²)` on the truncated space.
pub fn squeeze(mu: C64, cutoff: usize) -> Result<ComplexMatrix> {
    FockSpace::new(cutoff, 1)?;
    expm(&squeeze_generator(mu, cutoff).to_dense())
}

/// `N(ξ) = exp(ξ a1†a2 − ξ̄ a1a2†)` on the two-mode space.
pub fn two_mode_mixer(xi: C64, cutoff: usize) -> Result<ComplexMatrix> {
    FockSpace::new(cutoff, 2)?;
    expm(&mixer_generator(xi, cutoff).to_dense())
}

/// `M(ζ) = exp(ζ a1†a2† − ζ̄ a1a2)` on the two-mode space.
pub fn two_mode_squeeze(zeta: C64, cutoff: usize) -> Result<ComplexMatrix> {
    FockSpace::new(cutoff, 2)?;
    expm(&two_mode_squeeze_generator(zeta, cutoff).to_dense())
}

/// Leakage above which kick results carry a warning.
pub const LEAKAGE_WARNING: f64 = 1e-8;

/// Where the polygon sits relative to the initial point of the evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KickFrame {
    /// The polygon is translated so its first vertex is the origin.
    #[default]
    OriginStart,
    /// Vertices are used as absolute displacement amplitudes.
    Absolute,
}

/// Displacement polygon, total duration and Kerr strength of a kick run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KickSchedule {
    pub vertices: Vec<C64>,
    pub duration: f64,
    pub kerr: f64,
    #[serde(default)]
    pub frame: KickFrame,
}

impl KickSchedule {
    pub fn new(vertices: Vec<C64>, duration: f64, kerr: f64) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Parameter(format!(
                "a kick polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        Ok(Self { vertices, duration, kerr, frame: KickFrame::OriginStart })
    }

    /// Inscribed regular polygon with vertices `r e^{2πik/N}`, counter-clockwise from angle 0.
    pub fn circle(radius: f64, n: usize, duration: f64, kerr: f64) -> Result<Self> {
        let vertices =
            (0..n).map(|k| cis(2.0 * std::f64::consts::PI * k as f64 / n as f64) * radius).collect();
        Self::new(vertices, duration, kerr)
    }

    pub fn step(&self) -> f64 {
        self.duration / self.vertices.len() as f64
    }

    fn positions(&self) -> Vec<C64> {
        match self.frame {
            KickFrame::OriginStart => self.vertices.iter().map(|&v| v - self.vertices[0]).collect(),
            KickFrame::Absolute => self.vertices.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KickResult {
    /// Evolution restricted to span{|0⟩, |1⟩}.
    pub block: ComplexMatrix,
    /// Largest amplitude any input |0⟩, |1⟩ left on the top Fock level.
    pub leakage: f64,
    pub warning: Option<String>,
}

/// Kick-method evolution `∏_k D(p_k) e^{−iH_IΔt} D(p_k)†`, later vertices on
/// the left, with `Δt = T/N` and one Kerr segment per vertex.
pub fn kick_evolution(schedule: &KickSchedule, cutoff: usize) -> Result<KickResult> {
    let space = FockSpace::new(cutoff, 1)?;
    if schedule.vertices.len() < 3 {
        return Err(Error::Parameter("a kick polygon needs at least 3 vertices".into()));
    }
    let dt = schedule.step();
    let phases: Vec<C64> =
        kerr_levels(schedule.kerr, cutoff).iter().map(|&e| cis(-e * dt)).collect();
    let mut u = ComplexMatrix::identity(cutoff);
    let mut leakage: f64 = 0.0;
    for p in schedule.positions() {
        let d = displacement(p, cutoff)?;
        leakage = leakage.max(space.leakage(&d, &[0, 1]));
        // D e^{-iHΔt} D† U, with the diagonal factor applied row-wise.
        let mut step = d.adjoint() * &u;
        for i in 0..cutoff {
            for j in 0..cutoff {
                step.set(i, j, step.get(i, j) * phases[i]);
            }
        }
        u = d * step;
    }
    let block = u.select(&[0, 1], &[0, 1]);
    let warning = (leakage > LEAKAGE_WARNING).then(|| {
        format!("Fock cutoff {cutoff} leaks amplitude {leakage:.3e} onto the top level")
    });
    Ok(KickResult { block, leakage, warning })
}

/// Percentage deviations of `|u_N|` from `|u_ref|` for the block entries
/// `00, 01, 10, 11`; `None` where the reference entry vanishes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationRow {
    pub n: usize,
    pub deviations: [Option<f64>; 4],
}

/// Parameters of the kick-method convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableConfig {
    pub ns: Vec<usize>,
    pub ref_n: usize,
    pub radius: f64,
    pub duration: f64,
    pub kerr: f64,
    pub cutoff: usize,
}

impl Default for TableConfig {
    fn default() -> Self {
        Self { ns: vec![5, 10, 20, 26], ref_n: 100, radius: 1.0, duration: 0.1, kerr: 1.0, cutoff: DEFAULT_CUTOFF }
    }
}

pub fn convergence_table(cfg: &TableConfig) -> Result<Vec<DeviationRow>> {
    if cfg.ns.iter().any(|&n| n >= cfg.ref_n) {
        return Err(Error::Parameter(format!(
            "reference N = {} must exceed every tabulated N",
            cfg.ref_n
        )));
    }
    let run = |n: usize| -> Result<ComplexMatrix> {
        let s = KickSchedule::circle(cfg.radius, n, cfg.duration, cfg.kerr)?;
        Ok(kick_evolution(&s, cfg.cutoff)?.block)
    };
    let reference = run(cfg.ref_n)?;
    cfg.ns
        .par_iter()
        .map(|&n| {
            let u = run(n)?;
            let mut deviations = [None; 4];
            for (k, dev) in deviations.iter_mut().enumerate() {
                let (i, j) = (k / 2, k % 2);
                let r = reference.get(i, j).norm();
                if r >= 1e-12 {
                    *dev = Some(100.0 * (u.get(i, j).norm() - r).abs() / r);
                }
            }
            Ok(DeviationRow { n, deviations })
        })
        .collect()
}
