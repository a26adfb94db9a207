//! Field strength `F_{μν} = ∂_μA_ν − ∂_νA_μ + [A_μ, A_ν]` and the span and
//! Lie-closure dimensions that decide irreducibility.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chart::ControlPoint;
use crate::connection::ConnectionField;
use crate::error::{Error, Result};
use crate::matrix::{c, ComplexMatrix};

/// Relative singular-value cutoff for numerical rank.
pub const RANK_TOL: f64 = 1e-8;

/// Maximum number of commutator rounds in [`lie_closure_dimension`].
pub const CLOSURE_ROUNDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureBlock {
    pub mu: usize,
    pub nu: usize,
    pub value: ComplexMatrix,
    /// Set when `μ = ν`; the value is then zero by antisymmetry.
    pub flagged: bool,
}

fn partial(a: &dyn ConnectionField, p: &[f64], comp: usize, dir: usize, h: f64) -> ComplexMatrix {
    let mut plus = p.to_vec();
    let mut minus = p.to_vec();
    plus[dir] += h;
    minus[dir] -= h;
    (a.component(&plus, comp) - a.component(&minus, comp)).scale_real(0.5 / h)
}

/// `∂_μA_ν − ∂_νA_μ` by central differences at a valid coordinate vector.
pub(crate) fn exterior_derivative(a: &dyn ConnectionField, p: &[f64], mu: usize, nu: usize, h: f64) -> ComplexMatrix {
    partial(a, p, nu, mu, h) - partial(a, p, mu, nu, h)
}

/// `F_{μν}` at `p` by central differences with step `h`.
pub fn curvature_numeric(
    a: &dyn ConnectionField,
    p: &ControlPoint,
    mu: usize,
    nu: usize,
    h: f64,
) -> Result<CurvatureBlock> {
    a.chart().expect(p.chart)?;
    a.chart().check_index(mu)?;
    a.chart().check_index(nu)?;
    if !(h > 0.0) {
        return Err(Error::Parameter(format!("difference step must be positive, got {h}")));
    }
    let n = a.block_dim();
    if mu == nu {
        return Ok(CurvatureBlock { mu, nu, value: ComplexMatrix::zeros(n, n), flagged: true });
    }
    let x = &p.coords;
    let (am, an) = (a.component(x, mu), a.component(x, nu));
    let value = exterior_derivative(a, x, mu, nu, h) + &am * &an - &an * &am;
    Ok(CurvatureBlock { mu, nu, value, flagged: false })
}

/// All blocks `F_{μν}`, `μ < ν`, at a point.
pub fn curvature_blocks(a: &dyn ConnectionField, p: &ControlPoint, h: f64) -> Result<Vec<CurvatureBlock>> {
    let d = a.chart().dim();
    let mut out = Vec::with_capacity(d * (d - 1) / 2);
    for mu in 0..d {
        for nu in (mu + 1)..d {
            out.push(curvature_numeric(a, p, mu, nu, h)?);
        }
    }
    Ok(out)
}

/// Closed form of the CP^n curvature at the origin in the real coordinates
/// `z_α = z_α^0 + i z_α^1`: `i^{i+j}[(−1)^j|α⟩⟨β| − (−1)^i|β⟩⟨α|]`, with
/// `α, β` 1-based.
pub fn cpn_curvature_origin(n: usize, alpha: usize, i: usize, beta: usize, j: usize) -> Result<ComplexMatrix> {
    if n == 0 || !(1..=n).contains(&alpha) || !(1..=n).contains(&beta) {
        return Err(Error::Parameter(format!("need 1 ≤ α, β ≤ n = {n}, got α = {alpha}, β = {beta}")));
    }
    if i > 1 || j > 1 {
        return Err(Error::Parameter(format!("real-part indices must be 0 or 1, got i = {i}, j = {j}")));
    }
    let phase = match (i + j) % 4 {
        0 => c(1.0, 0.0),
        1 => c(0.0, 1.0),
        _ => c(-1.0, 0.0),
    };
    let sign = |k: usize| if k == 0 { 1.0 } else { -1.0 };
    let mut m = ComplexMatrix::zeros(n, n);
    let (a, b) = (alpha - 1, beta - 1);
    m.set(a, b, m.get(a, b) + phase * sign(j));
    m.set(b, a, m.get(b, a) - phase * sign(i));
    Ok(m)
}

/// Every origin block of CP^n, `α, β ∈ 1..=n`, `i, j ∈ {0, 1}`.
pub fn cpn_origin_blocks(n: usize) -> Result<Vec<ComplexMatrix>> {
    let mut out = Vec::with_capacity(4 * n * n);
    for alpha in 1..=n {
        for beta in 1..=n {
            for i in 0..2 {
                for j in 0..2 {
                    out.push(cpn_curvature_origin(n, alpha, i, beta, j)?);
                }
            }
        }
    }
    Ok(out)
}

fn vectorize(m: &ComplexMatrix) -> Vec<f64> {
    m.to_row_major().iter().flat_map(|z| [z.re, z.im]).collect()
}

fn check_blocks(blocks: &[ComplexMatrix]) -> Result<usize> {
    let n = blocks[0].rows();
    for b in blocks {
        if b.rows() != n || b.cols() != n {
            return Err(Error::Dimension(format!(
                "blocks must all be {n}x{n}, found {}x{}",
                b.rows(),
                b.cols()
            )));
        }
    }
    Ok(n)
}

fn rank(vectors: &[Vec<f64>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(vectors[0].len(), vectors.len(), |r, k| vectors[k][r]);
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * max).count()
}

/// Real-linear dimension of the span of the blocks.
pub fn span_dimension(blocks: &[ComplexMatrix]) -> Result<usize> {
    if blocks.is_empty() {
        return Ok(0);
    }
    check_blocks(blocks)?;
    Ok(rank(&blocks.iter().map(vectorize).collect::<Vec<_>>()))
}

/// Orthonormal real basis of the span, kept as matrices.
fn basis(blocks: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let scale = blocks.iter().map(|b| b.frobenius_norm()).fold(0.0, f64::max);
    let mut out: Vec<ComplexMatrix> = Vec::new();
    for b in blocks {
        let mut v = b.clone();
        for _ in 0..2 {
            for e in &out {
                let overlap: f64 = vectorize(e).iter().zip(vectorize(&v)).map(|(x, y)| x * y).sum();
                v = v - e.scale_real(overlap);
            }
        }
        let norm = v.frobenius_norm();
        if norm > RANK_TOL * scale.max(1.0) {
            out.push(v.scale_real(1.0 / norm));
        }
    }
    out
}

/// Dimension of the smallest real Lie algebra containing the blocks,
/// iterating commutators for at most [`CLOSURE_ROUNDS`] rounds.
pub fn lie_closure_dimension(blocks: &[ComplexMatrix]) -> Result<usize> {
    if blocks.is_empty() {
        return Ok(0);
    }
    let n = check_blocks(blocks)?;
    let mut current = basis(blocks);
    for _ in 0..CLOSURE_ROUNDS {
        let mut grown = current.clone();
        for (k, x) in current.iter().enumerate() {
            for y in &current[k + 1..] {
                grown.push(x * y - y * x);
            }
        }
        let next = basis(&grown);
        let done = next.len() == current.len() || next.len() >= 2 * n * n;
        current = next;
        if done {
            break;
        }
    }
    Ok(current.len())
}
