//! Eigen-frames of iso-spectral Hamiltonian families and the connection
//! obtained from them by central differences.

use nalgebra::DVector;

use crate::chart::{Chart, ControlPoint};
use crate::error::{Error, Result};
use crate::fock::{
    displacement, kerr_hamiltonian, kerr_hamiltonian_two_mode, mixer_generator, squeeze, two_mode_mixer,
    two_mode_squeeze, two_mode_squeeze_generator, FockSpace, SparseOp, displacement_generator,
    squeeze_generator,
};
use crate::matrix::{c, cis, expm, ComplexMatrix, C64};

/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;

/// An ordered orthonormal frame over a chart.
pub trait FrameField: Send + Sync {
    fn chart(&self) -> Chart;

    /// State-space dimension.
    fn dim(&self) -> usize;

    /// Columns of the frame spanning the degenerate eigen-space.
    fn degenerate_indices(&self) -> Vec<usize>;

    /// Frame columns at a coordinate vector already known to be valid.
    fn frame(&self, p: &[f64]) -> ComplexMatrix;

    fn evaluate(&self, p: &ControlPoint) -> Result<ComplexMatrix> {
        self.chart().expect(p.chart)?;
        Ok(self.frame(&p.coords))
    }

    /// Degenerate columns only.
    fn degenerate_frame(&self, p: &[f64]) -> ComplexMatrix {
        let f = self.frame(p);
        let rows: Vec<usize> = (0..f.rows()).collect();
        f.select(&rows, &self.degenerate_indices())
    }
}

/// Frame columns for the CP^n section written in terms of `s_a = e^{iφ_a} sin θ_a`
/// and `c_a = cos θ_a`, with `s_{n+1} = 1`, `c_{n+1} = 0`.
fn cpn_frame_from(s: &[C64], cs: &[f64]) -> ComplexMatrix {
    let dim = s.len();
    let n = dim - 1;
    let mut v = ComplexMatrix::zeros(dim, dim);
    for a in 0..n {
        v.set(a, a, c(cs[a], 0.0));
        let mut prod = 1.0;
        for j in (a + 1)..dim {
            v.set(j, a, -s[a].conj() * s[j] * prod);
            prod *= cs[j];
        }
    }
    let mut prod = 1.0;
    for j in 0..dim {
        v.set(j, n, s[j] * prod);
        prod *= cs[j];
    }
    v
}

/// The CP^n section `|α(θ,φ)⟩`, `α = 1..n+1`, in `(θ, φ)` coordinates.
///
/// Column `α` is `cos θ_α |α⟩ − e^{−iφ_α} sin θ_α Σ_{j>α} e^{iφ_j} sin θ_j ∏_{α<γ<j} cos θ_γ |j⟩`
/// and the last column is `Σ_j e^{iφ_j} sin θ_j ∏_{γ<j} cos θ_γ |j⟩`, with
/// `θ_{n+1} = π/2`, `φ_{n+1} = 0`. The first `n` columns span the zero-energy space.
#[derive(Debug, Clone, Copy)]
pub struct CpnFrame {
    pub n: usize,
}

impl FrameField for CpnFrame {
    fn chart(&self) -> Chart {
        Chart::Cpn { n: self.n }
    }
    fn dim(&self) -> usize {
        self.n + 1
    }
    fn degenerate_indices(&self) -> Vec<usize> {
        (0..self.n).collect()
    }
    fn frame(&self, p: &[f64]) -> ComplexMatrix {
        let n = self.n;
        let mut s: Vec<C64> = (0..n).map(|a| cis(p[n + a]) * p[a].sin()).collect();
        let mut cs: Vec<f64> = (0..n).map(|a| p[a].cos()).collect();
        s.push(c(1.0, 0.0));
        cs.push(0.0);
        cpn_frame_from(&s, &cs)
    }
}

/// The same section in Cartesian coordinates `z_α = x_α + i y_α`, smooth at the origin.
#[derive(Debug, Clone, Copy)]
pub struct CpnCartesianFrame {
    pub n: usize,
}

fn sinc(r: f64) -> f64 {
    if r < 1e-4 {
        1.0 - r * r / 6.0 + r.powi(4) / 120.0
    } else {
        r.sin() / r
    }
}

impl FrameField for CpnCartesianFrame {
    fn chart(&self) -> Chart {
        Chart::CpnCartesian { n: self.n }
    }
    fn dim(&self) -> usize {
        self.n + 1
    }
    fn degenerate_indices(&self) -> Vec<usize> {
        (0..self.n).collect()
    }
    fn frame(&self, p: &[f64]) -> ComplexMatrix {
        let n = self.n;
        let mut s = Vec::with_capacity(n + 1);
        let mut cs = Vec::with_capacity(n + 1);
        for a in 0..n {
            let z = c(p[2 * a], p[2 * a + 1]);
            let r = z.norm();
            s.push(z * sinc(r));
            cs.push(r.cos());
        }
        s.push(c(1.0, 0.0));
        cs.push(0.0);
        cpn_frame_from(&s, &cs)
    }
}

fn basis(dim: usize, i: usize) -> DVector<C64> {
    let mut v = DVector::zeros(dim);
    v[i] = c(1.0, 0.0);
    v
}

fn scaled(op: &SparseOp, s: C64) -> SparseOp {
    SparseOp { dim: op.dim, entries: op.entries.iter().map(|&(i, j, a)| (i, j, a * s)).collect() }
}

/// Single-mode frame `D(λ)S(μ)|ν⟩` on `OPTICAL1` for the listed Fock levels.
#[derive(Debug, Clone)]
pub struct SingleModeFrame {
    pub cutoff: usize,
    pub levels: Vec<usize>,
}

impl SingleModeFrame {
    /// The qubit frame on `|0⟩, |1⟩`.
    pub fn qubit(cutoff: usize) -> Self {
        Self { cutoff, levels: vec![0, 1] }
    }
}

impl FrameField for SingleModeFrame {
    fn chart(&self) -> Chart {
        Chart::Optical1
    }
    fn dim(&self) -> usize {
        self.cutoff
    }
    fn degenerate_indices(&self) -> Vec<usize> {
        (0..self.levels.len()).collect()
    }
    fn frame(&self, p: &[f64]) -> ComplexMatrix {
        let lambda = c(p[0], p[1]);
        let mu = cis(p[3]) * p[2];
        let d = displacement_generator(lambda, self.cutoff);
        let s = squeeze_generator(mu, self.cutoff);
        let cols: Vec<DVector<C64>> = self
            .levels
            .iter()
            .map(|&nu| d.exp_apply(&s.exp_apply(&basis(self.cutoff, nu))))
            .collect();
        ComplexMatrix::from_columns(&cols)
    }
}

/// Two-mode frame `N(ξ)M(ζ)|ν1ν2⟩` on `OPTICAL2` for `ν1, ν2 ∈ {0, 1}`,
/// ordered `(00, 01, 10, 11)`.
#[derive(Debug, Clone, Copy)]
pub struct TwoModeFrame {
    pub cutoff: usize,
}

impl FrameField for TwoModeFrame {
    fn chart(&self) -> Chart {
        Chart::Optical2
    }
    fn dim(&self) -> usize {
        self.cutoff * self.cutoff
    }
    fn degenerate_indices(&self) -> Vec<usize> {
        (0..4).collect()
    }
    fn frame(&self, p: &[f64]) -> ComplexMatrix {
        let zeta = cis(p[1]) * p[0];
        let xi = cis(p[3]) * p[2];
        let space = FockSpace { cutoff: self.cutoff, modes: 2 };
        let m = two_mode_squeeze_generator(zeta, self.cutoff);
        let nn = mixer_generator(xi, self.cutoff);
        let cols: Vec<DVector<C64>> = [(0, 0), (0, 1), (1, 0), (1, 1)]
            .iter()
            .map(|&(a, b)| nn.exp_apply(&m.exp_apply(&basis(space.dim(), space.index(a, b)))))
            .collect();
        ComplexMatrix::from_columns(&cols)
    }
}

/// Per-mode cutoff for the interferometer; the `N ≤ 2` sectors are then exact.
pub const INTERFEROMETER_CUTOFF: usize = 3;

/// `(J_x, J_y, J_z)` on the two-mode space with the given cutoff.
pub fn angular_momentum(cutoff: usize) -> [SparseOp; 3] {
    let sp = FockSpace { cutoff, modes: 2 };
    // a1†a2
    let mut hop = SparseOp::new(sp.dim());
    for n1 in 0..cutoff {
        for n2 in 1..cutoff {
            if n1 + 1 < cutoff {
                let s = ((n1 + 1) as f64 * n2 as f64).sqrt();
                hop.push(sp.index(n1 + 1, n2 - 1), sp.index(n1, n2), c(s, 0.0));
            }
        }
    }
    let hop_dag = SparseOp {
        dim: hop.dim,
        entries: hop.entries.iter().map(|&(i, j, a)| (j, i, a.conj())).collect(),
    };
    let mut jx = scaled(&hop, c(0.5, 0.0));
    jx.entries.extend(scaled(&hop_dag, c(0.5, 0.0)).entries);
    let mut jy = scaled(&hop, c(0.0, -0.5));
    jy.entries.extend(scaled(&hop_dag, c(0.0, 0.5)).entries);
    let mut jz = SparseOp::new(sp.dim());
    for n1 in 0..cutoff {
        for n2 in 0..cutoff {
            jz.push(sp.index(n1, n2), sp.index(n1, n2), c(0.5 * (n1 as f64 - n2 as f64), 0.0));
        }
    }
    [jx, jy, jz]
}

/// Interferometer frame `U_x(α)U_y(β)U_z(γ)|ν1ν2⟩` with `U_k(t) = exp(i t J_k)`,
/// ordered `(00, 01, 10, 11)`.
#[derive(Debug, Clone)]
pub struct InterferometerFrame {
    j: [SparseOp; 3],
}

impl Default for InterferometerFrame {
    fn default() -> Self {
        Self { j: angular_momentum(INTERFEROMETER_CUTOFF) }
    }
}

impl FrameField for InterferometerFrame {
    fn chart(&self) -> Chart {
        Chart::Su2Int
    }
    fn dim(&self) -> usize {
        INTERFEROMETER_CUTOFF * INTERFEROMETER_CUTOFF
    }
    fn degenerate_indices(&self) -> Vec<usize> {
        (0..4).collect()
    }
    fn frame(&self, p: &[f64]) -> ComplexMatrix {
        let sp = FockSpace { cutoff: INTERFEROMETER_CUTOFF, modes: 2 };
        let gx = scaled(&self.j[0], c(0.0, p[0]));
        let gy = scaled(&self.j[1], c(0.0, p[1]));
        let gz = scaled(&self.j[2], c(0.0, p[2]));
        let cols: Vec<DVector<C64>> = [(0, 0), (0, 1), (1, 0), (1, 1)]
            .iter()
            .map(|&(a, b)| {
                gx.exp_apply(&gy.exp_apply(&gz.exp_apply(&basis(sp.dim(), sp.index(a, b)))))
            })
            .collect();
        ComplexMatrix::from_columns(&cols)
    }
}

/// A frame whose degenerate columns are rotated by a constant unitary:
/// `|ψ'^α⟩ = Σ_β g_{βα} |ψ^β⟩`.
pub struct GaugeTransformed<F> {
    pub inner: F,
    pub gauge: ComplexMatrix,
}

impl<F: FrameField> FrameField for GaugeTransformed<F> {
    fn chart(&self) -> Chart {
        self.inner.chart()
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn degenerate_indices(&self) -> Vec<usize> {
        self.inner.degenerate_indices()
    }
    fn frame(&self, p: &[f64]) -> ComplexMatrix {
        let mut f = self.inner.frame(p);
        let deg = self.inner.degenerate_indices();
        let rows: Vec<usize> = (0..f.rows()).collect();
        let rotated = f.select(&rows, &deg) * &self.gauge;
        for (k, &col) in deg.iter().enumerate() {
            for r in 0..f.rows() {
                f.set(r, col, rotated.get(r, k));
            }
        }
        f
    }
}

/// Central-difference estimate of `(A_μ)^{αβ} = ⟨ψ^α|∂_μ ψ^β⟩` on the degenerate
/// block, returned as its anti-hermitian part.
pub fn numeric_connection(f: &dyn FrameField, p: &ControlPoint, mu: usize, h: f64) -> Result<ComplexMatrix> {
    f.chart().expect(p.chart)?;
    f.chart().check_index(mu)?;
    if !(h > 0.0) {
        return Err(Error::Parameter(format!("difference step must be positive, got {h}")));
    }
    let mut dir = vec![0.0; p.coords.len()];
    dir[mu] = 1.0;
    Ok(directional_connection(f, &p.coords, &dir, h))
}

/// `Σ_μ A_μ v^μ` by a single central difference along `v`.
pub(crate) fn directional_connection(f: &dyn FrameField, p: &[f64], v: &[f64], h: f64) -> ComplexMatrix {
    let plus: Vec<f64> = p.iter().zip(v).map(|(x, d)| x + h * d).collect();
    let minus: Vec<f64> = p.iter().zip(v).map(|(x, d)| x - h * d).collect();
    let center = f.degenerate_frame(p);
    let diff = (f.degenerate_frame(&plus) - f.degenerate_frame(&minus)).scale_real(0.5 / h);
    (center.adjoint() * diff).antihermitian_part()
}

/// An iso-spectral family `H(λ) = U(λ) H0 U(λ)†`.
pub trait HamiltonianFamily: Send + Sync {
    fn chart(&self) -> Chart;
    fn h0(&self) -> ComplexMatrix;
    fn unitary(&self, p: &[f64]) -> ComplexMatrix;
}

/// `H0 = ε|n+1⟩⟨n+1|` rotated by the CP^n section.
#[derive(Debug, Clone, Copy)]
pub struct CpnFamily {
    pub n: usize,
    pub epsilon: f64,
}

impl HamiltonianFamily for CpnFamily {
    fn chart(&self) -> Chart {
        Chart::Cpn { n: self.n }
    }
    fn h0(&self) -> ComplexMatrix {
        let mut d = vec![0.0; self.n + 1];
        d[self.n] = self.epsilon;
        ComplexMatrix::from_real_diagonal(&d)
    }
    fn unitary(&self, p: &[f64]) -> ComplexMatrix {
        CpnFrame { n: self.n }.frame(p)
    }
}

/// Kerr medium controlled by `D(λ)S(μ)`.
#[derive(Debug, Clone, Copy)]
pub struct SingleModeFamily {
    pub cutoff: usize,
    pub kerr: f64,
}

impl HamiltonianFamily for SingleModeFamily {
    fn chart(&self) -> Chart {
        Chart::Optical1
    }
    fn h0(&self) -> ComplexMatrix {
        kerr_hamiltonian(self.kerr, self.cutoff).expect("cutoff validated at construction")
    }
    fn unitary(&self, p: &[f64]) -> ComplexMatrix {
        let d = displacement(c(p[0], p[1]), self.cutoff).expect("valid cutoff");
        let s = squeeze(cis(p[3]) * p[2], self.cutoff).expect("valid cutoff");
        d * s
    }
}

/// Two Kerr modes controlled by `N(ξ)M(ζ)`.
#[derive(Debug, Clone, Copy)]
pub struct TwoModeFamily {
    pub cutoff: usize,
    pub kerr: f64,
}

impl HamiltonianFamily for TwoModeFamily {
    fn chart(&self) -> Chart {
        Chart::Optical2
    }
    fn h0(&self) -> ComplexMatrix {
        kerr_hamiltonian_two_mode(self.kerr, self.cutoff).expect("valid cutoff")
    }
    fn unitary(&self, p: &[f64]) -> ComplexMatrix {
        let n = two_mode_mixer(cis(p[3]) * p[2], self.cutoff).expect("valid cutoff");
        let m = two_mode_squeeze(cis(p[1]) * p[0], self.cutoff).expect("valid cutoff");
        n * m
    }
}

/// Two Kerr modes controlled by `U_x(α)U_y(β)U_z(γ)`.
#[derive(Debug, Clone, Copy)]
pub struct InterferometerFamily {
    pub kerr: f64,
}

impl HamiltonianFamily for InterferometerFamily {
    fn chart(&self) -> Chart {
        Chart::Su2Int
    }
    fn h0(&self) -> ComplexMatrix {
        kerr_hamiltonian_two_mode(self.kerr, INTERFEROMETER_CUTOFF).expect("valid cutoff")
    }
    fn unitary(&self, p: &[f64]) -> ComplexMatrix {
        let j = angular_momentum(INTERFEROMETER_CUTOFF);
        let u = |k: usize, t: f64| expm(&j[k].to_dense().scale(c(0.0, t))).expect("square");
        u(0, p[0]) * u(1, p[1]) * u(2, p[2])
    }
}

/// The default family attached to a chart: `ε = 1`, `X = 1`, Fock cutoff 40
/// for one mode and 12 per mode for two.
pub fn default_family(chart: Chart) -> Result<Box<dyn HamiltonianFamily>> {
    match chart {
        Chart::Cpn { n } => Ok(Box::new(CpnFamily { n, epsilon: 1.0 })),
        Chart::Optical1 => Ok(Box::new(SingleModeFamily { cutoff: crate::fock::DEFAULT_CUTOFF, kerr: 1.0 })),
        Chart::Optical2 => Ok(Box::new(TwoModeFamily { cutoff: 12, kerr: 1.0 })),
        Chart::Su2Int => Ok(Box::new(InterferometerFamily { kerr: 1.0 })),
        Chart::CpnCartesian { .. } => Err(Error::Unsupported(format!(
            "chart {chart} is a coordinate chart without an attached Hamiltonian family"
        ))),
    }
}

/// `U(p) H0 U(p)†`.
pub fn isospectral_hamiltonian(family: &dyn HamiltonianFamily, p: &ControlPoint) -> Result<ComplexMatrix> {
    family.chart().expect(p.chart)?;
    let u = family.unitary(&p.coords);
    Ok(&(&u * &family.h0()) * &u.adjoint())
}

/// Writes a hermitian 2x2 matrix as `shift·I + b·σ`.
pub fn bloch_decomposition(h: &ComplexMatrix) -> Result<(f64, [f64; 3])> {
    if h.rows() != 2 || h.cols() != 2 {
        return Err(Error::Dimension("expected a 2x2 matrix".into()));
    }
    let shift = 0.5 * (h.get(0, 0) + h.get(1, 1)).re;
    let bz = 0.5 * (h.get(0, 0) - h.get(1, 1)).re;
    let off = h.get(1, 0);
    Ok((shift, [off.re, off.im, bz]))
}
