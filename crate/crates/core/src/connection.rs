//! Gauge potentials `A_μ` on the degenerate block: the analytic CP^n,
//! optical and interferometer connections, and a numeric connection built
//! from any frame.

use crate::chart::{Chart, ControlPoint};
use crate::error::{Error, Result};
use crate::frames::{directional_connection, CpnCartesianFrame, FrameField, DEFAULT_STEP};
use crate::matrix::{c, cis, ComplexMatrix, I};

/// Anti-hermitian matrix-valued one-form on a chart.
pub trait ConnectionField: Send + Sync {
    fn chart(&self) -> Chart;

    fn block_dim(&self) -> usize;

    /// `A_μ` at a coordinate vector already known to be valid.
    fn component(&self, p: &[f64], mu: usize) -> ComplexMatrix;

    /// `Σ_μ A_μ v^μ`.
    fn contract(&self, p: &[f64], v: &[f64]) -> ComplexMatrix {
        let n = self.block_dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (mu, &dv) in v.iter().enumerate() {
            if dv != 0.0 {
                out += &self.component(p, mu).scale_real(dv);
            }
        }
        out
    }

    fn evaluate(&self, p: &ControlPoint, mu: usize) -> Result<ComplexMatrix> {
        self.chart().expect(p.chart)?;
        self.chart().check_index(mu)?;
        Ok(self.component(&p.coords, mu))
    }

    /// All components at a point, in coordinate order.
    fn components(&self, p: &ControlPoint) -> Result<Vec<ComplexMatrix>> {
        self.chart().expect(p.chart)?;
        Ok((0..self.chart().dim()).map(|mu| self.component(&p.coords, mu)).collect())
    }
}

/// Analytic connection of the CP^n section on its `n`-dimensional zero-energy block.
///
/// With block indices `a, l, b` (0-based) and empty products equal to 1:
/// * `A^{θ_b}_{ab} = e^{i(φ_a−φ_b)} sin θ_a ∏_{a<g<b} cos θ_g` for `a < b`
/// * `A^{φ_b}_{ab} = −i e^{i(φ_a−φ_b)} sin θ_b sin θ_a ∏_{a<g≤b} cos θ_g` for `a ≤ b`
/// * `A^{φ_b}_{al} = i e^{i(φ_a−φ_l)} sin θ_l sin θ_a sin²θ_b ∏_{l<g<b} cos θ_g ∏_{a<g<b} cos θ_g`
///   for `a ≤ l < b`
///
/// and the remaining entries follow from anti-hermiticity.
#[derive(Debug, Clone, Copy)]
pub struct CpnConnection {
    pub n: usize,
}

impl CpnConnection {
    fn theta_component(&self, p: &[f64], b: usize) -> ComplexMatrix {
        let n = self.n;
        let (th, ph) = (&p[..n], &p[n..]);
        let mut m = ComplexMatrix::zeros(n, n);
        for a in 0..b {
            let prod: f64 = ((a + 1)..b).map(|g| th[g].cos()).product();
            let v = cis(ph[a] - ph[b]) * th[a].sin() * prod;
            m.set(a, b, v);
            m.set(b, a, -v.conj());
        }
        m
    }

    fn phi_component(&self, p: &[f64], b: usize) -> ComplexMatrix {
        let n = self.n;
        let (th, ph) = (&p[..n], &p[n..]);
        let cosprod = |lo: usize, hi: usize| -> f64 { (lo..hi).map(|g| th[g].cos()).product() };
        let mut m = ComplexMatrix::zeros(n, n);
        for a in 0..=b {
            let v = -I * cis(ph[a] - ph[b]) * th[b].sin() * th[a].sin() * cosprod(a + 1, b + 1);
            m.set(a, b, v);
            if a < b {
                m.set(b, a, -v.conj());
            }
        }
        let sb2 = th[b].sin().powi(2);
        for l in 0..b {
            for a in 0..=l {
                let v = I
                    * cis(ph[a] - ph[l])
                    * (th[l].sin() * th[a].sin() * sb2 * cosprod(l + 1, b) * cosprod(a + 1, b));
                m.set(a, l, v);
                if a < l {
                    m.set(l, a, -v.conj());
                }
            }
        }
        m
    }
}

impl ConnectionField for CpnConnection {
    fn chart(&self) -> Chart {
        Chart::Cpn { n: self.n }
    }
    fn block_dim(&self) -> usize {
        self.n
    }
    fn component(&self, p: &[f64], mu: usize) -> ComplexMatrix {
        if mu < self.n {
            self.theta_component(p, mu)
        } else {
            self.phi_component(p, mu - self.n)
        }
    }
}

/// Analytic CP^n connection component `μ` at `p`.
pub fn cpn_connection(p: &ControlPoint, mu: usize) -> Result<ComplexMatrix> {
    match p.chart {
        Chart::Cpn { n } => CpnConnection { n }.evaluate(p, mu),
        other => Err(Error::Chart { expected: "CPN(n)".into(), found: other.to_string() }),
    }
}

/// Connection of the single-mode displacer/squeezer on span{|0⟩, |1⟩}
/// (`OPTICAL1`) or of the two-mode devices on span{|00⟩, |01⟩, |10⟩, |11⟩}
/// (`OPTICAL2`).
///
/// The single-mode off-diagonal entries carry `e^{∓iθ1}` as
/// `A_x = [[−iy, −(ch − e^{−iθ1} sh)], [ch − e^{iθ1} sh, −iy]]`,
/// `A_y = [[ix, i(ch + e^{−iθ1} sh)], [i(ch + e^{iθ1} sh), ix]]`
/// with `ch = cosh 2r1`, `sh = sinh 2r1`, matching the frame `D(λ)S(μ)|ν⟩`.
#[derive(Debug, Clone, Copy)]
pub struct OpticalConnection {
    pub chart: Chart,
}

impl OpticalConnection {
    pub fn single_mode() -> Self {
        Self { chart: Chart::Optical1 }
    }

    pub fn two_mode() -> Self {
        Self { chart: Chart::Optical2 }
    }

    fn single(p: &[f64], mu: usize) -> ComplexMatrix {
        let (x, y, r1, t1) = (p[0], p[1], p[2], p[3]);
        let (ch, sh) = ((2.0 * r1).cosh(), (2.0 * r1).sinh());
        let z = c(0.0, 0.0);
        match mu {
            0 => ComplexMatrix::from_rows(&[
                [c(0.0, -y), -(c(ch, 0.0) - cis(-t1) * sh)],
                [c(ch, 0.0) - cis(t1) * sh, c(0.0, -y)],
            ]),
            1 => ComplexMatrix::from_rows(&[
                [c(0.0, x), I * (c(ch, 0.0) + cis(-t1) * sh)],
                [I * (c(ch, 0.0) + cis(t1) * sh), c(0.0, x)],
            ]),
            2 => ComplexMatrix::zeros(2, 2),
            _ => {
                let f = 0.25 * ((4.0 * r1).cosh() - 1.0);
                ComplexMatrix::from_rows(&[[c(0.0, f), z], [z, c(0.0, 3.0 * f)]])
            }
        }
    }

    fn two(p: &[f64], mu: usize) -> ComplexMatrix {
        let (r2, t2, r3, t3) = (p[0], p[1], p[2], p[3]);
        let mut m = ComplexMatrix::zeros(4, 4);
        match mu {
            0 => {
                m.set(0, 3, -cis(-t2));
                m.set(3, 0, cis(t2));
            }
            1 => {
                let s = I * (0.5 * (2.0 * r2).sinh());
                m.set(0, 3, cis(-t2) * s);
                m.set(3, 0, cis(t2) * s);
                let d = 0.5 * ((2.0 * r2).cosh() - 1.0);
                for (k, w) in [1.0, 2.0, 2.0, 3.0].iter().enumerate() {
                    m.set(k, k, c(0.0, w * d));
                }
            }
            2 => {
                let f = 2.0 * r2.cosh().powi(2) - 1.0;
                m.set(1, 2, -cis(-t3) * f);
                m.set(2, 1, cis(t3) * f);
            }
            _ => {
                let s = I * (0.5 * (2.0 * r2).cosh() * (2.0 * r3).sin());
                m.set(1, 2, cis(-t3) * s);
                m.set(2, 1, cis(t3) * s);
                let d = r3.sin().powi(2);
                m.set(1, 1, c(0.0, d));
                m.set(2, 2, c(0.0, -d));
            }
        }
        m
    }
}

impl ConnectionField for OpticalConnection {
    fn chart(&self) -> Chart {
        self.chart
    }
    fn block_dim(&self) -> usize {
        if self.chart == Chart::Optical1 {
            2
        } else {
            4
        }
    }
    fn component(&self, p: &[f64], mu: usize) -> ComplexMatrix {
        if self.chart == Chart::Optical1 {
            Self::single(p, mu)
        } else {
            Self::two(p, mu)
        }
    }
}

/// All optical connection components at a point of `OPTICAL1` or `OPTICAL2`.
pub fn optical_connection(p: &ControlPoint) -> Result<Vec<ComplexMatrix>> {
    match p.chart {
        Chart::Optical1 | Chart::Optical2 => OpticalConnection { chart: p.chart }.components(p),
        other => Err(Error::Chart { expected: "OPTICAL1 or OPTICAL2".into(), found: other.to_string() }),
    }
}

/// Interferometer connection on span{|00⟩, |01⟩, |10⟩, |11⟩} for the frame
/// `U_x(α)U_y(β)U_z(γ)|ν1ν2⟩`.
#[derive(Debug, Clone, Copy, Default)]
pub struct InterferometerConnection;

impl ConnectionField for InterferometerConnection {
    fn chart(&self) -> Chart {
        Chart::Su2Int
    }
    fn block_dim(&self) -> usize {
        4
    }
    fn component(&self, p: &[f64], mu: usize) -> ComplexMatrix {
        let (beta, gamma) = (p[1], p[2]);
        let mut m = ComplexMatrix::zeros(4, 4);
        match mu {
            0 => {
                let h = c(0.0, 0.5);
                m.set(1, 1, h * beta.sin());
                m.set(1, 2, h * beta.cos() * cis(gamma));
                m.set(2, 1, h * beta.cos() * cis(-gamma));
                m.set(2, 2, -h * beta.sin());
            }
            1 => {
                m.set(1, 2, cis(gamma) * -0.5);
                m.set(2, 1, cis(-gamma) * 0.5);
            }
            _ => {
                m.set(1, 1, c(0.0, -0.5));
                m.set(2, 2, c(0.0, 0.5));
            }
        }
        m
    }
}

/// `(A_α, A_β, A_γ)` at a point of `SU2INT`.
pub fn interferometer_connection(p: &ControlPoint) -> Result<[ComplexMatrix; 3]> {
    let v = InterferometerConnection.components(p)?;
    let mut it = v.into_iter();
    Ok([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
}

/// The connection attached to a chart: analytic where available, numeric
/// from the Cartesian frame on `CPN_CARTESIAN`.
pub fn chart_connection(chart: Chart) -> Box<dyn ConnectionField> {
    match chart {
        Chart::Cpn { n } => Box::new(CpnConnection { n }),
        Chart::CpnCartesian { n } => Box::new(NumericConnection::new(CpnCartesianFrame { n })),
        Chart::Optical1 | Chart::Optical2 => Box::new(OpticalConnection { chart }),
        Chart::Su2Int => Box::new(InterferometerConnection),
    }
}

/// Connection computed from a frame by central differences.
pub struct NumericConnection<F> {
    pub frame: F,
    pub step: f64,
}

impl<F: FrameField> NumericConnection<F> {
    pub fn new(frame: F) -> Self {
        Self { frame, step: DEFAULT_STEP }
    }
}

impl<F: FrameField> ConnectionField for NumericConnection<F> {
    fn chart(&self) -> Chart {
        self.frame.chart()
    }
    fn block_dim(&self) -> usize {
        self.frame.degenerate_indices().len()
    }
    fn component(&self, p: &[f64], mu: usize) -> ComplexMatrix {
        let mut v = vec![0.0; p.len()];
        v[mu] = 1.0;
        directional_connection(&self.frame, p, &v, self.step)
    }
    fn contract(&self, p: &[f64], v: &[f64]) -> ComplexMatrix {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            let n = self.block_dim();
            return ComplexMatrix::zeros(n, n);
        }
        let unit: Vec<f64> = v.iter().map(|x| x / norm).collect();
        directional_connection(&self.frame, p, &unit, self.step).scale_real(norm)
    }
}
