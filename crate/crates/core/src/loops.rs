//! Loops in control charts: piecewise-smooth closed paths on `[0, 1]` with
//! composition, inversion and reparametrization, plus constructors for
//! rectangles, polygons and smooth ellipses lying in a coordinate plane.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chart::{Chart, ControlPoint};
use crate::error::{Error, Result};

/// Endpoint-continuity tolerance.
pub const CLOSURE_TOL: f64 = 1e-12;

type PathFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// One smooth piece of a loop, traversed on `[start, end]` of the loop
/// parameter; `map` takes the local parameter `s ∈ [0, 1]`.
#[derive(Clone)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    map: PathFn,
}

impl Segment {
    pub fn at(&self, s: f64) -> Vec<f64> {
        (self.map)(s)
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Geometric metadata kept when it survives an operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Rectangle with sides along the plane axes; the basepoint is `corner`.
    Rectangle { corner: [f64; 2], sides: [f64; 2], counter_clockwise: bool },
    General,
}

/// A closed piecewise-smooth path `γ(0) = γ(1) = basepoint`.
#[derive(Clone)]
pub struct Loop {
    chart: Chart,
    basepoint: Vec<f64>,
    segments: Vec<Segment>,
    plane: Option<(usize, usize)>,
    shape: Shape,
}

impl fmt::Debug for Loop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Loop")
            .field("chart", &self.chart)
            .field("basepoint", &self.basepoint)
            .field("segments", &self.segments.len())
            .field("plane", &self.plane)
            .field("shape", &self.shape)
            .finish()
    }
}

fn gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

impl Loop {
    /// Builds a loop from consecutive pieces with the given relative durations.
    pub fn from_pieces(
        chart: Chart,
        pieces: Vec<PathFn>,
        durations: &[f64],
        plane: Option<(usize, usize)>,
    ) -> Result<Self> {
        if pieces.is_empty() || pieces.len() != durations.len() {
            return Err(Error::Parameter("a loop needs one duration per piece".into()));
        }
        if durations.iter().any(|&d| !(d >= 0.0)) {
            return Err(Error::Parameter("piece durations must be non-negative".into()));
        }
        let total: f64 = durations.iter().sum();
        let weights: Vec<f64> = if total > 0.0 {
            durations.iter().map(|d| d / total).collect()
        } else {
            vec![1.0 / pieces.len() as f64; pieces.len()]
        };
        let mut t = 0.0;
        let mut segments = Vec::with_capacity(pieces.len());
        for (k, (map, w)) in pieces.into_iter().zip(weights).enumerate() {
            let end = if k + 1 == durations.len() { 1.0 } else { t + w };
            segments.push(Segment { start: t, end, map });
            t = end;
        }
        let basepoint = segments[0].at(0.0);
        if basepoint.len() != chart.dim() {
            return Err(Error::Dimension(format!(
                "chart {chart} needs {} coordinates, path gives {}",
                chart.dim(),
                basepoint.len()
            )));
        }
        let lp = Self { chart, basepoint, segments, plane, shape: Shape::General };
        lp.validate()?;
        Ok(lp)
    }

    fn validate(&self) -> Result<()> {
        for w in self.segments.windows(2) {
            let g = gap(&w[0].at(1.0), &w[1].at(0.0));
            if g > CLOSURE_TOL {
                return Err(Error::Parameter(format!("segments are discontinuous (gap {g:.3e})")));
            }
        }
        let g = gap(&self.segments.last().unwrap().at(1.0), &self.basepoint);
        if g > CLOSURE_TOL {
            return Err(Error::OpenLoop(g));
        }
        Ok(())
    }

    /// The loop that stays at `basepoint`.
    pub fn trivial(base: &ControlPoint) -> Self {
        let b = base.coords.clone();
        Self {
            chart: base.chart,
            basepoint: b.clone(),
            segments: vec![Segment { start: 0.0, end: 1.0, map: Arc::new(move |_| b.clone()) }],
            plane: None,
            shape: Shape::General,
        }
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn basepoint(&self) -> ControlPoint {
        ControlPoint { chart: self.chart, coords: self.basepoint.clone() }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Coordinate plane the loop lies in, if known.
    pub fn plane(&self) -> Option<(usize, usize)> {
        self.plane
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// `γ(t)`.
    pub fn point(&self, t: f64) -> Vec<f64> {
        let t = t.clamp(0.0, 1.0);
        let k = self.segments.partition_point(|s| s.end < t).min(self.segments.len() - 1);
        let seg = &self.segments[k];
        let d = seg.duration();
        let s = if d > 0.0 { (t - seg.start) / d } else { 0.0 };
        seg.at(s.clamp(0.0, 1.0))
    }

    /// Largest coordinate gap between `γ(1)` and the basepoint.
    pub fn closure_gap(&self) -> f64 {
        gap(&self.segments.last().unwrap().at(1.0), &self.basepoint)
    }
}

/// `γ1` on `[0, ½]` at doubled speed followed by `γ2` on `[½, 1]`.
pub fn compose(g1: &Loop, g2: &Loop) -> Result<Loop> {
    if g1.chart != g2.chart {
        return Err(Error::Composition(format!("charts differ: {} vs {}", g1.chart, g2.chart)));
    }
    let g = gap(&g1.basepoint, &g2.basepoint);
    if g > CLOSURE_TOL {
        return Err(Error::Composition(format!("basepoints differ by {g:.3e}")));
    }
    let mut segments = Vec::with_capacity(g1.segments.len() + g2.segments.len());
    for s in &g1.segments {
        segments.push(Segment { start: 0.5 * s.start, end: 0.5 * s.end, map: s.map.clone() });
    }
    for s in &g2.segments {
        segments.push(Segment { start: 0.5 + 0.5 * s.start, end: 0.5 + 0.5 * s.end, map: s.map.clone() });
    }
    segments.last_mut().unwrap().end = 1.0;
    let plane = match (g1.plane, g2.plane) {
        (Some(a), Some(b)) if a == b => Some(a),
        (Some(a), None) if g2.segments.len() == 1 && g2.closure_gap() == 0.0 => Some(a),
        _ => None,
    };
    Ok(Loop { chart: g1.chart, basepoint: g1.basepoint.clone(), segments, plane, shape: Shape::General })
}

/// `t ↦ γ(1 − t)`.
pub fn invert(g: &Loop) -> Loop {
    let segments = g
        .segments
        .iter()
        .rev()
        .map(|s| {
            let m = s.map.clone();
            Segment { start: 1.0 - s.end, end: 1.0 - s.start, map: Arc::new(move |u| m(1.0 - u)) }
        })
        .collect();
    let shape = match g.shape {
        Shape::Rectangle { corner, sides, counter_clockwise } => {
            Shape::Rectangle { corner, sides, counter_clockwise: !counter_clockwise }
        }
        Shape::General => Shape::General,
    };
    Loop { chart: g.chart, basepoint: g.basepoint.clone(), segments, plane: g.plane, shape }
}

/// `t ↦ γ(φ(t))` for monotone `φ` with `φ(0) = 0`, `φ(1) = 1`.
///
/// Segment boundaries are carried over through `φ⁻¹`, so corners stay at
/// segment breaks.
pub fn reparametrize<F>(g: &Loop, phi: F) -> Result<Loop>
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    if (phi(0.0)).abs() > 1e-12 || (phi(1.0) - 1.0).abs() > 1e-12 {
        return Err(Error::Parameter("reparametrization must fix 0 and 1".into()));
    }
    let samples = 4096;
    let mut prev = phi(0.0);
    for k in 1..=samples {
        let v = phi(k as f64 / samples as f64);
        if !(v >= prev) {
            return Err(Error::Parameter("reparametrization must be non-decreasing".into()));
        }
        prev = v;
    }
    let phi = Arc::new(phi);
    let inverse = |target: f64| -> f64 {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let bounds: Vec<f64> = std::iter::once(0.0)
        .chain(g.segments.iter().take(g.segments.len() - 1).map(|s| inverse(s.end)))
        .chain(std::iter::once(1.0))
        .collect();
    let segments = g
        .segments
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let (a, b) = (bounds[k], bounds[k + 1]);
            let (t0, d) = (s.start, s.duration());
            let (m, phi) = (s.map.clone(), phi.clone());
            Segment {
                start: a,
                end: b,
                map: Arc::new(move |u| {
                    let local = if d > 0.0 { (phi(a + u * (b - a)) - t0) / d } else { 0.0 };
                    m(local.clamp(0.0, 1.0))
                }),
            }
        })
        .collect();
    Ok(Loop { chart: g.chart, basepoint: g.basepoint.clone(), segments, plane: g.plane, shape: g.shape })
}

fn check_plane(chart: Chart, plane: (usize, usize), fixed: &[f64]) -> Result<()> {
    chart.check_index(plane.0)?;
    chart.check_index(plane.1)?;
    if plane.0 == plane.1 {
        return Err(Error::Parameter("plane axes must differ".into()));
    }
    if fixed.len() != chart.dim() {
        return Err(Error::Dimension(format!(
            "fixed coordinates must have length {}, got {}",
            chart.dim(),
            fixed.len()
        )));
    }
    Ok(())
}

fn in_plane(fixed: &[f64], plane: (usize, usize), u: f64, v: f64) -> Vec<f64> {
    let mut p = fixed.to_vec();
    p[plane.0] = u;
    p[plane.1] = v;
    p
}

fn line(fixed: Vec<f64>, plane: (usize, usize), a: [f64; 2], b: [f64; 2]) -> PathFn {
    Arc::new(move |s| in_plane(&fixed, plane, a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])))
}

/// Closed polygon through `vertices` (first vertex is the basepoint), edges
/// timed by their length in plane coordinates.
pub fn polygon_loop(chart: Chart, plane: (usize, usize), fixed: &[f64], vertices: &[[f64; 2]]) -> Result<Loop> {
    check_plane(chart, plane, fixed)?;
    if vertices.len() < 3 {
        return Err(Error::Parameter(format!("a polygon needs at least 3 vertices, got {}", vertices.len())));
    }
    let n = vertices.len();
    let mut pieces = Vec::with_capacity(n);
    let mut lengths = Vec::with_capacity(n);
    for k in 0..n {
        let (a, b) = (vertices[k], vertices[(k + 1) % n]);
        pieces.push(line(fixed.to_vec(), plane, a, b));
        lengths.push(((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt());
    }
    Loop::from_pieces(chart, pieces, &lengths, Some(plane))
}

/// Counter-clockwise rectangle `corner → +side_μ → +side_ν → back` in the `(μ, ν)` plane.
pub fn rectangle_loop(
    chart: Chart,
    plane: (usize, usize),
    fixed: &[f64],
    corner: [f64; 2],
    sides: [f64; 2],
) -> Result<Loop> {
    if !(sides[0] >= 0.0 && sides[1] >= 0.0) {
        return Err(Error::Parameter(format!("rectangle sides must be non-negative, got {sides:?}")));
    }
    let [u, v] = corner;
    let [a, b] = sides;
    let mut lp = polygon_loop(chart, plane, fixed, &[[u, v], [u + a, v], [u + a, v + b], [u, v + b]])?;
    lp.shape = Shape::Rectangle { corner, sides, counter_clockwise: true };
    Ok(lp)
}

/// Regular `N`-gon inscribed in the circle, vertices at angles `2πk/N`
/// from angle 0, counter-clockwise.
pub fn circle_polygon(
    chart: Chart,
    plane: (usize, usize),
    fixed: &[f64],
    center: [f64; 2],
    radius: f64,
    n: usize,
) -> Result<Loop> {
    if n < 3 {
        return Err(Error::Parameter(format!("a circle polygon needs N ≥ 3, got {n}")));
    }
    let vertices: Vec<[f64; 2]> = (0..n)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64;
            [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
        })
        .collect();
    polygon_loop(chart, plane, fixed, &vertices)
}

/// Smooth counter-clockwise ellipse starting at angle 0.
pub fn ellipse_loop(
    chart: Chart,
    plane: (usize, usize),
    fixed: &[f64],
    center: [f64; 2],
    semi_axes: [f64; 2],
) -> Result<Loop> {
    check_plane(chart, plane, fixed)?;
    let f = fixed.to_vec();
    let path: PathFn = Arc::new(move |s| {
        let a = 2.0 * PI * s;
        in_plane(&f, plane, center[0] + semi_axes[0] * a.cos(), center[1] + semi_axes[1] * a.sin())
    });
    let mut lp = Loop::from_pieces(chart, vec![path], &[1.0], Some(plane))?;
    // cos(2π) and sin(2π) are not exact; pin the endpoint to the start.
    let base = lp.basepoint.clone();
    let m = lp.segments[0].map.clone();
    lp.segments[0].map = Arc::new(move |s| if s >= 1.0 { base.clone() } else { m(s) });
    Ok(lp)
}

/// Serializable loop description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopSpec {
    #[serde(flatten)]
    pub chart: Chart,
    /// Names of the two plane coordinates.
    pub plane: [String; 2],
    /// Values of the remaining coordinates; missing ones are 0.
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
    #[serde(flatten)]
    pub kind: LoopKind,
    /// Traverse the built loop backwards.
    #[serde(default)]
    pub reversed: bool,
    /// Number of consecutive traversals.
    #[serde(default = "one")]
    pub repeat: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LoopKind {
    Rectangle { corner: [f64; 2], sides: [f64; 2] },
    Polygon { vertices: Vec<[f64; 2]> },
    /// Inscribed polygon when `vertices` is given, otherwise a smooth circle.
    Circle { center: [f64; 2], radius: f64, #[serde(default)] vertices: Option<usize> },
    Ellipse { center: [f64; 2], semi_axes: [f64; 2] },
}

impl LoopSpec {
    pub fn new(chart: Chart, plane: [&str; 2], fixed: &[(&str, f64)], kind: LoopKind) -> Self {
        Self {
            chart,
            plane: plane.map(String::from),
            fixed: fixed.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            kind,
            reversed: false,
            repeat: 1,
        }
    }

    pub fn reversed(mut self, yes: bool) -> Self {
        self.reversed = yes;
        self
    }

    pub fn repeated(mut self, times: usize) -> Self {
        self.repeat = times;
        self
    }

    pub fn plane_indices(&self) -> Result<(usize, usize)> {
        Ok((self.chart.coordinate_index(&self.plane[0])?, self.chart.coordinate_index(&self.plane[1])?))
    }

    pub fn fixed_coords(&self) -> Result<Vec<f64>> {
        let mut p = vec![0.0; self.chart.dim()];
        for (name, &v) in &self.fixed {
            p[self.chart.coordinate_index(name)?] = v;
        }
        Ok(p)
    }

    pub fn build(&self) -> Result<Loop> {
        let plane = self.plane_indices()?;
        let fixed = self.fixed_coords()?;
        let single = match &self.kind {
            LoopKind::Rectangle { corner, sides } => rectangle_loop(self.chart, plane, &fixed, *corner, *sides)?,
            LoopKind::Polygon { vertices } => polygon_loop(self.chart, plane, &fixed, vertices)?,
            LoopKind::Circle { center, radius, vertices: Some(n) } => {
                circle_polygon(self.chart, plane, &fixed, *center, *radius, *n)?
            }
            LoopKind::Circle { center, radius, vertices: None } => {
                ellipse_loop(self.chart, plane, &fixed, *center, [*radius, *radius])?
            }
            LoopKind::Ellipse { center, semi_axes } => ellipse_loop(self.chart, plane, &fixed, *center, *semi_axes)?,
        };
        let single = if self.reversed { invert(&single) } else { single };
        if self.repeat == 0 {
            return Ok(Loop::trivial(&single.basepoint()));
        }
        let mut out = single.clone();
        for _ in 1..self.repeat {
            out = compose(&out, &single)?;
        }
        Ok(out)
    }
}
