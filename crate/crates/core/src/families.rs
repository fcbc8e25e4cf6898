//! Analytic snapshot families and measurement dictionaries.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeimError, Result};
use crate::space::{DiscreteFunction, FunctionSet, Functional, Grid, NormMode};

/// Uniform trapezoid grid description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "GridSpec::default_lower")]
    pub lower: f64,
    #[serde(default = "GridSpec::default_upper")]
    pub upper: f64,
    #[serde(default = "GridSpec::default_points")]
    pub points: usize,
}

impl GridSpec {
    fn default_lower() -> f64 {
        -1.0
    }
    fn default_upper() -> f64 {
        1.0
    }
    fn default_points() -> usize {
        200
    }

    pub fn build(&self) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::uniform_trapezoid(self.lower, self.upper, self.points)?))
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { lower: -1.0, upper: 1.0, points: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FamilyKind {
    /// `x ↦ exp(−(x−μ)²/s²)`.
    GaussianBump {
        #[serde(default = "default_width")]
        width: f64,
    },
    /// `x ↦ 1/(1+(μx)²)`.
    RationalPeak,
    /// `x ↦ Σ_{k=1}^{modes} k^{−decay} cos(kπ(x−μ))`.
    FourierMix { modes: usize, decay: f64 },
}

fn default_width() -> f64 {
    0.3
}

impl FamilyKind {
    fn eval(&self, mu: f64, x: f64) -> f64 {
        match *self {
            FamilyKind::GaussianBump { width } => (-((x - mu) / width).powi(2)).exp(),
            FamilyKind::RationalPeak => 1.0 / (1.0 + (mu * x).powi(2)),
            FamilyKind::FourierMix { modes, decay } => {
                (1..=modes).map(|k| (k as f64).powf(-decay) * (k as f64 * PI * (x - mu)).cos()).sum()
            }
        }
    }

    /// Parameter interval used when no explicit grid is given.
    pub fn default_range(&self) -> (f64, f64) {
        match self {
            FamilyKind::RationalPeak => (1.0, 10.0),
            _ => (-1.0, 1.0),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            FamilyKind::GaussianBump { width } if !(width > 0.0 && width.is_finite()) => {
                Err(GeimError::InvalidConfig(format!("gaussian width must be positive, got {width}")))
            }
            FamilyKind::FourierMix { modes: 0, .. } => {
                Err(GeimError::InvalidConfig("fourier mix needs at least one mode".into()))
            }
            FamilyKind::FourierMix { decay, .. } if !decay.is_finite() => {
                Err(GeimError::InvalidConfig("fourier decay must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Parameter values: an explicit list or a uniform sample of an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamGrid {
    List(Vec<f64>),
    Uniform {
        #[serde(default)]
        from: Option<f64>,
        #[serde(default)]
        to: Option<f64>,
        count: usize,
    },
}

impl Default for ParamGrid {
    fn default() -> Self {
        ParamGrid::Uniform { from: None, to: None, count: 40 }
    }
}

impl ParamGrid {
    pub fn values(&self, default_range: (f64, f64)) -> Vec<f64> {
        match self {
            ParamGrid::List(v) => v.clone(),
            ParamGrid::Uniform { from, to, count } => {
                let a = from.unwrap_or(default_range.0);
                let b = to.unwrap_or(default_range.1);
                match *count {
                    0 => vec![],
                    1 => vec![0.5 * (a + b)],
                    c => (0..c).map(|i| if i == c - 1 { b } else { a + (b - a) * i as f64 / (c - 1) as f64 }).collect(),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(flatten)]
    pub kind: FamilyKind,
    #[serde(default)]
    pub params: ParamGrid,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "yes")]
    pub normalize: bool,
}

fn yes() -> bool {
    true
}

impl FamilySpec {
    pub fn gaussian(width: f64, count: usize) -> Self {
        Self {
            kind: FamilyKind::GaussianBump { width },
            params: ParamGrid::Uniform { from: None, to: None, count },
            grid: GridSpec::default(),
            normalize: true,
        }
    }

    pub fn rational(count: usize) -> Self {
        Self {
            kind: FamilyKind::RationalPeak,
            params: ParamGrid::Uniform { from: None, to: None, count },
            grid: GridSpec::default(),
            normalize: true,
        }
    }

    pub fn param_values(&self) -> Vec<f64> {
        self.params.values(self.kind.default_range())
    }
}

/// Sample the family on its grid. With `normalize`, the set is scaled so its
/// largest member has norm 1 in `mode`.
pub fn build_family(spec: &FamilySpec, mode: NormMode) -> Result<FunctionSet> {
    let grid = spec.grid.build()?;
    build_family_on(spec, &grid, mode)
}

/// As [`build_family`], on an existing grid (the spec's grid section is ignored).
pub fn build_family_on(spec: &FamilySpec, grid: &Arc<Grid>, mode: NormMode) -> Result<FunctionSet> {
    spec.kind.validate()?;
    let mus = spec.param_values();
    if mus.is_empty() {
        return Err(GeimError::InvalidConfig("family parameter grid is empty".into()));
    }
    let members = mus
        .par_iter()
        .map(|&mu| DiscreteFunction::from_fn(grid.clone(), |x| spec.kind.eval(mu, x)))
        .collect::<Result<Vec<_>>>()?;
    let label = format!("{:?}", spec.kind);
    let set = FunctionSet::new(members, label)?;
    if !spec.normalize {
        return Ok(set);
    }
    let m = set.max_norm(mode);
    if m == 0.0 {
        return Err(GeimError::Degenerate("every family member vanishes on the grid".into()));
    }
    Ok(set.scaled(1.0 / m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DictionaryKind {
    Dirac,
    LocalAverage,
}

/// Where functionals are centred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Centers {
    /// The literal string `"grid"`: one functional per grid point.
    Keyword(String),
    List(Vec<f64>),
    Uniform {
        uniform: usize,
    },
}

impl Default for Centers {
    fn default() -> Self {
        Centers::Keyword("grid".into())
    }
}

impl Centers {
    pub fn values(&self, grid: &Grid) -> Result<Vec<f64>> {
        match self {
            Centers::Keyword(k) if k == "grid" => Ok(grid.points().to_vec()),
            Centers::Keyword(k) => Err(GeimError::InvalidConfig(format!("unknown centers keyword {k:?}"))),
            Centers::List(v) => Ok(v.clone()),
            Centers::Uniform { uniform } => {
                let (a, b) = (grid.lower(), grid.upper());
                Ok(match *uniform {
                    0 => vec![],
                    1 => vec![0.5 * (a + b)],
                    c => (0..c).map(|i| if i == c - 1 { b } else { a + (b - a) * i as f64 / (c - 1) as f64 }).collect(),
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionarySpec {
    pub kind: DictionaryKind,
    #[serde(default)]
    pub centers: Centers,
    #[serde(default)]
    pub spread: f64,
}

impl DictionarySpec {
    pub fn dirac_at_grid() -> Self {
        Self { kind: DictionaryKind::Dirac, centers: Centers::default(), spread: 0.0 }
    }

    pub fn local_average(centers: usize, spread: f64) -> Self {
        Self { kind: DictionaryKind::LocalAverage, centers: Centers::Uniform { uniform: centers }, spread }
    }

    /// Mode-appropriate default: point values in Sup mode, dense local
    /// averages in Hilbert mode.
    pub fn default_for(mode: NormMode) -> Self {
        match mode {
            NormMode::Sup => Self::dirac_at_grid(),
            NormMode::Hilbert => Self::local_average(101, 0.02),
        }
    }
}

/// Dual-normalized functionals for `spec` on `grid`. Dirac functionals in
/// Hilbert mode are realized as single-cell averages.
pub fn build_dictionary(spec: &DictionarySpec, grid: &Arc<Grid>, mode: NormMode) -> Result<Vec<Functional>> {
    if !(spec.spread >= 0.0 && spec.spread.is_finite()) {
        return Err(GeimError::InvalidConfig(format!("spread must be nonnegative, got {}", spec.spread)));
    }
    let centers = spec.centers.values(grid)?;
    if centers.is_empty() {
        return Err(GeimError::InvalidConfig("dictionary has no centers".into()));
    }
    let (lo, hi) = (grid.lower(), grid.upper());
    let slack = 1e-12 * (hi - lo);
    if let Some(c) = centers.iter().find(|&&c| !(c >= lo - slack && c <= hi + slack)) {
        return Err(GeimError::InvalidConfig(format!("center {c} outside grid range [{lo}, {hi}]")));
    }
    let spread = match spec.kind {
        DictionaryKind::Dirac => 0.0,
        DictionaryKind::LocalAverage => spec.spread,
    };
    centers
        .iter()
        .map(|&c| {
            let mut g = vec![0.0; grid.len()];
            let tol = 1e-12 * (hi - lo);
            for (gi, &x) in g.iter_mut().zip(grid.points()) {
                if (x - c).abs() <= spread + tol {
                    *gi = 1.0;
                }
            }
            if g.iter().all(|&v| v == 0.0) {
                g[grid.nearest(c)] = 1.0;
            }
            Functional::new(grid.clone(), g)?.normalize_dual(mode)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_centered_is_symmetric() {
        let spec = FamilySpec {
            params: ParamGrid::List(vec![0.0]),
            grid: GridSpec { lower: -1.0, upper: 1.0, points: 101 },
            ..FamilySpec::gaussian(0.3, 1)
        };
        let set = build_family(&spec, NormMode::Sup).unwrap();
        let v = set.members()[0].values();
        for i in 0..v.len() {
            assert!((v[i] - v[v.len() - 1 - i]).abs() < 1e-15);
        }
        assert_eq!(v[50], 1.0);
        assert_eq!(set.max_norm(NormMode::Sup), 1.0);
    }

    #[test]
    fn cardinality_and_normalization() {
        for mode in [NormMode::Hilbert, NormMode::Sup] {
            for spec in [
                FamilySpec::gaussian(0.3, 40),
                FamilySpec::rational(40),
                FamilySpec { kind: FamilyKind::FourierMix { modes: 6, decay: 2.0 }, ..FamilySpec::gaussian(0.3, 40) },
            ] {
                let set = build_family(&spec, mode).unwrap();
                assert_eq!(set.len(), 40);
                assert!((set.max_norm(mode) - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn empty_params_rejected() {
        let spec = FamilySpec { params: ParamGrid::List(vec![]), ..FamilySpec::gaussian(0.3, 1) };
        assert!(build_family(&spec, NormMode::Hilbert).is_err());
    }

    #[test]
    fn dirac_sup_reads_grid_values() {
        let grid = GridSpec { lower: 0.0, upper: 1.0, points: 11 }.build().unwrap();
        let f = DiscreteFunction::from_fn(grid.clone(), |x| x * x - 0.3).unwrap();
        let dict = build_dictionary(&DictionarySpec::dirac_at_grid(), &grid, NormMode::Sup).unwrap();
        assert_eq!(dict.len(), 11);
        for (k, s) in dict.iter().enumerate() {
            assert!((s.apply(&f).unwrap() - f.values()[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn whole_domain_average_is_constant() {
        let grid = GridSpec { lower: -1.0, upper: 1.0, points: 21 }.build().unwrap();
        let spec =
            DictionarySpec { kind: DictionaryKind::LocalAverage, centers: Centers::List(vec![0.0]), spread: 1.0 };
        let s = &build_dictionary(&spec, &grid, NormMode::Hilbert).unwrap()[0];
        let w0 = s.weights()[0];
        assert!(s.weights().iter().all(|&w| (w - w0).abs() < 1e-15));
        assert!((s.dual_norm(NormMode::Hilbert) - 1.0).abs() < 1e-12);
        // Constant 1/sqrt(|Ω|).
        assert!((w0 - 1.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn centers_outside_range_rejected() {
        let grid = GridSpec::default().build().unwrap();
        let spec =
            DictionarySpec { kind: DictionaryKind::LocalAverage, centers: Centers::List(vec![1.5]), spread: 0.1 };
        assert!(build_dictionary(&spec, &grid, NormMode::Hilbert).is_err());
    }

    #[test]
    fn local_average_tends_to_point_value() {
        // Errors at spreads s and s/2 shrink at least linearly (second order
        // for a symmetric stencil on a smooth function).
        let grid = GridSpec { lower: -1.0, upper: 1.0, points: 4001 }.build().unwrap();
        let f = DiscreteFunction::from_fn(grid.clone(), |x| (-(x - 0.1) * (x - 0.1) / 0.09).exp()).unwrap();
        let c = 0.3;
        let exact = (-(c - 0.1f64).powi(2) / 0.09).exp();
        let err = |s: f64| {
            let spec =
                DictionarySpec { kind: DictionaryKind::LocalAverage, centers: Centers::List(vec![c]), spread: s };
            let sig = &build_dictionary(&spec, &grid, NormMode::Sup).unwrap()[0];
            (sig.apply(&f).unwrap() - exact).abs()
        };
        let (e1, e2, e3) = (err(0.2), err(0.1), err(0.05));
        assert!(e2 < 0.6 * e1 && e3 < 0.6 * e2, "{e1} {e2} {e3}");
    }

    #[test]
    fn functionals_are_idempotently_normalized() {
        let grid = GridSpec::default().build().unwrap();
        for mode in [NormMode::Hilbert, NormMode::Sup] {
            for s in build_dictionary(&DictionarySpec::default_for(mode), &grid, mode).unwrap() {
                let again = s.normalize_dual(mode).unwrap();
                assert!(again
                    .weights()
                    .iter()
                    .zip(s.weights())
                    .all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0)));
            }
        }
    }
}
