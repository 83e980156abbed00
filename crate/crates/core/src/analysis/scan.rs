use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    beta_closed_forms, beta_threshold_numeric, evaluate_metric, g_function, helstrom_pure, sigma_threshold,
    AnalysisSettings, Metric,
};
use crate::error::{Error, Result};
use crate::fock::{build_pair, helstrom_mixed};
use crate::gaussian::{budget_to_seed, ChannelBudget};
use crate::receiver::{error_probability, error_probability_pure, PhaseNoise};

/// Dense table over a rectangular grid.
///
/// `values` is row-major over the axes (last axis fastest) with all series of
/// one grid point stored contiguously.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub name: String,
    pub axis_names: Vec<String>,
    pub axis_grids: Vec<Vec<f64>>,
    pub series_names: Vec<String>,
    #[serde(with = "nonfinite")]
    pub values: Vec<f64>,
    pub metadata: BTreeMap<String, String>,
}

/// JSON has no NaN or infinity: NaN is written as `null` and `±∞` as the
/// strings `"inf"` / `"-inf"`.
mod nonfinite {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Cell {
        Number(f64),
        Text(String),
        Missing(Option<()>),
    }

    pub fn serialize<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let cells: Vec<Cell> = values
            .iter()
            .map(|&v| match v {
                v if v.is_nan() => Cell::Missing(None),
                f64::INFINITY => Cell::Text("inf".into()),
                f64::NEG_INFINITY => Cell::Text("-inf".into()),
                v => Cell::Number(v),
            })
            .collect();
        cells.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Cell>::deserialize(d)?
            .into_iter()
            .map(|c| match c {
                Cell::Number(v) => Ok(v),
                Cell::Missing(_) => Ok(f64::NAN),
                Cell::Text(t) if t == "inf" => Ok(f64::INFINITY),
                Cell::Text(t) if t == "-inf" => Ok(f64::NEG_INFINITY),
                Cell::Text(t) => Err(D::Error::custom(format!("unexpected value `{t}`"))),
            })
            .collect()
    }
}

impl ScanTable {
    pub fn points(&self) -> usize {
        self.axis_grids.iter().map(Vec::len).product()
    }

    /// Grid coordinates of the `row`-th point.
    pub fn coordinates(&self, row: usize) -> Vec<f64> {
        let mut rem = row;
        let mut coords = vec![0.0; self.axis_grids.len()];
        for (axis, grid) in self.axis_grids.iter().enumerate().rev() {
            coords[axis] = grid[rem % grid.len()];
            rem /= grid.len();
        }
        coords
    }

    /// Series values of the `row`-th point.
    pub fn row(&self, row: usize) -> &[f64] {
        let width = self.series_names.len();
        &self.values[row * width..(row + 1) * width]
    }

    /// Value of `series` at the grid point with the given axis indices.
    pub fn get(&self, index: &[usize], series: &str) -> Option<f64> {
        if index.len() != self.axis_grids.len() {
            return None;
        }
        let col = self.series_names.iter().position(|s| s == series)?;
        let mut row = 0;
        for (&i, grid) in index.iter().zip(&self.axis_grids) {
            if i >= grid.len() {
                return None;
            }
            row = row * grid.len() + i;
        }
        Some(self.row(row)[col])
    }

    /// Index of `value` on the named axis, if it is a grid point.
    pub fn axis_index(&self, axis: &str, value: f64) -> Option<usize> {
        let a = self.axis_names.iter().position(|s| s == axis)?;
        self.axis_grids[a].iter().position(|&g| (g - value).abs() < 1e-12)
    }

    pub fn check_shape(&self) -> Result<()> {
        let expected = self.points() * self.series_names.len();
        if self.axis_names.len() != self.axis_grids.len() || self.values.len() != expected {
            return Err(Error::DimensionMismatch {
                left: self.values.len(),
                right: expected,
            });
        }
        Ok(())
    }
}

/// Pre-defined scans reproducing the paper-style figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FigureId {
    #[serde(rename = "fig1-left")]
    Fig1Left,
    #[serde(rename = "fig1-right")]
    Fig1Right,
    #[serde(rename = "fig2-left")]
    Fig2Left,
    #[serde(rename = "fig2-right")]
    Fig2Right,
    #[serde(rename = "fig3")]
    Fig3,
    #[serde(rename = "fig4-left")]
    Fig4Left,
    #[serde(rename = "fig4-right")]
    Fig4Right,
    #[serde(rename = "fig5-left")]
    Fig5Left,
    #[serde(rename = "fig5-right")]
    Fig5Right,
}

impl FigureId {
    pub const ALL: [FigureId; 9] = [
        FigureId::Fig1Left,
        FigureId::Fig1Right,
        FigureId::Fig2Left,
        FigureId::Fig2Right,
        FigureId::Fig3,
        FigureId::Fig4Left,
        FigureId::Fig4Right,
        FigureId::Fig5Left,
        FigureId::Fig5Right,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1Left => "fig1-left",
            FigureId::Fig1Right => "fig1-right",
            FigureId::Fig2Left => "fig2-left",
            FigureId::Fig2Right => "fig2-right",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4Left => "fig4-left",
            FigureId::Fig4Right => "fig4-right",
            FigureId::Fig5Left => "fig5-left",
            FigureId::Fig5Right => "fig5-right",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

/// Explicit Cartesian grid over `(N, β, σ, μ)` for one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub metric: Metric,
    pub energies: Vec<f64>,
    pub betas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub purities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScanRequest {
    Figure(FigureId),
    Grid(GridSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    /// Points along each continuous axis.
    pub resolution: usize,
    /// Phase-noise family drawn as separate curves.
    pub sigma_family: Vec<f64>,
    pub analysis: AnalysisSettings,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            resolution: 41,
            sigma_family: vec![0.1, 0.3, 0.5, 1.0],
            analysis: AnalysisSettings::default(),
        }
    }
}

/// Evaluates a figure or an explicit grid. Points are computed in parallel
/// but each independently, so the table does not depend on the thread count.
pub fn scan(request: &ScanRequest, settings: &ScanSettings) -> Result<ScanTable> {
    if settings.resolution < 2 {
        return Err(Error::InvalidParameter {
            name: "resolution",
            value: settings.resolution as f64,
            reason: "must be at least 2",
        });
    }
    settings.analysis.cutoff.validate()?;
    let mut table = match request {
        ScanRequest::Figure(id) => figure(*id, settings)?,
        ScanRequest::Grid(spec) => grid(spec, settings)?,
    };
    let a = &settings.analysis;
    let meta = [
        ("core_version", env!("CARGO_PKG_VERSION").to_string()),
        ("quadrature_tolerance", format!("{:e}", a.quadrature.tolerance)),
        ("quadrature_max_nodes", a.quadrature.max_nodes.to_string()),
        ("cutoff_target_tail", format!("{:e}", a.cutoff.target_tail)),
        ("cutoff_hard_max", a.cutoff.hard_max.to_string()),
        ("root_tolerance", format!("{:e}", a.root_tolerance)),
    ];
    for (k, v) in meta {
        table.metadata.insert(k.to_string(), v);
    }
    table.check_shape()?;
    Ok(table)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// `n` points in `(lo, hi]`, for purity axes whose lower end is excluded.
fn open_left(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// Evaluates `f` on the Cartesian product of `grids`, returning `width` values
/// per point in row-major order.
fn tabulate<F>(grids: &[Vec<f64>], width: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let total: usize = grids.iter().map(Vec::len).product();
    let rows = (0..total)
        .into_par_iter()
        .map(|row| {
            let mut rem = row;
            let mut coords = vec![0.0; grids.len()];
            for (axis, g) in grids.iter().enumerate().rev() {
                coords[axis] = g[rem % g.len()];
                rem /= g.len();
            }
            let v = f(&coords)?;
            debug_assert_eq!(v.len(), width);
            Ok(v)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

fn table(
    name: &str,
    axes: &[(&str, Vec<f64>)],
    series: &[&str],
    values: Vec<f64>,
    metadata: &[(&str, String)],
) -> ScanTable {
    ScanTable {
        name: name.to_string(),
        axis_names: axes.iter().map(|(n, _)| n.to_string()).collect(),
        axis_grids: axes.iter().map(|(_, g)| g.clone()).collect(),
        series_names: series.iter().map(|s| s.to_string()).collect(),
        values,
        metadata: metadata.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
    }
}

/// NaN where the purity leaves no room for the requested squeezing.
fn or_nan(r: Result<f64>) -> Result<f64> {
    match r {
        Err(Error::EnergyBudgetExceeded { .. }) => Ok(f64::NAN),
        other => other,
    }
}

const FIG4_ENERGY: f64 = 2.0;

fn figure(id: FigureId, settings: &ScanSettings) -> Result<ScanTable> {
    let res = settings.resolution;
    let a = &settings.analysis;
    let family = settings.sigma_family.clone();
    let energy_axis = linspace(0.0, 2.0, res);
    let beta_axis = linspace(0.0, 1.0, res);
    let name = id.name();
    Ok(match id {
        FigureId::Fig1Left | FigureId::Fig1Right => {
            let helstrom = id == FigureId::Fig1Left;
            let grids = [energy_axis, beta_axis];
            let values = tabulate(&grids, 2, |c| {
                let (n, b) = (c[0], c[1]);
                let eval = |b: f64| -> Result<f64> {
                    let budget = ChannelBudget::new(n, b)?;
                    Ok(if helstrom {
                        helstrom_pure(&budget)
                    } else {
                        error_probability_pure(&budget)
                    })
                };
                Ok(vec![eval(b)?, eval(0.0)?])
            })?;
            let [energy_axis, beta_axis] = grids;
            let series: &[&str] = if helstrom {
                &["p_helstrom_dss", "p_helstrom_cs"]
            } else {
                &["p_homodyne_dss", "p_homodyne_cs"]
            };
            table(
                name,
                &[("energy", energy_axis), ("beta", beta_axis)],
                series,
                values,
                &[],
            )
        }
        FigureId::Fig2Left => {
            let grids = [family, energy_axis, beta_axis];
            let values = tabulate(&grids, 1, |c| {
                let noise = PhaseNoise::new(c[0])?;
                let budget = ChannelBudget::new(c[1], c[2])?;
                Ok(vec![error_probability(&budget, 1.0, &noise, &a.quadrature)?])
            })?;
            let [s, n, b] = grids;
            table(
                name,
                &[("sigma", s), ("energy", n), ("beta", b)],
                &["p_homodyne"],
                values,
                &[],
            )
        }
        FigureId::Fig2Right => {
            let grids = [vec![0.5, 1.0, 2.0], linspace(0.0, 1.5, res)];
            let values = tabulate(&grids, 1, |c| {
                let noise = PhaseNoise::new(c[1])?;
                let r = beta_threshold_numeric(c[0], &noise, 1.0, Metric::Homodyne, a)?;
                Ok(vec![r.value])
            })?;
            let [n, s] = grids;
            table(
                name,
                &[("energy", n), ("sigma", s)],
                &["beta_th"],
                values,
                &[("metric", "homodyne".to_string())],
            )
        }
        FigureId::Fig3 => fig3(settings)?,
        FigureId::Fig4Left => {
            let min_purity = ChannelBudget::coherent(FIG4_ENERGY)?.min_purity();
            let grids = [family, open_left(min_purity, 1.0, res), beta_axis];
            let values = tabulate(&grids, 1, |c| {
                let noise = PhaseNoise::new(c[0])?;
                let budget = ChannelBudget::new(FIG4_ENERGY, c[2])?;
                Ok(vec![or_nan(error_probability(&budget, c[1], &noise, &a.quadrature))?])
            })?;
            let [s, m, b] = grids;
            table(
                name,
                &[("sigma", s), ("purity", m), ("beta", b)],
                &["p_homodyne"],
                values,
                &[("energy", FIG4_ENERGY.to_string())],
            )
        }
        FigureId::Fig4Right => {
            let min_purity = ChannelBudget::coherent(FIG4_ENERGY)?.min_purity();
            let grids = [family, open_left(min_purity, 1.0, res)];
            let values = tabulate(&grids, 1, |c| {
                let noise = PhaseNoise::new(c[0])?;
                let r = beta_threshold_numeric(FIG4_ENERGY, &noise, c[1], Metric::Homodyne, a)?;
                Ok(vec![r.value])
            })?;
            let [s, m] = grids;
            table(
                name,
                &[("sigma", s), ("purity", m)],
                &["beta_th"],
                values,
                &[("energy", FIG4_ENERGY.to_string()), ("metric", "homodyne".to_string())],
            )
        }
        FigureId::Fig5Left => {
            let energies = vec![2.0, 3.0, 5.0];
            // the smallest energy sets the common purity range
            let min_purity = ChannelBudget::coherent(energies[0])?.min_purity();
            let grids = [energies, open_left(min_purity, 1.0, res)];
            let values = tabulate(&grids, 1, |c| Ok(vec![sigma_threshold(c[0], c[1], a)?.value]))?;
            let [n, m] = grids;
            table(name, &[("energy", n), ("purity", m)], &["sigma_th"], values, &[])
        }
        FigureId::Fig5Right => {
            let grids = [vec![0.5, 1.0, 2.0, 3.0, 5.0], linspace(0.0, 5.0, res)];
            let values = tabulate(&grids, 1, |c| Ok(vec![g_function(c[0], c[1], &a.quadrature)?]))?;
            let [n, s] = grids;
            table(name, &[("energy", n), ("sigma", s)], &["g"], values, &[])
        }
    })
}

/// Homodyne and Helstrom errors against phase noise at `β_opt(N)` and `β = 0`.
/// The Fock pairs are built once per energy and dephased per `σ`.
fn fig3(settings: &ScanSettings) -> Result<ScanTable> {
    let a = &settings.analysis;
    let energies = vec![1.0, 2.0];
    let sigmas = linspace(0.0, 2.0, settings.resolution);

    let mut values = Vec::new();
    let mut max_n = 0;
    for &n in &energies {
        let dss = ChannelBudget::new(n, beta_closed_forms(n)?.optimum)?;
        let cs = ChannelBudget::coherent(n)?;
        let mut pairs = Vec::new();
        for budget in [&dss, &cs] {
            let pair = build_pair(&budget_to_seed(budget, 1.0)?, &a.cutoff)?;
            max_n = max_n.max(pair.0.n_max());
            pairs.push(pair);
        }
        let rows = sigmas
            .par_iter()
            .map(|&s| {
                let noise = PhaseNoise::new(s)?;
                let mut row = Vec::with_capacity(4);
                for (budget, (plus, minus)) in [&dss, &cs].into_iter().zip(&pairs) {
                    row.push(error_probability(budget, 1.0, &noise, &a.quadrature)?);
                    row.push(helstrom_mixed(&plus.dephased(s), &minus.dephased(s))?);
                }
                Ok(row)
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        values.extend(rows.into_iter().flatten());
    }
    Ok(table(
        FigureId::Fig3.name(),
        &[("energy", energies), ("sigma", sigmas)],
        &["p_homodyne_dss", "p_helstrom_dss", "p_homodyne_cs", "p_helstrom_cs"],
        values,
        &[("beta", "optimum".to_string()), ("fock_n_max", max_n.to_string())],
    ))
}

fn grid(spec: &GridSpec, settings: &ScanSettings) -> Result<ScanTable> {
    for (name, axis) in [
        ("energies", &spec.energies),
        ("betas", &spec.betas),
        ("sigmas", &spec.sigmas),
        ("purities", &spec.purities),
    ] {
        if axis.is_empty() {
            return Err(Error::InvalidParameter {
                name,
                value: 0.0,
                reason: "grid axis must not be empty",
            });
        }
    }
    let grids = [
        spec.energies.clone(),
        spec.betas.clone(),
        spec.sigmas.clone(),
        spec.purities.clone(),
    ];
    let values = tabulate(&grids, 1, |c| {
        let budget = ChannelBudget::new(c[0], c[1])?;
        let noise = PhaseNoise::new(c[2])?;
        Ok(vec![evaluate_metric(
            spec.metric,
            &budget,
            c[3],
            &noise,
            &settings.analysis,
        )?])
    })?;
    let [n, b, s, m] = grids;
    let series = format!("p_{}", spec.metric.name());
    Ok(table(
        "grid",
        &[("energy", n), ("beta", b), ("sigma", s), ("purity", m)],
        &[series.as_str()],
        values,
        &[("metric", spec.metric.name().to_string())],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small() -> ScanSettings {
        ScanSettings {
            resolution: 5,
            ..ScanSettings::default()
        }
    }

    #[test]
    fn figure_names_round_trip() {
        for id in FigureId::ALL {
            assert_eq!(id.name().parse::<FigureId>().unwrap(), id);
        }
        assert!("fig9".parse::<FigureId>().is_err());
    }

    #[test]
    fn fig1_anchor() {
        let t = scan(&ScanRequest::Figure(FigureId::Fig1Left), &ScanSettings::default()).unwrap();
        let n = t.axis_index("energy", 1.0).unwrap();
        let b = t.axis_index("beta", 0.0).unwrap();
        assert_abs_diff_eq!(t.get(&[n, b], "p_helstrom_dss").unwrap(), 4.60007e-3, epsilon = 1e-8);
        assert_eq!(t.values.len(), 41 * 41 * 2);
    }

    #[test]
    fn table_indexing() {
        let t = scan(&ScanRequest::Figure(FigureId::Fig1Right), &small()).unwrap();
        for row in 0..t.points() {
            let c = t.coordinates(row);
            let expect = error_probability_pure(&ChannelBudget::new(c[0], c[1]).unwrap());
            assert_eq!(t.row(row)[0], expect);
        }
        assert!(t.get(&[9, 0], "p_homodyne_dss").is_none());
        assert!(t.get(&[0, 0], "nope").is_none());
    }

    #[test]
    fn explicit_grid() {
        let spec = GridSpec {
            metric: Metric::Homodyne,
            energies: vec![1.0],
            betas: vec![0.0, 1.0 / 3.0],
            sigmas: vec![0.0],
            purities: vec![1.0],
        };
        let t = scan(&ScanRequest::Grid(spec), &small()).unwrap();
        assert_eq!(t.axis_names, ["energy", "beta", "sigma", "purity"]);
        assert_abs_diff_eq!(t.values[1], 2.3389e-3, epsilon = 1e-7);
    }

    #[test]
    fn json_keeps_non_finite_values() {
        let mut t = scan(&ScanRequest::Figure(FigureId::Fig1Left), &small()).unwrap();
        t.values[0] = f64::NAN;
        t.values[1] = f64::INFINITY;
        t.values[2] = f64::NEG_INFINITY;
        let back: ScanTable = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert!(back.values[0].is_nan());
        assert_eq!(back.values[1..], t.values[1..]);
        assert_eq!(back.metadata, t.metadata);
    }

    #[test]
    fn fig4_marks_infeasible_points() {
        let t = scan(&ScanRequest::Figure(FigureId::Fig4Left), &small()).unwrap();
        assert!(t.values.iter().any(|v| v.is_nan()));
        assert!(t.values.iter().any(|v| v.is_finite()));
    }
}
