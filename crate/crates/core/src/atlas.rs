//! Regime maps over production rate space.
//!
//! A sweep varies one or two axes of `α` on log-spaced grids, classifies the
//! network at every grid point and collects the results in row-major order.
//! An axis may tie several components together, so a diagonal sweep
//! `α_1 = α_2 = …` is a one-axis sweep over all indices.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{CyclicNetwork, DEFAULT_TOL};
use crate::parallel::map_ordered;
use crate::scalar::log_space;
use crate::stability::{classify_network, Branch};

/// Relative width to which [`boundary_trace`] refines a transition.
pub const TRACE_REL_WIDTH: f64 = 1e-6;

/// One swept direction in `α` space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    /// 1-based components of `α` set to the axis value.
    pub indices: Vec<usize>,
    pub lo: f64,
    pub hi: f64,
    pub resolution: usize,
}

impl Axis {
    pub fn new(indices: Vec<usize>, lo: f64, hi: f64, resolution: usize) -> Self {
        Self { indices, lo, hi, resolution }
    }

    pub fn values(&self) -> Vec<f64> {
        log_space(self.lo, self.hi, self.resolution)
    }

    fn label(&self) -> String {
        let names: Vec<String> = self.indices.iter().map(|i| format!("alpha_{i}")).collect();
        names.join(" = ")
    }
}

/// A sweep: the template network supplies the regulation functions and the
/// values of every `α_i` that no axis touches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub network: CyclicNetwork<f64>,
    pub axes: Vec<Axis>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl SweepSpec {
    pub fn new(network: CyclicNetwork<f64>, axes: Vec<Axis>) -> Result<Self> {
        let spec = Self { network, axes, tol: DEFAULT_TOL };
        spec.validate()?;
        Ok(spec)
    }

    /// Sweep of `α_1 = … = α_d` over `[lo, hi]`.
    pub fn diagonal(network: CyclicNetwork<f64>, lo: f64, hi: f64, resolution: usize) -> Result<Self> {
        let indices = (1..=network.dim()).collect();
        Self::new(network, vec![Axis::new(indices, lo, hi, resolution)])
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.network.dim();
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::InvalidSweep(format!("expected 1 or 2 axes, got {}", self.axes.len())));
        }
        let mut seen = vec![false; d + 1];
        for (k, axis) in self.axes.iter().enumerate() {
            if axis.indices.is_empty() {
                return Err(Error::InvalidSweep(format!("axis {} has no alpha indices", k + 1)));
            }
            for &i in &axis.indices {
                if i == 0 || i > d {
                    return Err(Error::InvalidSweep(format!("alpha index {i} outside 1..={d}")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidSweep(format!("alpha index {i} appears on more than one axis")));
                }
            }
            if !(axis.lo > 0.0 && axis.hi >= axis.lo && axis.hi.is_finite()) {
                return Err(Error::InvalidSweep(format!(
                    "axis {} range {}:{} must satisfy 0 < lo <= hi < inf",
                    k + 1,
                    axis.lo,
                    axis.hi
                )));
            }
            if axis.resolution < 2 {
                return Err(Error::InvalidSweep(format!("axis {} resolution must be at least 2", k + 1)));
            }
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidSweep("tol must be positive".into()));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(|a| a.resolution).product()
    }

    fn alpha_at(&self, coords: &[f64]) -> Vec<f64> {
        let mut alpha = self.network.alpha().to_vec();
        for (axis, &v) in self.axes.iter().zip(coords) {
            for &i in &axis.indices {
                alpha[i - 1] = v;
            }
        }
        alpha
    }

    fn grid(&self) -> Vec<Vec<f64>> {
        let values: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        let mut cells: Vec<Vec<f64>> = vec![Vec::new()];
        for axis in &values {
            cells = cells
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |&v| {
                        let mut c = prefix.clone();
                        c.push(v);
                        c
                    })
                })
                .collect();
        }
        cells
    }
}

/// Classification of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtlasRow {
    pub alpha: Vec<f64>,
    /// `None` when the classification failed; see `error`.
    pub branch: Option<Branch>,
    /// Middle equilibrium `p` (bistable), else the single equilibrium's `p`;
    /// `|p|` for an odd number of repressions.
    pub p_mid: Option<f64>,
    pub n_equilibria: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl AtlasRow {
    pub fn label(&self) -> &'static str {
        self.branch.map_or("Error", Branch::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtlasTable {
    pub d: usize,
    pub axes: Vec<Axis>,
    /// Row-major: the last axis varies fastest.
    pub rows: Vec<AtlasRow>,
}

impl AtlasTable {
    /// Row at grid position `(i, j)` of a 2-axis table.
    pub fn cell(&self, i: usize, j: usize) -> &AtlasRow {
        &self.rows[i * self.axes[1].resolution + j]
    }
}

fn classify_row(net: &CyclicNetwork<f64>, alpha: Vec<f64>, tol: f64) -> AtlasRow {
    let result = net.with_alpha(alpha.clone()).and_then(|n| classify_network(&n, tol, None));
    match result {
        Ok(report) => AtlasRow {
            alpha,
            branch: Some(report.branch),
            p_mid: report.decisive_p(),
            n_equilibria: report.equilibria.len(),
            error: None,
        },
        Err(e) => AtlasRow { alpha, branch: None, p_mid: None, n_equilibria: 0, error: Some(e.to_string()) },
    }
}

/// Classifies every grid point of `spec`. Cells are evaluated in parallel
/// and assembled in grid order; a failing cell is recorded, not propagated.
pub fn run_sweep(spec: &SweepSpec) -> Result<AtlasTable> {
    spec.validate()?;
    let alphas: Vec<Vec<f64>> = spec.grid().iter().map(|c| spec.alpha_at(c)).collect();
    let rows = map_ordered(&alphas, |alpha| classify_row(&spec.network, alpha.clone(), spec.tol));
    Ok(AtlasTable { d: spec.network.dim(), axes: spec.axes.clone(), rows })
}

/// A refined change of branch along a 1-axis sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transition {
    pub alpha_low: f64,
    pub alpha_high: f64,
    pub branch_low: String,
    pub branch_high: String,
}

impl Transition {
    pub fn midpoint(&self) -> f64 {
        (self.alpha_low * self.alpha_high).sqrt()
    }
}

/// Bisects every change of branch along a 1-axis sweep down to relative
/// width [`TRACE_REL_WIDTH`].
///
/// `Boundary` and `Error` cells carry no regime of their own, so a run of
/// them between two regular cells is treated as part of a single
/// transition. Bisection keeps `alpha_low` on the lower branch; a
/// non-regular midpoint moves the upper end.
pub fn boundary_trace(spec: &SweepSpec, table: &AtlasTable) -> Result<Vec<Transition>> {
    if spec.axes.len() != 1 {
        return Err(Error::InvalidSweep("boundary tracing needs a 1-axis sweep".into()));
    }
    let values = spec.axes[0].values();
    let regular: Vec<usize> = (0..table.rows.len()).filter(|&k| is_regular(&table.rows[k])).collect();
    let mut out = Vec::new();
    for pair in regular.windows(2) {
        let (low, high) = (table.rows[pair[0]].label(), table.rows[pair[1]].label());
        if low == high {
            continue;
        }
        let (mut a, mut b) = (values[pair[0]], values[pair[1]]);
        while b / a - 1.0 > TRACE_REL_WIDTH {
            let m = (a * b).sqrt();
            if m <= a || m >= b {
                break;
            }
            let row = classify_row(&spec.network, spec.alpha_at(&[m]), spec.tol);
            if row.label() == low {
                a = m;
            } else {
                b = m;
            }
        }
        out.push(Transition { alpha_low: a, alpha_high: b, branch_low: low.into(), branch_high: high.into() });
    }
    Ok(out)
}

fn is_regular(row: &AtlasRow) -> bool {
    !matches!(row.branch, None | Some(Branch::Boundary))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Svg,
}

pub fn emit(table: &AtlasTable, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => Ok(to_csv(table).into_bytes()),
        Format::Svg => to_svg(table).map(String::into_bytes),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// Columns `alpha_1,…,alpha_d,branch,p_mid,n_equilibria`; every line ends in
/// a line feed and floats use the shortest exact representation.
pub fn to_csv(table: &AtlasTable) -> String {
    let mut out = String::new();
    for i in 1..=table.d {
        let _ = write!(out, "alpha_{i},");
    }
    out.push_str("branch,p_mid,n_equilibria\n");
    for row in &table.rows {
        for a in &row.alpha {
            let _ = write!(out, "{a},");
        }
        let _ = writeln!(out, "{},{},{}", row.label(), opt(row.p_mid), row.n_equilibria);
    }
    out
}

fn color(label: &str) -> &'static str {
    match label {
        "EvenMonostableGAS" => "#4c72b0",
        "EvenBistable" => "#dd8452",
        "EvenBistablePeriodicCandidate" => "#c44e52",
        "OddStable" => "#55a868",
        "OddUnstableOscillatory" => "#8172b3",
        "Boundary" => "#222222",
        _ => "#bbbbbb",
    }
}

const CELL: f64 = 10.0;
const MARGIN: f64 = 60.0;
const LEGEND_WIDTH: f64 = 230.0;

/// Heatmap of a 2-axis table: the first axis runs left to right, the second
/// bottom to top, both on log scales. Emits exactly one `<rect>` per cell.
pub fn to_svg(table: &AtlasTable) -> Result<String> {
    if table.axes.len() != 2 {
        return Err(Error::Format("svg output needs a 2-axis sweep".into()));
    }
    let (nx, ny) = (table.axes[0].resolution, table.axes[1].resolution);
    let (w, h) = (nx as f64 * CELL, ny as f64 * CELL);
    let width = w + 2.0 * MARGIN + LEGEND_WIDTH;
    let height = h + 2.0 * MARGIN;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<g shape-rendering="crispEdges">"#);
    for i in 0..nx {
        for j in 0..ny {
            let row = table.cell(i, j);
            let x = MARGIN + i as f64 * CELL;
            let y = MARGIN + h - (j + 1) as f64 * CELL;
            let _ = writeln!(
                s,
                r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}"><title>{}</title></rect>"#,
                color(row.label()),
                title(row)
            );
        }
    }
    let _ = writeln!(s, "</g>");

    // log-scaled axes, ticks at both ends and the geometric midpoint
    let (x0, y0) = (MARGIN, MARGIN + h);
    let _ = writeln!(s, r#"<path d="M{x0} {y0} H{} M{x0} {y0} V{MARGIN}" stroke="black" fill="none"/>"#, x0 + w);
    for (k, frac) in [0.0, 0.5, 1.0].into_iter().enumerate() {
        let ax = &table.axes[0];
        let v = ax.lo * (ax.hi / ax.lo).powf(frac);
        let x = x0 + CELL / 2.0 + frac * (w - CELL);
        let _ = writeln!(s, r#"<path d="M{x} {y0} v5" stroke="black"/><text x="{x}" y="{}" text-anchor="middle">{}</text>"#, y0 + 18.0, tick(v));
        let ay = &table.axes[1];
        let v = ay.lo * (ay.hi / ay.lo).powf(frac);
        let y = y0 - CELL / 2.0 - frac * (h - CELL);
        let _ = writeln!(s, r#"<path d="M{x0} {y} h-5" stroke="black"/><text x="{}" y="{}" text-anchor="end">{}</text>"#, x0 - 8.0, y + 4.0, tick(v));
        let _ = k;
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{} (log)</text>"#, x0 + w / 2.0, y0 + 40.0, table.axes[0].label());
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" transform="rotate(-90 {} {})">{} (log)</text>"#,
        MARGIN - 40.0,
        MARGIN + h / 2.0,
        MARGIN - 40.0,
        MARGIN + h / 2.0,
        table.axes[1].label()
    );

    let lx = MARGIN + w + 30.0;
    let labels = Branch::ALL.iter().map(|b| b.as_str()).chain(std::iter::once("Error"));
    for (k, label) in labels.enumerate() {
        let y = MARGIN + 10.0 + k as f64 * 20.0;
        let _ = writeln!(
            s,
            r#"<circle cx="{lx}" cy="{y}" r="6" fill="{}"/><text x="{}" y="{}">{label}</text>"#,
            color(label),
            lx + 12.0,
            y + 4.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn title(row: &AtlasRow) -> String {
    let alpha: Vec<String> = row.alpha.iter().map(|a| format!("{a:.4}")).collect();
    format!("alpha=({}) {}", alpha.join(", "), row.label())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regulation::RegulationFunction;

    fn hill(lambda: f64, r: f64) -> RegulationFunction<f64> {
        RegulationFunction::hill(lambda, r).unwrap()
    }

    fn toggle() -> CyclicNetwork<f64> {
        CyclicNetwork::uniform(2, hill(0.0, 2.0), 1.0).unwrap()
    }

    fn repressilator() -> CyclicNetwork<f64> {
        CyclicNetwork::uniform(3, hill(0.0, 4.0), 1.0).unwrap()
    }

    fn labels(table: &AtlasTable) -> Vec<&'static str> {
        table.rows.iter().map(AtlasRow::label).collect()
    }

    fn changes(table: &AtlasTable) -> usize {
        labels(table).windows(2).filter(|w| w[0] != w[1]).count()
    }

    #[test]
    fn toggle_diagonal_sweep_flips_once_at_two() {
        let spec = SweepSpec::diagonal(toggle(), 1.0, 4.0, 61).unwrap();
        let table = run_sweep(&spec).unwrap();
        assert_eq!(table.rows.len(), 61);
        assert_eq!(labels(&table)[0], "EvenMonostableGAS");
        assert_eq!(*labels(&table).last().unwrap(), "EvenBistable");
        // the grid point α = 2 itself is the non-hyperbolic onset
        let regular: Vec<&str> = labels(&table).into_iter().filter(|l| *l != "Boundary").collect();
        assert_eq!(regular.windows(2).filter(|w| w[0] != w[1]).count(), 1, "{:?}", labels(&table));
        assert!(changes(&table) <= 2);
        let trace = boundary_trace(&spec, &table).unwrap();
        assert_eq!(trace.len(), 1);
        assert!((trace[0].midpoint() - 2.0).abs() < 1e-5, "{trace:?}");
        assert!(trace[0].alpha_high / trace[0].alpha_low - 1.0 <= TRACE_REL_WIDTH);
    }

    #[test]
    fn repressilator_diagonal_sweep_flips_at_two() {
        let spec = SweepSpec::diagonal(repressilator(), 1.0, 4.0, 61).unwrap();
        let table = run_sweep(&spec).unwrap();
        assert_eq!(labels(&table)[0], "OddStable");
        assert_eq!(*labels(&table).last().unwrap(), "OddUnstableOscillatory");
        let trace = boundary_trace(&spec, &table).unwrap();
        assert!(!trace.is_empty());
        assert!(trace.iter().all(|t| (t.midpoint() - 2.0).abs() < 1e-5), "{trace:?}");
    }

    #[test]
    fn weak_loop_is_monostable_everywhere() {
        let net = CyclicNetwork::new(vec![hill(0.0, 1.0), hill(0.5, 1.0)], vec![1.0, 1.0]).unwrap();
        assert!(net.d_value() < 1.0);
        let spec = SweepSpec::new(net, vec![Axis::new(vec![1], 0.1, 100.0, 15), Axis::new(vec![2], 0.1, 100.0, 15)]).unwrap();
        let table = run_sweep(&spec).unwrap();
        assert!(table.rows.iter().all(|r| r.branch == Some(Branch::EvenMonostableGAS)));
        let one_axis = SweepSpec::diagonal(spec.network.clone(), 0.1, 100.0, 20).unwrap();
        assert!(boundary_trace(&one_axis, &run_sweep(&one_axis).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn csv_row_count_and_header() {
        let spec = SweepSpec::diagonal(toggle(), 1.0, 4.0, 61).unwrap();
        let csv = to_csv(&run_sweep(&spec).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "alpha_1,alpha_2,branch,p_mid,n_equilibria");
        assert_eq!(lines.len(), 62);
        assert!(csv.ends_with('\n') && !csv.ends_with("\n\n"));
        assert!(lines[1].starts_with("1,1,EvenMonostableGAS,"));
    }

    #[test]
    fn two_dimensional_toggle_map() {
        let spec = SweepSpec::new(toggle(), vec![Axis::new(vec![1], 0.5, 8.0, 41), Axis::new(vec![2], 0.5, 8.0, 41)]).unwrap();
        let table = run_sweep(&spec).unwrap();
        assert_eq!(table.rows.len(), 1681);
        for i in 0..41 {
            for j in 0..41 {
                assert_eq!(table.cell(i, j).label(), table.cell(j, i).label(), "cell ({i}, {j})");
            }
        }
        let svg = String::from_utf8(emit(&table, Format::Svg).unwrap()).unwrap();
        assert_eq!(svg.matches("<rect").count(), 1681);
        assert_eq!(svg, to_svg(&run_sweep(&spec).unwrap()).unwrap());
    }

    #[test]
    fn svg_needs_two_axes() {
        let spec = SweepSpec::diagonal(toggle(), 1.0, 4.0, 5).unwrap();
        let table = run_sweep(&spec).unwrap();
        assert!(matches!(emit(&table, Format::Svg), Err(Error::Format(_))));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let axis = |idx: Vec<usize>, lo, hi, res| Axis::new(idx, lo, hi, res);
        assert!(SweepSpec::new(toggle(), vec![axis(vec![3], 1.0, 2.0, 5)]).is_err());
        assert!(SweepSpec::new(toggle(), vec![axis(vec![1], 0.0, 2.0, 5)]).is_err());
        assert!(SweepSpec::new(toggle(), vec![axis(vec![1], 3.0, 2.0, 5)]).is_err());
        assert!(SweepSpec::new(toggle(), vec![axis(vec![1], 1.0, 2.0, 1)]).is_err());
        assert!(SweepSpec::new(toggle(), vec![axis(vec![1], 1.0, 2.0, 5), axis(vec![1], 1.0, 2.0, 5)]).is_err());
        assert!(SweepSpec::new(toggle(), vec![]).is_err());
    }

    #[test]
    fn fixed_components_come_from_template() {
        let net = toggle().with_alpha(vec![1.0, 7.0]).unwrap();
        let spec = SweepSpec::new(net, vec![Axis::new(vec![1], 1.0, 2.0, 3)]).unwrap();
        let table = run_sweep(&spec).unwrap();
        assert!(table.rows.iter().all(|r| r.alpha[1] == 7.0));
    }

    #[test]
    fn sweep_spec_json_roundtrip() {
        let spec = SweepSpec::diagonal(toggle(), 1.0, 4.0, 7).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        let back: SweepSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }
}
