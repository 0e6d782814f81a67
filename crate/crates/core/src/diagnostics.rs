//! Post-hoc comparison of predictions against a (finer) reference.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{restrict_to_coarse, BoundaryCondition, StateField, Trajectory};
use crate::model::{rollout, ModelSpec};
use crate::physics::SystemSpec;
use crate::train::{boundary_flux_series, conserved_remainder, BoundaryFluxSeries};

/// Jumps below this are not reported as shocks.
pub const SHOCK_THRESHOLD: f64 = 1e-8;

/// Rolls `model` out from `u0` and returns `C(u(t_l))` for `l = 0..=steps`, shape `[n_comp, steps + 1]`.
pub fn remainder_series(
    model: &ModelSpec,
    u0: &StateField,
    steps: usize,
    dt: f64,
    series: &BoundaryFluxSeries,
) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((u0.n_comp(), steps + 1));
    if steps == 0 {
        return Ok(out);
    }
    let pred = rollout(model, u0, steps, dt)?;
    let c = conserved_remainder(&pred, u0, series, dt)?;
    out.slice_mut(ndarray::s![.., 1..]).assign(&c);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

fn restricted(prediction: &StateField, reference: &StateField) -> Result<StateField> {
    let (n, nf) = (prediction.n_cells(), reference.n_cells());
    if nf % n != 0 || prediction.n_comp() != reference.n_comp() {
        return Err(Error::invalid(format!(
            "reference with {nf} cells cannot be restricted to {n} cells (or components differ)"
        )));
    }
    let g = prediction.grid();
    let gf = reference.grid();
    if (g.a() - gf.a()).abs() > 1e-12 || (g.b() - gf.b()).abs() > 1e-12 {
        return Err(Error::invalid("prediction and reference cover different domains"));
    }
    restrict_to_coarse(reference, nf / n)
}

/// `|prediction - R(reference)|` per component and cell, `R` the block average.
pub fn pointwise_error(prediction: &StateField, reference_fine: &StateField) -> Result<Array2<f64>> {
    let r = restricted(prediction, reference_fine)?;
    Ok((prediction.values() - r.values()).mapv(f64::abs))
}

/// L1, L2 and max norms of the pointwise error, per component.
pub fn error_norms(prediction: &StateField, reference_fine: &StateField) -> Result<Vec<ErrorNorms>> {
    let e = pointwise_error(prediction, reference_fine)?;
    let dx = prediction.grid().dx();
    Ok(e.outer_iter()
        .map(|row| ErrorNorms {
            l1: row.sum() * dx,
            l2: (row.mapv(|v| v * v).sum() * dx).sqrt(),
            linf: row.fold(0.0, |m, v| m.max(*v)),
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShockLocation {
    /// Edge coordinate of the largest jump.
    pub x: f64,
    pub jump: f64,
}

impl ShockLocation {
    pub fn is_shock(&self) -> bool {
        self.jump >= SHOCK_THRESHOLD
    }
}

/// Edge `x_{j+1/2}` of the largest `|u_{j+1} - u_j|` in `component`; ties go to
/// the smaller `x`. Periodic fields also compare the wrap-around pair, placed at `a`.
pub fn shock_location(field: &StateField, component: usize, bc: BoundaryCondition) -> Result<ShockLocation> {
    if component >= field.n_comp() {
        return Err(Error::invalid(format!("component {component} out of range")));
    }
    let u = field.values().row(component);
    let n = u.len();
    let g = field.grid();
    let mut best = ShockLocation { x: g.edge(1), jump: (u[1] - u[0]).abs() };
    if bc == BoundaryCondition::Periodic {
        let wrap = (u[0] - u[n - 1]).abs();
        if wrap >= best.jump {
            best = ShockLocation { x: g.edge(0), jump: wrap };
        }
    }
    for j in 1..n - 1 {
        let jump = (u[j + 1] - u[j]).abs();
        if jump > best.jump {
            best = ShockLocation { x: g.edge(j + 1), jump };
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub x: f64,
    pub component: String,
    pub value_model: f64,
    pub value_reference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub x: f64,
    pub component: String,
    pub abs_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderRow {
    pub t: f64,
    pub component: String,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub metric: String,
    pub component: String,
    pub value: f64,
}

/// Everything [`emit_report`] writes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    /// Echo of the producing configuration.
    pub config: BTreeMap<String, String>,
    pub profiles: Vec<ProfileRow>,
    pub errors: Vec<ErrorRow>,
    pub remainder: Vec<RemainderRow>,
    pub summary: Vec<SummaryRow>,
}

impl Report {
    fn push_summary(&mut self, metric: &str, component: &str, value: f64) {
        self.summary.push(SummaryRow { metric: metric.into(), component: component.into(), value });
    }

    pub fn metric(&self, metric: &str, component: &str) -> Option<f64> {
        self.summary.iter().find(|r| r.metric == metric && r.component == component).map(|r| r.value)
    }
}

fn snapshot_at(traj: &Trajectory, t: f64) -> Option<&StateField> {
    traj.snapshots().iter().find(|s| (s.time() - t).abs() <= 1e-9 * t.abs().max(1.0))
}

/// Compares `prediction` with `reference` at the prediction's final time and
/// tracks the conserved remainder of the prediction over all of its snapshots.
///
/// Boundary fluxes come from the reference restricted to the prediction grid.
pub fn evaluate(prediction: &Trajectory, reference: &Trajectory, sys: SystemSpec, bc: BoundaryCondition) -> Result<Report> {
    let names = sys.component_names();
    let mut report = Report::default();
    let last = prediction.snapshots().last().expect("trajectory is never empty");
    let ref_last = snapshot_at(reference, last.time())
        .ok_or_else(|| Error::invalid(format!("reference has no snapshot at t = {}", last.time())))?;
    let fine_factor = ref_last.n_cells() / last.n_cells().max(1);
    let coarse_ref = restricted(last, ref_last)?;
    let err = pointwise_error(last, ref_last)?;
    let norms = error_norms(last, ref_last)?;
    let grid = last.grid();
    for c in 0..last.n_comp() {
        for j in 0..last.n_cells() {
            let x = grid.center(j);
            report.profiles.push(ProfileRow {
                x,
                component: names[c].into(),
                value_model: last.values()[[c, j]],
                value_reference: coarse_ref.values()[[c, j]],
            });
            report.errors.push(ErrorRow { x, component: names[c].into(), abs_error: err[[c, j]] });
        }
        report.push_summary("l1", names[c], norms[c].l1);
        report.push_summary("l2", names[c], norms[c].l2);
        report.push_summary("linf", names[c], norms[c].linf);
    }
    report.push_summary("final_time", "all", last.time());
    report.push_summary("restriction_factor", "all", fine_factor as f64);

    // component 0 is u, h or rho
    let sm = shock_location(last, 0, bc)?;
    let sr = shock_location(&coarse_ref, 0, bc)?;
    report.push_summary("shock_x_model", names[0], if sm.is_shock() { sm.x } else { f64::NAN });
    report.push_summary("shock_x_reference", names[0], if sr.is_shock() { sr.x } else { f64::NAN });
    report.push_summary("shock_offset_cells", names[0], (sm.x - sr.x).abs() / grid.dx());

    let steps = prediction.len_steps();
    let mut restricted_ref = Vec::with_capacity(steps + 1);
    for s in prediction.snapshots() {
        let r = snapshot_at(reference, s.time())
            .ok_or_else(|| Error::invalid(format!("reference has no snapshot at t = {}", s.time())))?;
        restricted_ref.push(restricted(s, r)?);
    }
    let ref_traj = Trajectory::new(restricted_ref, prediction.dt(), Default::default())?;
    let series = boundary_flux_series(&ref_traj, sys, bc)?;
    let c = conserved_remainder(&prediction.snapshots()[1..], prediction.initial(), &series, prediction.dt())?;
    for comp in 0..prediction.n_comp() {
        report.remainder.push(RemainderRow { t: prediction.initial().time(), component: names[comp].into(), c: 0.0 });
        for l in 0..steps {
            report.remainder.push(RemainderRow {
                t: prediction.snapshots()[l + 1].time(),
                component: names[comp].into(),
                c: c[[comp, l]],
            });
        }
        report.push_summary("max_remainder", names[comp], c.row(comp).fold(0.0, |m, v| m.max(*v)));
    }
    Ok(report)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `metrics.json` and, for non-empty tables, `profiles.csv`,
/// `errors.csv`, `remainder.csv` and `summary.csv` into `dir`.
pub fn emit_report(report: &Report, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut metrics: BTreeMap<String, BTreeMap<String, Option<f64>>> = BTreeMap::new();
    for r in &report.summary {
        let v = r.value.is_finite().then_some(r.value);
        metrics.entry(r.metric.clone()).or_default().insert(r.component.clone(), v);
    }
    let doc = serde_json::json!({ "config": report.config, "metrics": metrics });
    fs::write(dir.join("metrics.json"), serde_json::to_string_pretty(&doc)? + "\n")?;

    let write = |name: &str, header: &str, rows: Vec<String>| -> Result<()> {
        if rows.is_empty() {
            return Ok(());
        }
        let mut s = String::from(header);
        s.push('\n');
        for r in rows {
            let _ = writeln!(s, "{r}");
        }
        fs::write(dir.join(name), s)?;
        Ok(())
    };
    write(
        "profiles.csv",
        "x,component,value_model,value_reference",
        report
            .profiles
            .iter()
            .map(|r| format!("{},{},{},{}", num(r.x), r.component, num(r.value_model), num(r.value_reference)))
            .collect(),
    )?;
    write(
        "errors.csv",
        "x,component,abs_error",
        report.errors.iter().map(|r| format!("{},{},{}", num(r.x), r.component, num(r.abs_error))).collect(),
    )?;
    write(
        "remainder.csv",
        "t,component,C",
        report.remainder.iter().map(|r| format!("{},{},{}", num(r.t), r.component, num(r.c))).collect(),
    )?;
    write(
        "summary.csv",
        "metric,component,value",
        report.summary.iter().map(|r| format!("{},{},{}", r.metric, r.component, num(r.value))).collect(),
    )?;
    Ok(())
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::format(format!("bad number '{s}': {e}")))
}

fn read_rows(path: &Path, header: &str) -> Result<Vec<Vec<String>>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some(header) {
        return Err(Error::format(format!("{} does not start with '{header}'", path.display())));
    }
    Ok(lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

/// Reads back the tables written by [`emit_report`] (the config echo from `metrics.json`).
pub fn read_report(dir: &Path) -> Result<Report> {
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("metrics.json"))?)?;
    let config: BTreeMap<String, String> = serde_json::from_value(doc["config"].clone())?;
    let bad = |p: &str| Error::format(format!("malformed row in {p}"));
    let mut report = Report { config, ..Default::default() };
    for r in read_rows(&dir.join("profiles.csv"), "x,component,value_model,value_reference")? {
        let [x, c, m, v] = r.as_slice() else { return Err(bad("profiles.csv")) };
        report.profiles.push(ProfileRow {
            x: parse_f64(x)?,
            component: c.clone(),
            value_model: parse_f64(m)?,
            value_reference: parse_f64(v)?,
        });
    }
    for r in read_rows(&dir.join("errors.csv"), "x,component,abs_error")? {
        let [x, c, e] = r.as_slice() else { return Err(bad("errors.csv")) };
        report.errors.push(ErrorRow { x: parse_f64(x)?, component: c.clone(), abs_error: parse_f64(e)? });
    }
    for r in read_rows(&dir.join("remainder.csv"), "t,component,C")? {
        let [t, c, v] = r.as_slice() else { return Err(bad("remainder.csv")) };
        report.remainder.push(RemainderRow { t: parse_f64(t)?, component: c.clone(), c: parse_f64(v)? });
    }
    for r in read_rows(&dir.join("summary.csv"), "metric,component,value")? {
        let [m, c, v] = r.as_slice() else { return Err(bad("summary.csv")) };
        report.summary.push(SummaryRow { metric: m.clone(), component: c.clone(), value: parse_f64(v)? });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid1D;
    use crate::model::ModelForm;
    use crate::nn::MlpParams;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn field(vals: Vec<f64>, a: f64, b: f64) -> StateField {
        let n = vals.len();
        StateField::new(Grid1D::new(a, b, n).unwrap(), Array2::from_shape_vec((1, n), vals).unwrap(), 0.0).unwrap()
    }

    #[test]
    fn shock_examples() {
        let f = field(vec![1.0, 1.0, 1.0, 0.0, 0.0], 0.0, 5.0);
        let s = shock_location(&f, 0, BoundaryCondition::ZerothOrder).unwrap();
        assert_eq!(s.x, 3.0);
        assert!(s.is_shock());
        let c = field(vec![2.0; 6], 0.0, 6.0);
        let s = shock_location(&c, 0, BoundaryCondition::ZerothOrder).unwrap();
        assert_eq!(s.x, 1.0);
        assert!(!s.is_shock());
    }

    #[test]
    fn error_norm_examples() {
        let g = Grid1D::new(0.0, 2.0 * PI, 16).unwrap();
        let a = StateField::from_fn(g, 1, 0.0, |x| vec![x.sin() + 1.0]).unwrap();
        let b = StateField::from_fn(g, 1, 0.0, |x| vec![x.sin()]).unwrap();
        let n = error_norms(&a, &b).unwrap()[0];
        assert!((n.l1 - 2.0 * PI).abs() < 1e-12);
        assert_eq!(n.linf, 1.0);
        let z = error_norms(&a, &a).unwrap()[0];
        assert_eq!((z.l1, z.l2, z.linf), (0.0, 0.0, 0.0));
        let p = field(vec![1.0, -1.0, 0.0, 0.0], 0.0, 4.0);
        let q = field(vec![0.0; 4], 0.0, 4.0);
        assert_eq!(error_norms(&p, &q).unwrap()[0].l2, 2f64.sqrt());
    }

    #[test]
    fn pointwise_error_restricts_reference() {
        let coarse = field(vec![1.0, 2.0, 3.0, 4.0], 0.0, 1.0);
        let fine = field(vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.5, 3.5], 0.0, 1.0);
        assert!(pointwise_error(&coarse, &fine).unwrap().iter().all(|v| *v == 0.0));
        let off = field(vec![1.0, 2.0, 4.0, 4.0], 0.0, 1.0);
        let e = pointwise_error(&off, &fine).unwrap();
        assert_eq!(e.iter().filter(|v| **v != 0.0).count(), 1);
        let odd = field(vec![0.0; 6], 0.0, 1.0);
        assert!(error_norms(&odd, &fine).is_err());
    }

    #[test]
    fn remainder_series_cases() {
        let g = Grid1D::new(0.0, 2.0 * PI, 32).unwrap();
        let u0 = StateField::from_fn(g, 1, 0.0, |x| vec![0.3 + x.sin()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfn = ModelSpec::init(ModelForm::Cfn, 1, BoundaryCondition::Periodic, g, &[8, 8], &mut rng).unwrap();
        let s = remainder_series(&cfn, &u0, 50, 0.005, &BoundaryFluxSeries::zeros(50, 1)).unwrap();
        assert_eq!(s.ncols(), 51);
        assert!(s.iter().all(|v| *v <= 1e-10));
        let zero = remainder_series(&cfn, &u0, 0, 0.005, &BoundaryFluxSeries::zeros(0, 1)).unwrap();
        assert_eq!(zero, array![[0.0]]);
        // identity model with a constant net inflow
        let id = cfn.with_mlp(MlpParams::zeros(&[6, 8, 8, 1]).unwrap()).unwrap();
        let mut series = BoundaryFluxSeries::zeros(4, 1);
        series.fa.fill(0.5);
        series.fb.fill(0.25);
        let s = remainder_series(&id, &u0, 4, 0.1, &series).unwrap();
        for l in 0..=4 {
            assert!((s[[0, l]] - 0.025 * l as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn shock_shift_equivariance() {
        let g = Grid1D::new(0.0, 2.0 * PI, 64).unwrap();
        let f = StateField::from_fn(g, 1, 0.0, |x| vec![if x < 2.0 { 1.0 } else { -0.5 + 0.1 * x }]).unwrap();
        let s = shock_location(&f, 0, BoundaryCondition::Periodic).unwrap();
        for m in [1usize, 10, 40] {
            let v = Array2::from_shape_fn((1, 64), |(_, j)| f.values()[[0, (j + 64 - m) % 64]]);
            let t = shock_location(&f.with_values(v, 0.0).unwrap(), 0, BoundaryCondition::Periodic).unwrap();
            let expected = (s.x + m as f64 * g.dx()).rem_euclid(2.0 * PI);
            assert!((t.x - expected).abs() < 1e-9 || (t.x - expected).abs() > 2.0 * PI - 1e-9);
        }
    }

    #[test]
    fn report_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = Report::default();
        r.config.insert("seed".into(), "3".into());
        r.profiles.push(ProfileRow { x: 0.1, component: "u".into(), value_model: 1.0 / 3.0, value_reference: -2e-300 });
        r.errors.push(ErrorRow { x: 0.1, component: "u".into(), abs_error: 0.1 + 0.2 });
        r.remainder.push(RemainderRow { t: 0.005, component: "u".into(), c: 1e-17 });
        r.push_summary("l1", "u", std::f64::consts::E);
        emit_report(&r, dir.path()).unwrap();
        assert_eq!(read_report(dir.path()).unwrap(), r);
        let head = fs::read_to_string(dir.path().join("remainder.csv")).unwrap();
        assert!(head.starts_with("t,component,C\n"));
    }

    #[test]
    fn empty_report_has_config_only() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = Report::default();
        r.config.insert("command".into(), "evaluate".into());
        emit_report(&r, dir.path()).unwrap();
        let names: Vec<String> =
            fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        assert_eq!(names, vec!["metrics.json".to_string()]);
        assert_eq!(read_report(dir.path()).unwrap(), r);
    }

    #[test]
    fn identical_prediction_scores_zero() {
        let g = Grid1D::new(0.0, 2.0 * PI, 16).unwrap();
        let snaps: Vec<StateField> =
            (0..3).map(|l| StateField::from_fn(g, 1, l as f64 * 0.1, |x| vec![x.sin()]).unwrap()).collect();
        let t = Trajectory::new(snaps, 0.1, Default::default()).unwrap();
        let r = evaluate(&t, &t, SystemSpec::Burgers, BoundaryCondition::Periodic).unwrap();
        for m in ["l1", "l2", "linf"] {
            assert_eq!(r.metric(m, "u"), Some(0.0));
        }
        assert!(r.metric("shock_x_model", "u").is_some());
        assert_eq!(r.remainder.len(), 3);
    }
}
