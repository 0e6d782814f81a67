//! Save a checkpoint, roll it out, and write an evaluation report.
//!
//! ```bash
//! cargo run --release --example evaluate_report
//! ```

use consflux::checkpoint::{Checkpoint, TrainingMeta};
use consflux::data::stream_rng;
use consflux::diagnostics::{emit_report, evaluate, read_report};
use consflux::field::Trajectory;
use consflux::model::{rollout, ModelForm, ModelSpec};
use consflux::physics::SystemSpec;
use consflux::presets::figure_ic;
use consflux::solver::{solve_reference, CflPolicy, NumericalFlux};
use consflux::Result;

fn main() -> Result<()> {
    let dir = std::env::temp_dir().join("consflux-report-example");
    let (u0, sys, bc) = figure_ic("swe-figure", 128)?;
    let model = ModelSpec::init(ModelForm::Cfn, 2, bc, *u0.grid(), &[16, 16], &mut stream_rng(5, 0))?;
    let ck = Checkpoint { model, system: sys, dt: 0.005, meta: TrainingMeta { epoch: 0, seed: 5, loss: None } };
    ck.save(&dir.join("checkpoint.json"))?;
    let ck = Checkpoint::load(&dir.join("checkpoint.json"))?;

    let mut snaps = vec![u0.clone()];
    snaps.extend(rollout(&ck.model, &u0, 100, ck.dt)?);
    let prediction = Trajectory::new(snaps, ck.dt, Default::default())?;

    let (fine, _, _) = figure_ic("swe-figure", 512)?;
    let reference = solve_reference(&fine, sys, bc, NumericalFlux::default_for(sys), 0.5, CflPolicy::Number { cfl: 0.9 }, ck.dt)?;

    let mut report = evaluate(&prediction, &reference, SystemSpec::shallow_water(1.0)?, bc)?;
    report.config.insert("note".into(), "untrained model".into());
    emit_report(&report, &dir)?;
    let back = read_report(&dir)?;
    for row in &back.summary {
        println!("{:20} {:6} {:.6e}", row.metric, row.component, row.value);
    }
    println!("report written to {}", dir.display());
    Ok(())
}
