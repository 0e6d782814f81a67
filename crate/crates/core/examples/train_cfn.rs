//! Desk-scale training of a CFN on Burgers data and a shock-speed check.
//!
//! ```bash
//! cargo run --release --example train_cfn
//! ```

use consflux::data::build_dataset;
use consflux::diagnostics::shock_location;
use consflux::model::{rollout, ModelForm};
use consflux::nn::AdamConfig;
use consflux::presets::{figure_ic, preset};
use consflux::solver::{solve_reference, CflPolicy, NumericalFlux};
use consflux::train::{train, TrainConfig};
use consflux::Result;

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut cfg = preset("burgers-caseI")?;
    cfg.n_cells = 128;
    cfg.n_traj = 20;
    cfg.l = 10;
    let data = build_dataset(&cfg)?;

    let tc = TrainConfig {
        form: ModelForm::Cfn,
        hidden: vec![32, 32],
        epochs: 2000,
        adam: AdamConfig::with_lr(1e-3),
        batch_size: Some(2),
        ..Default::default()
    };
    let outcome = train(&tc, &data, None)?;
    println!("final loss {:?} after {} epochs", outcome.final_loss, outcome.history.len());

    let (u0, sys, bc) = figure_ic("burgers-figure", 128)?;
    let pred = rollout(&outcome.model, &u0, 600, cfg.dt)?;
    let reference = solve_reference(&u0, sys, bc, NumericalFlux::default_for(sys), 3.0, CflPolicy::FixedDt { dt: cfg.dt }, 3.0)?;
    let sm = shock_location(pred.last().unwrap(), 0, bc)?;
    let sr = shock_location(reference.snapshots().last().unwrap(), 0, bc)?;
    println!(
        "shock at t = 3: model x = {:.4}, reference x = {:.4}, offset {:.1} cells, Rankine-Hugoniot x = {:.4}",
        sm.x,
        sr.x,
        (sm.x - sr.x).abs() / u0.grid().dx(),
        std::f64::consts::PI + 3.0 * 0.06342
    );
    Ok(())
}
