//! Reverse-mode gradient of the recurrent loss against central differences.
//!
//! ```bash
//! cargo run --release --example gradient_check
//! ```

use consflux::data::{generate_dataset, stream_rng};
use consflux::model::{ModelForm, ModelSpec};
use consflux::presets::preset;
use consflux::train::{loss_and_gradient, recurrent_loss};
use consflux::Result;

fn main() -> Result<()> {
    let mut cfg = preset("burgers-caseI")?;
    cfg.n_cells = 32;
    cfg.n_traj = 2;
    cfg.m = None;
    cfg.l = 3;
    let data = generate_dataset(&cfg)?;
    let mut model = ModelSpec::init(ModelForm::Cfn, 1, data.bc(), *data.grid(), &[6, 6], &mut stream_rng(7, 0))?;

    let (loss, _, grad) = loss_and_gradient(&model, data.trajectories(), None, 0.0)?;
    let g = grad.flatten();
    let theta = model.mlp().flatten();
    let h = 1e-6;
    let mut worst = 0.0f64;
    for i in (0..theta.len()).step_by(7) {
        let mut p = theta.clone();
        p[i] += h;
        model.mlp_mut().set_flat(&p)?;
        let up = recurrent_loss(&model, data.trajectories())?;
        p[i] -= 2.0 * h;
        model.mlp_mut().set_flat(&p)?;
        let down = recurrent_loss(&model, data.trajectories())?;
        let fd = (up - down) / (2.0 * h);
        let rel = (g[i] - fd).abs() / g[i].abs().max(fd.abs()).max(1e-12);
        worst = worst.max(rel);
        println!("theta[{i:3}]  tape {:+.8e}  fd {:+.8e}  rel {rel:.2e}", g[i], fd);
    }
    println!("loss {loss:.6e}, worst relative error {worst:.2e}");
    Ok(())
}
