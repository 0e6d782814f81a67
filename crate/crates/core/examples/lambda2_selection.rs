//! Picking the nCFN-reg weight by held-out one-step residual.
//!
//! ```bash
//! cargo run --release --example lambda2_selection
//! ```

use consflux::data::build_dataset;
use consflux::presets::preset;
use consflux::train::{select_lambda2, TrainConfig};
use consflux::Result;

fn main() -> Result<()> {
    let mut cfg = preset("swe-caseI")?;
    cfg.n_cells = 64;
    cfg.n_traj = 10;
    cfg.l = 5;
    let data = build_dataset(&cfg)?;
    let tc = TrainConfig { hidden: vec![16, 16], probe_epochs: 20, ..Default::default() };
    let (best, probes) = select_lambda2(&tc, &data)?;
    for (l, r) in probes {
        println!("lambda2 = {l:<8e} held-out residual {r:.6e}");
    }
    println!("selected lambda2 = {best}");
    Ok(())
}
