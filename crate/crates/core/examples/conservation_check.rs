//! Conservation of random CFN and nCFN models, and the telescoping remainder.
//!
//! A CFN updates cells with differences of shared edge fluxes, so on a
//! periodic grid the totals stay put whatever the weights are. An nCFN of the
//! same size drifts.
//!
//! ```bash
//! cargo run --release --example conservation_check
//! ```

use consflux::data::stream_rng;
use consflux::diagnostics::remainder_series;
use consflux::field::total_conserved;
use consflux::model::{rollout, ModelForm, ModelSpec, DEFAULT_HIDDEN};
use consflux::presets::figure_ic;
use consflux::train::BoundaryFluxSeries;
use consflux::Result;

fn main() -> Result<()> {
    let (u0, _, bc) = figure_ic("burgers-figure", 512)?;
    for form in [ModelForm::Cfn, ModelForm::Ncfn] {
        for seed in 0..3 {
            let model = ModelSpec::init(form, 1, bc, *u0.grid(), &DEFAULT_HIDDEN, &mut stream_rng(seed, 0))?;
            let traj = rollout(&model, &u0, 600, 0.005)?;
            let start = total_conserved(&u0)[0];
            let drift = traj.iter().map(|s| (total_conserved(s)[0] - start).abs()).fold(0.0, f64::max);
            println!("{form:8} seed {seed}: max |total drift| over 600 steps = {drift:.3e}");
        }
    }

    // periodic boundaries contribute no flux, so C(u) is the plain drift
    let series = BoundaryFluxSeries::zeros(600, 1);
    for form in [ModelForm::Cfn, ModelForm::Ncfn] {
        let model = ModelSpec::init(form, 1, bc, *u0.grid(), &DEFAULT_HIDDEN, &mut stream_rng(9, 0))?;
        let c = remainder_series(&model, &u0, 600, 0.005, &series)?;
        println!("{form:8} C(u) at t = 0.5, 1.5, 3: {:.3e} {:.3e} {:.3e}", c[[0, 100]], c[[0, 300]], c[[0, 600]]);
    }
    Ok(())
}
