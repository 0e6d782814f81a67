//! Generate, window, perturb and store a training dataset.
//!
//! ```bash
//! cargo run --release --example dataset_pipeline
//! ```

use consflux::data::{add_noise, build_dataset, generate_dataset, noise_sigma, read_dataset, stream_rng, write_dataset, NoiseSpec};
use consflux::presets::preset;
use consflux::Result;

fn main() -> Result<()> {
    let mut cfg = preset("burgers-caseIII")?;
    cfg.n_cells = 128;
    cfg.n_traj = 8;
    cfg.m = Some(60);
    cfg.l = 10;
    cfg.noise = 0.1;
    println!("{}", cfg.to_toml()?);

    let clean = generate_dataset(&cfg)?;
    println!("solved {} trajectories with {} transitions each", clean.trajectories().len(), clean.len_steps());

    let data = build_dataset(&cfg)?;
    for t in data.trajectories().iter().take(3) {
        println!("window starts at t = {:.3}, params {:?}", t.initial().time(), t.ic_params());
    }
    println!("noise sigma per component: {:?}", noise_sigma(&clean, NoiseSpec::new(cfg.noise)?));

    let same = add_noise(&clean, NoiseSpec::new(0.0)?, &mut stream_rng(0, 0))?;
    println!("level 0 leaves the data untouched: {}", same.trajectories() == clean.trajectories());

    let dir = std::env::temp_dir().join("consflux-dataset-example");
    let manifest = write_dataset(&data, &dir)?;
    let back = read_dataset(&dir)?;
    println!("wrote {} (dims {:?}, sha256 {})", dir.display(), manifest.dims, manifest.checksum);
    println!("read back identical: {}", back == data);
    Ok(())
}
