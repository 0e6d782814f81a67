//! Finite-volume reference solutions for the three systems.
//!
//! Burgers is checked against the method of characteristics before the shock
//! forms; the dam break and Shu-Osher runs report positivity and totals.
//!
//! ```bash
//! cargo run --release --example reference_solver
//! ```

use consflux::field::{total_conserved, Grid1D, StateField};
use consflux::presets::figure_ic;
use consflux::solver::{solve_reference, CflPolicy, NumericalFlux};
use consflux::Result;

/// Exact solution of u_t + (u^2/2)_x = 0 with u(x, 0) = a + b sin x, before breaking.
fn characteristics(x: f64, t: f64, a: f64, b: f64) -> f64 {
    let mut xi = x;
    for _ in 0..100 {
        let g = xi + t * (a + b * xi.sin()) - x;
        let dg = 1.0 + t * b * xi.cos();
        xi -= g / dg;
    }
    a + b * xi.sin()
}

fn main() -> Result<()> {
    let (a, b) = (0.06342, 1.17322);
    for n in [128, 256, 512] {
        let (ic, sys, bc) = figure_ic("burgers-figure", n)?;
        let traj = solve_reference(&ic, sys, bc, NumericalFlux::default_for(sys), 0.5, CflPolicy::FixedDt { dt: 0.005 }, 0.5)?;
        let last = traj.snapshots().last().unwrap();
        let g: &Grid1D = last.grid();
        let (mut l1, mut linf) = (0.0f64, 0.0f64);
        for j in 0..n {
            let e = (last.values()[[0, j]] - characteristics(g.center(j), 0.5, a, b)).abs();
            l1 += e * g.dx();
            linf = linf.max(e);
        }
        println!("burgers N={n:4}  t=0.5  L1={l1:.3e}  Linf={linf:.3e}");
    }

    for (name, t_end) in [("swe-figure", 1.0), ("euler-figure", 1.6)] {
        let (ic, sys, bc): (StateField, _, _) = figure_ic(name, 512)?;
        let traj = solve_reference(&ic, sys, bc, NumericalFlux::default_for(sys), t_end, CflPolicy::Number { cfl: 0.9 }, t_end)?;
        let last = traj.snapshots().last().unwrap();
        let min0 = last.values().row(0).fold(f64::INFINITY, |m, v| m.min(*v));
        println!(
            "{} N=512 t={t_end}: min {} = {min0:.4}, totals {:?} -> {:?}",
            sys.name(),
            sys.component_names()[0],
            total_conserved(&ic),
            total_conserved(last)
        );
    }
    Ok(())
}
