//! Randomized initial conditions for the three benchmark families.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Grid1D, IcParams, StateField};
use crate::physics::SystemSpec;

const MAX_DRAWS: usize = 100;

/// Initial-condition family and its sampling parameters.
///
/// Every parameter is drawn uniformly; an `eps` of zero pins it to its mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum IcSamplerSpec {
    /// `u = alpha + beta sin x`, `alpha ~ U[-eps_s, eps_s]`, `beta ~ U[1-eps_s, 1+eps_s]`.
    BurgersSine { eps_s: f64 },
    /// Piecewise-constant `(h, v)` with the jump at `x0`.
    DamBreak { eps_hl: f64, eps_hr: f64, eps: f64 },
    /// Shock entering a sinusoidal density field, flattened beyond `x1`.
    ShuOsher {
        rho_l: f64,
        amplitude: f64,
        p_l: f64,
        p_r: f64,
        u_l: f64,
        x0: f64,
        x1: f64,
        eps: f64,
        gamma: f64,
    },
}

impl IcSamplerSpec {
    pub fn burgers_sine() -> Self {
        IcSamplerSpec::BurgersSine { eps_s: 0.25 }
    }

    pub fn dam_break() -> Self {
        IcSamplerSpec::DamBreak { eps_hl: 0.2, eps_hr: 0.1, eps: 0.1 }
    }

    pub fn shu_osher() -> Self {
        IcSamplerSpec::ShuOsher {
            rho_l: 3.857135,
            amplitude: 0.2,
            p_l: 10.33333,
            p_r: 1.0,
            u_l: 2.62936,
            x0: -4.0,
            x1: 3.29867,
            eps: 0.1,
            gamma: 1.4,
        }
    }

    /// The family's spatial domain.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            IcSamplerSpec::BurgersSine { .. } => (0.0, 2.0 * std::f64::consts::PI),
            IcSamplerSpec::DamBreak { .. } | IcSamplerSpec::ShuOsher { .. } => (-5.0, 5.0),
        }
    }

    /// Whether the family can seed `sys`.
    pub fn fits(&self, sys: SystemSpec) -> bool {
        match (self, sys) {
            (IcSamplerSpec::BurgersSine { .. }, SystemSpec::Burgers) => true,
            (IcSamplerSpec::DamBreak { .. }, SystemSpec::ShallowWater { .. }) => true,
            (IcSamplerSpec::ShuOsher { gamma, .. }, SystemSpec::Euler { gamma: g }) => *gamma == g,
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let eps: Vec<f64> = match *self {
            IcSamplerSpec::BurgersSine { eps_s } => vec![eps_s],
            IcSamplerSpec::DamBreak { eps_hl, eps_hr, eps } => vec![eps_hl, eps_hr, eps],
            IcSamplerSpec::ShuOsher { eps, gamma, .. } => {
                if !(gamma > 1.0) {
                    return Err(Error::invalid(format!("gamma must exceed 1, got {gamma}")));
                }
                vec![eps]
            }
        };
        if eps.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
            return Err(Error::invalid(format!("sampler spreads must be >= 0: {self:?}")));
        }
        Ok(())
    }

    /// Declared support `[lo, hi]` of each sampled parameter.
    pub fn supports(&self) -> Vec<(&'static str, f64, f64)> {
        let rel = |mean: f64, eps: f64| {
            let (a, b) = (mean * (1.0 - eps), mean * (1.0 + eps));
            (a.min(b), a.max(b))
        };
        match *self {
            IcSamplerSpec::BurgersSine { eps_s } => vec![("alpha", -eps_s, eps_s), ("beta", 1.0 - eps_s, 1.0 + eps_s)],
            IcSamplerSpec::DamBreak { eps_hl, eps_hr, eps } => vec![
                ("h_l", 2.0 - eps_hl, 2.0 + eps_hl),
                ("h_r", 1.0 - eps_hr, 1.0 + eps_hr),
                ("v_l", -eps, eps),
                ("v_r", -eps, eps),
                ("x0", -eps, eps),
            ],
            IcSamplerSpec::ShuOsher { rho_l, amplitude, p_l, p_r, u_l, x0, eps, .. } => {
                let mut out = Vec::new();
                for (name, mean) in [
                    ("rho_l", rho_l),
                    ("amplitude", amplitude),
                    ("p_l", p_l),
                    ("p_r", p_r),
                    ("u_l", u_l),
                    ("x0", x0),
                ] {
                    let (lo, hi) = rel(mean, eps);
                    out.push((name, lo, hi));
                }
                out
            }
        }
    }
}

fn draw<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

fn evaluate(spec: &IcSamplerSpec, p: &IcParams, grid: &Grid1D) -> Result<StateField> {
    let g = |k: &str| p[k];
    match *spec {
        IcSamplerSpec::BurgersSine { .. } => {
            StateField::from_fn(*grid, 1, 0.0, |x| vec![g("alpha") + g("beta") * x.sin()])
        }
        IcSamplerSpec::DamBreak { .. } => StateField::from_fn(*grid, 2, 0.0, |x| {
            let (h, v) = if x <= g("x0") { (g("h_l"), g("v_l")) } else { (g("h_r"), g("v_r")) };
            vec![h, h * v]
        }),
        IcSamplerSpec::ShuOsher { x1, gamma, .. } => StateField::from_fn(*grid, 3, 0.0, |x| {
            let (rho, u, pr) = if x <= g("x0") {
                (g("rho_l"), g("u_l"), g("p_l"))
            } else {
                let wave = g("amplitude") * (5.0 * x).sin();
                let rho = if x <= x1 { 1.0 + wave } else { 1.0 + wave * (-(x - x1).powi(4)).exp() };
                (rho, 0.0, g("p_r"))
            };
            vec![rho, rho * u, pr / (gamma - 1.0) + 0.5 * rho * u * u]
        }),
    }
}

fn admissible(spec: &IcSamplerSpec, p: &IcParams) -> bool {
    match spec {
        IcSamplerSpec::BurgersSine { .. } => true,
        IcSamplerSpec::DamBreak { .. } => p["h_l"] > 0.0 && p["h_r"] > 0.0,
        IcSamplerSpec::ShuOsher { .. } => {
            p["rho_l"] > 0.0 && p["p_l"] > 0.0 && p["p_r"] > 0.0 && p["amplitude"].abs() < 1.0
        }
    }
}

/// Draws one initial condition and evaluates it at the cell centers.
///
/// Inadmissible draws are retried up to 100 times.
pub fn sample_ic<R: Rng + ?Sized>(spec: &IcSamplerSpec, grid: &Grid1D, rng: &mut R) -> Result<(StateField, IcParams)> {
    spec.validate()?;
    let (a, b) = spec.domain();
    if (grid.a() - a).abs() > 1e-12 || (grid.b() - b).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "grid ({}, {}) does not cover the sampler domain ({a}, {b})",
            grid.a(),
            grid.b()
        )));
    }
    for _ in 0..MAX_DRAWS {
        let params: IcParams =
            spec.supports().into_iter().map(|(name, lo, hi)| (name.to_string(), draw(rng, lo, hi))).collect();
        if admissible(spec, &params) {
            return Ok((evaluate(spec, &params, grid)?, params));
        }
    }
    Err(Error::invalid(format!("no admissible initial condition after {MAX_DRAWS} draws: {spec:?}")))
}

/// Evaluates a family at fixed parameter values (no sampling).
pub fn fixed_ic(spec: &IcSamplerSpec, grid: &Grid1D, params: &IcParams) -> Result<StateField> {
    for (name, _, _) in spec.supports() {
        if !params.contains_key(name) {
            return Err(Error::invalid(format!("missing initial-condition parameter '{name}'")));
        }
    }
    if !admissible(spec, params) {
        return Err(Error::Inadmissible(format!("initial-condition parameters {params:?}")));
    }
    evaluate(spec, params, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn degenerate_burgers_is_sine() {
        let g = Grid1D::new(0.0, 2.0 * PI, 64).unwrap();
        let (f, p) = sample_ic(&IcSamplerSpec::BurgersSine { eps_s: 0.0 }, &g, &mut rng()).unwrap();
        assert_eq!(p["alpha"], 0.0);
        assert_eq!(p["beta"], 1.0);
        for j in 0..64 {
            assert_eq!(f.values()[[0, j]], g.center(j).sin());
        }
    }

    #[test]
    fn degenerate_dam_break_uses_means() {
        let g = Grid1D::new(-5.0, 5.0, 100).unwrap();
        let spec = IcSamplerSpec::DamBreak { eps_hl: 0.0, eps_hr: 0.0, eps: 0.0 };
        let (f, _) = sample_ic(&spec, &g, &mut rng()).unwrap();
        for j in 0..100 {
            let h = if g.center(j) <= 0.0 { 2.0 } else { 1.0 };
            assert_eq!(f.values()[[0, j]], h);
            assert_eq!(f.values()[[1, j]], 0.0);
        }
    }

    #[test]
    fn degenerate_shu_osher_uses_means() {
        let g = Grid1D::new(-5.0, 5.0, 200).unwrap();
        let IcSamplerSpec::ShuOsher { amplitude, p_r, x1, gamma, .. } = IcSamplerSpec::shu_osher() else {
            unreachable!()
        };
        let spec = IcSamplerSpec::ShuOsher {
            rho_l: 3.857135,
            amplitude,
            p_l: 10.33333,
            p_r,
            u_l: 2.62936,
            x0: -4.0,
            x1,
            eps: 0.0,
            gamma,
        };
        let (f, p) = sample_ic(&spec, &g, &mut rng()).unwrap();
        assert_eq!(p["rho_l"], 3.857135);
        assert_eq!(p["p_l"], 10.33333);
        assert_eq!(p["u_l"], 2.62936);
        assert_eq!(p["x0"], -4.0);
        // first cell center -4.975 is left of the jump
        let (rho, mom, e) = (f.values()[[0, 0]], f.values()[[1, 0]], f.values()[[2, 0]]);
        assert_eq!(rho, 3.857135);
        assert!((mom - 3.857135 * 2.62936).abs() < 1e-12);
        assert!((e - (10.33333 / 0.4 + 0.5 * 3.857135 * 2.62936f64.powi(2))).abs() < 1e-12);
        // right of x1 the sine is damped by exp(-(x - x1)^4)
        let j = 199;
        let x = g.center(j);
        let expected = 1.0 + 0.2 * (5.0 * x).sin() * (-(x - 3.29867f64).powi(4)).exp();
        assert!((f.values()[[0, j]] - expected).abs() < 1e-15);
        assert!((f.values()[[2, j]] - 1.0 / 0.4).abs() < 1e-15);
    }

    #[test]
    fn wrong_domain_rejected() {
        let g = Grid1D::new(0.0, 1.0, 16).unwrap();
        assert!(sample_ic(&IcSamplerSpec::burgers_sine(), &g, &mut rng()).is_err());
    }

    #[test]
    fn inadmissible_spread_gives_up() {
        let g = Grid1D::new(-5.0, 5.0, 16).unwrap();
        let spec = IcSamplerSpec::DamBreak { eps_hl: 0.0, eps_hr: 0.0, eps: 0.0 };
        assert!(sample_ic(&spec, &g, &mut rng()).is_ok());
        // h_r in [-9, -7]: never admissible
        let spec = IcSamplerSpec::DamBreak { eps_hl: 0.2, eps_hr: -1.0, eps: 0.1 };
        assert!(sample_ic(&spec, &g, &mut rng()).is_err());
    }

    #[test]
    fn fixed_ic_requires_all_parameters() {
        let g = Grid1D::new(0.0, 2.0 * PI, 16).unwrap();
        let mut p = IcParams::new();
        p.insert("alpha".into(), 0.1);
        assert!(fixed_ic(&IcSamplerSpec::burgers_sine(), &g, &p).is_err());
        p.insert("beta".into(), 1.0);
        let f = fixed_ic(&IcSamplerSpec::burgers_sine(), &g, &p).unwrap();
        assert_eq!(f.values()[[0, 3]], 0.1 + g.center(3).sin());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn draws_stay_in_support(seed in any::<u64>(), which in 0usize..3) {
                let (spec, grid) = match which {
                    0 => (IcSamplerSpec::burgers_sine(), Grid1D::new(0.0, 2.0 * PI, 16).unwrap()),
                    1 => (IcSamplerSpec::dam_break(), Grid1D::new(-5.0, 5.0, 16).unwrap()),
                    _ => (IcSamplerSpec::shu_osher(), Grid1D::new(-5.0, 5.0, 16).unwrap()),
                };
                let (_, p) = sample_ic(&spec, &grid, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
                for (name, lo, hi) in spec.supports() {
                    prop_assert!(p[name] >= lo && p[name] <= hi, "{} = {} outside [{}, {}]", name, p[name], lo, hi);
                }
            }
        }
    }
}
