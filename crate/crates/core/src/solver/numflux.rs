//! Two-point numerical fluxes for first-order Godunov-type schemes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{physical_flux, primitive, SystemSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericalFlux {
    /// Engquist-Osher splitting, Burgers only.
    EngquistOsher,
    /// HLL with Einfeldt (Roe-averaged) wave-speed bounds.
    Hlle,
}

impl NumericalFlux {
    pub fn check_compatible(self, sys: SystemSpec) -> Result<()> {
        match (self, sys) {
            (NumericalFlux::EngquistOsher, SystemSpec::Burgers) | (NumericalFlux::Hlle, _) => Ok(()),
            (NumericalFlux::EngquistOsher, other) => Err(Error::invalid(format!(
                "Engquist-Osher flux is only defined for Burgers, not {}",
                other.name()
            ))),
        }
    }

    /// Default flux for generating reference data of a system.
    pub fn default_for(sys: SystemSpec) -> Self {
        match sys {
            SystemSpec::Burgers => NumericalFlux::EngquistOsher,
            _ => NumericalFlux::Hlle,
        }
    }

    pub fn eval(self, left: &[f64], right: &[f64], sys: SystemSpec) -> Result<Vec<f64>> {
        match self {
            NumericalFlux::EngquistOsher => {
                self.check_compatible(sys)?;
                Ok(vec![engquist_osher_flux(left[0], right[0])])
            }
            NumericalFlux::Hlle => hlle_flux(left, right, sys),
        }
    }
}

/// Engquist-Osher flux for `f(u) = u^2/2`.
pub fn engquist_osher_flux(u_left: f64, u_right: f64) -> f64 {
    let up = u_left.max(0.0);
    let um = u_right.min(0.0);
    0.5 * up * up + 0.5 * um * um
}

/// Slowest and fastest characteristic speeds of the Roe-averaged state.
fn roe_speeds(left: &[f64], right: &[f64], sys: SystemSpec) -> Result<(f64, f64)> {
    match sys {
        SystemSpec::Burgers => {
            let u = 0.5 * (left[0] + right[0]);
            Ok((u, u))
        }
        SystemSpec::ShallowWater { g } => {
            let (sl, sr) = (left[0].sqrt(), right[0].sqrt());
            let u = (sl * left[1] / left[0] + sr * right[1] / right[0]) / (sl + sr);
            let c = (0.5 * g * (left[0] + right[0])).sqrt();
            Ok((u - c, u + c))
        }
        SystemSpec::Euler { gamma } => {
            let enthalpy = |w: &[f64]| -> Result<f64> {
                let p = (gamma - 1.0) * (w[2] - 0.5 * w[1] * w[1] / w[0]);
                Ok((w[2] + p) / w[0])
            };
            let (sl, sr) = (left[0].sqrt(), right[0].sqrt());
            let u = (sl * left[1] / left[0] + sr * right[1] / right[0]) / (sl + sr);
            let h = (sl * enthalpy(left)? + sr * enthalpy(right)?) / (sl + sr);
            let c2 = (gamma - 1.0) * (h - 0.5 * u * u);
            if !(c2 > 0.0) {
                return Err(Error::Inadmissible(format!("Roe-averaged sound speed squared {c2} <= 0")));
            }
            let c = c2.sqrt();
            Ok((u - c, u + c))
        }
    }
}

/// HLLE flux between `left` and `right` states.
pub fn hlle_flux(left: &[f64], right: &[f64], sys: SystemSpec) -> Result<Vec<f64>> {
    let pl = primitive(left, sys)?;
    let pr = primitive(right, sys)?;
    let (roe_min, roe_max) = roe_speeds(left, right, sys)?;
    let s_left = (pl.velocity - pl.sound_speed).min(roe_min);
    let s_right = (pr.velocity + pr.sound_speed).max(roe_max);

    if s_left >= 0.0 {
        return physical_flux(left, sys);
    }
    if s_right <= 0.0 {
        return physical_flux(right, sys);
    }
    let fl = physical_flux(left, sys)?;
    let fr = physical_flux(right, sys)?;
    let inv = 1.0 / (s_right - s_left);
    Ok((0..left.len())
        .map(|c| (s_right * fl[c] - s_left * fr[c] + s_left * s_right * (right[c] - left[c])) * inv)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn engquist_osher_cases() {
        assert_eq!(engquist_osher_flux(1.0, 2.0), 0.5);
        assert_eq!(engquist_osher_flux(-1.0, 2.0), 0.0);
        assert_eq!(engquist_osher_flux(2.0, -1.0), 2.5);
        assert_eq!(engquist_osher_flux(-2.0, -3.0), 4.5);
    }

    /// Hand evaluation of the HLLE formula for the SWE dam-break pair
    /// (h, hv) = (2, 0) | (1, 0) with g = 1:
    ///   s_L = min(0 - sqrt(2), 0 - sqrt(1.5)) = -sqrt(2)
    ///   s_R = max(0 + 1, 0 + sqrt(1.5)) = sqrt(1.5)
    ///   f(L) = (0, 2), f(R) = (0, 0.5)
    ///   F = (s_R f(L) - s_L f(R) + s_L s_R (R - L)) / (s_R - s_L)
    #[test]
    fn hlle_swe_dam_break_pair() {
        let sys = SystemSpec::shallow_water(1.0).unwrap();
        let f = hlle_flux(&[2.0, 0.0], &[1.0, 0.0], sys).unwrap();
        let sl = -(2.0f64).sqrt();
        let sr = (1.5f64).sqrt();
        let expected_h = (sl * sr * (1.0 - 2.0)) / (sr - sl);
        let expected_hv = (sr * 2.0 - sl * 0.5) / (sr - sl);
        assert!((expected_h - 0.656338798447071).abs() < 1e-15);
        assert!((expected_hv - 1.1961524227066316).abs() < 1e-15);
        assert!((f[0] - expected_h).abs() < 1e-14);
        assert!((f[1] - expected_hv).abs() < 1e-14);
    }

    #[test]
    fn hlle_is_consistent() {
        let eul = SystemSpec::euler(1.4).unwrap();
        let f = hlle_flux(&[1.0, 0.0, 2.5], &[1.0, 0.0, 2.5], eul).unwrap();
        assert!(f[0].abs() < 1e-14 && (f[1] - 1.0).abs() < 1e-14 && f[2].abs() < 1e-14);
        for w in [[1.0, 0.7, 3.1], [0.4, -0.3, 1.2], [3.857, 10.14, 39.17]] {
            let f = hlle_flux(&w, &w, eul).unwrap();
            let exact = physical_flux(&w, eul).unwrap();
            for c in 0..3 {
                assert!((f[c] - exact[c]).abs() <= 1e-14 * exact[c].abs().max(1.0));
            }
        }
        let swe = SystemSpec::shallow_water(1.0).unwrap();
        for w in [[2.0, 0.3], [1.1, -0.2], [0.5, 2.0]] {
            let f = hlle_flux(&w, &w, swe).unwrap();
            let exact = physical_flux(&w, swe).unwrap();
            for c in 0..2 {
                assert!((f[c] - exact[c]).abs() <= 1e-14 * exact[c].abs().max(1.0));
            }
        }
        for u in [-1.3, 0.0, 0.4] {
            assert_eq!(engquist_osher_flux(u, u), 0.5 * u * u);
            assert!((hlle_flux(&[u], &[u], SystemSpec::Burgers).unwrap()[0] - 0.5 * u * u).abs() < 1e-14);
        }
    }

    #[test]
    fn eo_rejected_for_systems() {
        let swe = SystemSpec::shallow_water(1.0).unwrap();
        assert!(NumericalFlux::EngquistOsher.eval(&[1.0, 0.0], &[1.0, 0.0], swe).is_err());
    }

    #[test]
    fn hlle_rejects_vacuum() {
        let swe = SystemSpec::shallow_water(1.0).unwrap();
        assert!(matches!(hlle_flux(&[0.0, 0.0], &[1.0, 0.0], swe), Err(Error::Inadmissible(_))));
    }
}
