//! Named initial-data recipes, one per branch of the decay dichotomy.

use crate::error::{Error, Result};
use crate::model::{InitialData, Profile};

/// Offset of the bumps from the point mass; far enough that the data vanish near `x = 0`.
pub const OFFSET: f64 = 5.0;
pub const WIDTH: f64 = 0.5;

pub const NAMES: [&str; 7] =
    ["equilibrium", "gaussian-momentum", "zero-mass-momentum", "antisymmetric", "mirror-symmetric", "generic", "generic-flipped"];

fn g(amp: f64, center: f64) -> Profile {
    Profile::Gaussian { amp, center, width: WIDTH }
}

fn dg(amp: f64, center: f64) -> Profile {
    Profile::DGaussian { amp, center, width: WIDTH }
}

/// Builds the named scenario with perturbation amplitude `amp`.
///
/// * `generic`: `u0 = A G`, `v0-1 = -A/2 G`, so `M1² > M2²`.
/// * `generic-flipped`: same with `v0-1 = +A/2 G`, so `M1² < M2²`.
/// * `gaussian-momentum`, `zero-mass-momentum`: `∫(v0-1) = 0`, `M1 = M2`.
/// * `antisymmetric`: `∫u0 = 0`, `M1 = -M2`.
/// * `mirror-symmetric`: `v0-1` even and `u0` odd, so `V ≡ 0`.
pub fn build(name: &str, amp: f64) -> Result<InitialData> {
    let x0 = OFFSET;
    let d = match name {
        "equilibrium" => InitialData::equilibrium(),
        "gaussian-momentum" => InitialData { v0_pert: Profile::Zero, u0: g(amp, x0), v0_mass: 0.0 },
        "zero-mass-momentum" => InitialData { v0_pert: dg(amp, x0), u0: g(amp, x0), v0_mass: 0.0 },
        "antisymmetric" => InitialData { v0_pert: g(amp, x0), u0: dg(amp, x0), v0_mass: 0.0 },
        "mirror-symmetric" => InitialData {
            v0_pert: Profile::Sum(vec![g(amp, -x0), g(amp, x0)]),
            u0: Profile::Sum(vec![g(-amp, -x0), g(amp, x0)]),
            v0_mass: 0.0,
        },
        "generic" => InitialData { v0_pert: g(-0.5 * amp, x0), u0: g(amp, x0), v0_mass: 0.0 },
        "generic-flipped" => InitialData { v0_pert: g(0.5 * amp, x0), u0: g(amp, x0), v0_mass: 0.0 },
        _ => {
            return Err(Error::Config(format!("unknown scenario '{name}'; known: {}", NAMES.join(", "))));
        }
    };
    Ok(d)
}

/// Radius outside of which the scenario data vanish.
pub fn radius(name: &str) -> f64 {
    if name == "equilibrium" {
        0.0
    } else {
        OFFSET + 10.0 * WIDTH
    }
}
