use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Discretization of the nonlinear term. Every form is written as
/// `b(u, v, w) = (n(u, v), w)` with `u` advecting and `n` bilinear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NonlinearForm {
    /// `(u.grad v, w)`
    Convective,
    /// `(u.grad v, w) + 1/2 ((div u) v, w)`
    Skew,
    /// `((curl u) x v, w)`
    Rotational,
    /// `(grad v u + grad v^T u, w) + ((div u) v, w)`
    Emac,
}

impl NonlinearForm {
    pub const ALL: [NonlinearForm; 4] = [Self::Convective, Self::Skew, Self::Rotational, Self::Emac];

    pub fn name(self) -> &'static str {
        match self {
            Self::Convective => "convective",
            Self::Skew => "skew",
            Self::Rotational => "rotational",
            Self::Emac => "emac",
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(c: u8) -> Option<Self> {
        Self::ALL.get(c as usize).copied()
    }

    /// `n(u, v)` at a point; `gu[a][b] = d u_a / d x_b`.
    #[inline]
    pub fn flux(self, u: [f64; 2], gu: &[[f64; 2]; 2], v: [f64; 2], gv: &[[f64; 2]; 2]) -> [f64; 2] {
        let adv = [gv[0][0] * u[0] + gv[0][1] * u[1], gv[1][0] * u[0] + gv[1][1] * u[1]];
        match self {
            Self::Convective => adv,
            Self::Skew => {
                let h = 0.5 * (gu[0][0] + gu[1][1]);
                [adv[0] + h * v[0], adv[1] + h * v[1]]
            }
            Self::Rotational => {
                let w = gu[1][0] - gu[0][1];
                [-w * v[1], w * v[0]]
            }
            Self::Emac => {
                let div = gu[0][0] + gu[1][1];
                [
                    adv[0] + gv[0][0] * u[0] + gv[1][0] * u[1] + div * v[0],
                    adv[1] + gv[0][1] * u[0] + gv[1][1] * u[1] + div * v[1],
                ]
            }
        }
    }
}

impl fmt::Display for NonlinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NonlinearForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown form '{s}' (expected convective, skew, rotational or emac)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for f in NonlinearForm::ALL {
            assert_eq!(f.name().parse::<NonlinearForm>().unwrap(), f);
            assert_eq!(NonlinearForm::from_code(f.code()), Some(f));
        }
        assert!("Skew".parse::<NonlinearForm>().is_err());
        assert!("divergence".parse::<NonlinearForm>().is_err());
    }

    #[test]
    fn rotational_flux_is_orthogonal_to_second_argument() {
        let gu = [[0.3, -1.2], [0.7, 2.0]];
        let v = [0.4, -0.9];
        let n = NonlinearForm::Rotational.flux([1.0, 2.0], &gu, v, &[[0.0; 2]; 2]);
        assert!((n[0] * v[0] + n[1] * v[1]).abs() < 1e-16);
    }
}
