//! Parameter vectors for the three-stage process and its nested families.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Full parameter vector of the three-stage arrival process.
///
/// The intensity is a piecewise power law in the reverse time `1 - s/T`:
/// exponent `alpha1` on `[0, d1)`, `alpha2` on `[d1, T - d2)` and `alpha3`
/// on `[T - d2, T]`, joined continuously at both changepoints. `c` is the
/// rate in the middle stage at `s = 0` extrapolated, i.e. the scale of the
/// whole intensity.
///
/// Values are validated on construction and immutable afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct BaristaParams {
    alpha1: f64,
    alpha2: f64,
    alpha3: f64,
    d1: f64,
    d2: f64,
    c: f64,
    horizon: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    alpha1: f64,
    alpha2: f64,
    alpha3: f64,
    d1: f64,
    d2: f64,
    c: f64,
    horizon: f64,
}

impl TryFrom<RawParams> for BaristaParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        BaristaParams::new(r.alpha1, r.alpha2, r.alpha3, r.d1, r.d2, r.c, r.horizon)
    }
}

impl From<BaristaParams> for RawParams {
    fn from(p: BaristaParams) -> Self {
        RawParams {
            alpha1: p.alpha1,
            alpha2: p.alpha2,
            alpha3: p.alpha3,
            d1: p.d1,
            d2: p.d2,
            c: p.c,
            horizon: p.horizon,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl BaristaParams {
    pub fn new(
        alpha1: f64,
        alpha2: f64,
        alpha3: f64,
        d1: f64,
        d2: f64,
        c: f64,
        horizon: f64,
    ) -> Result<Self> {
        positive("alpha1", alpha1)?;
        positive("alpha2", alpha2)?;
        positive("alpha3", alpha3)?;
        positive("c", c)?;
        positive("horizon", horizon)?;
        if !(d1.is_finite() && d1 >= 0.0) {
            return Err(Error::InvalidParams(format!("d1 must be >= 0, got {d1}")));
        }
        if !(d2.is_finite() && d2 >= 0.0) {
            return Err(Error::InvalidParams(format!("d2 must be >= 0, got {d2}")));
        }
        if !(d1 < horizon - d2) {
            return Err(Error::InvalidParams(format!(
                "changepoints must satisfy d1 < T - d2 (d1 = {d1}, d2 = {d2}, T = {horizon})"
            )));
        }
        Ok(Self {
            alpha1,
            alpha2,
            alpha3,
            d1,
            d2,
            c,
            horizon,
        })
    }

    /// Homogeneous Poisson process with rate `c` on `[0, T]`.
    pub fn homogeneous(c: f64, horizon: f64) -> Result<Self> {
        Self::new(1.0, 1.0, 1.0, 0.0, 0.0, c, horizon)
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    pub fn alpha3(&self) -> f64 {
        self.alpha3
    }

    pub fn alphas(&self) -> [f64; 3] {
        [self.alpha1, self.alpha2, self.alpha3]
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    pub fn d2(&self) -> f64 {
        self.d2
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Start of the final stage, `T - d2`.
    pub fn final_stage_start(&self) -> f64 {
        self.horizon - self.d2
    }

    pub fn with_c(&self, c: f64) -> Result<Self> {
        Self::new(self.alpha1, self.alpha2, self.alpha3, self.d1, self.d2, c, self.horizon)
    }

    pub fn with_alphas(&self, alphas: [f64; 3]) -> Result<Self> {
        Self::new(alphas[0], alphas[1], alphas[2], self.d1, self.d2, self.c, self.horizon)
    }

    /// Stage (1, 2 or 3) that owns time `s`, using the half-open partition
    /// `[0, d1)`, `[d1, T - d2)`, `[T - d2, T]`. With `d2 = 0` the endpoint
    /// `T` belongs to stage 2.
    pub fn stage_of(&self, s: f64) -> u8 {
        if s < self.d1 {
            1
        } else if s < self.horizon - self.d2 || self.d2 == 0.0 {
            2
        } else {
            3
        }
    }
}

/// Which nested family a model belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    OneStage,
    TwoStage,
    ThreeStage,
}

impl FamilyKind {
    /// Number of free shape parameters (excluding `c`).
    pub fn shape_dim(self) -> usize {
        match self {
            FamilyKind::OneStage => 1,
            FamilyKind::TwoStage => 3,
            FamilyKind::ThreeStage => 5,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FamilyKind::OneStage => &["alpha"],
            FamilyKind::TwoStage => &["alpha2", "alpha3", "d2"],
            FamilyKind::ThreeStage => &["alpha1", "alpha2", "alpha3", "d1", "d2"],
        }
    }

    /// Next larger family in the nesting order.
    pub fn larger(self) -> Option<FamilyKind> {
        match self {
            FamilyKind::OneStage => Some(FamilyKind::TwoStage),
            FamilyKind::TwoStage => Some(FamilyKind::ThreeStage),
            FamilyKind::ThreeStage => None,
        }
    }

    /// Builds a family member from its free shape parameters (ordered as in
    /// [`FamilyKind::param_names`]).
    pub fn from_shape(self, shape: &[f64], c: f64, horizon: f64) -> Result<ModelFamily> {
        if shape.len() != self.shape_dim() {
            return Err(Error::InvalidParams(format!(
                "{self:?} takes {} shape parameters, got {}",
                self.shape_dim(),
                shape.len()
            )));
        }
        let family = match self {
            FamilyKind::OneStage => ModelFamily::OneStage {
                alpha: shape[0],
                c,
                horizon,
            },
            FamilyKind::TwoStage => ModelFamily::TwoStage {
                alpha2: shape[0],
                alpha3: shape[1],
                d2: shape[2],
                c,
                horizon,
            },
            FamilyKind::ThreeStage => ModelFamily::ThreeStage(BaristaParams::new(
                shape[0], shape[1], shape[2], shape[3], shape[4], c, horizon,
            )?),
        };
        family.as_barista()?;
        Ok(family)
    }
}

impl std::fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FamilyKind::OneStage => "one-stage",
            FamilyKind::TwoStage => "two-stage",
            FamilyKind::ThreeStage => "three-stage",
        })
    }
}

/// A member of one of the three nested families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ModelFamily {
    /// Single power law, `lambda(s) = c (1 - s/T)^(alpha - 1)`.
    OneStage { alpha: f64, c: f64, horizon: f64 },
    /// Power law `alpha2` switching to `alpha3` at `T - d2`.
    TwoStage {
        alpha2: f64,
        alpha3: f64,
        d2: f64,
        c: f64,
        horizon: f64,
    },
    ThreeStage(BaristaParams),
}

impl ModelFamily {
    pub fn kind(&self) -> FamilyKind {
        match self {
            ModelFamily::OneStage { .. } => FamilyKind::OneStage,
            ModelFamily::TwoStage { .. } => FamilyKind::TwoStage,
            ModelFamily::ThreeStage(_) => FamilyKind::ThreeStage,
        }
    }

    /// Embeds the family member into the full parameter space.
    pub fn as_barista(&self) -> Result<BaristaParams> {
        match *self {
            ModelFamily::OneStage { alpha, c, horizon } => {
                BaristaParams::new(alpha, alpha, alpha, 0.0, 0.0, c, horizon)
            }
            ModelFamily::TwoStage {
                alpha2,
                alpha3,
                d2,
                c,
                horizon,
            } => BaristaParams::new(alpha2, alpha2, alpha3, 0.0, d2, c, horizon),
            ModelFamily::ThreeStage(p) => Ok(p),
        }
    }

    /// Free shape parameters in [`FamilyKind::param_names`] order.
    pub fn shape(&self) -> Vec<f64> {
        match *self {
            ModelFamily::OneStage { alpha, .. } => vec![alpha],
            ModelFamily::TwoStage {
                alpha2, alpha3, d2, ..
            } => vec![alpha2, alpha3, d2],
            ModelFamily::ThreeStage(p) => vec![p.alpha1, p.alpha2, p.alpha3, p.d1, p.d2],
        }
    }

    pub fn c(&self) -> f64 {
        match *self {
            ModelFamily::OneStage { c, .. } | ModelFamily::TwoStage { c, .. } => c,
            ModelFamily::ThreeStage(p) => p.c,
        }
    }

    pub fn horizon(&self) -> f64 {
        match *self {
            ModelFamily::OneStage { horizon, .. } | ModelFamily::TwoStage { horizon, .. } => {
                horizon
            }
            ModelFamily::ThreeStage(p) => p.horizon,
        }
    }
}
