//! Piecewise-linear bundle models of the objective.
//!
//! A [`Bundle`] holds affine minorants ("cuts") of `f` and evaluates their
//! pointwise maximum. Four variants are supported:
//!
//! * `Polyak`: the cut at the newest point and a constant floor `ℓ_f`.
//! * `CuttingPlane`: the last `m` cuts, evicted first-in first-out.
//! * `PolyakCuttingPlane`: the cutting-plane window plus the permanent floor.
//! * `TwoCut`: the newest cut plus one aggregate cut that reproduces the
//!   previous model at the previous proximal point.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelVariant {
    Polyak,
    CuttingPlane,
    PolyakCuttingPlane,
    TwoCut,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 4] = [
        ModelVariant::Polyak,
        ModelVariant::CuttingPlane,
        ModelVariant::PolyakCuttingPlane,
        ModelVariant::TwoCut,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Self::Polyak => "polyak",
            Self::CuttingPlane => "cutting-plane",
            Self::PolyakCuttingPlane => "polyak-cutting-plane",
            Self::TwoCut => "two-cut",
        }
    }

    /// Whether the variant carries the constant floor cut `ℓ_f`.
    pub fn uses_floor(self) -> bool {
        matches!(self, Self::Polyak | Self::PolyakCuttingPlane)
    }

    /// Whether the capacity `m` affects the variant.
    pub fn uses_capacity(self) -> bool {
        matches!(self, Self::CuttingPlane | Self::PolyakCuttingPlane)
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.tag() == s)
            .ok_or_else(|| Error::Parse {
                what: "model variant",
                reason: format!("unknown tag {s:?}; expected one of polyak, cutting-plane, polyak-cutting-plane, two-cut"),
            })
    }
}

/// The affine function `x ↦ ⟨slope, x⟩ + intercept`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub slope: DVector<f64>,
    pub intercept: f64,
}

impl Cut {
    /// Linearization of `f` at `point`: `f(point) + ⟨grad, x − point⟩`.
    pub fn at(point: &DVector<f64>, value: f64, grad: &DVector<f64>) -> Self {
        Self {
            intercept: value - grad.dot(point),
            slope: grad.clone(),
        }
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        self.slope.dot(x) + self.intercept
    }
}

/// Stable identity of a cut inside a bundle, used to carry dual weights across updates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CutId {
    Floor,
    Serial(u64),
}

/// The previous proximal step `point = argmin model + ‖x − center‖²/(2·step)`.
#[derive(Clone, Copy, Debug)]
pub struct ProxStep<'a> {
    pub center: &'a DVector<f64>,
    pub point: &'a DVector<f64>,
    pub step: f64,
}

#[derive(Clone, Debug)]
pub struct Bundle {
    variant: ModelVariant,
    capacity: usize,
    floor: Option<f64>,
    cuts: VecDeque<(u64, Cut)>,
    next_serial: u64,
    dim: Option<usize>,
    newest_is_current: bool,
}

impl Bundle {
    /// Empty bundle. `floor` must be present exactly for the floor variants.
    pub fn new(variant: ModelVariant, capacity: usize, floor: Option<f64>) -> Result<Self> {
        if capacity < 1 {
            return Err(invalid("m", "bundle capacity must be at least 1"));
        }
        match (variant.uses_floor(), floor) {
            (true, None) => return Err(invalid("floor", format!("the {variant} model requires a floor"))),
            (false, Some(_)) => return Err(invalid("floor", format!("the {variant} model does not use a floor"))),
            (true, Some(v)) if !v.is_finite() => return Err(invalid("floor", "must be finite")),
            _ => {}
        }
        Ok(Self {
            variant,
            capacity,
            floor,
            cuts: VecDeque::with_capacity(capacity.min(64) + 1),
            next_serial: 0,
            dim: None,
            newest_is_current: false,
        })
    }

    pub fn variant(&self) -> ModelVariant {
        self.variant
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn floor(&self) -> Option<f64> {
        self.floor
    }

    /// Number of affine pieces, floor included.
    pub fn len(&self) -> usize {
        self.cuts.len() + usize::from(self.floor.is_some() && !self.cuts.is_empty())
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    /// True between an update and the next [`Bundle::mark_stale`].
    pub fn newest_is_current(&self) -> bool {
        self.newest_is_current
    }

    /// Records that the solver has moved its anchor point past the newest cut.
    pub fn mark_stale(&mut self) {
        self.newest_is_current = false;
    }

    /// Cuts in export order; the floor (zero slope, intercept `ℓ_f`) comes last.
    pub fn cuts(&self) -> impl Iterator<Item = (CutId, Cut)> + '_ {
        let dim = self.dim.unwrap_or(0);
        let floor = if self.cuts.is_empty() { None } else { self.floor };
        self.cuts
            .iter()
            .map(|(id, cut)| (CutId::Serial(*id), cut.clone()))
            .chain(floor.map(|b| {
                (
                    CutId::Floor,
                    Cut {
                        slope: DVector::zeros(dim),
                        intercept: b,
                    },
                )
            }))
    }

    pub fn cut_ids(&self) -> Vec<CutId> {
        let mut ids: Vec<CutId> = self.cuts.iter().map(|(id, _)| CutId::Serial(*id)).collect();
        if self.floor.is_some() && !self.cuts.is_empty() {
            ids.push(CutId::Floor);
        }
        ids
    }

    /// Adds the linearization at `point` and applies the variant's retention rule.
    ///
    /// The two-cut variant needs `prev` on every update after the first.
    pub fn update(
        &mut self,
        point: &DVector<f64>,
        value: f64,
        grad: &DVector<f64>,
        prev: Option<ProxStep<'_>>,
    ) -> Result<()> {
        let dim = *self.dim.get_or_insert(point.len());
        for len in [point.len(), grad.len()] {
            if len != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: len,
                });
            }
        }
        let cut = Cut::at(point, value, grad);
        match self.variant {
            ModelVariant::Polyak => {
                self.cuts.clear();
                self.push(cut);
            }
            ModelVariant::CuttingPlane | ModelVariant::PolyakCuttingPlane => {
                self.push(cut);
                while self.cuts.len() > self.capacity {
                    self.cuts.pop_front();
                }
            }
            ModelVariant::TwoCut => {
                if self.cuts.is_empty() {
                    self.push(cut);
                } else {
                    let prev = prev.ok_or(Error::MissingProxInfo)?;
                    if prev.center.len() != dim || prev.point.len() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            actual: prev.point.len().min(prev.center.len()),
                        });
                    }
                    if !(prev.step > 0.0) {
                        return Err(invalid("step", "proximal step must be positive"));
                    }
                    let slope = (prev.center - prev.point) / prev.step;
                    let level = self.eval(prev.point)?;
                    let aggregate = Cut {
                        intercept: level - slope.dot(prev.point),
                        slope,
                    };
                    self.cuts.clear();
                    self.push(aggregate);
                    self.push(cut);
                }
            }
        }
        self.newest_is_current = true;
        Ok(())
    }

    fn push(&mut self, cut: Cut) {
        self.cuts.push_back((self.next_serial, cut));
        self.next_serial += 1;
    }

    /// Model value: the maximum over all cuts, floor included.
    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        if self.cuts.is_empty() {
            return Err(Error::EmptyBundle);
        }
        let best = self
            .cuts
            .iter()
            .map(|(_, cut)| cut.eval(x))
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(match self.floor {
            Some(floor) => best.max(floor),
            None => best,
        })
    }

    /// Stacks the cuts as `(A, b)` with one row per cut, floor last.
    pub fn export_qp(&self) -> Result<(DMatrix<f64>, DVector<f64>)> {
        if self.cuts.is_empty() {
            return Err(Error::EmptyBundle);
        }
        let dim = self.dim.unwrap_or(0);
        let rows = self.len();
        let mut a = DMatrix::zeros(rows, dim);
        let mut b = DVector::zeros(rows);
        for (i, (_, cut)) in self.cuts.iter().enumerate() {
            a.row_mut(i).tr_copy_from(&cut.slope);
            b[i] = cut.intercept;
        }
        if let Some(floor) = self.floor {
            b[rows - 1] = floor;
        }
        Ok((a, b))
    }
}
