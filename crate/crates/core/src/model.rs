//! Affine switched model of the totem-pole bridgeless rectifier.
//!
//! The converter state is `x = [i_L_B, v_C_o]'`. Four operating modes exist
//! depending on the gate commands and the sign of the input voltage; each is
//! an affine system `dx/dt = A_i x + b_i`. Modes 1 and 2 cover the positive
//! half-cycle, modes 3 and 4 the negative one.

use nalgebra::{Matrix2, Vector2};
use thiserror::Error;

use crate::{Mat2, Vec2};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid mode index {0}, expected 1..=4")]
    InvalidModeIndex(u8),
    #[error("load resistance must be positive, got {0}")]
    NonPositiveLoad(f64),
    #[error("input voltage {v_in} inconsistent with {polarity:?} polarity")]
    PolaritySignMismatch { v_in: f64, polarity: Polarity },
    #[error("converter parameter {name} must be positive, got {value}")]
    NonPositiveParam { name: &'static str, value: f64 },
    #[error("power bounds must satisfy p_o_min < p_o_max ({min} >= {max})")]
    PowerBoundsOrder { min: f64, max: f64 },
    #[error("rms voltage levels must be ordered min <= nom <= max")]
    RmsOrder,
    #[error("output voltage {v_o} does not satisfy the boost condition v_o > sqrt(2)*v_rms_max = {limit}")]
    BoostCondition { v_o: f64, limit: f64 },
    #[error("uncertainty range {name} is empty: [{lo}, {hi}]")]
    EmptyRange { name: &'static str, lo: f64, hi: f64 },
    #[error("equilibrium voltage must be positive, got {0}")]
    NonPositiveEquilibriumVoltage(f64),
}

/// Sign of the grid half-cycle the converter is operating in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
        }
    }

    /// Mode pair for this half-cycle: conducting-switch mode first,
    /// both-switches-off mode second.
    pub fn mode_pair(self) -> (Mode, Mode) {
        match self {
            Polarity::Positive => (Mode::M1, Mode::M2),
            Polarity::Negative => (Mode::M3, Mode::M4),
        }
    }

    pub fn opposite(self) -> Polarity {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

/// One of the four operating modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Mode {
    M1,
    M2,
    M3,
    M4,
}

impl Mode {
    pub fn index(self) -> u8 {
        match self {
            Mode::M1 => 1,
            Mode::M2 => 2,
            Mode::M3 => 3,
            Mode::M4 => 4,
        }
    }

    pub fn from_index(index: u8) -> Result<Mode, ModelError> {
        match index {
            1 => Ok(Mode::M1),
            2 => Ok(Mode::M2),
            3 => Ok(Mode::M3),
            4 => Ok(Mode::M4),
            other => Err(ModelError::InvalidModeIndex(other)),
        }
    }

    /// Half-cycle this mode belongs to.
    pub fn polarity(self) -> Polarity {
        match self {
            Mode::M1 | Mode::M2 => Polarity::Positive,
            Mode::M3 | Mode::M4 => Polarity::Negative,
        }
    }

    /// True for the modes where both switches are commanded off and the
    /// inductor feeds the output through diodes.
    pub fn is_all_off(self) -> bool {
        matches!(self, Mode::M2 | Mode::M4)
    }
}

/// Physical design point of the converter.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConverterParams {
    /// Boost inductance (H).
    pub l_b: f64,
    /// Boost inductor series resistance (ohm).
    pub r_b: f64,
    /// Output capacitance (F).
    pub c_o: f64,
    /// Target output voltage (V).
    pub v_o: f64,
    /// Minimum output power (W).
    pub p_o_min: f64,
    /// Maximum output power (W).
    pub p_o_max: f64,
    /// Minimum RMS input voltage (V).
    pub v_rms_min: f64,
    /// Nominal RMS input voltage (V).
    pub v_rms_nom: f64,
    /// Maximum RMS input voltage (V).
    pub v_rms_max: f64,
    /// Line frequency (Hz).
    pub f_r: f64,
    /// Switching frequency the rule is designed for (Hz).
    pub f_s: f64,
}

impl ConverterParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("l_b", self.l_b),
            ("r_b", self.r_b),
            ("c_o", self.c_o),
            ("v_o", self.v_o),
            ("p_o_min", self.p_o_min),
            ("p_o_max", self.p_o_max),
            ("v_rms_min", self.v_rms_min),
            ("v_rms_nom", self.v_rms_nom),
            ("v_rms_max", self.v_rms_max),
            ("f_r", self.f_r),
            ("f_s", self.f_s),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ModelError::NonPositiveParam { name, value });
            }
        }
        if self.p_o_min >= self.p_o_max {
            return Err(ModelError::PowerBoundsOrder {
                min: self.p_o_min,
                max: self.p_o_max,
            });
        }
        if !(self.v_rms_min <= self.v_rms_nom && self.v_rms_nom <= self.v_rms_max) {
            return Err(ModelError::RmsOrder);
        }
        let limit = std::f64::consts::SQRT_2 * self.v_rms_max;
        if self.v_o <= limit {
            return Err(ModelError::BoostCondition { v_o: self.v_o, limit });
        }
        Ok(())
    }

    /// The 300 W universal-input design used throughout the test suite
    /// (household refrigeration class).
    pub fn design_300w() -> ConverterParams {
        ConverterParams {
            l_b: 2.4e-3,
            r_b: 0.42,
            c_o: 270e-6,
            v_o: 380.0,
            p_o_min: 25.0,
            p_o_max: 300.0,
            v_rms_min: 85.0,
            v_rms_nom: 120.0,
            v_rms_max: 250.0,
            f_r: 60.0,
            f_s: 64.8e3,
        }
    }

    /// Peak of the inductor-current envelope: `sqrt(2) * p_o_max / v_rms_min`.
    pub fn peak_current(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.p_o_max / self.v_rms_min
    }

    /// Peak of the input-voltage envelope: `sqrt(2) * v_rms_max`.
    pub fn peak_voltage(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.v_rms_max
    }
}

/// One affine operating mode `dx/dt = A x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMode {
    pub index: Mode,
    pub a: Mat2,
    pub b: Vec2,
}

/// The two modes of one grid half-cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfCycleModel {
    pub polarity: Polarity,
    /// Conducting-switch mode first, both-off mode second.
    pub modes: [AffineMode; 2],
}

/// Desired operating point for the tracking error `e = x - x_eq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumPoint {
    pub i_eq: f64,
    pub v_eq: f64,
}

impl EquilibriumPoint {
    pub fn new(i_eq: f64, v_eq: f64) -> Result<EquilibriumPoint, ModelError> {
        if !(v_eq > 0.0) {
            return Err(ModelError::NonPositiveEquilibriumVoltage(v_eq));
        }
        Ok(EquilibriumPoint { i_eq, v_eq })
    }

    pub fn as_vector(&self) -> Vec2 {
        Vector2::new(self.i_eq, self.v_eq)
    }
}

/// Build the state matrices of one mode.
///
/// Diagonal entries are `-r_b/l_b` and `-1/(r_l c_o)` in every mode. The
/// off-diagonal coupling is `(-1/l_b, +1/c_o)` in mode 2, negated in mode 4,
/// and zero in modes 1 and 3. The input enters as `b = [v_in/l_b, 0]`.
pub fn build_mode(
    index: Mode,
    params: &ConverterParams,
    v_in: f64,
    r_l: f64,
) -> Result<AffineMode, ModelError> {
    if !(r_l > 0.0) {
        return Err(ModelError::NonPositiveLoad(r_l));
    }
    let a11 = -params.r_b / params.l_b;
    let a22 = -1.0 / (r_l * params.c_o);
    let (a12, a21) = match index {
        Mode::M1 | Mode::M3 => (0.0, 0.0),
        Mode::M2 => (-1.0 / params.l_b, 1.0 / params.c_o),
        Mode::M4 => (1.0 / params.l_b, -1.0 / params.c_o),
    };
    Ok(AffineMode {
        index,
        a: Matrix2::new(a11, a12, a21, a22),
        b: Vector2::new(v_in / params.l_b, 0.0),
    })
}

/// Build both modes of a half-cycle. `v_in` is signed and must match the
/// polarity (zero is admissible for either).
pub fn half_cycle_model(
    polarity: Polarity,
    params: &ConverterParams,
    v_in: f64,
    r_l: f64,
) -> Result<HalfCycleModel, ModelError> {
    if v_in * polarity.sign() < 0.0 {
        return Err(ModelError::PolaritySignMismatch { v_in, polarity });
    }
    let (first, second) = polarity.mode_pair();
    Ok(HalfCycleModel {
        polarity,
        modes: [
            build_mode(first, params, v_in, r_l)?,
            build_mode(second, params, v_in, r_l)?,
        ],
    })
}

/// Shift a mode to tracking-error coordinates: `de/dt = A e + k` with
/// `k = b + A x_eq`.
pub fn error_dynamics(mode: &AffineMode, x_eq: &EquilibriumPoint) -> (Mat2, Vec2) {
    let k = mode.b + mode.a * x_eq.as_vector();
    (mode.a, k)
}

/// Extreme values of the equilibrium inductor current for one polarity:
/// `(0, +sqrt(2) p_o_max / v_rms_min)` on the positive half-cycle, sign
/// mirrored on the negative one.
pub fn current_vertices(params: &ConverterParams, polarity: Polarity) -> (f64, f64) {
    (0.0, polarity.sign() * params.peak_current())
}

/// Load-resistance interval implied by the power rating: `(v_o^2/p_o_max,
/// v_o^2/p_o_min)`, ascending.
pub fn load_range(params: &ConverterParams) -> (f64, f64) {
    let v2 = params.v_o * params.v_o;
    (v2 / params.p_o_max, v2 / params.p_o_min)
}

/// Axis-aligned uncertainty box spanned by load resistance, equilibrium
/// current and instantaneous input voltage.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyBox {
    pub r_l_range: (f64, f64),
    pub i_eq_range: (f64, f64),
    pub v_in_range: (f64, f64),
}

/// One corner of the uncertainty box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaVertex {
    pub r_l: f64,
    pub i_eq: f64,
    pub v_in: f64,
}

impl UncertaintyBox {
    pub fn new(
        r_l_range: (f64, f64),
        i_eq_range: (f64, f64),
        v_in_range: (f64, f64),
    ) -> Result<UncertaintyBox, ModelError> {
        for (name, (lo, hi)) in [
            ("r_l_range", r_l_range),
            ("i_eq_range", i_eq_range),
            ("v_in_range", v_in_range),
        ] {
            if !(lo <= hi) {
                return Err(ModelError::EmptyRange { name, lo, hi });
            }
        }
        if !(r_l_range.0 > 0.0) {
            return Err(ModelError::NonPositiveLoad(r_l_range.0));
        }
        Ok(UncertaintyBox {
            r_l_range,
            i_eq_range,
            v_in_range,
        })
    }

    /// The synthesis box for one polarity: full load range, current from
    /// zero to the signed peak, input voltage from zero to the signed peak
    /// of the maximum RMS level.
    pub fn for_polarity(
        params: &ConverterParams,
        polarity: Polarity,
    ) -> Result<UncertaintyBox, ModelError> {
        let (i_lo, i_hi) = current_vertices(params, polarity);
        let v_pk = polarity.sign() * params.peak_voltage();
        let sorted = |a: f64, b: f64| if a <= b { (a, b) } else { (b, a) };
        UncertaintyBox::new(load_range(params), sorted(i_lo, i_hi), sorted(0.0, v_pk))
    }

    /// Cartesian product of the range endpoints. Degenerate axes (lower ==
    /// upper) contribute a single value, so the vertex count is 2^d with d
    /// the number of non-degenerate axes.
    pub fn enumerate_delta_vertices(&self) -> Vec<DeltaVertex> {
        let endpoints = |(lo, hi): (f64, f64)| {
            if lo == hi {
                vec![lo]
            } else {
                vec![lo, hi]
            }
        };
        let mut vertices = Vec::new();
        for &r_l in &endpoints(self.r_l_range) {
            for &i_eq in &endpoints(self.i_eq_range) {
                for &v_in in &endpoints(self.v_in_range) {
                    vertices.push(DeltaVertex { r_l, i_eq, v_in });
                }
            }
        }
        vertices
    }
}
