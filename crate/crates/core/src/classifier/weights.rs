//! Per-state observation weights, as integer percentages.

use core::fmt;

use crate::odm::OperationalState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightColumn {
    T,
    S,
    SL,
    SLS,
    RoA,
    ES,
    PI,
}

impl WeightColumn {
    pub const ALL: [WeightColumn; 7] = [
        WeightColumn::T,
        WeightColumn::S,
        WeightColumn::SL,
        WeightColumn::SLS,
        WeightColumn::RoA,
        WeightColumn::ES,
        WeightColumn::PI,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WeightColumn::T => "T",
            WeightColumn::S => "S",
            WeightColumn::SL => "SL",
            WeightColumn::SLS => "SLS",
            WeightColumn::RoA => "RoA",
            WeightColumn::ES => "ES",
            WeightColumn::PI => "PI",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeightError {
    MissingState(OperationalState),
    MissingColumn(OperationalState, WeightColumn),
    Negative {
        state: OperationalState,
        column: WeightColumn,
        value: i64,
    },
    TooLarge {
        state: OperationalState,
        column: WeightColumn,
        value: i64,
    },
}

impl fmt::Display for WeightError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightError::MissingState(s) => write!(f, "{s}: state missing from weight table"),
            WeightError::MissingColumn(s, c) => write!(f, "{s}.{}: weight missing", c.name()),
            WeightError::Negative {
                state,
                column,
                value,
            } => {
                write!(
                    f,
                    "{state}.{}: weight must be >= 0 (got {value})",
                    column.name()
                )
            }
            WeightError::TooLarge {
                state,
                column,
                value,
            } => {
                write!(
                    f,
                    "{state}.{}: weight {value} exceeds {}",
                    column.name(),
                    WeightTable::MAX_WEIGHT
                )
            }
        }
    }
}

impl core::error::Error for WeightError {}

/// `w_O` for every (state, observation) pair. 100 means the feature's
/// likelihood enters at full strength, 0 removes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeightTable {
    weights: [[u32; 7]; 5],
}

impl Default for WeightTable {
    fn default() -> Self {
        Self::hand_tuned()
    }
}

impl WeightTable {
    pub const MAX_WEIGHT: u32 = 100_000;

    /// The hand-tuned defaults.
    pub const fn hand_tuned() -> Self {
        //                T    S    SL   SLS  RoA  ES   PI
        Self {
            weights: [
                [135, 150, 150, 0, 10, 0, 0],   // Cruise
                [0, 0, 0, 200, 0, 0, 200],      // AWS
                [0, 0, 0, 0, 0, 200, 0],        // Engine_Check
                [10, 150, 150, 50, 150, 0, 50], // Brake_Change
                [10, 150, 150, 50, 150, 0, 50], // Speed_Change
            ],
        }
    }

    pub const fn uniform() -> Self {
        Self {
            weights: [[100; 7]; 5],
        }
    }

    pub fn get(&self, state: OperationalState, column: WeightColumn) -> u32 {
        self.weights[state.index()][column as usize]
    }

    pub fn row(&self, state: OperationalState) -> [u32; 7] {
        self.weights[state.index()]
    }

    pub fn set(
        &mut self,
        state: OperationalState,
        column: WeightColumn,
        value: i64,
    ) -> Result<(), WeightError> {
        let v = Self::check(state, column, value)?;
        self.weights[state.index()][column as usize] = v;
        Ok(())
    }

    fn check(
        state: OperationalState,
        column: WeightColumn,
        value: i64,
    ) -> Result<u32, WeightError> {
        if value < 0 {
            Err(WeightError::Negative {
                state,
                column,
                value,
            })
        } else if value > Self::MAX_WEIGHT as i64 {
            Err(WeightError::TooLarge {
                state,
                column,
                value,
            })
        } else {
            Ok(value as u32)
        }
    }

    /// Builds a table from a complete lookup; every state and column must be
    /// present and non-negative.
    pub fn from_lookup<F>(mut lookup: F) -> Result<Self, WeightError>
    where
        F: FnMut(OperationalState, WeightColumn) -> Option<i64>,
    {
        let mut weights = [[0u32; 7]; 5];
        for state in OperationalState::ALL {
            for column in WeightColumn::ALL {
                let value =
                    lookup(state, column).ok_or(WeightError::MissingColumn(state, column))?;
                weights[state.index()][column as usize] = Self::check(state, column, value)?;
            }
        }
        Ok(Self { weights })
    }

    /// Likelihood exponent, `w / 100`.
    pub fn exponent(&self, state: OperationalState, column: WeightColumn) -> f64 {
        self.get(state, column) as f64 / 100.0
    }
}
