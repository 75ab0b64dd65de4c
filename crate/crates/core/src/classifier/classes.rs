use crate::sim::InputCommand;
use core::fmt;

pub const NUM_CLASSES: usize = 9;

/// Joint (power, brake) command as a class label.
///
/// Canonical order: coast, power 1..=4, brake 1..=4. Ties in prediction go to
/// the lowest index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "u8", into = "u8"))]
pub struct InputClass(u8);

impl InputClass {
    pub const COAST: InputClass = InputClass(0);

    pub fn from_index(index: usize) -> Option<Self> {
        (index < NUM_CLASSES).then_some(InputClass(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = InputClass> {
        (0..NUM_CLASSES as u8).map(InputClass)
    }

    pub fn from_command(cmd: InputCommand) -> Self {
        match (cmd.power_notch(), cmd.brake_notch()) {
            (p, 0) => InputClass(p),
            (0, b) => InputClass(4 + b),
            _ => unreachable!("InputCommand never carries both levers"),
        }
    }

    pub fn command(self) -> InputCommand {
        match self.0 {
            p @ 0..=4 => InputCommand::power(p),
            b => InputCommand::brake(b - 4),
        }
    }
}

impl From<InputCommand> for InputClass {
    fn from(cmd: InputCommand) -> Self {
        Self::from_command(cmd)
    }
}

impl From<InputClass> for u8 {
    fn from(c: InputClass) -> u8 {
        c.0
    }
}

impl TryFrom<u8> for InputClass {
    type Error = &'static str;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        InputClass::from_index(v as usize).ok_or("input class index must be < 9")
    }
}

impl fmt::Display for InputClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.command();
        write!(f, "P{}B{}", c.power_notch(), c.brake_notch())
    }
}
