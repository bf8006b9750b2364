//! Scalar schedules for the stepsize `alpha_t` and the requested
//! approximation angle `theta_t`.

use crate::{Error, Result};

/// A non-piecewise schedule segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchedulePiece {
    Constant(f64),
    /// `a / (t + b)` with `b > 0`.
    RationalDecay { a: f64, b: f64 },
}

impl SchedulePiece {
    fn value(&self, t: f64) -> f64 {
        match self {
            SchedulePiece::Constant(c) => *c,
            SchedulePiece::RationalDecay { a, b } => a / (t + b),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SchedulePiece::Constant(c) if *c >= 0.0 && c.is_finite() => Ok(()),
            SchedulePiece::RationalDecay { a, b } if *a >= 0.0 && *b > 0.0 => Ok(()),
            _ => Err(Error::InvalidConfig(format!(
                "schedule piece out of range: {self:?}"
            ))),
        }
    }
}

/// A scalar function of time, nonnegative and uniformly continuous within
/// each piece.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Constant(f64),
    /// `a / (t + b)`.
    RationalDecay { a: f64, b: f64 },
    /// `(t_start, piece)` entries; starts strictly increasing from 0.
    Piecewise(Vec<(f64, SchedulePiece)>),
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            Schedule::Constant(c) => SchedulePiece::Constant(*c).validate(),
            Schedule::RationalDecay { a, b } => {
                SchedulePiece::RationalDecay { a: *a, b: *b }.validate()
            }
            Schedule::Piecewise(pieces) => {
                if pieces.is_empty() || pieces[0].0 != 0.0 {
                    return Err(Error::InvalidConfig(
                        "piecewise schedule must start at t = 0".into(),
                    ));
                }
                for w in pieces.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(Error::InvalidConfig(
                            "piecewise schedule starts must increase".into(),
                        ));
                    }
                }
                pieces.iter().try_for_each(|(_, p)| p.validate())
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Schedule::Constant(c) => *c,
            Schedule::RationalDecay { a, b } => a / (t + b),
            Schedule::Piecewise(pieces) => {
                let idx = pieces
                    .iter()
                    .rposition(|(start, _)| t >= *start)
                    .unwrap_or(0);
                pieces[idx].1.value(t)
            }
        }
    }

    /// Supremum of the schedule over `t >= 0` (both variants decay, so the
    /// supremum of each piece is attained at its start).
    pub fn max_value(&self) -> f64 {
        match self {
            Schedule::Constant(c) => *c,
            Schedule::RationalDecay { a, b } => a / b,
            Schedule::Piecewise(pieces) => pieces
                .iter()
                .map(|(start, p)| p.value(*start))
                .fold(0.0, f64::max),
        }
    }

    /// The tail behavior, which decides integrability.
    pub fn tail(&self) -> SchedulePiece {
        match self {
            Schedule::Constant(c) => SchedulePiece::Constant(*c),
            Schedule::RationalDecay { a, b } => SchedulePiece::RationalDecay { a: *a, b: *b },
            Schedule::Piecewise(pieces) => pieces.last().unwrap().1,
        }
    }

    /// Whether `\int_0^\infty s(t) dt` diverges.
    pub fn integral_diverges(&self) -> bool {
        match self.tail() {
            SchedulePiece::Constant(c) => c > 0.0,
            SchedulePiece::RationalDecay { a, .. } => a > 0.0,
        }
    }

    /// Whether `\int_0^\infty s(t)^2 dt` converges.
    pub fn square_integrable(&self) -> bool {
        match self.tail() {
            SchedulePiece::Constant(c) => c == 0.0,
            SchedulePiece::RationalDecay { .. } => true,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Schedule::Constant(_))
    }

    /// Whether the schedule tends to zero.
    pub fn vanishes(&self) -> bool {
        match self.tail() {
            SchedulePiece::Constant(c) => c == 0.0,
            SchedulePiece::RationalDecay { .. } => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(Schedule::Constant(0.5).value(13.0), 0.5);
        let r = Schedule::RationalDecay { a: 20.0, b: 20.0 };
        assert_eq!(r.value(0.0), 1.0);
        assert_eq!(r.value(20.0), 0.5);
        assert_eq!(r.max_value(), 1.0);
    }

    #[test]
    fn piecewise_lookup() {
        let s = Schedule::Piecewise(vec![
            (0.0, SchedulePiece::Constant(1.0)),
            (2.0, SchedulePiece::RationalDecay { a: 4.0, b: 2.0 }),
        ]);
        s.validate().unwrap();
        assert_eq!(s.value(1.9), 1.0);
        assert_eq!(s.value(2.0), 1.0); // 4 / (2 + 2)
        assert_eq!(s.value(6.0), 0.5);
        assert_eq!(s.max_value(), 1.0);
    }

    #[test]
    fn integrability_classification() {
        assert!(Schedule::Constant(0.5).integral_diverges());
        assert!(!Schedule::Constant(0.5).square_integrable());
        assert!(!Schedule::Constant(0.0).integral_diverges());
        let r = Schedule::RationalDecay { a: 20.0, b: 20.0 };
        assert!(r.integral_diverges());
        assert!(r.square_integrable());
        assert!(r.vanishes());
    }

    #[test]
    fn validation_rejects_bad_pieces() {
        assert!(Schedule::Constant(-0.1).validate().is_err());
        assert!(Schedule::RationalDecay { a: 1.0, b: 0.0 }.validate().is_err());
        assert!(Schedule::Piecewise(vec![]).validate().is_err());
        assert!(Schedule::Piecewise(vec![
            (0.0, SchedulePiece::Constant(1.0)),
            (0.0, SchedulePiece::Constant(2.0)),
        ])
        .validate()
        .is_err());
    }
}
