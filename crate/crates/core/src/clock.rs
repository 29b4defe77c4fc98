//! Clock-time text. Minutes past midnight render as `HH:MM`; the following
//! day renders with a `+1` suffix (`00:32+1`).

use crate::schedule::Minutes;

pub const MINUTES_PER_DAY: Minutes = 1440;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid clock time `{0}`")]
pub struct ClockError(pub String);

/// Formats minutes in `0..2880`; values outside wrap by whole days and carry
/// the day count as the suffix (`+2`, `-1`).
pub fn format(minutes: Minutes) -> String {
    let day = minutes.div_euclid(MINUTES_PER_DAY);
    let rem = minutes.rem_euclid(MINUTES_PER_DAY);
    let base = format!("{:02}:{:02}", rem / 60, rem % 60);
    match day {
        0 => base,
        d if d > 0 => format!("{base}+{d}"),
        d => format!("{base}{d}"),
    }
}

/// Parses `HH:MM`, `H:MM`, an optional `+N` day suffix, or a BTS-style
/// `HHMM` / `HMM` field (`2400` is midnight).
pub fn parse(text: &str) -> Result<Minutes, ClockError> {
    let err = || ClockError(text.to_string());
    let s = text.trim();
    let (clock, day) = match s.find(['+', '-']) {
        Some(pos) if pos > 0 => {
            let (clock, suffix) = s.split_at(pos);
            let days: i64 = suffix.parse().map_err(|_| err())?;
            if !(-1..=1).contains(&days) {
                return Err(err());
            }
            (clock, days)
        }
        _ => (s, 0),
    };
    let (hours, mins) = if let Some((h, m)) = clock.split_once(':') {
        if h.is_empty() || h.len() > 2 || m.len() != 2 {
            return Err(err());
        }
        (h, m)
    } else {
        if !(3..=4).contains(&clock.len()) || !clock.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        clock.split_at(clock.len() - 2)
    };
    if !hours.bytes().all(|b| b.is_ascii_digit()) || !mins.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err());
    }
    let h: i64 = hours.parse().map_err(|_| err())?;
    let m: i64 = mins.parse().map_err(|_| err())?;
    if m >= 60 || h > 24 || (h == 24 && m != 0) {
        return Err(err());
    }
    Ok((h * 60 + m) % MINUTES_PER_DAY + day * MINUTES_PER_DAY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_over_two_days() {
        for m in 0..2 * MINUTES_PER_DAY {
            assert_eq!(parse(&format(m)).unwrap(), m, "{}", format(m));
        }
    }

    #[test]
    fn bts_fields() {
        assert_eq!(parse("0945").unwrap(), 585);
        assert_eq!(parse("945").unwrap(), 585);
        assert_eq!(parse("2400").unwrap(), 0);
        assert!(parse("2460").is_err());
        assert!(parse("12").is_err());
        assert!(parse("ab:cd").is_err());
        assert!(parse("9:5").is_err());
    }

    #[test]
    fn suffixes() {
        assert_eq!(format(1472), "00:32+1");
        assert_eq!(parse("00:32+1").unwrap(), 1472);
        assert_eq!(format(-60), "23:00-1");
        assert_eq!(parse("23:00-1").unwrap(), -60);
    }
}
