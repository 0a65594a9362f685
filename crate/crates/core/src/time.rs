use alloc::string::String;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

pub const SECONDS_PER_DAY: i64 = 86_400;

/// A point in time as UTC epoch seconds plus the author's recorded offset.
///
/// Ordering and day arithmetic always use the UTC instant; the offset is
/// kept only so the original wall-clock time can be displayed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Timestamp {
    pub secs: i64,
    #[serde(default)]
    pub offset_minutes: i32,
}

impl Timestamp {
    pub const fn utc(secs: i64) -> Self {
        Self {
            secs,
            offset_minutes: 0,
        }
    }

    pub const fn with_offset(secs: i64, offset_minutes: i32) -> Self {
        Self {
            secs,
            offset_minutes,
        }
    }

    /// Days since the epoch of the UTC calendar date.
    pub fn utc_day(&self) -> i64 {
        self.secs.div_euclid(SECONDS_PER_DAY)
    }

    /// Seconds elapsed from `earlier` to `self` (negative if `earlier` is later).
    pub fn seconds_since(&self, earlier: &Timestamp) -> i64 {
        self.secs - earlier.secs
    }
}

/// Calendar fields of a wall-clock time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CivilTime {
    pub year: i64,
    pub month: u32,
    pub day: u32,
    pub hour: u32,
    pub minute: u32,
    pub second: u32,
}

// Howard Hinnant's days_from_civil / civil_from_days.
fn days_from_civil(y: i64, m: u32, d: u32) -> i64 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let m = m as i64;
    let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + d as i64 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

fn civil_from_days(z: i64) -> (i64, u32, u32) {
    let z = z + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    let y = yoe + era * 400 + if m <= 2 { 1 } else { 0 };
    (y, m, d)
}

impl Timestamp {
    /// Wall-clock fields in the timestamp's own offset.
    pub fn local(&self) -> CivilTime {
        let local = self.secs + self.offset_minutes as i64 * 60;
        let days = local.div_euclid(SECONDS_PER_DAY);
        let rem = local.rem_euclid(SECONDS_PER_DAY);
        let (year, month, day) = civil_from_days(days);
        CivilTime {
            year,
            month,
            day,
            hour: (rem / 3600) as u32,
            minute: (rem % 3600 / 60) as u32,
            second: (rem % 60) as u32,
        }
    }

    /// `YYYY-MM-DD at HH:MM:SS` in the timestamp's own offset.
    pub fn report_format(&self) -> String {
        let c = self.local();
        let mut out = String::new();
        let _ = write!(
            out,
            "{:04}-{:02}-{:02} at {:02}:{:02}:{:02}",
            c.year, c.month, c.day, c.hour, c.minute, c.second
        );
        out
    }

    /// RFC 3339 in the timestamp's own offset, e.g. `2018-09-09T08:07:49+02:00`.
    pub fn to_rfc3339(&self) -> String {
        let c = self.local();
        let mut out = String::new();
        let _ = write!(
            out,
            "{:04}-{:02}-{:02}T{:02}:{:02}:{:02}",
            c.year, c.month, c.day, c.hour, c.minute, c.second
        );
        if self.offset_minutes == 0 {
            out.push('Z');
        } else {
            let sign = if self.offset_minutes < 0 { '-' } else { '+' };
            let abs = self.offset_minutes.unsigned_abs();
            let _ = write!(out, "{}{:02}:{:02}", sign, abs / 60, abs % 60);
        }
        out
    }

    /// Parses `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM:SS` (UTC) or a full RFC 3339
    /// timestamp with `Z` or a `±HH:MM` offset. Fractional seconds are dropped.
    pub fn parse_rfc3339(text: &str) -> Option<Timestamp> {
        let text = text.trim();
        let num = |s: &str| -> Option<u32> {
            if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            s.parse().ok()
        };
        let (date, rest) = match text.find(['T', 't', ' ']) {
            Some(i) => (&text[..i], &text[i + 1..]),
            None => (text, ""),
        };
        let mut parts = date.splitn(3, '-');
        let year = num(parts.next()?)? as i64;
        let month = num(parts.next()?)?;
        let day = num(parts.next()?)?;
        if !(1..=12).contains(&month) || !(1..=31).contains(&day) {
            return None;
        }
        let (mut h, mut mi, mut s, mut offset) = (0, 0, 0, 0i32);
        if !rest.is_empty() {
            let (clock, zone) = match rest.find(['Z', 'z', '+', '-']) {
                Some(i) => (&rest[..i], &rest[i..]),
                None => (rest, ""),
            };
            let clock = clock.split('.').next()?;
            let mut hms = clock.splitn(3, ':');
            h = num(hms.next()?)?;
            mi = num(hms.next()?)?;
            s = match hms.next() {
                Some(v) => num(v)?,
                None => 0,
            };
            if h > 23 || mi > 59 || s > 60 {
                return None;
            }
            if let Some(sign) = zone.strip_prefix('+').map(|z| (1, z)).or(zone.strip_prefix('-').map(|z| (-1, z))) {
                let (sign, z) = sign;
                let z = z.replace(':', "");
                if z.len() != 4 {
                    return None;
                }
                let oh = num(&z[..2])? as i32;
                let om = num(&z[2..])? as i32;
                offset = sign * (oh * 60 + om);
            } else if !(zone.is_empty() || zone.eq_ignore_ascii_case("z")) {
                return None;
            }
        }
        let local = days_from_civil(year, month, day) * SECONDS_PER_DAY
            + (h * 3600 + mi * 60 + s) as i64;
        Some(Timestamp::with_offset(local - offset as i64 * 60, offset))
    }
}

impl PartialOrd for Timestamp {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Timestamp {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.secs
            .cmp(&other.secs)
            .then(self.offset_minutes.cmp(&other.offset_minutes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn utc_day_buckets_negative_times() {
        assert_eq!(Timestamp::utc(0).utc_day(), 0);
        assert_eq!(Timestamp::utc(86_399).utc_day(), 0);
        assert_eq!(Timestamp::utc(86_400).utc_day(), 1);
        assert_eq!(Timestamp::utc(-1).utc_day(), -1);
    }

    #[test]
    fn civil_round_trip() {
        for days in [-800_000i64, -1, 0, 1, 17_783, 20_000, 2_932_896] {
            let (y, m, d) = civil_from_days(days);
            assert_eq!(days_from_civil(y, m, d), days);
        }
    }

    #[test]
    fn report_format_matches_fig_style() {
        let t = Timestamp::parse_rfc3339("2018-09-09T08:07:49Z").unwrap();
        assert_eq!(t.report_format(), "2018-09-09 at 08:07:49");
        assert_eq!(t.secs, 1_536_480_469);
    }

    #[test]
    fn parse_offsets() {
        let t = Timestamp::parse_rfc3339("2018-09-09T10:07:49+02:00").unwrap();
        assert_eq!(t.secs, 1_536_480_469);
        assert_eq!(t.offset_minutes, 120);
        assert_eq!(t.report_format(), "2018-09-09 at 10:07:49");
        assert_eq!(t.to_rfc3339(), "2018-09-09T10:07:49+02:00");
        let d = Timestamp::parse_rfc3339("2016-01-01").unwrap();
        assert_eq!(d.to_rfc3339(), "2016-01-01T00:00:00Z");
        assert!(Timestamp::parse_rfc3339("2016-13-01").is_none());
        assert!(Timestamp::parse_rfc3339("yesterday").is_none());
        let frac = Timestamp::parse_rfc3339("2020-02-29T23:59:59.123-05:30").unwrap();
        assert_eq!(frac.offset_minutes, -330);
    }

    #[test]
    fn offset_does_not_move_the_day() {
        // 23:30 UTC written by someone at +02:00 is still the same UTC date.
        let t = Timestamp::with_offset(86_400 - 1800, 120);
        assert_eq!(t.utc_day(), 0);
    }
}
