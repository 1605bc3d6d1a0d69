//! Angle, range and `key=value` flag syntax.

use std::f64::consts::PI;

/// Radians, either as a float or as a multiple of pi: `pi/4`, `-pi/2`,
/// `2*pi`, `3pi/4`, `0.5*pi`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t: String = s.trim().to_lowercase().replace('π', "pi").chars().filter(|c| !c.is_whitespace()).collect();
    let Some(at) = t.find("pi") else {
        return t.parse::<f64>().map_err(|_| format!("not an angle: {s:?}"));
    };
    let (head, tail) = (&t[..at], &t[at + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let coef = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| format!("bad multiplier in {s:?}"))?,
    };
    let den = match tail {
        "" => 1.0,
        d => d
            .strip_prefix('/')
            .and_then(|d| d.parse::<f64>().ok())
            .filter(|d| *d != 0.0)
            .ok_or_else(|| format!("bad divisor in {s:?}"))?,
    };
    Ok(coef * PI / den)
}

/// `start:stop:count`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Range {
    pub fn new(start: f64, stop: f64, count: usize) -> Self {
        Self { start, stop, count }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.stop } else { self.start + step * i as f64 }).collect()
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Self {
        Self { start: f(self.start), stop: f(self.stop), count: self.count }
    }
}

impl std::str::FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("range must be start:stop:count, got {s:?}"));
        };
        let count: usize = n.trim().parse().map_err(|_| format!("bad count in {s:?}"))?;
        if count == 0 {
            return Err(format!("count must be at least 1 in {s:?}"));
        }
        Ok(Range { start: parse_angle(a)?, stop: parse_angle(b)?, count })
    }
}

/// `k=v[,k=v...]` with angle-syntax values.
pub fn parse_assignments(s: &str) -> Result<Vec<(String, f64)>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| format!("expected key=value, got {p:?}"))?;
            Ok((k.trim().to_string(), parse_angle(v)?))
        })
        .collect()
}
