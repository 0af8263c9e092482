//! Grid axes given on the command line.

use std::fmt;
use std::str::FromStr;

use stable_spectral::stable_model::parse_real;
use stable_spectral::Error;

/// Values of one grid axis, remembered together with the text that produced them.
///
/// Accepted forms:
/// * `0.5`, `1,2,3/7`: explicit values (decimals or ratios)
/// * `a:b:n`: n equally spaced points from a to b inclusive
/// * `log:a:b:n`: n geometrically spaced points from a to b inclusive
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    spec: String,
    values: Vec<f64>,
}

impl Axis {
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn count(s: &str) -> Result<usize, Error> {
    match s.trim().parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(Error::Domain(format!("point count {s:?} must be a positive integer"))),
    }
}

/// f at n equally spaced points of [0, 1].
fn spaced(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    if n == 1 {
        return vec![f(0.0)];
    }
    (0..n).map(|i| f(i as f64 / (n - 1) as f64)).collect()
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let parts: Vec<&str> = s.split(':').collect();
        let values = match parts.as_slice() {
            [v] => v.split(',').map(parse_real).collect::<Result<Vec<_>, _>>()?,
            [a, b, n] => {
                let (a, b, n) = (parse_real(a)?, parse_real(b)?, count(n)?);
                let mut v = spaced(n, |u| a + (b - a) * u);
                // land exactly on the end point
                if let Some(last) = v.last_mut().filter(|_| n > 1) {
                    *last = b;
                }
                v
            }
            ["log", a, b, n] => {
                let (a, b, n) = (parse_real(a)?, parse_real(b)?, count(n)?);
                if !(a > 0.0 && b > 0.0) {
                    return Err(Error::Domain(format!("log axis {s:?} needs positive end points")));
                }
                let (la, lb) = (a.ln(), b.ln());
                let mut v = spaced(n, |u| (la + (lb - la) * u).exp());
                v[0] = a;
                if n > 1 {
                    v[n - 1] = b;
                }
                v
            }
            _ => return Err(Error::Domain(format!("cannot parse axis {s:?}"))),
        };
        Ok(Axis {
            spec: s.to_string(),
            values,
        })
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} points)", self.spec, self.values.len())
    }
}
