use std::fmt;
use std::str::FromStr;

/// A scalar or an inclusive `start:stop:count` linear grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spec {
    Scalar(f64),
    Grid { start: f64, stop: f64, count: usize },
}

impl Spec {
    pub fn is_grid(&self) -> bool {
        matches!(self, Spec::Grid { .. })
    }

    pub fn scalar(&self) -> Option<f64> {
        match self {
            Spec::Scalar(x) => Some(*x),
            Spec::Grid { .. } => None,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        match *self {
            Spec::Scalar(x) => vec![x],
            Spec::Grid {
                start, count: 1, ..
            } => vec![start],
            Spec::Grid { start, stop, count } => {
                let step = (stop - start) / (count - 1) as f64;
                (0..count)
                    .map(|i| {
                        if i + 1 == count {
                            stop
                        } else {
                            start + step * i as f64
                        }
                    })
                    .collect()
            }
        }
    }
}

fn number(s: &str) -> Result<f64, String> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("not a number: {s:?}"))?;
    if !x.is_finite() {
        return Err(format!("not finite: {s:?}"));
    }
    Ok(x)
}

impl FromStr for Spec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [x] => Ok(Spec::Scalar(number(x)?)),
            [a, b, n] => {
                let start = number(a)?;
                let stop = number(b)?;
                let count: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad grid count: {n:?}"))?;
                if count == 0 {
                    return Err("grid count must be at least 1".into());
                }
                if start > stop {
                    return Err(format!("grid start {start} exceeds stop {stop}"));
                }
                if count == 1 && start != stop {
                    return Err("a one-point grid needs start == stop".into());
                }
                Ok(Spec::Grid { start, stop, count })
            }
            _ => Err(format!("expected a number or start:stop:count, got {s:?}")),
        }
    }
}

impl fmt::Display for Spec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spec::Scalar(x) => write!(f, "{x}"),
            Spec::Grid { start, stop, count } => write!(f, "{start}:{stop}:{count}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses() {
        assert_eq!("0.05".parse::<Spec>().unwrap(), Spec::Scalar(0.05));
        let g: Spec = "0.01:0.2:20".parse().unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 20);
        assert_eq!(pts[0], 0.01);
        assert_eq!(pts[19], 0.2);
        assert!((pts[1] - 0.02).abs() < 1e-15);
        assert_eq!("0.05:0.05:1".parse::<Spec>().unwrap().points(), vec![0.05]);
    }

    #[test]
    fn rejects() {
        for bad in ["", "x", "1:0:3", "0:1:0", "0:1", "0:1:2:3", "0:1:1", "nan"] {
            assert!(bad.parse::<Spec>().is_err(), "{bad}");
        }
    }
}
