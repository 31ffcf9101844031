//! Angles on the command line: decimals (`0.5236`) or fractions of pi
//! (`pi/12`, `3pi/4`, `3*pi/4`, `-pi/8`). Grids are comma lists or
//! `start:stop:count` inclusive ranges.

use std::f64::consts::PI;

pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s: String = text.trim().to_ascii_lowercase().replace('π', "pi").replace(' ', "");
    if s.is_empty() {
        return Err("empty angle".into());
    }
    let Some(at) = s.find("pi") else {
        return s.parse::<f64>().map_err(|_| format!("cannot parse angle '{text}'"));
    };
    let head = s[..at].trim_end_matches('*');
    let coefficient = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| format!("bad coefficient in angle '{text}'"))?,
    };
    let tail = &s[at + 2..];
    let denominator = if tail.is_empty() {
        1.0
    } else {
        let d = tail
            .strip_prefix('/')
            .ok_or_else(|| format!("expected '/' after pi in '{text}'"))?
            .parse::<f64>()
            .map_err(|_| format!("bad denominator in angle '{text}'"))?;
        if d == 0.0 {
            return Err(format!("zero denominator in angle '{text}'"));
        }
        d
    };
    Ok(coefficient * PI / denominator)
}

pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("theta grid is empty".into());
    }
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let start = parse_angle(parts[0])?;
        let stop = parse_angle(parts[1])?;
        let count: usize = parts[2].trim().parse().map_err(|_| format!("bad point count in '{text}'"))?;
        return match count {
            0 => Err("theta grid is empty".into()),
            1 => Ok(vec![start]),
            n => Ok((0..n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect()),
        };
    }
    let grid: Vec<f64> = text
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(parse_angle)
        .collect::<Result<_, _>>()?;
    if grid.is_empty() {
        return Err("theta grid is empty".into());
    }
    Ok(grid)
}

/// A short label for file names: `pi_12`, `3pi_4`, or the decimal value.
pub fn angle_tag(theta: f64) -> String {
    for den in [1u32, 2, 3, 4, 6, 8, 12, 16, 24] {
        let num = theta * den as f64 / PI;
        let rounded = num.round();
        if rounded >= 1.0 && (num - rounded).abs() < 1e-9 {
            let n = rounded as u32;
            let head = if n == 1 { "pi".to_string() } else { format!("{n}pi") };
            return if den == 1 { head } else { format!("{head}_{den}") };
        }
    }
    format!("{theta:.6}").replace('.', "p")
}
