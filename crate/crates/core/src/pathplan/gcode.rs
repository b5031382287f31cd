use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::toolpath::Toolpath;

/// One motion word.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GMove {
    /// `G0` (laser off) when true, `G1` (laser on) otherwise.
    pub rapid: bool,
    pub x: f64,
    pub y: f64,
}

/// Millimetre, absolute-coordinate program of rapid and feed moves.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GCodeProgram {
    pub moves: Vec<GMove>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GCodeError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: &'static str },
    #[error("missing G21/G90 header")]
    MissingHeader,
}

/// Coordinate with four decimals and no negative zero.
pub fn format_coord(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        String::from("0.0000")
    } else {
        s
    }
}

impl GCodeProgram {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn feed_count(&self) -> usize {
        self.moves.iter().filter(|m| !m.rapid).count()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("G21\nG90\n");
        for m in &self.moves {
            let word = if m.rapid { "G0" } else { "G1" };
            out.push_str(&format!("{word} X{} Y{}\n", format_coord(m.x), format_coord(m.y)));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, GCodeError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let header: Vec<&str> = lines.by_ref().take(2).map(|(_, l)| l.trim()).collect();
        if header != ["G21", "G90"] {
            return Err(GCodeError::MissingHeader);
        }
        let mut moves = Vec::new();
        for (n, line) in lines {
            let line_no = n + 1;
            let err = |reason| GCodeError::Syntax { line: line_no, reason };
            let mut words = line.split_whitespace();
            let rapid = match words.next() {
                Some("G0") => true,
                Some("G1") => false,
                _ => return Err(err("expected G0 or G1")),
            };
            let mut coord = |axis: char| -> Result<f64, GCodeError> {
                let w = words.next().ok_or(err("missing coordinate"))?;
                let v = w.strip_prefix(axis).ok_or(err("unexpected axis word"))?;
                v.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or(err("bad number"))
            };
            let x = coord('X')?;
            let y = coord('Y')?;
            if words.next().is_some() {
                return Err(err("trailing words"));
            }
            moves.push(GMove { rapid, x, y });
        }
        Ok(Self { moves })
    }
}

/// Positions (move indices) of points whose gaps to both neighbours on the
/// path exceed `t`; a path end counts as an infinite gap.
pub fn isolated_points(path: &Toolpath, t: f64) -> Vec<usize> {
    let m = &path.moves;
    let gap = |a: usize, b: usize| m[a].pos.dist(m[b].pos);
    (0..m.len())
        .filter(|&k| {
            let before = k == 0 || gap(k - 1, k) > t;
            let after = k + 1 == m.len() || gap(k, k + 1) > t;
            before && after
        })
        .collect()
}

/// Program for `path`: isolated points (see [`isolated_points`]) are
/// dropped, the first kept point is reached with a rapid, and each later
/// point with a feed only when it directly follows its kept predecessor,
/// the gap is at most `t` and the path keeps the laser on there.
pub fn finetune_gcode(path: &Toolpath, t: f64) -> GCodeProgram {
    let drop = isolated_points(path, t);
    let mut removed = alloc::vec![false; path.len()];
    for k in drop {
        removed[k] = true;
    }
    let mut moves = Vec::new();
    let mut prev: Option<usize> = None;
    for (k, mv) in path.moves.iter().enumerate() {
        if removed[k] {
            continue;
        }
        let feed = prev == Some(k.wrapping_sub(1)) && mv.laser_on() && path.moves[k - 1].pos.dist(mv.pos) <= t;
        moves.push(GMove { rapid: !feed, x: mv.pos.x, y: mv.pos.y });
        prev = Some(k);
    }
    GCodeProgram { moves }
}
