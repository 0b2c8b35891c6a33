//! Extended-XYZ particle files.
//!
//! ```text
//! N
//! comment (may carry `box=Lx Ly Lz`)
//! element x y z q vx vy vz mass     (N rows)
//! ```
//!
//! Reals are written with 17 significant digits so a save/load cycle is
//! bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::{Error, ParticleSystem, Result, Vec3};

const ELEMENT: &str = "X";

/// Formats one frame. `comment` is appended after the box tag.
pub fn format_frame(system: &ParticleSystem, comment: &str) -> String {
    let mut out = String::new();
    let b = system.box_dims;
    let _ = writeln!(out, "{}", system.len());
    let _ = write!(out, "box={:.16e} {:.16e} {:.16e}", b.x, b.y, b.z);
    if !comment.is_empty() {
        let _ = write!(out, " {}", comment.replace('\n', " "));
    }
    out.push('\n');
    for i in 0..system.len() {
        let p = system.positions[i];
        let v = system.velocities[i];
        let _ = writeln!(
            out,
            "{ELEMENT} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
            p.x, p.y, p.z, system.charges[i], v.x, v.y, v.z, system.masses[i]
        );
    }
    out
}

pub fn save_system(system: &ParticleSystem, path: impl AsRef<Path>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(format_frame(system, "").as_bytes())?;
    Ok(())
}

pub fn load_system(path: impl AsRef<Path>) -> Result<ParticleSystem> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_system(&text, path)
}

/// Parses a single frame; `origin` is only used in error messages.
pub fn parse_system(text: &str, origin: &Path) -> Result<ParticleSystem> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| err(1, "missing particle count".into()))?;
    let n: usize = header
        .trim()
        .parse()
        .map_err(|_| err(1, format!("expected particle count, found '{}'", header.trim())))?;
    if n == 0 {
        return Err(err(1, "particle count must be at least 1".into()));
    }
    let comment = lines.next().ok_or_else(|| err(2, "missing comment line".into()))?;

    let mut positions = Vec::with_capacity(n);
    let mut velocities = Vec::with_capacity(n);
    let mut charges = Vec::with_capacity(n);
    let mut masses = Vec::with_capacity(n);
    for row in 0..n {
        let line_no = row + 3;
        let line = lines
            .next()
            .ok_or_else(|| err(line_no, format!("header declares {n} particles but the file ends here")))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 9 {
            return Err(err(line_no, format!("expected 9 fields, found {}", fields.len())));
        }
        let mut vals = [0.0; 8];
        for (k, tok) in fields[1..].iter().enumerate() {
            let v: f64 = tok
                .parse()
                .map_err(|_| err(line_no, format!("cannot parse '{tok}' as a number")))?;
            if !v.is_finite() {
                return Err(err(line_no, format!("non-finite value '{tok}'")));
            }
            vals[k] = v;
        }
        positions.push(Vec3::new(vals[0], vals[1], vals[2]));
        charges.push(vals[3]);
        velocities.push(Vec3::new(vals[4], vals[5], vals[6]));
        masses.push(vals[7]);
    }
    if let Some((k, extra)) = lines.enumerate().find(|(_, l)| !l.trim().is_empty()) {
        return Err(err(
            n + 3 + k,
            format!("unexpected content after {n} particle rows: '{}'", extra.trim()),
        ));
    }

    let box_dims = match parse_box(comment) {
        Some(b) => b.map_err(|m| err(2, m))?,
        None => positions.iter().fold(Vec3::ZERO, |acc, p| acc.max(*p)).max(Vec3::splat(1.0)),
    };
    ParticleSystem::new(positions, velocities, charges, masses, box_dims)
}

fn parse_box(comment: &str) -> Option<Result<Vec3, String>> {
    let start = comment.find("box=")?;
    let toks: Vec<&str> = comment[start + 4..].split_whitespace().take(3).collect();
    if toks.len() != 3 {
        return Some(Err("box tag needs three lengths".into()));
    }
    let mut b = [0.0; 3];
    for (k, t) in toks.iter().enumerate() {
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() => b[k] = v,
            _ => return Some(Err(format!("invalid box length '{t}'"))),
        }
    }
    Some(Ok(Vec3::from_array(b)))
}
