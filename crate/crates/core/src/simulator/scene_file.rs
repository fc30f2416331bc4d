//! Plain-text scene description.
//!
//! One `key = value` per line, `#` starts a comment. Radar keys (`f_c`,
//! `bandwidth`, `rolloff`, `t_ft`, `t_st`, `n_fast`, `m_slow`) and
//! `noise_sigma` take a single number. Paths are repeated keys:
//!
//! ```text
//! clutter = <re> <im> <delay_ns>
//! target  = <re> <im> <delay_ns> <kind> [rate_hz] [delay_excursion_ps] [amp_excursion] [jitter] [phase_rad]
//! ```
//!
//! Omitted target motion fields take the defaults of `kind`.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::motion::{MotionKind, MotionModel};
use super::scene::{PathComponent, Scene};
use super::RadarConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SceneFile {
    pub radar: RadarConfig,
    pub scene: Scene,
}

impl SceneFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut radar = RadarConfig::default();
        let mut scene = Scene::default();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {lineno}: expected `key = value`")))?;
            let key = key.trim();
            let fields: Vec<&str> = value.split_whitespace().collect();
            let err = |what: &str| Error::Parse(format!("line {lineno}: {what}"));
            let num = |i: usize| -> Result<f64> {
                fields
                    .get(i)
                    .ok_or_else(|| err(&format!("`{key}` is missing field {}", i + 1)))?
                    .parse::<f64>()
                    .map_err(|_| err(&format!("`{key}` field {} is not a number", i + 1)))
            };
            let single = || -> Result<f64> {
                if fields.len() != 1 {
                    return Err(err(&format!("`{key}` takes exactly one value")));
                }
                num(0)
            };
            let count = || -> Result<usize> {
                let v = single()?;
                if v < 0.0 || v.fract() != 0.0 {
                    return Err(err(&format!("`{key}` must be a non-negative integer")));
                }
                Ok(v as usize)
            };
            match key {
                "f_c" => radar.f_c = single()?,
                "bandwidth" => radar.bandwidth = single()?,
                "rolloff" => radar.rolloff = single()?,
                "t_ft" => radar.t_ft = single()?,
                "t_st" => radar.t_st = single()?,
                "n_fast" => radar.n_fast = count()?,
                "m_slow" => radar.m_slow = count()?,
                "noise_sigma" => scene.noise_sigma = single()?,
                "clutter" => {
                    if fields.len() != 3 {
                        return Err(err("`clutter` takes <re> <im> <delay_ns>"));
                    }
                    scene.clutter_paths.push(PathComponent::clutter(
                        Complex64::new(num(0)?, num(1)?),
                        num(2)? * 1e-9,
                    ));
                }
                "target" => {
                    if !(4..=9).contains(&fields.len()) {
                        return Err(err("`target` takes 4 to 9 fields"));
                    }
                    let kind: MotionKind = fields[3].parse().map_err(|_| {
                        err(&format!("unknown motion kind {:?}", fields[3]))
                    })?;
                    let mut model = MotionModel::default_for(kind);
                    if fields.len() > 4 {
                        model.rate = num(4)?;
                    }
                    if fields.len() > 5 {
                        model.delay_excursion = num(5)? * 1e-12;
                    }
                    if fields.len() > 6 {
                        model.amp_excursion = num(6)?;
                    }
                    if fields.len() > 7 {
                        model.jitter = num(7)?;
                    }
                    if fields.len() > 8 {
                        model.phase = num(8)?;
                    }
                    let path =
                        PathComponent::target(Complex64::new(num(0)?, num(1)?), num(2)? * 1e-9);
                    scene.target_paths.push((path, model));
                }
                other => return Err(err(&format!("unknown key `{other}`"))),
            }
        }
        radar.validate()?;
        scene.validate(&radar)?;
        Ok(Self { radar, scene })
    }

    pub fn to_text(&self) -> String {
        let r = &self.radar;
        let mut s = String::new();
        let _ = writeln!(s, "f_c = {:e}", r.f_c);
        let _ = writeln!(s, "bandwidth = {:e}", r.bandwidth);
        let _ = writeln!(s, "rolloff = {}", r.rolloff);
        let _ = writeln!(s, "t_ft = {:e}", r.t_ft);
        let _ = writeln!(s, "t_st = {}", r.t_st);
        let _ = writeln!(s, "n_fast = {}", r.n_fast);
        let _ = writeln!(s, "m_slow = {}", r.m_slow);
        let _ = writeln!(s, "noise_sigma = {:e}", self.scene.noise_sigma);
        for p in &self.scene.clutter_paths {
            let _ = writeln!(s, "clutter = {} {} {}", p.amplitude.re, p.amplitude.im, p.delay * 1e9);
        }
        for (p, m) in &self.scene.target_paths {
            let _ = writeln!(
                s,
                "target = {} {} {} {} {} {} {} {} {}",
                p.amplitude.re,
                p.amplitude.im,
                p.delay * 1e9,
                m.kind,
                m.rate,
                m.delay_excursion * 1e12,
                m.amp_excursion,
                m.jitter,
                m.phase
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "\
# cabin with one passenger
n_fast = 32
m_slow = 50
noise_sigma = 1e-4
clutter = 1.0 0.0 4.5
clutter = -0.3 0.2 9   # B-pillar
target = 0.3 0.1 8.0 breathing
target = 0.1 0 9.5 talking 0.4 60 0.2 0.3 1.0
";

    #[test]
    fn parses_example() {
        let f = SceneFile::parse(EXAMPLE).unwrap();
        assert_eq!(f.radar.n_fast, 32);
        assert_eq!(f.radar.m_slow, 50);
        assert_eq!(f.radar.f_c, 6.5e9);
        assert_eq!(f.scene.clutter_paths.len(), 2);
        assert_eq!(f.scene.target_paths.len(), 2);
        let (p, m) = f.scene.target_paths[1];
        assert!((p.delay - 9.5e-9).abs() < 1e-21);
        assert_eq!(m.kind, MotionKind::Talking);
        assert!((m.delay_excursion - 60e-12).abs() < 1e-24);
        assert_eq!(f.scene.target_paths[0].1, MotionModel::default_for(MotionKind::Breathing));
    }

    #[test]
    fn text_round_trip() {
        let f = SceneFile::parse(EXAMPLE).unwrap();
        let back = SceneFile::parse(&f.to_text()).unwrap();
        assert_eq!(back.radar, f.radar);
        assert_eq!(back.scene.clutter_paths.len(), 2);
        for (a, b) in back.scene.target_paths.iter().zip(&f.scene.target_paths) {
            assert!((a.0.delay - b.0.delay).abs() < 1e-20);
            assert_eq!(a.1.kind, b.1.kind);
        }
    }

    #[test]
    fn diagnostics_name_the_line() {
        let e = SceneFile::parse("clutter = 1 0\n").unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
        let e = SceneFile::parse("n_fast = 8\nspeed = 3\n").unwrap_err().to_string();
        assert!(e.contains("line 2") && e.contains("speed"), "{e}");
        assert!(SceneFile::parse("target = 1 0 5 sleeping\n").is_err());
        assert!(SceneFile::parse("noise_sigma = 0\n").is_err(), "no paths");
        assert!(matches!(
            SceneFile::parse("clutter = 1 0 40\n"),
            Err(Error::DelayOutOfWindow { .. })
        ));
    }
}
