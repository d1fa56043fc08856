//! Analytic forward projection of a [`Phantom`].
//!
//! Rays are traced once through the raster (Siddon's method) to obtain the
//! chord length inside each material; mono- and polychromatic sinograms are
//! then Beer–Lambert sums over those lengths.
//!
//! Angle conventions: a parallel ray with angle θ and detector offset s is
//! the line `x·cos θ + y·sin θ = s` travelled in direction `(−sin θ, cos θ)`.
//! A fan ray with source angle β and fan angle γ starts at
//! `D·(sin β, −cos β)` and coincides with the parallel ray
//! `θ = β − γ`, `s = D·sin γ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::{parse_usize, push_row};
use crate::physics::{parse_f64, Material, MaterialLibrary, Phantom, Spectrum};

/// Transmissions are clamped here before taking the logarithm.
pub const TRANSMISSION_FLOOR: f64 = 1e-12;
pub const DEFAULT_FAN_ANGLE_DEG: f64 = 6.8;
pub const DEFAULT_SOURCE_DISTANCE_MM: f64 = 150.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BeamMode {
    Parallel,
    /// Equiangular fan; detectors span `[−fan/2, fan/2]`.
    Fan {
        fan_angle_deg: f64,
        source_distance_mm: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Geometry {
    pub mode: BeamMode,
    pub n_angles: usize,
    pub angle_step_deg: f64,
    pub n_detectors: usize,
    /// Detector pitch in mm; unused by fan mode, which is equiangular.
    pub detector_spacing_mm: f64,
}

impl Geometry {
    pub fn parallel(
        n_angles: usize,
        angle_step_deg: f64,
        n_detectors: usize,
        detector_spacing_mm: f64,
    ) -> Result<Self> {
        let g = Self {
            mode: BeamMode::Parallel,
            n_angles,
            angle_step_deg,
            n_detectors,
            detector_spacing_mm,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn fan(
        n_angles: usize,
        angle_step_deg: f64,
        n_detectors: usize,
        fan_angle_deg: f64,
        source_distance_mm: f64,
    ) -> Result<Self> {
        let g = Self {
            mode: BeamMode::Fan {
                fan_angle_deg,
                source_distance_mm,
            },
            n_angles,
            angle_step_deg,
            n_detectors,
            detector_spacing_mm: 0.0,
        };
        g.validate()?;
        Ok(g)
    }

    /// 360 one-degree views, one detector per image column at pixel pitch.
    pub fn default_parallel(phantom: &Phantom) -> Self {
        Self {
            mode: BeamMode::Parallel,
            n_angles: 360,
            angle_step_deg: 1.0,
            n_detectors: phantom.size(),
            detector_spacing_mm: phantom.pixel_size(),
        }
    }

    /// 360 one-degree views of a 6.8° fan from 150 mm.
    pub fn default_fan(phantom: &Phantom) -> Self {
        Self {
            mode: BeamMode::Fan {
                fan_angle_deg: DEFAULT_FAN_ANGLE_DEG,
                source_distance_mm: DEFAULT_SOURCE_DISTANCE_MM,
            },
            n_angles: 360,
            angle_step_deg: 1.0,
            n_detectors: phantom.size(),
            detector_spacing_mm: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_angles == 0 || self.n_detectors == 0 {
            return Err(Error::Geometry("need at least one angle and one detector".into()));
        }
        if !(self.angle_step_deg > 0.0) {
            return Err(Error::Geometry("angle step must be positive".into()));
        }
        match self.mode {
            BeamMode::Parallel if !(self.detector_spacing_mm > 0.0) => {
                Err(Error::Geometry("detector spacing must be positive".into()))
            }
            BeamMode::Fan {
                fan_angle_deg,
                source_distance_mm,
            } if !(fan_angle_deg > 0.0 && fan_angle_deg < 180.0 && source_distance_mm > 0.0) => {
                Err(Error::Geometry(
                    "fan mode needs 0 < fan angle < 180° and a positive source distance".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    pub fn is_fan(&self) -> bool {
        matches!(self.mode, BeamMode::Fan { .. })
    }

    pub fn angle_rad(&self, a: usize) -> f64 {
        (a as f64 * self.angle_step_deg).to_radians()
    }

    /// Parallel detector offset in mm.
    pub fn detector_offset(&self, d: usize) -> f64 {
        (d as f64 - (self.n_detectors as f64 - 1.0) / 2.0) * self.detector_spacing_mm
    }

    /// Fan angle of detector `d` in radians (fan mode).
    fn fan_gamma(&self, d: usize, fan_angle_deg: f64) -> f64 {
        if self.n_detectors == 1 {
            return 0.0;
        }
        let step = fan_angle_deg.to_radians() / (self.n_detectors as f64 - 1.0);
        (d as f64 - (self.n_detectors as f64 - 1.0) / 2.0) * step
    }

    /// The ray measured by detector `d` at view `a`.
    pub fn ray(&self, a: usize, d: usize) -> Ray {
        match self.mode {
            BeamMode::Parallel => Ray::parallel(self.angle_rad(a), self.detector_offset(d)),
            BeamMode::Fan {
                fan_angle_deg,
                source_distance_mm,
            } => {
                let beta = self.angle_rad(a);
                let gamma = self.fan_gamma(d, fan_angle_deg);
                let origin = (
                    source_distance_mm * beta.sin(),
                    -source_distance_mm * beta.cos(),
                );
                let theta = beta - gamma;
                Ray {
                    origin,
                    direction: (-theta.sin(), theta.cos()),
                }
            }
        }
    }

    fn covers_full_circle(&self) -> bool {
        (self.n_angles as f64 * self.angle_step_deg - 360.0).abs() < 1e-9
    }
}

/// A line with an origin and a direction, both in mm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: (f64, f64),
    pub direction: (f64, f64),
}

impl Ray {
    pub fn parallel(theta: f64, offset: f64) -> Self {
        Ray {
            origin: (offset * theta.cos(), offset * theta.sin()),
            direction: (-theta.sin(), theta.cos()),
        }
    }
}

/// Chord length (cm) of the ray inside each material, indexed by
/// [`Material::index`]. A ray missing the raster yields zeros.
pub fn ray_path_lengths(phantom: &Phantom, ray: &Ray) -> Result<[f64; Material::COUNT]> {
    let (dx, dy) = ray.direction;
    let norm = dx.hypot(dy);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::invalid("ray direction must be non-zero"));
    }
    let (dx, dy) = (dx / norm, dy / norm);
    let (ox, oy) = ray.origin;
    let n = phantom.size();
    let px = phantom.pixel_size();
    let half = phantom.extent() / 2.0;
    let mut lengths = [0.0; Material::COUNT];

    let mut t_enter = f64::NEG_INFINITY;
    let mut t_exit = f64::INFINITY;
    for (o, d) in [(ox, dx), (oy, dy)] {
        if d.abs() < 1e-15 {
            if o <= -half || o >= half {
                return Ok(lengths);
            }
        } else {
            let ta = (-half - o) / d;
            let tb = (half - o) / d;
            t_enter = t_enter.max(ta.min(tb));
            t_exit = t_exit.min(ta.max(tb));
        }
    }
    if !(t_exit > t_enter) {
        return Ok(lengths);
    }

    let mut ts = Vec::with_capacity(2 * n + 4);
    ts.push(t_enter);
    for (o, d) in [(ox, dx), (oy, dy)] {
        if d.abs() < 1e-15 {
            continue;
        }
        for i in 0..=n {
            let t = (-half + i as f64 * px - o) / d;
            if t > t_enter && t < t_exit {
                ts.push(t);
            }
        }
    }
    ts.push(t_exit);
    ts.sort_by(f64::total_cmp);

    for w in ts.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let tm = 0.5 * (w[0] + w[1]);
        let m = phantom.material_at(ox + tm * dx, oy + tm * dy);
        lengths[m.index()] += len / 10.0;
    }
    Ok(lengths)
}

/// Per-ray material chord lengths for a whole acquisition.
#[derive(Debug, Clone)]
pub struct PathTable {
    geometry: Geometry,
    lengths: Vec<[f64; Material::COUNT]>,
}

impl PathTable {
    pub fn trace(phantom: &Phantom, geometry: &Geometry) -> Result<Self> {
        geometry.validate()?;
        let nd = geometry.n_detectors;
        let lengths = (0..geometry.n_angles * nd)
            .into_par_iter()
            .map(|i| ray_path_lengths(phantom, &geometry.ray(i / nd, i % nd)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            geometry: *geometry,
            lengths,
        })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn lengths(&self) -> &[[f64; Material::COUNT]] {
        &self.lengths
    }

    /// Σ_m μ_m(E)·L_m for every ray.
    pub fn mono(&self, library: &MaterialLibrary, energy: f64) -> Result<Sinogram> {
        let mu = library.linear_attenuations(energy)?;
        let data = self.lengths.iter().map(|l| dot(&mu, l)).collect();
        Ok(Sinogram {
            geometry: self.geometry,
            data,
        })
    }

    /// −ln Σ_E φ(E)·exp(−Σ_m μ_m(E)·L_m) with φ normalised to unit total and
    /// the transmission clamped at `floor`.
    pub fn poly(&self, library: &MaterialLibrary, spectrum: &Spectrum, floor: f64) -> Result<Sinogram> {
        let bins = spectrum
            .energies()
            .iter()
            .zip(spectrum.flux())
            .filter(|(_, f)| **f > 0.0)
            .map(|(&e, &f)| Ok((f, library.linear_attenuations(e)?)))
            .collect::<Result<Vec<_>>>()?;
        // summed in the same order as the numerator so an empty ray gives exactly 1
        let total: f64 = bins.iter().map(|(f, _)| f).sum();
        if !(total > 0.0) {
            return Err(Error::invalid("spectrum has no positive flux"));
        }
        let data = self
            .lengths
            .par_iter()
            .map(|l| {
                let t: f64 = bins.iter().map(|(f, mu)| f * (-dot(mu, l)).exp()).sum::<f64>() / total;
                -t.max(floor).ln()
            })
            .collect();
        Ok(Sinogram {
            geometry: self.geometry,
            data,
        })
    }
}

fn dot(mu: &[f64; Material::COUNT], l: &[f64; Material::COUNT]) -> f64 {
    mu.iter().zip(l).map(|(a, b)| a * b).sum()
}

pub fn mono_projection(
    phantom: &Phantom,
    geometry: &Geometry,
    library: &MaterialLibrary,
    energy: f64,
) -> Result<Sinogram> {
    PathTable::trace(phantom, geometry)?.mono(library, energy)
}

pub fn poly_projection(
    phantom: &Phantom,
    geometry: &Geometry,
    library: &MaterialLibrary,
    spectrum: &Spectrum,
) -> Result<Sinogram> {
    PathTable::trace(phantom, geometry)?.poly(library, spectrum, TRANSMISSION_FLOOR)
}

/// Projected attenuation, `n_angles` rows of `n_detectors` values.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    geometry: Geometry,
    data: Vec<f64>,
}

impl Sinogram {
    pub fn new(geometry: Geometry, data: Vec<f64>) -> Result<Self> {
        geometry.validate()?;
        if data.len() != geometry.n_angles * geometry.n_detectors {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {}x{} sinogram",
                data.len(),
                geometry.n_angles,
                geometry.n_detectors
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sinogram entries must be finite"));
        }
        Ok(Self { geometry, data })
    }

    pub fn zeros(geometry: Geometry) -> Self {
        Self {
            data: vec![0.0; geometry.n_angles * geometry.n_detectors],
            geometry,
        }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, a: usize) -> &[f64] {
        let nd = self.geometry.n_detectors;
        &self.data[a * nd..(a + 1) * nd]
    }

    pub fn get(&self, a: usize, d: usize) -> f64 {
        self.data[a * self.geometry.n_detectors + d]
    }

    /// Entrywise `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Sinogram, b: f64) -> Result<Sinogram> {
        if self.geometry != other.geometry {
            return Err(Error::DimensionMismatch("sinogram geometries differ".into()));
        }
        Ok(Sinogram {
            geometry: self.geometry,
            data: self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect(),
        })
    }

    /// `SINO <n_angles> <n_detectors> <angle_step_deg> <detector_spacing_mm>`,
    /// with `fan <fan_angle_deg> <source_distance_mm>` appended for fan data,
    /// then one line per angle.
    pub fn to_text(&self) -> String {
        let g = &self.geometry;
        let mut out = format!(
            "SINO {} {} {} {}",
            g.n_angles, g.n_detectors, g.angle_step_deg, g.detector_spacing_mm
        );
        if let BeamMode::Fan {
            fan_angle_deg,
            source_distance_mm,
        } = g.mode
        {
            out.push_str(&format!(" fan {fan_angle_deg} {source_distance_mm}"));
        }
        out.push('\n');
        for row in self.data.chunks(g.n_detectors) {
            push_row(&mut out, row);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (hl, header) = lines.next().ok_or_else(|| Error::parse(1, "empty sinogram file"))?;
        let f: Vec<&str> = header.split_whitespace().collect();
        let bad_header = || {
            Error::parse(
                hl,
                "expected header 'SINO <n_angles> <n_detectors> <angle_step_deg> <detector_spacing_mm> [fan <deg> <mm>]'",
            )
        };
        if f.first() != Some(&"SINO") || !(f.len() == 5 || (f.len() == 8 && f[5] == "fan")) {
            return Err(bad_header());
        }
        let n_angles = parse_usize(f[1], hl)?;
        let n_detectors = parse_usize(f[2], hl)?;
        let angle_step_deg = parse_f64(f[3], hl)?;
        let detector_spacing_mm = parse_f64(f[4], hl)?;
        let mode = if f.len() == 8 {
            BeamMode::Fan {
                fan_angle_deg: parse_f64(f[6], hl)?,
                source_distance_mm: parse_f64(f[7], hl)?,
            }
        } else {
            BeamMode::Parallel
        };
        let geometry = Geometry {
            mode,
            n_angles,
            angle_step_deg,
            n_detectors,
            detector_spacing_mm,
        };
        geometry.validate().map_err(|e| Error::parse(hl, e.to_string()))?;
        let mut data = Vec::with_capacity(n_angles * n_detectors);
        let mut rows = 0;
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let before = data.len();
            for tok in line.split_whitespace() {
                data.push(parse_f64(tok, n)?);
            }
            if data.len() - before != n_detectors {
                return Err(Error::parse(n, format!("expected {n_detectors} values per row")));
            }
            rows += 1;
        }
        if rows != n_angles {
            return Err(Error::parse(hl, format!("expected {n_angles} rows, found {rows}")));
        }
        Sinogram::new(geometry, data).map_err(|e| Error::parse(hl, e.to_string()))
    }
}

/// Rebins a full-circle fan sinogram onto a parallel grid covering the fan's
/// field of view with the same number of detectors.
pub fn fan_to_parallel_rebin(sino: &Sinogram) -> Result<Sinogram> {
    match sino.geometry.mode {
        BeamMode::Fan {
            fan_angle_deg,
            source_distance_mm,
        } => {
            let n = sino.geometry.n_detectors.max(2);
            let fov = source_distance_mm * (fan_angle_deg.to_radians() / 2.0).sin();
            fan_to_parallel_rebin_to(sino, n, 2.0 * fov / (n as f64 - 1.0))
        }
        BeamMode::Parallel => Err(Error::Geometry("rebinning expects a fan-beam sinogram".into())),
    }
}

/// Rebins onto `n_detectors` parallel detectors at `spacing_mm`, keeping the
/// view angles. Offsets outside the fan read as zero.
pub fn fan_to_parallel_rebin_to(
    sino: &Sinogram,
    n_detectors: usize,
    spacing_mm: f64,
) -> Result<Sinogram> {
    let g = sino.geometry;
    let (fan_angle_deg, d_src) = match g.mode {
        BeamMode::Fan {
            fan_angle_deg,
            source_distance_mm,
        } => (fan_angle_deg, source_distance_mm),
        BeamMode::Parallel => {
            return Err(Error::Geometry("rebinning expects a fan-beam sinogram".into()))
        }
    };
    if !g.covers_full_circle() {
        return Err(Error::Geometry("rebinning needs a full 360° fan scan".into()));
    }
    if g.n_detectors < 2 {
        return Err(Error::Geometry("rebinning needs at least two fan detectors".into()));
    }
    let out_geom = Geometry::parallel(g.n_angles, g.angle_step_deg, n_detectors, spacing_mm)?;
    let half_fan = fan_angle_deg.to_radians() / 2.0;
    let gamma_step = fan_angle_deg.to_radians() / (g.n_detectors as f64 - 1.0);
    let centre = (g.n_detectors as f64 - 1.0) / 2.0;
    let na = g.n_angles as f64;

    let data = (0..g.n_angles * n_detectors)
        .into_par_iter()
        .map(|i| {
            let (a, k) = (i / n_detectors, i % n_detectors);
            let s = out_geom.detector_offset(k);
            if s.abs() > d_src {
                return 0.0;
            }
            let gamma = (s / d_src).asin();
            if gamma.abs() > half_fan + 1e-12 {
                return 0.0;
            }
            let beta_deg = a as f64 * g.angle_step_deg + gamma.to_degrees();
            let fa = (beta_deg / g.angle_step_deg).rem_euclid(na);
            let fd = (gamma / gamma_step + centre).clamp(0.0, g.n_detectors as f64 - 1.0);
            let a0 = fa.floor() as usize % g.n_angles;
            let a1 = (a0 + 1) % g.n_angles;
            let wa = fa - fa.floor();
            let d0 = (fd.floor() as usize).min(g.n_detectors - 2);
            let wd = fd - d0 as f64;
            let v = |a: usize, d: usize| sino.get(a, d);
            (1.0 - wa) * ((1.0 - wd) * v(a0, d0) + wd * v(a0, d0 + 1))
                + wa * ((1.0 - wd) * v(a1, d0) + wd * v(a1, d0 + 1))
        })
        .collect();
    Sinogram::new(out_geom, data)
}
