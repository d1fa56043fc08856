//! Attenuation tables, the source spectrum and the phantom.
//!
//! Energies are in keV, mass attenuation in cm²/g, densities in g/cm³ and
//! linear attenuation in 1/cm. Phantom geometry is in millimetres.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Photons below this energy are treated as outliers and carry no flux.
pub const MIN_ENERGY_KEV: f64 = 10.0;

/// Water mass attenuation coefficients (keV, cm²/g), ICRU-44 values.
pub const WATER_MASS_ATTENUATION: [(f64, f64); 10] = [
    (10.0, 5.329),
    (15.0, 1.673),
    (20.0, 0.8096),
    (30.0, 0.3756),
    (40.0, 0.2683),
    (50.0, 0.2269),
    (60.0, 0.2059),
    (80.0, 0.1837),
    (100.0, 0.1707),
    (150.0, 0.1505),
];

/// Materials present in the phantom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Material {
    Air,
    Water,
    Lung,
    RibBone,
    Skull,
}

impl Material {
    pub const COUNT: usize = 5;
    pub const ALL: [Material; Material::COUNT] = [
        Material::Air,
        Material::Water,
        Material::Lung,
        Material::RibBone,
        Material::Skull,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Default density in g/cm³.
    pub fn density(self) -> f64 {
        match self {
            Material::Air => 0.0,
            Material::Water => 1.0,
            Material::Lung => 0.26,
            Material::RibBone => 1.92,
            Material::Skull => 1.61,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Material::Air => "air",
            Material::Water => "water",
            Material::Lung => "lung",
            Material::RibBone => "rib_bone",
            Material::Skull => "skull",
        }
    }
}

impl fmt::Display for Material {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Material {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Material::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown material '{s}'")))
    }
}

/// Tabulated mass attenuation of one material plus its density.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialTable {
    material: Material,
    density: f64,
    samples: Vec<(f64, f64)>,
}

impl MaterialTable {
    pub fn new(material: Material, density: f64, samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("material table has no samples"));
        }
        if !(density >= 0.0 && density.is_finite()) {
            return Err(Error::invalid(format!("density {density} must be >= 0")));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("table energies must be strictly increasing"));
        }
        if samples.iter().any(|&(e, v)| !(e > 0.0) || !(v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid("table energies and coefficients must be positive"));
        }
        Ok(Self {
            material,
            density,
            samples,
        })
    }

    /// The shipped water table.
    pub fn water() -> Self {
        Self::density_scaled_water(Material::Water, 1.0)
    }

    /// Water's mass attenuation curve carried at another material's density.
    pub fn density_scaled_water(material: Material, density: f64) -> Self {
        Self {
            material,
            density,
            samples: WATER_MASS_ATTENUATION.to_vec(),
        }
    }

    pub fn material(&self) -> Material {
        self.material
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn energy_range(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    /// Mass attenuation μ/ρ at `energy`, log-log interpolated between the
    /// bracketing samples. Tabulated energies return the stored value as is.
    pub fn mass_attenuation(&self, energy: f64) -> Result<f64> {
        let (lo, hi) = self.energy_range();
        if !(energy >= lo && energy <= hi) {
            return Err(Error::EnergyOutOfRange { energy, lo, hi });
        }
        let idx = self.samples.partition_point(|&(e, _)| e < energy);
        let (e1, v1) = self.samples[idx];
        if e1 == energy {
            return Ok(v1);
        }
        let (e0, v0) = self.samples[idx - 1];
        let t = (energy.ln() - e0.ln()) / (e1.ln() - e0.ln());
        Ok((v0.ln() + t * (v1.ln() - v0.ln())).exp())
    }

    /// Linear attenuation μ = (μ/ρ)·ρ in 1/cm.
    pub fn linear_attenuation(&self, energy: f64) -> Result<f64> {
        Ok(self.mass_attenuation(energy)? * self.density)
    }

    /// Parses the `MAT <name> <density>` text format. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "empty material file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 || fields[0] != "MAT" {
            return Err(Error::parse(hline, "expected header 'MAT <name> <density>'"));
        }
        let material = fields[1]
            .parse::<Material>()
            .map_err(|e| Error::parse(hline, e.to_string()))?;
        let density = parse_f64(fields[2], hline)?;
        let mut samples = Vec::new();
        for (n, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 2 {
                return Err(Error::parse(n, "expected '<energy_keV> <mu_over_rho>'"));
            }
            samples.push((parse_f64(f[0], n)?, parse_f64(f[1], n)?));
        }
        Self::new(material, density, samples).map_err(|e| Error::parse(hline, e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("MAT {} {}\n", self.material, self.density);
        for (e, v) in &self.samples {
            out.push_str(&format!("{e} {v}\n"));
        }
        out
    }
}

pub(crate) fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::parse(line, format!("'{s}' is not a number")))
}

/// One attenuation table per material.
#[derive(Debug, Clone)]
pub struct MaterialLibrary {
    tables: Vec<MaterialTable>,
}

impl Default for MaterialLibrary {
    /// Every material falls back to water's curve at its own density.
    fn default() -> Self {
        Self {
            tables: Material::ALL
                .iter()
                .map(|&m| MaterialTable::density_scaled_water(m, m.density()))
                .collect(),
        }
    }
}

impl MaterialLibrary {
    pub fn table(&self, material: Material) -> &MaterialTable {
        &self.tables[material.index()]
    }

    /// Replaces the table for `table.material()`.
    pub fn set_table(&mut self, table: MaterialTable) {
        let i = table.material().index();
        self.tables[i] = table;
    }

    /// Multiplies every density by `factor`.
    pub fn scaled_densities(&self, factor: f64) -> Self {
        Self {
            tables: self
                .tables
                .iter()
                .map(|t| t.clone().with_density(t.density() * factor))
                .collect(),
        }
    }

    /// Linear attenuation of every material at `energy`, indexed by
    /// [`Material::index`].
    pub fn linear_attenuations(&self, energy: f64) -> Result<[f64; Material::COUNT]> {
        let mut mu = [0.0; Material::COUNT];
        for (slot, t) in mu.iter_mut().zip(&self.tables) {
            *slot = t.linear_attenuation(energy)?;
        }
        Ok(mu)
    }
}

/// Relative photon flux sampled on energy bin centres.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    energies: Vec<f64>,
    flux: Vec<f64>,
}

impl Spectrum {
    /// Builds a spectrum; flux below [`MIN_ENERGY_KEV`] is zeroed.
    pub fn new(energies: Vec<f64>, mut flux: Vec<f64>) -> Result<Self> {
        if energies.is_empty() || energies.len() != flux.len() {
            return Err(Error::invalid("spectrum needs equal, non-empty energy and flux lists"));
        }
        if energies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("spectrum energies must be strictly increasing"));
        }
        if flux.iter().any(|f| !(*f >= 0.0) || !f.is_finite()) {
            return Err(Error::invalid("spectrum flux must be finite and non-negative"));
        }
        for (e, f) in energies.iter().zip(flux.iter_mut()) {
            if *e < MIN_ENERGY_KEV {
                *f = 0.0;
            }
        }
        Ok(Self { energies, flux })
    }

    /// Kramers bremsstrahlung approximation, flux ∝ (kvp − E)/E on
    /// [10, kvp], normalised to unit total.
    pub fn kramers(kvp: f64, grid: &[f64]) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::invalid("empty energy grid"));
        }
        if !(kvp > MIN_ENERGY_KEV && kvp <= 150.0) {
            return Err(Error::invalid(format!("kvp {kvp} must lie in (10, 150]")));
        }
        let flux = grid
            .iter()
            .map(|&e| {
                if (MIN_ENERGY_KEV..=kvp).contains(&e) {
                    (kvp - e) / e
                } else {
                    0.0
                }
            })
            .collect();
        Spectrum::new(grid.to_vec(), flux)?.normalized()
    }

    /// A single bin carrying all the flux.
    pub fn monochromatic(energy: f64) -> Result<Self> {
        if energy < MIN_ENERGY_KEV {
            return Err(Error::invalid(format!(
                "monochromatic energy {energy} keV is below {MIN_ENERGY_KEV} keV"
            )));
        }
        Spectrum::new(vec![energy], vec![1.0])
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn flux(&self) -> &[f64] {
        &self.flux
    }

    pub fn total(&self) -> f64 {
        self.flux.iter().sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let total = self.total();
        if !(total > 0.0) {
            return Err(Error::Degenerate("spectrum has zero total flux".into()));
        }
        Ok(Self {
            energies: self.energies.clone(),
            flux: self.flux.iter().map(|f| f / total).collect(),
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            energies: self.energies.clone(),
            flux: self.flux.iter().map(|f| f * factor).collect(),
        }
    }

    /// Flux-weighted mean energy.
    pub fn mean_energy(&self) -> f64 {
        let t = self.total();
        self.energies.iter().zip(&self.flux).map(|(e, f)| e * f).sum::<f64>() / t
    }

    /// Sum of flux over bins with `lo <= E <= hi`.
    pub fn flux_in_interval(&self, lo: f64, hi: f64) -> f64 {
        self.energies
            .iter()
            .zip(&self.flux)
            .filter(|(e, _)| **e >= lo && **e <= hi)
            .map(|(_, f)| f)
            .sum()
    }
}

/// Integer-keV grid `lo, lo+step, ..., <= hi`.
pub fn energy_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// Phantom radius in mm.
pub const PHANTOM_RADIUS_MM: f64 = 5.0;
/// Tissue square edge in mm.
pub const TISSUE_EDGE_MM: f64 = 1.0;
/// Tissue square centres (mm).
pub const TISSUE_CENTRES: [(Material, f64, f64); 3] = [
    (Material::RibBone, 2.0, 2.0),
    (Material::Lung, 0.0, 2.0),
    (Material::Skull, -2.0, 2.0),
];

/// Square raster of materials centred on the rotation axis.
///
/// Row 0 is the top of the image (largest y); column 0 is the left (smallest x).
#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    size: usize,
    pixel_size: f64,
    cells: Vec<Material>,
}

impl Phantom {
    /// The water cylinder slice with the rib, lung and skull squares.
    pub fn build(resolution: usize, extent_mm: f64) -> Result<Self> {
        if resolution < 32 {
            return Err(Error::invalid(format!("resolution {resolution} must be >= 32")));
        }
        if !(extent_mm >= 12.0) {
            return Err(Error::invalid(format!(
                "extent {extent_mm} mm cannot hold the 10 mm cylinder plus margin (need >= 12 mm)"
            )));
        }
        Ok(Self::from_fn(resolution, extent_mm, reference_material))
    }

    /// A centred disk of `material` on air; handy for oracle tests.
    pub fn disk(resolution: usize, extent_mm: f64, radius_mm: f64, material: Material) -> Self {
        Self::from_fn(resolution, extent_mm, |x, y| {
            if x * x + y * y <= radius_mm * radius_mm {
                material
            } else {
                Material::Air
            }
        })
    }

    /// Samples `f(x_mm, y_mm)` at every cell centre.
    pub fn from_fn(resolution: usize, extent_mm: f64, f: impl Fn(f64, f64) -> Material) -> Self {
        let pixel_size = extent_mm / resolution as f64;
        let mut cells = Vec::with_capacity(resolution * resolution);
        for row in 0..resolution {
            for col in 0..resolution {
                let (x, y) = cell_centre(resolution, pixel_size, row, col);
                cells.push(f(x, y));
            }
        }
        Self {
            size: resolution,
            pixel_size,
            cells,
        }
    }

    pub fn from_cells(size: usize, pixel_size: f64, cells: Vec<Material>) -> Result<Self> {
        if cells.len() != size * size || size == 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} cells for a {size}x{size} phantom",
                cells.len()
            )));
        }
        Ok(Self {
            size,
            pixel_size,
            cells,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn pixel_size(&self) -> f64 {
        self.pixel_size
    }

    pub fn extent(&self) -> f64 {
        self.pixel_size * self.size as f64
    }

    pub fn cells(&self) -> &[Material] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> Material {
        self.cells[row * self.size + col]
    }

    /// Cell centre in mm.
    pub fn centre_of(&self, row: usize, col: usize) -> (f64, f64) {
        cell_centre(self.size, self.pixel_size, row, col)
    }

    /// Cell containing the point, if inside the raster.
    pub fn cell_at(&self, x_mm: f64, y_mm: f64) -> Option<(usize, usize)> {
        let half = self.extent() / 2.0;
        let col = ((x_mm + half) / self.pixel_size).floor();
        let row = ((half - y_mm) / self.pixel_size).floor();
        let n = self.size as f64;
        (col >= 0.0 && col < n && row >= 0.0 && row < n).then(|| (row as usize, col as usize))
    }

    pub fn material_at(&self, x_mm: f64, y_mm: f64) -> Material {
        self.cell_at(x_mm, y_mm)
            .map_or(Material::Air, |(r, c)| self.get(r, c))
    }

    /// Shifts the raster by whole cells, filling with air.
    pub fn shifted(&self, d_row: isize, d_col: isize) -> Self {
        let n = self.size as isize;
        let mut cells = vec![Material::Air; self.cells.len()];
        for r in 0..n {
            for c in 0..n {
                let (sr, sc) = (r - d_row, c - d_col);
                if (0..n).contains(&sr) && (0..n).contains(&sc) {
                    cells[(r * n + c) as usize] = self.cells[(sr * n + sc) as usize];
                }
            }
        }
        Self {
            size: self.size,
            pixel_size: self.pixel_size,
            cells,
        }
    }

    /// Linear attenuation map (1/cm) at `energy`, row-major.
    pub fn attenuation_map(&self, library: &MaterialLibrary, energy: f64) -> Result<Vec<f64>> {
        let mu = library.linear_attenuations(energy)?;
        Ok(self.cells.iter().map(|m| mu[m.index()]).collect())
    }
}

fn cell_centre(size: usize, pixel_size: f64, row: usize, col: usize) -> (f64, f64) {
    let half = size as f64 * pixel_size / 2.0;
    (
        (col as f64 + 0.5) * pixel_size - half,
        half - (row as f64 + 0.5) * pixel_size,
    )
}

/// Material of the reference phantom at a point (mm).
pub fn reference_material(x: f64, y: f64) -> Material {
    let h = TISSUE_EDGE_MM / 2.0;
    for (m, cx, cy) in TISSUE_CENTRES {
        if (x - cx).abs() <= h && (y - cy).abs() <= h {
            return m;
        }
    }
    if x * x + y * y <= PHANTOM_RADIUS_MM * PHANTOM_RADIUS_MM {
        Material::Water
    } else {
        Material::Air
    }
}
