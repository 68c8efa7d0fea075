//! Random chromophore configurations in a bounding sphere and point-dipole
//! couplings between them.
//!
//! A configuration always places the initial site at the north pole
//! (0, 0, +d/2) and the trap site at the south pole (0, 0, −d/2); the
//! remaining sites are uniform in the ball subject to a hard minimum
//! pairwise distance of 5 Å. Site energies are uniform in a window centered
//! at zero and dipole orientations are uniform on the unit sphere.

use crate::constants::MIN_DISTANCE;
use crate::error::{Error, Result};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use serde::{Deserialize, Serialize};

/// One pigment site: position (Å), unit dipole direction, site energy (cm⁻¹).
#[derive(Debug, Clone, PartialEq)]
pub struct Chromophore {
    pub position: Vector3<f64>,
    pub dipole_dir: Vector3<f64>,
    pub site_energy: f64,
}

/// A random multichromophoric complex inside a sphere of the given diameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub chromophores: Vec<Chromophore>,
    pub diameter: f64,
    pub initial_index: usize,
    pub trap_index: usize,
    pub seed: u64,
}

/// Point-dipole coupling model J = C·κ/r³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingModel {
    /// Prefactor C in cm⁻¹·Å³.
    pub dipole_strength_constant: f64,
}

impl Default for CouplingModel {
    fn default() -> Self {
        Self {
            dipole_strength_constant: crate::constants::DEFAULT_COUPLING_CONST,
        }
    }
}

impl CouplingModel {
    pub fn new(dipole_strength_constant: f64) -> Result<Self> {
        if !dipole_strength_constant.is_finite() || dipole_strength_constant <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dipole_strength_constant must be > 0, got {dipole_strength_constant}"
            )));
        }
        Ok(Self {
            dipole_strength_constant,
        })
    }
}

const MAX_CONSECUTIVE_REJECTIONS: u64 = 1_000_000;

/// Draw a random configuration: poles fixed, n−2 interior sites uniform in
/// the ball (resampled until the 5 Å minimum distance holds), dipoles uniform
/// on the sphere, energies uniform in [−window/2, +window/2].
///
/// Identical arguments produce a bit-identical configuration. The energy
/// window only scales the energy draws, so configurations with the same seed
/// share positions and dipoles across different windows.
pub fn sample_configuration(
    n: usize,
    diameter: f64,
    energy_window: f64,
    rng_seed: u64,
) -> Result<Configuration> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be ≥ 2, got {n}")));
    }
    if !diameter.is_finite() || diameter < 10.0 {
        return Err(Error::InvalidParameter(format!(
            "diameter must be ≥ 10 Å, got {diameter}"
        )));
    }
    if !energy_window.is_finite() || energy_window < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "energy_window must be ≥ 0, got {energy_window}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let radius = diameter / 2.0;
    let draw_site = |rng: &mut ChaCha8Rng, position: Vector3<f64>| -> Chromophore {
        let dir: [f64; 3] = UnitSphere.sample(rng);
        let energy_raw: f64 = rng.random_range(-0.5..0.5);
        Chromophore {
            position,
            dipole_dir: Vector3::from(dir).normalize(),
            site_energy: energy_raw * energy_window,
        }
    };

    let mut chromophores = Vec::with_capacity(n);
    chromophores.push(draw_site(&mut rng, Vector3::new(0.0, 0.0, radius)));
    chromophores.push(draw_site(&mut rng, Vector3::new(0.0, 0.0, -radius)));

    let mut rejections: u64 = 0;
    for site in 2..n {
        let position = loop {
            let x: f64 = rng.random_range(-radius..radius);
            let y: f64 = rng.random_range(-radius..radius);
            let z: f64 = rng.random_range(-radius..radius);
            let p = Vector3::new(x, y, z);
            let inside = p.norm() <= radius;
            let clear = inside
                && chromophores
                    .iter()
                    .all(|c| (c.position - p).norm() >= MIN_DISTANCE);
            if clear {
                rejections = 0;
                break p;
            }
            rejections += 1;
            if rejections >= MAX_CONSECUTIVE_REJECTIONS {
                return Err(Error::PackingInfeasible {
                    n,
                    diameter,
                    site,
                    rejections,
                    min_distance: MIN_DISTANCE,
                });
            }
        };
        chromophores.push(draw_site(&mut rng, position));
    }

    Ok(Configuration {
        chromophores,
        diameter,
        initial_index: 0,
        trap_index: 1,
        seed: rng_seed,
    })
}

/// Point-dipole coupling J = C·[μ̂_a·μ̂_b − 3(μ̂_a·r̂)(μ̂_b·r̂)]/r³ in cm⁻¹.
pub fn dipole_coupling(a: &Chromophore, b: &Chromophore, model: &CouplingModel) -> Result<f64> {
    let rvec = b.position - a.position;
    let r = rvec.norm();
    if r < MIN_DISTANCE {
        return Err(Error::TooClose {
            r,
            min: MIN_DISTANCE,
        });
    }
    let rhat = rvec / r;
    let kappa = a.dipole_dir.dot(&b.dipole_dir)
        - 3.0 * a.dipole_dir.dot(&rhat) * b.dipole_dir.dot(&rhat);
    Ok(model.dipole_strength_constant * kappa / (r * r * r))
}

/// Full pairwise coupling matrix (exactly symmetric, zero diagonal).
pub fn coupling_matrix(sites: &[Chromophore], model: &CouplingModel) -> Result<nalgebra::DMatrix<f64>> {
    let n = sites.len();
    let mut m = nalgebra::DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let jij = dipole_coupling(&sites[i], &sites[j], model)?;
            m[(i, j)] = jij;
            m[(j, i)] = jij;
        }
    }
    Ok(m)
}

impl Configuration {
    pub fn n(&self) -> usize {
        self.chromophores.len()
    }

    /// Check the structural invariants: pole placement, sphere containment,
    /// minimum pairwise distance, unit dipoles.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n < 2 {
            return Err(Error::InvalidParameter("configuration needs ≥ 2 sites".into()));
        }
        if self.initial_index >= n || self.trap_index >= n || self.initial_index == self.trap_index {
            return Err(Error::InvalidParameter(format!(
                "initial/trap indices {}/{} invalid for n={n}",
                self.initial_index, self.trap_index
            )));
        }
        let r = self.diameter / 2.0;
        let north = Vector3::new(0.0, 0.0, r);
        let south = Vector3::new(0.0, 0.0, -r);
        if (self.chromophores[self.initial_index].position - north).norm() > 1e-9
            || (self.chromophores[self.trap_index].position - south).norm() > 1e-9
        {
            return Err(Error::InvalidParameter(
                "initial/trap sites must sit on the north/south poles".into(),
            ));
        }
        for (i, c) in self.chromophores.iter().enumerate() {
            if c.position.norm() > r + 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "site {i} outside the bounding sphere"
                )));
            }
            if (c.dipole_dir.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!("site {i} dipole not unit length")));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let d = (self.chromophores[i].position - self.chromophores[j].position).norm();
                if d < MIN_DISTANCE {
                    return Err(Error::TooClose {
                        r: d,
                        min: MIN_DISTANCE,
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct SiteJson {
    pos: [f64; 3],
    dipole: [f64; 3],
    energy: f64,
}

#[derive(Serialize, Deserialize)]
struct ConfigurationJson {
    seed: u64,
    diameter: f64,
    sites: Vec<SiteJson>,
    initial: usize,
    trap: usize,
}

impl Serialize for Configuration {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mirror = ConfigurationJson {
            seed: self.seed,
            diameter: self.diameter,
            sites: self
                .chromophores
                .iter()
                .map(|c| SiteJson {
                    pos: [c.position.x, c.position.y, c.position.z],
                    dipole: [c.dipole_dir.x, c.dipole_dir.y, c.dipole_dir.z],
                    energy: c.site_energy,
                })
                .collect(),
            initial: self.initial_index,
            trap: self.trap_index,
        };
        mirror.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let mirror = ConfigurationJson::deserialize(deserializer)?;
        let config = Configuration {
            chromophores: mirror
                .sites
                .iter()
                .map(|s| Chromophore {
                    position: Vector3::from(s.pos),
                    dipole_dir: Vector3::from(s.dipole),
                    site_energy: s.energy,
                })
                .collect(),
            diameter: mirror.diameter,
            initial_index: mirror.initial,
            trap_index: mirror.trap,
            seed: mirror.seed,
        };
        config.validate().map_err(serde::de::Error::custom)?;
        Ok(config)
    }
}
