//! Minimal coincident interface area (MCIA) search.
//!
//! For a substrate mesh and a film mesh, every pair of integer supercells
//! (indexed by Hermite normal forms) is tested for coincidence: the film
//! supercell basis is mapped exactly onto a substrate supercell basis, the
//! resulting deformation `S` is split into rotation and stretch, and the pair
//! is accepted when both principal stretches lie within the strain tolerance.
//! Substrate supercell index grows monotonically, so the first index with a
//! feasible pair bounds the search.

use std::cmp::Ordering;
use std::collections::HashMap;

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::crystal::{reduce_tracked, BulkLattice, MillerIndex, SurfaceMesh, Vec2};
use crate::par::{self, Exec};

/// Integer 2x2 matrix; rows are supercell vectors in mesh coordinates.
pub type IMat2 = [[i64; 2]; 2];

pub fn det(m: &IMat2) -> i64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Search tolerances.
///
/// The defaults are calibrated against reference areas for TiO2 on (100)
/// III-V and Si substrates; see the crate README.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MciaConfig {
    /// Largest substrate supercell area considered, Å².
    pub max_area: f64,
    /// Largest allowed |principal stretch - 1|.
    pub max_linear_strain: f64,
    /// Cap on either supercell determinant.
    pub max_index: u32,
}

impl Default for MciaConfig {
    fn default() -> Self {
        MciaConfig { max_area: DEFAULT_MAX_AREA, max_linear_strain: DEFAULT_MAX_STRAIN, max_index: 40 }
    }
}

/// Default supercell area bound, Å².
pub const DEFAULT_MAX_AREA: f64 = 500.0;
/// Calibrated default strain tolerance.
pub const DEFAULT_MAX_STRAIN: f64 = 0.0556;

impl MciaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_area > 0.0 && self.max_area.is_finite()) {
            return Err(Error::InvalidInput(format!("max_area must be > 0, got {}", self.max_area)));
        }
        if !(self.max_linear_strain > 0.0 && self.max_linear_strain < 0.5) {
            return Err(Error::InvalidInput(format!(
                "max_linear_strain must be in (0, 0.5), got {}",
                self.max_linear_strain
            )));
        }
        if self.max_index == 0 {
            return Err(Error::InvalidInput("max_index must be >= 1".into()));
        }
        Ok(())
    }
}

/// A coincident substrate/film supercell pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    /// Hermite normal forms indexing the two sublattices.
    pub substrate_hnf: IMat2,
    pub film_hnf: IMat2,
    /// Matched supercell bases (reduced), rows in mesh coordinates.
    pub substrate_supercell: IMat2,
    pub film_supercell: IMat2,
    pub n_sub: u32,
    pub n_film: u32,
    /// Rotation taking the film frame onto the substrate frame, degrees.
    pub rotation_deg: f64,
    /// Deformation mapping the film supercell basis onto the substrate one.
    pub strain: Matrix2<f64>,
    /// Principal stretches (singular values of `strain`), descending.
    pub stretches: [f64; 2],
    /// Substrate supercell area, Å².
    pub area: f64,
    /// Unstrained film supercell area, Å².
    pub film_area: f64,
    pub misfit: f64,
}

/// All index-`n` sublattices as Hermite normal forms `[[a, b], [0, d]]`,
/// `a * d == n`, `0 <= b < d`. There are σ(n) of them.
pub fn hnf_matrices(n: i64) -> Result<Vec<IMat2>> {
    if n <= 0 {
        return Err(Error::InvalidInput(format!("sublattice index must be >= 1, got {n}")));
    }
    let mut out = Vec::new();
    for a in 1..=n {
        if n % a != 0 {
            continue;
        }
        let d = n / a;
        for b in 0..d {
            out.push([[a, b], [0, d]]);
        }
    }
    Ok(out)
}

/// An index-n sublattice of a mesh with its real-space vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Sublattice {
    pub hnf: IMat2,
    pub u: Vec2,
    pub v: Vec2,
}

pub fn enumerate_sublattices(mesh: &SurfaceMesh, n: i64) -> Result<Vec<Sublattice>> {
    Ok(hnf_matrices(n)?
        .into_iter()
        .map(|hnf| {
            let (u, v) = apply(mesh, &hnf);
            Sublattice { hnf, u, v }
        })
        .collect())
}

fn apply(mesh: &SurfaceMesh, m: &IMat2) -> (Vec2, Vec2) {
    let row = |r: [i64; 2]| mesh.u * r[0] as f64 + mesh.v * r[1] as f64;
    (row(m[0]), row(m[1]))
}

/// Reduced supercell: basis vectors plus their integer coordinates.
#[derive(Debug, Clone)]
struct Cell {
    hnf: IMat2,
    coeffs: IMat2,
    basis: Matrix2<f64>,
}

fn reduced_cell(mesh: &SurfaceMesh, hnf: IMat2) -> Cell {
    let (u, v) = apply(mesh, &hnf);
    let ((u, v), (cu, cv)) = reduce_tracked(u, v, hnf[0], hnf[1]);
    Cell { hnf, coeffs: [cu, cv], basis: Matrix2::from_columns(&[u, v]) }
}

/// Integer coefficients of a basis with its real-space columns.
type Variant = (IMat2, Matrix2<f64>);

/// Positively oriented bases of a reduced cell built from its shortest
/// vectors; one of them is nearest to any slightly strained image basis.
fn basis_variants(cell: &Cell) -> Vec<Variant> {
    let [cu, cv] = cell.coeffs;
    let u = cell.basis.column(0).into_owned();
    let v = cell.basis.column(1).into_owned();
    let n = det(&cell.coeffs);
    let short = [
        (cu, u),
        (cv, v),
        ([cu[0] + cv[0], cu[1] + cv[1]], u + v),
        ([cu[0] - cv[0], cu[1] - cv[1]], u - v),
    ];
    let mut vecs = Vec::with_capacity(8);
    for (c, x) in short {
        vecs.push((c, x));
        vecs.push(([-c[0], -c[1]], -x));
    }
    let mut out = Vec::new();
    for (ca, a) in &vecs {
        for (cb, b) in &vecs {
            let m = [*ca, *cb];
            if det(&m) == n {
                out.push((m, Matrix2::from_columns(&[*a, *b])));
            }
        }
    }
    out
}

/// Singular values of a 2x2 matrix, descending.
pub fn singular_values(s: &Matrix2<f64>) -> [f64; 2] {
    let fro2 = s.norm_squared();
    let d = s.determinant();
    let disc = (fro2 * fro2 - 4.0 * d * d).max(0.0).sqrt();
    let s1 = ((fro2 + disc) / 2.0).sqrt();
    let s2 = if s1 > 0.0 { d.abs() / s1 } else { 0.0 };
    [s1, s2]
}

/// Max deviation of the principal stretches from 1.
pub fn misfit_of(s: &Matrix2<f64>) -> f64 {
    let [s1, s2] = singular_values(s);
    (s1 - 1.0).abs().max((s2 - 1.0).abs())
}

/// Polar rotation angle of a matrix with positive determinant, degrees,
/// folded into (-90, 90] since every 2-D lattice is centrosymmetric.
pub fn polar_rotation_deg(s: &Matrix2<f64>) -> f64 {
    let deg = (s[(1, 0)] - s[(0, 1)]).atan2(s[(0, 0)] + s[(1, 1)]).to_degrees();
    if deg > 90.0 {
        deg - 180.0
    } else if deg <= -90.0 {
        deg + 180.0
    } else {
        deg
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    misfit: f64,
    sub_hnf: IMat2,
    film_hnf: IMat2,
    sub_coeffs: IMat2,
    film_coeffs: IMat2,
    strain: Matrix2<f64>,
}

fn flat(m: &IMat2) -> [i64; 4] {
    [m[0][0], m[0][1], m[1][0], m[1][1]]
}

fn candidate_order(a: &Candidate, b: &Candidate) -> Ordering {
    a.misfit
        .total_cmp(&b.misfit)
        .then_with(|| flat(&a.sub_hnf).cmp(&flat(&b.sub_hnf)))
        .then_with(|| flat(&a.film_hnf).cmp(&flat(&b.film_hnf)))
        .then_with(|| flat(&a.sub_coeffs).cmp(&flat(&b.sub_coeffs)))
}

fn evaluate(
    variants: &[(IMat2, Matrix2<f64>)],
    sub_hnf: IMat2,
    film: &Cell,
    tol: f64,
) -> Option<Candidate> {
    let film_inv = film.basis.try_inverse()?;
    let mut best: Option<Candidate> = None;
    for (coeffs, basis) in variants {
        let s = basis * film_inv;
        let m = misfit_of(&s);
        if m > tol {
            continue;
        }
        let c = Candidate {
            misfit: m,
            sub_hnf,
            film_hnf: film.hnf,
            sub_coeffs: *coeffs,
            film_coeffs: film.coeffs,
            strain: s,
        };
        if best.as_ref().is_none_or(|b| candidate_order(&c, b) == Ordering::Less) {
            best = Some(c);
        }
    }
    best
}

/// Minimal coincident interface area between two meshes.
pub fn mcia(substrate: &SurfaceMesh, film: &SurfaceMesh, cfg: &MciaConfig) -> Result<Match> {
    mcia_with(substrate, film, cfg, Exec::Auto)
}

pub fn mcia_with(
    substrate: &SurfaceMesh,
    film: &SurfaceMesh,
    cfg: &MciaConfig,
    exec: Exec,
) -> Result<Match> {
    cfg.validate()?;
    let a_sub = substrate.area();
    let a_film = film.area();
    let tol = cfg.max_linear_strain;
    let (lo, hi) = ((1.0 - tol).powi(2), (1.0 + tol).powi(2));
    let max_n_sub = ((cfg.max_area / a_sub) * (1.0 + 1e-12)).floor().min(cfg.max_index as f64) as i64;

    let mut film_cells: HashMap<i64, Vec<Cell>> = HashMap::new();

    for n_sub in 1..=max_n_sub {
        let sub_area = n_sub as f64 * a_sub;
        // det S = sub_area / film_area must lie in [(1-t)^2, (1+t)^2]
        let nf_min = ((sub_area / hi / a_film) * (1.0 - 1e-12)).ceil().max(1.0) as i64;
        let nf_max = ((sub_area / lo / a_film) * (1.0 + 1e-12)).floor().min(cfg.max_index as f64) as i64;
        if nf_min > nf_max {
            continue;
        }
        let sub_cells: Vec<(IMat2, Vec<Variant>)> = hnf_matrices(n_sub)?
            .into_iter()
            .map(|h| {
                let cell = reduced_cell(substrate, h);
                (h, basis_variants(&cell))
            })
            .collect();
        let mut tasks: Vec<(usize, &Cell)> = Vec::new();
        for n_film in nf_min..=nf_max {
            film_cells.entry(n_film).or_insert_with(|| {
                hnf_matrices(n_film)
                    .expect("positive index")
                    .into_iter()
                    .map(|h| reduced_cell(film, h))
                    .collect()
            });
        }
        for n_film in nf_min..=nf_max {
            for cell in &film_cells[&n_film] {
                for s in 0..sub_cells.len() {
                    tasks.push((s, cell));
                }
            }
        }
        let best = par::min_by(
            exec,
            &tasks,
            |(s, cell)| {
                let (hnf, variants) = &sub_cells[*s];
                evaluate(variants, *hnf, cell, tol)
            },
            |a, b| {
                let na = det(&a.film_hnf);
                let nb = det(&b.film_hnf);
                candidate_order(a, b).then(na.cmp(&nb))
            },
        );
        if let Some(c) = best {
            let stretches = singular_values(&c.strain);
            let n_film = det(&c.film_hnf);
            return Ok(Match {
                substrate_hnf: c.sub_hnf,
                film_hnf: c.film_hnf,
                substrate_supercell: c.sub_coeffs,
                film_supercell: c.film_coeffs,
                n_sub: n_sub as u32,
                n_film: n_film as u32,
                rotation_deg: polar_rotation_deg(&c.strain),
                strain: c.strain,
                stretches,
                area: sub_area,
                film_area: n_film as f64 * a_film,
                misfit: c.misfit,
            });
        }
    }
    Err(Error::NoMatch { max_area: cfg.max_area, max_strain: tol })
}

/// One film material with the orientations to scan.
#[derive(Debug, Clone)]
pub struct FilmSpec {
    pub lattice: BulkLattice,
    pub planes: Vec<MillerIndex>,
}

/// One cell of an orientation map.
#[derive(Debug, Clone)]
pub struct MapRow {
    pub substrate: String,
    pub substrate_plane: MillerIndex,
    pub film: String,
    pub plane: MillerIndex,
    /// `None` when no coincidence exists within the tolerances.
    pub result: Option<Match>,
    /// Smallest area among this (substrate, film) pair's orientations.
    pub is_min: bool,
}

/// Orientation map: one MCIA per (substrate, film, plane). Rows follow the
/// input order; NoMatch is a row state, not an error.
pub fn mcia_map(
    substrates: &[(BulkLattice, MillerIndex)],
    films: &[FilmSpec],
    cfg: &MciaConfig,
) -> Result<Vec<MapRow>> {
    mcia_map_with(substrates, films, cfg, Exec::Auto)
}

pub fn mcia_map_with(
    substrates: &[(BulkLattice, MillerIndex)],
    films: &[FilmSpec],
    cfg: &MciaConfig,
    exec: Exec,
) -> Result<Vec<MapRow>> {
    cfg.validate()?;
    if substrates.is_empty() || films.is_empty() {
        return Err(Error::InvalidInput("mcia_map needs at least one substrate and film".into()));
    }
    let mut jobs = Vec::new();
    for (si, (sub, sp)) in substrates.iter().enumerate() {
        for (fi, f) in films.iter().enumerate() {
            for p in &f.planes {
                jobs.push((si, fi, sub, *sp, &f.lattice, *p));
            }
        }
    }
    let results = par::map(exec, &jobs, |(_, _, sub, sp, film, p)| {
        let sm = crate::crystal::surface_mesh(sub, *sp);
        let fm = crate::crystal::surface_mesh(film, *p);
        // inner search stays sequential; the map is already split by row
        match mcia_with(&sm, &fm, cfg, Exec::Sequential) {
            Ok(m) => Ok(Some(m)),
            Err(Error::NoMatch { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    });
    let mut rows = Vec::with_capacity(jobs.len());
    for ((_, _, sub, sp, film, p), r) in jobs.iter().zip(results) {
        rows.push(MapRow {
            substrate: sub.name.clone(),
            substrate_plane: *sp,
            film: film.name.clone(),
            plane: *p,
            result: r?,
            is_min: false,
        });
    }
    let mut groups: Vec<(usize, usize)> = jobs.iter().map(|j| (j.0, j.1)).collect();
    groups.dedup();
    for g in groups {
        let best = jobs
            .iter()
            .enumerate()
            .filter(|(_, j)| (j.0, j.1) == g)
            .filter_map(|(i, _)| rows[i].result.as_ref().map(|m| (i, m.area, m.misfit)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.2.total_cmp(&b.2)).then(a.0.cmp(&b.0)));
        if let Some((i, _, _)) = best {
            rows[i].is_min = true;
        }
    }
    Ok(rows)
}
