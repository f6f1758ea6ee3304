//! Crystal translation lattices and their two-dimensional surface meshes.
//!
//! Lattices are described by their *primitive* translation set: FCC for
//! zincblende and diamond-structure crystals, primitive tetragonal for rutile
//! and body-centred tetragonal for anatase. Surface meshes are the 2-D
//! lattices of translations lying in a given (hkl) plane, returned in a
//! Lagrange-reduced, positively oriented basis with `u` along +x.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Vector2, Vector3};
use serde::Deserialize;

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Bravais setting of a bulk crystal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrystalSystem {
    CubicFcc,
    CubicDiamondFcc,
    TetragonalP,
    TetragonalI,
}

impl CrystalSystem {
    pub fn is_cubic(self) -> bool {
        matches!(self, CrystalSystem::CubicFcc | CrystalSystem::CubicDiamondFcc)
    }

    /// Primitive translations in units of half the conventional axes.
    fn doubled_primitive(self) -> [[i64; 3]; 3] {
        match self {
            CrystalSystem::CubicFcc | CrystalSystem::CubicDiamondFcc => {
                [[0, 1, 1], [1, 0, 1], [1, 1, 0]]
            }
            CrystalSystem::TetragonalP => [[2, 0, 0], [0, 2, 0], [0, 0, 2]],
            CrystalSystem::TetragonalI => [[2, 0, 0], [0, 2, 0], [1, 1, 1]],
        }
    }
}

impl FromStr for CrystalSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cubic-fcc" | "fcc" => Ok(CrystalSystem::CubicFcc),
            "cubic-diamond-fcc" | "diamond" => Ok(CrystalSystem::CubicDiamondFcc),
            "tetragonal-p" => Ok(CrystalSystem::TetragonalP),
            "tetragonal-i" => Ok(CrystalSystem::TetragonalI),
            other => Err(Error::Config(format!("unknown crystal system '{other}'"))),
        }
    }
}

impl fmt::Display for CrystalSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CrystalSystem::CubicFcc => "cubic-fcc",
            CrystalSystem::CubicDiamondFcc => "cubic-diamond-fcc",
            CrystalSystem::TetragonalP => "tetragonal-p",
            CrystalSystem::TetragonalI => "tetragonal-i",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BulkLattice {
    pub name: String,
    pub system: CrystalSystem,
    /// Conventional a axis, Å.
    pub a: f64,
    /// Conventional c axis, Å. Equal to `a` for cubic systems.
    pub c: f64,
}

impl BulkLattice {
    pub fn new(name: impl Into<String>, system: CrystalSystem, a: f64, c: f64) -> Result<Self> {
        let c = if system.is_cubic() { a } else { c };
        if !(a > 0.0 && a.is_finite()) || !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "lattice constants must be positive, got a={a}, c={c}"
            )));
        }
        Ok(BulkLattice { name: name.into(), system, a, c })
    }

    pub fn gaas() -> Self {
        Self::new("GaAs", CrystalSystem::CubicFcc, 5.6533, 5.6533).unwrap()
    }

    pub fn gasb() -> Self {
        Self::new("GaSb", CrystalSystem::CubicFcc, 6.0959, 6.0959).unwrap()
    }

    pub fn si() -> Self {
        Self::new("Si", CrystalSystem::CubicDiamondFcc, 5.431, 5.431).unwrap()
    }

    pub fn rutile() -> Self {
        Self::new("rutile", CrystalSystem::TetragonalP, 4.594, 2.959).unwrap()
    }

    pub fn anatase() -> Self {
        Self::new("anatase", CrystalSystem::TetragonalI, 3.785, 9.514).unwrap()
    }

    /// Cartesian position of a translation given in half-conventional units.
    fn cartesian(&self, doubled: [i64; 3]) -> Vector3<f64> {
        Vector3::new(
            doubled[0] as f64 * self.a / 2.0,
            doubled[1] as f64 * self.a / 2.0,
            doubled[2] as f64 * self.c / 2.0,
        )
    }

    /// Interplanar spacing of the (hkl) family in the conventional cell.
    pub fn d_spacing(&self, plane: &MillerIndex) -> f64 {
        let (h, k, l) = (plane.h as f64, plane.k as f64, plane.l as f64);
        let inv_sq = (h * h + k * k) / (self.a * self.a) + l * l / (self.c * self.c);
        1.0 / inv_sq.sqrt()
    }
}

/// Miller index stored gcd-reduced with its first nonzero component positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MillerIndex {
    pub h: i32,
    pub k: i32,
    pub l: i32,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl MillerIndex {
    pub fn new(h: i32, k: i32, l: i32) -> Result<Self> {
        if h == 0 && k == 0 && l == 0 {
            return Err(Error::InvalidInput("Miller index (000) is not a plane".into()));
        }
        let g = gcd(gcd(h as i64, k as i64), l as i64) as i32;
        let (mut h, mut k, mut l) = (h / g, k / g, l / g);
        let first = [h, k, l].into_iter().find(|&x| x != 0).unwrap_or(1);
        if first < 0 {
            h = -h;
            k = -k;
            l = -l;
        }
        Ok(MillerIndex { h, k, l })
    }

    /// Unreduced multiple; only used to recover reflection orders such as (004).
    pub fn order_of(h: i32, k: i32, l: i32) -> Result<(Self, i32)> {
        let reduced = Self::new(h, k, l)?;
        let g = gcd(gcd(h as i64, k as i64), l as i64) as i32;
        Ok((reduced, g))
    }
}

/// Parse an unreduced index triple; accepts `004`, `1,0,0`, `(1 1 0)` and
/// `-1,1,0` style notations.
pub fn parse_hkl(s: &str) -> Result<[i32; 3]> {
    let bad = || Error::InvalidInput(format!("bad Miller index '{s}'"));
    let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
    let parts: Vec<&str> = trimmed
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|p| !p.is_empty())
        .collect();
    let nums: Vec<i32> = if parts.len() == 3 {
        parts
            .iter()
            .map(|p| p.parse::<i32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?
    } else if parts.len() == 1 {
        let mut out = Vec::new();
        let mut neg = false;
        for ch in parts[0].chars() {
            match ch {
                '-' => neg = true,
                d if d.is_ascii_digit() => {
                    let v = d.to_digit(10).unwrap() as i32;
                    out.push(if neg { -v } else { v });
                    neg = false;
                }
                _ => return Err(bad()),
            }
        }
        out
    } else {
        Vec::new()
    };
    if nums.len() != 3 {
        return Err(bad());
    }
    Ok([nums[0], nums[1], nums[2]])
}

impl FromStr for MillerIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let [h, k, l] = parse_hkl(s)?;
        MillerIndex::new(h, k, l)
    }
}

impl fmt::Display for MillerIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if [self.h, self.k, self.l].iter().all(|x| (0..10).contains(x)) {
            write!(f, "{}{}{}", self.h, self.k, self.l)
        } else {
            write!(f, "{},{},{}", self.h, self.k, self.l)
        }
    }
}

/// A reduced 2-D lattice of in-plane translations.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub u: Vec2,
    pub v: Vec2,
    pub lattice: String,
    pub plane: Option<MillerIndex>,
}

impl SurfaceMesh {
    /// Mesh from two arbitrary independent vectors; the basis is reduced.
    pub fn from_vectors(u: Vec2, v: Vec2) -> Result<Self> {
        let (u, v) = reduce_mesh(u, v)?;
        Ok(SurfaceMesh { u, v, lattice: String::new(), plane: None })
    }

    pub fn area(&self) -> f64 {
        cross(&self.u, &self.v).abs()
    }

    pub fn label(&self) -> String {
        match &self.plane {
            Some(p) => format!("{}({})", self.lattice, p),
            None => self.lattice.clone(),
        }
    }
}

pub(crate) fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Lagrange-Gauss reduction carrying the integer coefficients of each vector.
///
/// On return `|u| <= |v|`, `|u.v| <= |u|^2 / 2` and `u x v > 0`.
pub(crate) fn reduce_tracked(
    mut u: Vec2,
    mut v: Vec2,
    mut cu: [i64; 2],
    mut cv: [i64; 2],
) -> ((Vec2, Vec2), ([i64; 2], [i64; 2])) {
    loop {
        if v.norm_squared() < u.norm_squared() * (1.0 - 1e-12) {
            std::mem::swap(&mut u, &mut v);
            std::mem::swap(&mut cu, &mut cv);
        }
        let m = (u.dot(&v) / u.norm_squared()).round();
        if m == 0.0 {
            break;
        }
        v -= u * m;
        let mi = m as i64;
        cv = [cv[0] - mi * cu[0], cv[1] - mi * cu[1]];
        // |u.v| == |u|^2/2 exactly rounds away from zero forever otherwise
        if (u.dot(&v).abs() - u.norm_squared() / 2.0).abs() <= 1e-12 * u.norm_squared() {
            break;
        }
    }
    if cross(&u, &v) < 0.0 {
        v = -v;
        cv = [-cv[0], -cv[1]];
    }
    ((u, v), (cu, cv))
}

/// Lagrange-reduce a 2-D basis. Area is preserved; the result is oriented
/// with a positive cross product.
pub fn reduce_mesh(u: Vec2, v: Vec2) -> Result<(Vec2, Vec2)> {
    let scale = u.norm() * v.norm();
    if !(scale > 0.0) || cross(&u, &v).abs() <= 1e-12 * scale {
        return Err(Error::DegenerateBasis);
    }
    let (basis, _) = reduce_tracked(u, v, [1, 0], [0, 1]);
    Ok(basis)
}

/// Two shortest independent in-plane translations of `lattice` on `plane`.
pub fn surface_mesh(lattice: &BulkLattice, plane: MillerIndex) -> SurfaceMesh {
    let (h, k, l) = (plane.h as i64, plane.k as i64, plane.l as i64);
    let prim = lattice.system.doubled_primitive();

    // every in-plane vector of the search box is a lattice vector; the box
    // grows until two independent ones are found
    let mut range = 2 * (h.abs() + k.abs() + l.abs()) + 2;
    let (u3, v3) = loop {
        let mut found: Vec<([i64; 3], f64)> = Vec::new();
        for i in -range..=range {
            for j in -range..=range {
                for m in -range..=range {
                    if i == 0 && j == 0 && m == 0 {
                        continue;
                    }
                    let d = [
                        i * prim[0][0] + j * prim[1][0] + m * prim[2][0],
                        i * prim[0][1] + j * prim[1][1] + m * prim[2][1],
                        i * prim[0][2] + j * prim[1][2] + m * prim[2][2],
                    ];
                    if h * d[0] + k * d[1] + l * d[2] == 0 {
                        found.push((d, lattice.cartesian(d).norm()));
                    }
                }
            }
        }
        found.sort_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .unwrap()
                .then_with(|| b.0.cmp(&a.0))
        });
        found.dedup_by(|a, b| a.0 == b.0);
        let shortest = found.first().map(|f| lattice.cartesian(f.0));
        if let Some(u) = shortest {
            let partner = found.iter().map(|f| lattice.cartesian(f.0)).find(|v| {
                u.cross(v).norm() > 1e-9 * u.norm() * v.norm()
            });
            if let Some(v) = partner {
                break (u, v);
            }
        }
        range *= 2;
    };

    let normal = Vector3::new(
        plane.h as f64 / lattice.a,
        plane.k as f64 / lattice.a,
        plane.l as f64 / lattice.c,
    )
    .normalize();
    let e1 = u3.normalize();
    let e2 = normal.cross(&e1);
    let to2d = |t: &Vector3<f64>| Vec2::new(t.dot(&e1), t.dot(&e2));
    let (u, v) = reduce_mesh(to2d(&u3), to2d(&v3)).expect("independent in-plane vectors");
    // reduction may have swapped u for an equally short partner
    let angle = u.y.atan2(u.x);
    let rot = nalgebra::Rotation2::new(-angle);
    let (u, mut v) = (rot * u, rot * v);
    let u = Vec2::new(u.x, 0.0);
    if v.y.abs() < 1e-12 * v.norm() {
        v.y = 0.0;
    }
    SurfaceMesh { u, v, lattice: lattice.name.clone(), plane: Some(plane) }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeEntry {
    name: String,
    system: CrystalSystem,
    a: f64,
    c: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeFile {
    #[serde(default)]
    lattice: Vec<LatticeEntry>,
}

/// Named lattice definitions, seeded with the built-in materials.
#[derive(Debug, Clone)]
pub struct LatticeLibrary {
    entries: Vec<BulkLattice>,
}

impl Default for LatticeLibrary {
    fn default() -> Self {
        LatticeLibrary {
            entries: vec![
                BulkLattice::gaas(),
                BulkLattice::gasb(),
                BulkLattice::si(),
                BulkLattice::rutile(),
                BulkLattice::anatase(),
            ],
        }
    }
}

impl LatticeLibrary {
    pub fn get(&self, name: &str) -> Option<&BulkLattice> {
        self.entries.iter().find(|l| l.name.eq_ignore_ascii_case(name))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|l| l.name.as_str())
    }

    /// Insert or replace a definition by (case-insensitive) name.
    pub fn insert(&mut self, lattice: BulkLattice) {
        match self.entries.iter_mut().find(|l| l.name.eq_ignore_ascii_case(&lattice.name)) {
            Some(slot) => *slot = lattice,
            None => self.entries.push(lattice),
        }
    }

    /// Merge `[[lattice]]` tables from a TOML document over the defaults.
    ///
    /// ```toml
    /// [[lattice]]
    /// name = "anatase"
    /// system = "tetragonal-i"
    /// a = 3.7845
    /// c = 9.5143
    /// ```
    pub fn load_overrides(&mut self, text: &str) -> Result<()> {
        let file: LatticeFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for e in file.lattice {
            let c = match (e.system.is_cubic(), e.c) {
                (true, _) => e.a,
                (false, Some(c)) => c,
                (false, None) => {
                    return Err(Error::Config(format!("lattice '{}' needs a c axis", e.name)))
                }
            };
            self.insert(BulkLattice::new(e.name, e.system, e.a, c)?);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Shortest in-plane vector by plain enumeration of conventional-cell
    /// fractional coordinates, independent of the primitive-basis search.
    fn brute_shortest_pair(lat: &BulkLattice, plane: MillerIndex) -> (f64, f64, f64) {
        let centred = |x: i64, y: i64, z: i64| -> bool {
            match lat.system {
                CrystalSystem::CubicFcc | CrystalSystem::CubicDiamondFcc => {
                    (x + y + z).rem_euclid(2) == 0
                }
                CrystalSystem::TetragonalP => x % 2 == 0 && y % 2 == 0 && z % 2 == 0,
                CrystalSystem::TetragonalI => {
                    (x % 2 == 0 && y % 2 == 0 && z % 2 == 0)
                        || (x.rem_euclid(2) == 1 && y.rem_euclid(2) == 1 && z.rem_euclid(2) == 1)
                }
            }
        };
        let mut vs = Vec::new();
        for x in -12i64..=12 {
            for y in -12i64..=12 {
                for z in -12i64..=12 {
                    if (x, y, z) == (0, 0, 0) || !centred(x, y, z) {
                        continue;
                    }
                    if plane.h as i64 * x + plane.k as i64 * y + plane.l as i64 * z == 0 {
                        vs.push(Vector3::new(
                            x as f64 * lat.a / 2.0,
                            y as f64 * lat.a / 2.0,
                            z as f64 * lat.c / 2.0,
                        ));
                    }
                }
            }
        }
        vs.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
        let u = vs[0];
        let v = *vs.iter().find(|v| u.cross(v).norm() > 1e-9).unwrap();
        (u.norm(), v.norm(), u.cross(&v).norm())
    }

    #[test]
    fn anatase_001_is_square() {
        let m = surface_mesh(&BulkLattice::anatase(), MillerIndex::new(0, 0, 1).unwrap());
        assert_relative_eq!(m.u.norm(), 3.785, epsilon = 1e-12);
        assert_relative_eq!(m.v.norm(), 3.785, epsilon = 1e-12);
        assert_relative_eq!(m.area(), 14.326225, epsilon = 1e-9);
        assert_eq!(m.u.y, 0.0);
        assert!(m.u.x > 0.0 && cross(&m.u, &m.v) > 0.0);
    }

    #[test]
    fn gaas_100_is_half_conventional_face() {
        let gaas = BulkLattice::gaas();
        let m = surface_mesh(&gaas, MillerIndex::new(1, 0, 0).unwrap());
        assert_relative_eq!(m.u.norm(), 5.6533 / 2f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(m.area(), 5.6533 * 5.6533 / 2.0, epsilon = 1e-12);
        assert!((m.u.norm() - 3.997).abs() < 1e-3);
        assert!((m.area() - 15.98).abs() < 5e-3);
    }

    #[test]
    fn unreduced_miller_gives_same_mesh() {
        let gaas = BulkLattice::gaas();
        let a = surface_mesh(&gaas, MillerIndex::new(1, 0, 0).unwrap());
        let b = surface_mesh(&gaas, MillerIndex::new(2, 0, 0).unwrap());
        assert_eq!(a, b);
        assert_eq!(MillerIndex::new(0, -2, 4).unwrap(), MillerIndex::new(0, 1, -2).unwrap());
    }

    #[test]
    fn mesh_matches_brute_force_for_many_planes() {
        let lats = [
            BulkLattice::gaas(),
            BulkLattice::si(),
            BulkLattice::rutile(),
            BulkLattice::anatase(),
        ];
        let planes = [
            (0, 0, 1),
            (1, 0, 0),
            (1, 1, 0),
            (1, 0, 1),
            (1, 1, 1),
            (2, 1, 0),
            (2, 1, 1),
            (1, 1, 2),
            (1, 0, 3),
        ];
        for lat in &lats {
            for &(h, k, l) in &planes {
                let p = MillerIndex::new(h, k, l).unwrap();
                let m = surface_mesh(lat, p);
                let (lu, lv, area) = brute_shortest_pair(lat, p);
                assert_relative_eq!(m.u.norm(), lu, max_relative = 1e-10);
                assert_relative_eq!(m.v.norm(), lv, max_relative = 1e-10);
                assert_relative_eq!(m.area(), area, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn reduce_examples() {
        let (u, v) = reduce_mesh(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)).unwrap();
        assert_eq!((u, v), (Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)));

        let (u, v) = reduce_mesh(Vec2::new(1.0, 0.0), Vec2::new(5.0, 1.0)).unwrap();
        assert_eq!((u, v), (Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)));

        // (2,0),(1,1): the shortest basis has both vectors of length sqrt(2)
        let (u, v) = reduce_mesh(Vec2::new(2.0, 0.0), Vec2::new(1.0, 1.0)).unwrap();
        assert_eq!(u, Vec2::new(1.0, 1.0));
        assert_relative_eq!(v.norm(), 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(cross(&u, &v), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn reduce_rejects_parallel() {
        assert_eq!(
            reduce_mesh(Vec2::new(1.0, 2.0), Vec2::new(-2.0, -4.0)),
            Err(Error::DegenerateBasis)
        );
        assert!(reduce_mesh(Vec2::zeros(), Vec2::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn parse_miller_notations() {
        let want = MillerIndex::new(1, 1, 0).unwrap();
        for s in ["110", "1,1,0", "(1 1 0)", "220"] {
            assert_eq!(s.parse::<MillerIndex>().unwrap(), want);
        }
        assert_eq!("-110".parse::<MillerIndex>().unwrap(), MillerIndex::new(1, -1, 0).unwrap());
        assert!("000".parse::<MillerIndex>().is_err());
        assert!("1x0".parse::<MillerIndex>().is_err());
    }

    #[test]
    fn library_overrides() {
        let mut lib = LatticeLibrary::default();
        lib.load_overrides(
            "[[lattice]]\nname = \"Anatase\"\nsystem = \"tetragonal-i\"\na = 3.80\nc = 9.50\n",
        )
        .unwrap();
        assert_eq!(lib.get("anatase").unwrap().a, 3.80);
        assert!(lib
            .load_overrides("[[lattice]]\nname = \"x\"\nsystem = \"tetragonal-p\"\na = 1.0\n")
            .is_err());
        assert!(lib.load_overrides("[[lattice]]\nname=\"x\"\nsystem=\"fcc\"\na=1.0\nq=2\n").is_err());
    }

    #[test]
    fn bragg_consistency_of_defaults() {
        // anatase (004) and rutile (110) reflections for Cu K-alpha1
        let lambda = 1.540598;
        let ana = BulkLattice::anatase();
        let d004 = ana.d_spacing(&MillerIndex::new(0, 0, 1).unwrap()) / 4.0;
        let tt = 2.0 * (lambda / (2.0 * d004)).asin().to_degrees();
        assert!((37.0..39.0).contains(&tt), "{tt}");
        let rut = BulkLattice::rutile();
        let d110 = rut.d_spacing(&MillerIndex::new(1, 1, 0).unwrap());
        let tt = 2.0 * (lambda / (2.0 * d110)).asin().to_degrees();
        assert!((tt - 27.4).abs() < 0.1, "{tt}");
    }

    proptest::proptest! {
        #[test]
        fn reduction_preserves_area(ux in -20.0f64..20.0, uy in -20.0f64..20.0,
                                     vx in -20.0f64..20.0, vy in -20.0f64..20.0) {
            let u = Vec2::new(ux, uy);
            let v = Vec2::new(vx, vy);
            let area = cross(&u, &v).abs();
            proptest::prop_assume!(area > 1e-3 * (1.0 + u.norm() * v.norm()));
            let (ru, rv) = reduce_mesh(u, v).unwrap();
            proptest::prop_assert!((cross(&ru, &rv) - area).abs() <= 1e-9 * (1.0 + area));
            proptest::prop_assert!(ru.norm() <= rv.norm() * (1.0 + 1e-12));
            proptest::prop_assert!(ru.dot(&rv).abs() <= ru.norm_squared() / 2.0 * (1.0 + 1e-9));
        }

        #[test]
        fn mesh_is_scale_invariant(h in -3i32..=3, k in -3i32..=3, l in -3i32..=3, s in 2i32..=3) {
            proptest::prop_assume!((h, k, l) != (0, 0, 0));
            let lat = BulkLattice::anatase();
            let a = surface_mesh(&lat, MillerIndex::new(h, k, l).unwrap());
            let b = surface_mesh(&lat, MillerIndex::new(s * h, s * k, s * l).unwrap());
            proptest::prop_assert_eq!(a, b);
        }
    }
}
