//! Domain family generators. Families remember their recipe so runners can
//! rebuild them at a refined cell size for slack estimates.

use crate::error::{Error, Result};
use crate::geometry::Domain;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilySpec {
    /// Unit-area convex shapes: ball, square, rectangles 2:1..8:1,
    /// ellipse 2:1.
    Convex,
    /// 2D simply connected shapes including non-convex ones: disk, square,
    /// l-shape, combs.
    SimplyConnected,
    Balls,
    Squares,
    Rectangles,
    Ellipses,
    LShapes,
    Combs,
    /// Ball/square/ellipse of equal measure (Faber-Krahn comparison set).
    EqualMeasure,
}

impl FamilySpec {
    pub fn tag(&self) -> &'static str {
        match self {
            FamilySpec::Convex => "convex",
            FamilySpec::SimplyConnected => "simply_connected",
            FamilySpec::Balls => "balls",
            FamilySpec::Squares => "squares",
            FamilySpec::Rectangles => "rectangles",
            FamilySpec::Ellipses => "ellipses",
            FamilySpec::LShapes => "lshapes",
            FamilySpec::Combs => "combs",
            FamilySpec::EqualMeasure => "equal_measure",
        }
    }

    pub fn parse(s: &str) -> Result<FamilySpec> {
        Ok(match s {
            "convex" => FamilySpec::Convex,
            "simply_connected" => FamilySpec::SimplyConnected,
            "balls" => FamilySpec::Balls,
            "squares" => FamilySpec::Squares,
            "rectangles" => FamilySpec::Rectangles,
            "ellipses" => FamilySpec::Ellipses,
            "lshapes" => FamilySpec::LShapes,
            "combs" => FamilySpec::Combs,
            "equal_measure" => FamilySpec::EqualMeasure,
            other => {
                return Err(Error::InvalidConfig(format!("unknown family {other:?}")));
            }
        })
    }
}

#[derive(Debug, Clone)]
pub struct DomainFamily {
    pub spec: FamilySpec,
    pub h: f64,
    pub members: Vec<(String, Domain)>,
}

impl DomainFamily {
    pub fn build(spec: FamilySpec, h: f64) -> Result<DomainFamily> {
        let members = match spec {
            FamilySpec::Convex => convex_unit_area(h)?,
            FamilySpec::SimplyConnected => simply_connected(h)?,
            FamilySpec::Balls => balls(&[0.5, 1.0, 2.0], h)?,
            FamilySpec::Squares => squares(&[0.5, 1.0, 2.0], h)?,
            FamilySpec::Rectangles => rectangles(&[2.0, 4.0, 8.0], h)?,
            FamilySpec::Ellipses => ellipses(&[2.0, 4.0, 8.0], h)?,
            FamilySpec::LShapes => l_shapes(&[0.25, 0.5, 0.75], h)?,
            FamilySpec::Combs => combs(&[3, 5], h)?,
            FamilySpec::EqualMeasure => equal_measure(h)?,
        };
        Ok(DomainFamily { spec, h, members })
    }

    /// Same recipe at half the cell size.
    pub fn refined(&self) -> Result<DomainFamily> {
        DomainFamily::build(self.spec, self.h / 2.0)
    }
}

const INV_SQRT_PI: f64 = 0.5641895835477563;

fn balls(radii: &[f64], h: f64) -> Result<Vec<(String, Domain)>> {
    radii
        .iter()
        .map(|&r| {
            // Keep similar grids exactly similar: scale h with the radius.
            Ok((format!("ball_r{r}"), Domain::ball(2, [0.0; 3], r, h * r)?))
        })
        .collect()
}

fn squares(sides: &[f64], h: f64) -> Result<Vec<(String, Domain)>> {
    sides
        .iter()
        .map(|&s| {
            Ok((
                format!("square_s{s}"),
                Domain::rectangle(2, [0.0; 3], [s, s, 0.0], h * s)?,
            ))
        })
        .collect()
}

/// Unit-area rectangles of the given aspect ratios.
fn rectangles(aspects: &[f64], h: f64) -> Result<Vec<(String, Domain)>> {
    aspects
        .iter()
        .map(|&a| {
            let w = a.sqrt();
            Ok((
                format!("rect_{a}to1"),
                Domain::rectangle(2, [0.0; 3], [w, 1.0 / w, 0.0], h)?,
            ))
        })
        .collect()
}

/// Unit-area ellipses of the given aspect ratios (128-gon approximants).
fn ellipses(aspects: &[f64], h: f64) -> Result<Vec<(String, Domain)>> {
    aspects
        .iter()
        .map(|&a| {
            let b = INV_SQRT_PI / a.sqrt();
            let aa = INV_SQRT_PI * a.sqrt();
            Ok((
                format!("ellipse_{a}to1"),
                Domain::ellipse([0.0, 0.0], aa, b, 128, h)?,
            ))
        })
        .collect()
}

/// Unit squares with a square notch of the given side fraction removed
/// from the top-right corner.
fn l_shapes(notch_fracs: &[f64], h: f64) -> Result<Vec<(String, Domain)>> {
    notch_fracs
        .iter()
        .map(|&f| {
            Ok((
                format!("lshape_{f}"),
                Domain::l_shape(
                    [0.0; 3],
                    [1.0, 1.0, 0.0],
                    [1.0 - f, 1.0 - f, 0.0],
                    [1.0, 1.0, 0.0],
                    2,
                    h,
                )?,
            ))
        })
        .collect()
}

/// Unit square with `teeth` vertical slits cut from the top edge; simply
/// connected but with arbitrarily poor exterior density near the slits.
fn combs(teeth: &[usize], h: f64) -> Result<Vec<(String, Domain)>> {
    teeth
        .iter()
        .map(|&k| {
            let square = Domain::rectangle(2, [0.0; 3], [1.0, 1.0, 0.0], h)?;
            // Slit width fixed well above the default cell sizes so the
            // teeth stay resolved under one refinement.
            let width = 0.09;
            let depth = 0.7;
            let dom = square.mask_filter(|p| {
                for i in 1..=k {
                    let cx = i as f64 / (k + 1) as f64;
                    if (p[0] - cx).abs() <= 0.5 * width && p[1] >= 1.0 - depth {
                        return false;
                    }
                }
                true
            })?;
            Ok((format!("comb_{k}"), dom))
        })
        .collect()
}

fn convex_unit_area(h: f64) -> Result<Vec<(String, Domain)>> {
    let mut m = vec![(
        "ball".to_string(),
        Domain::ball(2, [0.0; 3], INV_SQRT_PI, h)?,
    )];
    m.extend(squares(&[1.0], h)?);
    m.extend(rectangles(&[2.0, 4.0, 8.0], h)?);
    m.extend(ellipses(&[2.0], h)?);
    Ok(m)
}

fn simply_connected(h: f64) -> Result<Vec<(String, Domain)>> {
    let mut m = vec![(
        "disk".to_string(),
        Domain::ball(2, [0.0; 3], INV_SQRT_PI, h)?,
    )];
    m.extend(squares(&[1.0], h)?);
    m.extend(l_shapes(&[0.5], h)?);
    m.extend(combs(&[3, 5], h)?);
    Ok(m)
}

fn equal_measure(h: f64) -> Result<Vec<(String, Domain)>> {
    let mut m = vec![(
        "ball".to_string(),
        Domain::ball(2, [0.0; 3], INV_SQRT_PI, h)?,
    )];
    m.extend(squares(&[1.0], h)?);
    m.extend(ellipses(&[2.0], h)?);
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_build_and_refine() {
        for spec in [
            FamilySpec::Convex,
            FamilySpec::SimplyConnected,
            FamilySpec::EqualMeasure,
        ] {
            let fam = DomainFamily::build(spec, 1.0 / 16.0).unwrap();
            assert!(!fam.members.is_empty());
            let fine = fam.refined().unwrap();
            assert_eq!(fine.members.len(), fam.members.len());
            for ((_, a), (_, b)) in fam.members.iter().zip(&fine.members) {
                assert!(b.interior_count() > 2 * a.interior_count());
            }
        }
    }

    #[test]
    fn unit_area_families_have_unit_measure() {
        let fam = DomainFamily::build(FamilySpec::Convex, 1.0 / 64.0).unwrap();
        for (name, dom) in &fam.members {
            let m = dom.measure();
            assert!(
                (m - 1.0).abs() < 0.05,
                "{name}: measure {m} should be close to 1"
            );
        }
    }

    #[test]
    fn combs_are_connected_masks() {
        let fam = DomainFamily::build(FamilySpec::Combs, 1.0 / 32.0).unwrap();
        for (name, dom) in &fam.members {
            assert_eq!(dom.kind().tag(), "mask", "{name}");
        }
    }

    #[test]
    fn family_tags_roundtrip() {
        for spec in [
            FamilySpec::Convex,
            FamilySpec::SimplyConnected,
            FamilySpec::Balls,
            FamilySpec::Squares,
            FamilySpec::Rectangles,
            FamilySpec::Ellipses,
            FamilySpec::LShapes,
            FamilySpec::Combs,
            FamilySpec::EqualMeasure,
        ] {
            assert_eq!(FamilySpec::parse(spec.tag()).unwrap(), spec);
        }
        assert!(FamilySpec::parse("nonsense").is_err());
    }
}
