use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parametric description of every domain the laboratory can mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    /// `[0, width] x [0, height]`.
    Rectangle { width: f64, height: f64 },
    /// Regular polygon with vertices on the circle of `radius` about the origin.
    PolygonalDisk { radius: f64, sides: usize },
    /// Region between two concentric regular polygons.
    PolygonalAnnulus {
        r_inner: f64,
        r_outer: f64,
        sides: usize,
    },
    /// `{ s e1 + t e2 : s in (0,a), t in (0,b) }`.
    Parallelogram {
        e1: [f64; 2],
        e2: [f64; 2],
        a: f64,
        b: f64,
    },
    /// `{ 0 < y < a, |x| < a^2 - a y }`.
    Tooth { a: f64 },
    /// Box `(-1,1) x (-1,0)` with teeth of height `4^-n` at `x = 2^-n`, n = 1..=teeth.
    Comb { teeth: usize },
    /// `{ eps < x < 1, -x^4 < y < x^4 }`.
    Cusp { eps: f64 },
    /// Mesh read from a file; no parametric description available.
    Imported,
}

impl DomainSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        let finite_pos = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{name} must be a positive finite number, got {v}")))
            }
        };
        match *self {
            DomainSpec::Rectangle { width, height } => {
                finite_pos("width", width)?;
                finite_pos("height", height)
            }
            DomainSpec::PolygonalDisk { radius, sides } => {
                finite_pos("radius", radius)?;
                if sides < 8 {
                    return bad(format!("disk needs sides >= 8, got {sides}"));
                }
                Ok(())
            }
            DomainSpec::PolygonalAnnulus {
                r_inner,
                r_outer,
                sides,
            } => {
                finite_pos("r_inner", r_inner)?;
                finite_pos("r_outer", r_outer)?;
                if r_inner >= r_outer {
                    return bad(format!("annulus needs r_inner < r_outer, got {r_inner} >= {r_outer}"));
                }
                if sides < 8 {
                    return bad(format!("annulus needs sides >= 8, got {sides}"));
                }
                Ok(())
            }
            DomainSpec::Parallelogram { e1, e2, a, b } => {
                finite_pos("a", a)?;
                finite_pos("b", b)?;
                for (name, e) in [("e1", e1), ("e2", e2)] {
                    let n = (e[0] * e[0] + e[1] * e[1]).sqrt();
                    if !n.is_finite() || (n - 1.0).abs() > 1e-12 {
                        return bad(format!("{name} must be a unit vector, |{name}| = {n}"));
                    }
                }
                let c = e1[0] * e2[0] + e1[1] * e2[1];
                if c.abs() >= 1.0 - 1e-12 {
                    return bad(format!("parallelogram needs |<e1,e2>| < 1, got {c}"));
                }
                Ok(())
            }
            DomainSpec::Tooth { a } => {
                if !(a > 0.0 && a <= 1.0) {
                    return bad(format!("tooth needs a in (0,1], got {a}"));
                }
                Ok(())
            }
            DomainSpec::Comb { teeth } => {
                if teeth == 0 {
                    return bad("comb needs teeth >= 1".into());
                }
                // Tooth base endpoints 2^-n +- 2^-4n stay dyadic in i128 grid
                // coordinates up to this count.
                if teeth > 24 {
                    return bad(format!("comb supports at most 24 teeth, got {teeth}"));
                }
                Ok(())
            }
            DomainSpec::Cusp { eps } => {
                if !(eps > 0.0 && eps < 1.0) {
                    return bad(format!("cusp truncation needs eps in (0,1), got {eps}"));
                }
                Ok(())
            }
            DomainSpec::Imported => Ok(()),
        }
    }

    /// Area of the (polygonal) domain. For the cusp this is the area of the
    /// curved region, which the chord mesh only approximates.
    pub fn area(&self) -> Option<f64> {
        Some(match *self {
            DomainSpec::Rectangle { width, height } => width * height,
            DomainSpec::PolygonalDisk { radius, sides } => polygon_area(radius, sides),
            DomainSpec::PolygonalAnnulus {
                r_inner,
                r_outer,
                sides,
            } => polygon_area(r_outer, sides) - polygon_area(r_inner, sides),
            DomainSpec::Parallelogram { e1, e2, a, b } => {
                a * b * (e1[0] * e2[1] - e1[1] * e2[0]).abs()
            }
            DomainSpec::Tooth { a } => a * a * a,
            DomainSpec::Comb { teeth } => {
                2.0 + (1..=teeth).map(|n| comb_height(n).powi(3)).sum::<f64>()
            }
            DomainSpec::Cusp { eps } => 0.4 * (1.0 - eps.powi(5)),
            DomainSpec::Imported => return None,
        })
    }

    /// Whether every boundary piece is a straight segment (midpoint refinement
    /// then reproduces the domain exactly).
    pub fn straight_edged(&self) -> bool {
        !matches!(self, DomainSpec::Cusp { .. } | DomainSpec::Imported)
    }

    /// Whether the builder produces a structured, right-angled grid
    /// (stiffness is then an M-matrix).
    pub fn structured(&self) -> bool {
        match self {
            DomainSpec::Rectangle { .. } => true,
            DomainSpec::Parallelogram { e1, e2, .. } => {
                (e1[0] * e2[0] + e1[1] * e2[1]).abs() < 1e-12
            }
            _ => false,
        }
    }

    /// Parse `name(key=value,...)`.
    pub fn parse(text: &str) -> Result<Self> {
        DomainParser::new(text).parse()
    }

    pub fn unit_square() -> Self {
        DomainSpec::Rectangle {
            width: 1.0,
            height: 1.0,
        }
    }
}

/// A named domain with the spacing used for it by default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bundled {
    pub name: String,
    pub spec: DomainSpec,
    pub h: f64,
}

/// The domains shipped with the laboratory, at spacings that keep every
/// boundary space small enough for complete dense decompositions.
pub fn bundled() -> Vec<Bundled> {
    let b = |name: &str, spec: DomainSpec, h: f64| Bundled {
        name: name.to_string(),
        spec,
        h,
    };
    vec![
        b("square", DomainSpec::unit_square(), 1.0 / 16.0),
        b(
            "rectangle",
            DomainSpec::Rectangle {
                width: 2.0,
                height: 0.5,
            },
            1.0 / 16.0,
        ),
        b(
            "disk",
            DomainSpec::PolygonalDisk {
                radius: 1.0,
                sides: 64,
            },
            0.1,
        ),
        b(
            "annulus",
            DomainSpec::PolygonalAnnulus {
                r_inner: 0.5,
                r_outer: 1.0,
                sides: 64,
            },
            0.1,
        ),
        b(
            "parallelogram",
            DomainSpec::Parallelogram {
                e1: [1.0, 0.0],
                e2: [0.5, 0.75f64.sqrt()],
                a: 1.0,
                b: 1.0,
            },
            0.1,
        ),
        b("tooth", DomainSpec::Tooth { a: 1.0 }, 1.0 / 16.0),
        b("comb", DomainSpec::Comb { teeth: 4 }, 0.125),
        b("cusp", DomainSpec::Cusp { eps: 0.1 }, 0.05),
    ]
}

/// Height `a_n = 4^-n` of the n-th comb tooth.
pub fn comb_height(n: usize) -> f64 {
    4f64.powi(-(n as i32))
}

fn polygon_area(r: f64, sides: usize) -> f64 {
    0.5 * sides as f64 * r * r * (2.0 * std::f64::consts::PI / sides as f64).sin()
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::Rectangle { width, height } => write!(f, "rectangle(w={width},h={height})"),
            DomainSpec::PolygonalDisk { radius, sides } => write!(f, "disk(r={radius},sides={sides})"),
            DomainSpec::PolygonalAnnulus {
                r_inner,
                r_outer,
                sides,
            } => write!(f, "annulus(r_in={r_inner},r_out={r_outer},sides={sides})"),
            DomainSpec::Parallelogram { e1, e2, a, b } => write!(
                f,
                "parallelogram(e1x={},e1y={},e2x={},e2y={},a={a},b={b})",
                e1[0], e1[1], e2[0], e2[1]
            ),
            DomainSpec::Tooth { a } => write!(f, "tooth(a={a})"),
            DomainSpec::Comb { teeth } => write!(f, "comb(n={teeth})"),
            DomainSpec::Cusp { eps } => write!(f, "cusp(eps={eps})"),
            DomainSpec::Imported => write!(f, "imported"),
        }
    }
}

struct DomainParser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> DomainParser<'a> {
    fn new(text: &'a str) -> Self {
        Self { text, pos: 0 }
    }

    fn err<T>(&self, detail: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            op: "cli.domain",
            line: 1,
            column: self.pos + 1,
            detail: detail.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.text[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.text[self.pos..].chars().next() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return self.err("expected identifier");
        }
        Ok(&self.text[start..self.pos])
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.text[self.pos..].starts_with(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn value(&mut self) -> Result<(f64, usize)> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.text[self.pos..].chars().next() {
            if c == ',' || c == ')' || c.is_whitespace() {
                break;
            }
            self.pos += 1;
        }
        let raw = &self.text[start..self.pos];
        let v = parse_number(raw);
        match v {
            Some(v) => Ok((v, start)),
            None => {
                self.pos = start;
                self.err(format!("invalid number '{raw}'"))
            }
        }
    }

    fn parse(mut self) -> Result<DomainSpec> {
        let name = self.ident()?.to_ascii_lowercase();
        let mut args: Vec<(String, f64, usize)> = Vec::new();
        self.skip_ws();
        if self.pos < self.text.len() {
            self.expect('(')?;
            self.skip_ws();
            if !self.text[self.pos..].starts_with(')') {
                loop {
                    let key = self.ident()?.to_ascii_lowercase();
                    self.expect('=')?;
                    let (v, at) = self.value()?;
                    args.push((key, v, at));
                    self.skip_ws();
                    if self.text[self.pos..].starts_with(',') {
                        self.pos += 1;
                        continue;
                    }
                    break;
                }
            }
            self.expect(')')?;
            self.skip_ws();
            if self.pos != self.text.len() {
                return self.err("trailing characters");
            }
        }
        let mut take = |keys: &[&str], default: Option<f64>| -> Result<f64> {
            if let Some(i) = args.iter().position(|(k, _, _)| keys.contains(&k.as_str())) {
                return Ok(args.remove(i).1);
            }
            match default {
                Some(d) => Ok(d),
                None => Err(Error::Parse {
                    op: "cli.domain",
                    line: 1,
                    column: self.text.len() + 1,
                    detail: format!("missing parameter '{}'", keys[0]),
                }),
            }
        };
        let as_count = |v: f64, key: &str| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v < 1e9 {
                Ok(v as usize)
            } else {
                Err(Error::Parameter(format!("{key} must be a non-negative integer, got {v}")))
            }
        };
        let spec = match name.as_str() {
            "rectangle" | "rect" => DomainSpec::Rectangle {
                width: take(&["w", "width"], Some(1.0))?,
                height: take(&["h", "height"], Some(1.0))?,
            },
            "square" => {
                let s = take(&["s", "side"], Some(1.0))?;
                DomainSpec::Rectangle {
                    width: s,
                    height: s,
                }
            }
            "disk" => DomainSpec::PolygonalDisk {
                radius: take(&["r", "radius"], Some(1.0))?,
                sides: as_count(take(&["sides"], Some(64.0))?, "sides")?,
            },
            "annulus" => DomainSpec::PolygonalAnnulus {
                r_inner: take(&["r_in", "r_inner"], Some(0.5))?,
                r_outer: take(&["r_out", "r_outer"], Some(1.0))?,
                sides: as_count(take(&["sides"], Some(64.0))?, "sides")?,
            },
            "parallelogram" => {
                let e1 = [take(&["e1x"], Some(1.0))?, take(&["e1y"], Some(0.0))?];
                let e2 = match take(&["angle"], None).ok() {
                    Some(theta) => [theta.cos(), theta.sin()],
                    None => [take(&["e2x"], Some(0.0))?, take(&["e2y"], Some(1.0))?],
                };
                DomainSpec::Parallelogram {
                    e1,
                    e2,
                    a: take(&["a"], Some(1.0))?,
                    b: take(&["b"], Some(1.0))?,
                }
            }
            "tooth" => DomainSpec::Tooth {
                a: take(&["a"], Some(1.0))?,
            },
            "comb" => DomainSpec::Comb {
                teeth: as_count(take(&["n", "teeth"], None)?, "n")?,
            },
            "cusp" => DomainSpec::Cusp {
                eps: take(&["eps"], None)?,
            },
            other => {
                self.pos = 0;
                return self.err(format!("unknown domain '{other}'"));
            }
        };
        if let Some((k, _, at)) = args.first() {
            self.pos = *at;
            return self.err(format!("unknown parameter '{k}' for {name}"));
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Numbers may be written as decimals or simple fractions such as `1/4`.
fn parse_number(raw: &str) -> Option<f64> {
    if let Some((n, d)) = raw.split_once('/') {
        let n: f64 = n.trim().parse().ok()?;
        let d: f64 = d.trim().parse().ok()?;
        (d != 0.0).then(|| n / d)
    } else {
        raw.trim().parse().ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_named_domains() {
        assert_eq!(
            DomainSpec::parse("tooth(a=0.5)").unwrap(),
            DomainSpec::Tooth { a: 0.5 }
        );
        assert_eq!(
            DomainSpec::parse("comb(n=8)").unwrap(),
            DomainSpec::Comb { teeth: 8 }
        );
        assert_eq!(
            DomainSpec::parse(" annulus( r_in = 1/2 , r_out=1, sides=64 )").unwrap(),
            DomainSpec::PolygonalAnnulus {
                r_inner: 0.5,
                r_outer: 1.0,
                sides: 64
            }
        );
        assert_eq!(DomainSpec::parse("square").unwrap(), DomainSpec::unit_square());
    }

    #[test]
    fn display_round_trips() {
        for s in [
            DomainSpec::Cusp { eps: 0.05 },
            DomainSpec::Tooth { a: 0.25 },
            DomainSpec::PolygonalDisk {
                radius: 1.0,
                sides: 256,
            },
        ] {
            assert_eq!(DomainSpec::parse(&s.to_string()).unwrap(), s);
        }
    }

    #[test]
    fn rejects_out_of_range_tooth() {
        let err = DomainSpec::parse("tooth(a=2)").unwrap_err();
        assert!(err.to_string().contains("a in (0,1]"), "{err}");
    }

    #[test]
    fn reports_parse_position() {
        match DomainSpec::parse("tooth(a=x)") {
            Err(Error::Parse { column, .. }) => assert_eq!(column, 9),
            other => panic!("unexpected {other:?}"),
        }
        assert!(DomainSpec::parse("tooth(b=1)").is_err());
        assert!(DomainSpec::parse("blob(a=1)").is_err());
    }

    #[test]
    fn parallelogram_requires_independent_directions() {
        let s = DomainSpec::Parallelogram {
            e1: [1.0, 0.0],
            e2: [1.0, 0.0],
            a: 1.0,
            b: 1.0,
        };
        assert!(s.validate().is_err());
    }
}
