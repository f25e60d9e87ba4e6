//! Node CSV and region GeoJSON readers.

use std::path::Path;

use geojson::{Feature, GeoJson, GeometryValue, Position};

use crate::error::{Error, Result};
use crate::geometry::{Geometry, Point, Polygon};
use crate::grid::{Destination, NodeSet, Region, RegionSet};

/// Parse `id,x,y,volume,role` rows. `role` is `origin` or `destination`;
/// the origin's volume column may be empty.
pub fn parse_nodes(text: &str) -> Result<NodeSet> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::NodeCsv(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::NodeCsv(format!("missing column `{name}`")))
    };
    let (ci, cx, cy, cv, cr) = (col("id")?, col("x")?, col("y")?, col("volume")?, col("role")?);

    let mut origin: Option<(String, Point)> = None;
    let mut destinations = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::NodeCsv(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).unwrap_or("");
        let number = |i: usize, what: &str| -> Result<f64> {
            let raw = field(i);
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::NodeCsv(format!("line {line}: invalid {what} `{raw}`")))
        };
        let id = field(ci).to_string();
        if id.is_empty() {
            return Err(Error::NodeCsv(format!("line {line}: empty id")));
        }
        let position = Point::new(number(cx, "x")?, number(cy, "y")?);
        match field(cr).to_ascii_lowercase().as_str() {
            "origin" => {
                if origin.is_some() {
                    return Err(Error::NodeCsv(format!("line {line}: exactly one origin required")));
                }
                origin = Some((id, position));
            }
            "destination" => {
                let volume = number(cv, "volume")?;
                if volume <= 0.0 {
                    return Err(Error::NodeCsv(format!("line {line}: volume must be positive, got {volume}")));
                }
                destinations.push(Destination { id, position, volume });
            }
            other => return Err(Error::NodeCsv(format!("line {line}: unknown role `{other}`"))),
        }
    }
    let (origin_id, origin) = origin.ok_or_else(|| Error::NodeCsv("exactly one origin required".into()))?;
    NodeSet::new(origin_id, origin, destinations)
}

pub fn read_nodes(path: &Path) -> Result<NodeSet> {
    parse_nodes(&std::fs::read_to_string(path)?)
}

fn point(p: &Position, idx: usize) -> Result<Point> {
    match p.as_slice() {
        [x, y, ..] => Ok(Point::new(*x, *y)),
        _ => Err(Error::RegionGeoJson(format!("feature {idx}: position needs two coordinates"))),
    }
}

fn ring(r: &[Position], idx: usize) -> Result<Vec<Point>> {
    r.iter().map(|p| point(p, idx)).collect()
}

fn polygon(rings: &[Vec<Position>], idx: usize) -> Result<Polygon> {
    let (outer, holes) = rings
        .split_first()
        .ok_or_else(|| Error::RegionGeoJson(format!("feature {idx}: polygon without rings")))?;
    Ok(Polygon { exterior: ring(outer, idx)?, holes: holes.iter().map(|h| ring(h, idx)).collect::<Result<_>>()? })
}

fn polygons(value: &GeometryValue, idx: usize) -> Result<Vec<Polygon>> {
    match value {
        GeometryValue::Polygon { coordinates } => Ok(vec![polygon(coordinates, idx)?]),
        GeometryValue::MultiPolygon { coordinates } => coordinates.iter().map(|c| polygon(c, idx)).collect(),
        other => Err(Error::RegionGeoJson(format!(
            "feature {idx}: regions must be polygons, got {}",
            other.type_name()
        ))),
    }
}

fn obstacles(value: &GeometryValue, idx: usize) -> Result<Vec<Geometry>> {
    Ok(match value {
        GeometryValue::Point { coordinates } => vec![Geometry::Point(point(coordinates, idx)?)],
        GeometryValue::MultiPoint { coordinates } => {
            coordinates.iter().map(|c| point(c, idx).map(Geometry::Point)).collect::<Result<_>>()?
        }
        GeometryValue::LineString { coordinates } => vec![Geometry::LineString(ring(coordinates, idx)?)],
        GeometryValue::MultiLineString { coordinates } => {
            coordinates.iter().map(|l| ring(l, idx).map(Geometry::LineString)).collect::<Result<_>>()?
        }
        GeometryValue::Polygon { .. } | GeometryValue::MultiPolygon { .. } => {
            polygons(value, idx)?.into_iter().map(Geometry::Polygon).collect()
        }
        GeometryValue::GeometryCollection { geometries } => {
            let mut out = Vec::new();
            for g in geometries {
                out.extend(obstacles(&g.value, idx)?);
            }
            out
        }
    })
}

fn feature_into(set: &mut RegionSet, f: &Feature, idx: usize) -> Result<()> {
    let kind = f
        .property("kind")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::RegionGeoJson(format!("feature {idx}: missing string property `kind`")))?;
    let geom = f
        .geometry
        .as_ref()
        .ok_or_else(|| Error::RegionGeoJson(format!("feature {idx}: missing geometry")))?;
    match kind {
        "region" => {
            let delta = match f.property("delta") {
                None | Some(serde_json::Value::Null) => None,
                Some(v) => Some(
                    v.as_f64()
                        .ok_or_else(|| Error::RegionGeoJson(format!("feature {idx}: `delta` must be a number")))?,
                ),
            };
            for polygon in polygons(&geom.value, idx)? {
                set.regions.push(Region { polygon, delta });
            }
        }
        "obstacle" => set.obstacles.extend(obstacles(&geom.value, idx)?),
        other => return Err(Error::RegionGeoJson(format!("feature {idx}: unknown kind `{other}`"))),
    }
    Ok(())
}

/// Parse a FeatureCollection whose features carry `kind` = `region` or
/// `obstacle`; regions may set a numeric `delta` weight.
pub fn parse_regions(text: &str) -> Result<RegionSet> {
    let gj: GeoJson = text.parse().map_err(|e: geojson::Error| Error::RegionGeoJson(e.to_string()))?;
    let mut set = RegionSet::default();
    match gj {
        GeoJson::FeatureCollection(fc) => {
            for (i, f) in fc.features.iter().enumerate() {
                feature_into(&mut set, f, i)?;
            }
        }
        GeoJson::Feature(f) => feature_into(&mut set, &f, 0)?,
        GeoJson::Geometry(_) => {
            return Err(Error::RegionGeoJson("expected a Feature or FeatureCollection".into()));
        }
    }
    set.validate()?;
    Ok(set)
}

pub fn read_regions(path: &Path) -> Result<RegionSet> {
    parse_regions(&std::fs::read_to_string(path)?)
}
