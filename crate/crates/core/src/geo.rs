//! Great-circle and planar distances.

use thiserror::Error;

use crate::scalar::Scalar;

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("latitude {0} outside [-90, 90]")]
    Latitude(f64),
    #[error("longitude {0} outside [-180, 180]")]
    Longitude(f64),
    #[error("non-finite planar coordinate ({0}, {1})")]
    NonFinite(f64, f64),
}

/// A latitude/longitude pair in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint<T> {
    pub lat: T,
    pub lon: T,
}

impl<T: Scalar> GeoPoint<T> {
    pub fn new(lat: T, lon: T) -> Result<Self, GeoError> {
        let point = Self { lat, lon };
        point.validate()?;
        Ok(point)
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        let (lat, lon) = (self.lat.to_f64_lossy(), self.lon.to_f64_lossy());
        if !(-90.0..=90.0).contains(&lat) {
            return Err(GeoError::Latitude(lat));
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(GeoError::Longitude(lon));
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }
}

/// A point on a Cartesian plane, coordinates in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPoint<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> PlanarPoint<T> {
    pub fn new(x: T, y: T) -> Result<Self, GeoError> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(GeoError::NonFinite(x.to_f64_lossy(), y.to_f64_lossy()))
        }
    }
}

/// Great-circle distance in meters on a sphere of radius [`EARTH_RADIUS_M`].
pub fn haversine<T: Scalar>(a: GeoPoint<T>, b: GeoPoint<T>) -> T {
    let radius = T::lit(EARTH_RADIUS_M);
    let two = T::lit(2.0);
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = (b.lat - a.lat).to_radians();
    let dlon = (b.lon - a.lon).to_radians();
    let s_lat = (dlat / two).sin();
    let s_lon = (dlon / two).sin();
    let h = s_lat * s_lat + lat1.cos() * lat2.cos() * s_lon * s_lon;
    // rounding can push h a hair above 1 for antipodes
    let h = h.min(T::one()).max(T::zero());
    two * radius * h.sqrt().asin()
}

pub fn euclidean<T: Scalar>(a: PlanarPoint<T>, b: PlanarPoint<T>) -> T {
    (a.x - b.x).hypot(a.y - b.y)
}

/// How a graph's vertex coordinates are interpreted.
///
/// Geographic positions are stored as `[lat, lon]`, planar ones as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Geographic,
    Planar,
}

impl Metric {
    /// Straight-line distance between two stored positions.
    pub fn distance<T: Scalar>(self, a: [T; 2], b: [T; 2]) -> T {
        match self {
            Metric::Geographic => haversine(
                GeoPoint { lat: a[0], lon: a[1] },
                GeoPoint { lat: b[0], lon: b[1] },
            ),
            Metric::Planar => euclidean(PlanarPoint { x: a[0], y: a[1] }, PlanarPoint { x: b[0], y: b[1] }),
        }
    }

    pub fn is_valid_position<T: Scalar>(self, p: [T; 2]) -> bool {
        match self {
            Metric::Geographic => GeoPoint { lat: p[0], lon: p[1] }.is_valid(),
            Metric::Planar => p[0].is_finite() && p[1].is_finite(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Geographic => "geographic",
            Metric::Planar => "planar",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "geographic" => Some(Metric::Geographic),
            "planar" => Some(Metric::Planar),
            _ => None,
        }
    }
}
