//! Design points, responses and the distance metric between them.

use std::io::Read;

use crate::error::{Error, Result};

/// Mean Earth radius used by the great-circle distance, in km.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    /// Great-circle distance in km; points are `(latitude, longitude)` in degrees.
    Haversine,
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(Metric::Euclidean),
            "haversine" => Ok(Metric::Haversine),
            _ => Err(Error::invalid(format!(
                "unknown metric `{s}` (expected euclidean or haversine)"
            ))),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::Haversine => "haversine",
        })
    }
}

/// Great-circle distance between two `(lat, lon)` points given in degrees.
pub fn haversine_km(a: &[f64], b: &[f64]) -> f64 {
    let (lat1, lon1) = (a[0].to_radians(), a[1].to_radians());
    let (lat2, lon2) = (b[0].to_radians(), b[1].to_radians());
    let s1 = ((lat2 - lat1) * 0.5).sin();
    let s2 = ((lon2 - lon1) * 0.5).sin();
    let h = s1 * s1 + lat1.cos() * lat2.cos() * s2 * s2;
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// `n` design points in R^D with responses. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    dim: usize,
    responses: Vec<f64>,
    metric: Metric,
}

impl Dataset {
    /// `points` is row-major `n x dim`.
    pub fn new(points: Vec<f64>, dim: usize, responses: Vec<f64>, metric: Metric) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if points.len() != responses.len() * dim {
            return Err(Error::invalid(format!(
                "{} coordinates do not match {} responses in dimension {dim}",
                points.len(),
                responses.len()
            )));
        }
        let n = responses.len();
        if n < dim + 2 {
            return Err(Error::invalid(format!(
                "need at least {} points in dimension {dim}, got {n}",
                dim + 2
            )));
        }
        if points.iter().chain(&responses).any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite coordinate or response"));
        }
        if metric == Metric::Haversine {
            if dim != 2 {
                return Err(Error::invalid(
                    "haversine metric requires two columns (latitude, longitude)",
                ));
            }
            if points.chunks(2).any(|p| p[0].abs() > 90.0) {
                return Err(Error::invalid("latitude outside [-90, 90]"));
            }
        }
        Ok(Self {
            points,
            dim,
            responses,
            metric,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], responses: Vec<f64>, metric: Metric) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("ragged design rows"));
        }
        Self::new(rows.concat(), dim, responses, metric)
    }

    /// Reads `x1..xD, y` columns from a CSV with a header row. When `dim` is
    /// `None` it is the number of consecutive `x1, x2, ...` columns present.
    pub fn from_csv<R: Read>(reader: R, dim: Option<usize>, metric: Metric) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
        let y_col = find("y").ok_or_else(|| Error::invalid("column y not found"))?;
        let dim = match dim {
            Some(d) => d,
            None => (1..)
                .take_while(|k| find(&format!("x{k}")).is_some())
                .count(),
        };
        if dim == 0 {
            return Err(Error::invalid("no x1 column found"));
        }
        let x_cols = (1..=dim)
            .map(|k| {
                find(&format!("x{k}"))
                    .ok_or_else(|| Error::invalid(format!("column x{k} not found")))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut points = Vec::new();
        let mut responses = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = row + 2;
            let field = |c: usize| -> Result<f64> {
                let raw = rec.get(c).unwrap_or("");
                raw.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("`{raw}` is not a number (column {})", &headers[c]),
                })
            };
            for &c in &x_cols {
                points.push(field(c)?);
            }
            responses.push(field(y_col)?);
        }
        Self::new(points, dim, responses, metric)
    }

    pub fn n(&self) -> usize {
        self.responses.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    /// Same design with different responses.
    pub fn with_responses(&self, responses: Vec<f64>) -> Result<Self> {
        Self::new(self.points.clone(), self.dim, responses, self.metric)
    }

    #[inline]
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.metric {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Haversine => haversine_km(a, b),
        }
    }

    /// Writes the local coordinates of `p` relative to `x` into `out`.
    ///
    /// Euclidean: `p - x`. Haversine: an equirectangular projection around
    /// `x` in km (north, east), so offsets and bandwidths share units.
    #[inline]
    pub fn offset(&self, x: &[f64], p: &[f64], out: &mut [f64]) {
        match self.metric {
            Metric::Euclidean => {
                for ((o, a), b) in out.iter_mut().zip(p).zip(x) {
                    *o = a - b;
                }
            }
            Metric::Haversine => {
                let k = EARTH_RADIUS_KM * std::f64::consts::PI / 180.0;
                out[0] = (p[0] - x[0]) * k;
                let mut dlon = p[1] - x[1];
                if dlon > 180.0 {
                    dlon -= 360.0;
                } else if dlon < -180.0 {
                    dlon += 360.0;
                }
                out[1] = dlon * k * x[0].to_radians().cos();
            }
        }
    }

    /// Axis-aligned bounding box `(lo, hi)` per coordinate.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        (0..self.dim)
            .map(|d| {
                self.points
                    .iter()
                    .skip(d)
                    .step_by(self.dim)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    })
            })
            .collect()
    }
}

/// Upper-triangle pairwise distances, `n(n-1)/2` entries, row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedDistances {
    n: usize,
    values: Vec<f64>,
}

impl CondensedDistances {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    /// Distance between `i` and `j`; zero when `i == j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.values[self.index(i, j)],
            std::cmp::Ordering::Greater => self.values[self.index(j, i)],
        }
    }

    /// Iterates `(i, j, d)` over `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        (0..n)
            .flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
            .zip(&self.values)
            .map(|((i, j), &d)| (i, j, d))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_positive(&self) -> Option<f64> {
        self.values
            .iter()
            .copied()
            .filter(|&d| d > 0.0)
            .min_by(f64::total_cmp)
    }

    pub fn median(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let mut v = self.values.clone();
        let mid = v.len() / 2;
        let (_, m, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
        *m
    }
}

/// All pairwise distances under the dataset's metric.
pub fn pairwise_distances(data: &Dataset) -> CondensedDistances {
    let n = data.n();
    let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        let a = data.point(i);
        for j in i + 1..n {
            values.push(data.distance(a, data.point(j)));
        }
    }
    CondensedDistances { n, values }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(rows: &[[f64; 2]], metric: Metric) -> Dataset {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        let y = vec![0.0; rows.len()];
        Dataset::from_rows(&rows, y, metric).unwrap()
    }

    #[test]
    fn euclidean_pairwise() {
        let d = ds(
            &[[0.0, 0.0], [3.0, 4.0], [3.0, 4.0], [1.0, 0.0]],
            Metric::Euclidean,
        );
        let pd = pairwise_distances(&d);
        assert_eq!(pd.values().len(), 6);
        assert_eq!(pd.get(0, 1), 5.0);
        assert_eq!(pd.get(1, 0), 5.0);
        assert_eq!(pd.get(1, 2), 0.0);
        assert_eq!(pd.get(2, 2), 0.0);
        assert_eq!(pd.get(0, 3), 1.0);
        let collected: Vec<_> = pd.pairs().collect();
        assert_eq!(collected[0], (0, 1, 5.0));
        assert_eq!(collected[5], (2, 3, pd.get(2, 3)));
    }

    #[test]
    fn haversine_one_degree_of_longitude_on_the_equator() {
        let d = haversine_km(&[0.0, 0.0], &[0.0, 1.0]);
        assert!((d - 111.195).abs() < 0.01, "{d}");
    }

    #[test]
    fn haversine_requires_two_columns() {
        let err = Dataset::new(vec![0.0; 15], 3, vec![0.0; 5], Metric::Haversine).unwrap_err();
        assert!(err.to_string().contains("haversine"));
    }

    #[test]
    fn rejects_too_few_points_and_nan() {
        assert!(Dataset::new(vec![0.0; 6], 2, vec![0.0; 3], Metric::Euclidean).is_err());
        let mut pts = vec![0.0; 8];
        pts[3] = f64::NAN;
        assert!(Dataset::new(pts, 2, vec![0.0; 4], Metric::Euclidean).is_err());
    }

    #[test]
    fn csv_ingestion() {
        let text = "x1,x2,y\n0,0,1\n1,0,2\n0,1,3\n1,1,4\n";
        let d = Dataset::from_csv(text.as_bytes(), None, Metric::Euclidean).unwrap();
        assert_eq!(d.dim(), 2);
        assert_eq!(d.n(), 4);
        assert_eq!(d.point(3), &[1.0, 1.0]);
        assert_eq!(d.responses(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn csv_missing_y() {
        let text = "x1,x2,z\n0,0,1\n";
        let err = Dataset::from_csv(text.as_bytes(), None, Metric::Euclidean).unwrap_err();
        assert!(err.to_string().contains("column y not found"));
    }

    #[test]
    fn csv_bad_number_names_line() {
        let text = "x1,y\n0,1\n1,2\nabc,3\n2,4\n";
        let err = Dataset::from_csv(text.as_bytes(), None, Metric::Euclidean).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    }

    #[test]
    fn local_projection_matches_haversine_nearby() {
        let d = ds(
            &[[35.0, -85.0], [35.1, -84.9], [0.0, 0.0], [1.0, 1.0]],
            Metric::Haversine,
        );
        let mut off = [0.0; 2];
        d.offset(d.point(0), d.point(1), &mut off);
        let proj = (off[0] * off[0] + off[1] * off[1]).sqrt();
        let exact = d.distance(d.point(0), d.point(1));
        assert!((proj - exact).abs() / exact < 1e-3);
    }
}
