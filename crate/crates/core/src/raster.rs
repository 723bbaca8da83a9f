//! Two-dimensional raster containers.
//!
//! All rasters are stored row-major. Coordinates follow the image convention:
//! `x` is the column index (horizontal), `y` is the row index (vertical), and
//! the origin is the top-left pixel.

use crate::error::{Error, Result};

/// Height and width of a raster, both at least one pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RasterShape {
    height: usize,
    width: usize,
}

impl RasterShape {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidShape { height, width });
        }
        Ok(Self { height, width })
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.height * self.width
    }

    /// Always false; a shape has at least one pixel.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.width, idx % self.width)
    }

    /// Converts signed coordinates to an index, or `None` when out of bounds.
    #[inline]
    pub fn checked_index(&self, row: i64, col: i64) -> Option<usize> {
        if row < 0 || col < 0 || row >= self.height as i64 || col >= self.width as i64 {
            None
        } else {
            Some(row as usize * self.width + col as usize)
        }
    }

    #[inline]
    pub fn on_border(&self, row: usize, col: usize) -> bool {
        row == 0 || col == 0 || row + 1 == self.height || col + 1 == self.width
    }

    pub(crate) fn ensure_same(&self, other: &RasterShape) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch {
                expected: *self,
                found: *other,
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for RasterShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.height, self.width)
    }
}

/// Pixel adjacency used by connected-component style algorithms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

const N4: [(i64, i64); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
const N8: [(i64, i64); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

impl Connectivity {
    /// Row/column offsets of the neighbours.
    pub fn offsets(self) -> &'static [(i64, i64)] {
        match self {
            Connectivity::Four => &N4,
            Connectivity::Eight => &N8,
        }
    }

    /// The dual connectivity used for background when `self` is used for foreground.
    pub fn complement(self) -> Connectivity {
        match self {
            Connectivity::Four => Connectivity::Eight,
            Connectivity::Eight => Connectivity::Four,
        }
    }
}

impl std::str::FromStr for Connectivity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "4" | "four" => Ok(Connectivity::Four),
            "8" | "eight" => Ok(Connectivity::Eight),
            other => Err(Error::InvalidParameter(format!(
                "connectivity must be 4 or 8, got {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for Connectivity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Connectivity::Four => f.write_str("4"),
            Connectivity::Eight => f.write_str("8"),
        }
    }
}

/// A single-channel raster of `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    shape: RasterShape,
    data: Vec<T>,
}

/// Foreground/background mask.
pub type BinaryMask = Grid<bool>;
/// Instance labels; 0 is background.
pub type LabelMap = Grid<u32>;
/// Real-valued field (probabilities, distances, targets).
pub type ScalarField = Grid<f64>;

impl<T: Clone> Grid<T> {
    pub fn filled(shape: RasterShape, value: T) -> Self {
        Self {
            shape,
            data: vec![value; shape.len()],
        }
    }
}

impl<T: Clone + Default> Grid<T> {
    pub fn new(shape: RasterShape) -> Self {
        Self::filled(shape, T::default())
    }
}

impl<T> Grid<T> {
    pub fn from_vec(shape: RasterShape, data: Vec<T>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::DataLength {
                expected: shape.len(),
                found: data.len(),
            });
        }
        Ok(Self { shape, data })
    }

    /// Builds a grid by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(shape: RasterShape, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(shape.len());
        for r in 0..shape.height() {
            for c in 0..shape.width() {
                data.push(f(r, c));
            }
        }
        Self { shape, data }
    }

    #[inline]
    pub fn shape(&self) -> RasterShape {
        self.shape
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.shape.height()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.shape.width()
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.data[self.shape.index(row, col)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        let i = self.shape.index(row, col);
        self.data[i] = value;
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            shape: self.shape,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Copy> Grid<T> {
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> T {
        self.data[self.shape.index(row, col)]
    }
}

impl BinaryMask {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn any(&self) -> bool {
        self.data.iter().any(|&b| b)
    }

    /// True when every foreground pixel of `self` is also foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.shape == other.shape && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }
}

impl LabelMap {
    /// Mask of all nonzero pixels.
    pub fn foreground(&self) -> BinaryMask {
        self.map(|&l| l != 0)
    }

    pub fn max_label(&self) -> u32 {
        self.data.iter().copied().max().unwrap_or(0)
    }

    /// Distinct nonzero labels in ascending order.
    pub fn labels(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.data.iter().copied().filter(|&l| l != 0).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Renumbers labels to 1..K in raster-scan order of each label's first pixel.
    pub fn relabel_sequential(&self) -> LabelMap {
        let mut mapping = std::collections::HashMap::new();
        let mut next = 0u32;
        self.map(|&l| {
            if l == 0 {
                0
            } else {
                *mapping.entry(l).or_insert_with(|| {
                    next += 1;
                    next
                })
            }
        })
    }
}

impl ScalarField {
    /// Fails when any value is NaN or infinite.
    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::NonFinite(format!("scalar field pixel {i}"))),
            None => Ok(()),
        }
    }
}

/// Two-channel field of per-pixel displacements in pixels.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    shape: RasterShape,
    dx: Vec<f64>,
    dy: Vec<f64>,
}

impl VectorField {
    pub fn zeros(shape: RasterShape) -> Self {
        Self {
            shape,
            dx: vec![0.0; shape.len()],
            dy: vec![0.0; shape.len()],
        }
    }

    pub fn from_channels(shape: RasterShape, dx: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        for ch in [&dx, &dy] {
            if ch.len() != shape.len() {
                return Err(Error::DataLength {
                    expected: shape.len(),
                    found: ch.len(),
                });
            }
        }
        if dx.iter().chain(&dy).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("vector field".into()));
        }
        Ok(Self { shape, dx, dy })
    }

    #[inline]
    pub fn shape(&self) -> RasterShape {
        self.shape
    }

    pub fn dx(&self) -> &[f64] {
        &self.dx
    }

    pub fn dy(&self) -> &[f64] {
        &self.dy
    }

    pub fn dx_mut(&mut self) -> &mut [f64] {
        &mut self.dx
    }

    pub fn dy_mut(&mut self) -> &mut [f64] {
        &mut self.dy
    }

    /// `(dx, dy)` at a pixel.
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> (f64, f64) {
        let i = self.shape.index(row, col);
        (self.dx[i], self.dy[i])
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, dx: f64, dy: f64) {
        let i = self.shape.index(row, col);
        self.dx[i] = dx;
        self.dy[i] = dy;
    }

    pub fn channel_x(&self) -> ScalarField {
        Grid {
            shape: self.shape,
            data: self.dx.clone(),
        }
    }

    pub fn channel_y(&self) -> ScalarField {
        Grid {
            shape: self.shape,
            data: self.dy.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sized_shape_rejected() {
        assert!(RasterShape::new(0, 3).is_err());
        assert!(RasterShape::new(3, 0).is_err());
        assert!(RasterShape::new(1, 1).is_ok());
    }

    #[test]
    fn from_vec_checks_length() {
        let s = RasterShape::new(2, 3).unwrap();
        assert!(Grid::from_vec(s, vec![0u32; 5]).is_err());
        assert!(Grid::from_vec(s, vec![0u32; 6]).is_ok());
    }

    #[test]
    fn relabel_sequential_uses_scan_order() {
        let s = RasterShape::new(1, 5).unwrap();
        let m = LabelMap::from_vec(s, vec![7, 0, 3, 7, 9]).unwrap();
        assert_eq!(m.relabel_sequential().data(), &[1, 0, 2, 1, 3]);
    }

    #[test]
    fn vector_field_rejects_nan() {
        let s = RasterShape::new(1, 2).unwrap();
        assert!(VectorField::from_channels(s, vec![0.0, f64::NAN], vec![0.0; 2]).is_err());
    }
}
