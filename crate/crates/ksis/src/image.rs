//! Rectangular 8-bit grayscale pixel buffer.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Parameter("image dimensions must be at least 1x1".into()));
        }
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::Parameter("image dimensions overflow".into()))?;
        if data.len() != expected {
            return Err(Error::Parameter(format!(
                "pixel buffer has {} bytes, expected {expected} for {width}x{height}",
                data.len()
            )));
        }
        Ok(Image { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        let len = width
            .checked_mul(height)
            .ok_or_else(|| Error::Parameter("image dimensions overflow".into()))?;
        Image::new(width, height, vec![value; len])
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixel_count(&self) -> usize {
        self.data.len()
    }

    /// Row-major intensities.
    #[inline]
    pub fn pixels(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.height && col < self.width);
        row * self.width + col
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[self.index(row, col)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mismatched_buffer() {
        assert!(Image::new(2, 2, vec![0; 3]).is_err());
        assert!(Image::new(0, 2, vec![]).is_err());
        assert!(Image::new(2, 2, vec![1, 2, 3, 4]).is_ok());
    }

    #[test]
    fn row_major_indexing() {
        let img = Image::new(3, 2, vec![10, 20, 30, 40, 50, 60]).unwrap();
        assert_eq!(img.get(0, 2), 30);
        assert_eq!(img.get(1, 0), 40);
    }
}
