//! Dense per-pixel fields and the analysis crop.
//!
//! All fields are row-major with `(column x, row y)` addressing and the
//! origin at the top-left pixel. Validity masks are first-class so sparse
//! ground truth and dense predictions share one representation; non-finite
//! samples are demoted to invalid at construction instead of rejected,
//! because real flow files carry sentinel values for unknown pixels.

use std::fmt;

use crate::error::CoreError;

/// KITTI wide-image width in pixels.
pub const KITTI_FRAME_WIDTH: usize = 1242;
/// KITTI wide-image height in pixels.
pub const KITTI_FRAME_HEIGHT: usize = 375;

/// Small analysis crop centered on the road ahead.
pub const CROP_B: CropRect = CropRect {
    x: 720,
    y: 180,
    w: 200,
    h: 120,
};
/// Medium analysis crop.
pub const CROP_G: CropRect = CropRect {
    x: 700,
    y: 100,
    w: 400,
    h: 240,
};
/// Large analysis crop, nearly the full frame height.
pub const CROP_R: CropRect = CropRect {
    x: 640,
    y: 20,
    w: 580,
    h: 340,
};

fn check_extent(width: usize, height: usize) -> Result<(), CoreError> {
    if width == 0 || height == 0 {
        return Err(CoreError::EmptyExtent { width, height });
    }
    Ok(())
}

fn check_len(width: usize, height: usize, got: usize) -> Result<(), CoreError> {
    let expected = width * height;
    if got != expected {
        return Err(CoreError::BadLength {
            width,
            height,
            expected,
            got,
        });
    }
    Ok(())
}

/// Dense 2-vector flow field in pixels per frame interval, with validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    u: Vec<f64>,
    v: Vec<f64>,
    valid: Vec<bool>,
}

impl FlowField {
    /// Build a flow field from row-major components and an explicit mask.
    /// Pixels with non-finite `u` or `v` are demoted to invalid.
    pub fn new(
        width: usize,
        height: usize,
        u: Vec<f64>,
        v: Vec<f64>,
        mut valid: Vec<bool>,
    ) -> Result<Self, CoreError> {
        check_extent(width, height)?;
        check_len(width, height, u.len())?;
        check_len(width, height, v.len())?;
        check_len(width, height, valid.len())?;
        for i in 0..u.len() {
            if !u[i].is_finite() || !v[i].is_finite() {
                valid[i] = false;
            }
        }
        Ok(Self {
            width,
            height,
            u,
            v,
            valid,
        })
    }

    /// Build a fully-valid flow field (non-finite pixels still become invalid).
    pub fn dense(width: usize, height: usize, u: Vec<f64>, v: Vec<f64>) -> Result<Self, CoreError> {
        let n = width * height;
        Self::new(width, height, u, v, vec![true; n])
    }

    /// Constant flow over a `width`x`height` field; handy in tests.
    pub fn uniform(width: usize, height: usize, u: f64, v: f64) -> Self {
        let n = width * height;
        Self::dense(width, height, vec![u; n], vec![v; n]).expect("uniform field is well-formed")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    /// Row-major index of pixel `(x, y)`.
    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    /// Per-pixel flow magnitude `sqrt(u^2 + v^2)`; mask copied from the field.
    pub fn magnitude_field(&self) -> ScalarField {
        let data = self
            .u
            .iter()
            .zip(&self.v)
            .map(|(&u, &v)| u.hypot(v))
            .collect();
        ScalarField {
            width: self.width,
            height: self.height,
            data,
            valid: self.valid.clone(),
        }
    }

    /// Signed horizontal component as a scalar field; mask copied.
    pub fn horizontal_field(&self) -> ScalarField {
        ScalarField {
            width: self.width,
            height: self.height,
            data: self.u.clone(),
            valid: self.valid.clone(),
        }
    }
}

/// Per-pixel flow magnitude; mask copied from the input field.
pub fn flow_magnitude(f: &FlowField) -> ScalarField {
    f.magnitude_field()
}

/// Dense non-negative disparity map with validity mask.
///
/// Disparity semantics are deliberately generic: the pipeline only uses the
/// flow/disparity ratio up to a global fitted scale, so any monotone
/// per-dataset convention (pixels, fractional, ordinal) is absorbed there.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityMap {
    field: ScalarField,
}

impl DisparityMap {
    /// Build a disparity map; non-finite or negative samples become invalid.
    pub fn new(
        width: usize,
        height: usize,
        d: Vec<f64>,
        mut valid: Vec<bool>,
    ) -> Result<Self, CoreError> {
        check_extent(width, height)?;
        check_len(width, height, d.len())?;
        check_len(width, height, valid.len())?;
        for i in 0..d.len() {
            if !d[i].is_finite() || d[i] < 0.0 {
                valid[i] = false;
            }
        }
        Ok(Self {
            field: ScalarField {
                width,
                height,
                data: d,
                valid,
            },
        })
    }

    /// Fully-valid disparity map (invalid samples still demoted).
    pub fn dense(width: usize, height: usize, d: Vec<f64>) -> Result<Self, CoreError> {
        let n = width * height;
        Self::new(width, height, d, vec![true; n])
    }

    /// Constant disparity everywhere; handy in tests.
    pub fn uniform(width: usize, height: usize, d: f64) -> Self {
        Self::dense(width, height, vec![d; width * height])
            .expect("uniform disparity is well-formed")
    }

    pub fn width(&self) -> usize {
        self.field.width
    }

    pub fn height(&self) -> usize {
        self.field.height
    }

    pub fn d(&self) -> &[f64] {
        &self.field.data
    }

    pub fn valid(&self) -> &[bool] {
        &self.field.valid
    }

    /// View of the disparity values as a plain scalar field.
    pub fn as_scalar(&self) -> &ScalarField {
        &self.field
    }

    /// Consume into the underlying scalar field.
    pub fn into_scalar(self) -> ScalarField {
        self.field
    }
}

/// A masked scalar field, the common currency of the aggregation stages.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    data: Vec<f64>,
    valid: Vec<bool>,
}

impl ScalarField {
    pub fn new(
        width: usize,
        height: usize,
        data: Vec<f64>,
        valid: Vec<bool>,
    ) -> Result<Self, CoreError> {
        check_extent(width, height)?;
        check_len(width, height, data.len())?;
        check_len(width, height, valid.len())?;
        Ok(Self {
            width,
            height,
            data,
            valid,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    /// Value at `(x, y)` together with its validity flag.
    pub fn at(&self, x: usize, y: usize) -> (f64, bool) {
        let i = self.index(x, y);
        (self.data[i], self.valid[i])
    }

    /// Apply `f` to every sample, keeping the mask.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
            valid: self.valid.clone(),
        }
    }
}

/// Axis-aligned pixel rectangle selecting the analysis region.
///
/// `(x, y)` is the upper-left corner; `w`/`h` are width and height. Fit
/// inside a concrete field extent is checked at application time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropRect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl CropRect {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Result<Self, CoreError> {
        if w == 0 || h == 0 {
            return Err(CoreError::EmptyExtent {
                width: w,
                height: h,
            });
        }
        Ok(Self { x, y, w, h })
    }

    /// The rectangle covering a full `width`x`height` frame.
    pub fn full(width: usize, height: usize) -> Self {
        Self {
            x: 0,
            y: 0,
            w: width,
            h: height,
        }
    }

    /// Does the rectangle fit inside a `width`x`height` field?
    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.w >= 1
            && self.h >= 1
            && self.x.checked_add(self.w).is_some_and(|r| r <= width)
            && self.y.checked_add(self.h).is_some_and(|b| b <= height)
    }
}

impl fmt::Display for CropRect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{}x{})", self.x, self.y, self.w, self.h)
    }
}

/// Magnitude thresholds deciding which pixels enter the per-frame means.
///
/// A pixel contributes to the flow mean only above `of_min` and to the
/// disparity mean only above `disp_min`; the two supports are thresholded
/// independently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityThresholds {
    pub of_min: f64,
    pub disp_min: f64,
}

impl Default for ValidityThresholds {
    fn default() -> Self {
        Self {
            of_min: 0.2,
            disp_min: 0.01,
        }
    }
}

/// Extract the `crop` sub-field, preserving the mask.
pub fn apply_crop(field: &ScalarField, crop: &CropRect) -> Result<ScalarField, CoreError> {
    if !crop.fits(field.width, field.height) {
        return Err(CoreError::CropOutOfBounds {
            crop: *crop,
            width: field.width,
            height: field.height,
        });
    }
    let mut data = Vec::with_capacity(crop.w * crop.h);
    let mut valid = Vec::with_capacity(crop.w * crop.h);
    for y in crop.y..crop.y + crop.h {
        let row = y * field.width;
        data.extend_from_slice(&field.data[row + crop.x..row + crop.x + crop.w]);
        valid.extend_from_slice(&field.valid[row + crop.x..row + crop.x + crop.w]);
    }
    Ok(ScalarField {
        width: crop.w,
        height: crop.h,
        data,
        valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn magnitude_of_3_4_is_5() {
        let f = FlowField::uniform(4, 3, 3.0, 4.0);
        let m = flow_magnitude(&f);
        assert!(m.data().iter().all(|&v| (v - 5.0).abs() < 1e-15));
        assert!(m.valid().iter().all(|&v| v));
    }

    #[test]
    fn magnitude_of_zero_flow_is_zero() {
        let f = FlowField::uniform(2, 2, 0.0, 0.0);
        let m = flow_magnitude(&f);
        assert!(m.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    #[allow(clippy::approx_constant)] // frozen expected value
    fn magnitude_of_unit_diagonal_is_sqrt2() {
        let mut u = vec![0.0; 9];
        let mut v = vec![0.0; 9];
        u[4] = 1.0;
        v[4] = 1.0;
        let f = FlowField::dense(3, 3, u, v).unwrap();
        let m = flow_magnitude(&f);
        assert!((m.data()[4] - 2.0_f64.sqrt()).abs() < 1e-12);
        assert!((m.data()[4] - 1.41421356).abs() < 1e-8);
    }

    #[test]
    fn non_finite_flow_demoted_to_invalid() {
        let f = FlowField::dense(2, 1, vec![f64::NAN, 1.0], vec![0.0, f64::INFINITY]).unwrap();
        assert_eq!(f.valid(), &[false, false]);
    }

    #[test]
    fn negative_disparity_demoted_to_invalid() {
        let d = DisparityMap::dense(3, 1, vec![-0.5, 0.0, 1.0]).unwrap();
        assert_eq!(d.valid(), &[false, true, true]);
    }

    #[test]
    fn crop_of_kitti_frame_by_crop_g() {
        let f = ScalarField::new(
            KITTI_FRAME_WIDTH,
            KITTI_FRAME_HEIGHT,
            vec![1.0; KITTI_FRAME_WIDTH * KITTI_FRAME_HEIGHT],
            vec![true; KITTI_FRAME_WIDTH * KITTI_FRAME_HEIGHT],
        )
        .unwrap();
        let c = apply_crop(&f, &CROP_G).unwrap();
        assert_eq!((c.width(), c.height()), (400, 240));
    }

    #[test]
    fn identity_crop_returns_equal_field() {
        let f = ScalarField::new(5, 4, (0..20).map(|i| i as f64).collect(), vec![true; 20]).unwrap();
        let c = apply_crop(&f, &CropRect::full(5, 4)).unwrap();
        assert_eq!(c, f);
    }

    #[test]
    fn out_of_bounds_crop_rejected() {
        let f = ScalarField::new(10, 10, vec![0.0; 100], vec![true; 100]).unwrap();
        let err = apply_crop(&f, &CropRect::new(5, 5, 6, 6).unwrap()).unwrap_err();
        assert!(matches!(err, CoreError::CropOutOfBounds { .. }));
    }

    #[test]
    fn named_crops_fit_kitti_frame() {
        for crop in [CROP_B, CROP_G, CROP_R] {
            assert!(
                crop.fits(KITTI_FRAME_WIDTH, KITTI_FRAME_HEIGHT),
                "{crop} must fit {KITTI_FRAME_WIDTH}x{KITTI_FRAME_HEIGHT}"
            );
        }
    }

    #[test]
    fn crop_preserves_mask() {
        let mut valid = vec![true; 16];
        valid[5] = false; // (1,1) in a 4x4 field
        let f = ScalarField::new(4, 4, vec![0.0; 16], valid).unwrap();
        let c = apply_crop(&f, &CropRect::new(1, 1, 2, 2).unwrap()).unwrap();
        assert_eq!(c.valid(), &[false, true, true, true]);
    }

    fn small_field() -> impl Strategy<Value = ScalarField> {
        (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
            proptest::collection::vec(-100.0f64..100.0, w * h).prop_map(move |data| {
                ScalarField::new(w, h, data, vec![true; w * h]).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn magnitude_nonnegative_and_sign_invariant(
            (w, h) in (1usize..10, 1usize..10),
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = w * h;
            let u: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
            let f = FlowField::dense(w, h, u.clone(), v.clone()).unwrap();
            let g = FlowField::dense(
                w,
                h,
                u.iter().map(|x| -x).collect(),
                v.iter().map(|x| -x).collect(),
            )
            .unwrap();
            let mf = flow_magnitude(&f);
            let mg = flow_magnitude(&g);
            for i in 0..n {
                prop_assert!(mf.data()[i] >= 0.0);
                prop_assert_eq!(mf.data()[i], mg.data()[i]);
            }
        }

        #[test]
        fn nested_crops_compose(field in small_field()) {
            let w = field.width();
            let h = field.height();
            // outer crop: upper-left quadrant (rounded up); inner: its lower-right part
            let outer = CropRect::new(0, 0, w.div_ceil(2), h.div_ceil(2)).unwrap();
            let inner = CropRect::new(
                outer.w / 2,
                outer.h / 2,
                outer.w - outer.w / 2,
                outer.h - outer.h / 2,
            )
            .unwrap();
            let composed =
                CropRect::new(outer.x + inner.x, outer.y + inner.y, inner.w, inner.h).unwrap();
            let two_step = apply_crop(&apply_crop(&field, &outer).unwrap(), &inner).unwrap();
            let one_step = apply_crop(&field, &composed).unwrap();
            prop_assert_eq!(two_step, one_step);
        }
    }
}
