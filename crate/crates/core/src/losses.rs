//! Training losses with analytic gradients with respect to the predictions.
//!
//! Cross entropy and soft IoU act on the inside and center masks, squared error
//! on the two center-vector channels. Gradients are with respect to raw
//! probabilities (or raw vector values), never logits.

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, ScalarField};

/// Clamp for logarithms and guard for IoU denominators.
pub const EPS: f64 = 1e-7;

/// Targets, predictions and the pixels that contribute.
#[derive(Clone, Debug)]
pub struct LossTensors {
    pub targets: ScalarField,
    pub predictions: ScalarField,
    pub validity: BinaryMask,
}

impl LossTensors {
    pub fn new(targets: ScalarField, predictions: ScalarField, validity: BinaryMask) -> Result<Self> {
        targets.shape().ensure_same(&predictions.shape())?;
        targets.shape().ensure_same(&validity.shape())?;
        Ok(Self {
            targets,
            predictions,
            validity,
        })
    }

    /// Every pixel contributes.
    pub fn dense(targets: ScalarField, predictions: ScalarField) -> Result<Self> {
        let validity = BinaryMask::filled(targets.shape(), true);
        Self::new(targets, predictions, validity)
    }

    fn check(&self) -> Result<()> {
        self.targets.shape().ensure_same(&self.predictions.shape())?;
        self.targets.shape().ensure_same(&self.validity.shape())?;
        if self.targets.data().iter().any(|v| v.is_nan()) {
            return Err(Error::NonFinite("loss targets".into()));
        }
        if self.predictions.data().iter().any(|v| v.is_nan()) {
            return Err(Error::NonFinite("loss predictions".into()));
        }
        Ok(())
    }

    fn valid_pixels(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.validity
            .data()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(|(i, _)| (i, self.targets.data()[i], self.predictions.data()[i]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            alpha: 10.0,
            beta: 10.0,
            gamma: 1.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        if [self.alpha, self.beta, self.gamma].iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter("loss weights must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Loss value and per-pixel gradient (zero on invalid pixels).
#[derive(Clone, Debug)]
pub struct LossValueAndGrad {
    pub value: f64,
    pub grad: ScalarField,
}

impl LossValueAndGrad {
    fn zero_like(t: &LossTensors) -> Self {
        Self {
            value: 0.0,
            grad: ScalarField::new(t.targets.shape()),
        }
    }
}

/// Binary cross entropy, summed over valid pixels and negated so that a
/// perfect prediction gives the minimum.
pub fn ce_loss(t: &LossTensors) -> Result<LossValueAndGrad> {
    t.check()?;
    let mut out = LossValueAndGrad::zero_like(t);
    let mut value = 0.0;
    for (i, y, p) in t.valid_pixels() {
        let p = p.clamp(EPS, 1.0 - EPS);
        value -= y * p.ln() + (1.0 - y) * (1.0 - p).ln();
        out.grad.data_mut()[i] = -(y / p - (1.0 - y) / (1.0 - p));
    }
    out.value = value;
    Ok(out)
}

/// Soft IoU loss `1 − I/U` for one mask, with `I = Σ y·p` and `U = Σ y + Σ p − I`.
pub fn iou_loss(t: &LossTensors) -> Result<LossValueAndGrad> {
    t.check()?;
    let mut out = LossValueAndGrad::zero_like(t);
    let (mut inter, mut sy, mut sp) = (0.0, 0.0, 0.0);
    for (_, y, p) in t.valid_pixels() {
        inter += y * p;
        sy += y;
        sp += p;
    }
    let union = (sy + sp - inter).max(EPS);
    out.value = 1.0 - inter / union;
    let u2 = union * union;
    for (i, y, _) in t.valid_pixels() {
        // dI/dp = y, dU/dp = 1 - y
        out.grad.data_mut()[i] = -(y * union - inter * (1.0 - y)) / u2;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Reduction {
    #[default]
    Sum,
    Mean,
}

/// Squared error summed over valid pixels.
pub fn ms_loss(t: &LossTensors) -> Result<LossValueAndGrad> {
    ms_loss_with(t, Reduction::Sum)
}

/// Squared error with an explicit reduction; `Mean` divides by the number of
/// valid pixels (no-op when there are none).
pub fn ms_loss_with(t: &LossTensors, reduction: Reduction) -> Result<LossValueAndGrad> {
    t.check()?;
    let mut out = LossValueAndGrad::zero_like(t);
    let mut n = 0usize;
    for (i, y, p) in t.valid_pixels() {
        let d = p - y;
        out.value += d * d;
        out.grad.data_mut()[i] = 2.0 * d;
        n += 1;
    }
    if reduction == Reduction::Mean && n > 0 {
        let k = 1.0 / n as f64;
        out.value *= k;
        out.grad.data_mut().iter_mut().for_each(|g| *g *= k);
    }
    Ok(out)
}

/// Unweighted component sums of the total loss.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossComponents {
    pub ce: f64,
    pub iou: f64,
    pub ms: f64,
}

/// Weighted total with one gradient per predicted field.
#[derive(Clone, Debug)]
pub struct TotalLoss {
    pub value: f64,
    pub components: LossComponents,
    pub inside_grad: ScalarField,
    pub center_grad: ScalarField,
    pub cvx_grad: ScalarField,
    pub cvy_grad: ScalarField,
}

/// `alpha·(ce(IM) + ce(CM)) + beta·(iou(IM) + iou(CM)) + gamma·(ms(CVx) + ms(CVy))`.
pub fn total_loss(
    inside: &LossTensors,
    center: &LossTensors,
    cvx: &LossTensors,
    cvy: &LossTensors,
    w: &LossWeights,
) -> Result<TotalLoss> {
    w.validate()?;
    let mask_grad = |t: &LossTensors| -> Result<(f64, f64, ScalarField)> {
        let ce = ce_loss(t)?;
        let iou = iou_loss(t)?;
        let grad = ce.grad.data().iter().zip(iou.grad.data()).map(|(c, i)| w.alpha * c + w.beta * i).collect();
        Ok((ce.value, iou.value, ScalarField::from_vec(t.targets.shape(), grad)?))
    };
    let vec_grad = |t: &LossTensors| -> Result<(f64, ScalarField)> {
        let ms = ms_loss(t)?;
        Ok((ms.value, ms.grad.map(|g| w.gamma * g)))
    };
    let (ce_im, iou_im, inside_grad) = mask_grad(inside)?;
    let (ce_cm, iou_cm, center_grad) = mask_grad(center)?;
    let (ms_x, cvx_grad) = vec_grad(cvx)?;
    let (ms_y, cvy_grad) = vec_grad(cvy)?;
    let components = LossComponents {
        ce: ce_im + ce_cm,
        iou: iou_im + iou_cm,
        ms: ms_x + ms_y,
    };
    Ok(TotalLoss {
        value: combine(&components, w),
        components,
        inside_grad,
        center_grad,
        cvx_grad,
        cvy_grad,
    })
}

/// Weighted sum of precomputed component totals.
pub fn combine(c: &LossComponents, w: &LossWeights) -> f64 {
    w.alpha * c.ce + w.beta * c.iou + w.gamma * c.ms
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::RasterShape;

    fn field(v: &[f64]) -> ScalarField {
        ScalarField::from_vec(RasterShape::new(1, v.len()).unwrap(), v.to_vec()).unwrap()
    }

    #[test]
    fn ce_single_pixel_half() {
        let t = LossTensors::dense(field(&[1.0]), field(&[0.5])).unwrap();
        let l = ce_loss(&t).unwrap();
        assert!((l.value - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((l.grad.data()[0] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn ce_perfect_prediction_near_zero() {
        let t = LossTensors::dense(field(&[0.0, 1.0]), field(&[0.0, 1.0])).unwrap();
        let l = ce_loss(&t).unwrap();
        assert!(l.value >= 0.0 && l.value < 2.0 * 1.1 * EPS);
    }

    #[test]
    fn iou_limits() {
        let y = field(&[1.0, 0.0, 1.0]);
        assert_eq!(iou_loss(&LossTensors::dense(y.clone(), y.clone()).unwrap()).unwrap().value, 0.0);
        let ones = field(&[1.0; 4]);
        let zeros = field(&[0.0; 4]);
        assert_eq!(iou_loss(&LossTensors::dense(ones, zeros).unwrap()).unwrap().value, 1.0);
    }

    #[test]
    fn ms_examples() {
        let t = LossTensors::dense(field(&[1.0]), field(&[4.0])).unwrap();
        let l = ms_loss(&t).unwrap();
        assert_eq!(l.value, 9.0);
        assert_eq!(l.grad.data()[0], 6.0);

        let masked = LossTensors::new(
            field(&[1.0, 2.0]),
            field(&[5.0, -3.0]),
            BinaryMask::from_vec(RasterShape::new(1, 2).unwrap(), vec![false; 2]).unwrap(),
        )
        .unwrap();
        let l = ms_loss(&masked).unwrap();
        assert_eq!(l.value, 0.0);
        assert!(l.grad.data().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn ms_mean_reduction() {
        let t = LossTensors::dense(field(&[0.0, 0.0]), field(&[1.0, 3.0])).unwrap();
        let l = ms_loss_with(&t, Reduction::Mean).unwrap();
        assert_eq!(l.value, 5.0);
        assert_eq!(l.grad.data(), &[1.0, 3.0]);
    }

    #[test]
    fn nan_inputs_rejected() {
        let t = LossTensors::dense(field(&[1.0]), field(&[f64::NAN])).unwrap();
        assert!(ce_loss(&t).is_err());
        assert!(iou_loss(&t).is_err());
        assert!(ms_loss(&t).is_err());
    }

    #[test]
    fn combine_default_weights() {
        let c = LossComponents { ce: 0.2, iou: 0.3, ms: 4.0 };
        assert!((combine(&c, &LossWeights::default()) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn total_of_perfect_vectors_and_zero_weights() {
        let y = field(&[0.0, 1.0]);
        let m = LossTensors::dense(y.clone(), y.clone()).unwrap();
        let w = LossWeights { alpha: 0.0, beta: 0.0, gamma: 1.0 };
        let tl = total_loss(&m, &m, &m, &m, &w).unwrap();
        assert_eq!(tl.value, 0.0);
        assert!(total_loss(&m, &m, &m, &m, &LossWeights { alpha: -1.0, ..w }).is_err());
    }
}
