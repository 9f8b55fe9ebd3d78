use super::ridge::RegressorModel;
use crate::error::{Error, Result};
use crate::imgproc::{crop, resize, ImageBuffer, Rect, ResizeMethod};

fn five_rects(w: usize, h: usize, size: usize) -> [Rect; 5] {
    [
        Rect::new(0, 0, size, size),
        Rect::new(w - size, 0, size, size),
        Rect::new(0, h - size, size, size),
        Rect::new(w - size, h - size, size, size),
        Rect::new((w - size) / 2, (h - size) / 2, size, size),
    ]
}

/// Features of the four corner and centre crops, each the concatenation of the
/// full-scale crop's features and the half-scale image's crop at the same
/// position.
pub fn five_crop_features<F>(img: &ImageBuffer, size: usize, features: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&ImageBuffer) -> Result<Vec<f64>>,
{
    let (w, h) = img.dims();
    if size == 0 || w / 2 < size || h / 2 < size {
        return Err(Error::invalid(format!("{w}x{h} image is too small for {size}px crops at half scale")));
    }
    let half = resize(img, w / 2, h / 2, ResizeMethod::Bilinear)?;
    let full_rects = five_rects(w, h, size);
    let half_rects = five_rects(w / 2, h / 2, size);
    full_rects
        .iter()
        .zip(&half_rects)
        .map(|(&fr, &hr)| {
            let mut v = features(&crop(img, fr)?)?;
            v.extend(features(&crop(&half, hr)?)?);
            Ok(v)
        })
        .collect()
}

/// Mean prediction over the five crop positions.
pub fn five_crop_score<F>(img: &ImageBuffer, model: &RegressorModel, size: usize, features: F) -> Result<f64>
where
    F: Fn(&ImageBuffer) -> Result<Vec<f64>>,
{
    let rows = five_crop_features(img, size, features)?;
    if rows[0].len() != model.weights.len() {
        return Err(Error::invalid(format!(
            "model expects {} features, crops give {}",
            model.weights.len(),
            rows[0].len()
        )));
    }
    Ok(rows.iter().map(|r| model.predict(r)).sum::<f64>() / rows.len() as f64)
}

/// `|h_ref - h_dist|` element-wise.
pub fn fr_features(h_ref: &[f64], h_dist: &[f64]) -> Result<Vec<f64>> {
    if h_ref.len() != h_dist.len() {
        return Err(Error::invalid(format!("embedding dims differ: {} vs {}", h_ref.len(), h_dist.len())));
    }
    Ok(h_ref.iter().zip(h_dist).map(|(a, b)| (a - b).abs()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contrastive::handcrafted_features;
    use crate::corpus::procedural_image;

    fn model(dim: usize) -> RegressorModel {
        RegressorModel {
            weights: (0..dim).map(|k| ((k * 7) % 5) as f64 * 0.1 - 0.2).collect(),
            intercept: 0.3,
            alpha: 0.1,
        }
    }

    #[test]
    fn constant_image_equals_single_crop() {
        let img = ImageBuffer::filled(100, 90, [0.4, 0.5, 0.6]).unwrap();
        let m = model(60);
        let score = five_crop_score(&img, &m, 32, handcrafted_features).unwrap();
        let rows = five_crop_features(&img, 32, handcrafted_features).unwrap();
        assert!((score - m.predict(&rows[0])).abs() < 1e-12);
    }

    #[test]
    fn zero_weights_give_intercept() {
        let img = procedural_image(96, 96, 1);
        let m = RegressorModel { weights: vec![0.0; 60], intercept: 1.25, alpha: 0.1 };
        assert_eq!(five_crop_score(&img, &m, 32, handcrafted_features).unwrap(), 1.25);
    }

    #[test]
    fn matches_literal_loop() {
        let img = procedural_image(110, 84, 4);
        let m = model(60);
        let size = 40;
        let half = resize(&img, 55, 42, ResizeMethod::Bilinear).unwrap();
        let mut total = 0.0;
        for (x, y, hx, hy) in [(0, 0, 0, 0), (70, 0, 15, 0), (0, 44, 0, 2), (70, 44, 15, 2), (35, 22, 7, 1)] {
            let mut f = handcrafted_features(&crop(&img, Rect::new(x, y, size, size)).unwrap()).unwrap();
            f.extend(handcrafted_features(&crop(&half, Rect::new(hx, hy, size, size)).unwrap()).unwrap());
            total += m.predict(&f);
        }
        let got = five_crop_score(&img, &m, size, handcrafted_features).unwrap();
        assert!((got - total / 5.0).abs() < 1e-10);
    }

    #[test]
    fn undersized_rejected() {
        let img = procedural_image(60, 60, 0);
        assert!(five_crop_features(&img, 32, handcrafted_features).is_err());
    }

    #[test]
    fn fr_difference() {
        let a = [1.0, -2.0, 0.5];
        let b = [0.5, 1.0, 0.5];
        assert_eq!(fr_features(&a, &a).unwrap(), vec![0.0; 3]);
        assert_eq!(fr_features(&a, &b).unwrap(), fr_features(&b, &a).unwrap());
        assert_eq!(fr_features(&a, &b).unwrap(), vec![0.5, 3.0, 0.0]);
        assert!(fr_features(&a, &b[..2]).is_err());
    }
}
