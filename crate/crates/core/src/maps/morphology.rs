//! Binary dilation and erosion with a square structuring element of side
//! `2r + 1`. Pixels outside the image count as 0 for both operations.

use super::StrengthMap;
use crate::{Error, Result};

pub fn dilate(e: &StrengthMap, radius: usize) -> Result<StrengthMap> {
    check(e, radius)?;
    Ok(dilate_with_border(e, radius, false))
}

pub fn erode(e: &StrengthMap, radius: usize) -> Result<StrengthMap> {
    check(e, radius)?;
    Ok(erode_with_border(e, radius, false))
}

fn check(e: &StrengthMap, radius: usize) -> Result<()> {
    if radius < 1 {
        return Err(Error::InvalidParameter(
            "structuring element radius must be at least 1".into(),
        ));
    }
    e.check_binary()
}

/// 1 where any pixel of the window is 1; `outside` is the value assumed
/// beyond the border.
pub(crate) fn dilate_with_border(e: &StrengthMap, r: usize, outside: bool) -> StrengthMap {
    window_op(e, r, |any_one, _| any_one, outside)
}

/// 1 where every pixel of the window is 1.
pub(crate) fn erode_with_border(e: &StrengthMap, r: usize, outside: bool) -> StrengthMap {
    window_op(e, r, |_, all_one| all_one, outside)
}

fn window_op(
    e: &StrengthMap,
    r: usize,
    pick: impl Fn(bool, bool) -> bool,
    outside: bool,
) -> StrengthMap {
    let (w, h) = (e.width(), e.height());
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let clipped = x < r || y < r || x + r >= w || y + r >= h;
            let (mut any_one, mut all_one) = (clipped && outside, !clipped || outside);
            for yy in y.saturating_sub(r)..(y + r + 1).min(h) {
                for xx in x.saturating_sub(r)..(x + r + 1).min(w) {
                    if e.get(xx, yy) == 1.0 {
                        any_one = true;
                    } else {
                        all_one = false;
                    }
                }
            }
            out.push(if pick(any_one, all_one) { 1.0 } else { 0.0 });
        }
    }
    StrengthMap::from_raw(w, h, out)
}
