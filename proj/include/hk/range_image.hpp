#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <utility>

#include "hk/error.hpp"

namespace hk {

using Index = Eigen::Index;

template <typename Scalar>
using DepthGrid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using PixelMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using ByteGrid = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// A range image: a rectangular grid of depth samples with a per-pixel
/// validity mask. Larger depth means closer to the camera. Invalid pixels
/// (sensor holes, removed background) carry no depth and never feed
/// downstream math.
template <typename Scalar>
struct RangeImage {
  DepthGrid<Scalar> depth;  // indexed (row, col)
  PixelMask valid;

  Index rows() const { return depth.rows(); }
  Index cols() const { return depth.cols(); }
  Index validCount() const { return valid.count(); }

  bool inBounds(Index r, Index c) const {
    return r >= 0 && r < rows() && c >= 0 && c < cols();
  }

  static RangeImage constant(Index rows, Index cols, Scalar value) {
    RangeImage img;
    img.depth = DepthGrid<Scalar>::Constant(rows, cols, value);
    img.valid = PixelMask::Constant(rows, cols, true);
    return img;
  }

  /// Enforces the structural invariants: matching grid shapes, at least one
  /// pixel, and finite depth wherever the mask is set.
  void validate() const {
    if (depth.rows() != valid.rows() || depth.cols() != valid.cols())
      raise(Errc::DimensionMismatch, "depth and mask shapes differ");
    if (rows() < 1 || cols() < 1)
      raise(Errc::BadParams, "range image must have at least one pixel");
    for (Index c = 0; c < cols(); ++c)
      for (Index r = 0; r < rows(); ++r)
        if (valid(r, c) && !std::isfinite(static_cast<double>(depth(r, c))))
          raise(Errc::BadParams,
                "non-finite depth at valid pixel (" + std::to_string(r) +
                    ", " + std::to_string(c) + ")");
  }
};

using RangeImaged = RangeImage<double>;
using RangeImagef = RangeImage<float>;

/// Rectangular window given by its top-left corner and extent.
struct CropRect {
  Index row0 = 0;
  Index col0 = 0;
  Index rows = 0;
  Index cols = 0;
};

inline bool rectInside(const CropRect& rect, Index rows, Index cols) {
  return rect.row0 >= 0 && rect.col0 >= 0 && rect.rows >= 1 &&
         rect.cols >= 1 && rect.row0 + rect.rows <= rows &&
         rect.col0 + rect.cols <= cols;
}

/// Rect addressing a window of `outer` expressed in the frame cropping by
/// `outer` produced, mapped back to the original frame. Cropping twice equals
/// one crop by the composition.
inline CropRect composeCrops(const CropRect& outer, const CropRect& inner) {
  return {outer.row0 + inner.row0, outer.col0 + inner.col0, inner.rows,
          inner.cols};
}

template <typename Scalar>
RangeImage<Scalar> crop(const RangeImage<Scalar>& img, const CropRect& rect) {
  if (!rectInside(rect, img.rows(), img.cols()))
    raise(Errc::RectOutOfBounds,
          "crop rect " + std::to_string(rect.row0) + "," +
              std::to_string(rect.col0) + "," + std::to_string(rect.rows) +
              "," + std::to_string(rect.cols) + " exceeds " +
              std::to_string(img.rows()) + "x" + std::to_string(img.cols()));
  RangeImage<Scalar> out;
  out.depth = img.depth.block(rect.row0, rect.col0, rect.rows, rect.cols);
  out.valid = img.valid.block(rect.row0, rect.col0, rect.rows, rect.cols);
  return out;
}

/// Min and max depth over valid pixels.
template <typename Scalar>
std::pair<Scalar, Scalar> validDepthRange(const RangeImage<Scalar>& img) {
  bool any = false;
  Scalar lo = Scalar(0), hi = Scalar(0);
  for (Index c = 0; c < img.cols(); ++c) {
    for (Index r = 0; r < img.rows(); ++r) {
      if (!img.valid(r, c)) continue;
      Scalar z = img.depth(r, c);
      if (!any) {
        lo = hi = z;
        any = true;
      } else {
        if (z < lo) lo = z;
        if (z > hi) hi = z;
      }
    }
  }
  if (!any) raise(Errc::NoValidPixels, "range image has no valid pixels");
  return {lo, hi};
}

}  // namespace hk
