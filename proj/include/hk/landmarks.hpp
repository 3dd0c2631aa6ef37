#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "hk/curvature.hpp"
#include "hk/range_image.hpp"

namespace hk {

struct DetectionParams {
  double k_threshold = 1e-4;   // Gaussian-curvature floor for candidates
  int top_n_nose = 5;          // nose candidates kept for the intensity vote
  double min_separation = 8.0; // pixel distance between the two eye corners
};

/// Depth rescaled to 0..255 over the valid pixels (closest pixel brightest).
struct IntensityMap {
  ByteGrid intensity;
  PixelMask valid;

  Index rows() const { return intensity.rows(); }
  Index cols() const { return intensity.cols(); }
};

template <typename Scalar>
IntensityMap intensityMap(const RangeImage<Scalar>& img) {
  auto [lo, hi] = validDepthRange(img);
  IntensityMap map;
  map.intensity = ByteGrid::Zero(img.rows(), img.cols());
  map.valid = img.valid;
  const double span = static_cast<double>(hi) - static_cast<double>(lo);
  for (Index r = 0; r < img.rows(); ++r) {
    for (Index c = 0; c < img.cols(); ++c) {
      if (!img.valid(r, c)) continue;
      long v = 255;
      if (span > 0) {
        double t = (static_cast<double>(img.depth(r, c)) -
                    static_cast<double>(lo)) /
                   span;
        v = std::lround(255.0 * t);
        v = std::clamp(v, 0L, 255L);
      }
      map.intensity(r, c) = static_cast<std::uint8_t>(v);
    }
  }
  return map;
}

template <typename Scalar>
struct LandmarkPoint {
  Index row, col;
  Scalar k;  // Gaussian curvature at the pixel
};

template <typename Scalar>
struct EyeCorners {
  LandmarkPoint<Scalar> first, second;  // in descending-K order
};

template <typename Scalar>
struct NoseTip {
  Index row, col;
  Scalar k;
  int intensity;
};

struct IntensityPoint {
  Index row, col;
  int intensity;
};

/// Pixels with the requested mean-curvature sign and K above the threshold,
/// sorted by K descending; equal K resolves in row-major order. h_sign < 0
/// selects convex shapes (noses), h_sign > 0 concave ones (eye sockets).
template <typename Scalar>
std::vector<LandmarkPoint<Scalar>> collectCandidates(
    const CurvatureField<Scalar>& fld, Scalar k_threshold, int h_sign) {
  std::vector<LandmarkPoint<Scalar>> out;
  for (Index r = 0; r < fld.rows(); ++r) {
    for (Index c = 0; c < fld.cols(); ++c) {
      if (!fld.valid(r, c)) continue;
      const Scalar h = fld.H(r, c);
      if ((h_sign < 0 && !(h < 0)) || (h_sign > 0 && !(h > 0))) continue;
      if (!(fld.K(r, c) > k_threshold)) continue;
      out.push_back({r, c, fld.K(r, c)});
    }
  }
  std::sort(out.begin(), out.end(),
            [cols = fld.cols()](const LandmarkPoint<Scalar>& a,
                                const LandmarkPoint<Scalar>& b) {
              if (a.k != b.k) return a.k > b.k;
              return a.row * cols + a.col < b.row * cols + b.col;
            });
  return out;
}

inline double pixelDistance(Index r0, Index c0, Index r1, Index c1) {
  return std::hypot(static_cast<double>(r0 - r1),
                    static_cast<double>(c0 - c1));
}

/// Eye corners: the strongest concave-elliptical response (H > 0,
/// K > threshold) and the strongest one at least min_separation pixels away
/// from it.
template <typename Scalar>
EyeCorners<Scalar> detectEyeCorners(const CurvatureField<Scalar>& fld,
                                    const DetectionParams& p = {}) {
  auto cands =
      collectCandidates(fld, static_cast<Scalar>(p.k_threshold), +1);
  if (cands.empty())
    raise(Errc::NoCandidates, "no concave pixels above the K threshold");
  const auto& first = cands.front();
  for (std::size_t i = 1; i < cands.size(); ++i) {
    if (pixelDistance(first.row, first.col, cands[i].row, cands[i].col) >=
        p.min_separation)
      return {first, cands[i]};
  }
  raise(Errc::SingleCandidate,
        "all remaining candidates lie within min_separation of the first");
}

/// Nose tip: among the top_n convex-elliptical responses (H < 0,
/// K > threshold), the pixel with the highest intensity. Intensity ties keep
/// the earlier candidate, i.e. the higher K.
template <typename Scalar>
NoseTip<Scalar> detectNoseTip(const CurvatureField<Scalar>& fld,
                              const IntensityMap& ints,
                              const DetectionParams& p = {}) {
  if (ints.rows() != fld.rows() || ints.cols() != fld.cols())
    raise(Errc::DimensionMismatch, "intensity map shape differs from field");
  if (p.top_n_nose < 1) raise(Errc::BadParams, "top_n_nose must be >= 1");
  auto cands =
      collectCandidates(fld, static_cast<Scalar>(p.k_threshold), -1);
  if (cands.empty())
    raise(Errc::NoCandidates, "no convex pixels above the K threshold");
  const std::size_t n =
      std::min(cands.size(), static_cast<std::size_t>(p.top_n_nose));
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (ints.intensity(cands[i].row, cands[i].col) >
        ints.intensity(cands[best].row, cands[best].col))
      best = i;
  }
  const auto& c = cands[best];
  return {c.row, c.col, c.k, static_cast<int>(ints.intensity(c.row, c.col))};
}

/// Baseline detector: the brightest valid pixel. Ties resolve in row-major
/// order.
inline IntensityPoint detectNoseTipMaxIntensity(const IntensityMap& ints) {
  bool any = false;
  IntensityPoint best{0, 0, -1};
  for (Index r = 0; r < ints.rows(); ++r) {
    for (Index c = 0; c < ints.cols(); ++c) {
      if (!ints.valid(r, c)) continue;
      int v = ints.intensity(r, c);
      if (!any || v > best.intensity) {
        best = {r, c, v};
        any = true;
      }
    }
  }
  if (!any) raise(Errc::NoValidPixels, "intensity map has no valid pixels");
  return best;
}

/// Detection outcome for one image. Detector failures land in the error
/// slots instead of aborting the pipeline.
template <typename Scalar>
struct LandmarkResult {
  std::optional<NoseTip<Scalar>> nose;
  std::optional<EyeCorners<Scalar>> eyes;
  std::optional<Errc> nose_error;
  std::optional<Errc> eye_error;
};

}  // namespace hk
