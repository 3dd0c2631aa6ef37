#pragma once

#include <Eigen/Dense>

#include <optional>

#include "hk/range_image.hpp"

namespace hk {

struct FitWindow {
  int half_width = 2;  // 2 gives the usual 5x5 window
};

/// Coefficients of the local model
///   z(u, v) = a + b*u + c*v + d*u*v + e*u^2 + f*v^2
/// where u is the column offset and v the row offset from the window center,
/// both in depth units (pixel offset times pitch).
template <typename Scalar>
struct QuadFit {
  Scalar a, b, c, d, e, f;
  Index support;        // valid pixels that entered the fit
  bool rank_deficient;  // normal matrix rank < 6; coefficients are the
                        // minimum-norm solution and unsafe for curvature
};

template <typename Scalar>
struct SurfaceDerivs {
  Scalar fx, fy, fxy, fxx, fyy;
};

/// First and second partials of the fitted model at the window center:
/// fx = b, fy = c, fxy = d, fxx = 2e, fyy = 2f.
template <typename Scalar>
SurfaceDerivs<Scalar> derivatives(const QuadFit<Scalar>& q) {
  return {q.b, q.c, q.d, Scalar(2) * q.e, Scalar(2) * q.f};
}

namespace detail {

/// Accumulates the 6x6 normal equations over the window's valid pixels and
/// solves them with a rank-revealing decomposition. Returns nullopt when the
/// center is invalid or fewer than 6 valid pixels support the fit.
template <typename Scalar>
std::optional<QuadFit<Scalar>> tryFitBiquadratic(const RangeImage<Scalar>& img,
                                                 Index row, Index col,
                                                 const FitWindow& w,
                                                 Scalar pixel_pitch) {
  using Mat6 = Eigen::Matrix<Scalar, 6, 6>;
  using Vec6 = Eigen::Matrix<Scalar, 6, 1>;

  if (!img.valid(row, col)) return std::nullopt;

  Mat6 ata = Mat6::Zero();
  Vec6 atz = Vec6::Zero();
  Index support = 0;
  const int H = w.half_width;
  for (int dr = -H; dr <= H; ++dr) {
    Index r = row + dr;
    if (r < 0 || r >= img.rows()) continue;
    for (int dc = -H; dc <= H; ++dc) {
      Index c = col + dc;
      if (c < 0 || c >= img.cols() || !img.valid(r, c)) continue;
      const Scalar u = Scalar(dc) * pixel_pitch;
      const Scalar v = Scalar(dr) * pixel_pitch;
      Vec6 phi;
      phi << Scalar(1), u, v, u * v, u * u, v * v;
      ata.template selfadjointView<Eigen::Lower>().rankUpdate(phi);
      atz += phi * img.depth(r, c);
      ++support;
    }
  }
  if (support < 6) return std::nullopt;

  Mat6 full = ata.template selfadjointView<Eigen::Lower>();
  Eigen::CompleteOrthogonalDecomposition<Mat6> cod(full);
  Vec6 coef = cod.solve(atz);
  return QuadFit<Scalar>{coef(0), coef(1), coef(2), coef(3),
                         coef(4), coef(5), support, cod.rank() < 6};
}

}  // namespace detail

/// Least-squares biquadratic fit over the valid pixels of the
/// (2*half_width+1)^2 window centered on (row, col).
template <typename Scalar>
QuadFit<Scalar> fitBiquadratic(const RangeImage<Scalar>& img, Index row,
                               Index col, const FitWindow& w = {},
                               Scalar pixel_pitch = Scalar(1)) {
  if (w.half_width < 1) raise(Errc::BadParams, "fit half_width must be >= 1");
  if (!(pixel_pitch > 0)) raise(Errc::BadParams, "pixel pitch must be > 0");
  if (!img.inBounds(row, col))
    raise(Errc::BadParams, "fit center outside image");
  if (!img.valid(row, col))
    raise(Errc::CenterInvalid, "fit center (" + std::to_string(row) + ", " +
                                   std::to_string(col) + ") is invalid");
  auto fit = detail::tryFitBiquadratic(img, row, col, w, pixel_pitch);
  if (!fit)
    raise(Errc::InsufficientSupport,
          "window at (" + std::to_string(row) + ", " + std::to_string(col) +
              ") holds fewer than 6 valid pixels");
  return *fit;
}

}  // namespace hk
