#pragma once

#include <cstdint>
#include <vector>

#include "hk/range_image.hpp"

namespace hk {

struct SmoothingParams {
  double sigma = 1.0;  // Gaussian std in pixels
  int radius = 2;      // kernel half-width
};

namespace detail {

/// Between-class variance at a split, up to the constant 1/N^2 factor:
/// w0*w1*(mu0 - mu1)^2 == (S0*w1 - S1*w0)^2 / (w0*w1) with S the sums of bin
/// indices. Counts stay in exact integer arithmetic so two routes to the same
/// split score identically.
inline long double otsuScore(std::int64_t w0, std::int64_t s0,
                             std::int64_t w1, std::int64_t s1) {
  if (w0 == 0 || w1 == 0) return -1.0L;
  const long double a = static_cast<long double>(s0 * w1 - s1 * w0);
  return a * a / (static_cast<long double>(w0) * static_cast<long double>(w1));
}

}  // namespace detail

/// Histogram of valid depths over equal-width bins spanning [min, max].
/// The top edge closes the last bin.
template <typename Scalar>
std::vector<std::int64_t> depthHistogram(const RangeImage<Scalar>& img,
                                         int bins) {
  if (bins < 2) raise(Errc::BadParams, "histogram needs at least 2 bins");
  auto [lo, hi] = validDepthRange(img);
  if (!(hi > lo))
    raise(Errc::DegenerateHistogram, "all valid depths are equal");
  std::vector<std::int64_t> hist(bins, 0);
  const double span = static_cast<double>(hi) - static_cast<double>(lo);
  for (Index c = 0; c < img.cols(); ++c) {
    for (Index r = 0; r < img.rows(); ++r) {
      if (!img.valid(r, c)) continue;
      double t = (static_cast<double>(img.depth(r, c)) -
                  static_cast<double>(lo)) /
                 span;
      int b = static_cast<int>(t * bins);
      if (b < 0) b = 0;
      if (b >= bins) b = bins - 1;
      ++hist[b];
    }
  }
  return hist;
}

/// Split index maximizing between-class variance, scanning boundaries
/// k = 1..bins-1 (bins [0,k) against [k,bins)). Ties resolve to the smaller
/// index.
inline int otsuSplitIndex(const std::vector<std::int64_t>& hist) {
  const int bins = static_cast<int>(hist.size());
  std::int64_t total = 0, sumAll = 0;
  for (int b = 0; b < bins; ++b) {
    total += hist[b];
    sumAll += hist[b] * b;
  }
  if (total < 2) raise(Errc::DegenerateHistogram, "fewer than 2 samples");

  int best = -1;
  long double bestScore = -1.0L;
  std::int64_t w0 = 0, s0 = 0;
  for (int k = 1; k < bins; ++k) {
    w0 += hist[k - 1];
    s0 += hist[k - 1] * (k - 1);
    long double score = detail::otsuScore(w0, s0, total - w0, sumAll - s0);
    if (score > bestScore) {
      bestScore = score;
      best = k;
    }
  }
  if (best < 0) raise(Errc::DegenerateHistogram, "histogram has a single bin");
  return best;
}

/// Otsu threshold over the valid-depth histogram, returned as a depth value:
/// the lower edge of the first bin in the upper class.
template <typename Scalar>
Scalar otsuThreshold(const RangeImage<Scalar>& img, int bins = 256) {
  std::vector<std::int64_t> hist = depthHistogram(img, bins);
  int k = otsuSplitIndex(hist);
  auto [lo, hi] = validDepthRange(img);
  return static_cast<Scalar>(
      static_cast<double>(lo) +
      static_cast<double>(k) *
          (static_cast<double>(hi) - static_cast<double>(lo)) / bins);
}

/// Invalidates pixels with depth below the threshold. With depth increasing
/// toward the camera that removes the background, keeping the face.
template <typename Scalar>
RangeImage<Scalar> applyThreshold(const RangeImage<Scalar>& img, Scalar t) {
  RangeImage<Scalar> out = img;
  for (Index c = 0; c < out.cols(); ++c)
    for (Index r = 0; r < out.rows(); ++r)
      if (out.valid(r, c) && out.depth(r, c) < t) out.valid(r, c) = false;
  return out;
}

/// Gaussian smoothing restricted to the valid mask: each output is the
/// kernel-weighted mean over the valid pixels inside the window, with the
/// weights renormalized to the support actually present. Invalid pixels stay
/// invalid and contribute nothing, so holes never bleed into their
/// neighborhood.
template <typename Scalar>
RangeImage<Scalar> gaussianSmooth(const RangeImage<Scalar>& img,
                                  const SmoothingParams& p) {
  if (!(p.sigma > 0) || !std::isfinite(p.sigma))
    raise(Errc::BadParams, "smoothing sigma must be positive");
  if (p.radius < 1) raise(Errc::BadParams, "smoothing radius must be >= 1");

  const int R = p.radius;
  const int W = 2 * R + 1;
  std::vector<Scalar> kernel(W * W);
  const double inv2s2 = 1.0 / (2.0 * p.sigma * p.sigma);
  for (int dr = -R; dr <= R; ++dr)
    for (int dc = -R; dc <= R; ++dc)
      kernel[(dr + R) * W + (dc + R)] =
          static_cast<Scalar>(std::exp(-(dr * dr + dc * dc) * inv2s2));

  RangeImage<Scalar> out;
  out.depth = DepthGrid<Scalar>::Zero(img.rows(), img.cols());
  out.valid = img.valid;
  for (Index r = 0; r < img.rows(); ++r) {
    for (Index c = 0; c < img.cols(); ++c) {
      if (!img.valid(r, c)) continue;
      Scalar num = Scalar(0), den = Scalar(0);
      for (int dr = -R; dr <= R; ++dr) {
        Index rr = r + dr;
        if (rr < 0 || rr >= img.rows()) continue;
        for (int dc = -R; dc <= R; ++dc) {
          Index cc = c + dc;
          if (cc < 0 || cc >= img.cols() || !img.valid(rr, cc)) continue;
          Scalar w = kernel[(dr + R) * W + (dc + R)];
          num += w * img.depth(rr, cc);
          den += w;
        }
      }
      out.depth(r, c) = num / den;  // center is valid, so den > 0
    }
  }
  return out;
}

}  // namespace hk
