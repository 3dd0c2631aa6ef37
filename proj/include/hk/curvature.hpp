#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <queue>
#include <string>
#include <vector>

#include "hk/quadfit.hpp"
#include "hk/range_image.hpp"

namespace hk {

/// Mean and Gaussian curvature of the graph z = f(x, y):
///   H = ((1+fy^2) fxx - 2 fx fy fxy + (1+fx^2) fyy) / (2 (1+fx^2+fy^2)^{3/2})
///   K = (fxx fyy - fxy^2) / (1+fx^2+fy^2)^2
/// With depth growing toward the camera, surfaces bulging at the camera
/// (noses) get H < 0 and pits (eye sockets) get H > 0, while K > 0 marks the
/// elliptical shapes among both.
template <typename Scalar>
struct HKPair {
  Scalar H, K;
};

template <typename Scalar>
HKPair<Scalar> curvatureFromDerivatives(Scalar fx, Scalar fy, Scalar fxy,
                                        Scalar fxx, Scalar fyy) {
  const Scalar g = Scalar(1) + fx * fx + fy * fy;
  const Scalar num =
      (Scalar(1) + fy * fy) * fxx - Scalar(2) * fx * fy * fxy +
      (Scalar(1) + fx * fx) * fyy;
  const Scalar H = num / (Scalar(2) * g * std::sqrt(g));
  const Scalar K = (fxx * fyy - fxy * fxy) / (g * g);
  return {H, K};
}

template <typename Scalar>
HKPair<Scalar> curvatureFromDerivatives(const SurfaceDerivs<Scalar>& d) {
  return curvatureFromDerivatives(d.fx, d.fy, d.fxy, d.fxx, d.fyy);
}

/// Per-pixel curvature estimates. A pixel is valid when the image pixel was
/// valid, its fit window held at least 6 valid pixels, and the fit had full
/// rank.
template <typename Scalar>
struct CurvatureField {
  DepthGrid<Scalar> H;
  DepthGrid<Scalar> K;
  PixelMask valid;

  Index rows() const { return H.rows(); }
  Index cols() const { return H.cols(); }
};

using CurvatureFieldd = CurvatureField<double>;

template <typename Scalar>
CurvatureField<Scalar> computeCurvatureField(const RangeImage<Scalar>& img,
                                             const FitWindow& w = {},
                                             Scalar pixel_pitch = Scalar(1)) {
  if (w.half_width < 1) raise(Errc::BadParams, "fit half_width must be >= 1");
  if (!(pixel_pitch > 0)) raise(Errc::BadParams, "pixel pitch must be > 0");
  CurvatureField<Scalar> fld;
  fld.H = DepthGrid<Scalar>::Zero(img.rows(), img.cols());
  fld.K = DepthGrid<Scalar>::Zero(img.rows(), img.cols());
  fld.valid = PixelMask::Constant(img.rows(), img.cols(), false);
  for (Index r = 0; r < img.rows(); ++r) {
    for (Index c = 0; c < img.cols(); ++c) {
      auto fit = detail::tryFitBiquadratic(img, r, c, w, pixel_pitch);
      if (!fit || fit->rank_deficient) continue;
      auto hk = curvatureFromDerivatives(derivatives(*fit));
      fld.H(r, c) = hk.H;
      fld.K(r, c) = hk.K;
      fld.valid(r, c) = true;
    }
  }
  return fld;
}

/// Surface classes from the signs of (H, K), with signs flattened to zero
/// inside the (eps_h, eps_k) bands. The (H = 0, K < 0) cell cannot arise from
/// a real surface (H^2 >= K forces K <= 0... with H = 0, K <= 0 means K = 0),
/// so it is kept as an explicit diagnostic class.
enum class HKClass : std::uint8_t {
  EllipticalConvex = 0,   // H < 0, K > 0  (peak toward camera)
  CylindricalConvex = 1,  // H < 0, K = 0  (ridge)
  HyperbolicConvex = 2,   // H < 0, K < 0  (saddle ridge)
  HyperbolicSymmetric = 3,  // H = 0, K > 0
  Planar = 4,             // H = 0, K = 0
  EllipticalConcave = 5,  // H > 0, K > 0  (pit)
  CylindricalConcave = 6, // H > 0, K = 0  (valley)
  HyperbolicConcave = 7,  // H > 0, K < 0  (saddle valley)
  Impossible = 8,         // H = 0, K < 0
  Unclassified = 9,       // invalid pixel, no curvature available
};

constexpr int kHKClassCount = 10;

inline const char* hkClassName(HKClass c) {
  switch (c) {
    case HKClass::EllipticalConvex: return "elliptical_convex";
    case HKClass::CylindricalConvex: return "cylindrical_convex";
    case HKClass::HyperbolicConvex: return "hyperbolic_convex";
    case HKClass::HyperbolicSymmetric: return "hyperbolic_symmetric";
    case HKClass::Planar: return "planar";
    case HKClass::EllipticalConcave: return "elliptical_concave";
    case HKClass::CylindricalConcave: return "cylindrical_concave";
    case HKClass::HyperbolicConcave: return "hyperbolic_concave";
    case HKClass::Impossible: return "impossible";
    case HKClass::Unclassified: return "unclassified";
  }
  return "unknown";
}

struct ClassifyParams {
  double eps_h = 1e-6;
  double eps_k = 1e-6;
};

template <typename Scalar>
HKClass classifyPoint(Scalar H, Scalar K, const ClassifyParams& p = {}) {
  const int hs = std::abs(double(H)) <= p.eps_h ? 0 : (H < 0 ? -1 : 1);
  const int ks = std::abs(double(K)) <= p.eps_k ? 0 : (K < 0 ? -1 : 1);
  if (hs < 0) {
    if (ks > 0) return HKClass::EllipticalConvex;
    if (ks == 0) return HKClass::CylindricalConvex;
    return HKClass::HyperbolicConvex;
  }
  if (hs == 0) {
    if (ks > 0) return HKClass::HyperbolicSymmetric;
    if (ks == 0) return HKClass::Planar;
    return HKClass::Impossible;
  }
  if (ks > 0) return HKClass::EllipticalConcave;
  if (ks == 0) return HKClass::CylindricalConcave;
  return HKClass::HyperbolicConcave;
}

/// Class labels stored as uint8_t (the HKClass values).
using HKClassMap = ByteGrid;

inline HKClass classAt(const HKClassMap& m, Index r, Index c) {
  return static_cast<HKClass>(m(r, c));
}

struct ClassifyResult {
  HKClassMap classes;
  std::array<Index, kHKClassCount> counts{};  // per HKClass, Impossible kept
                                              // separate for diagnostics
};

template <typename Scalar>
ClassifyResult classify(const CurvatureField<Scalar>& fld,
                        const ClassifyParams& p = {}) {
  if (!(p.eps_h >= 0) || !(p.eps_k >= 0))
    raise(Errc::BadParams, "classification bands must be non-negative");
  ClassifyResult res;
  res.classes = HKClassMap::Constant(
      fld.rows(), fld.cols(), static_cast<std::uint8_t>(HKClass::Unclassified));
  for (Index r = 0; r < fld.rows(); ++r) {
    for (Index c = 0; c < fld.cols(); ++c) {
      HKClass cls = HKClass::Unclassified;
      if (fld.valid(r, c)) cls = classifyPoint(fld.H(r, c), fld.K(r, c), p);
      res.classes(r, c) = static_cast<std::uint8_t>(cls);
      ++res.counts[static_cast<int>(cls)];
    }
  }
  return res;
}

/// A 4-connected component of equal class labels.
template <typename Scalar>
struct Region {
  HKClass cls = HKClass::Unclassified;
  std::vector<std::array<Index, 2>> pixels;  // row-major sorted
  Scalar mean_h = Scalar(0);
  Scalar mean_k = Scalar(0);
};

/// Connected components over the class map (4-neighborhood, Unclassified
/// pixels excluded), ordered by size descending, then by first pixel in
/// row-major order.
template <typename Scalar>
std::vector<Region<Scalar>> segmentRegions(const CurvatureField<Scalar>& fld,
                                           const HKClassMap& classes) {
  if (classes.rows() != fld.rows() || classes.cols() != fld.cols())
    raise(Errc::DimensionMismatch, "class map shape differs from field");
  const auto unclassified = static_cast<std::uint8_t>(HKClass::Unclassified);
  PixelMask seen = PixelMask::Constant(fld.rows(), fld.cols(), false);
  std::vector<Region<Scalar>> regions;
  for (Index r0 = 0; r0 < fld.rows(); ++r0) {
    for (Index c0 = 0; c0 < fld.cols(); ++c0) {
      if (seen(r0, c0) || classes(r0, c0) == unclassified) continue;
      const std::uint8_t label = classes(r0, c0);
      Region<Scalar> reg;
      reg.cls = static_cast<HKClass>(label);
      double sum_h = 0, sum_k = 0;
      std::queue<std::array<Index, 2>> frontier;
      frontier.push({r0, c0});
      seen(r0, c0) = true;
      while (!frontier.empty()) {
        auto [r, c] = frontier.front();
        frontier.pop();
        reg.pixels.push_back({r, c});
        sum_h += static_cast<double>(fld.H(r, c));
        sum_k += static_cast<double>(fld.K(r, c));
        const Index nr[4] = {r - 1, r + 1, r, r};
        const Index nc[4] = {c, c, c - 1, c + 1};
        for (int i = 0; i < 4; ++i) {
          if (nr[i] < 0 || nr[i] >= fld.rows() || nc[i] < 0 ||
              nc[i] >= fld.cols())
            continue;
          if (seen(nr[i], nc[i]) || classes(nr[i], nc[i]) != label) continue;
          seen(nr[i], nc[i]) = true;
          frontier.push({nr[i], nc[i]});
        }
      }
      std::sort(reg.pixels.begin(), reg.pixels.end());
      reg.mean_h = static_cast<Scalar>(sum_h / reg.pixels.size());
      reg.mean_k = static_cast<Scalar>(sum_k / reg.pixels.size());
      regions.push_back(std::move(reg));
    }
  }
  std::sort(regions.begin(), regions.end(),
            [](const Region<Scalar>& a, const Region<Scalar>& b) {
              if (a.pixels.size() != b.pixels.size())
                return a.pixels.size() > b.pixels.size();
              return a.pixels.front() < b.pixels.front();
            });
  return regions;
}

/// Stable grayscale palette for rendered class maps. Hyperbolic shapes are
/// darkest; Impossible shares their value since it only ever appears on the
/// K < 0 side of the band. 0 is reserved for pixels without curvature.
inline std::uint8_t paletteValue(HKClass c) {
  switch (c) {
    case HKClass::Unclassified: return 0;
    case HKClass::HyperbolicConvex:
    case HKClass::HyperbolicSymmetric:
    case HKClass::HyperbolicConcave:
    case HKClass::Impossible: return 32;
    case HKClass::Planar: return 64;
    case HKClass::CylindricalConvex: return 96;
    case HKClass::EllipticalConvex: return 128;
    case HKClass::CylindricalConcave: return 192;
    case HKClass::EllipticalConcave: return 224;
  }
  return 0;
}

inline ByteGrid renderClassMap(const HKClassMap& classes) {
  ByteGrid img(classes.rows(), classes.cols());
  for (Index r = 0; r < classes.rows(); ++r)
    for (Index c = 0; c < classes.cols(); ++c)
      img(r, c) = paletteValue(classAt(classes, r, c));
  return img;
}

}  // namespace hk
