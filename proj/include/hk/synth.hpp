#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "hk/random.hpp"
#include "hk/range_image.hpp"

namespace hk {

enum class SurfaceKind { Plane, Hemisphere, Cylinder, Saddle, Paraboloid };

inline const char* surfaceKindName(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::Plane: return "plane";
    case SurfaceKind::Hemisphere: return "hemisphere";
    case SurfaceKind::Cylinder: return "cylinder";
    case SurfaceKind::Saddle: return "saddle";
    case SurfaceKind::Paraboloid: return "paraboloid";
  }
  return "unknown";
}

/// Analytic test surfaces on an n x n grid, depth growing toward the camera,
/// sitting on a base offset of 10 so every valid depth stays positive (and
/// thus PGM-quantizable):
///   plane       z = base                          (H = 0, K = 0)
///   hemisphere  z = base + sqrt(R^2 - rho^2)      (H = -1/R, K = 1/R^2)
///   cylinder    z = base + sqrt(R^2 - u^2)        (H = -1/(2R), K = 0), axis
///               along the center column
///   saddle      z = base + (u^2 - v^2)/(2R)       (H = 0, K = -1/R^2 at
///               center)
///   paraboloid  z = base + R - (u^2 + v^2)/(2R)   (H = -1/R, K = 1/R^2 at
///               apex, osculating the hemisphere there)
/// u is the column offset and v the row offset from the grid center.
/// Hemisphere pixels outside the disc and cylinder pixels beyond |u| < R are
/// invalid.
template <typename Scalar>
RangeImage<Scalar> makeSurface(SurfaceKind kind, Index n, Scalar radius) {
  if (n < 16) raise(Errc::BadParams, "surface grid must be at least 16x16");
  if (!(radius > 0)) raise(Errc::BadParams, "surface radius must be positive");
  const Scalar base = Scalar(10);
  const Scalar cx = Scalar(n - 1) / 2;
  const Scalar cy = Scalar(n - 1) / 2;
  RangeImage<Scalar> img;
  img.depth = DepthGrid<Scalar>::Zero(n, n);
  img.valid = PixelMask::Constant(n, n, false);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) {
      const Scalar u = Scalar(c) - cx;
      const Scalar v = Scalar(r) - cy;
      switch (kind) {
        case SurfaceKind::Plane:
          img.depth(r, c) = base;
          img.valid(r, c) = true;
          break;
        case SurfaceKind::Hemisphere: {
          const Scalar q = radius * radius - u * u - v * v;
          if (q > 0) {
            img.depth(r, c) = base + std::sqrt(q);
            img.valid(r, c) = true;
          }
          break;
        }
        case SurfaceKind::Cylinder: {
          const Scalar q = radius * radius - u * u;
          if (q > 0) {
            img.depth(r, c) = base + std::sqrt(q);
            img.valid(r, c) = true;
          }
          break;
        }
        case SurfaceKind::Saddle:
          img.depth(r, c) = base + (u * u - v * v) / (2 * radius);
          img.valid(r, c) = true;
          break;
        case SurfaceKind::Paraboloid:
          img.depth(r, c) = base + radius - (u * u + v * v) / (2 * radius);
          img.valid(r, c) = true;
          break;
      }
    }
  }
  return img;
}

/// One rotationally symmetric Gaussian relief feature.
template <typename Scalar>
struct GaussianBump {
  Scalar row, col;    // center, may be subpixel
  Scalar amplitude;   // positive = toward the camera
  Scalar width;       // Gaussian sigma in pixels
};

/// Face phantom: a spherical head dome clipped to a circular silhouette,
/// with a nose bump and two eye-socket pits. The curved base matters: under
/// yaw the cheek eventually out-depths the nose exactly the way a real head
/// defeats the max-intensity baseline.
template <typename Scalar>
struct PhantomSpec {
  Index n = 128;
  Scalar base_depth = Scalar(10);
  Scalar head_radius = Scalar(70);
  Scalar silhouette_radius = Scalar(55);
  GaussianBump<Scalar> nose{Scalar(64), Scalar(64), Scalar(12), Scalar(6)};
  GaussianBump<Scalar> left_eye{Scalar(44), Scalar(44), Scalar(-4.0),
                                Scalar(3.5)};
  GaussianBump<Scalar> right_eye{Scalar(44), Scalar(84), Scalar(-4.3),
                                 Scalar(3.6)};
};

using PhantomSpecd = PhantomSpec<double>;

/// A landmark position with its depth, so the point can ride through the
/// same rigid transform as the image.
struct TruthPoint {
  double row, col, depth;
};

struct LandmarkTruth {
  TruthPoint nose;
  std::array<TruthPoint, 2> eyes;
};

template <typename Scalar>
struct Phantom {
  RangeImage<Scalar> image;
  LandmarkTruth truth;
};

template <typename Scalar>
Phantom<Scalar> makePhantom(const PhantomSpec<Scalar>& spec) {
  const std::array<const GaussianBump<Scalar>*, 3> bumps = {
      &spec.nose, &spec.left_eye, &spec.right_eye};

  if (spec.n < 32) raise(Errc::BadParams, "phantom grid must be at least 32");
  if (!(spec.head_radius > 0) || !(spec.silhouette_radius > 0))
    raise(Errc::BadParams, "phantom radii must be positive");
  if (spec.silhouette_radius > Scalar(0.95) * spec.head_radius)
    raise(Errc::BadParams, "silhouette must stay well inside the head sphere");
  if (!(spec.nose.amplitude > 0))
    raise(Errc::BadParams, "nose amplitude must be positive");
  if (!(spec.left_eye.amplitude < 0) || !(spec.right_eye.amplitude < 0))
    raise(Errc::BadParams, "eye amplitudes must be negative");
  const Scalar cx = Scalar(spec.n - 1) / 2;
  const Scalar cy = Scalar(spec.n - 1) / 2;
  for (const auto* b : bumps) {
    if (!(b->width >= 1)) raise(Errc::BadParams, "bump width must be >= 1");
    const Scalar rho = std::hypot(b->row - cy, b->col - cx);
    if (rho + 3 * b->width > spec.silhouette_radius)
      raise(Errc::BadParams, "bump does not fit inside the silhouette");
  }
  for (std::size_t i = 0; i < bumps.size(); ++i) {
    for (std::size_t j = i + 1; j < bumps.size(); ++j) {
      const Scalar d = std::hypot(bumps[i]->row - bumps[j]->row,
                                  bumps[i]->col - bumps[j]->col);
      const Scalar need = std::max(
          Scalar(8), Scalar(1.5) * (bumps[i]->width + bumps[j]->width));
      if (d < need)
        raise(Errc::BadParams, "phantom features overlap");
    }
  }

  Phantom<Scalar> ph;
  ph.image.depth = DepthGrid<Scalar>::Zero(spec.n, spec.n);
  ph.image.valid = PixelMask::Constant(spec.n, spec.n, false);
  Index best_r = -1, best_c = -1;
  Scalar best_z = Scalar(0);
  for (Index r = 0; r < spec.n; ++r) {
    for (Index c = 0; c < spec.n; ++c) {
      const Scalar dr = Scalar(r) - cy;
      const Scalar dc = Scalar(c) - cx;
      const Scalar rho2 = dr * dr + dc * dc;
      if (rho2 >= spec.silhouette_radius * spec.silhouette_radius) continue;
      Scalar z = spec.base_depth +
                 std::sqrt(spec.head_radius * spec.head_radius - rho2);
      for (const auto* b : bumps) {
        const Scalar br = Scalar(r) - b->row;
        const Scalar bc = Scalar(c) - b->col;
        z += b->amplitude *
             std::exp(-(br * br + bc * bc) / (2 * b->width * b->width));
      }
      ph.image.depth(r, c) = z;
      ph.image.valid(r, c) = true;
      if (best_r < 0 || z > best_z) {
        best_z = z;
        best_r = r;
        best_c = c;
      }
    }
  }

  // Ground truth: the nose is the global depth maximum, the eyes sit at the
  // pit centers.
  ph.truth.nose = {static_cast<double>(best_r), static_cast<double>(best_c),
                   static_cast<double>(best_z)};
  for (int i = 0; i < 2; ++i) {
    const auto& b = i == 0 ? spec.left_eye : spec.right_eye;
    Index er = static_cast<Index>(std::llround(static_cast<double>(b.row)));
    Index ec = static_cast<Index>(std::llround(static_cast<double>(b.col)));
    if (!ph.image.inBounds(er, ec) || !ph.image.valid(er, ec))
      raise(Errc::BadParams, "eye center falls outside the silhouette");
    ph.truth.eyes[i] = {static_cast<double>(er), static_cast<double>(ec),
                        static_cast<double>(ph.image.depth(er, ec))};
  }
  return ph;
}

enum class Axis { X, Y, Z };

inline const char* axisName(Axis a) {
  switch (a) {
    case Axis::X: return "X";
    case Axis::Y: return "Y";
    case Axis::Z: return "Z";
  }
  return "?";
}

/// Rigid head pose: a right-handed rotation about one camera axis through
/// the image pivot. X tilts the head up/down, Y turns it left/right, Z rolls
/// in the image plane.
struct PoseSpec {
  Axis axis = Axis::Y;
  double angle_deg = 0;
};

/// Rotation about `pose.axis` through `pivot`, in (x=col, y=row, z=depth)
/// coordinates.
struct PoseTransform {
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  Eigen::Vector3d pivot = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(double col, double row, double z) const {
    Eigen::Vector3d p(col, row, z);
    return rot * (p - pivot) + pivot;
  }
};

inline bool isRightAngleTurn(double angle_deg) {
  const double turns = angle_deg / 90.0;
  return std::abs(turns - std::round(turns)) <= 1e-12;
}

/// Resampling rotations are only trusted inside the tested +-60 degree
/// envelope. In-plane right-angle turns lose nothing, so those pass at any
/// magnitude.
inline void validatePose(const PoseSpec& pose) {
  if (!std::isfinite(pose.angle_deg))
    raise(Errc::BadParams, "pose angle must be finite");
  if (std::abs(pose.angle_deg) > 60.0 &&
      !(pose.axis == Axis::Z && isRightAngleTurn(pose.angle_deg)))
    raise(Errc::BadParams, "pose angle must lie within [-60, 60] degrees");
}

/// Pivot: image center in x/y, mean valid depth in z.
template <typename Scalar>
Eigen::Vector3d defaultPivot(const RangeImage<Scalar>& img) {
  double sum = 0;
  Index count = 0;
  for (Index c = 0; c < img.cols(); ++c) {
    for (Index r = 0; r < img.rows(); ++r) {
      if (!img.valid(r, c)) continue;
      sum += static_cast<double>(img.depth(r, c));
      ++count;
    }
  }
  if (count == 0) raise(Errc::NoValidPixels, "cannot rotate an empty image");
  return {(img.cols() - 1) / 2.0, (img.rows() - 1) / 2.0, sum / count};
}

inline Eigen::Matrix3d axisRotation(Axis axis, double angle_deg) {
  const double t = angle_deg * 3.14159265358979323846 / 180.0;
  const double cs = std::cos(t), sn = std::sin(t);
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  switch (axis) {
    case Axis::X:  // x fixed
      m(1, 1) = cs; m(1, 2) = -sn;
      m(2, 1) = sn; m(2, 2) = cs;
      break;
    case Axis::Y:  // y fixed
      m(0, 0) = cs; m(0, 2) = sn;
      m(2, 0) = -sn; m(2, 2) = cs;
      break;
    case Axis::Z:  // z fixed
      m(0, 0) = cs; m(0, 1) = -sn;
      m(1, 0) = sn; m(1, 1) = cs;
      break;
  }
  return m;
}

template <typename Scalar>
PoseTransform makePoseTransform(const RangeImage<Scalar>& img,
                                const PoseSpec& pose,
                                std::optional<Eigen::Vector3d> pivot = {}) {
  validatePose(pose);
  PoseTransform xf;
  xf.rot = axisRotation(pose.axis, pose.angle_deg);
  xf.pivot = pivot ? *pivot : defaultPivot(img);
  return xf;
}

namespace detail {

/// Exact in-plane right-angle turn: a pure index permutation, depths copied
/// bit for bit. Applicable when the mapped centers land on integer pixels.
template <typename Scalar>
std::optional<RangeImage<Scalar>> rotateRightAngleZ(
    const RangeImage<Scalar>& img, double angle_deg) {
  double turns = angle_deg / 90.0;
  if (std::abs(turns - std::round(turns)) > 1e-12) return std::nullopt;
  int quarter = static_cast<int>(std::llround(turns)) % 4;
  if (quarter < 0) quarter += 4;
  if (quarter == 0) return img;
  if (quarter != 2 && (img.rows() + img.cols()) % 2 != 0) return std::nullopt;

  const Index rows = img.rows(), cols = img.cols();
  const Index cx2 = cols - 1, cy2 = rows - 1;  // twice the center
  RangeImage<Scalar> out;
  out.depth = DepthGrid<Scalar>::Zero(rows, cols);
  out.valid = PixelMask::Constant(rows, cols, false);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      if (!img.valid(r, c)) continue;
      Index rr, cc;
      if (quarter == 1) {  // +90
        rr = (cy2 - cx2) / 2 + c;
        cc = (cx2 + cy2) / 2 - r;
      } else if (quarter == 2) {  // 180
        rr = cy2 - r;
        cc = cx2 - c;
      } else {  // -90
        rr = (cy2 + cx2) / 2 - c;
        cc = (cx2 - cy2) / 2 + r;
      }
      if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
      out.depth(rr, cc) = img.depth(r, c);
      out.valid(rr, cc) = true;
    }
  }
  return out;
}

}  // namespace detail

/// Rotates the surface rigidly and resamples it on the original grid under
/// orthographic projection. Each valid sample splats onto its nearest
/// destination cell with a tangent-plane correction toward the cell center;
/// where several samples land on one cell the largest depth (the visible
/// surface) wins. Holes are left invalid, never filled.
template <typename Scalar>
RangeImage<Scalar> rotateAndRasterize(
    const RangeImage<Scalar>& img, const PoseSpec& pose,
    std::optional<Eigen::Vector3d> pivot = {}) {
  validatePose(pose);
  if (pose.angle_deg == 0) return img;
  if (pose.axis == Axis::Z && !pivot) {
    if (auto exact = detail::rotateRightAngleZ(img, pose.angle_deg))
      return *exact;
  }
  const PoseTransform xf = makePoseTransform(img, pose, pivot);

  const Index rows = img.rows(), cols = img.cols();
  // Per-pixel depth gradient, central differences across valid neighbors.
  DepthGrid<double> gx = DepthGrid<double>::Zero(rows, cols);
  DepthGrid<double> gy = DepthGrid<double>::Zero(rows, cols);
  auto sampleGrad = [&](Index r, Index c, bool along_cols) {
    Index r0 = r, c0 = c, r1 = r, c1 = c;
    (along_cols ? c0 : r0) -= 1;
    (along_cols ? c1 : r1) += 1;
    bool ok0 = img.inBounds(r0, c0) && img.valid(r0, c0);
    bool ok1 = img.inBounds(r1, c1) && img.valid(r1, c1);
    if (ok0 && ok1)
      return (static_cast<double>(img.depth(r1, c1)) - img.depth(r0, c0)) / 2;
    if (ok1) return static_cast<double>(img.depth(r1, c1)) - img.depth(r, c);
    if (ok0) return static_cast<double>(img.depth(r, c)) - img.depth(r0, c0);
    return 0.0;
  };
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      if (!img.valid(r, c)) continue;
      gx(r, c) = sampleGrad(r, c, true);
      gy(r, c) = sampleGrad(r, c, false);
    }
  }

  constexpr double kMinNz = 0.2;     // grazing surfels splat uncorrected
  constexpr double kMaxSlope = 2.5;  // clamp for near-grazing corrections
  constexpr double kFootprint = 0.75;  // cell-center reach of one surfel
  constexpr double kOcclusion = 0.75;  // depth gap that separates sheets
  DepthGrid<double> zbuf = DepthGrid<double>::Constant(
      rows, cols, -std::numeric_limits<double>::infinity());
  DepthGrid<double> dbuf = DepthGrid<double>::Constant(
      rows, cols, std::numeric_limits<double>::infinity());
  // Candidates within kOcclusion of each other are reads of the same surface
  // sheet: the surfel nearest the cell center gives the best estimate there.
  // A clearly larger depth is a nearer sheet and occludes.
  auto deposit = [&](Index R, Index C, double z, double d2) {
    if (R < 0 || R >= rows || C < 0 || C >= cols) return;
    if (z > zbuf(R, C) + kOcclusion ||
        (z > zbuf(R, C) - kOcclusion && d2 < dbuf(R, C))) {
      zbuf(R, C) = z;
      dbuf(R, C) = d2;
    }
  };
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      if (!img.valid(r, c)) continue;
      Eigen::Vector3d p = xf.apply(static_cast<double>(c),
                                   static_cast<double>(r),
                                   static_cast<double>(img.depth(r, c)));
      Eigen::Vector3d n = xf.rot * Eigen::Vector3d(-gx(r, c), -gy(r, c), 1.0);
      if (std::abs(n.z()) < kMinNz) {
        // No usable tangent: snap to the nearest cell only.
        const Index R = static_cast<Index>(std::llround(p.y()));
        const Index C = static_cast<Index>(std::llround(p.x()));
        const double dx = C - p.x(), dy = R - p.y();
        deposit(R, C, p.z(), dx * dx + dy * dy);
        continue;
      }
      double sx = -n.x() / n.z();
      double sy = -n.y() / n.z();
      const double mag = std::hypot(sx, sy);
      if (mag > kMaxSlope) {
        sx *= kMaxSlope / mag;
        sy *= kMaxSlope / mag;
      }
      // Splat onto every cell center the surfel's tangent patch reaches, so
      // directions the rotation stretches stay hole-free.
      const double x0 = std::floor(p.x()), y0 = std::floor(p.y());
      for (int iy = 0; iy < 2; ++iy) {
        const double Y = y0 + iy;
        const double dy = Y - p.y();
        if (std::abs(dy) > kFootprint) continue;
        for (int ix = 0; ix < 2; ++ix) {
          const double X = x0 + ix;
          const double dx = X - p.x();
          if (std::abs(dx) > kFootprint) continue;
          deposit(static_cast<Index>(Y), static_cast<Index>(X),
                  p.z() + sx * dx + sy * dy, dx * dx + dy * dy);
        }
      }
    }
  }

  RangeImage<Scalar> out;
  out.depth = DepthGrid<Scalar>::Zero(rows, cols);
  out.valid = PixelMask::Constant(rows, cols, false);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      if (zbuf(r, c) == -std::numeric_limits<double>::infinity()) continue;
      out.depth(r, c) = static_cast<Scalar>(zbuf(r, c));
      out.valid(r, c) = true;
    }
  }
  return out;
}

inline TruthPoint transformTruthPoint(const TruthPoint& pt,
                                      const PoseTransform& xf) {
  Eigen::Vector3d p = xf.apply(pt.col, pt.row, pt.depth);
  return {p.y(), p.x(), p.z()};
}

inline LandmarkTruth transformTruth(const LandmarkTruth& truth,
                                    const PoseTransform& xf) {
  return {transformTruthPoint(truth.nose, xf),
          {transformTruthPoint(truth.eyes[0], xf),
           transformTruthPoint(truth.eyes[1], xf)}};
}

/// Rotates image and ground truth through the same transform.
template <typename Scalar>
Phantom<Scalar> rotatePhantom(const Phantom<Scalar>& ph,
                              const PoseSpec& pose) {
  validatePose(pose);
  if (pose.angle_deg == 0) return ph;
  const PoseTransform xf = makePoseTransform(ph.image, pose);
  Phantom<Scalar> out;
  out.image = rotateAndRasterize(ph.image, pose);
  out.truth = transformTruth(ph.truth, xf);
  return out;
}

/// Adds zero-mean Gaussian depth noise to the valid pixels, row-major order,
/// one draw per valid pixel.
template <typename Scalar>
RangeImage<Scalar> addDepthNoise(const RangeImage<Scalar>& img, double sigma,
                                 std::uint64_t seed) {
  if (sigma < 0) raise(Errc::BadParams, "noise sigma must be non-negative");
  RangeImage<Scalar> out = img;
  if (sigma == 0) return out;
  SplitMix64 rng(seed);
  for (Index r = 0; r < out.rows(); ++r)
    for (Index c = 0; c < out.cols(); ++c)
      if (out.valid(r, c))
        out.depth(r, c) += static_cast<Scalar>(sigma * rng.gaussian());
  return out;
}

}  // namespace hk
