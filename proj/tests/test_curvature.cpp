#include <doctest.h>

#include <array>
#include <cmath>
#include <set>

#include "hk/curvature.hpp"
#include "hk/random.hpp"
#include "test_util.hpp"

using namespace hk;

TEST_CASE("sphere derivatives give H = -1/R, K = 1/R^2 anywhere on the cap") {
  const double R = 50.0;
  SplitMix64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const double x = rng.uniform(-30.0, 30.0);
    const double y = rng.uniform(-30.0, 30.0);
    if (x * x + y * y > 0.5 * R * R) continue;
    const double z = std::sqrt(R * R - x * x - y * y);
    const double z3 = z * z * z;
    auto hk = curvatureFromDerivatives(-x / z, -y / z, -x * y / z3,
                                       -(z * z + x * x) / z3,
                                       -(z * z + y * y) / z3);
    CHECK(std::abs(hk.H - (-1.0 / R)) < 1e-12);
    CHECK(std::abs(hk.K - 1.0 / (R * R)) < 1e-12);
  }
}

TEST_CASE("cylinder derivatives give H = -1/(2R), K = 0") {
  const double R = 25.0;
  SplitMix64 rng(8);
  for (int i = 0; i < 50; ++i) {
    const double x = rng.uniform(-15.0, 15.0);
    const double z = std::sqrt(R * R - x * x);
    auto hk = curvatureFromDerivatives(-x / z, 0.0, 0.0,
                                       -R * R / (z * z * z), 0.0);
    CHECK(std::abs(hk.H - (-1.0 / (2 * R))) < 1e-12);
    CHECK(hk.K == 0.0);
  }
}

TEST_CASE("saddle and plane special values") {
  const double R = 30.0;
  auto saddle = curvatureFromDerivatives(0.0, 0.0, 0.0, 1.0 / R, -1.0 / R);
  CHECK(saddle.H == 0.0);
  CHECK(saddle.K == doctest::Approx(-1.0 / (R * R)).epsilon(1e-12));

  auto flat = curvatureFromDerivatives(0.0, 0.0, 0.0, 0.0, 0.0);
  CHECK(flat.H == 0.0);
  CHECK(flat.K == 0.0);

  // tilt alone does not bend the surface
  auto tilted = curvatureFromDerivatives(0.3, -0.2, 0.0, 0.0, 0.0);
  CHECK(tilted.H == 0.0);
  CHECK(tilted.K == 0.0);

  // pure opposing bends: mean curvature cancels, Gaussian goes negative
  auto bent = curvatureFromDerivatives(0.0, 0.0, 0.0, 1.0, -1.0);
  CHECK(bent.H == 0.0);
  CHECK(bent.K == -1.0);
  CHECK(classifyPoint(bent.H, bent.K) == HKClass::Impossible);
}

TEST_CASE("mean curvature squared dominates Gaussian curvature") {
  SplitMix64 rng(99);
  for (int i = 0; i < 10000; ++i) {
    auto hk = curvatureFromDerivatives(
        rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
        rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
    CHECK(hk.H * hk.H >= hk.K - 1e-12);
  }
}

TEST_CASE("classifyPoint covers all nine sign cells") {
  CHECK(classifyPoint(-1.0, 1.0) == HKClass::EllipticalConvex);
  CHECK(classifyPoint(-1.0, 0.0) == HKClass::CylindricalConvex);
  CHECK(classifyPoint(-1.0, -1.0) == HKClass::HyperbolicConvex);
  CHECK(classifyPoint(0.0, 1.0) == HKClass::HyperbolicSymmetric);
  CHECK(classifyPoint(0.0, 0.0) == HKClass::Planar);
  CHECK(classifyPoint(0.0, -1.0) == HKClass::Impossible);
  CHECK(classifyPoint(1.0, 1.0) == HKClass::EllipticalConcave);
  CHECK(classifyPoint(1.0, 0.0) == HKClass::CylindricalConcave);
  CHECK(classifyPoint(1.0, -1.0) == HKClass::HyperbolicConcave);

  // the spec's nose/eye archetypes
  CHECK(classifyPoint(-0.02, 4e-4) == HKClass::EllipticalConvex);
  CHECK(classifyPoint(0.02, 4e-4) == HKClass::EllipticalConcave);
}

TEST_CASE("classification bands flatten small magnitudes inclusively") {
  const ClassifyParams p{0.5, 0.5};
  CHECK(classifyPoint(0.5, 1.0, p) == HKClass::HyperbolicSymmetric);
  CHECK(classifyPoint(-0.5, 1.0, p) == HKClass::HyperbolicSymmetric);
  CHECK(classifyPoint(0.5000001, 1.0, p) == HKClass::EllipticalConcave);
  CHECK(classifyPoint(-1.0, 0.5, p) == HKClass::CylindricalConvex);
  CHECK(classifyPoint(-1.0, -0.5, p) == HKClass::CylindricalConvex);
  CHECK(classifyPoint(-1.0, -0.5000001, p) == HKClass::HyperbolicConvex);
  CHECK(classifyPoint(0.4, 0.4, p) == HKClass::Planar);
}

TEST_CASE("classify labels every pixel and counts them") {
  CurvatureFieldd fld;
  fld.H = DepthGrid<double>(2, 5);
  fld.K = DepthGrid<double>(2, 5);
  fld.valid = PixelMask::Constant(2, 5, true);
  fld.H << -1, -1, -1, 0, 0, 0, 1, 1, 1, 0;
  fld.K << 1, 0, -1, 1, 0, -1, 1, 0, -1, 0;
  fld.valid(1, 4) = false;

  ClassifyResult res = classify(fld);
  CHECK(classAt(res.classes, 0, 0) == HKClass::EllipticalConvex);
  CHECK(classAt(res.classes, 0, 3) == HKClass::HyperbolicSymmetric);
  CHECK(classAt(res.classes, 1, 0) == HKClass::Impossible);
  CHECK(classAt(res.classes, 1, 3) == HKClass::HyperbolicConcave);
  CHECK(classAt(res.classes, 1, 4) == HKClass::Unclassified);

  Index total = 0;
  for (Index n : res.counts) total += n;
  CHECK(total == 10);
  CHECK(res.counts[static_cast<int>(HKClass::Unclassified)] == 1);
  for (int i = 0; i < kHKClassCount; ++i)
    if (i != static_cast<int>(HKClass::Unclassified))
      CHECK(res.counts[i] == 1);

  CHECK(errcOf([&] { classify(fld, {-1e-6, 1e-6}); }) == Errc::BadParams);
  CHECK(errcOf([&] { classify(fld, {1e-6, -1e-6}); }) == Errc::BadParams);
}

TEST_CASE("hkClassName is distinct and snake_case") {
  std::set<std::string> names;
  for (int i = 0; i < kHKClassCount; ++i)
    names.insert(hkClassName(static_cast<HKClass>(i)));
  CHECK(names.size() == kHKClassCount);
  CHECK(std::string(hkClassName(HKClass::EllipticalConvex)) ==
        "elliptical_convex");
  CHECK(std::string(hkClassName(HKClass::Unclassified)) == "unclassified");
}

TEST_CASE("curvature field recovers sphere curvature from depth samples") {
  const double R = 50.0;
  RangeImaged img;
  img.depth = DepthGrid<double>::Zero(41, 41);
  img.valid = PixelMask::Constant(41, 41, true);
  for (Index r = 0; r < 41; ++r)
    for (Index c = 0; c < 41; ++c) {
      const double u = c - 20.0, v = r - 20.0;
      img.depth(r, c) = 10.0 + std::sqrt(R * R - u * u - v * v);
    }
  CurvatureFieldd fld = computeCurvatureField(img);
  REQUIRE(fld.valid(20, 20));
  CHECK(fld.H(20, 20) == doctest::Approx(-1.0 / R).epsilon(0.02));
  CHECK(fld.K(20, 20) == doctest::Approx(1.0 / (R * R)).epsilon(0.02));
  CHECK(classifyPoint(fld.H(20, 20), fld.K(20, 20)) ==
        HKClass::EllipticalConvex);

  CHECK(errcOf([&] { computeCurvatureField(img, {0}); }) == Errc::BadParams);
  CHECK(errcOf([&] { computeCurvatureField(img, {2}, 0.0); }) ==
        Errc::BadParams);
}

TEST_CASE("rank deficient fits never enter the field") {
  RangeImaged img;
  img.depth = DepthGrid<double>::Zero(9, 9);
  img.valid = PixelMask::Constant(9, 9, false);
  SplitMix64 rng(5);
  for (Index c = 0; c < 9; ++c) {
    img.depth(4, c) = rng.uniform(0.0, 1.0);
    img.depth(5, c) = rng.uniform(0.0, 1.0);
    img.valid(4, c) = true;
    img.valid(5, c) = true;
  }
  // every window sees at most two distinct row offsets
  CurvatureFieldd fld = computeCurvatureField(img);
  CHECK_FALSE(fld.valid.any());
}

TEST_CASE("negating depth swaps convex and concave labels pixelwise") {
  RangeImaged img;
  img.depth = DepthGrid<double>::Zero(32, 32);
  img.valid = PixelMask::Constant(32, 32, true);
  for (Index r = 0; r < 32; ++r)
    for (Index c = 0; c < 32; ++c)
      img.depth(r, c) = 10.0 + std::sin(r / 3.0) * std::cos(c / 4.0);
  img.valid(7, 21) = false;

  RangeImaged neg = img;
  neg.depth = -img.depth;

  CurvatureFieldd f1 = computeCurvatureField(img);
  CurvatureFieldd f2 = computeCurvatureField(neg);
  ClassifyResult c1 = classify(f1);
  ClassifyResult c2 = classify(f2);

  auto mirror = [](HKClass c) {
    switch (c) {
      case HKClass::EllipticalConvex: return HKClass::EllipticalConcave;
      case HKClass::EllipticalConcave: return HKClass::EllipticalConvex;
      case HKClass::CylindricalConvex: return HKClass::CylindricalConcave;
      case HKClass::CylindricalConcave: return HKClass::CylindricalConvex;
      case HKClass::HyperbolicConvex: return HKClass::HyperbolicConcave;
      case HKClass::HyperbolicConcave: return HKClass::HyperbolicConvex;
      default: return c;
    }
  };
  for (Index r = 0; r < 32; ++r)
    for (Index c = 0; c < 32; ++c) {
      CHECK(f2.valid(r, c) == f1.valid(r, c));
      if (!f1.valid(r, c)) continue;
      // the solve is linear in the depths, so the flip is bitwise
      CHECK(f2.H(r, c) == -f1.H(r, c));
      CHECK(f2.K(r, c) == f1.K(r, c));
      CHECK(classAt(c2.classes, r, c) == mirror(classAt(c1.classes, r, c)));
    }
}

TEST_CASE("curvature field commutes with quarter-turn image rotation") {
  const Index n = 64;
  RangeImaged img;
  img.depth = DepthGrid<double>::Zero(n, n);
  img.valid = PixelMask::Constant(n, n, true);
  const double half = (n - 1) / 2.0;
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) {
      const double u = c - half, v = r - half;
      img.depth(r, c) = 10.0 + (u * u - v * v) / 60.0;
    }
  img.valid(5, 9) = false;
  img.valid(40, 3) = false;
  img.valid(63, 63) = false;

  RangeImaged rot;
  rot.depth = DepthGrid<double>::Zero(n, n);
  rot.valid = PixelMask::Constant(n, n, false);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) {
      rot.depth(c, n - 1 - r) = img.depth(r, c);
      rot.valid(c, n - 1 - r) = img.valid(r, c);
    }

  CurvatureFieldd f = computeCurvatureField(img);
  CurvatureFieldd fr = computeCurvatureField(rot);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) {
      const Index rr = c, cc = n - 1 - r;
      CHECK(fr.valid(rr, cc) == f.valid(r, c));
      if (!f.valid(r, c)) continue;
      // curvatures are isometry invariants; only summation order differs
      CHECK(std::abs(fr.H(rr, cc) - f.H(r, c)) < 1e-12);
      CHECK(std::abs(fr.K(rr, cc) - f.K(r, c)) < 1e-12);
    }
}

TEST_CASE("segmentRegions splits the class map into sorted components") {
  CurvatureFieldd fld;
  fld.H = DepthGrid<double>::Zero(4, 6);
  fld.K = DepthGrid<double>::Zero(4, 6);
  fld.valid = PixelMask::Constant(4, 6, true);

  const auto E = static_cast<std::uint8_t>(HKClass::EllipticalConvex);
  const auto P = static_cast<std::uint8_t>(HKClass::Planar);
  const auto C = static_cast<std::uint8_t>(HKClass::HyperbolicConcave);
  const auto U = static_cast<std::uint8_t>(HKClass::Unclassified);
  HKClassMap classes(4, 6);
  classes << E, E, P, P, P, P,
             E, E, P, P, C, C,
             U, U, E, P, C, C,
             U, U, P, P, C, C;

  // mean H over the 2x2 convex block, mean K over the concave block
  fld.H(0, 0) = 1; fld.H(0, 1) = 2; fld.H(1, 0) = 3; fld.H(1, 1) = 4;
  fld.K(1, 4) = 6; fld.K(1, 5) = 5; fld.K(2, 4) = 4;
  fld.K(2, 5) = 3; fld.K(3, 4) = 2; fld.K(3, 5) = 1;

  auto regions = segmentRegions(fld, classes);
  REQUIRE(regions.size() == 4);

  CHECK(regions[0].cls == HKClass::Planar);
  CHECK(regions[0].pixels.size() == 9);
  CHECK(regions[1].cls == HKClass::HyperbolicConcave);
  CHECK(regions[1].pixels.size() == 6);
  CHECK(regions[1].mean_k == doctest::Approx(3.5));
  CHECK(regions[2].cls == HKClass::EllipticalConvex);
  CHECK(regions[2].pixels.size() == 4);
  CHECK(regions[2].mean_h == doctest::Approx(2.5));
  // (2,2) only touches the block diagonally, so it stays its own region
  CHECK(regions[3].cls == HKClass::EllipticalConvex);
  CHECK(regions[3].pixels ==
        std::vector<std::array<Index, 2>>{{2, 2}});

  CHECK(regions[2].pixels ==
        std::vector<std::array<Index, 2>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});

  // the regions partition the labeled pixels
  std::set<std::array<Index, 2>> all;
  std::size_t total = 0;
  for (const auto& reg : regions) {
    total += reg.pixels.size();
    all.insert(reg.pixels.begin(), reg.pixels.end());
  }
  CHECK(total == 20);
  CHECK(all.size() == 20);

  CurvatureFieldd small;
  small.H = DepthGrid<double>::Zero(3, 6);
  small.K = DepthGrid<double>::Zero(3, 6);
  small.valid = PixelMask::Constant(3, 6, true);
  CHECK(errcOf([&] { segmentRegions(small, classes); }) ==
        Errc::DimensionMismatch);
}

TEST_CASE("palette values are stable") {
  CHECK(paletteValue(HKClass::Unclassified) == 0);
  CHECK(paletteValue(HKClass::HyperbolicConvex) == 32);
  CHECK(paletteValue(HKClass::HyperbolicSymmetric) == 32);
  CHECK(paletteValue(HKClass::HyperbolicConcave) == 32);
  CHECK(paletteValue(HKClass::Impossible) == 32);
  CHECK(paletteValue(HKClass::Planar) == 64);
  CHECK(paletteValue(HKClass::CylindricalConvex) == 96);
  CHECK(paletteValue(HKClass::EllipticalConvex) == 128);
  CHECK(paletteValue(HKClass::CylindricalConcave) == 192);
  CHECK(paletteValue(HKClass::EllipticalConcave) == 224);

  HKClassMap m(1, kHKClassCount);
  for (int i = 0; i < kHKClassCount; ++i) m(0, i) = std::uint8_t(i);
  ByteGrid img = renderClassMap(m);
  const std::uint8_t want[kHKClassCount] = {128, 96, 32, 32, 64,
                                            224, 192, 32, 32, 0};
  for (int i = 0; i < kHKClassCount; ++i) CHECK(img(0, i) == want[i]);
}
