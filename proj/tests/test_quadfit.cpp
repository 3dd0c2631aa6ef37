#include <doctest.h>

#include <array>
#include <cmath>

#include "hk/quadfit.hpp"
#include "hk/random.hpp"
#include "test_util.hpp"

using namespace hk;

namespace {

// Samples z = k0 + k1*u + k2*v + k3*u*v + k4*u^2 + k5*v^2 with u, v measured
// from (center_r, center_c) in depth units.
RangeImaged polyImage(Index n, double center_r, double center_c, double pitch,
                      const std::array<double, 6>& k) {
  RangeImaged img;
  img.depth = DepthGrid<double>::Zero(n, n);
  img.valid = PixelMask::Constant(n, n, true);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) {
      const double u = (c - center_c) * pitch;
      const double v = (r - center_r) * pitch;
      img.depth(r, c) =
          k[0] + k[1] * u + k[2] * v + k[3] * u * v + k[4] * u * u + k[5] * v * v;
    }
  return img;
}

void checkCoeffs(const QuadFit<double>& q, const std::array<double, 6>& k,
                 double tol = 1e-9) {
  CHECK(std::abs(q.a - k[0]) < tol);
  CHECK(std::abs(q.b - k[1]) < tol);
  CHECK(std::abs(q.c - k[2]) < tol);
  CHECK(std::abs(q.d - k[3]) < tol);
  CHECK(std::abs(q.e - k[4]) < tol);
  CHECK(std::abs(q.f - k[5]) < tol);
}

}  // namespace

TEST_CASE("fit reproduces a sampled biquadratic exactly") {
  const std::array<double, 6> k{2, 3, 4, 5, 6, 7};
  RangeImaged img = polyImage(9, 4, 4, 1.0, k);

  QuadFit<double> q5 = fitBiquadratic(img, 4, 4, {2});
  checkCoeffs(q5, k);
  CHECK(q5.support == 25);
  CHECK_FALSE(q5.rank_deficient);

  // a 3x3 window already determines all six coefficients
  QuadFit<double> q3 = fitBiquadratic(img, 4, 4, {1});
  checkCoeffs(q3, k);
  CHECK(q3.support == 9);
  CHECK_FALSE(q3.rank_deficient);

  const std::array<double, 6> k2{-1.5, 0.25, -0.75, 1.125, -2.0, 0.5};
  checkCoeffs(fitBiquadratic(polyImage(11, 5, 5, 1.0, k2), 5, 5, {2}), k2);
}

TEST_CASE("off-center fits agree with the shifted Taylor expansion") {
  const std::array<double, 6> k{2, 3, 4, 5, 6, 7};
  RangeImaged img = polyImage(11, 5, 5, 1.0, k);
  // recentering at offset (V, U) from the sampling origin
  const double V = 2.0, U = -1.0;
  QuadFit<double> q = fitBiquadratic(img, 7, 4, {2});
  const std::array<double, 6> shifted{
      k[0] + k[1] * U + k[2] * V + k[3] * U * V + k[4] * U * U + k[5] * V * V,
      k[1] + k[3] * V + 2 * k[4] * U,
      k[2] + k[3] * U + 2 * k[5] * V,
      k[3],
      k[4],
      k[5]};
  checkCoeffs(q, shifted);
}

TEST_CASE("planes fit with zero curvature terms") {
  checkCoeffs(fitBiquadratic(polyImage(9, 4, 4, 1.0, {5, 0, 0, 0, 0, 0}), 4, 4),
              {5, 0, 0, 0, 0, 0}, 1e-12);
  checkCoeffs(
      fitBiquadratic(polyImage(9, 4, 4, 1.0, {1, 0.25, -0.5, 0, 0, 0}), 4, 4),
      {1, 0.25, -0.5, 0, 0, 0}, 1e-12);
}

TEST_CASE("pixel pitch converts offsets into depth units") {
  const std::array<double, 6> k{2, 3, 4, 5, 6, 7};
  RangeImaged img = polyImage(9, 4, 4, 0.5, k);

  // matching pitch recovers the generating coefficients
  checkCoeffs(fitBiquadratic(img, 4, 4, {2}, 0.5), k);

  // fitting the same depths at unit pitch rescales each term by pitch^degree
  QuadFit<double> qp = fitBiquadratic(img, 4, 4, {2}, 1.0);
  checkCoeffs(qp, {k[0], 0.5 * k[1], 0.5 * k[2], 0.25 * k[3], 0.25 * k[4],
                   0.25 * k[5]});
}

TEST_CASE("derivatives map straight off the coefficients") {
  QuadFit<double> q{2, 3, 4, 5, 6, 7, 25, false};
  SurfaceDerivs<double> d = derivatives(q);
  CHECK(d.fx == 3.0);
  CHECK(d.fy == 4.0);
  CHECK(d.fxy == 5.0);
  CHECK(d.fxx == 12.0);
  CHECK(d.fyy == 14.0);

  QuadFit<double> flat{9, 0, 0, 0, 0, 0, 25, false};
  SurfaceDerivs<double> z = derivatives(flat);
  CHECK(z.fx == 0.0);
  CHECK(z.fxx == 0.0);
}

TEST_CASE("sphere cap fit matches the analytic second-order terms") {
  const double R = 50.0;
  RangeImaged img;
  img.depth = DepthGrid<double>::Zero(11, 11);
  img.valid = PixelMask::Constant(11, 11, true);
  for (Index r = 0; r < 11; ++r)
    for (Index c = 0; c < 11; ++c) {
      const double u = c - 5.0, v = r - 5.0;
      img.depth(r, c) = 10.0 + std::sqrt(R * R - u * u - v * v);
    }
  QuadFit<double> q = fitBiquadratic(img, 5, 5, {2});
  CHECK(q.e == doctest::Approx(-1.0 / (2 * R)).epsilon(0.01));
  CHECK(q.f == doctest::Approx(-1.0 / (2 * R)).epsilon(0.01));
  CHECK(std::abs(q.b) < 1e-9);   // even surface, odd terms vanish
  CHECK(std::abs(q.c) < 1e-9);
  CHECK(std::abs(q.d) < 1e-9);
  SurfaceDerivs<double> der = derivatives(q);
  CHECK(der.fxx == doctest::Approx(-1.0 / R).epsilon(0.01));
  CHECK(der.fyy == doctest::Approx(-1.0 / R).epsilon(0.01));
}

TEST_CASE("support counts the window's valid pixels") {
  RangeImaged img = polyImage(9, 4, 4, 1.0, {2, 3, 4, 5, 6, 7});
  img.valid(2, 2) = false;
  img.valid(4, 6) = false;
  img.valid(6, 3) = false;
  QuadFit<double> q = fitBiquadratic(img, 4, 4, {2});
  CHECK(q.support == 22);
  CHECK_FALSE(q.rank_deficient);
  checkCoeffs(q, {2, 3, 4, 5, 6, 7});

  // near the corner the window is clipped to the image
  QuadFit<double> corner = fitBiquadratic(img, 0, 0, {2});
  CHECK(corner.support == 8);  // 3x3 in-bounds quadrant minus the (2,2) hole
}

TEST_CASE("six generic pixels are enough, five are not") {
  RangeImaged img = polyImage(9, 4, 4, 1.0, {1, -2, 0.5, 3, -1, 2});
  img.valid.setConstant(false);
  img.valid(4, 4) = true;
  img.valid(4, 5) = true;
  img.valid(5, 4) = true;
  img.valid(5, 5) = true;
  img.valid(4, 3) = true;
  CHECK(errcOf([&] { fitBiquadratic(img, 4, 4, {2}); }) ==
        Errc::InsufficientSupport);

  img.valid(3, 4) = true;  // sixth pixel completes an invertible design
  QuadFit<double> q = fitBiquadratic(img, 4, 4, {2});
  CHECK(q.support == 6);
  CHECK_FALSE(q.rank_deficient);
  checkCoeffs(q, {1, -2, 0.5, 3, -1, 2});
}

TEST_CASE("degenerate windows are flagged rank deficient") {
  RangeImaged img = polyImage(9, 4, 4, 1.0, {2, 3, 4, 5, 6, 7});

  // two valid rows: v only takes {0, 1}, so v^2 aliases v
  RangeImaged rows2 = img;
  rows2.valid.setConstant(false);
  rows2.valid.row(4).setConstant(true);
  rows2.valid.row(5).setConstant(true);
  QuadFit<double> q = fitBiquadratic(rows2, 4, 4, {2});
  CHECK(q.support == 10);
  CHECK(q.rank_deficient);

  // a single valid row kills every v term
  RangeImaged row1 = img;
  row1.valid.setConstant(false);
  row1.valid.row(4).setConstant(true);
  QuadFit<double> q1 = fitBiquadratic(row1, 4, 4, {3});
  CHECK(q1.support == 7);
  CHECK(q1.rank_deficient);
}

TEST_CASE("fit rejects bad centers and parameters") {
  RangeImaged img = polyImage(9, 4, 4, 1.0, {2, 3, 4, 5, 6, 7});
  CHECK(errcOf([&] { fitBiquadratic(img, 4, 4, {0}); }) == Errc::BadParams);
  CHECK(errcOf([&] { fitBiquadratic(img, 4, 4, {2}, 0.0); }) == Errc::BadParams);
  CHECK(errcOf([&] { fitBiquadratic(img, 4, 4, {2}, -1.0); }) ==
        Errc::BadParams);
  CHECK(errcOf([&] { fitBiquadratic(img, -1, 4); }) == Errc::BadParams);
  CHECK(errcOf([&] { fitBiquadratic(img, 9, 4); }) == Errc::BadParams);

  img.valid(4, 4) = false;
  CHECK(errcOf([&] { fitBiquadratic(img, 4, 4); }) == Errc::CenterInvalid);
}

TEST_CASE("identical window contents give bitwise identical fits") {
  SplitMix64 rng(404);
  DepthGrid<double> patch(5, 5);
  PixelMask pmask = PixelMask::Constant(5, 5, true);
  for (Index r = 0; r < 5; ++r)
    for (Index c = 0; c < 5; ++c) patch(r, c) = rng.uniform(0.0, 10.0);
  pmask(0, 3) = false;
  pmask(4, 1) = false;

  auto embed = [&](Index r0, Index c0) {
    RangeImaged img;
    img.depth = DepthGrid<double>::Zero(16, 16);
    img.valid = PixelMask::Constant(16, 16, false);
    img.depth.block(r0 - 2, c0 - 2, 5, 5) = patch;
    img.valid.block(r0 - 2, c0 - 2, 5, 5) = pmask;
    return fitBiquadratic(img, r0, c0, {2});
  };
  QuadFit<double> qa = embed(3, 3);
  QuadFit<double> qb = embed(9, 7);
  CHECK(qa.a == qb.a);
  CHECK(qa.b == qb.b);
  CHECK(qa.c == qb.c);
  CHECK(qa.d == qb.d);
  CHECK(qa.e == qb.e);
  CHECK(qa.f == qb.f);
  CHECK(qa.support == qb.support);
}

TEST_CASE("no coefficient perturbation lowers the squared residual") {
  SplitMix64 rng(88);
  RangeImaged img;
  img.depth = DepthGrid<double>::Zero(7, 7);
  img.valid = PixelMask::Constant(7, 7, true);
  for (Index r = 0; r < 7; ++r)
    for (Index c = 0; c < 7; ++c) img.depth(r, c) = rng.uniform(0.0, 5.0);
  img.valid(2, 4) = false;
  img.valid(5, 2) = false;

  QuadFit<double> q = fitBiquadratic(img, 3, 3, {2});
  auto ssr = [&](const QuadFit<double>& m) {
    double s = 0;
    for (int dr = -2; dr <= 2; ++dr)
      for (int dc = -2; dc <= 2; ++dc) {
        const Index r = 3 + dr, c = 3 + dc;
        if (!img.valid(r, c)) continue;
        const double u = dc, v = dr;
        const double z =
            m.a + m.b * u + m.c * v + m.d * u * v + m.e * u * u + m.f * v * v;
        const double e = img.depth(r, c) - z;
        s += e * e;
      }
    return s;
  };
  const double base = ssr(q);
  double* coeffs[6] = {&q.a, &q.b, &q.c, &q.d, &q.e, &q.f};
  for (double* cp : coeffs) {
    for (double delta : {1e-3, -1e-3}) {
      const double saved = *cp;
      *cp = saved + delta;
      CHECK(ssr(q) >= base - 1e-12);
      *cp = saved;
    }
  }
}
