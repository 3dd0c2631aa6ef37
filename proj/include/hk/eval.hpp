#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hk/pipeline.hpp"
#include "hk/random.hpp"
#include "hk/synth.hpp"

namespace hk {

/// Pipeline defaults for synthetic sweeps. Phantoms carry no background
/// clutter, so Otsu stays off; everything else matches the detection
/// defaults.
inline PipelineConfig evalPipelineConfig() {
  PipelineConfig cfg;
  cfg.otsu = false;
  return cfg;
}

/// The pose grid the sweep covers by default: yaw up to the angles where the
/// brightest-pixel baseline collapses, pitch to steep tilts, and in-plane
/// roll.
inline std::vector<PoseSpec> defaultPoseGrid() {
  std::vector<PoseSpec> poses;
  for (double a : {15.0, 18.0, 30.0, 38.0, 40.0}) {
    poses.push_back({Axis::Y, a});
    poses.push_back({Axis::Y, -a});
  }
  for (double a : {15.0, 18.0, 60.0}) {
    poses.push_back({Axis::X, a});
    poses.push_back({Axis::X, -a});
  }
  for (double a : {15.0, 18.0, 30.0}) {
    poses.push_back({Axis::Z, a});
    poses.push_back({Axis::Z, -a});
  }
  return poses;
}

struct EvalOptions {
  PipelineConfig config = evalPipelineConfig();
  std::vector<PoseSpec> poses = defaultPoseGrid();
  int trials = 20;
  std::uint64_t seed = 1;
  double noise_sigma = 0.0;
  double nose_tol = 3.0;  // detected nose within this many pixels of truth
  double eye_tol = 4.0;   // both corners within this many pixels of truth
};

struct EvalCell {
  PoseSpec pose;
  int trials = 0;
  int nose_hits = 0;
  int eye_hits = 0;
  int baseline_hits = 0;  // brightest-pixel nose baseline
};

struct EvalReport {
  EvalOptions options;
  std::vector<EvalCell> cells;
  int total_trials = 0;
  int nose_total = 0;
  int eye_total = 0;
  int baseline_total = 0;
};

/// Randomized phantom for one sweep trial. Feature geometry wiggles around
/// the defaults; the eye pits stay slightly asymmetric so their curvature
/// ranking is never a coin flip.
template <typename Scalar = double>
PhantomSpec<Scalar> drawPhantomSpec(SplitMix64& rng) {
  PhantomSpec<Scalar> spec;
  spec.head_radius = static_cast<Scalar>(rng.uniform(65.0, 78.0));
  spec.nose.amplitude = static_cast<Scalar>(rng.uniform(10.5, 13.5));
  spec.nose.width = static_cast<Scalar>(rng.uniform(5.5, 6.5));
  spec.nose.row = static_cast<Scalar>(64 + rng.uniformInt(-3, 3));
  spec.nose.col = static_cast<Scalar>(64 + rng.uniformInt(-3, 3));
  spec.left_eye.row = static_cast<Scalar>(44 + rng.uniformInt(-2, 2));
  spec.left_eye.col = static_cast<Scalar>(44 + rng.uniformInt(-2, 2));
  spec.right_eye.row = static_cast<Scalar>(44 + rng.uniformInt(-2, 2));
  spec.right_eye.col = static_cast<Scalar>(84 + rng.uniformInt(-2, 2));
  const double amp = rng.uniform(3.6, 4.6);
  spec.left_eye.amplitude = static_cast<Scalar>(-amp);
  spec.right_eye.amplitude =
      static_cast<Scalar>(-amp * rng.uniform(1.05, 1.15));
  spec.left_eye.width = static_cast<Scalar>(rng.uniform(3.2, 3.9));
  spec.right_eye.width = static_cast<Scalar>(rng.uniform(3.2, 3.9));
  return spec;
}

inline double truthDistance(double row, double col, const TruthPoint& t) {
  return std::hypot(row - t.row, col - t.col);
}

/// Hit when each detected corner pairs with a distinct true pit within the
/// tolerance, under the better of the two assignments.
template <typename Scalar>
bool eyesHit(const EyeCorners<Scalar>& eyes,
             const std::array<TruthPoint, 2>& truth, double tol) {
  auto d = [&](const LandmarkPoint<Scalar>& p, const TruthPoint& t) {
    return truthDistance(static_cast<double>(p.row),
                         static_cast<double>(p.col), t);
  };
  const double straight =
      std::max(d(eyes.first, truth[0]), d(eyes.second, truth[1]));
  const double crossed =
      std::max(d(eyes.first, truth[1]), d(eyes.second, truth[0]));
  return std::min(straight, crossed) <= tol;
}

template <typename Scalar = double>
EvalReport runEval(const EvalOptions& options) {
  if (options.trials < 1) raise(Errc::BadParams, "trials must be >= 1");
  if (!(options.nose_tol > 0) || !(options.eye_tol > 0))
    raise(Errc::BadParams, "tolerances must be positive");
  if (options.noise_sigma < 0)
    raise(Errc::BadParams, "noise sigma must be non-negative");
  if (options.poses.empty()) raise(Errc::BadParams, "pose grid is empty");
  for (const PoseSpec& p : options.poses) validatePose(p);
  validateConfig(options.config);

  EvalReport report;
  report.options = options;
  for (std::size_t ci = 0; ci < options.poses.size(); ++ci) {
    EvalCell cell;
    cell.pose = options.poses[ci];
    cell.trials = options.trials;
    for (int trial = 0; trial < options.trials; ++trial) {
      SplitMix64 rng(mixSeed(mixSeed(options.seed, ci), trial));
      const PhantomSpec<Scalar> spec = drawPhantomSpec<Scalar>(rng);
      Phantom<Scalar> ph = rotatePhantom(makePhantom(spec), cell.pose);
      if (options.noise_sigma > 0)
        ph.image = addDepthNoise(ph.image, options.noise_sigma, rng.next());
      try {
        PipelineOutput<Scalar> out = runPipeline(ph.image, options.config);
        if (out.landmarks.nose &&
            truthDistance(static_cast<double>(out.landmarks.nose->row),
                          static_cast<double>(out.landmarks.nose->col),
                          ph.truth.nose) <= options.nose_tol)
          ++cell.nose_hits;
        if (out.landmarks.eyes &&
            eyesHit(*out.landmarks.eyes, ph.truth.eyes, options.eye_tol))
          ++cell.eye_hits;
        IntensityPoint base = detectNoseTipMaxIntensity(out.intensity);
        if (truthDistance(static_cast<double>(base.row),
                          static_cast<double>(base.col),
                          ph.truth.nose) <= options.nose_tol)
          ++cell.baseline_hits;
      } catch (const Error&) {
        // a failed trial scores as a miss on all three detectors
      }
    }
    report.total_trials += cell.trials;
    report.nose_total += cell.nose_hits;
    report.eye_total += cell.eye_hits;
    report.baseline_total += cell.baseline_hits;
    report.cells.push_back(cell);
  }
  return report;
}

}  // namespace hk
