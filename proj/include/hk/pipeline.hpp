#pragma once

#include <optional>
#include <string>

#include "hk/curvature.hpp"
#include "hk/landmarks.hpp"
#include "hk/preprocess.hpp"
#include "hk/range_image.hpp"

namespace hk {

/// Knobs for the full detection pipeline:
/// crop -> Otsu background removal -> smoothing -> curvature -> classify ->
/// landmark detection. sigma = 0 turns smoothing off.
struct PipelineConfig {
  std::optional<CropRect> crop;
  bool otsu = true;
  int otsu_bins = 256;
  double sigma = 1.0;
  int radius = 2;
  int fit_window = 2;  // half-width of the biquadratic window
  double pixel_pitch = 1.0;
  double eps_h = 1e-6;
  double eps_k = 1e-6;
  double k_threshold = 1e-4;
  int top_n_nose = 5;
  double min_separation = 8.0;
};

inline void validateConfig(const PipelineConfig& cfg) {
  auto fail = [](const std::string& what) { raise(Errc::ConfigError, what); };
  if (cfg.crop && (cfg.crop->rows < 1 || cfg.crop->cols < 1 ||
                   cfg.crop->row0 < 0 || cfg.crop->col0 < 0))
    fail("crop must be r0,c0,rows,cols with non-negative corner and positive "
         "extent");
  if (cfg.otsu_bins < 2) fail("otsu_bins must be >= 2");
  if (!(cfg.sigma >= 0) || !std::isfinite(cfg.sigma))
    fail("sigma must be >= 0");
  if (cfg.radius < 1) fail("radius must be >= 1");
  if (cfg.fit_window < 1) fail("fit_window must be >= 1");
  if (!(cfg.pixel_pitch > 0) || !std::isfinite(cfg.pixel_pitch))
    fail("pixel_pitch must be > 0");
  if (!(cfg.eps_h >= 0) || !(cfg.eps_k >= 0))
    fail("eps_h and eps_k must be >= 0");
  if (!std::isfinite(cfg.k_threshold)) fail("k_threshold must be finite");
  if (cfg.top_n_nose < 1) fail("top_n_nose must be >= 1");
  if (!(cfg.min_separation >= 0)) fail("min_separation must be >= 0");
}

inline DetectionParams detectionParams(const PipelineConfig& cfg) {
  return {cfg.k_threshold, cfg.top_n_nose, cfg.min_separation};
}

template <typename Scalar>
struct PipelineOutput {
  RangeImage<Scalar> preprocessed;
  CurvatureField<Scalar> field;
  ClassifyResult classes;
  IntensityMap intensity;
  LandmarkResult<Scalar> landmarks;
  std::optional<Scalar> otsu_threshold;  // set when thresholding ran
};

/// Runs the full pipeline. Stage failures (bad crop, degenerate histogram,
/// empty image) throw; per-detector failures land in the landmark result.
template <typename Scalar>
PipelineOutput<Scalar> runPipeline(const RangeImage<Scalar>& input,
                                   const PipelineConfig& cfg) {
  validateConfig(cfg);
  PipelineOutput<Scalar> out;

  RangeImage<Scalar> img = cfg.crop ? crop(input, *cfg.crop) : input;
  if (cfg.otsu) {
    Scalar t = otsuThreshold(img, cfg.otsu_bins);
    out.otsu_threshold = t;
    img = applyThreshold(img, t);
  }
  if (cfg.sigma > 0)
    img = gaussianSmooth(img, SmoothingParams{cfg.sigma, cfg.radius});
  out.preprocessed = std::move(img);

  out.field = computeCurvatureField(out.preprocessed,
                                    FitWindow{cfg.fit_window},
                                    static_cast<Scalar>(cfg.pixel_pitch));
  out.classes = classify(out.field, ClassifyParams{cfg.eps_h, cfg.eps_k});
  out.intensity = intensityMap(out.preprocessed);

  const DetectionParams dp = detectionParams(cfg);
  try {
    out.landmarks.nose = detectNoseTip(out.field, out.intensity, dp);
  } catch (const Error& e) {
    out.landmarks.nose_error = e.code();
  }
  try {
    out.landmarks.eyes = detectEyeCorners(out.field, dp);
  } catch (const Error& e) {
    out.landmarks.eye_error = e.code();
  }
  return out;
}

}  // namespace hk
