#pragma once

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "hk/eval.hpp"
#include "hk/pipeline.hpp"
#include "hk/range_io.hpp"

namespace hk {

using Json = nlohmann::ordered_json;

inline Json cropJson(const std::optional<CropRect>& crop) {
  if (!crop) return nullptr;
  return Json::array({crop->row0, crop->col0, crop->rows, crop->cols});
}

inline Json configJson(const PipelineConfig& cfg) {
  Json j;
  j["crop"] = cropJson(cfg.crop);
  j["otsu"] = cfg.otsu;
  j["otsu_bins"] = cfg.otsu_bins;
  j["sigma"] = cfg.sigma;
  j["radius"] = cfg.radius;
  j["fit_window"] = cfg.fit_window;
  j["pixel_pitch"] = cfg.pixel_pitch;
  j["eps_h"] = cfg.eps_h;
  j["eps_k"] = cfg.eps_k;
  j["k_threshold"] = cfg.k_threshold;
  j["top_n_nose"] = cfg.top_n_nose;
  j["min_separation"] = cfg.min_separation;
  return j;
}

template <typename Scalar>
Json landmarksJson(const PipelineOutput<Scalar>& out,
                   const PipelineConfig& cfg) {
  Json j;
  if (out.landmarks.nose) {
    const auto& n = *out.landmarks.nose;
    j["nose"] = {{"row", n.row},
                 {"col", n.col},
                 {"k", static_cast<double>(n.k)},
                 {"intensity", n.intensity}};
  } else {
    j["nose"] = nullptr;
  }
  if (out.landmarks.eyes) {
    const auto& e = *out.landmarks.eyes;
    j["eyes"] = Json::array();
    for (const auto* p : {&e.first, &e.second})
      j["eyes"].push_back({{"row", p->row},
                           {"col", p->col},
                           {"k", static_cast<double>(p->k)}});
  } else {
    j["eyes"] = nullptr;
  }
  if (out.landmarks.nose_error || out.landmarks.eye_error) {
    Json err;
    err["stage"] = "detect";
    err["code"] = errcName(out.landmarks.nose_error
                               ? *out.landmarks.nose_error
                               : *out.landmarks.eye_error);
    if (out.landmarks.nose_error)
      err["nose"] = errcName(*out.landmarks.nose_error);
    if (out.landmarks.eye_error)
      err["eyes"] = errcName(*out.landmarks.eye_error);
    j["error"] = err;
  }
  j["otsu_threshold"] = out.otsu_threshold
                            ? Json(static_cast<double>(*out.otsu_threshold))
                            : Json(nullptr);
  j["params"] = configJson(cfg);
  return j;
}

inline Json stageErrorJson(const std::string& stage, const Error& e) {
  return Json{{"error",
               {{"stage", stage},
                {"code", errcName(e.code())},
                {"message", e.what()}}}};
}

/// One-line CSV:
/// nose_row,nose_col,nose_k,nose_intensity,eye1_row,eye1_col,eye1_k,
/// eye2_row,eye2_col,eye2_k. Missing landmarks leave their fields empty.
template <typename Scalar>
std::string landmarksCsv(const PipelineOutput<Scalar>& out) {
  std::ostringstream s;
  if (out.landmarks.nose) {
    const auto& n = *out.landmarks.nose;
    s << n.row << ',' << n.col << ','
      << detail::formatDouble(static_cast<double>(n.k)) << ',' << n.intensity;
  } else {
    s << ",,,";
  }
  if (out.landmarks.eyes) {
    const auto& e = *out.landmarks.eyes;
    for (const auto* p : {&e.first, &e.second})
      s << ',' << p->row << ',' << p->col << ','
        << detail::formatDouble(static_cast<double>(p->k));
  } else {
    s << ",,,,,,";
  }
  return s.str();
}

inline Json truthJson(const LandmarkTruth& truth,
                      std::optional<PoseSpec> pose) {
  Json j;
  j["nose"] = Json::array({truth.nose.row, truth.nose.col});
  j["eyes"] = Json::array();
  for (const TruthPoint& e : truth.eyes)
    j["eyes"].push_back(Json::array({e.row, e.col}));
  if (pose)
    j["pose"] = {{"axis", axisName(pose->axis)}, {"angle", pose->angle_deg}};
  else
    j["pose"] = nullptr;
  return j;
}

inline Json evalJson(const EvalReport& r) {
  Json j;
  j["trials_per_cell"] = r.options.trials;
  j["seed"] = r.options.seed;
  j["noise_sigma"] = r.options.noise_sigma;
  j["scoring"] = {{"nose_tol_px", r.options.nose_tol},
                  {"eye_tol_px", r.options.eye_tol},
                  {"note",
                   "hit tolerances are a convention of this tool's sweep"}};
  j["config"] = configJson(r.options.config);
  j["cells"] = Json::array();
  for (const EvalCell& c : r.cells)
    j["cells"].push_back({{"axis", axisName(c.pose.axis)},
                          {"angle", c.pose.angle_deg},
                          {"trials", c.trials},
                          {"nose_hits", c.nose_hits},
                          {"eye_hits", c.eye_hits},
                          {"baseline_nose_hits", c.baseline_hits}});
  j["overall"] = {{"trials", r.total_trials},
                  {"nose_hits", r.nose_total},
                  {"eye_hits", r.eye_total},
                  {"baseline_nose_hits", r.baseline_total}};
  return j;
}

inline std::string evalText(const EvalReport& r) {
  std::ostringstream s;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "pose sweep: %d trials per cell, seed %llu, noise %g\n",
                r.options.trials,
                static_cast<unsigned long long>(r.options.seed),
                r.options.noise_sigma);
  s << buf;
  std::snprintf(buf, sizeof(buf),
                "scoring convention: nose hit <= %g px of true tip, eye hit ="
                " both corners <= %g px of true pits\n",
                r.options.nose_tol, r.options.eye_tol);
  s << buf;
  s << "axis   angle  trials    nose    eyes  baseline\n";
  for (const EvalCell& c : r.cells) {
    std::snprintf(buf, sizeof(buf), "%4s  %+6.1f  %6d  %6d  %6d  %8d\n",
                  axisName(c.pose.axis), c.pose.angle_deg, c.trials,
                  c.nose_hits, c.eye_hits, c.baseline_hits);
    s << buf;
  }
  auto pct = [](int hits, int total) {
    return total ? 100.0 * hits / total : 0.0;
  };
  std::snprintf(buf, sizeof(buf),
                "overall: nose %d/%d (%.1f%%), eyes %d/%d (%.1f%%), baseline "
                "%d/%d (%.1f%%)\n",
                r.nose_total, r.total_trials, pct(r.nose_total, r.total_trials),
                r.eye_total, r.total_trials, pct(r.eye_total, r.total_trials),
                r.baseline_total, r.total_trials,
                pct(r.baseline_total, r.total_trials));
  s << buf;
  return s.str();
}

/// Flat key=value config text, one pair per line, '#' comments. Keys match
/// the CLI flags; crop is "none" or "r0,c0,rows,cols".
inline std::string configText(const PipelineConfig& cfg) {
  std::ostringstream s;
  s << "crop = ";
  if (cfg.crop)
    s << cfg.crop->row0 << ',' << cfg.crop->col0 << ',' << cfg.crop->rows
      << ',' << cfg.crop->cols;
  else
    s << "none";
  s << "\n";
  s << "otsu = " << (cfg.otsu ? "true" : "false") << "\n";
  s << "otsu_bins = " << cfg.otsu_bins << "\n";
  s << "sigma = " << detail::formatDouble(cfg.sigma) << "\n";
  s << "radius = " << cfg.radius << "\n";
  s << "fit_window = " << cfg.fit_window << "\n";
  s << "pixel_pitch = " << detail::formatDouble(cfg.pixel_pitch) << "\n";
  s << "eps_h = " << detail::formatDouble(cfg.eps_h) << "\n";
  s << "eps_k = " << detail::formatDouble(cfg.eps_k) << "\n";
  s << "k_threshold = " << detail::formatDouble(cfg.k_threshold) << "\n";
  s << "top_n_nose = " << cfg.top_n_nose << "\n";
  s << "min_separation = " << detail::formatDouble(cfg.min_separation) << "\n";
  return s.str();
}

namespace detail {

inline std::string trimmed(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parseConfigDouble(const std::string& key,
                                const std::string& val) {
  const char* s = val.c_str();
  char* end = nullptr;
  double v = std::strtod(s, &end);
  if (end != s + val.size() || !std::isfinite(v))
    raise(Errc::ConfigError, "bad value for " + key + ": '" + val + "'");
  return v;
}

inline long long parseConfigInt(const std::string& key,
                                const std::string& val) {
  double v = parseConfigDouble(key, val);
  long long n = static_cast<long long>(v);
  if (v != static_cast<double>(n))
    raise(Errc::ConfigError, key + " must be an integer, got '" + val + "'");
  return n;
}

inline bool parseConfigBool(const std::string& key, const std::string& val) {
  if (val == "true" || val == "on" || val == "1") return true;
  if (val == "false" || val == "off" || val == "0") return false;
  raise(Errc::ConfigError, "bad boolean for " + key + ": '" + val + "'");
}

}  // namespace detail

inline CropRect parseCropSpec(const std::string& val) {
  CropRect rect;
  long long v[4];
  std::istringstream in(val);
  for (int i = 0; i < 4; ++i) {
    std::string tok;
    if (!std::getline(in, tok, ','))
      raise(Errc::ConfigError, "crop needs r0,c0,rows,cols, got '" + val + "'");
    v[i] = detail::parseConfigInt("crop", detail::trimmed(tok));
  }
  std::string rest;
  if (std::getline(in, rest))
    raise(Errc::ConfigError, "crop needs exactly four fields: '" + val + "'");
  rect.row0 = v[0];
  rect.col0 = v[1];
  rect.rows = v[2];
  rect.cols = v[3];
  return rect;
}

/// Applies key=value lines over `base`. Unknown keys are errors so typos
/// never pass silently.
inline PipelineConfig applyConfigText(const std::string& text,
                                      PipelineConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = detail::trimmed(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      raise(Errc::ConfigError,
            "line " + std::to_string(lineno) + ": expected key = value");
    std::string key = detail::trimmed(t.substr(0, eq));
    std::string val = detail::trimmed(t.substr(eq + 1));
    if (key == "crop") {
      if (val == "none")
        base.crop.reset();
      else
        base.crop = parseCropSpec(val);
    } else if (key == "otsu") {
      base.otsu = detail::parseConfigBool(key, val);
    } else if (key == "otsu_bins") {
      base.otsu_bins = static_cast<int>(detail::parseConfigInt(key, val));
    } else if (key == "sigma") {
      base.sigma = detail::parseConfigDouble(key, val);
    } else if (key == "radius") {
      base.radius = static_cast<int>(detail::parseConfigInt(key, val));
    } else if (key == "fit_window") {
      base.fit_window = static_cast<int>(detail::parseConfigInt(key, val));
    } else if (key == "pixel_pitch") {
      base.pixel_pitch = detail::parseConfigDouble(key, val);
    } else if (key == "eps_h") {
      base.eps_h = detail::parseConfigDouble(key, val);
    } else if (key == "eps_k") {
      base.eps_k = detail::parseConfigDouble(key, val);
    } else if (key == "k_threshold") {
      base.k_threshold = detail::parseConfigDouble(key, val);
    } else if (key == "top_n_nose") {
      base.top_n_nose = static_cast<int>(detail::parseConfigInt(key, val));
    } else if (key == "min_separation") {
      base.min_separation = detail::parseConfigDouble(key, val);
    } else {
      raise(Errc::ConfigError, "unknown config key '" + key + "'");
    }
  }
  return base;
}

inline PipelineConfig loadConfigFile(const std::string& path,
                                     PipelineConfig base) {
  std::ifstream in(path);
  if (!in) raise(Errc::ConfigError, "cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return applyConfigText(buf.str(), base);
}

}  // namespace hk
