#include "hk/cli_app.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "hk/eval.hpp"
#include "hk/pipeline.hpp"
#include "hk/range_io.hpp"
#include "hk/serialize.hpp"
#include "hk/synth.hpp"

namespace hk {
namespace {

int exitCodeFor(Errc c) {
  switch (c) {
    case Errc::FileNotFound:
    case Errc::ParseError:
    case Errc::DimensionMismatch:
    case Errc::RectOutOfBounds:
    case Errc::DegenerateHistogram:
      return 2;
    case Errc::NoCandidates:
    case Errc::SingleCandidate:
    case Errc::NoValidPixels:
    case Errc::InsufficientSupport:
    case Errc::CenterInvalid:
      return 3;
    case Errc::BadParams:
    case Errc::ConfigError:
      return 4;
  }
  return 1;
}

/// Shared pipeline flags plus the bookkeeping needed to layer them over a
/// config file: a flag only overrides when it was actually given.
struct ConfigFlags {
  std::string config_path;
  std::string crop_spec;
  int otsu_bins = 0;
  double sigma = 0;
  int radius = 0;
  int fit_window = 0;
  double pixel_pitch = 0;
  double eps_h = 0, eps_k = 0;
  double k_threshold = 0;
  int top_n_nose = 0;
  double min_separation = 0;

  CLI::Option* o_config = nullptr;
  CLI::Option* o_crop = nullptr;
  CLI::Option* o_no_threshold = nullptr;
  CLI::Option* o_otsu_bins = nullptr;
  CLI::Option* o_sigma = nullptr;
  CLI::Option* o_radius = nullptr;
  CLI::Option* o_fit_window = nullptr;
  CLI::Option* o_pixel_pitch = nullptr;
  CLI::Option* o_eps_h = nullptr;
  CLI::Option* o_eps_k = nullptr;
  CLI::Option* o_k_threshold = nullptr;
  CLI::Option* o_top_n_nose = nullptr;
  CLI::Option* o_min_separation = nullptr;
};

void addConfigFlags(CLI::App* cmd, ConfigFlags& f) {
  f.o_config =
      cmd->add_option("--config", f.config_path,
                      "config file with key = value lines (CLI flags win)");
  f.o_crop = cmd->add_option(
      "--crop", f.crop_spec, "crop window r0,c0,rows,cols ('none' disables)");
  f.o_no_threshold = cmd->add_flag(
      "--no-threshold", "skip Otsu background removal");
  f.o_otsu_bins =
      cmd->add_option("--otsu-bins", f.otsu_bins, "histogram bins (256)");
  f.o_sigma = cmd->add_option(
      "--sigma", f.sigma, "smoothing sigma in pixels, 0 disables (1.0)");
  f.o_radius =
      cmd->add_option("--radius", f.radius, "smoothing kernel half-width (2)");
  f.o_fit_window = cmd->add_option(
      "--fit-window", f.fit_window, "fit window half-width (2, i.e. 5x5)");
  f.o_pixel_pitch = cmd->add_option(
      "--pixel-pitch", f.pixel_pitch, "grid spacing in depth units (1.0)");
  f.o_eps_h = cmd->add_option(
      "--eps-h", f.eps_h, "zero band for the mean curvature sign (1e-6)");
  f.o_eps_k = cmd->add_option(
      "--eps-k", f.eps_k, "zero band for the Gaussian curvature sign (1e-6)");
  f.o_k_threshold = cmd->add_option(
      "--k-threshold", f.k_threshold, "candidate K floor (1e-4)");
  f.o_top_n_nose = cmd->add_option(
      "--top-n-nose", f.top_n_nose, "nose candidates kept (5)");
  f.o_min_separation = cmd->add_option(
      "--min-separation", f.min_separation,
      "minimum eye corner separation in pixels (8)");
}

PipelineConfig resolveConfig(const ConfigFlags& f, PipelineConfig base) {
  PipelineConfig cfg = base;
  if (f.o_config->count()) cfg = loadConfigFile(f.config_path, cfg);
  if (f.o_crop->count()) {
    if (f.crop_spec == "none")
      cfg.crop.reset();
    else
      cfg.crop = parseCropSpec(f.crop_spec);
  }
  if (f.o_no_threshold->count()) cfg.otsu = false;
  if (f.o_otsu_bins->count()) cfg.otsu_bins = f.otsu_bins;
  if (f.o_sigma->count()) cfg.sigma = f.sigma;
  if (f.o_radius->count()) cfg.radius = f.radius;
  if (f.o_fit_window->count()) cfg.fit_window = f.fit_window;
  if (f.o_pixel_pitch->count()) cfg.pixel_pitch = f.pixel_pitch;
  if (f.o_eps_h->count()) cfg.eps_h = f.eps_h;
  if (f.o_eps_k->count()) cfg.eps_k = f.eps_k;
  if (f.o_k_threshold->count()) cfg.k_threshold = f.k_threshold;
  if (f.o_top_n_nose->count()) cfg.top_n_nose = f.top_n_nose;
  if (f.o_min_separation->count()) cfg.min_separation = f.min_separation;
  validateConfig(cfg);
  return cfg;
}

RangeImaged loadInput(const std::string& path) {
  auto format = sniffFormat(path);
  if (!format)
    raise(Errc::ParseError,
          path + ": unrecognized format (expected RIG text or P5 PGM)");
  RangeImaged img = loadRangeImage<double>(path, *format);
  img.validate();
  return img;
}

void writeTextOutput(const std::string& text, const std::string& out_path,
                     std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) raise(Errc::FileNotFound, "cannot write " + out_path);
  f << text;
}

struct DetectArgs {
  std::string input;
  std::string format = "json";
  std::string out_path;
  ConfigFlags flags;
};

int runDetect(const DetectArgs& a, std::ostream& out) {
  PipelineConfig cfg = resolveConfig(a.flags, PipelineConfig{});
  RangeImaged img = loadInput(a.input);
  PipelineOutput<double> res = runPipeline(img, cfg);
  std::string text = a.format == "csv"
                         ? landmarksCsv(res) + "\n"
                         : landmarksJson(res, cfg).dump(2) + "\n";
  writeTextOutput(text, a.out_path, out);
  if (res.landmarks.nose_error) return exitCodeFor(*res.landmarks.nose_error);
  if (res.landmarks.eye_error) return exitCodeFor(*res.landmarks.eye_error);
  return 0;
}

struct ClassifyArgs {
  std::string input;
  std::string out_path;
  ConfigFlags flags;
};

int runClassifyMap(const ClassifyArgs& a, std::ostream& out) {
  PipelineConfig cfg = resolveConfig(a.flags, PipelineConfig{});
  RangeImaged img = loadInput(a.input);
  PipelineOutput<double> res = runPipeline(img, cfg);
  writePgm8(renderClassMap(res.classes.classes), a.out_path);
  Json j;
  j["out"] = a.out_path;
  Json counts;
  for (int i = 0; i < kHKClassCount; ++i)
    counts[hkClassName(static_cast<HKClass>(i))] = res.classes.counts[i];
  j["counts"] = counts;
  j["otsu_threshold"] = res.otsu_threshold ? Json(*res.otsu_threshold)
                                           : Json(nullptr);
  j["params"] = configJson(cfg);
  out << j.dump(2) << "\n";
  return 0;
}

struct SynthArgs {
  std::string kind = "phantom";
  Index n = 128;
  double radius = 50;
  std::string out_path;
  std::string truth_path;
  std::string axis = "Y";
  double angle = 0;
  double noise_sigma = 0;
  std::uint64_t seed = 1;
  double pgm_scale = 0.001953125;  // 1/512
};

Axis parseAxis(const std::string& s) {
  if (s == "X" || s == "x") return Axis::X;
  if (s == "Y" || s == "y") return Axis::Y;
  if (s == "Z" || s == "z") return Axis::Z;
  raise(Errc::ConfigError, "axis must be X, Y or Z, got '" + s + "'");
}

bool endsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int runSynth(const SynthArgs& a, std::ostream& out) {
  const PoseSpec pose{parseAxis(a.axis), a.angle};
  validatePose(pose);

  RangeImaged img;
  std::optional<LandmarkTruth> truth;
  if (a.kind == "phantom") {
    PhantomSpecd spec;
    spec.n = a.n;
    Phantom<double> ph = rotatePhantom(makePhantom(spec), pose);
    img = std::move(ph.image);
    truth = ph.truth;
  } else {
    SurfaceKind kind;
    if (a.kind == "plane") kind = SurfaceKind::Plane;
    else if (a.kind == "hemisphere") kind = SurfaceKind::Hemisphere;
    else if (a.kind == "cylinder") kind = SurfaceKind::Cylinder;
    else if (a.kind == "saddle") kind = SurfaceKind::Saddle;
    else if (a.kind == "paraboloid") kind = SurfaceKind::Paraboloid;
    else
      raise(Errc::ConfigError, "unknown surface kind '" + a.kind + "'");
    if (!a.truth_path.empty())
      raise(Errc::ConfigError, "--truth requires --kind phantom");
    img = rotateAndRasterize(makeSurface<double>(kind, a.n, a.radius), pose);
  }
  if (a.noise_sigma > 0) img = addDepthNoise(img, a.noise_sigma, a.seed);

  if (a.out_path.empty())
    raise(Errc::ConfigError, "synth needs --out");
  if (endsWith(a.out_path, ".pgm"))
    savePgm16(img, a.out_path, a.pgm_scale);
  else
    saveAsciiGrid(img, a.out_path);

  if (!a.truth_path.empty()) {
    std::ofstream f(a.truth_path, std::ios::binary);
    if (!f) raise(Errc::FileNotFound, "cannot write " + a.truth_path);
    f << truthJson(*truth, pose).dump(2) << "\n";
  }

  Json j;
  j["kind"] = a.kind;
  j["n"] = a.n;
  j["out"] = a.out_path;
  j["truth"] = a.truth_path.empty() ? Json(nullptr) : Json(a.truth_path);
  j["pose"] = {{"axis", axisName(pose.axis)}, {"angle", pose.angle_deg}};
  j["noise_sigma"] = a.noise_sigma;
  j["seed"] = a.seed;
  out << j.dump(2) << "\n";
  return 0;
}

struct EvalArgs {
  int trials = 20;
  std::uint64_t seed = 1;
  std::string poses = "default";
  double noise_sigma = 0;
  std::string format = "text";
  std::string out_path;
  ConfigFlags flags;
};

std::vector<PoseSpec> parsePoses(const std::string& spec) {
  if (spec == "default") return defaultPoseGrid();
  if (spec == "frontal") return {PoseSpec{Axis::Y, 0.0}};
  std::vector<PoseSpec> poses;
  std::istringstream in(spec);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    std::size_t colon = tok.find(':');
    if (colon == std::string::npos)
      raise(Errc::ConfigError,
            "pose list entries look like AXIS:ANGLE, got '" + tok + "'");
    Axis axis = parseAxis(tok.substr(0, colon));
    const std::string num = tok.substr(colon + 1);
    char* end = nullptr;
    double angle = std::strtod(num.c_str(), &end);
    if (end != num.c_str() + num.size() || !std::isfinite(angle))
      raise(Errc::ConfigError, "bad pose angle '" + num + "'");
    poses.push_back({axis, angle});
  }
  if (poses.empty()) raise(Errc::ConfigError, "empty pose list");
  return poses;
}

int runEvalCmd(const EvalArgs& a, std::ostream& out) {
  EvalOptions opts;
  opts.config = resolveConfig(a.flags, evalPipelineConfig());
  opts.poses = parsePoses(a.poses);
  opts.trials = a.trials;
  opts.seed = a.seed;
  opts.noise_sigma = a.noise_sigma;
  EvalReport report = runEval<double>(opts);
  std::string text = a.format == "json" ? evalJson(report).dump(2) + "\n"
                                        : evalText(report);
  writeTextOutput(text, a.out_path, out);
  return 0;
}

}  // namespace

int runCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"range-image face landmarks from mean/Gaussian curvature"};
  app.name("hkface");
  app.require_subcommand(1);

  DetectArgs detect;
  CLI::App* cmd_detect = app.add_subcommand(
      "detect", "detect the nose tip and eye corners in a range image");
  cmd_detect->add_option("input", detect.input, "range image (RIG or PGM)")
      ->required();
  cmd_detect->add_option("--format", detect.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd_detect->add_option("--out", detect.out_path,
                         "write the report here instead of stdout");
  addConfigFlags(cmd_detect, detect.flags);

  ClassifyArgs classify_args;
  CLI::App* cmd_classify = app.add_subcommand(
      "classify-map", "write the per-pixel surface-class map as a PGM");
  cmd_classify
      ->add_option("input", classify_args.input, "range image (RIG or PGM)")
      ->required();
  cmd_classify->add_option("--out", classify_args.out_path, "output PGM path")
      ->required();
  addConfigFlags(cmd_classify, classify_args.flags);

  SynthArgs synth;
  CLI::App* cmd_synth = app.add_subcommand(
      "synth", "generate a synthetic surface or face phantom");
  cmd_synth->add_option(
      "--kind", synth.kind,
      "plane, hemisphere, cylinder, saddle, paraboloid or phantom");
  cmd_synth->add_option("--n", synth.n, "grid size (128)");
  cmd_synth->add_option("--radius", synth.radius, "surface radius (50)");
  cmd_synth->add_option("--out", synth.out_path,
                        "output image (.pgm binary, anything else RIG text)");
  cmd_synth->add_option("--truth", synth.truth_path,
                        "write the phantom's landmark sidecar JSON here");
  cmd_synth->add_option("--axis", synth.axis, "rotation axis X, Y or Z");
  cmd_synth->add_option("--angle", synth.angle, "rotation in degrees (0)");
  cmd_synth->add_option("--noise-sigma", synth.noise_sigma,
                        "Gaussian depth noise after rotation (0)");
  cmd_synth->add_option("--seed", synth.seed, "noise seed (1)");
  cmd_synth->add_option("--pgm-scale", synth.pgm_scale,
                        "PGM depth quantization step (1/512)");

  EvalArgs eval_args;
  CLI::App* cmd_eval = app.add_subcommand(
      "eval", "run the randomized pose sweep against ground truth");
  cmd_eval->add_option("--trials", eval_args.trials, "trials per cell (20)");
  cmd_eval->add_option("--seed", eval_args.seed, "sweep seed (1)");
  cmd_eval->add_option(
      "--poses", eval_args.poses,
      "'default', 'frontal', or AXIS:ANGLE[,AXIS:ANGLE...]");
  cmd_eval->add_option("--noise-sigma", eval_args.noise_sigma,
                       "Gaussian depth noise per trial (0)");
  cmd_eval->add_option("--format", eval_args.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  cmd_eval->add_option("--out", eval_args.out_path,
                       "write the report here instead of stdout");
  addConfigFlags(cmd_eval, eval_args.flags);

  std::vector<const char*> argv;
  argv.push_back("hkface");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    Json j{{"error",
            {{"stage", "cli"}, {"code", "ConfigError"},
             {"message", e.what()}}}};
    out << j.dump(2) << "\n";
    err << e.what() << "\n";
    return 4;
  }

  std::string stage = "cli";
  try {
    if (*cmd_detect) {
      stage = "detect";
      return runDetect(detect, out);
    }
    if (*cmd_classify) {
      stage = "classify-map";
      return runClassifyMap(classify_args, out);
    }
    if (*cmd_synth) {
      stage = "synth";
      return runSynth(synth, out);
    }
    stage = "eval";
    return runEvalCmd(eval_args, out);
  } catch (const Error& e) {
    out << stageErrorJson(stage, e).dump(2) << "\n";
    err << e.what() << "\n";
    return exitCodeFor(e.code());
  }
}

}  // namespace hk
