// yoco: LiDAR-camera extrinsic calibration from checkerboard frames.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "yoco/cli.hpp"

namespace {

void setup_logging(bool verbose) {
  auto logger = spdlog::stderr_color_mt("yoco");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("YOCO_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
  if (verbose) spdlog::set_level(spdlog::level::debug);
}

void add_common(CLI::App* cmd, yoco::cli::CommonOptions& opts, bool with_params = true) {
  if (with_params) {
    cmd->add_option("--params", opts.params, "JSON file with extraction/solver parameters")
        ->check(CLI::ExistingFile);
    cmd->add_option("--jobs", opts.jobs, "Worker threads")->check(CLI::PositiveNumber);
  }
  cmd->add_option("--seed", opts.seed, "Top-level random seed");
  cmd->add_flag("--verbose,-v", opts.verbose, "Debug logging");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiDAR-camera extrinsic calibration"};
  app.require_subcommand(1);
  app.set_version_flag("--version", yoco::io::kToolVersion);

  yoco::cli::CommonOptions opts;
  std::filesystem::path out;

  auto* sim = app.add_subcommand("simulate", "Generate synthetic calibration frames");
  std::filesystem::path scene;
  std::size_t n_frames = 3;
  sim->add_option("scene", scene, "Scene JSON (default: room preset)");
  sim->add_option("--frames,-n", n_frames, "Number of frames")->check(CLI::PositiveNumber);
  sim->add_option("--out", out, "Output directory")->required();
  add_common(sim, opts, false);

  auto* ext = app.add_subcommand("extract", "Extract the board points of one frame");
  std::filesystem::path frame;
  ext->add_option("frame", frame, "Frame JSON")->required();
  ext->add_option("--out", out, "Output point file")->required();
  add_common(ext, opts);

  auto* cal = app.add_subcommand("calibrate", "Estimate the LiDAR -> camera extrinsic");
  std::vector<std::filesystem::path> frames;
  cal->add_option("frames", frames, "Frame JSON files")->required();
  cal->add_option("--out", out, "Result JSON")->required();
  add_common(cal, opts);

  auto* ev = app.add_subcommand("evaluate", "Compare a result with ground truth");
  std::filesystem::path result;
  std::filesystem::path gt;
  ev->add_option("result", result, "Result JSON")->required();
  ev->add_option("ground_truth", gt, "Ground-truth JSON")->required();
  ev->add_option("--out", out, "Output CSV")->required();
  ev->add_flag("--verbose,-v", opts.verbose, "Debug logging");

  CLI11_PARSE(app, argc, argv);
  setup_logging(opts.verbose);

  if (sim->parsed()) {
    return yoco::cli::cmd_simulate(scene.empty() ? std::nullopt : std::optional(scene), n_frames,
                                   out, opts);
  }
  if (ext->parsed()) return yoco::cli::cmd_extract(frame, out, opts);
  if (cal->parsed()) return yoco::cli::cmd_calibrate(frames, out, opts);
  return yoco::cli::cmd_evaluate(result, gt, out);
}
