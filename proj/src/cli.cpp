#include "yoco/cli.hpp"

#include <spdlog/spdlog.h>

#include <cstdio>
#include <exception>
#include <iostream>

#include "yoco/camera.hpp"
#include "yoco/errors.hpp"
#include "yoco/extraction.hpp"
#include "yoco/metrics.hpp"
#include "yoco/optimizer.hpp"
#include "yoco/parallel.hpp"
#include "yoco/synth.hpp"

namespace yoco::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kExtractionStage = 0x45585452u;  // "EXTR"

// Failure tagged with the pipeline stage it came from.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

int report_failure(const std::string& command, const std::string& stage, const std::string& what) {
  std::cerr << "yoco " << command << ": error [" << stage << "]: " << what << '\n';
  return kExitFailure;
}

template <typename Fn>
auto tagged(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const ExtractionError& e) {
    throw StageError("extraction/" + std::string(to_string(e.stage())), e.what());
  } catch (const ParseError& e) {
    throw StageError("parse", e.what());
  } catch (const IoError& e) {
    throw StageError("io", e.what());
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

struct PreparedFrame {
  CalibrationFrame frame;
  ExtractionDiagnostics diagnostics;
  std::vector<std::size_t> indices;
};

PreparedFrame prepare_frame(const fs::path& frame_path, const io::Config& config,
                            std::size_t index) {
  const io::FrameFile ff = tagged("parse", [&] { return io::read_frame_file(frame_path); });
  const fs::path cloud_path = ff.resolve_cloud(frame_path);
  if (!fs::exists(cloud_path)) {
    throw StageError("io", "cloud file '" + cloud_path.string() + "' referenced by '" +
                               frame_path.string() + "' does not exist");
  }
  const PointCloud cloud = tagged("parse", [&] { return io::read_point_file(cloud_path); });

  PreparedFrame out;
  double prior = 0.0;
  if (ff.corners) {
    out.frame.board_pose = tagged("camera", [&] {
      return estimate_board_pose(ff.intrinsics, ff.board_spec, *ff.corners);
    });
    prior = tagged("camera", [&] {
      return estimate_board_distance(ff.intrinsics, ff.board_spec, *ff.corners);
    });
  } else {
    out.frame.board_pose = BoardPose{*ff.board_pose, 0.0};
    prior = (invert(*ff.board_pose) * ff.board_spec.center()).norm();
  }
  spdlog::debug("frame {}: prior distance {:.4f} m, {} points", frame_path.string(), prior,
                cloud.size());

  ExtractionParams params = config.extraction;
  params.seed = derive_seed(config.seed, kExtractionStage, index);
  params.jobs = 1;
  ExtractionResult ex = tagged("extraction", [&] { return extract_board(cloud, prior, params); });
  spdlog::debug("frame {}: {} clusters, {} board points", frame_path.string(),
                ex.diagnostics.cluster_count, ex.board.size());
  out.frame.board_points = std::move(ex.board);
  out.diagnostics = std::move(ex.diagnostics);
  out.indices = std::move(ex.indices);
  return out;
}

std::string format_g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

}  // namespace

io::Config effective_config(const CommonOptions& opts) {
  io::Config c = opts.params ? io::read_params_file(*opts.params) : io::Config{};
  if (opts.seed) c.seed = *opts.seed;
  if (opts.jobs) {
    if (*opts.jobs < 1) throw InvalidArgument("--jobs must be at least 1");
    c.jobs = *opts.jobs;
  }
  c.extraction.seed = c.seed;
  c.extraction.jobs = c.jobs;
  return c;
}

fs::path diagnostics_path(const fs::path& out_path) {
  fs::path p = out_path;
  p.replace_extension(".diagnostics.json");
  return p;
}

int cmd_simulate(const std::optional<fs::path>& scene_file, std::size_t n_frames,
                 const fs::path& out_dir, const CommonOptions& opts) {
  try {
    if (n_frames < 1) throw StageError("args", "need at least one frame");
    io::SceneFile scene = tagged("parse", [&] {
      return scene_file ? io::read_scene_file(*scene_file) : io::SceneFile{synth::room_preset()};
    });
    if (opts.seed) scene.spec.seed = *opts.seed;
    const auto frames = tagged("simulate", [&] {
      return synth::generate_suite(scene.spec, n_frames, scene.orientation_spread_deg);
    });
    tagged("io", [&] {
      fs::create_directories(out_dir);
      for (const auto& f : frames) {
        char stem[32];
        std::snprintf(stem, sizeof(stem), "frame_%03zu", f.index);
        io::write_point_file(out_dir / (std::string(stem) + ".xyz"), f.cloud);
        io::write_label_file(out_dir / (std::string(stem) + ".labels"), f.labels);
        io::FrameFile ff;
        ff.cloud = std::string(stem) + ".xyz";
        ff.intrinsics = scene.spec.camera.intrinsics;
        ff.board_spec = scene.spec.board;
        ff.corners = f.corners;
        io::write_frame_file(out_dir / (std::string(stem) + ".json"), ff);
      }
      io::write_ground_truth_file(out_dir / "gt.json",
                                  io::GroundTruthFile{scene.spec.ground_truth, scene.spec.board_poses});
      io::write_text_atomic(out_dir / "scene.json", io::dump_canonical(io::to_json(scene)));
    });
    spdlog::info("wrote {} frame(s) to {}", frames.size(), out_dir.string());
    return kExitOk;
  } catch (const StageError& e) {
    return report_failure("simulate", e.stage(), e.what());
  }
}

int cmd_extract(const fs::path& frame_file, const fs::path& out_path, const CommonOptions& opts) {
  try {
    const io::Config config = tagged("config", [&] { return effective_config(opts); });
    const PreparedFrame pf = prepare_frame(frame_file, config, 0);
    tagged("io", [&] {
      io::write_point_file(out_path, pf.frame.board_points);
      io::Json diag = io::to_json(pf.diagnostics);
      diag["frame"] = frame_file.generic_string();
      diag["config"] = io::to_json(config);
      diag["version"] = io::kToolVersion;
      io::write_text_atomic(diagnostics_path(out_path), io::dump_canonical(diag));
    });
    spdlog::info("extracted {} board points from {}", pf.frame.board_points.size(),
                 frame_file.string());
    return kExitOk;
  } catch (const StageError& e) {
    return report_failure("extract", e.stage(), e.what());
  }
}

int cmd_calibrate(const std::vector<fs::path>& frame_files, const fs::path& out_path,
                  const CommonOptions& opts) {
  try {
    if (frame_files.empty()) throw StageError("args", "need at least one frame file");
    const io::Config config = tagged("config", [&] { return effective_config(opts); });

    std::vector<PreparedFrame> prepared(frame_files.size());
    parallel_for(frame_files.size(), config.jobs, [&](std::size_t i) {
      try {
        prepared[i] = prepare_frame(frame_files[i], config, i);
      } catch (const StageError& e) {
        throw StageError(e.stage(), "frame '" + frame_files[i].string() + "': " + e.what());
      }
    });

    std::vector<CalibrationFrame> frames;
    frames.reserve(prepared.size());
    for (const auto& p : prepared) frames.push_back(p.frame);
    const ExtrinsicEstimate est = tagged("solve", [&] { return solve_extrinsics(frames, config.solver); });

    io::ResultFile r;
    r.rotation = est.transform.rotation();
    r.translation = est.transform.translation();
    r.rms_residual = est.rms_residual;
    r.initial_cost = est.initial_cost;
    r.final_cost = est.final_cost;
    r.iterations = est.iterations;
    r.converged = est.converged;
    r.observability = io::to_json(est.observability);
    for (std::size_t i = 0; i < prepared.size(); ++i) {
      io::Json d = io::to_json(prepared[i].diagnostics);
      d["frame"] = frame_files[i].generic_string();
      d["board_points"] = prepared[i].frame.board_points.size();
      d["corner_residual_px"] = prepared[i].frame.board_pose.residual_px;
      r.frames.push_back(d);
    }
    r.config = io::to_json(config);
    tagged("io", [&] { io::write_result_file(out_path, r); });

    if (!est.converged) {
      return report_failure("calibrate", "solve",
                            "solver did not converge in " + std::to_string(est.iterations) +
                                " iterations (result written to '" + out_path.string() + "')");
    }
    spdlog::info("converged in {} iterations, rms residual {:.3e} m", est.iterations,
                 est.rms_residual);
    if (est.observability.warning) {
      std::cerr << "yoco calibrate: warning: " << *est.observability.warning << '\n';
      return kExitDegenerate;
    }
    return kExitOk;
  } catch (const StageError& e) {
    return report_failure("calibrate", e.stage(), e.what());
  }
}

int cmd_evaluate(const fs::path& result_file, const fs::path& ground_truth_file,
                 const fs::path& out_csv) {
  try {
    const io::ResultFile r = tagged("parse", [&] { return io::read_result_file(result_file); });
    const io::GroundTruthFile g =
        tagged("parse", [&] { return io::read_ground_truth_file(ground_truth_file); });
    const CalibrationErrors e = calibration_errors(r.transform(), g.lidar_to_camera);
    std::string row;
    for (const double v : e.per_axis_rotation) row += format_g(v) + ',';
    for (const double v : e.per_axis_translation) row += format_g(v) + ',';
    row += format_g(e.rotation_error_deg) + ',' + format_g(e.translation_error_m);
    tagged("io", [&] {
      io::write_text_atomic(out_csv, std::string(kEvaluateCsvHeader) + '\n' + row + '\n');
    });
    std::cout << "rotation error " << format_g(e.rotation_error_deg) << " deg (roll "
              << format_g(e.per_axis_rotation[0]) << ", pitch " << format_g(e.per_axis_rotation[1])
              << ", yaw " << format_g(e.per_axis_rotation[2]) << "; Z-Y-X Euler)\n"
              << "translation error " << format_g(e.translation_error_m) << " m (x "
              << format_g(e.per_axis_translation[0]) << ", y " << format_g(e.per_axis_translation[1])
              << ", z " << format_g(e.per_axis_translation[2]) << ")\n";
    return kExitOk;
  } catch (const StageError& e) {
    return report_failure("evaluate", e.stage(), e.what());
  }
}

}  // namespace yoco::cli
