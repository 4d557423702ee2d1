#pragma once

// Command implementations behind the `yoco` executable. Each returns the
// process exit code and reports failures on stderr instead of throwing.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "yoco/io.hpp"

namespace yoco::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitDegenerate = 2;

/// Flags shared by every command. Flags override the params file, which
/// overrides built-in defaults.
struct CommonOptions {
  std::optional<std::filesystem::path> params;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  bool verbose = false;
};

/// Throws on unreadable or invalid params files.
io::Config effective_config(const CommonOptions& opts);

/// Writes frame_NNN.{json,xyz,labels} and gt.json into `out_dir`. Without a
/// scene file the room preset is used.
int cmd_simulate(const std::optional<std::filesystem::path>& scene_file, std::size_t n_frames,
                 const std::filesystem::path& out_dir, const CommonOptions& opts);

/// Writes the extracted board points to `out_path` and the diagnostics to
/// diagnostics_path(out_path).
int cmd_extract(const std::filesystem::path& frame_file, const std::filesystem::path& out_path,
                const CommonOptions& opts);

std::filesystem::path diagnostics_path(const std::filesystem::path& out_path);

/// 0 when converged, 2 when converged with a degeneracy warning, 1 otherwise.
int cmd_calibrate(const std::vector<std::filesystem::path>& frame_files,
                  const std::filesystem::path& out_path, const CommonOptions& opts);

inline constexpr const char* kEvaluateCsvHeader =
    "roll_deg,pitch_deg,yaw_deg,x_m,y_m,z_m,rotation_deg,translation_m";

/// Writes the header and one row of absolute errors.
int cmd_evaluate(const std::filesystem::path& result_file,
                 const std::filesystem::path& ground_truth_file,
                 const std::filesystem::path& out_csv);

}  // namespace yoco::cli
