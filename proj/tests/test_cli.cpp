#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "test_util.hpp"
#include "yoco/cli.hpp"
#include "yoco/errors.hpp"
#include "yoco/io.hpp"
#include "yoco/metrics.hpp"

namespace yoco {
namespace {

namespace fs = std::filesystem;
using testing::kDeg;

std::vector<fs::path> frame_files(const fs::path& dir, std::size_t n) {
  std::vector<fs::path> out;
  for (std::size_t i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%03zu.json", i);
    out.push_back(dir / name);
  }
  return out;
}

// One simulated room data set shared by the tests in this file.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = testing::temp_dir("cli_sim");
    ASSERT_EQ(cli::cmd_simulate(std::nullopt, 3, dir_, {}), cli::kExitOk);
  }
  static fs::path dir_;
};
fs::path CliTest::dir_;

TEST_F(CliTest, SimulateWritesFramesAndGroundTruth) {
  for (const auto& f : frame_files(dir_, 3)) {
    EXPECT_TRUE(fs::exists(f));
    const auto ff = io::read_frame_file(f);
    EXPECT_TRUE(fs::exists(ff.resolve_cloud(f)));
    EXPECT_TRUE(ff.corners.has_value());
  }
  EXPECT_TRUE(fs::exists(dir_ / "gt.json"));
  EXPECT_FALSE(fs::exists(dir_ / "frame_003.json"));
}

TEST_F(CliTest, SimulateIsByteReproducible) {
  const auto other = testing::temp_dir("cli_sim_again");
  ASSERT_EQ(cli::cmd_simulate(std::nullopt, 3, other, {}), cli::kExitOk);
  for (const auto& e : fs::directory_iterator(dir_)) {
    EXPECT_EQ(io::read_text(e.path()), io::read_text(other / e.path().filename()))
        << e.path().filename();
  }
}

TEST_F(CliTest, CalibrateThreeFrames) {
  const auto out = dir_ / "result.json";
  ASSERT_EQ(cli::cmd_calibrate(frame_files(dir_, 3), out, {}), cli::kExitOk);
  const auto r = io::read_result_file(out);
  const auto gt = io::read_ground_truth_file(dir_ / "gt.json");
  const auto e = calibration_errors(r.transform(), gt.lidar_to_camera);
  EXPECT_LT(e.rotation_error_deg, 1e-6);
  EXPECT_LT(e.translation_error_m, 1e-6);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.frames.size(), 3u);
  EXPECT_EQ(r.config["seed"], 0);
  EXPECT_EQ(r.version, io::kToolVersion);

  const auto csv = dir_ / "eval.csv";
  ASSERT_EQ(cli::cmd_evaluate(out, dir_ / "gt.json", csv), cli::kExitOk);
  std::istringstream is(io::read_text(csv));
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  EXPECT_EQ(header, cli::kEvaluateCsvHeader);
  std::stringstream cells(row);
  std::string cell;
  while (std::getline(cells, cell, ',')) EXPECT_LT(std::stod(cell), 1e-6);
}

TEST_F(CliTest, CalibrateIsDeterministicAcrossJobs) {
  cli::CommonOptions a;
  a.jobs = 1;
  cli::CommonOptions b;
  b.jobs = 3;
  ASSERT_EQ(cli::cmd_calibrate(frame_files(dir_, 3), dir_ / "r1.json", a), cli::kExitOk);
  ASSERT_EQ(cli::cmd_calibrate(frame_files(dir_, 3), dir_ / "r3.json", b), cli::kExitOk);
  auto ja = io::read_json(dir_ / "r1.json");
  auto jb = io::read_json(dir_ / "r3.json");
  // The echoed job count is the only permitted difference.
  ja["config"].erase("jobs");
  jb["config"].erase("jobs");
  EXPECT_EQ(io::dump_canonical(ja), io::dump_canonical(jb));
}

TEST_F(CliTest, SingleFrameExitsDegenerate) {
  ::testing::internal::CaptureStderr();
  const int code = cli::cmd_calibrate(frame_files(dir_, 1), dir_ / "single.json", {});
  const std::string err = ::testing::internal::GetCapturedStderr();
  EXPECT_EQ(code, cli::kExitDegenerate);
  EXPECT_NE(err.find("rank 1"), std::string::npos) << err;
}

TEST_F(CliTest, MissingCloudNamesPath) {
  auto ff = io::read_frame_file(frame_files(dir_, 1)[0]);
  ff.cloud = "does_not_exist.xyz";
  const auto bad = dir_ / "bad_frame.json";
  io::write_frame_file(bad, ff);
  ::testing::internal::CaptureStderr();
  const int code = cli::cmd_calibrate({bad}, dir_ / "bad.json", {});
  const std::string err = ::testing::internal::GetCapturedStderr();
  EXPECT_EQ(code, cli::kExitFailure);
  EXPECT_NE(err.find("does_not_exist.xyz"), std::string::npos) << err;
  EXPECT_NE(err.find("[io]"), std::string::npos) << err;
}

TEST_F(CliTest, EvaluateYawOffset) {
  const auto gt = io::read_ground_truth_file(dir_ / "gt.json");
  io::ResultFile r;
  r.rotation = testing::rot(Vector3::UnitZ(), 1 * kDeg) * gt.lidar_to_camera.rotation();
  r.translation = gt.lidar_to_camera.translation();
  io::write_result_file(dir_ / "yaw.json", r);
  ASSERT_EQ(cli::cmd_evaluate(dir_ / "yaw.json", dir_ / "gt.json", dir_ / "yaw.csv"), cli::kExitOk);
  std::istringstream is(io::read_text(dir_ / "yaw.csv"));
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  std::vector<double> v;
  std::stringstream cells(line);
  std::string cell;
  while (std::getline(cells, cell, ',')) v.push_back(std::stod(cell));
  ASSERT_EQ(v.size(), 8u);
  EXPECT_NEAR(v[2], 1.0, 1e-6);
  EXPECT_NEAR(v[6], 1.0, 1e-6);
  EXPECT_NEAR(v[7], 0.0, 1e-12);
}

TEST_F(CliTest, EvaluateParseError) {
  std::ofstream(dir_ / "junk.json") << "{";
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(cli::cmd_evaluate(dir_ / "junk.json", dir_ / "gt.json", dir_ / "x.csv"),
            cli::kExitFailure);
  EXPECT_NE(::testing::internal::GetCapturedStderr().find("[parse]"), std::string::npos);
}

TEST_F(CliTest, ExtractRoomRejectsDistractorByDensity) {
  const auto out = dir_ / "board0.xyz";
  ASSERT_EQ(cli::cmd_extract(frame_files(dir_, 1)[0], out, {}), cli::kExitOk);
  const auto diag = io::read_json(cli::diagnostics_path(out));
  const auto sel = diag["selected"].get<std::size_t>();
  const auto& cands = diag["candidates"];
  std::size_t rivals = 0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (i == sel || !cands[i]["passed_angle_filter"] || !cands[i]["within_tolerance"]) continue;
    ++rivals;
    EXPECT_LT(cands[i]["density"].get<std::size_t>(), cands[sel]["density"].get<std::size_t>());
  }
  EXPECT_GE(rivals, 1u);
  EXPECT_GT(io::read_point_file(out).size(), 1000u);
}

TEST(Cli, ExtractBoardOnlySingleCluster) {
  const auto dir = testing::temp_dir("cli_board_only");
  std::ofstream(dir / "scene.json") << R"({"preset": "board_only"})";
  ASSERT_EQ(cli::cmd_simulate(dir / "scene.json", 1, dir, {}), cli::kExitOk);
  ASSERT_EQ(cli::cmd_extract(dir / "frame_000.json", dir / "board.xyz", {}), cli::kExitOk);
  const auto diag = io::read_json(cli::diagnostics_path(dir / "board.xyz"));
  EXPECT_EQ(diag["cluster_count"], 1);
  EXPECT_EQ(diag["selected"], 0);
}

TEST(Cli, ExtractEmptyCloudFails) {
  const auto dir = testing::temp_dir("cli_empty");
  std::ofstream(dir / "empty.xyz") << "# nothing\n";
  io::FrameFile ff;
  ff.cloud = "empty.xyz";
  ff.intrinsics = CameraIntrinsics{800, 800, 640, 480, 1280, 960};
  ff.board_spec = BoardSpec{7, 9, 0.1};
  ff.board_pose = RigidTransform(Matrix3::Identity(), Vector3(0, 0, -2), Frame::kCamera, Frame::kWorld);
  io::write_frame_file(dir / "f.json", ff);
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(cli::cmd_extract(dir / "f.json", dir / "out.xyz", {}), cli::kExitFailure);
  EXPECT_NE(::testing::internal::GetCapturedStderr().find("extraction/ingest"), std::string::npos);
}

TEST(Cli, SimulateInfeasibleSpread) {
  const auto dir = testing::temp_dir("cli_infeasible");
  std::ofstream(dir / "scene.json") << R"({"orientation_spread_deg": 70})";
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(cli::cmd_simulate(dir / "scene.json", 3, dir / "out", {}), cli::kExitFailure);
  EXPECT_NE(::testing::internal::GetCapturedStderr().find("spread"), std::string::npos);
}

TEST(Cli, FlagsOverrideParamsFile) {
  const auto dir = testing::temp_dir("cli_params");
  std::ofstream(dir / "p.json") << R"({"seed": 4, "jobs": 2, "extraction": {"theta_deg": 40}})";
  cli::CommonOptions o;
  o.params = dir / "p.json";
  o.seed = 11;
  const io::Config c = cli::effective_config(o);
  EXPECT_EQ(c.seed, 11u);
  EXPECT_EQ(c.jobs, 2);
  EXPECT_DOUBLE_EQ(c.extraction.theta_deg, 40.0);
  EXPECT_DOUBLE_EQ(cli::effective_config({}).extraction.theta_deg, 45.0);
}

}  // namespace
}  // namespace yoco
