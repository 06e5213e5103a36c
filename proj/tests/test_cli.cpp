#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "t4d/container.hpp"
#include "t4d/quality.hpp"
#include "synthetic.hpp"

using namespace t4d;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args) {
  fs::path dir = fs::temp_directory_path() / "t4d_cli_tests";
  fs::create_directories(dir);
  fs::path out_path = dir / "stdout.txt";
  fs::path err_path = dir / "stderr.txt";
  std::string cmd = std::string(T4D_CLI_PATH) + " " + args + " > " + out_path.string() + " 2> " +
                    err_path.string();
  int status = std::system(cmd.c_str());
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, slurp(out_path), slurp(err_path)};
}

fs::path work_dir() {
  fs::path dir = fs::temp_directory_path() / "t4d_cli_tests";
  fs::create_directories(dir);
  return dir;
}

fs::path write_sample(const char* name, const TrackSet& tracks, const ColorGrid& colors,
                      const CameraIntrinsics& k) {
  fs::path path = work_dir() / name;
  save_t4d(tracks, colors, k, path);
  return path;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("validate subcommand reports clean and broken files with matching exit codes") {
  CameraIntrinsics k = t4dtest::default_intrinsics(8, 6);
  DepthMap dm = t4dtest::wavy_depth(6, 8);
  TrackSet clean = t4dtest::clean_static_tracks(2, dm);
  ColorGrid colors = t4dtest::random_colors(6, 8, 1);
  fs::path clean_path = write_sample("clean.t4d", clean, colors, k);

  RunResult ok = run_cli("validate " + clean_path.string());
  CHECK(ok.exit_code == 0);
  CHECK(json::parse(ok.out).at("ok").get<bool>());

  TrackSet broken = clean;
  broken.at(0, 1, 1).u = 99.0f;
  fs::path broken_path = write_sample("broken.t4d", broken, colors, k);
  RunResult bad = run_cli("validate " + broken_path.string());
  CHECK(bad.exit_code == 2);
  json report = json::parse(bad.out);
  CHECK_FALSE(report.at("ok").get<bool>());
  CHECK(report.at("violations").size() == 1);

  RunResult missing = run_cli("validate /nonexistent/file.t4d");
  CHECK(missing.exit_code == 2);
  CHECK(json::parse(missing.err).contains("error"));
}

TEST_CASE("render on a static scene with an identity trajectory repeats one frame") {
  CameraIntrinsics k = t4dtest::default_intrinsics(16, 12);
  DepthMap dm = t4dtest::wavy_depth(12, 16);
  TrackSet tracks = t4dtest::clean_static_tracks(3, dm);
  ColorGrid colors = t4dtest::random_colors(12, 16, 2);
  fs::path input = write_sample("static.t4d", tracks, colors, k);

  fs::path traj = work_dir() / "identity.json";
  std::ofstream(traj) << R"({"kind":"identity","frames":3})";
  fs::path out_dir = work_dir() / "render_static";

  RunResult r = run_cli("render " + input.string() + " --trajectory " + traj.string() +
                        " --out " + out_dir.string());
  REQUIRE(r.exit_code == 0);
  json manifest = json::parse(read_bytes(out_dir / "manifest.json"));
  REQUIRE(manifest.at("frames").size() == 3);
  CHECK(manifest.at("trajectory").at("kind") == "identity");

  std::string f0 = read_bytes(out_dir / "frame_0000.ppm");
  CHECK_FALSE(f0.empty());
  CHECK(read_bytes(out_dir / "frame_0001.ppm") == f0);
  CHECK(read_bytes(out_dir / "frame_0002.ppm") == f0);
  CHECK(fs::exists(out_dir / "mask_0000.pgm"));
  CHECK(fs::exists(out_dir / "maskbin_0002.pgm"));
}

TEST_CASE("render is byte-identical across invocations and thread counts") {
  CameraIntrinsics k = t4dtest::default_intrinsics(16, 12);
  TrackSet tracks = t4dtest::moving_tracks(4, t4dtest::wavy_depth(12, 16), k, 3);
  ColorGrid colors = t4dtest::random_colors(12, 16, 4);
  fs::path input = write_sample("moving.t4d", tracks, colors, k);

  fs::path traj = work_dir() / "orbit.json";
  std::ofstream(traj) << R"({"kind":"orbit","angle_deg":40,"frames":4})";  // centroid default

  fs::path out_a = work_dir() / "render_a";
  fs::path out_b = work_dir() / "render_b";
  REQUIRE(run_cli("render " + input.string() + " --trajectory " + traj.string() + " --out " +
                  out_a.string() + " --threads 1")
              .exit_code == 0);
  REQUIRE(run_cli("render " + input.string() + " --trajectory " + traj.string() + " --out " +
                  out_b.string() + " --threads 8")
              .exit_code == 0);
  for (int t = 0; t < 4; ++t) {
    char frame[32], mask[32];
    std::snprintf(frame, sizeof(frame), "frame_%04d.ppm", t);
    std::snprintf(mask, sizeof(mask), "mask_%04d.pgm", t);
    CHECK(read_bytes(out_a / frame) == read_bytes(out_b / frame));
    CHECK(read_bytes(out_a / mask) == read_bytes(out_b / mask));
  }
  CHECK(read_bytes(out_a / "manifest.json") == read_bytes(out_b / "manifest.json"));

  // The resolved orbit center lands in the manifest.
  json manifest = json::parse(read_bytes(out_a / "manifest.json"));
  CHECK(manifest.at("trajectory").contains("center"));
}

TEST_CASE("normalize then render reproduces the direct render within codec error") {
  CameraIntrinsics k = t4dtest::default_intrinsics(24, 18);
  TrackSet tracks = t4dtest::moving_tracks(4, t4dtest::wavy_depth(18, 24), k, 5);
  ColorGrid colors = t4dtest::random_colors(18, 24, 6);
  fs::path input = write_sample("pipeline.t4d", tracks, colors, k);

  // A tight codec range keeps quantization error well under a pixel.
  fs::path cfg = work_dir() / "codec.json";
  std::ofstream(cfg) << R"({"codec_range":[[-0.25,0.25],[-0.25,0.25],[-0.25,0.25]]})";
  fs::path map = work_dir() / "pipeline.m4d";
  REQUIRE(run_cli("normalize " + input.string() + " --out " + map.string() + " --config " +
                  cfg.string())
              .exit_code == 0);

  fs::path traj = work_dir() / "id4.json";
  std::ofstream(traj) << R"({"kind":"identity","frames":4})";
  fs::path direct_dir = work_dir() / "direct";
  fs::path via_map_dir = work_dir() / "via_map";
  REQUIRE(run_cli("render " + input.string() + " --trajectory " + traj.string() + " --out " +
                  direct_dir.string())
              .exit_code == 0);
  REQUIRE(run_cli("render " + input.string() + " --motion " + map.string() + " --trajectory " +
                  traj.string() + " --out " + via_map_dir.string())
              .exit_code == 0);

  size_t total = 0, differing = 0;
  double abs_diff = 0.0;
  for (int t = 0; t < 4; ++t) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04d.ppm", t);
    std::string a = read_bytes(direct_dir / name);
    std::string b = read_bytes(via_map_dir / name);
    REQUIRE(a.size() == b.size());
    size_t start = 0;  // pixel data starts after the third header newline
    for (int nl = 0; nl < 3; ++nl) start = a.find('\n', start) + 1;
    for (size_t i = start; i < a.size(); ++i) {
      ++total;
      if (a[i] != b[i]) ++differing;
      abs_diff += std::abs(static_cast<int>(static_cast<unsigned char>(a[i])) -
                           static_cast<int>(static_cast<unsigned char>(b[i]))) /
                  255.0;
    }
  }
  CHECK(static_cast<double>(differing) / total < 0.02);
  CHECK(abs_diff / total < 0.02);
}

TEST_CASE("filter emits one JSONL line per sample with the constructed pass rate") {
  CameraIntrinsics k = t4dtest::default_intrinsics(12, 10);
  DepthMap dm = t4dtest::wavy_depth(10, 12);
  ColorGrid colors = t4dtest::random_colors(10, 12, 7);

  std::vector<std::string> paths;
  for (int i = 0; i < 3; ++i)
    paths.push_back(
        write_sample(("clean" + std::to_string(i) + ".t4d").c_str(),
                     t4dtest::clean_static_tracks(2, dm), colors, k)
            .string());
  paths.push_back(write_sample("corrupt0.t4d",
                               t4dtest::corrupt_with_sentinels(
                                   t4dtest::clean_static_tracks(2, dm), 0.2, 8),
                               colors, k)
                      .string());
  paths.push_back(write_sample("corrupt1.t4d", t4dtest::corrupt_with_dispersion(2, 10, 12, 9),
                               colors, k)
                      .string());

  std::string args = "filter";
  for (const std::string& p : paths) args += " " + p;
  RunResult r = run_cli(args);
  REQUIRE(r.exit_code == 0);

  // --out writes the same JSONL to a file instead of stdout.
  fs::path report = work_dir() / "report.jsonl";
  RunResult to_file = run_cli(args + " --out " + report.string());
  REQUIRE(to_file.exit_code == 0);
  CHECK(to_file.out.empty());
  CHECK(read_bytes(report) == r.out);

  std::istringstream lines(r.out);
  std::string line;
  int count = 0, passed = 0;
  while (std::getline(lines, line)) {
    json rec = json::parse(line);
    REQUIRE(count < static_cast<int>(paths.size()));
    CHECK(rec.at("sample").get<std::string>() == paths[count]);  // order-preserving
    if (rec.at("pass").get<bool>()) ++passed;
    ++count;
  }
  CHECK(count == 5);
  CHECK(passed == 3);
  CHECK(r.err.find("passed 3/5") != std::string::npos);
}

TEST_CASE("flow-demo writes deterministic CSV outputs") {
  fs::path cfg = work_dir() / "exp.json";
  std::ofstream(cfg) << R"({"distribution":{"means":[[1.0,0.0],[-1.0,0.0]],"std":0.3},)"
                     << R"("hidden":16,"steps":120,"lr":0.05,"dataset_size":64,"seed":5,)"
                     << R"("sample_count":32,"euler_steps":16})";
  fs::path out_a = work_dir() / "flow_a";
  fs::path out_b = work_dir() / "flow_b";
  REQUIRE(run_cli("flow-demo --config " + cfg.string() + " --out " + out_a.string()).exit_code ==
          0);
  REQUIRE(run_cli("flow-demo --config " + cfg.string() + " --out " + out_b.string()).exit_code ==
          0);
  std::string loss = read_bytes(out_a / "loss.csv");
  CHECK(loss.substr(0, 10) == "step,loss\n");
  CHECK(loss == read_bytes(out_b / "loss.csv"));
  CHECK(read_bytes(out_a / "samples.csv") == read_bytes(out_b / "samples.csv"));

  // A different seed changes the trace.
  fs::path out_c = work_dir() / "flow_c";
  REQUIRE(run_cli("--seed 99 flow-demo --config " + cfg.string() + " --out " + out_c.string())
              .exit_code == 0);
  CHECK(read_bytes(out_c / "loss.csv") != loss);
}

TEST_CASE("bad inputs exit with code 2 and machine-readable errors") {
  RunResult r = run_cli("normalize /nonexistent.t4d --out /tmp/x.m4d");
  CHECK(r.exit_code == 2);
  json err = json::parse(r.err);
  CHECK(err.contains("error"));
  CHECK(err.contains("message"));

  // A structurally broken track set is rejected before processing.
  CameraIntrinsics k = t4dtest::default_intrinsics(8, 6);
  TrackSet broken = t4dtest::clean_static_tracks(2, t4dtest::wavy_depth(6, 8));
  broken.at(0, 0, 0).d = -5.0f;  // raw invalid depth, not the sentinel
  fs::path path = write_sample("reject.t4d", broken, t4dtest::random_colors(6, 8, 10), k);
  RunResult rej = run_cli("normalize " + path.string() + " --out " + (work_dir() / "x.m4d").string());
  CHECK(rej.exit_code == 2);
}
