// t4d: dense 4D point tracks -> motion maps, novel-view renders, and
// dataset quality reports, plus a small flow-matching lab.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "t4d/container.hpp"
#include "t4d/flow.hpp"
#include "t4d/geometry.hpp"
#include "t4d/image_io.hpp"
#include "t4d/motion.hpp"
#include "t4d/motion_codec.hpp"
#include "t4d/quality.hpp"
#include "t4d/render.hpp"
#include "t4d/validate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) t4d::fail(t4d::ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_file(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    t4d::fail(t4d::ErrorCode::InvalidArgument,
              path.string() + " is not valid JSON: " + e.what());
  }
}

t4d::RenderConfig render_config_from_json(const json& j) {
  t4d::RenderConfig cfg;
  cfg.width = j.value("width", 0);
  cfg.height = j.value("height", 0);
  cfg.splat_radius = j.value("splat_radius", 1);
  cfg.z_near = j.value("z_near", 1e-2);
  if (j.contains("background")) {
    const json& b = j.at("background");
    if (!b.is_array() || b.size() != 3)
      t4d::fail(t4d::ErrorCode::InvalidArgument, "background must be a 3-element array");
    for (int i = 0; i < 3; ++i) cfg.background[i] = b[i].get<float>();
  }
  return cfg;
}

t4d::QualityThresholds thresholds_from_json(const json& j) {
  t4d::QualityThresholds th;
  th.max_invalid_fraction = j.value("max_invalid_fraction", th.max_invalid_fraction);
  th.depth_std_rel_max = j.value("depth_std_rel_max", th.depth_std_rel_max);
  th.scale_factor = j.value("scale_factor", th.scale_factor);
  th.max_render_diff = j.value("max_render_diff", th.max_render_diff);
  th.depth_anomalous_max = j.value("depth_anomalous_max", th.depth_anomalous_max);
  return th;
}

std::array<t4d::ChannelRange, 3> codec_range_from_json(const json& j) {
  std::array<t4d::ChannelRange, 3> range = t4d::kDefaultCodecRange;
  if (!j.is_array() || j.size() != 3)
    t4d::fail(t4d::ErrorCode::InvalidArgument, "codec_range must be [[lo,hi],[lo,hi],[lo,hi]]");
  for (int c = 0; c < 3; ++c) {
    range[c].lo = j[c][0].get<float>();
    range[c].hi = j[c][1].get<float>();
  }
  return range;
}

// Validates before any processing; a malformed track set is bad input.
t4d::T4dContents load_checked(const fs::path& path) {
  t4d::T4dContents c = t4d::load_t4d(path);
  t4d::ValidationReport report = t4d::validate(c.tracks);
  if (!report.ok()) {
    std::ostringstream msg;
    msg << path.string() << " violates " << report.violations.size()
        << " track invariant(s); run `t4d validate` for details";
    t4d::fail(t4d::ErrorCode::InvalidArgument, msg.str());
  }
  return c;
}

json validation_report_json(const t4d::ValidationReport& report) {
  json out;
  out["ok"] = report.ok();
  json violations = json::array();
  for (const t4d::Violation& v : report.violations) {
    violations.push_back({{"kind", v.kind == t4d::ViolationKind::Anchoring ? "anchoring"
                                                                           : "depth_encoding"},
                          {"t", v.t},
                          {"row", v.row},
                          {"col", v.col},
                          {"message", v.message}});
  }
  out["violations"] = violations;
  return out;
}

struct CommonArgs {
  std::string config_path;
  int threads = 0;
  bool render_occluded = false;
};

json load_config(const CommonArgs& common) {
  if (common.config_path.empty()) return json::object();
  return parse_json_file(common.config_path);
}

int cmd_validate(const std::string& input) {
  t4d::T4dContents c = t4d::load_t4d(input);
  t4d::ValidationReport report = t4d::validate(c.tracks);
  std::cout << validation_report_json(report).dump(2) << "\n";
  return report.ok() ? 0 : 2;
}

int cmd_normalize(const std::string& input, const std::string& out_path,
                  const CommonArgs& common) {
  json cfg = load_config(common);
  std::array<t4d::ChannelRange, 3> range = t4d::kDefaultCodecRange;
  if (cfg.contains("codec_range")) range = codec_range_from_json(cfg.at("codec_range"));

  t4d::T4dContents c = load_checked(input);
  t4d::PointCloudSequence pcs =
      t4d::tracks_to_pointclouds(c.tracks, c.colors, c.intrinsics, common.render_occluded);
  t4d::MotionTensor m = t4d::relative_motion(pcs);
  t4d::DepthMap z0 = t4d::frame0_depth(c.tracks);
  t4d::NormalizedMotion nm = t4d::normalize_motion(m, z0, c.intrinsics);
  t4d::MotionMap mm = t4d::encode_motion_map(nm, range);
  t4d::save_m4d(mm, out_path);
  std::cerr << "wrote " << out_path << " (" << mm.frames << " frames, " << mm.width << "x"
            << mm.height << ")\n";
  return 0;
}

// Resolves data-dependent trajectory defaults: orbit center falls back to the
// scene centroid, linear distance to 10% of the median scene depth.
t4d::TrajectorySpec resolve_trajectory(t4d::TrajectorySpec spec, const t4d::TrackSet& tracks,
                                       const t4d::CameraIntrinsics& k) {
  if (spec.kind == t4d::TrajectorySpec::Kind::Orbit && !spec.center)
    spec.center = t4d::scene_centroid(tracks, k);
  if (spec.kind == t4d::TrajectorySpec::Kind::Linear && !spec.distance)
    spec.distance = 0.1 * t4d::median_scene_depth(tracks);
  return spec;
}

int cmd_render(const std::string& input, const std::string& motion_path,
               const std::string& trajectory_path, const std::string& out_dir,
               const CommonArgs& common) {
  json cfg_json = load_config(common);
  t4d::RenderConfig cfg;
  if (cfg_json.contains("render")) cfg = render_config_from_json(cfg_json.at("render"));
  cfg.threads = common.threads;

  t4d::T4dContents c = load_checked(input);
  t4d::PointCloudSequence pcs =
      t4d::tracks_to_pointclouds(c.tracks, c.colors, c.intrinsics, common.render_occluded);

  if (!motion_path.empty()) {
    t4d::MotionMap mm = t4d::load_m4d(motion_path);
    if (mm.height != c.tracks.height() || mm.width != c.tracks.width())
      t4d::fail(t4d::ErrorCode::DimensionMismatch,
                "motion map grid does not match the track grid");
    t4d::NormalizedMotion nm = t4d::decode_motion_map(mm);
    t4d::DepthMap z0 = t4d::frame0_depth(c.tracks);
    t4d::MotionTensor m = t4d::denormalize_motion(nm, z0, c.intrinsics);
    pcs = t4d::compose_scene(pcs, m);
  }

  t4d::TrajectorySpec spec;
  if (!trajectory_path.empty()) {
    spec = t4d::TrajectorySpec::parse_json(read_file(trajectory_path));
  } else if (cfg_json.contains("trajectory")) {
    spec = t4d::TrajectorySpec::parse_json(cfg_json.at("trajectory").dump());
  } else {
    spec.kind = t4d::TrajectorySpec::Kind::Identity;
    spec.frames = pcs.frames;
  }
  spec = resolve_trajectory(spec, c.tracks, c.intrinsics);
  t4d::CameraTrajectory traj = t4d::make_trajectory(spec, c.intrinsics);

  auto [frames, mask] = t4d::render_sequence(pcs, traj, c.intrinsics, cfg);
  fs::path manifest = t4d::write_sequence(out_dir, frames, mask, spec.to_json(), cfg);
  std::cout << manifest.string() << "\n";
  std::cerr << "rendered " << frames.frames << " frames at " << frames.width << "x"
            << frames.height << " into " << out_dir << "\n";
  return 0;
}

int cmd_filter(const std::vector<std::string>& inputs, const std::string& thresholds_path,
               const std::string& out_path, const CommonArgs& common) {
  json cfg = load_config(common);
  t4d::QualityThresholds th;
  if (!thresholds_path.empty())
    th = thresholds_from_json(parse_json_file(thresholds_path));
  else if (cfg.contains("thresholds"))
    th = thresholds_from_json(cfg.at("thresholds"));

  std::ofstream out_file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    out_file.open(out_path, std::ios::trunc);
    if (!out_file)
      t4d::fail(t4d::ErrorCode::IoFailure, "cannot open " + out_path + " for writing");
    out = &out_file;
  }

  size_t passed = 0;
  for (const std::string& input : inputs) {
    t4d::T4dContents c = t4d::load_t4d(input);
    t4d::QualityReport report = t4d::run_filters(c.tracks, c.colors, c.intrinsics, th);
    if (report.pass) ++passed;
    (*out) << t4d::report_to_json(report, input) << "\n";
  }
  double rate = inputs.empty() ? 0.0 : static_cast<double>(passed) / inputs.size();
  std::cerr << "passed " << passed << "/" << inputs.size() << " samples (pass rate " << rate
            << ")\n";
  return 0;
}

int cmd_flow_demo(const std::string& config_path, const std::string& out_dir,
                  uint64_t seed_override, bool has_seed) {
  json cfg = parse_json_file(config_path);

  t4d::flow::TrainSpec spec;
  if (!cfg.contains("distribution"))
    t4d::fail(t4d::ErrorCode::InvalidArgument, "experiment config needs a distribution");
  const json& dist = cfg.at("distribution");
  for (const json& mean : dist.at("means"))
    spec.data.means.push_back(mean.get<std::vector<double>>());
  spec.data.stddev = dist.value("std", 1.0);
  spec.steps = cfg.value("steps", 1000);
  spec.learning_rate = cfg.value("lr", 0.02);
  spec.dataset_size = cfg.value("dataset_size", 512);
  spec.seed = cfg.value("seed", uint64_t{1});
  if (has_seed) spec.seed = seed_override;
  int hidden = cfg.value("hidden", 64);
  int sample_count = cfg.value("sample_count", 1024);
  int euler_steps = cfg.value("euler_steps", 64);

  int dim = spec.data.dim();
  t4d::Rng rng(spec.seed);
  t4d::flow::FlowField field = t4d::flow::FlowField::init(dim, hidden, rng);
  t4d::flow::TrainResult result = t4d::flow::train_toy(std::move(field), spec);

  fs::create_directories(out_dir);
  fs::path loss_path = fs::path(out_dir) / "loss.csv";
  {
    std::ofstream f(loss_path, std::ios::trunc);
    if (!f) t4d::fail(t4d::ErrorCode::IoFailure, "cannot open " + loss_path.string());
    f << "step,loss\n";
    for (size_t i = 0; i < result.loss_trace.size(); ++i)
      f << i << "," << result.loss_trace[i] << "\n";
  }
  fs::path samples_path = fs::path(out_dir) / "samples.csv";
  {
    std::ofstream f(samples_path, std::ios::trunc);
    if (!f) t4d::fail(t4d::ErrorCode::IoFailure, "cannot open " + samples_path.string());
    t4d::Rng sample_rng(spec.seed + 1);
    for (int i = 0; i < sample_count; ++i) {
      std::vector<double> x0(dim);
      for (double& v : x0) v = sample_rng.normal();
      std::vector<double> x1 = t4d::flow::euler_sample(result.field, std::move(x0), euler_steps);
      for (int d = 0; d < dim; ++d) f << (d ? "," : "") << x1[d];
      f << "\n";
    }
  }
  if (!result.loss_trace.empty())
    std::cerr << "loss " << result.loss_trace.front() << " -> " << result.loss_trace.back()
              << " over " << result.loss_trace.size() << " steps\n";
  std::cout << loss_path.string() << "\n" << samples_path.string() << "\n";
  return 0;
}

void emit_error(const char* code, const std::string& message) {
  json err{{"error", code}, {"message", message}};
  std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"4D point-track toolkit: motion maps, novel-view point renders, quality filters"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  CommonArgs common;
  app.add_option("--config", common.config_path, "Pipeline config JSON");
  app.add_option("--threads", common.threads, "Worker thread cap (results never depend on it)");
  uint64_t seed = 1;
  bool has_seed = false;
  app.add_option("--seed", seed, "RNG seed override")->each([&has_seed](const std::string&) {
    has_seed = true;
  });

  std::string input, motion_path, trajectory_path, out_path, thresholds_path;
  std::vector<std::string> inputs;

  CLI::App* validate = app.add_subcommand("validate", "Check track invariants of a .t4d file");
  validate->add_option("input", input, "Input .t4d file")->required();

  CLI::App* normalize =
      app.add_subcommand("normalize", "Tracks -> frustum-normalized motion map (.m4d)");
  normalize->add_option("input", input, "Input .t4d file")->required();
  normalize->add_option("--out", out_path, "Output .m4d path")->required();
  normalize->add_flag("--render-occluded", common.render_occluded,
                      "Treat occluded-but-tracked points as visible");

  CLI::App* render = app.add_subcommand("render", "Render a trajectory to frames + void masks");
  render->add_option("input", input, "Input .t4d file")->required();
  render->add_option("--motion", motion_path, "Motion map (.m4d) to compose onto frame 0");
  render->add_option("--trajectory", trajectory_path, "Trajectory spec JSON file");
  render->add_option("--out", out_path, "Output directory")->required();
  render->add_flag("--render-occluded", common.render_occluded,
                   "Treat occluded-but-tracked points as visible");

  CLI::App* filter = app.add_subcommand("filter", "Quality-filter .t4d samples, JSONL report");
  filter->add_option("inputs", inputs, "Input .t4d files")->required();
  filter->add_option("--thresholds", thresholds_path, "Thresholds JSON file");
  filter->add_option("--out", out_path, "Report path (default: stdout)");

  std::string flow_config;
  CLI::App* flow_demo = app.add_subcommand("flow-demo", "Train the toy flow-matching model");
  flow_demo->add_option("--config", flow_config, "Experiment spec JSON")->required();
  flow_demo->add_option("--out", out_path, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(input);
    if (normalize->parsed()) return cmd_normalize(input, out_path, common);
    if (render->parsed())
      return cmd_render(input, motion_path, trajectory_path, out_path, common);
    if (filter->parsed()) return cmd_filter(inputs, thresholds_path, out_path, common);
    if (flow_demo->parsed()) return cmd_flow_demo(flow_config, out_path, seed, has_seed);
  } catch (const t4d::Error& e) {
    emit_error(t4d::error_code_name(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 3;
  }
  return 3;
}
