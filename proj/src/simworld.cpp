#include "vidmem/simworld.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "vidmem/rng.hpp"
#include "vidmem/serialize.hpp"

namespace vidmem {

namespace {

constexpr double kRayEps = 1e-9;

Eigen::Vector3d light_direction() {
  return Eigen::Vector3d(0.4, 0.8, 0.25).normalized();
}

double shade(const Eigen::Vector3d& normal) {
  return 0.35 + 0.65 * std::max(0.0, normal.dot(light_direction()));
}

// Value noise: hash of the quantized surface point and a surface id.
double texture_value(const SceneSpec& scene, int surface_id,
                     const Eigen::Vector3d& p) {
  const auto cell = [&](double x) {
    return static_cast<std::int64_t>(std::floor(x / scene.texture_cell));
  };
  std::uint64_t h = scene.seed ^ (0x9e3779b97f4a7c15ULL * (surface_id + 17));
  h = mix_seed(h, static_cast<std::uint64_t>(cell(p.x()) + (1LL << 31)));
  h = mix_seed(h, static_cast<std::uint64_t>(cell(p.y()) + (1LL << 31)));
  h = mix_seed(h, static_cast<std::uint64_t>(cell(p.z()) + (1LL << 31)));
  SplitMix64 rng(h);
  return 0.55 + 0.45 * rng.uniform();
}

Eigen::Vector3d wall_base_color(int face) {
  static const Eigen::Vector3d colors[6] = {
      {0.85, 0.78, 0.70},  // +x
      {0.70, 0.78, 0.85},  // -x
      {0.75, 0.75, 0.75},  // +y ceiling
      {0.55, 0.50, 0.45},  // -y floor
      {0.80, 0.85, 0.72},  // +z
      {0.82, 0.72, 0.82},  // -z
  };
  return colors[face];
}

struct Hit {
  double t = 0.0;
  Eigen::Vector3d normal;
  Eigen::Vector3d albedo;
};

bool intersect_box(const SceneBox& box, const Eigen::Vector3d& o,
                   const Eigen::Vector3d& d, Hit* hit) {
  double t_near = -1e300, t_far = 1e300;
  int near_axis = -1;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < box.min[a] || o[a] > box.max[a]) return false;
      continue;
    }
    double t0 = (box.min[a] - o[a]) / d[a];
    double t1 = (box.max[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_near) {
      t_near = t0;
      near_axis = a;
    }
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return false;
  }
  if (t_near <= kRayEps || near_axis < 0) return false;
  hit->t = t_near;
  hit->normal = Eigen::Vector3d::Zero();
  hit->normal[near_axis] = d[near_axis] > 0 ? -1.0 : 1.0;
  return true;
}

}  // namespace

std::vector<SceneBox> scene_boxes(const SceneSpec& scene) {
  SplitMix64 rng(mix_seed(scene.seed, 0x626f7865));
  std::vector<SceneBox> boxes;
  const double hy = scene.room_half_extents.y();
  const double ring = 0.75 * std::min(scene.room_half_extents.x(),
                                      scene.room_half_extents.z());
  for (int k = 0; k < scene.box_count; ++k) {
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double radius = rng.uniform(1.3, std::max(1.4, ring));
    const double cx = radius * std::cos(angle);
    const double cz = radius * std::sin(angle);
    const double sx = rng.uniform(0.2, 0.5);
    const double sz = rng.uniform(0.2, 0.5);
    const double h = rng.uniform(0.4, 1.3);
    SceneBox box;
    box.min = {cx - sx, -hy, cz - sz};
    box.max = {cx + sx, -hy + h, cz + sz};
    box.color = {rng.uniform(0.15, 0.95), rng.uniform(0.15, 0.95),
                 rng.uniform(0.15, 0.95)};
    boxes.push_back(box);
  }
  return boxes;
}

std::vector<double> render_radiance(const SceneSpec& scene,
                                    const CameraPose& pose, int width,
                                    int height) {
  const Eigen::Vector3d& he = scene.room_half_extents;
  const Eigen::Vector3d& o = pose.center();
  for (int a = 0; a < 3; ++a)
    if (std::abs(o[a]) >= he[a])
      throw std::invalid_argument("render: pose outside room");

  const std::vector<SceneBox> boxes = scene_boxes(scene);
  std::vector<double> out(static_cast<std::size_t>(width) * height * 3);

  for (int y = 0; y < height; ++y) {
    const double v = (y + 0.5) / height;
    for (int x = 0; x < width; ++x) {
      const double u = (x + 0.5) / width;
      const Eigen::Vector3d d = pose.ray_direction(u, v);

      // Exit of the room box (the camera is inside it).
      double t_room = 1e300;
      int room_face = 0;
      for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) < 1e-15) continue;
        const double bound = d[a] > 0 ? he[a] : -he[a];
        const double t = (bound - o[a]) / d[a];
        if (t < t_room) {
          t_room = t;
          room_face = 2 * a + (d[a] > 0 ? 0 : 1);
        }
      }

      Hit best;
      best.t = t_room;
      {
        const Eigen::Vector3d p = o + t_room * d;
        best.normal = Eigen::Vector3d::Zero();
        best.normal[room_face / 2] = (room_face % 2 == 0) ? -1.0 : 1.0;
        best.albedo = wall_base_color(room_face) *
                      texture_value(scene, room_face, p);
      }
      for (std::size_t k = 0; k < boxes.size(); ++k) {
        Hit hit;
        if (intersect_box(boxes[k], o, d, &hit) && hit.t < best.t) {
          const Eigen::Vector3d p = o + hit.t * d;
          hit.albedo = boxes[k].color *
                       texture_value(scene, 6 + static_cast<int>(k), p);
          best = hit;
        }
      }

      const double s = shade(best.normal);
      const std::size_t base = (static_cast<std::size_t>(y) * width + x) * 3;
      for (int c = 0; c < 3; ++c)
        out[base + c] = std::clamp(best.albedo[c] * s, 0.0, 1.0);
    }
  }
  return out;
}

Frame render(const SceneSpec& scene, const CameraPose& pose, int width,
             int height) {
  const std::vector<double> radiance = render_radiance(scene, pose, width, height);
  Frame frame(width, height);
  for (std::size_t i = 0; i < radiance.size(); ++i)
    frame.data()[i] = Frame::quantize(radiance[i]);
  return frame;
}

void DriftConfig::validate() const {
  if (sigma0 < 0.0)
    throw std::invalid_argument("DriftConfig: sigma0 must be >= 0");
}

std::vector<double> drift_noise_field(std::uint64_t seed, long frame_index,
                                      std::size_t count) {
  SplitMix64 rng(mix_seed(mix_seed(seed, 0x6472696674ULL),
                          static_cast<std::uint64_t>(frame_index)));
  std::vector<double> out(count);
  for (double& v : out) v = rng.normal();
  return out;
}

std::vector<Frame> generate_segment(const SceneSpec& scene,
                                    std::span<const CameraPose> poses,
                                    const std::vector<GateDecision>& decisions,
                                    const MemoryBank& bank,
                                    const DriftConfig& drift,
                                    std::uint64_t seed, bool memory_enabled,
                                    long first_global_index, int& counter,
                                    std::vector<int>* steps_out,
                                    std::vector<Frame>* gt_out) {
  drift.validate();
  if (poses.size() != decisions.size())
    throw std::invalid_argument("generate_segment: decision/pose mismatch");

  std::vector<Frame> generated;
  generated.reserve(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const CameraPose& pose = poses[i];
    const int width = pose.intrinsics().width;
    const int height = pose.intrinsics().height;
    const std::vector<double> radiance =
        render_radiance(scene, pose, width, height);
    const GateDecision& d = decisions[i];
    const long global = first_global_index + static_cast<long>(i);

    Frame frame(width, height);
    if (d.active) {
      // Geometric anchor: the drift counter resets whether or not memory
      // injection is enabled, so exploration frames stay comparable.
      counter = 0;
      if (memory_enabled) {
        const MemoryEntry* ref = bank.find(*d.matched);
        if (!ref)
          throw std::invalid_argument(
              "generate_segment: matched frame " + std::to_string(*d.matched) +
              " not in bank");
        const double w = std::clamp(d.score, 0.0, 1.0);
        for (int y = 0; y < height; ++y)
          for (int x = 0; x < width; ++x)
            for (int c = 0; c < 3; ++c)
              frame.set_value(x, y, c,
                              w * ref->frame.value(x, y, c) +
                                  (1.0 - w) *
                                      radiance[(static_cast<std::size_t>(y) *
                                                    width +
                                                x) *
                                                   3 +
                                               c]);
      } else {
        for (std::size_t j = 0; j < radiance.size(); ++j)
          frame.data()[j] = Frame::quantize(radiance[j]);
      }
    } else {
      ++counter;
      const double sigma = drift.sigma0 * counter;
      if (sigma > 0.0) {
        const std::vector<double> noise =
            drift_noise_field(seed, global, radiance.size());
        for (std::size_t j = 0; j < radiance.size(); ++j)
          frame.data()[j] = Frame::quantize(radiance[j] + sigma * noise[j]);
      } else {
        for (std::size_t j = 0; j < radiance.size(); ++j)
          frame.data()[j] = Frame::quantize(radiance[j]);
      }
    }

    if (steps_out) steps_out->push_back(counter);
    if (gt_out) {
      Frame gt(width, height);
      for (std::size_t j = 0; j < radiance.size(); ++j)
        gt.data()[j] = Frame::quantize(radiance[j]);
      gt_out->push_back(std::move(gt));
    }
    generated.push_back(std::move(frame));
  }
  return generated;
}

EpisodeRecord run_episode(const SceneSpec& scene, const Trajectory& traj,
                          const EpisodeConfig& config, std::uint64_t seed) {
  if (traj.poses.empty())
    throw std::invalid_argument("run_episode: empty trajectory");
  config.gating.validate();
  config.drift.validate();
  if (config.segment_length < 1)
    throw std::invalid_argument("run_episode: segment_length must be >= 1");

  EpisodeRecord episode;
  episode.scene = scene;
  episode.config = config;
  episode.seed = seed;
  episode.poses = traj.poses;
  episode.trajectory_metadata = traj.metadata;

  int counter = 0;
  const long total = static_cast<long>(traj.poses.size());
  for (long base = 0; base < total; base += config.segment_length) {
    const long len = std::min<long>(config.segment_length, total - base);
    std::vector<CameraPose> chunk(traj.poses.begin() + base,
                                  traj.poses.begin() + base + len);
    std::vector<GateDecision> decisions =
        compute_gates(chunk, episode.bank.poses(), config.gating);
    // History positions coincide with global frame indices: the bank holds
    // frames 0..base-1 in order.
    for (std::size_t i = 0; i < decisions.size(); ++i)
      decisions[i].target_index = static_cast<int>(base + i);

    std::vector<int> steps;
    std::vector<Frame> gt;
    std::vector<Frame> generated = generate_segment(
        scene, std::span<const CameraPose>(chunk), decisions, episode.bank,
        config.drift, seed, config.memory_enabled, base, counter, &steps, &gt);

    // Hybrid assembly and mask statistics for the segment.
    json stats;
    stats["segment_start"] = base;
    stats["frames"] = len;
    if (!episode.bank.empty()) {
      const HybridMemory hybrid =
          build_hybrid(episode.bank, decisions, config.window, config.patch);
      const int tokens_per_query =
          hybrid.tokens_per_frame > 0 ? hybrid.tokens_per_frame : 1;
      const AttentionMask mask = build_mask(decisions, hybrid, tokens_per_query);
      stats["memory_blocks"] = hybrid.blocks.size();
      stats["memory_tokens"] = hybrid.total_tokens();
      stats["mask_rows"] = mask.rows;
      stats["mask_cols"] = mask.cols;
      stats["mask_true"] = mask.true_count();
    }
    episode.segment_stats.push_back(std::move(stats));

    for (long i = 0; i < len; ++i) {
      EpisodeFrameInfo info;
      info.decision = decisions[i];
      if (!config.memory_enabled) info.decision.active = false;
      info.steps_since_anchor = steps[i];
      episode.frames.push_back(info);
      episode.ground_truth.push_back(std::move(gt[i]));
      episode.bank.insert({base + i, chunk[i], generated[i]});
      episode.generated.push_back(std::move(generated[i]));
    }
  }
  return episode;
}

namespace {

json drift_to_json(const DriftConfig& d) { return json{{"sigma0", d.sigma0}}; }

json gating_to_json(const GatingConfig& g) {
  json j;
  j["score_threshold"] = g.score_threshold;
  j["distance_threshold"] = g.distance_threshold;
  j["temporal_threshold"] = g.temporal_threshold;
  j["overlap"] = overlap_config_to_json(g.overlap);
  return j;
}

GatingConfig gating_from_json(const json& j) {
  GatingConfig g;
  g.score_threshold = j.at("score_threshold").get<double>();
  g.distance_threshold = j.at("distance_threshold").get<double>();
  g.temporal_threshold = j.at("temporal_threshold").get<int>();
  g.overlap = overlap_config_from_json(j.at("overlap"));
  return g;
}

std::string frame_name(long index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06ld.ppm", index);
  return buf;
}

}  // namespace

void save_episode(const EpisodeRecord& episode,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "gt");
  std::filesystem::create_directories(dir / "gen");

  json j;
  j["version"] = 1;
  j["seed"] = episode.seed;
  j["memory_enabled"] = episode.config.memory_enabled;
  j["scene"] = {{"seed", episode.scene.seed},
                {"room_half_extents",
                 {episode.scene.room_half_extents.x(),
                  episode.scene.room_half_extents.y(),
                  episode.scene.room_half_extents.z()}},
                {"box_count", episode.scene.box_count},
                {"texture_cell", episode.scene.texture_cell}};
  j["config"] = {{"gating", gating_to_json(episode.config.gating)},
                 {"drift", drift_to_json(episode.config.drift)},
                 {"segment_length", episode.config.segment_length},
                 {"width", episode.config.width},
                 {"height", episode.config.height},
                 {"window", episode.config.window},
                 {"patch", episode.config.patch}};
  j["segment_stats"] = episode.segment_stats;
  j["trajectory_metadata"] = episode.trajectory_metadata;

  json frames = json::array();
  for (std::size_t i = 0; i < episode.frames.size(); ++i) {
    const EpisodeFrameInfo& info = episode.frames[i];
    json jf;
    jf["index"] = info.decision.target_index;
    jf["pose"] = pose_to_json(episode.poses[i]);
    jf["score"] = info.decision.score;
    if (info.decision.matched)
      jf["matched"] = *info.decision.matched;
    else
      jf["matched"] = nullptr;
    jf["gate"] = info.decision.active ? 1 : 0;
    jf["reason"] = to_string(info.decision.reason);
    jf["steps_since_anchor"] = info.steps_since_anchor;
    frames.push_back(std::move(jf));

    write_ppm(episode.ground_truth[i], dir / "gt" / frame_name(i));
    write_ppm(episode.generated[i], dir / "gen" / frame_name(i));
  }
  j["frames"] = std::move(frames);

  std::ofstream out(dir / "episode.json");
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write episode.json");

  episode.bank.save(dir / "bank");
}

EpisodeRecord load_episode(const std::filesystem::path& dir) {
  std::ifstream in(dir / "episode.json");
  if (!in)
    throw std::runtime_error("cannot open " + (dir / "episode.json").string());
  json j;
  in >> j;

  EpisodeRecord episode;
  episode.seed = j.at("seed").get<std::uint64_t>();
  const json& js = j.at("scene");
  episode.scene.seed = js.at("seed").get<std::uint64_t>();
  episode.scene.room_half_extents =
      Eigen::Vector3d(js.at("room_half_extents")[0].get<double>(),
                      js.at("room_half_extents")[1].get<double>(),
                      js.at("room_half_extents")[2].get<double>());
  episode.scene.box_count = js.at("box_count").get<int>();
  episode.scene.texture_cell = js.at("texture_cell").get<double>();

  const json& jc = j.at("config");
  episode.config.gating = gating_from_json(jc.at("gating"));
  episode.config.drift.sigma0 = jc.at("drift").at("sigma0").get<double>();
  episode.config.segment_length = jc.at("segment_length").get<int>();
  episode.config.width = jc.at("width").get<int>();
  episode.config.height = jc.at("height").get<int>();
  episode.config.window = jc.at("window").get<int>();
  episode.config.patch = jc.at("patch").get<int>();
  episode.config.memory_enabled = j.at("memory_enabled").get<bool>();
  episode.segment_stats = j.value("segment_stats", json::array());
  episode.trajectory_metadata = j.value("trajectory_metadata", json::object());

  std::size_t i = 0;
  for (const json& jf : j.at("frames")) {
    EpisodeFrameInfo info;
    info.decision.target_index = jf.at("index").get<int>();
    info.decision.score = jf.at("score").get<double>();
    if (!jf.at("matched").is_null())
      info.decision.matched = jf.at("matched").get<int>();
    info.decision.active = jf.at("gate").get<int>() == 1;
    info.decision.reason = gate_reason_from_string(jf.at("reason").get<std::string>());
    info.steps_since_anchor = jf.at("steps_since_anchor").get<int>();
    episode.frames.push_back(info);
    episode.poses.push_back(pose_from_json(jf.at("pose")));
    episode.ground_truth.push_back(read_ppm(dir / "gt" / frame_name(i)));
    episode.generated.push_back(read_ppm(dir / "gen" / frame_name(i)));
    ++i;
  }
  episode.bank = MemoryBank::load(dir / "bank");
  return episode;
}

}  // namespace vidmem
