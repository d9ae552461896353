#include "vidmem/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "vidmem/rng.hpp"

namespace vidmem {

namespace {

Eigen::Matrix3d yaw_rotation(double yaw_rad) {
  const double c = std::cos(yaw_rad), s = std::sin(yaw_rad);
  Eigen::Matrix3d r;
  r << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
  return r;
}

CameraPose yaw_pose(double yaw_rad, const Eigen::Vector3d& center,
                    const Intrinsics& k) {
  return CameraPose(yaw_rotation(yaw_rad), center, k);
}

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

std::string to_string(PatternKind kind) {
  switch (kind) {
    case PatternKind::kPanoramic: return "panoramic";
    case PatternKind::kRevisit: return "revisit";
    case PatternKind::kLoops: return "loops";
    case PatternKind::kOffsetReturn: return "offset";
  }
  return "panoramic";
}

PatternKind pattern_kind_from_string(const std::string& text) {
  if (text == "panoramic") return PatternKind::kPanoramic;
  if (text == "revisit") return PatternKind::kRevisit;
  if (text == "loops") return PatternKind::kLoops;
  if (text == "offset") return PatternKind::kOffsetReturn;
  throw std::invalid_argument("unknown pattern kind: " + text);
}

namespace {

Trajectory gen_panoramic(const PatternParams& p) {
  Trajectory traj;
  const int n = p.frames;
  for (int i = 0; i < n; ++i) {
    const double yaw = 2.0 * std::numbers::pi * i / (n - 1);
    traj.poses.push_back(
        yaw_pose(yaw, Eigen::Vector3d::Zero(), p.intrinsics));
  }
  traj.metadata["revisits"] = json::array({json::array({n - 1, 0})});
  return traj;
}

// Oscillation 0 -> theta -> 0 per cycle with co-prime rise/fall step counts
// and a per-cycle amplitude perturbation, so the only exact pose repeats are
// the cycle endpoints at yaw 0.
Trajectory gen_revisit(const PatternParams& p) {
  const int n = p.frames;
  const int m = p.cycles;
  if (m < 1) throw std::invalid_argument("revisit: cycles must be >= 1");
  if ((n - 1) % m != 0)
    throw std::invalid_argument("revisit: frames-1 must be divisible by cycles");
  const int cycle = (n - 1) / m;
  if (cycle < 2) throw std::invalid_argument("revisit: cycles too short");

  int rise = std::max(1, static_cast<int>(std::lround(cycle * 0.35)));
  while (rise > 1 && std::gcd(rise, cycle - rise) != 1) --rise;

  Trajectory traj;
  json revisits = json::array();
  for (int i = 0; i < n; ++i) {
    double yaw = 0.0;
    if (i > 0) {
      const int c = (i - 1) / cycle;
      const int local = i - c * cycle;
      const double amp = p.yaw_amplitude_deg * kDegToRad * (1.0 + 0.013 * c);
      yaw = (local <= rise) ? amp * local / rise
                            : amp * (cycle - local) / (cycle - rise);
    }
    traj.poses.push_back(yaw_pose(yaw, Eigen::Vector3d::Zero(), p.intrinsics));
  }
  for (int c = 1; c <= m; ++c) revisits.push_back(json::array({c * cycle, 0}));
  traj.metadata["revisits"] = std::move(revisits);
  return traj;
}

Trajectory gen_loops(const PatternParams& p, std::uint64_t seed) {
  if (p.min_loop < 1 || p.max_loop < p.min_loop)
    throw std::invalid_argument("loops: nonpositive or inverted loop lengths");
  const int n = p.frames;
  SplitMix64 rng(mix_seed(seed, 0x6c6f6f70));

  struct PendingLoop {
    int trigger;  // base index at which the retrace starts
    int length;
    bool fired = false;
  };
  const int n_loops = 1 + static_cast<int>(rng.below(
                              static_cast<std::uint64_t>(p.max_loops)));
  std::vector<PendingLoop> pending;
  for (int j = 0; j < n_loops; ++j) {
    const int length =
        p.min_loop +
        static_cast<int>(rng.below(
            static_cast<std::uint64_t>(p.max_loop - p.min_loop + 1)));
    const int trigger =
        length + static_cast<int>(rng.below(
                     static_cast<std::uint64_t>(std::max(1, n / 2))));
    pending.push_back({trigger, length});
  }

  auto base_pose = [&](int b) {
    return CameraPose(Eigen::Matrix3d::Identity(),
                      Eigen::Vector3d(0.0, 0.0, b * p.step), p.intrinsics);
  };

  Trajectory traj;
  json loops = json::array();
  int b = 0;
  traj.poses.push_back(base_pose(0));
  while (static_cast<int>(traj.poses.size()) < n) {
    const int remaining = n - static_cast<int>(traj.poses.size());
    PendingLoop* fire = nullptr;
    for (PendingLoop& loop : pending) {
      if (!loop.fired && loop.trigger == b && b >= loop.length &&
          remaining >= 2 * loop.length) {
        fire = &loop;
        break;
      }
    }
    if (fire) {
      fire->fired = true;
      loops.push_back(json::object(
          {{"entry", static_cast<int>(traj.poses.size()) - 1},
           {"length", fire->length}}));
      for (int s = 0; s < fire->length; ++s) traj.poses.push_back(base_pose(--b));
      for (int s = 0; s < fire->length; ++s) traj.poses.push_back(base_pose(++b));
    } else {
      traj.poses.push_back(base_pose(++b));
    }
  }
  traj.metadata["loops"] = std::move(loops);
  return traj;
}

Trajectory gen_offset_return(const PatternParams& p) {
  const int n = p.frames;
  const int half = (n + 1) / 2;
  Trajectory traj;
  for (int i = 0; i < half; ++i) {
    traj.poses.push_back(CameraPose(Eigen::Matrix3d::Identity(),
                                    Eigen::Vector3d(0.0, 0.0, i * p.step),
                                    p.intrinsics));
  }
  for (int i = half; i < n; ++i) {
    const int base = std::max(2 * half - 2 - i, 0);
    const CameraPose& fwd = traj.poses[base];
    // Displacement along the camera-right axis of the forward pose.
    const Eigen::Vector3d center = fwd.center() + p.offset * fwd.right();
    traj.poses.push_back(CameraPose(fwd.rotation(), center, p.intrinsics));
  }
  traj.metadata["offset"] = p.offset;
  return traj;
}

}  // namespace

Trajectory gen_pattern(PatternKind kind, const PatternParams& params,
                       std::uint64_t seed) {
  if (params.frames < 2)
    throw std::invalid_argument("gen_pattern: frames must be >= 2");
  Trajectory traj;
  switch (kind) {
    case PatternKind::kPanoramic: traj = gen_panoramic(params); break;
    case PatternKind::kRevisit: traj = gen_revisit(params); break;
    case PatternKind::kLoops: traj = gen_loops(params, seed); break;
    case PatternKind::kOffsetReturn: traj = gen_offset_return(params); break;
  }
  traj.metadata["kind"] = to_string(kind);
  traj.metadata["seed"] = seed;
  traj.metadata["frames"] = params.frames;
  return traj;
}

Trajectory import_re10k(const std::string& text) {
  Trajectory traj;
  json timestamps = json::array();
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line.rfind("http", 0) == 0) continue;  // clip URL header

    std::istringstream fields(line);
    std::vector<double> v;
    double x;
    while (fields >> x) v.push_back(x);
    if (v.size() != 19)
      throw std::runtime_error("re10k line " + std::to_string(line_no) +
                               ": expected 19 fields, got " +
                               std::to_string(v.size()));

    Eigen::Matrix3d w2c;
    w2c << v[7], v[8], v[9], v[11], v[12], v[13], v[15], v[16], v[17];
    const Eigen::Vector3d m(v[10], v[14], v[18]);

    const double err =
        (w2c * w2c.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (err > 1e-3)
      throw std::runtime_error("re10k line " + std::to_string(line_no) +
                               ": rotation not orthonormal");
    if (err > 1e-7) {
      // Nearly-orthonormal input: snap to the closest rotation.
      Eigen::JacobiSVD<Eigen::Matrix3d> svd(
          w2c, Eigen::ComputeFullU | Eigen::ComputeFullV);
      w2c = svd.matrixU() * svd.matrixV().transpose();
    }

    Intrinsics k;
    k.fx = v[1];
    k.fy = v[2];
    k.cx = v[3];
    k.cy = v[4];
    traj.poses.push_back(
        CameraPose(w2c.transpose(), -w2c.transpose() * m, k));
    timestamps.push_back(v[0]);
  }
  if (traj.poses.empty()) throw std::runtime_error("re10k: no camera lines");
  traj.metadata["kind"] = "re10k";
  traj.metadata["timestamps"] = std::move(timestamps);
  return traj;
}

std::string export_re10k(const Trajectory& traj) {
  std::string out;
  char buf[64];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof(buf), "%.17g%c", v, sep);
    out += buf;
  };
  const json* timestamps = nullptr;
  if (traj.metadata.contains("timestamps"))
    timestamps = &traj.metadata.at("timestamps");
  for (std::size_t i = 0; i < traj.poses.size(); ++i) {
    const CameraPose& pose = traj.poses[i];
    const Intrinsics& k = pose.intrinsics();
    const double ts = timestamps && i < timestamps->size()
                          ? (*timestamps)[i].get<double>()
                          : static_cast<double>(i);
    const Eigen::Matrix3d w2c = pose.rotation().transpose();
    const Eigen::Vector3d m = -w2c * pose.center();
    put(ts, ' ');
    put(k.fx, ' ');
    put(k.fy, ' ');
    put(k.cx, ' ');
    put(k.cy, ' ');
    out += "0 0 ";
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) put(w2c(row, col), ' ');
      put(m(row), row == 2 ? '\n' : ' ');
    }
  }
  return out;
}

json trajectory_to_json(const Trajectory& traj) {
  json j;
  j["version"] = 1;
  j["segment_length"] = traj.segment_length;
  j["metadata"] = traj.metadata;
  json frames = json::array();
  for (const CameraPose& pose : traj.poses) {
    const Eigen::Quaterniond q(pose.rotation());
    json jf;
    jf["quaternion"] = {q.w(), q.x(), q.y(), q.z()};
    jf["center"] = {pose.center().x(), pose.center().y(), pose.center().z()};
    jf["intrinsics"] = intrinsics_to_json(pose.intrinsics());
    frames.push_back(std::move(jf));
  }
  j["frames"] = std::move(frames);
  return j;
}

Trajectory trajectory_from_json(const json& j) {
  Trajectory traj;
  traj.segment_length = j.value("segment_length", 49);
  traj.metadata = j.value("metadata", json::object());
  for (const json& jf : j.at("frames")) {
    const auto& qj = jf.at("quaternion");
    Eigen::Quaterniond q(qj[0].get<double>(), qj[1].get<double>(),
                         qj[2].get<double>(), qj[3].get<double>());
    q.normalize();
    const auto& cj = jf.at("center");
    traj.poses.push_back(CameraPose(
        q.toRotationMatrix(),
        Eigen::Vector3d(cj[0].get<double>(), cj[1].get<double>(),
                        cj[2].get<double>()),
        intrinsics_from_json(jf.at("intrinsics"))));
  }
  if (traj.poses.empty()) throw std::runtime_error("trajectory: no frames");
  return traj;
}

PseudoLoop synth_pseudo_loop(int video_length, int stride) {
  if (video_length < 2)
    throw std::invalid_argument("synth_pseudo_loop: video_length must be >= 2");
  if (stride == 0)
    throw std::invalid_argument(
        "synth_pseudo_loop: stride 0 would train an identity mapping");
  if (stride < 1 || stride >= video_length)
    throw std::invalid_argument("synth_pseudo_loop: stride out of range");

  PseudoLoop out;
  const long n = video_length;
  for (long i = 0; i < n; ++i) out.frame_order.push_back(i);
  for (long i = n - 2; i >= 0; --i) out.frame_order.push_back(i);

  // Return-pass targets use a first-pass frame offset by the stride; at the
  // sequence end the offset reflects backwards to stay in range.
  for (long g = n - 2; g >= 0; --g) {
    long h = g + stride;
    if (h > n - 1) h = g - stride;
    if (h < 0) h = (g != n - 1) ? n - 1 : 0;
    out.pairs.push_back({h, g, stride});
  }
  return out;
}

std::vector<TrainingPair> apply_history_dropout(std::vector<TrainingPair> pairs,
                                                double rate,
                                                std::uint64_t seed) {
  if (rate < 0.0 || rate > 1.0)
    throw std::invalid_argument("apply_history_dropout: rate must be in [0,1]");
  SplitMix64 rng(mix_seed(seed, 0x64726f70));
  for (TrainingPair& pair : pairs)
    if (rng.uniform() < rate) pair.history.reset();
  return pairs;
}

}  // namespace vidmem
