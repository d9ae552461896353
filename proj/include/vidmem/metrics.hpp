#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vidmem/image.hpp"
#include "vidmem/serialize.hpp"
#include "vidmem/simworld.hpp"
#include "vidmem/trajectory.hpp"

namespace vidmem {

// 10*log10(peak^2 / MSE) over all channels; capped at 99 dB when MSE = 0.
double psnr(const Frame& a, const Frame& b, double peak = 1.0);

struct SsimConfig {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double luminance_range = 1.0;  // L
};

// Mean local SSIM over Gaussian-weighted windows on the Rec. 601 luma.
double ssim(const Frame& a, const Frame& b, const SsimConfig& cfg = {});

struct RevisitPair {
  int return_index = 0;
  int first_index = 0;
};

struct RevisitPairing {
  std::vector<RevisitPair> pairs;
  double tolerance = 1e-6;
};

// Pairs each frame with the earliest prior frame whose pose matches within
// tolerance (rotation geodesic and center distance both below it).
RevisitPairing pair_revisits(const Trajectory& traj, double tolerance = 1e-6);
RevisitPairing pair_revisits(const std::vector<CameraPose>& poses,
                             double tolerance = 1e-6);

struct PairMetrics {
  RevisitPair pair;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct ConsistencyReport {
  std::vector<PairMetrics> pairs;
  std::optional<double> mean_psnr;
  std::optional<double> min_psnr;
  std::optional<double> mean_ssim;
  std::optional<double> min_ssim;
  double tolerance = 1e-6;
  std::string episode_id;
};

// Return-path generated frames against their first-pass generated
// counterparts.
ConsistencyReport evaluate(const EpisodeRecord& episode,
                           const RevisitPairing& pairing);

json report_to_json(const ConsistencyReport& report);
std::string report_table(const ConsistencyReport& report);
std::string report_csv(const ConsistencyReport& report);
std::string compare_table(const ConsistencyReport& a,
                          const ConsistencyReport& b);

}  // namespace vidmem
