#include "vidmem/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace vidmem {

namespace {

constexpr double kPsnrCap = 99.0;

void require_same_dims(const Frame& a, const Frame& b, const char* who) {
  if (a.width() != b.width() || a.height() != b.height())
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

std::vector<double> luma(const Frame& f) {
  std::vector<double> out(static_cast<std::size_t>(f.width()) * f.height());
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x)
      out[static_cast<std::size_t>(y) * f.width() + x] =
          0.299 * f.value(x, y, 0) + 0.587 * f.value(x, y, 1) +
          0.114 * f.value(x, y, 2);
  return out;
}

}  // namespace

double psnr(const Frame& a, const Frame& b, double peak) {
  require_same_dims(a, b, "psnr");
  double sum = 0.0;
  const std::size_t n = a.data().size();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (a.data()[i] - b.data()[i]) / 255.0;
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(n);
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double ssim(const Frame& a, const Frame& b, const SsimConfig& cfg) {
  require_same_dims(a, b, "ssim");
  if (a.width() < cfg.window || a.height() < cfg.window)
    throw std::invalid_argument("ssim: frame smaller than window");

  const int w = cfg.window;
  const int half = w / 2;
  std::vector<double> kernel(static_cast<std::size_t>(w) * w);
  double ksum = 0.0;
  for (int j = 0; j < w; ++j) {
    for (int i = 0; i < w; ++i) {
      const double dx = i - half, dy = j - half;
      const double g = std::exp(-(dx * dx + dy * dy) / (2.0 * cfg.sigma * cfg.sigma));
      kernel[static_cast<std::size_t>(j) * w + i] = g;
      ksum += g;
    }
  }
  for (double& k : kernel) k /= ksum;

  const std::vector<double> la = luma(a);
  const std::vector<double> lb = luma(b);
  const int width = a.width(), height = a.height();
  const double c1 = cfg.k1 * cfg.luminance_range * cfg.k1 * cfg.luminance_range;
  const double c2 = cfg.k2 * cfg.luminance_range * cfg.k2 * cfg.luminance_range;

  double total = 0.0;
  long count = 0;
  for (int y = 0; y + w <= height; ++y) {
    for (int x = 0; x + w <= width; ++x) {
      double mu_a = 0.0, mu_b = 0.0;
      for (int j = 0; j < w; ++j)
        for (int i = 0; i < w; ++i) {
          const double k = kernel[static_cast<std::size_t>(j) * w + i];
          mu_a += k * la[static_cast<std::size_t>(y + j) * width + x + i];
          mu_b += k * lb[static_cast<std::size_t>(y + j) * width + x + i];
        }
      double var_a = 0.0, var_b = 0.0, cov = 0.0;
      for (int j = 0; j < w; ++j)
        for (int i = 0; i < w; ++i) {
          const double k = kernel[static_cast<std::size_t>(j) * w + i];
          const double da = la[static_cast<std::size_t>(y + j) * width + x + i] - mu_a;
          const double db = lb[static_cast<std::size_t>(y + j) * width + x + i] - mu_b;
          var_a += k * da * da;
          var_b += k * db * db;
          cov += k * da * db;
        }
      total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

RevisitPairing pair_revisits(const std::vector<CameraPose>& poses,
                             double tolerance) {
  if (poses.empty())
    throw std::invalid_argument("pair_revisits: empty trajectory");
  RevisitPairing pairing;
  pairing.tolerance = tolerance;
  for (std::size_t t = 1; t < poses.size(); ++t) {
    for (std::size_t p = 0; p < t; ++p) {
      const double center_dist = (poses[t].center() - poses[p].center()).norm();
      if (center_dist > tolerance) continue;
      const double cos_angle = std::clamp(
          ((poses[p].rotation().transpose() * poses[t].rotation()).trace() -
           1.0) /
              2.0,
          -1.0, 1.0);
      if (std::acos(cos_angle) > tolerance) continue;
      pairing.pairs.push_back(
          {static_cast<int>(t), static_cast<int>(p)});
      break;  // earliest prior match
    }
  }
  return pairing;
}

RevisitPairing pair_revisits(const Trajectory& traj, double tolerance) {
  return pair_revisits(traj.poses, tolerance);
}

ConsistencyReport evaluate(const EpisodeRecord& episode,
                           const RevisitPairing& pairing) {
  ConsistencyReport report;
  report.tolerance = pairing.tolerance;
  const int n = static_cast<int>(episode.generated.size());
  double psnr_sum = 0.0, ssim_sum = 0.0;
  for (const RevisitPair& pair : pairing.pairs) {
    if (pair.return_index < 0 || pair.return_index >= n ||
        pair.first_index < 0 || pair.first_index >= n)
      throw std::out_of_range("evaluate: pairing index out of range");
    PairMetrics pm;
    pm.pair = pair;
    pm.psnr = psnr(episode.generated[pair.return_index],
                   episode.generated[pair.first_index]);
    pm.ssim = ssim(episode.generated[pair.return_index],
                   episode.generated[pair.first_index]);
    psnr_sum += pm.psnr;
    ssim_sum += pm.ssim;
    report.pairs.push_back(pm);
  }
  if (!report.pairs.empty()) {
    const double n_pairs = static_cast<double>(report.pairs.size());
    report.mean_psnr = psnr_sum / n_pairs;
    report.mean_ssim = ssim_sum / n_pairs;
    double min_p = report.pairs.front().psnr, min_s = report.pairs.front().ssim;
    for (const PairMetrics& pm : report.pairs) {
      min_p = std::min(min_p, pm.psnr);
      min_s = std::min(min_s, pm.ssim);
    }
    report.min_psnr = min_p;
    report.min_ssim = min_s;
  }
  return report;
}

json report_to_json(const ConsistencyReport& report) {
  json j;
  j["version"] = 1;
  j["episode"] = report.episode_id;
  j["tolerance"] = report.tolerance;
  j["pair_count"] = report.pairs.size();
  json pairs = json::array();
  for (const PairMetrics& pm : report.pairs) {
    pairs.push_back({{"return", pm.pair.return_index},
                     {"first", pm.pair.first_index},
                     {"psnr", pm.psnr},
                     {"ssim", pm.ssim}});
  }
  j["pairs"] = std::move(pairs);
  if (report.mean_psnr) {
    j["mean_psnr"] = *report.mean_psnr;
    j["min_psnr"] = *report.min_psnr;
    j["mean_ssim"] = *report.mean_ssim;
    j["min_ssim"] = *report.min_ssim;
  } else {
    j["aggregates"] = "undefined (no revisit pairs)";
  }
  return j;
}

std::string report_table(const ConsistencyReport& report) {
  std::string out = "return   first    psnr_db     ssim\n";
  char buf[128];
  for (const PairMetrics& pm : report.pairs) {
    std::snprintf(buf, sizeof(buf), "%6d  %6d  %9.3f  %7.4f\n",
                  pm.pair.return_index, pm.pair.first_index, pm.psnr, pm.ssim);
    out += buf;
  }
  if (report.mean_psnr) {
    std::snprintf(buf, sizeof(buf), "  mean          %9.3f  %7.4f\n",
                  *report.mean_psnr, *report.mean_ssim);
    out += buf;
    std::snprintf(buf, sizeof(buf), "   min          %9.3f  %7.4f\n",
                  *report.min_psnr, *report.min_ssim);
    out += buf;
  } else {
    out += "no revisit pairs; aggregates undefined\n";
  }
  return out;
}

std::string report_csv(const ConsistencyReport& report) {
  std::string out = "return,first,psnr,ssim\n";
  char buf[128];
  for (const PairMetrics& pm : report.pairs) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g\n",
                  pm.pair.return_index, pm.pair.first_index, pm.psnr, pm.ssim);
    out += buf;
  }
  return out;
}

std::string compare_table(const ConsistencyReport& a,
                          const ConsistencyReport& b) {
  if (a.pairs.size() != b.pairs.size())
    throw std::invalid_argument("compare_table: pair count mismatch");
  std::string out =
      "return   first    psnr_a    psnr_b    d_psnr   ssim_a   ssim_b   d_ssim\n";
  char buf[160];
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    const PairMetrics& pa = a.pairs[i];
    const PairMetrics& pb = b.pairs[i];
    std::snprintf(buf, sizeof(buf),
                  "%6d  %6d  %8.3f  %8.3f  %8.3f  %7.4f  %7.4f  %7.4f\n",
                  pa.pair.return_index, pa.pair.first_index, pa.psnr, pb.psnr,
                  pa.psnr - pb.psnr, pa.ssim, pb.ssim, pa.ssim - pb.ssim);
    out += buf;
  }
  if (a.mean_psnr && b.mean_psnr) {
    std::snprintf(buf, sizeof(buf),
                  "  mean          %8.3f  %8.3f  %8.3f  %7.4f  %7.4f  %7.4f\n",
                  *a.mean_psnr, *b.mean_psnr, *a.mean_psnr - *b.mean_psnr,
                  *a.mean_ssim, *b.mean_ssim, *a.mean_ssim - *b.mean_ssim);
    out += buf;
  }
  return out;
}

}  // namespace vidmem
