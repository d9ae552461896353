#include "vidmem/gating.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace vidmem {

void GatingConfig::validate() const {
  if (temporal_threshold < 0)
    throw std::invalid_argument("GatingConfig: temporal_threshold must be >= 0");
  if (!std::isfinite(score_threshold) || !std::isfinite(distance_threshold))
    throw std::invalid_argument("GatingConfig: thresholds must be finite");
  overlap.validate();
}

std::string to_string(GateReason reason) {
  switch (reason) {
    case GateReason::kNone: return "none";
    case GateReason::kLowScore: return "low_score";
    case GateReason::kFarDistance: return "far_distance";
    case GateReason::kTemporalRedundancy: return "temporal_redundancy";
    case GateReason::kEmptyHistory: return "empty_history";
  }
  return "none";
}

GateReason gate_reason_from_string(const std::string& text) {
  if (text == "none") return GateReason::kNone;
  if (text == "low_score") return GateReason::kLowScore;
  if (text == "far_distance") return GateReason::kFarDistance;
  if (text == "temporal_redundancy") return GateReason::kTemporalRedundancy;
  if (text == "empty_history") return GateReason::kEmptyHistory;
  throw std::invalid_argument("unknown gate reason: " + text);
}

Eigen::MatrixXd relevance_matrix(const std::vector<CameraPose>& targets,
                                 const std::vector<CameraPose>& history,
                                 const GatingConfig& cfg) {
  cfg.validate();
  if (targets.empty())
    throw std::invalid_argument("relevance_matrix: no targets");
  Eigen::MatrixXd c(targets.size(), history.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    for (std::size_t r = 0; r < history.size(); ++r) {
      c(t, r) = fov_overlap(targets[t], history[r], cfg.overlap) -
                cfg.overlap.distance_weight *
                    translation_distance(targets[t], history[r], cfg.overlap);
    }
  }
  return c;
}

std::vector<GateDecision> compute_gates(const std::vector<CameraPose>& targets,
                                        const std::vector<CameraPose>& history,
                                        const GatingConfig& cfg) {
  cfg.validate();
  std::vector<GateDecision> out(targets.size());
  if (targets.empty()) return out;

  if (history.empty()) {
    for (std::size_t t = 0; t < targets.size(); ++t) {
      out[t] = {static_cast<int>(t), 0.0, std::nullopt, false,
                GateReason::kEmptyHistory};
    }
    return out;
  }

  const Eigen::MatrixXd c = relevance_matrix(targets, history, cfg);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    int best = 0;
    for (int r = 1; r < c.cols(); ++r)
      if (c(t, r) > c(t, best)) best = r;  // ties keep the smallest index

    GateDecision& d = out[t];
    d.target_index = static_cast<int>(t);
    d.matched = best;
    d.score = c(t, best);
    d.active = true;
    d.reason = GateReason::kNone;

    if (d.score < cfg.score_threshold) {
      d.active = false;
      d.reason = GateReason::kLowScore;
    } else if (translation_distance(targets[t], history[best], cfg.overlap) >
               cfg.distance_threshold) {
      d.active = false;
      d.reason = GateReason::kFarDistance;
    }
  }

  // Temporal redundancy, single forward pass against the updated g_{t-1}.
  for (std::size_t t = 1; t < out.size(); ++t) {
    if (out[t].active && out[t - 1].active &&
        std::abs(*out[t].matched - *out[t - 1].matched) <
            cfg.temporal_threshold) {
      out[t].active = false;
      out[t].reason = GateReason::kTemporalRedundancy;
    }
  }
  return out;
}

std::string format_gate_trace(const std::vector<GateDecision>& decisions) {
  std::string out;
  char buf[128];
  for (const GateDecision& d : decisions) {
    std::snprintf(buf, sizeof(buf), "%d, %.17g, ", d.target_index, d.score);
    out += buf;
    out += d.matched ? std::to_string(*d.matched) : "-";
    out += ", ";
    out += d.active ? '1' : '0';
    out += ", ";
    out += to_string(d.reason);
    out += '\n';
  }
  return out;
}

std::vector<GateDecision> parse_gate_trace(const std::string& text) {
  std::vector<GateDecision> out;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string tok;
    GateDecision d;
    auto next = [&]() {
      if (!std::getline(fields, tok, ','))
        throw std::runtime_error("gate trace: malformed line " +
                                 std::to_string(line_no));
      const auto a = tok.find_first_not_of(" \t");
      const auto b = tok.find_last_not_of(" \t");
      tok = (a == std::string::npos) ? "" : tok.substr(a, b - a + 1);
    };
    next();
    d.target_index = std::stoi(tok);
    next();
    d.score = std::stod(tok);
    next();
    d.matched = (tok == "-") ? std::nullopt : std::optional<int>(std::stoi(tok));
    next();
    d.active = tok == "1";
    next();
    d.reason = gate_reason_from_string(tok);
    out.push_back(d);
  }
  return out;
}

}  // namespace vidmem
