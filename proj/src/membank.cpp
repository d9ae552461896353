#include "vidmem/membank.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include "vidmem/serialize.hpp"

namespace vidmem {

void MemoryBank::insert(MemoryEntry entry) {
  if (!entries_.empty() && entry.frame_index <= entries_.back().frame_index)
    throw std::invalid_argument(
        "MemoryBank: out-of-order frame index " +
        std::to_string(entry.frame_index));
  if (entries_.empty()) {
    width_ = entry.frame.width();
    height_ = entry.frame.height();
  } else if (entry.frame.width() != width_ || entry.frame.height() != height_) {
    throw std::invalid_argument("MemoryBank: frame dimension mismatch");
  }
  entries_.push_back(std::move(entry));
}

const MemoryEntry* MemoryBank::find(long frame_index) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), frame_index,
      [](const MemoryEntry& e, long idx) { return e.frame_index < idx; });
  if (it == entries_.end() || it->frame_index != frame_index) return nullptr;
  return &*it;
}

long MemoryBank::min_index() const {
  if (entries_.empty()) throw std::logic_error("MemoryBank: empty");
  return entries_.front().frame_index;
}

long MemoryBank::max_index() const {
  if (entries_.empty()) throw std::logic_error("MemoryBank: empty");
  return entries_.back().frame_index;
}

std::vector<CameraPose> MemoryBank::poses() const {
  std::vector<CameraPose> out;
  out.reserve(entries_.size());
  for (const MemoryEntry& e : entries_) out.push_back(e.pose);
  return out;
}

namespace {

std::string frame_file_name(long index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06ld.ppm", index);
  return buf;
}

}  // namespace

void MemoryBank::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir / "frames");
  json manifest;
  manifest["version"] = 1;
  manifest["width"] = width_;
  manifest["height"] = height_;
  json entries = json::array();
  for (const MemoryEntry& e : entries_) {
    const std::string name = frame_file_name(e.frame_index);
    const auto path = dir / "frames" / name;
    write_ppm(e.frame, path);
    json je;
    je["index"] = e.frame_index;
    je["pose"] = pose_to_json(e.pose);
    je["file"] = "frames/" + name;
    je["checksum"] = fnv1a64_file(path);
    entries.push_back(std::move(je));
  }
  manifest["entries"] = std::move(entries);
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write manifest: " + dir.string());
}

MemoryBank MemoryBank::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in)
    throw std::runtime_error("cannot open manifest: " + (dir / "manifest.json").string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed manifest: " + std::string(e.what()));
  }
  MemoryBank bank;
  for (const json& je : manifest.at("entries")) {
    const auto path = dir / je.at("file").get<std::string>();
    const std::uint64_t expected = je.at("checksum").get<std::uint64_t>();
    if (fnv1a64_file(path) != expected)
      throw std::runtime_error("checksum mismatch: " + path.string());
    bank.insert({je.at("index").get<long>(), pose_from_json(je.at("pose")),
                 read_ppm(path)});
  }
  return bank;
}

std::size_t HybridMemory::total_tokens() const {
  std::size_t n = 0;
  for (const MemoryBlock& b : blocks) n += b.tokens.size();
  return n;
}

bool HybridMemory::has_reference(long frame_index) const {
  for (const MemoryBlock& b : blocks)
    if (b.reference == frame_index) return true;
  return false;
}

namespace {

std::vector<MemoryToken> frame_tokens(const MemoryEntry& entry, int patch) {
  const Frame& f = entry.frame;
  const int nx = (f.width() + patch - 1) / patch;
  const int ny = (f.height() + patch - 1) / patch;
  std::vector<MemoryToken> tokens;
  tokens.reserve(static_cast<std::size_t>(nx) * ny);
  for (int py = 0; py < ny; ++py) {
    for (int px = 0; px < nx; ++px) {
      const int x0 = px * patch, x1 = std::min(x0 + patch, f.width());
      const int y0 = py * patch, y1 = std::min(y0 + patch, f.height());
      std::array<double, 3> sum{};
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
          for (int c = 0; c < 3; ++c) sum[c] += f.value(x, y, c);
      const double count = static_cast<double>((x1 - x0) * (y1 - y0));
      tokens.push_back(
          {entry.frame_index, {sum[0] / count, sum[1] / count, sum[2] / count}});
    }
  }
  return tokens;
}

}  // namespace

HybridMemory build_hybrid(const MemoryBank& bank,
                          const std::vector<GateDecision>& decisions,
                          int window, int patch) {
  if (window < 0) throw std::invalid_argument("build_hybrid: window must be >= 0");
  if (patch < 1) throw std::invalid_argument("build_hybrid: patch must be >= 1");

  HybridMemory hybrid;
  hybrid.patch = patch;
  hybrid.window = window;

  // Decisions against a bank address references by global frame index.
  std::set<long> references;
  for (const GateDecision& d : decisions)
    if (d.active && d.matched) references.insert(*d.matched);

  if (references.empty()) return hybrid;

  hybrid.tokens_per_frame = ((bank.frame_width() + patch - 1) / patch) *
                            ((bank.frame_height() + patch - 1) / patch);

  for (long ref : references) {
    const MemoryEntry* entry = bank.find(ref);
    if (!entry)
      throw std::invalid_argument("build_hybrid: reference frame " +
                                  std::to_string(ref) + " missing from bank");
    MemoryBlock spatial;
    spatial.reference = ref;
    spatial.temporal = false;
    spatial.tokens = frame_tokens(*entry, patch);
    hybrid.blocks.push_back(std::move(spatial));

    MemoryBlock temporal;
    temporal.reference = ref;
    temporal.temporal = true;
    const long lo = std::max(ref - window, bank.min_index());
    const long hi = std::min(ref + window, bank.max_index());
    for (long idx = lo; idx <= hi; ++idx) {
      const MemoryEntry* e = bank.find(idx);
      if (!e) continue;  // tolerate gaps in sparse banks
      auto tokens = frame_tokens(*e, patch);
      temporal.tokens.insert(temporal.tokens.end(), tokens.begin(),
                             tokens.end());
    }
    hybrid.blocks.push_back(std::move(temporal));
  }
  return hybrid;
}

std::size_t AttentionMask::true_count() const {
  std::size_t n = 0;
  for (std::uint8_t v : data) n += v;
  return n;
}

namespace {

// A memory token is attached to reference r when it is the spatial token of
// r itself or a temporal token within r's window.
bool token_matches(const MemoryBlock& block, const MemoryToken& token,
                   long reference, int window) {
  if (block.temporal) return std::abs(token.source_frame - reference) <= window;
  return token.source_frame == reference;
}

}  // namespace

AttentionMask build_mask(const std::vector<GateDecision>& decisions,
                         const HybridMemory& hybrid,
                         int tokens_per_query_frame) {
  if (tokens_per_query_frame < 1)
    throw std::invalid_argument("build_mask: tokens_per_query_frame must be >= 1");

  AttentionMask mask;
  mask.rows = decisions.size() * static_cast<std::size_t>(tokens_per_query_frame);
  mask.cols = hybrid.total_tokens();
  mask.data.assign(mask.rows * mask.cols, 0);

  std::size_t col = 0;
  for (const MemoryBlock& b : hybrid.blocks) {
    mask.col_groups.emplace_back(col, col + b.tokens.size());
    col += b.tokens.size();
  }

  for (std::size_t t = 0; t < decisions.size(); ++t) {
    const std::size_t row0 = t * tokens_per_query_frame;
    mask.row_groups.emplace_back(row0, row0 + tokens_per_query_frame);
    const GateDecision& d = decisions[t];
    if (!d.active) continue;
    if (!d.matched)
      throw std::invalid_argument("build_mask: active gate without a match");
    const long ref = *d.matched;
    if (!hybrid.has_reference(ref))
      throw std::invalid_argument("build_mask: frame " + std::to_string(ref) +
                                  " absent from hybrid attribution");
    std::size_t c = 0;
    for (const MemoryBlock& b : hybrid.blocks) {
      for (const MemoryToken& token : b.tokens) {
        if (token_matches(b, token, ref, hybrid.window)) {
          for (int q = 0; q < tokens_per_query_frame; ++q)
            mask.data[(row0 + q) * mask.cols + c] = 1;
        }
        ++c;
      }
    }
  }
  return mask;
}

std::size_t mask_sparsity(const std::vector<GateDecision>& decisions,
                          const HybridMemory& hybrid,
                          int tokens_per_query_frame) {
  std::size_t total = 0;
  for (const GateDecision& d : decisions) {
    if (!d.active || !d.matched) continue;
    std::size_t attributed = 0;
    for (const MemoryBlock& b : hybrid.blocks)
      for (const MemoryToken& token : b.tokens)
        if (token_matches(b, token, *d.matched, hybrid.window)) ++attributed;
    total += attributed * static_cast<std::size_t>(tokens_per_query_frame);
  }
  return total;
}

}  // namespace vidmem
