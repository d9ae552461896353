#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "vidmem/gating.hpp"
#include "vidmem/geometry.hpp"
#include "vidmem/image.hpp"

namespace vidmem {

struct MemoryEntry {
  long frame_index = 0;  // global, strictly increasing at insertion
  CameraPose pose;
  Frame frame;
};

// Append-only store of generated frames with their poses.
class MemoryBank {
 public:
  void insert(MemoryEntry entry);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<MemoryEntry>& entries() const { return entries_; }
  const MemoryEntry& at(std::size_t position) const { return entries_[position]; }

  // Lookup by global frame index; null when absent.
  const MemoryEntry* find(long frame_index) const;

  long min_index() const;
  long max_index() const;
  int frame_width() const { return width_; }
  int frame_height() const { return height_; }

  std::vector<CameraPose> poses() const;

  // Directory layout: manifest.json + frames/{index:06}.ppm with per-file
  // FNV-1a checksums recorded in the manifest.
  void save(const std::filesystem::path& dir) const;
  static MemoryBank load(const std::filesystem::path& dir);

 private:
  std::vector<MemoryEntry> entries_;
  int width_ = 0;
  int height_ = 0;
};

struct MemoryToken {
  long source_frame = 0;
  std::array<double, 3> rgb{};  // mean over a p x p patch
};

struct MemoryBlock {
  long reference = 0;  // matched history frame this block belongs to
  bool temporal = false;
  std::vector<MemoryToken> tokens;
};

// Spatial blocks (single retrieved frame) and temporal blocks (window of
// consecutive frames around the retrieved one), ordered by reference index.
struct HybridMemory {
  std::vector<MemoryBlock> blocks;
  int tokens_per_frame = 0;
  int patch = 0;
  int window = 0;

  std::size_t total_tokens() const;
  bool has_reference(long frame_index) const;
};

HybridMemory build_hybrid(const MemoryBank& bank,
                          const std::vector<GateDecision>& decisions,
                          int window, int patch);

// Row blocks are query frames in decision order; columns follow the hybrid
// token order. Group boundaries are recorded for both axes.
struct AttentionMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> data;  // row-major booleans
  std::vector<std::pair<std::size_t, std::size_t>> row_groups;
  std::vector<std::pair<std::size_t, std::size_t>> col_groups;

  bool at(std::size_t row, std::size_t col) const {
    return data[row * cols + col] != 0;
  }
  std::size_t true_count() const;
};

AttentionMask build_mask(const std::vector<GateDecision>& decisions,
                         const HybridMemory& hybrid,
                         int tokens_per_query_frame);

// Closed-form count of true entries, from attribution metadata alone.
std::size_t mask_sparsity(const std::vector<GateDecision>& decisions,
                          const HybridMemory& hybrid,
                          int tokens_per_query_frame);

}  // namespace vidmem
