// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace omniplan {

struct Sample {
  std::int64_t id = 0;
  std::int64_t length = 0; // tokens, >= 1
};

/// One packed sequence: samples laid out back to back up to the capacity,
/// with cumulative token boundaries for per-sample attention isolation.
struct PackedBatch {
  struct Entry {
    std::int64_t id = 0;
    std::int64_t offset = 0;
    std::int64_t length = 0;
  };
  std::int64_t capacity = 0;
  std::vector<Entry> entries;
  std::vector<std::int64_t> boundaries; // starts at 0, ends at total tokens

  std::int64_t used() const { return boundaries.empty() ? 0 : boundaries.back(); }
};

enum class PackPolicy { first_fit_decreasing, first_fit_arrival };

/// A sample longer than the target length cannot be packed (samples are
/// never split).
struct PackError : std::runtime_error {
  std::int64_t sample_id;
  PackError(std::int64_t id, const std::string& what)
      : std::runtime_error(what), sample_id(id) {}
};

/// First-fit bin packing toward the target length. first_fit_decreasing
/// sorts by length descending (ties by ascending id) before packing;
/// first_fit_arrival keeps the input order. Every sample lands in exactly
/// one batch; throws PackError on an over-length sample.
std::vector<PackedBatch> pack(const std::vector<Sample>& samples, std::int64_t target_length,
                              PackPolicy policy);

/// Fraction of the packed token budget left empty; 0 for no batches.
double padding_ratio(const std::vector<PackedBatch>& batches);

/// Streaming wrapper: buffers pushed samples and packs a flush once the
/// buffer holds at least buffer_factor * target_length tokens. Single
/// writer.
class StreamingPacker {
 public:
  StreamingPacker(std::int64_t target_length, PackPolicy policy,
                  std::int64_t buffer_factor = 4)
      : target_length_(target_length), policy_(policy), buffer_factor_(buffer_factor) {}

  /// Returns the batches emitted by this push (usually none).
  std::vector<PackedBatch> push(const Sample& sample);
  /// Packs and clears whatever remains in the buffer.
  std::vector<PackedBatch> flush();

  std::int64_t buffered_tokens() const { return buffered_tokens_; }

 private:
  std::int64_t target_length_;
  PackPolicy policy_;
  std::int64_t buffer_factor_;
  std::vector<Sample> buffer_;
  std::int64_t buffered_tokens_ = 0;
};

} // namespace omniplan
