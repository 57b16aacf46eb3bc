// Copyright 2026 The omniplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "omniplan/packing.hpp"

#include <algorithm>

namespace omniplan {

std::vector<PackedBatch> pack(const std::vector<Sample>& samples, std::int64_t target_length,
                              PackPolicy policy) {
  std::vector<Sample> order = samples;
  for (const auto& s : order) {
    if (s.length < 1) {
      throw PackError(s.id, "sample " + std::to_string(s.id) + " has non-positive length");
    }
    if (s.length > target_length) {
      throw PackError(s.id, "sample " + std::to_string(s.id) + " has length " +
                                std::to_string(s.length) + " > target " +
                                std::to_string(target_length));
    }
  }
  if (policy == PackPolicy::first_fit_decreasing) {
    std::stable_sort(order.begin(), order.end(), [](const Sample& a, const Sample& b) {
      if (a.length != b.length) {
        return a.length > b.length;
      }
      return a.id < b.id;
    });
  }

  std::vector<PackedBatch> batches;
  for (const auto& s : order) {
    PackedBatch* slot = nullptr;
    for (auto& batch : batches) {
      if (batch.used() + s.length <= batch.capacity) {
        slot = &batch;
        break;
      }
    }
    if (slot == nullptr) {
      batches.emplace_back();
      slot = &batches.back();
      slot->capacity = target_length;
      slot->boundaries.push_back(0);
    }
    slot->entries.push_back({s.id, slot->used(), s.length});
    slot->boundaries.push_back(slot->used() + s.length);
  }
  return batches;
}

double padding_ratio(const std::vector<PackedBatch>& batches) {
  if (batches.empty()) {
    return 0.0;
  }
  double used = 0.0;
  double budget = 0.0;
  for (const auto& b : batches) {
    used += static_cast<double>(b.used());
    budget += static_cast<double>(b.capacity);
  }
  return 1.0 - used / budget;
}

std::vector<PackedBatch> StreamingPacker::push(const Sample& sample) {
  buffer_.push_back(sample);
  buffered_tokens_ += sample.length;
  if (buffered_tokens_ >= buffer_factor_ * target_length_) {
    return flush();
  }
  return {};
}

std::vector<PackedBatch> StreamingPacker::flush() {
  if (buffer_.empty()) {
    return {};
  }
  auto batches = pack(buffer_, target_length_, policy_);
  buffer_.clear();
  buffered_tokens_ = 0;
  return batches;
}

} // namespace omniplan
