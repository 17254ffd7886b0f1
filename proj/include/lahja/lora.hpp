// Copyright (C) 2026 The Lahja Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lahja/safetensors.hpp"
#include "lahja/ties.hpp"

namespace lahja {

// One low-rank adapter pair: the effective delta to `target_name` is
// (alpha / rank) * B * A with A of shape rank x d_in and B of d_out x rank.
struct LoraPair {
  std::string target_name;
  TensorData A;
  TensorData B;
  double alpha = 0.0;
  std::int64_t rank = 0;

  void validate() const {
    if (A.shape.size() != 2 || B.shape.size() != 2) {
      throw std::invalid_argument("lora '" + target_name + "': A and B must be matrices");
    }
    if (rank < 1) throw std::invalid_argument("lora '" + target_name + "': rank must be >= 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("lora '" + target_name + "': alpha must be > 0");
    if (A.shape[0] != rank || B.shape[1] != rank) {
      throw std::invalid_argument("lora '" + target_name +
                                  "': inner dimensions disagree with rank " + std::to_string(rank));
    }
  }
};

// Dense delta (alpha / rank) * B * A, accumulated in double per output row.
inline TensorData materialize(const LoraPair& pair) {
  pair.validate();
  const std::int64_t r = pair.rank;
  const std::int64_t d_in = pair.A.shape[1];
  const std::int64_t d_out = pair.B.shape[0];
  const double scale = pair.alpha / static_cast<double>(r);

  TensorData delta;
  delta.shape = {d_out, d_in};
  delta.data.resize(static_cast<std::size_t>(d_out * d_in));
  std::vector<double> row(static_cast<std::size_t>(d_in));
  for (std::int64_t i = 0; i < d_out; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    for (std::int64_t k = 0; k < r; ++k) {
      const double b = pair.B.data[static_cast<std::size_t>(i * r + k)];
      const float* a_row = pair.A.data.data() + k * d_in;
      for (std::int64_t j = 0; j < d_in; ++j) {
        row[static_cast<std::size_t>(j)] += b * static_cast<double>(a_row[j]);
      }
    }
    float* out = delta.data.data() + i * d_in;
    for (std::int64_t j = 0; j < d_in; ++j) {
      out[j] = static_cast<float>(scale * row[static_cast<std::size_t>(j)]);
    }
  }
  return delta;
}

struct LoraOverrides {
  std::optional<double> alpha;
  std::optional<std::int64_t> rank;
};

namespace detail {

inline const std::string kLoraASuffix = ".lora_A.weight";
inline const std::string kLoraBSuffix = ".lora_B.weight";

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace detail

inline bool has_lora_pairs(const TensorArchive& archive) {
  for (const auto& [name, tensor] : archive.tensors) {
    if (detail::ends_with(name, detail::kLoraASuffix)) return true;
  }
  return false;
}

// Pairs <target>.lora_A.weight with <target>.lora_B.weight. Alpha and rank
// come from overrides first, then the archive metadata keys "lora_alpha" and
// "r"; rank falls back to A's leading dimension.
inline std::vector<LoraPair> collect_lora_pairs(const TensorArchive& archive,
                                                const LoraOverrides& overrides = {}) {
  std::optional<double> alpha = overrides.alpha;
  std::optional<std::int64_t> rank = overrides.rank;
  if (!alpha) {
    auto it = archive.metadata.find("lora_alpha");
    if (it != archive.metadata.end()) {
      try {
        alpha = std::stod(it->second);
      } catch (const std::exception&) {
        throw std::invalid_argument("adapter metadata 'lora_alpha' is not a number: " + it->second);
      }
    }
  }
  if (!rank) {
    auto it = archive.metadata.find("r");
    if (it != archive.metadata.end()) {
      try {
        rank = std::stoll(it->second);
      } catch (const std::exception&) {
        throw std::invalid_argument("adapter metadata 'r' is not an integer: " + it->second);
      }
    }
  }

  std::vector<LoraPair> pairs;
  for (const auto& [name, tensor] : archive.tensors) {
    if (!detail::ends_with(name, detail::kLoraASuffix)) continue;
    const std::string target = name.substr(0, name.size() - detail::kLoraASuffix.size());
    auto b_it = archive.tensors.find(target + detail::kLoraBSuffix);
    if (b_it == archive.tensors.end()) {
      throw std::invalid_argument("adapter tensor '" + name + "' has no matching lora_B weight");
    }
    LoraPair pair;
    pair.target_name = target;
    pair.A = tensor;
    pair.B = b_it->second;
    if (pair.A.shape.size() != 2) {
      throw std::invalid_argument("lora '" + target + "': A is not a matrix");
    }
    pair.rank = rank.value_or(pair.A.shape[0]);
    if (!alpha) {
      throw std::invalid_argument("adapter for '" + target +
                                  "' has no lora_alpha metadata; pass an explicit alpha");
    }
    pair.alpha = *alpha;
    pair.validate();
    pairs.push_back(std::move(pair));
  }
  for (const auto& [name, tensor] : archive.tensors) {
    if (detail::ends_with(name, detail::kLoraBSuffix)) {
      const std::string target = name.substr(0, name.size() - detail::kLoraBSuffix.size());
      if (archive.tensors.count(target + detail::kLoraASuffix) == 0) {
        throw std::invalid_argument("adapter tensor '" + name + "' has no matching lora_A weight");
      }
    }
  }
  if (pairs.empty()) {
    throw std::invalid_argument("archive contains no LoRA adapter pairs");
  }
  return pairs;
}

// Turns one adapter archive into a task vector. In materialized space LoRA
// pairs become dense deltas keyed by target name; in factor space the raw
// A/B factors are kept as-is. Archives without LoRA pairs are treated as
// task vectors of ready-made deltas.
inline TaskVector task_vector_from_archive(const TensorArchive& archive, MergeSpace space,
                                           const LoraOverrides& overrides = {}) {
  TaskVector task;
  if (!has_lora_pairs(archive)) {
    for (const auto& [name, tensor] : archive.tensors) task.emplace(name, tensor);
    return task;
  }
  if (space == MergeSpace::Factor) {
    for (const auto& [name, tensor] : archive.tensors) task.emplace(name, tensor);
    return task;
  }
  for (LoraPair& pair : collect_lora_pairs(archive, overrides)) {
    task.emplace(pair.target_name, materialize(pair));
  }
  return task;
}

}  // namespace lahja
