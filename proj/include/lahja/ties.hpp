// Copyright (C) 2026 The Lahja Authors
// SPDX-License-Identifier: Apache-2.0
//
// TIES merging of task vectors: per-coordinate magnitude trimming, sign
// election over the summed trimmed mass, and a disjoint mean over the values
// agreeing with the elected sign.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "lahja/parallel.hpp"
#include "lahja/safetensors.hpp"

namespace lahja {

// A task vector maps target tensor names to the parameter delta an adapter
// induces on them.
using TaskVector = std::map<std::string, TensorData>;

enum class MergeSpace { Materialized, Factor };
enum class KeyPolicy { Intersect, UnionError };

struct MergeConfig {
  double trim_fraction = 0.20;
  double lambda = 1.0;
  MergeSpace space = MergeSpace::Materialized;
  KeyPolicy key_policy = KeyPolicy::Intersect;

  void validate() const {
    if (!(trim_fraction > 0.0 && trim_fraction <= 1.0)) {
      throw std::invalid_argument("merge: trim_fraction must be in (0, 1]");
    }
    if (!std::isfinite(lambda)) {
      throw std::invalid_argument("merge: lambda must be finite");
    }
  }
};

// Keeps the ceil(k * len) largest-magnitude entries and zeroes the rest.
// Magnitude ties keep the lower index.
inline std::vector<float> trim(const std::vector<float>& values, double trim_fraction) {
  if (!(trim_fraction > 0.0 && trim_fraction <= 1.0)) {
    throw std::invalid_argument("trim: fraction must be in (0, 1]");
  }
  const std::size_t n = values.size();
  if (n == 0) return {};
  const std::size_t keep = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::ceil(trim_fraction * static_cast<double>(n))));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(values[a]) > std::fabs(values[b]);
  });

  std::vector<float> trimmed(n, 0.0f);
  for (std::size_t i = 0; i < keep; ++i) trimmed[order[i]] = values[order[i]];
  return trimmed;
}

// Per coordinate, the sign of the summed trimmed values; a zero sum elects +.
inline std::vector<signed char> elect_sign(const std::vector<std::vector<float>>& trimmed) {
  if (trimmed.empty()) throw std::invalid_argument("elect_sign: no vectors");
  const std::size_t n = trimmed.front().size();
  for (const auto& v : trimmed) {
    if (v.size() != n) throw std::invalid_argument("elect_sign: vectors differ in length");
  }
  std::vector<signed char> signs(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (const auto& v : trimmed) sum += v[i];
    signs[i] = sum < 0.0 ? -1 : 1;
  }
  return signs;
}

// Per coordinate, the mean of the nonzero values whose sign matches the
// elected sign; coordinates with no surviving values are 0.
inline std::vector<float> disjoint_merge(const std::vector<std::vector<float>>& trimmed,
                                         const std::vector<signed char>& signs) {
  if (trimmed.empty()) throw std::invalid_argument("disjoint_merge: no vectors");
  const std::size_t n = signs.size();
  for (const auto& v : trimmed) {
    if (v.size() != n) throw std::invalid_argument("disjoint_merge: vector length != sign length");
  }
  std::vector<float> merged(n, 0.0f);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& v : trimmed) {
      const float x = v[i];
      if (x == 0.0f) continue;
      if ((signs[i] > 0 && x > 0.0f) || (signs[i] < 0 && x < 0.0f)) {
        sum += x;
        ++count;
      }
    }
    if (count > 0) merged[i] = static_cast<float>(sum / static_cast<double>(count));
  }
  return merged;
}

// Merges task vectors tensor by tensor: trim each task's tensor, elect
// per-coordinate signs, disjoint-merge, then scale by lambda. The scale is
// applied as a final float multiply, so lambda = 1 is an exact identity.
inline TaskVector ties_merge(const std::vector<TaskVector>& tasks, const MergeConfig& cfg,
                             unsigned jobs = 1) {
  cfg.validate();
  if (tasks.empty()) throw std::invalid_argument("ties_merge: no task vectors");

  std::vector<std::string> names;
  switch (cfg.key_policy) {
    case KeyPolicy::Intersect:
      for (const auto& [name, tensor] : tasks.front()) {
        bool everywhere = true;
        for (std::size_t t = 1; t < tasks.size() && everywhere; ++t) {
          everywhere = tasks[t].count(name) != 0;
        }
        if (everywhere) names.push_back(name);
      }
      if (names.empty()) {
        throw std::invalid_argument("ties_merge: task vectors share no tensor names");
      }
      break;
    case KeyPolicy::UnionError:
      for (const auto& task : tasks) {
        if (task.size() != tasks.front().size()) {
          throw std::invalid_argument("ties_merge: task vectors have mismatched tensor name sets");
        }
        for (const auto& [name, tensor] : task) {
          if (tasks.front().count(name) == 0) {
            throw std::invalid_argument("ties_merge: tensor '" + name +
                                        "' is not present in every task vector");
          }
        }
      }
      for (const auto& [name, tensor] : tasks.front()) names.push_back(name);
      break;
  }

  const float lambda = static_cast<float>(cfg.lambda);
  std::vector<TensorData> merged(names.size());
  parallel_for(names.size(), jobs, [&](std::size_t idx) {
    const std::string& name = names[idx];
    const TensorData& first = tasks.front().at(name);
    std::vector<std::vector<float>> trimmed;
    trimmed.reserve(tasks.size());
    for (const auto& task : tasks) {
      const TensorData& tensor = task.at(name);
      if (tensor.shape != first.shape) {
        throw std::invalid_argument("ties_merge: tensor '" + name +
                                    "' has mismatched shapes across tasks");
      }
      for (float x : tensor.data) {
        if (!std::isfinite(x)) {
          throw std::invalid_argument("ties_merge: tensor '" + name + "' contains non-finite values");
        }
      }
      trimmed.push_back(trim(tensor.data, cfg.trim_fraction));
    }
    const std::vector<signed char> signs = elect_sign(trimmed);
    std::vector<float> values = disjoint_merge(trimmed, signs);
    for (float& x : values) x *= lambda;
    merged[idx] = TensorData{Dtype::F32, first.shape, std::move(values)};
  });

  TaskVector out;
  for (std::size_t i = 0; i < names.size(); ++i) out.emplace(names[i], std::move(merged[i]));
  return out;
}

}  // namespace lahja
