// Copyright (C) 2026 The Lahja Authors
// SPDX-License-Identifier: Apache-2.0

#include "lahja/ties.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace lahja {
namespace {

TensorData flat(std::vector<float> values) {
  TensorData t;
  t.shape = {static_cast<std::int64_t>(values.size())};
  t.data = std::move(values);
  return t;
}

TEST(Trim, KeepsLargestMagnitudes) {
  EXPECT_EQ(trim({0.3f, -1.0f, 0.2f, 2.0f}, 0.5),
            (std::vector<float>{0.0f, -1.0f, 0.0f, 2.0f}));
}

TEST(Trim, KeepAllAtFullFraction) {
  const std::vector<float> v = {0.1f, -0.5f, 0.0f, 3.0f};
  EXPECT_EQ(trim(v, 1.0), v);
}

TEST(Trim, MagnitudeTiesKeepTheLowerIndex) {
  EXPECT_EQ(trim({5.0f, -5.0f}, 0.5), (std::vector<float>{5.0f, 0.0f}));
}

TEST(Trim, RoundsKeepCountUp) {
  // ceil(0.2 * 4) = 1
  EXPECT_EQ(trim({1.0f, 2.0f, 3.0f, 4.0f}, 0.2),
            (std::vector<float>{0.0f, 0.0f, 0.0f, 4.0f}));
  // ceil(0.5 * 3) = 2
  EXPECT_EQ(trim({1.0f, 3.0f, 2.0f}, 0.5), (std::vector<float>{0.0f, 3.0f, 2.0f}));
}

TEST(Trim, RejectsOutOfRangeFraction) {
  EXPECT_THROW(trim({1.0f}, 0.0), std::invalid_argument);
  EXPECT_THROW(trim({1.0f}, 1.5), std::invalid_argument);
  EXPECT_EQ(trim({}, 0.5), std::vector<float>{});
}

TEST(ElectSign, SummedMassDecidesEachCoordinate) {
  const std::vector<std::vector<float>> trimmed = {{0.0f, -1.0f, 0.0f, 2.0f},
                                                   {0.0f, -1.2f, 0.0f, -2.2f}};
  EXPECT_EQ(elect_sign(trimmed), (std::vector<signed char>{1, -1, 1, -1}));
}

TEST(ElectSign, SingleVectorKeepsItsOwnSignsWithZerosPositive) {
  EXPECT_EQ(elect_sign({{0.0f, -1.0f, 2.0f}}), (std::vector<signed char>{1, -1, 1}));
}

TEST(ElectSign, ExactCancellationElectsPositive) {
  EXPECT_EQ(elect_sign({{1.0f, -1.0f}, {-1.0f, 1.0f}}), (std::vector<signed char>{1, 1}));
}

TEST(ElectSign, RejectsEmptyAndRagged) {
  EXPECT_THROW(elect_sign({}), std::invalid_argument);
  EXPECT_THROW(elect_sign({{1.0f}, {1.0f, 2.0f}}), std::invalid_argument);
}

TEST(DisjointMerge, MeansOnlySignAgreeingValues) {
  const std::vector<std::vector<float>> trimmed = {{0.0f, -1.0f, 0.0f, 2.0f},
                                                   {0.0f, -1.2f, 0.0f, -2.2f}};
  const std::vector<signed char> signs = {1, -1, 1, -1};
  EXPECT_EQ(disjoint_merge(trimmed, signs),
            (std::vector<float>{0.0f, -1.1f, 0.0f, -2.2f}));
}

TEST(DisjointMerge, IdenticalInputsAreAFixedPoint) {
  const std::vector<float> v = {0.5f, -0.25f, 0.0f, 3.0f};
  EXPECT_EQ(disjoint_merge({v, v}, elect_sign({v, v})), v);
}

TEST(DisjointMerge, AllDisagreeingValuesYieldZero) {
  // Elected sign is +, but force a negative-only coordinate through a sign
  // vector of the caller's choosing.
  EXPECT_EQ(disjoint_merge({{-1.0f}, {-3.0f}}, {1}), std::vector<float>{0.0f});
}

TEST(TiesMerge, ComposesTrimElectAndMergeSteps) {
  const std::vector<TaskVector> tasks = {
      {{"w", flat({0.3f, -1.0f, 0.2f, 2.0f})}},
      {{"w", flat({0.2f, -1.2f, 0.1f, -2.2f})}},
  };
  MergeConfig cfg;
  cfg.trim_fraction = 0.5;
  const TaskVector merged = ties_merge(tasks, cfg);
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(merged.at("w").data, (std::vector<float>{0.0f, -1.1f, 0.0f, -2.2f}));
  EXPECT_EQ(merged.at("w").shape, (std::vector<std::int64_t>{4}));
}

TEST(TiesMerge, PairOfIdenticalVectorsIsIdentity) {
  std::mt19937 rng(42);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  std::vector<float> values(37);
  for (float& x : values) x = dist(rng);
  const TaskVector task = {{"w", flat(values)}};

  MergeConfig cfg;
  cfg.trim_fraction = 1.0;
  cfg.lambda = 1.0;
  const TaskVector merged = ties_merge({task, task}, cfg);
  EXPECT_EQ(merged.at("w").data, values);
}

TEST(TiesMerge, ScalesLinearlyInLambda) {
  std::mt19937 rng(43);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  std::vector<TaskVector> tasks;
  for (int t = 0; t < 3; ++t) {
    std::vector<float> values(24);
    for (float& x : values) x = dist(rng);
    tasks.push_back({{"w", flat(values)}});
  }

  MergeConfig base;
  base.trim_fraction = 0.5;
  const std::vector<float> unit = ties_merge(tasks, base).at("w").data;
  for (double lambda : {0.5, 0.3, 2.0, -1.0}) {
    MergeConfig scaled = base;
    scaled.lambda = lambda;
    const std::vector<float> got = ties_merge(tasks, scaled).at("w").data;
    ASSERT_EQ(got.size(), unit.size());
    for (std::size_t i = 0; i < unit.size(); ++i) {
      EXPECT_EQ(got[i], static_cast<float>(lambda) * unit[i]) << "lambda " << lambda;
    }
  }
}

TEST(TiesMerge, SingleTaskFullFractionHalvedByLambda) {
  const TaskVector task = {{"w", flat({2.0f, -4.0f, 6.0f})}};
  MergeConfig cfg;
  cfg.trim_fraction = 1.0;
  cfg.lambda = 0.5;
  EXPECT_EQ(ties_merge({task}, cfg).at("w").data, (std::vector<float>{1.0f, -2.0f, 3.0f}));
}

TEST(TiesMerge, IntersectPolicyKeepsSharedNamesOnly) {
  const std::vector<TaskVector> tasks = {
      {{"a", flat({1.0f})}, {"b", flat({2.0f})}},
      {{"b", flat({4.0f})}, {"c", flat({8.0f})}},
  };
  MergeConfig cfg;
  cfg.trim_fraction = 1.0;
  const TaskVector merged = ties_merge(tasks, cfg);
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(merged.count("b"), 1u);
  EXPECT_EQ(merged.at("b").data, (std::vector<float>{3.0f}));
}

TEST(TiesMerge, IntersectPolicyWithNoSharedNamesThrows) {
  const std::vector<TaskVector> tasks = {{{"a", flat({1.0f})}}, {{"b", flat({1.0f})}}};
  EXPECT_THROW(ties_merge(tasks, MergeConfig{}), std::invalid_argument);
}

TEST(TiesMerge, UnionErrorPolicyRejectsMismatchedNameSets) {
  MergeConfig cfg;
  cfg.key_policy = KeyPolicy::UnionError;
  const std::vector<TaskVector> mismatched = {
      {{"a", flat({1.0f})}, {"b", flat({2.0f})}},
      {{"a", flat({1.0f})}},
  };
  EXPECT_THROW(ties_merge(mismatched, cfg), std::invalid_argument);

  const std::vector<TaskVector> matched = {{{"a", flat({1.0f})}}, {{"a", flat({3.0f})}}};
  cfg.trim_fraction = 1.0;
  EXPECT_EQ(ties_merge(matched, cfg).at("a").data, (std::vector<float>{2.0f}));
}

TEST(TiesMerge, RejectsShapeMismatchesAndNonFiniteValues) {
  const std::vector<TaskVector> mismatched = {
      {{"w", TensorData{Dtype::F32, {2, 1}, {1.0f, 2.0f}}}},
      {{"w", TensorData{Dtype::F32, {1, 2}, {1.0f, 2.0f}}}},
  };
  EXPECT_THROW(ties_merge(mismatched, MergeConfig{}), std::invalid_argument);

  const std::vector<TaskVector> infinite = {
      {{"w", flat({1.0f, std::numeric_limits<float>::infinity()})}},
  };
  EXPECT_THROW(ties_merge(infinite, MergeConfig{}), std::invalid_argument);
}

TEST(TiesMerge, InvalidConfigRejected) {
  MergeConfig cfg;
  cfg.trim_fraction = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.lambda = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_THROW(ties_merge({}, MergeConfig{}), std::invalid_argument);
}

TEST(TiesMerge, ResultIndependentOfJobCount) {
  std::mt19937 rng(44);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<TaskVector> tasks(3);
  for (auto& task : tasks) {
    for (const char* name : {"a", "b", "c", "d", "e"}) {
      std::vector<float> values(33);
      for (float& x : values) x = dist(rng);
      task.emplace(name, flat(values));
    }
  }
  MergeConfig cfg;
  cfg.trim_fraction = 0.2;
  const TaskVector serial = ties_merge(tasks, cfg, 1);
  const TaskVector threaded = ties_merge(tasks, cfg, 4);
  ASSERT_EQ(serial.size(), threaded.size());
  for (const auto& [name, tensor] : serial) {
    EXPECT_EQ(tensor.data, threaded.at(name).data) << "tensor " << name;
  }
}

TEST(TiesMerge, AgreesWithScanningOracle) {
  std::mt19937 rng(45);
  std::uniform_real_distribution<float> dist(-3.0f, 3.0f);
  const double fractions[] = {0.2, 0.5, 1.0};
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t num_tasks = 1 + rng() % 4;
    const std::size_t numel = 1 + rng() % 64;
    std::vector<TaskVector> tasks(num_tasks);
    std::vector<std::vector<float>> raw(num_tasks);
    for (std::size_t t = 0; t < num_tasks; ++t) {
      raw[t].resize(numel);
      for (float& x : raw[t]) x = dist(rng);
      tasks[t].emplace("w", flat(raw[t]));
    }
    MergeConfig cfg;
    cfg.trim_fraction = fractions[trial % 3];
    cfg.lambda = (trial % 5 == 0) ? 0.7 : 1.0;
    const std::vector<float> got = ties_merge(tasks, cfg).at("w").data;
    const std::vector<float> want = oracle::ties_oracle(raw, cfg.trim_fraction, cfg.lambda);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < numel; ++i) {
      EXPECT_NEAR(got[i], want[i], 1e-12) << "trial " << trial << " coordinate " << i;
    }
  }
}

}  // namespace
}  // namespace lahja
