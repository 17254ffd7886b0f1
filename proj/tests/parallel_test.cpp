// Copyright (C) 2026 The Lahja Authors
// SPDX-License-Identifier: Apache-2.0

#include "lahja/parallel.hpp"

#include <atomic>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

namespace lahja {
namespace {

TEST(ParallelFor, VisitsEveryIndexExactlyOnce) {
  for (unsigned jobs : {1u, 4u, 16u}) {
    for (std::size_t count : {std::size_t{0}, std::size_t{1}, std::size_t{1000}}) {
      std::vector<std::atomic<int>> visits(count);
      parallel_for(count, jobs, [&](std::size_t i) { visits[i].fetch_add(1); });
      for (std::size_t i = 0; i < count; ++i) {
        EXPECT_EQ(visits[i].load(), 1) << "index " << i << " with " << jobs << " jobs";
      }
    }
  }
}

TEST(ParallelFor, SlotResultsIndependentOfJobCount) {
  auto compute = [](unsigned jobs) {
    std::vector<double> out(257, 0.0);
    parallel_for(out.size(), jobs,
                 [&](std::size_t i) { out[i] = static_cast<double>(i) * 0.25 + 1.0; });
    return out;
  };
  const auto serial = compute(1);
  EXPECT_EQ(serial, compute(4));
  EXPECT_EQ(serial, compute(32));
}

TEST(ParallelFor, PropagatesTheFirstException) {
  try {
    parallel_for(100, 4, [](std::size_t i) {
      if (i == 57) throw std::runtime_error("boom at 57");
    });
    FAIL() << "expected the worker exception to be rethrown";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "boom at 57");
  }
}

TEST(ParallelFor, SerialPathPropagatesExceptions) {
  EXPECT_THROW(parallel_for(3, 1, [](std::size_t) { throw std::logic_error("no"); }),
               std::logic_error);
}

TEST(EffectiveJobs, ZeroMeansHardwareConcurrency) {
  EXPECT_GE(effective_jobs(0), 1u);
  EXPECT_EQ(effective_jobs(5), 5u);
  EXPECT_EQ(effective_jobs(1), 1u);
}

}  // namespace
}  // namespace lahja
