// Copyright (C) 2026 The Lahja Authors
// SPDX-License-Identifier: Apache-2.0
//
// Hand-enumerated sentence pairs with scores precomputed by the brute-force
// enumerator in oracles.hpp and frozen here as golden constants. The short
// pairs use an alphabet of at most four letters; the last three are real
// Arabic-script pairs (dialect/MSA paraphrases).

#pragma once

#include <string>
#include <vector>

namespace lahja::golden {

struct ChrfCase {
  std::string hypothesis;
  std::string reference;
  double expected;
};

inline const std::vector<ChrfCase>& chrf_cases() {
  static const std::vector<ChrfCase> cases = {
      {"ab", "ab", 1.0},
      {"ab", "abc", 0.31746031746031744},
      {"aa", "ab", 0.16666666666666666},
      {"", "cat", 0.0},
      {"cat", "", 0.0},
      {"", "", 1.0},
      {"a", "a", 1.0},
      {"a", "b", 0.0},
      {"ab", "ba", 0.33333333333333331},
      {"abc", "cab", 0.375},
      {"abcd", "abcd", 1.0},
      {"abab", "ab", 0.30952380952380953},
      {"aabb", "ab", 0.30952380952380953},
      {"a b", "ab", 0.5},
      {"a b c", "a b c", 1.0},
      {"a b", "b a", 0.5},
      {"ab cd", "cd ab", 0.44444444444444442},
      {"aaaa", "aa", 0.30952380952380953},
      {"abcd", "dcba", 0.20000000000000001},
      {"ab cd", "ab dc", 0.30555555555555552},
      {"a", "aaaa", 0.058823529411764705},
      {"ca b", "ab c", 0.29999999999999999},
      {"شلون حالك اليوم", "كيف حالك اليوم", 0.64030217186863747},
      {"أريد أن أذهب إلى السوق", "بدي روح عالسوق", 0.19778978258510038},
      {"هذا كتاب جميل جدا", "هاد الكتاب كتير حلو", 0.14267776833248227},
  };
  return cases;
}

// Micro-averaged corpus score over {("ab","abc"), ("cat","cat")}, frozen
// from the same enumerator.
inline constexpr double kCorpusTwoPairs = 0.67677455132083086;

}  // namespace lahja::golden
