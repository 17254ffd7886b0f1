// Copyright (C) 2026 The Lahja Authors
// SPDX-License-Identifier: Apache-2.0

#include "lahja/mbr.hpp"

#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace lahja {
namespace {

TEST(CandidateSetSuite, ValidateRejectsEmptyAndNonSequential) {
  CandidateSet empty;
  empty.prompt_id = "p0";
  EXPECT_THROW(empty.validate(), std::invalid_argument);

  CandidateSet off = CandidateSet::from_texts("p1", "src", {"a", "b"});
  off.candidates[1].index = 5;
  EXPECT_THROW(off.validate(), std::invalid_argument);
}

TEST(CandidateSetSuite, FromTextsAssignsSequentialIndices) {
  const CandidateSet set = CandidateSet::from_texts("p", "src", {"x", "y", "z"});
  ASSERT_EQ(set.candidates.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(set.candidates[i].index, i);
  EXPECT_NO_THROW(set.validate());
}

TEST(MbrSelect, ExpectedUtilityTableWithExactMatchIndicator) {
  const CandidateSet set = CandidateSet::from_texts("p", "", {"aa", "aa", "bb"});
  const auto indicator = [](const std::string& a, const std::string& b) {
    return a == b ? 1.0 : 0.0;
  };
  const SelectionResult result = mbr_select(set, indicator);
  ASSERT_EQ(result.scores.size(), 3u);
  EXPECT_DOUBLE_EQ(result.scores[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(result.scores[1], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(result.scores[2], 1.0 / 3.0);
  EXPECT_EQ(result.chosen_index, 0u);
  EXPECT_EQ(result.chosen_text, "aa");
}

TEST(MbrSelect, SingleCandidateWins) {
  const CandidateSet set = CandidateSet::from_texts("p", "", {"x"});
  const SelectionResult result = mbr_select(set, [](const std::string&, const std::string&) {
    return 0.25;
  });
  EXPECT_EQ(result.chosen_index, 0u);
  EXPECT_EQ(result.chosen_text, "x");
  EXPECT_DOUBLE_EQ(result.scores[0], 0.25);
}

TEST(MbrSelect, AllIdenticalCandidatesBreakTiesTowardIndexZero) {
  const CandidateSet set = CandidateSet::from_texts("p", "", {"q", "q", "q", "q"});
  const SelectionResult result =
      mbr_select(set, [](const std::string&, const std::string&) { return 1.0; });
  EXPECT_EQ(result.chosen_index, 0u);
}

TEST(MbrSelect, MissingUtilityThrows) {
  const CandidateSet set = CandidateSet::from_texts("p", "", {"a"});
  EXPECT_THROW(mbr_select(set, PairwiseUtility{}), std::invalid_argument);
}

TEST(MbrSelect, AgreesWithDoubleLoopOracle) {
  std::mt19937 rng(1234);
  const std::string alphabet = "ab";
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng() % 19;
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < n; ++i) {
      std::string t;
      const std::size_t len = rng() % 9;
      for (std::size_t k = 0; k < len; ++k) t.push_back(alphabet[rng() % alphabet.size()]);
      texts.push_back(std::move(t));
    }
    const CandidateSet set = CandidateSet::from_texts("p", "", texts);
    const SelectionResult got = mbr_select(
        set, [](const std::string& h, const std::string& r) { return chrfpp_sentence(h, r); });
    const oracle::MbrOracleResult want = oracle::mbr_oracle(
        texts, [](const std::string& h, const std::string& r) {
          return oracle::chrf_sentence(h, r);
        });
    ASSERT_EQ(got.scores.size(), want.scores.size());
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(got.scores[i], want.scores[i], 1e-12);
    EXPECT_EQ(got.chosen_index, want.chosen);
  }
}

TEST(RerankSelect, PicksArgmaxWithLowestIndexTieBreak) {
  const CandidateSet set = CandidateSet::from_texts("p", "", {"u", "v", "w"});
  std::vector<double> table = {0.2, 0.9, 0.5};
  const auto by_table = [&](const std::string& text) {
    if (text == "u") return table[0];
    if (text == "v") return table[1];
    return table[2];
  };
  EXPECT_EQ(rerank_select(set, by_table).chosen_index, 1u);

  const CandidateSet pair = CandidateSet::from_texts("p", "", {"u", "v"});
  table = {0.7, 0.7, 0.0};
  EXPECT_EQ(rerank_select(pair, by_table).chosen_index, 0u);

  const auto constant = [](const std::string&) { return 0.42; };
  EXPECT_EQ(rerank_select(set, constant).chosen_index, 0u);
}

TEST(RerankSelect, WrapsScorerFailuresWithContext) {
  const CandidateSet set = CandidateSet::from_texts("night-7", "", {"ok", "bad"});
  const auto scorer = [](const std::string& text) -> double {
    if (text == "bad") throw std::runtime_error("backend unreachable");
    return 0.5;
  };
  try {
    rerank_select(set, scorer);
    FAIL() << "expected the scorer failure to propagate";
  } catch (const std::runtime_error& e) {
    const std::string message = e.what();
    EXPECT_NE(message.find("night-7"), std::string::npos);
    EXPECT_NE(message.find("candidate 1"), std::string::npos);
    EXPECT_NE(message.find("backend unreachable"), std::string::npos);
  }
}

TEST(RerankSelect, MissingScorerThrows) {
  const CandidateSet set = CandidateSet::from_texts("p", "", {"a"});
  EXPECT_THROW(rerank_select(set, CandidateScorer{}), std::invalid_argument);
}

TEST(SelectWithObjective, ChrfEqualsPairwiseMbr) {
  const CandidateSet set = CandidateSet::from_texts("p", "", {"aa", "aa", "bb", "ab"});
  const SelectionResult direct = mbr_select(
      set, [](const std::string& h, const std::string& r) { return chrfpp_sentence(h, r); },
      ObjectiveKind::Chrfpp);
  const SelectionResult cached = select_with_objective(set, ObjectiveKind::Chrfpp, nullptr);
  ASSERT_EQ(cached.scores.size(), direct.scores.size());
  for (std::size_t i = 0; i < direct.scores.size(); ++i) {
    EXPECT_DOUBLE_EQ(cached.scores[i], direct.scores[i]);
  }
  EXPECT_EQ(cached.chosen_index, direct.chosen_index);
  EXPECT_EQ(cached.chosen_text, "aa");
  EXPECT_EQ(cached.objective, ObjectiveKind::Chrfpp);
}

TEST(SelectWithObjective, Adi2DelegatesToRerank) {
  const CandidateSet set = CandidateSet::from_texts("p", "", {"short", "a much longer text"});
  const auto by_length = [](const std::string& text) {
    return static_cast<double>(text.size()) / 100.0;
  };
  const SelectionResult result = select_with_objective(set, ObjectiveKind::Adi2, by_length);
  EXPECT_EQ(result.chosen_index, 1u);
  EXPECT_EQ(result.objective, ObjectiveKind::Adi2);
}

TEST(SelectWithObjective, CombinedWithFullWeightEqualsAdi2) {
  const CandidateSet set = CandidateSet::from_texts("p", "", {"aa", "ab", "bb"});
  const auto scorer = [](const std::string& text) {
    return text == "ab" ? 0.9 : 0.1;
  };
  const SelectionResult adi2_result = select_with_objective(set, ObjectiveKind::Adi2, scorer);
  const SelectionResult combined =
      select_with_objective(set, ObjectiveKind::Combined, scorer, ChrfConfig{}, 1.0);
  EXPECT_EQ(combined.chosen_index, adi2_result.chosen_index);
  ASSERT_EQ(combined.scores.size(), adi2_result.scores.size());
  for (std::size_t i = 0; i < combined.scores.size(); ++i) {
    EXPECT_DOUBLE_EQ(combined.scores[i], adi2_result.scores[i]);
  }
  EXPECT_EQ(combined.objective, ObjectiveKind::Combined);
}

TEST(SelectWithObjective, CombinedBlendsBothComponents) {
  // Two identical candidates: the pairwise chrF++ mean is 1.0 for both, so
  // the blend is 0.5 * adi2 + 0.5.
  const CandidateSet set = CandidateSet::from_texts("p", "", {"aa", "aa"});
  const auto scorer = [](const std::string&) { return 0.2; };
  const SelectionResult result =
      select_with_objective(set, ObjectiveKind::Combined, scorer, ChrfConfig{}, 0.5);
  EXPECT_DOUBLE_EQ(result.scores[0], 0.5 * 0.2 + 0.5 * 1.0);
  EXPECT_DOUBLE_EQ(result.scores[1], 0.5 * 0.2 + 0.5 * 1.0);
  EXPECT_EQ(result.chosen_index, 0u);
}

TEST(SelectWithObjective, ScorerRequiredForAdi2AndCombined) {
  const CandidateSet set = CandidateSet::from_texts("p", "", {"a"});
  EXPECT_THROW(select_with_objective(set, ObjectiveKind::Adi2, nullptr), std::invalid_argument);
  EXPECT_THROW(select_with_objective(set, ObjectiveKind::Combined, nullptr),
               std::invalid_argument);
  EXPECT_NO_THROW(select_with_objective(set, ObjectiveKind::Chrfpp, nullptr));
}

}  // namespace
}  // namespace lahja
