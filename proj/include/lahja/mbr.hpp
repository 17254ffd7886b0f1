// Copyright (C) 2026 The Lahja Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lahja/chrf.hpp"
#include "lahja/dialect.hpp"

namespace lahja {

struct Candidate {
  std::size_t index = 0;
  std::string text;
  std::map<std::string, std::string> meta;
};

// Sampled outputs for one prompt, in sampling order. Indices are 0..n-1.
struct CandidateSet {
  std::string prompt_id;
  std::string source;
  std::vector<Candidate> candidates;

  void validate() const {
    if (candidates.empty()) {
      throw std::invalid_argument("candidate set '" + prompt_id + "' is empty");
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (candidates[i].index != i) {
        throw std::invalid_argument("candidate set '" + prompt_id +
                                    "' has non-sequential candidate indices");
      }
    }
  }

  static CandidateSet from_texts(std::string prompt_id, std::string source,
                                 std::vector<std::string> texts) {
    CandidateSet set;
    set.prompt_id = std::move(prompt_id);
    set.source = std::move(source);
    set.candidates.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
      set.candidates.push_back(Candidate{i, std::move(texts[i]), {}});
    }
    return set;
  }
};

struct SelectionResult {
  std::size_t chosen_index = 0;
  std::string chosen_text;
  std::vector<double> scores;
  ObjectiveKind objective = ObjectiveKind::Adi2;
};

using PairwiseUtility =
    std::function<double(const std::string& hypothesis, const std::string& pseudo_reference)>;
using CandidateScorer = std::function<double(const std::string& text)>;

namespace detail {

// Lowest index attaining the maximum. Ties always break toward the earliest
// sampling index so selection is reproducible.
inline std::size_t argmax_lowest(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

inline SelectionResult make_result(const CandidateSet& set, std::vector<double> scores,
                                   ObjectiveKind objective) {
  SelectionResult result;
  result.scores = std::move(scores);
  result.chosen_index = argmax_lowest(result.scores);
  result.chosen_text = set.candidates[result.chosen_index].text;
  result.objective = objective;
  return result;
}

}  // namespace detail

// Expected-utility selection against the candidate set itself as the
// pseudo-reference set, self-comparison included:
//   scores[i] = (1/N) * sum_j utility(candidate_i, candidate_j)
// Summation runs in fixed index order, so results do not depend on
// evaluation schedule.
inline SelectionResult mbr_select(const CandidateSet& set, const PairwiseUtility& utility,
                                  ObjectiveKind objective = ObjectiveKind::Chrfpp) {
  set.validate();
  if (!utility) throw std::invalid_argument("mbr_select: no pairwise utility configured");
  const std::size_t n = set.candidates.size();
  std::vector<double> scores(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sum += utility(set.candidates[i].text, set.candidates[j].text);
    }
    scores[i] = sum / static_cast<double>(n);
  }
  return detail::make_result(set, std::move(scores), objective);
}

// Reference-free reranking: each candidate scored independently.
inline SelectionResult rerank_select(const CandidateSet& set, const CandidateScorer& scorer,
                                     ObjectiveKind objective = ObjectiveKind::Adi2) {
  set.validate();
  if (!scorer) throw std::invalid_argument("rerank_select: no scorer configured");
  const std::size_t n = set.candidates.size();
  std::vector<double> scores(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    try {
      scores[i] = scorer(set.candidates[i].text);
    } catch (const std::exception& e) {
      throw std::runtime_error("prompt '" + set.prompt_id + "': scorer failed on candidate " +
                               std::to_string(i) + ": " + e.what());
    }
  }
  return detail::make_result(set, std::move(scores), objective);
}

// Runs the configured decoding objective over one candidate set.
//   Adi2     — independent reranking by the dialect scorer.
//   Chrfpp   — pairwise expected utility with sentence chrF++; n-gram
//              profiles are extracted once per candidate and reused for all
//              N^2 pair scores.
//   Combined — weight * adi2 + (1 - weight) * mean pairwise chrF++ of the
//              candidate against the whole set (a reference-free chrF
//              component, since no reference exists at decode time).
inline SelectionResult select_with_objective(const CandidateSet& set, ObjectiveKind objective,
                                             const CandidateScorer& adi2_scorer,
                                             const ChrfConfig& chrf_cfg = {},
                                             double combined_weight = 0.5) {
  set.validate();
  chrf_cfg.validate();
  if ((objective == ObjectiveKind::Adi2 || objective == ObjectiveKind::Combined) && !adi2_scorer) {
    throw std::invalid_argument("objective '" + to_string(objective) +
                                "' requires a dialect scorer backend");
  }
  if (objective == ObjectiveKind::Adi2) {
    return rerank_select(set, adi2_scorer, ObjectiveKind::Adi2);
  }

  const std::size_t n = set.candidates.size();
  std::vector<NGramProfile> profiles;
  profiles.reserve(n);
  for (const Candidate& c : set.candidates) profiles.push_back(extract_profile(c.text, chrf_cfg));

  std::vector<double> chrf_means(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sum += chrfpp_from_profiles(profiles[i], profiles[j], chrf_cfg);
    }
    chrf_means[i] = sum / static_cast<double>(n);
  }

  if (objective == ObjectiveKind::Chrfpp) {
    return detail::make_result(set, std::move(chrf_means), ObjectiveKind::Chrfpp);
  }

  std::vector<double> scores(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double adi2_score = 0.0;
    try {
      adi2_score = adi2_scorer(set.candidates[i].text);
    } catch (const std::exception& e) {
      throw std::runtime_error("prompt '" + set.prompt_id + "': scorer failed on candidate " +
                               std::to_string(i) + ": " + e.what());
    }
    scores[i] = combined_objective(adi2_score, chrf_means[i], combined_weight);
  }
  return detail::make_result(set, std::move(scores), ObjectiveKind::Combined);
}

}  // namespace lahja
