// Copyright (C) 2026 The Lahja Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace lahja {

// Output of a dialect scorer for one text: a level-of-dialectness score and
// a per-dialect probability distribution, plus the dialect the caller asked
// about.
struct DialectScore {
  double aldi = 0.0;
  std::map<std::string, double> nadi_probs;
  std::string target_dialect;

  void validate() const {
    if (!(aldi >= 0.0 && aldi <= 1.0)) {
      throw std::invalid_argument("dialect score: aldi outside [0,1]");
    }
    for (const auto& [label, p] : nadi_probs) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("dialect score: probability for '" + label + "' outside [0,1]");
      }
    }
  }
};

// Dialect-fidelity score: level of dialectness times the classifier
// probability of the requested dialect.
inline double adi2(const DialectScore& score) {
  auto it = score.nadi_probs.find(score.target_dialect);
  if (it == score.nadi_probs.end()) {
    throw std::runtime_error("adi2: target dialect '" + score.target_dialect +
                             "' missing from scorer output (scorer/config mismatch)");
  }
  return score.aldi * it->second;
}

enum class ObjectiveKind { Adi2, Chrfpp, Combined };

inline std::string to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::Adi2: return "adi2";
    case ObjectiveKind::Chrfpp: return "chrf";
    case ObjectiveKind::Combined: return "combined";
  }
  throw std::logic_error("unreachable objective kind");
}

inline ObjectiveKind parse_objective(const std::string& name) {
  if (name == "adi2") return ObjectiveKind::Adi2;
  if (name == "chrf") return ObjectiveKind::Chrfpp;
  if (name == "combined") return ObjectiveKind::Combined;
  throw std::invalid_argument("unknown objective '" + name + "' (expected adi2, chrf or combined)");
}

// Convex combination of a dialect-fidelity score and a chrF++ component.
inline double combined_objective(double adi2_score, double chrf_component, double weight = 0.5) {
  if (!(adi2_score >= 0.0 && adi2_score <= 1.0)) {
    throw std::invalid_argument("combined objective: adi2 component outside [0,1]");
  }
  if (!(chrf_component >= 0.0 && chrf_component <= 1.0)) {
    throw std::invalid_argument("combined objective: chrf component outside [0,1]");
  }
  if (!(weight >= 0.0 && weight <= 1.0)) {
    throw std::invalid_argument("combined objective: weight outside [0,1]");
  }
  return weight * adi2_score + (1.0 - weight) * chrf_component;
}

}  // namespace lahja
