// Copyright (C) 2026 The Lahja Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>

#include "httplib.h"
#include "json.hpp"

#include "lahja/chrf.hpp"
#include "lahja/dialect.hpp"
#include "lahja/mbr.hpp"

namespace lahja {

// Deterministic lexicon-based test double. It counts dialect marker tokens;
// it is not a model and makes no attempt to approximate one.
struct StubScorerConfig {
  std::map<std::string, std::set<std::string>> lexicon;

  void validate() const {
    if (lexicon.empty()) throw std::invalid_argument("stub scorer: empty lexicon");
    for (const auto& [dialect, markers] : lexicon) {
      if (markers.empty()) {
        throw std::invalid_argument("stub scorer: no markers configured for dialect '" + dialect + "'");
      }
    }
  }
};

struct RemoteScorerConfig {
  std::string endpoint;       // base URL, e.g. http://127.0.0.1:8423
  double timeout_seconds = 30.0;
  int max_retries = 2;
  std::string auth_token;
};

using ScorerBackend = std::variant<StubScorerConfig, RemoteScorerConfig>;

// A small built-in lexicon of distinctive dialect markers, enough to drive
// the stub scorer out of the box. Override with --lexicon for real use.
inline StubScorerConfig default_stub_lexicon() {
  StubScorerConfig cfg;
  cfg.lexicon["syrian"] = {"شلون", "هلق", "شو", "هيك", "ليش", "منيح"};
  cfg.lexicon["moroccan"] = {"واش", "بزاف", "دابا", "ديال", "فين", "مزيان"};
  cfg.lexicon["saudi"] = {"وش", "مرة", "الحين", "كذا", "ليه", "زين"};
  return cfg;
}

namespace detail {

inline DialectScore score_with_stub(const std::string& text, const std::string& target_dialect,
                                    const StubScorerConfig& cfg) {
  cfg.validate();
  if (cfg.lexicon.count(target_dialect) == 0) {
    throw std::invalid_argument("stub scorer: unknown dialect label '" + target_dialect + "'");
  }
  const std::vector<std::string> tokens = split_whitespace(text);

  std::map<std::string, std::size_t> marker_counts;
  for (const auto& [dialect, markers] : cfg.lexicon) {
    std::size_t count = 0;
    for (const std::string& token : tokens) {
      if (markers.count(token) != 0) ++count;
    }
    marker_counts[dialect] = count;
  }

  DialectScore score;
  score.target_dialect = target_dialect;
  if (!tokens.empty()) {
    const double ratio =
        static_cast<double>(marker_counts[target_dialect]) / static_cast<double>(tokens.size());
    score.aldi = std::min(1.0, std::max(0.0, ratio));
  }
  // Add-one smoothing keeps the distribution defined for marker-free text.
  double total = 0.0;
  for (const auto& [dialect, count] : marker_counts) total += static_cast<double>(count) + 1.0;
  for (const auto& [dialect, count] : marker_counts) {
    score.nadi_probs[dialect] = (static_cast<double>(count) + 1.0) / total;
  }
  return score;
}

inline DialectScore score_with_remote(const std::string& text, const std::string& target_dialect,
                                      const RemoteScorerConfig& cfg) {
  using nlohmann::json;
  const json request = {{"text", text}, {"target_dialect", target_dialect}};
  const std::string body = request.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    httplib::Client client(cfg.endpoint);
    const auto seconds = static_cast<time_t>(cfg.timeout_seconds);
    const auto micros =
        static_cast<time_t>((cfg.timeout_seconds - static_cast<double>(seconds)) * 1e6);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    if (!cfg.auth_token.empty()) client.set_bearer_token_auth(cfg.auth_token);

    httplib::Result result = client.Post("/score", body, "application/json");
    if (!result) {
      last_error = "transport failure: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status < 200 || result->status >= 300) {
      last_error = "scorer returned HTTP " + std::to_string(result->status);
      continue;
    }

    json response;
    try {
      response = json::parse(result->body);
    } catch (const json::exception& e) {
      throw std::runtime_error(std::string("remote scorer schema violation: body is not JSON: ") +
                               e.what());
    }
    if (!response.is_object() || !response.contains("aldi") || !response["aldi"].is_number() ||
        !response.contains("nadi_probs") || !response["nadi_probs"].is_object()) {
      throw std::runtime_error(
          "remote scorer schema violation: expected {\"aldi\": number, \"nadi_probs\": object}");
    }
    DialectScore score;
    score.target_dialect = target_dialect;
    score.aldi = response["aldi"].get<double>();
    for (const auto& [label, p] : response["nadi_probs"].items()) {
      if (!p.is_number()) {
        throw std::runtime_error("remote scorer schema violation: probability for '" + label +
                                 "' is not a number");
      }
      score.nadi_probs[label] = p.get<double>();
    }
    score.validate();
    return score;
  }
  throw std::runtime_error("remote scorer at " + cfg.endpoint + " failed after " +
                           std::to_string(cfg.max_retries + 1) + " attempts: " + last_error);
}

}  // namespace detail

inline DialectScore score_text(const std::string& text, const std::string& target_dialect,
                               const ScorerBackend& backend) {
  if (const auto* stub = std::get_if<StubScorerConfig>(&backend)) {
    return detail::score_with_stub(text, target_dialect, *stub);
  }
  return detail::score_with_remote(text, target_dialect, std::get<RemoteScorerConfig>(backend));
}

// Adapts a scorer backend to the per-candidate scorer the decoding modes
// consume. Safe for concurrent calls; the remote path opens a fresh
// connection per request.
inline CandidateScorer make_adi2_scorer(ScorerBackend backend, std::string target_dialect) {
  return [backend = std::move(backend), target_dialect = std::move(target_dialect)](
             const std::string& text) { return adi2(score_text(text, target_dialect, backend)); };
}

inline std::string scorer_id(const ScorerBackend& backend) {
  if (std::holds_alternative<StubScorerConfig>(backend)) return "stub";
  return "remote:" + std::get<RemoteScorerConfig>(backend).endpoint;
}

}  // namespace lahja
