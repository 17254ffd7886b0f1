// Copyright (C) 2026 The Lahja Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "httplib.h"
#include "json.hpp"

#include "lahja/mbr.hpp"

namespace lahja {

// Sampling configuration for an OpenAI-compatible chat-completions server.
struct GenConfig {
  std::string endpoint;  // base URL
  std::string model;
  int num_candidates = 20;
  double temperature = 0.9;
  double top_p = 0.95;
  int max_tokens = 256;
  std::optional<std::int64_t> seed_base;
  double timeout_seconds = 60.0;
  int max_retries = 2;
  std::string auth_token;

  void validate() const {
    if (endpoint.empty()) throw std::invalid_argument("generate: no endpoint configured");
    if (model.empty()) throw std::invalid_argument("generate: no model configured");
    if (num_candidates < 1) throw std::invalid_argument("generate: num_candidates must be >= 1");
    if (!(temperature > 0.0)) throw std::invalid_argument("generate: temperature must be > 0");
    if (!(top_p > 0.0 && top_p <= 1.0)) throw std::invalid_argument("generate: top_p must be in (0, 1]");
    if (max_tokens < 1) throw std::invalid_argument("generate: max_tokens must be >= 1");
    if (max_retries < 0) throw std::invalid_argument("generate: max_retries must be >= 0");
  }
};

namespace detail {

inline std::string fetch_completion(const GenConfig& cfg, const std::string& prompt,
                                    const std::string& prompt_id, std::size_t candidate_index) {
  using nlohmann::json;
  json request = {{"model", cfg.model},
                  {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
                  {"temperature", cfg.temperature},
                  {"top_p", cfg.top_p},
                  {"max_tokens", cfg.max_tokens}};
  if (cfg.seed_base) {
    request["seed"] = *cfg.seed_base + static_cast<std::int64_t>(candidate_index);
  }
  const std::string body = request.dump();
  const std::string context =
      "prompt '" + prompt_id + "' candidate " + std::to_string(candidate_index);

  std::string last_error;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    httplib::Client client(cfg.endpoint);
    const auto seconds = static_cast<time_t>(cfg.timeout_seconds);
    const auto micros =
        static_cast<time_t>((cfg.timeout_seconds - static_cast<double>(seconds)) * 1e6);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    if (!cfg.auth_token.empty()) client.set_bearer_token_auth(cfg.auth_token);

    httplib::Result result = client.Post("/v1/chat/completions", body, "application/json");
    if (!result) {
      last_error = "transport failure: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status < 200 || result->status >= 300) {
      last_error = "server returned HTTP " + std::to_string(result->status);
      continue;
    }
    try {
      const json response = json::parse(result->body);
      return response.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw std::runtime_error(context + ": malformed response body: " + e.what());
    }
  }
  throw std::runtime_error(context + ": generation failed after " +
                           std::to_string(cfg.max_retries + 1) + " attempts: " + last_error);
}

}  // namespace detail

// Samples N candidates with one request each, so any server that implements
// plain chat completions works. Per-request seeds are seed_base + i when a
// seed base is set. The set is atomic: any candidate failing after its
// retries aborts the whole prompt.
inline CandidateSet generate_candidates(const std::string& prompt, const std::string& prompt_id,
                                        const GenConfig& cfg) {
  cfg.validate();
  CandidateSet set;
  set.prompt_id = prompt_id;
  set.source = prompt;
  set.candidates.reserve(static_cast<std::size_t>(cfg.num_candidates));
  for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.num_candidates); ++i) {
    Candidate candidate;
    candidate.index = i;
    candidate.text = detail::fetch_completion(cfg, prompt, prompt_id, i);
    if (cfg.seed_base) {
      candidate.meta["seed"] = std::to_string(*cfg.seed_base + static_cast<std::int64_t>(i));
    }
    set.candidates.push_back(std::move(candidate));
  }
  return set;
}

}  // namespace lahja
