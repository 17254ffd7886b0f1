// Copyright (C) 2026 The Lahja Authors
// SPDX-License-Identifier: Apache-2.0
//
// JSONL schemas:
//   prompts     {"prompt_id": str, "source": str}
//   candidates  {"prompt_id": str, "source": str, "candidates": [str, ...]}
//   selections  {"prompt_id": str, "chosen_index": int, "chosen_text": str,
//                "scores": [num, ...], "objective": str}

#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "lahja/mbr.hpp"

namespace lahja {

struct PromptRecord {
  std::string prompt_id;
  std::string source;
};

namespace detail {

inline nlohmann::json parse_jsonl_line(const std::string& line, std::size_t line_number) {
  try {
    nlohmann::json value = nlohmann::json::parse(line);
    if (!value.is_object()) {
      throw std::runtime_error("line " + std::to_string(line_number) + ": not a JSON object");
    }
    return value;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("line " + std::to_string(line_number) + ": " + e.what());
  }
}

inline std::string require_string(const nlohmann::json& object, const char* key,
                                  std::size_t line_number) {
  if (!object.contains(key) || !object[key].is_string()) {
    throw std::runtime_error("line " + std::to_string(line_number) + ": missing string field \"" +
                             key + "\"");
  }
  return object[key].get<std::string>();
}

}  // namespace detail

inline CandidateSet parse_candidate_set_line(const std::string& line, std::size_t line_number) {
  const nlohmann::json object = detail::parse_jsonl_line(line, line_number);
  CandidateSet set;
  set.prompt_id = detail::require_string(object, "prompt_id", line_number);
  set.source = detail::require_string(object, "source", line_number);
  if (!object.contains("candidates") || !object["candidates"].is_array()) {
    throw std::runtime_error("line " + std::to_string(line_number) +
                             ": missing array field \"candidates\"");
  }
  std::size_t index = 0;
  for (const auto& entry : object["candidates"]) {
    if (!entry.is_string()) {
      throw std::runtime_error("line " + std::to_string(line_number) +
                               ": candidate entries must be strings");
    }
    set.candidates.push_back(Candidate{index++, entry.get<std::string>(), {}});
  }
  if (set.candidates.empty()) {
    throw std::runtime_error("line " + std::to_string(line_number) + ": empty candidate list for '" +
                             set.prompt_id + "'");
  }
  return set;
}

inline std::string candidate_set_to_json_line(const CandidateSet& set) {
  nlohmann::json object;
  object["prompt_id"] = set.prompt_id;
  object["source"] = set.source;
  auto texts = nlohmann::json::array();
  for (const Candidate& c : set.candidates) texts.push_back(c.text);
  object["candidates"] = std::move(texts);
  return object.dump();
}

inline PromptRecord parse_prompt_line(const std::string& line, std::size_t line_number) {
  const nlohmann::json object = detail::parse_jsonl_line(line, line_number);
  return PromptRecord{detail::require_string(object, "prompt_id", line_number),
                      detail::require_string(object, "source", line_number)};
}

inline std::string selection_to_json_line(const std::string& prompt_id,
                                          const SelectionResult& result) {
  nlohmann::json object;
  object["prompt_id"] = prompt_id;
  object["chosen_index"] = result.chosen_index;
  object["chosen_text"] = result.chosen_text;
  object["scores"] = result.scores;
  object["objective"] = to_string(result.objective);
  return object.dump();
}

inline std::vector<CandidateSet> load_candidates(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::vector<CandidateSet> sets;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(file, line)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      sets.push_back(parse_candidate_set_line(line, line_number));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ": " + e.what());
    }
  }
  return sets;
}

inline void save_candidates(const std::vector<CandidateSet>& sets, const std::string& path) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (const CandidateSet& set : sets) {
    file << candidate_set_to_json_line(set) << '\n';
  }
  if (!file) throw std::runtime_error("error while writing '" + path + "'");
}

}  // namespace lahja
