// Copyright (C) 2026 The Lahja Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "lahja/chrf.hpp"
#include "lahja/dialect.hpp"
#include "lahja/parallel.hpp"
#include "lahja/scorer.hpp"

namespace lahja {

enum class Direction { DaToEn, EnToDa, DaToMsa, MsaToDa };

inline std::string to_string(Direction d) {
  switch (d) {
    case Direction::DaToEn: return "da-en";
    case Direction::EnToDa: return "en-da";
    case Direction::DaToMsa: return "da-msa";
    case Direction::MsaToDa: return "msa-da";
  }
  throw std::logic_error("unreachable direction");
}

inline std::string display_name(Direction d) {
  switch (d) {
    case Direction::DaToEn: return "DA->EN";
    case Direction::EnToDa: return "EN->DA";
    case Direction::DaToMsa: return "DA->MSA";
    case Direction::MsaToDa: return "MSA->DA";
  }
  throw std::logic_error("unreachable direction");
}

inline Direction parse_direction(const std::string& name) {
  if (name == "da-en") return Direction::DaToEn;
  if (name == "en-da") return Direction::EnToDa;
  if (name == "da-msa") return Direction::DaToMsa;
  if (name == "msa-da") return Direction::MsaToDa;
  throw std::invalid_argument("unknown direction '" + name +
                              "' (expected da-en, en-da, da-msa or msa-da)");
}

enum class Averaging { Micro, SentenceMean };
enum class ReportFormat { Json, Csv, TextTable };
enum class ScoreScale { Unit, Percent };

// Mean per-output ADI2 over a monolingual corpus. Scoring parallelizes per
// output; the reduction runs in fixed index order.
inline double eval_monolingual(const std::vector<std::string>& outputs, const std::string& dialect,
                               const ScorerBackend& backend, unsigned jobs = 1) {
  if (outputs.empty()) throw std::invalid_argument("monolingual eval: no outputs");
  std::vector<double> scores(outputs.size(), 0.0);
  parallel_for(outputs.size(), jobs, [&](std::size_t i) {
    try {
      scores[i] = adi2(score_text(outputs[i], dialect, backend));
    } catch (const std::exception& e) {
      throw std::runtime_error("monolingual eval: output " + std::to_string(i) + ": " + e.what());
    }
  });
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(scores.size());
}

// Corpus chrF++ over aligned output/reference pairs. Micro averaging sums
// per-order n-gram counts across segments before scoring; SentenceMean
// averages per-sentence scores instead.
inline double eval_translation(const std::vector<std::string>& outputs,
                               const std::vector<std::string>& references,
                               const ChrfConfig& cfg = {}, Averaging averaging = Averaging::Micro,
                               unsigned jobs = 1) {
  cfg.validate();
  if (outputs.empty()) throw std::invalid_argument("translation eval: no outputs");
  if (outputs.size() != references.size()) {
    throw std::invalid_argument("translation eval: " + std::to_string(outputs.size()) +
                                " outputs vs " + std::to_string(references.size()) + " references");
  }

  if (averaging == Averaging::SentenceMean) {
    std::vector<double> scores(outputs.size(), 0.0);
    parallel_for(outputs.size(), jobs,
                 [&](std::size_t i) { scores[i] = chrfpp_sentence(outputs[i], references[i], cfg); });
    double sum = 0.0;
    for (double s : scores) sum += s;
    return sum / static_cast<double>(scores.size());
  }

  std::vector<ChrfStatistics> stats(outputs.size(), ChrfStatistics(cfg));
  parallel_for(outputs.size(), jobs, [&](std::size_t i) {
    stats[i].add(extract_profile(outputs[i], cfg), extract_profile(references[i], cfg));
  });
  ChrfStatistics total(cfg);
  for (const ChrfStatistics& s : stats) total.merge(s);
  return total.fscore(cfg);
}

// One row of the results table: monolingual ADI2 plus chrF++ per translation
// direction, with the configuration that produced it.
struct EvalReport {
  std::string dialect;
  std::optional<double> mono_adi2;
  std::map<Direction, double> chrf_by_direction;
  std::map<std::string, std::size_t> counts;
  std::string config_fingerprint;
};

namespace detail {

// Shortest round-trip decimal form, identical to the JSON serialization so
// every output format renders the same digits.
inline std::string format_number(double value) { return nlohmann::json(value).dump(); }

inline double scaled_chrf(double value, ScoreScale scale) {
  return scale == ScoreScale::Percent ? value * 100.0 : value;
}

}  // namespace detail

// Serializes a report. PERCENT scales chrF++ by 100; ADI2 always stays on
// the unit scale.
inline std::string emit_report(const EvalReport& report, ReportFormat format,
                               ScoreScale scale = ScoreScale::Unit) {
  if (format == ReportFormat::Json) {
    nlohmann::json object;
    object["dialect"] = report.dialect;
    object["config"] = report.config_fingerprint;
    object["scale"] = scale == ScoreScale::Percent ? "percent" : "unit";
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [task, count] : report.counts) counts[task] = count;
    object["counts"] = std::move(counts);
    nlohmann::json scores = nlohmann::json::object();
    if (report.mono_adi2) scores["adi2"] = *report.mono_adi2;
    nlohmann::json chrf = nlohmann::json::object();
    for (const auto& [direction, value] : report.chrf_by_direction) {
      chrf[to_string(direction)] = detail::scaled_chrf(value, scale);
    }
    scores["chrf"] = std::move(chrf);
    object["scores"] = std::move(scores);
    return object.dump(2) + "\n";
  }

  if (format == ReportFormat::Csv) {
    std::ostringstream out;
    out << "dialect,task,score,count\n";
    auto count_of = [&](const std::string& task) {
      auto it = report.counts.find(task);
      return it != report.counts.end() ? it->second : 0;
    };
    if (report.mono_adi2) {
      out << report.dialect << ",adi2," << detail::format_number(*report.mono_adi2) << ","
          << count_of("adi2") << "\n";
    }
    for (const auto& [direction, value] : report.chrf_by_direction) {
      out << report.dialect << "," << to_string(direction) << ","
          << detail::format_number(detail::scaled_chrf(value, scale)) << ","
          << count_of(to_string(direction)) << "\n";
    }
    return out.str();
  }

  // Text table shaped like the results tables: dialect row, ADI2 plus the
  // four translation directions as columns.
  const std::vector<Direction> directions = {Direction::DaToEn, Direction::EnToDa,
                                             Direction::DaToMsa, Direction::MsaToDa};
  std::vector<std::string> headers = {"Dialect", "ADI2"};
  for (Direction d : directions) headers.push_back(display_name(d));
  std::vector<std::string> row = {report.dialect};
  row.push_back(report.mono_adi2 ? detail::format_number(*report.mono_adi2) : "-");
  for (Direction d : directions) {
    auto it = report.chrf_by_direction.find(d);
    row.push_back(it != report.chrf_by_direction.end()
                      ? detail::format_number(detail::scaled_chrf(it->second, scale))
                      : "-");
  }
  std::vector<std::size_t> widths(headers.size());
  for (std::size_t i = 0; i < headers.size(); ++i) {
    widths[i] = std::max(headers[i].size(), row[i].size());
  }
  std::ostringstream out;
  auto emit_row = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out << cells[i] << std::string(widths[i] - cells[i].size(), ' ');
      out << (i + 1 < cells.size() ? "  " : "");
    }
    out << "\n";
  };
  emit_row(headers);
  std::size_t total_width = 0;
  for (std::size_t w : widths) total_width += w;
  out << std::string(total_width + 2 * (widths.size() - 1), '-') << "\n";
  emit_row(row);
  out << "config: " << report.config_fingerprint << "\n";
  return out.str();
}

}  // namespace lahja
