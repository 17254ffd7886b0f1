// Copyright (C) 2026 The Lahja Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: merge adapters, sample candidates, select outputs
// and evaluate corpora. Subcommands stream JSONL in fixed-size chunks, so
// memory stays constant in the number of prompts and output order always
// matches input order no matter how many worker threads run.
//
// Settings resolve as: command-line flags, then environment variables, then
// the --config JSON file, then built-in defaults. CLI11's own config reader
// applies files before environment variables, which would invert the middle
// two layers, so the file and environment layers are resolved here instead.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lahja/candidates_io.hpp"
#include "lahja/chrf.hpp"
#include "lahja/dialect.hpp"
#include "lahja/eval.hpp"
#include "lahja/generate.hpp"
#include "lahja/lora.hpp"
#include "lahja/mbr.hpp"
#include "lahja/parallel.hpp"
#include "lahja/safetensors.hpp"
#include "lahja/scorer.hpp"
#include "lahja/ties.hpp"

namespace {

using namespace lahja;

// ---------------------------------------------------------------------------
// Layered settings: flags > environment > config file > defaults

class LayeredOptions {
 public:
  // Registers a parsed option so an environment variable or config-file key
  // can fill it when the flag is absent. The config key is the long flag
  // name without dashes, under a section named after the subcommand.
  template <typename T>
  void bind(CLI::App* cmd, CLI::Option* opt, T* target, std::string env = "") {
    const std::string flag = "--" + opt->get_lnames().front();
    entries_.push_back({cmd, opt, opt->get_lnames().front(), std::move(env),
                        [target, flag](const std::string& text) {
                          T value{};
                          if (!CLI::detail::lexical_cast(text, value)) {
                            throw std::runtime_error("invalid value '" + text + "' for " + flag);
                          }
                          *target = value;
                        }});
  }

  void resolve(const CLI::App* active, const nlohmann::json& config) {
    nlohmann::json section = nlohmann::json::object();
    if (config.contains(active->get_name())) section = config.at(active->get_name());
    for (const auto& [key, value] : section.items()) {
      (void)value;
      const bool known = std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) {
        return e.cmd == active && e.key == key;
      });
      if (!known) {
        throw std::runtime_error("config file: unknown key '" + key + "' in section '" +
                                 active->get_name() + "'");
      }
    }
    for (const Entry& entry : entries_) {
      if (entry.cmd != active || entry.opt->count() > 0) continue;
      if (!entry.env.empty()) {
        const char* value = std::getenv(entry.env.c_str());
        if (value != nullptr && *value != '\0') {
          entry.set(value);
          continue;
        }
      }
      if (section.contains(entry.key)) {
        const nlohmann::json& value = section.at(entry.key);
        entry.set(value.is_string() ? value.get<std::string>() : value.dump());
      }
    }
  }

 private:
  struct Entry {
    CLI::App* cmd;
    CLI::Option* opt;
    std::string key;
    std::string env;
    std::function<void(const std::string&)> set;
  };
  std::vector<Entry> entries_;
};

nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open config file '" + path + "'");
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(file);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("config file '" + path + "': " + e.what());
  }
  if (!parsed.is_object()) {
    throw std::runtime_error("config file '" + path + "': expected a JSON object");
  }
  static const std::vector<std::string> kSections = {"merge", "generate", "decode", "eval",
                                                     "pipeline"};
  for (const auto& [key, value] : parsed.items()) {
    if (std::find(kSections.begin(), kSections.end(), key) == kSections.end()) {
      throw std::runtime_error("config file '" + path + "': unknown section '" + key + "'");
    }
    if (!value.is_object()) {
      throw std::runtime_error("config file '" + path + "': section '" + key +
                               "' must be an object");
    }
  }
  return parsed;
}

// ---------------------------------------------------------------------------
// Shared option bundles

struct ScorerOptions {
  std::string kind = "stub";
  std::string endpoint;
  std::string token;
  std::string lexicon_path;
  double timeout = 30.0;
  int retries = 2;
};

struct GenOptions {
  std::string endpoint;
  std::string model;
  std::string token;
  int n_candidates = 20;
  double temperature = 0.9;
  double top_p = 0.95;
  int max_tokens = 256;
  std::string seed;  // empty = let the server sample freely
  double timeout = 60.0;
  int retries = 2;
};

struct ChrfOptions {
  int char_n = 6;
  int word_n = 2;
  double beta = 2.0;
};

struct DecodeOptions {
  std::string in_path;
  std::string out_path;
  std::string save_candidates_path;
  std::string dialect;
  std::string objective = "adi2";
  double combined_weight = 0.5;
  unsigned jobs = 1;
};

struct EvalOptions {
  std::string outputs_path;
  std::string refs_path;
  std::string direction;
  std::string dialect;
  std::string report_path;
  std::string format = "json";
  std::string scale = "unit";
  std::string averaging = "micro";
  unsigned jobs = 1;
};

struct MergeOptions {
  std::vector<std::string> adapters;
  std::string out_path;
  double trim_fraction = 0.20;
  double lambda = 1.0;
  std::string space = "materialized";
  std::string key_policy = "intersect";
  std::string alpha;  // empty = use adapter metadata
  std::string rank;   // empty = use adapter metadata
  unsigned jobs = 1;
};

// ---------------------------------------------------------------------------
// Small helpers

std::string format_number(double value) { return nlohmann::json(value).dump(); }

template <typename T>
std::optional<T> parse_optional(const std::string& text, const char* flag) {
  if (text.empty()) return std::nullopt;
  T value{};
  if (!CLI::detail::lexical_cast(text, value)) {
    throw std::runtime_error("invalid value '" + text + "' for " + std::string(flag));
  }
  return value;
}

ChrfConfig chrf_config(const ChrfOptions& opts) {
  ChrfConfig cfg;
  cfg.max_char_n = opts.char_n;
  cfg.max_word_n = opts.word_n;
  cfg.beta = opts.beta;
  cfg.validate();
  return cfg;
}

StubScorerConfig load_lexicon(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open lexicon file '" + path + "'");
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(file);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("lexicon file '" + path + "': " + e.what());
  }
  if (!parsed.is_object()) {
    throw std::runtime_error("lexicon file '" + path + "': expected {dialect: [markers...]}");
  }
  StubScorerConfig cfg;
  for (const auto& [dialect, markers] : parsed.items()) {
    if (!markers.is_array()) {
      throw std::runtime_error("lexicon file '" + path + "': markers for '" + dialect +
                               "' must be an array of strings");
    }
    for (const auto& marker : markers) {
      if (!marker.is_string()) {
        throw std::runtime_error("lexicon file '" + path + "': markers for '" + dialect +
                                 "' must be an array of strings");
      }
      cfg.lexicon[dialect].insert(marker.get<std::string>());
    }
  }
  cfg.validate();
  return cfg;
}

ScorerBackend build_scorer(const ScorerOptions& opts) {
  if (opts.kind == "stub") {
    return opts.lexicon_path.empty() ? default_stub_lexicon() : load_lexicon(opts.lexicon_path);
  }
  if (opts.kind == "remote") {
    if (opts.endpoint.empty()) {
      throw std::runtime_error(
          "remote scorer selected but no endpoint given (--scorer-endpoint or "
          "LAHJA_SCORER_ENDPOINT)");
    }
    RemoteScorerConfig cfg;
    cfg.endpoint = opts.endpoint;
    cfg.timeout_seconds = opts.timeout;
    cfg.max_retries = opts.retries;
    cfg.auth_token = opts.token;
    return cfg;
  }
  throw std::runtime_error("unknown scorer '" + opts.kind + "' (expected stub or remote)");
}

GenConfig gen_config(const GenOptions& opts) {
  GenConfig cfg;
  cfg.endpoint = opts.endpoint;
  cfg.model = opts.model;
  cfg.num_candidates = opts.n_candidates;
  cfg.temperature = opts.temperature;
  cfg.top_p = opts.top_p;
  cfg.max_tokens = opts.max_tokens;
  cfg.seed_base = parse_optional<std::int64_t>(opts.seed, "--seed");
  cfg.timeout_seconds = opts.timeout;
  cfg.max_retries = opts.retries;
  cfg.validate();
  return cfg;
}

std::string make_fingerprint(const std::string& objective, int n_candidates, double trim_fraction,
                             double lambda, const ChrfConfig& chrf, const std::string& scorer,
                             const std::string& averaging) {
  std::ostringstream out;
  out << "objective=" << objective << ";n=" << n_candidates
      << ";trim=" << format_number(trim_fraction) << ";lambda=" << format_number(lambda)
      << ";chrf=c" << chrf.max_char_n << "w" << chrf.max_word_n << "b"
      << format_number(chrf.beta) << ";scorer=" << scorer << ";averaging=" << averaging;
  return out.str();
}

// Reads non-blank lines in chunks of `chunk` and hands each batch, with
// 1-based line numbers, to `consume`.
void for_each_line_chunk(
    std::istream& in, std::size_t chunk,
    const std::function<void(std::vector<std::pair<std::size_t, std::string>>&)>& consume) {
  std::vector<std::pair<std::size_t, std::string>> batch;
  batch.reserve(chunk);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    batch.emplace_back(line_number, line);
    if (batch.size() == chunk) {
      consume(batch);
      batch.clear();
    }
  }
  if (!batch.empty()) consume(batch);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for reading");
  return file;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  return file;
}

std::size_t chunk_size(unsigned jobs) {
  return std::max<std::size_t>(64, static_cast<std::size_t>(effective_jobs(jobs)) * 8);
}

// ---------------------------------------------------------------------------
// merge

void run_merge(const MergeOptions& opts) {
  MergeConfig cfg;
  cfg.trim_fraction = opts.trim_fraction;
  cfg.lambda = opts.lambda;
  if (opts.space == "materialized") {
    cfg.space = MergeSpace::Materialized;
  } else if (opts.space == "factor") {
    cfg.space = MergeSpace::Factor;
  } else {
    throw std::runtime_error("unknown merge space '" + opts.space +
                             "' (expected materialized or factor)");
  }
  if (opts.key_policy == "intersect") {
    cfg.key_policy = KeyPolicy::Intersect;
  } else if (opts.key_policy == "union-error") {
    cfg.key_policy = KeyPolicy::UnionError;
  } else {
    throw std::runtime_error("unknown key policy '" + opts.key_policy +
                             "' (expected intersect or union-error)");
  }
  cfg.validate();

  LoraOverrides overrides;
  overrides.alpha = parse_optional<double>(opts.alpha, "--alpha");
  overrides.rank = parse_optional<std::int64_t>(opts.rank, "--rank");

  std::vector<TaskVector> tasks;
  bool any_lora = false;
  std::optional<std::pair<double, std::int64_t>> factor_hparams;
  for (const std::string& path : opts.adapters) {
    const TensorArchive archive = read_archive(path);
    const bool lora = has_lora_pairs(archive);
    any_lora = any_lora || lora;
    if (lora && cfg.space == MergeSpace::Factor) {
      // Merged A/B factors keep a single (alpha, rank); the inputs must agree
      // or the merged adapter would materialize incorrectly.
      const std::vector<LoraPair> pairs = collect_lora_pairs(archive, overrides);
      const std::pair<double, std::int64_t> hparams{pairs.front().alpha, pairs.front().rank};
      if (factor_hparams && *factor_hparams != hparams) {
        throw std::runtime_error(
            "factor-space merge requires identical lora_alpha and rank across adapters; '" +
            path + "' disagrees (pass --alpha/--rank to force a common pair)");
      }
      factor_hparams = hparams;
    }
    tasks.push_back(task_vector_from_archive(archive, cfg.space, overrides));
  }

  const TaskVector merged = ties_merge(tasks, cfg, opts.jobs);

  TensorArchive out;
  for (const auto& [name, tensor] : merged) out.tensors.emplace(name, tensor);
  out.metadata["merge_method"] = "ties";
  out.metadata["merge_space"] = opts.space;
  out.metadata["trim_fraction"] = format_number(cfg.trim_fraction);
  out.metadata["lambda"] = format_number(cfg.lambda);
  out.metadata["num_inputs"] = std::to_string(opts.adapters.size());
  if (cfg.space == MergeSpace::Factor && any_lora) {
    out.metadata["approximate"] =
        "factor-space merge: A and B factors were trimmed and merged independently, which is "
        "not equivalent to merging materialized deltas";
    if (factor_hparams) {
      out.metadata["lora_alpha"] = format_number(factor_hparams->first);
      out.metadata["r"] = std::to_string(factor_hparams->second);
    }
  }
  write_archive(out, opts.out_path);
  std::cerr << "merged " << opts.adapters.size() << " adapter(s), " << merged.size()
            << " tensor(s) -> " << opts.out_path << "\n";
}

// ---------------------------------------------------------------------------
// generate

void run_generate(const GenOptions& gen_opts, const std::string& prompts_path,
                  const std::string& out_path, unsigned jobs) {
  const GenConfig cfg = gen_config(gen_opts);
  std::ifstream in = open_input(prompts_path);
  std::ofstream out = open_output(out_path);

  for_each_line_chunk(in, chunk_size(jobs), [&](auto& batch) {
    std::vector<std::string> lines(batch.size());
    parallel_for(batch.size(), jobs, [&](std::size_t i) {
      const PromptRecord prompt = parse_prompt_line(batch[i].second, batch[i].first);
      const CandidateSet set = generate_candidates(prompt.source, prompt.prompt_id, cfg);
      lines[i] = candidate_set_to_json_line(set);
    });
    for (const std::string& line : lines) out << line << '\n';
  });
  if (!out) throw std::runtime_error("error while writing '" + out_path + "'");
}

// ---------------------------------------------------------------------------
// decode

// One JSONL line of input becomes one selection. Offline lines already carry
// candidates; online lines are prompts to sample first.
struct DecodeContext {
  ObjectiveKind objective;
  CandidateScorer scorer;
  ChrfConfig chrf;
  double combined_weight = 0.5;
  bool online = false;
  std::optional<GenConfig> gen;
};

bool sniff_offline(const std::string& in_path) {
  std::ifstream in = open_input(in_path);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(in_path + ": line " + std::to_string(line_number) + ": " +
                               e.what());
    }
    return parsed.is_object() && parsed.contains("candidates");
  }
  throw std::runtime_error(in_path + ": no records found");
}

void run_decode(const DecodeOptions& opts, const ScorerOptions& scorer_opts,
                const GenOptions& gen_opts, const ChrfOptions& chrf_opts,
                const std::function<void(const std::vector<std::string>&)>& on_chosen_chunk = {}) {
  DecodeContext ctx;
  ctx.objective = parse_objective(opts.objective);
  ctx.chrf = chrf_config(chrf_opts);
  ctx.combined_weight = opts.combined_weight;
  if (ctx.objective != ObjectiveKind::Chrfpp) {
    if (opts.dialect.empty()) {
      throw std::runtime_error("objective '" + opts.objective + "' requires --dialect");
    }
    ctx.scorer = make_adi2_scorer(build_scorer(scorer_opts), opts.dialect);
  }
  ctx.online = !sniff_offline(opts.in_path);
  if (ctx.online) ctx.gen = gen_config(gen_opts);

  std::ifstream in = open_input(opts.in_path);
  std::ofstream out = open_output(opts.out_path);
  std::optional<std::ofstream> candidates_out;
  if (!opts.save_candidates_path.empty()) {
    candidates_out = open_output(opts.save_candidates_path);
  }

  for_each_line_chunk(in, chunk_size(opts.jobs), [&](auto& batch) {
    struct Row {
      std::string selection_line;
      std::string candidates_line;
      std::string chosen_text;
    };
    std::vector<Row> rows(batch.size());
    parallel_for(batch.size(), opts.jobs, [&](std::size_t i) {
      CandidateSet set;
      if (ctx.online) {
        const PromptRecord prompt = parse_prompt_line(batch[i].second, batch[i].first);
        set = generate_candidates(prompt.source, prompt.prompt_id, *ctx.gen);
      } else {
        set = parse_candidate_set_line(batch[i].second, batch[i].first);
      }
      const SelectionResult result =
          select_with_objective(set, ctx.objective, ctx.scorer, ctx.chrf, ctx.combined_weight);
      rows[i].selection_line = selection_to_json_line(set.prompt_id, result);
      if (candidates_out) rows[i].candidates_line = candidate_set_to_json_line(set);
      rows[i].chosen_text = result.chosen_text;
    });
    std::vector<std::string> chosen;
    if (on_chosen_chunk) chosen.reserve(rows.size());
    for (Row& row : rows) {
      out << row.selection_line << '\n';
      if (candidates_out) *candidates_out << row.candidates_line << '\n';
      if (on_chosen_chunk) chosen.push_back(std::move(row.chosen_text));
    }
    if (on_chosen_chunk) on_chosen_chunk(chosen);
  });
  if (!out) throw std::runtime_error("error while writing '" + opts.out_path + "'");
}

// ---------------------------------------------------------------------------
// eval

// Accumulates corpus statistics chunk by chunk; the reductions match the
// whole-corpus evaluation functions bit for bit.
struct EvalAccumulator {
  explicit EvalAccumulator(const ChrfConfig& cfg) : micro_stats(cfg), chrf_cfg(cfg) {}

  void add_mono_chunk(const std::vector<std::string>& outputs, const std::string& dialect,
                      const ScorerBackend& backend, unsigned jobs) {
    std::vector<double> scores(outputs.size(), 0.0);
    parallel_for(outputs.size(), jobs, [&](std::size_t i) {
      scores[i] = adi2(score_text(outputs[i], dialect, backend));
    });
    for (double s : scores) mono_sum += s;
    mono_count += outputs.size();
  }

  void add_translation_chunk(const std::vector<std::string>& outputs,
                             const std::vector<std::string>& references, Averaging averaging,
                             unsigned jobs) {
    if (averaging == Averaging::SentenceMean) {
      std::vector<double> scores(outputs.size(), 0.0);
      parallel_for(outputs.size(), jobs, [&](std::size_t i) {
        scores[i] = chrfpp_sentence(outputs[i], references[i], chrf_cfg);
      });
      for (double s : scores) sentence_sum += s;
    } else {
      std::vector<ChrfStatistics> stats(outputs.size(), ChrfStatistics(chrf_cfg));
      parallel_for(outputs.size(), jobs, [&](std::size_t i) {
        stats[i].add(extract_profile(outputs[i], chrf_cfg),
                     extract_profile(references[i], chrf_cfg));
      });
      for (const ChrfStatistics& s : stats) micro_stats.merge(s);
    }
    translation_count += outputs.size();
  }

  double mono_mean() const {
    if (mono_count == 0) throw std::runtime_error("monolingual eval: no outputs");
    return mono_sum / static_cast<double>(mono_count);
  }

  double translation_score(Averaging averaging) const {
    if (translation_count == 0) throw std::runtime_error("translation eval: no outputs");
    return averaging == Averaging::SentenceMean
               ? sentence_sum / static_cast<double>(translation_count)
               : micro_stats.fscore(chrf_cfg);
  }

  double mono_sum = 0.0;
  std::size_t mono_count = 0;
  double sentence_sum = 0.0;
  ChrfStatistics micro_stats;
  std::size_t translation_count = 0;
  ChrfConfig chrf_cfg;
};

// Output files are either selection JSONL (use chosen_text) or plain text,
// one output per line; the first record decides.
bool sniff_selections(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json parsed = nlohmann::json::parse(line, nullptr, false);
    if (parsed.is_discarded()) return false;
    if (parsed.is_object() && parsed.contains("candidates")) {
      throw std::runtime_error(path +
                               ": this is a candidates file; pass selections or plain text");
    }
    return parsed.is_object() && parsed.contains("chosen_text");
  }
  throw std::runtime_error(path + ": no outputs found");
}

std::string output_from_line(const std::string& line, std::size_t line_number, bool selections,
                             const std::string& path) {
  if (!selections) return line;
  const nlohmann::json parsed = nlohmann::json::parse(line, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("chosen_text") ||
      !parsed["chosen_text"].is_string()) {
    throw std::runtime_error(path + ": line " + std::to_string(line_number) +
                             ": expected a selection record with \"chosen_text\"");
  }
  return parsed["chosen_text"].get<std::string>();
}

std::vector<std::string> load_lines(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

Averaging parse_averaging(const std::string& name) {
  if (name == "micro") return Averaging::Micro;
  if (name == "sentence") return Averaging::SentenceMean;
  throw std::runtime_error("unknown averaging '" + name + "' (expected micro or sentence)");
}

ReportFormat parse_format(const std::string& name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  if (name == "table") return ReportFormat::TextTable;
  throw std::runtime_error("unknown report format '" + name + "' (expected json, csv or table)");
}

ScoreScale parse_scale(const std::string& name) {
  if (name == "unit") return ScoreScale::Unit;
  if (name == "percent") return ScoreScale::Percent;
  throw std::runtime_error("unknown scale '" + name + "' (expected unit or percent)");
}

void write_report(const EvalReport& report, const EvalOptions& opts) {
  const std::string text = emit_report(report, parse_format(opts.format), parse_scale(opts.scale));
  if (opts.report_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out = open_output(opts.report_path);
    out << text;
    if (!out) throw std::runtime_error("error while writing '" + opts.report_path + "'");
  }
}

void run_eval(const EvalOptions& opts, const ScorerOptions& scorer_opts,
              const ChrfOptions& chrf_opts, const std::string& fingerprint) {
  if (opts.dialect.empty()) throw std::runtime_error("eval requires --dialect");
  const bool translation = !opts.refs_path.empty() || !opts.direction.empty();
  if (translation && (opts.refs_path.empty() || opts.direction.empty())) {
    throw std::runtime_error("translation eval requires both --refs and --direction");
  }

  const ChrfConfig chrf = chrf_config(chrf_opts);
  const Averaging averaging = parse_averaging(opts.averaging);
  EvalAccumulator acc(chrf);

  const bool selections = sniff_selections(opts.outputs_path);
  std::optional<ScorerBackend> backend;
  if (!translation) backend = build_scorer(scorer_opts);

  std::vector<std::string> references;
  if (translation) references = load_lines(opts.refs_path);

  std::ifstream in = open_input(opts.outputs_path);
  std::size_t consumed = 0;
  for_each_line_chunk(in, chunk_size(opts.jobs), [&](auto& batch) {
    std::vector<std::string> outputs;
    outputs.reserve(batch.size());
    for (const auto& [line_number, line] : batch) {
      outputs.push_back(output_from_line(line, line_number, selections, opts.outputs_path));
    }
    if (translation) {
      if (consumed + outputs.size() > references.size()) {
        throw std::runtime_error("translation eval: more outputs than references (" +
                                 std::to_string(references.size()) + " references)");
      }
      std::vector<std::string> refs_slice(
          references.begin() + static_cast<std::ptrdiff_t>(consumed),
          references.begin() + static_cast<std::ptrdiff_t>(consumed + outputs.size()));
      acc.add_translation_chunk(outputs, refs_slice, averaging, opts.jobs);
    } else {
      acc.add_mono_chunk(outputs, opts.dialect, *backend, opts.jobs);
    }
    consumed += outputs.size();
  });
  if (translation && consumed != references.size()) {
    throw std::runtime_error("translation eval: " + std::to_string(consumed) + " outputs vs " +
                             std::to_string(references.size()) + " references");
  }

  EvalReport report;
  report.dialect = opts.dialect;
  report.config_fingerprint = fingerprint;
  if (translation) {
    const Direction direction = parse_direction(opts.direction);
    report.chrf_by_direction[direction] = acc.translation_score(averaging);
    report.counts[to_string(direction)] = consumed;
  } else {
    report.mono_adi2 = acc.mono_mean();
    report.counts["adi2"] = consumed;
  }
  write_report(report, opts);
}

// ---------------------------------------------------------------------------
// pipeline: decode then evaluate the chosen outputs

void run_pipeline(const DecodeOptions& decode_opts, const EvalOptions& eval_opts,
                  const ScorerOptions& scorer_opts, const GenOptions& gen_opts,
                  const ChrfOptions& chrf_opts) {
  if (eval_opts.dialect.empty()) throw std::runtime_error("pipeline requires --dialect");
  const bool translation = !eval_opts.refs_path.empty() || !eval_opts.direction.empty();
  if (translation && (eval_opts.refs_path.empty() || eval_opts.direction.empty())) {
    throw std::runtime_error("translation eval requires both --refs and --direction");
  }

  const ChrfConfig chrf = chrf_config(chrf_opts);
  const Averaging averaging = parse_averaging(eval_opts.averaging);
  const ScorerBackend backend = build_scorer(scorer_opts);
  EvalAccumulator acc(chrf);

  std::vector<std::string> references;
  if (translation) references = load_lines(eval_opts.refs_path);

  std::size_t consumed = 0;
  run_decode(decode_opts, scorer_opts, gen_opts, chrf_opts,
             [&](const std::vector<std::string>& chosen) {
               acc.add_mono_chunk(chosen, eval_opts.dialect, backend, eval_opts.jobs);
               if (translation) {
                 if (consumed + chosen.size() > references.size()) {
                   throw std::runtime_error("translation eval: more outputs than references (" +
                                            std::to_string(references.size()) + " references)");
                 }
                 std::vector<std::string> refs_slice(
                     references.begin() + static_cast<std::ptrdiff_t>(consumed),
                     references.begin() +
                         static_cast<std::ptrdiff_t>(consumed + chosen.size()));
                 acc.add_translation_chunk(chosen, refs_slice, averaging, eval_opts.jobs);
               }
               consumed += chosen.size();
             });
  if (translation && consumed != references.size()) {
    throw std::runtime_error("translation eval: " + std::to_string(consumed) + " outputs vs " +
                             std::to_string(references.size()) + " references");
  }

  EvalReport report;
  report.dialect = eval_opts.dialect;
  report.config_fingerprint =
      make_fingerprint(decode_opts.objective, gen_opts.n_candidates, 0.0, 1.0, chrf,
                       scorer_id(backend), eval_opts.averaging);
  report.mono_adi2 = acc.mono_mean();
  report.counts["adi2"] = consumed;
  if (translation) {
    const Direction direction = parse_direction(eval_opts.direction);
    report.chrf_by_direction[direction] = acc.translation_score(averaging);
    report.counts[to_string(direction)] = consumed;
  }
  write_report(report, eval_opts);
}

// ---------------------------------------------------------------------------
// flag wiring

void add_scorer_flags(CLI::App* cmd, ScorerOptions& opts, LayeredOptions& layers) {
  layers.bind(cmd,
              cmd->add_option("--scorer", opts.kind, "Dialect scorer backend: stub or remote")
                  ->capture_default_str(),
              &opts.kind);
  layers.bind(cmd, cmd->add_option("--scorer-endpoint", opts.endpoint, "Remote scorer base URL"),
              &opts.endpoint, "LAHJA_SCORER_ENDPOINT");
  layers.bind(cmd, cmd->add_option("--scorer-token", opts.token, "Remote scorer bearer token"),
              &opts.token, "LAHJA_SCORER_TOKEN");
  layers.bind(cmd,
              cmd->add_option(
                  "--lexicon", opts.lexicon_path,
                  "JSON file {dialect: [marker, ...]} overriding the built-in stub lexicon"),
              &opts.lexicon_path);
  layers.bind(cmd,
              cmd->add_option("--scorer-timeout", opts.timeout,
                              "Remote scorer timeout in seconds")
                  ->capture_default_str(),
              &opts.timeout);
  layers.bind(cmd,
              cmd->add_option("--scorer-retries", opts.retries,
                              "Additional attempts after a failed scorer request")
                  ->capture_default_str(),
              &opts.retries);
}

void add_gen_flags(CLI::App* cmd, GenOptions& opts, LayeredOptions& layers) {
  layers.bind(cmd,
              cmd->add_option("--endpoint", opts.endpoint, "Chat-completions server base URL"),
              &opts.endpoint, "LAHJA_GEN_ENDPOINT");
  layers.bind(cmd,
              cmd->add_option("--model", opts.model, "Model name sent to the generation server"),
              &opts.model);
  layers.bind(cmd,
              cmd->add_option("--auth-token", opts.token, "Generation server bearer token"),
              &opts.token, "LAHJA_GEN_TOKEN");
  layers.bind(cmd,
              cmd->add_option("--n-candidates", opts.n_candidates,
                              "Candidates sampled per prompt")
                  ->capture_default_str(),
              &opts.n_candidates);
  layers.bind(cmd,
              cmd->add_option("--temperature", opts.temperature, "Sampling temperature")
                  ->capture_default_str(),
              &opts.temperature);
  layers.bind(cmd,
              cmd->add_option("--top-p", opts.top_p, "Nucleus sampling mass")
                  ->capture_default_str(),
              &opts.top_p);
  layers.bind(cmd,
              cmd->add_option("--max-tokens", opts.max_tokens, "Token budget per candidate")
                  ->capture_default_str(),
              &opts.max_tokens);
  layers.bind(cmd,
              cmd->add_option(
                  "--seed", opts.seed,
                  "Base seed; candidate i is requested with seed+i for reproducible sampling"),
              &opts.seed);
  layers.bind(cmd,
              cmd->add_option("--timeout", opts.timeout, "Generation timeout in seconds")
                  ->capture_default_str(),
              &opts.timeout);
  layers.bind(cmd,
              cmd->add_option("--retries", opts.retries,
                              "Additional attempts after a failed generation request")
                  ->capture_default_str(),
              &opts.retries);
}

void add_chrf_flags(CLI::App* cmd, ChrfOptions& opts, LayeredOptions& layers) {
  layers.bind(cmd,
              cmd->add_option("--chrf-char-n", opts.char_n, "Maximum character n-gram order")
                  ->capture_default_str(),
              &opts.char_n);
  layers.bind(cmd,
              cmd->add_option("--chrf-word-n", opts.word_n, "Maximum word n-gram order")
                  ->capture_default_str(),
              &opts.word_n);
  layers.bind(cmd,
              cmd->add_option("--chrf-beta", opts.beta, "Recall weight beta")
                  ->capture_default_str(),
              &opts.beta);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "lahja — dialect-aware decoding toolkit: TIES-merge LoRA adapters, sample candidate "
      "sets, select outputs by dialect fidelity or agreement, and evaluate corpora"};
  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON file with per-subcommand defaults, e.g. {\"decode\": {\"objective\": "
                 "\"chrf\"}}; flags and environment variables take precedence");
  app.require_subcommand(1);
  LayeredOptions layers;

  // merge
  MergeOptions merge_opts;
  CLI::App* merge_cmd = app.add_subcommand("merge", "TIES-merge adapter archives into one");
  merge_cmd->fallthrough();
  merge_cmd->add_option("adapters", merge_opts.adapters, "Adapter .safetensors files")
      ->required()
      ->check(CLI::ExistingFile);
  merge_cmd->add_option("--out", merge_opts.out_path, "Merged archive path")->required();
  layers.bind(merge_cmd,
              merge_cmd
                  ->add_option("--trim-fraction", merge_opts.trim_fraction,
                               "Fraction of largest-magnitude entries kept per tensor")
                  ->capture_default_str(),
              &merge_opts.trim_fraction);
  layers.bind(merge_cmd,
              merge_cmd
                  ->add_option("--lambda", merge_opts.lambda,
                               "Scale applied to the merged vector")
                  ->capture_default_str(),
              &merge_opts.lambda);
  layers.bind(merge_cmd,
              merge_cmd
                  ->add_option("--merge-space", merge_opts.space,
                               "materialized (merge dense deltas) or factor (merge A/B directly)")
                  ->capture_default_str(),
              &merge_opts.space);
  layers.bind(merge_cmd,
              merge_cmd
                  ->add_option(
                      "--key-policy", merge_opts.key_policy,
                      "intersect (shared tensors) or union-error (require identical sets)")
                  ->capture_default_str(),
              &merge_opts.key_policy);
  layers.bind(merge_cmd,
              merge_cmd->add_option("--alpha", merge_opts.alpha,
                                    "Override adapter lora_alpha metadata"),
              &merge_opts.alpha);
  layers.bind(merge_cmd,
              merge_cmd->add_option("--rank", merge_opts.rank, "Override adapter rank metadata"),
              &merge_opts.rank);
  layers.bind(merge_cmd,
              merge_cmd->add_option("--jobs", merge_opts.jobs, "Worker threads (0 = all cores)")
                  ->capture_default_str(),
              &merge_opts.jobs);

  // generate
  GenOptions gen_opts;
  std::string gen_prompts, gen_out;
  unsigned gen_jobs = 1;
  CLI::App* gen_cmd =
      app.add_subcommand("generate", "Sample candidate sets from a chat-completions server");
  gen_cmd->fallthrough();
  gen_cmd->add_option("--prompts", gen_prompts, "Prompt JSONL: {\"prompt_id\", \"source\"}")
      ->required()
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("--out", gen_out, "Candidate JSONL output path")->required();
  layers.bind(gen_cmd,
              gen_cmd->add_option("--jobs", gen_jobs, "Prompts fetched in parallel (0 = all cores)")
                  ->capture_default_str(),
              &gen_jobs);
  add_gen_flags(gen_cmd, gen_opts, layers);

  // decode
  DecodeOptions decode_opts;
  ScorerOptions decode_scorer;
  GenOptions decode_gen;
  ChrfOptions decode_chrf;
  CLI::App* decode_cmd = app.add_subcommand(
      "decode", "Select one output per prompt from candidates (offline) or the server (online)");
  decode_cmd->fallthrough();
  decode_cmd
      ->add_option("--in", decode_opts.in_path,
                   "Candidate JSONL (offline) or prompt JSONL (online); detected per file")
      ->required()
      ->check(CLI::ExistingFile);
  decode_cmd->add_option("--out", decode_opts.out_path, "Selection JSONL output path")
      ->required();
  decode_cmd->add_option("--save-candidates", decode_opts.save_candidates_path,
                         "Also write the candidate sets used (online mode audit trail)");
  layers.bind(decode_cmd,
              decode_cmd->add_option("--dialect", decode_opts.dialect, "Target dialect label"),
              &decode_opts.dialect);
  layers.bind(decode_cmd,
              decode_cmd
                  ->add_option("--objective", decode_opts.objective,
                               "Selection objective: adi2, chrf or combined")
                  ->capture_default_str(),
              &decode_opts.objective);
  layers.bind(decode_cmd,
              decode_cmd
                  ->add_option("--combined-weight", decode_opts.combined_weight,
                               "Weight on the dialect term of the combined objective")
                  ->capture_default_str(),
              &decode_opts.combined_weight);
  layers.bind(decode_cmd,
              decode_cmd
                  ->add_option("--jobs", decode_opts.jobs, "Worker threads (0 = all cores)")
                  ->capture_default_str(),
              &decode_opts.jobs);
  add_scorer_flags(decode_cmd, decode_scorer, layers);
  add_gen_flags(decode_cmd, decode_gen, layers);
  add_chrf_flags(decode_cmd, decode_chrf, layers);

  // eval
  EvalOptions eval_opts;
  ScorerOptions eval_scorer;
  ChrfOptions eval_chrf;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "Score outputs: mean ADI2 (monolingual) or corpus chrF++ (translation)");
  eval_cmd->fallthrough();
  eval_cmd
      ->add_option("--outputs", eval_opts.outputs_path,
                   "Selection JSONL or plain text, one output per line")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--refs", eval_opts.refs_path,
                       "Reference text, one per line (enables translation eval)");
  layers.bind(eval_cmd,
              eval_cmd->add_option("--direction", eval_opts.direction,
                                   "Translation direction: da-en, en-da, da-msa or msa-da"),
              &eval_opts.direction);
  layers.bind(eval_cmd,
              eval_cmd->add_option("--dialect", eval_opts.dialect,
                                   "Dialect label for the report row"),
              &eval_opts.dialect);
  eval_cmd->add_option("--report", eval_opts.report_path, "Report path (default stdout)");
  layers.bind(eval_cmd,
              eval_cmd->add_option("--format", eval_opts.format,
                                   "Report format: json, csv or table")
                  ->capture_default_str(),
              &eval_opts.format);
  layers.bind(eval_cmd,
              eval_cmd->add_option("--scale", eval_opts.scale, "Score scale: unit or percent")
                  ->capture_default_str(),
              &eval_opts.scale);
  layers.bind(eval_cmd,
              eval_cmd
                  ->add_option("--averaging", eval_opts.averaging,
                               "chrF++ aggregation: micro (summed counts) or sentence (mean)")
                  ->capture_default_str(),
              &eval_opts.averaging);
  layers.bind(eval_cmd,
              eval_cmd->add_option("--jobs", eval_opts.jobs, "Worker threads (0 = all cores)")
                  ->capture_default_str(),
              &eval_opts.jobs);
  add_scorer_flags(eval_cmd, eval_scorer, layers);
  add_chrf_flags(eval_cmd, eval_chrf, layers);

  // pipeline
  DecodeOptions pipe_decode;
  EvalOptions pipe_eval;
  ScorerOptions pipe_scorer;
  GenOptions pipe_gen;
  ChrfOptions pipe_chrf;
  CLI::App* pipe_cmd =
      app.add_subcommand("pipeline", "Decode then evaluate the chosen outputs in one run");
  pipe_cmd->fallthrough();
  pipe_cmd
      ->add_option("--in", pipe_decode.in_path,
                   "Candidate JSONL (offline) or prompt JSONL (online)")
      ->required()
      ->check(CLI::ExistingFile);
  pipe_cmd->add_option("--selections", pipe_decode.out_path, "Selection JSONL output path")
      ->required();
  layers.bind(pipe_cmd,
              pipe_cmd->add_option("--dialect", pipe_eval.dialect, "Target dialect label"),
              &pipe_eval.dialect);
  layers.bind(pipe_cmd,
              pipe_cmd
                  ->add_option("--objective", pipe_decode.objective,
                               "Selection objective: adi2, chrf or combined")
                  ->capture_default_str(),
              &pipe_decode.objective);
  layers.bind(pipe_cmd,
              pipe_cmd
                  ->add_option("--combined-weight", pipe_decode.combined_weight,
                               "Weight on the dialect term of the combined objective")
                  ->capture_default_str(),
              &pipe_decode.combined_weight);
  pipe_cmd->add_option("--refs", pipe_eval.refs_path,
                       "Reference text enabling an additional translation row");
  layers.bind(pipe_cmd,
              pipe_cmd->add_option("--direction", pipe_eval.direction,
                                   "Translation direction for --refs"),
              &pipe_eval.direction);
  pipe_cmd->add_option("--report", pipe_eval.report_path, "Report path (default stdout)");
  layers.bind(pipe_cmd,
              pipe_cmd->add_option("--format", pipe_eval.format,
                                   "Report format: json, csv or table")
                  ->capture_default_str(),
              &pipe_eval.format);
  layers.bind(pipe_cmd,
              pipe_cmd->add_option("--scale", pipe_eval.scale, "Score scale: unit or percent")
                  ->capture_default_str(),
              &pipe_eval.scale);
  layers.bind(pipe_cmd,
              pipe_cmd
                  ->add_option("--averaging", pipe_eval.averaging,
                               "chrF++ aggregation: micro (summed counts) or sentence (mean)")
                  ->capture_default_str(),
              &pipe_eval.averaging);
  layers.bind(pipe_cmd,
              pipe_cmd->add_option("--jobs", pipe_decode.jobs, "Worker threads (0 = all cores)")
                  ->capture_default_str(),
              &pipe_decode.jobs);
  add_scorer_flags(pipe_cmd, pipe_scorer, layers);
  add_gen_flags(pipe_cmd, pipe_gen, layers);
  add_chrf_flags(pipe_cmd, pipe_chrf, layers);

  CLI11_PARSE(app, argc, argv);

  try {
    const nlohmann::json config = load_config(config_path);
    CLI::App* active = app.get_subcommands().front();
    layers.resolve(active, config);

    if (active == merge_cmd) {
      run_merge(merge_opts);
    } else if (active == gen_cmd) {
      run_generate(gen_opts, gen_prompts, gen_out, gen_jobs);
    } else if (active == decode_cmd) {
      run_decode(decode_opts, decode_scorer, decode_gen, decode_chrf);
    } else if (active == eval_cmd) {
      const std::string fingerprint = make_fingerprint(
          "eval-only", 0, 0.0, 1.0, chrf_config(eval_chrf),
          eval_opts.refs_path.empty() ? scorer_id(build_scorer(eval_scorer)) : "none",
          eval_opts.averaging);
      run_eval(eval_opts, eval_scorer, eval_chrf, fingerprint);
    } else {
      pipe_decode.dialect = pipe_eval.dialect;
      pipe_eval.jobs = pipe_decode.jobs;
      run_pipeline(pipe_decode, pipe_eval, pipe_scorer, pipe_gen, pipe_chrf);
    }
  } catch (const std::exception& e) {
    std::cerr << "lahja: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
