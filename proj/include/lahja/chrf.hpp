// Copyright (C) 2026 The Lahja Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lahja {

// chrF++ parameters: character n-grams of orders 1..max_char_n plus word
// n-grams of orders 1..max_word_n, combined with an F-beta that weights
// recall beta times as much as precision.
struct ChrfConfig {
  int max_char_n = 6;
  int max_word_n = 2;
  double beta = 2.0;
  bool strip_whitespace = true;
  double epsilon_smoothing = 1e-16;

  int total_orders() const { return max_char_n + max_word_n; }

  void validate() const {
    if (max_char_n < 1) throw std::invalid_argument("chrf: max_char_n must be >= 1");
    if (max_word_n < 0) throw std::invalid_argument("chrf: max_word_n must be >= 0");
    if (!(beta > 0.0)) throw std::invalid_argument("chrf: beta must be > 0");
    if (!(epsilon_smoothing >= 0.0)) throw std::invalid_argument("chrf: epsilon_smoothing must be >= 0");
  }
};

inline bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Splits on runs of ASCII whitespace. Multi-byte UTF-8 sequences never
// contain ASCII bytes, so this is safe on Arabic-script text.
inline std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_ascii_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_ascii_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

namespace detail {

// Byte offsets of UTF-8 code point starts, with a final sentinel at size().
// Bytes that are not valid continuation bytes start a new code point, so
// malformed input still yields a deterministic segmentation.
inline std::vector<std::size_t> codepoint_offsets(std::string_view s) {
  std::vector<std::size_t> offsets;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0u) != 0x80u) offsets.push_back(i);
  }
  offsets.push_back(s.size());
  return offsets;
}

}  // namespace detail

// Multiset of character and word n-grams. Slot i holds order i+1; counts are
// always >= 1 for stored keys. Immutable after extraction.
struct NGramProfile {
  std::vector<std::unordered_map<std::string, std::uint32_t>> char_ngrams;
  std::vector<std::unordered_map<std::string, std::uint32_t>> word_ngrams;
  std::vector<std::uint64_t> char_totals;
  std::vector<std::uint64_t> word_totals;
};

inline NGramProfile extract_profile(std::string_view text, const ChrfConfig& cfg) {
  cfg.validate();
  NGramProfile profile;
  profile.char_ngrams.resize(static_cast<std::size_t>(cfg.max_char_n));
  profile.char_totals.assign(static_cast<std::size_t>(cfg.max_char_n), 0);
  profile.word_ngrams.resize(static_cast<std::size_t>(cfg.max_word_n));
  profile.word_totals.assign(static_cast<std::size_t>(cfg.max_word_n), 0);

  std::string stripped;
  std::string_view char_source = text;
  if (cfg.strip_whitespace) {
    stripped.reserve(text.size());
    for (char c : text) {
      if (!is_ascii_space(static_cast<unsigned char>(c))) stripped.push_back(c);
    }
    char_source = stripped;
  }

  const std::vector<std::size_t> offsets = detail::codepoint_offsets(char_source);
  const std::size_t num_codepoints = offsets.size() - 1;
  for (int n = 1; n <= cfg.max_char_n; ++n) {
    auto& bucket = profile.char_ngrams[static_cast<std::size_t>(n - 1)];
    const std::size_t order = static_cast<std::size_t>(n);
    if (num_codepoints < order) break;
    for (std::size_t i = 0; i + order <= num_codepoints; ++i) {
      std::string_view gram = char_source.substr(offsets[i], offsets[i + order] - offsets[i]);
      ++bucket[std::string(gram)];
    }
    profile.char_totals[order - 1] = num_codepoints - order + 1;
  }

  if (cfg.max_word_n > 0) {
    const std::vector<std::string> tokens = split_whitespace(text);
    for (int n = 1; n <= cfg.max_word_n; ++n) {
      auto& bucket = profile.word_ngrams[static_cast<std::size_t>(n - 1)];
      const std::size_t order = static_cast<std::size_t>(n);
      if (tokens.size() < order) break;
      for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
        std::string gram = tokens[i];
        for (std::size_t k = 1; k < order; ++k) {
          gram += ' ';
          gram += tokens[i + k];
        }
        ++bucket[std::move(gram)];
      }
      profile.word_totals[order - 1] = tokens.size() - order + 1;
    }
  }
  return profile;
}

// Per-order clipped match / total counts, summable across segments. Summing
// before scoring gives the corpus micro-average; a single pair gives the
// sentence score.
class ChrfStatistics {
 public:
  explicit ChrfStatistics(const ChrfConfig& cfg)
      : match_(static_cast<std::size_t>(cfg.total_orders()), 0),
        hyp_total_(static_cast<std::size_t>(cfg.total_orders()), 0),
        ref_total_(static_cast<std::size_t>(cfg.total_orders()), 0) {}

  void add(const NGramProfile& hyp, const NGramProfile& ref) {
    const std::size_t char_orders = hyp.char_ngrams.size();
    const std::size_t word_orders = hyp.word_ngrams.size();
    if (char_orders != ref.char_ngrams.size() || word_orders != ref.word_ngrams.size() ||
        char_orders + word_orders != match_.size()) {
      throw std::invalid_argument("chrf: profiles were extracted with a different configuration");
    }
    for (std::size_t o = 0; o < char_orders; ++o) {
      match_[o] += clipped_matches(hyp.char_ngrams[o], ref.char_ngrams[o]);
      hyp_total_[o] += hyp.char_totals[o];
      ref_total_[o] += ref.char_totals[o];
    }
    for (std::size_t o = 0; o < word_orders; ++o) {
      match_[char_orders + o] += clipped_matches(hyp.word_ngrams[o], ref.word_ngrams[o]);
      hyp_total_[char_orders + o] += hyp.word_totals[o];
      ref_total_[char_orders + o] += ref.word_totals[o];
    }
  }

  void merge(const ChrfStatistics& other) {
    if (other.match_.size() != match_.size()) {
      throw std::invalid_argument("chrf: cannot merge statistics with different order counts");
    }
    for (std::size_t o = 0; o < match_.size(); ++o) {
      match_[o] += other.match_[o];
      hyp_total_[o] += other.hyp_total_[o];
      ref_total_[o] += other.ref_total_[o];
    }
  }

  // Mean F-beta over all orders present on either side. Orders with no
  // n-grams in hypothesis nor reference carry no evidence and are excluded;
  // a ratio with a zero denominator is smoothed to epsilon. Two texts with
  // no n-grams at all score 1.0 (they are indistinguishable).
  double fscore(const ChrfConfig& cfg) const {
    const double factor = cfg.beta * cfg.beta;
    double sum = 0.0;
    std::size_t included = 0;
    for (std::size_t o = 0; o < match_.size(); ++o) {
      if (hyp_total_[o] == 0 && ref_total_[o] == 0) continue;
      const double m = static_cast<double>(match_[o]);
      const double precision =
          hyp_total_[o] > 0 ? m / static_cast<double>(hyp_total_[o]) : cfg.epsilon_smoothing;
      const double recall =
          ref_total_[o] > 0 ? m / static_cast<double>(ref_total_[o]) : cfg.epsilon_smoothing;
      const double denom = factor * precision + recall;
      sum += denom > 0.0 ? (1.0 + factor) * precision * recall / denom : 0.0;
      ++included;
    }
    return included > 0 ? sum / static_cast<double>(included) : 1.0;
  }

 private:
  static std::uint64_t clipped_matches(const std::unordered_map<std::string, std::uint32_t>& a,
                                       const std::unordered_map<std::string, std::uint32_t>& b) {
    const auto& smaller = a.size() <= b.size() ? a : b;
    const auto& larger = a.size() <= b.size() ? b : a;
    std::uint64_t matches = 0;
    for (const auto& [gram, count] : smaller) {
      auto it = larger.find(gram);
      if (it != larger.end()) matches += std::min(count, it->second);
    }
    return matches;
  }

  std::vector<std::uint64_t> match_;
  std::vector<std::uint64_t> hyp_total_;
  std::vector<std::uint64_t> ref_total_;
};

inline double chrfpp_from_profiles(const NGramProfile& hyp, const NGramProfile& ref,
                                   const ChrfConfig& cfg) {
  ChrfStatistics stats(cfg);
  stats.add(hyp, ref);
  return stats.fscore(cfg);
}

inline double chrfpp_sentence(std::string_view hypothesis, std::string_view reference,
                              const ChrfConfig& cfg = {}) {
  cfg.validate();
  return chrfpp_from_profiles(extract_profile(hypothesis, cfg), extract_profile(reference, cfg), cfg);
}

inline double chrfpp_corpus(const std::vector<std::pair<std::string, std::string>>& pairs,
                            const ChrfConfig& cfg = {}) {
  cfg.validate();
  if (pairs.empty()) throw std::invalid_argument("chrf: corpus score over an empty segment list");
  ChrfStatistics stats(cfg);
  for (const auto& [hypothesis, reference] : pairs) {
    stats.add(extract_profile(hypothesis, cfg), extract_profile(reference, cfg));
  }
  return stats.fscore(cfg);
}

}  // namespace lahja
