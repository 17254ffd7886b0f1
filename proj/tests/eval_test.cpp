// Copyright (C) 2026 The Lahja Authors
// SPDX-License-Identifier: Apache-2.0

#include "lahja/eval.hpp"

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "golden_chrf.hpp"

namespace lahja {
namespace {

TEST(DirectionSuite, NamesRoundTripAndDisplayDiffers) {
  for (Direction d :
       {Direction::DaToEn, Direction::EnToDa, Direction::DaToMsa, Direction::MsaToDa}) {
    EXPECT_EQ(parse_direction(to_string(d)), d);
  }
  EXPECT_EQ(to_string(Direction::DaToEn), "da-en");
  EXPECT_EQ(display_name(Direction::DaToEn), "DA->EN");
  EXPECT_EQ(display_name(Direction::MsaToDa), "MSA->DA");
  EXPECT_THROW(parse_direction("en-fr"), std::invalid_argument);
}

TEST(EvalMonolingual, MeanStubAdi2) {
  // First output: 2 Syrian markers / 4 tokens -> aldi 0.5, P(syrian) 0.6.
  // Second output: no markers -> adi2 0.
  const std::vector<std::string> outputs = {"شلون حالك هلق اليوم", "نص فصيح"};
  const double mean = eval_monolingual(outputs, "syrian", default_stub_lexicon());
  EXPECT_DOUBLE_EQ(mean, (0.5 * 0.6 + 0.0) / 2.0);
}

TEST(EvalMonolingual, IndependentOfJobCount) {
  std::vector<std::string> outputs;
  for (int i = 0; i < 40; ++i) {
    outputs.push_back(i % 3 == 0 ? "شلون حالك" : "كيف الحال اليوم يا صديقي");
  }
  const double serial = eval_monolingual(outputs, "syrian", default_stub_lexicon(), 1);
  const double threaded = eval_monolingual(outputs, "syrian", default_stub_lexicon(), 8);
  EXPECT_DOUBLE_EQ(serial, threaded);
}

TEST(EvalMonolingual, EmptyCorpusAndScorerFailuresSurface) {
  EXPECT_THROW(eval_monolingual({}, "syrian", default_stub_lexicon()), std::invalid_argument);
  try {
    eval_monolingual({"x"}, "egyptian", default_stub_lexicon());
    FAIL() << "expected the scorer error to surface";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("output 0"), std::string::npos);
  }
}

TEST(EvalTranslation, PerfectCorpusScoresOne) {
  const std::vector<std::string> refs = {"الجو جميل اليوم", "ذهبت إلى السوق"};
  EXPECT_DOUBLE_EQ(eval_translation(refs, refs), 1.0);
  EXPECT_DOUBLE_EQ(eval_translation(refs, refs, {}, Averaging::SentenceMean), 1.0);
}

TEST(EvalTranslation, EmptyOutputsScoreZero) {
  EXPECT_DOUBLE_EQ(eval_translation({"", ""}, {"cat", "dog"}), 0.0);
}

TEST(EvalTranslation, MicroAverageMatchesCorpusGolden) {
  EXPECT_NEAR(eval_translation({"ab", "cat"}, {"abc", "cat"}), golden::kCorpusTwoPairs, 1e-9);
}

TEST(EvalTranslation, SentenceMeanAveragesPerSentenceScores) {
  const double expected =
      (chrfpp_sentence("ab", "abc") + chrfpp_sentence("cat", "cat")) / 2.0;
  EXPECT_DOUBLE_EQ(eval_translation({"ab", "cat"}, {"abc", "cat"}, {}, Averaging::SentenceMean),
                   expected);
}

TEST(EvalTranslation, IndependentOfJobCount) {
  std::vector<std::string> outputs, refs;
  for (int i = 0; i < 50; ++i) {
    outputs.push_back("جملة رقم " + std::to_string(i));
    refs.push_back("جملة رقم " + std::to_string(i % 7));
  }
  for (Averaging avg : {Averaging::Micro, Averaging::SentenceMean}) {
    const double serial = eval_translation(outputs, refs, {}, avg, 1);
    const double threaded = eval_translation(outputs, refs, {}, avg, 8);
    EXPECT_DOUBLE_EQ(serial, threaded);
  }
}

TEST(EvalTranslation, RejectsMisalignedInputs) {
  EXPECT_THROW(eval_translation({"a"}, {"a", "b"}), std::invalid_argument);
  EXPECT_THROW(eval_translation({}, {}), std::invalid_argument);
}

EvalReport sample_report() {
  EvalReport report;
  report.dialect = "syrian";
  report.mono_adi2 = 0.51;
  report.chrf_by_direction[Direction::DaToEn] = 0.4993;
  report.chrf_by_direction[Direction::EnToDa] = 0.31;
  report.counts["adi2"] = 100;
  report.counts["da-en"] = 40;
  report.counts["en-da"] = 40;
  report.config_fingerprint = "objective=adi2;n=20";
  return report;
}

TEST(EmitReport, JsonCarriesScoresAndScale) {
  const auto parsed = nlohmann::json::parse(emit_report(sample_report(), ReportFormat::Json));
  EXPECT_EQ(parsed.at("dialect"), "syrian");
  EXPECT_EQ(parsed.at("scale"), "unit");
  EXPECT_DOUBLE_EQ(parsed.at("scores").at("adi2").get<double>(), 0.51);
  EXPECT_DOUBLE_EQ(parsed.at("scores").at("chrf").at("da-en").get<double>(), 0.4993);
  EXPECT_EQ(parsed.at("counts").at("adi2"), 100);
  EXPECT_EQ(parsed.at("config"), "objective=adi2;n=20");
}

TEST(EmitReport, PercentScalesChrfButNeverAdi2) {
  const auto parsed = nlohmann::json::parse(
      emit_report(sample_report(), ReportFormat::Json, ScoreScale::Percent));
  EXPECT_EQ(parsed.at("scale"), "percent");
  EXPECT_DOUBLE_EQ(parsed.at("scores").at("adi2").get<double>(), 0.51);
  EXPECT_DOUBLE_EQ(parsed.at("scores").at("chrf").at("da-en").get<double>(), 0.4993 * 100.0);
}

TEST(EmitReport, CsvRowsPerTask) {
  const std::string csv = emit_report(sample_report(), ReportFormat::Csv);
  EXPECT_NE(csv.find("dialect,task,score,count\n"), std::string::npos);
  EXPECT_NE(csv.find("syrian,adi2,0.51,100\n"), std::string::npos);
  EXPECT_NE(csv.find("syrian,da-en,0.4993,40\n"), std::string::npos);
  EXPECT_NE(csv.find("syrian,en-da,0.31,40\n"), std::string::npos);
}

TEST(EmitReport, TextTableShowsDirectionColumnsAndGaps) {
  const std::string table = emit_report(sample_report(), ReportFormat::TextTable);
  EXPECT_NE(table.find("Dialect"), std::string::npos);
  EXPECT_NE(table.find("ADI2"), std::string::npos);
  EXPECT_NE(table.find("DA->EN"), std::string::npos);
  EXPECT_NE(table.find("MSA->DA"), std::string::npos);
  EXPECT_NE(table.find("syrian"), std::string::npos);
  // The two directions without scores render as "-".
  EXPECT_NE(table.find(" -"), std::string::npos);
}

TEST(EmitReport, JsonRoundTripIsStructurallyStable) {
  const std::string once = emit_report(sample_report(), ReportFormat::Json);
  const std::string twice = emit_report(sample_report(), ReportFormat::Json);
  EXPECT_EQ(once, twice);
}

}  // namespace
}  // namespace lahja
