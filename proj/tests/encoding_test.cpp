#include "vigil/encoding.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"

namespace {

using namespace vigil;

ExamSpec uniform_spec(Difficulty d) {
  ExamSpec spec = ExamSpec::standard();
  spec.difficulties.fill(d);
  return spec;
}

TEST(ExpectedDuration, DifficultySums) {
  const SpeedModel model;
  EXPECT_EQ(expected_duration_seconds(uniform_spec(Difficulty::Easy), model), 300);
  EXPECT_EQ(expected_duration_seconds(uniform_spec(Difficulty::Moderate), model), 700);

  ExamSpec half;
  half = ExamSpec::standard();
  for (std::size_t q = 0; q < kQuestionCount; ++q)
    half.difficulties[q] = q < 10 ? Difficulty::Easy : Difficulty::High;
  EXPECT_EQ(expected_duration_seconds(half, model), 1050);
}

TEST(CategorizeSpeed, NormalBandAndBoundaries) {
  const SpeedModel model;
  ExamSpec spec = ExamSpec::standard();
  for (std::size_t q = 0; q < kQuestionCount; ++q)
    spec.difficulties[q] = q < 10 ? Difficulty::Easy : Difficulty::High;
  // expected 1050 s; 15 min = 900 s sits between 525 and 2100.
  EXPECT_EQ(categorize_speed(fixtures::make_record(10, 15, spec), spec, model),
            SpeedCategory::Normal);

  // 1 minute on any 20-question exam with expected >= 300 s is fast.
  EXPECT_EQ(categorize_speed(fixtures::make_record(10, 1, uniform_spec(Difficulty::Easy),
                                                   "10.0.0.2"),
                             uniform_spec(Difficulty::Easy), model),
            SpeedCategory::Fast);

  // Exactly fast_factor * expected is still Normal (exclusive boundary):
  // 20 easy questions -> 300 s expected, threshold 150 s; 150 s is not < 150 s.
  SpeedModel wide = model;
  wide.easy_seconds = 24;  // expected 480 s, fast bound 240 s = 4 min exactly
  const ExamSpec easy = uniform_spec(Difficulty::Easy);
  EXPECT_EQ(categorize_speed(fixtures::make_record(10, 4, easy), easy, wide),
            SpeedCategory::Normal);
  // And exactly slow_factor * expected stays Normal: 960 s = 16 min.
  EXPECT_EQ(categorize_speed(fixtures::make_record(10, 16, easy), easy, wide),
            SpeedCategory::Normal);
  EXPECT_EQ(categorize_speed(fixtures::make_record(10, 17, easy), easy, wide),
            SpeedCategory::Slow);
}

TEST(Encode, InlinePatternFromWriteup) {
  // Correct in positions 1-5 and 7, the rest wrong, normal speed:
  // [1,1,1,1,1,0,1,0,...,0 | 0,1,0]
  const ExamSpec spec = ExamSpec::standard();
  const SpeedModel model;
  ExamRecord rec = fixtures::make_record(0, 15, spec);
  for (std::size_t q : {0u, 1u, 2u, 3u, 4u, 6u})
    rec.answers[q].score = spec.max_score_per_question[q];
  rec.grade = rec.score_sum();

  const FeatureVector fv = encode(rec, spec, model);
  const std::array<std::uint8_t, 23> want = {1, 1, 1, 1, 1, 0, 1, 0, 0, 0, 0, 0,
                                             0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0};
  EXPECT_EQ(fv.bits, want);
}

TEST(Encode, AllWrongSlow) {
  const ExamSpec spec = ExamSpec::standard();
  const SpeedModel model;
  // expected 910 s -> slow above 1820 s; 40 min = 2400 s.
  const FeatureVector fv = encode(fixtures::make_record(0, 40, spec), spec, model);
  EXPECT_EQ(fv.correct_count(), 0);
  EXPECT_EQ(fv.speed(), SpeedCategory::Slow);
  EXPECT_TRUE(fv.speed_one_hot());
}

TEST(Encode, TableRowOneBits) {
  const ExamSpec spec = ExamSpec::standard();
  const SpeedModel model;
  const auto rows = fixtures::table_rows();
  const FeatureVector fv = encode(rows[0], spec, model);
  EXPECT_EQ(fv.bits[0], 1);
  EXPECT_EQ(fv.bits[1], 1);
  EXPECT_EQ(fv.bits[19], 1);
  EXPECT_EQ(fv.speed(), categorize_speed(rows[0], spec, model));
}

TEST(Label, RuleCases) {
  const ExamSpec spec = ExamSpec::standard();
  const SpeedModel model;
  // 20/20 correct in 2 minutes: fast and high-scoring -> abnormal.
  EXPECT_EQ(label(fixtures::make_record(20, 2, spec), spec, model), BehaviorLabel::Abnormal);
  // 10/20 correct, fast -> normal (fails the 90% bar).
  EXPECT_EQ(label(fixtures::make_record(10, 2, spec), spec, model), BehaviorLabel::Normal);
  // 18/20 correct at normal speed -> normal (fails the speed condition).
  EXPECT_EQ(label(fixtures::make_record(18, 15, spec), spec, model), BehaviorLabel::Normal);
}

TEST(Label, ExhaustiveGridAgainstBruteForce) {
  const ExamSpec spec = ExamSpec::standard();
  const SpeedModel model;
  const int expected = expected_duration_seconds(spec, model);  // 910 s
  const int fast_minutes = 3;    // 180 s < 455 s
  const int normal_minutes = 15; // within (455, 1820)
  const int slow_minutes = 40;   // 2400 s > 1820 s

  int checked = 0;
  for (int correct = 0; correct <= 20; ++correct) {
    for (int s = 0; s < 3; ++s) {
      const int minutes = s == 0 ? fast_minutes : s == 1 ? normal_minutes : slow_minutes;
      const ExamRecord rec = fixtures::make_record(correct, minutes, spec);
      // Independent restatement: at least 90% of questions correct
      // (integer-exact as 10 * correct >= 9 * question_count) while the speed
      // is off the normal band.
      const bool ninety = 10 * correct >= 9 * static_cast<int>(spec.question_count);
      const SpeedCategory cat = categorize_speed(rec, spec, model);
      const bool expected_abnormal = ninety && cat != SpeedCategory::Normal;
      EXPECT_EQ(label(rec, spec, model) == BehaviorLabel::Abnormal, expected_abnormal)
          << "correct=" << correct << " speed=" << s;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 63);
  EXPECT_EQ(expected, 910);
}

TEST(Label, FlippingCorrectToWrongNeverCreatesAbnormal) {
  const ExamSpec spec = ExamSpec::standard();
  const SpeedModel model;
  for (int minutes : {3, 15, 40}) {
    for (int correct = 1; correct <= 20; ++correct) {
      const BehaviorLabel before = label(fixtures::make_record(correct, minutes, spec), spec, model);
      const BehaviorLabel after = label(fixtures::make_record(correct - 1, minutes, spec), spec, model);
      if (before == BehaviorLabel::Normal) EXPECT_EQ(after, BehaviorLabel::Normal);
    }
  }
}

TEST(EncodeDataset, AlignmentAndCounts) {
  const ExamSpec spec = ExamSpec::standard();
  const SpeedModel model;
  const auto rows = fixtures::table_rows();
  const EncodedDataset ds = encode_dataset(rows, spec, model);
  ASSERT_EQ(ds.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(ds.features[i], encode(rows[i], spec, model));
    EXPECT_EQ(ds.labels[i], label(rows[i], spec, model));
    EXPECT_TRUE(ds.features[i].speed_one_hot());
  }
  const EncodedDataset empty = encode_dataset({}, spec, model);
  EXPECT_EQ(empty.size(), 0u);
}

TEST(FeatureIo, RoundTrip) {
  const ExamSpec spec = ExamSpec::standard();
  const SpeedModel model;
  const EncodedDataset ds = encode_dataset(fixtures::table_rows(), spec, model);
  std::ostringstream out;
  write_features(out, ds);
  std::istringstream in(out.str());
  const EncodedDataset back = read_features(in);
  EXPECT_EQ(back.features, ds.features);
  EXPECT_EQ(back.labels, ds.labels);
}

TEST(FeatureIo, RejectsMalformedLines) {
  std::istringstream bad_bits("1 1 0\t0\n");
  EXPECT_THROW(read_features(bad_bits), BadField);

  std::string line;
  for (int i = 0; i < 23; ++i) line += i ? " 0" : "0";
  std::istringstream no_speed(line + "\t1\n");
  EXPECT_THROW(read_features(no_speed), BadField);  // speed bits not one-hot
}

TEST(SpeedModelValidation, Bounds) {
  SpeedModel m;
  m.fast_factor = 1.0;
  EXPECT_THROW(m.validate(), BadConfig);
  m = SpeedModel{};
  m.slow_factor = 0.9;
  EXPECT_THROW(m.validate(), BadConfig);
  m = SpeedModel{};
  m.easy_seconds = 0;
  EXPECT_THROW(m.validate(), BadConfig);
}

}  // namespace
