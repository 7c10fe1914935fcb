#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "vigil/errors.hpp"
#include "vigil/records.hpp"

namespace vigil {

enum class SpeedCategory { Fast = 0, Normal = 1, Slow = 2 };

enum class BehaviorLabel { Normal = 0, Abnormal = 1 };

inline const char* to_string(SpeedCategory s) {
  switch (s) {
    case SpeedCategory::Fast: return "fast";
    case SpeedCategory::Normal: return "normal";
    case SpeedCategory::Slow: return "slow";
  }
  return "?";
}

inline const char* to_string(BehaviorLabel l) {
  return l == BehaviorLabel::Normal ? "normal" : "abnormal";
}

// Per-difficulty nominal answer times and the ratio thresholds that bound the
// normal band. Both boundaries are exclusive: a duration exactly at
// fast_factor * expected (or slow_factor * expected) is still Normal.
struct SpeedModel {
  int easy_seconds = 15;
  int moderate_seconds = 35;
  int high_seconds = 90;
  double fast_factor = 0.5;
  double slow_factor = 2.0;

  int nominal_seconds(Difficulty d) const {
    switch (d) {
      case Difficulty::Easy: return easy_seconds;
      case Difficulty::Moderate: return moderate_seconds;
      case Difficulty::High: return high_seconds;
    }
    return 0;
  }

  void validate() const {
    if (easy_seconds <= 0 || moderate_seconds <= 0 || high_seconds <= 0)
      throw BadConfig("nominal seconds must be positive");
    if (!(fast_factor > 0.0 && fast_factor < 1.0))
      throw BadConfig("fast_factor must be in (0,1)");
    if (!(slow_factor > 1.0)) throw BadConfig("slow_factor must be > 1");
  }
};

// The 23-element binary input: 20 correctness bits followed by the
// one-hot speed triple in the fixed order (fast, normal, slow).
struct FeatureVector {
  static constexpr std::size_t kSize = 23;
  static constexpr std::size_t kSpeedOffset = kQuestionCount;

  std::array<std::uint8_t, kSize> bits{};

  int correct_count() const {
    int c = 0;
    for (std::size_t i = 0; i < kQuestionCount; ++i) c += bits[i] ? 1 : 0;
    return c;
  }

  SpeedCategory speed() const {
    if (bits[kSpeedOffset + 0]) return SpeedCategory::Fast;
    if (bits[kSpeedOffset + 2]) return SpeedCategory::Slow;
    return SpeedCategory::Normal;
  }

  void set_speed(SpeedCategory s) {
    bits[kSpeedOffset + 0] = s == SpeedCategory::Fast ? 1 : 0;
    bits[kSpeedOffset + 1] = s == SpeedCategory::Normal ? 1 : 0;
    bits[kSpeedOffset + 2] = s == SpeedCategory::Slow ? 1 : 0;
  }

  bool speed_one_hot() const {
    int set = bits[kSpeedOffset] + bits[kSpeedOffset + 1] + bits[kSpeedOffset + 2];
    return set == 1;
  }

  bool operator==(const FeatureVector&) const = default;
};

inline int expected_duration_seconds(const ExamSpec& spec, const SpeedModel& model) {
  int total = 0;
  for (std::size_t q = 0; q < spec.question_count; ++q)
    total += model.nominal_seconds(spec.difficulties[q]);
  return total;
}

inline SpeedCategory categorize_speed(const ExamRecord& rec, const ExamSpec& spec,
                                      const SpeedModel& model) {
  const double expected = expected_duration_seconds(spec, model);
  const double seconds = 60.0 * rec.duration_minutes;
  if (seconds < model.fast_factor * expected) return SpeedCategory::Fast;
  if (seconds > model.slow_factor * expected) return SpeedCategory::Slow;
  return SpeedCategory::Normal;
}

inline FeatureVector encode(const ExamRecord& rec, const ExamSpec& spec,
                            const SpeedModel& model) {
  FeatureVector fv;
  for (std::size_t q = 0; q < kQuestionCount; ++q)
    fv.bits[q] = rec.answers[q].score > 0 ? 1 : 0;
  fv.set_speed(categorize_speed(rec, spec, model));
  return fv;
}

// Smallest correct count that clears the 90% bar: ceil(0.9 * question_count).
inline int abnormal_correct_threshold(const ExamSpec& spec) {
  return static_cast<int>((9 * spec.question_count + 9) / 10);
}

// Abnormal means answering at least 90% correctly while finishing outside the
// normal speed band; everything else is normal.
inline BehaviorLabel label(const ExamRecord& rec, const ExamSpec& spec,
                           const SpeedModel& model) {
  const bool high_score = rec.correct_count() >= abnormal_correct_threshold(spec);
  const SpeedCategory speed = categorize_speed(rec, spec, model);
  const bool odd_speed = speed != SpeedCategory::Normal;
  return high_score && odd_speed ? BehaviorLabel::Abnormal : BehaviorLabel::Normal;
}

// Same rule evaluated on an encoded vector instead of a raw record.
inline BehaviorLabel label_of_features(const FeatureVector& fv, const ExamSpec& spec) {
  const bool high_score = fv.correct_count() >= abnormal_correct_threshold(spec);
  return high_score && fv.speed() != SpeedCategory::Normal ? BehaviorLabel::Abnormal
                                                           : BehaviorLabel::Normal;
}

struct EncodedDataset {
  std::vector<FeatureVector> features;
  std::vector<BehaviorLabel> labels;

  std::size_t size() const { return features.size(); }
};

inline EncodedDataset encode_dataset(const std::vector<ExamRecord>& records,
                                     const ExamSpec& spec, const SpeedModel& model) {
  EncodedDataset ds;
  ds.features.reserve(records.size());
  ds.labels.reserve(records.size());
  for (const auto& rec : records) {
    ds.features.push_back(encode(rec, spec, model));
    ds.labels.push_back(label(rec, spec, model));
  }
  return ds;
}

// Text form: one line per record, 23 space-separated 0/1 digits, a tab, then
// the label digit (0 normal, 1 abnormal).
inline void write_features(std::ostream& out, const EncodedDataset& ds) {
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t b = 0; b < FeatureVector::kSize; ++b) {
      if (b) out << ' ';
      out << static_cast<int>(ds.features[i].bits[b]);
    }
    out << '\t' << static_cast<int>(ds.labels[i]) << '\n';
  }
}

inline EncodedDataset read_features(std::istream& in) {
  EncodedDataset ds;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    FeatureVector fv;
    std::size_t pos = 0;
    for (std::size_t b = 0; b < FeatureVector::kSize; ++b) {
      if (b > 0) {
        if (pos >= line.size() || line[pos] != ' ')
          throw BadField(row, "bit " + std::to_string(b + 1), "expected space separator");
        ++pos;
      }
      if (pos >= line.size() || (line[pos] != '0' && line[pos] != '1'))
        throw BadField(row, "bit " + std::to_string(b + 1), "expected 0 or 1");
      fv.bits[b] = static_cast<std::uint8_t>(line[pos] - '0');
      ++pos;
    }
    if (pos >= line.size() || line[pos] != '\t')
      throw BadField(row, "label", "expected tab before label");
    ++pos;
    if (pos + 1 != line.size() || (line[pos] != '0' && line[pos] != '1'))
      throw BadField(row, "label", "expected single 0/1 digit");
    if (!fv.speed_one_hot())
      throw BadField(row, "speed", "speed bits are not one-hot");
    ds.features.push_back(fv);
    ds.labels.push_back(line[pos] == '1' ? BehaviorLabel::Abnormal : BehaviorLabel::Normal);
  }
  return ds;
}

}  // namespace vigil
