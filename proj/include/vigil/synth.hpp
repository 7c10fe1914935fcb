#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include "vigil/encoding.hpp"
#include "vigil/records.hpp"
#include "vigil/rng.hpp"

namespace vigil {

// Cohort generator standing in for a real LMS export. Honest students draw
// per-question correctness from a per-student ability and finish near the
// expected duration; planted cheaters answer >= 90% correctly while finishing
// in the fast or slow band; colluder pairs share an IP and copy most of each
// other's chosen options. Ground truth is always label() applied to the
// generated record, so it can never disagree with the encoder.
struct CohortConfig {
  std::size_t student_count = 94;
  double ability_mean = 0.62;
  double ability_sd = 0.15;
  double cheater_fraction = 0.15;
  std::size_t collusion_pair_count = 1;
  double duration_sigma = 0.25;  // log-normal spread around the expected duration
  std::uint64_t seed = 42;
  ExamSpec exam = ExamSpec::standard();
  SpeedModel speed;

  void validate() const {
    if (student_count < 1) throw BadConfig("student_count must be >= 1");
    if (cheater_fraction < 0.0 || cheater_fraction > 1.0)
      throw BadConfig("cheater_fraction must be in [0,1]");
    if (duration_sigma < 0.0) throw BadConfig("duration_sigma must be >= 0");
    exam.validate();
    speed.validate();
    const std::size_t planted =
        static_cast<std::size_t>(std::llround(cheater_fraction * double(student_count)));
    if (planted + 2 * collusion_pair_count > student_count)
      throw BadConfig("cheaters plus colluders exceed the cohort size");
  }
};

struct Cohort {
  std::vector<ExamRecord> records;
  std::vector<BehaviorLabel> truth;
};

namespace detail_synth {

// Hidden answer key; only relative agreement matters, so any fixed map works.
inline int answer_key(std::size_t q) { return static_cast<int>((q * 7 + 3) % 5) + 1; }

inline int wrong_option(std::size_t q, Rng& rng) {
  const int key = answer_key(q);
  int pick = 1 + static_cast<int>(rng.uniform_index(4));
  if (pick >= key) ++pick;
  return pick;
}

inline std::string fresh_ip(Rng& rng, std::unordered_set<std::string>& used) {
  for (;;) {
    const int a = 1 + static_cast<int>(rng.uniform_index(222));  // 1..222, skips multicast
    if (a == 127) continue;
    const int b = static_cast<int>(rng.uniform_index(256));
    const int c = static_cast<int>(rng.uniform_index(256));
    const int d = 1 + static_cast<int>(rng.uniform_index(254));
    std::string ip = std::to_string(a) + "." + std::to_string(b) + "." + std::to_string(c) +
                     "." + std::to_string(d);
    if (used.insert(ip).second) return ip;
  }
}

// Largest minute count still strictly below fast_factor * expected.
inline long fast_minutes_max(double expected, double fast_factor) {
  return static_cast<long>(std::ceil(fast_factor * expected / 60.0)) - 1;
}

// Smallest minute count strictly above slow_factor * expected.
inline long slow_minutes_min(double expected, double slow_factor) {
  return static_cast<long>(std::floor(slow_factor * expected / 60.0)) + 1;
}

inline void fill_answers_by_ability(ExamRecord& rec, double ability, const ExamSpec& spec,
                                    Rng& rng) {
  for (std::size_t q = 0; q < kQuestionCount; ++q) {
    const bool correct = rng.bernoulli(ability);
    rec.answers[q].chosen_option = correct ? answer_key(q) : wrong_option(q, rng);
    rec.answers[q].score = correct ? spec.max_score_per_question[q] : 0;
  }
}

}  // namespace detail_synth

inline Cohort generate(const CohortConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const ExamSpec& spec = config.exam;
  const double expected = expected_duration_seconds(spec, config.speed);

  const std::size_t n = config.student_count;
  const std::size_t n_cheat =
      static_cast<std::size_t>(std::llround(config.cheater_fraction * double(n)));
  const std::size_t n_collude = 2 * config.collusion_pair_count;
  const std::size_t n_honest = n - n_cheat - n_collude;

  const long fast_max = detail_synth::fast_minutes_max(expected, config.speed.fast_factor);
  const long slow_min = detail_synth::slow_minutes_min(expected, config.speed.slow_factor);
  if (n_cheat > 0 && fast_max < 1)
    throw BadConfig("exam too short to plant fast cheaters");

  std::unordered_set<std::string> used_ips;
  Cohort cohort;
  cohort.records.reserve(n);

  auto push_record = [&](ExamRecord rec) {
    rec.id = std::to_string(2000001 + cohort.records.size());
    rec.grade = rec.score_sum();
    cohort.records.push_back(std::move(rec));
  };

  for (std::size_t i = 0; i < n_honest; ++i) {
    ExamRecord rec;
    const double ability =
        std::clamp(rng.normal(config.ability_mean, config.ability_sd), 0.05, 0.95);
    detail_synth::fill_answers_by_ability(rec, ability, spec, rng);
    const double seconds = expected * std::exp(rng.normal(0.0, config.duration_sigma));
    rec.duration_minutes = static_cast<int>(std::max(1.0, std::round(seconds / 60.0)));
    rec.ip = detail_synth::fresh_ip(rng, used_ips);
    push_record(std::move(rec));
  }

  for (std::size_t i = 0; i < n_cheat; ++i) {
    ExamRecord rec;
    const int target = 18 + static_cast<int>(rng.uniform_index(3));
    std::vector<std::size_t> order(kQuestionCount);
    for (std::size_t q = 0; q < kQuestionCount; ++q) order[q] = q;
    rng.shuffle(order);
    for (std::size_t q = 0; q < kQuestionCount; ++q) {
      const bool correct = std::find(order.begin(), order.begin() + target, q) !=
                           order.begin() + target;
      rec.answers[q].chosen_option =
          correct ? detail_synth::answer_key(q) : detail_synth::wrong_option(q, rng);
      rec.answers[q].score = correct ? spec.max_score_per_question[q] : 0;
    }
    const bool fast = i % 2 == 0;
    if (fast) {
      const long lo = std::max<long>(1, std::lround(0.15 * expected / 60.0));
      const long hi = std::max(lo, fast_max);
      rec.duration_minutes = static_cast<int>(lo + long(rng.uniform_index(std::size_t(hi - lo + 1))));
    } else {
      const long lo = slow_min;
      const long hi = lo + std::max<long>(1, std::lround(expected / 60.0));
      rec.duration_minutes = static_cast<int>(lo + long(rng.uniform_index(std::size_t(hi - lo + 1))));
    }
    rec.ip = detail_synth::fresh_ip(rng, used_ips);
    push_record(std::move(rec));
  }

  for (std::size_t p = 0; p < config.collusion_pair_count; ++p) {
    const std::string shared_ip = detail_synth::fresh_ip(rng, used_ips);
    ExamRecord base;
    const double base_ability =
        std::clamp(rng.normal(std::max(config.ability_mean, 0.75), 0.08), 0.05, 0.95);
    detail_synth::fill_answers_by_ability(base, base_ability, spec, rng);

    // Both sit in the normal band.
    const long lo = static_cast<long>(std::ceil(config.speed.fast_factor * expected / 60.0)) + 1;
    const long hi = std::max(lo, static_cast<long>(std::floor(config.speed.slow_factor *
                                                              expected / 60.0)) - 1);
    auto normal_minutes = [&]() {
      const double raw = expected * rng.uniform(0.9, 1.5) / 60.0;
      return static_cast<int>(std::clamp<long>(std::lround(raw), lo, hi));
    };
    base.duration_minutes = normal_minutes();
    base.ip = shared_ip;

    ExamRecord copier;
    const int copied = 18 + static_cast<int>(rng.uniform_index(3));
    std::vector<std::size_t> order(kQuestionCount);
    for (std::size_t q = 0; q < kQuestionCount; ++q) order[q] = q;
    rng.shuffle(order);
    const double own_ability =
        std::clamp(rng.normal(config.ability_mean, config.ability_sd), 0.05, 0.95);
    for (std::size_t q = 0; q < kQuestionCount; ++q) {
      const bool copy = std::find(order.begin(), order.begin() + copied, q) !=
                        order.begin() + copied;
      int chosen;
      if (copy) {
        chosen = base.answers[q].chosen_option;
      } else {
        const bool correct = rng.bernoulli(own_ability);
        chosen = correct ? detail_synth::answer_key(q) : detail_synth::wrong_option(q, rng);
      }
      copier.answers[q].chosen_option = chosen;
      copier.answers[q].score =
          chosen == detail_synth::answer_key(q) ? spec.max_score_per_question[q] : 0;
    }
    copier.duration_minutes = normal_minutes();
    copier.ip = shared_ip;

    push_record(std::move(base));
    push_record(std::move(copier));
  }

  cohort.truth.reserve(n);
  for (const auto& rec : cohort.records)
    cohort.truth.push_back(label(rec, spec, config.speed));
  return cohort;
}

// Oversamples the abnormal class in feature space: resample an existing
// abnormal vector, flip up to two correctness bits while keeping the correct
// count at or above the 90% bar, and draw the speed bit from {fast, slow}.
// Appends in place.
inline void augment(std::vector<FeatureVector>& features, std::vector<BehaviorLabel>& labels,
                    std::size_t extra_abnormal, std::uint64_t seed) {
  if (features.size() != labels.size())
    throw BadConfig("features and labels must align");
  if (extra_abnormal == 0) return;

  std::vector<std::size_t> abnormal;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == BehaviorLabel::Abnormal) abnormal.push_back(i);
  if (abnormal.empty()) throw NoAbnormalSeed();

  const int threshold = 18;  // ceil(0.9 * 20)
  Rng rng(seed);
  for (std::size_t k = 0; k < extra_abnormal; ++k) {
    FeatureVector fv = features[abnormal[rng.uniform_index(abnormal.size())]];
    const std::size_t flips = rng.uniform_index(3);
    for (std::size_t f = 0; f < flips; ++f) {
      const std::size_t pos = rng.uniform_index(kQuestionCount);
      fv.bits[pos] ^= 1;
      if (fv.correct_count() < threshold) fv.bits[pos] ^= 1;  // keep the 90% bar
    }
    fv.set_speed(rng.bernoulli(0.5) ? SpeedCategory::Fast : SpeedCategory::Slow);
    features.push_back(fv);
    labels.push_back(BehaviorLabel::Abnormal);
  }
}

// Sidecar ground truth: one `id,label` line per record, label 0 = normal,
// 1 = abnormal.
inline void write_ground_truth(std::ostream& out, const Cohort& cohort) {
  for (std::size_t i = 0; i < cohort.records.size(); ++i)
    out << cohort.records[i].id << ',' << static_cast<int>(cohort.truth[i]) << '\n';
}

}  // namespace vigil
