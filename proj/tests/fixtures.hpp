#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "vigil/encoding.hpp"
#include "vigil/records.hpp"

namespace fixtures {

// Ten mock-exam rows shaped like the LMS export: the visible cells (Q1, Q2,
// Q20, grade, time, IP) follow the reference sample; hidden questions are
// filled deterministically so that each grade equals its score sum under the
// standard exam spec (Q1-Q10 worth 2 points, Q11-Q20 worth 3).
struct VisibleCells {
  const char* id;
  int q1_opt, q1_score;
  int q2_opt, q2_score;
  int q20_opt, q20_score;
  int grade, time;
  const char* ip;
  int correct_2pt;  // correct among hidden Q3..Q10
  int correct_3pt;  // correct among hidden Q11..Q19
};

inline const std::vector<VisibleCells>& table_cells() {
  static const std::vector<VisibleCells> cells = {
      {"2000001", 4, 2, 2, 2, 4, 3, 45, 15, "175.116.139.44", 7, 8},
      {"2000002", 4, 2, 2, 2, 4, 3, 36, 20, "211.214.126.62", 4, 7},
      {"2000003", 4, 2, 2, 2, 1, 0, 38, 20, "125.186.174.50", 5, 8},
      {"2000004", 1, 0, 2, 2, 2, 0, 24, 18, "1.236.192.19", 5, 4},
      {"2000005", 4, 2, 2, 2, 2, 0, 33, 17, "58.236.177.182", 4, 7},
      {"2000006", 3, 0, 2, 2, 2, 0, 24, 14, "180.71.78.211", 5, 4},
      {"2000007", 4, 2, 2, 2, 4, 3, 46, 25, "211.243.246.3", 6, 9},
      {"2000008", 4, 2, 2, 2, 4, 3, 45, 24, "211.243.246.3", 7, 8},
      {"2000009", 4, 2, 2, 2, 1, 0, 35, 26, "221.147.167.237", 5, 7},
      {"2000010", 3, 0, 2, 2, 1, 0, 23, 14, "61.74.229.32", 3, 5},
  };
  return cells;
}

inline std::vector<vigil::ExamRecord> table_rows() {
  std::vector<vigil::ExamRecord> rows;
  for (const auto& c : table_cells()) {
    vigil::ExamRecord rec;
    rec.id = c.id;
    rec.grade = c.grade;
    rec.duration_minutes = c.time;
    rec.ip = c.ip;
    rec.answers[0] = {c.q1_opt, c.q1_score};
    rec.answers[1] = {c.q2_opt, c.q2_score};
    for (std::size_t q = 2; q < 10; ++q) {
      const bool correct = static_cast<int>(q - 2) < c.correct_2pt;
      rec.answers[q].chosen_option = correct ? int(q % 5) + 1 : int((q + 2) % 5) + 1;
      rec.answers[q].score = correct ? 2 : 0;
    }
    for (std::size_t q = 10; q < 19; ++q) {
      const bool correct = static_cast<int>(q - 10) < c.correct_3pt;
      rec.answers[q].chosen_option = correct ? int(q % 5) + 1 : int((q + 2) % 5) + 1;
      rec.answers[q].score = correct ? 3 : 0;
    }
    rec.answers[19] = {c.q20_opt, c.q20_score};
    rows.push_back(std::move(rec));
  }
  return rows;
}

inline std::string table_csv() {
  std::ostringstream out;
  vigil::write_csv(out, table_rows());
  return out.str();
}

// Minimal record builder: first `correct` questions right under the given
// spec, remaining wrong, with the requested duration.
inline vigil::ExamRecord make_record(int correct, int minutes, const vigil::ExamSpec& spec,
                                     const std::string& ip = "10.0.0.1") {
  vigil::ExamRecord rec;
  rec.id = "2000099";
  rec.duration_minutes = minutes;
  rec.ip = ip;
  for (std::size_t q = 0; q < vigil::kQuestionCount; ++q) {
    const bool right = static_cast<int>(q) < correct;
    rec.answers[q].chosen_option = right ? 1 : 2;
    rec.answers[q].score = right ? spec.max_score_per_question[q] : 0;
  }
  rec.grade = rec.score_sum();
  return rec;
}

}  // namespace fixtures
