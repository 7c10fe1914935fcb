#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "vigil/errors.hpp"

namespace vigil {

inline constexpr std::size_t kQuestionCount = 20;

enum class Difficulty { Easy, Moderate, High };

struct Answer {
  int chosen_option = 1;  // 1..5
  int score = 0;          // 0 when wrong, the question's point value when right
  bool operator==(const Answer&) const = default;
};

// One examinee's row in the LMS result export.
struct ExamRecord {
  std::string id;  // 7-digit numeric string
  std::array<Answer, kQuestionCount> answers{};
  int grade = 0;
  int duration_minutes = 0;
  std::string ip;

  int score_sum() const {
    int s = 0;
    for (const auto& a : answers) s += a.score;
    return s;
  }

  // A question counts as correct when it earned points.
  int correct_count() const {
    int c = 0;
    for (const auto& a : answers) c += a.score > 0 ? 1 : 0;
    return c;
  }

  bool operator==(const ExamRecord&) const = default;
};

// Static description of one exam: difficulty and point value per question plus
// the pool of interchangeable question sets.
struct ExamSpec {
  std::size_t question_count = kQuestionCount;
  std::array<Difficulty, kQuestionCount> difficulties{};
  std::array<int, kQuestionCount> max_score_per_question{};
  std::vector<std::string> set_pool;

  void validate() const {
    if (question_count != kQuestionCount)
      throw BadConfig("question_count must be " + std::to_string(kQuestionCount));
    for (std::size_t q = 0; q < kQuestionCount; ++q)
      if (max_score_per_question[q] <= 0)
        throw BadConfig("max score of question " + std::to_string(q + 1) +
                        " must be positive");
    if (set_pool.empty()) throw BadConfig("set_pool must not be empty");
    for (std::size_t i = 0; i < set_pool.size(); ++i)
      for (std::size_t j = i + 1; j < set_pool.size(); ++j)
        if (set_pool[i] == set_pool[j])
          throw BadConfig("duplicate set identifier '" + set_pool[i] + "'");
  }

  int max_grade() const {
    int s = 0;
    for (int m : max_score_per_question) s += m;
    return s;
  }

  // Default layout used by the tools and tests: questions 1-10 worth 2 points,
  // 11-20 worth 3; six easy, eight moderate, six high; sets A-D.
  static ExamSpec standard() {
    ExamSpec spec;
    for (std::size_t q = 0; q < kQuestionCount; ++q) {
      spec.max_score_per_question[q] = q < 10 ? 2 : 3;
      spec.difficulties[q] = q < 6    ? Difficulty::Easy
                             : q < 14 ? Difficulty::Moderate
                                      : Difficulty::High;
    }
    spec.set_pool = {"A", "B", "C", "D"};
    return spec;
  }
};

inline bool parse_ipv4(std::string_view text, std::array<int, 4>* octets = nullptr) {
  std::array<int, 4> parts{};
  std::size_t pos = 0;
  for (int i = 0; i < 4; ++i) {
    if (i > 0) {
      if (pos >= text.size() || text[pos] != '.') return false;
      ++pos;
    }
    std::size_t start = pos;
    int value = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      value = value * 10 + (text[pos] - '0');
      if (value > 255) return false;
      ++pos;
    }
    if (pos == start || pos - start > 3) return false;
    parts[i] = value;
  }
  if (pos != text.size()) return false;
  if (octets) *octets = parts;
  return true;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    char ca = a[i], cb = b[i];
    if (ca >= 'A' && ca <= 'Z') ca = static_cast<char>(ca - 'A' + 'a');
    if (cb >= 'A' && cb <= 'Z') cb = static_cast<char>(cb - 'A' + 'a');
    if (ca != cb) return false;
  }
  return true;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline int parse_int_field(std::string_view raw, std::size_t row, const std::string& column) {
  std::string_view s = trim(raw);
  if (s.empty()) throw BadField(row, column, "empty cell");
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw BadField(row, column, "not an integer: '" + std::string(s) + "'");
  return value;
}

}  // namespace detail

// Column order of the export, exactly: ID,Q1 Ans.,Q1 Score,...,Q20 Ans.,Q20 Score,Grade,Time,IP
inline std::vector<std::string> csv_columns() {
  std::vector<std::string> cols;
  cols.emplace_back("ID");
  for (std::size_t q = 1; q <= kQuestionCount; ++q) {
    cols.push_back("Q" + std::to_string(q) + " Ans.");
    cols.push_back("Q" + std::to_string(q) + " Score");
  }
  cols.emplace_back("Grade");
  cols.emplace_back("Time");
  cols.emplace_back("IP");
  return cols;
}

inline std::string csv_header() {
  std::string line;
  const auto cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) line += ',';
    line += cols[i];
  }
  return line;
}

// Parses an LMS result export. Column names are matched case-insensitively
// after trimming; the order is enforced. Rows are numbered from 1 (first data
// row) in error messages.
inline std::vector<ExamRecord> parse_csv(std::istream& in, const ExamSpec& spec) {
  spec.validate();
  const auto cols = csv_columns();

  std::string line;
  if (!std::getline(in, line)) throw MalformedHeader("missing header row");
  {
    const auto fields = detail::split_fields(line);
    if (fields.size() != cols.size())
      throw MalformedHeader("expected " + std::to_string(cols.size()) + " columns, got " +
                            std::to_string(fields.size()));
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (!detail::iequals(detail::trim(fields[i]), cols[i]))
        throw MalformedHeader("column " + std::to_string(i + 1) + " is '" +
                              std::string(detail::trim(fields[i])) + "', expected '" +
                              cols[i] + "'");
  }

  std::vector<ExamRecord> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    std::string_view body = detail::trim(line);
    if (body.empty()) continue;
    ++row;
    const auto fields = detail::split_fields(line);
    if (fields.size() != cols.size())
      throw BadField(row, "", "expected " + std::to_string(cols.size()) + " fields, got " +
                                  std::to_string(fields.size()));

    ExamRecord rec;
    rec.id = std::string(detail::trim(fields[0]));
    if (rec.id.empty()) throw BadField(row, "ID", "empty cell");
    for (char c : rec.id)
      if (c < '0' || c > '9') throw BadField(row, "ID", "not numeric: '" + rec.id + "'");

    for (std::size_t q = 0; q < kQuestionCount; ++q) {
      const std::string ans_col = cols[1 + 2 * q];
      const std::string score_col = cols[2 + 2 * q];
      int option = detail::parse_int_field(fields[1 + 2 * q], row, ans_col);
      if (option < 1 || option > 5)
        throw BadField(row, ans_col, "option must be 1..5, got " + std::to_string(option));
      int score = detail::parse_int_field(fields[2 + 2 * q], row, score_col);
      if (score < 0) throw BadField(row, score_col, "score must be non-negative");
      rec.answers[q] = Answer{option, score};
    }

    rec.grade = detail::parse_int_field(fields[1 + 2 * kQuestionCount], row, "Grade");
    rec.duration_minutes = detail::parse_int_field(fields[2 + 2 * kQuestionCount], row, "Time");
    if (rec.duration_minutes < 1) throw BadField(row, "Time", "duration must be >= 1 minute");
    rec.ip = std::string(detail::trim(fields[3 + 2 * kQuestionCount]));
    if (!parse_ipv4(rec.ip)) throw BadField(row, "IP", "not a dotted quad: '" + rec.ip + "'");

    if (rec.grade != rec.score_sum()) throw GradeMismatch(row, rec.grade, rec.score_sum());
    records.push_back(std::move(rec));
  }
  return records;
}

inline void write_csv(std::ostream& out, const std::vector<ExamRecord>& records) {
  out << csv_header() << '\n';
  for (const auto& rec : records) {
    out << rec.id;
    for (const auto& a : rec.answers) out << ',' << a.chosen_option << ',' << a.score;
    out << ',' << rec.grade << ',' << rec.duration_minutes << ',' << rec.ip << '\n';
  }
}

}  // namespace vigil
