#pragma once

#include <cstdint>
#include <cstdio>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vigil/errors.hpp"
#include "vigil/rng.hpp"

namespace vigil {

enum class DecisionKind { RandomAssignment, SpecificAssignment, Reassignment };

inline const char* to_string(DecisionKind k) {
  switch (k) {
    case DecisionKind::RandomAssignment: return "random_assignment";
    case DecisionKind::SpecificAssignment: return "specific_assignment";
    case DecisionKind::Reassignment: return "reassignment";
  }
  return "?";
}

struct SessionDecision {
  std::string session_id;
  std::string set_id;
  DecisionKind kind = DecisionKind::RandomAssignment;
  bool operator==(const SessionDecision&) const = default;
};

struct IpEntry {
  std::uint64_t first_seen = 0;  // logical clock tick
  std::vector<std::string> sessions;
  bool suspicious = false;
  std::vector<std::string> assigned_sets;  // in assignment order
};

struct SessionInfo {
  std::string ip;
  std::string set_id;  // currently assigned set
};

struct AuditEvent {
  std::uint64_t ts = 0;  // logical clock, monotone across the registry
  std::string ip;
  std::string session_id;
  DecisionKind kind = DecisionKind::RandomAssignment;
  std::string set_id;
  bool operator==(const AuditEvent&) const = default;
};

// Real-time IP registry for one exam instance. A first contact from an
// address draws a random question set; any later contact from the same
// address gets a deterministically chosen "specific" set, preferring sets
// that address has not seen. Flagged sessions are reassigned away from
// their current set and the address stays suspicious for the whole exam.
//
// All operations take one internal lock, which makes per-IP histories
// linearizable: two racing sessions on a fresh IP cannot both observe it as
// unseen. Timestamps are logical ticks so that replays reproduce identical
// audit logs.
class IpRegistry {
 public:
  explicit IpRegistry(std::vector<std::string> set_pool) : set_pool_(std::move(set_pool)) {}

  SessionDecision register_ip(const std::string& ip, Rng& rng) {
    std::lock_guard<std::mutex> lock(mu_);
    if (set_pool_.empty()) throw EmptySetPool();

    auto [it, inserted] = entries_.try_emplace(ip);
    IpEntry& entry = it->second;

    SessionDecision decision;
    decision.session_id = mint_session_id();
    if (inserted) {
      entry.first_seen = clock_;
      decision.kind = DecisionKind::RandomAssignment;
      decision.set_id = set_pool_[rng.uniform_index(set_pool_.size())];
    } else {
      decision.kind = DecisionKind::SpecificAssignment;
      decision.set_id = pick_specific_set(entry);
    }

    entry.sessions.push_back(decision.session_id);
    entry.assigned_sets.push_back(decision.set_id);
    sessions_[decision.session_id] = SessionInfo{ip, decision.set_id};
    log_event(ip, decision);
    return decision;
  }

  SessionDecision flag_abnormal(const std::string& session_id, Rng& rng) {
    std::lock_guard<std::mutex> lock(mu_);
    auto sit = sessions_.find(session_id);
    if (sit == sessions_.end()) throw UnknownSession(session_id);
    SessionInfo& info = sit->second;
    IpEntry& entry = entries_.at(info.ip);

    entry.suspicious = true;  // sticky for the rest of the exam

    SessionDecision decision;
    decision.session_id = session_id;
    decision.kind = DecisionKind::Reassignment;
    if (set_pool_.size() == 1) {
      decision.set_id = set_pool_.front();  // degenerate pool, no alternative
    } else {
      std::vector<const std::string*> others;
      others.reserve(set_pool_.size() - 1);
      for (const auto& s : set_pool_)
        if (s != info.set_id) others.push_back(&s);
      decision.set_id = *others[rng.uniform_index(others.size())];
    }

    info.set_id = decision.set_id;
    entry.assigned_sets.push_back(decision.set_id);
    log_event(info.ip, decision);
    return decision;
  }

  std::optional<IpEntry> lookup(const std::string& ip) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(ip);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<SessionInfo> session(const std::string& session_id) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return std::nullopt;
    return it->second;
  }

  // Number of distinct IPs ever registered; nothing is evicted during an exam.
  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_.size();
  }

  std::vector<AuditEvent> audit_log() const {
    std::lock_guard<std::mutex> lock(mu_);
    return audit_;
  }

  const std::vector<std::string>& set_pool() const { return set_pool_; }

 private:
  std::string mint_session_id() {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s-%06llu",
                  static_cast<unsigned long long>(next_session_++));
    return buf;
  }

  // First set (in pool order) never assigned to this IP; once the pool is
  // exhausted, the set whose latest assignment is oldest.
  std::string pick_specific_set(const IpEntry& entry) const {
    for (const auto& s : set_pool_) {
      bool seen = false;
      for (const auto& a : entry.assigned_sets)
        if (a == s) { seen = true; break; }
      if (!seen) return s;
    }
    std::size_t best = 0;
    std::size_t best_last = entry.assigned_sets.size();
    for (std::size_t i = 0; i < set_pool_.size(); ++i) {
      std::size_t last = 0;
      for (std::size_t j = 0; j < entry.assigned_sets.size(); ++j)
        if (entry.assigned_sets[j] == set_pool_[i]) last = j + 1;
      if (last < best_last) {
        best_last = last;
        best = i;
      }
    }
    return set_pool_[best];
  }

  void log_event(const std::string& ip, const SessionDecision& d) {
    audit_.push_back(AuditEvent{clock_++, ip, d.session_id, d.kind, d.set_id});
  }

  mutable std::mutex mu_;
  std::vector<std::string> set_pool_;
  std::unordered_map<std::string, IpEntry> entries_;
  std::unordered_map<std::string, SessionInfo> sessions_;
  std::vector<AuditEvent> audit_;
  std::uint64_t clock_ = 0;
  std::uint64_t next_session_ = 1;
};

}  // namespace vigil
