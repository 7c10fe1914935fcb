#include "vigil/ip_agent.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>
#include <thread>

namespace {

using namespace vigil;

const std::vector<std::string> kPool = {"A", "B", "C", "D"};

TEST(Register, FreshIpGetsRandomAssignment) {
  IpRegistry reg(kPool);
  Rng rng(1);
  const SessionDecision d = reg.register_ip("175.116.139.44", rng);
  EXPECT_EQ(d.kind, DecisionKind::RandomAssignment);
  EXPECT_NE(std::find(kPool.begin(), kPool.end(), d.set_id), kPool.end());
  EXPECT_EQ(reg.size(), 1u);
}

TEST(Register, RepeatedIpGetsDifferentSpecificSet) {
  IpRegistry reg(kPool);
  Rng rng(7);
  const SessionDecision first = reg.register_ip("211.243.246.3", rng);
  const SessionDecision second = reg.register_ip("211.243.246.3", rng);
  EXPECT_EQ(second.kind, DecisionKind::SpecificAssignment);
  EXPECT_NE(second.set_id, first.set_id);
  EXPECT_NE(second.session_id, first.session_id);
  EXPECT_EQ(reg.size(), 1u);
}

TEST(Register, SingletonPoolAlwaysAssignsIt) {
  IpRegistry reg({"A"});
  Rng rng(3);
  reg.register_ip("1.2.3.4", rng);
  const SessionDecision again = reg.register_ip("1.2.3.4", rng);
  EXPECT_EQ(again.kind, DecisionKind::SpecificAssignment);
  EXPECT_EQ(again.set_id, "A");
}

TEST(Register, EmptyPoolThrows) {
  IpRegistry reg({});
  Rng rng(0);
  EXPECT_THROW(reg.register_ip("1.2.3.4", rng), EmptySetPool);
}

TEST(FlagAbnormal, ReassignsAwayFromCurrentSet) {
  IpRegistry reg({"A", "B", "C"});
  Rng rng(11);
  const SessionDecision d = reg.register_ip("9.9.9.9", rng);
  const SessionDecision r = reg.flag_abnormal(d.session_id, rng);
  EXPECT_EQ(r.kind, DecisionKind::Reassignment);
  EXPECT_NE(r.set_id, d.set_id);
  EXPECT_TRUE(reg.lookup("9.9.9.9")->suspicious);
}

TEST(FlagAbnormal, DegeneratePoolReassignsSameSet) {
  IpRegistry reg({"A"});
  Rng rng(5);
  const SessionDecision d = reg.register_ip("9.9.9.9", rng);
  const SessionDecision r = reg.flag_abnormal(d.session_id, rng);
  EXPECT_EQ(r.kind, DecisionKind::Reassignment);
  EXPECT_EQ(r.set_id, "A");
}

TEST(FlagAbnormal, RepeatedFlagsKeepSuspicionAndDiffer) {
  IpRegistry reg(kPool);
  Rng rng(13);
  const SessionDecision d = reg.register_ip("8.8.8.8", rng);
  const SessionDecision r1 = reg.flag_abnormal(d.session_id, rng);
  const SessionDecision r2 = reg.flag_abnormal(d.session_id, rng);
  EXPECT_NE(r1.set_id, d.set_id);
  EXPECT_NE(r2.set_id, r1.set_id);  // differs from the *current* set
  EXPECT_TRUE(reg.lookup("8.8.8.8")->suspicious);
  EXPECT_EQ(reg.lookup("8.8.8.8")->assigned_sets.size(), 3u);
}

TEST(FlagAbnormal, UnknownSessionThrows) {
  IpRegistry reg(kPool);
  Rng rng(0);
  EXPECT_THROW(reg.flag_abnormal("s-000404", rng), UnknownSession);
}

TEST(Lookup, UnseenAbsentSeenPresent) {
  IpRegistry reg(kPool);
  Rng rng(2);
  EXPECT_FALSE(reg.lookup("4.4.4.4").has_value());
  reg.register_ip("4.4.4.4", rng);
  const auto entry = reg.lookup("4.4.4.4");
  ASSERT_TRUE(entry.has_value());
  EXPECT_EQ(entry->sessions.size(), 1u);
  EXPECT_FALSE(entry->suspicious);
}

TEST(AuditLog, RecordsEveryDecisionInOrder) {
  IpRegistry reg(kPool);
  Rng rng(21);
  const SessionDecision a = reg.register_ip("1.1.1.1", rng);
  reg.register_ip("2.2.2.2", rng);
  reg.flag_abnormal(a.session_id, rng);
  const auto log = reg.audit_log();
  ASSERT_EQ(log.size(), 3u);
  EXPECT_EQ(log[0].kind, DecisionKind::RandomAssignment);
  EXPECT_EQ(log[1].kind, DecisionKind::RandomAssignment);
  EXPECT_EQ(log[2].kind, DecisionKind::Reassignment);
  EXPECT_LT(log[0].ts, log[1].ts);
  EXPECT_LT(log[1].ts, log[2].ts);
  EXPECT_EQ(log[2].session_id, a.session_id);
}

TEST(Determinism, SameSeedSameDecisionSequence) {
  auto run = [] {
    IpRegistry reg(kPool);
    Rng rng(99);
    std::vector<SessionDecision> out;
    std::vector<std::string> sessions;
    for (int i = 0; i < 50; ++i) {
      const std::string ip = "10.0." + std::to_string(i % 7) + ".1";
      const SessionDecision d = reg.register_ip(ip, rng);
      sessions.push_back(d.session_id);
      out.push_back(d);
      if (i % 5 == 0) out.push_back(reg.flag_abnormal(sessions[i / 2], rng));
    }
    return out;
  };
  EXPECT_EQ(run(), run());
}

// No two racing sessions on one fresh IP may both see it as unseen.
TEST(Concurrency, SingleRandomAssignmentPerFreshIp) {
  IpRegistry reg(kPool);
  constexpr int kThreads = 8;
  std::vector<std::thread> threads;
  std::vector<SessionDecision> decisions(kThreads);
  std::vector<Rng> rngs;
  for (int i = 0; i < kThreads; ++i) rngs.emplace_back(1000 + i);
  for (int i = 0; i < kThreads; ++i)
    threads.emplace_back([&, i] { decisions[i] = reg.register_ip("77.7.7.7", rngs[i]); });
  for (auto& t : threads) t.join();

  int randoms = 0;
  for (const auto& d : decisions)
    if (d.kind == DecisionKind::RandomAssignment) ++randoms;
  EXPECT_EQ(randoms, 1);
  EXPECT_EQ(reg.size(), 1u);
  EXPECT_EQ(reg.lookup("77.7.7.7")->sessions.size(), std::size_t(kThreads));
}

}  // namespace
