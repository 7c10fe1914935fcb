#include "vigil/nn/checkpoint.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace {

using namespace vigil;

TEST(Checkpoint, BaselineRoundTripIsBitExact) {
  Rng rng(1);
  Model<float> model = build_baseline<float>(Arch::Lstm, 2, rng);

  std::ostringstream first;
  save_model(first, model);
  std::istringstream in(first.str());
  Model<float> loaded = load_model(in);

  EXPECT_EQ(loaded.arch, Arch::Lstm);
  EXPECT_EQ(loaded.classes, 2u);

  std::ostringstream second;
  save_model(second, loaded);
  EXPECT_EQ(first.str(), second.str());

  auto a = model.net.params();
  auto b = loaded.net.params();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(*a[i], *b[i]);
}

TEST(Checkpoint, DenseLstmRoundTripKeepsStructure) {
  Rng rng(2);
  Model<float> model = build_denselstm<float>(2, 8, 0.7, rng);
  std::ostringstream out;
  save_model(out, model);
  std::istringstream in(out.str());
  Model<float> loaded = load_model(in);
  EXPECT_EQ(loaded.arch, Arch::DenseLstm);
  EXPECT_EQ(loaded.growth, 8u);
  EXPECT_NEAR(loaded.dropout_keep, 0.7, 1e-6);

  nn::Tensor<float> x({3, 23, 1});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = float(i % 2);
  EXPECT_EQ(model.net.forward(x), loaded.net.forward(x));
}

TEST(Checkpoint, RejectsBadMagicAndTruncation) {
  std::istringstream garbage("not a checkpoint");
  EXPECT_THROW(load_model(garbage), BadConfig);

  Rng rng(3);
  Model<float> model = build_baseline<float>(Arch::Rnn, 2, rng);
  std::ostringstream out;
  save_model(out, model);
  const std::string bytes = out.str();
  std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(load_model(truncated), BadConfig);
}

TEST(Checkpoint, RejectsTamperedKindTag) {
  Rng rng(4);
  Model<float> model = build_baseline<float>(Arch::Rnn, 2, rng);
  std::ostringstream out;
  save_model(out, model);
  std::string bytes = out.str();
  // First unit kind tag sits after magic(8) + version/arch/classes/growth(16)
  // + keep(4) + unit count(4).
  bytes[8 + 16 + 4 + 4] = char(99);
  std::istringstream in(bytes);
  EXPECT_THROW(load_model(in), BadConfig);
}

}  // namespace
