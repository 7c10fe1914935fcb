#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "vigil/models.hpp"

namespace vigil {

// Versioned binary model container, little-endian throughout:
//   magic "VGLMDL01", u32 version, u32 arch, u32 classes, u32 growth,
//   f32 dropout_keep, u32 unit count, then per unit layer:
//   u32 kind tag, u32 tensor count, per tensor u32 rank + u64 dims + f32 data.
// Round-trips are bit-exact for float models.

namespace detail {

inline constexpr char kCheckpointMagic[8] = {'V', 'G', 'L', 'M', 'D', 'L', '0', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void write_u32(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

inline void write_f32(std::ostream& out, float v) {
  write_u32(out, std::bit_cast<std::uint32_t>(v));
}

inline std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw BadConfig("checkpoint truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t read_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw BadConfig("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline float read_f32(std::istream& in) { return std::bit_cast<float>(read_u32(in)); }

}  // namespace detail

inline void save_model(std::ostream& out, Model<float>& model) {
  out.write(detail::kCheckpointMagic, 8);
  detail::write_u32(out, detail::kCheckpointVersion);
  detail::write_u32(out, static_cast<std::uint32_t>(model.arch));
  detail::write_u32(out, model.classes);
  detail::write_u32(out, model.growth);
  detail::write_f32(out, static_cast<float>(model.dropout_keep));

  auto units = model.net.units();
  detail::write_u32(out, static_cast<std::uint32_t>(units.size()));
  for (auto* unit : units) {
    detail::write_u32(out, static_cast<std::uint32_t>(unit->kind()));
    std::vector<nn::Tensor<float>*> params;
    unit->params(params);
    detail::write_u32(out, static_cast<std::uint32_t>(params.size()));
    for (auto* p : params) {
      detail::write_u32(out, static_cast<std::uint32_t>(p->rank()));
      for (std::size_t d = 0; d < p->rank(); ++d) detail::write_u64(out, p->dim(d));
      for (std::size_t i = 0; i < p->size(); ++i) detail::write_f32(out, (*p)[i]);
    }
  }
}

inline Model<float> load_model(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, detail::kCheckpointMagic, 8) != 0)
    throw BadConfig("not a model checkpoint (bad magic)");
  const std::uint32_t version = detail::read_u32(in);
  if (version != detail::kCheckpointVersion)
    throw BadConfig("unsupported checkpoint version " + std::to_string(version));

  const auto arch = static_cast<Arch>(detail::read_u32(in));
  const std::uint32_t classes = detail::read_u32(in);
  const std::uint32_t growth = detail::read_u32(in);
  const float keep = detail::read_f32(in);

  Rng init_rng(0);  // every parameter is overwritten below
  Model<float> model = arch == Arch::DenseLstm
                           ? build_denselstm<float>(classes, growth, keep, init_rng)
                           : build_baseline<float>(arch, classes, init_rng);
  model.dropout_keep = keep;

  auto units = model.net.units();
  const std::uint32_t unit_count = detail::read_u32(in);
  if (unit_count != units.size())
    throw BadConfig("checkpoint has " + std::to_string(unit_count) + " units, architecture has " +
                    std::to_string(units.size()));

  for (auto* unit : units) {
    const auto kind = static_cast<nn::LayerKind>(detail::read_u32(in));
    if (kind != unit->kind())
      throw BadConfig(std::string("checkpoint layer kind ") + nn::to_string(kind) +
                      " does not match " + nn::to_string(unit->kind()));
    std::vector<nn::Tensor<float>*> params;
    unit->params(params);
    const std::uint32_t tensor_count = detail::read_u32(in);
    if (tensor_count != params.size())
      throw BadConfig("checkpoint tensor count mismatch in " +
                      std::string(nn::to_string(kind)));
    for (auto* p : params) {
      const std::uint32_t rank = detail::read_u32(in);
      if (rank != p->rank()) throw BadConfig("checkpoint tensor rank mismatch");
      for (std::size_t d = 0; d < rank; ++d)
        if (detail::read_u64(in) != p->dim(d)) throw BadConfig("checkpoint tensor dim mismatch");
      for (std::size_t i = 0; i < p->size(); ++i) (*p)[i] = detail::read_f32(in);
    }
  }
  return model;
}

}  // namespace vigil
