#ifndef HGOF_RNG_HPP
#define HGOF_RNG_HPP

#include <cstdint>
#include <random>

#include "hgof/common.hpp"

namespace hgof {

/*
 * Every random quantity in the library is drawn from a named stream derived
 * from one master seed. A stream is identified by (tag, index); distinct
 * identifiers give statistically independent engines, so concurrent workers
 * never share generator state. Identical (master, tag, index) always
 * reproduces the same draws.
 */
namespace stream {
inline constexpr std::uint64_t probes = 0x01;
inline constexpr std::uint64_t bootstrap = 0x02;
inline constexpr std::uint64_t replication = 0x03;
inline constexpr std::uint64_t dgp = 0x04;
inline constexpr std::uint64_t coefficient = 0x05;
inline constexpr std::uint64_t process = 0x06;
}  // namespace stream

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// 64-bit sub-seed for stream (tag, index) under `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                                 std::uint64_t index) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s = a ^ (tag * 0xd6e8feb86659fd93ULL);
  std::uint64_t b = splitmix64(s);
  s = b ^ (index * 0xa5a5a5a5a5a5a5a5ULL);
  return splitmix64(s);
}

/// Engine for stream (tag, index) under `master`.
inline std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t tag,
                                   std::uint64_t index) {
  std::uint64_t s = derive_seed(master, tag, index);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32)};
  return std::mt19937_64(seq);
}

/// rows x cols of iid N(0,1), filled row by row.
template <typename Scalar = double>
MatrixX<Scalar> standard_normal_matrix(Index rows, Index cols,
                                       std::mt19937_64& engine) {
  std::normal_distribution<Scalar> normal;
  MatrixX<Scalar> z(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) z(i, j) = normal(engine);
  return z;
}

}  // namespace hgof

#endif  // HGOF_RNG_HPP
