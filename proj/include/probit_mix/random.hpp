#pragma once

// Random-number plumbing: one 64-bit Mersenne Twister per chain, seeds derived
// from a master seed and a replicate index through std::seed_seq.

#include <cstddef>
#include <cstdint>
#include <random>

#include <Eigen/Core>

#include "probit_mix/special_functions.hpp"

namespace probit_mix {

using Rng = std::mt19937_64;

/// Uniform on the open interval (0, 1) from 53 random bits.
template <class Gen>
double uniform_open(Gen& gen) {
  return (static_cast<double>(gen() >> 11) + 0.5) * 0x1p-53;
}

/// Standard normal by inversion, so each draw consumes exactly one generator output.
template <class Gen>
double std_normal(Gen& gen) {
  return std_normal_quantile(uniform_open(gen));
}

template <class Gen>
Eigen::VectorXd std_normal_vector(Gen& gen, Eigen::Index size) {
  Eigen::VectorXd out(size);
  for (Eigen::Index i = 0; i < size; ++i) out(i) = std_normal(gen);
  return out;
}

template <class Gen>
std::size_t uniform_index(Gen& gen, std::size_t count) {
  return std::uniform_int_distribution<std::size_t>(0, count - 1)(gen);
}

/// Seed for stream `index` under `master`. Independent of thread scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace probit_mix
