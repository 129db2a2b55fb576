#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace pmctg {

// mt19937_64 output is fixed by the standard; the helpers below avoid the
// implementation-defined std:: distributions so traces are portable.
using Rng = std::mt19937_64;

double uniform01(Rng& rng);
double standard_normal(Rng& rng);

// Draws index i with probability weights[i] / sum(weights).
std::size_t sample_index(std::span<const double> weights, Rng& rng);

// splitmix64 finalizer over (seed, stream); used to derive per-job seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

std::vector<double> softmax(std::span<const double> scores);

}  // namespace pmctg
