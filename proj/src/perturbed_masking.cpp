#include "pmctg/perturbed_masking.hpp"

#include <algorithm>
#include <array>
#include <exception>

#include "pmctg/error.hpp"

namespace pmctg {

namespace {

double distance(std::span<const double> a, std::span<const double> b,
                DistanceMetric metric) {
  if (metric == DistanceMetric::kCosine) return 1.0 - cosine(a, b);
  return euclidean_distance(a, b);
}

bool target_available(const Encoder& encoder, std::size_t target,
                      std::size_t framed_size) {
  return encoder.frame_vectors_available() ||
         (target != 0 && target + 1 != framed_size);
}

}  // namespace

std::vector<TokenId> frame(std::span<const TokenId> content) {
  std::vector<TokenId> out;
  out.reserve(content.size() + 2);
  out.push_back(kCls);
  out.insert(out.end(), content.begin(), content.end());
  out.push_back(kSep);
  return out;
}

double impact(const Encoder& encoder, std::span<const TokenId> framed,
              std::size_t source, std::size_t target, DistanceMetric metric) {
  if (source == target) {
    throw Error(ErrorCode::kInvalidArgument, "impact needs distinct source and target");
  }
  if (source >= framed.size() || target >= framed.size()) {
    throw Error(ErrorCode::kOutOfRange, "impact index outside framed sentence");
  }
  const std::array<std::size_t, 1> only_target{target};
  const std::array<std::size_t, 2> both{target, source};
  const auto alone = encoder.encode_at(framed, only_target, target);
  const auto perturbed = encoder.encode_at(framed, both, target);
  return distance(alone, perturbed, metric);
}

NeighbourImpacts neighbour_impacts_serial(const Encoder& encoder, const Sentence& s) {
  const auto framed = frame(s);
  const auto n = s.size();
  NeighbourImpacts out;
  out.on_left.resize(n);
  out.on_right.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t f = i + 1;
    if (target_available(encoder, f - 1, framed.size())) {
      out.on_left[i] = impact(encoder, framed, f, f - 1);
    }
    if (target_available(encoder, f + 1, framed.size())) {
      out.on_right[i] = impact(encoder, framed, f, f + 1);
    }
  }
  return out;
}

NeighbourImpacts neighbour_impacts(const Encoder& encoder, const Sentence& s) {
  const auto framed = frame(s);
  const auto n = s.size();
  NeighbourImpacts out;
  out.on_left.resize(n);
  out.on_right.resize(n);

  const auto targets = static_cast<std::ptrdiff_t>(framed.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ti = 0; ti < targets; ++ti) {
    const auto t = static_cast<std::size_t>(ti);
    if (!target_available(encoder, t, framed.size())) continue;
    try {
      const std::array<std::size_t, 1> only_target{t};
      const auto alone = encoder.encode_at(framed, only_target, t);
      // Content sources adjacent to t: t - 1 sees t on its right, t + 1 on
      // its left. Each slot has exactly one writer.
      if (t >= 2) {
        const std::array<std::size_t, 2> both{t, t - 1};
        out.on_right[t - 2] =
            euclidean_distance(alone, encoder.encode_at(framed, both, t));
      }
      if (t + 1 <= n) {
        const std::array<std::size_t, 2> both{t, t + 1};
        out.on_left[t] = euclidean_distance(alone, encoder.encode_at(framed, both, t));
      }
    } catch (...) {
#pragma omp critical(pmctg_impacts_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<double> min_max_normalize(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  if (out.empty()) return out;
  const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
  const double min = *lo, max = *hi;
  if (!(max > min)) {
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  for (auto& v : out) v = (v - min) / (max - min);
  return out;
}

EditScoreVector scores_from_impacts(const NeighbourImpacts& impacts) {
  const auto n = impacts.on_left.size();
  std::vector<double> present;
  for (std::size_t i = 0; i < n; ++i) {
    if (impacts.on_left[i]) present.push_back(*impacts.on_left[i]);
    if (impacts.on_right[i]) present.push_back(*impacts.on_right[i]);
  }
  const auto normalized = min_max_normalize(present);

  EditScoreVector esv;
  esv.scores.resize(n);
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    int terms = 0;
    if (impacts.on_left[i]) {
      sum += normalized[cursor++];
      ++terms;
    }
    if (impacts.on_right[i]) {
      sum += normalized[cursor++];
      ++terms;
    }
    esv.scores[i] = 1.0 - (terms ? sum / terms : 0.5);
  }
  esv.probabilities = softmax(esv.scores);
  return esv;
}

EditScoreVector edit_scores(const Encoder& encoder, const Sentence& s) {
  if (s.empty()) throw Error(ErrorCode::kEmptyInput, "edit scores of empty sentence");
  return scores_from_impacts(neighbour_impacts(encoder, s));
}

EditScoreVector edit_scores_serial(const Encoder& encoder, const Sentence& s) {
  if (s.empty()) throw Error(ErrorCode::kEmptyInput, "edit scores of empty sentence");
  return scores_from_impacts(neighbour_impacts_serial(encoder, s));
}

PositionSample sample_position(std::span<const double> probabilities, Rng& rng,
                               std::span<const std::size_t> protected_positions,
                               bool force_protected_insert) {
  PositionSample out{sample_index(probabilities, rng), std::nullopt};
  if (force_protected_insert &&
      std::find(protected_positions.begin(), protected_positions.end(),
                out.position) != protected_positions.end()) {
    out.forced = EditKind::kInsert;
  }
  return out;
}

}  // namespace pmctg
