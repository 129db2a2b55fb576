#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pmctg/encoder.hpp"
#include "pmctg/random.hpp"
#include "pmctg/text.hpp"

namespace pmctg {

enum class DistanceMetric { kEuclidean, kCosine };

// [CLS] tokens... [SEP]; content index i sits at framed index i + 1.
std::vector<TokenId> frame(std::span<const TokenId> content);
inline std::vector<TokenId> frame(const Sentence& s) { return frame(s.tokens()); }

// Impact of the token at `source` on the token at `target`:
// d(H(x \ {target})_target, H(x \ {target, source})_target).
// Exactly two encoder calls. Indices refer to `framed`.
double impact(const Encoder& encoder, std::span<const TokenId> framed,
              std::size_t source, std::size_t target,
              DistanceMetric metric = DistanceMetric::kEuclidean);

// Raw adjacent impacts of each content token on its two neighbours in the
// framed sentence. A term is absent when the neighbour is a frame token and
// the encoder has no frame vectors.
struct NeighbourImpacts {
  std::vector<std::optional<double>> on_left;
  std::vector<std::optional<double>> on_right;
};

struct EditScoreVector {
  std::vector<double> scores;         // ES_i, one per content token
  std::vector<double> probabilities;  // softmax(ES)
};

// ES_i = 1 - mean(normalized impact of x_i on its neighbours), impacts
// min-max normalized over the sentence (constant impacts map to 0.5),
// followed by softmax. Impacts are grouped by target so the [MASK]-only
// call is shared, and targets are spread over OpenMP threads.
EditScoreVector edit_scores(const Encoder& encoder, const Sentence& s);
NeighbourImpacts neighbour_impacts(const Encoder& encoder, const Sentence& s);

// Reference path: one impact() call per (token, neighbour) pair, serial.
EditScoreVector edit_scores_serial(const Encoder& encoder, const Sentence& s);
NeighbourImpacts neighbour_impacts_serial(const Encoder& encoder, const Sentence& s);

EditScoreVector scores_from_impacts(const NeighbourImpacts& impacts);

// Maps values to [0, 1] by (v - min) / (max - min); 0.5 when all equal.
std::vector<double> min_max_normalize(std::span<const double> values);

struct PositionSample {
  std::size_t position;
  std::optional<EditKind> forced;
};

PositionSample sample_position(std::span<const double> probabilities, Rng& rng,
                               std::span<const std::size_t> protected_positions,
                               bool force_protected_insert);
inline PositionSample sample_position(const EditScoreVector& esv, Rng& rng,
                                      std::span<const std::size_t> protected_positions,
                                      bool force_protected_insert) {
  return sample_position(esv.probabilities, rng, protected_positions,
                         force_protected_insert);
}

}  // namespace pmctg
