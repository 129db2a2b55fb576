#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "pmctg/text.hpp"

namespace pmctg {

using Vector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);
double euclidean_distance(std::span<const double> a, std::span<const double> b);
// Zero when either vector is zero.
double cosine(std::span<const double> a, std::span<const double> b);

// Masked contextual encoder. `masked` lists positions whose tokens are
// replaced by [MASK] before encoding.
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual std::size_t dim() const = 0;

  // One vector per input position.
  virtual std::vector<Vector> encode(std::span<const TokenId> tokens,
                                     std::span<const std::size_t> masked) const = 0;

  // Vector at a single position; backends may skip the other positions.
  virtual Vector encode_at(std::span<const TokenId> tokens,
                           std::span<const std::size_t> masked,
                           std::size_t position) const;

  // Pooled representation of the content tokens.
  virtual Vector sentence_vector(std::span<const TokenId> content) const = 0;

  // False when the backend cannot produce vectors at [CLS]/[SEP] positions.
  virtual bool frame_vectors_available() const { return true; }
};

// Linear co-occurrence encoder: each token has a static vector e(w), the
// seeded random projection of its PPMI row, and the contextual vector at
// position i is sum_{j not masked, j != i} e(x_j) / |i - j|.
class PpmiEncoder final : public Encoder {
 public:
  struct Options {
    std::size_t dim = 64;
    std::size_t window = 2;
    std::uint64_t seed = 0x5eedULL;
  };

  // Co-occurrences are counted over [CLS] sentence [SEP], so the frame
  // tokens get vectors of their own.
  static PpmiEncoder train(const Corpus& corpus, Options options);
  static PpmiEncoder train(const Corpus& corpus) { return train(corpus, Options{}); }

  // Static table indexed by token id; all rows must share one length.
  explicit PpmiEncoder(std::vector<Vector> static_vectors);

  std::size_t dim() const override { return dim_; }
  std::vector<Vector> encode(std::span<const TokenId> tokens,
                             std::span<const std::size_t> masked) const override;
  Vector encode_at(std::span<const TokenId> tokens,
                   std::span<const std::size_t> masked,
                   std::size_t position) const override;
  Vector sentence_vector(std::span<const TokenId> content) const override;

  const Vector& static_vector(TokenId id) const;
  std::size_t vocab_size() const { return vectors_.size(); }

  static double weight(std::size_t distance) {
    return 1.0 / static_cast<double>(distance);
  }

  // Header "PPMI v1 dim=D rows=R", then one row of D values per token id.
  void write(std::ostream& out) const;
  static PpmiEncoder read(std::istream& in);

 private:
  std::size_t dim_ = 0;
  std::vector<Vector> vectors_;
};

}  // namespace pmctg
