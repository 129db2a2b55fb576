#include "pmctg/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "pmctg/error.hpp"
#include "pmctg/random.hpp"

namespace pmctg {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  const auto n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "distance between unequal dims");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "cosine between unequal dims");
  }
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

Vector Encoder::encode_at(std::span<const TokenId> tokens,
                          std::span<const std::size_t> masked,
                          std::size_t position) const {
  auto all = encode(tokens, masked);
  if (position >= all.size()) {
    throw Error(ErrorCode::kOutOfRange, "encode_at position out of range");
  }
  return std::move(all[position]);
}

PpmiEncoder::PpmiEncoder(std::vector<Vector> static_vectors)
    : vectors_(std::move(static_vectors)) {
  if (vectors_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "encoder table is empty");
  }
  dim_ = vectors_.front().size();
  if (dim_ == 0) throw Error(ErrorCode::kInvalidArgument, "encoder dim is zero");
  for (const auto& v : vectors_) {
    if (v.size() != dim_) {
      throw Error(ErrorCode::kDimensionMismatch, "encoder rows differ in length");
    }
  }
}

PpmiEncoder PpmiEncoder::train(const Corpus& corpus, Options options) {
  if (corpus.sentences.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "cannot train encoder on empty corpus");
  }
  if (options.dim == 0 || options.window == 0) {
    throw Error(ErrorCode::kInvalidArgument, "encoder dim and window must be >= 1");
  }
  const std::size_t vocab = corpus.vocab.size();

  // Sorted rows keep the projection sums in a fixed order.
  std::vector<std::map<TokenId, double>> cooc(vocab);
  std::vector<TokenId> framed;
  for (const auto& sentence : corpus.sentences) {
    framed.assign(1, kCls);
    framed.insert(framed.end(), sentence.begin(), sentence.end());
    framed.push_back(kSep);
    for (std::size_t i = 0; i < framed.size(); ++i) {
      const auto last = std::min(framed.size() - 1, i + options.window);
      for (std::size_t j = i + 1; j <= last; ++j) {
        cooc[framed[i]][framed[j]] += 1.0;
        cooc[framed[j]][framed[i]] += 1.0;
      }
    }
  }

  std::vector<double> row_sum(vocab, 0.0);
  double total = 0.0;
  for (std::size_t w = 0; w < vocab; ++w) {
    for (const auto& [c, n] : cooc[w]) row_sum[w] += n;
    total += row_sum[w];
  }

  Rng rng(options.seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(options.dim));
  std::vector<Vector> projection(vocab, Vector(options.dim));
  for (auto& row : projection) {
    for (auto& v : row) v = standard_normal(rng) * scale;
  }

  std::vector<Vector> vectors(vocab, Vector(options.dim, 0.0));
  for (std::size_t w = 0; w < vocab; ++w) {
    for (const auto& [c, n] : cooc[w]) {
      const double pmi = std::log(n * total / (row_sum[w] * row_sum[c]));
      if (pmi <= 0.0) continue;
      for (std::size_t d = 0; d < options.dim; ++d) {
        vectors[w][d] += pmi * projection[c][d];
      }
    }
  }
  for (TokenId id : {kBos, kEos, kMask}) {
    std::fill(vectors[id].begin(), vectors[id].end(), 0.0);
  }
  return PpmiEncoder(std::move(vectors));
}

const Vector& PpmiEncoder::static_vector(TokenId id) const {
  if (id >= vectors_.size()) {
    throw Error(ErrorCode::kOutOfRange, "token id outside encoder table");
  }
  return vectors_[id];
}

Vector PpmiEncoder::encode_at(std::span<const TokenId> tokens,
                              std::span<const std::size_t> masked,
                              std::size_t position) const {
  if (position >= tokens.size()) {
    throw Error(ErrorCode::kOutOfRange, "encode position out of range");
  }
  for (auto m : masked) {
    if (m >= tokens.size()) {
      throw Error(ErrorCode::kOutOfRange, "mask position out of range");
    }
  }
  Vector out(dim_, 0.0);
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    if (j == position) continue;
    if (std::find(masked.begin(), masked.end(), j) != masked.end()) continue;
    const auto& e = static_vector(tokens[j]);
    const double w = weight(j > position ? j - position : position - j);
    for (std::size_t d = 0; d < dim_; ++d) out[d] += w * e[d];
  }
  return out;
}

std::vector<Vector> PpmiEncoder::encode(std::span<const TokenId> tokens,
                                        std::span<const std::size_t> masked) const {
  std::vector<Vector> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.push_back(encode_at(tokens, masked, i));
  }
  return out;
}

Vector PpmiEncoder::sentence_vector(std::span<const TokenId> content) const {
  if (content.empty()) {
    throw Error(ErrorCode::kEmptyInput, "sentence vector of empty sentence");
  }
  Vector out(dim_, 0.0);
  for (auto id : content) {
    const auto& e = static_vector(id);
    for (std::size_t d = 0; d < dim_; ++d) out[d] += e[d];
  }
  for (auto& v : out) v /= static_cast<double>(content.size());
  return out;
}

void PpmiEncoder::write(std::ostream& out) const {
  out << "PPMI v1 dim=" << dim_ << " rows=" << vectors_.size() << '\n';
  char buf[64];
  for (const auto& row : vectors_) {
    for (std::size_t d = 0; d < row.size(); ++d) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[d]);
      if (d) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

PpmiEncoder PpmiEncoder::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kFormat, "encoder table: missing header");
  }
  std::size_t dim = 0, rows = 0;
  if (std::sscanf(line.c_str(), "PPMI v1 dim=%zu rows=%zu", &dim, &rows) != 2 ||
      dim == 0) {
    throw Error(ErrorCode::kFormat, "encoder table: bad header '" + line + "'");
  }
  std::vector<Vector> vectors;
  vectors.reserve(rows);
  while (vectors.size() < rows && std::getline(in, line)) {
    std::istringstream ss(line);
    Vector row;
    row.reserve(dim);
    double v;
    while (ss >> v) row.push_back(v);
    if (row.size() != dim) {
      throw Error(ErrorCode::kFormat, "encoder table: row of wrong length");
    }
    vectors.push_back(std::move(row));
  }
  if (vectors.size() != rows) {
    throw Error(ErrorCode::kFormat, "encoder table: truncated");
  }
  return PpmiEncoder(std::move(vectors));
}

}  // namespace pmctg
