#include "pmctg/language_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "pmctg/error.hpp"

namespace pmctg {

std::string_view to_string(Direction d) {
  return d == Direction::kForward ? "forward" : "backward";
}

double sequence_nll(const CausalLM& lm, const Sentence& s, bool terminal) {
  if (lm.direction() == Direction::kForward) {
    return lm.sequence_nll(s.tokens(), terminal);
  }
  std::vector<TokenId> reversed(s.tokens().rbegin(), s.tokens().rend());
  return lm.sequence_nll(reversed, terminal);
}

KneserNeyLM KneserNeyLM::train(const Corpus& corpus, int order, double discount,
                               Direction direction) {
  if (order < 1) {
    throw Error(ErrorCode::kInvalidArgument, "KN order must be >= 1");
  }
  if (!(discount > 0.0 && discount < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "KN discount must lie in (0, 1)");
  }
  if (corpus.sentences.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "cannot train on an empty corpus");
  }

  KneserNeyLM lm;
  lm.order_ = order;
  lm.discount_ = discount;
  lm.direction_ = direction;
  lm.vocab_size_ = corpus.vocab.size();
  lm.vocab_hash_ = corpus.vocab.hash();
  lm.raw_.resize(static_cast<std::size_t>(order));

  const auto pad = static_cast<std::size_t>(order - 1);
  std::vector<TokenId> seq;
  std::vector<TokenId> gram;
  for (const auto& sentence : corpus.sentences) {
    seq.assign(pad, kBos);
    if (direction == Direction::kForward) {
      seq.insert(seq.end(), sentence.begin(), sentence.end());
    } else {
      seq.insert(seq.end(), sentence.rbegin(), sentence.rend());
    }
    seq.push_back(kEos);
    for (std::size_t p = pad; p < seq.size(); ++p) {
      for (std::size_t k = 1; k <= static_cast<std::size_t>(order); ++k) {
        gram.assign(seq.begin() + static_cast<std::ptrdiff_t>(p + 1 - k),
                    seq.begin() + static_cast<std::ptrdiff_t>(p + 1));
        ++lm.raw_[k - 1][gram];
      }
    }
  }
  lm.build();
  return lm;
}

void KneserNeyLM::build() {
  emittable_ = 0;
  for (TokenId id = 0; id < vocab_size_; ++id) {
    if (is_emittable(id)) ++emittable_;
  }
  if (emittable_ == 0) {
    throw Error(ErrorCode::kEmptyCorpus, "vocabulary has no emittable tokens");
  }

  contexts_.assign(static_cast<std::size_t>(order_), {});
  auto add_table = [this](std::size_t level, const RawTable& counts) {
    auto& table = contexts_[level];
    for (const auto& [g, c] : counts) {
      Key key(g.begin(), g.end() - 1);
      auto& stats = table[key];
      stats.total += static_cast<double>(c);
      stats.distinct += 1;
      stats.successors.emplace_back(g.back(), static_cast<double>(c));
    }
  };

  const auto top = static_cast<std::size_t>(order_);
  add_table(top - 1, raw_[top - 1]);
  for (std::size_t k = 1; k < top; ++k) {
    // Continuation count of a k-gram: distinct left extensions among the
    // observed (k+1)-grams.
    RawTable continuation;
    for (const auto& [g, c] : raw_[k]) {
      ++continuation[std::vector<TokenId>(g.begin() + 1, g.end())];
    }
    add_table(k - 1, continuation);
  }

  unigram_.assign(vocab_size_, 0.0);
  auto it = contexts_[0].find(Key());
  if (it == contexts_[0].end() || it->second.total <= 0.0) {
    throw Error(ErrorCode::kEmptyCorpus, "no unigram statistics");
  }
  const auto& uni = it->second;
  const double floor =
      discount_ * static_cast<double>(uni.distinct) / uni.total /
      static_cast<double>(emittable_);
  for (TokenId id = 0; id < vocab_size_; ++id) {
    if (is_emittable(id)) unigram_[id] = floor;
  }
  for (const auto& [w, c] : uni.successors) {
    if (w < vocab_size_) unigram_[w] += std::max(c - discount_, 0.0) / uni.total;
  }
}

std::vector<TokenId> KneserNeyLM::padded_context(
    std::span<const TokenId> context) const {
  const auto want = static_cast<std::size_t>(order_ - 1);
  std::vector<TokenId> out(want, kBos);
  const auto take = std::min(want, context.size());
  std::copy(context.end() - static_cast<std::ptrdiff_t>(take), context.end(),
            out.end() - static_cast<std::ptrdiff_t>(take));
  return out;
}

KneserNeyLM::Key KneserNeyLM::context_key(std::span<const TokenId> padded,
                                          int length) const {
  return Key(padded.end() - length, padded.end());
}

double KneserNeyLM::probability(TokenId token,
                                std::span<const TokenId> context) const {
  if (token >= vocab_size_) return 0.0;
  double p = unigram_[token];
  if (p == 0.0) return 0.0;
  const auto padded = padded_context(context);
  for (int k = 2; k <= order_; ++k) {
    const auto& table = contexts_[static_cast<std::size_t>(k - 1)];
    auto it = table.find(context_key(padded, k - 1));
    if (it == table.end()) continue;
    const auto& stats = it->second;
    double lower = p;
    p = discount_ * static_cast<double>(stats.distinct) / stats.total * lower;
    auto succ = std::lower_bound(
        stats.successors.begin(), stats.successors.end(), token,
        [](const auto& entry, TokenId t) { return entry.first < t; });
    if (succ != stats.successors.end() && succ->first == token) {
      p += std::max(succ->second - discount_, 0.0) / stats.total;
    }
  }
  return p;
}

std::vector<double> KneserNeyLM::distribution(
    std::span<const TokenId> context) const {
  std::vector<double> p = unigram_;
  const auto padded = padded_context(context);
  for (int k = 2; k <= order_; ++k) {
    const auto& table = contexts_[static_cast<std::size_t>(k - 1)];
    auto it = table.find(context_key(padded, k - 1));
    if (it == table.end()) continue;
    const auto& stats = it->second;
    const double gamma = discount_ * static_cast<double>(stats.distinct) / stats.total;
    for (auto& v : p) v *= gamma;
    for (const auto& [w, c] : stats.successors) {
      p[w] += std::max(c - discount_, 0.0) / stats.total;
    }
  }
  return p;
}

std::vector<Candidate> KneserNeyLM::next_token_distribution(
    std::span<const TokenId> context, std::size_t top_k) const {
  if (top_k == 0) {
    throw Error(ErrorCode::kInvalidArgument, "top_k must be >= 1");
  }
  const auto p = distribution(context);
  std::vector<Candidate> all;
  all.reserve(p.size());
  for (TokenId id = kNumSpecials; id < p.size(); ++id) {
    if (p[id] > 0.0) all.push_back({id, p[id]});
  }
  const auto keep = std::min(top_k, all.size());
  auto by_prob = [](const Candidate& a, const Candidate& b) {
    return a.probability > b.probability ||
           (a.probability == b.probability && a.token < b.token);
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep),
                    all.end(), by_prob);
  all.resize(keep);
  double total = 0.0;
  for (const auto& c : all) total += c.probability;
  for (auto& c : all) c.probability /= total;
  return all;
}

double KneserNeyLM::sequence_nll(std::span<const TokenId> tokens,
                                 bool terminal) const {
  if (tokens.empty() && !terminal) {
    throw Error(ErrorCode::kEmptyInput, "sequence_nll of an empty sequence");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    total -= std::log(probability(tokens[i], tokens.first(i)));
  }
  std::size_t m = tokens.size();
  if (terminal) {
    total -= std::log(probability(kEos, tokens));
    ++m;
  }
  return total / static_cast<double>(m);
}

std::vector<std::size_t> KneserNeyLM::ngram_counts() const {
  std::vector<std::size_t> out;
  for (const auto& table : raw_) out.push_back(table.size());
  return out;
}

void KneserNeyLM::write(std::ostream& out, const Vocabulary& vocab) const {
  if (vocab.hash() != vocab_hash_) {
    throw Error(ErrorCode::kInvalidArgument, "vocabulary does not match model");
  }
  char discount[64];
  std::snprintf(discount, sizeof(discount), "%.17g", discount_);
  out << "KNLM v1 order=" << order_ << " discount=" << discount
      << " vocab_hash=" << vocab_hash_ << " direction=" << to_string(direction_)
      << '\n';
  for (std::size_t k = 0; k < raw_.size(); ++k) {
    out << '\\' << (k + 1) << "-grams:\n";
    for (const auto& [g, c] : raw_[k]) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (i) out << ' ';
        out << vocab.surface(g[i]);
      }
      out << '\t' << c << '\n';
    }
  }
}

KneserNeyLM KneserNeyLM::read(std::istream& in, const Vocabulary& vocab) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kFormat, "KN model: missing header");
  }
  std::istringstream header(line);
  std::string magic, version;
  header >> magic >> version;
  if (magic != "KNLM" || version != "v1") {
    throw Error(ErrorCode::kFormat, "KN model: bad header '" + line + "'");
  }
  KneserNeyLM lm;
  std::uint64_t hash = 0;
  bool have_order = false, have_discount = false, have_hash = false;
  std::string field;
  while (header >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    const auto name = field.substr(0, eq);
    const auto value = field.substr(eq + 1);
    try {
      if (name == "order") {
        lm.order_ = std::stoi(value);
        have_order = true;
      } else if (name == "discount") {
        lm.discount_ = std::stod(value);
        have_discount = true;
      } else if (name == "vocab_hash") {
        hash = std::stoull(value);
        have_hash = true;
      } else if (name == "direction") {
        lm.direction_ = value == "backward" ? Direction::kBackward : Direction::kForward;
      }
    } catch (const std::exception&) {
      throw Error(ErrorCode::kFormat, "KN model: bad header field " + field);
    }
  }
  if (!have_order || !have_discount || !have_hash || lm.order_ < 1 ||
      !(lm.discount_ > 0.0 && lm.discount_ < 1.0)) {
    throw Error(ErrorCode::kFormat, "KN model: incomplete header");
  }
  if (hash != vocab.hash()) {
    throw Error(ErrorCode::kFormat, "KN model: vocabulary hash mismatch");
  }
  lm.vocab_size_ = vocab.size();
  lm.vocab_hash_ = hash;
  lm.raw_.resize(static_cast<std::size_t>(lm.order_));

  int current = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '\\') {
      current = std::atoi(line.c_str() + 1);
      if (current < 1 || current > lm.order_) {
        throw Error(ErrorCode::kFormat, "KN model: bad section " + line);
      }
      continue;
    }
    if (current == 0) throw Error(ErrorCode::kFormat, "KN model: row before section");
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::kFormat, "KN model: expected ngram<TAB>count");
    }
    auto words = split_whitespace(std::string_view(line).substr(0, tab));
    if (words.size() != static_cast<std::size_t>(current)) {
      throw Error(ErrorCode::kFormat, "KN model: n-gram length mismatch");
    }
    std::vector<TokenId> gram;
    for (const auto& w : words) {
      auto id = vocab.find(w);
      if (!id) throw Error(ErrorCode::kFormat, "KN model: unknown token " + w);
      gram.push_back(*id);
    }
    lm.raw_[static_cast<std::size_t>(current - 1)][gram] =
        std::stoull(line.substr(tab + 1));
  }
  if (lm.raw_[0].empty()) throw Error(ErrorCode::kFormat, "KN model: no unigrams");
  lm.build();
  return lm;
}

}  // namespace pmctg
