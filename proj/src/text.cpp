#include "pmctg/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "pmctg/error.hpp"

namespace pmctg {

namespace {

constexpr const char* kSpecialSurfaces[kNumSpecials] = {
    "<s>", "</s>", "[MASK]", "[CLS]", "[SEP]", "<unk>"};

}  // namespace

Vocabulary::Vocabulary() {
  for (TokenId id = 0; id < kNumSpecials; ++id) {
    surfaces_.emplace_back(kSpecialSurfaces[id]);
    counts_.push_back(0);
    index_.emplace(kSpecialSurfaces[id], id);
  }
}

TokenId Vocabulary::add(std::string_view surface, std::uint64_t count) {
  if (surface.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty token surface");
  }
  if (auto it = index_.find(std::string(surface)); it != index_.end()) {
    return it->second;
  }
  const auto id = static_cast<TokenId>(surfaces_.size());
  surfaces_.emplace_back(surface);
  counts_.push_back(count);
  index_.emplace(std::string(surface), id);
  return id;
}

std::optional<TokenId> Vocabulary::find(std::string_view surface) const {
  auto it = index_.find(std::string(surface));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::lookup(std::string_view surface) const {
  return find(surface).value_or(kUnk);
}

const std::string& Vocabulary::surface(TokenId id) const {
  if (!contains(id)) {
    throw Error(ErrorCode::kOutOfRange,
                "token id " + std::to_string(id) + " outside vocabulary");
  }
  return surfaces_[id];
}

std::uint64_t Vocabulary::count(TokenId id) const {
  return contains(id) ? counts_[id] : 0;
}

void Vocabulary::set_count(TokenId id, std::uint64_t count) {
  if (!contains(id)) {
    throw Error(ErrorCode::kOutOfRange, "token id outside vocabulary");
  }
  counts_[id] = count;
}

std::uint64_t Vocabulary::total_count() const {
  std::uint64_t total = 0;
  for (auto c : counts_) total += c;
  return total;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& s : surfaces_) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  }
  return h;
}

void Vocabulary::write(std::ostream& out) const {
  for (std::size_t id = kNumSpecials; id < surfaces_.size(); ++id) {
    out << surfaces_[id] << '\t' << counts_[id] << '\n';
  }
}

Vocabulary Vocabulary::read(std::istream& in) {
  Vocabulary vocab;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(ErrorCode::kFormat,
                  "vocabulary line " + std::to_string(lineno) +
                      ": expected surface<TAB>count");
    }
    const std::string surface = line.substr(0, tab);
    std::uint64_t count = 0;
    try {
      count = std::stoull(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kFormat,
                  "vocabulary line " + std::to_string(lineno) + ": bad count");
    }
    if (vocab.find(surface)) {
      throw Error(ErrorCode::kFormat, "duplicate vocabulary entry " + surface);
    }
    vocab.add(surface, count);
  }
  return vocab;
}

std::string_view to_string(EditKind kind) {
  switch (kind) {
    case EditKind::kInsert:
      return "insert";
    case EditKind::kReplace:
      return "replace";
    case EditKind::kDelete:
      return "delete";
  }
  return "?";
}

EditKind edit_kind_from_string(std::string_view name) {
  if (name == "insert") return EditKind::kInsert;
  if (name == "replace") return EditKind::kReplace;
  if (name == "delete") return EditKind::kDelete;
  throw Error(ErrorCode::kFormat, "unknown edit kind " + std::string(name));
}

Sentence::Sentence(std::vector<TokenId> tokens,
                   std::vector<std::size_t> keyword_positions)
    : tokens_(std::move(tokens)), keyword_positions_(std::move(keyword_positions)) {
  std::sort(keyword_positions_.begin(), keyword_positions_.end());
  keyword_positions_.erase(
      std::unique(keyword_positions_.begin(), keyword_positions_.end()),
      keyword_positions_.end());
  if (!keyword_positions_.empty() && keyword_positions_.back() >= tokens_.size()) {
    throw Error(ErrorCode::kOutOfRange, "keyword position past sentence end");
  }
}

bool Sentence::is_keyword(std::size_t position) const {
  return std::binary_search(keyword_positions_.begin(), keyword_positions_.end(),
                            position);
}

std::vector<TokenId> Sentence::keyword_tokens() const {
  std::vector<TokenId> out;
  out.reserve(keyword_positions_.size());
  for (auto p : keyword_positions_) out.push_back(tokens_[p]);
  return out;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

Sentence tokenize(std::string_view text, const Vocabulary& vocab, bool lowercase) {
  std::string lowered;
  if (lowercase) lowered = to_lower(text);
  auto words = split_whitespace(lowercase ? std::string_view(lowered) : text);
  if (words.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no tokens in input text");
  }
  std::vector<TokenId> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(vocab.lookup(w));
  return Sentence(std::move(ids));
}

std::string detokenize(std::span<const TokenId> tokens, const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += vocab.surface(tokens[i]);
  }
  return out;
}

Corpus build_corpus(std::span<const std::string> lines, bool lowercase,
                    std::uint64_t min_count) {
  std::vector<std::vector<std::string>> tokenized;
  std::map<std::string, std::uint64_t> freq;
  for (const auto& line : lines) {
    auto words = split_whitespace(lowercase ? to_lower(line) : line);
    if (words.empty()) continue;
    for (const auto& w : words) ++freq[w];
    tokenized.push_back(std::move(words));
  }
  if (tokenized.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "corpus contains no sentences");
  }

  std::vector<std::pair<std::string, std::uint64_t>> kept;
  std::uint64_t unk = 0;
  for (const auto& [w, c] : freq) {
    // A corpus word that collides with a reserved surface is folded into it.
    if (c >= min_count) {
      kept.emplace_back(w, c);
    } else {
      unk += c;
    }
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;  // map order already gives surface asc
  });

  Corpus corpus;
  for (const auto& [w, c] : kept) {
    auto id = corpus.vocab.add(w, 0);
    corpus.vocab.set_count(id, corpus.vocab.count(id) + c);
  }
  corpus.vocab.set_count(kUnk, corpus.vocab.count(kUnk) + unk);

  corpus.sentences.reserve(tokenized.size());
  for (const auto& words : tokenized) {
    std::vector<TokenId> ids;
    ids.reserve(words.size());
    for (const auto& w : words) ids.push_back(corpus.vocab.lookup(w));
    corpus.sentences.push_back(std::move(ids));
  }
  return corpus;
}

Corpus ingest_corpus(const std::filesystem::path& path, bool lowercase,
                     std::uint64_t min_count) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open corpus " + path.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(std::move(line));
  if (in.bad()) {
    throw Error(ErrorCode::kIo, "read failure on " + path.string());
  }
  return build_corpus(lines, lowercase, min_count);
}

Sentence apply_edit(const Sentence& s, EditKind kind, std::size_t position,
                    std::optional<TokenId> token) {
  const auto n = s.size();
  std::vector<TokenId> tokens(s.tokens().begin(), s.tokens().end());
  std::vector<std::size_t> keywords = s.keyword_positions();

  switch (kind) {
    case EditKind::kInsert: {
      if (position > n) {
        throw Error(ErrorCode::kOutOfRange, "insert index past sentence end");
      }
      if (!token) throw Error(ErrorCode::kInvalidArgument, "insert needs a token");
      tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(position), *token);
      for (auto& k : keywords) {
        if (k >= position) ++k;
      }
      break;
    }
    case EditKind::kReplace: {
      if (position >= n) {
        throw Error(ErrorCode::kOutOfRange, "replace position past sentence end");
      }
      if (!token) throw Error(ErrorCode::kInvalidArgument, "replace needs a token");
      if (s.is_keyword(position)) {
        throw Error(ErrorCode::kConstraintViolation,
                    "cannot replace keyword at position " + std::to_string(position));
      }
      tokens[position] = *token;
      break;
    }
    case EditKind::kDelete: {
      if (position >= n) {
        throw Error(ErrorCode::kOutOfRange, "delete position past sentence end");
      }
      if (s.is_keyword(position)) {
        throw Error(ErrorCode::kConstraintViolation,
                    "cannot delete keyword at position " + std::to_string(position));
      }
      if (n < 2) {
        throw Error(ErrorCode::kUnderflow, "cannot delete from a one-token sentence");
      }
      tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(position));
      for (auto& k : keywords) {
        if (k > position) --k;
      }
      break;
    }
  }
  return Sentence(std::move(tokens), std::move(keywords));
}

}  // namespace pmctg
