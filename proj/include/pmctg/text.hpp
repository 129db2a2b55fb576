#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pmctg {

using TokenId = std::uint32_t;

// Reserved ids. Serialized models and traces depend on these values.
inline constexpr TokenId kBos = 0;
inline constexpr TokenId kEos = 1;
inline constexpr TokenId kMask = 2;
inline constexpr TokenId kCls = 3;
inline constexpr TokenId kSep = 4;
inline constexpr TokenId kUnk = 5;
inline constexpr TokenId kNumSpecials = 6;

inline constexpr bool is_special(TokenId id) { return id < kNumSpecials; }

class Vocabulary {
 public:
  // Only the six reserved specials.
  Vocabulary();

  // Appends a content surface; returns its id, or the existing id.
  TokenId add(std::string_view surface, std::uint64_t count = 0);

  std::optional<TokenId> find(std::string_view surface) const;
  TokenId lookup(std::string_view surface) const;  // kUnk when absent
  const std::string& surface(TokenId id) const;
  std::uint64_t count(TokenId id) const;
  void set_count(TokenId id, std::uint64_t count);
  std::uint64_t total_count() const;

  std::size_t size() const { return surfaces_.size(); }
  bool contains(TokenId id) const { return id < surfaces_.size(); }

  // FNV-1a over surfaces in id order; ties model files to a vocabulary.
  std::uint64_t hash() const;

  // "surface<TAB>count" per content token, ids implied by line order.
  void write(std::ostream& out) const;
  static Vocabulary read(std::istream& in);

 private:
  std::vector<std::string> surfaces_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, TokenId> index_;
};

struct Corpus {
  std::vector<std::vector<TokenId>> sentences;
  Vocabulary vocab;
};

enum class EditKind { kInsert, kReplace, kDelete };

std::string_view to_string(EditKind kind);
EditKind edit_kind_from_string(std::string_view name);

// Content tokens plus the positions that hold hard-constraint keywords.
class Sentence {
 public:
  Sentence() = default;
  explicit Sentence(std::vector<TokenId> tokens,
                    std::vector<std::size_t> keyword_positions = {});

  std::span<const TokenId> tokens() const { return tokens_; }
  const std::vector<std::size_t>& keyword_positions() const {
    return keyword_positions_;
  }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  TokenId operator[](std::size_t i) const { return tokens_[i]; }

  bool is_keyword(std::size_t position) const;
  std::vector<TokenId> keyword_tokens() const;

  friend bool operator==(const Sentence&, const Sentence&) = default;

 private:
  std::vector<TokenId> tokens_;
  std::vector<std::size_t> keyword_positions_;  // sorted, unique
};

// Whitespace split; unknown surfaces become kUnk.
Sentence tokenize(std::string_view text, const Vocabulary& vocab,
                  bool lowercase = false);
std::string detokenize(std::span<const TokenId> tokens,
                       const Vocabulary& vocab);
inline std::string detokenize(const Sentence& s, const Vocabulary& vocab) {
  return detokenize(s.tokens(), vocab);
}

std::vector<std::string> split_whitespace(std::string_view text);
std::string to_lower(std::string_view text);

// Ids assigned by (frequency desc, surface asc) after the reserved specials.
Corpus ingest_corpus(const std::filesystem::path& path, bool lowercase,
                     std::uint64_t min_count);
Corpus build_corpus(std::span<const std::string> lines, bool lowercase,
                    std::uint64_t min_count);

// For kInsert `position` is the absolute insertion index in [0, size()];
// otherwise it indexes an existing token. Returns a new sentence.
Sentence apply_edit(const Sentence& s, EditKind kind, std::size_t position,
                    std::optional<TokenId> token = std::nullopt);

}  // namespace pmctg
