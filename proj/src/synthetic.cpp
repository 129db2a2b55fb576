#include "pmctg/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "pmctg/error.hpp"
#include "pmctg/keywords.hpp"
#include "pmctg/text.hpp"

namespace pmctg {

namespace {

using Words = std::vector<std::string_view>;

struct Verb {
  std::string_view word;
  Words objects;
};

const Words kDeterminers{"the", "a", "this", "my", "her", "our"};
const Words kAdjectives{"big", "small", "old", "young", "happy",
                        "red", "quiet", "busy", "tired", "bright"};
const Words kPeople{"man",     "woman", "teacher", "doctor", "child",
                    "farmer",  "student", "driver", "singer", "girl", "boy"};
const Words kAnimals{"cat", "dog", "bird", "horse", "fox", "rabbit", "cow", "sheep"};
const Words kPlaces{"park",  "garden", "city",    "school",  "kitchen",
                    "river", "forest", "market",  "station", "village"};
const Words kPrepositions{"in", "near", "at", "behind"};
const Words kAdverbs{"quickly", "slowly", "often", "quietly", "today", "again"};
const Words kAnimalVerbs{"runs", "sleeps", "jumps", "eats", "waits", "plays", "hides"};
const Words kStates{"new", "broken", "clean", "heavy", "empty", "expensive"};

const std::vector<Verb>& transitive_verbs() {
  static const std::vector<Verb> verbs{
      {"reads", {"book", "letter", "newspaper", "story"}},
      {"writes", {"letter", "song", "book", "story"}},
      {"buys", {"car", "cake", "house", "ball", "book", "bicycle"}},
      {"paints", {"picture", "house", "boat", "window", "fence"}},
      {"cleans", {"window", "kitchen", "car", "boat", "floor"}},
      {"bakes", {"cake", "bread", "pie"}},
      {"sings", {"song"}},
      {"repairs", {"car", "bicycle", "fence", "boat", "window"}},
      {"sells", {"car", "house", "bread", "newspaper", "picture"}},
      {"carries", {"ball", "box", "bread", "letter"}},
  };
  return verbs;
}

Words all_objects() {
  Words out;
  for (const auto& v : transitive_verbs()) {
    for (auto o : v.objects) {
      if (std::find(out.begin(), out.end(), o) == out.end()) out.push_back(o);
    }
  }
  return out;
}

std::size_t pick_index(std::size_t size, Rng& rng) {
  const auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(size));
  return std::min(i, size - 1);
}

std::string_view pick(const Words& words, Rng& rng) {
  return words[pick_index(words.size(), rng)];
}

bool chance(double p, Rng& rng) { return uniform01(rng) < p; }

void noun_phrase(const Words& nouns, double adjective_rate, std::vector<std::string_view>& out,
                 Rng& rng) {
  out.push_back(pick(kDeterminers, rng));
  if (chance(adjective_rate, rng)) out.push_back(pick(kAdjectives, rng));
  out.push_back(pick(nouns, rng));
}

void place_phrase(std::vector<std::string_view>& out, Rng& rng) {
  out.push_back(pick(kPrepositions, rng));
  out.push_back("the");
  out.push_back(pick(kPlaces, rng));
}

std::string join(const std::vector<std::string_view>& words) {
  std::string out;
  for (auto w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace

const std::vector<std::string>& toy_filler_tokens() {
  static const std::vector<std::string> fillers{"um", "uh"};
  return fillers;
}

std::string toy_sentence(Rng& rng) {
  std::vector<std::string_view> w;
  const double form = uniform01(rng);
  if (form < 0.45) {
    noun_phrase(kPeople, 0.3, w, rng);
    const auto& verb = transitive_verbs()[pick_index(transitive_verbs().size(), rng)];
    w.push_back(verb.word);
    noun_phrase(verb.objects, 0.3, w, rng);
    if (chance(0.5, rng)) place_phrase(w, rng);
  } else if (form < 0.75) {
    noun_phrase(kAnimals, 0.3, w, rng);
    w.push_back(pick(kAnimalVerbs, rng));
    if (chance(0.4, rng)) w.push_back(pick(kAdverbs, rng));
    if (chance(0.6, rng)) place_phrase(w, rng);
  } else if (form < 0.9) {
    static const Words objects = all_objects();
    noun_phrase(objects, 0.0, w, rng);
    w.push_back("is");
    w.push_back(pick(kStates, rng));
  } else {
    noun_phrase(kPeople, 0.0, w, rng);
    w.push_back("and");
    noun_phrase(kPeople, 0.0, w, rng);
    w.push_back("walk");
    place_phrase(w, rng);
  }
  w.push_back(".");
  return join(w);
}

std::vector<std::string> toy_corpus(const ToyCorpusOptions& options) {
  if (!(options.noise_rate >= 0.0 && options.noise_rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "noise rate must lie in [0, 1]");
  }
  Rng rng(options.seed);
  std::vector<std::string> lines;
  lines.reserve(options.sentences);
  for (std::size_t i = 0; i < options.sentences; ++i) {
    auto line = toy_sentence(rng);
    if (chance(options.noise_rate, rng)) line = insert_filler(line, rng);
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string insert_filler(std::string_view sentence, Rng& rng, std::size_t* slot_out) {
  auto words = split_whitespace(sentence);
  if (words.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "filler needs at least two tokens");
  }
  // Slots 1..n-1 lie between two existing tokens.
  const auto slot = 1 + pick_index(words.size() - 1, rng);
  const auto& fillers = toy_filler_tokens();
  words.insert(words.begin() + static_cast<std::ptrdiff_t>(slot),
               fillers[pick_index(fillers.size(), rng)]);
  if (slot_out) *slot_out = slot;
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::vector<FillerCase> filler_suite(const Vocabulary& vocab,
                                     const KeywordExtractor& extractor, std::size_t count,
                                     Rng& rng) {
  std::vector<FillerCase> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    FillerCase c;
    c.clean = toy_sentence(rng);
    c.noisy = insert_filler(c.clean, rng, &c.filler_index);
    const auto noisy = tokenize(c.noisy, vocab, false);
    c.input.task = Task::kSoft;
    c.input.tokens.assign(noisy.tokens().begin(), noisy.tokens().end());
    for (auto k : extractor.extract(tokenize(c.clean, vocab, false))) {
      if (k.index >= c.filler_index) ++k.index;
      c.input.keywords.push_back(k);
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<std::string> sample_keywords(std::string_view sentence,
                                         std::size_t max_keywords, Rng& rng) {
  const auto& stop = default_stopwords();
  const auto& fillers = toy_filler_tokens();
  std::vector<std::string> content;
  for (auto& w : split_whitespace(sentence)) {
    if (stop.count(w) || std::find(fillers.begin(), fillers.end(), w) != fillers.end()) {
      continue;
    }
    if (std::none_of(w.begin(), w.end(), [](unsigned char c) { return std::isalnum(c); })) {
      continue;
    }
    if (std::find(content.begin(), content.end(), w) == content.end()) {
      content.push_back(std::move(w));
    }
  }
  if (content.empty() || max_keywords == 0) return {};

  const auto cap = std::min(max_keywords, content.size());
  const auto count = 1 + pick_index(cap, rng);
  // Partial Fisher-Yates over indices, then restore sentence order.
  std::vector<std::size_t> idx(content.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(idx[i], idx[i + pick_index(idx.size() - i, rng)]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  std::vector<std::string> out;
  for (auto i : idx) out.push_back(content[i]);
  return out;
}

}  // namespace pmctg
