#include "pmctg/remote.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "pmctg/error.hpp"

namespace pmctg {

namespace {

using nlohmann::json;

httplib::Client make_client(const std::string& url, int timeout) {
  httplib::Client client(url);
  client.set_connection_timeout(timeout, 0);
  client.set_read_timeout(timeout, 0);
  client.set_write_timeout(timeout, 0);
  return client;
}

json check_response(const httplib::Result& res, const std::string& url,
                    const std::string& path) {
  if (!res) {
    throw Error(ErrorCode::kBackendUnavailable,
                "model server unreachable at " + url + path + " (" +
                    httplib::to_string(res.error()) + ")");
  }
  if (res->status != 200) {
    const auto code = res->status == 503 ? ErrorCode::kBackendUnavailable
                                         : ErrorCode::kInvalidArgument;
    throw Error(code, "model server " + path + " returned HTTP " +
                          std::to_string(res->status) + ": " + res->body);
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, "model server " + path + ": bad JSON: " + e.what());
  }
}

json post(const std::string& url, int timeout, const std::string& path,
          const json& body) {
  auto client = make_client(url, timeout);
  auto res = client.Post(path, body.dump(), "application/json");
  return check_response(res, url, path);
}

// Typed field access; missing or mistyped fields are a server format error.
template <typename T>
T field(const json& j, const char* key, const char* path) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat,
                std::string(path) + ": field '" + key + "': " + e.what());
  }
}

std::vector<std::string> surfaces(std::span<const TokenId> tokens,
                                  const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (auto id : tokens) out.push_back(vocab.surface(id));
  return out;
}

Vector parse_vector(const json& j, std::size_t dim, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::kFormat, std::string(what) + " is not an array");
  Vector v;
  try {
    v = j.get<Vector>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string(what) + ": " + e.what());
  }
  if (v.size() != dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + " has dim " + std::to_string(v.size()) +
                    ", server advertised " + std::to_string(dim));
  }
  return v;
}

}  // namespace

ServerHealth query_health(const std::string& url, int timeout_seconds) {
  auto client = make_client(url, timeout_seconds);
  auto j = check_response(client.Get("/v1/health"), url, "/v1/health");
  ServerHealth h;
  try {
    h.status = j.value("status", "");
    h.masked_model = j.value("masked_model", "");
    h.causal_model = j.value("causal_model", "");
    h.dim = j.value("dim", std::size_t{0});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("/v1/health: ") + e.what());
  }
  return h;
}

RemoteEncoder::RemoteEncoder(std::string url, const Vocabulary& vocab,
                             int timeout_seconds)
    : url_(std::move(url)), vocab_(&vocab), timeout_(timeout_seconds) {
  dim_ = query_health(url_, timeout_).dim;
  if (dim_ == 0) {
    throw Error(ErrorCode::kBackendUnavailable, "model server reports dim 0");
  }
}

std::vector<Vector> RemoteEncoder::encode(std::span<const TokenId> tokens,
                                          std::span<const std::size_t> masked) const {
  std::size_t begin = 0, end = tokens.size();
  if (end > begin && tokens[begin] == kCls) ++begin;
  if (end > begin && tokens[end - 1] == kSep) --end;

  std::vector<Vector> out(tokens.size(), Vector(dim_, 0.0));
  if (begin == end) return out;

  std::vector<std::size_t> shifted;
  for (auto m : masked) {
    if (m >= tokens.size()) {
      throw Error(ErrorCode::kOutOfRange, "mask position out of range");
    }
    if (m >= begin && m < end) shifted.push_back(m - begin);
  }
  json body = {{"tokens", surfaces(tokens.subspan(begin, end - begin), *vocab_)},
               {"mask_positions", shifted}};
  auto j = post(url_, timeout_, "/v1/encode", body);
  if (j.contains("dim") && field<std::size_t>(j, "dim", "/v1/encode") != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "server changed its advertised dim");
  }
  const auto vectors = field<json>(j, "vectors", "/v1/encode");
  if (!vectors.is_array() || vectors.size() != end - begin) {
    throw Error(ErrorCode::kFormat, "/v1/encode returned the wrong number of vectors");
  }
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    out[begin + i] = parse_vector(vectors[i], dim_, "/v1/encode vector");
  }
  return out;
}

Vector RemoteEncoder::sentence_vector(std::span<const TokenId> content) const {
  if (content.empty()) {
    throw Error(ErrorCode::kEmptyInput, "sentence vector of empty sentence");
  }
  auto j = post(url_, timeout_, "/v1/sentence_vector",
                json{{"tokens", surfaces(content, *vocab_)}});
  return parse_vector(field<json>(j, "vector", "/v1/sentence_vector"), dim_,
                      "/v1/sentence_vector vector");
}

RemoteCausalLM::RemoteCausalLM(std::string url, const Vocabulary& vocab,
                               int timeout_seconds)
    : url_(std::move(url)), vocab_(&vocab), timeout_(timeout_seconds) {}

std::vector<Candidate> RemoteCausalLM::next_token_distribution(
    std::span<const TokenId> context, std::size_t top_k) const {
  if (top_k == 0) throw Error(ErrorCode::kInvalidArgument, "top_k must be >= 1");
  std::vector<std::string> prefix;
  for (auto id : context) {
    if (id != kBos) prefix.push_back(vocab_->surface(id));
  }
  auto j = post(url_, timeout_, "/v1/next_token",
                json{{"prefix", prefix}, {"top_k", top_k}});
  const auto words = field<std::vector<std::string>>(j, "tokens", "/v1/next_token");
  const auto logprobs = field<std::vector<double>>(j, "logprobs", "/v1/next_token");
  if (words.size() != logprobs.size()) {
    throw Error(ErrorCode::kFormat, "/v1/next_token tokens/logprobs length mismatch");
  }
  std::vector<Candidate> out;
  double total = 0.0;
  for (std::size_t i = 0; i < words.size() && out.size() < top_k; ++i) {
    auto id = vocab_->find(words[i]);
    if (!id || is_special(*id)) continue;
    const bool dup = std::any_of(out.begin(), out.end(),
                                 [&](const Candidate& c) { return c.token == *id; });
    if (dup) continue;
    const double p = std::exp(logprobs[i]);
    out.push_back({*id, p});
    total += p;
  }
  if (total > 0.0) {
    for (auto& c : out) c.probability /= total;
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    return a.probability > b.probability;
  });
  return out;
}

double RemoteCausalLM::sequence_nll(std::span<const TokenId> tokens, bool) const {
  if (tokens.empty()) throw Error(ErrorCode::kEmptyInput, "sequence_nll of empty sequence");
  auto j = post(url_, timeout_, "/v1/nll", json{{"tokens", surfaces(tokens, *vocab_)}});
  const double nll = field<double>(j, "nll", "/v1/nll");
  if (!std::isfinite(nll) || nll < 0.0) {
    throw Error(ErrorCode::kFormat, "/v1/nll returned an invalid value");
  }
  return nll;
}

RemoteKeywordExtractor::RemoteKeywordExtractor(std::string url, const Vocabulary& vocab,
                                               std::size_t max_keywords,
                                               int timeout_seconds)
    : url_(std::move(url)),
      vocab_(&vocab),
      max_keywords_(max_keywords),
      timeout_(timeout_seconds) {}

std::vector<Keyword> RemoteKeywordExtractor::extract(const Sentence& s) const {
  std::vector<Keyword> out;
  if (max_keywords_ == 0 || s.empty()) return out;
  auto j = post(url_, timeout_, "/v1/keywords",
                json{{"tokens", surfaces(s.tokens(), *vocab_)}, {"k", max_keywords_}});
  const auto words = field<std::vector<std::string>>(j, "keywords", "/v1/keywords");
  const auto indices = field<std::vector<std::size_t>>(j, "indices", "/v1/keywords");
  if (words.size() != indices.size()) {
    throw Error(ErrorCode::kFormat, "/v1/keywords keywords/indices length mismatch");
  }
  for (std::size_t i = 0; i < words.size() && out.size() < max_keywords_; ++i) {
    const auto idx = indices[i];
    if (idx >= s.size() || vocab_->surface(s[idx]) != words[i]) {
      throw Error(ErrorCode::kFormat,
                  "/v1/keywords returned a keyword not at its stated index");
    }
    const bool dup = std::any_of(out.begin(), out.end(),
                                 [&](const Keyword& k) { return k.index == idx; });
    if (!dup && !is_special(s[idx])) {
      out.push_back({s[idx], idx, static_cast<double>(words.size() - i)});
    }
  }
  return out;
}

}  // namespace pmctg
