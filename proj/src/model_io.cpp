#include "pmctg/model_io.hpp"

#include <fstream>

#include "pmctg/error.hpp"

namespace pmctg {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace

ModelBundle train_bundle(const Corpus& corpus, int order, double discount,
                         PpmiEncoder::Options encoder_options) {
  return ModelBundle{corpus.vocab,
                     KneserNeyLM::train(corpus, order, discount, Direction::kForward),
                     KneserNeyLM::train(corpus, order, discount, Direction::kBackward),
                     PpmiEncoder::train(corpus, encoder_options)};
}

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());

  const auto vocab_path = dir / "vocab.tsv";
  auto vocab_out = open_out(vocab_path);
  bundle.vocab.write(vocab_out);
  finish(vocab_out, vocab_path);

  const auto fwd_path = dir / "forward.knlm";
  auto fwd = open_out(fwd_path);
  bundle.forward.write(fwd, bundle.vocab);
  finish(fwd, fwd_path);

  const auto bwd_path = dir / "backward.knlm";
  auto bwd = open_out(bwd_path);
  bundle.backward.write(bwd, bundle.vocab);
  finish(bwd, bwd_path);

  const auto enc_path = dir / "encoder.ppmi";
  auto enc = open_out(enc_path);
  bundle.encoder.write(enc);
  finish(enc, enc_path);
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  auto in = open_in(path);
  return Vocabulary::read(in);
}

KneserNeyLM load_kn(const std::filesystem::path& path, const Vocabulary& vocab) {
  auto in = open_in(path);
  return KneserNeyLM::read(in, vocab);
}

ModelBundle load_bundle(const std::filesystem::path& dir) {
  auto vocab = load_vocabulary(dir / "vocab.tsv");
  auto forward = load_kn(dir / "forward.knlm", vocab);
  auto backward = load_kn(dir / "backward.knlm", vocab);
  if (forward.direction() != Direction::kForward ||
      backward.direction() != Direction::kBackward) {
    throw Error(ErrorCode::kFormat, "model directory has mislabelled LM directions");
  }
  auto enc_in = open_in(dir / "encoder.ppmi");
  auto encoder = PpmiEncoder::read(enc_in);
  if (encoder.vocab_size() != vocab.size()) {
    throw Error(ErrorCode::kFormat, "encoder table does not match the vocabulary");
  }
  return ModelBundle{std::move(vocab), std::move(forward), std::move(backward),
                     std::move(encoder)};
}

}  // namespace pmctg
