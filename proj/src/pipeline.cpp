#include "bitcipher/pipeline.hpp"

namespace bitcipher {

EmbedResult run_embed(const std::vector<std::vector<std::string>>& documents,
                      const FrequencyTable& table, const EmbedOptions& options) {
  options.context.validate();
  EmbedResult r;
  r.vocab = build_vocabulary(table, options.bits, options.max_vocab);
  r.cipher = build_cipher(r.vocab.size(), options.bits);
  r.noise = make_noise_model(table, r.vocab, r.cipher, options.noise);
  r.noisy = noisy_vectors(r.cipher, r.noise);

  const auto encoded = encode_documents(documents, r.vocab);
  r.embedding = embed_corpus(encoded, r.noisy, options.context, options.threads);
  r.embedding.meta.noise_mode = to_string(options.noise);
  if (options.postprocess) {
    PostprocReport report;
    r.embedding = postprocess(r.embedding, options.postproc, &report);
    r.postproc_report = std::move(report);
  }
  return r;
}

}  // namespace bitcipher
