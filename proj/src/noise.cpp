#include "bitcipher/noise.hpp"

#include <algorithm>

namespace bitcipher {

namespace {

TokenCounts lookup(const FrequencyTable& table, const std::string& token) {
  auto c = table.find(token);
  if (!c) throw InputError("vocabulary token '" + token + "' missing from frequency table");
  return *c;
}

void normalize_l1(Vector& v) {
  const double mass = v.sum();
  if (!(mass > 0.0)) throw Error("noise distribution has no mass");
  v /= mass;
}

}  // namespace

Vector compute_beta(const FrequencyTable& table, const Vocabulary& vocab, NoiseMode mode) {
  Vector beta(static_cast<Eigen::Index>(vocab.size()));
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const auto c = lookup(table, vocab.tokens()[i]);
    const auto f = static_cast<double>(c.frequency);
    switch (mode) {
      case NoiseMode::Unigram:
        beta[i] = f / (f + 1.0);
        break;
      case NoiseMode::DocumentFrequency:
        beta[i] = std::clamp(static_cast<double>(c.document_count) / f, kDfClamp, 1.0 - kDfClamp);
        break;
    }
  }
  return beta;
}

Vector compute_sigma(const FrequencyTable& table, const Vocabulary& vocab) {
  const std::size_t n = vocab.size();
  if (n < 2) throw InputError("noise model needs at least 2 vocabulary tokens");
  const auto total = static_cast<double>(table.total_tokens());
  Vector sigma(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const auto f = static_cast<double>(lookup(table, vocab.tokens()[j]).frequency);
    sigma[j] = (1.0 - f / total) / static_cast<double>(n - 1);
  }
  normalize_l1(sigma);
  return sigma;
}

Vector project_sigma(const Vector& sigma_vocab, const CipherPair& pair) {
  if (static_cast<std::size_t>(sigma_vocab.size()) != pair.size()) {
    throw DimensionError("sigma has " + std::to_string(sigma_vocab.size()) +
                         " entries but the cipher has " + std::to_string(pair.size()) + " rows");
  }
  Vector projected = pair.encoded.transpose() * sigma_vocab;
  normalize_l1(projected);
  return projected;
}

NoiseModel make_noise_model(const FrequencyTable& table, const Vocabulary& vocab,
                            const CipherPair& pair, NoiseMode mode) {
  NoiseModel model;
  model.mode = mode;
  model.beta = compute_beta(table, vocab, mode);
  model.sigma_vocab = compute_sigma(table, vocab);
  model.sigma_cipher = project_sigma(model.sigma_vocab, pair);
  return model;
}

Matrix noisy_vectors(const CipherPair& pair, const NoiseModel& noise) {
  const auto n = static_cast<Eigen::Index>(pair.size());
  if (noise.beta.size() != n || noise.sigma_cipher.size() != pair.bits()) {
    throw DimensionError("noise model (" + std::to_string(noise.beta.size()) + " tokens, " +
                         std::to_string(noise.sigma_cipher.size()) +
                         " dims) does not match cipher (" + std::to_string(n) + " x " +
                         std::to_string(pair.bits()) + ")");
  }
  Matrix nu(n + 1, pair.bits());
  const Eigen::RowVectorXd sigma = noise.sigma_cipher.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double b = noise.beta[i];
    nu.row(i) = b * pair.encoded.row(i) + (1.0 - b) * sigma;
  }
  nu.row(n) = sigma;
  return nu;
}

}  // namespace bitcipher
