#pragma once

#include "bitcipher/cipher.hpp"
#include "bitcipher/frequency.hpp"
#include "bitcipher/vocabulary.hpp"

namespace bitcipher {

/// Per-token fidelity and the noise distribution blended into cipher rows.
struct NoiseModel {
  Vector beta;          // N, fidelity in (0, 1)
  Vector sigma_vocab;   // N, distribution over alternative tokens, sums to 1
  Vector sigma_cipher;  // b, sigma pushed through the encipher matrix, sums to 1
  NoiseMode mode = NoiseMode::Unigram;
};

inline constexpr double kDfClamp = 1e-6;

/// unigram: beta_i = f_i / (f_i + 1).
/// df:      beta_i = d_i / f_i clamped to [1e-6, 1 - 1e-6].
Vector compute_beta(const FrequencyTable& table, const Vocabulary& vocab, NoiseMode mode);

/// sigma_j = (1 - f_j / M) / (N - 1), renormalized to unit L1 mass. The
/// renormalization is a no-op when the vocabulary covers the whole table.
Vector compute_sigma(const FrequencyTable& table, const Vocabulary& vocab);

/// sigma~ = V^T sigma, renormalized to unit L1 mass.
Vector project_sigma(const Vector& sigma_vocab, const CipherPair& pair);

NoiseModel make_noise_model(const FrequencyTable& table, const Vocabulary& vocab,
                            const CipherPair& pair, NoiseMode mode);

/// (N + 1) x b matrix. Row i = beta_i * V_i + (1 - beta_i) * sigma~; the last
/// row is the OOV vector, sigma~ itself.
Matrix noisy_vectors(const CipherPair& pair, const NoiseModel& noise);

}  // namespace bitcipher
