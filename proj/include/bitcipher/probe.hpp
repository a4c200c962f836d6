#pragma once

#include "bitcipher/conll.hpp"
#include "bitcipher/export.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bitcipher {

struct ProbeHyperparams {
  std::size_t hidden = 256;
  double dropout = 0.5;
  double leaky_slope = 0.01;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 128;
  std::size_t epochs = 50;
  std::size_t patience = 5;  // epochs without dev improvement before stopping
  std::uint64_t seed = 0;
  bool lowercase_tokens = true;  // match the corpus tokenizer when looking up rows
};

/// Two-layer perceptron: linear(d -> h), LeakyReLU, dropout, linear(h -> L),
/// LogSoftmax.
struct ProbeModel {
  Matrix w1;  // h x d
  Vector b1;  // h
  Matrix w2;  // L x h
  Vector b2;  // L
  ProbeHyperparams hp;
  std::vector<std::string> labels;

  std::size_t input_dim() const { return static_cast<std::size_t>(w1.cols()); }

  /// Log-probabilities, one row per input row. Dropout is never applied here.
  Matrix log_probs(const Matrix& x) const;
  std::vector<std::size_t> predict(const Matrix& x) const;
};

/// Randomly initialized model (uniform +-1/sqrt(fan_in)) from hp.seed.
ProbeModel init_probe(std::size_t input_dim, std::vector<std::string> labels,
                      const ProbeHyperparams& hp);

struct ProbeGradients {
  double loss = 0.0;  // mean negative log-likelihood
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
};

/// Mean NLL over the batch and its gradient. `dropout_mask`, when given, is a
/// batch x h matrix of multipliers applied to the hidden activations (0 or
/// 1 / (1 - p) under inverted dropout).
ProbeGradients loss_and_gradients(const ProbeModel& model, const Matrix& x,
                                  std::span<const std::size_t> targets,
                                  const Matrix* dropout_mask = nullptr);

/// Feature rows and label ids for every token of a dataset. Tokens missing
/// from the vocabulary use the OOV row.
struct ProbeBatch {
  Matrix features;
  std::vector<std::size_t> targets;
};

/// Throws InputError for a label outside `labels`.
ProbeBatch make_batch(const EmbeddingSet& embeddings, const LabeledTokenDataset& data,
                      std::span<const std::string> labels, bool lowercase_tokens);

struct LabelScores {
  std::string label;
  double precision = 0.0;  // percent
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct ProbeMetrics {
  double accuracy = 0.0;  // percent
  double macro_f1 = 0.0;  // percent
  std::vector<LabelScores> per_label;
  std::vector<double> loss_curve;  // mean training loss per epoch
  std::vector<double> dev_accuracy_curve;
  std::size_t best_epoch = 0;
  std::size_t tokens = 0;
};

/// Accuracy and macro-F1 (over all `labels`) from predicted and gold ids.
/// Precision or recall with an empty denominator counts as 0.
ProbeMetrics score_predictions(std::span<const std::size_t> predicted,
                               std::span<const std::size_t> gold,
                               std::span<const std::string> labels);

struct ProbeTrainingResult {
  ProbeModel model;
  std::vector<double> loss_curve;
  std::vector<double> dev_accuracy_curve;
  std::size_t best_epoch = 0;
  double best_dev_accuracy = 0.0;
};

/// Mini-batch SGD with momentum on frozen embedding features. Keeps the
/// checkpoint with the best dev accuracy and stops after `patience` epochs
/// without improvement. Single-threaded and fully determined by hp.seed.
ProbeTrainingResult train_probe(const EmbeddingSet& embeddings, const LabeledTokenDataset& train,
                                const LabeledTokenDataset& dev, const ProbeHyperparams& hp);

ProbeMetrics evaluate_probe(const ProbeModel& model, const EmbeddingSet& embeddings,
                            const LabeledTokenDataset& test);

/// "86.05 (86.32)" style line: accuracy with macro-F1 in parentheses.
std::string format_acc_f1(const ProbeMetrics& metrics);

}  // namespace bitcipher
