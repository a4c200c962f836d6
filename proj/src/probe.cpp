#include "bitcipher/probe.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace bitcipher {

namespace {

// Portable draws so a seed means the same run on every standard library.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

Matrix leaky(const Matrix& x, double slope) {
  return x.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
}

Matrix log_softmax_rows(const Matrix& z) {
  Matrix out(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    const double lse = m + std::log((z.row(i).array() - m).exp().sum());
    out.row(i) = z.row(i).array() - lse;
  }
  return out;
}

std::string lower(std::string s) {
  for (auto& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
  }
  return s;
}

}  // namespace

Matrix ProbeModel::log_probs(const Matrix& x) const {
  const Matrix hidden = leaky((x * w1.transpose()).rowwise() + b1.transpose(), hp.leaky_slope);
  return log_softmax_rows((hidden * w2.transpose()).rowwise() + b2.transpose());
}

std::vector<std::size_t> ProbeModel::predict(const Matrix& x) const {
  const Matrix lp = log_probs(x);
  std::vector<std::size_t> out(static_cast<std::size_t>(lp.rows()));
  for (Eigen::Index i = 0; i < lp.rows(); ++i) {
    Eigen::Index best = 0;
    lp.row(i).maxCoeff(&best);
    out[i] = static_cast<std::size_t>(best);
  }
  return out;
}

ProbeModel init_probe(std::size_t input_dim, std::vector<std::string> labels,
                      const ProbeHyperparams& hp) {
  if (labels.empty()) throw InputError("probe needs at least one label");
  std::mt19937_64 rng(hp.seed);
  auto fill = [&](auto& m, double fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = (2.0 * uniform01(rng) - 1.0) * bound;
  };
  ProbeModel model;
  model.hp = hp;
  model.labels = std::move(labels);
  const auto h = static_cast<Eigen::Index>(hp.hidden);
  const auto d = static_cast<Eigen::Index>(input_dim);
  const auto l = static_cast<Eigen::Index>(model.labels.size());
  model.w1.resize(h, d);
  model.b1.resize(h);
  model.w2.resize(l, h);
  model.b2.resize(l);
  fill(model.w1, static_cast<double>(input_dim));
  fill(model.b1, static_cast<double>(input_dim));
  fill(model.w2, static_cast<double>(hp.hidden));
  fill(model.b2, static_cast<double>(hp.hidden));
  return model;
}

ProbeGradients loss_and_gradients(const ProbeModel& model, const Matrix& x,
                                  std::span<const std::size_t> targets,
                                  const Matrix* dropout_mask) {
  const auto n = x.rows();
  if (static_cast<std::size_t>(n) != targets.size() || n == 0) {
    throw DimensionError("batch has " + std::to_string(n) + " rows and " +
                         std::to_string(targets.size()) + " targets");
  }
  const double slope = model.hp.leaky_slope;
  const Matrix pre = (x * model.w1.transpose()).rowwise() + model.b1.transpose();
  Matrix act = leaky(pre, slope);
  if (dropout_mask) act = act.cwiseProduct(*dropout_mask);
  const Matrix logits = (act * model.w2.transpose()).rowwise() + model.b2.transpose();
  const Matrix logp = log_softmax_rows(logits);

  ProbeGradients g;
  Matrix dz = logp.array().exp();
  for (Eigen::Index i = 0; i < n; ++i) {
    g.loss -= logp(i, static_cast<Eigen::Index>(targets[i]));
    dz(i, static_cast<Eigen::Index>(targets[i])) -= 1.0;
  }
  g.loss /= static_cast<double>(n);
  dz /= static_cast<double>(n);

  g.w2 = dz.transpose() * act;
  g.b2 = dz.colwise().sum().transpose();
  Matrix da = dz * model.w2;
  if (dropout_mask) da = da.cwiseProduct(*dropout_mask);
  const Matrix dpre =
      da.cwiseProduct(pre.unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; }));
  g.w1 = dpre.transpose() * x;
  g.b1 = dpre.colwise().sum().transpose();
  return g;
}

ProbeBatch make_batch(const EmbeddingSet& embeddings, const LabeledTokenDataset& data,
                      std::span<const std::string> labels, bool lowercase_tokens) {
  ProbeBatch batch;
  const auto& rows = embeddings.embedding.rows;
  batch.features.resize(static_cast<Eigen::Index>(data.token_count()), rows.cols());
  batch.targets.reserve(data.token_count());
  Eigen::Index i = 0;
  for (const auto& seq : data.sequences) {
    for (const auto& t : seq) {
      auto it = std::find(labels.begin(), labels.end(), t.label);
      if (it == labels.end()) {
        throw InputError("label '" + t.label + "' in " +
                         (data.split.empty() ? std::string("dataset") : data.split) +
                         " does not occur in the training labels");
      }
      const auto row = embeddings.row_of(lowercase_tokens ? lower(t.token) : t.token);
      batch.features.row(i++) = rows.row(static_cast<Eigen::Index>(row));
      batch.targets.push_back(static_cast<std::size_t>(it - labels.begin()));
    }
  }
  return batch;
}

ProbeMetrics score_predictions(std::span<const std::size_t> predicted,
                               std::span<const std::size_t> gold,
                               std::span<const std::string> labels) {
  if (predicted.size() != gold.size()) {
    throw DimensionError("prediction and gold lengths differ");
  }
  const std::size_t l = labels.size();
  std::vector<std::size_t> tp(l, 0), pred_n(l, 0), gold_n(l, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++pred_n[predicted[i]];
    ++gold_n[gold[i]];
    if (predicted[i] == gold[i]) {
      ++tp[gold[i]];
      ++correct;
    }
  }
  ProbeMetrics m;
  m.tokens = gold.size();
  m.accuracy = gold.empty() ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(gold.size());
  double f1_sum = 0.0;
  for (std::size_t k = 0; k < l; ++k) {
    LabelScores s;
    s.label = labels[k];
    s.support = gold_n[k];
    const double p = pred_n[k] ? static_cast<double>(tp[k]) / static_cast<double>(pred_n[k]) : 0.0;
    const double r = gold_n[k] ? static_cast<double>(tp[k]) / static_cast<double>(gold_n[k]) : 0.0;
    const double f = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    s.precision = 100.0 * p;
    s.recall = 100.0 * r;
    s.f1 = 100.0 * f;
    f1_sum += s.f1;
    m.per_label.push_back(std::move(s));
  }
  m.macro_f1 = l ? f1_sum / static_cast<double>(l) : 0.0;
  return m;
}

namespace {

double accuracy(const ProbeModel& model, const ProbeBatch& batch) {
  if (batch.targets.empty()) return 0.0;
  const auto pred = model.predict(batch.features);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == batch.targets[i];
  return 100.0 * static_cast<double>(correct) / static_cast<double>(pred.size());
}

}  // namespace

ProbeTrainingResult train_probe(const EmbeddingSet& embeddings, const LabeledTokenDataset& train,
                                const LabeledTokenDataset& dev, const ProbeHyperparams& hp) {
  if (train.token_count() == 0) throw InputError("probe training set is empty");
  if (hp.batch_size == 0 || hp.hidden == 0) throw InputError("batch size and hidden size must be positive");
  if (hp.dropout < 0.0 || hp.dropout >= 1.0) throw InputError("dropout must be in [0, 1)");

  const auto& labels = train.label_set;
  const ProbeBatch train_batch = make_batch(embeddings, train, labels, hp.lowercase_tokens);
  const bool have_dev = dev.token_count() > 0;
  const ProbeBatch dev_batch =
      have_dev ? make_batch(embeddings, dev, labels, hp.lowercase_tokens) : train_batch;

  ProbeTrainingResult result;
  ProbeModel model = init_probe(static_cast<std::size_t>(embeddings.embedding.rows.cols()),
                                labels, hp);
  // training stream is separate from the init stream
  std::mt19937_64 rng(hp.seed ^ 0x5deece66dull);

  Matrix vw1 = Matrix::Zero(model.w1.rows(), model.w1.cols());
  Matrix vw2 = Matrix::Zero(model.w2.rows(), model.w2.cols());
  Vector vb1 = Vector::Zero(model.b1.size());
  Vector vb2 = Vector::Zero(model.b2.size());

  const std::size_t n = train_batch.targets.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const double keep = 1.0 - hp.dropout;

  result.model = model;
  result.best_dev_accuracy = -1.0;
  std::size_t stale = 0;
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += hp.batch_size) {
      const std::size_t len = std::min(hp.batch_size, n - start);
      Matrix x(static_cast<Eigen::Index>(len), train_batch.features.cols());
      std::vector<std::size_t> y(len);
      for (std::size_t k = 0; k < len; ++k) {
        x.row(static_cast<Eigen::Index>(k)) = train_batch.features.row(static_cast<Eigen::Index>(order[start + k]));
        y[k] = train_batch.targets[order[start + k]];
      }
      Matrix mask;
      if (hp.dropout > 0.0) {
        mask.resize(static_cast<Eigen::Index>(len), static_cast<Eigen::Index>(hp.hidden));
        for (Eigen::Index k = 0; k < mask.size(); ++k) {
          mask.data()[k] = uniform01(rng) < keep ? 1.0 / keep : 0.0;
        }
      }
      const auto g = loss_and_gradients(model, x, y, hp.dropout > 0.0 ? &mask : nullptr);
      loss_sum += g.loss * static_cast<double>(len);

      vw1 = hp.momentum * vw1 + g.w1;
      vb1 = hp.momentum * vb1 + g.b1;
      vw2 = hp.momentum * vw2 + g.w2;
      vb2 = hp.momentum * vb2 + g.b2;
      model.w1 -= hp.learning_rate * vw1;
      model.b1 -= hp.learning_rate * vb1;
      model.w2 -= hp.learning_rate * vw2;
      model.b2 -= hp.learning_rate * vb2;
    }
    result.loss_curve.push_back(loss_sum / static_cast<double>(n));

    const double dev_acc = accuracy(model, dev_batch);
    result.dev_accuracy_curve.push_back(dev_acc);
    if (dev_acc > result.best_dev_accuracy) {
      result.best_dev_accuracy = dev_acc;
      result.best_epoch = epoch + 1;
      result.model = model;
      stale = 0;
    } else if (++stale >= hp.patience) {
      break;
    }
  }
  return result;
}

ProbeMetrics evaluate_probe(const ProbeModel& model, const EmbeddingSet& embeddings,
                            const LabeledTokenDataset& test) {
  if (static_cast<std::size_t>(embeddings.embedding.rows.cols()) != model.input_dim()) {
    throw DimensionError("embedding dimension " + std::to_string(embeddings.embedding.rows.cols()) +
                         " does not match probe input dimension " +
                         std::to_string(model.input_dim()));
  }
  const auto batch = make_batch(embeddings, test, model.labels, model.hp.lowercase_tokens);
  const auto predicted = model.predict(batch.features);
  return score_predictions(predicted, batch.targets, model.labels);
}

std::string format_acc_f1(const ProbeMetrics& metrics) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f (%.2f)", metrics.accuracy, metrics.macro_f1);
  return buf;
}

}  // namespace bitcipher
