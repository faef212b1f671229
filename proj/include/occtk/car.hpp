// Copyright 2026 The occtk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "occtk/error.hpp"

namespace occtk {

/// Factual and counterfactual logits for one sample. p comes from the
/// original clip, c from the actor-erased clip.
struct PredictionPair {
  std::vector<double> p;
  std::vector<double> c;

  std::size_t size() const { return p.size(); }

  void validate() const {
    if (p.empty()) raise(Errc::empty_vector, "factual logits empty");
    if (p.size() != c.size()) {
      raise(Errc::length_mismatch, "factual has " + std::to_string(p.size()) +
                                       " entries, counterfactual " + std::to_string(c.size()));
    }
    for (double v : p) {
      if (!std::isfinite(v)) raise(Errc::non_finite_loss, "non-finite factual logit");
    }
    for (double v : c) {
      if (!std::isfinite(v)) raise(Errc::non_finite_loss, "non-finite counterfactual logit");
    }
  }
};

/// Target distribution over classes; one-hot in the common case.
struct LabelDistribution {
  std::vector<double> q;

  static LabelDistribution one_hot(std::size_t n, std::size_t class_index) {
    LabelDistribution label;
    label.q.assign(n, 0.0);
    label.q.at(class_index) = 1.0;
    return label;
  }

  void validate() const {
    if (q.empty()) raise(Errc::empty_vector, "label distribution empty");
    double sum = 0;
    for (double v : q) {
      if (!(v >= 0) || !std::isfinite(v)) {
        raise(Errc::invalid_distribution, "label entries must be finite and >= 0");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      raise(Errc::invalid_distribution, "label sums to " + std::to_string(sum));
    }
  }

  /// (1 - eps) * q + eps / n
  std::vector<double> smoothed(double epsilon) const {
    std::vector<double> out(q.size());
    const double uniform = epsilon / static_cast<double>(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) out[i] = (1.0 - epsilon) * q[i] + uniform;
    return out;
  }
};

struct LossConfig {
  double alpha = 1.0;                   // weight of the KL term
  double label_smoothing_epsilon = 0.0; // in [0, 0.1]
  // The combined loss as printed puts the model distribution P outside the
  // log in the cross-entropy term, which is infinite for one-hot labels.
  // Default is the conventional orientation -sum(label * log P); setting
  // printed_ce computes the printed form instead and then requires
  // label smoothing so the term stays finite.
  bool printed_ce = false;

  void validate() const {
    if (!(alpha >= 0) || !std::isfinite(alpha)) raise(Errc::config_error, "alpha must be >= 0");
    if (!(label_smoothing_epsilon >= 0.0 && label_smoothing_epsilon <= 0.1)) {
      raise(Errc::config_error, "label_smoothing_epsilon must be in [0, 0.1]");
    }
    if (printed_ce && label_smoothing_epsilon <= 0.0) {
      raise(Errc::config_error, "printed cross-entropy orientation requires label smoothing > 0");
    }
  }
};

namespace carmath {

/// log-softmax with max subtraction; the basis for every probability here.
inline std::vector<double> log_softmax(const std::vector<double>& logits) {
  if (logits.empty()) raise(Errc::empty_vector, "softmax of empty vector");
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0;
  for (double v : logits) sum += std::exp(v - m);
  const double log_sum = std::log(sum) + m;
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_sum;
  return out;
}

inline std::vector<double> exp_all(const std::vector<double>& log_probs) {
  std::vector<double> out(log_probs.size());
  for (std::size_t i = 0; i < log_probs.size(); ++i) out[i] = std::exp(log_probs[i]);
  return out;
}

}  // namespace carmath

/// Numerically stable softmax; sums to 1 within 1e-12.
inline std::vector<double> softmax(const std::vector<double>& logits) {
  for (double v : logits) {
    if (!std::isfinite(v)) raise(Errc::non_finite_loss, "non-finite logit");
  }
  return carmath::exp_all(carmath::log_softmax(logits));
}

/// Corrected prediction Y = softmax(p - c): the factual logits debiased by
/// their counterfactual counterpart, renormalized over classes.
inline std::vector<double> corrected_prediction(const PredictionPair& pair) {
  pair.validate();
  std::vector<double> diff(pair.size());
  for (std::size_t i = 0; i < pair.size(); ++i) diff[i] = pair.p[i] - pair.c[i];
  return softmax(diff);
}

struct LossBreakdown {
  double total = 0;
  double cross_entropy = 0;
  double kl_divergence = 0;  // KL(P || Y), clamped at 0 against round-off
};

/// Combined training loss: cross-entropy of the factual prediction against
/// the label plus alpha times KL(P || Y), Y the corrected prediction.
inline LossBreakdown car_loss(const PredictionPair& pair, const LabelDistribution& label,
                              const LossConfig& cfg = {}) {
  pair.validate();
  label.validate();
  cfg.validate();
  if (label.q.size() != pair.size()) {
    raise(Errc::length_mismatch, "label has " + std::to_string(label.q.size()) +
                                     " entries, logits " + std::to_string(pair.size()));
  }

  const std::vector<double> log_p = carmath::log_softmax(pair.p);
  const std::vector<double> probs = carmath::exp_all(log_p);
  std::vector<double> diff(pair.size());
  for (std::size_t i = 0; i < pair.size(); ++i) diff[i] = pair.p[i] - pair.c[i];
  const std::vector<double> log_y = carmath::log_softmax(diff);
  const std::vector<double> q = label.smoothed(cfg.label_smoothing_epsilon);

  LossBreakdown out;
  if (cfg.printed_ce) {
    for (std::size_t i = 0; i < pair.size(); ++i) {
      if (probs[i] > 0) out.cross_entropy -= probs[i] * std::log(q[i]);
    }
  } else {
    for (std::size_t i = 0; i < pair.size(); ++i) {
      if (q[i] > 0) out.cross_entropy -= q[i] * log_p[i];
    }
  }
  double kl = 0;
  for (std::size_t i = 0; i < pair.size(); ++i) {
    kl += probs[i] * (log_p[i] - log_y[i]);
  }
  out.kl_divergence = std::max(kl, 0.0);
  out.total = out.cross_entropy + cfg.alpha * out.kl_divergence;
  if (!std::isfinite(out.total)) raise(Errc::non_finite_loss, "loss overflowed");
  return out;
}

struct LossGradient {
  std::vector<double> grad_p;
  std::vector<double> grad_c;
};

/// Analytic gradients of car_loss w.r.t. both logit vectors.
///
/// With P = softmax(p), Y = softmax(p - c), g_i = log P_i - log Y_i and
/// K = sum_i P_i g_i:
///   d(KL)/dp_i = P_i (g_i - K) + (Y_i - P_i)      d(KL)/dc_i = P_i - Y_i
/// The conventional cross-entropy contributes the usual P - q on p only;
/// the printed orientation contributes P_i (t_i - T) with t_i = -log q_i,
/// T = sum_i P_i t_i.
inline LossGradient car_loss_gradient(const PredictionPair& pair, const LabelDistribution& label,
                                      const LossConfig& cfg = {}) {
  pair.validate();
  label.validate();
  cfg.validate();
  if (label.q.size() != pair.size()) {
    raise(Errc::length_mismatch, "label has " + std::to_string(label.q.size()) +
                                     " entries, logits " + std::to_string(pair.size()));
  }
  const std::size_t n = pair.size();
  const std::vector<double> log_p = carmath::log_softmax(pair.p);
  const std::vector<double> probs = carmath::exp_all(log_p);
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = pair.p[i] - pair.c[i];
  const std::vector<double> log_y = carmath::log_softmax(diff);
  const std::vector<double> y = carmath::exp_all(log_y);
  const std::vector<double> q = label.smoothed(cfg.label_smoothing_epsilon);

  LossGradient grad;
  grad.grad_p.assign(n, 0.0);
  grad.grad_c.assign(n, 0.0);

  if (cfg.printed_ce) {
    double t_mean = 0;  // T = sum_i P_i * (-log q_i)
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = -std::log(q[i]);
      t_mean += probs[i] * t[i];
    }
    for (std::size_t i = 0; i < n; ++i) grad.grad_p[i] = probs[i] * (t[i] - t_mean);
  } else {
    for (std::size_t i = 0; i < n; ++i) grad.grad_p[i] = probs[i] - q[i];
  }

  if (cfg.alpha != 0.0) {
    double k = 0;
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = log_p[i] - log_y[i];
      k += probs[i] * g[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      grad.grad_p[i] += cfg.alpha * (probs[i] * (g[i] - k) + (y[i] - probs[i]));
      grad.grad_c[i] = cfg.alpha * (probs[i] - y[i]);
    }
  }
  return grad;
}

/// Mean gap between the factual and counterfactual probability of one class,
/// taken over a paired batch drawn from the manipulated-state distribution.
inline double causal_effect(const std::vector<std::vector<double>>& factual_probs,
                            const std::vector<std::vector<double>>& counterfactual_probs,
                            std::size_t class_index) {
  if (factual_probs.empty()) raise(Errc::empty_batch, "no prediction pairs");
  if (factual_probs.size() != counterfactual_probs.size()) {
    raise(Errc::length_mismatch, "batch sizes differ");
  }
  auto check = [&](const std::vector<double>& probs) {
    if (class_index >= probs.size()) raise(Errc::length_mismatch, "class_index out of range");
    double sum = 0;
    for (double v : probs) {
      if (!(v >= 0) || !std::isfinite(v)) raise(Errc::invalid_distribution, "bad probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      raise(Errc::invalid_distribution, "probabilities sum to " + std::to_string(sum));
    }
  };
  double total = 0;
  for (std::size_t i = 0; i < factual_probs.size(); ++i) {
    check(factual_probs[i]);
    check(counterfactual_probs[i]);
    total += factual_probs[i][class_index] - counterfactual_probs[i][class_index];
  }
  return total / static_cast<double>(factual_probs.size());
}

/// One row of the alpha-sweep table: batch-mean losses at a fixed alpha.
struct AlphaSweepRow {
  double alpha = 0;
  double mean_cross_entropy = 0;
  double mean_kl = 0;
  double mean_total = 0;
};

/// Run the same batch through car_loss at each alpha. The cross-entropy
/// column is alpha-independent by construction, which makes the alpha = 0
/// row a built-in consistency check.
inline std::vector<AlphaSweepRow> alpha_sweep(const std::vector<PredictionPair>& pairs,
                                              const std::vector<LabelDistribution>& labels,
                                              const std::vector<double>& alphas,
                                              const LossConfig& base_cfg = {}) {
  if (pairs.empty()) raise(Errc::empty_batch, "no prediction pairs");
  if (pairs.size() != labels.size()) raise(Errc::length_mismatch, "pairs vs labels");
  std::vector<AlphaSweepRow> rows;
  rows.reserve(alphas.size());
  for (double alpha : alphas) {
    LossConfig cfg = base_cfg;
    cfg.alpha = alpha;
    AlphaSweepRow row;
    row.alpha = alpha;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const LossBreakdown loss = car_loss(pairs[i], labels[i], cfg);
      row.mean_cross_entropy += loss.cross_entropy;
      row.mean_kl += loss.kl_divergence;
      row.mean_total += loss.total;
    }
    const double n = static_cast<double>(pairs.size());
    row.mean_cross_entropy /= n;
    row.mean_kl /= n;
    row.mean_total /= n;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace occtk
