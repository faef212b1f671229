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

// Corrected predictions and the combined loss on a toy 4-class example.

#include <cstdio>

#include "occtk/car.hpp"

int main() {
  using namespace occtk;

  PredictionPair pair;
  pair.p = {2.1, 0.3, -1.0, 0.8};  // factual logits
  pair.c = {1.5, 0.2, -0.2, 0.1};  // counterfactual (actor erased) logits

  const std::vector<double> probs = softmax(pair.p);
  const std::vector<double> corrected = corrected_prediction(pair);
  std::printf("class  P(factual)  Y(corrected)\n");
  for (std::size_t i = 0; i < probs.size(); ++i) {
    std::printf("%5zu  %10.4f  %12.4f\n", i, probs[i], corrected[i]);
  }

  const LabelDistribution label = LabelDistribution::one_hot(4, 0);
  for (double alpha : {0.0, 0.5, 1.0, 2.0}) {
    LossConfig cfg;
    cfg.alpha = alpha;
    const LossBreakdown loss = car_loss(pair, label, cfg);
    std::printf("alpha %.1f: total %.6f (ce %.6f, kl %.6f)\n", alpha, loss.total,
                loss.cross_entropy, loss.kl_divergence);
  }

  const LossGradient grad = car_loss_gradient(pair, label, {});
  std::printf("grad_p[0] %.6f, grad_c[0] %.6f\n", grad.grad_p[0], grad.grad_c[0]);
  return 0;
}
