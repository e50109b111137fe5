#pragma once

#include <vector>

#include "calimetr/core.hpp"

namespace calimetr {

enum class EntropyScale {
  normalized,  // everything divided by log(K), matching the entropy scores
  nats,
};

struct DecompositionResult {
  std::vector<double> total;      // entropy of the marginal row
  std::vector<double> aleatoric;  // expected conditional entropy over members
  std::vector<double> epistemic;  // expected KL(member || marginal)
  double total_mean = 0.0;
  double aleatoric_mean = 0.0;
  double epistemic_mean = 0.0;
};

// Uniform average of the member probability rows; labels copied.
PredictionSet marginal(const EnsemblePredictions& ens);

// total = aleatoric + epistemic per instance (an algebraic identity under
// uniform member weights; holds to rounding here). All three components are
// computed independently.
DecompositionResult decompose(const EnsemblePredictions& ens,
                              EntropyScale scale = EntropyScale::normalized);

}  // namespace calimetr
