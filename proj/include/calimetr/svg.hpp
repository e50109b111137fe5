#pragma once

#include <string>
#include <vector>

#include "calimetr/reliability.hpp"
#include "calimetr/sparsification.hpp"
#include "calimetr/temper.hpp"

namespace calimetr::svg {

// All renderers emit a fixed 800x600 canvas with a fixed axis layout and no
// timestamps; identical data produces byte-identical markup.

std::string render_reliability(const ReliabilityCurve& curve, const std::string& title);

std::string render_sparsification(const CurveSeries& oracle, const CurveSeries& method,
                                  const std::string& title);

std::string render_loss_surface(const SweepResult& sweep, const std::string& title);

std::string render_ause_over_runs(const std::vector<double>& xs,
                                  const std::vector<double>& values, const std::string& title);

}  // namespace calimetr::svg
