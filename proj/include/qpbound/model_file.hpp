#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qpbound/geomsum.hpp"
#include "qpbound/model.hpp"

namespace qpb {

/// Contents of a model file:
///
///   gamma = 1.0            # optional uniformization constant
///   [interior]
///   1,0 = 0.2
///   -1,-1 = 0.6
///   [horizontal] / [vertical] / [origin]   same key form
///   [pi]                   # optional geometric terms of the stationary measure
///   term = 0.5887, 0.3802, 1.0
///   normalize = true
///   [perturb]              # optional perturbation parameters
///   h_bar_10 = 0.2
///   v_bar_01 = 0.2
///   auto_threshold = false
///
/// Lines starting with '#' or ';' are comments. Omitted directions have rate 0.
struct ModelSpec {
  RandomWalk walk;
  std::vector<GeometricTerm> terms;
  bool normalize_terms = true;
  std::optional<double> h_bar_10;
  std::optional<double> v_bar_01;
  bool auto_threshold = false;
};

/// Throws ParseError on malformed input and DomainError on invalid rates.
ModelSpec parse_model(const std::string& text);
ModelSpec load_model(const std::string& path);

}  // namespace qpb
