#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metarec/dataset.hpp"

namespace metarec {

/// Synthetic binary datasets in four families of three, each family built so
/// that the same kind of learner wins on all its members:
///   linear_*  - Gaussian attributes, linear decision boundary
///   xor_*     - sign-product (checkerboard) boundary plus noise attributes
///   rules_*   - categorical attributes, conjunctive rule, some missing cells
///   radial_*  - a disc of one class inside the other, imbalanced
std::vector<Dataset> generate_corpus(std::uint64_t seed);

/// Multiclass numeric dataset with class tokens c00, c01, ...; rows of class k
/// are centred at k on every attribute.
Dataset generate_multiclass(const std::string& id, std::size_t classes, std::size_t rows_per_class,
                            std::size_t attributes, std::uint64_t seed);

/// Writes `<dir>/<id>.csv` and its `<dir>/<id>.json` manifest for each dataset;
/// returns the manifest paths in input order.
std::vector<std::string> write_corpus(const std::string& dir, const std::vector<Dataset>& datasets);

}  // namespace metarec
