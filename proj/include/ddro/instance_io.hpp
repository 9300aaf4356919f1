#pragma once

#include <string>

#include "ddro/problem.hpp"

namespace ddro {

/// Instance file round trip. The on-disk document uses 1-based stage and
/// parameter indices and nested arrays for all matrices; see
/// docs/instance_schema.md. Loading validates shapes strictly and throws
/// std::runtime_error with the offending key on malformed input.
MultistageProblem load_instance(const std::string& path);
void save_instance(const MultistageProblem& p, const std::string& path);

std::string instance_to_json(const MultistageProblem& p);
MultistageProblem instance_from_json(const std::string& text);

}  // namespace ddro
