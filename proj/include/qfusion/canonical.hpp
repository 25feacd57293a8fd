#pragma once

#include <string>

#include "qfusion/circuit.hpp"

namespace qfusion {

/// Deterministic key: the qubit count, then per ASAP layer the sorted
/// multiset of (gate, wires, params rounded to 6 decimals). Equal keys mean
/// equal wire-labelled DAGs.
std::string canonical_form(const Circuit& circuit);

}  // namespace qfusion
