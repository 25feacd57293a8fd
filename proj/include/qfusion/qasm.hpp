#pragma once

#include <string>
#include <vector>

#include "qfusion/circuit.hpp"
#include "qfusion/error.hpp"

namespace qfusion {

class UnsupportedGateError : public Error {
 public:
  UnsupportedGateError(std::vector<std::string> names);
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

struct QasmOptions {
  /// Emit `gate` definitions for gates missing from qelib1.inc (dcx, iswap,
  /// ecr, cs, csdg). When false those gates are rejected.
  bool emit_definitions = true;
};

std::string export_qasm(const Circuit& circuit, const QasmOptions& options = {});

}  // namespace qfusion
