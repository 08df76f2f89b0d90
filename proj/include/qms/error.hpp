#pragma once

#include <stdexcept>
#include <string>

namespace qms {

enum class Errc {
  invalid_input,
  singular_matrix,
  shape_mismatch,
  basis_not_orthonormal,
  not_unital,
  kernel_condition_violated,
  range_violation,
  precondition_violated,
  not_cp,
  not_unital_generator,
  not_detailed_balance,
  block_leakage,
  not_ergodic,
  index_mismatch,
  io_error,
};

inline const char* errc_name(Errc e) {
  switch (e) {
    case Errc::invalid_input: return "InvalidInput";
    case Errc::singular_matrix: return "SingularMatrix";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::basis_not_orthonormal: return "BasisNotOrthonormal";
    case Errc::not_unital: return "NotUnital";
    case Errc::kernel_condition_violated: return "KernelConditionViolated";
    case Errc::range_violation: return "RangeViolation";
    case Errc::precondition_violated: return "PreconditionViolated";
    case Errc::not_cp: return "NotCP";
    case Errc::not_unital_generator: return "NotUnitalGenerator";
    case Errc::not_detailed_balance: return "NotDetailedBalance";
    case Errc::block_leakage: return "BlockLeakage";
    case Errc::not_ergodic: return "NotErgodic";
    case Errc::index_mismatch: return "IndexMismatch";
    case Errc::io_error: return "IOError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace qms
