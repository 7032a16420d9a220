#pragma once

#include <stdexcept>
#include <string>

namespace depbench {

// Every failure the library reports deliberately carries a Kind so callers
// (and the CLI exit-code mapping) can react without parsing messages.
class Error : public std::runtime_error {
 public:
  enum class Kind {
    invalid_sample,
    invalid_resolution,
    invalid_budget,
    invalid_coarseness,
    oracle_too_large,
    undefined_correlation,
    degenerate_kernel,
    infinite_noise,
    calibration_failure,
    envelope_integrity,
    unknown_suite,
    unknown_statistic,
    not_implemented,
    parse_error,
    io_error,
    usage,
    internal,
  };

  Error(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace depbench
