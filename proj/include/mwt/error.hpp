#pragma once

#include <stdexcept>
#include <string>

namespace mwt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// specfun / filterbank
class OrderUnsupportedError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class DegenerateBasisError : public Error { using Error::Error; };
class FilterValidationError : public Error { using Error::Error; };

// transform / model
class ShapeError : public Error { using Error::Error; };
class ScaleError : public Error { using Error::Error; };
class KernelEvaluationError : public Error { using Error::Error; };
class DegenerateTargetError : public Error { using Error::Error; };

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

// pdedata
class SpecError : public Error { using Error::Error; };
class CovarianceError : public Error { using Error::Error; };
class SolverDivergenceError : public Error { using Error::Error; };
class ResonanceError : public Error { using Error::Error; };
class EllipticityError : public Error { using Error::Error; };
class SolverError : public Error { using Error::Error; };

// files and configs
class FormatError : public Error { using Error::Error; };
class IncompatibleError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };

}  // namespace mwt
