#pragma once

#include <stdexcept>
#include <string>

namespace gwspeed {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorCategory {
  config,     // bad input or violated precondition (exit 2)
  assertion,  // broken invariant, failed audit (exit 3)
  numerical,  // non-convergence, overflow, divergent series (exit 4)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define GWSPEED_DEFINE_ERROR(Name, Category)                        \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what)                          \
        : Error(ErrorCategory::Category, #Name ": " + what) {}      \
  };

GWSPEED_DEFINE_ERROR(ConfigError, config)
GWSPEED_DEFINE_ERROR(PreconditionError, config)
GWSPEED_DEFINE_ERROR(InvalidDistribution, config)
GWSPEED_DEFINE_ERROR(DominanceViolation, config)
GWSPEED_DEFINE_ERROR(CouplingUnavailable, config)
GWSPEED_DEFINE_ERROR(MeanNotSupercritical, config)
GWSPEED_DEFINE_ERROR(MinDegreeViolation, config)

GWSPEED_DEFINE_ERROR(AlreadyRealized, assertion)
GWSPEED_DEFINE_ERROR(StateCorrupt, assertion)
GWSPEED_DEFINE_ERROR(AuditFailure, assertion)

GWSPEED_DEFINE_ERROR(PopulationOverflow, numerical)
GWSPEED_DEFINE_ERROR(HorizonExceeded, numerical)
GWSPEED_DEFINE_ERROR(DepthCapExceeded, numerical)
GWSPEED_DEFINE_ERROR(DegenerateCoupling, numerical)
GWSPEED_DEFINE_ERROR(SeriesDivergent, numerical)

#undef GWSPEED_DEFINE_ERROR

inline int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::config:
      return 2;
    case ErrorCategory::assertion:
      return 3;
    case ErrorCategory::numerical:
      return 4;
  }
  return 1;
}

}  // namespace gwspeed
