#pragma once

#include <stdexcept>
#include <string>

namespace sgcalc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SGCALC_DECLARE_ERROR(Name)              \
  class Name : public Error {                   \
   public:                                      \
    explicit Name(const std::string& what)      \
        : Error(std::string(#Name ": ") + what) {} \
  }

SGCALC_DECLARE_ERROR(InvalidArgument);
SGCALC_DECLARE_ERROR(DisconnectedGraph);
SGCALC_DECLARE_ERROR(NonPositiveWeight);
SGCALC_DECLARE_ERROR(EmptyGrid);
SGCALC_DECLARE_ERROR(EllipticityViolation);
SGCALC_DECLARE_ERROR(DenseCapExceeded);
SGCALC_DECLARE_ERROR(FunctionDomainError);
SGCALC_DECLARE_ERROR(EmptyBall);
SGCALC_DECLARE_ERROR(ZeroInput);
SGCALC_DECLARE_ERROR(SingularSpec);
SGCALC_DECLARE_ERROR(ConfigError);
SGCALC_DECLARE_ERROR(ParseError);

#undef SGCALC_DECLARE_ERROR

}  // namespace sgcalc
