#ifndef FRACCAP_ERRORS_HPP
#define FRACCAP_ERRORS_HPP

#include <stdexcept>

namespace fraccap {

/// Raised when an iterative or adaptive numerical method exhausts its budget.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LpInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LpUnbounded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fraccap

#endif
