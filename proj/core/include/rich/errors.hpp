#pragma once

#include <stdexcept>
#include <string>

namespace rich {

/// Zero diagonal entry encountered while forming a Jacobi splitting.
class singular_preconditioner_error : public std::runtime_error {
  public:
    explicit singular_preconditioner_error(const std::string& what)
        : std::runtime_error(what) {}
};

/// Matrix Market (or other text input) could not be parsed.
/// Carries the 1-based line number of the offending line.
class parse_error : public std::runtime_error {
  public:
    parse_error(long line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    long line() const noexcept { return line_; }

  private:
    long line_;
};

/// perron_weight could not certify T w <= rho_eps w after delta refinement.
class certification_error : public std::runtime_error {
  public:
    explicit certification_error(const std::string& what)
        : std::runtime_error(what) {}
};

/// A splitting assumption (nonnegativity, unit diagonal, ...) is violated
/// on a solver path that requires it.
class splitting_error : public std::runtime_error {
  public:
    explicit splitting_error(const std::string& what)
        : std::runtime_error(what) {}
};

} // namespace rich
