#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace secrel {

// Non-fatal findings collected while parsing or resolving. Fatal conditions
// throw instead.
struct Diagnostic {
  enum class Severity { Warning, Excluded };
  Severity severity = Severity::Warning;
  std::string subject;  // policy id, rule id, file, ...
  std::string message;
  int line = 0;

  static Diagnostic warning(std::string subject, std::string message, int line = 0) {
    return {Severity::Warning, std::move(subject), std::move(message), line};
  }
  static Diagnostic excluded(std::string subject, std::string message, int line = 0) {
    return {Severity::Excluded, std::move(subject), std::move(message), line};
  }
};

inline std::size_t count_warnings(const std::vector<Diagnostic>& diags) {
  std::size_t n = 0;
  for (const auto& d : diags)
    if (d.severity == Diagnostic::Severity::Warning) ++n;
  return n;
}

inline std::size_t count_exclusions(const std::vector<Diagnostic>& diags) {
  std::size_t n = 0;
  for (const auto& d : diags)
    if (d.severity == Diagnostic::Severity::Excluded) ++n;
  return n;
}

// Bad user input: missing files, malformed documents, schema violations.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Internal consistency failure while processing valid input (stale maps,
// non-finite numerics, ...).
class PipelineError : public std::runtime_error {
 public:
  explicit PipelineError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace secrel
