#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace doob {

/// Verdict of a separation check.
///
/// For measurability checks the witness holds two atom indices w, w' with
/// Y(w) = Y(w') and X(w) != X(w'). For T0 checks it holds two point indices
/// that no supplied set tells apart.
struct SeparationReport {
  bool separated = true;
  std::optional<std::pair<std::size_t, std::size_t>> witness;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainMismatch : public Error {
 public:
  using Error::Error;
};

class NotMeasurable : public Error {
 public:
  NotMeasurable(const std::string& what, SeparationReport report)
      : Error(what), report_(std::move(report)) {}
  const SeparationReport& report() const { return report_; }

 private:
  SeparationReport report_;
};

class NonSigmaFinite : public Error {
 public:
  using Error::Error;
};

class DegenerateBasis : public Error {
 public:
  using Error::Error;
};

class ImproperPriorNeedsTruncation : public Error {
 public:
  using Error::Error;
};

class UndefinedFiber : public Error {
 public:
  using Error::Error;
};

class StepTooLarge : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace doob
