#pragma once

#include <stdexcept>
#include <string>

namespace drcal {

/// Base class for all drcal errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class SingularNetwork : public Error {
 public:
  using Error::Error;
};

class UnsetEpsilon : public Error {
 public:
  using Error::Error;
};

class InfeasibleSchedule : public Error {
 public:
  using Error::Error;
};

/// Real-time dispatch cannot absorb the wind deviation. Carries the unmet
/// power imbalance in MW (sum of constraint violations of the relaxed LP).
class InfeasibleDispatch : public Error {
 public:
  InfeasibleDispatch(const std::string& what, double unmet_mw)
      : Error(what), unmet_mw_(unmet_mw) {}
  double unmet_mw() const { return unmet_mw_; }

 private:
  double unmet_mw_ = 0.0;
};

/// KKT system of the regularized schedule program is singular at the
/// selected active set. Carries a crude condition estimate.
class SingularKKT : public Error {
 public:
  SingularKKT(const std::string& what, double cond_estimate)
      : Error(what), cond_(cond_estimate) {}
  double cond_estimate() const { return cond_; }

 private:
  double cond_ = 0.0;
};

class InfeasiblePerturbation : public Error {
 public:
  InfeasiblePerturbation(const std::string& what, int coordinate)
      : Error(what), coordinate_(coordinate) {}
  int coordinate() const { return coordinate_; }

 private:
  int coordinate_ = -1;
};

class NonFiniteGradient : public Error {
 public:
  using Error::Error;
};

/// Wire protocol violation. Codes are short stable identifiers such as
/// BAD_LENGTH, BAD_SEQ, BAD_TYPE, BAD_ITER, BAD_AGENT, VERSION_MISMATCH.
class ProtocolError : public Error {
 public:
  ProtocolError(const std::string& code, const std::string& detail)
      : Error(code + ": " + detail), code_(code), detail_(detail) {}
  const std::string& code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string code_;
  std::string detail_;
};

class AgentTimeout : public Error {
 public:
  using Error::Error;
};

class ConnectionLost : public Error {
 public:
  using Error::Error;
};

class VersionMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace drcal
