#pragma once

#include <stdexcept>
#include <string>

namespace sprint {

// Error taxonomy shared by the library and the CLI. The CLI maps each
// class to a distinct exit code (see tools/sprint.cpp).
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Invalid dimensions, hyperparameters, or mismatched model configs.
class ConfigError : public Error {
  public:
    using Error::Error;
};

// Out-of-range token ids, undersized inputs, degenerate references.
class DataError : public Error {
  public:
    using Error::Error;
};

// Malformed files (bad magic, truncated tensors, unparseable JSON).
class FormatError : public Error {
  public:
    using Error::Error;
};

// Shape mismatches between matrices or between a matrix and a model.
class DimensionError : public Error {
  public:
    using Error::Error;
};

// Wall-clock timing produced unusable per-sublayer estimates.
class MeasurementError : public Error {
  public:
    using Error::Error;
};

// The latency bound cannot be met even by pruning every sublayer.
class UnsatisfiableError : public Error {
  public:
    using Error::Error;
};

}  // namespace sprint
