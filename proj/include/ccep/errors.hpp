#pragma once

#include <stdexcept>
#include <string>

namespace ccep {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument to a genome operation (empty genome, bad rate, ...).
class GenomeError : public Error {
 public:
  using Error::Error;
};

// Tensor / architecture shape disagreement.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Genome list does not fit the network it is applied to.
class PruneError : public Error {
 public:
  using Error::Error;
};

// Training loss became non-finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class DatasetError : public Error {
 public:
  using Error::Error;
};

// Malformed IDX file.
class IdxFormatError : public DatasetError {
 public:
  using DatasetError::DatasetError;
};

// Malformed or unsupported checkpoint / archive file.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// The base network has no layer left that can be pruned.
class NoPrunableLayersError : public Error {
 public:
  using Error::Error;
};

}  // namespace ccep
