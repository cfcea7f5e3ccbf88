#ifndef LESIONEVAL_ERRORS_HPP
#define LESIONEVAL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lesioneval {

/// Base of every error thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or unsupported file content (bad header, bad datatype, ...).
class FormatError : public Error {
public:
  using Error::Error;
};

/// Filesystem failure: missing file, unwritable path, short read.
class IoError : public Error {
public:
  using Error::Error;
};

/// A voxel value outside the {0,1,2,3} label domain.
class LabelDomainError : public Error {
public:
  using Error::Error;
};

/// Two volumes do not live on the same grid.
class GeometryMismatchError : public Error {
public:
  using Error::Error;
};

/// A (team, subject, region, metric) tuple is missing or duplicated.
class IncompleteTableError : public Error {
public:
  using Error::Error;
};

/// Unknown team / subject identifier.
class LookupError : public Error {
public:
  using Error::Error;
};

/// Phantom placement could not be satisfied within bounded retries.
class GenerationError : public Error {
public:
  using Error::Error;
};

/// Bad user input: unknown region name, invalid config value, empty input.
class UsageError : public Error {
public:
  using Error::Error;
};

/// A caller violated a documented precondition (empty set passed to hd95,
/// non-finite value passed to rank_values, ...).
class ContractError : public Error {
public:
  using Error::Error;
};

}  // namespace lesioneval

#endif
