#pragma once

#include <stdexcept>
#include <string>

namespace pmod {

/// Malformed input: bad ids, files, parameters. The CLI maps these to exit code 1.
class InputError : public std::invalid_argument
{
  public:
    explicit InputError(const std::string& what)
      : std::invalid_argument(what)
    {
    }
};

/// An operation was called on data that violates its stated preconditions
/// (overlapping sets, non-nested chains, unverified hypotheses).
class PreconditionError : public std::logic_error
{
  public:
    explicit PreconditionError(const std::string& what)
      : std::logic_error(what)
    {
    }
};

} // namespace pmod
