#pragma once

#include <cstddef>
#include <exception>
#include <exception>
#include <stdexcept>
#include <string>

namespace darnet
{
//! Parameter outside the documented domain of an operation.
class InvalidParameter : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

//! Operation called on a model variant that it does not support.
class WrongVariant : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

//! A coupling was asked to act on a pair outside its domain.
class PreconditionViolated : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

//! Simulation stopped because it consumed more events than allowed.
class EventCapExceeded : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! Failure inside one replica of a replicated experiment.
class ReplicaError : public std::runtime_error
{
  public:
    ReplicaError(std::size_t index, std::string const& what,
                 std::exception_ptr cause = nullptr)
        : std::runtime_error("replica " + std::to_string(index) + ": " + what)
        , index_(index)
        , cause_(std::move(cause))
    {
    }

    std::size_t index() const noexcept { return index_; }
    //! The exception thrown inside the replica.
    std::exception_ptr cause() const noexcept { return cause_; }

  private:
    std::size_t index_;
    std::exception_ptr cause_;
};
}  // namespace darnet
