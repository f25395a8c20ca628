#pragma once

#include <stdexcept>
#include <string>

namespace fcase
{

// Input violates a model invariant (unknown state, weight out of range, ...).
class validation_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// An operation declined to run because its input exceeds a scale guard.
class refusal_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace fcase
