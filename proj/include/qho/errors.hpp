#pragma once

#include <stdexcept>
#include <string>

namespace qho {

// Base of every error this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// |sin(omega t_M)| is too small: the chain variance diverges.
class ResonanceError : public Error {
public:
    using Error::Error;
};

// Argument outside the domain of a formula (e.g. std <= 0, tan <= 0).
class DomainError : public Error {
public:
    using Error::Error;
};

// The instrument width is not narrower than the prior it would have to sharpen.
class PrecisionError : public Error {
public:
    using Error::Error;
};

class GridTooSmall : public Error {
public:
    using Error::Error;
};

class GridTooCoarse : public Error {
public:
    using Error::Error;
};

// Probability reached the outer edge of the grid.
class LeakageError : public Error {
public:
    using Error::Error;
};

class InsufficientSamples : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace qho
