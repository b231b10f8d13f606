#pragma once

#include <stdexcept>
#include <string>

namespace ipend {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration value; message carries the field path (e.g. "plant.cart_mass").
class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// Riccati iteration failed to converge or produced an unstable design.
class SynthesisError : public Error {
  public:
    explicit SynthesisError(const std::string& what) : Error(what) {}
};

// Numeric blowup or invalid input during simulation.
class SimulationError : public Error {
  public:
    explicit SimulationError(const std::string& what) : Error(what) {}
};

// Genome encode/decode or genome file shape mismatch.
class CodecError : public Error {
  public:
    explicit CodecError(const std::string& what) : Error(what) {}
};

// Metric computation on malformed input (e.g. empty trajectory log).
class MetricError : public Error {
  public:
    explicit MetricError(const std::string& what) : Error(what) {}
};

// File read/write failure.
class IoError : public Error {
  public:
    explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace ipend
