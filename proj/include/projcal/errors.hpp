#pragma once

#include <stdexcept>
#include <string>

namespace projcal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Point at or behind a device's optical center.
class BehindDeviceError : public Error {
 public:
  using Error::Error;
};

/// Ray (nearly) parallel to a plane.
class ParallelError : public Error {
 public:
  using Error::Error;
};

/// Ray-plane intersection lies behind the ray origin.
class BehindOriginError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value; the message names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class CorruptFileError : public Error {
 public:
  using Error::Error;
};

/// Could not place the fiducial inside the device frusta.
class PlacementError : public Error {
 public:
  using Error::Error;
};

/// Train/test split leaves one side empty.
class SplitError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatchError : public Error {
 public:
  using Error::Error;
};

class EmptySplitError : public Error {
 public:
  using Error::Error;
};

/// Training loss became non-finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Analytic estimator could not find the tag or highlight.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

}  // namespace projcal
