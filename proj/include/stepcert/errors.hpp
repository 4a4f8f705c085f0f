// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#pragma once

#include <stdexcept>
#include <string>

namespace stepcert {

// Base class for every error raised by the library. Catching this type is
// enough to intercept anything stepcert throws on purpose.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A value that must be a finite machine real was NaN or infinite.
class NonFiniteInput : public Error {
public:
  using Error::Error;
};

// Gauss-Jordan elimination found no nonzero pivot; the matrix has no inverse.
class SingularMatrix : public Error {
public:
  using Error::Error;
};

// Requested polynomial order is outside what the element class supports.
class UnsupportedOrder : public Error {
public:
  using Error::Error;
};

// Matrix or vector shapes do not line up for the requested operation.
class DimensionMismatch : public Error {
public:
  using Error::Error;
};

// A cache file exists but fails its integrity or provenance checks.
class CorruptCache : public Error {
public:
  using Error::Error;
};

// The filesystem refused a read or write the library needed.
class IoFailure : public Error {
public:
  using Error::Error;
};

// A requested precomputed matrix set is absent from the cache.
class CacheMiss : public Error {
public:
  using Error::Error;
};

// The element is already inverted (or degenerate) at the start of the step,
// so no positive step size can be certified.
class InvalidAtStart : public Error {
public:
  explicit InvalidAtStart(const std::string& what, long element_id = -1)
      : Error(what), element(element_id) {}
  long element;  // offending element id, or -1 when not tied to a mesh query
};

// Accuracy / tolerance parameter is zero, negative, or non-finite.
class BadAccuracy : public Error {
public:
  using Error::Error;
};

// Polynomial order parameter is out of range for the requested operation.
class BadOrder : public Error {
public:
  using Error::Error;
};

// A subdivision sequence references a child index that does not exist.
class BadSequence : public Error {
public:
  using Error::Error;
};

// The closed-form step solver only handles linear triangles.
class NotLinearTriangle : public Error {
public:
  using Error::Error;
};

// Query file or CLI input could not be parsed.
class MalformedInput : public Error {
public:
  explicit MalformedInput(const std::string& what, long element_id = -1)
      : Error(what), element(element_id) {}
  long element;  // element whose record was malformed, or -1
};

}  // namespace stepcert
