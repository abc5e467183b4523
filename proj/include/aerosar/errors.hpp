#pragma once

#include <stdexcept>
#include <string>

namespace aerosar {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Unreadable or missing input file (CLI exit code 2, like parse errors).
struct InputError : Error {
  using Error::Error;
};

// geometry
struct PointBehindCamera : Error {
  PointBehindCamera() : Error("point has non-positive depth in the camera frame") {}
};
struct NonPositiveDepth : Error {
  NonPositiveDepth() : Error("depth must be positive") {}
};
struct DegenerateBaseline : Error {
  DegenerateBaseline() : Error("camera baseline is degenerate (poses coincide)") {}
};
struct ParallelRays : Error {
  ParallelRays() : Error("rays are too close to parallel for triangulation") {}
};

// detector support
struct EmptyConfig : Error {
  EmptyConfig() : Error("anchor configuration has no levels, ratios or scales") {}
};
struct TooFewSamples : Error {
  TooFewSamples() : Error("fewer samples than requested clusters") {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(what) {}
};

// fusion
struct OutsideImage : Error {
  OutsideImage() : Error("mapped bounding box lies fully outside the destination image") {}
};

// tracking
struct NonMonotonicFrame : Error {
  NonMonotonicFrame() : Error("frame index does not advance") {}
};

// particle filter
struct DegenerateWeights : Error {
  DegenerateWeights() : Error("all measurement likelihoods underflowed; filter diverged") {}
};

// reid
struct EmptyForeground : Error {
  EmptyForeground() : Error("mask has no foreground pixels") {}
};
struct LayoutMismatch : Error {
  LayoutMismatch() : Error("histograms have different bin layouts") {}
};

// evaluation
struct EmptyGroundTruth : Error {
  EmptyGroundTruth() : Error("no ground-truth boxes to evaluate against") {}
};

// io
struct ParseError : Error {
  ParseError(int line_arg, const std::string& detail)
      : Error("parse error at line " + std::to_string(line_arg) + ": " + detail), line(line_arg) {}
  int line;
};
struct SchemaError : Error {
  SchemaError(const std::string& field_arg, const std::string& detail)
      : Error("schema error in field '" + field_arg + "': " + detail), field(field_arg) {}
  std::string field;
};

}  // namespace aerosar
