// Copyright 2026 The residual-reach Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REACH_ERRORS_H_
#define REACH_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace reach {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text document. `offset` is the byte offset into the input.
class ParseError : public Error {
 public:
  ParseError(int line, std::size_t offset, const std::string& reason)
      : Error("line " + std::to_string(line) + " (byte " +
              std::to_string(offset) + "): " + reason),
        line_(line), offset_(offset), reason_(reason) {}

  int line() const { return line_; }
  std::size_t offset() const { return offset_; }
  const std::string& reason() const { return reason_; }

 private:
  int line_;
  std::size_t offset_;
  std::string reason_;
};

// Well-formed chain description that violates a structural invariant.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& joint, const std::string& reason)
      : Error("joint '" + joint + "': " + reason), joint_(joint) {}
  const std::string& joint() const { return joint_; }

 private:
  std::string joint_;
};

class DegenerateRot6D : public Error {
 public:
  using Error::Error;
};

// Too few or collinear correspondences.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class LimitViolation : public Error {
 public:
  using Error::Error;
};

class IkInfeasible : public Error {
 public:
  using Error::Error;
};

class PlanBlocked : public Error {
 public:
  using Error::Error;
};

class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

class NoFeasibleGrasp : public Error {
 public:
  using Error::Error;
};

class AlreadyRetargeted : public Error {
 public:
  using Error::Error;
};

// Checkpoint or log whose recorded hash does not match what the caller expects.
class HashMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class UpstreamMissing : public Error {
 public:
  using Error::Error;
};

}  // namespace reach

#endif  // REACH_ERRORS_H_
