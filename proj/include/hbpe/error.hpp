// Copyright 2026 The hbpe Authors
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

#ifndef HBPE_ERROR_HPP
#define HBPE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hbpe {

/// Broad failure classes. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  kUsage = 1,      // bad arguments / precondition violations
  kData = 2,       // parse, I/O and shape errors
  kNumerical = 3,  // factorization, SVD, divergence
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

class ShapeMismatch : public Error {
 public:
  explicit ShapeMismatch(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class UndefinedMetric : public Error {
 public:
  explicit UndefinedMetric(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class DiversityUnsatisfiable : public Error {
 public:
  DiversityUnsatisfiable(const std::string& what, double best_entropy)
      : Error(ErrorKind::kData, what), best_entropy_(best_entropy) {}
  double best_entropy() const noexcept { return best_entropy_; }

 private:
  double best_entropy_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::kNumerical, what) {}
};

class IllConditionedKernel : public NumericalError {
 public:
  explicit IllConditionedKernel(const std::string& what) : NumericalError(what) {}
};

class Divergence : public NumericalError {
 public:
  Divergence(const std::string& what, int iteration)
      : NumericalError(what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

}  // namespace hbpe

#endif  // HBPE_ERROR_HPP
