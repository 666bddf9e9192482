// Copyright 2026 The qsfe Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <stdexcept>
#include <string>

namespace qsfe {

/// Base class for all qsfe errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value (qubit count, empty input, bad option).
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Dimension mismatch between containers that must agree.
class ShapeError : public Error {
  public:
    using Error::Error;
};

/// Qubit or sample index out of range.
class IndexError : public Error {
  public:
    using Error::Error;
};

/// Numerical precondition violated (e.g. kernel matrix not PSD).
class NumericError : public Error {
  public:
    using Error::Error;
};

/// Malformed input file; message names the offending row/column.
class IngestError : public Error {
  public:
    using Error::Error;
};

/// Optimization diverged or produced non-finite values.
class TrainingError : public Error {
  public:
    using Error::Error;
};

/// Metric undefined for the given inputs (e.g. zero target variance).
class MetricError : public Error {
  public:
    using Error::Error;
};

/// Filesystem failure while reading or writing outputs.
class IoError : public Error {
  public:
    using Error::Error;
};

} // namespace qsfe
