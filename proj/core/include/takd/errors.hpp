// Copyright 2026 The TAKD Workbench Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace takd {

// Base class for every error raised by the workbench. Subclasses name the
// failure category so callers (and the CLI) can map them to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TAKD_DEFINE_ERROR(Name) \
  class Name : public Error {   \
   public:                      \
    using Error::Error;         \
  }

TAKD_DEFINE_ERROR(DimensionError);
TAKD_DEFINE_ERROR(ParameterError);
TAKD_DEFINE_ERROR(IndexError);
TAKD_DEFINE_ERROR(DomainError);
TAKD_DEFINE_ERROR(UsageError);
TAKD_DEFINE_ERROR(NumericError);
TAKD_DEFINE_ERROR(SpecError);
TAKD_DEFINE_ERROR(FormatError);
TAKD_DEFINE_ERROR(ConfigError);
TAKD_DEFINE_ERROR(PathError);
TAKD_DEFINE_ERROR(BudgetError);
TAKD_DEFINE_ERROR(LadderError);
TAKD_DEFINE_ERROR(EvaluationError);

#undef TAKD_DEFINE_ERROR

}  // namespace takd
