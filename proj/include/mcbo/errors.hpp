// Copyright 2026 The mcbo authors
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

namespace mcbo {

// Base class for all library errors.  Every failure mode below derives from
// it so callers can catch either the precise condition or the whole family.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Graph validation.
struct CycleDetected : Error {
  using Error::Error;
};
struct ParentIndexOutOfRange : Error {
  using Error::Error;
};
struct BadTopoOrder : Error {
  using Error::Error;
};

// Intervention validation.
struct ActionOutOfBox : Error {
  using Error::Error;
};
struct CardinalityViolated : Error {
  using Error::Error;
};
struct HardTargetIncludesReward : Error {
  using Error::Error;
};

// Shape / numerics.
struct DimMismatch : Error {
  using Error::Error;
};
struct NotPositiveDefinite : Error {
  using Error::Error;
};
struct LengthMismatch : Error {
  using Error::Error;
};

// Search / lookup.
struct GridBudgetExceeded : Error {
  using Error::Error;
};
struct UnknownTask : Error {
  using Error::Error;
};
struct NoFeasibleCandidate : Error {
  using Error::Error;
};

}  // namespace mcbo
