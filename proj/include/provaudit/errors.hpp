// Copyright 2026 The provaudit Authors
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

namespace provaudit {

/// Base of every error the library throws. Callers that only need to report a
/// failure can catch this; callers that branch on the cause catch the leaf.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// registry
class ParseError : public Error { using Error::Error; };
class ValidationError : public Error { using Error::Error; };
class UnknownScenario : public Error { using Error::Error; };

// prompt factory
class MissingSlot : public Error { using Error::Error; };
class VerificationIndeterminate : public Error { using Error::Error; };
class SeedTooSmall : public Error { using Error::Error; };
class InapplicableMethod : public Error { using Error::Error; };
class DuplicateDebias : public Error { using Error::Error; };
class EmptyProviderList : public Error { using Error::Error; };
class RankingParseError : public Error { using Error::Error; };

// gateway
class BudgetExhausted : public Error { using Error::Error; };
class TransportError : public Error { using Error::Error; };
class AuthMissing : public Error { using Error::Error; };
class MockMiss : public Error { using Error::Error; };

// analyzer
class EmptyMarkerSet : public Error { using Error::Error; };
class AmbiguousLabel : public Error { using Error::Error; };
class MissingSource : public Error { using Error::Error; };

// stats
class EmptyCounts : public Error { using Error::Error; };
class EmptyTally : public Error { using Error::Error; };
class EmptyObservations : public Error { using Error::Error; };
class DegenerateSample : public Error { using Error::Error; };
class ZeroExpectedCell : public Error { using Error::Error; };
class LengthMismatch : public Error { using Error::Error; };
class OnlySentinels : public Error { using Error::Error; };

// orchestration
class EmptyPlan : public Error { using Error::Error; };
class MissingRunData : public Error { using Error::Error; };
class RunLocked : public Error { using Error::Error; };

}  // namespace provaudit
