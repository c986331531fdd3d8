//
// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPAUDIT_ERRORS_H_
#define DPAUDIT_ERRORS_H_

#include <stdexcept>
#include <string>

namespace dpaudit {

// Thrown when an input violates a documented precondition or a data
// structure violates one of its invariants (bad parameters, malformed
// transcripts, non-convex curves, ...).  The command-line tool maps this
// to exit code 2.
class InvariantViolation : public std::runtime_error {
 public:
  explicit InvariantViolation(const std::string& what)
      : std::runtime_error(what) {}
};

// Thrown when a numerical routine cannot reach its documented accuracy
// (quadrature error above tolerance, bisection that does not converge,
// resource budgets exceeded).  The command-line tool maps this to exit
// code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace dpaudit

#endif  // DPAUDIT_ERRORS_H_
