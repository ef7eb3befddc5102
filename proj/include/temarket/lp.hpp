#pragma once
//------------------------------------------------------------------------------
//
//   Copyright 2026 The temarket Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------


#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace temarket::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense
{
  kLessEqual,
  kEqual,
  kGreaterEqual,
};

/// min c'x  s.t.  rows,  lower <= x <= upper.  Lower bounds must be finite.
class Problem
{
public:
  struct Row
  {
    std::vector<std::pair<std::size_t, double>> terms;
    Sense                                       sense = Sense::kLessEqual;
    double                                      rhs   = 0.0;
  };

  std::size_t add_variable(double lower, double upper, double cost);
  void        add_row(std::vector<std::pair<std::size_t, double>> terms, Sense sense, double rhs);

  std::size_t num_variables() const noexcept { return cost_.size(); }
  std::size_t num_rows() const noexcept { return rows_.size(); }

  std::vector<double> const &cost() const noexcept { return cost_; }
  std::vector<double> const &lower() const noexcept { return lower_; }
  std::vector<double> const &upper() const noexcept { return upper_; }
  std::vector<Row> const    &rows() const noexcept { return rows_; }

private:
  std::vector<double> cost_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<Row>    rows_;
};

enum class Status
{
  kOptimal,
  kInfeasible,
  kUnbounded,
  kIterationLimit,
};

struct Solution
{
  Status              status = Status::kInfeasible;
  std::vector<double> x;
  double              objective  = 0.0;
  std::size_t         iterations = 0;
};

struct Options
{
  std::size_t max_iterations    = 50000;
  double      pivot_tolerance   = 1e-9;
  double      feasibility_tolerance = 1e-7;
};

/// Dense two-phase primal simplex. Dantzig pricing, falling back to Bland's
/// rule after a run of degenerate pivots.
Solution solve(Problem const &problem, Options const &options = {});

}  // namespace temarket::lp
