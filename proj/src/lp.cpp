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

#include "temarket/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace temarket::lp {

std::size_t Problem::add_variable(double lower, double upper, double cost)
{
  if (!std::isfinite(lower))
  {
    throw std::invalid_argument("lp: variable lower bound must be finite");
  }
  lower_.push_back(lower);
  upper_.push_back(upper);
  cost_.push_back(cost);
  return cost_.size() - 1;
}

void Problem::add_row(std::vector<std::pair<std::size_t, double>> terms, Sense sense, double rhs)
{
  for (auto const &[index, coeff] : terms)
  {
    if (index >= cost_.size() || !std::isfinite(coeff))
    {
      throw std::invalid_argument("lp: row references unknown variable or non-finite coefficient");
    }
  }
  rows_.push_back(Row{std::move(terms), sense, rhs});
}

namespace {

class Tableau
{
public:
  Tableau(std::size_t rows, std::size_t cols)
    : rows_(rows)
    , cols_(cols)
    , data_((rows + 1) * (cols + 1), 0.0)
    , basis_(rows, 0)
  {}

  double &at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
  double  at(std::size_t r, std::size_t c) const { return data_[r * (cols_ + 1) + c]; }
  double &rhs(std::size_t r) { return at(r, cols_); }
  double  rhs(std::size_t r) const { return at(r, cols_); }
  double &cost(std::size_t c) { return at(rows_, c); }
  double &objective() { return at(rows_, cols_); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t> &basis() { return basis_; }

  void pivot(std::size_t pr, std::size_t pc)
  {
    double const inv = 1.0 / at(pr, pc);
    double      *prow = &data_[pr * (cols_ + 1)];
    for (std::size_t c = 0; c <= cols_; ++c)
    {
      prow[c] *= inv;
    }
    prow[pc] = 1.0;
    for (std::size_t r = 0; r <= rows_; ++r)
    {
      if (r == pr)
      {
        continue;
      }
      double *row    = &data_[r * (cols_ + 1)];
      double  factor = row[pc];
      if (factor == 0.0)
      {
        continue;
      }
      for (std::size_t c = 0; c <= cols_; ++c)
      {
        row[c] -= factor * prow[c];
      }
      row[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

private:
  std::size_t              rows_;
  std::size_t              cols_;
  std::vector<double>      data_;
  std::vector<std::size_t> basis_;
};

enum class LoopResult
{
  kOptimal,
  kUnbounded,
  kIterationLimit,
};

LoopResult run_simplex(Tableau &t, std::size_t allowed_cols, Options const &opt,
                       std::size_t &iterations)
{
  bool        bland      = false;
  std::size_t degenerate = 0;
  while (true)
  {
    if (iterations >= opt.max_iterations)
    {
      return LoopResult::kIterationLimit;
    }

    std::size_t entering = allowed_cols;
    double      best     = -opt.pivot_tolerance;
    for (std::size_t c = 0; c < allowed_cols; ++c)
    {
      double const rc = t.cost(c);
      if (rc < best)
      {
        entering = c;
        if (bland)
        {
          break;
        }
        best = rc;
      }
    }
    if (entering == allowed_cols)
    {
      return LoopResult::kOptimal;
    }

    std::size_t leaving    = t.rows();
    double      best_ratio = 0.0;
    for (std::size_t r = 0; r < t.rows(); ++r)
    {
      double const a = t.at(r, entering);
      if (a <= opt.pivot_tolerance)
      {
        continue;
      }
      double const ratio = std::max(t.rhs(r), 0.0) / a;
      if (leaving == t.rows() || ratio < best_ratio - 1e-12 * (1.0 + best_ratio) ||
          (ratio <= best_ratio + 1e-12 * (1.0 + best_ratio) && t.basis()[r] < t.basis()[leaving]))
      {
        leaving    = r;
        best_ratio = ratio;
      }
    }
    if (leaving == t.rows())
    {
      return LoopResult::kUnbounded;
    }

    degenerate = best_ratio <= 1e-12 ? degenerate + 1 : 0;
    if (degenerate > 50)
    {
      bland = true;
    }
    t.pivot(leaving, entering);
    ++iterations;
  }
}

}  // namespace

Solution solve(Problem const &problem, Options const &options)
{
  std::size_t const n = problem.num_variables();
  Solution          out;

  struct DenseRow
  {
    std::vector<double> a;
    Sense               sense;
    double              rhs;
  };
  std::vector<DenseRow> rows;
  rows.reserve(problem.num_rows() + n);

  // Shift x = lower + x' so every structural variable is x' >= 0.
  for (auto const &row : problem.rows())
  {
    DenseRow dense{std::vector<double>(n, 0.0), row.sense, row.rhs};
    for (auto const &[j, coeff] : row.terms)
    {
      dense.a[j] += coeff;
      dense.rhs -= coeff * problem.lower()[j];
    }
    rows.push_back(std::move(dense));
  }
  for (std::size_t j = 0; j < n; ++j)
  {
    double const span = problem.upper()[j] - problem.lower()[j];
    if (span < -options.feasibility_tolerance)
    {
      out.status = Status::kInfeasible;
      return out;
    }
    if (std::isfinite(problem.upper()[j]))
    {
      DenseRow bound{std::vector<double>(n, 0.0), Sense::kLessEqual, std::max(span, 0.0)};
      bound.a[j] = 1.0;
      rows.push_back(std::move(bound));
    }
  }
  for (auto &row : rows)
  {
    if (row.rhs < 0.0)
    {
      for (auto &v : row.a)
      {
        v = -v;
      }
      row.rhs = -row.rhs;
      if (row.sense == Sense::kLessEqual)
      {
        row.sense = Sense::kGreaterEqual;
      }
      else if (row.sense == Sense::kGreaterEqual)
      {
        row.sense = Sense::kLessEqual;
      }
    }
  }

  std::size_t n_slack = 0;
  std::size_t n_art   = 0;
  for (auto const &row : rows)
  {
    if (row.sense != Sense::kEqual)
    {
      ++n_slack;
    }
    if (row.sense != Sense::kLessEqual)
    {
      ++n_art;
    }
  }

  std::size_t const m         = rows.size();
  std::size_t const art_start = n + n_slack;
  std::size_t const cols      = art_start + n_art;
  Tableau           t(m, cols);

  std::size_t slack = n;
  std::size_t art   = art_start;
  double      scale = 1.0;
  for (std::size_t i = 0; i < m; ++i)
  {
    auto const &row = rows[i];
    for (std::size_t j = 0; j < n; ++j)
    {
      t.at(i, j) = row.a[j];
    }
    t.rhs(i) = row.rhs;
    scale    = std::max(scale, row.rhs);
    switch (row.sense)
    {
    case Sense::kLessEqual:
      t.at(i, slack)  = 1.0;
      t.basis()[i]    = slack++;
      break;
    case Sense::kGreaterEqual:
      t.at(i, slack++) = -1.0;
      t.at(i, art)     = 1.0;
      t.basis()[i]     = art++;
      break;
    case Sense::kEqual:
      t.at(i, art) = 1.0;
      t.basis()[i] = art++;
      break;
    }
  }

  // Phase 1: minimise the sum of artificials.
  for (std::size_t i = 0; i < m; ++i)
  {
    if (t.basis()[i] >= art_start)
    {
      for (std::size_t c = 0; c < art_start; ++c)
      {
        t.cost(c) -= t.at(i, c);
      }
      t.objective() -= t.rhs(i);
    }
  }
  if (n_art > 0)
  {
    auto const phase1 = run_simplex(t, art_start, options, out.iterations);
    if (phase1 == LoopResult::kIterationLimit)
    {
      out.status = Status::kIterationLimit;
      return out;
    }
    if (-t.objective() > options.feasibility_tolerance * scale)
    {
      out.status = Status::kInfeasible;
      return out;
    }
    for (std::size_t i = 0; i < m; ++i)
    {
      if (t.basis()[i] < art_start)
      {
        continue;
      }
      for (std::size_t c = 0; c < art_start; ++c)
      {
        if (std::abs(t.at(i, c)) > options.pivot_tolerance)
        {
          t.pivot(i, c);
          break;
        }
      }
    }
  }

  // Phase 2: the real objective, artificials barred from re-entering.
  for (std::size_t c = 0; c <= cols; ++c)
  {
    t.at(m, c) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j)
  {
    t.cost(j) = problem.cost()[j];
  }
  for (std::size_t i = 0; i < m; ++i)
  {
    std::size_t const b = t.basis()[i];
    double const      cb = b < n ? problem.cost()[b] : 0.0;
    if (cb == 0.0)
    {
      continue;
    }
    for (std::size_t c = 0; c <= cols; ++c)
    {
      t.at(m, c) -= cb * t.at(i, c);
    }
  }

  auto const phase2 = run_simplex(t, art_start, options, out.iterations);
  if (phase2 == LoopResult::kUnbounded)
  {
    out.status = Status::kUnbounded;
    return out;
  }

  out.x = problem.lower();
  for (std::size_t i = 0; i < m; ++i)
  {
    if (t.basis()[i] < n)
    {
      out.x[t.basis()[i]] += std::max(t.rhs(i), 0.0);
    }
  }
  for (std::size_t j = 0; j < n; ++j)
  {
    if (std::isfinite(problem.upper()[j]))
    {
      out.x[j] = std::min(out.x[j], problem.upper()[j]);
    }
  }
  out.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j)
  {
    out.objective += problem.cost()[j] * out.x[j];
  }
  out.status = phase2 == LoopResult::kIterationLimit ? Status::kIterationLimit : Status::kOptimal;
  return out;
}

}  // namespace temarket::lp
