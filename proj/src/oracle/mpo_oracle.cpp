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

#include "temarket/oracle.hpp"

#include <cmath>

namespace temarket::oracle {
namespace {

struct GridWalk
{
  portfolio::Vector const     &r_bar;
  portfolio::Matrix const     &sigma;
  double                       rorm;
  double                       step;
  long                         units;
  std::vector<long>            k;
  std::optional<GridPortfolio> best;

  void visit(std::size_t l, long left)
  {
    if (l + 1 == k.size())
    {
      k[l] = left;
      score();
      return;
    }
    for (long i = 0; i <= left; ++i)
    {
      k[l] = i;
      visit(l + 1, left - i);
    }
  }

  void score()
  {
    portfolio::Vector w(static_cast<Eigen::Index>(k.size()));
    for (std::size_t l = 0; l < k.size(); ++l)
    {
      w[static_cast<Eigen::Index>(l)] = static_cast<double>(k[l]) / static_cast<double>(units);
    }
    if (r_bar.dot(w) < rorm - 1e-12)
    {
      return;
    }
    double const v = w.dot(sigma * w);
    if (!best || v < best->variance)
    {
      best = GridPortfolio{std::vector<double>(w.data(), w.data() + w.size()), v};
    }
  }
};

}  // namespace

std::optional<GridPortfolio> mpo_grid_search(portfolio::Vector const &r_bar,
                                             portfolio::Matrix const &sigma, double rorm,
                                             double step)
{
  if (r_bar.size() == 0 || sigma.rows() != r_bar.size() || sigma.cols() != r_bar.size())
  {
    throw StatsError("grid search needs a square covariance matching the mean vector");
  }
  if (!(step > 0.0) || step > 1.0)
  {
    throw ConfigError("step", "grid step must lie in (0, 1]");
  }
  long const units = std::lround(1.0 / step);
  GridWalk   walk{r_bar, sigma, rorm, step, units, std::vector<long>(r_bar.size(), 0), {}};
  walk.visit(0, units);
  return walk.best;
}

}  // namespace temarket::oracle
