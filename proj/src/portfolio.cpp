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

#include "temarket/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace temarket::portfolio {
namespace {

/// Price of the first curve point that covers `quantity` (left-continuous
/// willingness to pay).
double step_price(curve::PriceDemandCurve const &c, double quantity)
{
  for (auto const &p : c.points())
  {
    if (p.quantity_kw >= quantity)
    {
      return p.price_cents;
    }
  }
  return c.min_price();
}

Vector project_simplex(Vector const &v)
{
  Eigen::Index const n = v.size();
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta      = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
  {
    cumulative += sorted[static_cast<std::size_t>(i)];
    double const t = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (sorted[static_cast<std::size_t>(i)] - t > 0.0)
    {
      theta = t;
    }
  }
  return (v.array() - theta).max(0.0).matrix();
}

double variance(Matrix const &sigma, Vector const &w)
{
  return w.dot(sigma * w);
}

/// Equality-constrained QP on a fixed support; nullopt when the KKT system
/// is singular or the answer leaves the support's orthant.
std::optional<Vector> solve_on_support(ReturnStatistics const &stats, double rorm,
                                       std::vector<Eigen::Index> const &support, bool return_active)
{
  auto const   k    = static_cast<Eigen::Index>(support.size());
  Eigen::Index rows = k + 1 + (return_active ? 1 : 0);
  Matrix       kkt  = Matrix::Zero(rows, rows);
  Vector       rhs  = Vector::Zero(rows);
  for (Eigen::Index i = 0; i < k; ++i)
  {
    for (Eigen::Index j = 0; j < k; ++j)
    {
      kkt(i, j) = 2.0 * stats.sigma(support[i], support[j]);
    }
    kkt(i, k) = kkt(k, i) = 1.0;
    if (return_active)
    {
      kkt(i, k + 1) = kkt(k + 1, i) = stats.r_bar[support[i]];
    }
  }
  rhs[k] = 1.0;
  if (return_active)
  {
    rhs[k + 1] = rorm;
  }
  Eigen::FullPivLU<Matrix> lu(kkt);
  if (!lu.isInvertible())
  {
    return std::nullopt;
  }
  Vector const sol = lu.solve(rhs);
  if (!((kkt * sol - rhs).lpNorm<Eigen::Infinity>() < 1e-10))
  {
    return std::nullopt;
  }
  Vector w = Vector::Zero(stats.r_bar.size());
  for (Eigen::Index i = 0; i < k; ++i)
  {
    if (sol[i] < -1e-12)
    {
      return std::nullopt;
    }
    w[support[i]] = std::max(sol[i], 0.0);
  }
  return w;
}

}  // namespace

void BidderConfig::validate() const
{
  if (bidder_id.empty())
  {
    throw ConfigError("bidder_id", "must not be empty");
  }
  if (!(capacity_kw > 0.0) || !std::isfinite(capacity_kw))
  {
    throw ConfigError("capacity_kw", "capacity must be positive");
  }
  if (!std::isfinite(rorm))
  {
    throw ConfigError("rorm", "must be finite");
  }
  if (n_samples < 2)
  {
    throw ConfigError("n_samples", "need at least two samples");
  }
  for (auto const &[asker, price] : ask_prices)
  {
    if (!(price > 0.0) || !std::isfinite(price))
    {
      throw ConfigError("ask_prices." + asker, "ask price must be positive");
    }
  }
}

NormalizedCurves normalize_curves(std::vector<curve::PriceDemandCurve> const &curves,
                                  BidderConfig const                         &cfg)
{
  if (!(cfg.capacity_kw > 0.0))
  {
    throw ConfigError("capacity_kw", "capacity must be positive");
  }
  auto const n = static_cast<Eigen::Index>(cfg.n_samples);
  auto const l = static_cast<Eigen::Index>(curves.size());

  NormalizedCurves out;
  out.q.resize(n, l);
  out.p.resize(n, l);
  for (Eigen::Index j = 0; j < l; ++j)
  {
    auto const &c  = curves[static_cast<std::size_t>(j)];
    auto const  it = cfg.ask_prices.find(c.asker_id());
    if (it == cfg.ask_prices.end())
    {
      throw ConfigError("ask_prices." + c.asker_id(), "no ask price for asker '" + c.asker_id() +
                                                          "'");
    }
    out.askers.push_back(c.asker_id());
    double const ask = it->second;
    bool const   own = c.points().size() == cfg.n_samples;
    for (Eigen::Index i = 0; i < n; ++i)
    {
      double quantity = 0.0;
      double price    = 0.0;
      if (own)
      {
        auto const &pt = c.points()[static_cast<std::size_t>(i)];
        quantity       = pt.quantity_kw;
        price          = pt.price_cents;
      }
      else
      {
        quantity = c.max_quantity() * static_cast<double>(i + 1) / static_cast<double>(n);
        price    = step_price(c, quantity);
      }
      out.q(i, j) = quantity / cfg.capacity_kw;
      out.p(i, j) = price / ask;
    }
  }
  return out;
}

Matrix return_samples(Matrix const &p)
{
  return (p.array() - 1.0).matrix();
}

ReturnStatistics return_stats(Matrix const &r)
{
  if (r.rows() < 2)
  {
    throw StatsError("return statistics need at least two samples, got " +
                     std::to_string(r.rows()));
  }
  if (!r.allFinite())
  {
    throw StatsError("return samples must be finite");
  }
  ReturnStatistics out;
  out.samples        = r;
  out.r_bar          = r.colwise().mean().transpose();
  Matrix const centred = r.rowwise() - out.r_bar.transpose();
  out.sigma          = (centred.transpose() * centred) / static_cast<double>(r.rows());
  out.sigma          = 0.5 * (out.sigma + out.sigma.transpose());
  return out;
}

Vector project_feasible(Vector const &v, Vector const &r_bar, double floor)
{
  Vector w = project_simplex(v);
  if (r_bar.dot(w) >= floor)
  {
    return w;
  }
  // r_bar' P(v + mu r_bar) is non-decreasing in mu; bisect for the floor.
  double lo = 0.0;
  double hi = 1.0;
  double const spread = std::max(r_bar.maxCoeff() - r_bar.minCoeff(), 1e-300);
  hi = std::max(hi, 4.0 / spread);
  for (int i = 0; i < 200 && r_bar.dot(project_simplex(v + hi * r_bar)) < floor; ++i)
  {
    hi *= 2.0;
  }
  for (int i = 0; i < 200; ++i)
  {
    double const mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
    {
      break;
    }
    if (r_bar.dot(project_simplex(v + mid * r_bar)) >= floor)
    {
      hi = mid;
    }
    else
    {
      lo = mid;
    }
  }
  w = project_simplex(v + hi * r_bar);
  if (r_bar.dot(w) < floor)
  {
    // Only reachable when the floor equals the best return; sit on the best asset.
    Eigen::Index best = 0;
    r_bar.maxCoeff(&best);
    w       = Vector::Zero(v.size());
    w[best] = 1.0;
  }
  return w;
}

PortfolioWeights solve_mpo(ReturnStatistics const &stats, double rorm)
{
  Eigen::Index const l = stats.r_bar.size();
  if (l == 0)
  {
    throw InfeasibleRormError("no askers to allocate capacity to");
  }
  if (stats.sigma.rows() != l || stats.sigma.cols() != l || !stats.sigma.allFinite() ||
      !stats.r_bar.allFinite())
  {
    throw StatsError("return statistics have inconsistent dimensions");
  }
  if (stats.r_bar.maxCoeff() < rorm)
  {
    throw InfeasibleRormError("best expected return " + std::to_string(stats.r_bar.maxCoeff()) +
                              " is below the required " + std::to_string(rorm));
  }

  Matrix const sigma = 0.5 * (stats.sigma + stats.sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma, Eigen::EigenvaluesOnly);
  double const lipschitz = 2.0 * std::max(eig.eigenvalues().maxCoeff(), 0.0);

  Vector w = project_feasible(Vector::Constant(l, 1.0 / static_cast<double>(l)), stats.r_bar, rorm);
  if (lipschitz > 0.0)
  {
    // FISTA on the smooth quadratic with exact projection.
    Vector y = w;
    double t = 1.0;
    for (int it = 0; it < 20000; ++it)
    {
      Vector const next   = project_feasible(y - (2.0 / lipschitz) * (sigma * y), stats.r_bar,
                                             rorm);
      double const t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y                   = next + ((t - 1.0) / t_next) * (next - w);
      double const moved  = (next - w).lpNorm<Eigen::Infinity>();
      w                   = next;
      t                   = t_next;
      if (moved < 1e-14)
      {
        break;
      }
    }

    // Active-set polish: re-solve the KKT system on the detected support.
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < l; ++i)
    {
      if (w[i] > 1e-7)
      {
        support.push_back(i);
      }
    }
    double const current = variance(sigma, w);
    for (bool active : {false, true})
    {
      auto const cand = solve_on_support(stats, rorm, support, active);
      if (!cand)
      {
        continue;
      }
      Vector const fixed = project_feasible(*cand, stats.r_bar, rorm);
      if (variance(sigma, fixed) <= current + 1e-14)
      {
        w = fixed;
        break;
      }
    }
  }
  return PortfolioWeights{w};
}

std::vector<BidOffer> make_bids(PortfolioWeights const &weights, BidderConfig const &cfg,
                                std::vector<std::string> const &askers)
{
  if (static_cast<std::size_t>(weights.w.size()) != askers.size())
  {
    throw ConfigError("weights", "one weight per asker required");
  }
  std::vector<BidOffer> offers;
  for (std::size_t l = 0; l < askers.size(); ++l)
  {
    double const quantity = weights.w[static_cast<Eigen::Index>(l)] * cfg.capacity_kw;
    if (quantity < cfg.quantity_epsilon)
    {
      continue;
    }
    auto const it = cfg.ask_prices.find(askers[l]);
    if (it == cfg.ask_prices.end())
    {
      throw ConfigError("ask_prices." + askers[l], "no ask price for asker '" + askers[l] + "'");
    }
    offers.push_back(BidOffer{cfg.bidder_id, askers[l], quantity, it->second});
  }
  return offers;
}

std::vector<BidOffer> plan_bids(std::vector<curve::PriceDemandCurve> const &curves,
                                BidderConfig const                         &cfg)
{
  cfg.validate();
  std::vector<curve::PriceDemandCurve> priced;
  for (auto const &c : curves)
  {
    if (cfg.ask_prices.count(c.asker_id()))
    {
      priced.push_back(c);
    }
  }
  if (priced.empty())
  {
    return {};
  }
  auto const norm    = normalize_curves(priced, cfg);
  auto const stats   = return_stats(return_samples(norm.p));
  auto const weights = solve_mpo(stats, cfg.rorm);
  return make_bids(weights, cfg, norm.askers);
}

}  // namespace temarket::portfolio
