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

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace temarket {

// Numeric values are part of the C ABI (see temarket.h) and must not change.
enum class ErrorCode : int
{
  kOk                = 0,
  kModel             = 1,
  kControlBounds     = 2,
  kRate              = 3,
  kSocBounds         = 4,
  kInfeasible        = 5,
  kSolver            = 6,
  kCurve             = 7,
  kConfig            = 8,
  kStats             = 9,
  kInfeasibleRorm    = 10,
  kAuction           = 11,
  kAuth              = 12,
  kSchema            = 13,
  kStageTimeout      = 14,
  kProtocol          = 15,
  kTransport         = 16,
  kInvalidArgument   = 17,
  kIo                = 18,
  kInternal          = 99,
};

class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, std::string const &what)
    : std::runtime_error(what)
    , code_(code)
  {}

  ErrorCode code() const noexcept
  {
    return code_;
  }

private:
  ErrorCode code_;
};

#define TEMARKET_DEFINE_ERROR(Name, Code)                                    \
  class Name : public Error                                                  \
  {                                                                          \
  public:                                                                    \
    explicit Name(std::string const &what) : Error(ErrorCode::Code, what) {} \
  }

TEMARKET_DEFINE_ERROR(ModelError, kModel);
TEMARKET_DEFINE_ERROR(ControlBoundsError, kControlBounds);
TEMARKET_DEFINE_ERROR(RateError, kRate);
TEMARKET_DEFINE_ERROR(SocBoundsError, kSocBounds);
TEMARKET_DEFINE_ERROR(CurveError, kCurve);
TEMARKET_DEFINE_ERROR(StatsError, kStats);
TEMARKET_DEFINE_ERROR(InfeasibleRormError, kInfeasibleRorm);
TEMARKET_DEFINE_ERROR(AuctionError, kAuction);
TEMARKET_DEFINE_ERROR(AuthError, kAuth);
TEMARKET_DEFINE_ERROR(SchemaError, kSchema);
TEMARKET_DEFINE_ERROR(ProtocolError, kProtocol);
TEMARKET_DEFINE_ERROR(TransportError, kTransport);
TEMARKET_DEFINE_ERROR(IoError, kIo);

#undef TEMARKET_DEFINE_ERROR

/// No control/BESS trajectory satisfies the horizon constraints. When raised
/// during a price sweep, `price()` names the sweep price that failed.
class InfeasibleError : public Error
{
public:
  explicit InfeasibleError(std::string const &what, std::optional<double> price = std::nullopt)
    : Error(ErrorCode::kInfeasible, what)
    , price_(price)
  {}

  std::optional<double> price() const noexcept
  {
    return price_;
  }

private:
  std::optional<double> price_;
};

/// Invalid scenario or component configuration. `field()` is a dotted path
/// into the offending document, e.g. `bidders[1].capacity_kw`.
class ConfigError : public Error
{
public:
  ConfigError(std::string field, std::string const &what)
    : Error(ErrorCode::kConfig, field.empty() ? what : field + ": " + what)
    , field_(std::move(field))
  {}

  std::string const &field() const noexcept
  {
    return field_;
  }

private:
  std::string field_;
};

class StageTimeoutError : public Error
{
public:
  StageTimeoutError(std::string const &stage, std::vector<std::string> laggards)
    : Error(ErrorCode::kStageTimeout, describe(stage, laggards))
    , laggards_(std::move(laggards))
  {}

  std::vector<std::string> const &laggards() const noexcept
  {
    return laggards_;
  }

private:
  static std::string describe(std::string const &stage, std::vector<std::string> const &laggards)
  {
    std::string msg = "timed out waiting for '" + stage + "' acknowledgements from:";
    for (auto const &id : laggards)
    {
      msg += " " + id;
    }
    return msg;
  }

  std::vector<std::string> laggards_;
};

}  // namespace temarket
