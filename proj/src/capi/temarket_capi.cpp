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

#include "temarket/temarket.h"

#include "temarket/agents.hpp"
#include "temarket/oracle.hpp"
#include "temarket/scenario.hpp"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

struct tm_scenario
{
  temarket::market::ScenarioConfig config;
};

struct tm_report
{
  temarket::market::MarketReport report;
};

namespace {

thread_local std::string last_error;

tm_status fail(tm_status status, std::string message)
{
  last_error = std::move(message);
  return status;
}

/// Runs `body`, translating exceptions into status codes.
template <class Fn>
tm_status guarded(Fn &&body)
{
  try
  {
    last_error.clear();
    body();
    return TM_OK;
  }
  catch (temarket::Error const &e)
  {
    return fail(static_cast<tm_status>(e.code()), e.what());
  }
  catch (nlohmann::ordered_json::exception const &e)
  {
    return fail(TM_E_CONFIG, e.what());
  }
  catch (std::bad_alloc const &)
  {
    return fail(TM_E_INTERNAL, "out of memory");
  }
  catch (std::exception const &e)
  {
    return fail(TM_E_INTERNAL, e.what());
  }
  catch (...)
  {
    return fail(TM_E_INTERNAL, "unknown failure");
  }
}

char *duplicate(std::string const &s)
{
  auto *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (!out)
  {
    throw std::bad_alloc();
  }
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

tm_status missing(char const *what)
{
  return fail(TM_E_INVALID_ARGUMENT, std::string(what) + " must not be NULL");
}

}  // namespace

extern "C" {

TM_API const char *tm_last_error(void)
{
  return last_error.c_str();
}

TM_API const char *tm_version(void)
{
  return "0.1.0";
}

TM_API tm_status tm_scenario_load(const char *path, tm_scenario **out)
{
  if (!path || !out)
  {
    return missing("path and out");
  }
  *out = nullptr;
  return guarded([&] {
    *out = new tm_scenario{temarket::market::ScenarioConfig::from_file(path)};
  });
}

TM_API tm_status tm_scenario_load_json(const char *json, tm_scenario **out)
{
  if (!json || !out)
  {
    return missing("json and out");
  }
  *out = nullptr;
  return guarded([&] {
    nlohmann::ordered_json doc;
    try
    {
      doc = nlohmann::ordered_json::parse(json);
    }
    catch (nlohmann::ordered_json::parse_error const &e)
    {
      throw temarket::ConfigError("", e.what());
    }
    *out = new tm_scenario{temarket::market::ScenarioConfig::from_json(doc)};
  });
}

TM_API tm_status tm_scenario_validate(const tm_scenario *scenario)
{
  if (!scenario)
  {
    return missing("scenario");
  }
  return guarded([&] { scenario->config.validate(); });
}

TM_API void tm_scenario_free(tm_scenario *scenario)
{
  delete scenario;
}

TM_API tm_status tm_run(const tm_scenario *scenario, const tm_run_options *options,
                        tm_report **out)
{
  if (!scenario || !out)
  {
    return missing("scenario and out");
  }
  *out = nullptr;
  return guarded([&] {
    temarket::market::RunOptions opts;
    if (options)
    {
      opts.mode = options->mode == TM_MODE_TCP ? temarket::market::BusMode::kTcp
                                               : temarket::market::BusMode::kDeterministic;
      if (options->has_seed)
      {
        opts.seed = options->seed;
      }
    }
    *out = new tm_report{temarket::market::run_scenario(scenario->config, opts)};
  });
}

TM_API int tm_report_complete(const tm_report *report)
{
  return report && report->report.complete ? 1 : 0;
}

TM_API tm_status tm_report_write(const tm_report *report, const char *dir, int write_svg)
{
  if (!report || !dir)
  {
    return missing("report and dir");
  }
  return guarded([&] { report->report.write(dir, write_svg != 0); });
}

TM_API tm_status tm_report_summary_json(const tm_report *report, char **out)
{
  if (!report || !out)
  {
    return missing("report and out");
  }
  *out = nullptr;
  return guarded([&] { *out = duplicate(report->report.summary_json().dump(2)); });
}

TM_API tm_status tm_report_csv(const tm_report *report, char **out)
{
  if (!report || !out)
  {
    return missing("report and out");
  }
  *out = nullptr;
  return guarded([&] {
    std::ostringstream csv;
    report->report.write_csv(csv);
    *out = duplicate(csv.str());
  });
}

TM_API tm_status tm_report_messages_ndjson(const tm_report *report, char **out)
{
  if (!report || !out)
  {
    return missing("report and out");
  }
  *out = nullptr;
  return guarded([&] {
    std::ostringstream log;
    temarket::bus::write_ndjson(log, report->report.messages);
    *out = duplicate(log.str());
  });
}

TM_API void tm_report_free(tm_report *report)
{
  delete report;
}

TM_API tm_status tm_oracle(const char *kind, const char *instance_path, char **out_json)
{
  if (!kind || !instance_path || !out_json)
  {
    return missing("kind, instance_path and out_json");
  }
  *out_json = nullptr;
  return guarded([&] {
    *out_json = duplicate(temarket::oracle::run_instance_file(kind, instance_path).dump(2));
  });
}

TM_API tm_status tm_clear_auction_json(const char *instance_json, char **out_json)
{
  if (!instance_json || !out_json)
  {
    return missing("instance_json and out_json");
  }
  *out_json = nullptr;
  return guarded([&] {
    nlohmann::ordered_json doc;
    try
    {
      doc = nlohmann::ordered_json::parse(instance_json);
    }
    catch (nlohmann::ordered_json::parse_error const &e)
    {
      throw temarket::ConfigError("", e.what());
    }
    auto const inst = temarket::oracle::parse_auction_instance(doc);
    auto const result =
        temarket::auction::clear_spsba(inst.offers, inst.demand, inst.convention);
    *out_json = duplicate(temarket::oracle::result_to_json(result).dump());
  });
}

TM_API void tm_string_free(char *s)
{
  std::free(s);
}

}  // extern "C"
