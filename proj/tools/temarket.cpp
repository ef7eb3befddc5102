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

// Command-line front end over the C API.

#include "temarket/temarket.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>

namespace {

constexpr int kExitOk         = 0;
constexpr int kExitError      = 1;
constexpr int kExitInvalid    = 2;
constexpr int kExitIncomplete = 3;

struct ScenarioDeleter
{
  void operator()(tm_scenario *s) const { tm_scenario_free(s); }
};
struct ReportDeleter
{
  void operator()(tm_report *r) const { tm_report_free(r); }
};
struct StringDeleter
{
  void operator()(char *s) const { tm_string_free(s); }
};

using ScenarioPtr = std::unique_ptr<tm_scenario, ScenarioDeleter>;
using ReportPtr   = std::unique_ptr<tm_report, ReportDeleter>;
using StringPtr   = std::unique_ptr<char, StringDeleter>;

int report_failure(tm_status status)
{
  std::cerr << "temarket: " << tm_last_error() << '\n';
  return status == TM_E_CONFIG || status == TM_E_INVALID_ARGUMENT ? kExitInvalid : kExitError;
}

void print_summary(nlohmann::json const &s)
{
  std::cout << "scenario " << s["scenario"].get<std::string>() << " (" << s["mode"].get<std::string>()
            << ", seed " << s["seed"] << ", " << s["clearing"].get<std::string>() << ")\n";
  for (auto const &round : s["rounds"])
  {
    for (auto const &a : round["auctions"])
    {
      std::cout << "round " << round["round"] << " asker " << a["asker"].get<std::string>()
                << ": cleared " << a["equilibrium_quantity_kw"] << " kW";
      if (!a["equilibrium_price_cents"].is_null())
      {
        std::cout << " at " << a["equilibrium_price_cents"] << " c/kW";
      }
      std::cout << ", unserved " << a["unserved_kw"] << " kW\n";
      for (auto const &t : a["transactions"])
      {
        std::cout << "  " << t["bidder"].get<std::string>() << " " << t["cleared_quantity_kw"]
                  << " kW @ " << t["clearing_price_cents"] << " c/kW"
                  << (t["fallback_price"].get<bool>() ? " (reserve price)" : "") << '\n';
      }
    }
  }
  for (auto const &e : s["events"])
  {
    std::cout << "event: " << e.get<std::string>() << '\n';
  }
  if (!s["complete"].get<bool>())
  {
    std::cout << "run incomplete: " << s.value("error", std::string()) << '\n';
  }
}

int cmd_run(std::string const &scenario_path, std::string const &mode, std::optional<uint64_t> seed,
            std::string const &out_dir, bool svg, bool json)
{
  tm_scenario *raw = nullptr;
  tm_status    st  = tm_scenario_load(scenario_path.c_str(), &raw);
  ScenarioPtr  scenario(raw);
  if (st != TM_OK)
  {
    return report_failure(st);
  }
  tm_run_options opts{};
  opts.mode     = mode == "tcp" ? TM_MODE_TCP : TM_MODE_DETERMINISTIC;
  opts.has_seed = seed ? 1 : 0;
  opts.seed     = seed.value_or(0);

  tm_report *rep = nullptr;
  st             = tm_run(scenario.get(), &opts, &rep);
  ReportPtr report(rep);
  if (st != TM_OK)
  {
    return report_failure(st);
  }
  if (!out_dir.empty())
  {
    st = tm_report_write(report.get(), out_dir.c_str(), svg ? 1 : 0);
    if (st != TM_OK)
    {
      return report_failure(st);
    }
  }
  char *text = nullptr;
  st         = tm_report_summary_json(report.get(), &text);
  StringPtr summary(text);
  if (st != TM_OK)
  {
    return report_failure(st);
  }
  if (json)
  {
    std::cout << summary.get() << '\n';
  }
  else
  {
    print_summary(nlohmann::json::parse(summary.get()));
  }
  return tm_report_complete(report.get()) ? kExitOk : kExitIncomplete;
}

int cmd_validate(std::string const &scenario_path)
{
  tm_scenario *raw = nullptr;
  tm_status    st  = tm_scenario_load(scenario_path.c_str(), &raw);
  ScenarioPtr  scenario(raw);
  if (st != TM_OK)
  {
    return report_failure(st);
  }
  std::cout << scenario_path << ": ok\n";
  return kExitOk;
}

int cmd_oracle(std::string const &kind, std::string const &path)
{
  char     *text = nullptr;
  tm_status st   = tm_oracle(kind.c_str(), path.c_str(), &text);
  StringPtr out(text);
  if (st != TM_OK)
  {
    return report_failure(st);
  }
  std::cout << out.get() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Transactive energy market simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tm_version()));

  std::string             scenario_path;
  std::string             mode = "deterministic";
  std::optional<uint64_t> seed;
  std::string             out_dir;
  bool                    no_svg = false;
  bool                    json   = false;

  auto *run = app.add_subcommand("run", "Run every round of a scenario");
  run->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--mode", mode, "Bus transport")
      ->check(CLI::IsMember({"deterministic", "tcp"}));
  run->add_option("--seed", seed, "Overrides the scenario seed");
  run->add_option("--out", out_dir, "Directory for report.csv, messages.ndjson, audit.ndjson");
  run->add_flag("--no-svg", no_svg, "Skip the auction charts");
  run->add_flag("--json", json, "Print the summary as JSON");

  std::string validate_path;
  auto *validate = app.add_subcommand("validate", "Check a scenario file without running it");
  validate->add_option("--scenario", validate_path, "Scenario JSON file")->required();

  std::string oracle_kind;
  std::string oracle_path;
  auto *oracle = app.add_subcommand("oracle", "Cross-check an instance against brute force");
  oracle->add_option("kind", oracle_kind, "auction, mpo or mpc")
      ->required()
      ->check(CLI::IsMember({"auction", "mpo", "mpc"}));
  oracle->add_option("instance", oracle_path, "Instance JSON file")->required();

  try
  {
    app.parse(argc, argv);
  }
  catch (CLI::ParseError const &e)
  {
    int const code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  if (run->parsed())
  {
    return cmd_run(scenario_path, mode, seed, out_dir, !no_svg, json);
  }
  if (validate->parsed())
  {
    return cmd_validate(validate_path);
  }
  if (oracle->parsed())
  {
    return cmd_oracle(oracle_kind, oracle_path);
  }
  return kExitError;
}
