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

#ifndef TEMARKET_TEMARKET_H
#define TEMARKET_TEMARKET_H

#include <stdint.h>

#if defined(_WIN32)
#  if defined(TEMARKET_BUILDING_LIBRARY)
#    define TM_API __declspec(dllexport)
#  else
#    define TM_API __declspec(dllimport)
#  endif
#else
#  define TM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Values match temarket::ErrorCode. */
typedef enum tm_status
{
  TM_OK               = 0,
  TM_E_MODEL          = 1,
  TM_E_CONTROL_BOUNDS = 2,
  TM_E_RATE           = 3,
  TM_E_SOC_BOUNDS     = 4,
  TM_E_INFEASIBLE     = 5,
  TM_E_SOLVER         = 6,
  TM_E_CURVE          = 7,
  TM_E_CONFIG         = 8,
  TM_E_STATS          = 9,
  TM_E_INFEASIBLE_RORM = 10,
  TM_E_AUCTION        = 11,
  TM_E_AUTH           = 12,
  TM_E_SCHEMA         = 13,
  TM_E_STAGE_TIMEOUT  = 14,
  TM_E_PROTOCOL       = 15,
  TM_E_TRANSPORT      = 16,
  TM_E_INVALID_ARGUMENT = 17,
  TM_E_IO             = 18,
  TM_E_INTERNAL       = 99
} tm_status;

typedef enum tm_bus_mode
{
  TM_MODE_DETERMINISTIC = 0,
  TM_MODE_TCP           = 1
} tm_bus_mode;

typedef struct tm_scenario tm_scenario;
typedef struct tm_report   tm_report;

typedef struct tm_run_options
{
  tm_bus_mode mode;
  int         has_seed; /* nonzero: `seed` overrides the scenario seed */
  uint64_t    seed;
} tm_run_options;

/* Message describing the last failure on the calling thread. Never NULL. */
TM_API const char *tm_last_error(void);

TM_API const char *tm_version(void);

/* Scenario documents. */
TM_API tm_status tm_scenario_load(const char *path, tm_scenario **out);
TM_API tm_status tm_scenario_load_json(const char *json, tm_scenario **out);
TM_API tm_status tm_scenario_validate(const tm_scenario *scenario);
TM_API void      tm_scenario_free(tm_scenario *scenario);

/* Market runs. `options` may be NULL for a deterministic run. */
TM_API tm_status tm_run(const tm_scenario *scenario, const tm_run_options *options,
                        tm_report **out);
TM_API int       tm_report_complete(const tm_report *report);
TM_API tm_status tm_report_write(const tm_report *report, const char *dir, int write_svg);
TM_API tm_status tm_report_summary_json(const tm_report *report, char **out);
TM_API tm_status tm_report_csv(const tm_report *report, char **out);
TM_API tm_status tm_report_messages_ndjson(const tm_report *report, char **out);
TM_API void      tm_report_free(tm_report *report);

/* Brute-force cross-checks: kind is "auction", "mpo" or "mpc". */
TM_API tm_status tm_oracle(const char *kind, const char *instance_path, char **out_json);

/* Clears one auction instance document and returns the result as JSON. */
TM_API tm_status tm_clear_auction_json(const char *instance_json, char **out_json);

/* Frees strings returned through `char **` out-parameters. */
TM_API void tm_string_free(char *s);

#ifdef __cplusplus
}
#endif

#endif /* TEMARKET_TEMARKET_H */
