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

/* Exercises the C API from plain C: load, run, report, clear, and errors. */
#include "temarket/temarket.h"

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static int failures = 0;

#define CHECK(cond)                                                   \
  do                                                                  \
  {                                                                   \
    if (!(cond))                                                      \
    {                                                                 \
      fprintf(stderr, "%s:%d: check failed: %s (%s)\n", __FILE__,     \
              __LINE__, #cond, tm_last_error());                      \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

static char *slurp(const char *path)
{
  FILE *f = fopen(path, "rb");
  char *buf;
  long  n;
  if (!f)
  {
    return NULL;
  }
  fseek(f, 0, SEEK_END);
  n = ftell(f);
  fseek(f, 0, SEEK_SET);
  buf = malloc((size_t)n + 1);
  if (buf && fread(buf, 1, (size_t)n, f) != (size_t)n)
  {
    free(buf);
    buf = NULL;
  }
  if (buf)
  {
    buf[n] = '\0';
  }
  fclose(f);
  return buf;
}

int main(int argc, char **argv)
{
  tm_scenario   *scenario = NULL;
  tm_report     *report   = NULL;
  tm_run_options opts;
  char          *text     = NULL;
  char          *instance = NULL;

  if (argc != 3)
  {
    fprintf(stderr, "usage: %s SCENARIO AUCTION_INSTANCE\n", argv[0]);
    return 2;
  }
  CHECK(strlen(tm_version()) > 0);

  CHECK(tm_scenario_load(argv[1], &scenario) == TM_OK);
  CHECK(tm_scenario_validate(scenario) == TM_OK);

  memset(&opts, 0, sizeof opts);
  opts.mode     = TM_MODE_DETERMINISTIC;
  opts.has_seed = 1;
  opts.seed     = 42;
  CHECK(tm_run(scenario, &opts, &report) == TM_OK);
  CHECK(tm_report_complete(report) == 1);

  CHECK(tm_report_summary_json(report, &text) == TM_OK);
  CHECK(text && strstr(text, "\"seed\": 42") != NULL);
  tm_string_free(text);
  text = NULL;

  CHECK(tm_report_csv(report, &text) == TM_OK);
  CHECK(text && strncmp(text, "round,asker,kind", 16) == 0);
  tm_string_free(text);
  text = NULL;

  CHECK(tm_report_messages_ndjson(report, &text) == TM_OK);
  CHECK(text && strstr(text, "market/demand-bid/A1/broadcast") != NULL);
  tm_string_free(text);
  text = NULL;

  instance = slurp(argv[2]);
  CHECK(instance != NULL);
  if (instance)
  {
    CHECK(tm_clear_auction_json(instance, &text) == TM_OK);
    CHECK(text && strstr(text, "\"bidder\":\"B1\"") != NULL);
    tm_string_free(text);
    text = NULL;
    free(instance);
  }

  CHECK(tm_oracle("auction", argv[2], &text) == TM_OK);
  CHECK(text && strstr(text, "\"match\": true") != NULL);
  tm_string_free(text);
  text = NULL;

  /* Error paths leave outputs NULL and set a message. */
  tm_report_free(report);
  report = NULL;
  tm_scenario_free(scenario);
  scenario = NULL;
  CHECK(tm_scenario_load_json("{\"rounds\": 0}", &scenario) == TM_E_CONFIG);
  CHECK(scenario == NULL);
  CHECK(strstr(tm_last_error(), "rounds") != NULL);
  CHECK(tm_scenario_load_json("not json", &scenario) == TM_E_CONFIG);
  CHECK(tm_scenario_load("/nonexistent/scenario.json", &scenario) == TM_E_IO);
  CHECK(tm_run(NULL, NULL, &report) == TM_E_INVALID_ARGUMENT);
  CHECK(report == NULL);
  CHECK(tm_oracle("lottery", argv[2], &text) == TM_E_CONFIG);
  CHECK(text == NULL);
  tm_string_free(NULL);
  tm_report_free(NULL);
  tm_scenario_free(NULL);

  if (failures)
  {
    fprintf(stderr, "%d checks failed\n", failures);
    return 1;
  }
  printf("C API smoke test passed\n");
  return 0;
}
