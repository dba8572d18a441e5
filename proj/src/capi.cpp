#include "pdqkd/pdqkd.h"

#include <new>
#include <stdexcept>
#include <string>

#include "errors.hpp"
#include "runner.hpp"
#include "scenario.hpp"

struct pdq_scenario {
  pdqkd::scenario::Scenario sc;
};

struct pdq_result {
  std::string csv;
  std::string json;
  double value = 0.0;
  bool has_csv = false;
};

namespace {

thread_local std::string g_last_error;

pdq_status fail(pdq_status code, const char* what) {
  g_last_error = what ? what : "unknown error";
  return code;
}

template <typename Fn>
pdq_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const pdqkd::ConfigError& e) {
    return fail(PDQ_ERR_INVALID_CONFIG, e.what());
  } catch (const pdqkd::NonConvergenceError& e) {
    return fail(PDQ_ERR_NONCONVERGENCE, e.what());
  } catch (const pdqkd::CutoffError& e) {
    return fail(PDQ_ERR_NONCONVERGENCE, e.what());
  } catch (const pdqkd::EstimationError& e) {
    return fail(PDQ_ERR_ESTIMATION, e.what());
  } catch (const std::domain_error& e) {
    return fail(PDQ_ERR_DOMAIN, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PDQ_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PDQ_ERR_INTERNAL, e.what());
  }
}

}  // namespace

extern "C" {

const char* pdq_version(void) { return "1.0.0"; }

const char* pdq_last_error(void) { return g_last_error.c_str(); }

pdq_status pdq_scenario_create(const char* scheme, pdq_scenario** out) {
  if (!out) return fail(PDQ_ERR_INVALID_CONFIG, "null output handle");
  *out = nullptr;
  return guarded([&]() {
    const auto kind = pdqkd::scenario::scheme_from_string(
        scheme ? scheme : "wcp-threshold");
    *out = new pdq_scenario{pdqkd::scenario::make_default(kind)};
    return PDQ_OK;
  });
}

pdq_status pdq_scenario_parse(const char* config_text, pdq_scenario** out) {
  if (!out || !config_text)
    return fail(PDQ_ERR_INVALID_CONFIG, "null argument");
  *out = nullptr;
  return guarded([&]() {
    *out = new pdq_scenario{pdqkd::scenario::parse_scenario(config_text)};
    return PDQ_OK;
  });
}

pdq_status pdq_scenario_load(const char* path, pdq_scenario** out) {
  if (!out || !path) return fail(PDQ_ERR_INVALID_CONFIG, "null argument");
  *out = nullptr;
  return guarded([&]() {
    *out = new pdq_scenario{pdqkd::scenario::load_scenario(path)};
    return PDQ_OK;
  });
}

pdq_status pdq_scenario_set(pdq_scenario* sc, const char* key,
                            const char* value) {
  if (!sc || !key || !value)
    return fail(PDQ_ERR_INVALID_CONFIG, "null argument");
  return guarded([&]() {
    pdqkd::scenario::apply_override(sc->sc, key, value);
    sc->sc.validate();
    return PDQ_OK;
  });
}

void pdq_scenario_free(pdq_scenario* sc) { delete sc; }

pdq_status pdq_run_sweep(const pdq_scenario* sc, pdq_result** out) {
  if (!sc || !out) return fail(PDQ_ERR_INVALID_CONFIG, "null argument");
  *out = nullptr;
  return guarded([&]() {
    const auto sweep = pdqkd::runner::run_sweep(sc->sc);
    auto* res = new pdq_result;
    res->csv = sweep.to_csv();
    res->has_csv = true;
    res->json = sweep.json.dump(2);
    res->value = double(sweep.rows.size());
    *out = res;
    return PDQ_OK;
  });
}

pdq_status pdq_run_cutoff(const pdq_scenario* sc, pdq_result** out) {
  if (!sc || !out) return fail(PDQ_ERR_INVALID_CONFIG, "null argument");
  *out = nullptr;
  return guarded([&]() {
    const auto cutoff = pdqkd::runner::run_cutoff(sc->sc);
    auto* res = new pdq_result;
    res->json = cutoff.json.dump(2);
    res->value = cutoff.found ? cutoff.distance_km : -1.0;
    *out = res;
    return PDQ_OK;
  });
}

pdq_status pdq_run_optimize(const pdq_scenario* sc, double distance_km,
                            pdq_result** out) {
  if (!sc || !out) return fail(PDQ_ERR_INVALID_CONFIG, "null argument");
  *out = nullptr;
  return guarded([&]() {
    const auto opt = pdqkd::runner::run_optimize(sc->sc, distance_km);
    auto* res = new pdq_result;
    res->json = opt.json.dump(2);
    res->value = opt.point.rate;
    *out = res;
    return PDQ_OK;
  });
}

pdq_status pdq_run_verify(const pdq_scenario* sc, pdq_result** out) {
  if (!sc || !out) return fail(PDQ_ERR_INVALID_CONFIG, "null argument");
  *out = nullptr;
  return guarded([&]() {
    const auto verify = pdqkd::runner::run_verify(sc->sc);
    auto* res = new pdq_result;
    res->json = verify.json.dump(2);
    res->value = verify.pass ? 1.0 : 0.0;
    *out = res;
    if (!verify.pass)
      return fail(PDQ_ERR_VERIFICATION, "verification checks failed");
    return PDQ_OK;
  });
}

const char* pdq_result_csv(const pdq_result* res) {
  return res && res->has_csv ? res->csv.c_str() : nullptr;
}

const char* pdq_result_json(const pdq_result* res) {
  return res ? res->json.c_str() : nullptr;
}

double pdq_result_value(const pdq_result* res) {
  return res ? res->value : 0.0;
}

void pdq_result_free(pdq_result* res) { delete res; }

}  // extern "C"
