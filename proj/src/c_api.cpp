#include "wot/wot.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <string>

#include "wot/black_scholes.hpp"
#include "wot/config.hpp"
#include "wot/error.hpp"
#include "wot/experiments.hpp"
#include "wot/risk.hpp"

struct wot_measure {
  wot::ReferenceMeasure value;
};

struct wot_payoff {
  wot::Payoff value;
};

namespace {

thread_local std::string g_last_error;

wot_status fail(wot_status code, const char* what) {
  g_last_error = what;
  return code;
}

// Runs body and converts exceptions into status codes.
template <class F>
wot_status guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return WOT_OK;
  } catch (const wot::Error& e) {
    return fail(static_cast<wot_status>(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(WOT_ERR_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(WOT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(WOT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(WOT_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw wot::ArgumentError(what);
}

wot::CostSpec to_cost(const wot_cost& c) {
  return wot::CostSpec(c.power, c.timescale > 0.0 ? std::optional<double>(c.timescale) : std::nullopt, c.scale);
}

wot::SearchConfig to_search(const wot_search* s) {
  wot::SearchConfig cfg;
  if (!s) return cfg;
  cfg.starts = s->starts;
  cfg.radius0 = s->radius0;
  cfg.max_radius_doublings = s->max_radius_doublings;
  cfg.step_tol = s->step_tol;
  cfg.grid_points = s->grid_points;
  cfg.p_clip = s->p_clip;
  cfg.max_evals = s->max_evals;
  if (s->has_floor) cfg.floor = s->floor;
  return cfg;
}

wot::Regime to_regime(wot_regime r) {
  require(r == WOT_UNCONSTRAINED || r == WOT_MARTINGALE, "unknown regime");
  return r == WOT_UNCONSTRAINED ? wot::Regime::unconstrained : wot::Regime::martingale;
}

wot::Json parse_json(const char* text) {
  require(text != nullptr, "JSON text is null");
  try {
    return wot::Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw wot::ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

void put(wot_estimate* out, const wot::RhoEstimate& e) {
  out->value = e.value;
  out->std_error = e.std_error;
  out->samples = e.samples;
  out->seed = e.seed;
}

}  // namespace

extern "C" {

const char* wot_last_error(void) { return g_last_error.c_str(); }

const char* wot_version(void) { return "0.1.0"; }

void wot_search_defaults(wot_search* out) {
  if (!out) return;
  const wot::SearchConfig d;
  *out = {d.starts, d.radius0, d.max_radius_doublings, d.step_tol, d.grid_points, d.p_clip, d.max_evals, 0, 0.0};
}

void wot_train_defaults(wot_train* out) {
  if (!out) return;
  const wot::TrainConfig d;
  *out = {d.epochs, d.batch, d.hidden, d.width, d.learning_rate, d.seed, d.eval_samples};
}

void wot_run_options_defaults(wot_run_options* out) {
  if (!out) return;
  *out = {0, 0, nullptr, 0, 0};
}

wot_status wot_measure_create(const char* json, wot_measure** out) {
  return guard([&] {
    require(out != nullptr, "output pointer is null");
    *out = nullptr;
    const wot::Json spec = parse_json(json);
    *out = new wot_measure{wot::build_measure(spec)};
  });
}

void wot_measure_free(wot_measure* m) { delete m; }

int wot_measure_dim(const wot_measure* m) { return m ? m->value.dim() : 0; }

wot_status wot_measure_sample(const wot_measure* m, size_t n, uint64_t seed, double* out) {
  return guard([&] {
    require(m && out, "null argument");
    const wot::Samples xs = m->value.sample(n, seed);
    std::memcpy(out, xs.data(), sizeof(double) * static_cast<std::size_t>(xs.size()));
  });
}

wot_status wot_payoff_create(const char* json, int dim, wot_payoff** out) {
  return guard([&] {
    require(out != nullptr, "output pointer is null");
    *out = nullptr;
    const wot::Json spec = parse_json(json);
    *out = new wot_payoff{wot::build_payoff(spec, dim)};
  });
}

void wot_payoff_free(wot_payoff* f) { delete f; }

int wot_payoff_dim(const wot_payoff* f) { return f ? f->value.dim() : 0; }

wot_status wot_payoff_eval(const wot_payoff* f, const double* x, size_t dim, double* out) {
  return guard([&] {
    require(f && x && out, "null argument");
    *out = f->value.eval(std::span<const double>(x, dim));
  });
}

wot_status wot_payoff_grad(const wot_payoff* f, const double* x, size_t dim, double* out) {
  return guard([&] {
    require(f && x && out, "null argument");
    f->value.grad(std::span<const double>(x, dim), std::span<double>(out, dim));
  });
}

wot_status wot_ctransform(const wot_payoff* f, wot_cost cost, wot_regime regime, const double* x, size_t dim,
                          const wot_search* search, double* out) {
  return guard([&] {
    require(f && x && out, "null argument");
    *out = wot::ctrans(f->value, to_cost(cost), to_regime(regime), std::span<const double>(x, dim),
                       to_search(search));
  });
}

wot_status wot_rho_pointwise(const wot_measure* m, const wot_payoff* f, wot_cost cost, wot_regime regime, size_t n,
                             uint64_t seed, const wot_search* search, wot_estimate* out) {
  return guard([&] {
    require(m && f && out, "null argument");
    put(out, wot::rho_pointwise(m->value, f->value, to_cost(cost), to_regime(regime), n, seed, to_search(search)));
  });
}

wot_status wot_rho_network(const wot_measure* m, const wot_payoff* f, wot_cost cost, wot_regime regime,
                           const wot_train* train, wot_estimate* out) {
  return guard([&] {
    require(m && f && out, "null argument");
    wot::TrainConfig tc;
    if (train) {
      tc.epochs = train->epochs;
      tc.batch = train->batch;
      tc.hidden = train->hidden;
      tc.width = train->width;
      tc.learning_rate = train->learning_rate;
      tc.seed = train->seed;
      tc.eval_samples = train->eval_samples;
      tc.window = std::min(tc.window, tc.epochs);
    }
    put(out, wot::rho_network(m->value, f->value, to_cost(cost), to_regime(regime), tc));
  });
}

wot_status wot_price_bounds(const wot_measure* m, const wot_payoff* f, double p, double t, double scale, size_t n,
                            uint64_t seed, const wot_search* search, wot_bounds* out) {
  return guard([&] {
    require(m && f && out, "null argument");
    wot::BoundsOptions opts;
    opts.samples = n;
    opts.seed = seed;
    opts.scale = scale;
    opts.search = to_search(search);
    const wot::PriceBounds b = wot::price_bounds(m->value, f->value, p, t, opts);
    *out = {b.t, b.lower, b.lower_se, b.reference, b.reference_se, b.upper, b.upper_se};
  });
}

double wot_bs_call(double spot, double strike, double vol, double maturity) {
  return wot::bs_call(spot, strike, vol, maturity);
}

wot_status wot_run_experiment(const char* experiment, const char* config_path, const wot_run_options* options,
                              char** summary) {
  int exit_code = 0;
  const wot_status st = guard([&] {
    if (summary) *summary = nullptr;
    if (!experiment) throw wot::ConfigError("experiment name is null");
    wot::RunOptions ro;
    if (options) {
      if (options->has_seed) ro.seed = options->seed;
      if (options->out_dir) ro.out = std::string(options->out_dir);
      ro.reproducible = options->reproducible != 0;
      if (options->epochs > 0) ro.epochs = options->epochs;
    }
    const auto path = config_path ? std::optional<std::string>(config_path) : std::nullopt;
    const wot::ExperimentConfig cfg = wot::load_config(experiment, path, ro);
    const wot::RunResult res = wot::run_experiment(cfg);
    exit_code = res.exit_code;
    if (summary) {
      const std::string text = res.summary.dump(2);
      char* buf = static_cast<char*>(std::malloc(text.size() + 1));
      if (!buf) throw std::bad_alloc();
      std::memcpy(buf, text.c_str(), text.size() + 1);
      *summary = buf;
    }
  });
  if (st == WOT_OK && exit_code == WOT_ERR_INFEASIBLE)
    return fail(WOT_ERR_INFEASIBLE, "no model matches the quoted prices");
  if (st == WOT_OK && exit_code == WOT_ERR_NUMERICAL)
    return fail(WOT_ERR_NUMERICAL, "optimizer found no feasible certificate");
  return st;
}

void wot_string_free(char* s) { std::free(s); }

}  // extern "C"
