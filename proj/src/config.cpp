#include "wot/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "wot/error.hpp"
#include "wot/risk.hpp"

namespace wot {

namespace {

const std::set<std::string> kMeasureKeys{"type", "point", "mean", "cov", "spot", "vol", "maturity", "x0", "sigma",
                                         "path"};
const std::set<std::string> kPayoffKeys{"type",      "k1",    "k2",    "strike",      "dim",
                                        "slope",     "intercept", "value", "coefficient", "bumps"};

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Coarse JSON kind used for type checks of user values against defaults.
int kind(const Json& v) {
  if (v.is_number()) return 0;
  if (v.is_string()) return 1;
  if (v.is_boolean()) return 2;
  if (v.is_array()) return 3;
  if (v.is_object()) return 4;
  return 5;
}

const char* kind_name(int k) {
  static const char* names[] = {"number", "string", "boolean", "array", "object", "null"};
  return names[k];
}

void merge_typed(Json& base, const Json& user, const std::string& path, const std::set<std::string>& allowed) {
  if (!user.is_object()) throw ConfigError(path + " must be an object");
  if (user.contains("type")) {
    if (!user["type"].is_string()) throw ConfigError(path + ".type must be a string");
    if (!base.contains("type") || base["type"] != user["type"]) base = Json::object();
  }
  for (const auto& [key, value] : user.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown config key: " + join(path, key));
    base[key] = value;
  }
}

void merge(Json& base, const Json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError((path.empty() ? std::string("config") : path) + " must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string here = join(path, key);
    if (!base.contains(key)) throw ConfigError("unknown config key: " + here);
    Json& slot = base[key];
    if (path.empty() && key == "measure") {
      merge_typed(slot, value, here, kMeasureKeys);
    } else if (path.empty() && key == "payoff") {
      merge_typed(slot, value, here, kPayoffKeys);
    } else if (slot.is_object()) {
      merge(slot, value, here);
    } else {
      if (!slot.is_null() && !value.is_null() && kind(slot) != kind(value))
        throw ConfigError("config key " + here + " expects type " + kind_name(kind(slot)) + ", got " +
                          kind_name(kind(value)));
      slot = value;
    }
  }
}

// Value text of a key=value line: JSON when it parses, a fraction a/b as a
// number, and a bare string otherwise.
Json parse_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error&) {
  }
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    try {
      std::size_t u1 = 0, u2 = 0;
      const std::string a = text.substr(0, slash), b = text.substr(slash + 1);
      const double num = std::stod(a, &u1);
      const double den = std::stod(b, &u2);
      if (u1 == a.size() && u2 == b.size() && den != 0.0) return num / den;
    } catch (const std::exception&) {
    }
  }
  return text;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

Json search_defaults(std::optional<double> floor) {
  const SearchConfig d;
  Json j = {{"starts", d.starts},
            {"radius0", d.radius0},
            {"max_radius_doublings", d.max_radius_doublings},
            {"step_tol", d.step_tol},
            {"grid_points", d.grid_points},
            {"p_clip", d.p_clip},
            {"max_evals", d.max_evals},
            {"floor", nullptr}};
  if (floor) j["floor"] = *floor;
  return j;
}

Json train_defaults(std::size_t eval_samples) {
  const TrainConfig d;
  return {{"epochs", d.epochs},     {"batch", d.batch}, {"hidden", d.hidden},
          {"width", d.width},       {"lr", d.learning_rate},
          {"activation", "relu"},   {"window", d.window}, {"eval_samples", eval_samples}};
}

Json axis(double lo, double hi, int n) { return Json::array({lo, hi, n}); }

// --- typed accessors -------------------------------------------------------

const Json& field(const Json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key) || j[key].is_null()) throw ConfigError(ctx + " needs '" + key + "'");
  return j[key];
}

double num(const Json& j, const std::string& key, const std::string& ctx) {
  const Json& v = field(j, key, ctx);
  if (!v.is_number()) throw ConfigError(ctx + "." + key + " must be a number");
  return v.get<double>();
}

int integer(const Json& j, const std::string& key, const std::string& ctx) {
  const Json& v = field(j, key, ctx);
  if (!v.is_number_integer()) throw ConfigError(ctx + "." + key + " must be an integer");
  return v.get<int>();
}

std::vector<double> vec(const Json& v, const std::string& ctx) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array() || v.empty()) throw ConfigError(ctx + " must be a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(ctx + " must contain numbers only");
    out.push_back(e.get<double>());
  }
  return out;
}

Eigen::VectorXd evec(const Json& v, const std::string& ctx) {
  const auto xs = vec(v, ctx);
  return Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

Eigen::MatrixXd mat(const Json& v, const std::string& ctx) {
  if (!v.is_array() || v.empty()) throw ConfigError(ctx + " must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  Eigen::Index cols = -1;
  Eigen::MatrixXd m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto row = vec(v[static_cast<std::size_t>(r)], ctx);
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(ctx + " has ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

void only_keys(const Json& spec, std::initializer_list<const char*> keys, const std::string& ctx) {
  for (const auto& [key, value] : spec.items()) {
    if (key == "type") continue;
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
      throw ConfigError("key '" + key + "' does not apply to " + ctx);
  }
}

// Re-throws library argument errors raised while building as config errors.
template <class F>
auto as_config(const std::string& ctx, F&& build) {
  try {
    return build();
  } catch (const ArgumentError& e) {
    throw ConfigError(ctx + ": " + e.what());
  }
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"earthquake", "bull-spread", "max-call", "dim-sweep",
                                              "ctransform-grid", "moment-bounds"};
  return names;
}

std::uint64_t ExperimentConfig::seed() const { return values["seed"].get<std::uint64_t>(); }
std::string ExperimentConfig::out_dir() const { return values["out"].get<std::string>(); }
bool ExperimentConfig::reproducible() const { return values["reproducible"].get<bool>(); }

Json experiment_defaults(const std::string& experiment) {
  Json j = {{"experiment", experiment}, {"seed", 1}, {"out", "out/" + experiment}, {"reproducible", false},
            {"threads", 0}};
  const Json bull = {{"type", "bull_spread"}, {"k1", 0.9}, {"k2", 1.2}};
  if (experiment == "earthquake") {
    j["measure"] = {{"type", "gaussian"}, {"mean", {0.75, 0.25}}, {"cov", {{1.0, 0.0}, {0.0, 1.0}}}};
    j["payoff"] = {{"type", "earthquake"},
                   {"bumps",
                    {{{"center", {0.0, 0.0}}, {"amplitude", 1.0}, {"width", 0.5}},
                     {{"center", {1.5, 0.5}}, {"amplitude", 0.6}, {"width", 0.3}}}}};
    j["cost"] = {{"p", 2.0}, {"t", nullptr}, {"scale", 1.0}};
    j["train"] = train_defaults(1'000'000);
    j["search"] = search_defaults(std::nullopt);
    j["grid"] = {{"axes", {axis(-2.0, 3.0, 101), axis(-2.0, 3.0, 101)}}};
  } else if (experiment == "bull-spread") {
    j["measure"] = {{"type", "lognormal"}, {"spot", {1.0}}, {"vol", 0.2}, {"maturity", 0.5}};
    j["payoff"] = bull;
    j["cost"] = {{"p", 3.0},
                 {"t_list", {1.0 / 52, 1.0 / 26, 1.0 / 12, 1.0 / 6, 1.0 / 4, 3.0 / 8, 1.0 / 2}},
                 {"transform_t", 1.0 / 12},
                 {"scale", 1.0}};
    j["method"] = "pointwise";
    j["samples"] = 100'000;
    j["train"] = train_defaults(100'000);
    j["search"] = search_defaults(0.0);
    j["grid"] = {{"axes", {axis(0.0, 3.0, 301)}}};
  } else if (experiment == "max-call") {
    j["measure"] = {{"type", "diffusion"}, {"x0", {1.0, 1.0}}, {"sigma", {{0.30, 0.0}, {0.05, 0.20}}},
                    {"maturity", 1.0}};
    j["payoff"] = {{"type", "max_call"}, {"strike", 1.0}};
    j["cost"] = {{"p", 3.0}, {"t", 1.0 / 12}, {"scale", 1.0}};
    j["samples"] = 20'000;
    j["train"] = train_defaults(1'000'000);
    j["search"] = search_defaults(std::nullopt);
    j["grid"] = {{"axes", {axis(0.5, 1.5, 41), axis(0.5, 1.5, 41)}}};
  } else if (experiment == "dim-sweep") {
    Json dims = Json::array();
    for (int d = 1; d <= 16; ++d) dims.push_back(d);
    j["sweep"] = {{"dims", dims},
                  {"options", {"max_call", "basket_call", "min_put", "geometric_put"}},
                  {"strike", 1.0},
                  {"spot", 1.0},
                  {"vol", 0.2},
                  {"correlation", 0.0},
                  {"maturity", 1.0}};
    j["cost"] = {{"p", 3.0}, {"t", 1.0 / 12}, {"scale", 1.0}};
    j["train"] = train_defaults(100'000);
  } else if (experiment == "ctransform-grid") {
    j["payoff"] = bull;
    j["regime"] = "martingale";
    j["method"] = "pointwise";
    j["cost"] = {{"p", 3.0}, {"t", 1.0 / 12}, {"scale", 1.0}};
    j["search"] = search_defaults(0.0);
    j["grid"] = {{"axes", {axis(0.0, 3.0, 301)}}};
  } else if (experiment == "moment-bounds") {
    const MomentOptions d;
    j["payoff"] = bull;
    j["moments"] = {{"x0", {1.0}},
                    {"lower", 0.0},
                    {"upper", 3.0},
                    {"instruments", Json::array()},
                    {"instruments_csv", nullptr},
                    {"starts", d.starts},
                    {"iterations_per_stage", d.iterations_per_stage},
                    {"penalty0", d.penalty0},
                    {"penalty_doublings", d.penalty_doublings},
                    {"learning_rate", d.learning_rate},
                    {"learning_rate_decay", d.learning_rate_decay},
                    {"tolerance", d.tolerance},
                    {"infeasible_threshold", d.infeasible_threshold}};
  } else {
    throw ConfigError("unknown experiment: " + experiment);
  }
  return j;
}

Json parse_config_text(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw ConfigError(std::string("invalid JSON config: ") + e.what());
    }
  }
  Json out = Json::object();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + " is not of the form key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + " has an empty key");
    Json* node = &out;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (part.empty()) throw ConfigError("config key '" + key + "' has an empty component");
      if (dot == std::string::npos) {
        if (node->contains(part)) throw ConfigError("config key '" + key + "' given twice");
        (*node)[part] = parse_value(value);
        break;
      }
      Json& child = (*node)[part];
      if (child.is_null()) child = Json::object();
      if (!child.is_object()) throw ConfigError("config key '" + key + "' conflicts with a scalar value");
      node = &child;
      start = dot + 1;
    }
  }
  return out;
}

Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ExperimentConfig resolve_config(const std::string& experiment, const Json& user, const RunOptions& opts) {
  Json values = experiment_defaults(experiment);
  if (user.contains("experiment") && user["experiment"] != experiment)
    throw ConfigError("config file is for experiment " + user["experiment"].dump() + ", not " + experiment);
  merge(values, user, "");
  if (opts.seed) values["seed"] = *opts.seed;
  if (opts.out) values["out"] = *opts.out;
  if (opts.reproducible) values["reproducible"] = true;
  if (opts.epochs) {
    if (*opts.epochs < 1) throw ConfigError("--epochs must be >= 1");
    if (!values.contains("train")) throw ConfigError("experiment " + experiment + " does not train a network");
    values["train"]["epochs"] = *opts.epochs;
  }
  if (values.contains("train")) {
    Json& t = values["train"];
    if (t["window"].is_number_integer() && t["epochs"].is_number_integer())
      t["window"] = std::min(t["window"].get<int>(), t["epochs"].get<int>());
  }
  if (!values["seed"].is_number_unsigned() && !(values["seed"].is_number_integer() && values["seed"].get<long long>() >= 0))
    throw ConfigError("seed must be a nonnegative integer");
  values["seed"] = values["seed"].get<std::uint64_t>();
  if (!values["threads"].is_number_integer() || values["threads"].get<int>() < 0)
    throw ConfigError("threads must be a nonnegative integer");

  // Validate every block now so that errors surface before any work starts.
  ExperimentConfig cfg{experiment, values};
  const std::uint64_t seed = cfg.seed();
  int dim = 1;
  if (values.contains("measure")) dim = build_measure(values["measure"]).dim();
  if (values.contains("grid")) {
    const auto axes = build_axes(values["grid"]);
    if (!values.contains("measure")) dim = static_cast<int>(axes.size());
  }
  if (values.contains("moments")) dim = static_cast<int>(evec(field(values["moments"], "x0", "moments"), "moments.x0").size());
  if (values.contains("payoff")) {
    const Payoff f = build_payoff(values["payoff"], dim);
    if (f.dim() != dim)
      throw ConfigError("payoff dimension " + std::to_string(f.dim()) + " does not match dimension " +
                        std::to_string(dim));
  }
  if (values.contains("cost")) build_cost(values["cost"]);
  if (values.contains("search")) build_search(values["search"]);
  if (values.contains("train")) build_train(values["train"], seed);
  if (values.contains("method")) as_config("method", [&] {
      if (!values["method"].is_string()) throw ArgumentError("must be a string");
      return parse_method(values["method"].get<std::string>());
    });
  if (values.contains("regime")) as_config("regime", [&] {
      if (!values["regime"].is_string()) throw ArgumentError("must be a string");
      return parse_regime(values["regime"].get<std::string>());
    });
  if (values.contains("samples") && (!values["samples"].is_number_integer() || values["samples"].get<long long>() < 2))
    throw ConfigError("samples must be an integer >= 2");
  if (values.contains("moments")) {
    build_moment_options(values["moments"], seed);
    build_instruments(values["moments"], dim);
  }
  if (values.contains("sweep")) {
    const Json& s = values["sweep"];
    for (const auto& d : s["dims"])
      if (!d.is_number_integer() || d.get<int>() < 1) throw ConfigError("sweep.dims must be positive integers");
    for (const auto& o : s["options"]) {
      if (!o.is_string()) throw ConfigError("sweep.options must be payoff names");
      build_payoff({{"type", o}, {"strike", 1.0}}, 2);
    }
    if (s["dims"].empty() || s["options"].empty()) throw ConfigError("sweep needs dims and options");
    const double rho = num(s, "correlation", "sweep");
    if (!(rho > -1.0 && rho < 1.0)) throw ConfigError("sweep.correlation must lie in (-1, 1)");
    if (!(num(s, "vol", "sweep") > 0.0) || !(num(s, "maturity", "sweep") > 0.0))
      throw ConfigError("sweep.vol and sweep.maturity must be positive");
    num(s, "strike", "sweep");
    num(s, "spot", "sweep");
  }
  if (values.contains("cost") && values["cost"].contains("t_list")) {
    const auto ts = vec(values["cost"]["t_list"], "cost.t_list");
    for (std::size_t i = 0; i < ts.size(); ++i)
      if (!(ts[i] > 0.0) || (i > 0 && !(ts[i] > ts[i - 1])))
        throw ConfigError("cost.t_list must be positive and strictly increasing");
    if (!(num(values["cost"], "transform_t", "cost") > 0.0)) throw ConfigError("cost.transform_t must be positive");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& experiment, const std::optional<std::string>& path,
                             const RunOptions& opts) {
  const Json user = path ? load_config_file(*path) : Json::object();
  return resolve_config(experiment, user, opts);
}

ReferenceMeasure build_measure(const Json& spec) {
  if (!spec.is_object()) throw ConfigError("measure must be an object");
  const std::string type = field(spec, "type", "measure").get<std::string>();
  const std::string ctx = "measure " + type;
  return as_config(ctx, [&] {
    if (type == "dirac") {
      only_keys(spec, {"point"}, ctx);
      return ReferenceMeasure::dirac(evec(field(spec, "point", ctx), ctx + ".point"));
    }
    if (type == "gaussian") {
      only_keys(spec, {"mean", "cov"}, ctx);
      return ReferenceMeasure::gaussian(evec(field(spec, "mean", ctx), ctx + ".mean"),
                                        mat(field(spec, "cov", ctx), ctx + ".cov"));
    }
    if (type == "lognormal") {
      only_keys(spec, {"spot", "vol", "maturity"}, ctx);
      return ReferenceMeasure::lognormal(evec(field(spec, "spot", ctx), ctx + ".spot"), num(spec, "vol", ctx),
                                         num(spec, "maturity", ctx));
    }
    if (type == "diffusion") {
      only_keys(spec, {"x0", "sigma", "maturity"}, ctx);
      return ReferenceMeasure::diffusion(evec(field(spec, "x0", ctx), ctx + ".x0"),
                                         mat(field(spec, "sigma", ctx), ctx + ".sigma"), num(spec, "maturity", ctx));
    }
    if (type == "empirical") {
      only_keys(spec, {"path"}, ctx);
      const Json& p = field(spec, "path", ctx);
      if (!p.is_string()) throw ConfigError(ctx + ".path must be a string");
      try {
        return ReferenceMeasure::empirical(load_points_csv(p.get<std::string>()));
      } catch (const IoError& e) {
        throw ConfigError(e.what());
      }
    }
    throw ConfigError("unknown measure type: " + type);
  });
}

Payoff build_payoff(const Json& spec, int dim) {
  if (!spec.is_object()) throw ConfigError("payoff must be an object");
  const Json& tj = field(spec, "type", "payoff");
  if (!tj.is_string()) throw ConfigError("payoff.type must be a string");
  const std::string type = tj.get<std::string>();
  const std::string ctx = "payoff " + type;
  const int d = spec.contains("dim") ? integer(spec, "dim", ctx) : dim;
  return as_config(ctx, [&] {
    if (type == "bull_spread") {
      only_keys(spec, {"k1", "k2"}, ctx);
      return Payoff::bull_spread(num(spec, "k1", ctx), num(spec, "k2", ctx));
    }
    if (type == "max_call" || type == "basket_call" || type == "min_put" || type == "geometric_put") {
      only_keys(spec, {"strike", "dim"}, ctx);
      const double k = num(spec, "strike", ctx);
      if (type == "max_call") return Payoff::max_call(k, d);
      if (type == "basket_call") return Payoff::basket_call(k, d);
      if (type == "min_put") return Payoff::min_put(k, d);
      return Payoff::geometric_put(k, d);
    }
    if (type == "affine") {
      only_keys(spec, {"slope", "intercept"}, ctx);
      const double b = spec.contains("intercept") ? num(spec, "intercept", ctx) : 0.0;
      return Payoff::affine(vec(field(spec, "slope", ctx), ctx + ".slope"), b);
    }
    if (type == "constant") {
      only_keys(spec, {"value", "dim"}, ctx);
      return Payoff::constant(num(spec, "value", ctx), d);
    }
    if (type == "quadratic") {
      only_keys(spec, {"coefficient", "dim"}, ctx);
      return Payoff::quadratic(num(spec, "coefficient", ctx), d);
    }
    if (type == "earthquake") {
      only_keys(spec, {"bumps"}, ctx);
      if (!spec.contains("bumps")) return Payoff::earthquake_default();
      const Json& bj = spec["bumps"];
      if (!bj.is_array() || bj.empty()) throw ConfigError(ctx + ".bumps must be a non-empty array");
      std::vector<Bump> bumps;
      for (const auto& b : bj) {
        if (!b.is_object()) throw ConfigError(ctx + ".bumps entries must be objects");
        for (const auto& [key, value] : b.items())
          if (key != "center" && key != "amplitude" && key != "width")
            throw ConfigError("key '" + key + "' does not apply to an earthquake bump");
        bumps.push_back({vec(field(b, "center", ctx), ctx + ".center"), num(b, "amplitude", ctx),
                         num(b, "width", ctx)});
      }
      return Payoff::earthquake(std::move(bumps));
    }
    throw ConfigError("unknown payoff type: " + type);
  });
}

CostSpec build_cost(const Json& spec) {
  const double p = num(spec, "p", "cost");
  std::optional<double> t;
  if (spec.contains("t") && !spec["t"].is_null()) t = num(spec, "t", "cost");
  const double scale = spec.contains("scale") ? num(spec, "scale", "cost") : 1.0;
  return as_config("cost", [&] { return CostSpec(p, t, scale); });
}

SearchConfig build_search(const Json& spec) {
  SearchConfig s;
  s.starts = integer(spec, "starts", "search");
  s.radius0 = num(spec, "radius0", "search");
  s.max_radius_doublings = integer(spec, "max_radius_doublings", "search");
  s.step_tol = num(spec, "step_tol", "search");
  s.grid_points = integer(spec, "grid_points", "search");
  s.p_clip = num(spec, "p_clip", "search");
  s.max_evals = integer(spec, "max_evals", "search");
  if (spec.contains("floor") && !spec["floor"].is_null()) s.floor = num(spec, "floor", "search");
  as_config("search", [&] {
    s.validate();
    return 0;
  });
  return s;
}

TrainConfig build_train(const Json& spec, std::uint64_t seed) {
  TrainConfig t;
  t.epochs = integer(spec, "epochs", "train");
  t.batch = integer(spec, "batch", "train");
  t.hidden = integer(spec, "hidden", "train");
  t.width = integer(spec, "width", "train");
  t.learning_rate = num(spec, "lr", "train");
  t.window = integer(spec, "window", "train");
  const Json& es = field(spec, "eval_samples", "train");
  if (!es.is_number_integer() || es.get<long long>() < 2) throw ConfigError("train.eval_samples must be an integer >= 2");
  t.eval_samples = es.get<std::size_t>();
  t.seed = seed;
  as_config("train", [&] {
    const Json& a = field(spec, "activation", "train");
    if (!a.is_string()) throw ArgumentError("activation must be a string");
    t.activation = parse_activation(a.get<std::string>());
    t.validate();
    return 0;
  });
  return t;
}

std::vector<GridAxis> build_axes(const Json& spec) {
  const Json& axes = field(spec, "axes", "grid");
  if (!axes.is_array() || axes.empty()) throw ConfigError("grid.axes must be a non-empty array of [min, max, count]");
  std::vector<GridAxis> out;
  for (const auto& a : axes) {
    if (!a.is_array() || a.size() != 3 || !a[0].is_number() || !a[1].is_number() || !a[2].is_number_integer())
      throw ConfigError("each grid axis must be [min, max, count]");
    GridAxis g{a[0].get<double>(), a[1].get<double>(), a[2].get<int>()};
    if (g.count < 1 || (g.count > 1 && !(g.max > g.min))) throw ConfigError("grid axis needs count >= 1 and max > min");
    out.push_back(g);
  }
  return out;
}

MomentOptions build_moment_options(const Json& spec, std::uint64_t seed) {
  MomentOptions o;
  o.starts = integer(spec, "starts", "moments");
  o.iterations_per_stage = integer(spec, "iterations_per_stage", "moments");
  o.penalty0 = num(spec, "penalty0", "moments");
  o.penalty_doublings = integer(spec, "penalty_doublings", "moments");
  o.learning_rate = num(spec, "learning_rate", "moments");
  o.learning_rate_decay = num(spec, "learning_rate_decay", "moments");
  o.tolerance = num(spec, "tolerance", "moments");
  o.infeasible_threshold = num(spec, "infeasible_threshold", "moments");
  o.seed = seed;
  as_config("moments", [&] {
    o.validate();
    return 0;
  });
  return o;
}

std::vector<Instrument> load_instruments_csv(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read instruments file: " + path);
  std::vector<Instrument> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (cells.size() != 4) throw ConfigError("instrument rows need name,strike,bid,ask: " + line);
    double vals[3];
    bool numeric = true;
    for (int k = 0; k < 3; ++k) {
      try {
        std::size_t used = 0;
        vals[k] = std::stod(cells[static_cast<std::size_t>(k + 1)], &used);
        if (used != cells[static_cast<std::size_t>(k + 1)].size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw ConfigError("non-numeric instrument row: " + line);
    }
    first = false;
    out.push_back({cells[0], as_config("instrument " + cells[0], [&] { return Payoff::basket_call(vals[0], dim); }),
                   vals[1], vals[2]});
  }
  return out;
}

std::vector<Instrument> build_instruments(const Json& spec, int dim) {
  std::vector<Instrument> out;
  const Json& list = field(spec, "instruments", "moments");
  if (!list.is_array()) throw ConfigError("moments.instruments must be an array");
  for (const auto& q : list) {
    if (!q.is_object()) throw ConfigError("moments.instruments entries must be objects");
    for (const auto& [key, value] : q.items())
      if (key != "name" && key != "strike" && key != "bid" && key != "ask")
        throw ConfigError("key '" + key + "' does not apply to an instrument");
    if (q.contains("name") && !q["name"].is_string()) throw ConfigError("instrument names must be strings");
    const std::string name = q.contains("name") ? q["name"].get<std::string>() : "call";
    const double k = num(q, "strike", "instrument");
    out.push_back({name, as_config("instrument " + name, [&] { return Payoff::basket_call(k, dim); }),
                   num(q, "bid", "instrument"), num(q, "ask", "instrument")});
  }
  if (spec.contains("instruments_csv") && !spec["instruments_csv"].is_null()) {
    if (!spec["instruments_csv"].is_string()) throw ConfigError("moments.instruments_csv must be a path");
    auto more = load_instruments_csv(spec["instruments_csv"].get<std::string>(), dim);
    out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  }
  for (const auto& inst : out)
    if (!(inst.bid >= 0.0) || !(inst.ask >= inst.bid))
      throw ConfigError("instrument " + inst.name + " needs 0 <= bid <= ask");
  return out;
}

}  // namespace wot
