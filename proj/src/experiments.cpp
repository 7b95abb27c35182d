#include "wot/experiments.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "wot/black_scholes.hpp"
#include "wot/csv.hpp"
#include "wot/error.hpp"
#include "wot/parallel.hpp"
#include "wot/risk.hpp"

namespace wot {

namespace fs = std::filesystem;

namespace {

// Prepares the output directory and the thread pool for one run.
std::string prepare(const ExperimentConfig& cfg) {
  const std::string out = cfg.out_dir();
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out + ": " + ec.message());
  set_thread_count(cfg.reproducible() ? 1u : cfg.values["threads"].get<unsigned>());
  return out;
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

Json estimate_json(double value, double se) { return {{"estimate", value}, {"std_error", se}}; }

}  // namespace

ReferenceMeasure equicorrelated_diffusion(int d, double spot, double vol, double correlation, double maturity) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Constant(d, d, correlation);
  r.diagonal().setOnes();
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) throw ArgumentError("correlation matrix is not positive definite");
  const Eigen::MatrixXd sigma = vol * Eigen::MatrixXd(llt.matrixL());
  return ReferenceMeasure::diffusion(Eigen::VectorXd::Constant(d, spot), sigma, maturity);
}

RunResult run_earthquake(const ExperimentConfig& cfg) {
  const std::string out = prepare(cfg);
  const Json& v = cfg.values;
  const ReferenceMeasure mu = build_measure(v["measure"]);
  const Payoff f = build_payoff(v["payoff"], mu.dim());
  const CostSpec cost = build_cost(v["cost"]);
  const TrainConfig tc = build_train(v["train"], cfg.seed());
  const SearchConfig search = build_search(v["search"]);
  const auto axes = build_axes(v["grid"]);
  if (axes.size() != static_cast<std::size_t>(mu.dim())) throw ConfigError("grid.axes must match the measure dimension");

  TrainReport rep;
  const RhoEstimate rho = rho_network(mu, f, cost, Regime::unconstrained, tc, &rep);
  const RhoEstimate ref = reference_value(mu, f, rep.eval_samples, rep.eval_seed);
  RunResult res;
  res.files.push_back(path_in(out, "training_curve.csv"));
  write_training_csv(res.files.back(), rep.raw, rep.moving_average);

  const CTransformGrid grid = ctrans_grid(f, cost, Regime::unconstrained, axes, search);
  res.files.push_back(path_in(out, "surface.csv"));
  write_surface_csv(res.files.back(), grid);
  res.files.push_back(path_in(out, "surface_network.csv"));
  write_surface_csv(res.files.back(), grid.points, grid.payoff,
                    network_transform(Regime::unconstrained, rep.net, f, cost, grid.points));
  res.files.push_back(path_in(out, "network.txt"));
  rep.net.save(res.files.back());

  res.summary = {{"experiment", cfg.experiment},
                 {"method", "network"},
                 {"regime", "unconstrained"},
                 {"estimate", rho.value},
                 {"std_error", rho.std_error},
                 {"eval_samples", rho.samples},
                 {"eval_seed", rho.seed},
                 {"seed", cfg.seed()},
                 {"reference", estimate_json(ref.value, ref.std_error)},
                 {"final_moving_average", rep.moving_average.empty() ? 0.0 : rep.moving_average.back()},
                 {"config", v}};
  res.files.push_back(path_in(out, "rho.json"));
  write_json(res.files.back(), res.summary);
  return res;
}

RunResult run_bull_spread(const ExperimentConfig& cfg) {
  const std::string out = prepare(cfg);
  const Json& v = cfg.values;
  const ReferenceMeasure mu = build_measure(v["measure"]);
  const Payoff f = build_payoff(v["payoff"], mu.dim());
  const Json& c = v["cost"];
  const double p = c["p"].get<double>();
  const double scale = c["scale"].get<double>();
  const auto t_list = c["t_list"].get<std::vector<double>>();

  BoundsOptions opts;
  opts.method = parse_method(v["method"].get<std::string>());
  opts.samples = v["samples"].get<std::size_t>();
  opts.seed = cfg.seed();
  opts.scale = scale;
  opts.search = build_search(v["search"]);
  opts.train = build_train(v["train"], cfg.seed());

  RunResult res;
  const std::vector<PriceBounds> rows = bounds_curve(mu, f, p, t_list, opts);
  res.files.push_back(path_in(out, "bounds.csv"));
  write_bounds_csv(res.files.back(), rows);

  const double t_star = c["transform_t"].get<double>();
  const CostSpec cost(p, t_star, scale);
  const CTransformGrid grid = ctrans_grid(f, cost, Regime::martingale, build_axes(v["grid"]), opts.search);
  res.files.push_back(path_in(out, "ctransform.csv"));
  write_surface_csv(res.files.back(), grid);

  Json table = Json::array();
  for (const auto& r : rows)
    table.push_back({{"t", r.t},
                     {"lower", r.lower},
                     {"lower_se", r.lower_se},
                     {"reference", r.reference},
                     {"reference_se", r.reference_se},
                     {"upper", r.upper},
                     {"upper_se", r.upper_se}});
  res.summary = {{"experiment", cfg.experiment}, {"method", to_string(opts.method)}, {"seed", cfg.seed()},
                 {"bounds", table}, {"config", v}};
  // Closed-form reference for the default lognormal marginal and spread.
  if (const auto* ln = std::get_if<LogNormalMeasure>(&mu.variant()); ln && ln->spot.size() == 1) {
    if (const auto* bs = std::get_if<BullSpread>(&f.variant())) {
      const double s0 = ln->spot(0);
      res.summary["black_scholes_reference"] =
          bs_call(s0, bs->k1, ln->vol, ln->maturity) - bs_call(s0, bs->k2, ln->vol, ln->maturity);
    }
  }
  res.files.push_back(path_in(out, "bounds.json"));
  write_json(res.files.back(), res.summary);
  return res;
}

RunResult run_max_call(const ExperimentConfig& cfg) {
  const std::string out = prepare(cfg);
  const Json& v = cfg.values;
  const ReferenceMeasure mu = build_measure(v["measure"]);
  const Payoff f = build_payoff(v["payoff"], mu.dim());
  const CostSpec cost = build_cost(v["cost"]);
  const TrainConfig tc = build_train(v["train"], cfg.seed());
  const SearchConfig search = build_search(v["search"]);
  const auto axes = build_axes(v["grid"]);
  if (axes.size() != static_cast<std::size_t>(mu.dim())) throw ConfigError("grid.axes must match the measure dimension");

  TrainReport rep;
  const RhoEstimate net = rho_network(mu, f, cost, Regime::martingale, tc, &rep);
  // The pointwise sample is a prefix of the network's evaluation sample.
  const std::size_t n = v["samples"].get<std::size_t>();
  const RhoEstimate pw = rho_pointwise(mu, f, cost, Regime::martingale, n, rep.eval_seed, search);
  const RhoEstimate ref = reference_value(mu, f, rep.eval_samples, rep.eval_seed);

  RunResult res;
  const auto points = tensor_grid(axes);
  std::vector<double> payoff(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) payoff[i] = f.eval(points[i]);
  res.files.push_back(path_in(out, "surface_payoff.csv"));
  write_surface_csv(res.files.back(), points, payoff, network_transform(Regime::martingale, rep.net, f, cost, points));
  const CTransformGrid grid = ctrans_grid(f, cost, Regime::martingale, axes, search);
  res.files.push_back(path_in(out, "surface_ctransform.csv"));
  write_surface_csv(res.files.back(), grid);
  res.files.push_back(path_in(out, "training_curve.csv"));
  write_training_csv(res.files.back(), rep.raw, rep.moving_average);

  res.summary = {{"experiment", cfg.experiment},
                 {"regime", "martingale"},
                 {"seed", cfg.seed()},
                 {"network", {{"estimate", net.value}, {"std_error", net.std_error}, {"samples", net.samples}}},
                 {"pointwise", {{"estimate", pw.value}, {"std_error", pw.std_error}, {"samples", pw.samples}}},
                 {"reference", estimate_json(ref.value, ref.std_error)},
                 {"eval_seed", rep.eval_seed},
                 {"config", v}};
  res.files.push_back(path_in(out, "rho.json"));
  write_json(res.files.back(), res.summary);
  return res;
}

RunResult run_dim_sweep(const ExperimentConfig& cfg) {
  const std::string out = prepare(cfg);
  const Json& v = cfg.values;
  const Json& s = v["sweep"];
  const CostSpec cost = build_cost(v["cost"]);
  const TrainConfig tc = build_train(v["train"], cfg.seed());
  const double strike = s["strike"].get<double>();

  RunResult res;
  std::vector<DimSweepRow> rows;
  Json table = Json::array();
  for (const auto& dj : s["dims"]) {
    const int d = dj.get<int>();
    const ReferenceMeasure mu = equicorrelated_diffusion(d, s["spot"].get<double>(), s["vol"].get<double>(),
                                                         s["correlation"].get<double>(), s["maturity"].get<double>());
    for (const auto& oj : s["options"]) {
      const std::string option = oj.get<std::string>();
      const Payoff f = build_payoff({{"type", option}, {"strike", strike}}, d);
      TrainReport rep;
      const RhoEstimate up = rho_network(mu, f, cost, Regime::martingale, tc, &rep);
      const RhoEstimate ref = reference_value(mu, f, rep.eval_samples, rep.eval_seed);
      rows.push_back({d, option, up.value, up.std_error, rep.train_seconds});
      table.push_back({{"d", d},
                       {"option", option},
                       {"upper", up.value},
                       {"se", up.std_error},
                       {"reference", ref.value},
                       {"reference_se", ref.std_error}});
    }
  }
  res.files.push_back(path_in(out, "dim_sweep.csv"));
  write_dim_sweep_csv(res.files.back(), rows);
  res.summary = {{"experiment", cfg.experiment}, {"seed", cfg.seed()}, {"rows", table}, {"config", v}};
  res.files.push_back(path_in(out, "dim_sweep.json"));
  write_json(res.files.back(), res.summary);
  return res;
}

RunResult run_ctransform_grid(const ExperimentConfig& cfg) {
  const std::string out = prepare(cfg);
  const Json& v = cfg.values;
  const auto axes = build_axes(v["grid"]);
  const Payoff f = build_payoff(v["payoff"], static_cast<int>(axes.size()));
  const CostSpec cost = build_cost(v["cost"]);
  const Regime regime = parse_regime(v["regime"].get<std::string>());
  const std::string m = v["method"].get<std::string>();
  TransformMethod method;
  if (m == "pointwise") method = TransformMethod::pointwise;
  else if (m == "oracle") method = TransformMethod::oracle;
  else throw ConfigError("ctransform-grid method must be pointwise or oracle");

  const CTransformGrid grid = ctrans_grid(f, cost, regime, axes, build_search(v["search"]), method);
  RunResult res;
  res.files.push_back(path_in(out, "surface.csv"));
  write_surface_csv(res.files.back(), grid);
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.values.size(); ++i) min_gap = std::min(min_gap, grid.values[i] - grid.payoff[i]);
  res.summary = {{"experiment", cfg.experiment},
                 {"points", grid.points.size()},
                 {"method", to_string(grid.method)},
                 {"regime", to_string(grid.regime)},
                 {"payoff", grid.payoff_id},
                 {"cost", grid.cost_id},
                 {"min_transform_minus_payoff", min_gap},
                 {"config", v}};
  res.files.push_back(path_in(out, "ctransform_grid.json"));
  write_json(res.files.back(), res.summary);
  return res;
}

namespace {

Json candidate_json(const AtomicCandidate& c) {
  return {{"objective", c.objective},
          {"mean_residual", c.mean_residual},
          {"interval_violation", c.interval_violation},
          {"weight_residual", c.weight_residual},
          {"atoms", c.atoms},
          {"weights", c.weights}};
}

}  // namespace

RunResult run_moment_bounds(const ExperimentConfig& cfg) {
  const std::string out = prepare(cfg);
  const Json& v = cfg.values;
  const Json& m = v["moments"];
  MomentProblem pb;
  const auto x0 = m["x0"].is_number() ? std::vector<double>{m["x0"].get<double>()} : m["x0"].get<std::vector<double>>();
  pb.x0 = Eigen::Map<const Eigen::VectorXd>(x0.data(), static_cast<Eigen::Index>(x0.size()));
  pb.instruments = build_instruments(m, pb.dim());
  pb.target = build_payoff(v["payoff"], pb.dim());
  if (!m["lower"].is_null()) pb.lower = m["lower"].get<double>();
  if (!m["upper"].is_null()) pb.upper = m["upper"].get<double>();
  const MomentOptions opts = build_moment_options(m, cfg.seed());
  const MomentBounds b = [&] {
    try {
      return moment_bounds(pb, opts);
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string("moment problem: ") + e.what());
    }
  }();

  RunResult res;
  Json quotes = Json::array();
  for (std::size_t i = 0; i < pb.instruments.size(); ++i)
    quotes.push_back({{"name", pb.instruments[i].name},
                      {"payoff", pb.instruments[i].payoff.name()},
                      {"bid", pb.instruments[i].bid},
                      {"ask", pb.instruments[i].ask},
                      {"dirac_violation", b.dirac_violations[i]}});
  res.summary = {{"experiment", cfg.experiment},
                 {"status", to_string(b.status)},
                 {"upper", b.upper},
                 {"lower", b.lower},
                 {"atoms", pb.atom_count()},
                 {"dirac_feasible", b.dirac_feasible},
                 {"min_violation", b.min_violation},
                 {"instruments", quotes},
                 {"upper_certificate", candidate_json(b.upper_certificate)},
                 {"lower_certificate", candidate_json(b.lower_certificate)},
                 {"seed", cfg.seed()},
                 {"config", v}};
  res.exit_code = b.status == MomentStatus::infeasible ? 4 : b.status == MomentStatus::optimizer_failure ? 3 : 0;
  res.files.push_back(path_in(out, "moment_bounds.json"));
  write_json(res.files.back(), res.summary);
  return res;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  const std::string& e = cfg.experiment;
  if (e == "earthquake") return run_earthquake(cfg);
  if (e == "bull-spread") return run_bull_spread(cfg);
  if (e == "max-call") return run_max_call(cfg);
  if (e == "dim-sweep") return run_dim_sweep(cfg);
  if (e == "ctransform-grid") return run_ctransform_grid(cfg);
  if (e == "moment-bounds") return run_moment_bounds(cfg);
  throw ConfigError("unknown experiment: " + e);
}

}  // namespace wot
