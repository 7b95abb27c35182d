#include "wot/measures.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "wot/error.hpp"
#include "wot/rng.hpp"

namespace wot {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw ArgumentError(std::string(what) + " contains non-finite values");
}

// Cholesky with a tolerance for semidefinite input: zero pivots are allowed
// (degenerate directions), negative ones reject the matrix.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
  const auto d = cov.rows();
  if (cov.cols() != d) throw ArgumentError("covariance must be square");
  if (!cov.isApprox(cov.transpose(), 1e-12)) throw ArgumentError("covariance must be symmetric");
  const double scale = std::max(1.0, cov.diagonal().cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale;
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double diag = cov(j, j) - l.row(j).head(j).squaredNorm();
    if (diag < -tol) throw ArgumentError("covariance is not positive semidefinite");
    diag = std::max(diag, 0.0);
    l(j, j) = std::sqrt(diag);
    for (Eigen::Index i = j + 1; i < d; ++i) {
      const double off = cov(i, j) - l.row(i).head(j).dot(l.row(j).head(j));
      if (l(j, j) > 0.0) {
        l(i, j) = off / l(j, j);
      } else if (std::abs(off) > tol) {
        throw ArgumentError("covariance is not positive semidefinite");
      }
    }
  }
  return l;
}

double normal_cdf_erfc(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// E|X| for X ~ N(m, s^2).
double folded_normal_mean(double m, double s) {
  if (s == 0.0) return std::abs(m);
  return s * std::sqrt(2.0 / std::numbers::pi) * std::exp(-m * m / (2.0 * s * s)) +
         m * (1.0 - 2.0 * normal_cdf_erfc(-m / s));
}

}  // namespace

ReferenceMeasure ReferenceMeasure::dirac(Eigen::VectorXd point) {
  if (point.size() == 0) throw ArgumentError("dirac point must have dimension >= 1");
  require_finite(point, "dirac point");
  return ReferenceMeasure(DiracMeasure{std::move(point)});
}

ReferenceMeasure ReferenceMeasure::gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance) {
  if (mean.size() == 0) throw ArgumentError("gaussian mean must have dimension >= 1");
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size())
    throw ArgumentError("gaussian covariance shape does not match mean");
  require_finite(mean, "gaussian mean");
  require_finite(covariance, "gaussian covariance");
  Eigen::MatrixXd factor = psd_factor(covariance);
  return ReferenceMeasure(GaussianMeasure{std::move(mean), std::move(covariance), std::move(factor)});
}

ReferenceMeasure ReferenceMeasure::lognormal(Eigen::VectorXd spot, double vol, double maturity) {
  if (spot.size() == 0) throw ArgumentError("lognormal spot must have dimension >= 1");
  if (!(spot.array() > 0.0).all() || !spot.allFinite()) throw ArgumentError("lognormal spot must be positive");
  if (!(vol > 0.0) || !std::isfinite(vol)) throw ArgumentError("lognormal vol must be positive");
  if (!(maturity > 0.0) || !std::isfinite(maturity)) throw ArgumentError("lognormal maturity must be positive");
  return ReferenceMeasure(LogNormalMeasure{std::move(spot), vol, maturity});
}

ReferenceMeasure ReferenceMeasure::diffusion(Eigen::VectorXd x0, Eigen::MatrixXd sigma, double maturity) {
  if (x0.size() == 0) throw ArgumentError("diffusion x0 must have dimension >= 1");
  if (sigma.rows() != x0.size() || sigma.cols() != x0.size())
    throw ArgumentError("diffusion sigma shape does not match x0");
  require_finite(x0, "diffusion x0");
  require_finite(sigma, "diffusion sigma");
  if (!(maturity > 0.0) || !std::isfinite(maturity)) throw ArgumentError("diffusion maturity must be positive");
  return ReferenceMeasure(DiffusionMeasure{std::move(x0), std::move(sigma), maturity});
}

ReferenceMeasure ReferenceMeasure::empirical(Samples points) {
  if (points.rows() == 0 || points.cols() == 0) throw ArgumentError("empirical measure needs at least one point");
  require_finite(points, "empirical points");
  return ReferenceMeasure(EmpiricalMeasure{std::move(points)});
}

int ReferenceMeasure::dim() const {
  return std::visit(overloaded{
                        [](const DiracMeasure& m) { return static_cast<int>(m.point.size()); },
                        [](const GaussianMeasure& m) { return static_cast<int>(m.mean.size()); },
                        [](const LogNormalMeasure& m) { return static_cast<int>(m.spot.size()); },
                        [](const DiffusionMeasure& m) { return static_cast<int>(m.x0.size()); },
                        [](const EmpiricalMeasure& m) { return static_cast<int>(m.points.rows()); },
                    },
                    v_);
}

std::string ReferenceMeasure::name() const {
  return std::visit(overloaded{
                        [](const DiracMeasure&) { return std::string("dirac"); },
                        [](const GaussianMeasure&) { return std::string("gaussian"); },
                        [](const LogNormalMeasure&) { return std::string("lognormal"); },
                        [](const DiffusionMeasure&) { return std::string("diffusion"); },
                        [](const EmpiricalMeasure&) { return std::string("empirical"); },
                    },
                    v_);
}

Samples ReferenceMeasure::sample(std::size_t n, std::uint64_t seed) const {
  if (n == 0) throw ArgumentError("sample count must be >= 1");
  const int d = dim();
  Samples out(d, static_cast<Eigen::Index>(n));
  Rng rng(seed);
  Eigen::VectorXd z(d);
  std::visit(overloaded{
                 [&](const DiracMeasure& m) { out.colwise() = m.point; },
                 [&](const GaussianMeasure& m) {
                   for (Eigen::Index j = 0; j < out.cols(); ++j) {
                     for (int i = 0; i < d; ++i) z(i) = rng.normal();
                     out.col(j).noalias() = m.mean + m.factor.triangularView<Eigen::Lower>() * z;
                   }
                 },
                 [&](const LogNormalMeasure& m) {
                   const double sd = m.vol * std::sqrt(m.maturity);
                   const double drift = -0.5 * sd * sd;
                   for (Eigen::Index j = 0; j < out.cols(); ++j)
                     for (int i = 0; i < d; ++i) out(i, j) = m.spot(i) * std::exp(sd * rng.normal() + drift);
                 },
                 [&](const DiffusionMeasure& m) {
                   const double root_t = std::sqrt(m.maturity);
                   for (Eigen::Index j = 0; j < out.cols(); ++j) {
                     for (int i = 0; i < d; ++i) z(i) = root_t * rng.normal();
                     out.col(j).noalias() = m.x0 + m.sigma * z;
                   }
                 },
                 [&](const EmpiricalMeasure& m) {
                   const auto count = static_cast<std::uint64_t>(m.points.cols());
                   for (Eigen::Index j = 0; j < out.cols(); ++j)
                     out.col(j) = m.points.col(static_cast<Eigen::Index>(rng.below(count)));
                 },
             },
             v_);
  return out;
}

Eigen::VectorXd ReferenceMeasure::mean() const {
  return std::visit(overloaded{
                        [](const DiracMeasure& m) -> Eigen::VectorXd { return m.point; },
                        [](const GaussianMeasure& m) -> Eigen::VectorXd { return m.mean; },
                        [](const LogNormalMeasure& m) -> Eigen::VectorXd { return m.spot; },
                        [](const DiffusionMeasure& m) -> Eigen::VectorXd { return m.x0; },
                        [](const EmpiricalMeasure& m) -> Eigen::VectorXd { return m.points.rowwise().mean(); },
                    },
                    v_);
}

MomentEstimate ReferenceMeasure::moment(double p, std::size_t mc_samples, std::uint64_t seed) const {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ArgumentError("moment order must be >= 1");
  const bool p1 = p == 1.0;
  const bool p2 = p == 2.0;
  const int d = dim();

  if (const auto* m = std::get_if<DiracMeasure>(&v_)) return {std::pow(m->point.norm(), p), 0.0, true};
  if (const auto* m = std::get_if<EmpiricalMeasure>(&v_)) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < m->points.cols(); ++j) acc += std::pow(m->points.col(j).norm(), p);
    return {acc / static_cast<double>(m->points.cols()), 0.0, true};
  }
  if (const auto* m = std::get_if<GaussianMeasure>(&v_)) {
    if (p2) return {m->mean.squaredNorm() + m->covariance.trace(), 0.0, true};
    if (p1 && d == 1) return {folded_normal_mean(m->mean(0), std::sqrt(m->covariance(0, 0))), 0.0, true};
  }
  if (const auto* m = std::get_if<DiffusionMeasure>(&v_)) {
    const Eigen::MatrixXd cov = m->maturity * m->sigma * m->sigma.transpose();
    if (p2) return {m->x0.squaredNorm() + cov.trace(), 0.0, true};
    if (p1 && d == 1) return {folded_normal_mean(m->x0(0), std::sqrt(cov(0, 0))), 0.0, true};
  }
  if (const auto* m = std::get_if<LogNormalMeasure>(&v_)) {
    const double var_log = m->vol * m->vol * m->maturity;
    if (p2) return {m->spot.squaredNorm() * std::exp(var_log), 0.0, true};
    if (p1 && d == 1) return {m->spot(0), 0.0, true};
  }

  const Samples xs = sample(mc_samples, seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (Eigen::Index j = 0; j < xs.cols(); ++j) {
    const double v = std::pow(xs.col(j).norm(), p);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(xs.cols());
  const double mean = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1)) : 0.0;
  return {mean, std::sqrt(var / n), false};
}

Samples load_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open points file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
        row.push_back(v);
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw IoError("non-numeric row in points file: " + line);
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError("ragged rows in points file: " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("points file has no data rows: " + path);
  Samples pts(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t i = 0; i < rows[j].size(); ++i)
      pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[j][i];
  return pts;
}

}  // namespace wot
