#include "grip/stats.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace grip::stats {

std::string Term::name() const {
  std::string out;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i) out += ':';
    out += factors[i];
  }
  return out;
}

ModelSpec ModelSpec::mains_and_two_way(std::vector<std::string> factor_names) {
  ModelSpec spec;
  spec.factors = std::move(factor_names);
  for (const auto& f : spec.factors) spec.terms.push_back({{f}});
  for (std::size_t i = 0; i < spec.factors.size(); ++i) {
    for (std::size_t j = i + 1; j < spec.factors.size(); ++j) {
      spec.terms.push_back({{spec.factors[i], spec.factors[j]}});
    }
  }
  return spec;
}

ModelSpec ModelSpec::mains_only(std::vector<std::string> factor_names) {
  ModelSpec spec;
  spec.factors = std::move(factor_names);
  for (const auto& f : spec.factors) spec.terms.push_back({{f}});
  return spec;
}

void ModelSpec::validate() const {
  if (factors.empty()) throw Error("model needs at least one factor");
  std::set<std::string> factor_set(factors.begin(), factors.end());
  if (factor_set.size() != factors.size()) {
    throw Error("duplicate factor name in model");
  }
  std::set<std::string> seen;
  std::set<std::string> mains;
  for (const auto& t : terms) {
    if (t.factors.empty() || t.factors.size() > 2) {
      throw Error("terms must be main effects or two-way interactions");
    }
    for (const auto& f : t.factors) {
      if (!factor_set.count(f)) throw Error("term references unknown factor " + f);
    }
    if (!seen.insert(t.name()).second) throw Error("duplicate term " + t.name());
    if (t.factors.size() == 1) mains.insert(t.factors[0]);
  }
  for (const auto& t : terms) {
    if (t.factors.size() == 2) {
      for (const auto& f : t.factors) {
        if (!mains.count(f)) {
          throw Error("interaction " + t.name() + " lacks main effect " + f);
        }
      }
    }
  }
}

double mean_of(std::span<const double> values) {
  if (values.empty()) throw EmptyInput("mean of an empty sample");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sem_of(std::span<const double> values) {
  if (values.empty()) throw EmptyInput("sem of an empty sample");
  if (values.size() < 2) throw SingletonSem("sem needs n >= 2");
  const double m = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  const double n = static_cast<double>(values.size());
  return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

SummaryStats summary_stats(std::span<const double> values) {
  SummaryStats s;
  s.mean = mean_of(values);
  s.n = values.size();
  if (s.n >= 2) s.sem = sem_of(values);
  return s;
}

// ---------------------------------------------------------------------------
// F distribution via the regularized incomplete beta function.
// ---------------------------------------------------------------------------

namespace {

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for I_x(a,b), modified Lentz. Valid and fast for
// x < (a+1)/(a+b+2).
double ibeta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  constexpr int max_iter = 500;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double ibeta_reg(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error("ibeta_reg requires a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front =
      std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * ibeta_cf(a, b, x) / a;
  }
  return 1.0 - front * ibeta_cf(b, a, 1.0 - x) / b;
}

double f_cdf(double x, int d1, int d2) {
  if (d1 < 1 || d2 < 1) throw InvalidDf("degrees of freedom must be >= 1");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double z = d1 * x / (d1 * x + d2);
  return ibeta_reg(d1 / 2.0, d2 / 2.0, z);
}

double f_sf(double x, int d1, int d2) {
  if (d1 < 1 || d2 < 1) throw InvalidDf("degrees of freedom must be >= 1");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  // 1 - I_z(a,b) = I_{1-z}(b,a) with 1-z formed without cancellation.
  const double zc = d2 / (d2 + d1 * x);
  return ibeta_reg(d2 / 2.0, d1 / 2.0, zc);
}

// ---------------------------------------------------------------------------
// Factorial ANOVA.
// ---------------------------------------------------------------------------

namespace {

struct FactorCodes {
  std::vector<std::string> levels;  // sorted labels
  std::vector<int> index;           // per observation
};

// Effect-coded columns for one factor: level i of L gets +1 in column i,
// the last level gets -1 in every column.
Eigen::MatrixXd effect_columns(const FactorCodes& fc, Eigen::Index n) {
  const int levels = static_cast<int>(fc.levels.size());
  Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(n, levels - 1);
  for (Eigen::Index r = 0; r < n; ++r) {
    const int idx = fc.index[static_cast<std::size_t>(r)];
    if (idx == levels - 1) {
      cols.row(r).setConstant(-1.0);
    } else {
      cols(r, idx) = 1.0;
    }
  }
  return cols;
}

Eigen::MatrixXd interaction_columns(const Eigen::MatrixXd& a,
                                    const Eigen::MatrixXd& b) {
  Eigen::MatrixXd cols(a.rows(), a.cols() * b.cols());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      cols.col(k++) = a.col(i).cwiseProduct(b.col(j));
    }
  }
  return cols;
}

double sse_of(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::VectorXd beta = x.householderQr().solve(y);
  return (y - x * beta).squaredNorm();
}

Eigen::MatrixXd assemble(const std::vector<const Eigen::MatrixXd*>& blocks,
                         Eigen::Index n) {
  Eigen::Index cols = 1;
  for (const auto* b : blocks) cols += b->cols();
  Eigen::MatrixXd x(n, cols);
  x.col(0).setOnes();
  Eigen::Index at = 1;
  for (const auto* b : blocks) {
    x.middleCols(at, b->cols()) = *b;
    at += b->cols();
  }
  return x;
}

}  // namespace

AnovaTable fit_factorial_anova(std::span<const Observation> observations,
                               const ModelSpec& spec) {
  spec.validate();
  if (observations.empty()) throw EmptyInput("no observations");

  const Eigen::Index n = static_cast<Eigen::Index>(observations.size());

  // Code each factor's levels in sorted label order.
  std::map<std::string, FactorCodes> codes;
  for (const auto& f : spec.factors) {
    std::set<std::string> labels;
    for (const auto& obs : observations) {
      auto it = obs.levels.find(f);
      if (it == obs.levels.end()) {
        throw Error("observation missing factor " + f);
      }
      labels.insert(it->second);
    }
    FactorCodes fc;
    fc.levels.assign(labels.begin(), labels.end());
    if (fc.levels.size() < 2) {
      throw RankDeficientDesign("factor " + f + " has fewer than two levels");
    }
    fc.index.reserve(observations.size());
    for (const auto& obs : observations) {
      const auto& label = obs.levels.at(f);
      const auto pos = std::lower_bound(fc.levels.begin(), fc.levels.end(), label);
      fc.index.push_back(static_cast<int>(pos - fc.levels.begin()));
    }
    codes.emplace(f, std::move(fc));
  }

  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = observations[static_cast<std::size_t>(i)].value;
  }

  std::map<std::string, Eigen::MatrixXd> main_cols;
  for (const auto& f : spec.factors) {
    main_cols.emplace(f, effect_columns(codes.at(f), n));
  }
  std::vector<Eigen::MatrixXd> term_cols;
  term_cols.reserve(spec.terms.size());
  for (const auto& t : spec.terms) {
    if (t.factors.size() == 1) {
      term_cols.push_back(main_cols.at(t.factors[0]));
    } else {
      term_cols.push_back(interaction_columns(main_cols.at(t.factors[0]),
                                              main_cols.at(t.factors[1])));
    }
  }

  std::vector<const Eigen::MatrixXd*> all_blocks;
  for (const auto& c : term_cols) all_blocks.push_back(&c);
  const Eigen::MatrixXd x_full = assemble(all_blocks, n);

  if (n <= x_full.cols()) {
    throw InsufficientResidualDf(
        "model has " + std::to_string(x_full.cols()) + " parameters but only " +
        std::to_string(n) + " observations");
  }
  const int df_residual = static_cast<int>(n - x_full.cols());

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x_full);
  if (qr.rank() < x_full.cols()) {
    throw RankDeficientDesign(
        "design matrix is rank deficient; a tested term is not estimable "
        "from the occupied cells");
  }
  const Eigen::VectorXd beta = qr.solve(y);
  const double sse_full = (y - x_full * beta).squaredNorm();

  const double ss_total = (y.array() - y.mean()).matrix().squaredNorm();
  if (ss_total <= 0.0 || sse_full <= 1e-12 * ss_total) {
    throw ZeroResidualVariance("residual variation is zero");
  }
  const double ms_residual = sse_full / df_residual;

  AnovaTable table;
  for (std::size_t t = 0; t < spec.terms.size(); ++t) {
    std::vector<const Eigen::MatrixXd*> reduced;
    for (std::size_t u = 0; u < term_cols.size(); ++u) {
      if (u != t) reduced.push_back(&term_cols[u]);
    }
    const Eigen::MatrixXd x_reduced = assemble(reduced, n);
    const double ss = std::max(0.0, sse_of(x_reduced, y) - sse_full);
    const int df = static_cast<int>(term_cols[t].cols());
    const double ms = ss / df;
    const double f = ms / ms_residual;
    AnovaRow row;
    row.term = spec.terms[t].name();
    row.df = df;
    row.ss = ss;
    row.ms = ms;
    row.f = f;
    row.p = f_sf(f, df, df_residual);
    table.rows.push_back(std::move(row));
  }
  table.residual = ResidualRow{df_residual, sse_full, ms_residual};
  return table;
}

// ---------------------------------------------------------------------------
// Serialization.
// ---------------------------------------------------------------------------

std::string to_text(const AnovaTable& table) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-20s %6s %14s %14s %12s %12s\n",
                "Source", "DF", "SS", "MS", "F", "P");
  out += line;
  for (const auto& r : table.rows) {
    std::snprintf(line, sizeof(line), "%-20s %6d %14.6g %14.6g %12.6g %12.4g\n",
                  r.term.c_str(), r.df, r.ss, r.ms, r.f, r.p);
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-20s %6d %14.6g %14.6g\n", "Residual",
                table.residual.df, table.residual.ss, table.residual.ms);
  out += line;
  return out;
}

std::string to_json_string(const AnovaTable& table, int indent) {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : table.rows) {
    j["rows"].push_back({{"term", r.term},
                         {"df", r.df},
                         {"ss", r.ss},
                         {"ms", r.ms},
                         {"f", r.f},
                         {"p", r.p}});
  }
  j["residual"] = {{"df", table.residual.df},
                   {"ss", table.residual.ss},
                   {"ms", table.residual.ms}};
  return j.dump(indent);
}

}  // namespace grip::stats
