#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "grip/errors.hpp"

namespace grip::stats {

// One response value with its factor-level labels. Every observation passed
// to one fit must carry the same factor-name set.
struct Observation {
  double value = 0.0;
  std::map<std::string, std::string> levels;
};

// A main effect (one factor) or a two-way interaction (two factors).
struct Term {
  std::vector<std::string> factors;

  std::string name() const;
  bool operator==(const Term&) const = default;
};

// Factorial model: which factors exist and which terms are tested. Higher
// interactions never listed here are pooled into the residual.
struct ModelSpec {
  std::vector<std::string> factors;
  std::vector<Term> terms;

  // All main effects plus every pairwise interaction, in factor order.
  static ModelSpec mains_and_two_way(std::vector<std::string> factor_names);
  // Main effects only.
  static ModelSpec mains_only(std::vector<std::string> factor_names);

  // Throws Error if an interaction references a missing main or a term is
  // duplicated.
  void validate() const;
};

struct AnovaRow {
  std::string term;
  int df = 0;
  double ss = 0.0;
  double ms = 0.0;
  double f = 0.0;
  double p = 1.0;
};

struct ResidualRow {
  int df = 0;
  double ss = 0.0;
  double ms = 0.0;
};

struct AnovaTable {
  std::vector<AnovaRow> rows;  // in ModelSpec term order
  ResidualRow residual;
};

struct SummaryStats {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> sem;  // defined for n >= 2
};

double mean_of(std::span<const double> values);           // throws EmptyInput
double sem_of(std::span<const double> values);            // throws SingletonSem
SummaryStats summary_stats(std::span<const double> values);

// Least-squares factorial ANOVA with sum-to-zero (effect) coding. Each term's
// sum of squares comes from model comparison: SSE without the term minus SSE
// of the full model (Type III). On balanced data this equals the classical
// definitional decomposition. F = MS_term / MS_residual, p from the F
// distribution's upper tail.
AnovaTable fit_factorial_anova(std::span<const Observation> observations,
                               const ModelSpec& spec);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation,
// absolute error well below 1e-10 for moderate a, b.
double ibeta_reg(double a, double b, double x);

// F-distribution CDF, I_{d1 x / (d1 x + d2)}(d1/2, d2/2). Throws InvalidDf
// for df < 1.
double f_cdf(double x, int d1, int d2);

// Upper tail, computed through the complementary beta argument so tiny
// p-values keep relative precision.
double f_sf(double x, int d1, int d2);

std::string to_text(const AnovaTable& table);
std::string to_json_string(const AnovaTable& table, int indent = 2);

}  // namespace grip::stats
