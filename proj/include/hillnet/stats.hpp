#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hillnet/saddle.hpp"

namespace hillnet {

/// [[p_s^A, p_m^A], [p_s^B, p_m^B]]: rows are the region label, columns
/// whether a saddle-node was observed.
struct ContingencyMatrix {
  std::array<std::array<long, 2>, 2> m{};
  long excluded = 0;
};

enum class Label { A, B };

/// Outcomes with a verified saddle go to column s, outcomes with nothing to
/// column m; outcomes with only bad candidates are excluded.
ContingencyMatrix build_contingency(const std::vector<std::pair<Label, OutcomeKind>>& outcomes);

struct ChiSquareResult {
  double chi2 = 0.0;
  double p = 1.0;
  double log10_p = 0.0;  // stays finite when p underflows
};

/// Pearson statistic with one degree of freedom, optional Yates correction.
/// Throws std::domain_error when a row or column sum is zero.
ChiSquareResult chi_square_test(const ContingencyMatrix& M, bool yates = false);

/// Natural log of the regularized upper incomplete gamma Q(a, x).
double log_gamma_q(double a, double x);

/// (a1, b1, a2, b2) = (ell12, ell12 + delta12, ell21 / gamma2, (ell21 + delta21) / gamma2).
std::array<double, 4> project_psi(std::span<const double> xi);

/// The piecewise map into [0,3]^2. psi = (a1, b1, a2, b2). Throws
/// std::invalid_argument when a_i > abar_i or abar_i <= 1.
std::array<double, 2> project_g(const std::array<double, 4>& psi, double abar1, double abar2);

/// Unit square [g1_lo, g1_hi] x [g2_lo, g2_hi] that region r maps into.
std::array<double, 4> region_square(int region);

struct HeatmapRow {
  double g1 = 0.0;
  double g2 = 0.0;
  std::optional<double> d_min;
  OutcomeKind category = OutcomeKind::none;
};

struct HeatmapInput {
  std::array<double, 5> xi{};
  OutcomeKind category = OutcomeKind::none;
  std::optional<double> d_min;
};

/// abar_i = max over the inputs of a_i + 1.
std::pair<double, double> default_caps(const std::vector<HeatmapInput>& inputs);

std::vector<HeatmapRow> heatmap_export(const std::vector<HeatmapInput>& inputs, double abar1, double abar2);

/// Header g1,g2,d_min,category; missing d_min written as NA.
void write_heatmap_csv(std::ostream& os, const std::vector<HeatmapRow>& rows);

nlohmann::json chi_square_to_json(const ContingencyMatrix& M, const ChiSquareResult& r);

}  // namespace hillnet
