#include "hillnet/stats.hpp"
#include "hillnet/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hillnet {

ContingencyMatrix build_contingency(const std::vector<std::pair<Label, OutcomeKind>>& outcomes) {
  ContingencyMatrix M;
  for (const auto& [label, kind] : outcomes) {
    const int row = label == Label::A ? 0 : 1;
    switch (kind) {
      case OutcomeKind::one:
      case OutcomeKind::multiple: ++M.m[row][0]; break;
      case OutcomeKind::none: ++M.m[row][1]; break;
      case OutcomeKind::bad: ++M.excluded; break;
    }
  }
  return M;
}

double log_gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw std::domain_error("incomplete gamma needs a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    // P(a, x) by its series, then Q = 1 - P
    double term = 1.0 / a, sum = term;
    for (int n = 1; n < 10000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-17) break;
    }
    const double P = std::exp(log_prefix + std::log(sum));
    return std::log1p(-P);
  }
  // continued fraction for Q, modified Lentz
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return log_prefix + std::log(h);
}

ChiSquareResult chi_square_test(const ContingencyMatrix& M, bool yates) {
  double row[2] = {0, 0}, col[2] = {0, 0}, n = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      if (M.m[i][j] < 0) throw std::domain_error("negative contingency count");
      const double o = static_cast<double>(M.m[i][j]);
      row[i] += o;
      col[j] += o;
      n += o;
    }
  if (row[0] == 0 || row[1] == 0 || col[0] == 0 || col[1] == 0)
    throw std::domain_error("chi-square test undefined with a zero marginal");
  ChiSquareResult r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double e = row[i] * col[j] / n;
      double diff = std::abs(static_cast<double>(M.m[i][j]) - e);
      if (yates) diff -= std::min(0.5, diff);
      r.chi2 += diff * diff / e;
    }
  const double lq = log_gamma_q(0.5, r.chi2 / 2.0);
  r.p = std::exp(lq);
  r.log10_p = lq / std::log(10.0);
  return r;
}

std::array<double, 4> project_psi(std::span<const double> xi) {
  if (xi.size() != 5) throw std::invalid_argument("reduced Toggle parameters have 5 entries");
  for (double v : xi)
    if (!(v > 0.0)) throw std::invalid_argument("reduced parameters must be positive");
  return {xi[0], xi[0] + xi[1], xi[3] / xi[2], (xi[3] + xi[4]) / xi[2]};
}

namespace {

double g_component(double a, double b, double abar) {
  if (b <= 1.0) return b;
  if (a < 1.0) return 1.0 + (1.0 - a) / (b - a);
  return 2.0 + (a - 1.0) / (abar - 1.0);
}

}  // namespace

std::array<double, 2> project_g(const std::array<double, 4>& psi, double abar1, double abar2) {
  const auto [a1, b1, a2, b2] = psi;
  if (!(abar1 > 1.0) || !(abar2 > 1.0)) throw std::invalid_argument("caps must exceed 1");
  if (a1 > abar1 || a2 > abar2) throw std::invalid_argument("a_i exceeds its cap; enlarge abar");
  if (!(0.0 < a1 && a1 < b1 && 0.0 < a2 && a2 < b2)) throw std::invalid_argument("need 0 < a_i < b_i");
  return {g_component(a2, b2, abar2), g_component(a1, b1, abar1)};
}

std::array<double, 4> region_square(int region) {
  if (region < 1 || region > 9) throw std::invalid_argument("Toggle regions are numbered 1..9");
  const int col = (region - 1) % 3, row = (region - 1) / 3;
  return {static_cast<double>(col), static_cast<double>(col + 1), static_cast<double>(2 - row),
          static_cast<double>(3 - row)};
}

std::pair<double, double> default_caps(const std::vector<HeatmapInput>& inputs) {
  if (inputs.empty()) return {2.0, 2.0};
  double c1 = 0.0, c2 = 0.0;
  for (const auto& in : inputs) {
    const auto psi = project_psi(in.xi);
    c1 = std::max(c1, psi[0] + 1.0);
    c2 = std::max(c2, psi[2] + 1.0);
  }
  return {c1, c2};
}

std::vector<HeatmapRow> heatmap_export(const std::vector<HeatmapInput>& inputs, double abar1, double abar2) {
  std::vector<HeatmapRow> rows;
  for (const auto& in : inputs) {
    const auto g = project_g(project_psi(in.xi), abar1, abar2);
    rows.push_back({g[0], g[1], in.d_min, in.category});
  }
  return rows;
}

void write_heatmap_csv(std::ostream& os, const std::vector<HeatmapRow>& rows) {
  os << "g1,g2,d_min,category\n";
  for (const auto& r : rows) {
    os << format_double(r.g1) << ',' << format_double(r.g2) << ',';
    if (r.d_min)
      os << format_double(*r.d_min);
    else
      os << "NA";
    os << ',' << outcome_name(r.category) << '\n';
  }
}

nlohmann::json chi_square_to_json(const ContingencyMatrix& M, const ChiSquareResult& r) {
  return {{"matrix", {{M.m[0][0], M.m[0][1]}, {M.m[1][0], M.m[1][1]}}},
          {"chi2", r.chi2},
          {"p", r.p},
          {"log10_p", r.log10_p},
          {"excluded", M.excluded}};
}

}  // namespace hillnet
