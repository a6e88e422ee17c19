#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <Eigen/Dense>

#include "hillnet/hill_model.hpp"

namespace testing {

using mp = boost::multiprecision::cpp_bin_float_50;

// Vector field from the pow form in 50 digits, every exponent shifted by s.
inline std::vector<mp> field_mp(const hillnet::HillModel& m, const Eigen::VectorXd& x, const mp& s) {
  const auto& t = m.topology();
  std::vector<mp> f(m.dim());
  for (int i = 0; i < m.dim(); ++i) {
    mp prod = 1;
    for (const auto& block : t.interaction(i)) {
      mp sum = 0;
      for (int src : block) {
        const int e = t.edge_index(src, i);
        const auto& p = m.edge_params()[e];
        const mp n = mp(p.hill) + s;
        const mp xd = pow(mp(x[src]), n), td = pow(mp(p.theta), n);
        const mp frac = t.edges()[e].sign == hillnet::EdgeSign::activating ? xd / (td + xd) : td / (td + xd);
        sum += mp(p.ell) + mp(p.delta) * frac;
      }
      prod *= sum;
    }
    f[i] = -mp(m.gamma()[i]) * mp(x[i]) + prod;
  }
  return f;
}

// Central difference in the shared exponent; h = 1e-12 is safe at 50 digits.
inline Eigen::VectorXd fd_exponent_mp(const hillnet::HillModel& m, const Eigen::VectorXd& x) {
  const mp h("1e-12");
  const auto fp = field_mp(m, x, h), fm = field_mp(m, x, -h);
  Eigen::VectorXd out(m.dim());
  for (int i = 0; i < m.dim(); ++i) out[i] = static_cast<double>((fp[i] - fm[i]) / (2 * h));
  return out;
}

}  // namespace testing
