// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hillnet/equilibria.hpp"
#include "hillnet/optimizer.hpp"
#include "hillnet/parallel.hpp"
#include "hillnet/regions.hpp"
#include "hillnet/rng.hpp"
#include "hillnet/saddle.hpp"
#include "hillnet/sampler.hpp"
#include "hillnet/stats.hpp"
#include "fd_multiprecision.hpp"
#include "test_support.hpp"

using namespace hillnet;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr std::uint64_t kSeed = 2024;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Verified saddles gathered from every pipeline run, with the family they belong to.
struct SaddleRecord {
  HillModel base;
  SaddleResult r;
};
std::vector<SaddleRecord> g_saddles;
std::mutex g_saddles_mutex;

void collect(const HillPath& path, const SaddleOutcome& o) {
  std::lock_guard lock(g_saddles_mutex);
  for (const auto& s : o.saddles) g_saddles.push_back({path.base(), s});
}

// ------------------------------------------------------------------ 1
Verdict criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto part = toggle_partition();
  const FisherProduct dist{VectorXd::Ones(10)};
  const auto batch = sample_balanced(dist, part, 5, 150, 150, kSeed);
  const int n = static_cast<int>(batch.points.rows());
  std::vector<SaddleOutcome> outs(n);
  parallel_for(n, 0, [&](std::size_t i) {
    std::vector<double> xi(batch.points.row(i).data(), batch.points.row(i).data() + 5);
    const HillPath path(builtin_reduced_toggle(ReducedToggleParams::from_combinatorial(xi, 1.0)));
    outs[i] = classify_parameter(path);
    collect(path, outs[i]);
  });
  std::vector<std::pair<Label, OutcomeKind>> rows;
  int a_total = 0, a_saddle = 0, b_total = 0, b_saddle = 0;
  for (int i = 0; i < n; ++i) {
    const bool in5 = batch.labels[i].is_region() && batch.labels[i].id == 5;
    const bool has = !outs[i].saddles.empty();
    (in5 ? a_total : b_total)++;
    if (has) (in5 ? a_saddle : b_saddle)++;
    rows.emplace_back(in5 ? Label::A : Label::B, outs[i].kind());
  }
  const auto M = build_contingency(rows);
  const auto chi = chi_square_test(M);
  const double fa = double(a_saddle) / a_total, fb = double(b_saddle) / b_total;
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = a_total == 150 && b_total == 150 && fa >= 0.85 && fb <= 0.05 && chi.log10_p < -40 && secs < 600;
  v.detail = fmt("R5 with saddle %d/%d (%.1f%%), outside %d/%d (%.1f%%), matrix [[%ld,%ld],[%ld,%ld]] excluded %ld, "
                 "log10 p = %.2f, %.1f s",
                 a_saddle, a_total, 100 * fa, b_saddle, b_total, 100 * fb, M.m[0][0], M.m[0][1], M.m[1][0],
                 M.m[1][1], M.excluded, chi.log10_p, secs);
  return v;
}

// ------------------------------------------------------------------ 2
Verdict criterion2() {
  auto test = [](long a, long b, long c, long d) {
    ContingencyMatrix M;
    M.m = {{{a, b}, {c, d}}};
    return chi_square_test(M);
  };
  const auto r0 = test(10, 10, 10, 10), r1 = test(31, 1, 1, 266), r2 = test(240, 5, 0, 755);
  Verdict v;
  v.pass = r0.chi2 == 0.0 && r0.p == 1.0 && std::abs(r1.log10_p + 60) <= 2 && std::abs(r2.log10_p + 212) <= 3;
  v.detail = fmt("[[10,10],[10,10]] chi2=%g p=%g; [[31,1],[1,266]] log10 p=%.3f; [[240,5],[0,755]] log10 p=%.3f",
                 r0.chi2, r0.p, r1.log10_p, r2.log10_p);
  return v;
}

// ------------------------------------------------------------------ 3
OptimizationResult g_balanced;

Verdict criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  OptimizeOptions o;
  o.k = 10000;
  o.restarts = 5;
  o.seed = kSeed;
  o.threads = 0;
  g_balanced = optimize_distribution(Family::fisher, toggle_partition(), o);
  int beats = 0;
  std::ostringstream scores;
  for (const auto& r : g_balanced.restarts) {
    beats += r.best_score > g_balanced.baseline_score;
    scores << fmt("%.3f ", r.best_score);
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = beats >= 4 && g_balanced.best_score >= 0.2 && secs < 300;
  v.detail = fmt("seed %llu, baseline %.4f, restarts [ %s], %d/5 beat baseline, best %.4f, %.1f s",
                 static_cast<unsigned long long>(kSeed), g_balanced.baseline_score, scores.str().c_str(), beats,
                 g_balanced.best_score, secs);
  return v;
}

// ------------------------------------------------------------------ 4
Verdict criterion4() {
  auto model = [](ReducedToggleParams p, double d) {
    p.d = d;
    return builtin_reduced_toggle(p);
  };
  const ReducedToggleParams r5{0.5, 1, 1, 0.5, 1, 1}, r1{2, 1, 1, 0.1, 0.2, 1}, r7{0.2, 0.3, 1, 0.1, 0.2, 1};
  bool ok = true;
  const int n1 = hill_equilibria(model(r5, 1), 4).size();
  const auto m100 = model(r5, 100);
  const auto enc = root_enclosure(m100);
  const auto set100 = hill_equilibria(m100, enc.rect, 4);
  ok = ok && n1 == 1 && set100.size() == 3 && set100.stable_count() == 2;
  const auto corners = toggle_corner_equilibria(m100, enc.rect);
  double worst = 0.0;
  int matched = 0;
  for (const auto& e : set100.points) {
    if (!e.stable()) continue;
    double best = 1e300;
    for (const auto& c : corners.points) best = std::min(best, (c.x - e.x).cwiseAbs().maxCoeff());
    worst = std::max(worst, best);
    matched += best <= 1e-8;
  }
  ok = ok && !corners.degenerate && matched == 2;
  std::ostringstream mono;
  for (const auto& p : {r1, r7})
    for (double d : {1.0, 10.0, 100.0}) {
      const int c = hill_equilibria(model(p, d), 4).size();
      mono << c;
      ok = ok && c == 1;
    }
  Verdict v;
  v.pass = ok;
  v.detail = fmt("R5: %d at d=1, %d at d=100 (%d stable), corner match %d/2 max dist %.2e; R1/R7 counts %s", n1,
                 set100.size(), set100.stable_count(), matched, worst, mono.str().c_str());
  return v;
}

// ------------------------------------------------------------------ 5
Verdict criterion5() {
  const HillPath hyst(builtin_reduced_toggle({0.9243, 0.0506, 0.8125, 0.0779, 0.8161, 1.0}));
  const auto o = classify_parameter(hyst);
  collect(hyst, o);
  int bad = 0;
  double worst_g = 0, worst_v = 0, worst_l = 0;
  for (const auto& rec : g_saddles) {
    const HillPath path(rec.base);
    const auto& r = rec.r;
    VectorXd u(2 * r.x.size() + 1);
    u << r.x, r.v, r.s;
    const double g = saddle_map(path, u).cwiseAbs().maxCoeff();
    const double dv = std::abs(r.v.norm() - 1.0);
    const auto eig = path.at(r.s).dx(r.x).eigenvalues();
    double lmin = 1e300;
    for (Eigen::Index i = 0; i < eig.size(); ++i) lmin = std::min(lmin, std::abs(eig[i]));
    worst_g = std::max(worst_g, g);
    worst_v = std::max(worst_v, dv);
    worst_l = std::max(worst_l, lmin);
    bad += !(g <= 1e-10 && dv <= 1e-10 && lmin <= 1e-6);
  }
  std::ostringstream ds;
  for (const auto& s : o.saddles) ds << fmt("%.4f ", HillPath::exponent(s.s));
  Verdict v;
  v.pass = bad == 0 && o.saddles.size() == 2 && !g_saddles.empty();
  v.detail = fmt("%zu saddles checked, %d violations, max |G| %.2e, max |‖v‖-1| %.2e, max min|λ| %.2e; "
                 "hysteresis fixture: %zu saddles at d = %s",
                 g_saddles.size(), bad, worst_g, worst_v, worst_l, o.saddles.size(), ds.str().c_str());
  return v;
}

// ------------------------------------------------------------------ 6
Verdict criterion6() {
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> us(0.02, 0.3), uv(-1.0, 1.0);
  double worst[4] = {0, 0, 0, 0};
  for (int t = 0; t < 100; ++t) {
    for (bool emt : {false, true}) {
      const HillModel m = emt ? testing::random_emt(rng) : testing::random_toggle(rng);
      const int n = m.dim();
      const VectorXd x = testing::random_state(rng, n, 0.2, 3.0);
      const Derivatives D = m.derivatives(x);
      worst[0] = std::max(worst[0], testing::rel_err(D.dx, testing::fd_jacobian([&](const VectorXd& y) { return m.eval(y); }, x)));
      for (int i = 0; i < n; ++i) {
        auto row = [&](const VectorXd& y) -> VectorXd { return m.dx(y).row(i).transpose(); };
        worst[1] = std::max(worst[1], testing::rel_err(D.dxx[i], testing::fd_jacobian(row, x)));
      }
      // double FD in d cannot resolve |Ddf| ~ 1e-11 next to |f| ~ 1; difference in 50 digits
      const VectorXd fdd = testing::fd_exponent_mp(m, x);
      worst[2] = std::max(worst[2], testing::rel_err(D.dd, fdd));

      const HillPath path(m);
      VectorXd u(2 * n + 1);
      for (int i = 0; i < n; ++i) u[n + i] = uv(rng);
      u.head(n) = x;
      u[2 * n] = us(rng);
      auto G = [&](const VectorXd& w) { return saddle_map(path, w); };
      worst[3] = std::max(worst[3], testing::rel_err(saddle_map_jacobian(path, u), testing::fd_jacobian(G, u)));
    }
  }
  Verdict v;
  v.pass = worst[0] <= 1e-5 && worst[1] <= 1e-5 && worst[2] <= 1e-5 && worst[3] <= 1e-5;
  v.detail = fmt("max relative error over 100 Toggle + 100 EMT points: Dxf %.2e, Dx2f %.2e, Ddf (50-digit FD) %.2e, DuG %.2e",
                 worst[0], worst[1], worst[2], worst[3]);
  return v;
}

// ------------------------------------------------------------------ 7
Verdict criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  // bistable at d = 100 (two stable equilibria), one equilibrium at d = 1
  const std::vector<double> witness = {
      1.247, 0.654, 1.341, 0.760, 1.894, 1.159,                                // gamma
      1.008, 5.689, 3.019, 0.702, 1.068, 0.321, 0.107, 1.563, 0.453, 0.894, 3.486, 1.916,  // ell
      0.556, 0.160, 0.306, 1.171, 0.840, 1.342, 2.071, 2.733, 1.623, 1.977, 0.751, 0.195,  // delta
      2.881, 0.382, 2.499, 0.646, 1.171, 0.457, 0.583, 0.509, 1.935, 1.539, 0.627, 2.959,  // theta
      1.0};
  const auto wm = builtin_emt(witness);
  const auto w100 = hill_equilibria(wm.with_hill(100), 2);
  PipelineConfig cfg;
  cfg.grid_k = 2;
  int completed = 0, crashes = 0, unaccounted = 0, saddles = 0, bads = 0;
  std::mutex mu;
  parallel_for(20, 0, [&](std::size_t i) {
    auto rng = substream(kSeed, 7000 + i);
    std::normal_distribution<double> nz(0.0, 0.05);
    auto v = witness;
    for (int j = 0; j < 42; ++j) v[j] *= std::exp(nz(rng));
    try {
      const HillPath path(builtin_emt(v));
      const auto o = classify_parameter(path, cfg);
      collect(path, o);
      std::lock_guard lock(mu);
      ++completed;
      saddles += static_cast<int>(o.saddles.size());
      bads += static_cast<int>(o.bad_candidates.size());
      unaccounted += static_cast<int>(o.intervals.size()) - o.verified_intervals -
                     static_cast<int>(o.bad_candidates.size());
    } catch (const std::exception& e) {
      std::lock_guard lock(mu);
      ++crashes;
      std::cerr << "EMT point " << i << ": " << e.what() << '\n';
    }
  });
  Verdict v;
  v.pass = w100.stable_count() >= 2 && completed == 20 && crashes == 0 && unaccounted == 0;
  v.detail = fmt("witness: %d equilibria (%d stable) at d=100; %d/20 completed, %d crashes, %d verified saddles, "
                 "%d bad candidates, %d unaccounted intervals, %.1f s",
                 w100.size(), w100.stable_count(), completed, crashes, saddles, bads, unaccounted, seconds_since(t0));
  return v;
}

// ------------------------------------------------------------------ 8
Verdict criterion8() {
  const auto part = toggle_partition();
  auto spread = [&](const Distribution& d, int k) {
    std::vector<double> s;
    for (int i = 0; i < 20; ++i) s.push_back(score_distribution(d, part, k, derive_seed(kSeed, 500 + i), 0));
    double mean = 0;
    for (double x : s) mean += x / s.size();
    double ss = 0;
    for (double x : s) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (s.size() - 1));
  };
  const double lo = spread(g_balanced.best, 100), hi = spread(g_balanced.best, 10000);
  const Distribution base = FisherProduct{VectorXd::Ones(10)};
  const double blo = spread(base, 100), bhi = spread(base, 10000);
  Verdict v;
  v.pass = hi < lo;
  v.detail = fmt("optimized Fisher: sd(S_100) = %.4f, sd(S_10000) = %.4f; baseline Fisher: %.4f vs %.4f", lo, hi, blo,
                 bhi);
  return v;
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  // 5 reads saddles collected by 1 and 7; 8 uses the distribution from 3
  std::vector<Verdict> v(9);
  v[2] = criterion2();
  v[4] = criterion4();
  v[6] = criterion6();
  v[1] = criterion1();
  v[7] = criterion7();
  v[5] = criterion5();
  v[3] = criterion3();
  v[8] = criterion8();
  int failed = 0;
  for (int i = 1; i <= 8; ++i) {
    std::cout << "criterion " << i << ": " << (v[i].pass ? "PASS" : "FAIL") << "  " << v[i].detail << '\n';
    failed += !v[i].pass;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << 8 - failed << "/8 in " << fmt("%.1f", seconds_since(t0))
            << " s\n";
  return failed ? 1 : 0;
}
