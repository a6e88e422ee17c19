#include "hillnet/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "hillnet/parallel.hpp"
#include "hillnet/rng.hpp"

namespace hillnet {

void NelderMeadConfig::validate() const {
  if (!(reflection > 0.0)) throw std::invalid_argument("reflection must be > 0");
  if (!(expansion > 1.0)) throw std::invalid_argument("expansion must be > 1");
  if (!(contraction > 0.0 && contraction < 1.0)) throw std::invalid_argument("contraction must lie in (0,1)");
  if (!(shrink > 0.0 && shrink < 1.0)) throw std::invalid_argument("shrink must lie in (0,1)");
  if (!(init_step != 0.0) || !std::isfinite(init_step)) throw std::invalid_argument("init_step must be nonzero");
  if (max_iter < 0) throw std::invalid_argument("max_iter must be nonnegative");
}

NelderMeadResult nelder_mead(const Objective& objective, const Eigen::VectorXd& x0,
                             const NelderMeadConfig& cfg) {
  cfg.validate();
  const Eigen::Index m = x0.size();
  if (m == 0) throw std::invalid_argument("empty starting point");
  constexpr double inf = std::numeric_limits<double>::infinity();

  NelderMeadResult res;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++res.evaluations;
    const double v = objective(x);
    return std::isfinite(v) ? v : inf;
  };

  std::vector<Eigen::VectorXd> xs(m + 1, x0);
  std::vector<double> fs(m + 1);
  for (Eigen::Index i = 0; i <= m; ++i) {
    if (i > 0) xs[i][i - 1] += cfg.init_step;
    fs[i] = objective(xs[i]);
    ++res.evaluations;
    if (!std::isfinite(fs[i])) throw std::invalid_argument("objective is not finite on the initial simplex");
  }

  std::vector<int> order(m + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    std::vector<Eigen::VectorXd> nx;
    std::vector<double> nf;
    for (int k : order) {
      nx.push_back(std::move(xs[k]));
      nf.push_back(fs[k]);
    }
    xs = std::move(nx);
    fs = std::move(nf);
  };

  for (int it = 0;; ++it) {
    sort_simplex();
    res.trace.push_back({it, xs[0], fs[0], res.evaluations});
    double diam = 0.0, spread = 0.0;
    for (Eigen::Index i = 1; i <= m; ++i) {
      diam = std::max(diam, (xs[i] - xs[0]).cwiseAbs().maxCoeff());
      spread = std::max(spread, std::abs(fs[i] - fs[0]));
    }
    res.iterations = it;
    res.diameter = diam;
    if (diam < cfg.x_tol) {
      res.stop = StopReason::x_tol;
      break;
    }
    if (spread < cfg.f_tol) {
      res.stop = StopReason::f_tol;
      break;
    }
    if (it >= cfg.max_iter) {
      res.stop = StopReason::max_iter;
      break;
    }

    Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i) c += xs[i];
    c /= static_cast<double>(m);
    const Eigen::VectorXd& xw = xs[m];

    const Eigen::VectorXd xr = c + cfg.reflection * (c - xw);
    const double fr = eval(xr);
    if (fr < fs[0]) {
      const Eigen::VectorXd xe = c + cfg.reflection * cfg.expansion * (c - xw);
      const double fe = eval(xe);
      if (fe < fr) {
        xs[m] = xe;
        fs[m] = fe;
      } else {
        xs[m] = xr;
        fs[m] = fr;
      }
      continue;
    }
    if (fr < fs[m - 1]) {
      xs[m] = xr;
      fs[m] = fr;
      continue;
    }
    bool do_shrink = false;
    if (fr < fs[m]) {
      const Eigen::VectorXd xc = c + cfg.contraction * cfg.reflection * (c - xw);
      const double fc = eval(xc);
      if (fc <= fr) {
        xs[m] = xc;
        fs[m] = fc;
      } else {
        do_shrink = true;
      }
    } else {
      const Eigen::VectorXd xcc = c - cfg.contraction * (c - xw);
      const double fcc = eval(xcc);
      if (fcc < fs[m]) {
        xs[m] = xcc;
        fs[m] = fcc;
      } else {
        do_shrink = true;
      }
    }
    if (do_shrink) {
      for (Eigen::Index i = 1; i <= m; ++i) {
        xs[i] = xs[0] + cfg.shrink * (xs[i] - xs[0]);
        fs[i] = eval(xs[i]);
      }
    }
  }
  res.x = xs[0];
  res.f = fs[0];
  return res;
}

double score_distribution(const Distribution& dist, const RegionPartition& partition, int k,
                          std::uint64_t seed, int threads) {
  return score(count(sample(dist, k, seed, threads), partition));
}

namespace {

bool finite_parameters(const Distribution& d) {
  if (const auto* f = std::get_if<FisherProduct>(&d))
    return f->coeffs.allFinite() && (f->coeffs.array() > 0.0).all();
  const auto& g = std::get<SquaredGaussian>(d);
  return g.mean.allFinite() && g.chol.allFinite() && (g.chol.diagonal().array() > 0.0).all();
}

}  // namespace

Objective score_objective(Family family, const RegionPartition& partition, int k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  const int n = partition.dim();
  return [family, &partition, k, seed, n](const Eigen::VectorXd& v) {
    const Distribution d = unpack(family, std::span<const double>(v.data(), static_cast<std::size_t>(v.size())), n);
    if (!finite_parameters(d)) return std::numeric_limits<double>::infinity();
    return 1.0 - score_distribution(d, partition, k, seed);
  };
}

OptimizationResult optimize_distribution(Family family, const RegionPartition& partition,
                                         const OptimizeOptions& opt) {
  if (opt.restarts < 1) throw std::invalid_argument("restarts must be at least 1");
  opt.nm.validate();
  const int n = partition.dim();
  const int m = n_coefficients(family, n);
  const Objective obj = score_objective(family, partition, opt.k, opt.seed);

  OptimizationResult out;
  out.family = family;
  out.baseline_score = 1.0 - obj(Eigen::VectorXd::Zero(m));
  out.restarts.resize(opt.restarts);

  parallel_for(static_cast<std::size_t>(opt.restarts), opt.threads, [&](std::size_t r) {
    Rng rng = substream(opt.seed, 1 + r);
    std::uniform_real_distribution<double> u(-opt.start_radius, opt.start_radius);
    RestartResult& rr = out.restarts[r];
    rr.start.resize(m);
    for (int i = 0; i < m; ++i) rr.start[i] = u(rng);
    rr.start_score = 1.0 - obj(rr.start);
    rr.run = nelder_mead(obj, rr.start, opt.nm);
    rr.best = rr.run.x;
    rr.best_score = 1.0 - rr.run.f;
  });

  for (int r = 0; r < opt.restarts; ++r)
    if (r == 0 || out.restarts[r].best_score > out.best_score) {
      out.best_score = out.restarts[r].best_score;
      out.best_restart = r;
    }
  out.best_coeffs = out.restarts[out.best_restart].best;
  out.best = unpack(family, std::span<const double>(out.best_coeffs.data(), static_cast<std::size_t>(m)), n);
  out.best_counts = count(sample(out.best, opt.k, opt.seed, opt.threads), partition);

  for (int s = 0; s < opt.noise_seeds; ++s)
    out.noise.fresh_scores.push_back(
        score_distribution(out.best, partition, opt.k, derive_seed(opt.seed, 1000003 + s), opt.threads));
  if (!out.noise.fresh_scores.empty()) {
    const double cnt = static_cast<double>(out.noise.fresh_scores.size());
    out.noise.mean = std::accumulate(out.noise.fresh_scores.begin(), out.noise.fresh_scores.end(), 0.0) / cnt;
    double ss = 0.0;
    for (double v : out.noise.fresh_scores) ss += (v - out.noise.mean) * (v - out.noise.mean);
    out.noise.stddev = cnt > 1 ? std::sqrt(ss / (cnt - 1)) : 0.0;
    out.noise.noisy = out.noise.stddev > opt.noise_stddev || std::abs(out.best_score - out.noise.mean) > opt.noise_gap;
  }
  return out;
}

}  // namespace hillnet
