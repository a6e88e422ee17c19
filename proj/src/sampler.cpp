#include "hillnet/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "hillnet/parallel.hpp"
#include "hillnet/rng.hpp"

namespace hillnet {

using nlohmann::json;

void FisherProduct::validate() const {
  if (coeffs.size() == 0 || coeffs.size() % 2 != 0)
    throw std::invalid_argument("Fisher coefficients must have positive even length");
  for (Eigen::Index i = 0; i < coeffs.size(); ++i)
    if (!(coeffs[i] > 0.0) || !std::isfinite(coeffs[i]))
      throw std::invalid_argument("Fisher degrees of freedom must be positive and finite");
}

void SquaredGaussian::validate() const {
  const Eigen::Index n = mean.size();
  if (n == 0) throw std::invalid_argument("Gaussian mean must be nonempty");
  if (chol.rows() != n || chol.cols() != n) throw std::invalid_argument("Cholesky factor must be N x N");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(mean[i])) throw std::invalid_argument("Gaussian mean must be finite");
    if (!(chol(i, i) > 0.0) || !std::isfinite(chol(i, i)))
      throw std::invalid_argument("Cholesky diagonal must be positive");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j > i && chol(i, j) != 0.0) throw std::invalid_argument("Cholesky factor must be lower triangular");
      if (!std::isfinite(chol(i, j))) throw std::invalid_argument("Cholesky factor must be finite");
    }
  }
}

int distribution_dim(const Distribution& d) {
  return std::visit([](const auto& x) { return x.dim(); }, d);
}

Family family_of(const Distribution& d) {
  return std::holds_alternative<FisherProduct>(d) ? Family::fisher : Family::squared_gaussian;
}

Family parse_family(const std::string& name) {
  if (name == "fisher") return Family::fisher;
  if (name == "squared_gaussian" || name == "gaussian") return Family::squared_gaussian;
  throw std::invalid_argument("unknown distribution family '" + name + "'");
}

std::string family_name(Family f) { return f == Family::fisher ? "fisher" : "squared_gaussian"; }

namespace {

void fill_chunk(const FisherProduct& f, Batch& out, int row0, int rows, Rng& rng) {
  const int n = f.dim();
  std::vector<std::gamma_distribution<double>> g1, g2;
  for (int j = 0; j < n; ++j) {
    g1.emplace_back(f.coeffs[2 * j] / 2.0, 2.0);
    g2.emplace_back(f.coeffs[2 * j + 1] / 2.0, 2.0);
  }
  for (int r = row0; r < row0 + rows; ++r)
    for (int j = 0; j < n; ++j) {
      const double a = g1[j](rng) / f.coeffs[2 * j];
      const double b = g2[j](rng) / f.coeffs[2 * j + 1];
      out(r, j) = a / b;
    }
}

void fill_chunk(const SquaredGaussian& g, Batch& out, int row0, int rows, Rng& rng) {
  const int n = g.dim();
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(n);
  for (int r = row0; r < row0 + rows; ++r) {
    for (int j = 0; j < n; ++j) z[j] = normal(rng);
    const Eigen::VectorXd y = g.mean + g.chol.triangularView<Eigen::Lower>() * z;
    for (int j = 0; j < n; ++j) out(r, j) = y[j] * y[j];
  }
}

}  // namespace

Batch sample(const Distribution& dist, int k, std::uint64_t seed, int threads) {
  if (k < 1) throw std::invalid_argument("sample size must be at least 1");
  std::visit([](const auto& d) { d.validate(); }, dist);
  Batch out(k, distribution_dim(dist));
  const int chunks = (k + kSampleChunk - 1) / kSampleChunk;
  parallel_for(static_cast<std::size_t>(chunks), threads, [&](std::size_t c) {
    Rng rng = substream(seed, c);
    const int row0 = static_cast<int>(c) * kSampleChunk;
    const int rows = std::min(kSampleChunk, k - row0);
    std::visit([&](const auto& d) { fill_chunk(d, out, row0, rows, rng); }, dist);
  });
  return out;
}

CountVector count(const Batch& batch, const RegionPartition& partition) {
  if (batch.cols() != partition.dim())
    throw std::invalid_argument("batch dimension " + std::to_string(batch.cols()) +
                                " does not match partition dimension " + std::to_string(partition.dim()));
  CountVector c;
  c.counts.assign(partition.size(), 0);
  c.k = static_cast<long>(batch.rows());
  std::vector<double> pt(batch.cols());
  for (Eigen::Index r = 0; r < batch.rows(); ++r) {
    bool valid = true;
    for (Eigen::Index j = 0; j < batch.cols(); ++j) {
      pt[j] = batch(r, j);
      valid = valid && pt[j] > 0.0 && std::isfinite(pt[j]);
    }
    if (!valid) {
      ++c.outside;
      continue;
    }
    const Classification cl = partition.classify(pt);
    switch (cl.kind) {
      case Classification::Kind::region: ++c.counts[partition.index_of(cl.id)]; break;
      case Classification::Kind::boundary: ++c.boundary; break;
      case Classification::Kind::outside: ++c.outside; break;
    }
  }
  return c;
}

double score(const CountVector& c) {
  if (c.counts.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(c.counts.begin(), c.counts.end());
  if (*hi == 0) return 0.0;
  return static_cast<double>(*lo) / static_cast<double>(*hi);
}

std::vector<double> frequencies(const CountVector& c) {
  if (c.k < 1) throw std::invalid_argument("frequencies need k >= 1");
  std::vector<double> f;
  for (long v : c.counts) f.push_back(static_cast<double>(v) / static_cast<double>(c.k));
  return f;
}

LabeledBatch sample_balanced(const Distribution& dist, const RegionPartition& partition, int region_id,
                             int n_in, int n_out, std::uint64_t seed, long max_draws) {
  if (n_in < 0 || n_out < 0) throw std::invalid_argument("sample quotas must be nonnegative");
  if (partition.index_of(region_id) < 0) throw std::invalid_argument("unknown region id");
  if (distribution_dim(dist) != partition.dim()) throw std::invalid_argument("distribution and partition dimensions differ");
  std::visit([](const auto& d) { d.validate(); }, dist);
  const int n = partition.dim();
  LabeledBatch out;
  out.points.resize(n_in + n_out, n);
  int got_in = 0, got_out = 0, row = 0;
  long drawn = 0;
  Batch chunk(kSampleChunk, n);
  for (std::uint64_t c = 0; got_in < n_in || got_out < n_out; ++c) {
    Rng rng = substream(seed, c);
    std::visit([&](const auto& d) { fill_chunk(d, chunk, 0, kSampleChunk, rng); }, dist);
    for (int r = 0; r < kSampleChunk && (got_in < n_in || got_out < n_out); ++r) {
      if (drawn++ >= max_draws) throw std::runtime_error("balanced sampling exhausted its draw budget");
      std::vector<double> pt(chunk.row(r).data(), chunk.row(r).data() + n);
      if (!std::all_of(pt.begin(), pt.end(), [](double v) { return v > 0.0 && std::isfinite(v); })) continue;
      const Classification cl = partition.classify(pt);
      if (!cl.is_region()) continue;
      const bool inside = cl.id == region_id;
      if (inside ? got_in >= n_in : got_out >= n_out) continue;
      (inside ? got_in : got_out)++;
      out.points.row(row++) = chunk.row(r);
      out.labels.push_back(cl);
    }
  }
  return out;
}

int n_coefficients(Family family, int n) {
  return family == Family::fisher ? 2 * n : n + n * (n + 1) / 2;
}

Distribution unpack(Family family, std::span<const double> v, int n) {
  if (static_cast<int>(v.size()) != n_coefficients(family, n))
    throw std::invalid_argument("coefficient vector has wrong length for " + family_name(family));
  if (family == Family::fisher) {
    FisherProduct f;
    f.coeffs.resize(2 * n);
    for (int i = 0; i < 2 * n; ++i) f.coeffs[i] = std::exp(v[i]);
    return f;
  }
  SquaredGaussian g;
  g.mean.resize(n);
  g.chol = Eigen::MatrixXd::Zero(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i) g.mean[i] = v[k++];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) g.chol(i, j) = i == j ? std::exp(v[k++]) : v[k++];
  return g;
}

Eigen::VectorXd pack(const Distribution& d) {
  if (const auto* f = std::get_if<FisherProduct>(&d)) return f->coeffs.array().log().matrix();
  const auto& g = std::get<SquaredGaussian>(d);
  const int n = g.dim();
  Eigen::VectorXd v(n_coefficients(Family::squared_gaussian, n));
  int k = 0;
  for (int i = 0; i < n; ++i) v[k++] = g.mean[i];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) v[k++] = i == j ? std::log(g.chol(i, j)) : g.chol(i, j);
  return v;
}

json distribution_to_json(const Distribution& d) {
  if (const auto* f = std::get_if<FisherProduct>(&d))
    return {{"family", "fisher"}, {"coeffs", std::vector<double>(f->coeffs.data(), f->coeffs.data() + f->coeffs.size())}};
  const auto& g = std::get<SquaredGaussian>(d);
  json rows = json::array();
  for (int i = 0; i < g.dim(); ++i) {
    std::vector<double> row(g.dim());
    for (int j = 0; j < g.dim(); ++j) row[j] = g.chol(i, j);
    rows.push_back(row);
  }
  return {{"family", "squared_gaussian"},
          {"mean", std::vector<double>(g.mean.data(), g.mean.data() + g.mean.size())},
          {"chol", rows}};
}

Distribution distribution_from_json(const json& j) {
  try {
    const Family fam = parse_family(j.at("family").get<std::string>());
    if (fam == Family::fisher) {
      auto c = j.at("coeffs").get<std::vector<double>>();
      FisherProduct f{Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()))};
      f.validate();
      return f;
    }
    auto m = j.at("mean").get<std::vector<double>>();
    auto rows = j.at("chol").get<std::vector<std::vector<double>>>();
    SquaredGaussian g;
    g.mean = Eigen::Map<Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
    g.chol.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.size()) throw std::invalid_argument("Cholesky factor must be N x N");
      for (std::size_t k = 0; k < m.size(); ++k) g.chol(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    g.validate();
    return g;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("distribution schema: ") + e.what());
  }
}

}  // namespace hillnet
