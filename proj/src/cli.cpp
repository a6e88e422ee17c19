#include "hillnet/cli.hpp"
#include "hillnet/format.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hillnet/equilibria.hpp"
#include "hillnet/model_json.hpp"
#include "hillnet/optimizer.hpp"
#include "hillnet/parallel.hpp"
#include "hillnet/regions.hpp"
#include "hillnet/rng.hpp"
#include "hillnet/saddle.hpp"
#include "hillnet/sampler.hpp"
#include "hillnet/stats.hpp"

namespace hillnet::cli {
namespace {

using nlohmann::json;

struct Global {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out = "-";
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InputError("malformed JSON in '" + path + "': " + e.what());
  }
}

// Nonempty, non-comment lines.
std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

std::vector<double> parse_numbers(const std::string& line) {
  const auto first = line.find_first_not_of(" \t");
  if (first != std::string::npos && (line[first] == '[' || line[first] == '{')) {
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError(std::string("malformed JSON line: ") + e.what());
    }
    if (j.is_object()) j = j.at("params");
    try {
      return j.get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw InputError(std::string("expected a numeric array: ") + e.what());
    }
  }
  std::vector<double> v;
  std::stringstream ss(line);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (tok.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw InputError("not a number: '" + tok + "'");
    }
  }
  return v;
}

// Points from a JSON array of arrays (.json) or CSV rows.
std::vector<std::vector<double>> read_points(const std::string& path) {
  if (std::filesystem::path(path).extension() == ".json") {
    const std::string text = read_file(path);
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return {};
    json j;
    try {
      j = json::parse(text);
      return j.get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
      throw InputError("malformed points file '" + path + "': " + e.what());
    }
  }
  std::vector<std::vector<double>> pts;
  for (const auto& line : read_lines(path)) pts.push_back(parse_numbers(line));
  return pts;
}

RegionPartition load_partition(const std::string& spec) {
  if (spec == "toggle") return toggle_partition(false);
  if (spec == "toggle-full") return toggle_partition(true);
  if (spec == "half-line") return half_line_partition();
  try {
    return partition_from_json(read_json(spec));
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

std::string label_text(const Classification& c) {
  switch (c.kind) {
    case Classification::Kind::region: return std::to_string(c.id);
    case Classification::Kind::boundary: return "boundary";
    case Classification::Kind::outside: return "outside";
  }
  return "outside";
}

json label_json(const Classification& c) {
  if (c.is_region()) return c.id;
  return label_text(c);
}

// Model family selected on the command line; parameter vectors are its free
// parameters (the reduced Toggle takes 5 values, the exponent being the path).
struct ModelSpec {
  std::string name;
  std::optional<HillModel> base;

  int n_params() const {
    if (name == "reduced-toggle") return 5;
    if (name == "toggle") return 10;
    if (name == "emt") return 43;
    return base->n_free_parameters();
  }

  HillModel build(const std::vector<double>& p, double d) const {
    if (static_cast<int>(p.size()) != n_params() && !(name == "reduced-toggle" && p.size() == 6))
      throw ModelMismatch("model '" + name + "' expects " + std::to_string(n_params()) + " parameters, got " +
                          std::to_string(p.size()));
    try {
      if (name == "reduced-toggle") {
        auto r = ReducedToggleParams::from_combinatorial(std::span<const double>(p.data(), 5), p.size() == 6 ? p[5] : d);
        return builtin_reduced_toggle(r);
      }
      if (name == "toggle") return builtin_toggle_switch(ParameterVector::from_flat(p, 2, 2));
      if (name == "emt") return builtin_emt(p);
      return base->with_free_parameters(p);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  }
};

ModelSpec load_model(const std::string& spec) {
  if (spec == "reduced-toggle" || spec == "toggle" || spec == "emt") return {spec, std::nullopt};
  try {
    return {spec, model_from_json(read_json(spec))};
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback, bool append = false) {
    if (path.empty() || path == "-") {
      os_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, append ? std::ios::app : std::ios::trunc);
      if (!*file_) throw InputError("cannot write '" + path + "'");
      os_ = file_.get();
    }
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::string stop_name(StopReason r) {
  switch (r) {
    case StopReason::x_tol: return "x_tol";
    case StopReason::f_tol: return "f_tol";
    case StopReason::max_iter: return "max_iter";
  }
  return "max_iter";
}

// ---------------------------------------------------------------- classify

int cmd_classify(const Global& g, const std::string& partition_spec, const std::string& points_path,
                 std::ostream& out) {
  const RegionPartition part = load_partition(partition_spec);
  const auto pts = read_points(points_path);
  Output o(g.out, out);
  for (const auto& p : pts) {
    Classification c;
    try {
      c = part.classify(p);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
    for (double v : p) *o << format_double(v) << ',';
    *o << label_text(c) << '\n';
  }
  return ok;
}

// ---------------------------------------------------------------- balance

struct BalanceArgs {
  std::string config;
  std::string partition = "toggle";
  std::string family;
  std::optional<int> k;
  std::optional<int> restarts;
  std::string trace;
};

int cmd_balance(const Global& g, const BalanceArgs& a, std::ostream& out) {
  OptimizeOptions opt;
  opt.seed = g.seed;
  opt.threads = g.threads;
  std::string family = "fisher";
  std::string partition_spec = a.partition;
  if (!a.config.empty()) {
    const json c = read_json(a.config);
    try {
      family = c.value("family", family);
      opt.k = c.value("k", opt.k);
      opt.restarts = c.value("restarts", opt.restarts);
      if (c.contains("seed")) opt.seed = c.at("seed").get<std::uint64_t>();
      partition_spec = c.value("partition", partition_spec);
      if (c.contains("nm")) {
        const json& nm = c.at("nm");
        opt.nm.x_tol = nm.value("x_tol", opt.nm.x_tol);
        opt.nm.f_tol = nm.value("f_tol", opt.nm.f_tol);
        opt.nm.max_iter = nm.value("max_iter", opt.nm.max_iter);
        opt.nm.init_step = nm.value("init_step", opt.nm.init_step);
        opt.nm.reflection = nm.value("reflection", opt.nm.reflection);
        opt.nm.expansion = nm.value("expansion", opt.nm.expansion);
        opt.nm.contraction = nm.value("contraction", opt.nm.contraction);
        opt.nm.shrink = nm.value("shrink", opt.nm.shrink);
      }
    } catch (const json::exception& e) {
      throw InputError(std::string("balance config: ") + e.what());
    }
  }
  if (!a.family.empty()) family = a.family;
  if (a.k) opt.k = *a.k;
  if (a.restarts) opt.restarts = *a.restarts;

  const RegionPartition part = load_partition(partition_spec);
  Family fam;
  try {
    fam = parse_family(family);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  OptimizationResult res;
  try {
    if (opt.k < 1 || opt.restarts < 1) throw std::invalid_argument("k and restarts must be positive");
    res = optimize_distribution(fam, part, opt);
  } catch (const std::invalid_argument& e) {
    throw OptimizerError(e.what());
  }

  const int n = part.dim();
  json per = json::array();
  for (const auto& r : res.restarts)
    per.push_back({{"start", to_std(r.start)},
                   {"start_score", r.start_score},
                   {"best_score", r.best_score},
                   {"coeffs", distribution_to_json(unpack(fam, std::span<const double>(r.best.data(), r.best.size()), n))},
                   {"iterations", r.run.iterations},
                   {"evaluations", r.run.evaluations},
                   {"stop", stop_name(r.run.stop)},
                   {"converged", r.run.converged()},
                   {"beats_baseline", r.best_score > res.baseline_score}});
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n_coefficients(fam, n));
  json regions = json::array();
  for (const auto& r : part.regions()) regions.push_back(r.id);
  const json result = {
      {"family", family_name(fam)},
      {"k", opt.k},
      {"seed", opt.seed},
      {"best_coeffs", distribution_to_json(res.best)},
      {"search_vector", to_std(res.best_coeffs)},
      {"best_score", res.best_score},
      {"best_restart", res.best_restart},
      {"regions", regions},
      {"counts", res.best_counts.counts},
      {"boundary", res.best_counts.boundary},
      {"outside", res.best_counts.outside},
      {"frequencies", frequencies(res.best_counts)},
      {"baseline", {{"distribution", distribution_to_json(unpack(fam, std::span<const double>(zero.data(), zero.size()), n))},
                    {"score", res.baseline_score}}},
      {"noise",
       {{"fresh_scores", res.noise.fresh_scores},
        {"mean", res.noise.mean},
        {"stddev", res.noise.stddev},
        {"noisy", res.noise.noisy}}},
      {"per_restart", per}};
  Output o(g.out, out);
  *o << result.dump(2) << '\n';

  if (!a.trace.empty()) {
    Output t(a.trace, out);
    *t << "restart,iteration,evaluations,best_score";
    for (int i = 0; i < zero.size(); ++i) *t << ",v" << i;
    *t << '\n';
    for (std::size_t r = 0; r < res.restarts.size(); ++r)
      for (const auto& e : res.restarts[r].run.trace) {
        *t << r << ',' << e.iteration << ',' << e.evaluations << ',' << format_double(1.0 - e.best_f);
        for (int i = 0; i < e.best_x.size(); ++i) *t << ',' << format_double(e.best_x[i]);
        *t << '\n';
      }
  }
  return ok;
}

// ---------------------------------------------------------------- sample

struct SampleArgs {
  std::string dist;
  int k = 1000;
  std::string partition;
  int region = 0;
  int n_in = 0;
  int n_out = 0;
};

int cmd_sample(const Global& g, const SampleArgs& a, std::ostream& out) {
  Distribution d;
  try {
    d = distribution_from_json(read_json(a.dist));
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  Output o(g.out, out);
  if (a.region != 0) {
    const RegionPartition part = load_partition(a.partition.empty() ? "toggle" : a.partition);
    LabeledBatch b;
    try {
      b = sample_balanced(d, part, a.region, a.n_in, a.n_out, g.seed);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
    for (Eigen::Index r = 0; r < b.points.rows(); ++r) {
      for (Eigen::Index j = 0; j < b.points.cols(); ++j) *o << format_double(b.points(r, j)) << ',';
      *o << label_text(b.labels[r]) << '\n';
    }
    return ok;
  }
  Batch b;
  try {
    b = sample(d, a.k, g.seed, g.threads);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  std::optional<RegionPartition> part;
  if (!a.partition.empty()) part = load_partition(a.partition);
  for (Eigen::Index r = 0; r < b.rows(); ++r) {
    std::vector<double> pt(b.row(r).data(), b.row(r).data() + b.cols());
    for (std::size_t j = 0; j < pt.size(); ++j) *o << (j ? "," : "") << format_double(pt[j]);
    if (part) {
      const bool valid = std::all_of(pt.begin(), pt.end(), [](double v) { return v > 0.0 && std::isfinite(v); });
      *o << ',' << (valid ? label_text(part->classify(pt)) : "outside");
    }
    *o << '\n';
  }
  return ok;
}

// ---------------------------------------------------------------- equilibria

struct EquilibriaArgs {
  std::string model = "reduced-toggle";
  std::string params;
  double hill = 1.0;
  int grid = 4;
};

int cmd_equilibria(const Global& g, const EquilibriaArgs& a, std::ostream& out) {
  const ModelSpec spec = load_model(a.model);
  std::vector<double> p;
  if (!a.params.empty()) p = std::filesystem::exists(a.params) ? parse_numbers(read_lines(a.params).at(0)) : parse_numbers(a.params);
  HillModel m = (p.empty() && spec.base) ? *spec.base : spec.build(p, a.hill);
  if (spec.name != "reduced-toggle" || p.size() != 6) m = m.with_hill(a.hill);
  if (a.grid < 1) throw InputError("grid density must be at least 1");
  json j;
  try {
    const EnclosureResult enc = root_enclosure(m);
    const EquilibriumSet set = hill_equilibria(m, enc.rect, a.grid, g.threads);
    j = {{"hill", a.hill},
         {"rectangle", {{"lower", to_std(enc.rect.lower)}, {"upper", to_std(enc.rect.upper)}}},
         {"enclosure_converged", enc.converged},
         {"enclosure_iterations", enc.iterations},
         {"tolerance_fallback", set.tolerance_fallback},
         {"stable", set.stable_count()},
         {"equilibria", equilibria_to_json(set)}};
  } catch (const std::invalid_argument& e) {
    throw ModelMismatch(e.what());
  }
  Output o(g.out, out);
  *o << j.dump(2) << '\n';
  return ok;
}

// ---------------------------------------------------------------- saddles

struct SaddleArgs {
  std::string model = "reduced-toggle";
  std::string params;
  std::string dist;
  int count = 0;
  int region = 0;
  int n_in = 0;
  int n_out = 0;
  int start_index = 0;
  int subdivisions = 100;
  double tol_s = 1e-6;
  int grid = 0;
  bool timing = false;
};

std::vector<std::vector<double>> saddle_parameters(const Global& g, const SaddleArgs& a, const ModelSpec& spec) {
  if (!a.params.empty()) {
    std::vector<std::vector<double>> ps;
    for (const auto& line : read_lines(a.params)) ps.push_back(parse_numbers(line));
    return ps;
  }
  if (a.dist.empty()) throw InputError("saddles needs --params or --dist");
  Distribution d;
  try {
    d = distribution_from_json(read_json(a.dist));
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  if (distribution_dim(d) != spec.n_params())
    throw ModelMismatch("distribution dimension " + std::to_string(distribution_dim(d)) + " does not match model '" +
                        spec.name + "' with " + std::to_string(spec.n_params()) + " parameters");
  Batch b;
  if (a.region != 0) {
    if (spec.name != "reduced-toggle") throw ModelMismatch("region-balanced sampling needs the reduced Toggle model");
    b = sample_balanced(d, toggle_partition(), a.region, a.n_in, a.n_out, g.seed).points;
  } else {
    if (a.count < 1) throw InputError("--count must be positive when sampling");
    b = sample(d, a.count, g.seed, g.threads);
  }
  std::vector<std::vector<double>> ps;
  for (Eigen::Index r = 0; r < b.rows(); ++r) ps.emplace_back(b.row(r).data(), b.row(r).data() + b.cols());
  return ps;
}

// Keeps records with index < start from an earlier, possibly interrupted, run.
void truncate_for_resume(const std::string& path, int start) {
  if (path.empty() || path == "-" || !std::filesystem::exists(path)) return;
  std::vector<std::string> keep;
  for (const auto& line : read_lines(path)) {
    try {
      const json j = json::parse(line);
      if (j.at("index").get<int>() < start) keep.push_back(line);
    } catch (const json::exception&) {
      // a torn trailing line
    }
  }
  std::ofstream f(path, std::ios::trunc);
  for (const auto& l : keep) f << l << '\n';
}

int cmd_saddles(const Global& g, const SaddleArgs& a, std::ostream& out) {
  const ModelSpec spec = load_model(a.model);
  const auto params = saddle_parameters(g, a, spec);
  for (const auto& p : params)
    if (static_cast<int>(p.size()) != spec.n_params())
      throw ModelMismatch("model '" + spec.name + "' expects " + std::to_string(spec.n_params()) +
                          " parameters, got " + std::to_string(p.size()));
  PipelineConfig cfg;
  cfg.subdivisions = a.subdivisions;
  cfg.tol_s = a.tol_s;
  cfg.grid_k = a.grid > 0 ? a.grid : (spec.name == "emt" ? 2 : 4);
  if (cfg.subdivisions < 1 || !(cfg.tol_s > 0.0)) throw InputError("subdivisions and tol-s must be positive");
  if (a.start_index < 0) throw InputError("--start-index must be nonnegative");

  if (a.start_index > 0) truncate_for_resume(g.out, a.start_index);
  Output o(g.out, out, a.start_index > 0);
  const RegionPartition toggle = toggle_partition();

  const std::size_t total = params.size();
  const std::size_t block = static_cast<std::size_t>(resolve_threads(g.threads)) * 4;
  for (std::size_t begin = static_cast<std::size_t>(a.start_index); begin < total; begin += block) {
    const std::size_t end = std::min(total, begin + block);
    std::vector<json> records(end - begin);
    parallel_for(end - begin, g.threads, [&](std::size_t off) {
      const std::size_t idx = begin + off;
      const auto t0 = std::chrono::steady_clock::now();
      const HillModel m = spec.build(params[idx], 1.0);
      const SaddleOutcome oc = classify_parameter(HillPath(m), cfg);
      json rec = saddle_outcome_to_json(oc);
      rec["index"] = idx;
      rec["params"] = params[idx];
      rec["region"] = spec.name == "reduced-toggle" ? label_json(toggle.classify(params[idx])) : json(nullptr);
      if (a.timing)
        rec["wall_time_ms"] =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      records[off] = std::move(rec);
    });
    for (const auto& r : records) *o << r.dump() << '\n';
    (*o).flush();
  }
  return ok;
}

// ---------------------------------------------------------------- results files

struct ResultRecord {
  long index = 0;
  std::vector<double> params;
  json region;
  OutcomeKind outcome = OutcomeKind::none;
  std::optional<double> d_min;
};

std::vector<ResultRecord> read_results(const std::string& path) {
  std::vector<ResultRecord> out;
  for (const auto& line : read_lines(path)) {
    try {
      const json j = json::parse(line);
      ResultRecord r;
      r.index = j.at("index").get<long>();
      r.params = j.at("params").get<std::vector<double>>();
      r.region = j.value("region", json(nullptr));
      r.outcome = parse_outcome(j.at("outcome").get<std::string>());
      for (const auto& s : j.at("saddles")) {
        const double d = s.at("d").get<double>();
        if (!r.d_min || d < *r.d_min) r.d_min = d;
      }
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw InputError(std::string("results schema: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("results schema: ") + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------- chitest

struct ChiArgs {
  std::string results;
  std::string labels;
  int region_a = 0;
  bool yates = false;
};

int cmd_chitest(const Global& g, const ChiArgs& a, std::ostream& out, std::ostream& err) {
  const auto results = read_results(a.results);
  std::vector<std::pair<Label, OutcomeKind>> rows;
  long dropped = 0;
  if (!a.labels.empty()) {
    std::map<long, std::string> labels;
    for (const auto& line : read_lines(a.labels)) {
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw InputError("label lines are 'index,label'");
      long idx;
      try {
        idx = std::stol(line.substr(0, comma));
      } catch (const std::exception&) {
        throw InputError("bad label index in '" + line + "'");
      }
      std::string lab = line.substr(comma + 1);
      lab.erase(std::remove_if(lab.begin(), lab.end(), [](unsigned char c) { return std::isspace(c); }), lab.end());
      if (!labels.emplace(idx, lab).second) throw InputError("duplicate label index " + std::to_string(idx));
    }
    std::set<long> seen;
    for (const auto& r : results) {
      seen.insert(r.index);
      auto it = labels.find(r.index);
      if (it == labels.end()) throw InputError("no label for result index " + std::to_string(r.index));
      if (it->second == "A")
        rows.emplace_back(Label::A, r.outcome);
      else if (it->second == "B")
        rows.emplace_back(Label::B, r.outcome);
      else
        ++dropped;
    }
    if (seen.size() != labels.size()) throw InputError("labels and results do not align by index");
  } else if (a.region_a != 0) {
    for (const auto& r : results) {
      if (!r.region.is_number_integer()) {
        ++dropped;
        continue;
      }
      rows.emplace_back(r.region.get<int>() == a.region_a ? Label::A : Label::B, r.outcome);
    }
  } else {
    throw InputError("chitest needs --labels or --region-a");
  }
  if (dropped > 0) err << "warning: " << dropped << " record(s) outside categories A/B excluded\n";
  const ContingencyMatrix M = build_contingency(rows);
  ChiSquareResult r;
  try {
    r = chi_square_test(M, a.yates);
  } catch (const std::domain_error& e) {
    throw InputError(e.what());
  }
  json j = chi_square_to_json(M, r);
  j["yates"] = a.yates;
  j["unlabeled"] = dropped;
  Output o(g.out, out);
  *o << j.dump(2) << '\n';
  return ok;
}

// ---------------------------------------------------------------- heatmap

int cmd_heatmap(const Global& g, const std::string& results_path, double abar1, double abar2, std::ostream& out) {
  const auto results = read_results(results_path);
  std::vector<HeatmapInput> inputs;
  for (const auto& r : results) {
    if (r.params.size() != 5)
      throw InputError("heatmap needs reduced Toggle parameters (5 values), record " + std::to_string(r.index) +
                       " has " + std::to_string(r.params.size()));
    HeatmapInput in;
    std::copy(r.params.begin(), r.params.end(), in.xi.begin());
    in.category = r.outcome;
    in.d_min = r.d_min;
    inputs.push_back(in);
  }
  auto caps = default_caps(inputs);
  if (abar1 > 0.0) caps.first = abar1;
  if (abar2 > 0.0) caps.second = abar2;
  std::vector<HeatmapRow> rows;
  try {
    rows = heatmap_export(inputs, caps.first, caps.second);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  Output o(g.out, out);
  write_heatmap_csv(*o, rows);
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Balanced region sampling and saddle-node detection for Hill models"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--out", g.out, "Output path, '-' for stdout")->capture_default_str();

  std::string partition = "toggle", points;
  auto* classify = app.add_subcommand("classify", "Label points by region");
  classify->add_option("--partition", partition, "toggle | toggle-full | half-line | partition JSON")->capture_default_str();
  classify->add_option("--points", points, "Points file (.json array or CSV)")->required();

  BalanceArgs ba;
  auto* balance = app.add_subcommand("balance", "Optimize a sampling distribution for balanced region counts");
  balance->add_option("--config", ba.config, "Config JSON {family, k, restarts, seed, partition, nm}");
  balance->add_option("--partition", ba.partition)->capture_default_str();
  balance->add_option("--family", ba.family, "fisher | squared_gaussian");
  balance->add_option("--k", ba.k, "Samples per score evaluation");
  balance->add_option("--restarts", ba.restarts);
  balance->add_option("--trace", ba.trace, "Per-iteration trace CSV");

  SampleArgs sa;
  auto* samp = app.add_subcommand("sample", "Draw a batch from a distribution spec");
  samp->add_option("--dist", sa.dist, "Distribution JSON")->required();
  samp->add_option("--k", sa.k)->capture_default_str();
  samp->add_option("--partition", sa.partition, "Append region labels");
  samp->add_option("--region", sa.region, "Balance draws between this region and the rest");
  samp->add_option("--n-in", sa.n_in);
  samp->add_option("--n-out", sa.n_out);

  EquilibriaArgs ea;
  auto* eq = app.add_subcommand("equilibria", "Enclose and enumerate equilibria");
  eq->add_option("--model", ea.model, "reduced-toggle | toggle | emt | model JSON")->capture_default_str();
  eq->add_option("--params", ea.params, "Comma separated values or a file");
  eq->add_option("--hill", ea.hill, "Shared Hill exponent")->capture_default_str();
  eq->add_option("--grid", ea.grid)->capture_default_str();

  SaddleArgs sd;
  auto* sad = app.add_subcommand("saddles", "Saddle-node search along Hill paths, one JSON record per parameter");
  sad->add_option("--model", sd.model, "reduced-toggle | toggle | emt | model JSON")->capture_default_str();
  sad->add_option("--params", sd.params, "One parameter vector per line (CSV or JSON)");
  sad->add_option("--dist", sd.dist, "Sample parameters from this distribution instead");
  sad->add_option("--count", sd.count, "Number of sampled parameters");
  sad->add_option("--region", sd.region, "Balance samples between this Toggle region and the rest");
  sad->add_option("--n-in", sd.n_in);
  sad->add_option("--n-out", sd.n_out);
  sad->add_option("--start-index", sd.start_index, "Resume from this index")->capture_default_str();
  sad->add_option("--subdivisions", sd.subdivisions)->capture_default_str();
  sad->add_option("--tol-s", sd.tol_s)->capture_default_str();
  sad->add_option("--grid", sd.grid, "Grid density (default 4, or 2 for emt)");
  sad->add_flag("--timing", sd.timing, "Add wall_time_ms to records");

  ChiArgs ca;
  auto* chi = app.add_subcommand("chitest", "Contingency matrix and chi-square test");
  chi->add_option("--results", ca.results, "JSON-lines from saddles")->required();
  chi->add_option("--labels", ca.labels, "Lines 'index,label' with labels A/B");
  chi->add_option("--region-a", ca.region_a, "Label A = this region, B = any other");
  chi->add_flag("--yates", ca.yates, "Yates continuity correction");

  std::string hm_results;
  double abar1 = 0.0, abar2 = 0.0;
  auto* hm = app.add_subcommand("heatmap", "Project reduced Toggle results into [0,3]^2");
  hm->add_option("--results", hm_results, "JSON-lines from saddles")->required();
  hm->add_option("--abar1", abar1, "Cap for a1 (default max a1 + 1)");
  hm->add_option("--abar2", abar2, "Cap for a2 (default max a2 + 1)");

  std::vector<const char*> argv{"hillnet"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return input_error;
  }

  try {
    if (*classify) return cmd_classify(g, partition, points, out);
    if (*balance) return cmd_balance(g, ba, out);
    if (*samp) return cmd_sample(g, sa, out);
    if (*eq) return cmd_equilibria(g, ea, out);
    if (*sad) return cmd_saddles(g, sd, out);
    if (*chi) return cmd_chitest(g, ca, out, err);
    if (*hm) return cmd_heatmap(g, hm_results, abar1, abar2, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return input_error;
  } catch (const OptimizerError& e) {
    err << "optimizer error: " << e.what() << '\n';
    return optimizer_failure;
  } catch (const ModelMismatch& e) {
    err << "model mismatch: " << e.what() << '\n';
    return model_mismatch;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return input_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return input_error;
  }
  return input_error;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace hillnet::cli
