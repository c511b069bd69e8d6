#include "pif/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "pif/errors.hpp"
#include "pif/io.hpp"

namespace pif {

namespace {

// rng stream tags, one per generation stage
enum : std::uint64_t {
  kStreamNetwork = 1,
  kStreamCovariates = 2,
  kStreamLatents = 3,
  kStreamInfluence = 4,
  kStreamViolation = 5,
  kStreamPurchases = 6,
  kStreamOutcomes = 7,
};

double level_value(Level l) {
  switch (l) {
    case Level::Low: return 10.0;
    case Level::Med: return 50.0;
    case Level::High: return 100.0;
  }
  return 50.0;
}

Grid draw_mixture(int rows, int cols, const std::vector<int>& one_hot_ids,
                  double a, double b, double s, Rng& rng) {
  Grid out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double shape = one_hot_ids[r] == c ? a : a / s;
      out(r, c) = rng.gamma(shape, b);
    }
  }
  return out;
}

}  // namespace

std::string to_string(Setting s) {
  switch (s) {
    case Setting::Item: return "item";
    case Setting::Homophily: return "homophily";
    case Setting::Both: return "both";
  }
  return "?";
}

std::string to_string(Level l) {
  switch (l) {
    case Level::Low: return "low";
    case Level::Med: return "med";
    case Level::High: return "high";
  }
  return "?";
}

Setting setting_from_string(const std::string& s) {
  if (s == "item") return Setting::Item;
  if (s == "homophily") return Setting::Homophily;
  if (s == "both") return Setting::Both;
  throw ConfigError("setting: expected item|homophily|both, got '" + s + "'");
}

Level level_from_string(const std::string& s) {
  if (s == "low") return Level::Low;
  if (s == "med" || s == "medium") return Level::Med;
  if (s == "high") return Level::High;
  throw ConfigError("level: expected low|med|high, got '" + s + "'");
}

double SimConfig::effective_s_gamma() const {
  return s_gamma > 0.0 ? s_gamma : level_value(level);
}

double SimConfig::effective_s_alpha() const {
  return s_alpha > 0.0 ? s_alpha : level_value(level);
}

nlohmann::json sim_config_to_json(const SimConfig& cfg) {
  nlohmann::json j = {
      {"n_persons", cfg.n_persons},
      {"n_items", cfg.n_items},
      {"n_regions", cfg.n_regions},
      {"n_groups", cfg.n_groups},
      {"factors_per_side", cfg.factors_per_side},
      {"base_shape", cfg.base_shape},
      {"base_rate", cfg.base_rate},
      {"s_rho", cfg.s_rho},
      {"s_tau", cfg.s_tau},
      {"s_gamma", cfg.s_gamma},
      {"s_alpha", cfg.s_alpha},
      {"setting", to_string(cfg.setting)},
      {"level", to_string(cfg.level)},
      {"zero_influence", cfg.zero_influence},
      {"influence_shape", cfg.influence_prior.shape},
      {"influence_rate", cfg.influence_prior.rate},
      {"seed", cfg.seed},
  };
  if (cfg.network.kind == NetworkSourceConfig::Kind::Sbm) {
    j["network"] = {{"type", "sbm"},
                    {"blocks", cfg.network.blocks},
                    {"p_in", cfg.network.p_in},
                    {"p_out", cfg.network.p_out}};
  } else {
    j["network"] = {{"type", "external"}, {"path", cfg.network.path}};
  }
  if (cfg.violation) {
    j["violation"] = {{"frac_pairs", cfg.violation->frac_pairs},
                      {"n_shared_items", cfg.violation->n_shared_items},
                      {"strength", cfg.violation->strength}};
  }
  return j;
}

namespace {

[[noreturn]] void bad_field(const std::string& path, const std::string& why) {
  throw ConfigError("config field '" + path + "': " + why);
}

template <class T>
T take(nlohmann::json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    T v = j.at(key).get<T>();
    j.erase(key);
    return v;
  } catch (const nlohmann::json::exception&) {
    bad_field(path.empty() ? key : path + "." + key, "wrong type");
  }
}

}  // namespace

SimConfig sim_config_from_json(const nlohmann::json& input) {
  if (!input.is_object()) throw ConfigError("config: expected a JSON object");
  nlohmann::json j = input;
  SimConfig cfg;
  cfg.n_persons = take<int>(j, "n_persons", "", take<int>(j, "n", "", cfg.n_persons));
  cfg.n_items = take<int>(j, "n_items", "", take<int>(j, "m", "", cfg.n_items));
  cfg.n_regions = take<int>(j, "n_regions", "", cfg.n_regions);
  cfg.n_groups = take<int>(j, "n_groups", "", cfg.n_groups);
  cfg.factors_per_side = take<int>(j, "factors_per_side", "", cfg.factors_per_side);
  cfg.base_shape = take<double>(j, "base_shape", "", cfg.base_shape);
  cfg.base_rate = take<double>(j, "base_rate", "", cfg.base_rate);
  cfg.s_rho = take<double>(j, "s_rho", "", cfg.s_rho);
  cfg.s_tau = take<double>(j, "s_tau", "", cfg.s_tau);
  cfg.s_gamma = take<double>(j, "s_gamma", "", cfg.s_gamma);
  cfg.s_alpha = take<double>(j, "s_alpha", "", cfg.s_alpha);
  cfg.setting = setting_from_string(take<std::string>(j, "setting", "", to_string(cfg.setting)));
  cfg.level = level_from_string(take<std::string>(j, "level", "", to_string(cfg.level)));
  cfg.zero_influence = take<bool>(j, "zero_influence", "", cfg.zero_influence);
  cfg.influence_prior.shape = take<double>(j, "influence_shape", "", cfg.influence_prior.shape);
  cfg.influence_prior.rate = take<double>(j, "influence_rate", "", cfg.influence_prior.rate);
  cfg.seed = take<std::uint64_t>(j, "seed", "", cfg.seed);
  if (j.contains("network")) {
    nlohmann::json net = j.at("network");
    j.erase("network");
    if (!net.is_object()) bad_field("network", "expected an object");
    const std::string type = take<std::string>(net, "type", "network", std::string("sbm"));
    if (type == "sbm") {
      cfg.network.kind = NetworkSourceConfig::Kind::Sbm;
      cfg.network.blocks = take<int>(net, "blocks", "network", cfg.network.blocks);
      cfg.network.p_in = take<double>(net, "p_in", "network", cfg.network.p_in);
      cfg.network.p_out = take<double>(net, "p_out", "network", cfg.network.p_out);
    } else if (type == "external") {
      cfg.network.kind = NetworkSourceConfig::Kind::External;
      cfg.network.path = take<std::string>(net, "path", "network", std::string());
      if (cfg.network.path.empty()) bad_field("network.path", "required for external networks");
    } else {
      bad_field("network.type", "expected sbm|external, got '" + type + "'");
    }
    if (!net.empty()) bad_field("network." + net.begin().key(), "unknown field");
  }
  if (j.contains("violation")) {
    nlohmann::json viol = j.at("violation");
    j.erase("violation");
    if (!viol.is_object()) bad_field("violation", "expected an object");
    ViolationConfig vc;
    vc.frac_pairs = take<double>(viol, "frac_pairs", "violation", vc.frac_pairs);
    vc.n_shared_items = take<int>(viol, "n_shared_items", "violation", vc.n_shared_items);
    vc.strength = take<double>(viol, "strength", "violation", vc.strength);
    if (!viol.empty()) bad_field("violation." + viol.begin().key(), "unknown field");
    cfg.violation = vc;
  }
  if (!j.empty()) bad_field(j.begin().key(), "unknown field");

  if (cfg.n_persons < 2) bad_field("n_persons", "must be at least 2");
  if (cfg.n_items < 1) bad_field("n_items", "must be at least 1");
  if (cfg.factors_per_side < 1 && (cfg.n_regions < 1 || cfg.n_groups < 1)) {
    bad_field("factors_per_side", "must be at least 1");
  }
  if (cfg.regions() < 2) bad_field("n_regions", "must be at least 2");
  if (cfg.groups() < 2) bad_field("n_groups", "must be at least 2");
  if (cfg.base_shape <= 0.0) bad_field("base_shape", "must be positive");
  if (cfg.base_rate <= 0.0) bad_field("base_rate", "must be positive");
  for (auto [name, v] : {std::pair<const char*, double>{"s_rho", cfg.s_rho},
                         {"s_tau", cfg.s_tau}}) {
    if (v <= 0.0) bad_field(name, "must be positive");
  }
  if (cfg.s_gamma < 0.0) bad_field("s_gamma", "must be positive (or 0 for the level default)");
  if (cfg.s_alpha < 0.0) bad_field("s_alpha", "must be positive (or 0 for the level default)");
  if (cfg.network.kind == NetworkSourceConfig::Kind::Sbm) {
    if (!(cfg.network.p_out >= 0.0 && cfg.network.p_in <= 1.0 &&
          cfg.network.p_out < cfg.network.p_in)) {
      bad_field("network.p_in", "need 0 <= p_out < p_in <= 1");
    }
    if (cfg.sbm_blocks() != cfg.regions()) {
      bad_field("network.blocks", "must equal the number of regions for sbm networks");
    }
  }
  if (cfg.violation) {
    if (!(cfg.violation->frac_pairs >= 0.0 && cfg.violation->frac_pairs <= 1.0)) {
      bad_field("violation.frac_pairs", "must lie in [0, 1]");
    }
    if (cfg.violation->n_shared_items < 0 || cfg.violation->n_shared_items > cfg.n_items) {
      bad_field("violation.n_shared_items", "must lie in [0, n_items]");
    }
    if (cfg.violation->strength < 0.0) bad_field("violation.strength", "must be nonnegative");
  }
  return cfg;
}

int sbm_block_of(int node, int n, int blocks) {
  return static_cast<int>((static_cast<long>(node) * blocks) / n);
}

SparseAdjacency generate_sbm(int n, int blocks, double p_in, double p_out, Rng& rng) {
  if (!(p_out >= 0.0 && p_in <= 1.0 && p_out <= p_in)) {
    throw ConfigError("generate_sbm: need 0 <= p_out <= p_in <= 1");
  }
  std::vector<SparseAdjacency::Edge> edges;
  for (int i = 0; i < n; ++i) {
    const int bi = sbm_block_of(i, n, blocks);
    for (int j = i + 1; j < n; ++j) {
      const double p = bi == sbm_block_of(j, n, blocks) ? p_in : p_out;
      if (p > 0.0 && rng.bernoulli(p)) edges.emplace_back(i, j);
    }
  }
  return SparseAdjacency(n, std::move(edges));
}

SimCovariates simulate_covariates(const SimConfig& cfg,
                                  const std::vector<int>* sbm_blocks, Rng& rng) {
  const int regions = cfg.regions();
  const int groups = cfg.groups();
  if (regions < 2 || groups < 2) {
    throw ConfigError("simulate_covariates: need at least 2 regions and 2 groups");
  }
  SimCovariates cov;
  cov.person_region.resize(cfg.n_persons);
  if (sbm_blocks != nullptr) {
    cov.person_region = *sbm_blocks;
  } else {
    for (int i = 0; i < cfg.n_persons; ++i) {
      cov.person_region[i] = static_cast<int>(rng.below(regions));
    }
  }
  cov.item_region.resize(cfg.n_items);
  for (int k = 0; k < cfg.n_items; ++k) cov.item_region[k] = static_cast<int>(rng.below(regions));
  cov.person_group.resize(cfg.n_persons);
  for (int i = 0; i < cfg.n_persons; ++i) cov.person_group[i] = static_cast<int>(rng.below(groups));
  cov.item_group.resize(cfg.n_items);
  for (int k = 0; k < cfg.n_items; ++k) cov.item_group[k] = static_cast<int>(rng.below(groups));
  return cov;
}

SimTruth simulate_latents(const SimConfig& cfg, const SimCovariates& cov, Rng& rng) {
  SimTruth truth;
  truth.person_region = cov.person_region;
  truth.item_region = cov.item_region;
  truth.person_group = cov.person_group;
  truth.item_group = cov.item_group;
  const double a = cfg.base_shape;
  const double b = cfg.base_rate;
  truth.rho = draw_mixture(cfg.n_persons, cfg.regions(), cov.person_region, a, b, cfg.s_rho, rng);
  truth.gamma = draw_mixture(cfg.n_items, cfg.regions(), cov.item_region, a, b,
                             cfg.effective_s_gamma(), rng);
  truth.tau = draw_mixture(cfg.n_items, cfg.groups(), cov.item_group, a, b, cfg.s_tau, rng);
  truth.alpha = draw_mixture(cfg.n_persons, cfg.groups(), cov.person_group, a, b,
                             cfg.effective_s_alpha(), rng);
  return truth;
}

Vec simulate_influence(const SimConfig& cfg, Rng& rng) {
  Vec beta = Vec::Zero(cfg.n_persons);
  if (cfg.zero_influence) return beta;
  for (int i = 0; i < cfg.n_persons; ++i) {
    beta[i] = rng.gamma(cfg.influence_prior.shape, cfg.influence_prior.rate);
  }
  return beta;
}

Vec mu_row(Setting setting, const SimTruth& truth, int i) {
  Vec mu;
  switch (setting) {
    case Setting::Homophily:
      mu = truth.gamma * truth.rho.row(i).transpose();
      break;
    case Setting::Item:
      mu = truth.tau * truth.alpha.row(i).transpose();
      break;
    case Setting::Both:
      mu = truth.gamma * truth.rho.row(i).transpose() +
           truth.tau * truth.alpha.row(i).transpose();
      break;
  }
  if (!truth.bump_person.empty()) {
    auto lo = std::lower_bound(truth.bump_person.begin(), truth.bump_person.end(), i);
    auto hi = std::upper_bound(truth.bump_person.begin(), truth.bump_person.end(), i);
    for (auto it = lo; it != hi; ++it) {
      const std::size_t pos = static_cast<std::size_t>(it - truth.bump_person.begin());
      mu[truth.bump_item[pos]] += truth.bump_value[pos];
    }
  }
  return mu;
}

CountMatrix simulate_purchases(const SimConfig& cfg, const SimTruth& truth, Rng& rng) {
  std::vector<CountEntry> entries;
  for (int i = 0; i < cfg.n_persons; ++i) {
    const Vec mu = mu_row(cfg.setting, truth, i);
    for (int k = 0; k < cfg.n_items; ++k) {
      if (mu[k] <= 0.0) continue;
      const long draw = rng.poisson(mu[k]);
      if (draw > 0) entries.push_back({i, k, draw});
    }
  }
  return CountMatrix(cfg.n_persons, cfg.n_items, std::move(entries));
}

Vec outcome_rate_row(Setting setting, const SimTruth& truth,
                     const SparseAdjacency& adj, const CountMatrix& x, int j) {
  Vec rate = mu_row(setting, truth, j);
  for (int peer : adj.neighbors(j)) {
    const double beta = truth.beta[peer];
    if (beta <= 0.0) continue;
    for (const auto& e : x.row(peer)) {
      rate[e.col] += beta * static_cast<double>(e.count);
    }
  }
  return rate;
}

CountMatrix simulate_outcomes(const SimConfig& cfg, const SimTruth& truth,
                              const SparseAdjacency& adj, const CountMatrix& x,
                              Rng& rng) {
  std::vector<CountEntry> entries;
  for (int j = 0; j < cfg.n_persons; ++j) {
    const Vec rate = outcome_rate_row(cfg.setting, truth, adj, x, j);
    for (int k = 0; k < cfg.n_items; ++k) {
      if (rate[k] <= 0.0) continue;
      const long draw = rng.poisson(rate[k]);
      if (draw > 0) entries.push_back({j, k, draw});
    }
  }
  return CountMatrix(cfg.n_persons, cfg.n_items, std::move(entries));
}

void inject_violation(SimTruth& truth, const SparseAdjacency& adj,
                      double frac_pairs, int n_shared_items, double strength,
                      double base_mean, Rng& rng) {
  if (!(frac_pairs >= 0.0 && frac_pairs <= 1.0)) {
    throw ConfigError("inject_violation: frac_pairs must lie in [0, 1]");
  }
  const int n_items = static_cast<int>(truth.gamma.rows());
  if (n_shared_items < 0 || n_shared_items > n_items) {
    throw ConfigError("inject_violation: n_shared_items out of range");
  }
  const long n_edges = std::lround(frac_pairs * static_cast<double>(adj.n_edges()));
  truth.violation_edges = static_cast<int>(n_edges);
  const double bump = strength * base_mean;
  if (n_edges == 0 || n_shared_items == 0 || bump <= 0.0) return;

  std::vector<std::size_t> edge_idx(adj.n_edges());
  std::iota(edge_idx.begin(), edge_idx.end(), 0);
  rng.shuffle(edge_idx.begin(), edge_idx.end());
  std::vector<int> items(n_items);
  std::iota(items.begin(), items.end(), 0);
  for (long e = 0; e < n_edges; ++e) {
    const auto& [i, j] = adj.edges()[edge_idx[e]];
    // partial Fisher-Yates: first n_shared_items entries become the sample
    for (int t = 0; t < n_shared_items; ++t) {
      const long swap_with = t + rng.below(n_items - t);
      std::swap(items[t], items[swap_with]);
    }
    for (int t = 0; t < n_shared_items; ++t) {
      truth.bump_person.push_back(i);
      truth.bump_item.push_back(items[t]);
      truth.bump_value.push_back(bump);
      truth.bump_person.push_back(j);
      truth.bump_item.push_back(items[t]);
      truth.bump_value.push_back(bump);
    }
  }
  // sort by person for the row lookups in mu_row
  std::vector<std::size_t> order(truth.bump_person.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (truth.bump_person[a] != truth.bump_person[b]) {
      return truth.bump_person[a] < truth.bump_person[b];
    }
    return truth.bump_item[a] < truth.bump_item[b];
  });
  std::vector<int> bp(order.size()), bi(order.size());
  std::vector<double> bv(order.size());
  for (std::size_t t = 0; t < order.size(); ++t) {
    bp[t] = truth.bump_person[order[t]];
    bi[t] = truth.bump_item[order[t]];
    bv[t] = truth.bump_value[order[t]];
  }
  truth.bump_person = std::move(bp);
  truth.bump_item = std::move(bi);
  truth.bump_value = std::move(bv);
}

Dataset simulate_dataset(const SimConfig& cfg) {
  Dataset ds;
  std::vector<int> blocks;
  if (cfg.network.kind == NetworkSourceConfig::Kind::Sbm) {
    Rng rng(mix_seed(cfg.seed, kStreamNetwork));
    ds.adjacency = generate_sbm(cfg.n_persons, cfg.sbm_blocks(), cfg.network.p_in,
                                cfg.network.p_out, rng);
    blocks.resize(cfg.n_persons);
    for (int i = 0; i < cfg.n_persons; ++i) {
      blocks[i] = sbm_block_of(i, cfg.n_persons, cfg.sbm_blocks());
    }
  } else {
    ds.adjacency = load_edgelist(cfg.network.path);
    if (ds.adjacency.n_persons() != cfg.n_persons) {
      throw DataError("external network has " +
                      std::to_string(ds.adjacency.n_persons()) +
                      " persons, config says " + std::to_string(cfg.n_persons));
    }
  }
  Rng cov_rng(mix_seed(cfg.seed, kStreamCovariates));
  SimCovariates cov =
      simulate_covariates(cfg, blocks.empty() ? nullptr : &blocks, cov_rng);
  Rng lat_rng(mix_seed(cfg.seed, kStreamLatents));
  SimTruth truth = simulate_latents(cfg, cov, lat_rng);
  Rng beta_rng(mix_seed(cfg.seed, kStreamInfluence));
  truth.beta = simulate_influence(cfg, beta_rng);
  if (cfg.violation) {
    Rng viol_rng(mix_seed(cfg.seed, kStreamViolation));
    inject_violation(truth, ds.adjacency, cfg.violation->frac_pairs,
                     cfg.violation->n_shared_items, cfg.violation->strength,
                     cfg.base_shape / cfg.base_rate, viol_rng);
  }
  Rng x_rng(mix_seed(cfg.seed, kStreamPurchases));
  ds.x = simulate_purchases(cfg, truth, x_rng);
  Rng y_rng(mix_seed(cfg.seed, kStreamOutcomes));
  ds.y = simulate_outcomes(cfg, truth, ds.adjacency, ds.x, y_rng);
  ds.truth = std::move(truth);
  return ds;
}

namespace {

void write_truth_table(const std::string& path, const std::vector<int>& region,
                       const std::vector<int>& group, const Vec* beta,
                       const Grid& first, const Grid& second,
                       const std::string& header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << header << "\n";
  for (Eigen::Index r = 0; r < first.rows(); ++r) {
    out << r << "\t" << region[r] << "\t" << group[r];
    if (beta != nullptr) out << "\t" << format_double((*beta)[r]);
    for (Eigen::Index c = 0; c < first.cols(); ++c) {
      out << "\t" << format_double(first(r, c));
    }
    for (Eigen::Index c = 0; c < second.cols(); ++c) {
      out << "\t" << format_double(second(r, c));
    }
    out << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

void read_truth_table(const std::string& path, int expect_rows, int first_cols,
                      int second_cols, std::vector<int>& region,
                      std::vector<int>& group, Vec* beta, Grid& first, Grid& second) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  region.resize(expect_rows);
  group.resize(expect_rows);
  if (beta != nullptr) *beta = Vec::Zero(expect_rows);
  first.resize(expect_rows, first_cols);
  second.resize(expect_rows, second_cols);
  std::string line;
  long line_no = 0;
  int row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    int id;
    if (!(ss >> id) || id != row) throw ParseError(path, line_no, "unexpected row id");
    ss >> region[row] >> group[row];
    if (beta != nullptr) ss >> (*beta)[row];
    for (int c = 0; c < first_cols; ++c) ss >> first(row, c);
    for (int c = 0; c < second_cols; ++c) ss >> second(row, c);
    if (!ss) throw ParseError(path, line_no, "short row");
    ++row;
  }
  if (row != expect_rows) throw DataError(path + ": wrong number of rows");
}

}  // namespace

void write_dataset(const Dataset& ds, const SimConfig& cfg, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest = {{"command", "simulate"},
                             {"config", sim_config_to_json(cfg)}};
  if (ds.truth && ds.truth->violation_edges > 0) {
    manifest["violation_edges"] = ds.truth->violation_edges;
  }
  std::ofstream mf(dir + "/manifest.json");
  if (!mf) throw DataError("cannot write " + dir + "/manifest.json");
  mf << manifest.dump(2) << "\n";
  save_edgelist(ds.adjacency, dir + "/adjacency.tsv");
  save_counts(ds.x, dir + "/x.tsv");
  save_counts(ds.y, dir + "/y.tsv");
  if (ds.truth) {
    const SimTruth& t = *ds.truth;
    write_truth_table(dir + "/truth_persons.tsv", t.person_region, t.person_group,
                      &t.beta, t.rho, t.alpha,
                      "# person\tregion\tgroup\tbeta\trho...\talpha...");
    write_truth_table(dir + "/truth_items.tsv", t.item_region, t.item_group, nullptr,
                      t.gamma, t.tau, "# item\tregion\tgroup\tgamma...\ttau...");
    if (!t.bump_person.empty()) {
      std::ofstream vf(dir + "/violation.tsv");
      if (!vf) throw DataError("cannot write " + dir + "/violation.tsv");
      vf << "# person\titem\tbump\n";
      for (std::size_t e = 0; e < t.bump_person.size(); ++e) {
        vf << t.bump_person[e] << "\t" << t.bump_item[e] << "\t"
           << format_double(t.bump_value[e]) << "\n";
      }
    }
  }
}

SimConfig load_dataset_config(const std::string& dir) {
  std::ifstream mf(dir + "/manifest.json");
  if (!mf) throw DataError("cannot open " + dir + "/manifest.json");
  nlohmann::json manifest = nlohmann::json::parse(mf);
  return sim_config_from_json(manifest.at("config"));
}

Dataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  const SimConfig cfg = load_dataset_config(dir);
  Dataset ds;
  ds.adjacency = load_edgelist(dir + "/adjacency.tsv");
  ds.x = load_counts(dir + "/x.tsv", cfg.n_persons, cfg.n_items);
  ds.y = load_counts(dir + "/y.tsv", cfg.n_persons, cfg.n_items);
  if (fs::exists(dir + "/truth_persons.tsv")) {
    SimTruth t;
    read_truth_table(dir + "/truth_persons.tsv", cfg.n_persons, cfg.regions(),
                     cfg.groups(), t.person_region, t.person_group, &t.beta,
                     t.rho, t.alpha);
    read_truth_table(dir + "/truth_items.tsv", cfg.n_items, cfg.regions(),
                     cfg.groups(), t.item_region, t.item_group, nullptr,
                     t.gamma, t.tau);
    if (fs::exists(dir + "/violation.tsv")) {
      std::ifstream vf(dir + "/violation.tsv");
      std::string line;
      long line_no = 0;
      while (std::getline(vf, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        int person, item;
        double bump;
        if (!(ss >> person >> item >> bump)) {
          throw ParseError(dir + "/violation.tsv", line_no, "expected person item bump");
        }
        t.bump_person.push_back(person);
        t.bump_item.push_back(item);
        t.bump_value.push_back(bump);
      }
    }
    ds.truth = std::move(t);
  }
  return ds;
}

Grid one_hot(const std::vector<int>& ids, int n_classes) {
  Grid out = Grid::Zero(static_cast<Eigen::Index>(ids.size()), n_classes);
  for (std::size_t r = 0; r < ids.size(); ++r) out(r, ids[r]) = 1.0;
  return out;
}

}  // namespace pif
