#include "pif/factor_models.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "pif/errors.hpp"
#include "pif/factor_cavi.hpp"
#include "pif/io.hpp"

namespace pif {

std::string to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::Network: return "network";
    case FactorKind::Pmf: return "pmf";
    case FactorKind::Joint: return "joint";
  }
  return "?";
}

FactorKind factor_kind_from_string(const std::string& s) {
  if (s == "network") return FactorKind::Network;
  if (s == "pmf") return FactorKind::Pmf;
  if (s == "joint") return FactorKind::Joint;
  throw ConfigError("unknown factor model kind '" + s + "'");
}

FactorFit fit_network(const SparseAdjacency& adj, int K, const GammaPrior& prior,
                      const FitOptions& opts) {
  NetworkCavi cavi(adj, K, prior, opts);
  cavi.run();
  FactorFit fit;
  fit.kind = FactorKind::Network;
  fit.K = K;
  fit.c_hat = cavi.c.mean;
  fit.elbo_trace = std::move(cavi.elbo_trace);
  fit.converged = cavi.converged;
  fit.prior = prior;
  fit.seed = opts.seed;
  return fit;
}

FactorFit fit_pmf(const CountMatrix& x, int Q, const GammaPrior& prior,
                  const FitOptions& opts) {
  PmfCavi cavi(x, Q, prior, opts);
  cavi.run();
  FactorFit fit;
  fit.kind = FactorKind::Pmf;
  fit.K = Q;
  fit.d_hat = cavi.d.mean;
  fit.w_hat = cavi.w.mean;
  fit.elbo_trace = std::move(cavi.elbo_trace);
  fit.converged = cavi.converged;
  fit.prior = prior;
  fit.seed = opts.seed;
  return fit;
}

FactorFit fit_joint(const SparseAdjacency& adj, const CountMatrix& x, int K,
                    const GammaPrior& prior, const FitOptions& opts) {
  JointCavi cavi(adj, x, K, prior, opts);
  cavi.run();
  FactorFit fit;
  fit.kind = FactorKind::Joint;
  fit.K = K;
  fit.c_hat = cavi.c.mean;
  fit.w_hat = cavi.w.mean;
  fit.elbo_trace = std::move(cavi.elbo_trace);
  fit.converged = cavi.converged;
  fit.prior = prior;
  fit.seed = opts.seed;
  return fit;
}

double factor_pair_rate(const FactorFit& fit, int i, int j) {
  if (fit.c_hat.size() == 0) {
    throw DataError("factor_pair_rate: fit has no per-person memberships");
  }
  return fit.c_hat.row(i).dot(fit.c_hat.row(j));
}

double factor_cell_rate(const FactorFit& fit, int i, int k) {
  const Grid& person = fit.kind == FactorKind::Pmf ? fit.d_hat : fit.c_hat;
  if (person.size() == 0 || fit.w_hat.size() == 0) {
    throw DataError("factor_cell_rate: fit has no person x item factorization");
  }
  return person.row(i).dot(fit.w_hat.row(k));
}

void save_factor_fit(const FactorFit& fit, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest = {
      {"kind", to_string(fit.kind)},
      {"K", fit.K},
      {"prior", {{"shape", fit.prior.shape}, {"rate", fit.prior.rate}}},
      {"seed", fit.seed},
      {"converged", fit.converged},
      {"elbo_final", fit.elbo_trace.empty() ? 0.0 : fit.elbo_trace.back()},
  };
  std::ofstream mf(dir + "/manifest.json");
  if (!mf) throw DataError("cannot write " + dir + "/manifest.json");
  mf << manifest.dump(2) << "\n";

  if (fit.c_hat.size() != 0) save_grid(fit.c_hat, dir + "/c_hat.tsv");
  if (fit.d_hat.size() != 0) save_grid(fit.d_hat, dir + "/d_hat.tsv");
  if (fit.w_hat.size() != 0) save_grid(fit.w_hat, dir + "/w_hat.tsv");
  Grid trace(static_cast<Eigen::Index>(fit.elbo_trace.size()), 1);
  for (std::size_t t = 0; t < fit.elbo_trace.size(); ++t) trace(t, 0) = fit.elbo_trace[t];
  save_grid(trace, dir + "/elbo_trace.tsv");
}

FactorFit load_factor_fit(const std::string& dir) {
  std::ifstream mf(dir + "/manifest.json");
  if (!mf) throw DataError("cannot open " + dir + "/manifest.json");
  nlohmann::json manifest = nlohmann::json::parse(mf);
  FactorFit fit;
  fit.kind = factor_kind_from_string(manifest.at("kind").get<std::string>());
  fit.K = manifest.at("K").get<int>();
  fit.prior.shape = manifest.at("prior").at("shape").get<double>();
  fit.prior.rate = manifest.at("prior").at("rate").get<double>();
  fit.seed = manifest.at("seed").get<std::uint64_t>();
  fit.converged = manifest.at("converged").get<bool>();
  namespace fs = std::filesystem;
  if (fs::exists(dir + "/c_hat.tsv")) fit.c_hat = load_grid(dir + "/c_hat.tsv");
  if (fs::exists(dir + "/d_hat.tsv")) fit.d_hat = load_grid(dir + "/d_hat.tsv");
  if (fs::exists(dir + "/w_hat.tsv")) fit.w_hat = load_grid(dir + "/w_hat.tsv");
  Grid trace = load_grid(dir + "/elbo_trace.tsv");
  fit.elbo_trace.assign(trace.data(), trace.data() + trace.size());
  return fit;
}

}  // namespace pif
