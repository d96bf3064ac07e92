// SPDX-License-Identifier: Apache-2.0
//
// etp: command-line front end.
//   etp example <id> [--target AD]           named examples
//   etp region werner|isotropic --d 3        analytic region rasters
//   etp sample --n 4 --d 2 --out DIR         Haar campaigns (resumable)
//   etp uniqueness <id> | --state F --marginals AB,BC
//   etp certify --spec F | --state F --marginals AB,BC  --target AC
// Exit codes: 0 success, 2 infeasible, 3 numerical trouble, 64 usage.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "etp/campaign.hpp"
#include "etp/certify.hpp"
#include "etp/density_json.hpp"
#include "etp/regions.hpp"
#include "etp/states.hpp"

namespace {

using namespace etp;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitTrouble = 3;
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 7;
  double tol = sdp::SolveOptions{}.tol;
  int max_iters = sdp::SolveOptions{}.max_iters;
  std::string out;
  bool resume = false;
  int workers = 1;

  CertifyOptions certify() const {
    CertifyOptions o;
    o.sdp.tol = tol;
    o.sdp.max_iters = max_iters;
    return o;
  }
};

SubsystemSet parse_parties(const std::string& s) {
  std::vector<int> idx;
  for (char c : s) {
    if (c >= 'A' && c <= 'Z') idx.push_back(c - 'A');
    else if (c >= 'a' && c <= 'z') idx.push_back(c - 'a');
    else throw UsageError("party labels are letters (A = party 0), got '" + s + "'");
  }
  if (idx.empty()) throw UsageError("empty party label");
  return SubsystemSet(idx);
}

std::string party_label(const SubsystemSet& t) {
  std::string s;
  for (int k : t.indices()) s += static_cast<char>('A' + k);
  return s;
}

std::vector<SubsystemSet> parse_party_list(const std::string& s) {
  std::vector<SubsystemSet> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_parties(item));
  if (out.empty()) throw UsageError("empty marginal list");
  return out;
}

int exit_code(sdp::Status s) {
  switch (s) {
    case sdp::Status::Optimal: return kExitOk;
    case sdp::Status::Infeasible: return kExitInfeasible;
    default: return kExitTrouble;
  }
}

int worst(int a, int b) {
  auto rank = [](int c) { return c == kExitOk ? 0 : c == kExitTrouble ? 1 : 2; };
  return rank(a) >= rank(b) ? a : b;
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

// ---------------------------------------------------------------- examples

struct ExampleCase {
  std::string id;
  MarginalSpec spec;
  std::vector<SubsystemSet> targets;
  std::optional<CVector> pure;
  std::optional<DensityMatrix> global;
  bool gme = false;
};

struct TreeArgs {
  int n = 3;
  double gamma = 1.0;
  std::string shape = "path";
};

std::string normalize_id(std::string id) {
  for (char& c : id)
    if (c == '_') c = '-';
  return id;
}

const std::vector<std::string>& example_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v{"tiles-chain", "pyramid-chain", "w-tree"};
    for (const auto& z : named_example_ids()) v.push_back(normalize_id(z));
    return v;
  }();
  return ids;
}

ExampleCase resolve_example(const std::string& raw, const TreeArgs& tree) {
  const std::string id = normalize_id(raw);
  ExampleCase ex;
  ex.id = id;
  if (id == "tiles-chain" || id == "pyramid-chain") {
    const DensityMatrix rho = upb_state(id == "tiles-chain" ? Upb::Tiles : Upb::Pyramid);
    ex.spec.dims = {3, 3, 3};
    ex.spec.add(SubsystemSet{0, 1}, rho).add(SubsystemSet{1, 2}, rho);
    ex.targets = {SubsystemSet{0, 2}};
    return ex;
  }
  if (id == "w-tree") {
    if (tree.n < 3) throw UsageError("w-tree needs --n >= 3");
    if (!(tree.gamma > 0.0 && tree.gamma <= 1.0)) throw UsageError("w-tree needs --gamma in (0, 1]");
    const TreeShape shape = tree.shape == "star" ? TreeShape::Star : TreeShape::Path;
    if (tree.shape != "star" && tree.shape != "path") throw UsageError("--shape is path or star");
    ex.spec = w_tree_spec(tree.n, tree.gamma, shape);
    ex.targets = {shape == TreeShape::Path ? SubsystemSet{0, tree.n - 1} : SubsystemSet{1, 2}};
    ex.global = w_noisy_global(tree.n, tree.gamma);
    if (tree.gamma == 1.0) ex.pure = w_state(tree.n);
    return ex;
  }
  std::string zoo = id;
  for (char& c : zoo)
    if (c == '-') c = '_';
  NamedExample z;
  try {
    z = named_example(zoo);
  } catch (const std::invalid_argument&) {
    std::string all;
    for (const auto& k : example_ids()) all += (all.empty() ? "" : ", ") + k;
    throw UsageError("unknown example '" + raw + "' (known: " + all + ")");
  }
  ex.spec = z.spec;
  ex.targets = z.targets;
  ex.pure = z.pure;
  ex.global = z.mixed;
  if (z.pure) ex.global = DensityMatrix::from_pure(z.dims, *z.pure);
  ex.gme = !ex.targets.empty() && ex.targets[0].size() == 3;
  return ex;
}

int run_targets(const std::string& id, const MarginalSpec& spec, const std::vector<SubsystemSet>& targets,
                const std::string& criterion, const std::optional<CMatrix>& witness, const CertifyOptions& opts) {
  json results = json::array();
  int code = kExitOk;
  for (const auto& t : targets) {
    json r;
    r["target"] = party_label(t);
    if (criterion == "auto") {
      const TransitivityVerdict v = verdict(spec, t, opts);
      r["verdict"] = to_json(v);
      r["value"] = v.certificate.value;
      code = worst(code, exit_code(v.certificate.status));
    } else {
      Certificate c;
      if (criterion == "lambda") c = lambda_star(spec, t, opts);
      else if (criterion == "ccnr") c = min_ccnr(spec, t, opts);
      else if (criterion == "gme") c = gme_minmax(spec, t, opts);
      else if (criterion == "witness") {
        if (!witness) throw UsageError("--criterion witness needs --witness FILE");
        c = witness_opt(spec, t, *witness, opts);
      } else {
        throw UsageError("unknown criterion '" + criterion + "'");
      }
      r["certificate"] = to_json(c);
      r["value"] = c.value;
      r["certifies"] = certifies(c, opts.eps_cert);
      code = worst(code, exit_code(c.status));
    }
    results.push_back(r);
  }
  print({{"id", id}, {"results", results}});
  return code;
}

// ---------------------------------------------------------------- uniqueness

int report_uniqueness(const std::string& id, const MarginalSpec& spec, const DensityMatrix& reference,
                      const CertifyOptions& opts) {
  const Certificate c = min_fidelity(spec, reference, opts);
  const double inf = c.extra.at("infidelity");
  json below = json::object();
  for (double eps : {1e-8, 1e-7, 1e-6}) {
    char key[16];
    std::snprintf(key, sizeof key, "%.0e", eps);
    below[key] = inf < eps;
  }
  print({{"id", id},
         {"infidelity", inf},
         {"min_fidelity", c.value},
         {"support_rank", c.extra.at("support_rank")},
         {"below", below},
         {"status", std::string(sdp::to_string(c.status))},
         {"residuals", {{"primal", c.residuals.primal}, {"dual", c.residuals.dual}, {"gap", c.residuals.gap}}}});
  return exit_code(c.status);
}

MarginalSpec spec_from_state(const DensityMatrix& rho, const std::vector<SubsystemSet>& parts) {
  MarginalSpec spec;
  spec.dims = rho.dims();
  for (const auto& p : parts) {
    p.check(rho.n_parties());
    spec.add(p, partial_trace(rho, p));
  }
  spec.validate();
  return spec;
}

CMatrix read_witness(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open witness file " + path);
  const json j = json::parse(in);
  if (!j.contains("re") || !j.contains("im")) throw UsageError("witness json needs re and im");
  return matrix_from_json(j.at("re"), j.at("im"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement (meta)transitivity from marginals"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "64-bit seed for sampling");
  app.add_option("--tol", g.tol, "interior-point stopping tolerance");
  app.add_option("--max-iters", g.max_iters, "interior-point iteration limit");
  app.add_option("--out", g.out, "output directory");
  app.add_flag("--resume", g.resume, "resume a campaign in --out");
  app.add_option("--workers", g.workers, "parallel workers for campaigns")->check(CLI::PositiveNumber);

  std::string list_help = "named example id: ";
  for (const auto& k : example_ids()) list_help += k + " ";

  // example
  auto* ex_cmd = app.add_subcommand("example", "run a named example");
  std::string ex_id, ex_target, ex_criterion = "auto";
  TreeArgs tree;
  ex_cmd->add_option("id", ex_id, list_help)->required();
  ex_cmd->add_option("--target", ex_target, "target parties, e.g. AD (default: the example's targets)");
  ex_cmd->add_option("--criterion", ex_criterion, "auto|lambda|ccnr|gme");
  ex_cmd->add_option("--n", tree.n, "w-tree party count");
  ex_cmd->add_option("--gamma", tree.gamma, "w-tree noise parameter");
  ex_cmd->add_option("--shape", tree.shape, "w-tree shape: path|star");

  // region
  auto* reg_cmd = app.add_subcommand("region", "rasterize the Werner or isotropic region");
  std::string family;
  int reg_d = 3, resolution = 201;
  std::vector<double> query;
  reg_cmd->add_option("family", family, "werner|isotropic")->required()->check(CLI::IsMember({"werner", "isotropic"}));
  reg_cmd->add_option("--d", reg_d, "local dimension")->check(CLI::Range(2, 1000));
  reg_cmd->add_option("--resolution", resolution, "pixels per axis")->check(CLI::Range(2, 100000));
  reg_cmd->add_option("--query", query, "print the pixel containing x y instead of the raster")->expected(2);

  // sample
  auto* samp_cmd = app.add_subcommand("sample", "Haar-sampling campaign on an n-party chain");
  int s_n = 3, s_d = 2;
  long s_samples = 0;
  samp_cmd->add_option("--n", s_n, "party count")->check(CLI::Range(3, 14));
  samp_cmd->add_option("--d", s_d, "local dimension")->check(CLI::Range(2, 128));
  samp_cmd->add_option("--samples", s_samples, "sample count (default depends on n, d)");

  // uniqueness
  auto* uni_cmd = app.add_subcommand("uniqueness", "infidelity of the global state given marginals");
  std::string u_id, u_state, u_marginals;
  uni_cmd->add_option("id", u_id, list_help);
  uni_cmd->add_option("--state", u_state, "global state (DensityMatrix JSON)");
  uni_cmd->add_option("--marginals", u_marginals, "imposed marginals, e.g. AB,BC");
  uni_cmd->add_option("--n", tree.n, "w-tree party count");
  uni_cmd->add_option("--gamma", tree.gamma, "w-tree noise parameter");
  uni_cmd->add_option("--shape", tree.shape, "w-tree shape: path|star");

  // certify
  auto* cert_cmd = app.add_subcommand("certify", "certify a target from a marginal spec or a global state");
  std::string c_spec, c_state, c_marginals, c_target, c_criterion = "auto", c_witness;
  cert_cmd->add_option("--spec", c_spec, "marginal spec JSON");
  cert_cmd->add_option("--state", c_state, "global state JSON (marginals taken from it)");
  cert_cmd->add_option("--marginals", c_marginals, "marginals to keep from --state, e.g. AB,BC");
  cert_cmd->add_option("--target", c_target, "target parties, e.g. AC")->required();
  cert_cmd->add_option("--criterion", c_criterion, "auto|lambda|ccnr|gme|witness");
  cert_cmd->add_option("--witness", c_witness, "witness operator JSON {re, im} for --criterion witness");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    const CertifyOptions opts = g.certify();
    if (*ex_cmd) {
      const ExampleCase ex = resolve_example(ex_id, tree);
      std::vector<SubsystemSet> targets = ex.targets;
      if (!ex_target.empty()) targets = {parse_parties(ex_target)};
      for (const auto& t : targets) t.check(ex.spec.n_parties());
      std::string crit = ex_criterion;
      if (crit == "auto" && ex.gme) crit = "gme";
      return run_targets(ex.id, ex.spec, targets, crit, std::nullopt, opts);
    }
    if (*reg_cmd) {
      const RegionFamily fam = family == "werner" ? RegionFamily::Werner : RegionFamily::Isotropic;
      if (!query.empty()) {
        auto pixel = [&](double v) {
          if (!(v >= 0.0 && v <= 1.0)) throw UsageError("--query coordinates must lie in [0, 1]");
          const int i = std::min(resolution - 1, static_cast<int>(v * resolution));
          return (i + 0.5) / resolution;
        };
        const double x = pixel(query[0]), y = pixel(query[1]);
        const RegionVerdict r = fam == RegionFamily::Werner ? werner_classify(reg_d, x, y) : isotropic_classify(reg_d, x, y);
        json j{{"family", family}, {"d", reg_d},  {"resolution", resolution}, {"pixel", {x, y}},
               {"label", static_cast<int>(r.label)}, {"label_name", to_string(r.label)}};
        j["max_vBC"] = r.max_v_bc ? json(*r.max_v_bc) : json(nullptr);
        print(j);
        return kExitOk;
      }
      if (g.out.empty()) {
        write_region_csv(std::cout, fam, reg_d, resolution);
        return kExitOk;
      }
      std::filesystem::create_directories(g.out);
      const auto path = std::filesystem::path(g.out) /
                        ("region_" + family + "_d" + std::to_string(reg_d) + "_r" + std::to_string(resolution) + ".csv");
      std::ofstream out(path);
      if (!out) throw std::runtime_error("cannot write " + path.string());
      write_region_csv(out, fam, reg_d, resolution);
      std::cout << path.string() << '\n';
      return kExitOk;
    }
    if (*samp_cmd) {
      CampaignConfig cfg = CampaignConfig::defaults_for(s_n, s_d);
      if (s_samples > 0) cfg.samples = s_samples;
      cfg.seed = g.seed;
      cfg.certify = opts;
      cfg.validate();
      const std::string dir = g.out.empty() ? "campaign-n" + std::to_string(s_n) + "-d" + std::to_string(s_d) : g.out;
      RunOptions ro;
      ro.workers = g.workers;
      ro.resume = g.resume;
      ro.progress = [](long done, long total) { std::cerr << "\r" << done << "/" << total << std::flush; };
      CampaignSummary s;
      try {
        s = run_campaign(cfg, dir, ro);
      } catch (const CampaignMismatch& e) {
        std::cerr << "\n" << e.what() << '\n';
        return kExitUsage;
      }
      std::cerr << '\n';
      json j = s.to_json();
      j["dir"] = dir;
      j["config_hash"] = cfg.hash();
      print(j);
      return s.not_optimal > 0 ? kExitTrouble : kExitOk;
    }
    if (*uni_cmd) {
      if (!u_state.empty()) {
        if (u_marginals.empty()) throw UsageError("--state needs --marginals");
        const DensityMatrix rho = read_density(u_state);
        return report_uniqueness(u_state, spec_from_state(rho, parse_party_list(u_marginals)), rho, opts);
      }
      if (u_id.empty()) throw UsageError("uniqueness needs an example id or --state");
      const ExampleCase ex = resolve_example(u_id, tree);
      if (!ex.global) throw UsageError("example '" + u_id + "' has no global state");
      MarginalSpec spec = ex.spec;
      if (!u_marginals.empty()) spec = spec_from_state(*ex.global, parse_party_list(u_marginals));
      return report_uniqueness(ex.id, spec, *ex.global, opts);
    }
    if (*cert_cmd) {
      MarginalSpec spec;
      if (!c_spec.empty()) {
        spec = read_spec(c_spec);
      } else if (!c_state.empty()) {
        if (c_marginals.empty()) throw UsageError("--state needs --marginals");
        spec = spec_from_state(read_density(c_state), parse_party_list(c_marginals));
      } else {
        throw UsageError("certify needs --spec or --state");
      }
      const SubsystemSet t = parse_parties(c_target);
      t.check(spec.n_parties());
      std::optional<CMatrix> w;
      if (!c_witness.empty()) w = read_witness(c_witness);
      return run_targets(c_spec.empty() ? c_state : c_spec, spec, {t}, c_criterion, w, opts);
    }
  } catch (const UsageError& e) {
    std::cerr << "etp: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InfeasibleSpec& e) {
    std::cerr << "etp: infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::out_of_range& e) {
    std::cerr << "etp: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "etp: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "etp: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}
