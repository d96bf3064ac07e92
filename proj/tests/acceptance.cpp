// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance run: one PASS/FAIL line per criterion, exit status 1
// if any criterion fails. Criteria 1-11 are run in order unless their numbers
// are given on the command line.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "etp/campaign.hpp"
#include "etp/certify.hpp"
#include "etp/linalg.hpp"
#include "etp/regions.hpp"
#include "etp/rng.hpp"
#include "etp/states.hpp"

using namespace etp;
namespace fs = std::filesystem;

namespace {

// Certificates of every SDP run above criterion 11, for the solver checks.
struct Logged {
  std::string what;
  Certificate cert;
  bool maximize;
};
std::vector<Logged> g_log;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
  void near(double got, double want, double tol, const std::string& what) {
    detail << ' ' << what << '=' << got;
    expect(std::abs(got - want) <= tol, what + " within " + std::to_string(tol) + " of " + std::to_string(want));
  }
};

std::string label(const SubsystemSet& t) {
  std::string s;
  for (int k : t.indices()) s += static_cast<char>('A' + k);
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Certificate logged_lambda(const std::string& what, const MarginalSpec& spec, const SubsystemSet& target) {
  Certificate c = lambda_star(spec, target);
  g_log.push_back({what, c, true});
  return c;
}

void expect_solved(Check& ck, const Certificate& c, const std::string& what) {
  ck.expect(c.solved(), what + " solved (status " + std::string(sdp::to_string(c.status)) + ")");
}

MarginalSpec upb_chain(Upb which) {
  MarginalSpec s;
  s.dims = {3, 3, 3};
  s.add(SubsystemSet{0, 1}, upb_state(which));
  s.add(SubsystemSet{1, 2}, upb_state(which));
  return s;
}

void criterion_upb(Check& ck, Upb which, double want) {
  const auto t0 = std::chrono::steady_clock::now();
  const Certificate c = logged_lambda(which == Upb::Tiles ? "tiles AC" : "pyramid AC", upb_chain(which), {0, 2});
  const double t = seconds_since(t0);
  expect_solved(ck, c, "lambda*_AC");
  ck.near(c.value, want, 2e-3, "lambda*_AC");
  ck.detail << " time=" << t << "s";
  ck.expect(t <= 60.0, "runtime <= 60 s");
}

void c1(Check& ck) { criterion_upb(ck, Upb::Tiles, -0.1194); }
void c2(Check& ck) { criterion_upb(ck, Upb::Pyramid, -0.1094); }

void c3(Check& ck) {
  struct Case {
    const char* id;
    SubsystemSet target;
    double want, tol;
  };
  const Case cases[] = {{"bell_chain4", {0, 3}, -0.0020, 1e-3},
                        {"bell_chain5a", {0, 4}, -0.1165, 2e-3},
                        {"bell_chain5b", {0, 4}, -0.0379, 2e-3},
                        {"bell_chain6", {0, 4}, -0.0379, 2e-3},
                        {"bell_chain7", {0, 4}, -0.0402, 2e-3}};
  for (const auto& cs : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    const NamedExample ex = named_example(cs.id);
    const Certificate c = logged_lambda(cs.id, ex.spec, cs.target);
    const double t = seconds_since(t0);
    expect_solved(ck, c, cs.id);
    ck.near(c.value, cs.want, cs.tol, cs.id);
    if (std::string(cs.id) == "bell_chain7") {
      ck.detail << " time7=" << t << "s";
      ck.expect(t <= 600.0, "seven-qubit runtime <= 10 min");
    }
  }
}

void c4(Check& ck) {
  const NamedExample ex = named_example("chi4");
  const std::pair<SubsystemSet, double> cases[] = {{{0, 3}, -0.0788}, {{0, 2}, -0.1344}, {{1, 3}, -0.0553}};
  for (const auto& [t, want] : cases) {
    const std::string name = "chi4 " + label(t);
    const Certificate c = logged_lambda(name, ex.spec, t);
    expect_solved(ck, c, name);
    ck.near(c.value, want, 2e-3, "lambda*_" + label(t));
  }
}

void c5(Check& ck) {
  const NamedExample chi3 = named_example("chi3");
  const TransitivityVerdict v = verdict(chi3.spec, {0, 2});
  g_log.push_back({"chi3 AC", v.certificate, true});
  ck.expect(v.input_flags == std::vector<MarginalFlag>(2, MarginalFlag::Separable), "chi3 AB, BC Separable");
  ck.detail << " chi3 lambda*_AC=" << v.lambda_star;
  ck.expect(v.lambda_star < -1e-3, "chi3 lambda*_AC < -1e-3");
  ck.expect(v.outcome == Outcome::Metatransitivity, "chi3 metatransitivity");

  const NamedExample xi4 = named_example("xi4");
  for (const SubsystemSet& t : {SubsystemSet{0, 2}, SubsystemSet{0, 3}, SubsystemSet{1, 3}}) {
    const TransitivityVerdict w = verdict(xi4.spec, t);
    g_log.push_back({"xi4 " + label(t), w.certificate, true});
    ck.expect(w.input_flags == std::vector<MarginalFlag>(3, MarginalFlag::Separable), "xi4 inputs Separable");
    ck.detail << " xi4 lambda*_" << label(t) << '=' << w.lambda_star;
    ck.expect(w.lambda_star < -1e-3, "xi4 lambda*_" + label(t) + " < -1e-3");
  }

  MarginalSpec no_cd;
  no_cd.dims = xi4.spec.dims;
  for (const auto& c : xi4.spec.constraints)
    if (!(c.parties == SubsystemSet{2, 3})) no_cd.add(c.parties, c.sigma);
  const Certificate d = logged_lambda("xi4 without CD, AC", no_cd, {0, 2});
  expect_solved(ck, d, "xi4 without CD");
  ck.detail << " without CD lambda*_AC=" << d.value;
  ck.expect(d.value >= -1e-5, "lambda*_AC >= -1e-5 without CD");
}

void c6(Check& ck) {
  const NamedExample ex = named_example("psi_gme4");
  Certificate c = gme_minmax(ex.spec, ex.targets.at(0));
  g_log.push_back({"gme", c, false});
  expect_solved(ck, c, "gme");
  const double m = c.extra.at("M"), n = c.extra.at("N");
  ck.near(m, 1.8606, 5e-3, "M");
  ck.near(n, 1.8008, 5e-3, "N");
  ck.expect(m > 5.0 / 3 && n > 5.0 / 3, "M, N > 5/3");
}

void c7(Check& ck) {
  double worst = 0.0, worst_infid = 0.0;
  for (int n : {3, 4, 5}) {
    for (double gamma : {0.25, 0.5, 1.0}) {
      for (TreeShape shape : {TreeShape::Path, TreeShape::Star}) {
        const MarginalSpec spec = w_tree_spec(n, gamma, shape);
        // A pair that is not a tree edge.
        const SubsystemSet target = shape == TreeShape::Path ? SubsystemSet{0, n - 1} : SubsystemSet{1, 2};
        const double m = n - 2 * gamma;
        const double closed = (m - std::sqrt(m * m + 4 * gamma * gamma)) / (2 * n);
        const std::string name = "w-tree n=" + std::to_string(n) + " g=" + std::to_string(gamma) +
                                 (shape == TreeShape::Path ? " path" : " star");
        const Certificate c = logged_lambda(name, spec, target);
        expect_solved(ck, c, name);
        worst = std::max(worst, std::abs(c.value - closed));
        ck.expect(std::abs(c.value - closed) <= 1e-5, name + " lambda* vs closed form");
        ck.expect(std::abs(rho_n_gamma_min_pt(n, gamma) - closed) <= 1e-12, name + " closed form");
        const Certificate f = gamma == 1.0 ? min_fidelity(spec, w_state(n)) : min_fidelity(spec, w_noisy_global(n, gamma));
        g_log.push_back({name + " fidelity", f, false});
        expect_solved(ck, f, name + " fidelity");
        if (gamma == 1.0) {
          worst_infid = std::max(worst_infid, f.extra.at("infidelity"));
          ck.expect(f.extra.at("infidelity") <= 1e-6, name + " infidelity <= 1e-6");
        }
      }
    }
  }
  ck.detail << " max|lambda*-closed|=" << worst << " max infidelity(gamma=1)=" << worst_infid;
}

void c8(Check& ck) {
  double worst = 0.0;
  auto compare = [&](const std::string& name, std::optional<double> closed, const Certificate& c) {
    g_log.push_back({name, c, true});
    expect_solved(ck, c, name);
    ck.expect(closed.has_value(), name + " compatible");
    if (!closed) return;
    worst = std::max(worst, std::abs(c.value - *closed));
    ck.expect(std::abs(c.value - *closed) <= 1e-5, name + " |closed - SDP| <= 1e-5");
  };
  int points = 0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double x = (i + 0.5) / 5, y = (j + 0.5) / 5;
      for (int d : {2, 3}) {
        if (!werner_pair_compatible(d, x, y)) continue;
        ++points;
        compare("werner d=" + std::to_string(d), werner_max_vbc(d, x, y), werner_max_vbc_sdp(d, x, y));
      }
      if (isotropic_pair_compatible(3, x, y)) {
        ++points;
        compare("isotropic d=3", isotropic_max_vbc(3, x, y), isotropic_max_vbc_sdp(3, x, y));
      }
    }
  }
  double worst_boundary = 0.0;
  auto boundary = [&](const std::string& name, const Certificate& c, std::optional<double> closed) {
    g_log.push_back({name, c, true});
    expect_solved(ck, c, name);
    worst_boundary = std::max({worst_boundary, std::abs(c.value - 0.5), closed ? std::abs(*closed - 0.5) : 1.0});
    ck.expect(std::abs(c.value - 0.5) <= 1e-5, name + " SDP max v_BC = 1/2");
    ck.expect(closed && std::abs(*closed - 0.5) <= 1e-5, name + " closed max v_BC = 1/2");
  };
  // Werner: (x + y - 1/2)^2 = 4 x y, lower branch sqrt(x) + sqrt(y) = 1/sqrt(2),
  // and its mirror image under (x, y) -> (1 - y, 1 - x), where the smallest
  // compatible v_BC is 1/2.
  for (double x : {0.05, 0.15, 0.3}) {
    const double y = std::pow(std::numbers::sqrt2 / 2 - std::sqrt(x), 2);
    boundary("werner boundary", werner_max_vbc_sdp(3, x, y), werner_max_vbc(3, x, y));
    const double mx = 1.0 - y, my = 1.0 - x;
    const auto lo = werner_min_vbc(3, mx, my);
    ck.expect(lo && std::abs(*lo - 0.5) <= 1e-5, "mirrored werner boundary min v_BC = 1/2");
    // min v_BC by the SDP: maximize tr((I - P_s) rho_BC) = 1 - v_BC.
    MarginalSpec spec;
    spec.dims = {3, 3, 3};
    spec.add(SubsystemSet{0, 1}, werner_state({3, mx}));
    spec.add(SubsystemSet{0, 2}, werner_state({3, my}));
    const CMatrix anti = CMatrix::Identity(9, 9) - symmetric_projector(3);
    const Certificate c = witness_opt(spec, {1, 2}, anti);
    g_log.push_back({"mirrored werner boundary", c, true});
    expect_solved(ck, c, "mirrored werner boundary");
    ck.expect(std::abs(1.0 - c.value - 0.5) <= 1e-5, "mirrored werner boundary SDP min v_BC = 1/2");
    worst_boundary = std::max(worst_boundary, std::abs(1.0 - c.value - 0.5));
  }
  // Isotropic: 4 p q = (p + q - 1 + 1/d)^2, branch sqrt(q) = sqrt(p) - sqrt((d-1)/d).
  for (double p : {0.8, 0.9, 0.97}) {
    const double q = std::pow(std::sqrt(p) - std::sqrt(2.0 / 3.0), 2);
    ck.expect(std::abs(4 * p * q - std::pow(p + q - 1.0 + 1.0 / 3, 2)) <= 1e-12, "isotropic point on the curve");
    boundary("isotropic boundary", isotropic_max_vbc_sdp(3, p, q), isotropic_max_vbc(3, p, q));
  }
  ck.detail << " grid points=" << points << " max|closed-SDP|=" << worst << " max boundary dev=" << worst_boundary;
}

void c9(Check& ck) {
  const fs::path root = fs::temp_directory_path() / ("etp_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  RunOptions ro;
  ro.workers = std::max(1u, std::thread::hardware_concurrency());
  struct Run {
    int n;
    long samples;
  };
  double total = 0.0;
  for (const Run r : {Run{3, 1000}, Run{4, 2000}, Run{5, 200}}) {
    CampaignConfig cfg = CampaignConfig::defaults_for(r.n, 2);
    cfg.samples = r.samples;
    const auto t0 = std::chrono::steady_clock::now();
    const CampaignSummary s = run_campaign(cfg, root / ("n" + std::to_string(r.n)), ro);
    const double t = seconds_since(t0);
    total += t;
    const double npt = double(s.all_npt) / s.samples, ppt = double(s.all_ppt) / s.samples,
                 trans = double(s.transitivity) / s.samples;
    ck.detail << " (" << r.n << ",2): all-NPT=" << 100 * npt << "% all-PPT=" << 100 * ppt
              << "% transitivity=" << 100 * trans << "% meta-PPT=" << 100.0 * s.meta_ppt / s.samples
              << "% meta-mixed=" << 100.0 * s.meta_mixed / s.samples << "% not-optimal=" << s.not_optimal
              << " t=" << t << "s;";
    ck.expect(s.samples == r.samples, "sample count");
    if (r.n == 3) {
      ck.expect(s.all_npt == s.samples, "(3,2) all marginals NPT");
      ck.expect(s.transitivity == s.samples, "(3,2) all transitivity");
    } else if (r.n == 4) {
      ck.expect(std::abs(npt - 0.4674) <= 0.03, "(4,2) all-NPT 46.7% +- 3%");
      ck.expect(std::abs(ppt - 0.0264) <= 0.01, "(4,2) all-PPT 2.64% +- 1%");
      ck.expect(std::abs(trans - 0.0732) <= 0.016, "(4,2) transitivity 7.32% +- 1.6%");
    } else {
      ck.expect(s.transitivity == 0, "(5,2) no transitivity");
    }
  }
  fs::remove_all(root);
  ck.detail << " total=" << total << "s workers=" << ro.workers;
  ck.expect(total <= 7200.0, "total runtime <= 2 h");
}

// Eigenvalues of rho_BC^Gamma within the {|01>, |10>} and {|00>, |11>} sectors.
std::pair<double, double> sector_min_eigs(const DensityMatrix& bc) {
  const CMatrix pt = partial_transpose(bc, SubsystemSet{1});
  auto block = [&](int i, int j) {
    CMatrix b(2, 2);
    b << pt(i, i), pt(i, j), pt(j, i), pt(j, j);
    return Eigen::SelfAdjointEigenSolver<CMatrix>(b).eigenvalues()(0);
  };
  return {block(1, 2), block(0, 3)};
}

SelfCompParams on_ray(double b, double phi, double t, int s0, int s1) {
  const double r = std::sqrt(1.0 - b * b);
  return {s0 * r * std::cos(phi), s1 * r * std::sin(phi), b, t};
}

void c10(Check& ck) {
  double worst_marg = 0.0, worst_root = 0.0, worst_closed = 0.0, worst_touch = 0.0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    CounterRng rng(2024, k);
    double draws[5];
    for (double& x : draws) x = rng.uniform();
    auto u = [&](int slot) { return draws[slot]; };
    const double phi = 0.05 + (std::numbers::pi / 2 - 0.1) * u(0);
    const double t = 2 * std::numbers::pi * u(1);
    const int s0 = u(2) < 0.5 ? -1 : 1, s1 = u(3) < 0.5 ? -1 : 1;
    const double b = 0.05 + 0.9 * u(4);
    const SelfCompParams p = on_ray(b, phi, t, s0, s1);

    const DensityMatrix choi = selfcomp_choi(p);
    const DensityMatrix ext = DensityMatrix::from_pure({2, 2, 2}, selfcomp_extension(p));
    worst_marg = std::max({worst_marg, max_abs_diff(partial_trace(ext, SubsystemSet{0, 1}).matrix(), choi.matrix()),
                           max_abs_diff(partial_trace(ext, SubsystemSet{0, 2}).matrix(), choi.matrix())});
    worst_closed = std::max(worst_closed, std::abs(selfcomp_min_pt(p) -
                                                   min_eigenvalue(partial_transpose(choi, SubsystemSet{1}))));

    // b* solves b^2 = 2 |a0 a1| along the ray.
    const double s = std::abs(std::sin(2 * phi));
    const double b_star = std::sqrt(s / (1.0 + s));
    auto sectors = [&](double bb) {
      const DensityMatrix e = DensityMatrix::from_pure({2, 2, 2}, selfcomp_extension(on_ray(bb, phi, t, s0, s1)));
      return sector_min_eigs(partial_trace(e, SubsystemSet{1, 2}));
    };
    // Each sector eigenvalue changes sign once on (0, 1); bisect both.
    for (int which = 0; which < 2; ++which) {
      double lo = 1e-6, hi = 1.0 - 1e-6;
      auto f = [&](double bb) { const auto e = sectors(bb); return which == 0 ? e.first : e.second; };
      const bool rising = f(lo) < 0.0;
      ck.expect(rising == (f(hi) > 0.0), "sector eigenvalue changes sign");
      while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        ((f(mid) < 0.0) == rising ? lo : hi) = mid;
      }
      worst_root = std::max(worst_root, std::abs(0.5 * (lo + hi) - b_star));
    }
    const DensityMatrix at = DensityMatrix::from_pure({2, 2, 2}, selfcomp_extension(on_ray(b_star, phi, t, s0, s1)));
    const double touch = min_eigenvalue(partial_transpose(partial_trace(at, SubsystemSet{1, 2}), SubsystemSet{1}));
    worst_touch = std::max(worst_touch, std::abs(touch));
    const DensityMatrix off = DensityMatrix::from_pure({2, 2, 2}, selfcomp_extension(on_ray(b_star + 1e-3, phi, t, s0, s1)));
    ck.expect(min_eigenvalue(partial_transpose(partial_trace(off, SubsystemSet{1, 2}), SubsystemSet{1})) < 0.0,
              "BC NPT away from |b| = sqrt(2|a0 a1|)");
  }
  ck.detail << " max marginal diff=" << worst_marg << " max|b_root-b*|=" << worst_root
            << " max|closed-numeric|=" << worst_closed << " max|lambda_min(b*)|=" << worst_touch;
  ck.expect(worst_marg <= 1e-12, "extension marginals equal the Choi state");
  ck.expect(worst_root <= 1e-9, "sign change at |b| = sqrt(2|a0 a1|)");
  ck.expect(worst_touch <= 1e-12, "BC PT minimum eigenvalue vanishes at |b| = sqrt(2|a0 a1|)");
  ck.expect(worst_closed <= 1e-12, "sigma_AB PT minimum eigenvalue closed form");
}

void c11(Check& ck) {
  // Extending the system can only lower lambda*. The four-qubit chain embedded
  // in five qubits with no constraint on E leaves it unchanged; the AB, BC, CD
  // prefix of a five-qubit chain, extended by its DE marginal, cannot rise.
  const NamedExample b4 = named_example("bell_chain4");
  MarginalSpec five;
  five.dims = {2, 2, 2, 2, 2};
  for (const auto& c : b4.spec.constraints) five.add(c.parties, c.sigma);
  const Certificate base = logged_lambda("monotonicity base", b4.spec, {0, 3});
  const Certificate embedded = logged_lambda("monotonicity embedded", five, {0, 3});

  const NamedExample b5 = named_example("bell_chain5b");
  MarginalSpec prefix;
  prefix.dims = {2, 2, 2, 2};
  for (const auto& c : b5.spec.constraints)
    if (!c.parties.contains(4)) prefix.add(c.parties, c.sigma);
  const Certificate shorter = logged_lambda("monotonicity shorter", prefix, {0, 3});
  const Certificate longer = logged_lambda("monotonicity longer", b5.spec, {0, 3});
  for (const Certificate* c : {&base, &embedded, &shorter, &longer}) expect_solved(ck, *c, "monotonicity run");
  ck.detail << " lambda*_AD: 4 qubits=" << base.value << " embedded=" << embedded.value
            << "; chain prefix=" << shorter.value << " with DE=" << longer.value;
  ck.expect(std::abs(embedded.value - base.value) <= 1e-6, "unconstrained extra party leaves lambda* unchanged");
  ck.expect(longer.value <= shorter.value + 1e-7, "extra constraint does not raise lambda*");

  double res = 0.0, gap = 0.0, weak = 0.0, psd = 0.0;
  for (const auto& l : g_log) {
    const Certificate& c = l.cert;
    if (!c.solved()) {
      ck.expect(false, l.what + " solved");
      continue;
    }
    res = std::max({res, c.residuals.primal, c.residuals.dual});
    gap = std::max(gap, c.residuals.gap);
    // Maximization: dual >= primal; minimization: dual <= primal (up to the residuals).
    const double viol = l.maximize ? c.value - c.dual_value : c.dual_value - c.value;
    weak = std::max(weak, viol);
    psd = std::max(psd, -min_eigenvalue(c.joint_state.matrix()));
    ck.expect(c.residuals.primal <= 1e-7 && c.residuals.dual <= 1e-7, l.what + " residuals <= 1e-7");
    ck.expect(c.residuals.gap <= 1e-6, l.what + " complementary slackness <= 1e-6");
    ck.expect(viol <= 1e-6, l.what + " weak duality");
  }
  ck.detail << " certificates=" << g_log.size() << " max residual=" << res << " max gap=" << gap
            << " max weak-duality violation=" << weak << " max -lambda_min(joint)=" << psd;
  ck.expect(psd <= 1e-8, "joint states PSD");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"Tiles chain lambda*_AC", c1},
      {"Pyramid chain lambda*_AC", c2},
      {"Bell-diagonal chains", c3},
      {"four-qubit entangled-marginal example", c4},
      {"chi3 / xi4 metatransitivity", c5},
      {"GME criterion", c6},
      {"tree W-state suite", c7},
      {"region cross-validation", c8},
      {"Haar sampling campaigns", c9},
      {"self-complementary family", c10},
      {"solver properties and monotonicity", c11},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Check ck;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[k].second(ck);
    } catch (const std::exception& e) {
      ck.ok = false;
      ck.detail << " [exception: " << e.what() << "]";
    }
    failed += !ck.ok;
    std::cout << "criterion " << id << ": " << (ck.ok ? "PASS" : "FAIL") << "  " << criteria[k].first << " ("
              << seconds_since(t0) << " s)" << ck.detail.str() << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
