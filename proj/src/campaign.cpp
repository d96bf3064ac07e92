// SPDX-License-Identifier: Apache-2.0

#include "etp/campaign.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "etp/states.hpp"

namespace etp {

namespace fs = std::filesystem;

CampaignConfig CampaignConfig::defaults_for(int n, int d) {
  CampaignConfig c;
  c.n = n;
  c.d = d;
  c.samples = 100;
  if (d == 2 && n == 3) c.samples = 1000;
  if (d == 2 && n == 4) c.samples = 2000;
  if (d == 2 && n == 5) c.samples = 200;
  c.all_targets = n == 4;
  return c;
}

void CampaignConfig::validate() const {
  if (samples < 1) throw std::invalid_argument("campaign: samples must be >= 1");
  if (n < 3) throw std::invalid_argument("campaign: n must be >= 3");
  if (d < 2) throw std::invalid_argument("campaign: d must be >= 2");
  std::size_t dim = 1;
  for (int i = 0; i < n; ++i) {
    dim *= static_cast<std::size_t>(d);
    if (dim > haar_max_dim) throw std::invalid_argument("campaign: d^n exceeds 2^14");
  }
  if (thresholds.empty()) throw std::invalid_argument("campaign: no infidelity thresholds");
}

nlohmann::json CampaignConfig::identity() const {
  return {{"n", n},
          {"d", d},
          {"seed", seed},
          {"thresholds", thresholds},
          {"all_targets", all_targets},
          {"eps_cert", certify.eps_cert},
          {"tol_psd", certify.tol_psd},
          {"facial_reduction", certify.facial_reduction},
          {"sdp_tol", certify.sdp.tol},
          {"sdp_max_iters", certify.sdp.max_iters}};
}

std::string CampaignConfig::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : identity().dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

char marginal_class(const DensityMatrix& sigma, double tol_psd) {
  if (min_eigenvalue(partial_transpose(sigma, SubsystemSet{1})) < -tol_psd) return 'N';
  switch (marginal_flag(sigma, tol_psd)) {
    case MarginalFlag::Entangled: return 'B';
    case MarginalFlag::Separable: return 'S';
    case MarginalFlag::PptUndecided: return 'U';
  }
  return 'U';
}

bool SampleRecord::all_npt() const {
  return std::all_of(classes.begin(), classes.end(), [](char c) { return c == 'N'; });
}

bool SampleRecord::all_ppt() const {
  return std::none_of(classes.begin(), classes.end(), [](char c) { return c == 'N'; });
}

std::vector<SubsystemSet> extra_targets(const CampaignConfig& cfg) {
  std::vector<SubsystemSet> out;
  if (!cfg.all_targets) return out;
  for (int i = 0; i < cfg.n; ++i)
    for (int j = i + 2; j < cfg.n; ++j)
      if (!(i == 0 && j == cfg.n - 1)) out.push_back(SubsystemSet{i, j});
  return out;
}

namespace {

MarginalFlag flag_of(char c) {
  return (c == 'N' || c == 'B') ? MarginalFlag::Entangled
         : c == 'S'             ? MarginalFlag::Separable
                                : MarginalFlag::PptUndecided;
}

std::string pair_label(const SubsystemSet& t) {
  std::string s;
  for (int k : t.indices()) s += static_cast<char>('A' + k);
  return s;
}

}  // namespace

SampleRecord run_sample(const CampaignConfig& cfg, long index) {
  const Dims dims(static_cast<std::size_t>(cfg.n), cfg.d);
  const CVector psi = haar_pure(cfg.n, cfg.d, cfg.seed, static_cast<std::uint64_t>(index));
  const DensityMatrix rho = DensityMatrix::from_pure(dims, psi);
  MarginalSpec spec;
  spec.dims = dims;
  SampleRecord r;
  r.index = index;
  std::vector<MarginalFlag> flags;
  for (int i = 0; i + 1 < cfg.n; ++i) {
    DensityMatrix sigma = partial_trace(rho, SubsystemSet{i, i + 1});
    r.classes += marginal_class(sigma, cfg.certify.tol_psd);
    flags.push_back(flag_of(r.classes.back()));
    spec.add(SubsystemSet{i, i + 1}, std::move(sigma));
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    const TransitivityVerdict v = verdict(spec, SubsystemSet{0, cfg.n - 1}, flags, cfg.certify);
    r.outcome = v.outcome;
    r.lambda_star = v.lambda_star;
    r.lambda_status = v.certificate.status;
  } catch (const std::exception&) {
    r.lambda_star = nan;
  }
  try {
    const Certificate f = min_fidelity(spec, psi, cfg.certify);
    r.infidelity = f.extra.at("infidelity");
    r.fidelity_status = f.status;
  } catch (const std::exception&) {
    r.infidelity = nan;
  }
  for (const auto& t : extra_targets(cfg)) {
    TargetResult tr;
    tr.target = t;
    try {
      const TransitivityVerdict v = verdict(spec, t, flags, cfg.certify);
      tr.lambda_star = v.lambda_star;
      tr.outcome = v.outcome;
    } catch (const std::exception&) {
      tr.lambda_star = nan;
    }
    r.extra.push_back(tr);
  }
  return r;
}

namespace {

std::string fmt(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("campaign csv: bad number '" + s + "'");
  return x;
}

Outcome parse_outcome(const std::string& s) {
  for (Outcome o : {Outcome::Transitivity, Outcome::Metatransitivity, Outcome::NotCertified})
    if (to_string(o) == s) return o;
  throw std::invalid_argument("campaign csv: bad outcome '" + s + "'");
}

sdp::Status parse_status(const std::string& s) {
  for (sdp::Status st : {sdp::Status::Optimal, sdp::Status::Infeasible, sdp::Status::MaxIterations,
                         sdp::Status::NumericalTrouble})
    if (sdp::to_string(st) == s) return st;
  throw std::invalid_argument("campaign csv: bad status '" + s + "'");
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string csv_header(const CampaignConfig& cfg) {
  std::string h = "index,classes,outcome,lambda_star,lambda_status,infidelity,fidelity_status";
  for (const auto& t : extra_targets(cfg)) {
    const std::string l = pair_label(t);
    h += ",lambda_" + l + ",outcome_" + l;
  }
  return h;
}

std::string to_csv_row(const SampleRecord& r) {
  std::string s = std::to_string(r.index) + ',' + r.classes + ',' + to_string(r.outcome) + ',' + fmt(r.lambda_star) +
                  ',' + std::string(sdp::to_string(r.lambda_status)) + ',' + fmt(r.infidelity) + ',' +
                  std::string(sdp::to_string(r.fidelity_status));
  for (const auto& t : r.extra) s += ',' + fmt(t.lambda_star) + ',' + to_string(t.outcome);
  return s;
}

SampleRecord parse_csv_row(const CampaignConfig& cfg, const std::string& line) {
  const auto f = split(line);
  const auto extra = extra_targets(cfg);
  if (f.size() != 7 + 2 * extra.size()) throw std::invalid_argument("campaign csv: wrong field count");
  SampleRecord r;
  std::size_t pos = 0;
  r.index = std::stol(f[0], &pos);
  if (pos != f[0].size()) throw std::invalid_argument("campaign csv: bad index");
  r.classes = f[1];
  if (r.classes.size() != static_cast<std::size_t>(cfg.n - 1) ||
      r.classes.find_first_not_of("NBSU") != std::string::npos)
    throw std::invalid_argument("campaign csv: bad marginal classes");
  r.outcome = parse_outcome(f[2]);
  r.lambda_star = parse_double(f[3]);
  r.lambda_status = parse_status(f[4]);
  r.infidelity = parse_double(f[5]);
  r.fidelity_status = parse_status(f[6]);
  for (std::size_t k = 0; k < extra.size(); ++k)
    r.extra.push_back({extra[k], parse_double(f[7 + 2 * k]), parse_outcome(f[8 + 2 * k])});
  return r;
}

nlohmann::json CampaignSummary::to_json() const {
  auto frac = [&](long k, long of) { return of > 0 ? static_cast<double>(k) / static_cast<double>(of) : 0.0; };
  nlohmann::json j;
  j["samples"] = samples;
  j["counts"] = {{"all_npt", all_npt},
                 {"all_ppt", all_ppt},
                 {"mixed", mixed},
                 {"transitivity", transitivity},
                 {"meta_ppt", meta_ppt},
                 {"meta_mixed", meta_mixed},
                 {"not_optimal", not_optimal},
                 {"certified_unique", certified_unique}};
  j["fractions"] = {{"all_npt", frac(all_npt, samples)},
                    {"all_ppt", frac(all_ppt, samples)},
                    {"transitivity", frac(transitivity, samples)},
                    {"transitivity_among_all_npt", frac(transitivity, all_npt)},
                    {"meta_ppt", frac(meta_ppt, samples)},
                    {"meta_ppt_among_all_ppt", frac(meta_ppt, all_ppt)},
                    {"meta_mixed", frac(meta_mixed, samples)},
                    {"meta_mixed_among_mixed", frac(meta_mixed, mixed)},
                    {"certified_unique_among_certified",
                     frac(certified_unique, transitivity + meta_ppt + meta_mixed)}};
  j["max_infidelity"] = max_infidelity;
  nlohmann::json below = nlohmann::json::array();
  for (std::size_t k = 0; k < thresholds.size(); ++k)
    below.push_back({{"threshold", thresholds[k]}, {"count", unique_below[k]},
                     {"fraction", frac(unique_below[k], samples)}});
  j["infidelity_below"] = below;
  nlohmann::json targets = nlohmann::json::object();
  for (const auto& [label, count] : certified_by_target)
    targets[label] = {{"certified", count}, {"fraction", frac(count, samples)}};
  j["certified_by_target"] = targets;
  return j;
}

CampaignSummary summarize(const CampaignConfig& cfg, const std::vector<SampleRecord>& rows) {
  CampaignSummary s;
  s.thresholds = cfg.thresholds;
  s.unique_below.assign(cfg.thresholds.size(), 0);
  const auto extra = extra_targets(cfg);
  if (!extra.empty()) {
    s.certified_by_target.emplace_back(pair_label(SubsystemSet{0, cfg.n - 1}), 0);
    for (const auto& t : extra) s.certified_by_target.emplace_back(pair_label(t), 0);
  }
  const auto count = std::min<std::size_t>(rows.size(), static_cast<std::size_t>(cfg.samples));
  for (std::size_t i = 0; i < count; ++i) {
    const SampleRecord& r = rows[i];
    ++s.samples;
    const bool npt = r.all_npt(), ppt = r.all_ppt();
    s.all_npt += npt;
    s.all_ppt += ppt;
    s.mixed += !npt && !ppt;
    const bool certified = r.outcome != Outcome::NotCertified;
    if (r.outcome == Outcome::Transitivity) ++s.transitivity;
    if (r.outcome == Outcome::Metatransitivity) ++(ppt ? s.meta_ppt : s.meta_mixed);
    if (r.lambda_status != sdp::Status::Optimal || r.fidelity_status != sdp::Status::Optimal) ++s.not_optimal;
    if (!std::isnan(r.infidelity)) s.max_infidelity = std::max(s.max_infidelity, r.infidelity);
    for (std::size_t k = 0; k < cfg.thresholds.size(); ++k)
      if (r.infidelity < cfg.thresholds[k]) ++s.unique_below[k];
    if (certified && r.infidelity < cfg.thresholds.back()) ++s.certified_unique;
    if (!extra.empty()) {
      s.certified_by_target[0].second += certified;
      for (std::size_t k = 0; k < r.extra.size() && k < extra.size(); ++k)
        s.certified_by_target[k + 1].second += r.extra[k].outcome != Outcome::NotCertified;
    }
  }
  return s;
}

CampaignFiles::CampaignFiles(const fs::path& dir)
    : csv(dir / "samples.csv"), manifest(dir / "manifest.json"), summary(dir / "summary.json") {}

std::vector<SampleRecord> read_samples(const CampaignConfig& cfg, const fs::path& csv) {
  std::vector<SampleRecord> rows;
  std::ifstream in(csv, std::ios::binary);
  if (!in) return rows;
  std::string line;
  if (!std::getline(in, line) || line != csv_header(cfg)) return rows;
  while (std::getline(in, line)) {
    if (in.eof()) break;  // no trailing newline: the row was cut off
    try {
      SampleRecord r = parse_csv_row(cfg, line);
      if (r.index != static_cast<long>(rows.size())) break;
      rows.push_back(std::move(r));
    } catch (const std::exception&) {
      break;
    }
  }
  return rows;
}

namespace {

void write_atomically(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("campaign: cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_manifest(const CampaignFiles& files, const CampaignConfig& cfg, long completed) {
  nlohmann::json j;
  j["config"] = cfg.identity();
  j["config_hash"] = cfg.hash();
  j["samples_requested"] = cfg.samples;
  j["completed"] = completed;
  write_atomically(files.manifest, j.dump(2) + "\n");
}

// Rewrites the CSV so it holds exactly the header and the given rows.
void rewrite_csv(const CampaignFiles& files, const CampaignConfig& cfg, const std::vector<SampleRecord>& rows) {
  std::string text = csv_header(cfg) + "\n";
  for (const auto& r : rows) text += to_csv_row(r) + "\n";
  write_atomically(files.csv, text);
}

}  // namespace

CampaignSummary run_campaign(const CampaignConfig& cfg, const fs::path& dir, const RunOptions& opts) {
  cfg.validate();
  if (opts.workers < 1) throw std::invalid_argument("campaign: workers must be >= 1");
  fs::create_directories(dir);
  const CampaignFiles files(dir);

  std::vector<SampleRecord> rows;
  if (fs::exists(files.manifest)) {
    if (!opts.resume)
      throw CampaignMismatch("campaign: " + dir.string() + " already holds a campaign (pass --resume)");
    std::ifstream in(files.manifest);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception&) {
      throw CampaignMismatch("campaign: unreadable manifest in " + dir.string());
    }
    if (j.value("config_hash", std::string()) != cfg.hash())
      throw CampaignMismatch("campaign: config hash differs from the manifest in " + dir.string());
    rows = read_samples(cfg, files.csv);
  }
  // Drop any torn tail so appends continue from a clean prefix.
  rewrite_csv(files, cfg, rows);
  write_manifest(files, cfg, static_cast<long>(rows.size()));

  const long total = cfg.samples;
  const long batch = opts.batch > 0 ? opts.batch : 8L * opts.workers;
  long written = 0;
  std::ofstream out(files.csv, std::ios::binary | std::ios::app);
  while (static_cast<long>(rows.size()) < total) {
    if (opts.stop_after >= 0 && written >= opts.stop_after) break;
    const long start = static_cast<long>(rows.size());
    long count = std::min(batch, total - start);
    if (opts.stop_after >= 0) count = std::min(count, opts.stop_after - written);
    std::vector<SampleRecord> fresh(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic, 1) num_threads(opts.workers)
    for (long k = 0; k < count; ++k) fresh[static_cast<std::size_t>(k)] = run_sample(cfg, start + k);
    for (auto& r : fresh) {
      out << to_csv_row(r) << '\n';
      rows.push_back(std::move(r));
    }
    out.flush();
    if (!out) throw std::runtime_error("campaign: cannot append to " + files.csv.string());
    written += count;
    write_manifest(files, cfg, static_cast<long>(rows.size()));
    if (opts.progress) opts.progress(static_cast<long>(rows.size()), total);
  }
  out.close();

  const CampaignSummary s = summarize(cfg, read_samples(cfg, files.csv));
  nlohmann::json j = s.to_json();
  j["config"] = cfg.identity();
  j["config_hash"] = cfg.hash();
  write_atomically(files.summary, j.dump(2) + "\n");
  return s;
}

}  // namespace etp
