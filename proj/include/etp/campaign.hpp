// SPDX-License-Identifier: Apache-2.0
//
// Haar-sampling campaigns over n-party chains: marginals on neighbouring
// pairs, target at the two chain ends. Results are appended to a CSV keyed by
// sample index next to a JSON manifest, so an interrupted run resumes where
// it stopped and produces the same file as an uninterrupted one.

#ifndef ETP_CAMPAIGN_HPP
#define ETP_CAMPAIGN_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "etp/certify.hpp"

namespace etp {

struct CampaignConfig {
  int n = 3;
  int d = 2;
  long samples = 1000;
  std::uint64_t seed = 7;
  std::vector<double> thresholds{1e-8, 1e-7, 1e-6};
  /// Also run lambda* on every non-adjacent pair, not only the chain ends.
  bool all_targets = false;
  CertifyOptions certify;

  /// Desk-scale defaults: 1000 samples for (3,2), 2000 for (4,2), 200 for
  /// (5,2), 100 otherwise; all_targets on for n = 4.
  static CampaignConfig defaults_for(int n, int d);

  /// Throws std::invalid_argument unless samples >= 1, n >= 3, d >= 2 and
  /// d^n <= 2^14.
  void validate() const;
  /// Every field that changes per-sample results (the sample count does not).
  nlohmann::json identity() const;
  /// FNV-1a of identity().dump(), as 16 hex digits.
  std::string hash() const;
};

/// Per-marginal class: 'N' NPT, 'B' PPT but realignment-detected, 'S'
/// separable (PPT with d_A d_B <= 6), 'U' PPT and undecided.
char marginal_class(const DensityMatrix& sigma, double tol_psd);

struct TargetResult {
  SubsystemSet target;
  double lambda_star = 0.0;
  Outcome outcome = Outcome::NotCertified;
  bool operator==(const TargetResult&) const = default;
};

struct SampleRecord {
  long index = 0;
  std::string classes;  // one marginal_class per chain marginal
  Outcome outcome = Outcome::NotCertified;  // chain-end target
  double lambda_star = 0.0;
  sdp::Status lambda_status = sdp::Status::NumericalTrouble;
  double infidelity = 0.0;
  sdp::Status fidelity_status = sdp::Status::NumericalTrouble;
  std::vector<TargetResult> extra;  // non-adjacent pairs other than the chain ends

  bool all_npt() const;
  bool all_ppt() const;
  bool operator==(const SampleRecord&) const = default;
};

/// Non-adjacent pairs (i, j), j > i + 1, without the chain ends, in
/// lexicographic order. Empty unless cfg.all_targets.
std::vector<SubsystemSet> extra_targets(const CampaignConfig& cfg);

/// Samples |psi> = haar_pure(n, d, seed, index) and evaluates it.
SampleRecord run_sample(const CampaignConfig& cfg, long index);

std::string csv_header(const CampaignConfig& cfg);
std::string to_csv_row(const SampleRecord& r);
/// Throws std::invalid_argument on malformed rows.
SampleRecord parse_csv_row(const CampaignConfig& cfg, const std::string& line);

struct CampaignSummary {
  long samples = 0;
  long all_npt = 0, all_ppt = 0, mixed = 0;
  long transitivity = 0;      // certified, every marginal entangled
  long meta_ppt = 0;          // certified, every marginal PPT
  long meta_mixed = 0;        // certified, some NPT and some PPT
  long not_optimal = 0;       // lambda* or fidelity run not Optimal
  double max_infidelity = 0.0;
  std::vector<double> thresholds;
  std::vector<long> unique_below;  // count with infidelity < threshold
  long certified_unique = 0;       // certified with infidelity < last threshold
  std::vector<std::pair<std::string, long>> certified_by_target;  // all_targets runs

  nlohmann::json to_json() const;
};

/// Aggregates the first cfg.samples records (all of them if fewer).
CampaignSummary summarize(const CampaignConfig& cfg, const std::vector<SampleRecord>& rows);

struct CampaignMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  int workers = 1;
  bool resume = false;
  /// Samples evaluated between two appends; 0 means 8 per worker.
  long batch = 0;
  /// Stop (as if interrupted) once this many new samples were written; -1 = never.
  long stop_after = -1;
  std::function<void(long done, long total)> progress;
};

struct CampaignFiles {
  std::filesystem::path csv, manifest, summary;
  explicit CampaignFiles(const std::filesystem::path& dir);
};

/// Runs or resumes the campaign in `dir`. An existing manifest without
/// opts.resume, or with a different config hash, throws CampaignMismatch.
/// Returns the summary recomputed from the CSV.
CampaignSummary run_campaign(const CampaignConfig& cfg, const std::filesystem::path& dir, const RunOptions& opts);

/// Reads the longest valid prefix of sample rows (indices 0, 1, ...).
std::vector<SampleRecord> read_samples(const CampaignConfig& cfg, const std::filesystem::path& csv);

}  // namespace etp

#endif  // ETP_CAMPAIGN_HPP
