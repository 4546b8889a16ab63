#include "rts/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "rts/error.hpp"
#include "rts/rng.hpp"

namespace rts {

namespace {

std::size_t require_release(const Dataset& d, std::string_view release) {
  auto idx = d.release_index(release);
  if (!idx) fail(ErrorCode::UnknownRelease, "unknown release '" + std::string(release) + "'");
  return *idx;
}

// Fault universe for a release, sorted by id, plus per-test fault indices.
struct FaultIndex {
  std::vector<std::string> fault_ids;
  std::map<std::string, std::vector<std::size_t>> by_test;
};

FaultIndex index_faults(const Dataset& d, std::string_view release) {
  std::set<std::string> universe;
  for (const auto& t : d.tests) {
    if (const auto* h = t.history_at(release)) {
      universe.insert(h->revealed_defect_ids.begin(), h->revealed_defect_ids.end());
    }
  }
  FaultIndex fi;
  fi.fault_ids.assign(universe.begin(), universe.end());
  for (const auto& t : d.tests) {
    const auto* h = t.history_at(release);
    if (!h || h->revealed_defect_ids.empty()) continue;
    auto& list = fi.by_test[t.id];
    for (const auto& f : h->revealed_defect_ids) {
      list.push_back(static_cast<std::size_t>(
          std::lower_bound(fi.fault_ids.begin(), fi.fault_ids.end(), f) - fi.fault_ids.begin()));
    }
  }
  return fi;
}

FaultMatrix fault_matrix(std::span<const std::string> ordering, const FaultIndex& fi) {
  std::vector<std::size_t> first(fi.fault_ids.size(), 0);
  for (std::size_t pos = 0; pos < ordering.size(); ++pos) {
    auto it = fi.by_test.find(ordering[pos]);
    if (it == fi.by_test.end()) continue;
    for (auto f : it->second) {
      if (first[f] == 0) first[f] = pos + 1;
    }
  }
  FaultMatrix fm;
  fm.n = ordering.size();
  for (std::size_t f = 0; f < first.size(); ++f) {
    if (first[f] == 0) {
      fm.excluded_faults.push_back(fi.fault_ids[f]);
    } else {
      fm.fault_ids.push_back(fi.fault_ids[f]);
      fm.first_failures.push_back(first[f]);
    }
  }
  return fm;
}

}  // namespace

FaultMatrix build_fault_matrix(std::span<const std::string> ordering, const Dataset& d,
                               std::string_view release) {
  require_release(d, release);
  for (const auto& id : ordering) {
    if (!d.find_test(id)) fail(ErrorCode::UnknownTestId, "ordering names unknown test '" + id + "'");
  }
  return fault_matrix(ordering, index_faults(d, release));
}

double apfd(const FaultMatrix& fm) {
  if (fm.m() == 0) fail(ErrorCode::NoFaults, "APFD is undefined without faults");
  if (fm.n == 0) fail(ErrorCode::InvalidArgument, "APFD needs a non-empty ordering");
  const double n = static_cast<double>(fm.n);
  const double m = static_cast<double>(fm.m());
  const double sum = static_cast<double>(
      std::accumulate(fm.first_failures.begin(), fm.first_failures.end(), std::size_t{0}));
  return 1.0 - sum / (n * m) + 1.0 / (2.0 * n);
}

std::vector<std::string> tests_with_history(const Dataset& d, std::string_view release) {
  std::vector<std::string> ids;
  for (const auto& t : d.tests) {
    if (t.history_at(release)) ids.push_back(t.id);
  }
  return ids;
}

double random_baseline(const Dataset& d, std::string_view release, std::size_t trials,
                       std::uint64_t seed) {
  require_release(d, release);
  if (trials < 1) fail(ErrorCode::InvalidArgument, "random baseline needs at least one trial");
  const FaultIndex fi = index_faults(d, release);
  if (fi.fault_ids.empty()) {
    fail(ErrorCode::NoFaults, "release '" + std::string(release) + "' reveals no faults");
  }
  std::vector<std::string> ordering = tests_with_history(d, release);
  SplitMix64 rng(seed);
  double sum = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    shuffle(std::span<std::string>(ordering), rng);
    sum += apfd(fault_matrix(ordering, fi));
  }
  return sum / static_cast<double>(trials);
}

LabelSet history_labels(const Dataset& d, std::string_view release, std::size_t window) {
  const std::size_t idx = require_release(d, release);
  std::vector<std::string> prior;
  for (std::size_t k = 1; k <= window && k <= idx; ++k) prior.push_back(d.releases[idx - k]);

  LabelSet labels;
  for (const auto& t : d.tests) {
    bool failed = false, passed = false;
    for (const auto& r : prior) {
      const auto* h = t.history_at(r);
      if (!h || !h->executed) continue;
      if (h->verdict == Verdict::Fail) failed = true;
      if (h->verdict == Verdict::Pass) passed = true;
    }
    if (failed) {
      labels.entries.push_back({t.id, Label::In, Role::Training});
    } else if (passed) {
      labels.entries.push_back({t.id, Label::Out, Role::Training});
    }
  }
  return labels;
}

BacktestReport backtest(const Dataset& d, const FeatureScope& scope_template,
                        const TrainConfig& cfg, std::span<const std::string> releases,
                        const BacktestOptions& options) {
  cfg.validate();
  for (const auto& r : releases) require_release(d, r);

  BacktestReport report;
  for (const auto& release : releases) {
    try {
      const LabelSet labels = history_labels(d, release, options.window);
      FeatureScope scope = scope_template;
      scope.target_release = release;
      const FeatureMatrix matrix = extract_features(d, scope);
      const RankModel model = train(matrix, labels, cfg);

      std::vector<std::pair<std::string, double>> scored;
      for (const auto& id : tests_with_history(d, release)) {
        scored.emplace_back(id, score(model, matrix.rows[*matrix.row_index(id)]));
      }
      const RankedSuite suite = make_suite(std::move(scored));
      std::vector<std::string> ordering;
      for (const auto& e : suite.entries) ordering.push_back(e.test_id);

      const FaultMatrix fm = build_fault_matrix(ordering, d, release);
      ReleaseResult row;
      row.release = release;
      row.apfd = apfd(fm);
      row.n = fm.n;
      row.m = fm.m();
      row.excluded_fault_count = fm.excluded_faults.size();
      row.training_in = labels.count(Role::Training, Label::In);
      row.training_out = labels.count(Role::Training, Label::Out);
      if (options.baseline_trials > 0) {
        row.random_apfd = random_baseline(d, release, options.baseline_trials, options.seed);
      }
      report.per_release.push_back(std::move(row));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateLabels && e.code() != ErrorCode::NoFaults) throw;
      report.skipped.push_back({release, std::string(to_string(e.code())), e.what()});
    }
  }
  if (!report.per_release.empty()) {
    double sum = 0.0;
    for (const auto& r : report.per_release) sum += r.apfd;
    report.mean_apfd = sum / static_cast<double>(report.per_release.size());
  }
  return report;
}

nlohmann::json to_json(const BacktestReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& p : r.per_release) {
    nlohmann::json row = {{"release", p.release},
                          {"apfd", p.apfd},
                          {"n", p.n},
                          {"m", p.m},
                          {"excluded_fault_count", p.excluded_fault_count},
                          {"training_in", p.training_in},
                          {"training_out", p.training_out}};
    row["random_apfd"] = p.random_apfd ? nlohmann::json(*p.random_apfd) : nlohmann::json(nullptr);
    rows.push_back(std::move(row));
  }
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : r.skipped) {
    skipped.push_back({{"release", s.release}, {"reason", s.reason}, {"message", s.message}});
  }
  return {{"per_release", std::move(rows)},
          {"skipped", std::move(skipped)},
          {"empty", r.empty()},
          {"mean_apfd", r.mean_apfd ? nlohmann::json(*r.mean_apfd) : nlohmann::json(nullptr)}};
}

std::string render_table(const BacktestReport& r) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %6s %6s %8s %8s %8s\n", "release", "n", "m", "APFD",
                "random", "excluded");
  os << line;
  for (const auto& p : r.per_release) {
    char random[16] = "-";
    if (p.random_apfd) std::snprintf(random, sizeof random, "%.4f", *p.random_apfd);
    std::snprintf(line, sizeof line, "%-16s %6zu %6zu %8.4f %8s %8zu\n", p.release.c_str(), p.n,
                  p.m, p.apfd, random, p.excluded_fault_count);
    os << line;
  }
  for (const auto& s : r.skipped) {
    os << s.release << ": skipped (" << s.reason << ") " << s.message << '\n';
  }
  if (r.mean_apfd) {
    std::snprintf(line, sizeof line, "mean APFD %.4f over %zu release(s), %zu skipped\n",
                  *r.mean_apfd, r.per_release.size(), r.skipped.size());
    os << line;
  } else {
    os << "empty report: no release evaluated, " << r.skipped.size() << " skipped\n";
  }
  return os.str();
}

}  // namespace rts
