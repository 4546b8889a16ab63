#include "rts/verification.hpp"

#include <algorithm>
#include <numeric>

#include "rts/error.hpp"
#include "rts/rng.hpp"

namespace rts {

std::string_view to_string(Adequacy a) {
  switch (a) {
    case Adequacy::Adequate: return "adequate";
    case Adequacy::Marginal: return "marginal";
    case Adequacy::Inadequate: return "inadequate";
  }
  return "inadequate";
}

std::optional<Adequacy> parse_adequacy(std::string_view s) {
  if (s == "adequate") return Adequacy::Adequate;
  if (s == "marginal") return Adequacy::Marginal;
  if (s == "inadequate") return Adequacy::Inadequate;
  return std::nullopt;
}

void AdequacyThresholds::validate() const {
  if (!(0.0 <= adequate && adequate <= marginal && marginal <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "thresholds must satisfy 0 <= adequate <= marginal <= 1");
  }
}

VerificationDraw draw_verification(const RankedSuite& suite, std::size_t requested_k,
                                   std::uint64_t seed) {
  if (suite.empty()) fail(ErrorCode::EmptySuite, "cannot draw from an empty ranking");
  if (requested_k == 0) fail(ErrorCode::InvalidArgument, "verification draws need k >= 1");

  VerificationDraw draw;
  draw.seed = seed;
  draw.requested_k = requested_k;

  const std::size_t n = suite.size();
  const std::size_t k = std::min(requested_k, n);
  std::vector<std::size_t> positions(n);
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(positions[i], positions[j]);
  }
  positions.resize(k);
  std::sort(positions.begin(), positions.end());
  for (auto p : positions) draw.test_ids.push_back(suite.entries[p].test_id);
  return draw;
}

PairCount count_overlapping_pairs(std::span<const double> in_scores,
                                  std::span<const double> out_scores) {
  std::vector<double> outs(out_scores.begin(), out_scores.end());
  std::sort(outs.begin(), outs.end());
  PairCount c;
  c.total = static_cast<std::uint64_t>(in_scores.size()) * outs.size();
  for (double s : in_scores) {
    auto first_not_below = std::lower_bound(outs.begin(), outs.end(), s);
    c.overlapping += static_cast<std::uint64_t>(outs.end() - first_not_below);
  }
  return c;
}

AdequacyReport assess_adequacy(const RankedSuite& suite, const LabelSet& labels,
                               const AdequacyThresholds& thresholds) {
  thresholds.validate();
  std::vector<double> in_scores, out_scores;
  std::size_t lowest_in = 0;
  std::size_t highest_out = suite.size() + 1;
  for (const auto& e : labels.entries) {
    if (e.role != Role::Verification) continue;
    const RankedEntry* r = suite.find(e.test_id);
    if (!r) {
      fail(ErrorCode::UnknownTestId,
           "verification label for '" + e.test_id + "' is not in the ranked suite");
    }
    if (e.label == Label::In) {
      in_scores.push_back(r->score);
      lowest_in = std::max(lowest_in, r->rank);
    } else {
      out_scores.push_back(r->score);
      highest_out = std::min(highest_out, r->rank);
    }
  }
  if (in_scores.empty() || out_scores.empty()) {
    fail(ErrorCode::DegenerateLabels, "verification needs at least one in and one out label");
  }

  AdequacyReport rep;
  const PairCount pairs = count_overlapping_pairs(in_scores, out_scores);
  rep.overlapping_pairs = pairs.overlapping;
  rep.total_pairs = pairs.total;
  rep.pair_overlap = pairs.fraction();
  rep.pair_auc = 1.0 - rep.pair_overlap;
  rep.separated = pairs.overlapping == 0;
  if (rep.separated) rep.interval_d = RankInterval{lowest_in, highest_out};
  if (rep.pair_overlap <= thresholds.adequate) {
    rep.verdict = Adequacy::Adequate;
  } else if (rep.pair_overlap <= thresholds.marginal) {
    rep.verdict = Adequacy::Marginal;
  } else {
    rep.verdict = Adequacy::Inadequate;
  }
  rep.in_labels = in_scores.size();
  rep.out_labels = out_scores.size();
  rep.small_sample = rep.in_labels < kMinLabelsPerClass || rep.out_labels < kMinLabelsPerClass;
  return rep;
}

SelectionResult choose_cutoff(const RankedSuite& suite, const AdequacyReport& report,
                              std::size_t cutoff_rank, bool allow_override) {
  if (cutoff_rank < 1 || cutoff_rank > suite.size()) {
    fail(ErrorCode::InvalidArgument, "cutoff rank " + std::to_string(cutoff_rank) +
                                         " outside 1.." + std::to_string(suite.size()));
  }
  bool override_used = false;
  if (report.verdict == Adequacy::Inadequate) {
    if (!allow_override) {
      fail(ErrorCode::InadequateRanking, "ranking was assessed inadequate; override required");
    }
    override_used = true;
  } else {
    const bool inside = report.separated && report.interval_d &&
                        report.interval_d->low_rank <= cutoff_rank &&
                        cutoff_rank < report.interval_d->high_rank;
    if (!inside) {
      if (!allow_override) {
        fail(ErrorCode::CutoffOutsideInterval,
             "cutoff rank " + std::to_string(cutoff_rank) + " is outside the decision interval");
      }
      override_used = true;
    }
  }

  SelectionResult sel;
  sel.cutoff_rank = cutoff_rank;
  sel.t_e_test_id = suite.entries[cutoff_rank - 1].test_id;
  for (const auto& e : suite.entries) {
    (e.rank <= cutoff_rank ? sel.selected_ids : sel.excluded_ids).push_back(e.test_id);
  }
  sel.override_used = override_used;
  return sel;
}

}  // namespace rts
