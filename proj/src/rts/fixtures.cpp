#include "rts/fixtures.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <set>
#include <span>

#include "rts/error.hpp"
#include "rts/rng.hpp"

namespace rts::fixtures {

namespace {

constexpr std::array<const char*, 3> kRiskyWords = {"timeout", "interface", "migration"};
constexpr std::array<const char*, 4> kNeutralWords = {"login", "report", "display", "search"};
constexpr std::array<const char*, 3> kTags = {"ui", "backend", "batch"};

constexpr std::size_t kDescriptionWords = 12;
constexpr std::size_t kTemplatesPerLevel = 4;
constexpr std::array<std::size_t, 4> kRiskyWordsPerLevel = {0, 2, 4, 7};
// Failure probability per level when a covered requirement changed; a tenth
// of it otherwise.
constexpr std::array<double, 4> kFailProbability = {0.01, 0.02, 0.1, 0.85};
constexpr std::size_t kRequirements = 30;
constexpr std::size_t kVolatileRequirements = 10;

std::string numbered(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

// Descriptions come from a few fixed templates per level, as in suites where
// tests are cloned from one another. Each template is generated from its own
// (level, template) seed.
std::string describe(int level, SplitMix64& rng) {
  SplitMix64 words_rng(static_cast<std::uint64_t>(level) * 1000 + rng.below(kTemplatesPerLevel));
  std::vector<std::string> words;
  for (std::size_t i = 0; i < kRiskyWordsPerLevel[level]; ++i) {
    words.emplace_back(kRiskyWords[words_rng.below(kRiskyWords.size())]);
  }
  while (words.size() < kDescriptionWords) {
    words.emplace_back(kNeutralWords[words_rng.below(kNeutralWords.size())]);
  }
  shuffle(std::span<std::string>(words), words_rng);
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

}  // namespace

PlantedCorpus planted_corpus(const PlantedOptions& options) {
  if (options.tests < 8 || options.releases < 1) {
    fail(ErrorCode::InvalidArgument, "planted corpus needs >= 8 tests and >= 1 release");
  }
  SplitMix64 rng(options.seed);
  PlantedCorpus corpus;
  Dataset& d = corpus.dataset;
  d.project = "planted-signal";
  for (std::size_t r = 1; r <= options.releases; ++r) d.releases.push_back(numbered("R", r, 1));

  for (std::size_t i = 1; i <= kRequirements; ++i) {
    Requirement req;
    req.id = numbered("REQ-", i, 2);
    const bool is_volatile = i <= kVolatileRequirements;
    req.title = is_volatile ? "Volatile requirement" : "Stable requirement";
    req.description = is_volatile ? "interface to an external system" : "core behaviour";
    for (const auto& rel : d.releases) {
      if (rng.bernoulli(is_volatile ? 0.9 : 0.1)) req.changed_in_releases.push_back(rel);
    }
    d.requirements.push_back(std::move(req));
  }

  // Level shares 1/2, 1/4, 3/20, 1/10.
  std::vector<int> levels(options.tests, 0);
  const std::size_t n = options.tests;
  const std::size_t n3 = n / 10, n2 = n * 3 / 20, n1 = n / 4;
  std::fill(levels.begin(), levels.begin() + static_cast<long>(n3), 3);
  std::fill(levels.begin() + static_cast<long>(n3), levels.begin() + static_cast<long>(n3 + n2), 2);
  std::fill(levels.begin() + static_cast<long>(n3 + n2),
            levels.begin() + static_cast<long>(n3 + n2 + n1), 1);
  shuffle(std::span<int>(levels), rng);

  for (std::size_t i = 0; i < n; ++i) {
    TestCase t;
    t.id = numbered("T", i + 1, 4);
    t.title = "Regression test";
    t.description = describe(levels[i], rng);
    const std::size_t primary = levels[i] >= 1
                                    ? rng.below(kVolatileRequirements)
                                    : kVolatileRequirements +
                                          rng.below(kRequirements - kVolatileRequirements);
    t.requirement_ids.push_back(d.requirements[primary].id);
    if (rng.bernoulli(0.3)) {
      const std::size_t extra = rng.below(kRequirements);
      if (extra != primary) t.requirement_ids.push_back(d.requirements[extra].id);
    }
    t.tags.emplace_back(kTags[rng.below(kTags.size())]);
    corpus.risk_level[t.id] = levels[i];
    d.tests.push_back(std::move(t));
  }

  std::size_t defect_counter = 0;
  for (const auto& rel : d.releases) {
    for (auto& t : d.tests) {
      HistoryEntry h;
      h.release = rel;
      if (rng.bernoulli(0.03)) {
        h.executed = false;
        h.verdict = Verdict::Skipped;
        t.history.push_back(std::move(h));
        continue;
      }
      bool changed = false;
      for (const auto& rid : t.requirement_ids) {
        const auto& req = d.requirements[static_cast<std::size_t>(std::stoi(rid.substr(4)) - 1)];
        const auto& c = req.changed_in_releases;
        changed = changed || std::find(c.begin(), c.end(), rel) != c.end();
      }
      const double p = kFailProbability[corpus.risk_level[t.id]] * (changed ? 1.0 : 0.1);
      h.executed = true;
      if (rng.bernoulli(p)) {
        h.verdict = Verdict::Fail;
        Defect defect;
        defect.id = numbered("D-", ++defect_counter, 5);
        defect.title = "Regression in " + t.id;
        defect.severity = 1 + static_cast<int>(rng.below(3));
        defect.found_in_release = rel;
        h.revealed_defect_ids.push_back(defect.id);
        t.defect_ids.push_back(defect.id);
        d.defects.push_back(std::move(defect));
      } else {
        h.verdict = Verdict::Pass;
      }
      t.history.push_back(std::move(h));
    }
  }
  return corpus;
}

PlantedCorpus shuffled_corpus(const PlantedOptions& options, std::uint64_t shuffle_seed) {
  PlantedCorpus corpus = planted_corpus(options);
  corpus.dataset.project = "planted-signal-shuffled";
  std::vector<std::string> descriptions;
  for (const auto& t : corpus.dataset.tests) descriptions.push_back(t.description);
  SplitMix64 rng(shuffle_seed);
  shuffle(std::span<std::string>(descriptions), rng);
  for (std::size_t i = 0; i < descriptions.size(); ++i) {
    corpus.dataset.tests[i].description = std::move(descriptions[i]);
  }
  return corpus;
}

LabelSet oracle_labels(const PlantedCorpus& corpus, std::size_t training_per_class,
                       std::size_t verification_per_class, std::uint64_t seed) {
  std::vector<std::string> ins, outs;
  for (const auto& t : corpus.dataset.tests) {
    (corpus.risk_level.at(t.id) >= 1 ? ins : outs).push_back(t.id);
  }
  const std::size_t need = training_per_class + verification_per_class;
  if (ins.size() < need || outs.size() < need) {
    fail(ErrorCode::InvalidArgument, "corpus too small for the requested label budget");
  }
  SplitMix64 rng(seed);
  shuffle(std::span<std::string>(ins), rng);
  shuffle(std::span<std::string>(outs), rng);
  LabelSet labels;
  for (std::size_t i = 0; i < need; ++i) {
    const Role role = i < training_per_class ? Role::Training : Role::Verification;
    labels.entries.push_back({ins[i], Label::In, role});
    labels.entries.push_back({outs[i], Label::Out, role});
  }
  return labels;
}

Dataset single_revealer_dataset(std::size_t tests, std::size_t faults, std::uint64_t seed) {
  if (faults == 0 || faults > tests) {
    fail(ErrorCode::InvalidArgument, "need 1 <= faults <= tests");
  }
  Dataset d;
  d.project = "single-revealer";
  d.releases = {"R1"};
  std::vector<std::size_t> revealers(tests);
  for (std::size_t i = 0; i < tests; ++i) revealers[i] = i;
  SplitMix64 rng(seed);
  shuffle(std::span<std::size_t>(revealers), rng);
  for (std::size_t i = 0; i < tests; ++i) {
    TestCase t;
    t.id = numbered("T", i + 1, 4);
    t.title = "Test " + std::to_string(i + 1);
    t.description = "single revealer fixture";
    t.history.push_back({"R1", true, Verdict::Pass, {}});
    d.tests.push_back(std::move(t));
  }
  for (std::size_t f = 0; f < faults; ++f) {
    Defect defect{numbered("F", f + 1, 3), "fault", 1, "R1"};
    auto& h = d.tests[revealers[f]].history.front();
    h.verdict = Verdict::Fail;
    h.revealed_defect_ids.push_back(defect.id);
    d.tests[revealers[f]].defect_ids.push_back(defect.id);
    d.defects.push_back(std::move(defect));
  }
  return d;
}

}  // namespace rts::fixtures
