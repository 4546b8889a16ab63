#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "rts/datamodel.hpp"
#include "rts/ranker.hpp"

namespace rts::fixtures {

// Synthetic "planted signal" corpus. Each test has a latent risk level 0..3;
// level >= 1 tests mention words from a small risky vocabulary (more words at
// higher levels, drawn from a few description templates per level) and cover volatile requirements that change in most
// releases. A test fails at a release with a probability that grows with its
// level and jumps when one of its requirements changed there. Every failure
// reveals its own defect, so faults are single-revealer.
struct PlantedOptions {
  std::size_t tests = 400;
  std::size_t releases = 6;
  std::uint64_t seed = 20190607;
};

struct PlantedCorpus {
  Dataset dataset;
  std::map<std::string, int> risk_level;  // test id -> latent level
};

PlantedCorpus planted_corpus(const PlantedOptions& options = {});

// Same corpus with descriptions permuted across tests (fixed seed), which
// removes the textual signal while keeping history and links.
PlantedCorpus shuffled_corpus(const PlantedOptions& options = {},
                              std::uint64_t shuffle_seed = 7);

// In/out decisions a test manager who knows the risky areas would make:
// level >= 1 is in. Entries are shuffled with `seed`; the first
// `training_per_class` of each class get the training role and the next
// `verification_per_class` the verification role.
LabelSet oracle_labels(const PlantedCorpus& corpus, std::size_t training_per_class,
                       std::size_t verification_per_class, std::uint64_t seed);

// `tests` tests with history at release "R1"; faults F1..Fm each revealed by
// exactly one distinct test.
Dataset single_revealer_dataset(std::size_t tests, std::size_t faults, std::uint64_t seed);

}  // namespace rts::fixtures
