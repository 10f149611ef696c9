#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "synapseroute/types.hpp"

namespace synapseroute {

// Allocates `target_total` slots over groups proportionally to `ideals`
// (largest-remainder rounding: floor everything, then hand out the deficit
// by descending fractional part, ties to the lower group index).
std::vector<std::size_t> largest_remainder_allocate(const std::vector<double>& ideals,
                                                    std::size_t target_total);

// Label-stratified train/test split. Per-class train counts follow
// round(class_count * train_fraction) with largest-remainder correction so
// the split totals match round(n * train_fraction). Deterministic for a
// fixed seed; outputs preserve input order and partition the input.
// Throws TooFewItems when any label class has fewer than 2 items.
std::pair<std::vector<LabeledQuestion>, std::vector<LabeledQuestion>> stratified_split(
    const std::vector<LabeledQuestion>& items, double train_fraction, std::uint64_t seed);

// Index-level variant shared by the split and by threshold carve-outs:
// groups items by `keys` (values in [0, num_keys)) and returns the indices
// selected into the "train" side, in input order.
std::vector<std::size_t> stratified_pick(const std::vector<int>& keys, int num_keys,
                                         double fraction, std::uint64_t seed);

// Source-stratified subsample of `target_n` questions; per-source proportions
// are preserved within one item. Deterministic for a fixed seed.
// Throws TargetTooLarge when target_n exceeds the corpus size.
std::vector<QuestionRecord> stratified_sample(const std::vector<QuestionRecord>& items,
                                              std::size_t target_n, std::uint64_t seed);

}  // namespace synapseroute
