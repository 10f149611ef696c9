#include "synapseroute/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "synapseroute/errors.hpp"
#include "synapseroute/rng.hpp"

namespace synapseroute {

std::vector<std::size_t> largest_remainder_allocate(const std::vector<double>& ideals,
                                                    std::size_t target_total) {
    std::vector<std::size_t> counts(ideals.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    remainders.reserve(ideals.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < ideals.size(); ++i) {
        const double floor_val = std::floor(ideals[i]);
        counts[i] = static_cast<std::size_t>(floor_val);
        assigned += counts[i];
        remainders.emplace_back(ideals[i] - floor_val, i);
    }
    if (assigned > target_total) {
        throw std::invalid_argument("largest_remainder_allocate: floors exceed target");
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::size_t deficit = target_total - assigned;
    for (std::size_t k = 0; k < remainders.size() && deficit > 0; ++k, --deficit) {
        ++counts[remainders[k].second];
    }
    if (deficit > 0) {
        throw std::invalid_argument("largest_remainder_allocate: target exceeds group capacity");
    }
    return counts;
}

std::vector<std::size_t> stratified_pick_impl(const std::vector<std::vector<std::size_t>>& groups,
                                              double fraction, std::uint64_t seed,
                                              std::size_t total) {
    std::vector<double> ideals;
    ideals.reserve(groups.size());
    for (const auto& g : groups) ideals.push_back(static_cast<double>(g.size()) * fraction);
    const auto target_total =
        static_cast<std::size_t>(std::llround(static_cast<double>(total) * fraction));
    const auto counts = largest_remainder_allocate(ideals, target_total);

    std::vector<std::size_t> picked;
    picked.reserve(target_total);
    Rng rng(seed);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        std::vector<std::size_t> shuffled = groups[g];
        rng.shuffle(shuffled);
        const std::size_t take = std::min(counts[g], shuffled.size());
        picked.insert(picked.end(), shuffled.begin(), shuffled.begin() + take);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

std::vector<std::size_t> stratified_pick(const std::vector<int>& keys, int num_keys,
                                         double fraction, std::uint64_t seed) {
    std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(num_keys));
    for (std::size_t i = 0; i < keys.size(); ++i) {
        groups.at(static_cast<std::size_t>(keys[i])).push_back(i);
    }
    groups.erase(std::remove_if(groups.begin(), groups.end(),
                                [](const auto& g) { return g.empty(); }),
                 groups.end());
    return stratified_pick_impl(groups, fraction, seed, keys.size());
}

std::pair<std::vector<LabeledQuestion>, std::vector<LabeledQuestion>> stratified_split(
    const std::vector<LabeledQuestion>& items, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("train_fraction must be in (0, 1)");
    }
    // Group indices by label in a fixed label order.
    std::vector<std::vector<std::size_t>> groups(3);
    for (std::size_t i = 0; i < items.size(); ++i) {
        groups[static_cast<std::size_t>(items[i].label)].push_back(i);
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (!groups[g].empty() && groups[g].size() < 2) {
            throw TooFewItems("label class " + to_string(static_cast<QuestionLabel>(g)) +
                              " has fewer than 2 items");
        }
    }
    groups.erase(std::remove_if(groups.begin(), groups.end(),
                                [](const auto& g) { return g.empty(); }),
                 groups.end());
    if (groups.empty()) throw TooFewItems("no items to split");

    const auto picked = stratified_pick_impl(groups, train_fraction, seed, items.size());

    std::vector<LabeledQuestion> train, test;
    train.reserve(picked.size());
    test.reserve(items.size() - picked.size());
    std::size_t next_pick = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (next_pick < picked.size() && picked[next_pick] == i) {
            train.push_back(items[i]);
            ++next_pick;
        } else {
            test.push_back(items[i]);
        }
    }
    return {std::move(train), std::move(test)};
}

std::vector<QuestionRecord> stratified_sample(const std::vector<QuestionRecord>& items,
                                              std::size_t target_n, std::uint64_t seed) {
    if (target_n > items.size()) {
        throw TargetTooLarge("target_n " + std::to_string(target_n) + " exceeds corpus size " +
                             std::to_string(items.size()));
    }
    if (target_n == 0) return {};

    // Group by source in enum order.
    std::map<Source, std::vector<std::size_t>> by_source;
    for (std::size_t i = 0; i < items.size(); ++i) by_source[items[i].source].push_back(i);

    std::vector<std::vector<std::size_t>> groups;
    groups.reserve(by_source.size());
    for (auto& [src, idx] : by_source) groups.push_back(std::move(idx));

    const double fraction = static_cast<double>(target_n) / static_cast<double>(items.size());
    std::vector<double> ideals;
    ideals.reserve(groups.size());
    for (const auto& g : groups) ideals.push_back(static_cast<double>(g.size()) * fraction);
    const auto counts = largest_remainder_allocate(ideals, target_n);

    std::vector<std::size_t> picked;
    picked.reserve(target_n);
    Rng rng(seed);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        std::vector<std::size_t> shuffled = groups[g];
        rng.shuffle(shuffled);
        picked.insert(picked.end(), shuffled.begin(), shuffled.begin() + counts[g]);
    }
    std::sort(picked.begin(), picked.end());

    std::vector<QuestionRecord> out;
    out.reserve(picked.size());
    for (std::size_t i : picked) out.push_back(items[i]);
    return out;
}

}  // namespace synapseroute
