#pragma once

// Random-labeling Monte Carlo p-values: labels are permuted uniformly over the
// fixed point set, so the NN digraph (and Q, R) stay fixed.

#include <cstdint>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "segregation.hpp"
#include "table.hpp"

namespace nnct {

struct PermutationResult {
    double observed = 0.0;
    std::uint64_t at_least_as_extreme = 0;
    std::uint64_t permutations = 0;
    double p_value = 1.0;
};

/// p = (1 + #{permuted statistic >= observed}) / (1 + n_perm). Permutation k
/// draws from its own stream (seed, k), so the result does not depend on the
/// worker count.
inline PermutationResult permutation_test(const LabeledPointSet& pts, TestFlavor flavor, std::uint64_t n_perm,
                                          std::uint64_t seed, std::size_t workers = 1,
                                          const TestOptions& options = {})
{
    if (n_perm < 99) {
        throw InvalidInput("at least 99 permutations are required");
    }
    if (pts.class_size(1) == 0 || pts.class_size(2) == 0) {
        throw InvalidInput("both classes must be present");
    }
    const NNStructure nns = compute_nn(pts);
    const Margins margins{pts.class_size(1), pts.class_size(2)};
    const CovarianceModel cov =
        covariance_model(margins, static_cast<double>(nns.q), static_cast<double>(nns.r));

    auto table_for = [&](std::span<const ClassLabel> labels) {
        CountMatrix counts{};
        for (std::size_t i = 0; i < labels.size(); ++i) {
            ++counts[labels[i] - 1][labels[nns.nn_index[i]] - 1];
        }
        return ContingencyTable(counts);
    };
    auto statistic = [&](const ContingencyTable& t) {
        if (flavor == TestFlavor::version_i && (t.col_sum(0) == 0 || t.col_sum(1) == 0)) {
            return 0.0;
        }
        return overall_test(flavor, t, cov, QRMode::observed(), options).statistic;
    };

    PermutationResult result;
    result.observed = statistic(table_for(pts.labels()));
    result.permutations = n_perm;
    // Relative slack so permutations reproducing the observed table count as ties.
    const double threshold = result.observed - 1e-9 * std::max(1.0, std::abs(result.observed));
    const std::vector<ClassLabel> base(pts.labels().begin(), pts.labels().end());
    result.at_least_as_extreme = parallel_reduce(
        n_perm, workers, std::uint64_t{0},
        [&](std::size_t k, std::uint64_t& hits) {
            StreamRng rng(seed, StreamPurpose::permutation, k);
            std::vector<ClassLabel> labels = base;
            rng.shuffle(labels);
            if (statistic(table_for(labels)) >= threshold) {
                ++hits;
            }
        },
        [](std::uint64_t& into, std::uint64_t from) { into += from; });
    result.p_value = static_cast<double>(1 + result.at_least_as_extreme) / static_cast<double>(1 + n_perm);
    return result;
}

inline double permutation_pvalue(const LabeledPointSet& pts, TestFlavor flavor, std::uint64_t n_perm,
                                 std::uint64_t seed, std::size_t workers = 1)
{
    return permutation_test(pts, flavor, n_perm, seed, workers).p_value;
}

} // namespace nnct
