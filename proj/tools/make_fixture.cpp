// Searches for a labeled CSR point set with a prescribed NNCT, Q and R.
//
// Point sets are drawn until the NN digraph has the requested Q and R, then
// labels are hill-climbed (swapping a class-1 and a class-2 label whenever the
// L1 distance to the target table does not grow) until the table matches.

#include <array>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nnct/nnct.hpp"

namespace {

using nnct::ClassLabel;

std::uint64_t table_distance(const nnct::CountMatrix& a, const nnct::CountMatrix& b)
{
    std::uint64_t d = 0;
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            d += a[i][j] > b[i][j] ? a[i][j] - b[i][j] : b[i][j] - a[i][j];
        }
    }
    return d;
}

nnct::CountMatrix count(const std::vector<ClassLabel>& labels, const nnct::NNStructure& nns)
{
    nnct::CountMatrix c{};
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ++c[labels[i] - 1][labels[nns.nn_index[i]] - 1];
    }
    return c;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Search for a CSR point set with a given NNCT, Q and R"};
    std::uint64_t n1 = 50, n2 = 50, q = 70, r = 60, seed = 1, max_sets = 1000000;
    std::vector<std::uint64_t> counts{30, 20, 19, 31};
    std::vector<std::string> names{"X", "Y"};
    app.add_option("--n1", n1);
    app.add_option("--n2", n2);
    app.add_option("--counts", counts, "N11,N12,N21,N22")->delimiter(',')->expected(4);
    app.add_option("--q", q);
    app.add_option("--r", r);
    app.add_option("--seed", seed);
    app.add_option("--max-sets", max_sets);
    app.add_option("--names", names, "class names written to the label column")->delimiter(',')->expected(2);
    CLI11_PARSE(app, argc, argv);

    const nnct::CountMatrix target{{{counts[0], counts[1]}, {counts[2], counts[3]}}};
    if (counts[0] + counts[1] != n1 || counts[2] + counts[3] != n2) {
        std::cerr << "row sums of --counts must equal n1, n2\n";
        return 3;
    }
    const std::uint64_t n = n1 + n2;
    for (std::uint64_t set = 0; set < max_sets; ++set) {
        nnct::StreamRng rng(seed, nnct::StreamPurpose::fixture, set);
        std::vector<nnct::Point> points(n);
        for (auto& p : points) {
            p.x = rng.uniform();
            p.y = rng.uniform();
        }
        const nnct::NNStructure nns = nnct::compute_nn(points);
        if (nns.q != q || nns.r != r) {
            continue;
        }
        for (int restart = 0; restart < 50; ++restart) {
            std::vector<ClassLabel> labels(n, 2);
            std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n1), 1);
            rng.shuffle(labels);
            std::uint64_t dist = table_distance(count(labels, nns), target);
            for (int step = 0; step < 20000 && dist > 0; ++step) {
                std::size_t a = rng.below(n), b = rng.below(n);
                if (labels[a] == labels[b]) {
                    continue;
                }
                std::swap(labels[a], labels[b]);
                const std::uint64_t next = table_distance(count(labels, nns), target);
                if (next <= dist) {
                    dist = next;
                }
                else {
                    std::swap(labels[a], labels[b]);
                }
            }
            if (dist == 0) {
                std::cerr << "found at point set " << set << " restart " << restart << '\n';
                nnct::write_points_csv(std::cout, nnct::LabeledPointSet(points, labels), {names[0], names[1]});
                return 0;
            }
        }
    }
    std::cerr << "no match within " << max_sets << " point sets\n";
    return 1;
}
