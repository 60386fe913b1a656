#pragma once

#include "driftscope/dataset.hpp"
#include "driftscope/tree.hpp"

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace driftscope {

// Interventional background: distinct binary rows with their multiplicities.
// Collapsing duplicates changes nothing in the attribution, it only saves work.
class Background {
public:
    Background() = default;
    explicit Background(const RowMatrix& rows);

    std::size_t size() const noexcept { return weights_.size(); }
    std::size_t total_rows() const noexcept { return total_; }
    std::size_t width() const noexcept { return static_cast<std::size_t>(patterns_.cols()); }
    std::span<const double> pattern(std::size_t i) const {
        return {patterns_.data() + i * width(), width()};
    }
    // Multiplicity divided by the total row count.
    double weight(std::size_t i) const { return weights_[i]; }

private:
    RowMatrix patterns_;
    std::vector<double> weights_;
    std::size_t total_ = 0;
};

enum class ShapleyAlgorithm { automatic, enumeration, path };
std::string_view to_string(ShapleyAlgorithm algorithm);

// Largest feature count for which `automatic` uses subset enumeration.
inline constexpr std::size_t kEnumerationMaxFeatures = 15;

// Shapley values of the tree's class-1 probability at x under the interventional
// convention: the value of coalition S is the background mean of
// f(x on S, background row elsewhere). Efficiency holds exactly:
// sum(phi) = f(x) - mean over background of f.
//
// enumeration: for each background row z, enumerates every subset of the tested
//   features on which x and z disagree (all other features are dummies).
// path: for each z, walks the tree once. Where x and z take different branches,
//   both branches are followed, recording that the feature must be in S (x side)
//   or out of S (z side). A leaf reached with a features forced in and b forced out
//   has the value game 1[A in S, B out of S], whose Shapley value is
//   (a-1)! b! / (a+b)! for members of A and -a! (b-1)! / (a+b)! for members of B.
//   Cost is O(leaves * depth) per background row.
std::vector<double> tree_shapley(const DecisionTree& tree, std::span<const double> x, const Background& background,
                                 ShapleyAlgorithm algorithm = ShapleyAlgorithm::automatic);

std::vector<double> tree_shapley_enumeration(const DecisionTree& tree, std::span<const double> x,
                                             const Background& background);
std::vector<double> tree_shapley_path(const DecisionTree& tree, std::span<const double> x,
                                      const Background& background);

// Mean model output over the background; the efficiency baseline.
double background_mean(const DecisionTree& tree, const Background& background);

} // namespace driftscope
