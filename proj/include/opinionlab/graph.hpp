#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace opinionlab {

enum class GraphKind { path, cycle, star, wheel, all_to_all, custom };

std::string_view to_string(GraphKind kind);
GraphKind parse_graph_kind(std::string_view name);

/// Signed, weighted coupling structure between agents. Entry (i, k) is the
/// weight with which agent k influences agent i.
class AdjacencySpec {
public:
    /// Takes an explicit matrix; throws ParameterError if it is not square,
    /// empty, or non-finite. A nonzero diagonal is rejected unless allowed.
    explicit AdjacencySpec(Eigen::MatrixXd entries, GraphKind kind = GraphKind::custom,
                           bool allow_self_loops = false);

    int n_agents() const { return static_cast<int>(entries_.rows()); }
    const Eigen::MatrixXd& entries() const { return entries_; }
    GraphKind kind() const { return kind_; }
    /// True iff any entry is negative.
    bool is_signed() const { return signed_; }
    /// Bit-exact symmetry.
    bool is_symmetric() const { return symmetric_; }
    bool has_zero_diagonal() const;

private:
    Eigen::MatrixXd entries_;
    GraphKind kind_;
    bool signed_;
    bool symmetric_;
};

/// Standard 0/1 adjacency of the named family scaled by `weight`. Star and
/// wheel graphs use agent 0 as the hub; the wheel rim is a cycle over agents
/// 1..n-1. Requires n >= 2 (n >= 3 for cycle and wheel).
AdjacencySpec build_graph(GraphKind kind, int n, double weight = 1.0);

using Partition = std::vector<std::vector<int>>;

/// Throws ParameterError unless the cells cover agents 0..n-1 disjointly
/// with no empty cell.
void validate_partition(const Partition& partition, int n);
/// cell_of[i] = index of the cell holding agent i.
std::vector<int> cell_index(const Partition& partition, int n);

/// Signed block structure: `within` between distinct agents of the same
/// cell, `across` between agents of different cells.
AdjacencySpec block_graph(const Partition& partition, double within,
                          double across);

/// Every node reaches every other node through nonzero entries (sign ignored).
bool is_strongly_connected(const AdjacencySpec& a);

struct SpectralSummary {
    /// All eigenvalues, sorted by ascending real part.
    Eigen::VectorXcd eigenvalues;
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    Eigen::VectorXd v_max, w_max, v_min, w_min;
    bool lambda_max_real = false;
    bool lambda_min_real = false;
    bool lambda_max_simple = false;
    bool lambda_min_simple = false;
    bool lambda_max_real_part_isolated = false;
    bool lambda_min_real_part_isolated = false;
    /// All entries of v_max strictly positive (> 1e-12).
    bool perron_positive = false;
    bool strongly_connected = false;
    bool symmetric = false;
    /// Human-readable reasons for any flag that came out false.
    std::vector<std::string> diagnostics;
};

/// Tolerance used for the simplicity and isolation flags.
double spectral_gap_tolerance(double lambda);

/// Extremal eigenvalues by real part, with unit right (v) and left (w)
/// eigenvectors. v_max and w_max are oriented to have nonnegative sum;
/// v_min has its first significant entry positive and w_min satisfies
/// <v_min, w_min> > 0.
SpectralSummary spectral_extrema(const AdjacencySpec& a);
SpectralSummary spectral_extrema(const Eigen::MatrixXd& m);

}  // namespace opinionlab
